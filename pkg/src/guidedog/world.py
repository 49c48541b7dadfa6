"""Semantic 2D world map.

A map is a set of named polygonal regions (locations), point doors, facts
about which locations carry which doors, and door-free adjacencies between
locations.  Everything downstream (planner, simulator, dialog) treats the
loaded map as immutable ground truth.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

Point = tuple[float, float]


class MapError(ValueError):
    """Base class for problems with a map file."""


class MapParseError(MapError):
    """The map file is missing, unreadable, or not well-formed."""


class MapValidationError(MapError):
    """The map parsed but violates a structural invariant."""


class UnknownEntityError(MapError, KeyError):
    """A location or door id does not resolve within the map."""


# ---------------------------------------------------------------------------
# geometry helpers


def _signed_area(polygon: tuple[Point, ...]) -> float:
    total = 0.0
    n = len(polygon)
    for i in range(n):
        x1, y1 = polygon[i]
        x2, y2 = polygon[(i + 1) % n]
        total += x1 * y2 - x2 * y1
    return total / 2.0


def _cross(o: Point, a: Point, b: Point) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _on_segment(p: Point, a: Point, b: Point, eps: float = 1e-9) -> bool:
    if abs(_cross(a, b, p)) > eps * max(1.0, abs(b[0] - a[0]) + abs(b[1] - a[1])):
        return False
    dot = (p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])
    if dot < -eps:
        return False
    sq_len = (b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2
    return dot <= sq_len + eps


def _segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool:
    """True if the closed segments share any point (proper or improper)."""
    d1 = _cross(q1, q2, p1)
    d2 = _cross(q1, q2, p2)
    d3 = _cross(p1, p2, q1)
    d4 = _cross(p1, p2, q2)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    ):
        return True
    return (
        _on_segment(p1, q1, q2)
        or _on_segment(p2, q1, q2)
        or _on_segment(q1, p1, p2)
        or _on_segment(q2, p1, p2)
    )


def _segments_cross_properly(p1: Point, p2: Point, q1: Point, q2: Point) -> bool:
    """True only when the segments cross at a single interior point."""
    d1 = _cross(q1, q2, p1)
    d2 = _cross(q1, q2, p2)
    d3 = _cross(p1, p2, q1)
    d4 = _cross(p1, p2, q2)
    return ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    )


def point_in_region(point: Point, polygon: tuple[Point, ...]) -> bool:
    """Boundary-inclusive point-in-polygon test (winding number)."""
    n = len(polygon)
    for i in range(n):
        if _on_segment(point, polygon[i], polygon[(i + 1) % n]):
            return True
    wn = 0
    x, y = point
    for i in range(n):
        x1, y1 = polygon[i]
        x2, y2 = polygon[(i + 1) % n]
        if y1 <= y:
            if y2 > y and _cross((x1, y1), (x2, y2), (x, y)) > 0:
                wn += 1
        elif y2 <= y and _cross((x1, y1), (x2, y2), (x, y)) < 0:
            wn -= 1
    return wn != 0


def _point_strictly_inside(point: Point, polygon: tuple[Point, ...]) -> bool:
    n = len(polygon)
    for i in range(n):
        if _on_segment(point, polygon[i], polygon[(i + 1) % n]):
            return False
    return point_in_region(point, polygon)


def _polygon_is_simple(polygon: tuple[Point, ...]) -> bool:
    n = len(polygon)
    for i in range(n):
        a1, a2 = polygon[i], polygon[(i + 1) % n]
        for j in range(i + 1, n):
            # skip the edge itself and the two edges sharing a vertex with it
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            if _segments_intersect(a1, a2, polygon[j], polygon[(j + 1) % n]):
                return False
    return True


def _interiors_overlap(a: tuple[Point, ...], a_probe: Point, b: tuple[Point, ...], b_probe: Point) -> bool:
    # Shared boundary edges are fine; only interior overlap is rejected.
    na, nb = len(a), len(b)
    for i in range(na):
        for j in range(nb):
            if _segments_cross_properly(a[i], a[(i + 1) % na], b[j], b[(j + 1) % nb]):
                return True
    if any(_point_strictly_inside(v, b) for v in a):
        return True
    if any(_point_strictly_inside(v, a) for v in b):
        return True
    # catches identical / edge-sharing nesting where no vertex is strict
    return _point_strictly_inside(a_probe, b) or _point_strictly_inside(b_probe, a)


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class Location:
    id: str
    name: str
    centroid: Point
    region: tuple[Point, ...]


@dataclass(frozen=True)
class Door:
    id: str
    position: Point


@dataclass(frozen=True)
class HasDoorFact:
    location_id: str
    door_id: str


@dataclass(frozen=True)
class WorldMap:
    """Immutable semantic map; safe for concurrent readers."""

    locations: dict[str, Location]
    doors: dict[str, Door]
    hasdoor: tuple[HasDoorFact, ...]
    open_adjacency: frozenset[frozenset[str]]
    door_open_cost: float = 6.0
    _doors_of: dict[str, tuple[str, ...]] = field(default_factory=dict, repr=False)
    _holders_of: dict[str, tuple[str, ...]] = field(default_factory=dict, repr=False)

    def location_names(self) -> list[str]:
        return [self.locations[i].name for i in sorted(self.locations)]

    def location_by_name(self, name: str) -> Location | None:
        wanted = name.strip().casefold()
        for loc in self.locations.values():
            if loc.name.casefold() == wanted:
                return loc
        return None

    def doors_of(self, location_id: str) -> tuple[str, ...]:
        if location_id not in self.locations:
            raise UnknownEntityError(f"unknown location id {location_id!r}")
        return self._doors_of.get(location_id, ())

    def holders_of(self, door_id: str) -> tuple[str, ...]:
        """Location ids that carry the given door."""
        if door_id not in self.doors:
            raise UnknownEntityError(f"unknown door id {door_id!r}")
        return self._holders_of.get(door_id, ())

    def open_neighbors(self, location_id: str) -> list[str]:
        if location_id not in self.locations:
            raise UnknownEntityError(f"unknown location id {location_id!r}")
        out = []
        for pair in self.open_adjacency:
            if location_id in pair:
                (other,) = pair - {location_id}
                out.append(other)
        return sorted(out)


def _index_facts(facts: tuple[HasDoorFact, ...]) -> tuple[dict, dict]:
    doors_of: dict[str, list[str]] = {}
    holders_of: dict[str, list[str]] = {}
    for fact in facts:
        doors_of.setdefault(fact.location_id, []).append(fact.door_id)
        holders_of.setdefault(fact.door_id, []).append(fact.location_id)
    return (
        {k: tuple(sorted(set(v))) for k, v in doors_of.items()},
        {k: tuple(sorted(set(v))) for k, v in holders_of.items()},
    )


# ---------------------------------------------------------------------------
# loading and validation


def _as_point(raw, what: str) -> Point:
    if (
        not isinstance(raw, (list, tuple))
        or len(raw) != 2
        or not all(isinstance(v, (int, float)) for v in raw)
    ):
        raise MapParseError(f"{what}: expected a [x, y] pair, got {raw!r}")
    return (float(raw[0]), float(raw[1]))


def map_from_dict(data: dict, source: str = "<dict>") -> WorldMap:
    """Build and validate a WorldMap from already-parsed map data."""
    if not isinstance(data, dict):
        raise MapParseError(f"{source}: top level must be an object")

    locations: dict[str, Location] = {}
    for raw in data.get("locations", []):
        try:
            loc_id = str(raw["id"])
            name = str(raw["name"])
            centroid = _as_point(raw["centroid"], f"location {loc_id!r} centroid")
            region = tuple(
                _as_point(v, f"location {loc_id!r} region vertex") for v in raw["region"]
            )
        except (KeyError, TypeError) as exc:
            raise MapParseError(f"{source}: malformed location entry {raw!r}: {exc}") from exc
        if loc_id in locations:
            raise MapValidationError(f"duplicate location id {loc_id!r}")
        locations[loc_id] = Location(id=loc_id, name=name, centroid=centroid, region=region)

    doors: dict[str, Door] = {}
    for raw in data.get("doors", []):
        try:
            door_id = str(raw["id"])
            position = _as_point(raw["position"], f"door {door_id!r} position")
        except (KeyError, TypeError) as exc:
            raise MapParseError(f"{source}: malformed door entry {raw!r}: {exc}") from exc
        if door_id in doors:
            raise MapValidationError(f"duplicate door id {door_id!r}")
        doors[door_id] = Door(id=door_id, position=position)

    facts = []
    for raw in data.get("hasdoor", []):
        if not isinstance(raw, (list, tuple)) or len(raw) != 2:
            raise MapParseError(f"{source}: hasdoor entries must be [location_id, door_id] pairs, got {raw!r}")
        facts.append(HasDoorFact(location_id=str(raw[0]), door_id=str(raw[1])))

    adjacency = set()
    for raw in data.get("open_adjacency", []):
        if not isinstance(raw, (list, tuple)) or len(raw) != 2:
            raise MapParseError(f"{source}: open_adjacency entries must be [id, id] pairs, got {raw!r}")
        adjacency.add(frozenset((str(raw[0]), str(raw[1]))))

    cost = data.get("door_open_cost", 6.0)
    if not isinstance(cost, (int, float)) or cost < 0:
        raise MapValidationError(f"door_open_cost must be a non-negative number, got {cost!r}")

    doors_of, holders_of = _index_facts(tuple(facts))
    world = WorldMap(
        locations=locations,
        doors=doors,
        hasdoor=tuple(facts),
        open_adjacency=frozenset(adjacency),
        door_open_cost=float(cost),
        _doors_of=doors_of,
        _holders_of=holders_of,
    )
    _validate(world)
    return world


def load_map(path: str) -> WorldMap:
    """Load and validate a map file (JSON, lengths in meters)."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise MapParseError(f"cannot read map file {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise MapParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return map_from_dict(data, source=path)


def _validate(world: WorldMap) -> None:
    if not world.locations:
        raise MapValidationError("map has no locations")

    shared = set(world.locations) & set(world.doors)
    if shared:
        raise MapValidationError(f"ids used for both a location and a door: {sorted(shared)}")

    seen_names: dict[str, str] = {}
    for loc in world.locations.values():
        key = loc.name.casefold()
        if key in seen_names:
            raise MapValidationError(
                f"duplicate location name {loc.name!r} (ids {seen_names[key]!r}, {loc.id!r})"
            )
        seen_names[key] = loc.id

    for loc in world.locations.values():
        if len(loc.region) < 3:
            raise MapValidationError(f"location {loc.id!r}: degenerate polygon (< 3 vertices)")
        if abs(_signed_area(loc.region)) < 1e-12:
            raise MapValidationError(f"location {loc.id!r}: degenerate polygon (zero area)")
        if _signed_area(loc.region) < 0:
            raise MapValidationError(f"location {loc.id!r}: region vertices must be counter-clockwise")
        if not _polygon_is_simple(loc.region):
            raise MapValidationError(f"location {loc.id!r}: region polygon is self-intersecting")
        if not point_in_region(loc.centroid, loc.region):
            raise MapValidationError(f"location {loc.id!r}: centroid lies outside its region")

    locs = sorted(world.locations.values(), key=lambda l: l.id)
    for i, a in enumerate(locs):
        for b in locs[i + 1 :]:
            if _interiors_overlap(a.region, a.centroid, b.region, b.centroid):
                raise MapValidationError(
                    f"regions of {a.id!r} and {b.id!r} have overlapping interiors"
                )

    for fact in world.hasdoor:
        if fact.location_id not in world.locations:
            raise MapValidationError(f"hasdoor fact references unknown location {fact.location_id!r}")
        if fact.door_id not in world.doors:
            raise MapValidationError(f"hasdoor fact references unknown door {fact.door_id!r}")

    for pair in world.open_adjacency:
        if len(pair) != 2:
            raise MapValidationError(f"open_adjacency pair {sorted(pair)} is not two distinct locations")
        for loc_id in pair:
            if loc_id not in world.locations:
                raise MapValidationError(f"open_adjacency references unknown location {loc_id!r}")

    # connectivity over the union of door edges and open edges
    edges: dict[str, set[str]] = {loc_id: set() for loc_id in world.locations}
    for pair in world.open_adjacency:
        a, b = sorted(pair)
        edges[a].add(b)
        edges[b].add(a)
    for door_id, holders in world._holders_of.items():
        for a in holders:
            for b in holders:
                if a != b:
                    edges[a].add(b)
    start = next(iter(world.locations))
    seen = {start}
    frontier = [start]
    while frontier:
        current = frontier.pop()
        for neighbor in edges[current]:
            if neighbor not in seen:
                seen.add(neighbor)
                frontier.append(neighbor)
    if len(seen) != len(world.locations):
        missing = sorted(set(world.locations) - seen)
        raise MapValidationError(f"map is disconnected; unreachable locations: {missing}")


# ---------------------------------------------------------------------------
# queries


def door_access(world: WorldMap, p1: str, p2: str) -> set[str]:
    """Doors through which two distinct locations access each other."""
    for loc_id in (p1, p2):
        if loc_id not in world.locations:
            raise UnknownEntityError(f"unknown location id {loc_id!r}")
    if p1 == p2:
        return set()
    return set(world._doors_of.get(p1, ())) & set(world._doors_of.get(p2, ()))


def region_of(world: WorldMap, point: Point) -> str | None:
    """Location id whose region contains the point, or None.

    Points on a shared edge belong to the location with the lowest id, which
    keeps trajectory replay deterministic.
    """
    hits = [
        loc.id for loc in world.locations.values() if point_in_region(point, loc.region)
    ]
    return min(hits) if hits else None


def reference_point(world: WorldMap, entity_id: str) -> Point:
    if entity_id in world.locations:
        return world.locations[entity_id].centroid
    if entity_id in world.doors:
        return world.doors[entity_id].position
    raise UnknownEntityError(f"unknown location or door id {entity_id!r}")


def distance(world: WorldMap, a: str, b: str) -> float:
    """Straight-line meters between the reference points of two entities."""
    pa = reference_point(world, a)
    pb = reference_point(world, b)
    return math.hypot(pa[0] - pb[0], pa[1] - pb[1])


def map_to_dict(world: WorldMap) -> dict:
    """Round-trippable plain-data form of the map (the map file schema)."""
    return {
        "locations": [
            {
                "id": loc.id,
                "name": loc.name,
                "centroid": list(loc.centroid),
                "region": [list(v) for v in loc.region],
            }
            for loc in sorted(world.locations.values(), key=lambda l: l.id)
        ],
        "doors": [
            {"id": d.id, "position": list(d.position)}
            for d in sorted(world.doors.values(), key=lambda d: d.id)
        ],
        "hasdoor": sorted([f.location_id, f.door_id] for f in world.hasdoor),
        "open_adjacency": sorted(sorted(pair) for pair in world.open_adjacency),
        "door_open_cost": world.door_open_cost,
    }
