"""Minimum-cost navigation planning over a WorldMap.

Plans are sequences of four primitive actions: approach a door, open it, go
through it, and go to a location.  Costs are meters-equivalent: movement
actions cost straight-line distance, opening a door costs the map's constant
door_open_cost, and gothrough is free (its distance is folded into the
surrounding approach/goto legs).

The search is uniform-cost (Dijkstra) over a small symbolic state space:
at a location, at a door (not yet opened), or through a door.  Ties between
equal-cost plans break on the lexicographically smallest sequence of
(action-kind rank, entity id) pairs, so results are reproducible.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass

from . import world as world_model
from .world import UnknownEntityError, WorldMap

APPROACH = "approach"
OPENDOOR = "opendoor"
GOTHROUGH = "gothrough"
GOTO = "goto"

_KIND_RANK = {APPROACH: 0, OPENDOOR: 1, GOTHROUGH: 2, GOTO: 3}

DEFAULT_WALKING_SPEED = 0.3  # m/s


class PlanningError(ValueError):
    pass


class UnreachableGoalError(PlanningError):
    pass


@dataclass(frozen=True)
class Action:
    kind: str  # approach | opendoor | gothrough | goto
    target: str  # door id for the first three, location id for goto
    cost: float

    def key(self) -> tuple[int, str]:
        return (_KIND_RANK[self.kind], self.target)


@dataclass(frozen=True)
class Plan:
    actions: tuple[Action, ...]
    start: str
    destination: str
    destination_name: str
    total_cost: float
    door_open_count: int


@dataclass(frozen=True)
class PlanFacts:
    destination: str  # human-readable name
    total_cost: float
    estimated_time: float  # seconds
    door_open_count: int


def check_plan(plan: Plan) -> None:
    """Raise PlanningError unless the action sequence is well-formed."""
    actions = plan.actions
    if not actions:
        if plan.start != plan.destination:
            raise PlanningError("empty plan but start != destination")
        return
    for i, action in enumerate(actions):
        if action.kind == GOTHROUGH:
            if i < 2 or actions[i - 1].kind != OPENDOOR or actions[i - 1].target != action.target:
                raise PlanningError(f"gothrough({action.target}) not preceded by opendoor")
            if actions[i - 2].kind != APPROACH or actions[i - 2].target != action.target:
                raise PlanningError(f"gothrough({action.target}) not preceded by approach")
        if action.kind == OPENDOOR:
            if i == 0 or actions[i - 1].kind != APPROACH or actions[i - 1].target != action.target:
                raise PlanningError(f"opendoor({action.target}) not preceded by approach")
    if actions[-1].kind != GOTO or actions[-1].target != plan.destination:
        raise PlanningError("plan does not end with goto(destination)")
    total = sum(a.cost for a in actions)
    if abs(total - plan.total_cost) > 1e-9:
        raise PlanningError("total_cost does not equal the sum of action costs")
    if plan.door_open_count != sum(1 for a in actions if a.kind == OPENDOOR):
        raise PlanningError("door_open_count does not match the actions")


def _empty_plan(world: WorldMap, start: str) -> Plan:
    return Plan(
        actions=(),
        start=start,
        destination=start,
        destination_name=world.locations[start].name,
        total_cost=0.0,
        door_open_count=0,
    )


def plan(world: WorldMap, start: str, goal: str) -> Plan:
    """Optimal plan from one location to another.

    Raises UnknownEntityError for unresolved ids and UnreachableGoalError if
    no action sequence reaches the goal (possible only on maps built without
    load-time validation).
    """
    for loc_id in (start, goal):
        if loc_id not in world.locations:
            raise UnknownEntityError(f"unknown location id {loc_id!r}")
    if start == goal:
        return _empty_plan(world, start)

    counter = itertools.count()
    # heap entries: (cost, action-key sequence, push index, state, actions)
    heap: list[tuple] = [(0.0, (), next(counter), ("loc", start), ())]
    settled: set[tuple] = set()

    while heap:
        cost, key, _, state, actions = heapq.heappop(heap)
        if state in settled:
            continue
        settled.add(state)

        if state == ("loc", goal):
            return Plan(
                actions=actions,
                start=start,
                destination=goal,
                destination_name=world.locations[goal].name,
                total_cost=cost,
                door_open_count=sum(1 for a in actions if a.kind == OPENDOOR),
            )

        for action, next_state in _transitions(world, state):
            if next_state in settled:
                continue
            heapq.heappush(
                heap,
                (
                    cost + action.cost,
                    key + (action.key(),),
                    next(counter),
                    next_state,
                    actions + (action,),
                ),
            )

    raise UnreachableGoalError(f"no route from {start!r} to {goal!r}")


def _transitions(world: WorldMap, state: tuple):
    kind = state[0]
    if kind == "loc":
        loc_id = state[1]
        for neighbor in world.open_neighbors(loc_id):
            yield (
                Action(GOTO, neighbor, world_model.distance(world, loc_id, neighbor)),
                ("loc", neighbor),
            )
        for door_id in world.doors_of(loc_id):
            yield (
                Action(APPROACH, door_id, world_model.distance(world, loc_id, door_id)),
                ("at", door_id, loc_id),
            )
    elif kind == "at":
        _, door_id, from_loc = state
        yield (Action(OPENDOOR, door_id, world.door_open_cost), ("open", door_id, from_loc))
    elif kind == "open":
        _, door_id, from_loc = state
        yield (Action(GOTHROUGH, door_id, 0.0), ("thru", door_id, from_loc))
    elif kind == "thru":
        _, door_id, from_loc = state
        for other in world.holders_of(door_id):
            if other == from_loc:
                continue
            yield (
                Action(GOTO, other, world_model.distance(world, door_id, other)),
                ("loc", other),
            )


def plan_all(world: WorldMap, start: str, goals) -> list[Plan]:
    """One optimal plan per goal, cheapest first (ties by destination name)."""
    plans = [plan(world, start, goal) for goal in goals]
    plans.sort(key=lambda p: (p.total_cost, p.destination_name))
    return plans


def plan_facts(the_plan: Plan, walking_speed: float = DEFAULT_WALKING_SPEED) -> PlanFacts:
    """Facts a handler cares about: destination, cost, time, door count."""
    if walking_speed <= 0:
        raise ValueError(f"walking_speed must be positive, got {walking_speed}")
    return PlanFacts(
        destination=the_plan.destination_name,
        total_cost=the_plan.total_cost,
        estimated_time=the_plan.total_cost / walking_speed,
        door_open_count=the_plan.door_open_count,
    )


def plan_to_dict(the_plan: Plan) -> dict:
    return {
        "start": the_plan.start,
        "destination": the_plan.destination,
        "destination_name": the_plan.destination_name,
        "total_cost": the_plan.total_cost,
        "door_open_count": the_plan.door_open_count,
        "actions": [
            {"kind": a.kind, "target": a.target, "cost": a.cost} for a in the_plan.actions
        ],
    }
