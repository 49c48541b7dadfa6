"""Service task library: <location, purpose> pairs plus functional-equivalence groups.

Two location names are interchangeable for success scoring when they are
equal (case-insensitive) or belong to the same equivalence group.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

logger = logging.getLogger(__name__)


class LibraryError(ValueError):
    pass


@dataclass(frozen=True)
class ServiceTask:
    location: str
    purpose: str
    group: str | None = None
    synthetic: bool = False


@dataclass(frozen=True)
class EquivalenceGroups:
    groups: dict[str, frozenset[str]] = field(default_factory=dict)

    def group_of(self, name: str) -> str | None:
        wanted = name.strip().casefold()
        for group_id, members in self.groups.items():
            if wanted in members:
                return group_id
        return None

    def members(self, group_id: str) -> frozenset[str]:
        return self.groups.get(group_id, frozenset())


def is_equivalent(a: str, b: str, groups: EquivalenceGroups) -> bool:
    if a.strip().casefold() == b.strip().casefold():
        return True
    ga = groups.group_of(a)
    return ga is not None and ga == groups.group_of(b)


def load_library(path: str) -> tuple[list[ServiceTask], EquivalenceGroups]:
    """Load a task library file, validating the schema and group references.

    Duplicate (location, purpose) pairs are dropped with a logged warning.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise LibraryError(f"cannot read library file {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise LibraryError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return library_from_dict(data, source=path)


def library_from_dict(data: dict, source: str = "<dict>") -> tuple[list[ServiceTask], EquivalenceGroups]:
    if not isinstance(data, dict):
        raise LibraryError(f"{source}: top level must be an object")

    raw_groups = data.get("groups", {})
    if not isinstance(raw_groups, dict):
        raise LibraryError(f"{source}: 'groups' must map group id to a member list")
    groups: dict[str, frozenset[str]] = {}
    seen_members: dict[str, str] = {}
    for group_id, members in raw_groups.items():
        if not isinstance(members, list) or not all(isinstance(m, str) for m in members):
            raise LibraryError(f"{source}: groups[{group_id!r}] must be a list of names")
        folded = frozenset(m.strip().casefold() for m in members)
        for member in folded:
            if member in seen_members:
                raise LibraryError(
                    f"{source}: location {member!r} appears in groups "
                    f"{seen_members[member]!r} and {group_id!r}"
                )
            seen_members[member] = group_id
        groups[str(group_id)] = folded

    tasks: list[ServiceTask] = []
    seen_pairs: set[tuple[str, str]] = set()
    duplicates = 0
    for index, raw in enumerate(data.get("tasks", [])):
        if not isinstance(raw, dict):
            raise LibraryError(f"{source}: tasks[{index}] must be an object")
        location = raw.get("location")
        purpose = raw.get("purpose")
        if not isinstance(location, str) or not location.strip():
            raise LibraryError(f"{source}: tasks[{index}]: 'location' must be a non-empty string")
        if not isinstance(purpose, str) or not purpose.strip():
            raise LibraryError(f"{source}: tasks[{index}]: 'purpose' must be a non-empty string")
        group = raw.get("group")
        if group is not None:
            if not isinstance(group, str) or group not in groups:
                raise LibraryError(f"{source}: tasks[{index}]: unknown group {group!r}")
        pair = (location.strip().casefold(), purpose.strip())
        if pair in seen_pairs:
            duplicates += 1
            continue
        seen_pairs.add(pair)
        tasks.append(
            ServiceTask(
                location=location.strip(),
                purpose=purpose.strip(),
                group=group,
                synthetic=bool(raw.get("synthetic", False)),
            )
        )
    if duplicates:
        logger.warning("%s: dropped %d duplicate task pair(s)", source, duplicates)

    return tasks, EquivalenceGroups(groups=groups)
