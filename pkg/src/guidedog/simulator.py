"""Timed execution of plans as 2D trajectories, with scene verbalization.

The robot is a point moving in straight segments at constant walking speed,
standing still while a door is opened.  Scene verbalization is a pure
observer over the pose stream: it announces region-boundary crossings, door
approach/arrival, destination arrival, and restates the surroundings after
long silences.  Both halves are deterministic, so navigation progress never
depends on verbalization timing.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .planner import APPROACH, GOTO, GOTHROUGH, OPENDOOR, Plan, check_plan
from .world import WorldMap, reference_point, region_of

DEFAULT_TIMESTEP = 0.1  # s
DEFAULT_SILENCE_TIMEOUT = 15.0  # s
DEFAULT_APPROACH_RADIUS = 1.5  # m

REGION_ENTERED = "region_entered"
APPROACHING_DOOR = "approaching_door"
ARRIVED_DOOR = "arrived_door"
ARRIVED_DESTINATION = "arrived_destination"
SILENCE = "silence"


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    t: float


@dataclass(frozen=True)
class SceneEvent:
    t: float
    kind: str
    message: str
    subject: str = ""  # location or door id the event refers to


@dataclass(frozen=True)
class Trajectory:
    poses: tuple[Pose, ...]
    events: tuple[SceneEvent, ...]
    walking_speed: float


def _segment_poses(start: tuple, end: tuple, t0: float, speed: float, timestep: float) -> list[Pose]:
    """Poses along one straight segment, excluding the starting pose."""
    length = math.hypot(end[0] - start[0], end[1] - start[1])
    poses = []
    duration = length / speed
    steps = int(duration / timestep)
    for i in range(1, steps + 1):
        frac = (i * timestep) / duration
        poses.append(
            Pose(
                x=start[0] + (end[0] - start[0]) * frac,
                y=start[1] + (end[1] - start[1]) * frac,
                t=t0 + i * timestep,
            )
        )
    if not poses or poses[-1].t < t0 + duration - 1e-12:
        poses.append(Pose(x=end[0], y=end[1], t=t0 + duration))
    else:
        # land the final grid pose exactly on the endpoint
        poses[-1] = Pose(x=end[0], y=end[1], t=poses[-1].t)
    return poses


def execute_plan(
    world: WorldMap,
    plan: Plan,
    start_pose: Pose | None = None,
    walking_speed: float = 0.3,
    timestep: float = DEFAULT_TIMESTEP,
    silence_timeout: float = DEFAULT_SILENCE_TIMEOUT,
    approach_radius: float = DEFAULT_APPROACH_RADIUS,
) -> Trajectory:
    """Execute a plan from the start pose (default: start location centroid)."""
    if walking_speed <= 0:
        raise ValueError("walking_speed must be positive")
    check_plan(plan)

    if start_pose is None:
        cx, cy = reference_point(world, plan.start)
        start_pose = Pose(x=cx, y=cy, t=0.0)

    poses: list[Pose] = [start_pose]
    position = (start_pose.x, start_pose.y)
    t = start_pose.t
    for action in plan.actions:
        if action.kind in (APPROACH, GOTO):
            target = reference_point(world, action.target)
            if target != position:
                segment = _segment_poses(position, target, t, walking_speed, timestep)
                poses.extend(segment)
                position = target
                t = segment[-1].t
        elif action.kind == OPENDOOR:
            dwell = action.cost / walking_speed
            steps = max(1, int(dwell / timestep))
            for i in range(1, steps + 1):
                poses.append(Pose(x=position[0], y=position[1], t=t + i * timestep))
            if poses[-1].t < t + dwell - 1e-12:
                poses.append(Pose(x=position[0], y=position[1], t=t + dwell))
            else:
                poses[-1] = Pose(x=position[0], y=position[1], t=t + dwell)
            t = poses[-1].t
        elif action.kind == GOTHROUGH:
            continue  # zero-length transition

    events = scene_verbalize(
        poses,
        world,
        silence_timeout=silence_timeout,
        plan=plan,
        approach_radius=approach_radius,
    )
    return Trajectory(poses=tuple(poses), events=tuple(events), walking_speed=walking_speed)


def scene_verbalize(
    poses,
    world: WorldMap,
    silence_timeout: float = DEFAULT_SILENCE_TIMEOUT,
    plan: Plan | None = None,
    approach_radius: float = DEFAULT_APPROACH_RADIUS,
) -> list[SceneEvent]:
    """Scene messages for a time-ordered pose stream.

    Without a plan only region changes and silences are announced; with a
    plan, door approach/arrival and the final destination arrival join the
    stream.  The silence clock resets on every emitted event.
    """
    if silence_timeout <= 0:
        raise ValueError("silence_timeout must be positive")

    door_queue: list[str] = []
    destination_name = None
    if plan is not None:
        door_queue = [a.target for a in plan.actions if a.kind == APPROACH]
        destination_name = plan.destination_name

    events: list[SceneEvent] = []
    last_region: str | None = None
    last_event_t: float | None = None
    door_index = 0
    approach_announced = False
    poses = list(poses)

    def emit(t: float, kind: str, message: str, subject: str = "") -> None:
        nonlocal last_event_t
        events.append(SceneEvent(t=t, kind=kind, message=message, subject=subject))
        last_event_t = t

    def door_description(door_id: str) -> str:
        if plan is not None:
            saw = False
            for action in plan.actions:
                if action.kind == APPROACH and action.target == door_id:
                    saw = True
                elif saw and action.kind == GOTO:
                    return f"the {world.locations[action.target].name} door"
        return f"door {door_id}"

    for index, pose in enumerate(poses):
        if last_event_t is None:
            last_event_t = pose.t

        label = region_of(world, (pose.x, pose.y))
        if label is not None and label != last_region:
            name = world.locations[label].name
            emit(pose.t, REGION_ENTERED, f"We are navigating in the {name}.", label)
            last_region = label

        if door_index < len(door_queue):
            door_id = door_queue[door_index]
            dx, dy = world.doors[door_id].position
            gap = math.hypot(pose.x - dx, pose.y - dy)
            if gap <= 1e-9:
                emit(
                    pose.t,
                    ARRIVED_DOOR,
                    f"We just arrived at {door_description(door_id)}.",
                    door_id,
                )
                door_index += 1
                approach_announced = False
            elif gap <= approach_radius and not approach_announced:
                emit(
                    pose.t,
                    APPROACHING_DOOR,
                    f"We are approaching {door_description(door_id)}.",
                    door_id,
                )
                approach_announced = True

        is_last = index == len(poses) - 1
        if is_last and destination_name is not None:
            emit(
                pose.t,
                ARRIVED_DESTINATION,
                f"We have arrived at the {destination_name}.",
                plan.destination,
            )
        elif pose.t - last_event_t >= silence_timeout:
            if last_region is not None:
                name = world.locations[last_region].name
                message = f"We are still navigating in the {name}."
            else:
                message = "We are continuing on our way."
            emit(pose.t, SILENCE, message, last_region or "")

    return events


# ---------------------------------------------------------------------------
# serialization (event stream and trajectory replay files)


def events_to_jsonl(events) -> str:
    lines = [
        json.dumps(
            {"t": e.t, "kind": e.kind, "message": e.message, "subject": e.subject},
            ensure_ascii=False,
        )
        for e in events
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def trajectory_to_jsonl(trajectory: Trajectory) -> str:
    lines = [
        json.dumps({"record": "meta", "walking_speed": trajectory.walking_speed})
    ]
    lines.extend(
        json.dumps({"record": "pose", "x": p.x, "y": p.y, "t": p.t})
        for p in trajectory.poses
    )
    return "\n".join(lines) + "\n"


def load_trajectory_poses(path: str) -> list[Pose]:
    poses = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            record = json.loads(line)
            if record.get("record") == "pose":
                poses.append(Pose(x=record["x"], y=record["y"], t=record["t"]))
    return poses
