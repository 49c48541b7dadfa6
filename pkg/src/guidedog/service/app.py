"""FastAPI session service: live dialog-and-navigation sessions.

The service is a thin adapter over the core package: dialog behavior comes
from dialog.step/confirm_choice, navigation from planner.plan plus
simulator.execute_plan.  Every session owns an append-only event log with
strictly increasing sequence numbers; HTTP polling and the WebSocket stream
both replay from the log, so reconnecting clients always converge.
"""

from __future__ import annotations

import asyncio
import itertools
import time
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.middleware.cors import CORSMiddleware
from starlette.concurrency import run_in_threadpool

from .. import assets, dialog, planner, simulator
from ..llm import BackendError, RemoteBackend, load_scripted_backend
from ..world import WorldMap, load_map, map_to_dict
from .schemas import (
    ChooseRequest,
    CreateSessionRequest,
    CreateSessionResponse,
    EventsResponse,
    MapListResponse,
    SessionSnapshot,
    TranscriptRecord,
    UtteranceRequest,
    UtteranceResponse,
    WireEvent,
)

DONE = "done"


@dataclass
class ServiceSettings:
    time_scale: float = 10.0  # simulated seconds per wall-clock second
    walking_speed: float = 0.3
    timestep: float = 0.1
    extra_maps: dict[str, str] = field(default_factory=dict)  # map id -> file path
    default_backend: dict | None = None  # None -> bundled demo rules


@dataclass
class SessionRecord:
    id: str
    map_id: str
    world: WorldMap
    dialog_session: dialog.DialogSession
    backend: object
    events: list[dict] = field(default_factory=list)
    done: bool = False
    nav_task: asyncio.Task | None = None
    created_at: float = field(default_factory=time.time)
    updated_at: float = field(default_factory=time.time)

    def __post_init__(self):
        self.lock = asyncio.Lock()
        self.condition = asyncio.Condition()

    async def emit(self, kind: str, payload: dict) -> int:
        async with self.condition:
            seq = len(self.events) + 1
            self.events.append({"seq": seq, "kind": kind, "payload": payload})
            self.updated_at = time.time()
            self.condition.notify_all()
            return seq

    async def finish(self):
        async with self.condition:
            self.done = True
            self.condition.notify_all()


def _make_backend(selector: str, settings: ServiceSettings):
    if selector in ("default", ""):
        spec = settings.default_backend
        if spec is None:
            return load_scripted_backend(assets.bundled_path("rules", "demo"))
        if spec.get("kind") == "remote":
            return RemoteBackend(
                base_url=spec["base_url"],
                model=spec["model"],
                credential_env=spec.get("credential_env", "GUIDEDOG_API_KEY"),
                temperature=spec.get("temperature", 0.0),
            )
        return load_scripted_backend(spec["path"])
    bundled = assets.bundled_path("rules", selector)
    if bundled is not None:
        return load_scripted_backend(bundled)
    try:
        return load_scripted_backend(selector)
    except OSError as exc:
        raise HTTPException(status_code=400, detail=f"unknown backend {selector!r}: {exc}")


def create_app(settings: ServiceSettings | None = None) -> FastAPI:
    settings = settings or ServiceSettings()
    app = FastAPI(title="guidedog session service", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions: dict[str, SessionRecord] = {}
    maps: dict[str, WorldMap] = {}

    def get_map(map_id: str) -> WorldMap:
        if map_id not in maps:
            path = settings.extra_maps.get(map_id) or assets.bundled_path("map", map_id)
            if path is None:
                raise HTTPException(status_code=404, detail=f"unknown map {map_id!r}")
            maps[map_id] = load_map(path)
        return maps[map_id]

    def get_session(session_id: str) -> SessionRecord:
        record = sessions.get(session_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return record

    @app.get("/maps", response_model=MapListResponse)
    async def list_maps():
        names = set(assets.bundled_names("map")) | set(settings.extra_maps)
        return MapListResponse(maps=sorted(names))

    @app.get("/maps/{map_id}")
    async def get_map_geometry(map_id: str):
        return map_to_dict(get_map(map_id))

    @app.post("/sessions", response_model=CreateSessionResponse)
    async def create_session(request: CreateSessionRequest):
        world = get_map(request.map_id)
        if request.start_location is not None:
            start = world.location_by_name(request.start_location)
            if start is None:
                raise HTTPException(
                    status_code=400,
                    detail=f"unknown start location {request.start_location!r}",
                )
            start_id = start.id
        else:
            start_id = min(world.locations)
        backend = _make_backend(request.backend, settings)
        record = SessionRecord(
            id=uuid.uuid4().hex,
            map_id=request.map_id,
            world=world,
            dialog_session=dialog.new_session(
                world, start_id, plan_info_enabled=request.plan_info_enabled
            ),
            backend=backend,
        )
        sessions[record.id] = record
        await record.emit("robot_utterance", {"text": dialog.GREETING})
        await record.emit("session_phase", {"phase": record.dialog_session.phase})
        return CreateSessionResponse(
            session_id=record.id,
            map_id=record.map_id,
            start_location=world.locations[start_id].name,
            greeting=dialog.GREETING,
        )

    async def start_navigation(record: SessionRecord):
        world = record.world
        session = record.dialog_session
        destination = world.location_by_name(session.confirmed_task)
        route = planner.plan(world, session.start_location, destination.id)
        trajectory = await run_in_threadpool(
            simulator.execute_plan,
            world,
            route,
            None,
            settings.walking_speed,
            settings.timestep,
        )
        stream: list[tuple[float, int, str, dict]] = []
        order = itertools.count()
        for pose in trajectory.poses:
            stream.append((pose.t, next(order), "pose_update", {"x": pose.x, "y": pose.y, "t": pose.t}))
        for event in trajectory.events:
            stream.append(
                (
                    event.t,
                    next(order),
                    "scene_event",
                    {"t": event.t, "kind": event.kind, "message": event.message, "subject": event.subject},
                )
            )
        stream.sort(key=lambda item: (item[0], item[2] != "pose_update", item[1]))

        async def run():
            previous_t = stream[0][0] if stream else 0.0
            for t, _, kind, payload in stream:
                if settings.time_scale > 0 and t > previous_t:
                    await asyncio.sleep((t - previous_t) / settings.time_scale)
                previous_t = t
                await record.emit(kind, payload)
            await record.emit("session_phase", {"phase": DONE})
            await record.finish()

        record.nav_task = asyncio.create_task(run())

    @app.post("/sessions/{session_id}/utterance", response_model=UtteranceResponse)
    async def post_utterance(session_id: str, request: UtteranceRequest):
        record = get_session(session_id)
        async with record.lock:
            session = record.dialog_session
            if session.phase != dialog.SPECIFYING:
                raise HTTPException(
                    status_code=409, detail=f"session is {session.phase}, not accepting utterances"
                )
            try:
                _, robot_text = await run_in_threadpool(
                    dialog.step, session, request.text, record.backend, record.world
                )
            except BackendError as exc:
                raise HTTPException(status_code=502, detail=str(exc))
            await record.emit("robot_utterance", {"text": robot_text})
            if session.candidate_plans:
                await record.emit(
                    "plan_options",
                    {
                        "options": [
                            {
                                "destination": f.destination,
                                "total_cost": f.total_cost,
                                "estimated_time": f.estimated_time,
                                "door_open_count": f.door_open_count,
                            }
                            for f in session.candidate_plans
                        ]
                    },
                )
            last_seq = len(record.events)
            if session.phase != dialog.SPECIFYING:
                last_seq = await record.emit("session_phase", {"phase": session.phase})
            if session.phase == dialog.CONFIRMED:
                await start_navigation(record)
            elif session.phase == dialog.FAILED:
                await record.finish()
            return UtteranceResponse(
                phase=session.phase, robot_text=robot_text, last_seq=last_seq
            )

    @app.post("/sessions/{session_id}/choose", response_model=UtteranceResponse)
    async def choose_plan(session_id: str, request: ChooseRequest):
        record = get_session(session_id)
        async with record.lock:
            session = record.dialog_session
            if session.phase != dialog.SPECIFYING:
                raise HTTPException(
                    status_code=409, detail=f"session is {session.phase}, cannot choose a plan"
                )
            try:
                statement = dialog.confirm_choice(session, request.destination, record.world)
            except ValueError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            await record.emit("robot_utterance", {"text": statement})
            last_seq = await record.emit("session_phase", {"phase": session.phase})
            await start_navigation(record)
            return UtteranceResponse(
                phase=session.phase, robot_text=statement, last_seq=last_seq
            )

    @app.get("/sessions/{session_id}", response_model=SessionSnapshot)
    async def get_snapshot(session_id: str):
        record = get_session(session_id)
        session = record.dialog_session
        return SessionSnapshot(
            session_id=record.id,
            map_id=record.map_id,
            phase=session.phase,
            start_location=record.world.locations[session.start_location].name,
            confirmed_task=session.confirmed_task,
            transcript=[
                TranscriptRecord(**r) for r in dialog.transcript_records(session)
            ],
            last_seq=len(record.events),
            done=record.done,
            created_at=record.created_at,
            updated_at=record.updated_at,
        )

    @app.get("/sessions/{session_id}/events", response_model=EventsResponse)
    async def get_events(session_id: str, after: int = 0):
        record = get_session(session_id)
        events = [WireEvent(**e) for e in record.events[after:]]
        return EventsResponse(events=events, last_seq=len(record.events), done=record.done)

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(websocket: WebSocket, session_id: str):
        record = sessions.get(session_id)
        await websocket.accept()
        if record is None:
            await websocket.close(code=4404, reason=f"unknown session {session_id!r}")
            return
        cursor = 0
        try:
            while True:
                while cursor < len(record.events):
                    await websocket.send_json(record.events[cursor])
                    cursor += 1
                if record.done:
                    break
                async with record.condition:
                    while cursor >= len(record.events) and not record.done:
                        await record.condition.wait()
            await websocket.close()
        except WebSocketDisconnect:
            pass

    return app


app = create_app()
