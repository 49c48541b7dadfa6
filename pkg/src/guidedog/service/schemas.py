"""Pydantic request/response models for the session service wire protocol."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class CreateSessionRequest(BaseModel):
    map_id: str = "office"
    plan_info_enabled: bool = False
    start_location: Optional[str] = None  # location name; default: lowest id
    backend: str = "default"  # "default", a bundled rules name, or a rules file path


class CreateSessionResponse(BaseModel):
    session_id: str
    map_id: str
    start_location: str
    greeting: str


class UtteranceRequest(BaseModel):
    text: str = Field(min_length=1)


class UtteranceResponse(BaseModel):
    phase: str
    robot_text: str
    last_seq: int


class ChooseRequest(BaseModel):
    destination: str = Field(min_length=1)


class WireEvent(BaseModel):
    seq: int
    kind: str  # robot_utterance | plan_options | scene_event | pose_update | session_phase
    payload: dict[str, Any]


class EventsResponse(BaseModel):
    events: list[WireEvent]
    last_seq: int
    done: bool


class TranscriptRecord(BaseModel):
    speaker: str
    text: str
    timestamp: float


class SessionSnapshot(BaseModel):
    session_id: str
    map_id: str
    phase: str
    start_location: str
    confirmed_task: Optional[str]
    transcript: list[TranscriptRecord]
    last_seq: int
    done: bool
    created_at: float
    updated_at: float


class MapListResponse(BaseModel):
    maps: list[str]
