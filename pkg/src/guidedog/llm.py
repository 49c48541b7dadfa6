"""Chat-completion backends and the simulated visually-impaired handler.

Three backends share one ``complete`` contract: a Remote backend speaking the
common chat-completion HTTP schema, a Scripted backend driven by an ordered
rule table (used everywhere in tests so the suite runs with no network), and
a Playback backend replaying a recorded transcript.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import requests

PLANNER_INFO_MARKER = "Planner information:"

# Scripted responses may reference the planner facts the dialog engine
# injected into the last user message; this placeholder expands to them.
PLANNER_INFO_PLACEHOLDER = "{planner_info}"


class BackendError(RuntimeError):
    """Transport-level failure talking to a completion backend."""


class PlaybackDivergenceError(RuntimeError):
    """Live conversation no longer matches the recorded transcript."""


class PlaybackExhaustedError(RuntimeError):
    """The recording has no more assistant messages to replay."""


@dataclass
class ChatHistory:
    system_prompt: str = ""
    messages: list[tuple[str, str]] = field(default_factory=list)  # (role, text)

    def append(self, role: str, text: str) -> None:
        if role not in ("user", "assistant"):
            raise ValueError(f"role must be 'user' or 'assistant', got {role!r}")
        if self.messages and self.messages[-1][0] == role:
            raise ValueError(f"consecutive {role!r} messages are not allowed")
        self.messages.append((role, text))

    def last_user_text(self) -> str:
        for role, text in reversed(self.messages):
            if role == "user":
                return text
        return ""

    def as_wire(self) -> list[dict]:
        wire = []
        if self.system_prompt:
            wire.append({"role": "system", "content": self.system_prompt})
        wire.extend({"role": role, "content": text} for role, text in self.messages)
        return wire


def extract_planner_info(text: str) -> str:
    """The planner-facts block injected into a user message, or ''. """
    idx = text.find(PLANNER_INFO_MARKER)
    if idx < 0:
        return ""
    return text[idx + len(PLANNER_INFO_MARKER):].strip()


@dataclass
class RemoteBackend:
    """Chat-completion HTTP backend (OpenAI-style request/response bodies)."""

    base_url: str
    model: str
    credential_env: str = "GUIDEDOG_API_KEY"
    temperature: float = 0.0
    timeout: float = 30.0

    def complete(self, history: ChatHistory) -> str:
        token = os.environ.get(self.credential_env, "")
        headers = {"Content-Type": "application/json"}
        if token:
            headers["Authorization"] = f"Bearer {token}"
        body = {
            "model": self.model,
            "messages": history.as_wire(),
            "temperature": self.temperature,
        }
        try:
            resp = requests.post(
                self.base_url.rstrip("/") + "/chat/completions",
                json=body,
                headers=headers,
                timeout=self.timeout,
            )
            resp.raise_for_status()
            payload = resp.json()
            return payload["choices"][0]["message"]["content"]
        except requests.RequestException as exc:
            raise BackendError(f"chat completion request failed: {exc}") from exc
        except (KeyError, IndexError, ValueError) as exc:
            raise BackendError(f"malformed chat completion response: {exc}") from exc


@dataclass
class ScriptedBackend:
    """Deterministic rule-table backend.

    Each rule is (matcher, response).  A matcher is one substring or a list
    of substrings that must all appear (case-insensitively) in the last user
    message; the first matching rule wins, otherwise the default response is
    returned.
    """

    rules: list[tuple[object, str]] = field(default_factory=list)
    default: str = ""

    def complete(self, history: ChatHistory) -> str:
        last_user = history.last_user_text()
        folded = last_user.casefold()
        response = self.default
        for matcher, candidate in self.rules:
            needles = [matcher] if isinstance(matcher, str) else list(matcher)
            if all(str(n).casefold() in folded for n in needles):
                response = candidate
                break
        if PLANNER_INFO_PLACEHOLDER in response:
            response = response.replace(
                PLANNER_INFO_PLACEHOLDER, extract_planner_info(last_user)
            )
        return response


def load_scripted_backend(path: str) -> ScriptedBackend:
    """Rule file: {"rules": [{"match": str|[str], "respond": str}], "default": str}."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    rules = [(rule["match"], rule["respond"]) for rule in data.get("rules", [])]
    return ScriptedBackend(rules=rules, default=data.get("default", ""))


class PlaybackBackend:
    """Replays the assistant side of a recorded transcript.

    The recording is a transcript log (see dialog.transcript_records): the
    robot utterance following each handler utterance is replayed in order.
    Each live user message must contain the corresponding recorded handler
    text (containment, because the dialog engine may append planner context
    to the raw handler text); anything else fails loudly.
    """

    def __init__(self, path: str):
        with open(path, encoding="utf-8") as fh:
            records = [json.loads(line) for line in fh if line.strip()]
        self._pairs: list[tuple[str, str]] = []
        pending_handler: str | None = None
        for record in records:
            if record["speaker"] == "handler":
                pending_handler = record["text"]
            elif record["speaker"] == "robot" and pending_handler is not None:
                self._pairs.append((pending_handler, record["text"]))
                pending_handler = None
        self._cursor = 0

    def complete(self, history: ChatHistory) -> str:
        if self._cursor >= len(self._pairs):
            raise PlaybackExhaustedError(
                f"recording exhausted after {len(self._pairs)} exchange(s)"
            )
        expected_handler, robot_text = self._pairs[self._cursor]
        live = history.last_user_text()
        if expected_handler not in live:
            raise PlaybackDivergenceError(
                f"exchange {self._cursor}: live user message {live!r} does not "
                f"contain recorded handler text {expected_handler!r}"
            )
        self._cursor += 1
        return robot_text


def complete(backend, history: ChatHistory) -> str:
    """Single entry point used by the dialog engine and baselines."""
    return backend.complete(history)


# ---------------------------------------------------------------------------
# simulated handler


SIMULATED_HANDLER_PROMPT = (
    "You are an AI chatbot pretending to be a visually impaired person. "
    "You need to navigate to {target}. Do not say the name of where you want "
    "to go, unless asked. You are only interested in going to {target} and "
    "must not show interest in any other locations."
)


def opening_instruction(purpose: str) -> str:
    stripped = purpose.strip()
    if stripped.casefold().startswith("i want"):
        return "Begin the conversation by indicating that you want" + stripped[6:]
    return f'Begin the conversation by indicating: "{stripped}"'


def simulated_handler_prompt(target: str, purpose: str) -> str:
    if not target.strip():
        raise ValueError("target must be non-empty")
    if not purpose.strip():
        raise ValueError("purpose must be non-empty")
    return (
        SIMULATED_HANDLER_PROMPT.format(target=target.strip())
        + "\n\n"
        + opening_instruction(purpose)
    )


@dataclass
class SimulatedHandler:
    """LLM-played handler with a fixed target it must not volunteer."""

    target_location: str
    purpose: str
    backend: object

    @property
    def system_prompt(self) -> str:
        return simulated_handler_prompt(self.target_location, self.purpose)


def handler_respond(handler: SimulatedHandler, history: ChatHistory) -> str:
    """One handler utterance given the conversation so far.

    ``history`` is the handler's own view: robot utterances are user
    messages, the handler's past utterances are assistant messages.  An
    empty history produces the opening statement of the purpose.
    """
    if history.messages and history.messages[-1][0] != "user":
        raise ValueError("last message must be from the robot (or history empty)")
    work = ChatHistory(system_prompt=handler.system_prompt)
    if not history.messages:
        work.append("user", opening_instruction(handler.purpose))
    else:
        work.messages = list(history.messages)
    return complete(handler.backend, work)
