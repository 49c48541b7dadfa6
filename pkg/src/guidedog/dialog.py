"""Task-specification dialog: prompts, response parsing, safeguard, verbalization.

The session is a small state machine.  While Specifying, each handler
utterance is answered by the completion backend under a fixed protocol
prompt; responses are parsed into a clarification question or a goto
command, post-processed by a deterministic safeguard, and the session ends
Confirmed (valid goto) or Failed (turn budget exhausted).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import planner as default_planner
from .llm import ChatHistory, PLANNER_INFO_MARKER, complete
from .planner import PlanFacts
from .world import WorldMap

SPECIFYING = "specifying"
CONFIRMED = "confirmed"
FAILED = "failed"

DEFAULT_TURN_BUDGET = 6

GREETING = "Hello! I am your guide dog robot. Where would you like to go today?"

FALLBACK_MESSAGE = (
    "I can only assist with navigation requests of nearby locations that I know "
    "about. Would you like help navigating to somewhere nearby?"
)

CLARIFICATION_TAG = "CLARIFICATION QUESTION:"
COMMAND_TAG = "COMMAND"

CANDIDATE_QUERY = "List the valid parameters relevant to the last request, comma-separated."

_PROMPT_TEMPLATE = """You are a robot guide dog assisting a visually impaired person in navigating an indoor environment. The human is holding a rigid connection attached to you. Your task is to navigate to the requested locations based on the human's commands. When the human makes a request, you must engage in communication to clarify their intentions. Ask clarification questions until you are confident about the request.

Command Syntax:
There is one command type: goto <parameter>

Valid Parameters:
{parameters}

Handling Requests:
- Unavailable Locations: Do not navigate to locations not on the list. If an unavailable location is requested, you must state this in your clarification question.
- Ambiguous Requests: If a request could refer to multiple valid locations, you must suggest each of them in your clarification question.

Required Output Format:
After determining the correct action, provide your output in one of the two formats below.

To ask for more information:
CLARIFICATION QUESTION: <question>

To execute a command:
COMMAND goto <parameter>
<conversational statement>"""

_PLAN_INFO_ADDENDUM = (
    "\n\nWhen a request arrives together with planner information, your "
    "clarification question must relay the travel time and door details "
    "given for each candidate location."
)


class DialogError(RuntimeError):
    pass


class WrongPhaseError(DialogError):
    """An operation was attempted outside the Specifying phase."""


@dataclass(frozen=True)
class Utterance:
    speaker: str  # "handler" | "robot"
    text: str
    timestamp: float | None = None

    @property
    def word_count(self) -> int:
        return len(self.text.split())


@dataclass(frozen=True)
class Clarification:
    question: str


@dataclass(frozen=True)
class Command:
    parameter: str
    statement: str = ""


@dataclass(frozen=True)
class Malformed:
    raw: str


LlmDirective = Clarification | Command | Malformed


@dataclass
class DialogSession:
    start_location: str  # location id the robot plans from
    phase: str = SPECIFYING
    transcript: list[Utterance] = field(default_factory=list)
    handler_turns_used: int = 0
    turn_budget: int = DEFAULT_TURN_BUDGET
    confirmed_task: str | None = None  # canonical location name
    plan_info_enabled: bool = False
    candidate_plans: list[PlanFacts] = field(default_factory=list)


def new_session(
    world: WorldMap,
    start_location: str,
    plan_info_enabled: bool = False,
    turn_budget: int = DEFAULT_TURN_BUDGET,
    greeting: str = GREETING,
) -> DialogSession:
    if start_location not in world.locations:
        raise ValueError(f"unknown start location {start_location!r}")
    session = DialogSession(
        start_location=start_location,
        plan_info_enabled=plan_info_enabled,
        turn_budget=turn_budget,
    )
    if greeting:
        session.transcript.append(Utterance("robot", greeting))
    return session


# ---------------------------------------------------------------------------
# prompt and parsing


def build_system_prompt(valid_locations: list[str], plan_info_enabled: bool = False) -> str:
    if not valid_locations:
        raise ValueError("at least one valid location is required")
    parameters = "\n".join(f"- {name}" for name in valid_locations)
    prompt = _PROMPT_TEMPLATE.format(parameters=parameters)
    if plan_info_enabled:
        prompt += _PLAN_INFO_ADDENDUM
    return prompt


def parse_llm_response(raw: str) -> LlmDirective:
    """Classify a backend response per the protocol's two output formats."""
    stripped = raw.lstrip()
    if stripped[: len(CLARIFICATION_TAG)].upper() == CLARIFICATION_TAG:
        return Clarification(question=stripped[len(CLARIFICATION_TAG):].strip())
    lines = raw.splitlines()
    for i, line in enumerate(lines):
        tokens = line.strip().split(None, 2)
        if len(tokens) >= 2 and tokens[0].upper() == COMMAND_TAG and tokens[1].lower() == "goto":
            parameter = tokens[2].strip() if len(tokens) == 3 else ""
            if not parameter:
                continue
            statement = "\n".join(lines[i + 1:]).strip()
            return Command(parameter=parameter, statement=statement)
    return Malformed(raw=raw)


def safeguard(directive: LlmDirective, valid_locations: list[str]):
    """Deterministic post-processor guarding every outgoing robot utterance.

    Returns either the text the robot should speak (a vetted clarification
    question or the fixed fallback message) or a validated Command whose
    parameter is a canonical map location name.
    """
    if isinstance(directive, Malformed):
        return FALLBACK_MESSAGE
    if isinstance(directive, Clarification):
        folded = directive.question.casefold()
        if any(name.casefold() in folded for name in valid_locations):
            return directive.question
        return FALLBACK_MESSAGE
    wanted = directive.parameter.strip().casefold()
    for name in valid_locations:
        if name.casefold() == wanted:
            return Command(parameter=name, statement=directive.statement)
    return FALLBACK_MESSAGE


# ---------------------------------------------------------------------------
# plan verbalization


_SMALL_NUMBERS = {
    1: "one", 2: "two", 3: "three", 4: "four", 5: "five", 6: "six",
    7: "seven", 8: "eight", 9: "nine", 10: "ten", 11: "eleven", 12: "twelve",
}


def _spell(n: int) -> str:
    return _SMALL_NUMBERS.get(n, str(n))


def describe_duration(seconds: float) -> str:
    """'about three minutes' / 'about 40 seconds', rounded for speech."""
    if seconds >= 60:
        minutes = max(1, round(seconds / 60))
        unit = "minute" if minutes == 1 else "minutes"
        return f"about {_spell(minutes)} {unit}"
    tens = int(round(seconds / 10)) * 10
    return f"about {tens} seconds"


def verbalize_plans(facts: list[PlanFacts]) -> str:
    """Render plan facts as speech, one clause per candidate, in given order."""
    if not facts:
        raise ValueError("no plan facts to verbalize")
    clauses = []
    for item in facts:
        duration = describe_duration(item.estimated_time)
        if item.door_open_count == 0:
            clauses.append(f"The {item.destination} has no doors and will take {duration}.")
        else:
            doors = "one door" if item.door_open_count == 1 else f"{_spell(item.door_open_count)} doors"
            clauses.append(
                f"The {item.destination} requires opening {doors} and will take {duration}."
            )
    return " ".join(clauses)


# ---------------------------------------------------------------------------
# the dialog step


def _chat_history(session: DialogSession, world: WorldMap, final_user_text: str) -> ChatHistory:
    history = ChatHistory(
        system_prompt=build_system_prompt(world.location_names(), session.plan_info_enabled)
    )
    for utterance in session.transcript:
        history.append("assistant" if utterance.speaker == "robot" else "user", utterance.text)
    history.append("user", final_user_text)
    return history


def _extract_candidates(world: WorldMap, response: str) -> list[str]:
    """Map names found in a comma-separated candidate reply, map order."""
    items = {part.strip().casefold() for part in response.replace("\n", ",").split(",")}
    names = []
    for name in world.location_names():
        if name.casefold() in items:
            names.append(name)
    return names


def step(
    session: DialogSession,
    handler_text: str,
    llm,
    world: WorldMap,
    planner=default_planner,
) -> tuple[DialogSession, str]:
    """Advance the session by one handler turn; returns the robot's reply.

    All backend calls happen before any session mutation, so a transport
    failure propagates with the session unchanged.
    """
    if session.phase != SPECIFYING:
        raise WrongPhaseError(f"cannot step a session in phase {session.phase!r}")

    candidate_facts: list[PlanFacts] = []
    user_text = handler_text
    if session.plan_info_enabled:
        aux = _chat_history(session, world, f"{handler_text}\n\n{CANDIDATE_QUERY}")
        candidate_names = _extract_candidates(world, complete(llm, aux))
        if not candidate_names:
            candidate_names = world.location_names()
        goals = [world.location_by_name(name).id for name in candidate_names]
        plans = planner.plan_all(world, session.start_location, goals)
        candidate_facts = [planner.plan_facts(p) for p in plans]
        user_text = f"{handler_text}\n\n{PLANNER_INFO_MARKER} {verbalize_plans(candidate_facts)}"

    raw = complete(llm, _chat_history(session, world, user_text))
    vetted = safeguard(parse_llm_response(raw), world.location_names())

    # backend calls done; commit the turn
    session.transcript.append(Utterance("handler", handler_text))
    session.handler_turns_used += 1
    session.candidate_plans = candidate_facts

    if isinstance(vetted, Command):
        session.phase = CONFIRMED
        session.confirmed_task = vetted.parameter
        robot_text = vetted.statement
    else:
        robot_text = vetted
        if session.handler_turns_used >= session.turn_budget:
            session.phase = FAILED

    session.transcript.append(Utterance("robot", robot_text))
    return session, robot_text


def confirm_choice(session: DialogSession, destination_name: str, world: WorldMap) -> str:
    """Explicit plan selection (e.g. the handler console clicking an option)."""
    if session.phase != SPECIFYING:
        raise WrongPhaseError(f"cannot confirm in phase {session.phase!r}")
    location = world.location_by_name(destination_name)
    if location is None:
        raise ValueError(f"unknown location name {destination_name!r}")
    session.phase = CONFIRMED
    session.confirmed_task = location.name
    statement = f"Okay, I will guide you to the {location.name}."
    session.transcript.append(Utterance("robot", statement))
    return statement


def transcript_records(session: DialogSession) -> list[dict]:
    """Transcript as plain records for logs, playback, and the wire."""
    records = []
    for index, utterance in enumerate(session.transcript):
        records.append(
            {
                "speaker": utterance.speaker,
                "text": utterance.text,
                "timestamp": utterance.timestamp if utterance.timestamp is not None else float(index),
            }
        )
    return records
