"""Comparison dialog policies: keyword matching and single-turn LLM.

All policies (including the full dialog system) expose the same step
interface so the experiment harness can treat them uniformly: handler text
in, a StepOutcome out.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import dialog, planner as default_planner
from .dialog import CONFIRMED, DEFAULT_TURN_BUDGET, FAILED, GREETING
from .library import EquivalenceGroups
from .llm import ChatHistory, complete
from .world import WorldMap


@dataclass(frozen=True)
class StepOutcome:
    robot_text: str
    confirmed: str | None = None  # canonical location name when the task is set
    failed: bool = False


def build_synonym_table(groups: EquivalenceGroups, valid_locations: list[str]) -> dict[str, str]:
    """Map every equivalence-group member to a map location in its group."""
    synonyms: dict[str, str] = {}
    for name in valid_locations:
        group_id = groups.group_of(name)
        if group_id is None:
            continue
        for member in groups.members(group_id):
            synonyms.setdefault(member, name)
    return synonyms


class KeywordPolicy:
    """Template dialog driven purely by keyword detection.

    Exactly one location keyword in the utterance confirms that location;
    several produce a disambiguation question; none produce the full listing
    of known locations.
    """

    def __init__(
        self,
        valid_locations: list[str],
        synonyms: dict[str, str] | None = None,
        turn_budget: int = DEFAULT_TURN_BUDGET,
    ):
        self.valid_locations = list(valid_locations)
        self.synonyms = dict(synonyms or {})
        self.turn_budget = turn_budget
        self.turns_used = 0
        self.greeting = ""

    def _matches(self, text: str) -> list[str]:
        folded = text.casefold()
        found = []
        for name in self.valid_locations:
            if name.casefold() in folded:
                found.append(name)
        for synonym, canonical in self.synonyms.items():
            if synonym in folded and canonical not in found:
                found.append(canonical)
        return sorted(found)

    def step(self, handler_text: str) -> StepOutcome:
        if self.turns_used >= self.turn_budget:
            return StepOutcome(robot_text="", failed=True)
        self.turns_used += 1
        matches = self._matches(handler_text)
        if len(matches) == 1:
            name = matches[0]
            return StepOutcome(
                robot_text=f"Okay, I will guide you to the {name}.", confirmed=name
            )
        if len(matches) > 1:
            listed = ", ".join(matches[:-1]) + f" or {matches[-1]}"
            text = f"Did you mean the {listed}?"
        else:
            listed = ", ".join(self.valid_locations)
            text = f"I know these locations: {listed}. Where would you like to go?"
        return StepOutcome(robot_text=text, failed=self.turns_used >= self.turn_budget)


_SINGLE_TURN_SUFFIX = (
    "\n\nYou get exactly one response and may not ask clarification questions. "
    "Reply only in the command format:\n\nCOMMAND goto <parameter>\n"
    "<conversational statement>"
)


def single_turn_prompt(valid_locations: list[str]) -> str:
    return dialog.build_system_prompt(valid_locations) + _SINGLE_TURN_SUFFIX


class SingleTurnPolicy:
    """The LLM agent restricted to one turn: no clarification questions."""

    def __init__(self, backend, valid_locations: list[str]):
        self.backend = backend
        self.valid_locations = list(valid_locations)
        self.done = False
        self.greeting = ""

    def step(self, handler_text: str) -> StepOutcome:
        if self.done:
            return StepOutcome(robot_text="", failed=True)
        self.done = True
        history = ChatHistory(system_prompt=single_turn_prompt(self.valid_locations))
        history.append("user", handler_text)
        raw = complete(self.backend, history)
        vetted = dialog.safeguard(dialog.parse_llm_response(raw), self.valid_locations)
        if isinstance(vetted, dialog.Command):
            return StepOutcome(robot_text=vetted.statement, confirmed=vetted.parameter)
        return StepOutcome(robot_text="", failed=True)


class FullSystemPolicy:
    """The complete multi-turn dialog engine behind the uniform interface."""

    def __init__(
        self,
        world: WorldMap,
        backend,
        start_location: str,
        plan_info_enabled: bool = False,
        turn_budget: int = DEFAULT_TURN_BUDGET,
        planner=default_planner,
        greeting: str = GREETING,
    ):
        self.world = world
        self.backend = backend
        self.planner = planner
        self.session = dialog.new_session(
            world,
            start_location,
            plan_info_enabled=plan_info_enabled,
            turn_budget=turn_budget,
            greeting=greeting,
        )
        self.greeting = greeting

    def step(self, handler_text: str) -> StepOutcome:
        self.session, robot_text = dialog.step(
            self.session, handler_text, self.backend, self.world, self.planner
        )
        return StepOutcome(
            robot_text=robot_text,
            confirmed=self.session.confirmed_task if self.session.phase == CONFIRMED else None,
            failed=self.session.phase == FAILED,
        )


POLICY_IDS = ("keyword", "single-turn", "full")


def make_policy(
    policy_id: str,
    world: WorldMap,
    backend=None,
    groups: EquivalenceGroups | None = None,
    start_location: str | None = None,
    plan_info_enabled: bool = False,
    turn_budget: int = DEFAULT_TURN_BUDGET,
    use_synonyms: bool = True,
):
    names = world.location_names()
    if policy_id == "keyword":
        synonyms = build_synonym_table(groups, names) if (groups and use_synonyms) else {}
        return KeywordPolicy(names, synonyms=synonyms, turn_budget=turn_budget)
    if policy_id == "single-turn":
        if backend is None:
            raise ValueError("single-turn policy needs a completion backend")
        return SingleTurnPolicy(backend, names)
    if policy_id == "full":
        if backend is None:
            raise ValueError("full policy needs a completion backend")
        if start_location is None:
            raise ValueError("full policy needs a start location")
        return FullSystemPolicy(
            world,
            backend,
            start_location,
            plan_info_enabled=plan_info_enabled,
            turn_budget=turn_budget,
        )
    raise ValueError(f"unknown policy {policy_id!r}; expected one of {POLICY_IDS}")
