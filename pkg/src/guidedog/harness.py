"""Trial and suite runner: accuracy, dialog length, navigation cost, total time.

A trial is one simulated conversation between a handler agent and a dialog
policy, optionally through the character-noise channel, scored against the
task's target location (functional equivalents count).  Suites aggregate
trials into the metrics used for reporting: accuracy and average turns over
all trials; average dialog words, navigation cost, and total task time over
the successful ones.

Total task time follows the fixed speech/walking model:
words / 2.5 words-per-second + meters / 0.3 meters-per-second.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, replace

from . import assets, planner as planner_mod
from .baselines import make_policy
from .library import EquivalenceGroups, ServiceTask, is_equivalent, library_from_dict, load_library
from .llm import (
    BackendError,
    ChatHistory,
    PlaybackBackend,
    RemoteBackend,
    SimulatedHandler,
    complete,
    load_scripted_backend,
)
from .noise import NoiseConfig, derive_seed, perturb
from .world import WorldMap, load_map

TALKING_SPEED = 2.5  # words per second
WALKING_SPEED = 0.3  # meters per second


class SuiteConfigError(ValueError):
    pass


def total_time(dialog_words: float, nav_cost: float) -> float:
    """Seconds to finish a task: talk the dialog, then walk the route."""
    if dialog_words < 0 or nav_cost < 0:
        raise ValueError("dialog_words and nav_cost must be non-negative")
    return dialog_words / TALKING_SPEED + nav_cost / WALKING_SPEED


# ---------------------------------------------------------------------------
# handler agents


class DirectHandler:
    """States the target location outright, every turn."""

    def __init__(self, target: str):
        self.target = target

    def reply(self, last_robot_text: str | None) -> str:
        return f"Take me to the {self.target}."


_WORD_NUMBERS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5, "six": 6,
    "seven": 7, "eight": 8, "nine": 9, "ten": 10, "eleven": 11, "twelve": 12,
}

_CLAUSE_RE = re.compile(
    r"The (.+?) (?:requires opening [^.]*? and will take|has no doors and will take) "
    r"about ([^.]+)\.",
)


def parse_verbalized_options(text: str) -> list[tuple[str, float]]:
    """(destination, seconds) pairs recovered from verbalized plan clauses."""
    options = []
    for name, duration in _CLAUSE_RE.findall(text):
        duration = duration.strip()
        match = re.fullmatch(r"(\w+) minutes?", duration)
        if match:
            token = match.group(1)
            minutes = _WORD_NUMBERS.get(token)
            if minutes is None and token.isdigit():
                minutes = int(token)
            if minutes is not None:
                options.append((name, minutes * 60.0))
            continue
        match = re.fullmatch(r"(\d+) seconds", duration)
        if match:
            options.append((name, float(match.group(1))))
    return options


class CostAwareHandler:
    """Deterministic handler that opens with its purpose and, when the robot
    verbalizes travel facts, switches to the fastest offered destination."""

    def __init__(self, target: str, purpose: str):
        self.target = target
        self.purpose = purpose
        self.opened = False

    def reply(self, last_robot_text: str | None) -> str:
        if not self.opened:
            self.opened = True
            return self.purpose
        options = parse_verbalized_options(last_robot_text or "")
        if options:
            best = min(options, key=lambda item: (item[1], item[0]))
            return f"Let's go to the {best[0]}."
        return f"Let's go to the {self.target}."


class LlmHandlerAgent:
    """Adapter keeping the handler-side chat history for a SimulatedHandler."""

    def __init__(self, handler: SimulatedHandler):
        self.handler = handler
        self.history = ChatHistory(system_prompt=handler.system_prompt)

    def reply(self, last_robot_text: str | None) -> str:
        if last_robot_text is not None:
            self.history.append("user", last_robot_text)
        elif not self.history.messages:
            from .llm import opening_instruction

            self.history.append("user", opening_instruction(self.handler.purpose))
        text = complete(self.handler.backend, self.history)
        self.history.append("assistant", text)
        return text


# ---------------------------------------------------------------------------
# trials


@dataclass(frozen=True)
class TrialResult:
    task_location: str
    task_purpose: str
    policy_id: str
    success: bool
    handler_turns: int
    dialog_words: int
    chosen_location: str | None
    nav_cost: float | None
    noise_p: float
    seed: int
    error: str = ""


def run_trial(
    policy,
    task: ServiceTask,
    world: WorldMap,
    start: str,
    noise: NoiseConfig,
    handler,
    groups: EquivalenceGroups | None = None,
    policy_id: str = "",
    turn_budget: int = 6,
) -> TrialResult:
    """One dialog trial.  All randomness is derived from the noise seed.

    The handler's spoken text is what enters the word counts; the policy
    hears the perturbed version.  Robot utterances are never perturbed.
    """
    groups = groups or EquivalenceGroups()
    log: list[tuple[str, str]] = []
    if getattr(policy, "greeting", ""):
        log.append(("robot", policy.greeting))

    chosen: str | None = None
    error = ""
    try:
        for turn in range(turn_budget):
            last_robot = log[-1][1] if log and log[-1][0] == "robot" else None
            spoken = handler.reply(last_robot)
            log.append(("handler", spoken))
            heard = perturb(spoken, replace(noise, seed=derive_seed(noise.seed, turn)))
            outcome = policy.step(heard)
            log.append(("robot", outcome.robot_text))
            if outcome.confirmed is not None:
                chosen = outcome.confirmed
                break
            if outcome.failed:
                break
    except BackendError as exc:
        error = f"backend: {exc}"

    success = chosen is not None and is_equivalent(chosen, task.location, groups)
    nav_cost = None
    if chosen is not None:
        location = world.location_by_name(chosen)
        if location is not None:
            nav_cost = planner_mod.plan(world, start, location.id).total_cost

    return TrialResult(
        task_location=task.location,
        task_purpose=task.purpose,
        policy_id=policy_id,
        success=success,
        handler_turns=sum(1 for speaker, _ in log if speaker == "handler"),
        dialog_words=sum(len(text.split()) for _, text in log),
        chosen_location=chosen,
        nav_cost=nav_cost,
        noise_p=noise.probability,
        seed=noise.seed,
        error=error,
    )


# ---------------------------------------------------------------------------
# suites


@dataclass(frozen=True)
class SuiteMetrics:
    trials: int
    successes: int
    accuracy: float
    avg_turns: float
    avg_dialog_words: float | None
    avg_nav_cost: float | None
    avg_total_time: float | None
    error_count: int


def compute_metrics(trials: list[TrialResult]) -> SuiteMetrics:
    if not trials:
        raise SuiteConfigError("empty suite")
    successes = [t for t in trials if t.success]
    avg_words = avg_cost = avg_time = None
    if successes:
        avg_words = sum(t.dialog_words for t in successes) / len(successes)
        avg_cost = sum(t.nav_cost for t in successes) / len(successes)
        avg_time = sum(
            total_time(t.dialog_words, t.nav_cost) for t in successes
        ) / len(successes)
    return SuiteMetrics(
        trials=len(trials),
        successes=len(successes),
        accuracy=len(successes) / len(trials),
        avg_turns=sum(t.handler_turns for t in trials) / len(trials),
        avg_dialog_words=avg_words,
        avg_nav_cost=avg_cost,
        avg_total_time=avg_time,
        error_count=sum(1 for t in trials if t.error),
    )


def _resolve_path(value: str, kind: str) -> str:
    bundled = assets.bundled_path(kind, value)
    return bundled if bundled is not None else value


def _make_backend(spec: dict | None, trial_index: int = 0):
    if spec is None:
        return None
    kind = spec.get("kind")
    if kind == "scripted":
        return load_scripted_backend(spec["path"])
    if kind == "playback":
        return PlaybackBackend(f"{spec['dir']}/trial_{trial_index}.jsonl")
    if kind == "remote":
        return RemoteBackend(
            base_url=spec["base_url"],
            model=spec["model"],
            credential_env=spec.get("credential_env", "GUIDEDOG_API_KEY"),
            temperature=spec.get("temperature", 0.0),
            timeout=spec.get("timeout", 30.0),
        )
    raise SuiteConfigError(f"unknown backend kind {kind!r}")


def _make_handler(spec: dict | None, task: ServiceTask):
    kind = (spec or {}).get("kind", "direct")
    if kind == "direct":
        return DirectHandler(task.location)
    if kind == "cost-aware":
        return CostAwareHandler(task.location, task.purpose)
    if kind == "llm":
        backend = _make_backend(spec.get("backend"))
        if backend is None:
            raise SuiteConfigError("llm handler needs a backend")
        return LlmHandlerAgent(
            SimulatedHandler(target_location=task.location, purpose=task.purpose, backend=backend)
        )
    raise SuiteConfigError(f"unknown handler kind {kind!r}")


def load_suite_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise SuiteConfigError(f"cannot read suite file {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SuiteConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc


def run_suite(config: dict) -> tuple[SuiteMetrics, list[TrialResult]]:
    """Run every trial in a suite config; deterministic given the config."""
    for key in ("map", "policy", "start"):
        if key not in config:
            raise SuiteConfigError(f"suite config missing {key!r}")

    world = load_map(_resolve_path(config["map"], "map"))
    start_loc = world.location_by_name(config["start"])
    if start_loc is None:
        raise SuiteConfigError(f"start location {config['start']!r} not on the map")

    if "library" in config:
        tasks, groups = load_library(_resolve_path(config["library"], "library"))
    else:
        tasks, groups = library_from_dict(
            {"groups": config.get("groups", {}), "tasks": config.get("tasks", [])}
        )
    if not tasks:
        raise SuiteConfigError("empty suite")

    policy_id = config["policy"]
    base_seed = int(config.get("seed", 0))
    noise_p = float(config.get("noise_p", 0.0))
    alphabet = config.get("noise_alphabet") or NoiseConfig().alphabet
    turn_budget = int(config.get("turn_budget", 6))
    plan_info = bool(config.get("plan_info", False))
    use_synonyms = bool(config.get("use_synonyms", True))

    results = []
    for index, task in enumerate(tasks):
        backend = _make_backend(config.get("backend"), trial_index=index)
        policy = make_policy(
            policy_id,
            world,
            backend=backend,
            groups=groups,
            start_location=start_loc.id,
            plan_info_enabled=plan_info,
            turn_budget=turn_budget,
            use_synonyms=use_synonyms,
        )
        handler = _make_handler(config.get("handler"), task)
        noise = NoiseConfig(
            probability=noise_p, alphabet=alphabet, seed=derive_seed(base_seed, index)
        )
        results.append(
            run_trial(
                policy,
                task,
                world,
                start_loc.id,
                noise,
                handler,
                groups=groups,
                policy_id=policy_id,
                turn_budget=turn_budget,
            )
        )
    return compute_metrics(results), results


# ---------------------------------------------------------------------------
# output


CSV_COLUMNS = (
    "index",
    "task_location",
    "task_purpose",
    "policy_id",
    "success",
    "handler_turns",
    "dialog_words",
    "chosen_location",
    "nav_cost",
    "noise_p",
    "seed",
    "error",
)


def trials_to_csv(trials: list[TrialResult]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for index, t in enumerate(trials):
        writer.writerow(
            [
                index,
                t.task_location,
                t.task_purpose,
                t.policy_id,
                int(t.success),
                t.handler_turns,
                t.dialog_words,
                t.chosen_location or "",
                repr(t.nav_cost) if t.nav_cost is not None else "",
                repr(t.noise_p),
                t.seed,
                t.error,
            ]
        )
    return buffer.getvalue()


def metrics_to_dict(metrics: SuiteMetrics) -> dict:
    return {
        "trials": metrics.trials,
        "successes": metrics.successes,
        "accuracy": metrics.accuracy,
        "avg_turns": metrics.avg_turns,
        "avg_dialog_words": metrics.avg_dialog_words,
        "avg_nav_cost": metrics.avg_nav_cost,
        "avg_total_time": metrics.avg_total_time,
        "error_count": metrics.error_count,
    }


def plot_point(metrics: SuiteMetrics, policy_id: str, noise_p: float) -> dict:
    """One accuracy-vs-dialog-length scatter point (turns and words both)."""
    return {
        "policy": policy_id,
        "noise_p": noise_p,
        "accuracy": metrics.accuracy,
        "avg_dialog_turns": metrics.avg_turns,
        "avg_dialog_words": metrics.avg_dialog_words,
    }
