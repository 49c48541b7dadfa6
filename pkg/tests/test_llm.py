import json
import os

import pytest

from guidedog.llm import (
    BackendError,
    ChatHistory,
    PlaybackBackend,
    PlaybackDivergenceError,
    PlaybackExhaustedError,
    RemoteBackend,
    ScriptedBackend,
    SimulatedHandler,
    complete,
    extract_planner_info,
    handler_respond,
    load_scripted_backend,
    opening_instruction,
    simulated_handler_prompt,
)


class TestChatHistory:
    def test_roles_must_alternate(self):
        history = ChatHistory(system_prompt="sys")
        history.append("assistant", "hello")
        history.append("user", "hi")
        with pytest.raises(ValueError):
            history.append("user", "again")

    def test_wire_format(self):
        history = ChatHistory(system_prompt="sys")
        history.append("user", "hi")
        assert history.as_wire() == [
            {"role": "system", "content": "sys"},
            {"role": "user", "content": "hi"},
        ]

    def test_last_user_text(self):
        history = ChatHistory()
        history.append("user", "first")
        history.append("assistant", "reply")
        assert history.last_user_text() == "first"


class TestScriptedBackend:
    def test_rule_table_lookup(self):
        backend = ScriptedBackend(
            rules=[("thirsty", "CLARIFICATION QUESTION: kitchen or water fountain?")],
            default="CLARIFICATION QUESTION: where to?",
        )
        history = ChatHistory()
        history.append("user", "I'm thirsty")
        assert complete(backend, history).startswith("CLARIFICATION QUESTION: kitchen")

    def test_default_when_no_rule_matches(self):
        backend = ScriptedBackend(rules=[], default="fallback answer")
        history = ChatHistory()
        history.append("user", "anything at all")
        assert complete(backend, history) == "fallback answer"

    def test_conjunctive_matcher(self):
        backend = ScriptedBackend(
            rules=[(["alpha", "beta"], "both"), ("alpha", "only alpha")],
            default="none",
        )
        history = ChatHistory()
        history.append("user", "alpha and beta here")
        assert complete(backend, history) == "both"
        history2 = ChatHistory()
        history2.append("user", "alpha alone")
        assert complete(backend, history2) == "only alpha"

    def test_planner_info_placeholder(self):
        backend = ScriptedBackend(rules=[], default="Facts: {planner_info}")
        history = ChatHistory()
        history.append("user", "go\n\nPlanner information: The kitchen takes two minutes.")
        assert complete(backend, history) == "Facts: The kitchen takes two minutes."

    def test_determinism(self):
        backend = ScriptedBackend(rules=[("a", "x")], default="y")
        history = ChatHistory()
        history.append("user", "a")
        assert complete(backend, history) == complete(backend, history)

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "rules.json"
        path.write_text(
            json.dumps(
                {
                    "rules": [{"match": ["a", "b"], "respond": "both"}],
                    "default": "dflt",
                }
            )
        )
        backend = load_scripted_backend(str(path))
        history = ChatHistory()
        history.append("user", "b then a")
        assert complete(backend, history) == "both"


def _write_recording(path, pairs, leading_robot="Hello!"):
    records = [{"speaker": "robot", "text": leading_robot, "timestamp": 0.0}]
    for i, (handler, robot) in enumerate(pairs):
        records.append({"speaker": "handler", "text": handler, "timestamp": float(2 * i + 1)})
        records.append({"speaker": "robot", "text": robot, "timestamp": float(2 * i + 2)})
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n")


class TestPlaybackBackend:
    def test_replays_three_exchanges_then_errors(self, tmp_path):
        path = tmp_path / "rec.jsonl"
        pairs = [("u1", "r1"), ("u2", "r2"), ("u3", "r3")]
        _write_recording(path, pairs)
        backend = PlaybackBackend(str(path))
        for user_text, robot_text in pairs:
            history = ChatHistory()
            history.append("user", user_text)
            assert complete(backend, history) == robot_text
        history = ChatHistory()
        history.append("user", "u4")
        with pytest.raises(PlaybackExhaustedError):
            complete(backend, history)

    def test_divergence_fails_loudly(self, tmp_path):
        path = tmp_path / "rec.jsonl"
        _write_recording(path, [("the recorded request", "r1")])
        backend = PlaybackBackend(str(path))
        history = ChatHistory()
        history.append("user", "something else entirely")
        with pytest.raises(PlaybackDivergenceError):
            complete(backend, history)

    def test_accepts_injected_context_around_recorded_text(self, tmp_path):
        path = tmp_path / "rec.jsonl"
        _write_recording(path, [("take me there", "r1")])
        backend = PlaybackBackend(str(path))
        history = ChatHistory()
        history.append("user", "take me there\n\nPlanner information: ...")
        assert complete(backend, history) == "r1"


class TestRemoteBackend:
    def test_transport_error_is_backend_error(self, no_network):
        backend = RemoteBackend(base_url="http://127.0.0.1:1", model="m", timeout=0.2)
        history = ChatHistory()
        history.append("user", "hi")
        with pytest.raises(BackendError):
            complete(backend, history)

    @pytest.mark.skipif(
        not os.environ.get("GUIDEDOG_REMOTE_TEST"),
        reason="opt-in live integration check (set GUIDEDOG_REMOTE_TEST=1)",
    )
    def test_live_smoke(self):
        from guidedog.dialog import build_system_prompt

        backend = RemoteBackend(
            base_url=os.environ["GUIDEDOG_API_BASE"],
            model=os.environ.get("GUIDEDOG_MODEL", "gpt-4"),
        )
        history = ChatHistory(
            system_prompt=build_system_prompt(["kitchen", "water fountain"])
        )
        history.append("user", "I'm thirsty")
        assert complete(backend, history).strip()


class TestSimulatedHandler:
    def test_prompt_contains_target_and_constraints(self):
        prompt = simulated_handler_prompt("water fountain", "I want something to drink")
        assert "You need to navigate to water fountain" in prompt
        assert "Do not say the name of where you want to go, unless asked" in prompt
        assert "must not show interest in any other locations" in prompt
        assert "Begin the conversation by indicating that you want something to drink" in prompt

    def test_prompt_never_contains_agent_role_text(self):
        prompt = simulated_handler_prompt("bench", "I want to sit down")
        assert "robot guide dog" not in prompt.casefold()

    def test_rejects_empty_inputs(self):
        with pytest.raises(ValueError):
            simulated_handler_prompt("", "purpose")
        with pytest.raises(ValueError):
            simulated_handler_prompt("kitchen", "  ")

    def test_opening_instruction_shapes(self):
        assert (
            opening_instruction("I want to sit down")
            == "Begin the conversation by indicating that you want to sit down"
        )
        assert opening_instruction("Fresh air, please").startswith(
            'Begin the conversation by indicating: "'
        )

    def test_opening_statement_on_empty_history(self):
        backend = ScriptedBackend(
            rules=[("indicating that you want to sit down", "I would like to sit down somewhere.")],
            default="Hmm.",
        )
        handler = SimulatedHandler("waiting room", "I want to sit down", backend)
        text = handler_respond(handler, ChatHistory())
        assert "sit down" in text
        assert "waiting room" not in text

    def test_responds_to_robot_question(self):
        backend = ScriptedBackend(
            rules=[("kitchen or water fountain", "The water fountain sounds right.")],
            default="Hmm.",
        )
        handler = SimulatedHandler("water fountain", "I want something to drink", backend)
        history = ChatHistory()
        history.append("user", "Would you like the kitchen or water fountain?")
        assert complete(backend, history) == handler_respond(handler, history)

    def test_requires_last_message_from_robot(self):
        handler = SimulatedHandler("kitchen", "I want tea", ScriptedBackend(default="x"))
        history = ChatHistory()
        history.append("user", "robot text")
        history.append("assistant", "handler text")
        with pytest.raises(ValueError):
            handler_respond(handler, history)


def test_extract_planner_info():
    assert extract_planner_info("no marker here") == ""
    text = "request\n\nPlanner information: The bench has no doors."
    assert extract_planner_info(text) == "The bench has no doors."
