import time

import pytest
from fastapi.testclient import TestClient

from guidedog.dialog import GREETING
from guidedog.service import ServiceSettings, create_app


@pytest.fixture
def client():
    settings = ServiceSettings(time_scale=0.0, timestep=0.5)
    with TestClient(create_app(settings)) as test_client:
        yield test_client


def make_session(client, **overrides):
    body = {"map_id": "office", "start_location": "corridor"}
    body.update(overrides)
    response = client.post("/sessions", json=body)
    assert response.status_code == 200
    return response.json()


def wait_done(client, session_id, timeout=10.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        snapshot = client.get(f"/sessions/{session_id}").json()
        if snapshot["done"]:
            return snapshot
        time.sleep(0.01)
    raise AssertionError("session did not finish in time")


def all_events(client, session_id):
    return client.get(f"/sessions/{session_id}/events").json()["events"]


class TestSessionLifecycle:
    def test_greeting_is_first_event(self, client):
        created = make_session(client)
        events = all_events(client, created["session_id"])
        assert events[0]["seq"] == 1
        assert events[0]["kind"] == "robot_utterance"
        assert events[0]["payload"]["text"] == GREETING

    def test_unknown_map_is_404(self, client):
        response = client.post("/sessions", json={"map_id": "atlantis"})
        assert response.status_code == 404

    def test_unknown_session_is_404(self, client):
        assert client.get("/sessions/nope").status_code == 404
        assert client.post("/sessions/nope/utterance", json={"text": "hi"}).status_code == 404

    def test_session_ids_are_unique(self, client):
        first = make_session(client)
        second = make_session(client)
        assert first["session_id"] != second["session_id"]

    def test_bad_start_location(self, client):
        response = client.post(
            "/sessions", json={"map_id": "office", "start_location": "atlantis"}
        )
        assert response.status_code == 400


class TestUtterances:
    def test_clarification_and_plan_options(self, client):
        created = make_session(client, plan_info_enabled=True)
        sid = created["session_id"]
        response = client.post(f"/sessions/{sid}/utterance", json={"text": "I'm thirsty"})
        assert response.status_code == 200
        body = response.json()
        assert body["phase"] == "specifying"
        kinds = [e["kind"] for e in all_events(client, sid)]
        assert "robot_utterance" in kinds
        assert "plan_options" in kinds
        options_event = next(
            e for e in all_events(client, sid) if e["kind"] == "plan_options"
        )
        options = options_event["payload"]["options"]
        assert {o["destination"] for o in options} == {"kitchen", "water fountain"}
        for option in options:
            assert option["estimated_time"] > 0
            assert option["door_open_count"] in (0, 1)

    def test_confirmation_triggers_navigation_to_done(self, client):
        created = make_session(client)
        sid = created["session_id"]
        response = client.post(
            f"/sessions/{sid}/utterance", json={"text": "take me to the water fountain"}
        )
        assert response.json()["phase"] == "confirmed"
        wait_done(client, sid)
        events = all_events(client, sid)
        kinds = [e["kind"] for e in events]
        assert kinds[-1] == "session_phase"
        assert events[-1]["payload"]["phase"] == "done"
        scene_kinds = [
            e["payload"]["kind"] for e in events if e["kind"] == "scene_event"
        ]
        assert scene_kinds[-1] == "arrived_destination"
        poses = [e["payload"] for e in events if e["kind"] == "pose_update"]
        assert len(poses) >= 2
        times = [p["t"] for p in poses]
        assert times == sorted(times)

    def test_sequence_numbers_are_gapless(self, client):
        created = make_session(client)
        sid = created["session_id"]
        client.post(f"/sessions/{sid}/utterance", json={"text": "go to the kitchen"})
        wait_done(client, sid)
        seqs = [e["seq"] for e in all_events(client, sid)]
        assert seqs == list(range(1, len(seqs) + 1))

    def test_pose_updates_on_the_default_ten_hertz_grid(self):
        settings = ServiceSettings(time_scale=0.0, timestep=0.1)
        with TestClient(create_app(settings)) as fast:
            created = fast.post(
                "/sessions", json={"map_id": "office", "start_location": "corridor"}
            ).json()
            sid = created["session_id"]
            fast.post(f"/sessions/{sid}/utterance", json={"text": "go to the water fountain"})
            wait_done(fast, sid)
            times = [
                e["payload"]["t"]
                for e in all_events(fast, sid)
                if e["kind"] == "pose_update"
            ]
            deltas = [b - a for a, b in zip(times, times[1:])]
            assert deltas
            # 0.1 s grid; the final pose of a segment may land off-grid early
            assert all(d <= 0.1 + 1e-9 for d in deltas)
            on_grid = sum(1 for d in deltas if abs(d - 0.1) < 1e-9)
            assert on_grid >= len(deltas) - 2

    def test_utterance_after_confirmation_is_409(self, client):
        created = make_session(client)
        sid = created["session_id"]
        client.post(f"/sessions/{sid}/utterance", json={"text": "go to the kitchen"})
        response = client.post(f"/sessions/{sid}/utterance", json={"text": "wait, no"})
        assert response.status_code == 409

    def test_backend_failure_is_502_and_leaves_session_unchanged(self, client, tmp_path):
        created = make_session(client, backend="demo")
        sid = created["session_id"]
        # remote backend pointed at a dead port
        settings = ServiceSettings(
            time_scale=0.0,
            default_backend={"kind": "remote", "base_url": "http://127.0.0.1:9", "model": "x"},
        )
        with TestClient(create_app(settings)) as broken:
            created = broken.post(
                "/sessions", json={"map_id": "office", "start_location": "corridor"}
            ).json()
            before = broken.get(f"/sessions/{created['session_id']}").json()
            response = broken.post(
                f"/sessions/{created['session_id']}/utterance", json={"text": "hello"}
            )
            assert response.status_code == 502
            after = broken.get(f"/sessions/{created['session_id']}").json()
            assert after["transcript"] == before["transcript"]
            assert after["phase"] == "specifying"

    def test_failed_session_finishes_stream(self, client, tmp_path):
        rules = tmp_path / "клarify.json"
        rules.write_text(
            '{"rules": [], "default": "CLARIFICATION QUESTION: The kitchen, perhaps?"}'
        )
        created = make_session(client, backend=str(rules))
        sid = created["session_id"]
        for i in range(6):
            response = client.post(f"/sessions/{sid}/utterance", json={"text": f"hmm {i}"})
        assert response.json()["phase"] == "failed"
        snapshot = wait_done(client, sid)
        assert snapshot["phase"] == "failed"


class TestChoose:
    def test_choose_confirms_and_navigates(self, client):
        created = make_session(client, plan_info_enabled=True)
        sid = created["session_id"]
        client.post(f"/sessions/{sid}/utterance", json={"text": "I'm thirsty"})
        response = client.post(
            f"/sessions/{sid}/choose", json={"destination": "water fountain"}
        )
        assert response.status_code == 200
        assert response.json()["phase"] == "confirmed"
        snapshot = wait_done(client, sid)
        assert snapshot["confirmed_task"] == "water fountain"

    def test_choose_unknown_destination(self, client):
        created = make_session(client)
        sid = created["session_id"]
        response = client.post(f"/sessions/{sid}/choose", json={"destination": "atlantis"})
        assert response.status_code == 400

    def test_choose_after_navigation_started_is_409(self, client):
        created = make_session(client)
        sid = created["session_id"]
        client.post(f"/sessions/{sid}/choose", json={"destination": "kitchen"})
        response = client.post(f"/sessions/{sid}/choose", json={"destination": "elevator"})
        assert response.status_code == 409


class TestStream:
    def test_stream_replays_from_seq_one_and_terminates(self, client):
        created = make_session(client)
        sid = created["session_id"]
        client.post(f"/sessions/{sid}/utterance", json={"text": "go to the kitchen"})
        wait_done(client, sid)
        received = []
        with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
            while True:
                try:
                    received.append(ws.receive_json())
                except Exception:
                    break
        assert received[0]["seq"] == 1
        assert received == all_events(client, sid)
        assert received[-1]["payload"]["phase"] == "done"

    def test_reconnect_replay_matches_uninterrupted_consumer(self):
        settings = ServiceSettings(time_scale=150.0, timestep=0.5)
        with TestClient(create_app(settings)) as live:
            created = live.post(
                "/sessions", json={"map_id": "office", "start_location": "corridor"}
            ).json()
            sid = created["session_id"]
            live.post(f"/sessions/{sid}/utterance", json={"text": "go to the water fountain"})
            # interrupted consumer: read a handful of events, drop, reconnect
            partial = []
            with live.websocket_connect(f"/sessions/{sid}/stream") as ws:
                for _ in range(5):
                    partial.append(ws.receive_json())
            wait_done(live, sid)
            replayed = []
            with live.websocket_connect(f"/sessions/{sid}/stream") as ws:
                while True:
                    try:
                        replayed.append(ws.receive_json())
                    except Exception:
                        break
            assert replayed[: len(partial)] == partial
            assert replayed == all_events(live, sid)
            seqs = [e["seq"] for e in replayed]
            assert seqs == list(range(1, len(seqs) + 1))

    def test_concurrent_consumers_see_identical_sequences(self, client):
        created = make_session(client)
        sid = created["session_id"]
        client.post(f"/sessions/{sid}/utterance", json={"text": "go to the bathroom"})
        wait_done(client, sid)

        def drain():
            events = []
            with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
                while True:
                    try:
                        events.append(ws.receive_json())
                    except Exception:
                        return events

        assert drain() == drain()

    def test_unknown_session_stream_closes(self, client):
        with pytest.raises(Exception):
            with client.websocket_connect("/sessions/missing/stream") as ws:
                ws.receive_json()


class TestIsolation:
    def test_interleaved_sessions_do_not_leak_events(self, client):
        a = make_session(client)["session_id"]
        b = make_session(client)["session_id"]
        client.post(f"/sessions/{a}/utterance", json={"text": "I'm thirsty"})
        client.post(f"/sessions/{b}/utterance", json={"text": "go to the elevator"})
        client.post(f"/sessions/{a}/utterance", json={"text": "go to the kitchen"})
        wait_done(client, a)
        wait_done(client, b)
        a_events = all_events(client, a)
        b_events = all_events(client, b)
        a_texts = [
            e["payload"]["text"] for e in a_events if e["kind"] == "robot_utterance"
        ]
        b_texts = [
            e["payload"]["text"] for e in b_events if e["kind"] == "robot_utterance"
        ]
        assert any("kitchen" in t for t in a_texts)
        assert all("elevator" not in t for t in a_texts)
        assert any("elevator" in t for t in b_texts)
        assert all("kitchen" not in t for t in b_texts)

    def test_map_endpoints(self, client):
        maps = client.get("/maps").json()["maps"]
        assert {"office", "small", "ablation"} <= set(maps)
        geometry = client.get("/maps/office").json()
        assert len(geometry["locations"]) == 8
        assert client.get("/maps/atlantis").status_code == 404
