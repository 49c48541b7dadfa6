import csv
import json
import subprocess
import sys

import pytest

from guidedog import assets, planner, simulator
from guidedog.world import load_map


def run_cli(*argv, expect_code=0):
    result = subprocess.run(
        [sys.executable, "-m", "guidedog.cli", *argv],
        capture_output=True,
        text=True,
    )
    assert result.returncode == expect_code, result.stderr
    return result


class TestRunCommand:
    def test_suite_with_outputs(self, tmp_path):
        out = tmp_path / "trials.csv"
        plot = tmp_path / "plot.json"
        plans = tmp_path / "plans.json"
        result = run_cli(
            "run",
            "--suite", "suites/keyword_direct.json",
            "--noise-p", "0.3",
            "--out", str(out),
            "--plot", str(plot),
            "--dump-plans", str(plans),
        )
        rows = list(csv.DictReader(out.read_text().splitlines()))
        assert len(rows) == 16
        assert all(row["policy_id"] == "keyword" for row in rows)
        summary = json.loads(result.stdout)
        assert summary["trials"] == 16
        assert 0.0 <= summary["accuracy"] <= 1.0

        point = json.loads(plot.read_text())["points"][0]
        assert point["policy"] == "keyword"
        assert point["noise_p"] == 0.3

        dumped = json.loads(plans.read_text())
        assert len(dumped) == 8  # one optimal plan per office location
        assert dumped[0]["total_cost"] <= dumped[-1]["total_cost"]

    def test_flag_overrides_beat_suite_values(self, tmp_path):
        out = tmp_path / "trials.csv"
        run_cli(
            "run",
            "--suite", "suites/keyword_direct.json",
            "--noise-p", "0.0",
            "--out", str(out),
        )
        rows = list(csv.DictReader(out.read_text().splitlines()))
        assert all(row["success"] == "1" for row in rows)

    def test_exit_zero_even_with_failures(self, tmp_path):
        # heavy noise, plenty of failed trials, still a clean exit
        run_cli(
            "run",
            "--suite", "suites/keyword_direct.json",
            "--noise-p", "0.9",
            "--out", str(tmp_path / "t.csv"),
        )

    def test_scripted_full_policy_suite(self, tmp_path):
        result = run_cli(
            "run",
            "--suite", "suites/ablation_with_plan_info.json",
            "--out", str(tmp_path / "t.csv"),
        )
        summary = json.loads(result.stdout)
        assert summary["accuracy"] == 1.0

    def test_reruns_are_byte_identical(self, tmp_path):
        paths = []
        for name in ("a.csv", "b.csv"):
            path = tmp_path / name
            run_cli(
                "run",
                "--suite", "suites/keyword_direct.json",
                "--noise-p", "0.3",
                "--out", str(path),
            )
            paths.append(path.read_bytes())
        assert paths[0] == paths[1]


class TestReplay:
    @pytest.fixture
    def trajectory_file(self, tmp_path):
        world = load_map(assets.bundled_path("map", "ablation"))
        route = planner.plan(world, "lobby", "conference_room")
        trajectory = simulator.execute_plan(world, route)
        path = tmp_path / "trajectory.jsonl"
        path.write_text(simulator.trajectory_to_jsonl(trajectory))
        return path

    def test_replay_subcommand(self, trajectory_file):
        result = run_cli("replay", str(trajectory_file), "--map", "ablation")
        messages = [json.loads(line)["message"] for line in result.stdout.splitlines()]
        assert "We are navigating in the lobby." in messages[0]

    def test_replay_flag_form(self, trajectory_file):
        result = run_cli("--replay", str(trajectory_file), "--map", "ablation")
        kinds = [json.loads(line)["kind"] for line in result.stdout.splitlines()]
        assert kinds[0] == "region_entered"

    def test_replay_requires_map(self, trajectory_file):
        run_cli("--replay", str(trajectory_file), expect_code=2)


def test_help_without_command():
    run_cli(expect_code=2)
