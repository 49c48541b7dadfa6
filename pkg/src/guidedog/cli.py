"""Command-line interface.

Subcommands:
  run      execute an evaluation suite (trials CSV, summary JSON, plot data)
  serve    start the session service (FastAPI + uvicorn)
  session  interactive thin client against a running session service
  replay   re-verbalize a recorded trajectory file against a map

`guidedog --replay <trajectory> --map <map>` is accepted as a shorthand for
the replay subcommand.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import threading
import time

from . import assets, harness, planner, simulator
from .world import load_map


def _resolve_map(value: str) -> str:
    return assets.bundled_path("map", value) or value


def _backend_spec_from_flag(flag: str | None, args) -> dict | None:
    if flag is None:
        return None
    if flag == "remote":
        base_url = args.remote_base_url or os.environ.get("GUIDEDOG_API_BASE")
        if not base_url:
            raise SystemExit("remote backend needs --remote-base-url or GUIDEDOG_API_BASE")
        return {
            "kind": "remote",
            "base_url": base_url,
            "model": args.remote_model or os.environ.get("GUIDEDOG_MODEL", "gpt-4"),
        }
    if flag.startswith("scripted:"):
        return {"kind": "scripted", "path": flag.split(":", 1)[1]}
    if flag.startswith("playback:"):
        return {"kind": "playback", "dir": flag.split(":", 1)[1]}
    raise SystemExit(f"unknown backend selector {flag!r}")


def cmd_run(args) -> int:
    config = harness.load_suite_config(args.suite) if args.suite else {}
    if args.map:
        config["map"] = args.map
    if args.library:
        config["library"] = args.library
    if args.policy:
        config["policy"] = args.policy
    if args.start:
        config["start"] = args.start
    if args.seed is not None:
        config["seed"] = args.seed
    if args.noise_seed is not None:
        config["noise_seed"] = args.noise_seed
    if args.noise_p is not None:
        config["noise_p"] = args.noise_p
    if args.noise_alphabet:
        config["noise_alphabet"] = args.noise_alphabet
    if args.plan_info:
        config["plan_info"] = True
    backend_spec = _backend_spec_from_flag(args.backend, args)
    if backend_spec is not None:
        config["backend"] = backend_spec

    metrics, trials = harness.run_suite(config)

    if args.dump_plans:
        world = load_map(_resolve_map(config["map"]))
        start = world.location_by_name(config["start"]).id
        plans = planner.plan_all(world, start, sorted(world.locations))
        with open(args.dump_plans, "w", encoding="utf-8") as fh:
            json.dump([planner.plan_to_dict(p) for p in plans], fh, indent=2)
            fh.write("\n")

    csv_text = harness.trials_to_csv(trials)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(csv_text)
    else:
        sys.stdout.write(csv_text)

    summary = harness.metrics_to_dict(metrics)
    print(json.dumps(summary, indent=2))

    if args.plot:
        point = harness.plot_point(
            metrics, config.get("policy", ""), float(config.get("noise_p", 0.0))
        )
        with open(args.plot, "w", encoding="utf-8") as fh:
            json.dump({"points": [point]}, fh, indent=2)
            fh.write("\n")
    return 0


def cmd_replay(args) -> int:
    world = load_map(_resolve_map(args.map))
    poses = simulator.load_trajectory_poses(args.replay)
    events = simulator.scene_verbalize(
        poses, world, silence_timeout=args.silence_timeout
    )
    sys.stdout.write(simulator.events_to_jsonl(events))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceSettings, create_app

    extra_maps = {}
    if args.map and not assets.bundled_path("map", args.map):
        map_id = os.path.splitext(os.path.basename(args.map))[0]
        extra_maps[map_id] = args.map
    settings = ServiceSettings(
        time_scale=args.time_scale,
        extra_maps=extra_maps,
        default_backend=_backend_spec_from_flag(args.backend, args),
    )
    uvicorn.run(create_app(settings), host=args.host, port=args.port)
    return 0


def _print_event(event: dict) -> None:
    kind = event["kind"]
    payload = event["payload"]
    if kind == "robot_utterance":
        print(f"robot> {payload['text']}")
    elif kind == "plan_options":
        for option in payload["options"]:
            print(
                f"  option: {option['destination']}  "
                f"~{option['estimated_time']:.0f}s, {option['door_open_count']} door(s), "
                f"{option['total_cost']:.1f} m"
            )
    elif kind == "scene_event":
        print(f"scene> {payload['message']}")
    elif kind == "session_phase":
        print(f"phase> {payload['phase']}")


def cmd_session(args) -> int:
    import requests

    base = args.url.rstrip("/")
    body = {
        "map_id": args.map,
        "plan_info_enabled": args.plan_info,
        "backend": args.backend or "default",
    }
    if args.start:
        body["start_location"] = args.start
    created = requests.post(f"{base}/sessions", json=body, timeout=10)
    created.raise_for_status()
    session_id = created.json()["session_id"]
    print(f"session {session_id} on map {args.map}")

    stop = threading.Event()

    def poll_events():
        cursor = 0
        while not stop.is_set():
            try:
                response = requests.get(
                    f"{base}/sessions/{session_id}/events",
                    params={"after": cursor},
                    timeout=10,
                )
                response.raise_for_status()
            except requests.RequestException as exc:
                print(f"[stream error: {exc}]")
                time.sleep(1.0)
                continue
            data = response.json()
            for event in data["events"]:
                _print_event(event)
            cursor = data["last_seq"]
            if data["done"]:
                print("[session complete]")
                stop.set()
                return
            time.sleep(args.poll_interval)

    poller = threading.Thread(target=poll_events, daemon=True)
    poller.start()

    try:
        while not stop.is_set():
            try:
                line = input()
            except EOFError:
                break
            line = line.strip()
            if not line:
                continue
            if line in ("/quit", "/exit"):
                break
            if line.startswith("/choose "):
                response = requests.post(
                    f"{base}/sessions/{session_id}/choose",
                    json={"destination": line[len("/choose "):].strip()},
                    timeout=10,
                )
            else:
                response = requests.post(
                    f"{base}/sessions/{session_id}/utterance",
                    json={"text": line},
                    timeout=30,
                )
            if response.status_code >= 400:
                print(f"[error {response.status_code}: {response.json().get('detail')}]")
    except KeyboardInterrupt:
        pass
    finally:
        stop.set()
        poller.join(timeout=2.0)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="guidedog")
    parser.add_argument("--replay", metavar="TRAJECTORY", help="replay a trajectory file")
    parser.add_argument("--map", help="map file or bundled map name (with --replay)")
    parser.add_argument(
        "--silence-timeout", type=float, default=simulator.DEFAULT_SILENCE_TIMEOUT
    )
    subparsers = parser.add_subparsers(dest="command")

    run_parser = subparsers.add_parser("run", help="run an evaluation suite")
    run_parser.add_argument("--suite", help="suite config file (JSON)")
    run_parser.add_argument("--policy", choices=["keyword", "single-turn", "full"])
    run_parser.add_argument("--map", help="map file or bundled name")
    run_parser.add_argument("--library", help="task library file or bundled name")
    run_parser.add_argument("--start", help="scenario start location name")
    run_parser.add_argument("--seed", type=int)
    run_parser.add_argument("--noise-p", type=float)
    run_parser.add_argument("--noise-seed", type=int)
    run_parser.add_argument("--noise-alphabet")
    run_parser.add_argument("--plan-info", action="store_true")
    run_parser.add_argument(
        "--backend", help="remote | scripted:<rules file> | playback:<dir>"
    )
    run_parser.add_argument("--remote-base-url")
    run_parser.add_argument("--remote-model")
    run_parser.add_argument("--out", help="write per-trial CSV here (default: stdout)")
    run_parser.add_argument("--plot", help="write accuracy-vs-length scatter data here")
    run_parser.add_argument("--dump-plans", help="write plans for every destination here")
    run_parser.set_defaults(func=cmd_run)

    serve_parser = subparsers.add_parser("serve", help="start the session service")
    serve_parser.add_argument("--host", default="127.0.0.1")
    serve_parser.add_argument("--port", type=int, default=8000)
    serve_parser.add_argument("--map", help="extra map file to register")
    serve_parser.add_argument("--time-scale", type=float, default=10.0)
    serve_parser.add_argument(
        "--backend", help="remote | scripted:<rules file> (default: bundled demo rules)"
    )
    serve_parser.add_argument("--remote-base-url")
    serve_parser.add_argument("--remote-model")
    serve_parser.set_defaults(func=cmd_serve)

    session_parser = subparsers.add_parser(
        "session", help="interactive client for a running service"
    )
    session_parser.add_argument("--url", default="http://127.0.0.1:8000")
    session_parser.add_argument("--map", default="office")
    session_parser.add_argument("--start")
    session_parser.add_argument("--plan-info", action="store_true")
    session_parser.add_argument("--backend")
    session_parser.add_argument("--poll-interval", type=float, default=0.2)
    session_parser.set_defaults(func=cmd_session)

    replay_parser = subparsers.add_parser("replay", help="verbalize a trajectory file")
    replay_parser.add_argument("trajectory")
    replay_parser.add_argument("--map", required=True)
    replay_parser.add_argument(
        "--silence-timeout", type=float, default=simulator.DEFAULT_SILENCE_TIMEOUT
    )
    replay_parser.set_defaults(
        func=lambda args: cmd_replay(
            argparse.Namespace(
                replay=args.trajectory,
                map=args.map,
                silence_timeout=args.silence_timeout,
            )
        )
    )

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.replay:
        if not args.map:
            parser.error("--replay requires --map")
        return cmd_replay(args)
    if not getattr(args, "command", None):
        parser.print_help()
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
