"""Command-line entry point: experiment tooling plus the protocol server."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from ..env.tasks import PRESETS
from ..match.replay import record_replay, save_replay
from ..match.rules import Winner
from ..proto.gateway import Gateway, GatewayConfig
from ..proto.server import GameServer, ServerConfig, default_port
from .agents import AgentHandle, hold_agent, random_agent
from .baseline import (
    evaluate_agent,
    load_policy_agent,
    render_curve,
    save_policy,
    search_agent_train,
)
from .bench import bench_json, benchmark, render_bench
from .crossplay import antisymmetry_report, crossplay_evaluate, render_matrix, render_report
from .pool import OpponentPoolConfig, simulate_schedule


def parse_agent(spec: str) -> AgentHandle:
    """Agent specs: ``hold``, ``random:<seed>``, ``baseline:<policy.npz>``."""
    if spec == "hold":
        return hold_agent()
    kind, _, arg = spec.partition(":")
    if kind == "random":
        return random_agent(int(arg or 0))
    if kind == "baseline":
        return load_policy_agent(arg)
    raise argparse.ArgumentTypeError(f"unknown agent spec {spec!r}")


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
        print(f"wrote {path}")


def cmd_serve(args) -> int:
    cfg = ServerConfig(host=args.host, port=args.port, replay_dir=args.replay_dir)
    server = GameServer(cfg).start()
    print(f"serving on {cfg.host}:{server.port} (replays in {cfg.replay_dir})")
    try:
        server._thread.join()
    except KeyboardInterrupt:
        server.stop()
    return 0


def cmd_gateway(args) -> int:
    cfg = GatewayConfig(host=args.host, port=args.port,
                        upstream_host=args.upstream_host, upstream_port=args.upstream_port)
    gw = Gateway(cfg).start()
    print(f"gateway on {cfg.host}:{gw.port} -> {cfg.upstream_host}:{cfg.upstream_port}")
    try:
        gw._thread.join()
    except KeyboardInterrupt:
        gw.stop()
    return 0


def cmd_bench(args) -> int:
    rows = benchmark(
        frames_per_turn_list=args.frames_per_turn,
        instance_counts=args.instances,
        duration_seconds=args.duration,
        seed=args.seed,
    )
    text = render_bench(rows)
    _write(args.out, text)
    if args.json_out:
        _write(args.json_out, bench_json(rows))
    return 0


def cmd_crossplay(args) -> int:
    pool = [parse_agent(s) for s in args.agents.split(",")]
    matrix = crossplay_evaluate(
        pool, episodes_per_cell=args.episodes, task=args.task,
        seed=args.seed, workers=args.workers,
    )
    report = antisymmetry_report(matrix)
    _write(args.out, render_matrix(matrix))
    _write(args.report_out, render_report(report, matrix.agents))
    return 0


def cmd_schedule_sim(args) -> int:
    past = tuple(random_agent(1000 + k) for k in range(args.past_pool_size))
    cfg = OpponentPoolConfig(
        random_agent=random_agent(args.seed),
        self_agent=hold_agent(),
        past_pool=past,
    )
    stats = simulate_schedule(cfg, games=args.games, seed=args.seed)
    lines = ["# kumite-table v1 schedule-sim"]
    for k, v in stats.items():
        lines.append(f"{k}\t{v!r}")
    _write(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_train_baseline(args) -> int:
    result = search_agent_train(task=args.task, budget=args.budget, seed=args.seed)
    print(f"best return {result.best_return:.4f} over {result.episodes_used} episodes")
    if args.policy_out:
        save_policy(args.policy_out, result)
        print(f"wrote {args.policy_out}")
    _write(args.curve_out, render_curve(result.curve))
    if args.eval_episodes:
        mean = evaluate_agent(result.agent, task=args.task,
                              episodes=args.eval_episodes, seed=args.seed)
        rmean = evaluate_agent(random_agent(args.seed), task=args.task,
                               episodes=args.eval_episodes, seed=args.seed)
        print(f"eval mean return: baseline {mean:.4f} vs random {rmean:.4f}")
    return 0


def cmd_play(args) -> int:
    from ..env.tasks import TaskEnv

    a1 = parse_agent(args.p1)
    a2 = parse_agent(args.p2)
    env = TaskEnv(args.task)
    if not env.config.two_agent:
        raise SystemExit("play needs a two-agent task preset")
    obs0, obs1 = env.reset(seed=args.seed)
    p1 = a1.make_policy(args.seed)
    p2 = a2.make_policy(args.seed)
    terminal = False
    info = None
    while not terminal:
        (obs0, obs1), rewards, terminal, info = env.step(p1.act(obs0), p2.act(obs1))
    names = {1: a1.id, 2: a2.id, 3: "draw"}
    print(f"winner: {names[info['winner']]}  injuries: {info['injuries']}")
    if args.replay_out:
        match = env._backend._match
        if match.recording:
            save_replay(record_replay(match), args.replay_out)
            print(f"wrote {args.replay_out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kumite")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the TCP control server")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=default_port(),
                   help="default from $KUMITE_PORT or 4747")
    p.add_argument("--replay-dir", default="replays")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("gateway", help="run the browser websocket gateway")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=4748)
    p.add_argument("--upstream-host", default="127.0.0.1")
    p.add_argument("--upstream-port", type=int, default=default_port())
    p.set_defaults(func=cmd_gateway)

    p = sub.add_parser("bench", help="frames-per-second benchmark sweep")
    p.add_argument("--frames-per-turn", type=_int_list, default=[1, 10, 50])
    p.add_argument("--instances", type=_int_list, default=[1, 2, 4])
    p.add_argument("--duration", type=float, default=60.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--json-out", default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("crossplay", help="pairwise evaluation matrix")
    p.add_argument("--agents", required=True,
                   help="comma list: hold | random:SEED | baseline:FILE")
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--task", default="aikido-dojo-v1", choices=sorted(PRESETS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None)
    p.add_argument("--report-out", default=None)
    p.set_defaults(func=cmd_crossplay)

    p = sub.add_parser("selfplay-schedule-sim", help="opponent-pool statistics")
    p.add_argument("--games", type=int, default=100_000)
    p.add_argument("--past-pool-size", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_schedule_sim)

    p = sub.add_parser("train-baseline", help="cross-entropy baseline learner")
    p.add_argument("--task", default="destroy-uke-v1", choices=sorted(PRESETS))
    p.add_argument("--budget", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--policy-out", default=None)
    p.add_argument("--curve-out", default=None)
    p.add_argument("--eval-episodes", type=int, default=0)
    p.set_defaults(func=cmd_train_baseline)

    p = sub.add_parser("play", help="pit two named agents against each other")
    p.add_argument("--p1", required=True)
    p.add_argument("--p2", required=True)
    p.add_argument("--task", default="aikido-dojo-v1", choices=sorted(PRESETS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replay-out", default=None)
    p.set_defaults(func=cmd_play)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
