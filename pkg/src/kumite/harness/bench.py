"""Throughput benchmark: random-action episodes, a frames-per-turn sweep,
parallel independent instances, aggregate physics frames per second."""
from __future__ import annotations

import json
import multiprocessing as mp
import time
from dataclasses import asdict, dataclass

import numpy as np

from ..env.observations import game_state_from_match, normalize_observation
from ..match.rules import MatchSettings, new_match, submit_actions

BENCH_ENGAGEMENT = 1500.0   # no collisions between players
BENCH_EPISODE_FRAMES = 1000


@dataclass
class BenchRow:
    frames_per_turn: int
    instances: int
    duration_seconds: float
    total_frames: int
    aggregate_fps: float
    per_instance_fps: float


def _bench_loop(frames_per_turn: int, deadline: float, seed: int) -> int:
    """Random-action episodes until the deadline; returns frames stepped.
    Observations are built each turn so the loop costs what an agent loop
    costs."""
    rng = np.random.default_rng(seed)
    frames = 0
    episode = 0
    while time.monotonic() < deadline:
        settings = MatchSettings(
            matchframes=BENCH_EPISODE_FRAMES,
            turnframes_schedule=(frames_per_turn,),
            engagement_distance=BENCH_ENGAGEMENT,
            seed=seed + episode,
        )
        match = new_match(settings)
        while not match.terminal and time.monotonic() < deadline:
            gs = game_state_from_match(match)
            normalize_observation(gs, 0)
            normalize_observation(gs, 1)
            a1 = np.concatenate([rng.integers(1, 5, 20), rng.integers(1, 3, 2)])
            a2 = np.concatenate([rng.integers(1, 5, 20), rng.integers(1, 3, 2)])
            match, rep = submit_actions(match, a1, a2)
            frames += rep.frames_advanced
        episode += 1
    return frames


def _bench_worker(args) -> int:
    frames_per_turn, duration, seed = args
    deadline = time.monotonic() + duration
    return _bench_loop(frames_per_turn, deadline, seed)


def warm_kernel() -> None:
    """Compile/load the solver before timing (and before forking workers)."""
    m = new_match(MatchSettings(matchframes=2, turnframes_schedule=(2,)))
    submit_actions(m, np.ones(22, dtype=np.int64), np.ones(22, dtype=np.int64))


def benchmark(
    frames_per_turn_list=(1, 10, 50),
    instance_counts=(1, 2, 4),
    duration_seconds: float = 60.0,
    seed: int = 0,
) -> list[BenchRow]:
    """One row per (frames-per-turn, instance count) cell.  Instances are
    independent worker processes (forked after the kernel is warm)."""
    if duration_seconds <= 0:
        raise ValueError("duration_seconds must be > 0")
    warm_kernel()
    ctx = mp.get_context("fork")
    rows = []
    for fpt in frames_per_turn_list:
        for n in instance_counts:
            if n == 1:
                t0 = time.monotonic()
                total = _bench_worker((fpt, duration_seconds, seed))
                elapsed = time.monotonic() - t0
            else:
                args = [(fpt, duration_seconds, seed + 1000 * w) for w in range(n)]
                t0 = time.monotonic()
                with ctx.Pool(processes=n) as pool:
                    counts = pool.map(_bench_worker, args)
                elapsed = time.monotonic() - t0
                total = sum(counts)
            fps = total / duration_seconds
            rows.append(BenchRow(
                frames_per_turn=fpt, instances=n,
                duration_seconds=duration_seconds, total_frames=total,
                aggregate_fps=fps, per_instance_fps=fps / n,
            ))
    return rows


def render_bench(rows: list[BenchRow]) -> str:
    lines = ["# kumite-table v1 benchmark"]
    lines.append("frames_per_turn\tinstances\tduration_s\ttotal_frames\taggregate_fps\tper_instance_fps")
    for r in rows:
        lines.append(
            f"{r.frames_per_turn}\t{r.instances}\t{r.duration_seconds!r}\t"
            f"{r.total_frames}\t{r.aggregate_fps!r}\t{r.per_instance_fps!r}"
        )
    return "\n".join(lines) + "\n"


def bench_json(rows: list[BenchRow]) -> str:
    return json.dumps([asdict(r) for r in rows], indent=2) + "\n"
