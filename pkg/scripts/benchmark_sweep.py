#!/usr/bin/env python3
"""Throughput sweep over frames-per-turn and parallel instance counts.

Reproduces the benchmark methodology: one-minute random-action runs at
engagement distance 1500 (no inter-player collisions), reporting aggregate
physics frames per second per cell.
"""
import argparse

from kumite.harness.bench import bench_json, benchmark, render_bench


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--frames-per-turn", default="1,5,10,20,50")
    ap.add_argument("--instances", default="1,2,4")
    ap.add_argument("--duration", type=float, default=60.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="bench.tsv")
    ap.add_argument("--json-out", default="bench.json")
    args = ap.parse_args()

    rows = benchmark(
        frames_per_turn_list=[int(x) for x in args.frames_per_turn.split(",")],
        instance_counts=[int(x) for x in args.instances.split(",")],
        duration_seconds=args.duration,
        seed=args.seed,
    )
    text = render_bench(rows)
    print(text, end="")
    with open(args.out, "w") as fh:
        fh.write(text)
    with open(args.json_out, "w") as fh:
        fh.write(bench_json(rows))


if __name__ == "__main__":
    main()
