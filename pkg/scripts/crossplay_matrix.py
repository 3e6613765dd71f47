#!/usr/bin/env python3
"""Cross-play a pool of agents (two random seeds, the all-hold dummy, and a
freshly trained baseline) and print the win-rate matrix with the
antisymmetry report."""
import argparse

from kumite.harness import (
    antisymmetry_report,
    crossplay_evaluate,
    hold_agent,
    random_agent,
    render_matrix,
    render_report,
)
from kumite.harness.baseline import search_agent_train


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--episodes", type=int, default=100)
    ap.add_argument("--train-budget", type=int, default=320)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=2)
    ap.add_argument("--out", default="crossplay.tsv")
    ap.add_argument("--report-out", default="antisymmetry.tsv")
    args = ap.parse_args()

    baseline = search_agent_train(budget=args.train_budget, seed=args.seed).agent
    pool = [random_agent(0), random_agent(1), baseline, hold_agent()]
    matrix = crossplay_evaluate(pool, episodes_per_cell=args.episodes,
                                seed=args.seed, workers=args.workers)
    report = antisymmetry_report(matrix)
    mtext = render_matrix(matrix)
    rtext = render_report(report, matrix.agents)
    print(mtext)
    print(rtext, end="")
    with open(args.out, "w") as fh:
        fh.write(mtext)
    with open(args.report_out, "w") as fh:
        fh.write(rtext)


if __name__ == "__main__":
    main()
