#!/usr/bin/env python3
"""Simulate the self-play opponent schedule (20% random / 20% past / 60%
self, 1% swap per game) and print the measured statistics."""
import argparse

from kumite.harness import OpponentPoolConfig, hold_agent, random_agent
from kumite.harness.pool import simulate_schedule


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--games", type=int, default=100_000)
    ap.add_argument("--past-pool-size", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = OpponentPoolConfig(
        random_agent=random_agent(args.seed),
        self_agent=hold_agent(),
        past_pool=tuple(random_agent(1000 + k) for k in range(args.past_pool_size)),
    )
    for key, value in simulate_schedule(cfg, games=args.games, seed=args.seed).items():
        print(f"{key}\t{value}")


if __name__ == "__main__":
    main()
