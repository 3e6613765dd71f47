#!/usr/bin/env python3
"""Train the cross-entropy baseline on the single-agent task and compare its
mean evaluation return against the random agent."""
import argparse

from kumite.harness import random_agent
from kumite.harness.baseline import (
    evaluate_agent,
    render_curve,
    save_policy,
    search_agent_train,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--budget", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--eval-episodes", type=int, default=50)
    ap.add_argument("--policy-out", default="baseline_policy.npz")
    ap.add_argument("--curve-out", default="training_curve.tsv")
    args = ap.parse_args()

    result = search_agent_train(budget=args.budget, seed=args.seed)
    save_policy(args.policy_out, result)
    with open(args.curve_out, "w") as fh:
        fh.write(render_curve(result.curve))
    trained = evaluate_agent(result.agent, episodes=args.eval_episodes, seed=args.seed)
    rand = evaluate_agent(random_agent(args.seed), episodes=args.eval_episodes, seed=args.seed)
    print(f"best training return: {result.best_return:.3f}")
    print(f"eval over {args.eval_episodes} episodes: trained {trained:.3f} vs random {rand:.3f} "
          f"(ratio {trained / max(rand, 1e-9):.2f}x)")


if __name__ == "__main__":
    main()
