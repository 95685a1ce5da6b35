"""Monte Carlo Wald coverage for the Bernoulli model against the exact binomial value."""
from __future__ import annotations

import argparse

from fisherkit import montecarlo as mc
from fisherkit.models import builtin_model

def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[10, 25, 100, 400])
    ap.add_argument("--theta", type=float, nargs="+", default=[0.1, 0.3, 0.5])
    ap.add_argument("--k", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--level", type=float, default=0.95)
    args = ap.parse_args()

    bern = builtin_model("bernoulli")
    print(f"{'theta':>6} {'n':>5} {'mc':>8} {'se':>7} {'exact':>8} {'boundary':>9}")
    for theta in args.theta:
        for n in args.n:
            s = mc.coverage_experiment(mc.SimConfig(bern, (theta,), n, args.k, args.seed), args.level)
            exact = mc.exact_wald_coverage(n, theta, args.level)
            print(f"{theta:6.2f} {n:5d} {s.hit_rate:8.4f} {s.mc_stderr:7.4f} {exact:8.4f} {s.boundary:9d}")
    g = mc.coverage_experiment(mc.SimConfig(builtin_model("gaussian", sigma=1.0), (0.0,), 10, 100_000, args.seed))
    z = (g.hit_rate - 0.95) / g.mc_stderr
    print(f"gaussian known sigma, n=10: coverage {g.hit_rate:.4f} ({z:+.2f} SE from 0.95)")

if __name__ == "__main__":
    main()
