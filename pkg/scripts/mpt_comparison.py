"""FIA, AIC, BIC and exact NML description lengths for the three MPT data sets."""
from __future__ import annotations

import argparse

from fisherkit import mdl
from fisherkit.models import CountVector, builtin_model

DATA = [(12, 1, 17), (14, 10, 6), (12, 16, 2)]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tie-tolerance", type=float, default=mdl.TIE_TOLERANCE)
    args = ap.parse_args()
    models = [builtin_model("m1"), builtin_model("m2")]
    print(f"{'counts':>14} {'criterion':>8} {'M1':>9} {'M2':>9}  preferred")
    for counts in DATA:
        y = CountVector(counts)
        for crit in mdl.CRITERIA:
            rep = mdl.select(models, y, crit, tie_tolerance=args.tie_tolerance)
            a, b = (v.total for v in rep.values)
            print(f"{str(counts):>14} {crit:>8} {a:9.3f} {b:9.3f}  {rep.preferred}")
    for m in models:
        r = mdl.nml_exact(m, 30)
        print(f"{m.name}: log NML denominator at n=30 = {r.log_denominator:.4f} over {r.n_vectors} count vectors")


if __name__ == "__main__":
    main()
