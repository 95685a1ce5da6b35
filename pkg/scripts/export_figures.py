"""Write the CSV data behind every standard figure into a directory."""
from __future__ import annotations

import argparse
import os

from fisherkit import figures


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("outdir", nargs="?", default="figures")
    ap.add_argument("--resolution", type=int, default=500)
    args = ap.parse_args()
    os.makedirs(args.outdir, exist_ok=True)
    for name in figures.FIGURES:
        path = os.path.join(args.outdir, f"{name}.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(figures.figure_data(name, args.resolution))
        print(path)


if __name__ == "__main__":
    main()
