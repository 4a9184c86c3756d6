#!/usr/bin/env python3
"""Per-function C0 of the Calderon-Zygmund decomposition across batteries and resolutions.

    python3 scripts/c0_survey.py [--count 50]
"""

from __future__ import annotations

import argparse
import json
import sys

from hardymorrey.atomic import cz_decompose
from hardymorrey.batteries import cz_battery


def survey(n: int, K: int, count: int, seed: int, maximal: str) -> dict:
    c0 = [cz_decompose(f, 1.0, d=1, maximal=maximal).C0 for f in cz_battery(n, K, count, seed)]
    return {"n": n, "K": K, "seed": seed, "maximal": maximal, "min": min(c0), "max": max(c0), "count": count}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=50)
    args = ap.parse_args(argv)
    for maximal in ("grand", "heat"):
        for n, Ks in ((1, (8, 10)), (2, (4, 5))):
            for K in Ks:
                for seed in (0, args.count):
                    print(json.dumps(survey(n, K, args.count, seed, maximal), sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
