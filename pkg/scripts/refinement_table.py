#!/usr/bin/env python3
"""Measured constants of every battery at two resolutions, as JSON lines or CSV.

    python3 scripts/refinement_table.py [--format json|csv] [--out PATH]
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time

from hardymorrey import batteries as bat


def rows():
    def pair(name, fn, lo, hi, **params):
        t0 = time.perf_counter()
        a, b = fn(lo), fn(hi)
        return {
            "name": name,
            "K_low": lo,
            "K_high": hi,
            "low": a,
            "high": b,
            "drift": abs(b / a - 1) if a else None,
            "seconds": round(time.perf_counter() - t0, 2),
            **params,
        }

    yield pair("synthesis_thm1", lambda K: bat.synthesis_constants(K)["thm1"], 8, 10)
    yield pair("synthesis_thm2", lambda K: bat.synthesis_constants(K)["thm2"], 8, 10, p=0.5)
    for n, K in ((1, 8), (2, 4)):
        for v in (0.5, 1.0):
            yield pair("coefficient", lambda k, n=n, v=v: bat.coefficient_constant(n, k, v).value, K, K + 2, n=n, v=v)
    lo, hi = bat.fefferman_stein_constants(8), bat.fefferman_stein_constants(10)
    for (p, q), a in sorted(lo.items()):
        b = hi[(p, q)]
        yield {"name": "fefferman_stein", "K_low": 8, "K_high": 10, "low": a, "high": b, "drift": abs(b / a - 1), "p": p, "q": q}
    yield pair("adams", bat.adams_constant, 6, 7)
    yield pair("olsen", bat.olsen_constant, 6, 7)
    yield pair("czop", bat.t54_constant, 8, 10)
    yield pair("lp_low", lambda K: bat.lp_bracket(K)["ratio_low"], 8, 10)
    yield pair("lp_high", lambda K: bat.lp_bracket(K)["ratio_high"], 8, 10)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    table = list(rows())
    if args.format == "json":
        text = "".join(json.dumps(r, sort_keys=True) + "\n" for r in table)
    else:
        cols = sorted({k for r in table for k in r})
        buf = io.StringIO()
        w = csv.DictWriter(buf, cols, lineterminator="\n")
        w.writeheader()
        w.writerows(table)
        text = buf.getvalue()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
