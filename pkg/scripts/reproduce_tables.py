"""2-segment and 10-segment path GoF tables on the synthetic leopoldstrasse data.

    python scripts/reproduce_tables.py --seed 42 --m 100000 --out results/tables.json
"""
import argparse
import json
import time
from pathlib import Path

from ttdcopula.pipeline import compare_path_models, fit_marginals
from ttdcopula.presets import leopoldstrasse_spec
from ttdcopula.tripdata import synthesize


def fmt(params):
    return ", ".join(f"{k}={v:.3f}" for k, v in (params or {}).items()) or "/"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--m", type=int, default=100_000)
    ap.add_argument("--n", type=int, default=4495)
    ap.add_argument("--out")
    args = ap.parse_args()

    t0 = time.perf_counter()
    series = synthesize(leopoldstrasse_spec(n_trips=args.n, seed=args.seed))
    margs = fit_marginals(series, 3, args.seed)
    doc = {}
    for ids in ((2, 3), tuple(series.segment_ids)):
        cmp_ = compare_path_models(series.select(ids), m=args.m, seed=args.seed,
                                   marginal_fits=margs)
        reports = cmp_.sorted_reports()
        print(f"\nsegments {list(ids)}")
        print(f"{'Model':<16}{'KS':>8}{'CVM':>12}  Parameter")
        for r in reports:
            print(f"{r.model:<16}{r.ks:>8.4f}{r.cvm:>12.2e}  {fmt(r.parameters)}")
        doc[f"{len(ids)}D"] = [r.to_dict() for r in reports]
    print(f"\n{time.perf_counter() - t0:.1f}s")
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")


if __name__ == "__main__":
    main()
