"""Re-run the ordering, scalability and best-family checks over several data seeds."""
import argparse

from ttdcopula.copulas import FAMILIES
from ttdcopula.pipeline import compare_path_models, fit_marginals, sweep
from ttdcopula.presets import leopoldstrasse_spec
from ttdcopula.tripdata import synthesize


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", default="0,1,2,3,42")
    ap.add_argument("--m", type=int, default=100_000)
    args = ap.parse_args()

    for seed in (int(s) for s in args.seeds.split(",")):
        series = synthesize(leopoldstrasse_spec(seed=seed))
        margs = fit_marginals(series, 3, seed)
        ordering = True
        for ids in ((2, 3), series.segment_ids):
            cmp_ = compare_path_models(series.select(ids), m=args.m, seed=seed,
                                       marginal_fits=margs)
            conv = cmp_.report("convolution")
            ordering &= all(cmp_.report(f).ks < conv.ks and cmp_.report(f).cvm < conv.cvm
                            for f in FAMILIES)
        best = cmp_.sorted_reports()[0].model
        rows = sweep(series, ("clayton",), m=args.m, seed=seed)
        conv = {r["segment_count"]: r["cvm"] for r in rows if r["model"] == "convolution"}
        clay = {r["segment_count"]: r["cvm"] for r in rows if r["model"] == "clayton"}
        print(f"seed {seed:>3}: ordering {'ok' if ordering else 'FAIL'}; "
              f"convolution x{conv[10] / conv[2]:.1f}; "
              f"Clayton max x{max(clay.values()) / clay[2]:.2f}; best 10D {best}")


if __name__ == "__main__":
    main()
