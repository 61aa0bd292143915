"""Command-line front end.

Exit codes: 0 success, 1 model/fit failure, 2 usage or I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

from .copulas import FAMILIES
from .dependence import pairwise_taus
from .gof import gof_report, ks_statistic
from .marginals import GmmFit, GmmParams, gmm_cdf
from .paths import empirical_path, read_path_csv
from .pipeline import compare_path_models, fit_marginals, model_label, sweep
from .presets import BUILTIN_SPECS
from .tripdata import HEADER, SynthSpec, TripDataError, assemble_series, load_trips, synthesize, write_trips

EXIT_OK, EXIT_FIT, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class FitFailure(Exception):
    pass


@dataclass
class RunConfig:
    command: str = ""
    input: str | None = None
    out: str | None = None
    segments: list[int] | None = None
    families: list[str] = field(default_factory=lambda: list(FAMILIES))
    k: int = 3
    m: int = 100_000
    seed: int = 42
    pseudo: str = "empirical"
    format: str = "table"
    spec: str = "leopoldstrasse"
    n: int | None = None
    gps_artifact: float = 0.0
    marginals: str | None = None
    reference: str | None = None
    model: str | None = None
    label: str = "model"

    def validate(self):
        if self.k < 1:
            raise UsageError("--k must be >= 1")
        if self.m < 1000:
            raise UsageError("--m must be >= 1000")
        if not 0 <= self.seed < 2**64:
            raise UsageError("--seed must be an unsigned 64-bit integer")
        if self.n is not None and self.n < 2:
            raise UsageError("--n must be >= 2")
        if self.pseudo not in ("empirical", "parametric"):
            raise UsageError("--pseudo must be 'empirical' or 'parametric'")
        unknown = [f for f in self.families if f not in FAMILIES]
        if unknown:
            raise UsageError(f"unknown copula families: {', '.join(unknown)}")
        if self.format not in ("table", "json", "csv"):
            raise UsageError("--format must be table, json or csv")


def _int_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    return out


def _str_list(text: str) -> list[str]:
    return [p.strip() for p in text.split(",") if p.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, help="random seed (default 42)")
    common.add_argument("--out", help="output path (file or directory, per command)")
    common.add_argument("--format", choices=("table", "json", "csv"), help="stdout format")
    common.add_argument("--config", help="JSON file mirroring the run options")

    data = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    data.add_argument("--input", help="trip CSV (drive_id,segment_id,travel_time_s)")
    data.add_argument("--segments", type=_int_list, help="ordered segment ids, e.g. 1-10 or 2,3")
    data.add_argument("--k", type=int, help="GMM components (default 3)")

    model = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    model.add_argument("--families", type=_str_list, help="comma-separated copula families")
    model.add_argument("--m", type=int, help="Monte-Carlo draws per path estimate (default 100000)")
    model.add_argument("--pseudo", choices=("empirical", "parametric"),
                       help="pseudo-observation mode (default empirical)")
    model.add_argument("--marginals", help="GMM JSON from fit-marginals (refit if omitted)")

    parser = argparse.ArgumentParser(prog="ttdcopula",
                                     description="Path travel-time distributions from copulas.")
    sub = parser.add_subparsers(dest="command", required=True)
    quiet = {"argument_default": argparse.SUPPRESS}

    p = sub.add_parser("synth", parents=[common], help="write a synthetic trip dataset", **quiet)
    p.add_argument("--spec", help="built-in spec name or SynthSpec JSON path")
    p.add_argument("--n", type=int, help="number of drives")
    p.add_argument("--gps-artifact", dest="gps_artifact", type=float,
                   help="fraction of drives with proportional consecutive times")

    sub.add_parser("fit-marginals", parents=[common, data], help="fit per-segment GMMs")
    sub.add_parser("fit-copula", parents=[common, data, model], help="fit copula families")
    sub.add_parser("estimate-path", parents=[common, data, model],
                   help="path TTD estimates and GoF against the empirical path")
    p = sub.add_parser("gof", parents=[common, data], help="KS/CvM between two samples", **quiet)
    p.add_argument("--reference", help="reference CSV (travel_time_s, or trip CSV)")
    p.add_argument("--model", help="model sample CSV (travel_time_s)")
    p.add_argument("--label", help="model label in the report")
    sub.add_parser("sweep", parents=[common, data, model],
                   help="KS/CvM over growing segment prefixes")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    raw = {}
    cfg_path = getattr(args, "config", None)
    if cfg_path:
        try:
            raw = json.loads(Path(cfg_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {cfg_path}: {exc}") from None
        known = {f.name for f in fields(RunConfig)}
        bad = sorted(set(raw) - known)
        if bad:
            raise UsageError(f"unknown config keys: {', '.join(bad)}")
        values.update(raw)
    values.update({k: v for k, v in vars(args).items() if k != "config"})
    # sweep compares convolution with Clayton unless told otherwise
    if values["command"] == "sweep" and "families" not in values:
        values["families"] = ["clayton"]
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def _load_series(cfg: RunConfig):
    if not cfg.input:
        raise UsageError("--input is required")
    records = load_trips(cfg.input)
    ids = cfg.segments or sorted({r.segment_id for r in records})
    return assemble_series(records, ids)


def _load_marginals(cfg: RunConfig, series):
    if not cfg.marginals:
        return None
    try:
        doc = json.loads(Path(cfg.marginals).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read marginals {cfg.marginals}: {exc}") from None
    by_id = {int(s["segment_id"]): s for s in doc["segments"]}
    missing = [s for s in series.segment_ids if s not in by_id]
    if missing:
        raise UsageError(f"marginals file lacks segments {missing}")
    return {s: GmmFit(GmmParams.from_dict(by_id[s]["gmm"]), by_id[s].get("log_likelihood", float("nan")),
                      by_id[s].get("iterations", 0), by_id[s].get("converged", True))
            for s in series.segment_ids}


def _table(rows, columns) -> str:
    widths = [max(len(c), *(len(str(r[i])) for r in rows)) if rows else len(c)
              for i, c in enumerate(columns)]
    line = "  ".join(c.ljust(w) for c, w in zip(columns, widths))
    body = ["  ".join(str(v).ljust(w) for v, w in zip(r, widths)) for r in rows]
    return "\n".join([line, "-" * len(line), *body]) + "\n"


def _csv_text(rows, columns) -> str:
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def _fmt_params(params: dict | None) -> str:
    if not params:
        return "/"
    return ", ".join(f"{k}={v:.3f}" for k, v in params.items())


def cmd_synth(cfg: RunConfig) -> int:
    if cfg.spec in BUILTIN_SPECS:
        kwargs = {"seed": cfg.seed, "gps_artifact": cfg.gps_artifact}
        if cfg.n is not None:
            kwargs["n_trips"] = cfg.n
        spec = BUILTIN_SPECS[cfg.spec](**kwargs)
    else:
        path = Path(cfg.spec)
        if not path.is_file():
            raise UsageError(f"unknown built-in spec {cfg.spec!r} and no such file")
        base = SynthSpec.from_json(path)
        spec = SynthSpec(base.marginals, base.coupling, cfg.n or base.n_trips, cfg.seed,
                         base.segment_ids, cfg.gps_artifact or base.gps_artifact)
    series = synthesize(spec)
    buf = io.StringIO()
    write_trips(series, buf)
    summary = {"n": series.n, "s": series.s, "segment_ids": list(series.segment_ids),
               "seed": spec.seed, "coupling": spec.coupling.to_dict(),
               "pair_taus": pairwise_taus(series.times)}
    if cfg.out:
        try:
            Path(cfg.out).write_text(buf.getvalue(), encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot write {cfg.out}: {exc}") from None
        stream = sys.stdout
    else:
        sys.stdout.write(buf.getvalue())
        stream = sys.stderr
    if cfg.format == "json":
        stream.write(json.dumps(summary, indent=2) + "\n")
    else:
        stream.write(f"N={series.n} S={series.s} coupling={spec.coupling.to_dict()}\n")
        for t in summary["pair_taus"]:
            stream.write(f"  tau{tuple(t['pair'])} = {t['tau']:.3f}\n")
    return EXIT_OK


def cmd_fit_marginals(cfg: RunConfig) -> int:
    series = _load_series(cfg)
    fits = fit_marginals(series, cfg.k, cfg.seed)
    segs = []
    for sid, fit in fits.items():
        ks = ks_statistic(series.column(sid), lambda t, g=fit.params: gmm_cdf(g, t))
        segs.append({"segment_id": sid, "gmm": fit.params.to_dict(), "ks": ks,
                     "log_likelihood": fit.log_likelihood, "iterations": fit.iterations,
                     "converged": fit.converged})
    doc = {"k": cfg.k, "seed": cfg.seed, "n_trips": series.n,
           "n_discarded": series.n_discarded, "segments": segs}
    if cfg.out:
        Path(cfg.out).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    rows = [(s["segment_id"], j + 1, f"{m:.3f}", f"{sd:.3f}", f"{w:.3f}", f"{s['ks']:.4f}")
            for s in segs for j, (m, sd, w) in enumerate(zip(s["gmm"]["means"], s["gmm"]["sigmas"],
                                                               s["gmm"]["weights"]))]
    cols = ("segment", "component", "mean", "sigma", "weight", "ks")
    if cfg.format == "json":
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    elif cfg.format == "csv":
        sys.stdout.write(_csv_text(rows, cols))
    else:
        sys.stdout.write(_table(rows, cols))
    return EXIT_OK


def _comparison(cfg: RunConfig, series, include_convolution=True):
    cmp_ = compare_path_models(series, cfg.families, k=cfg.k, m=cfg.m, seed=cfg.seed,
                               pseudo_mode=cfg.pseudo,
                               marginal_fits=_load_marginals(cfg, series),
                               include_convolution=include_convolution)
    if cfg.families and not cmp_.copula_fits:
        raise FitFailure("every copula fit failed: " + "; ".join(
            f"{k}: {v}" for k, v in cmp_.failures.items()))
    for fam, msg in cmp_.failures.items():
        sys.stderr.write(f"warning: {fam} fit failed: {msg}\n")
    return cmp_


def _gof_rows(reports):
    return [(r.model, f"{r.ks:.4f}", f"{r.cvm:.6f}", _fmt_params(r.parameters)) for r in reports]


def cmd_fit_copula(cfg: RunConfig) -> int:
    series = _load_series(cfg)
    cmp_ = _comparison(cfg, series, include_convolution=False)
    order = {r.model: r for r in cmp_.reports}
    fits = []
    for fam, fit in cmp_.copula_fits.items():
        rep = order[model_label(fam, series.s)]
        entry = fit.to_dict()
        entry.update(model=rep.model, ks=rep.ks, cvm=rep.cvm)
        fits.append(entry)
    fits.sort(key=lambda e: e["cvm"])
    doc = {"segments": list(series.segment_ids), "pseudo": cfg.pseudo, "n_trips": series.n,
           "pair_taus": pairwise_taus(series.times), "fits": fits,
           "failures": cmp_.failures}
    if cfg.out:
        Path(cfg.out).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    rows = [(e["model"], f"{e['ks']:.4f}", f"{e['cvm']:.6f}",
             _fmt_params({k: e[k] for k in ("alpha", "rho", "nu") if k in e}),
             f"{e['log_likelihood']:.2f}", e["converged"]) for e in fits]
    cols = ("Model", "KS", "CVM", "Parameter", "LogLik", "Converged")
    if cfg.format == "json":
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    elif cfg.format == "csv":
        sys.stdout.write(_csv_text(rows, cols))
    else:
        sys.stdout.write(_table(rows, cols))
    return EXIT_OK


def cmd_estimate_path(cfg: RunConfig) -> int:
    series = _load_series(cfg)
    cmp_ = _comparison(cfg, series)
    reports = cmp_.sorted_reports()
    if cfg.out:
        outdir = Path(cfg.out)
        outdir.mkdir(parents=True, exist_ok=True)
        cmp_.empirical.write_csv(outdir / "path_empirical.csv")
        for name, est in cmp_.estimates.items():
            est.write_csv(outdir / f"path_{name}.csv")
        summaries = [cmp_.empirical.summary()] + [e.summary() for e in cmp_.estimates.values()]
        (outdir / "summary.json").write_text(json.dumps(summaries, indent=2) + "\n",
                                             encoding="utf-8")
        (outdir / "gof.json").write_text(
            json.dumps([r.to_dict() for r in reports], indent=2) + "\n", encoding="utf-8")
    cols = ("Model", "KS", "CVM", "Parameter")
    if cfg.format == "json":
        sys.stdout.write(json.dumps([r.to_dict() for r in reports], indent=2) + "\n")
    elif cfg.format == "csv":
        sys.stdout.write(_csv_text(_gof_rows(reports), cols))
    else:
        sys.stdout.write(_table(_gof_rows(reports), cols))
    return EXIT_OK


def _read_samples(path: str, cfg: RunConfig, method: str):
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().strip()
    if tuple(h.strip() for h in first.split(",")) == HEADER:
        records = load_trips(path)
        ids = cfg.segments or sorted({r.segment_id for r in records})
        return empirical_path(assemble_series(records, ids))
    try:
        return read_path_csv(path, method)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_gof(cfg: RunConfig) -> int:
    if not cfg.reference or not cfg.model:
        raise UsageError("--reference and --model are required")
    ref = _read_samples(cfg.reference, cfg, "empirical")
    model = _read_samples(cfg.model, cfg, "model")
    report = gof_report(ref, model, cfg.label)
    text = json.dumps(report.to_dict(), indent=2) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    if cfg.format == "csv":
        sys.stdout.write(_csv_text(_gof_rows([report]), ("Model", "KS", "CVM", "Parameter")))
    elif cfg.format == "table":
        sys.stdout.write(_table(_gof_rows([report]), ("Model", "KS", "CVM", "Parameter")))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    series = _load_series(cfg)
    if series.s < 2:
        raise UsageError("sweep needs at least two segments")
    rows = sweep(series, tuple(cfg.families), k=cfg.k, m=cfg.m, seed=cfg.seed,
                 pseudo_mode=cfg.pseudo)
    cols = ("segment_count", "model", "ks", "cvm")
    text = _csv_text([tuple(r[c] for c in cols) for r in rows], cols)
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    if cfg.format == "json":
        sys.stdout.write(json.dumps(rows, indent=2) + "\n")
    elif cfg.format == "table":
        sys.stdout.write(_table([(r["segment_count"], r["model"], f"{r['ks']:.4f}",
                                  f"{r['cvm']:.6f}") for r in rows], cols))
    elif not cfg.out:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {
    "synth": cmd_synth,
    "fit-marginals": cmd_fit_marginals,
    "fit-copula": cmd_fit_copula,
    "estimate-path": cmd_estimate_path,
    "gof": cmd_gof,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        sys.stderr.write(f"ttdcopula {args.command}: error: {exc}\n")
        return EXIT_USAGE
    except (OSError, TripDataError) as exc:
        sys.stderr.write(f"ttdcopula {args.command}: error: {exc}\n")
        return EXIT_USAGE
    except (FitFailure, ValueError, ArithmeticError) as exc:
        # input problems were caught above; what is left comes from estimation
        sys.stderr.write(f"ttdcopula {args.command}: fit failed: {exc}\n")
        return EXIT_FIT


if __name__ == "__main__":
    sys.exit(main())
