"""Two-stage estimation workflows shared by the CLI and the experiment scripts."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .copulas import FAMILIES, CopulaModel, FitResult, fit_copula
from .dependence import to_pseudo_obs
from .gof import GofReport, gof_report
from .marginals import GmmFit, fit_gmm
from .paths import PathTtdEstimate, empirical_path, estimate_convolution_path, estimate_copula_path

_LABELS = {"gaussian": "Gaussian", "student_t": "Student-t", "clayton": "Clayton",
           "gumbel": "Gumbel", "convolution": "Convolution"}
_STAGES = {"marginal": 1, "copula-path": 2, "convolution-path": 3}
_FAMILY_KEYS = {name: i for i, name in enumerate(FAMILIES + ("independence",))}


def derive_seed(seed: int, *keys: int) -> int:
    """Child seed for a pipeline stage; stable across runs and execution order."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def model_label(kind: str, dim: int) -> str:
    return f"{dim}D {_LABELS[kind]}"


def fit_marginals(series, k: int = 3, seed: int = 42, n_restarts: int = 5) -> dict[int, GmmFit]:
    return {sid: fit_gmm(series.column(sid), k, derive_seed(seed, _STAGES["marginal"], sid),
                         n_restarts=n_restarts)
            for sid in series.segment_ids}


@dataclass
class PathComparison:
    segment_ids: tuple[int, ...]
    empirical: PathTtdEstimate
    marginal_fits: dict[int, GmmFit]
    copula_fits: dict[str, FitResult] = field(default_factory=dict)
    failures: dict[str, str] = field(default_factory=dict)
    estimates: dict[str, PathTtdEstimate] = field(default_factory=dict)
    reports: list[GofReport] = field(default_factory=list)

    def report(self, kind: str) -> GofReport:
        label = model_label(kind, len(self.segment_ids))
        return next(r for r in self.reports if r.model == label)

    def sorted_reports(self) -> list[GofReport]:
        return sorted(self.reports, key=lambda r: r.cvm)


def compare_path_models(series, families=FAMILIES, *, k: int = 3, m: int = 100_000,
                        seed: int = 42, pseudo_mode: str = "empirical",
                        marginal_fits: dict[int, GmmFit] | None = None,
                        include_convolution: bool = True) -> PathComparison:
    """Fit marginals and copulas on ``series`` and score path estimates.

    Every model-based path distribution is compared with the empirical
    distribution of the per-drive sums.  A family whose fit raises is
    recorded in ``failures`` and skipped.
    """
    ids = series.segment_ids
    d = len(ids)
    if marginal_fits is None:
        marginal_fits = fit_marginals(series, k, seed)
    margs = tuple(marginal_fits[s].params for s in ids)
    emp = empirical_path(series)
    out = PathComparison(ids, emp, marginal_fits)

    if include_convolution:
        conv = estimate_convolution_path(margs, m, derive_seed(seed, _STAGES["convolution-path"], d))
        out.estimates["convolution"] = conv
        out.reports.append(gof_report(emp, conv, model_label("convolution", d)))

    if families:
        pseudo = to_pseudo_obs(series, pseudo_mode, margs if pseudo_mode == "parametric" else None)
    for fam in families:
        try:
            fit = fit_copula(fam, pseudo)
        except (ValueError, FloatingPointError, ArithmeticError) as exc:
            out.failures[fam] = str(exc)
            continue
        out.copula_fits[fam] = fit
        est = estimate_copula_path(margs, fit.model, m,
                                   derive_seed(seed, _STAGES["copula-path"], d, _FAMILY_KEYS[fam]))
        out.estimates[fam] = est
        params = {k_: v for k_, v in fit.model.to_dict().items() if k_ not in ("family", "dim")}
        out.reports.append(gof_report(emp, est, model_label(fam, d), params))
    return out


def sweep(series, families=("clayton",), *, k: int = 3, m: int = 100_000, seed: int = 42,
          pseudo_mode: str = "empirical", min_len: int = 2) -> list[dict]:
    """Score convolution and copula path estimates on growing segment prefixes.

    Marginals are fitted once per segment and reused for every prefix; each
    prefix gets its own copula fit.
    """
    marginal_fits = fit_marginals(series, k, seed)
    rows = []
    for length in range(min_len, series.s + 1):
        prefix = series.select(series.segment_ids[:length])
        cmp_ = compare_path_models(prefix, families, k=k, m=m, seed=seed,
                                   pseudo_mode=pseudo_mode, marginal_fits=marginal_fits)
        for kind in ("convolution",) + tuple(families):
            if kind in cmp_.failures:
                continue
            r = cmp_.report(kind)
            rows.append({"segment_count": length, "model": kind, "ks": r.ks, "cvm": r.cvm})
    return rows
