"""Rank dependence: Kendall's tau, pseudo-observations, tau/parameter maps."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy import stats

from .marginals import GmmParams, gmm_cdf

FAMILIES = ("gaussian", "student_t", "clayton", "gumbel")


@dataclass(frozen=True)
class PseudoObservations:
    values: np.ndarray
    source: str = "empirical-rank"

    def __post_init__(self):
        u = np.asarray(self.values, dtype=float)
        if u.ndim != 2:
            raise ValueError("pseudo-observations must be an N x S matrix")
        if not np.all((u > 0) & (u < 1)):
            raise ValueError("pseudo-observations must lie strictly inside (0, 1)")
        if self.source not in ("empirical-rank", "parametric-marginal"):
            raise ValueError(f"unknown pseudo-observation source {self.source!r}")
        u = u.copy()
        u.setflags(write=False)
        object.__setattr__(self, "values", u)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


def kendall_tau(x, y) -> float:
    """Tie-corrected Kendall tau-b."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be one-dimensional and of equal length")
    if x.size < 2:
        raise ValueError("need at least two observations")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise ValueError("Kendall tau is undefined for a constant input")
    return float(stats.kendalltau(x, y, variant="b").statistic)


def pairwise_taus(values, pairs=None) -> list[dict]:
    """Kendall tau per column pair; adjacent pairs by default.

    ``pairs`` holds zero-based column indices; the emitted ``pair`` is the
    same index pair shifted to one-based, matching segment numbering.
    """
    m = np.asarray(values, dtype=float)
    if pairs is None:
        pairs = [(i, i + 1) for i in range(m.shape[1] - 1)]
    return [{"pair": [i + 1, j + 1], "tau": kendall_tau(m[:, i], m[:, j])} for i, j in pairs]


def mean_pairwise_tau(values) -> float:
    m = np.asarray(values, dtype=float)
    pairs = combinations(range(m.shape[1]), 2)
    return float(np.mean([kendall_tau(m[:, i], m[:, j]) for i, j in pairs]))


def to_pseudo_obs(series, mode: str = "empirical", marginals=None) -> PseudoObservations:
    """Map travel times to the unit cube.

    ``mode="empirical"`` uses average ranks over N + 1; ``mode="parametric"``
    pushes each column through its fitted mixture CDF (``marginals`` must then
    hold one :class:`GmmParams` per column) and clamps to
    ``[1/(2N), 1 - 1/(2N)]``.
    """
    x = np.asarray(getattr(series, "times", series), dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("need an N x S matrix with N >= 2")
    n = x.shape[0]
    if mode == "empirical":
        ranks = stats.rankdata(x, method="average", axis=0)
        return PseudoObservations(ranks / (n + 1), "empirical-rank")
    if mode == "parametric":
        if marginals is None or len(marginals) != x.shape[1]:
            raise ValueError("parametric mode needs one fitted marginal per column")
        u = np.column_stack([gmm_cdf(g, x[:, i]) for i, g in enumerate(marginals)])
        eps = 1.0 / (2 * n)
        return PseudoObservations(np.clip(u, eps, 1 - eps), "parametric-marginal")
    raise ValueError(f"unknown pseudo-observation mode {mode!r}")


def tau_to_param(family: str, tau: float) -> float:
    if family == "clayton":
        if not 0 < tau < 1:
            raise ValueError("Clayton requires tau in (0, 1)")
        return 2 * tau / (1 - tau)
    if family == "gumbel":
        if not 0 <= tau < 1:
            raise ValueError("Gumbel requires tau in [0, 1)")
        return 1 / (1 - tau)
    if family in ("gaussian", "student_t"):
        if not -1 < tau < 1:
            raise ValueError("elliptical families require tau in (-1, 1)")
        return float(np.sin(np.pi * tau / 2))
    raise ValueError(f"unknown copula family {family!r}")


def param_to_tau(family: str, param: float) -> float:
    if family == "clayton":
        return param / (param + 2)
    if family == "gumbel":
        return 1 - 1 / param
    if family in ("gaussian", "student_t"):
        return float(2 / np.pi * np.arcsin(param))
    raise ValueError(f"unknown copula family {family!r}")
