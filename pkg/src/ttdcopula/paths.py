"""Path travel-time distributions: copula Monte-Carlo, convolution, empirical."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .copulas import CopulaModel, copula_sample
from .marginals import GmmParams
from .tripdata import positive_quantile

MIN_DRAWS = 1000
SUMMARY_QUANTILES = tuple(round(q, 2) for q in np.arange(0.05, 0.951, 0.05))


@dataclass(frozen=True)
class PathTtdEstimate:
    samples: np.ndarray
    method: str
    model: CopulaModel | None = None
    marginals: tuple[GmmParams, ...] | None = None

    def __post_init__(self):
        x = np.array(self.samples, dtype=float).ravel()
        if x.size == 0:
            raise ValueError("an estimate needs at least one sample")
        if not np.all(np.isfinite(x) & (x > 0)):
            raise ValueError("path travel times must be finite and positive")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)

    @property
    def sample_count(self) -> int:
        return self.samples.size

    def mean(self) -> float:
        return float(self.samples.mean())

    def variance(self) -> float:
        return float(self.samples.var(ddof=1)) if self.sample_count > 1 else 0.0

    def cdf(self, t):
        return estimate_cdf(self, t)

    def summary(self) -> dict:
        qs = np.quantile(self.samples, SUMMARY_QUANTILES)
        out = {
            "method": self.method,
            "sample_count": self.sample_count,
            "mean": self.mean(),
            "variance": self.variance(),
            "quantiles": {f"{q:.2f}": float(v) for q, v in zip(SUMMARY_QUANTILES, qs)},
        }
        if self.model is not None:
            out["model"] = self.model.to_dict()
        if self.marginals is not None:
            out["marginals"] = [g.to_dict() for g in self.marginals]
        return out

    def write_csv(self, dest) -> None:
        buf = io.StringIO(newline="")
        buf.write("travel_time_s\n")
        buf.writelines(f"{v!r}\n" for v in self.samples.tolist())
        if isinstance(dest, (str, Path)):
            Path(dest).write_text(buf.getvalue(), encoding="utf-8")
        else:
            dest.write(buf.getvalue())

    def write_summary(self, dest) -> None:
        Path(dest).write_text(json.dumps(self.summary(), indent=2) + "\n", encoding="utf-8")


def read_path_csv(source, method: str = "file") -> PathTtdEstimate:
    with open(source, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["travel_time_s"]:
            raise ValueError(f"{source}: expected header 'travel_time_s'")
        values = [float(row[0]) for row in reader if row]
    return PathTtdEstimate(np.array(values), method)


def _sum_quantiles(marginals, u):
    total = np.zeros(u.shape[0])
    for i, g in enumerate(marginals):
        total += positive_quantile(g, u[:, i])
    return total


def _check_draws(m):
    if m < MIN_DRAWS:
        raise ValueError(f"model-based estimates need m >= {MIN_DRAWS}, got {m}")


def estimate_copula_path(marginals, model: CopulaModel, m: int = 100_000,
                         seed=0) -> PathTtdEstimate:
    """Sum of segment times with joint dependence given by ``model``.

    Draws ``m`` copula vectors, maps coordinate i through marginal i's
    quantile (restricted to positive times) and sums each draw.
    """
    marginals = tuple(marginals)
    if model.dim != len(marginals):
        raise ValueError(f"copula dimension {model.dim} != {len(marginals)} marginals")
    _check_draws(m)
    u = copula_sample(model, m, seed)
    return PathTtdEstimate(_sum_quantiles(marginals, u), f"copula:{model.family}", model,
                           marginals)


def estimate_convolution_path(marginals, m: int = 100_000, seed=0) -> PathTtdEstimate:
    """Independence baseline: each segment sampled on its own, then summed."""
    marginals = tuple(marginals)
    if not marginals:
        raise ValueError("at least one marginal is required")
    _check_draws(m)
    rng = np.random.default_rng(seed)
    total = np.zeros(m)
    for g in marginals:
        total += positive_quantile(g, rng.random(m))
    return PathTtdEstimate(total, "convolution", None, marginals)


def empirical_path(series) -> PathTtdEstimate:
    times = np.asarray(getattr(series, "times", series), dtype=float)
    return PathTtdEstimate(np.atleast_2d(times).sum(axis=1), "empirical")


def estimate_cdf(estimate, t):
    """Right-continuous empirical CDF of the estimate's samples."""
    x = np.sort(np.asarray(getattr(estimate, "samples", estimate), dtype=float))
    if x.size == 0:
        raise ValueError("empty sample set")
    t = np.asarray(t, dtype=float)
    out = np.searchsorted(x, t, side="right") / x.size
    return float(out) if out.ndim == 0 else out
