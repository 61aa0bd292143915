"""Kolmogorov-Smirnov and Cramer-von-Mises distances between CDFs.

Both are distances, lower meaning closer agreement; no p-values.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GofReport:
    model: str
    ks: float
    cvm: float
    n_reference: int
    n_model: int | None = None
    parameters: dict | None = None

    def to_dict(self) -> dict:
        out = {"model": self.model, "ks": self.ks, "cvm": self.cvm,
               "n_reference": self.n_reference, "n_model": self.n_model}
        if self.parameters:
            out["parameters"] = self.parameters
        return out


def _sorted_reference(reference):
    x = np.sort(np.asarray(getattr(reference, "samples", reference), dtype=float).ravel())
    if x.size == 0:
        raise ValueError("reference sample is empty")
    return x


def _model_samples(model):
    if callable(model):
        return None
    y = np.sort(np.asarray(getattr(model, "samples", model), dtype=float).ravel())
    if y.size == 0:
        raise ValueError("model sample is empty")
    return y


def _as_cdf(model):
    if callable(model):
        return model
    y = _model_samples(model)
    return lambda t: np.searchsorted(y, t, side="right") / y.size


def ks_statistic(reference, model) -> float:
    """Largest vertical gap between the reference ECDF and the model CDF.

    ``model`` is either a sample set (two-sample statistic over the jump
    points of both ECDFs) or a callable CDF (gap checked on both sides of
    every reference jump).
    """
    x = _sorted_reference(reference)
    n = x.size
    y = _model_samples(model)
    if y is None:
        f = np.asarray(model(x), dtype=float)
        i = np.arange(1, n + 1)
        return float(max(np.max(i / n - f), np.max(f - (i - 1) / n), 0.0))
    pts = np.concatenate([x, y])
    fx = np.searchsorted(x, pts, side="right") / n
    fy = np.searchsorted(y, pts, side="right") / y.size
    return float(np.max(np.abs(fx - fy)))


def cvm_statistic(reference, model) -> float:
    """Mean squared gap ``(1/N) sum ((i - 0.5)/N - F(x_(i)))^2`` over sorted reference points."""
    x = _sorted_reference(reference)
    n = x.size
    f = np.asarray(_as_cdf(model)(x), dtype=float)
    gap = (np.arange(1, n + 1) - 0.5) / n - f
    return float(np.mean(gap**2))


def gof_report(reference, model, label: str, parameters: dict | None = None) -> GofReport:
    y = _model_samples(model)
    return GofReport(label, ks_statistic(reference, model), cvm_statistic(reference, model),
                     _sorted_reference(reference).size, None if y is None else y.size,
                     parameters)
