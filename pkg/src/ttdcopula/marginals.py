"""Finite Gaussian mixtures for per-segment travel-time distributions.

A mixture is stored with standard deviations ``sigmas``; if a source quotes
inverse variances ``s_j`` instead, convert with ``sigma_j = s_j ** -0.5``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special

SIGMA_FLOOR = 1e-3
WEIGHT_TOL = 1e-9
_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass(frozen=True)
class GmmParams:
    """k-component Gaussian mixture, components sorted by mean."""

    means: tuple[float, ...]
    sigmas: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        means = tuple(float(m) for m in self.means)
        sigmas = tuple(float(s) for s in self.sigmas)
        weights = tuple(float(w) for w in self.weights)
        if not (len(means) == len(sigmas) == len(weights)) or not means:
            raise ValueError("means, sigmas and weights must have the same non-zero length")
        if not all(np.isfinite(means)):
            raise ValueError("means must be finite")
        if not all(s > 0 and np.isfinite(s) for s in sigmas):
            raise ValueError("sigmas must be positive")
        if not all(0 < w <= 1 for w in weights):
            raise ValueError("weights must lie in (0, 1]")
        if abs(sum(weights) - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights sum to {sum(weights)!r}, expected 1")
        order = sorted(range(len(means)), key=lambda j: means[j])
        object.__setattr__(self, "means", tuple(means[j] for j in order))
        object.__setattr__(self, "sigmas", tuple(sigmas[j] for j in order))
        object.__setattr__(self, "weights", tuple(weights[j] for j in order))

    @classmethod
    def normalized(cls, means, sigmas, weights) -> "GmmParams":
        """Build a mixture after rescaling ``weights`` to sum to one.

        Useful for tabulated parameters whose rounded weights do not add up.
        """
        w = np.asarray(weights, dtype=float)
        return cls(tuple(means), tuple(sigmas), tuple(w / w.sum()))

    @property
    def k(self) -> int:
        return len(self.means)

    def mean(self) -> float:
        return float(np.dot(self.weights, self.means))

    def variance(self) -> float:
        mu = np.asarray(self.means)
        second = np.dot(self.weights, np.asarray(self.sigmas) ** 2 + mu**2)
        return float(second - self.mean() ** 2)

    def support_bracket(self, width: float = 12.0) -> tuple[float, float]:
        smax = max(self.sigmas)
        return min(self.means) - width * smax, max(self.means) + width * smax

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "means": list(self.means),
            "sigmas": list(self.sigmas),
            "weights": list(self.weights),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GmmParams":
        params = cls(d["means"], d["sigmas"], d["weights"])
        if "k" in d and int(d["k"]) != params.k:
            raise ValueError(f"k={d['k']} does not match {params.k} components")
        return params


@dataclass
class GmmFit:
    params: GmmParams
    log_likelihood: float
    iterations: int
    converged: bool
    history: list[float] = field(default_factory=list, repr=False)


def _arrays(params: GmmParams):
    return (np.asarray(params.means), np.asarray(params.sigmas), np.asarray(params.weights))


def gmm_pdf(params: GmmParams, x):
    mu, sd, w = _arrays(params)
    x = np.asarray(x, dtype=float)
    z = (x[..., None] - mu) / sd
    dens = np.exp(-0.5 * z**2) / (sd * np.sqrt(2.0 * np.pi))
    return (dens * w).sum(axis=-1)


def gmm_logpdf(params: GmmParams, x):
    mu, sd, w = _arrays(params)
    x = np.asarray(x, dtype=float)
    z = (x[..., None] - mu) / sd
    return special.logsumexp(-0.5 * z**2 - np.log(sd) - _LOG_SQRT_2PI, b=w, axis=-1)


def gmm_cdf(params: GmmParams, x):
    mu, sd, w = _arrays(params)
    x = np.asarray(x, dtype=float)
    return (special.ndtr((x[..., None] - mu) / sd) * w).sum(axis=-1)


def gmm_quantile(params: GmmParams, p, *, grid_size: int = 4097, max_iter: int = 100,
                 ptol: float = 1e-13):
    """Invert the mixture CDF inside a shrinking bracket.

    A CDF table over the 12-sigma support gives every ``p`` a starting
    bracket and an interpolated first guess.  Each step takes the Newton
    update when it lands inside the bracket and bisects otherwise, then
    shrinks the bracket around the new point.
    """
    p = np.asarray(p, dtype=float)
    if np.any(~(p > 0) | ~(p < 1)):
        raise ValueError("quantile probabilities must lie strictly inside (0, 1)")
    lo_x, hi_x = params.support_bracket()
    grid = np.linspace(lo_x, hi_x, grid_size)
    table = gmm_cdf(params, grid)
    idx = np.clip(np.searchsorted(table, p, side="left"), 1, grid_size - 1)
    lo = grid[idx - 1]
    hi = grid[idx]
    span = table[idx] - table[idx - 1]
    frac = np.where(span > 0, (p - table[idx - 1]) / np.where(span > 0, span, 1.0), 0.5)
    x = lo + np.clip(frac, 0.0, 1.0) * (hi - lo)
    x, lo, hi, pp = np.atleast_1d(x), np.atleast_1d(lo), np.atleast_1d(hi), np.atleast_1d(p)
    active = np.arange(x.size)
    for _ in range(max_iter):
        xa = x[active]
        err = gmm_cdf(params, xa) - pp[active]
        open_ = np.abs(err) > ptol
        active, xa, err = active[open_], xa[open_], err[open_]
        if active.size == 0:
            break
        la = np.where(err < 0, xa, lo[active])
        ha = np.where(err > 0, xa, hi[active])
        with np.errstate(divide="ignore", invalid="ignore"):
            step = xa - err / gmm_pdf(params, xa)
        inside = np.isfinite(step) & (step >= la) & (step <= ha)
        nxt = np.where(inside, step, 0.5 * (la + ha))
        moved = nxt != xa
        lo[active], hi[active], x[active] = la, ha, nxt
        active = active[moved]
    return x if np.ndim(p) else float(x[0])


def gmm_sample(params: GmmParams, n: int, seed) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    mu, sd, w = _arrays(params)
    comp = rng.choice(params.k, size=n, p=w)
    return mu[comp] + sd[comp] * rng.standard_normal(n)


def _kmeanspp_centers(x, k, rng):
    centers = [x[rng.integers(x.size)]]
    for _ in range(1, k):
        d2 = np.min((x[:, None] - np.asarray(centers)) ** 2, axis=1)
        total = d2.sum()
        if total <= 0:
            centers.append(x[rng.integers(x.size)])
        else:
            centers.append(x[rng.choice(x.size, p=d2 / total)])
    return np.sort(np.asarray(centers))


def _init_from_centers(x, centers, sigma_floor):
    k = centers.size
    label = np.argmin(np.abs(x[:, None] - centers), axis=1)
    overall = max(x.std(), sigma_floor)
    mu = np.empty(k)
    sd = np.empty(k)
    w = np.empty(k)
    for j in range(k):
        members = x[label == j]
        if members.size >= 2:
            mu[j] = members.mean()
            sd[j] = max(members.std(), sigma_floor)
            w[j] = members.size
        else:
            mu[j] = centers[j]
            sd[j] = overall
            w[j] = 1.0
    return mu, sd, w / w.sum()


def _em(x, mu, sd, w, max_iter, tol, sigma_floor):
    n = x.size

    def loglik_and_resp(mu, sd, w):
        z = (x[:, None] - mu) / sd
        logp = -0.5 * z**2 - np.log(sd) - _LOG_SQRT_2PI + np.log(w)
        top = logp.max(axis=1, keepdims=True)
        dens = np.exp(logp - top)
        tot = dens.sum(axis=1, keepdims=True)
        return float(np.sum(np.log(tot) + top)), dens / tot

    ll, resp = loglik_and_resp(mu, sd, w)
    history = [ll]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        nk = resp.sum(axis=0)
        # a component that lost all responsibility is re-seeded at the data mean
        dead = nk < 1e-10
        nk = np.where(dead, 1e-10, nk)
        mu = np.where(dead, x.mean(), resp.T @ x / nk)
        var = np.einsum("ij,ij->j", resp, (x[:, None] - mu) ** 2) / nk
        sd = np.maximum(np.sqrt(np.where(dead, x.var(), var)), sigma_floor)
        w = nk / n
        w = w / w.sum()
        ll, resp = loglik_and_resp(mu, sd, w)
        history.append(ll)
        if abs(ll - history[-2]) < tol:
            converged = True
            break
    return mu, sd, w, ll, it, converged, history


def fit_gmm(samples, k: int = 3, seed=0, *, n_restarts: int = 5, max_iter: int = 500,
            tol: float = 1e-8, sigma_floor: float = SIGMA_FLOOR) -> GmmFit:
    """Maximum-likelihood mixture fit by EM with k-means++ seeding.

    Parameters
    ----------
    samples : array_like
        One-dimensional observations, at least ``10 * k`` of them.
    k : int
        Number of components.
    seed : int
        Seed for the restart initialisations.
    n_restarts : int
        Independent initialisations; the highest final log-likelihood wins.

    Returns
    -------
    GmmFit
        Mean-sorted parameters plus the log-likelihood trace of the winning run.
        ``converged`` is False when ``max_iter`` was exhausted.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if k < 1:
        raise ValueError("k must be >= 1")
    if x.size < 10 * k:
        raise ValueError(f"need at least {10 * k} samples for k={k}, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite")
    if np.ptp(x) == 0:
        raise ValueError("degenerate input: all samples are identical")

    rng = np.random.default_rng(seed)
    best = None
    for _ in range(max(1, n_restarts)):
        centers = _kmeanspp_centers(x, k, rng)
        mu, sd, w = _init_from_centers(x, centers, sigma_floor)
        result = _em(x, mu, sd, w, max_iter, tol, sigma_floor)
        if best is None or result[3] > best[3]:
            best = result
        if k == 1:
            break
    mu, sd, w, ll, it, converged, history = best
    params = GmmParams(tuple(mu), tuple(sd), tuple(w / w.sum()))
    return GmmFit(params, float(ll), it, converged, history)
