"""Gaussian, Student-t, Clayton and Gumbel copulas in any dimension.

Elliptical families use the exchangeable correlation matrix
``R = (1 - rho) I + rho 11'``.  Archimedean families use the standard
parameterisations

    Clayton  C(u) = (sum u_i^-alpha - d + 1)^(-1/alpha),   alpha > 0
    Gumbel   C(u) = exp(-(sum (-ln u_i)^alpha)^(1/alpha)), alpha >= 1
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize, special, stats

from .dependence import PseudoObservations, mean_pairwise_tau, tau_to_param

FAMILIES = ("gaussian", "student_t", "clayton", "gumbel")
ALL_FAMILIES = FAMILIES + ("independence",)

CLAYTON_BOUNDS = (1e-6, 60.0)
GUMBEL_BOUNDS = (1.0, 60.0)
NU_BOUNDS = (2.05, 50.0)
PARAM_XTOL = 1e-6
MAX_SEARCH_ITER = 200
CLAMP = 1e-10

_TINY = np.finfo(float).tiny
_ONE_MINUS = np.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class CopulaModel:
    family: str
    dim: int = 2
    alpha: float | None = None
    rho: float | None = None
    nu: float | None = None

    def __post_init__(self):
        fam = self.family
        if fam not in ALL_FAMILIES:
            raise ValueError(f"unknown copula family {fam!r}")
        if int(self.dim) != self.dim or self.dim < 2:
            raise ValueError("copula dimension must be an integer >= 2")
        object.__setattr__(self, "dim", int(self.dim))
        wanted = {
            "independence": set(),
            "clayton": {"alpha"},
            "gumbel": {"alpha"},
            "gaussian": {"rho"},
            "student_t": {"rho", "nu"},
        }[fam]
        given = {name for name in ("alpha", "rho", "nu") if getattr(self, name) is not None}
        if given != wanted:
            raise ValueError(f"{fam} copula takes parameters {sorted(wanted)}, got {sorted(given)}")
        for name in given:
            object.__setattr__(self, name, float(getattr(self, name)))
        if fam == "clayton" and not self.alpha > 0:
            raise ValueError("Clayton alpha must be > 0")
        if fam == "gumbel" and not self.alpha >= 1:
            raise ValueError("Gumbel alpha must be >= 1")
        if "rho" in wanted and not -1.0 / (self.dim - 1) < self.rho < 1:
            raise ValueError(f"rho must lie in (-1/(d-1), 1) for d={self.dim}")
        if fam == "student_t" and not self.nu > 0:
            raise ValueError("degrees of freedom must be positive")

    def with_dim(self, dim: int) -> "CopulaModel":
        return CopulaModel(self.family, dim, self.alpha, self.rho, self.nu)

    @property
    def label(self) -> str:
        return {"gaussian": "Gaussian", "student_t": "Student-t", "clayton": "Clayton",
                "gumbel": "Gumbel", "independence": "Independence"}[self.family]

    def to_dict(self) -> dict:
        d = {"family": self.family, "dim": self.dim}
        for name in ("alpha", "rho", "nu"):
            if getattr(self, name) is not None:
                d[name] = getattr(self, name)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CopulaModel":
        return cls(d["family"], int(d.get("dim", 2)), d.get("alpha"), d.get("rho"), d.get("nu"))


@dataclass(frozen=True)
class FitResult:
    model: CopulaModel
    log_likelihood: float
    iterations: int
    converged: bool
    start_log_likelihood: float = float("nan")

    def to_dict(self) -> dict:
        out = self.model.to_dict()
        out.update(log_likelihood=self.log_likelihood, iterations=self.iterations,
                   converged=self.converged)
        return out


def _as_points(model: CopulaModel, u, *, strict=True):
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    u = np.atleast_2d(u)
    if u.shape[1] != model.dim:
        raise ValueError(f"expected points of dimension {model.dim}, got {u.shape[1]}")
    if strict and not np.all((u > 0) & (u < 1)):
        raise ValueError("copula arguments must lie strictly inside (0, 1)")
    return u, single


def _exchangeable_terms(rho, d):
    """Log-determinant and inverse pieces of the exchangeable correlation."""
    lam1 = 1.0 - rho
    lam2 = 1.0 + (d - 1) * rho
    logdet = (d - 1) * np.log(lam1) + np.log(lam2)
    return logdet, lam1, lam2


def _quad_form(x, rho, lam1, lam2):
    s2 = np.einsum("ij,ij->i", x, x)
    s1 = x.sum(axis=1)
    return (s2 - rho / lam2 * s1**2) / lam1


def exchangeable_corr(rho: float, d: int) -> np.ndarray:
    return (1.0 - rho) * np.eye(d) + rho * np.ones((d, d))


def _gumbel_coeffs(d, a):
    """c[k] for (-1)^d psi^(d)(t) / psi(t) = sum_k c[k] t^(k a - d), psi = exp(-t^a).

    The recursion only adds non-negative terms when 0 < a <= 1.
    """
    c = np.zeros(d + 1)
    c[0] = 1.0
    for n in range(d):
        nxt = np.zeros(d + 1)
        k = np.arange(n + 1)
        nxt[1:n + 2] += a * c[:n + 1]
        nxt[:n + 1] += (n - k * a) * c[:n + 1]
        c = nxt
    return c


def _logpdf_rows(model: CopulaModel, u):
    d = model.dim
    fam = model.family
    if fam == "independence":
        return np.zeros(u.shape[0])
    if fam == "gaussian":
        rho = model.rho
        z = special.ndtri(u)
        logdet, lam1, lam2 = _exchangeable_terms(rho, d)
        q = _quad_form(z, rho, lam1, lam2)
        return -0.5 * logdet - 0.5 * (q - np.einsum("ij,ij->i", z, z))
    if fam == "student_t":
        rho, nu = model.rho, model.nu
        x = special.stdtrit(nu, u)
        return _t_logpdf_from_quantiles(x, rho, nu, d)
    if fam == "clayton":
        a = model.alpha
        logu = np.log(u)
        const = np.sum(np.log1p(a * np.arange(d)))
        # log(sum u_i^-a - d + 1), two numerically safe branches
        expo = -a * logu
        small = np.log1p(np.sum(np.expm1(np.minimum(expo, 700.0)), axis=1))
        lse = special.logsumexp(expo, axis=1)
        large = lse + np.log1p(-(d - 1) * np.exp(-lse))
        log_s = np.where(expo.max(axis=1) < 30.0, small, large)
        return const - (1 + a) * logu.sum(axis=1) - (1 / a + d) * log_s
    if fam == "gumbel":
        theta = model.alpha
        a = 1.0 / theta
        w = -np.log(u)
        logw = np.log(w)
        log_t = special.logsumexp(theta * logw, axis=1)
        coeffs = _gumbel_coeffs(d, a)
        k = np.flatnonzero(coeffs > 0)
        log_terms = np.log(coeffs[k]) + (k[None, :] * a - d) * log_t[:, None]
        log_g = special.logsumexp(log_terms, axis=1)
        log_psi = -np.exp(a * log_t)
        jac = np.sum(np.log(theta) + (theta - 1) * logw + w, axis=1)
        return log_psi + log_g + jac
    raise AssertionError(fam)


def _t_logpdf_from_quantiles(x, rho, nu, d):
    logdet, lam1, lam2 = _exchangeable_terms(rho, d)
    q = _quad_form(x, rho, lam1, lam2)
    const = (special.gammaln((nu + d) / 2) + (d - 1) * special.gammaln(nu / 2)
             - d * special.gammaln((nu + 1) / 2))
    return (const - 0.5 * logdet - (nu + d) / 2 * np.log1p(q / nu)
            + (nu + 1) / 2 * np.sum(np.log1p(x**2 / nu), axis=1))


def copula_logpdf(model: CopulaModel, u):
    pts, single = _as_points(model, u)
    out = _logpdf_rows(model, pts)
    return float(out[0]) if single else out


def copula_density(model: CopulaModel, u):
    """Copula density at a point (shape ``(d,)``) or rows of points (``(n, d)``)."""
    out = np.exp(copula_logpdf(model, u))
    return float(out) if np.ndim(out) == 0 else out


def log_likelihood(model: CopulaModel, u) -> float:
    pts = np.clip(np.atleast_2d(np.asarray(u, dtype=float)), CLAMP, 1 - CLAMP)
    return float(np.sum(_logpdf_rows(model, pts)))


def copula_cdf(model: CopulaModel, u, *, n_mc: int = 400_000, seed=0, return_stderr=False):
    """Evaluate C(u).

    Archimedean and independence copulas are closed form. Elliptical copulas
    use scipy's numerical integration in two dimensions and plain Monte-Carlo
    over :func:`copula_sample` above that; with ``return_stderr=True`` the
    result is ``(value, standard_error)`` (zero error for closed forms).
    """
    pts, single = _as_points(model, u, strict=False)
    if np.any((pts < 0) | (pts > 1)):
        raise ValueError("copula arguments must lie in [0, 1]")
    fam = model.family
    se = np.zeros(pts.shape[0])
    with np.errstate(divide="ignore"):
        if fam == "independence":
            val = pts.prod(axis=1)
        elif fam == "clayton":
            a = model.alpha
            s = np.sum(pts ** (-a), axis=1) - model.dim + 1
            val = np.where(pts.min(axis=1) > 0, s ** (-1 / a), 0.0)
        elif fam == "gumbel":
            t = np.sum((-np.log(pts)) ** model.alpha, axis=1)
            val = np.exp(-t ** (1 / model.alpha))
        elif model.dim == 2:
            val = _elliptical_cdf_2d(model, pts, seed)
        else:
            draws = copula_sample(model, n_mc, seed)
            val = np.empty(pts.shape[0])
            for i, row in enumerate(pts):
                hit = np.all(draws <= row, axis=1)
                val[i] = hit.mean()
                se[i] = hit.std(ddof=1) / np.sqrt(n_mc)
    val = np.clip(val, 0.0, 1.0)
    if single:
        return (float(val[0]), float(se[0])) if return_stderr else float(val[0])
    return (val, se) if return_stderr else val


def _elliptical_cdf_2d(model, pts, seed):
    corr = exchangeable_corr(model.rho, 2)
    out = np.empty(pts.shape[0])
    if model.family == "gaussian":
        dist = stats.multivariate_normal(mean=np.zeros(2), cov=corr)
        x = special.ndtri(pts)
    else:
        dist = stats.multivariate_t(loc=np.zeros(2), shape=corr, df=model.nu)
        x = special.stdtrit(model.nu, pts)
    for i, row in enumerate(x):
        if np.any(np.isneginf(row)):
            out[i] = 0.0
            continue
        row = np.minimum(row, 40.0)
        if model.family == "gaussian":
            out[i] = dist.cdf(row)
        else:
            out[i] = dist.cdf(row, random_state=np.random.default_rng(seed))
    return out


def copula_sample(model: CopulaModel, n: int, seed) -> np.ndarray:
    """Draw ``n`` points; columns are uniform on the open unit interval.

    Elliptical families go through a correlated normal vector (one-factor
    construction for rho >= 0, Cholesky otherwise), scaled by sqrt(nu/chi2)
    for Student-t.  Archimedean families use Marshall-Olkin frailties: gamma
    for Clayton, positive stable (Kanter's representation) for Gumbel.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    d = model.dim
    fam = model.family
    if fam == "independence":
        u = rng.random((n, d))
    elif fam in ("gaussian", "student_t"):
        rho = model.rho
        z = rng.standard_normal((n, d))
        if rho >= 0:
            z0 = rng.standard_normal((n, 1))
            x = np.sqrt(rho) * z0 + np.sqrt(1 - rho) * z
        else:
            x = z @ np.linalg.cholesky(exchangeable_corr(rho, d)).T
        if fam == "gaussian":
            u = special.ndtr(x)
        else:
            w = rng.chisquare(model.nu, size=(n, 1))
            u = special.stdtr(model.nu, x * np.sqrt(model.nu / w))
    elif fam == "clayton":
        a = model.alpha
        v = rng.gamma(1.0 / a, 1.0, size=(n, 1))
        e = rng.exponential(size=(n, d))
        u = np.exp(-np.log1p(e / v) / a)
    else:
        theta = model.alpha
        e = rng.exponential(size=(n, d))
        if theta == 1.0:
            u = np.exp(-e)
        else:
            s = _positive_stable(1.0 / theta, n, rng)[:, None]
            u = np.exp(-((e / s) ** (1.0 / theta)))
    return np.clip(u, _TINY, _ONE_MINUS)


def _positive_stable(a, n, rng):
    """Positive stable variates with Laplace transform exp(-t^a), 0 < a < 1."""
    theta = np.pi * rng.random(n)
    w = rng.exponential(size=n)
    return (np.sin(a * theta) / np.sin(theta) ** (1 / a)) * (
        np.sin((1 - a) * theta) / w) ** ((1 - a) / a)


def _bounded_search(fun, lo, hi):
    res = optimize.minimize_scalar(fun, bounds=(lo, hi), method="bounded",
                                   options={"xatol": PARAM_XTOL, "maxiter": MAX_SEARCH_ITER})
    return res


def _rho_bounds(d):
    return -1.0 / (d - 1) + 1e-6, 1.0 - 1e-6


def _start_param(family, tau, d):
    if family == "clayton":
        return float(np.clip(tau_to_param("clayton", tau) if tau > 0 else CLAYTON_BOUNDS[0],
                             *CLAYTON_BOUNDS))
    if family == "gumbel":
        return float(np.clip(tau_to_param("gumbel", max(tau, 0.0)), *GUMBEL_BOUNDS))
    return float(np.clip(tau_to_param(family, tau), *_rho_bounds(d)))


def fit_copula(family: str, pseudo) -> FitResult:
    """Maximum-likelihood fit of one family to pseudo-observations.

    One-parameter families use a bounded Brent search.  Student-t nests a
    bounded search over the correlation inside a bounded search over the
    degrees of freedom.  The tau-inversion estimate is kept whenever the
    search fails to beat it.
    """
    if family not in FAMILIES:
        raise ValueError(f"cannot fit family {family!r}")
    if isinstance(pseudo, PseudoObservations):
        u = np.asarray(pseudo.values)
    else:
        u = np.asarray(pseudo, dtype=float)
    if u.ndim != 2 or u.shape[1] < 2:
        raise ValueError("pseudo-observations must be an N x d matrix with d >= 2")
    if u.shape[0] < 10:
        raise ValueError("need at least 10 observations to fit a copula")
    if not np.all((u > 0) & (u < 1)):
        raise ValueError("pseudo-observations must lie strictly inside (0, 1)")
    u = np.clip(u, CLAMP, 1 - CLAMP)
    d = u.shape[1]
    tau = mean_pairwise_tau(u)
    start = _start_param(family, tau, d)

    if family in ("clayton", "gumbel"):
        def negll(a):
            return -log_likelihood(CopulaModel(family, d, alpha=a), u)
        bounds = CLAYTON_BOUNDS if family == "clayton" else GUMBEL_BOUNDS
        res = _bounded_search(negll, *bounds)
        candidates = [(res.x, -res.fun), (start, -negll(start))]
        best, ll = max(candidates, key=lambda c: c[1])
        return FitResult(CopulaModel(family, d, alpha=best), ll, int(res.nit), bool(res.success),
                         candidates[1][1])

    if family == "gaussian":
        z = special.ndtri(u)
        zz = np.einsum("ij,ij->i", z, z)

        def negll(r):
            logdet, lam1, lam2 = _exchangeable_terms(r, d)
            return -float(np.sum(-0.5 * logdet - 0.5 * (_quad_form(z, r, lam1, lam2) - zz)))
        res = _bounded_search(negll, *_rho_bounds(d))
        candidates = [(res.x, -res.fun), (start, -negll(start))]
        best, ll = max(candidates, key=lambda c: c[1])
        return FitResult(CopulaModel("gaussian", d, rho=best), ll, int(res.nit),
                         bool(res.success), candidates[1][1])

    inner_ok = []

    def profile(nu):
        x = special.stdtrit(nu, u)

        def negll(r):
            return -float(np.sum(_t_logpdf_from_quantiles(x, r, nu, d)))
        res = _bounded_search(negll, *_rho_bounds(d))
        inner_ok.append(bool(res.success))
        return res.x, res.fun

    outer = _bounded_search(lambda nu: profile(nu)[1], *NU_BOUNDS)
    nu_hat = float(outer.x)
    rho_hat, neg = profile(nu_hat)
    start_model = CopulaModel("student_t", d, rho=start, nu=NU_BOUNDS[1])
    start_ll = log_likelihood(start_model, u)
    if start_ll > -neg:
        return FitResult(start_model, start_ll, int(outer.nit), bool(outer.success), start_ll)
    return FitResult(CopulaModel("student_t", d, rho=rho_hat, nu=nu_hat), -neg, int(outer.nit),
                     bool(outer.success) and all(inner_ok), start_ll)
