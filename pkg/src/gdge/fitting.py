"""Maximum-likelihood fitting of the compounded laws by EM.

The latent-count construction makes EM natural: if each observation's
geometric count n_i were known, the complete-data likelihood would separate
into a Bernoulli-style factor for theta and, per coordinate, a weighted
base-law likelihood whose x_i carries weight n_i.  The fitter alternates

  E-step   impute each n_i by the conditional mode given the observation
           (config-switchable to the conditional mean),
  M-step   theta <- m / sum(n_i), and per coordinate a profile search:
           inner 1-D shape maximization (the weighted log-likelihood is
           unimodal in the shape), outer grid-plus-golden search over p.

Mode imputation is not guaranteed to increase the observed likelihood, so
each accepted iterate is guarded: a step that would lower the observed
log-likelihood by more than a small slack is rejected and iteration stops.

`fit_uni_mle` / `fit_biv_mle` wrap the EM core in a multi-start pipeline
with a simplex polish and an explicit boundary comparison against the
theta = 1 (pure base law / independence) submodel, and report standard
errors from the finite-difference observed information.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from .bivariate import BgdgeParams, BivCell
from .dge import DgeParams, SeriesCapError, pow1m
from .univariate import UgdgeParams

__all__ = [
    "BivDataset",
    "EmConfig",
    "EmState",
    "FitReport",
    "observed_loglik_uni",
    "observed_loglik_biv",
    "latent_weighted_loglik",
    "complete_loglik",
    "e_step",
    "e_step_uni",
    "profile_alpha_max",
    "m_step_pair",
    "em_fit_uni",
    "em_fit_biv",
    "fit_uni_mle",
    "fit_biv_mle",
    "std_errors",
]

#: A proposed EM step may lower the observed log-likelihood by at most this
#: much before it is rejected (mode imputation is not exactly monotone).
ASCENT_SLACK = 1e-8

#: The boundary submodel wins ties against interior candidates within this.
_SNAP_SLACK = 1e-7

#: Probability-scale margin for the p search grid.
_P_EPS = 1e-3

_LL_FLOOR = 1e-300


def _as_counts(x, name="x") -> np.ndarray:
    arr = np.asarray(x)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"{name} must be a nonempty 1-D array")
    if not np.all(np.equal(np.floor(arr.astype(float)), arr.astype(float))):
        raise ValueError(f"{name} must contain integers")
    out = arr.astype(np.int64)
    if np.any(out < 0):
        raise ValueError(f"{name} must be nonnegative")
    return out


@dataclass(frozen=True)
class BivDataset:
    """Paired nonnegative integer observations, in file order."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = _as_counts(self.x, "x")
        y = _as_counts(self.y, "y")
        if x.size != y.size:
            raise ValueError(f"coordinate lengths differ: {x.size} vs {y.size}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_pairs(cls, pairs) -> "BivDataset":
        pairs = list(pairs)
        return cls(np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs]))

    def __len__(self) -> int:
        return int(self.x.size)

    @property
    def m(self) -> int:
        return int(self.x.size)

    def cells(self):
        return [BivCell(int(a), int(b)) for a, b in zip(self.x, self.y)]

    def contingency_table(self) -> np.ndarray:
        """Counts over the rectangle [0, max x] x [0, max y]."""
        table = np.zeros((int(self.x.max()) + 1, int(self.y.max()) + 1), dtype=np.int64)
        np.add.at(table, (self.x, self.y), 1)
        return table


@dataclass(frozen=True)
class EmConfig:
    """Tolerances and search budgets for the EM fitter."""

    ll_rel_tol: float = 1e-8
    param_tol: float = 1e-6
    max_iter: int = 500
    n_cap: int = 100_000
    inner_tol: float = 1e-7
    p_grid: int = 64
    e_step: str = "argmax"  # or "expected"
    polish_theta_grid: tuple = (0.15, 0.35, 0.55, 0.75, 0.95)
    biv_polish_theta_grid: tuple = (0.25, 0.75)
    polish_maxfev: int = 4000

    def __post_init__(self):
        if not (self.ll_rel_tol > 0 and self.param_tol > 0 and self.inner_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1 or self.n_cap < 1 or self.p_grid < 2:
            raise ValueError("iteration/search budgets out of range")
        if self.e_step not in ("argmax", "expected"):
            raise ValueError(f"e_step must be 'argmax' or 'expected', got {self.e_step!r}")


@dataclass(frozen=True)
class EmState:
    """One EM iterate: parameters, imputed counts, and their total."""

    omega: object  # BgdgeParams or UgdgeParams
    n_tilde: np.ndarray
    k: float
    iteration: int


@dataclass(frozen=True)
class FitReport:
    """Everything a fit produces, immutable and schema-stable."""

    params: object  # UgdgeParams or BgdgeParams
    param_names: tuple
    estimates: tuple
    std_errors: tuple
    ci95: tuple  # of (lo, hi) pairs
    loglik: float
    iters: int
    converged: bool
    ll_trace: tuple
    stop_reason: str
    method: str
    notes: tuple = ()


# ---------------------------------------------------------------------------
# log-likelihoods


def _uni_pm(x: np.ndarray, alpha: float, p: float, theta: float) -> np.ndarray:
    tau = 1.0 - theta
    u = pow1m(p, x + 1.0, alpha)
    v = pow1m(p, x, alpha)
    return theta * np.maximum(u - v, 0.0) / ((1.0 - tau * u) * (1.0 - tau * v))


def _biv_pm(x, y, a1, p1, a2, p2, th) -> np.ndarray:
    tau = 1.0 - th
    u = pow1m(p1, x + 1.0, a1)
    u_ = pow1m(p1, x, a1)
    b = pow1m(p2, y + 1.0, a2)
    b_ = pow1m(p2, y, a2)
    num = th * (u - u_)
    g_hi = num * b / ((1.0 - tau * u * b) * (1.0 - tau * u_ * b))
    g_lo = num * b_ / ((1.0 - tau * u * b_) * (1.0 - tau * u_ * b_))
    return np.maximum(g_hi - g_lo, 0.0)


def _uni_ll(x: np.ndarray, alpha: float, p: float, theta: float) -> float:
    """Optimizer-facing log-likelihood: floors vanishing cells, never raises."""
    return float(np.log(np.maximum(_uni_pm(x, alpha, p, theta), _LL_FLOOR)).sum())


def _biv_ll(x, y, a1, p1, a2, p2, th) -> float:
    return float(np.log(np.maximum(_biv_pm(x, y, a1, p1, a2, p2, th), _LL_FLOOR)).sum())


def observed_loglik_uni(params: UgdgeParams, x) -> float:
    """Observed-data log-likelihood; raises if any observation has no mass."""
    xf = _as_counts(x).astype(float)
    pm = _uni_pm(xf, *params.as_tuple())
    if np.any(pm <= 0.0):
        i = int(np.argmax(pm <= 0.0))
        raise FloatingPointError(
            f"model probability underflowed at observation {i} (x={int(xf[i])})"
        )
    return float(np.log(pm).sum())


def observed_loglik_biv(params: BgdgeParams, data: BivDataset) -> float:
    """Observed-data log-likelihood; raises if any cell has no mass."""
    pm = _biv_pm(data.x.astype(float), data.y.astype(float), *params.as_tuple())
    if np.any(pm <= 0.0):
        i = int(np.argmax(pm <= 0.0))
        raise FloatingPointError(
            f"model probability underflowed at observation {i} "
            f"(cell=({int(data.x[i])}, {int(data.y[i])}))"
        )
    return float(np.log(pm).sum())


def latent_weighted_loglik(values, counts, alpha: float, p: float) -> float:
    """Weighted base log-likelihood: each value's shape is scaled by its count.

    ``sum_i log[(1 - p^(x_i+1))^(n_i a) - (1 - p^(x_i))^(n_i a)]``; -inf when
    any bracketed difference is nonpositive (numerically extinct term).
    """
    v = np.asarray(values, dtype=float)
    n = np.asarray(counts, dtype=float)
    d = pow1m(p, v + 1.0, n * alpha) - pow1m(p, v, n * alpha)
    if np.any(d <= 0.0):
        return -math.inf
    return float(np.log(d).sum())


def complete_loglik(omega: BgdgeParams, data: BivDataset, counts) -> float:
    """Complete-data log-likelihood given imputed latent counts.

    ``m ln theta + (k - m) ln(1 - theta)`` plus one weighted base
    log-likelihood per coordinate.  At theta = 1 the second term is 0 when
    k = m and the value is undefined (domain error) when k > m.
    """
    n = np.asarray(counts, dtype=float)
    if n.size != len(data) or np.any(n < 1):
        raise ValueError("counts must align with the data and all be >= 1")
    m = float(len(data))
    k = float(n.sum())
    a1, p1, a2, p2, th = omega.as_tuple()
    if th == 1.0:
        if k > m:
            raise ValueError("theta = 1 is incompatible with any latent count > 1")
        geom = 0.0
    else:
        geom = m * math.log(th) + (k - m) * math.log(1.0 - th)
    return (
        geom
        + latent_weighted_loglik(data.x, n, a1, p1)
        + latent_weighted_loglik(data.y, n, a2, p2)
    )


# ---------------------------------------------------------------------------
# E-step


def _phi(w, tau):
    return w / (1.0 - tau * w) ** 2


def _psi(w, tau):
    return w / (1.0 - tau * w)


def _argmax_scan(parts, tau, n_cap):
    """Vectorized certified mode scan over latent counts.

    ``parts`` is a list of (hi, lo) base-CDF pairs whose per-count term is
    ``tau^(n-1) * prod_j (hi_j^n - lo_j^n)``; the decreasing envelope
    ``tau^(n-1) * prod_j hi_j^n`` certifies termination.
    """
    hi_prod = np.ones_like(parts[0][0])
    best_t = np.ones_like(hi_prod)
    for hi, lo in parts:
        hi_prod = hi_prod * hi
        best_t = best_t * (hi - lo)
    if np.any(best_t <= 0.0):
        i = int(np.argmax(best_t <= 0.0))
        raise FloatingPointError(f"zero-probability observation {i} in the mode scan")
    best_n = np.ones(best_t.shape, dtype=np.int64)
    active = np.ones(best_t.shape, dtype=bool)
    n = 1
    while np.any(active):
        n += 1
        if n > n_cap:
            raise SeriesCapError("latent-count scan exceeded n_cap without a certificate")
        nf = float(n)
        env = tau ** (nf - 1.0) * hi_prod ** nf
        active &= env > best_t
        if not np.any(active):
            break
        t = np.full(best_t.shape, tau ** (nf - 1.0))
        for hi, lo in parts:
            t = t * (hi ** nf - lo ** nf)
        upd = active & (t > best_t)
        best_t = np.where(upd, t, best_t)
        best_n = np.where(upd, n, best_n)
    return best_n


def e_step(omega: BgdgeParams, data: BivDataset, cfg: EmConfig | None = None):
    """Impute each pair's latent count given the current iterate.

    Default: the conditional mode (smallest maximizer), an int64 array.
    With ``cfg.e_step == "expected"``: the conditional mean, a float array.
    """
    cfg = cfg or EmConfig()
    a1, p1, a2, p2, th = omega.as_tuple()
    m = len(data)
    if th >= 1.0:
        return np.ones(m, dtype=np.int64)
    xf = data.x.astype(float)
    yf = data.y.astype(float)
    tau = 1.0 - th
    u = pow1m(p1, xf + 1.0, a1)
    u_ = pow1m(p1, xf, a1)
    v = pow1m(p2, yf + 1.0, a2)
    v_ = pow1m(p2, yf, a2)
    if cfg.e_step == "expected":
        num = _phi(u * v, tau) - _phi(u * v_, tau) - _phi(u_ * v, tau) + _phi(u_ * v_, tau)
        den = _psi(u * v, tau) - _psi(u * v_, tau) - _psi(u_ * v, tau) + _psi(u_ * v_, tau)
        if np.any(den <= 0.0):
            i = int(np.argmax(den <= 0.0))
            raise FloatingPointError(f"zero-probability observation {i} in the E-step")
        return num / den
    return _argmax_scan([(u, u_), (v, v_)], tau, cfg.n_cap)


def e_step_uni(params: UgdgeParams, x, cfg: EmConfig | None = None):
    """Univariate specialization of `e_step`."""
    cfg = cfg or EmConfig()
    alpha, p, th = params.as_tuple()
    xf = _as_counts(x).astype(float)
    if th >= 1.0:
        return np.ones(xf.size, dtype=np.int64)
    tau = 1.0 - th
    u = pow1m(p, xf + 1.0, alpha)
    v = pow1m(p, xf, alpha)
    if cfg.e_step == "expected":
        num = _phi(u, tau) - _phi(v, tau)
        den = _psi(u, tau) - _psi(v, tau)
        if np.any(den <= 0.0):
            i = int(np.argmax(den <= 0.0))
            raise FloatingPointError(f"zero-probability observation {i} in the E-step")
        return num / den
    return _argmax_scan([(u, v)], tau, cfg.n_cap)


# ---------------------------------------------------------------------------
# M-step


def _golden_max(f, lo: float, hi: float, tol: float) -> float:
    """Golden-section maximizer of a unimodal f on [lo, hi]."""
    g = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = float(lo), float(hi)
    c = b - g * (b - a)
    d = a + g * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def profile_alpha_max(p: float, values, counts, inner_tol: float = 1e-7):
    """Best shape at fixed p for the weighted base log-likelihood.

    The objective is unimodal in the shape (log-concave), so a doubling
    bracket from 1 followed by golden-section search finds the global
    maximum.  Returns ``(alpha, value)``.
    """
    v = np.asarray(values, dtype=float)
    n = np.asarray(counts, dtype=float)
    if v.size == 0:
        raise ValueError("empty observation set")
    if np.all(v == 0):
        raise ValueError(
            "all observations are zero: the weighted log-likelihood is monotone "
            "in the shape (boundary ridge, no interior maximizer)"
        )

    def g(alpha):
        return latent_weighted_loglik(v, n, alpha, p)

    a, b, c = 0.5, 1.0, 2.0
    ga, gb, gc = g(a), g(b), g(c)
    for _ in range(200):
        if gb >= ga and gb >= gc:
            break
        if gc >= gb:
            a, b, ga, gb = b, c, gb, gc
            c *= 2.0
            gc = g(c)
        else:
            b, c, gb, gc = a, b, ga, gb
            a *= 0.5
            ga = g(a)
    else:
        raise RuntimeError("failed to bracket the profile maximum in the shape")
    alpha = _golden_max(g, a, c, inner_tol)
    return alpha, g(alpha)


def m_step_pair(values, counts, cfg: EmConfig | None = None):
    """Joint maximizer of the weighted base log-likelihood over (shape, p).

    Profile search: every p on a grid over (eps, 1-eps) is scored by the
    inner shape maximization, then the best grid cell is refined by
    golden-section on the profiled objective.  Returns ``(alpha, p)``.
    """
    cfg = cfg or EmConfig()
    v = np.asarray(values, dtype=float)
    n = np.asarray(counts, dtype=float)
    if v.size == 0:
        raise ValueError("empty observation set")
    if np.all(v == 0):
        warnings.warn(
            "degenerate observations (all zero): likelihood maximized on a "
            "boundary ridge; returning the small-p representative",
            RuntimeWarning,
            stacklevel=2,
        )
        return 1.0, _P_EPS

    grid = np.linspace(_P_EPS, 1.0 - _P_EPS, cfg.p_grid)
    scores = np.empty(grid.size)
    for i, p in enumerate(grid):
        scores[i] = profile_alpha_max(p, v, n, cfg.inner_tol)[1]
    best = int(np.argmax(scores))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, grid.size - 1)]

    def profiled(p):
        return profile_alpha_max(p, v, n, cfg.inner_tol)[1]

    p_star = _golden_max(profiled, lo, hi, cfg.inner_tol)
    alpha_star, _ = profile_alpha_max(p_star, v, n, cfg.inner_tol)
    if p_star < 2.0 * _P_EPS or p_star > 1.0 - 2.0 * _P_EPS:
        warnings.warn(
            f"p maximizer {p_star:.6f} sits at the edge of the search range",
            RuntimeWarning,
            stacklevel=2,
        )
    return alpha_star, p_star


# ---------------------------------------------------------------------------
# EM drivers


def _finish_report(
    params,
    names,
    ll,
    iters,
    converged,
    trace,
    stop_reason,
    method,
    notes,
    se_fn,
    compute_se,
):
    if compute_se:
        se, se_notes = se_fn(params)
        notes = tuple(notes) + tuple(se_notes)
    else:
        se = tuple(math.nan for _ in names)
    est = params.as_tuple()
    ci = tuple(
        (e - 1.96 * s, e + 1.96 * s) if math.isfinite(s) else (math.nan, math.nan)
        for e, s in zip(est, se)
    )
    return FitReport(
        params=params,
        param_names=tuple(names),
        estimates=tuple(float(e) for e in est),
        std_errors=tuple(float(s) for s in se),
        ci95=ci,
        loglik=float(ll),
        iters=int(iters),
        converged=bool(converged),
        ll_trace=tuple(float(t) for t in trace),
        stop_reason=stop_reason,
        method=method,
        notes=tuple(notes),
    )


_UNI_NAMES = ("alpha", "p", "theta")
_BIV_NAMES = ("alpha1", "p1", "alpha2", "p2", "theta")


def em_fit_uni(x, init: UgdgeParams, cfg: EmConfig | None = None, compute_se: bool = True) -> FitReport:
    """EM for the univariate law from a given start, with ascent guard."""
    cfg = cfg or EmConfig()
    xi = _as_counts(x)
    xf = xi.astype(float)
    m = xi.size
    al, p, th = init.as_tuple()
    ll_prev = _uni_ll(xf, al, p, th)
    trace = [ll_prev]
    stop = "max_iter"
    for _ in range(cfg.max_iter):
        ns = e_step_uni(UgdgeParams.from_values(al, p, th), xi, cfg)
        k = float(np.asarray(ns, dtype=float).sum())
        th_new = min(m / k, 1.0)
        al_new, p_new = m_step_pair(xf, ns, cfg)
        ll = _uni_ll(xf, al_new, p_new, th_new)
        if ll < ll_prev - ASCENT_SLACK:
            stop = "ll_decrease"
            break
        change = max(abs(al_new - al), abs(p_new - p), abs(th_new - th))
        rel = abs(ll - ll_prev) / max(1.0, abs(ll_prev))
        al, p, th = al_new, p_new, th_new
        trace.append(ll)
        ll_prev = ll
        if rel < cfg.ll_rel_tol and change < cfg.param_tol:
            stop = "converged"
            break
    params = UgdgeParams.from_values(al, p, th)
    return _finish_report(
        params,
        _UNI_NAMES,
        ll_prev,
        len(trace) - 1,
        stop != "max_iter",
        trace,
        stop,
        "em",
        (),
        lambda q: std_errors(q, xi),
        compute_se,
    )


def em_fit_biv(
    data: BivDataset, init: BgdgeParams, cfg: EmConfig | None = None, compute_se: bool = True
) -> FitReport:
    """EM for the bivariate law from a given start, with ascent guard."""
    cfg = cfg or EmConfig()
    xf = data.x.astype(float)
    yf = data.y.astype(float)
    m = len(data)
    a1, p1, a2, p2, th = init.as_tuple()
    ll_prev = _biv_ll(xf, yf, a1, p1, a2, p2, th)
    trace = [ll_prev]
    stop = "max_iter"
    for _ in range(cfg.max_iter):
        ns = e_step(BgdgeParams.from_values(a1, p1, a2, p2, th), data, cfg)
        k = float(np.asarray(ns, dtype=float).sum())
        th_new = min(m / k, 1.0)
        a1_new, p1_new = m_step_pair(xf, ns, cfg)
        a2_new, p2_new = m_step_pair(yf, ns, cfg)
        ll = _biv_ll(xf, yf, a1_new, p1_new, a2_new, p2_new, th_new)
        if ll < ll_prev - ASCENT_SLACK:
            stop = "ll_decrease"
            break
        change = max(
            abs(a1_new - a1),
            abs(p1_new - p1),
            abs(a2_new - a2),
            abs(p2_new - p2),
            abs(th_new - th),
        )
        rel = abs(ll - ll_prev) / max(1.0, abs(ll_prev))
        a1, p1, a2, p2, th = a1_new, p1_new, a2_new, p2_new, th_new
        trace.append(ll)
        ll_prev = ll
        if rel < cfg.ll_rel_tol and change < cfg.param_tol:
            stop = "converged"
            break
    params = BgdgeParams.from_values(a1, p1, a2, p2, th)
    return _finish_report(
        params,
        _BIV_NAMES,
        ll_prev,
        len(trace) - 1,
        stop != "max_iter",
        trace,
        stop,
        "em",
        (),
        lambda q: std_errors(q, data),
        compute_se,
    )


# ---------------------------------------------------------------------------
# polish and pipelines


# The simplex refinement searches a generous compact box.  The likelihood
# has an escape ridge where shape and compounding go to zero together while
# approaching a limit law outside the family; without bounds the search can
# run down that ridge indefinitely (and push later latent-count scans past
# their certificates), so parameters are confined to shape in [1e-3, 1e3]
# and unit-interval parameters in [1e-6, 1 - 1e-6].
_W_SHAPE_LO, _W_SHAPE_HI = math.log(1e-3), math.log(1e3)
_W_UNIT = 13.815510557964274  # logit(1 - 1e-6)


def _shape_from_w(w: float) -> float:
    return math.exp(min(max(w, _W_SHAPE_LO), _W_SHAPE_HI))


def _unit_from_w(w: float) -> float:
    return float(expit(min(max(w, -_W_UNIT), _W_UNIT)))


def _logit(z: float) -> float:
    z = min(max(z, 1e-6), 1.0 - 1e-6)
    return math.log(z / (1.0 - z))


def _log_shape(al: float) -> float:
    return math.log(min(max(al, 1e-3), 1e3))


def _polish_uni(xf: np.ndarray, start, maxfev: int):
    """Simplex refinement in box-bounded log/logit coordinates."""
    al0, p0, th0 = start
    w0 = np.array([_log_shape(al0), _logit(p0), _logit(th0)])

    def neg(w):
        return -_uni_ll(xf, _shape_from_w(w[0]), _unit_from_w(w[1]), _unit_from_w(w[2]))

    res = minimize(
        neg,
        w0,
        method="Nelder-Mead",
        options={"xatol": 1e-7, "fatol": 1e-10, "maxfev": maxfev},
    )
    out = (_shape_from_w(res.x[0]), _unit_from_w(res.x[1]), _unit_from_w(res.x[2]))
    return out, -float(res.fun)


def _polish_biv(xf, yf, start, maxfev: int):
    a10, p10, a20, p20, th0 = start
    w0 = np.array([_log_shape(a10), _logit(p10), _log_shape(a20), _logit(p20), _logit(th0)])

    def neg(w):
        return -_biv_ll(
            xf,
            yf,
            _shape_from_w(w[0]),
            _unit_from_w(w[1]),
            _shape_from_w(w[2]),
            _unit_from_w(w[3]),
            _unit_from_w(w[4]),
        )

    res = minimize(
        neg,
        w0,
        method="Nelder-Mead",
        options={"xatol": 1e-6, "fatol": 1e-9, "maxfev": maxfev},
    )
    out = (
        _shape_from_w(res.x[0]),
        _unit_from_w(res.x[1]),
        _shape_from_w(res.x[2]),
        _unit_from_w(res.x[3]),
        _unit_from_w(res.x[4]),
    )
    return out, -float(res.fun)


def _extend_trace(trace, ll_final):
    trace = list(trace)
    if ll_final >= trace[-1]:
        trace.append(ll_final)
    return trace


def fit_uni_mle(x, cfg: EmConfig | None = None, init: UgdgeParams | None = None, compute_se: bool = True) -> FitReport:
    """Full univariate ML pipeline: base fit, EM, multi-start polish, boundary check.

    The theta = 1 submodel (pure base law) is an honest candidate: if its
    likelihood comes within a tie-break slack of the best interior candidate,
    the boundary fit is reported.
    """
    cfg = cfg or EmConfig()
    xi = _as_counts(x)
    xf = xi.astype(float)

    al_d, p_d = m_step_pair(xf, np.ones(xi.size), cfg)
    ll_dge = _uni_ll(xf, al_d, p_d, 1.0)

    start = init if init is not None else UgdgeParams.from_values(al_d, p_d, 0.5)
    notes = []
    try:
        em = em_fit_uni(xi, start, cfg, compute_se=False)
        seed, seed_ll = em.estimates, em.loglik
        em_iters, em_conv, em_trace, em_stop = em.iters, em.converged, em.ll_trace, em.stop_reason
    except SeriesCapError:
        # An extreme start can make the latent-count scan uncertifiable;
        # fall back to direct refinement from the start point.
        seed = start.as_tuple()
        seed_ll = _uni_ll(xf, *seed)
        em_iters, em_conv, em_trace, em_stop = 0, True, (seed_ll,), "em_series_cap"
        notes.append("EM imputation scan exceeded its cap; direct refinement only")

    candidates = [(seed, seed_ll)]
    candidates.append(_polish_uni(xf, seed, 3000))
    for th0 in cfg.polish_theta_grid:
        candidates.append(_polish_uni(xf, (al_d, p_d, th0), 3000))
    est, ll_best = max(candidates, key=lambda c: c[1])

    if ll_dge >= ll_best - _SNAP_SLACK:
        est, ll_best = (al_d, p_d, 1.0), ll_dge
        notes.append("theta at boundary 1 (base-law submodel at least as likely)")
    params = UgdgeParams.from_values(*est)
    return _finish_report(
        params,
        _UNI_NAMES,
        ll_best,
        em_iters,
        em_conv,
        _extend_trace(em_trace, ll_best),
        em_stop,
        "em+polish",
        notes,
        lambda q: std_errors(q, xi),
        compute_se,
    )


def fit_biv_mle(
    data: BivDataset,
    cfg: EmConfig | None = None,
    init: BgdgeParams | None = None,
    extra_starts=(),
    compute_se: bool = True,
) -> FitReport:
    """Full bivariate ML pipeline.

    Default initialization fits each marginal by `fit_uni_mle` and averages
    their compounding estimates.  Candidates: the EM endpoint, its polish,
    polishes from the independent base fits at a small theta grid, any
    caller-supplied ``extra_starts`` (5-tuples), and the theta = 1
    independence submodel, which wins ties within a slack.
    """
    cfg = cfg or EmConfig()
    xf = data.x.astype(float)
    yf = data.y.astype(float)

    a1d, p1d = m_step_pair(xf, np.ones(len(data)), cfg)
    a2d, p2d = m_step_pair(yf, np.ones(len(data)), cfg)
    ll_null = _biv_ll(xf, yf, a1d, p1d, a2d, p2d, 1.0)

    if init is None:
        f1 = fit_uni_mle(data.x, cfg, compute_se=False)
        f2 = fit_uni_mle(data.y, cfg, compute_se=False)
        th0 = min(1.0, 0.5 * (f1.estimates[2] + f2.estimates[2]))
        init = BgdgeParams.from_values(
            f1.estimates[0], f1.estimates[1], f2.estimates[0], f2.estimates[1], th0
        )
    notes = []
    try:
        em = em_fit_biv(data, init, cfg, compute_se=False)
        seed, seed_ll = em.estimates, em.loglik
        em_iters, em_conv, em_trace, em_stop = em.iters, em.converged, em.ll_trace, em.stop_reason
    except SeriesCapError:
        seed = init.as_tuple()
        seed_ll = _biv_ll(xf, yf, *seed)
        em_iters, em_conv, em_trace, em_stop = 0, True, (seed_ll,), "em_series_cap"
        notes.append("EM imputation scan exceeded its cap; direct refinement only")

    candidates = [(seed, seed_ll)]
    candidates.append(_polish_biv(xf, yf, seed, cfg.polish_maxfev))
    for th0 in cfg.biv_polish_theta_grid:
        candidates.append(_polish_biv(xf, yf, (a1d, p1d, a2d, p2d, th0), cfg.polish_maxfev))
    for s in extra_starts:
        candidates.append(_polish_biv(xf, yf, tuple(s), cfg.polish_maxfev))
    candidates.append(((a1d, p1d, a2d, p2d, 1.0), ll_null))
    est, ll_best = max(candidates, key=lambda c: c[1])

    if ll_null >= ll_best - _SNAP_SLACK:
        est, ll_best = (a1d, p1d, a2d, p2d, 1.0), ll_null
        notes.append("theta at boundary 1 (independence submodel at least as likely)")
    params = BgdgeParams.from_values(*est)
    return _finish_report(
        params,
        _BIV_NAMES,
        ll_best,
        em_iters,
        em_conv,
        _extend_trace(em_trace, ll_best),
        em_stop,
        "em+polish",
        notes,
        lambda q: std_errors(q, data),
        compute_se,
    )


# ---------------------------------------------------------------------------
# standard errors


def _hessian(f, w0: np.ndarray, h: np.ndarray) -> np.ndarray:
    k = w0.size
    hess = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            wpp = w0.copy()
            wpm = w0.copy()
            wmp = w0.copy()
            wmm = w0.copy()
            wpp[i] += h[i]
            wpp[j] += h[j]
            wpm[i] += h[i]
            wpm[j] -= h[j]
            wmp[i] -= h[i]
            wmp[j] += h[j]
            wmm[i] -= h[i]
            wmm[j] -= h[j]
            val = (f(wpp) - f(wpm) - f(wmp) + f(wmm)) / (4.0 * h[i] * h[j])
            hess[i, j] = hess[j, i] = val
    return hess


def std_errors(params, data):
    """Finite-difference observed-information standard errors.

    Returns ``(se, notes)`` where se aligns with the parameter order of the
    given record.  A boundary compounding estimate (theta = 1) is pinned:
    its se is NaN and the information is taken over the remaining
    parameters.  Non-invertible or non-positive information yields NaNs
    with an explanatory note rather than an exception.
    """
    if isinstance(params, BgdgeParams):
        w0 = np.array(params.as_tuple())
        data_x = data.x.astype(float)
        data_y = data.y.astype(float)

        def full(w):
            return _biv_ll(data_x, data_y, *w)

        bounded_above = [False, True, False, True, True]
    elif isinstance(params, UgdgeParams):
        w0 = np.array(params.as_tuple())
        xf = _as_counts(data).astype(float)

        def full(w):
            return _uni_ll(xf, *w)

        bounded_above = [False, True, True]
    else:
        raise TypeError(f"unsupported parameter record {type(params).__name__}")

    notes = []
    k = w0.size
    active = list(range(k))
    if w0[-1] >= 1.0:
        active = active[:-1]
        notes.append("theta at boundary 1: its standard error is undefined (reported NaN)")

    h = np.maximum(1e-4, 1e-4 * np.abs(w0))
    for i in range(k):
        h[i] = min(h[i], w0[i] / 4.0)
        if bounded_above[i]:
            h[i] = min(h[i], (1.0 - w0[i]) / 4.0)
    se = np.full(k, math.nan)
    if active:
        idx = np.array(active)
        if np.any(h[idx] <= 0.0):
            notes.append("a parameter sits on its domain edge; information not computed")
            return tuple(se), notes

        def restricted(wa):
            w = w0.copy()
            w[idx] = wa
            return full(w)

        hess = _hessian(restricted, w0[idx].copy(), h[idx])
        info = -hess
        try:
            cov = np.linalg.inv(info)
        except np.linalg.LinAlgError:
            notes.append("observed information is singular; standard errors unavailable")
            return tuple(se), notes
        diag = np.diag(cov)
        if np.any(diag <= 0.0):
            notes.append(
                "observed information is not positive definite at the estimate; "
                "some standard errors unavailable"
            )
        with np.errstate(invalid="ignore"):
            se[idx] = np.where(diag > 0.0, np.sqrt(np.abs(diag)), math.nan)
    return tuple(float(s) for s in se), notes
