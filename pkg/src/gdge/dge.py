"""Base discrete law: the integer part of a generalized-exponential variate.

The continuous generalized exponential (GE) law has CDF
``(1 - exp(-lam * y)) ** alpha`` on ``y >= 0``.  Flooring such a variate
gives a two-parameter law on {0, 1, 2, ...} with

    pmf(x) = (1 - p**(x+1))**alpha - (1 - p**x)**alpha,      p = exp(-lam),
    cdf(x) = (1 - p**(floor(x)+1))**alpha                    for x >= 0.

Everything heavier in this package (geometric compounding, EM fitting) is
built on the two parameter records and the evaluation helpers defined here.

Numerical conventions used throughout the package:

* powers of the form ``(1 - p**t)**alpha`` are evaluated in log space,
  ``exp(alpha * log1p(-p**t))``, which keeps precision for ``p`` close to 1
  and large ``t``;
* ``0**alpha`` is taken to be 0 for every ``alpha > 0``, so the pmf needs no
  special case at the origin;
* all evaluation functions are pure and accept scalars or arrays; samplers
  take a caller-supplied ``numpy.random.Generator`` and hold no hidden state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SERIES_CAP",
    "SeriesCapError",
    "GeParams",
    "DgeParams",
    "pow1m",
    "co_pow1m",
    "ge_cdf",
    "ge_sample",
    "dge_pmf",
    "dge_cdf",
    "dge_hazard",
    "dge_sample",
]

#: Hard cap on the number of terms any truncated series in this package may
#: consume before giving up with :class:`SeriesCapError`.
SERIES_CAP = 1_000_000


class SeriesCapError(RuntimeError):
    """A truncated series or scan exceeded its configured term budget.

    Raised instead of silently returning a partial sum, typically in the
    heavy-tailed regime where the compounding parameter approaches 0.
    """


def _maybe_scalar(out):
    """Return a Python float for 0-d results, pass arrays through."""
    return float(out) if np.ndim(out) == 0 else out


def pow1m(p, t, alpha):
    """``(1 - p**t) ** alpha`` evaluated as ``exp(alpha * log1p(-p**t))``.

    Stable for ``p`` near 1 and large ``t``.  At ``t = 0`` the result is
    exactly 0.0 (the ``0**alpha = 0`` convention).  Returns an ndarray for
    array ``t``, a numpy scalar otherwise.
    """
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        return np.exp(alpha * np.log1p(-np.power(p, t)))


def co_pow1m(p, t, alpha):
    """``1 - (1 - p**t) ** alpha``, the survival-side complement of pow1m.

    Evaluated as ``-expm1(alpha * log1p(-p**t))`` so that values near 0
    (large ``t``) keep full relative precision.
    """
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        return -np.expm1(alpha * np.log1p(-np.power(p, t)))


@dataclass(frozen=True)
class GeParams:
    """Shape/rate pair of the continuous generalized exponential law."""

    alpha: float
    lam: float

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha!r}")
        if not self.lam > 0.0:
            raise ValueError(f"lam must be positive, got {self.lam!r}")


@dataclass(frozen=True)
class DgeParams:
    """Shape/probability pair of the discretized law; ``p = exp(-lam)``."""

    alpha: float
    p: float

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha!r}")
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"p must lie in (0, 1), got {self.p!r}")

    @property
    def lam(self) -> float:
        """Rate of the underlying continuous law."""
        return -math.log(self.p)

    def continuous(self) -> GeParams:
        """The continuous law whose floor this distribution is."""
        return GeParams(self.alpha, self.lam)


def ge_cdf(params: GeParams, y):
    """CDF ``(1 - exp(-lam * y)) ** alpha`` of the continuous law; 0 below 0."""
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.exp(params.alpha * np.log1p(-np.exp(-params.lam * np.maximum(y, 0.0))))
    return _maybe_scalar(np.where(y < 0.0, 0.0, out))


def _ge_inverse(alpha, lam, u):
    """Inverse CDF of the continuous law, sans domain checks (sampler core).

    ``1 - u**(1/alpha)`` is formed as ``-expm1(log(u)/alpha)`` to keep
    precision for ``u`` near 1; ``u = 0`` maps gracefully to 0.
    """
    with np.errstate(divide="ignore"):
        return -np.log(-np.expm1(np.log(u) / alpha)) / lam


def ge_sample(params: GeParams, u):
    """Map uniform(0,1) variates to GE variates by inverse transform."""
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0.0) | (u >= 1.0)):
        raise ValueError("u must lie strictly inside (0, 1)")
    return _maybe_scalar(_ge_inverse(params.alpha, params.lam, u))


def dge_pmf(params: DgeParams, x):
    """pmf ``(1 - p**(x+1))**alpha - (1 - p**x)**alpha`` on integers ``x >= 0``."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("dge_pmf is defined on nonnegative integers")
    out = np.maximum(
        pow1m(params.p, x + 1.0, params.alpha) - pow1m(params.p, x, params.alpha),
        0.0,
    )
    return _maybe_scalar(out)


def dge_cdf(params: DgeParams, x):
    """Right-continuous step CDF; 0 below the support (negative ``x`` allowed)."""
    x = np.asarray(x, dtype=float)
    t = np.maximum(np.floor(x) + 1.0, 0.0)
    return _maybe_scalar(pow1m(params.p, t, params.alpha))


def dge_hazard(params: DgeParams, x):
    """Discrete hazard ``pmf(x) / P(X >= x)`` on integers ``x >= 0``."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("dge_hazard is defined on nonnegative integers")
    surv = co_pow1m(params.p, x, params.alpha)  # 1 - cdf(x-1), cancellation-free
    if np.any(np.asarray(surv) <= 0.0):
        raise ValueError("survival underflowed to zero; hazard undefined here")
    return _maybe_scalar(dge_pmf(params, x) / surv)


def dge_sample(params: DgeParams, rng: np.random.Generator, size=None):
    """Integer draws: the floor of a continuous draw with rate ``-log(p)``.

    Returns a Python int when ``size`` is None, else an int64 array.
    """
    u = rng.random(size)
    y = _ge_inverse(params.alpha, params.lam, u)
    if size is None:
        return int(np.floor(y))
    return np.floor(y).astype(np.int64)
