"""Pick-Freeze baseline: symmetrised Sobol estimator and a one-sided
asymptotic comparison test.

This needs its own design of experiment (``2n`` model calls per index,
``3n`` for a nested pair sharing the base draws), unlike the xi-process
test which reuses one iid sample for every hypothesis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats

from .core import SubsetMask

Sampler = Callable[[np.random.Generator, int], np.ndarray]


@dataclass(frozen=True)
class PickFreezeSample:
    y: np.ndarray
    y_pf: np.ndarray
    u: tuple[int, ...] = ()
    model_calls: int = 0

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float).reshape(-1)
        y_pf = np.asarray(self.y_pf, dtype=float).reshape(-1)
        if y.shape != y_pf.shape:
            raise ValueError("y and y_pf must have the same length")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "y_pf", y_pf)

    @property
    def n(self) -> int:
        return self.y.shape[0]


@dataclass(frozen=True)
class PickFreezeReport:
    statistic: float
    p_value: float
    estimate_small: float
    estimate_large: float
    std_error: float
    n: int
    model_calls: int


def _frozen(x: np.ndarray, x_prime: np.ndarray, u: SubsetMask) -> np.ndarray:
    return np.where(u.bool_mask(), x, x_prime)


def pf_generate(model, sampler: Sampler, u: SubsetMask, n: int, seed) -> PickFreezeSample:
    """Draw ``X, X'`` and evaluate ``f(X)`` and ``f(X[u], X'[ubar])``."""
    rng = np.random.default_rng(seed)
    x = sampler(rng, n)
    x_prime = sampler(rng, n)
    y = np.asarray(model(x), dtype=float)
    y_pf = np.asarray(model(_frozen(x, x_prime, u)), dtype=float)
    return PickFreezeSample(y, y_pf, u.u, 2 * n)


def pf_generate_nested(
    model, sampler: Sampler, u: SubsetMask, v: SubsetMask, n: int, seed
) -> tuple[PickFreezeSample | None, PickFreezeSample]:
    """Pick-Freeze samples for ``u`` and ``v`` sharing the same ``X`` and ``X'``.

    For ``u`` empty the first element is ``None``: ``S(empty) = 0`` is known
    and costs no model call.
    """
    rng = np.random.default_rng(seed)
    x = sampler(rng, n)
    x_prime = sampler(rng, n)
    y = np.asarray(model(x), dtype=float)
    y_v = np.asarray(model(_frozen(x, x_prime, v)), dtype=float)
    if not u.u:
        return None, PickFreezeSample(y, y_v, v.u, 2 * n)
    y_u = np.asarray(model(_frozen(x, x_prime, u)), dtype=float)
    return PickFreezeSample(y, y_u, u.u, 3 * n), PickFreezeSample(y, y_v, v.u, 3 * n)


def _moments(pf: PickFreezeSample):
    a_i = pf.y * pf.y_pf
    b_i = (pf.y + pf.y_pf) / 2
    c_i = (pf.y**2 + pf.y_pf**2) / 2
    return a_i, b_i, c_i


def pf_estimate(pf: PickFreezeSample) -> float:
    """Symmetrised Pick-Freeze estimator of ``S(u)``."""
    if pf.n < 2:
        raise ValueError("at least two pairs are required")
    a_i, b_i, c_i = _moments(pf)
    m = b_i.mean()
    den = c_i.mean() - m**2
    if den <= 0:
        raise ValueError("output variance is zero")
    return float((a_i.mean() - m**2) / den)


def pf_influence(pf: PickFreezeSample) -> np.ndarray:
    """Delta-method influence terms of :func:`pf_estimate`, one per pair."""
    a_i, b_i, c_i = _moments(pf)
    a, b, c = a_i.mean(), b_i.mean(), c_i.mean()
    den = c - b**2
    if den <= 0:
        raise ValueError("output variance is zero")
    s = (a - b**2) / den
    return ((a_i - a) - 2 * b * (1 - s) * (b_i - b) - s * (c_i - c)) / den


def pf_test(pf_small: PickFreezeSample | None, pf_large: PickFreezeSample) -> PickFreezeReport:
    """One-sided test of ``S(u) = S(v)`` against ``S(u) < S(v)``.

    ``pf_small=None`` stands for ``u`` empty, whose index is exactly 0.
    The studentised difference is referred to the standard normal upper tail.
    """
    s_v = pf_estimate(pf_large)
    psi = pf_influence(pf_large)
    calls = pf_large.model_calls
    if pf_small is None:
        s_u = 0.0
    else:
        if pf_small.n != pf_large.n or not np.array_equal(pf_small.y, pf_large.y):
            raise ValueError("nested Pick-Freeze samples must share their base draws")
        s_u = pf_estimate(pf_small)
        psi = psi - pf_influence(pf_small)
        calls = max(calls, pf_small.model_calls)
    diff = s_v - s_u
    se = float(np.sqrt(np.mean(psi**2) / pf_large.n))
    if se == 0.0:
        if diff == 0.0:
            return PickFreezeReport(0.0, 0.5, s_u, s_v, 0.0, pf_large.n, calls)
        raise ValueError("degenerate variance of the Pick-Freeze difference")
    z = diff / se
    return PickFreezeReport(float(z), float(stats.norm.sf(z)), s_u, s_v, se, pf_large.n, calls)
