"""The two calibrations of the xi-process significance test.

``mc``
    Euclidean statistic ``n * |xi|^2`` compared with the weighted chi-square
    law ``eps^T Sigma eps``, simulated by Monte Carlo.
``tsvd``
    Quadratic form ``n * xi^T Gamma xi`` with ``Gamma`` a truncated-SVD
    inverse of ``Sigma``, compared with ``chi2(rank(Gamma))``.
"""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass

import numpy as np
from scipy import special

from .core import Design, Sample, SubsetMask, VacuousHypothesisError, xi_hat_vector
from .covariance import CovarianceBundle, sigma_hat
from .spectrum import default_tau, eigh, threshold_rule, tsvd_inverse

DEFAULT_MC_DRAWS = 10_000
DEFAULT_K = 10
PSD_TOL = 1e-8


class DegenerateTestError(RuntimeError):
    """The estimated covariance vanishes, so no chi-square calibration exists."""


class Method(str, enum.Enum):
    MC = "MC-weighted-chi2"
    TSVD = "TSVD-chi2"

    @classmethod
    def parse(cls, value) -> "Method":
        if isinstance(value, cls):
            return value
        aliases = {"mc": cls.MC, "tsvd": cls.TSVD}
        key = str(value)
        if key.lower() in aliases:
            return aliases[key.lower()]
        return cls(key)


@dataclass(frozen=True)
class TestReport:
    statistic: float
    method: Method
    p_value: float
    dof: int | None = None
    weights: tuple[float, ...] | None = None
    mc_draws: int | None = None
    seed: int | None = None
    design_digest: str | None = None
    n: int | None = None
    K: int | None = None
    tau: float | None = None
    threshold: float | None = None

    __test__ = False  # not a pytest class

    def to_dict(self) -> dict:
        d = asdict(self)
        d["method"] = self.method.value
        d["weights"] = None if self.weights is None else list(self.weights)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TestReport":
        d = dict(d)
        d["method"] = Method(d["method"])
        if d.get("weights") is not None:
            d["weights"] = tuple(float(w) for w in d["weights"])
        return cls(**d)


def chi2_cdf(x: float, dof: int) -> float:
    """Regularised lower incomplete gamma ``P(dof/2, x/2)``."""
    if dof < 1:
        raise ValueError("dof must be >= 1")
    if x <= 0:
        return 0.0
    return float(special.gammainc(dof / 2.0, x / 2.0))


def chi2_sf(x: float, dof: int) -> float:
    if dof < 1:
        raise ValueError("dof must be >= 1")
    if x <= 0:
        return 1.0
    return float(special.gammaincc(dof / 2.0, x / 2.0))


def stat_euclidean(sample: Sample, u: SubsetMask, design: Design) -> float:
    xi = xi_hat_vector(sample, u, design)
    return float(sample.n * np.sum(xi**2))


def _check_psd(sigma: np.ndarray) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=float)
    lam = np.linalg.eigvalsh((sigma + sigma.T) / 2)
    if lam[0] < -PSD_TOL * (1 + max(lam[-1], 0.0)):
        raise ValueError(f"covariance is not positive semi-definite (min eigenvalue {lam[0]:.3g})")
    return lam


def weighted_chi2_draws(sigma, draws: int, seed) -> np.ndarray:
    """``draws`` independent copies of ``eps^T sigma eps``, ``eps ~ N(0, I)``."""
    sigma = np.asarray(sigma, dtype=float)
    _check_psd(sigma)
    rng = np.random.default_rng(seed)
    eps = rng.standard_normal((draws, sigma.shape[0]))
    return np.einsum("bi,ij,bj->b", eps, sigma, eps)


def pvalue_weighted_chi2(statistic: float, sigma, draws: int = DEFAULT_MC_DRAWS, seed=None) -> float:
    """Monte-Carlo p-value ``(1 + #{q_b >= T}) / (B + 1)``; 1 for ``T <= 0``."""
    if draws < 1000:
        raise ValueError("at least 1000 Monte-Carlo draws are required")
    q = weighted_chi2_draws(sigma, draws, seed)
    if statistic <= 0:
        return 1.0
    return (1 + int(np.count_nonzero(q >= statistic))) / (draws + 1)


def ep_test_mc(
    sample: Sample,
    u: SubsetMask,
    design: Design,
    draws: int = DEFAULT_MC_DRAWS,
    seed=None,
    bundle: CovarianceBundle | None = None,
) -> TestReport:
    bundle = bundle or sigma_hat(sample, u, design)
    T = float(sample.n * np.sum(bundle.xi_hat**2))
    p = pvalue_weighted_chi2(T, bundle.sigma_hat, draws, seed)
    lam = np.clip(eigh(bundle.sigma_hat).eigenvalues, 0.0, None)
    return TestReport(
        statistic=T,
        method=Method.MC,
        p_value=p,
        weights=tuple(float(w) for w in lam),
        mc_draws=draws,
        seed=int(seed) if isinstance(seed, (int, np.integer)) else None,
        design_digest=design.digest(),
        n=sample.n,
        K=design.K,
    )


def stat_normalized(
    sample: Sample,
    u: SubsetMask,
    design: Design,
    tau: float | None = None,
    bundle: CovarianceBundle | None = None,
) -> TestReport:
    """TSVD-normalised statistic and its ``chi2(r)`` p-value.

    Raises
    ------
    DegenerateTestError
        If no eigenvalue of the estimated covariance exceeds the threshold.
    """
    bundle = bundle or sigma_hat(sample, u, design)
    dec = eigh(bundle.sigma_hat)
    tau = default_tau(sample.n) if tau is None else float(tau)
    t = threshold_rule(dec, sample.n, tau)
    reg = tsvd_inverse(dec, t)
    if reg.rank == 0:
        raise DegenerateTestError("estimated covariance is zero; the test is undefined")
    xi = bundle.xi_hat
    T = max(float(sample.n * xi @ reg.gamma_hat @ xi), 0.0)
    return TestReport(
        statistic=T,
        method=Method.TSVD,
        p_value=chi2_sf(T, reg.rank),
        dof=reg.rank,
        design_digest=design.digest(),
        n=sample.n,
        K=design.K,
        tau=tau,
        threshold=t,
    )


def ep_test(
    sample: Sample,
    u: SubsetMask,
    design: Design,
    method="tsvd",
    tau: float | None = None,
    draws: int = DEFAULT_MC_DRAWS,
    seed=None,
) -> TestReport:
    """Test ``H0: S(u) = S`` for the inputs held in ``sample``."""
    if u.p != sample.p or design.p != sample.p:
        raise ValueError("sample, subset and design dimensions differ")
    if u.is_full:
        raise VacuousHypothesisError("u contains every input")
    method = Method.parse(method)
    if method is Method.MC:
        return ep_test_mc(sample, u, design, draws, seed)
    return stat_normalized(sample, u, design, tau)
