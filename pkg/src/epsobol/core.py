"""Shared data model: samples, subset masks, designs and empirical moments.

Column indices are 0-based throughout the Python API.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class VacuousHypothesisError(ValueError):
    """Raised when the tested subset already contains every input."""


@dataclass(frozen=True)
class Sample:
    """An iid sample ``(y_i, x_i)``, ``i = 1..n``.

    The columns of ``x`` are assumed to be independent inputs. This is not
    checked; the test is only valid under that assumption.
    """

    y: np.ndarray
    x: np.ndarray
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        y = np.array(self.y, dtype=float).reshape(-1)
        x = np.array(self.x, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if x.ndim != 2 or x.shape[0] != y.shape[0]:
            raise ValueError(f"shape mismatch: y {y.shape}, x {x.shape}")
        if y.shape[0] < 1 or x.shape[1] < 1:
            raise ValueError("sample needs at least one row and one column")
        if not (np.isfinite(y).all() and np.isfinite(x).all()):
            raise ValueError("sample contains non-finite values")
        if self.names is not None and len(self.names) != x.shape[1]:
            raise ValueError("one name per input column expected")
        y.flags.writeable = False
        x.flags.writeable = False
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)
        if self.names is not None:
            object.__setattr__(self, "names", tuple(self.names))

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def restrict(self, columns: Sequence[int]) -> "Sample":
        """Keep only the given input columns, in the given order."""
        cols = list(columns)
        names = None if self.names is None else tuple(self.names[c] for c in cols)
        return Sample(self.y, self.x[:, cols], names)


@dataclass(frozen=True)
class SubsetMask:
    """A subset ``u`` of the input columns ``{0..p-1}`` and its complement."""

    u: tuple[int, ...]
    p: int

    def __post_init__(self):
        u = tuple(sorted(set(int(j) for j in self.u)))
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if any(j < 0 or j >= self.p for j in u):
            raise ValueError(f"subset {u} out of range for p={self.p}")
        object.__setattr__(self, "u", u)

    @classmethod
    def of(cls, u: Iterable[int], p: int, allow_full: bool = False) -> "SubsetMask":
        mask = cls(tuple(u), p)
        if not allow_full and mask.is_full:
            raise VacuousHypothesisError(
                "u contains every input: xi is identically zero, nothing to test"
            )
        return mask

    @property
    def ubar(self) -> tuple[int, ...]:
        return tuple(j for j in range(self.p) if j not in self.u)

    @property
    def is_full(self) -> bool:
        return len(self.u) == self.p

    @property
    def full(self) -> "SubsetMask":
        return SubsetMask(tuple(range(self.p)), self.p)

    def bool_mask(self) -> np.ndarray:
        m = np.zeros(self.p, dtype=bool)
        m[list(self.u)] = True
        return m


class DesignProvenance(str, enum.Enum):
    USER = "user-supplied"
    UNIFORM_BOX = "uniform-box"
    DISTRIBUTION = "distribution-sampled"
    SAMPLE_ROWS = "sample-rows"


@dataclass(frozen=True)
class Design:
    """``K`` evaluation points in R^p, chosen independently of the sample."""

    points: np.ndarray
    provenance: DesignProvenance = DesignProvenance.USER
    seed: int | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(1, -1)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("design needs at least one point")
        if not np.isfinite(pts).all():
            raise ValueError("design contains non-finite values")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def K(self) -> int:
        return self.points.shape[0]

    @property
    def p(self) -> int:
        return self.points.shape[1]

    def project(self, columns: Sequence[int]) -> "Design":
        return Design(self.points[:, list(columns)], self.provenance, self.seed, dict(self.meta))

    def digest(self) -> str:
        """SHA-256 of the little-endian float64 point matrix and its shape."""
        h = hashlib.sha256()
        h.update(np.asarray(self.points.shape, dtype="<i8").tobytes())
        h.update(np.ascontiguousarray(self.points, dtype="<f8").tobytes())
        return h.hexdigest()


def uniform_box_design(lower, upper, K: int, seed: int | None) -> Design:
    """Draw ``K`` points uniformly in the box ``[lower, upper]``."""
    lower = np.asarray(lower, dtype=float).reshape(-1)
    upper = np.asarray(upper, dtype=float).reshape(-1)
    if K < 1:
        raise ValueError("K must be >= 1")
    rng = np.random.default_rng(seed)
    pts = lower + (upper - lower) * rng.random((K, lower.size))
    return Design(pts, DesignProvenance.UNIFORM_BOX, seed)


def bounding_box_design(sample: Sample, K: int, seed: int | None) -> Design:
    """Uniform design over the coordinatewise [min, max] box of the sample."""
    return uniform_box_design(sample.x.min(axis=0), sample.x.max(axis=0), K, seed)


def sample_rows_design(sample: Sample, K: int, seed: int | None, allow: bool = False) -> Design:
    """Reuse ``K`` observed rows as the design.

    Refused unless ``allow`` is set: a design that is not independent of the
    sample performs poorly.
    """
    if not allow:
        raise ValueError("using sample rows as the design requires allow=True")
    rng = np.random.default_rng(seed)
    idx = rng.choice(sample.n, size=min(K, sample.n), replace=False)
    return Design(sample.x[np.sort(idx)], DesignProvenance.SAMPLE_ROWS, seed)


@dataclass(frozen=True)
class MomentTriple:
    m1: float
    m1_u: float
    m0_ubar: float


def _indicator(x: np.ndarray, point: np.ndarray, cols: Sequence[int]) -> np.ndarray:
    cols = list(cols)
    if not cols:
        return np.ones(x.shape[0], dtype=bool)
    return np.all(x[:, cols] <= point[cols], axis=1)


def empirical_moment(sample: Sample, k: int, u: SubsetMask, x) -> float:
    """``(1/n) sum_i y_i^k 1{x_i[j] <= x[j] for all j in u}``."""
    if k not in (0, 1, 2):
        raise ValueError("k must be 0, 1 or 2")
    point = np.asarray(x, dtype=float).reshape(-1)
    ind = _indicator(sample.x, point, u.u)
    if k == 0:
        return float(np.mean(ind))
    return float(np.mean(sample.y**k * ind))


def moment_triple(sample: Sample, u: SubsetMask, x) -> MomentTriple:
    point = np.asarray(x, dtype=float).reshape(-1)
    return MomentTriple(
        empirical_moment(sample, 1, u.full, point),
        empirical_moment(sample, 1, u, point),
        empirical_moment(sample, 0, SubsetMask(u.ubar, u.p), point),
    )


def xi_hat(sample: Sample, u: SubsetMask, x) -> float:
    """``m1(x) - m1_u(x) * m0_ubar(x)`` evaluated on the sample."""
    t = moment_triple(sample, u, x)
    return t.m1 - t.m1_u * t.m0_ubar


def influence_vectors(sample: Sample, u: SubsetMask, points: np.ndarray) -> np.ndarray:
    """Per-observation vectors whose means are the moment triples.

    Returns an ``(n, K, 3)`` array holding, for each sample row ``i`` and
    design point ``x_k``::

        (y_i 1{x_i <= x_k}, y_i 1{x_i[u] <= x_k[u]}, 1{x_i[ubar] <= x_k[ubar]})
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1)
    le = sample.x[:, None, :] <= pts[None, :, :]  # (n, K, p)
    mask = u.bool_mask()
    ind_u = np.all(le[:, :, mask], axis=2)
    ind_ubar = np.all(le[:, :, ~mask], axis=2)
    y = sample.y[:, None]
    out = np.empty(le.shape[:2] + (3,))
    out[..., 0] = y * (ind_u & ind_ubar)
    out[..., 1] = y * ind_u
    out[..., 2] = ind_ubar
    return out


def eta_hat(sample: Sample, u: SubsetMask, points: np.ndarray) -> np.ndarray:
    """``(K, 3)`` matrix of moment triples at each design point."""
    return influence_vectors(sample, u, points).mean(axis=0)


def xi_hat_vector(sample: Sample, u: SubsetMask, design: Design) -> np.ndarray:
    eta = eta_hat(sample, u, design.points)
    return eta[:, 0] - eta[:, 1] * eta[:, 2]
