"""Ishigami-type benchmark and the replication harness behind the level and
power curves."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Sequence

import numpy as np

from .core import Design, DesignProvenance, Sample, SubsetMask
from .pickfreeze import pf_generate_nested, pf_test
from .testing import DEFAULT_K, DEFAULT_MC_DRAWS, DegenerateTestError, Method, ep_test

ALPHA_GRID = np.linspace(0.0, 1.0, 512)
PI = math.pi


def ishigami_variant(x) -> np.ndarray | float:
    """``(2 + x3^4) sin(x1) + 7 sin(x2)^2``; accepts one point or an (n, 3) array."""
    x = np.asarray(x, dtype=float)
    out = (2 + x[..., 2] ** 4) * np.sin(x[..., 0]) + 7 * np.sin(x[..., 1]) ** 2
    return float(out) if out.ndim == 0 else out


def _uniform_pi(rng: np.random.Generator, n: int, p: int) -> np.ndarray:
    return rng.uniform(-PI, PI, size=(n, p))


def uniform_pi_sampler(p: int = 3):
    """Sampler ``(rng, n) -> (n, p)`` array, iid U[-pi, pi] coordinates."""
    return partial(_uniform_pi, p=p)


# Moments under U[-pi, pi]: E sin^2 = 1/2, E sin^4 = 3/8, E x^4 = pi^4/5, E x^8 = pi^8/9.
_VAR_SIN_TERM_GIVEN_1 = (2 + PI**4 / 5) ** 2 / 2
_VAR_SIN_TERM = (4 + 4 * PI**4 / 5 + PI**8 / 9) / 2
_VAR_SQUARE_TERM = 49 * (3 / 8 - 1 / 4)
ISHIGAMI_VARIANCE = _VAR_SIN_TERM + _VAR_SQUARE_TERM


def ishigami_sobol_oracle(u: Sequence[int]) -> float:
    """Closed-form ``S(u)`` for :func:`ishigami_variant` (0-based columns)."""
    u = set(u)
    if not u <= {0, 1, 2}:
        raise ValueError("u must be a subset of {0, 1, 2}")
    var = 0.0
    if 0 in u:
        var += _VAR_SIN_TERM if 2 in u else _VAR_SIN_TERM_GIVEN_1
    if 1 in u:
        var += _VAR_SQUARE_TERM
    return var / ISHIGAMI_VARIANCE


@dataclass(frozen=True)
class BenchModel:
    name: str
    p: int
    evaluate: Callable
    sampler: Callable
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    sobol: Callable | None = None


ISHIGAMI = BenchModel(
    "ishigami-variant", 3, ishigami_variant, uniform_pi_sampler(3), (-PI,) * 3, (PI,) * 3,
    ishigami_sobol_oracle,
)


@dataclass(frozen=True)
class Scenario:
    id: str
    u: tuple[int, ...]
    v: tuple[int, ...]
    null_true: bool
    description: str
    model: BenchModel = ISHIGAMI


SCENARIOS = {
    s.id: s
    for s in (
        Scenario("S3-null", (), (2,), True, "H0: S(3) = 0"),
        Scenario("S23-vs-S2", (1,), (1, 2), True, "H0: S(2,3) = S(2)"),
        Scenario("S1-null", (), (0,), False, "H0: S(1) = 0"),
        Scenario("S13-vs-S1", (0,), (0, 2), False, "H0: S(1,3) = S(1)"),
    )
}


def get_scenario(scenario_id: str) -> Scenario:
    try:
        return SCENARIOS[scenario_id]
    except KeyError:
        raise KeyError(
            f"unknown scenario {scenario_id!r}; valid ids: {', '.join(SCENARIOS)}"
        ) from None


class BenchMethod:
    EP_MC = "EP-MC"
    EP_TSVD = "EP-TSVD"
    PF = "PF"
    ALL = (EP_MC, EP_TSVD, PF)


@dataclass(frozen=True)
class Replication:
    stream: int
    p_value: float
    statistic: float
    dof: int | None
    error: str | None = None


@dataclass
class ReplicationResult:
    scenario: str
    method: str
    n: int
    K: int
    N: int
    seed: int
    tau: float | None
    records: list[Replication] = field(default_factory=list)

    @property
    def p_values(self) -> np.ndarray:
        return np.array([r.p_value for r in self.records if r.error is None])

    @property
    def statistics(self) -> np.ndarray:
        return np.array([r.statistic for r in self.records if r.error is None])

    @property
    def n_errors(self) -> int:
        return sum(r.error is not None for r in self.records)

    def rejection_rate(self, alpha) -> np.ndarray | float:
        """Fraction of successful replications with ``p <= alpha``."""
        p = np.sort(self.p_values)
        a = np.asarray(alpha, dtype=float)
        if p.size == 0:
            out = np.full(a.shape, np.nan)
        else:
            out = np.searchsorted(p, a, side="right") / p.size
        return float(out) if out.ndim == 0 else out

    def ecdf(self, grid: np.ndarray = ALPHA_GRID) -> np.ndarray:
        return self.rejection_rate(grid)

    def records_csv(self, delimiter: str = ",") -> str:
        buf = io.StringIO()
        w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
        w.writerow(["scenario", "method", "n", "K", "seed", "stream", "p_value", "statistic", "dof", "error"])
        for r in self.records:
            w.writerow([
                self.scenario, self.method, self.n, self.K, self.seed, r.stream,
                repr(r.p_value), repr(r.statistic), "" if r.dof is None else r.dof, r.error or "",
            ])
        return buf.getvalue()

    def summary_csv(self, grid: np.ndarray = ALPHA_GRID, delimiter: str = ",") -> str:
        buf = io.StringIO()
        w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
        w.writerow(["scenario", "method", "n", "K", "alpha", "rejection_rate"])
        for a, r in zip(grid, self.ecdf(grid)):
            w.writerow([self.scenario, self.method, self.n, self.K, repr(float(a)), repr(float(r))])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "scenario": self.scenario,
            "method": self.method,
            "n": self.n,
            "K": self.K,
            "N": self.N,
            "seed": self.seed,
            "tau": self.tau,
            "errors": self.n_errors,
            "rejection_rate": {
                str(a): self.rejection_rate(a) for a in (0.01, 0.05, 0.1)
            },
        }


def _stream_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream,)))


def run_one(
    scenario: Scenario, method: str, n: int, K: int, seed: int, stream: int,
    tau: float | None = None, mc_draws: int = DEFAULT_MC_DRAWS,
) -> Replication:
    """One replication: fresh sample, fresh design, one p-value."""
    model = scenario.model
    rng = _stream_rng(seed, stream)
    if method == BenchMethod.PF:
        # n is the model-call budget: 2 calls per row for u empty, 3 otherwise.
        rows = n // (2 if not scenario.u else 3)
        pf_u, pf_v = pf_generate_nested(
            model.evaluate, model.sampler, SubsetMask(scenario.u, model.p),
            SubsetMask(scenario.v, model.p), rows, rng,
        )
        try:
            rep = pf_test(pf_u, pf_v)
        except ValueError as exc:
            return Replication(stream, math.nan, math.nan, None, str(exc))
        return Replication(stream, rep.p_value, rep.statistic, None)

    x = model.sampler(rng, n)
    y = model.evaluate(x)
    v = list(scenario.v)
    sample = Sample(y, x[:, v])
    lo, hi = np.asarray(model.lower)[v], np.asarray(model.upper)[v]
    pts = lo + (hi - lo) * rng.random((K, len(v)))
    design = Design(pts, DesignProvenance.DISTRIBUTION)
    u = SubsetMask.of([v.index(j) for j in scenario.u], len(v))
    ep_method = Method.MC if method == BenchMethod.EP_MC else Method.TSVD
    try:
        rep = ep_test(sample, u, design, ep_method, tau=tau, draws=mc_draws, seed=rng)
    except DegenerateTestError as exc:
        return Replication(stream, math.nan, math.nan, None, str(exc))
    return Replication(stream, rep.p_value, rep.statistic, rep.dof)


def run_replications(
    scenario: Scenario | str,
    method: str = BenchMethod.EP_TSVD,
    n: int = 1000,
    K: int = DEFAULT_K,
    N: int = 1000,
    seed: int = 0,
    tau: float | None = None,
    mc_draws: int = DEFAULT_MC_DRAWS,
    workers: int = 1,
) -> ReplicationResult:
    """Run ``N`` independent replications of one scenario.

    Replication ``i`` draws from its own stream ``SeedSequence(seed,
    spawn_key=(i,))``, so results do not depend on execution order or on
    ``workers``.
    """
    if isinstance(scenario, str):
        scenario = get_scenario(scenario)
    if method not in BenchMethod.ALL:
        raise ValueError(f"unknown method {method!r}; valid: {', '.join(BenchMethod.ALL)}")
    if N < 1:
        raise ValueError("N must be >= 1")
    args = [(scenario, method, n, K, seed, i, tau, mc_draws) for i in range(N)]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            records = list(pool.map(_run_star, args, chunksize=max(1, N // (4 * workers))))
    else:
        records = [run_one(*a) for a in args]
    records.sort(key=lambda r: r.stream)
    return ReplicationResult(scenario.id, method, n, K, N, seed, tau, records)


def _run_star(a):
    return run_one(*a)
