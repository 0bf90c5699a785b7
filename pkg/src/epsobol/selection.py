"""Nested-subset hypotheses on a single sample and stepwise selection.

Every test restricts the sample to the columns ``v`` and tests
``H0: S(u) = S(v)`` inside them, so all hypotheses reuse one data set and one
design drawn over the full input space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .core import Design, Sample, SubsetMask, VacuousHypothesisError
from .testing import DEFAULT_MC_DRAWS, DegenerateTestError, TestReport, ep_test


class SubsetError(ValueError):
    pass


def nested_test(
    sample: Sample,
    u: Sequence[int],
    v: Sequence[int],
    design: Design,
    method="tsvd",
    tau: float | None = None,
    draws: int = DEFAULT_MC_DRAWS,
    seed=None,
) -> TestReport:
    """Test ``H0: S(u) = S(v)`` with column indices of ``sample``."""
    u_set, v_set = set(u), set(v)
    if not u_set <= v_set:
        raise SubsetError("u must be a subset of v")
    if u_set == v_set:
        raise VacuousHypothesisError("u = v: vacuous hypothesis")
    v_cols = sorted(v_set)
    inner = SubsetMask.of([v_cols.index(j) for j in sorted(u_set)], len(v_cols))
    return ep_test(
        sample.restrict(v_cols), inner, design.project(v_cols), method, tau=tau, draws=draws, seed=seed
    )


@dataclass
class Decision:
    action: str  # "add" or "drop"
    input: str
    p_value: float


@dataclass
class SelectionState:
    included: list[str]
    screen: dict[str, dict] = field(default_factory=dict)
    add: dict[str, dict] = field(default_factory=dict)
    drop: dict[str, dict] = field(default_factory=dict)
    global_test: dict | None = None
    history: list[Decision] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "included": list(self.included),
            "screen": self.screen,
            "add": self.add,
            "drop": self.drop,
            "global": self.global_test,
            "history": [vars(d) for d in self.history],
        }


def _safe(report_fn) -> dict:
    try:
        return report_fn().to_dict()
    except DegenerateTestError as exc:
        return {"error": str(exc), "p_value": None}


class Selector:
    """Runs the screening, add/drop and global tests for one sample."""

    def __init__(self, sample: Sample, design: Design, method="tsvd", tau=None,
                 draws: int = DEFAULT_MC_DRAWS, seed=None):
        if sample.names is None:
            raise ValueError("sample columns must be named")
        self.sample = sample
        self.design = design
        self.kw = dict(method=method, tau=tau, draws=draws, seed=seed)
        self.names = list(sample.names)
        self.tests_run = 0

    def _idx(self, names) -> list[int]:
        return [self.names.index(n) for n in names]

    def test(self, u_names, v_names) -> dict:
        self.tests_run += 1
        return _safe(lambda: nested_test(self.sample, self._idx(u_names), self._idx(v_names), self.design, **self.kw))

    def screen(self) -> dict[str, dict]:
        """``H0: S(j) = 0`` for each input ``j``."""
        return {j: self.test([], [j]) for j in self.names}

    def add_candidates(self, included: Sequence[str]) -> dict[str, dict]:
        """``H0: S(I) = S(I + j)`` for each excluded ``j``."""
        inc = list(included)
        return {j: self.test(inc, inc + [j]) for j in self.names if j not in inc}

    def drop_candidates(self, included: Sequence[str]) -> dict[str, dict]:
        """``H0: S(I - j) = S(I)`` for each included ``j``."""
        inc = list(included)
        return {j: self.test([k for k in inc if k != j], inc) for j in inc}

    def global_test(self, included: Sequence[str]) -> dict | None:
        """``H0: S(I) = S`` over all inputs; ``None`` when ``I`` is everything."""
        if set(included) == set(self.names):
            return None
        return self.test(list(included), self.names)

    def run(self, included: Sequence[str] = (), greedy_alpha: float | None = None,
            max_steps: int | None = None) -> SelectionState:
        unknown = [j for j in included if j not in self.names]
        if unknown:
            raise SubsetError(f"unknown inputs: {', '.join(unknown)}")
        inc = [j for j in self.names if j in set(included)]
        state = SelectionState(inc)
        state.screen = self.screen()
        if greedy_alpha is not None:
            inc = self._greedy(inc, greedy_alpha, state, max_steps or 4 * len(self.names))
            state.included = inc
        if inc:
            state.add = self.add_candidates(inc)
            state.drop = self.drop_candidates(inc)
        state.global_test = self.global_test(inc)
        return state

    def _greedy(self, inc, alpha, state, max_steps):
        seen = {frozenset(inc)}
        for _ in range(max_steps):
            adds = self.add_candidates(inc) if inc else state.screen
            pv = {j: r["p_value"] for j, r in adds.items() if r.get("p_value") is not None}
            if pv:
                j = min(pv, key=lambda k: (pv[k], self.names.index(k)))
                nxt = [k for k in self.names if k in set(inc) | {j}]
                if pv[j] < alpha and frozenset(nxt) not in seen:
                    state.history.append(Decision("add", j, pv[j]))
                    inc = nxt
                    seen.add(frozenset(inc))
                    continue
            if inc:
                drops = self.drop_candidates(inc)
                pv = {j: r["p_value"] for j, r in drops.items() if r.get("p_value") is not None}
                if pv:
                    j = max(pv, key=lambda k: (pv[k], -self.names.index(k)))
                    nxt = [k for k in inc if k != j]
                    if pv[j] > alpha and frozenset(nxt) not in seen:
                        state.history.append(Decision("drop", j, pv[j]))
                        inc = nxt
                        seen.add(frozenset(inc))
                        continue
            break
        return inc
