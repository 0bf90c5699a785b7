import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from epsobol.core import (
    Design,
    DesignProvenance,
    Sample,
    SubsetMask,
    VacuousHypothesisError,
    bounding_box_design,
    empirical_moment,
    eta_hat,
    sample_rows_design,
    xi_hat,
    xi_hat_vector,
)


def two_row_sample():
    return Sample([1.0, 3.0], [[0.0, 0.0], [1.0, 1.0]])


class TestSample:
    def test_shapes(self):
        s = Sample([1, 2, 3], [[0, 1], [2, 3], [4, 5]])
        assert (s.n, s.p) == (3, 2)

    def test_vector_x_is_one_column(self):
        assert Sample([1, 2], [0.5, 0.7]).p == 1

    @pytest.mark.parametrize("bad", [np.nan, np.inf])
    def test_rejects_non_finite(self, bad):
        with pytest.raises(ValueError):
            Sample([1.0, bad], [[0.0], [1.0]])

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValueError):
            Sample([1.0, 2.0], [[0.0], [1.0], [2.0]])

    def test_restrict(self):
        s = Sample([1, 2], [[1, 2, 3], [4, 5, 6]], ("a", "b", "c"))
        r = s.restrict([2, 0])
        np.testing.assert_array_equal(r.x, [[3, 1], [6, 4]])
        assert r.names == ("c", "a")

    def test_immutable(self):
        s = two_row_sample()
        with pytest.raises(ValueError):
            s.x[0, 0] = 5.0


class TestSubsetMask:
    def test_complement(self):
        m = SubsetMask((2, 0), 4)
        assert m.u == (0, 2)
        assert m.ubar == (1, 3)

    def test_empty_subset_allowed(self):
        m = SubsetMask.of([], 3)
        assert m.u == () and m.ubar == (0, 1, 2)

    def test_full_subset_is_vacuous(self):
        with pytest.raises(VacuousHypothesisError):
            SubsetMask.of([0, 1], 2)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            SubsetMask((3,), 3)


class TestEmpiricalMoment:
    def test_hand_enumeration(self):
        s = Sample([1.0, 3.0], [[0.0], [1.0]])
        assert empirical_moment(s, 1, SubsetMask((0,), 1), [0.5]) == 0.5

    def test_empty_subset_k0_is_one(self):
        s = two_row_sample()
        assert empirical_moment(s, 0, SubsetMask((), 2), [-100.0, -100.0]) == 1.0

    def test_below_minimum_is_zero(self):
        s = two_row_sample()
        assert empirical_moment(s, 1, SubsetMask((0, 1), 2), [-1.0, 5.0]) == 0.0

    def test_ties_are_counted(self):
        s = Sample([2.0, 5.0], [[1.0], [2.0]])
        assert empirical_moment(s, 1, SubsetMask((0,), 1), [1.0]) == 1.0

    def test_second_moment(self):
        s = Sample([2.0, 5.0], [[1.0], [2.0]])
        assert empirical_moment(s, 2, SubsetMask((0,), 1), [3.0]) == (4 + 25) / 2

    def test_bad_order(self):
        with pytest.raises(ValueError):
            empirical_moment(two_row_sample(), 3, SubsetMask((), 2), [0, 0])


class TestXiHat:
    def test_hand_enumeration(self):
        # m1 = 0.5, m1_u = 0.5, m0_ubar = 0.5
        assert xi_hat(two_row_sample(), SubsetMask((0,), 2), [0.5, 0.5]) == 0.25

    def test_constant_response_not_pointwise_zero(self):
        s = Sample([1.0, 1.0], [[0.0, 1.0], [1.0, 0.0]])
        assert xi_hat(s, SubsetMask((0,), 2), [0.5, 0.5]) == -0.25

    def test_dominating_point_gives_zero(self):
        rng = np.random.default_rng(0)
        s = Sample(rng.normal(size=50), rng.normal(size=(50, 3)))
        top = s.x.max(axis=0)
        for u in [(), (0,), (1, 2)]:
            assert xi_hat(s, SubsetMask(u, 3), top) == 0.0

    def test_vector_matches_scalar(self):
        rng = np.random.default_rng(1)
        s = Sample(rng.normal(size=40), rng.uniform(size=(40, 3)))
        d = Design(rng.uniform(size=(7, 3)))
        u = SubsetMask((1,), 3)
        expected = [xi_hat(s, u, x) for x in d.points]
        np.testing.assert_allclose(xi_hat_vector(s, u, d), expected, atol=1e-14)

    def test_eta_components(self):
        s = two_row_sample()
        eta = eta_hat(s, SubsetMask((0,), 2), np.array([[0.5, 0.5]]))
        np.testing.assert_array_equal(eta, [[0.5, 0.5, 0.5]])


sample_strategy = st.integers(2, 12).flatmap(
    lambda n: st.tuples(
        arrays(float, n, elements=st.floats(-5, 5)),
        arrays(float, (n, 3), elements=st.integers(-3, 3).map(float)),
    )
)


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(sample_strategy, st.data())
    def test_permutation_invariance(self, yx, data):
        y, x = yx
        perm = data.draw(st.permutations(range(len(y))))
        point = data.draw(arrays(float, 3, elements=st.integers(-3, 3).map(float)))
        u = SubsetMask(tuple(data.draw(st.sets(st.integers(0, 2), max_size=2))), 3)
        a = xi_hat(Sample(y, x), u, point)
        b = xi_hat(Sample(y[list(perm)], x[list(perm)]), u, point)
        assert a == pytest.approx(b, abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(sample_strategy, st.data())
    def test_k0_monotone(self, yx, data):
        y, x = yx
        s = Sample(y, x)
        lo = data.draw(arrays(float, 3, elements=st.floats(-4, 4)))
        step = data.draw(arrays(float, 3, elements=st.floats(0, 3)))
        for u in [(0,), (0, 2), (0, 1, 2)]:
            m = SubsetMask(u, 3)
            assert empirical_moment(s, 0, m, lo) <= empirical_moment(s, 0, m, lo + step)


def population_xi(support, probs, g, u, x):
    """Exact m1 - m1_u * m0_ubar by enumerating a finite product distribution."""
    p = len(support)
    ubar = [j for j in range(p) if j not in u]
    m1 = m1u = m0 = 0.0
    for idx in itertools.product(*[range(len(s)) for s in support]):
        pt = [support[j][i] for j, i in enumerate(idx)]
        w = np.prod([probs[j][i] for j, i in enumerate(idx)])
        below_u = all(pt[j] <= x[j] for j in u)
        below_ubar = all(pt[j] <= x[j] for j in ubar)
        m1 += w * g[idx] * below_u * below_ubar
        m1u += w * g[idx] * below_u
        m0 += w * below_ubar
    return m1 - m1u * m0


def test_population_xi_vanishes_for_function_of_u():
    support = [np.array([0.0, 1.0, 2.0]), np.array([0.0, 1.0])]
    probs = [np.array([0.2, 0.5, 0.3]), np.array([0.6, 0.4])]
    g = np.array([[1.0, 1.0], [4.0, 4.0], [-2.0, -2.0]])  # depends on X1 only
    for x in itertools.product(*support):
        assert abs(population_xi(support, probs, g, [0], x)) < 1e-12
    g2 = g + np.array([[0.0, 1.0]] * 3)
    assert max(abs(population_xi(support, probs, g2, [0], x)) for x in itertools.product(*support)) > 1e-3


class TestDesigns:
    def test_bounding_box(self):
        rng = np.random.default_rng(2)
        s = Sample(rng.normal(size=30), rng.normal(size=(30, 2)))
        d = bounding_box_design(s, 50, seed=3)
        assert d.K == 50 and d.provenance is DesignProvenance.UNIFORM_BOX
        assert (d.points >= s.x.min(axis=0)).all() and (d.points <= s.x.max(axis=0)).all()

    def test_same_seed_same_design(self):
        s = two_row_sample()
        assert bounding_box_design(s, 5, 1).digest() == bounding_box_design(s, 5, 1).digest()
        assert bounding_box_design(s, 5, 1).digest() != bounding_box_design(s, 5, 2).digest()

    def test_sample_rows_refused_by_default(self):
        with pytest.raises(ValueError):
            sample_rows_design(two_row_sample(), 2, 0)
        d = sample_rows_design(two_row_sample(), 2, 0, allow=True)
        assert d.provenance is DesignProvenance.SAMPLE_ROWS

    def test_project(self):
        d = Design([[1, 2, 3], [4, 5, 6]])
        np.testing.assert_array_equal(d.project([2]).points, [[3], [6]])

    def test_non_finite_design(self):
        with pytest.raises(ValueError):
            Design([[np.nan, 1.0]])
