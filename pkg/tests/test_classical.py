from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from collapse_lab import (
    ClassicalSystem,
    classical_cmo_check,
    conditional_probability,
    total_probability_check,
    total_variance_check,
)
from collapse_lab.classical import random_system
from collapse_lab.errors import ZeroConditioningEvent


def uniform(n, px=None, py=None):
    px = np.zeros(n) if px is None else px
    py = np.zeros(n) if py is None else py
    return ClassicalSystem(np.full(n, 1 / n), px, py)


class TestConditionalProbability:
    def test_self_conditioning(self):
        sys = uniform(5)
        assert conditional_probability(sys, [1, 3], [1, 3]) == pytest.approx(1.0)

    def test_disjoint(self):
        assert conditional_probability(uniform(5), [0, 1], [2, 3]) == 0.0

    def test_enumeration(self):
        # points 1..4 uniform -> indices 0..3; A = {1, 2}, B = {2, 3}
        assert conditional_probability(uniform(4), [0, 1], [1, 2]) == pytest.approx(0.5)

    def test_zero_event(self):
        sys = ClassicalSystem([0.5, 0.5, 0.0], [0, 0, 1], [0, 0, 0])
        with pytest.raises(ZeroConditioningEvent):
            conditional_probability(sys, [0], [2])

    def test_boolean_masks(self):
        sys = uniform(4)
        assert conditional_probability(sys, np.array([1, 1, 0, 0], bool), np.array([0, 1, 1, 0], bool)) == pytest.approx(0.5)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_relabeling_equivariance(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 20))
        sys = random_system(rng, n)
        a, b = rng.random(n) < 0.5, rng.random(n) < 0.6
        b[0] = True
        perm = rng.permutation(n)
        inv = np.argsort(perm)
        relabeled = ClassicalSystem(sys.distribution[inv], sys.partition_x[inv], sys.partition_y[inv])
        assert conditional_probability(relabeled, a[inv], b[inv]) == pytest.approx(
            conditional_probability(sys, a, b), abs=1e-14
        )


class TestClassicalCMO:
    def test_identity_at_zero(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            sys = random_system(rng, int(rng.integers(1, 30)))
            check = classical_cmo_check(sys)
            assert np.array_equal(check.at_zero, np.eye(len(sys.x_labels)))

    def test_shift_flow_identity_below_threshold(self):
        # N = 6, X cells {0,1}, {2,3}, {4,5}; cyclic shift by one from t = 1 on
        shift = (1.0, [1, 2, 3, 4, 5, 0])
        sys = ClassicalSystem(np.full(6, 1 / 6), [0, 0, 1, 1, 2, 2], np.zeros(6), (shift,))
        check = classical_cmo_check(sys, [0.99, 0.5, 0.1, 1e-6])
        for m in check.matrices:
            assert np.array_equal(m, np.eye(3))
        moved = classical_cmo_check(sys, [1.5, 1.0])
        # shifted cell {1, 2} overlaps X_0 in one point and X_1 in one point
        expected = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
        for m in moved.matrices:
            np.testing.assert_allclose(m, expected, atol=1e-15)

    def test_single_cell(self):
        check = classical_cmo_check(uniform(4), [0.5])
        assert check.at_zero.tolist() == [[1.0]]
        assert check.matrices.tolist() == [[[1.0]]]

    def test_flow_must_be_identity_at_zero(self):
        with pytest.raises(ValueError):
            ClassicalSystem(np.full(2, 0.5), [0, 1], [0, 0], ((0.0, [1, 0]),))
        with pytest.raises(ValueError):
            ClassicalSystem(np.full(2, 0.5), [0, 1], [0, 0], ((1.0, [0, 0]),))

    def test_zero_probability_cell(self):
        sys = ClassicalSystem([0.5, 0.5, 0.0], [0, 0, 1], [0, 0, 0])
        with pytest.raises(ZeroConditioningEvent):
            classical_cmo_check(sys)


def exact_total_probability(dist, px, py):
    """Residual of the law of total probability in rational arithmetic."""
    out = []
    for y in sorted(set(py)):
        p_y = sum(p for p, l in zip(dist, py) if l == y)
        total = Fraction(0)
        for x in sorted(set(px)):
            p_x = sum(p for p, l in zip(dist, px) if l == x)
            p_xy = sum(p for p, lx, ly in zip(dist, px, py) if lx == x and ly == y)
            total += p_x * (p_xy / p_x)
        out.append(p_y - total)
    return out


def exact_total_variance(dist, px, py):
    ys = sorted(set(py))
    p_y = {y: sum(p for p, l in zip(dist, py) if l == y) for y in ys}
    mean = sum(p_y[y] * y for y in ys)
    lhs = sum(p_y[y] * (y - mean) ** 2 for y in ys)
    cond_mean, cond_var, weight = [], [], []
    for x in sorted(set(px)):
        p_x = sum(p for p, l in zip(dist, px) if l == x)
        c = {y: sum(p for p, lx, ly in zip(dist, px, py) if lx == x and ly == y) / p_x for y in ys}
        m = sum(c[y] * y for y in ys)
        cond_mean.append(m)
        cond_var.append(sum(c[y] * (y - m) ** 2 for y in ys))
        weight.append(p_x)
    mm = sum(w * m for w, m in zip(weight, cond_mean))
    rhs = sum(w * v for w, v in zip(weight, cond_var)) + sum(w * (m - mm) ** 2 for w, m in zip(weight, cond_mean))
    return lhs, rhs


def rational_system(rng, n):
    counts = rng.integers(1, 50, n)
    dist = [Fraction(int(c), int(counts.sum())) for c in counts]
    px = [int(v) for v in rng.integers(0, 3, n)]
    py = [int(v) for v in rng.integers(-2, 3, n)]
    return dist, px, py


class TestLawsOfTotalProbabilityAndVariance:
    def test_exact_oracle_residual_is_zero(self):
        rng = np.random.default_rng(8)
        dist, px, py = rational_system(rng, 8)
        assert all(r == 0 for r in exact_total_probability(dist, px, py))
        sys = ClassicalSystem(np.array([float(p) for p in dist]), px, py)
        np.testing.assert_allclose(total_probability_check(sys), 0.0, atol=1e-12)

    def test_x_equals_y(self):
        sys = ClassicalSystem([0.2, 0.3, 0.5], [0, 1, 2], [0, 1, 2])
        np.testing.assert_array_equal(total_probability_check(sys), 0.0)

    def test_random_systems(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            sys = random_system(rng, int(rng.integers(1, 40)))
            assert np.max(np.abs(total_probability_check(sys))) < 1e-12
            assert abs(total_variance_check(sys).residual) < 1e-12

    def test_constant_y(self):
        sys = ClassicalSystem([0.25, 0.25, 0.5], [0, 1, 1], [3.0, 3.0, 3.0])
        tv = total_variance_check(sys)
        assert tv.lhs == pytest.approx(0.0, abs=1e-15) and tv.rhs == pytest.approx(0.0, abs=1e-15)

    def test_x_refines_y(self):
        # each X cell sits inside one Y cell: no conditional spread
        sys = ClassicalSystem([0.1, 0.2, 0.3, 0.4], [0, 1, 2, 3], [-1, -1, 1, 1])
        tv = total_variance_check(sys)
        # conditional means are -1, -1, 1, 1 with weights 0.1..0.4
        mean = -0.3 + 0.7
        assert tv.rhs == pytest.approx(0.3 * (-1 - mean) ** 2 + 0.7 * (1 - mean) ** 2, abs=1e-15)
        assert tv.residual == pytest.approx(0.0, abs=1e-15)

    def test_n10_against_exact_arithmetic(self):
        rng = np.random.default_rng(10)
        dist, px, py = rational_system(rng, 10)
        lhs, rhs = exact_total_variance(dist, px, py)
        assert lhs == rhs
        tv = total_variance_check(ClassicalSystem(np.array([float(p) for p in dist]), px, py))
        assert tv.lhs == pytest.approx(float(lhs), abs=1e-12)
        assert abs(tv.residual) < 1e-12

    def test_zero_probability_x_cell(self):
        sys = ClassicalSystem([0.5, 0.5, 0.0], [0, 0, 1], [0, 1, 0])
        with pytest.raises(ZeroConditioningEvent):
            total_probability_check(sys)
        with pytest.raises(ZeroConditioningEvent):
            total_variance_check(sys)
