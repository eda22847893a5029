import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import brute_jacobi_eigenvalues, oracle_singular_values
from tirlab import linalg


def random_orthogonal(n, rng):
    """Product of random plane rotations."""
    q = np.eye(n)
    for _ in range(3 * n * n):
        i, j = rng.choice(n, size=2, replace=False)
        theta = rng.uniform(0, 2 * np.pi)
        g = np.eye(n)
        g[i, i] = g[j, j] = np.cos(theta)
        g[i, j], g[j, i] = -np.sin(theta), np.sin(theta)
        q = g @ q
    return q


matrices = st.tuples(st.integers(1, 12), st.integers(1, 8)).flatmap(
    lambda shape: arrays(np.float64, shape, elements=st.floats(-5, 5, allow_nan=False, width=64))
)


class TestSymEigenvalues:
    def test_diagonal(self, backend):
        np.testing.assert_array_equal(linalg.sym_eigenvalues(np.diag([4.0, 1.0])), [4.0, 1.0])

    def test_rank_one_ones(self, backend):
        np.testing.assert_allclose(linalg.sym_eigenvalues(np.ones((2, 2))), [2.0, 0.0], atol=1e-15)

    def test_random_symmetric_against_brute_force(self, backend):
        rng = np.random.default_rng(5)
        for _ in range(20):
            g = rng.normal(size=(5, 5))
            g = g + g.T
            got = linalg.sym_eigenvalues(g, psd=False)
            np.testing.assert_allclose(got, brute_jacobi_eigenvalues(g.tolist()), atol=1e-8)

    def test_rejects_non_square_and_asymmetric(self):
        with pytest.raises(ValueError):
            linalg.sym_eigenvalues(np.ones((2, 3)))
        with pytest.raises(ValueError):
            linalg.sym_eigenvalues(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_psd_check(self):
        with pytest.raises(ValueError, match="semidefinite"):
            linalg.sym_eigenvalues(np.diag([1.0, -1.0]))
        vals = linalg.sym_eigenvalues(np.diag([1.0, -1e-10]))
        assert vals[-1] == 0.0

    def test_non_convergence_is_an_error(self, monkeypatch):
        monkeypatch.setattr(linalg, "MAX_SWEEPS", 0)
        with pytest.raises(linalg.ConvergenceError):
            linalg.sym_eigenvalues(np.array([[1.0, 0.5], [0.5, 2.0]]))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            linalg.sym_eigenvalues(np.array([[np.nan, 0.0], [0.0, 1.0]]))


class TestSingularValues:
    def test_diagonal(self, backend):
        np.testing.assert_allclose(linalg.singular_values(np.diag([3.0, 4.0])), [4.0, 3.0], atol=1e-15)

    def test_two_identical_columns(self, backend):
        np.testing.assert_allclose(linalg.singular_values(np.ones((2, 2))), [2.0, 0.0], atol=1e-15)

    def test_tall_random_against_gram_oracle(self, backend):
        rng = np.random.default_rng(8)
        for _ in range(10):
            p = rng.uniform(-5, 5, (8, 4))
            np.testing.assert_allclose(linalg.singular_values(p), oracle_singular_values(p.tolist()), atol=1e-8)

    def test_wide_matrix_uses_row_gram(self, backend):
        p = np.random.default_rng(3).normal(size=(3, 7))
        s = linalg.singular_values(p)
        assert s.shape == (3,)
        np.testing.assert_allclose(s, oracle_singular_values(p.tolist()), atol=1e-10)

    def test_explicit_gram_route_matches(self, backend):
        p = np.random.default_rng(4).normal(size=(10, 5))
        np.testing.assert_allclose(linalg.gram_singular_values(p), linalg.singular_values(p), atol=1e-10)

    def test_batch_matches_single(self, backend):
        stack = np.random.default_rng(9).normal(size=(6, 7, 3))
        batch = linalg.batch_singular_values(stack)
        for i in range(6):
            np.testing.assert_allclose(batch[i], linalg.singular_values(stack[i]), atol=1e-14)

    @settings(max_examples=200, deadline=None)
    @given(matrices)
    def test_spectrum_sorted_non_negative_length(self, p):
        s = linalg.singular_values(p)
        assert s.shape == (min(p.shape),)
        assert np.all(s >= 0)
        assert np.all(np.diff(s) <= 0)


class TestNorms:
    def test_nuclear_examples(self):
        assert linalg.nuclear_norm(np.eye(2)) == pytest.approx(2.0, abs=1e-15)
        assert linalg.nuclear_norm(np.diag([3.0, 4.0])) == pytest.approx(7.0, abs=1e-15)

    def test_frobenius_examples(self):
        assert linalg.frobenius_norm([[3.0, 4.0]]) == 5.0
        assert linalg.frobenius_norm(np.zeros((3, 2))) == 0.0

    def test_rank_one_nuclear_equals_frobenius(self, backend):
        rng = np.random.default_rng(21)
        for _ in range(50):
            p = np.outer(rng.normal(size=rng.integers(1, 40)), rng.normal(size=rng.integers(1, 9)))
            assert abs(linalg.nuclear_norm(p) - linalg.frobenius_norm(p)) <= 1e-10 * max(1.0, linalg.frobenius_norm(p))

    def test_frobenius_is_root_sum_of_squared_singular_values(self):
        rng = np.random.default_rng(22)
        for _ in range(50):
            p = rng.uniform(-5, 5, (rng.integers(1, 30), rng.integers(1, 8)))
            s = linalg.singular_values(p)
            assert linalg.frobenius_norm(p) == pytest.approx(math.sqrt(np.sum(s**2)), abs=1e-9)

    @settings(max_examples=300, deadline=None)
    @given(matrices)
    def test_sandwich_bounds(self, p):
        d = min(p.shape)
        nuc, fro = linalg.nuclear_norm(p), linalg.frobenius_norm(p)
        assert nuc / math.sqrt(d) <= fro + 1e-8
        assert fro <= nuc + 1e-8
        assert nuc <= math.sqrt(d) * fro + 1e-8

    def test_orthogonal_invariance(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            m, n = rng.integers(2, 12), rng.integers(2, 6)
            p = rng.uniform(-5, 5, (m, n))
            q = p @ random_orthogonal(n, rng)
            q = random_orthogonal(m, rng) @ q
            assert linalg.nuclear_norm(q) == pytest.approx(linalg.nuclear_norm(p), abs=1e-8)
            assert linalg.frobenius_norm(q) == pytest.approx(linalg.frobenius_norm(p), abs=1e-8)


class TestWeightedNuclearNorm:
    def test_examples(self):
        assert linalg.weighted_nuclear_norm(np.diag([4.0, 1.0]), 2) == pytest.approx(3.0, abs=1e-14)
        assert linalg.weighted_nuclear_norm(np.diag([4.0, 1.0]), 4) == pytest.approx(2.41421356, abs=1e-8)

    def test_k_one_is_nuclear(self):
        p = np.random.default_rng(1).normal(size=(9, 4))
        assert linalg.weighted_nuclear_norm(p, 1) == pytest.approx(linalg.nuclear_norm(p), abs=1e-12)

    def test_zero_singular_values_contribute_nothing(self):
        assert linalg.weighted_nuclear_norm(np.zeros((4, 3)), 3.5) == 0.0
        assert linalg.weighted_nuclear_norm(np.diag([9.0, 0.0]), 2) == pytest.approx(3.0, abs=1e-14)

    def test_rejects_k_below_one(self):
        with pytest.raises(ValueError):
            linalg.weighted_nuclear_norm(np.eye(2), 0.5)

    @given(st.floats(2, 10), st.floats(1e-6, 1e3), st.floats(1e-6, 1e3))
    def test_larger_values_get_smaller_weights(self, k, x, y):
        lo, hi = sorted((x, y))
        w_hi, w_lo = linalg.singular_value_weights(np.array([hi, lo]), k)
        assert w_hi <= w_lo
        assert linalg.singular_value_weights(np.array([0.0]), k)[0] == 0.0


class TestKSchedule:
    def test_endpoints_and_midpoint(self):
        assert linalg.k_schedule(0, 100, 2) == 2.0
        assert linalg.k_schedule(100, 100, 2) == 1.0
        assert linalg.k_schedule(50, 100, 3) == 2.0

    @given(st.integers(1, 500), st.floats(1, 10))
    def test_affine_and_monotone(self, U, k_ini):
        ks = np.array([linalg.k_schedule(u, U, k_ini) for u in range(U + 1)])
        assert ks[0] == k_ini and ks[-1] == 1.0
        assert np.all(np.diff(ks) <= 0)
        if U > 1:
            np.testing.assert_allclose(np.diff(ks), ks[1] - ks[0], atol=1e-12)

    def test_rejects_out_of_range(self):
        for args in [(101, 100, 2), (-1, 100, 2), (0, 100, 0.5), (0, 0, 2)]:
            with pytest.raises(ValueError):
                linalg.k_schedule(*args)
