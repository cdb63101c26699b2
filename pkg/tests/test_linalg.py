import numpy as np
import numpy.testing as npt
import pytest

from orbitscope.errors import ComplexSpectrum, IllConditioned, MatrixOverflow, NonCommuting
from orbitscope.families import E, family_a, family_d, family_e
from orbitscope.linalg import (
    DilationAlgebra,
    check_commuting,
    epsilon_from_sizes,
    jordan_block_sizes,
    mat_exp,
    rank_tol,
    roots_decompose,
    triangularize,
)

from conftest import series_exp


class TestMatExp:
    def test_zero_scale_is_identity(self):
        rng = np.random.default_rng(0)
        M = rng.standard_normal((4, 4))
        npt.assert_allclose(mat_exp(M, 0.0), np.eye(4), atol=1e-15)

    def test_diagonal_closed_form(self):
        alpha, s = 0.7, 1.3
        got = mat_exp(np.diag([1.0, 0.0, alpha]), s)
        npt.assert_allclose(got, np.diag([np.exp(s), 1.0, np.exp(alpha * s)]), rtol=1e-14)

    def test_nilpotent_truncates(self):
        X = E(2, 1)
        t = 2.5
        npt.assert_allclose(mat_exp(X, t), np.eye(3) + t * X, atol=1e-15)

    def test_matches_series_oracle(self):
        rng = np.random.default_rng(42)
        worst = 0.0
        for _ in range(200):
            n = rng.integers(2, 7)
            M = rng.standard_normal((n, n))
            M *= 2.0 / max(np.linalg.norm(M), 1e-12)
            s = rng.uniform(-1, 1)
            worst = max(worst, np.max(np.abs(mat_exp(M, s) - series_exp(M, s))))
        assert worst < 1e-10

    def test_homomorphism(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            M = rng.standard_normal((3, 3))
            M *= 2.0 / np.linalg.norm(M)
            s, t = rng.uniform(-2, 2, 2)
            lhs = mat_exp(M, s) @ mat_exp(M, t)
            rhs = mat_exp(M, s + t)
            assert np.linalg.norm(lhs - rhs) <= 1e-9 * max(np.linalg.norm(rhs), 1.0)

    def test_det_is_exp_trace(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            M = rng.standard_normal((4, 4))
            s = rng.uniform(-1.5, 1.5)
            det = np.linalg.det(mat_exp(M, s))
            expected = np.exp(s * np.trace(M))
            assert abs(det - expected) <= 1e-9 * abs(expected)

    def test_overflow_reported(self):
        with pytest.raises(MatrixOverflow):
            mat_exp(np.diag([1.0, 1.0]), 1e6)


class TestCheckCommuting:
    def test_case_b_pair(self):
        ok, worst = check_commuting([np.diag([1.0, 0, 1]), np.diag([0.0, 1, 1])])
        assert ok and worst < 1e-15

    def test_case_d_pair(self):
        ok, _ = check_commuting([np.diag([1.0, 1, 0]), E(2, 1)])
        assert ok

    def test_noncommuting_pair(self):
        ok, worst = check_commuting([E(2, 1), E(3, 2)])
        assert not ok
        npt.assert_allclose(worst, 1.0)  # commutator is -e31


class TestRootsDecompose:
    def test_case_e_three_axes(self):
        rd = roots_decompose(family_e())
        assert rd.p == 3
        got = sorted(tuple(np.round(r.real, 9)) for r in rd.roots)
        assert got == [(0.0, 0.0, 1.0), (0.0, 1.0, 0.0), (1.0, 0.0, 0.0)]
        assert all(b.shape[1] == 1 for b in rd.blocks)
        assert not rd.nilpotent_basis

    def test_case_a_merged_complex_pair(self):
        alpha = 1.0
        rd = roots_decompose(family_a(alpha))
        assert rd.p == 2
        complex_roots = [r for r in rd.roots if np.max(np.abs(r.imag)) > 1e-9]
        assert len(complex_roots) == 1
        lam = complex_roots[0]
        npt.assert_allclose(lam[0], 1.0 + 1.0j, atol=1e-9)
        npt.assert_allclose(lam[1], 0.0, atol=1e-9)
        # conjugate-pair convention: positive imaginary part retained
        assert lam.imag[0] > 0

    def test_scalar_algebra(self):
        rd = roots_decompose(DilationAlgebra([np.eye(4)]))
        assert rd.p == 1
        npt.assert_allclose(rd.roots[0], [1.0], atol=1e-12)
        assert rd.blocks[0].shape == (4, 4)

    def test_eigenspace_invariance(self, golden_families):
        for alg in golden_families.values():
            rd = roots_decompose(alg)
            assert sum(b.shape[1] for b in rd.blocks) == alg.n
            for G in alg.generators:
                for V in rd.blocks:
                    resid = np.linalg.norm(G @ V - V @ (V.T @ G @ V))
                    assert resid <= 1e-8 * max(np.linalg.norm(G), 1.0)

    def test_close_roots_raise(self):
        # two distinguishable roots closer than tol: ambiguous clustering
        alg = DilationAlgebra([np.diag([1.0, 1.0 + 1e-4, 2.0])], tol=1e-3)
        with pytest.raises(IllConditioned):
            roots_decompose(alg)

    def test_epsilon_pattern_for_case_d(self):
        rd = roots_decompose(family_d())
        assert len(rd.nilpotent_basis) == 1
        patterns = sorted(rd.epsilon, key=len)
        assert patterns == [(), (1,)]


class TestJordanHelpers:
    def test_sizes_and_epsilon(self):
        N = E(2, 1) + E(3, 2)  # full chain
        assert jordan_block_sizes(N) == [3]
        assert epsilon_from_sizes([3]) == (1, 1)
        assert jordan_block_sizes(E(2, 1)) == [2, 1]
        assert epsilon_from_sizes([2, 1]) == (1, 0)


class TestTriangularize:
    def test_already_triangular(self):
        U = np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]])
        alg = DilationAlgebra([U, U @ U])
        P = triangularize(alg)
        for G in alg.generators:
            T = np.linalg.solve(P, G @ P)
            assert np.max(np.abs(np.tril(T, -1))) < 1e-8

    def test_case_d_lower_triangular(self):
        P = triangularize(family_d())
        for G in family_d().generators:
            T = np.linalg.solve(P, G @ P)
            assert np.max(np.abs(np.tril(T, -1))) < 1e-8

    def test_construct_then_recover(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            U1 = np.triu(rng.standard_normal((3, 3)))
            U2 = np.triu(rng.standard_normal((3, 3)))
            # commuting uppers: polynomials in one matrix
            U2 = 0.3 * U1 + 0.2 * U1 @ U1
            P0 = rng.standard_normal((3, 3)) + 3 * np.eye(3)
            gens = [np.linalg.solve(P0, U @ P0) for U in (U1, U2)]
            try:
                alg = DilationAlgebra(gens)
            except NonCommuting:
                continue
            P = triangularize(alg)
            for G in gens:
                T = np.linalg.solve(P, G @ P)
                assert np.max(np.abs(np.tril(T, -1))) < 1e-7 * max(np.linalg.norm(G), 1)

    def test_complex_spectrum_rejected(self):
        with pytest.raises(ComplexSpectrum):
            triangularize(family_a(1.0))


class TestRankTol:
    def test_zero(self):
        assert rank_tol(np.zeros((3, 3))) == 0

    def test_identity(self):
        assert rank_tol(np.eye(3)) == 3

    def test_rank_one(self):
        assert rank_tol(np.array([[1.0, 2.0], [2.0, 4.0]])) == 1


class TestDilationAlgebra:
    def test_rejects_noncommuting(self):
        with pytest.raises(NonCommuting):
            DilationAlgebra([E(2, 1), E(3, 2)])

    def test_rejects_dependent(self):
        with pytest.raises(ValueError):
            DilationAlgebra([np.eye(3), 2 * np.eye(3)])

    def test_generators_frozen(self, golden_families):
        G = golden_families["d"].generators[0]
        with pytest.raises(ValueError):
            G[0, 0] = 5.0
