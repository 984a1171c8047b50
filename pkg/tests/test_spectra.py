import numpy as np
import pytest

from holonomy_lab import spectra
from holonomy_lab.errors import (
    LengthMismatch,
    NotAState,
    NotDescending,
    NotNormalized,
)
from qutil import rand_unitary


class TestValidate:
    def test_pure(self):
        spectra.validate([1.0], [1])

    def test_mixed(self):
        spectra.validate([0.5, 0.25], [1, 2])

    def test_not_descending(self):
        with pytest.raises(NotDescending):
            spectra.validate([0.25, 0.5], [2, 1])

    def test_not_normalized(self):
        with pytest.raises(NotNormalized):
            spectra.validate([0.5, 0.3], [1, 1])

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            spectra.validate([0.5, 0.5], [1])

    def test_nonpositive(self):
        with pytest.raises(NotDescending):
            spectra.validate([1.2, -0.2], [1, 1], norm_tol=1e-6)


class TestSpectralDecompose:
    def test_diagonal(self):
        rho = spectra.spectral_decompose(np.diag([0.7, 0.3]).astype(complex))
        assert rho.p == (0.7, 0.3)
        assert rho.m == (1, 1)
        assert rho.rank == 2
        assert rho.kernel.shape == (2, 0)

    def test_zero_eigenvalue_excluded(self):
        rho = spectra.spectral_decompose(np.diag([0.5, 0.25, 0.25, 0.0]).astype(complex))
        assert np.allclose(rho.p, (0.5, 0.25))
        assert rho.m == (1, 2)
        assert rho.rank == 3
        assert rho.dim == 4
        assert rho.kernel.shape == (4, 1)

    def test_unitary_orbit(self, rng):
        base = np.diag([0.7, 0.3]).astype(complex)
        ref = spectra.spectral_decompose(base)
        for _ in range(5):
            u = rand_unitary(rng, 2)
            rotated = spectra.spectral_decompose(u @ base @ u.conj().T)
            assert np.allclose(rotated.p, ref.p, atol=1e-12)
            assert rotated.m == ref.m
            for j in range(len(ref.m)):
                expected = u @ ref.projector(j) @ u.conj().T
                assert np.linalg.norm(rotated.projector(j) - expected) <= 1e-10

    def test_rejects_non_states(self):
        with pytest.raises(NotAState):
            spectra.spectral_decompose(np.diag([0.7, 0.4]).astype(complex))
        with pytest.raises(NotAState):
            spectra.spectral_decompose(np.diag([1.3, -0.3]).astype(complex))
        with pytest.raises(NotAState):
            spectra.spectral_decompose(np.array([[0.5, 0.5], [0.0, 0.5]]))

    def test_round_trip(self, rng):
        for _ in range(10):
            dim = int(rng.integers(2, 7))
            vals = np.sort(rng.uniform(0.05, 1.0, size=dim))[::-1]
            vals /= vals.sum()
            u = rand_unitary(rng, dim)
            mat = u @ np.diag(vals).astype(complex) @ u.conj().T
            rho = spectra.spectral_decompose(mat)
            rebuilt = spectra.assemble(rho.p, rho.m, rho.frames)
            assert np.linalg.norm(rebuilt - mat) <= 1e-9

    def test_degeneracy_conjugation_invariant(self, rng):
        base = np.diag([0.4, 0.2, 0.2, 0.1, 0.1]).astype(complex)
        m_ref = spectra.spectral_decompose(base).m
        for _ in range(100):
            dim = 5
            u = rand_unitary(rng, dim)
            rho = spectra.spectral_decompose(u @ base @ u.conj().T)
            assert rho.m == m_ref

    def test_frames_blockwise_orthonormal(self, rng):
        u = rand_unitary(rng, 4)
        mat = u @ np.diag([0.5, 0.25, 0.25, 0.0]).astype(complex) @ u.conj().T
        rho = spectra.spectral_decompose(mat)
        full = rho.full_frame
        assert np.linalg.norm(full.conj().T @ full - np.eye(4)) <= 1e-12


class TestCheckBound:
    def test_satisfied(self):
        assert spectra.check_bound([0.7, 0.3], [0.5, 0.1]) == []

    def test_unconstrained(self):
        assert spectra.check_bound([0.7, 0.3], [0.0, 0.0]) == []

    def test_violation_index(self):
        assert spectra.check_bound([0.7, 0.3], [0.8, 0.0]) == [0]

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            spectra.check_bound([0.7, 0.3], [0.5])


class TestSimplexCoords:
    def test_pure(self):
        assert np.allclose(spectra.simplex_coords([1.0], [1]), [1.0])

    def test_weighted(self):
        x = spectra.simplex_coords([0.5, 0.25], [1, 2])
        assert np.allclose(x, [0.5, 0.25])
        assert abs(x @ np.array([1, 2]) - 1.0) <= 1e-12

    def test_weighted_other(self):
        x = spectra.simplex_coords([0.4, 0.2], [2, 1])
        assert abs(x @ np.array([2, 1]) - 1.0) <= 1e-12

    def test_constraint_surface_dimension(self):
        # tangent directions dx with m.dx = 0 span an (l-1)-dim space
        m = np.array([1, 2, 3], dtype=float)
        basis = np.eye(3) - np.outer(m, m) / (m @ m)
        assert np.linalg.matrix_rank(basis, tol=1e-12) == m.size - 1


class TestEigenprojectorBasis:
    def test_blocks_and_labels(self):
        basis = spectra.EigenprojectorBasis(m=(1, 2))
        assert basis.dim_k == 3
        assert basis.blocks == [(0, 1), (1, 3)]
        assert basis.labels == [(1, 1), (2, 1), (2, 2)]

    def test_lambda_projectors(self):
        basis = spectra.EigenprojectorBasis(m=(1, 2))
        lam0, lam1 = basis.lambda_mat(0), basis.lambda_mat(1)
        assert np.allclose(lam0 + lam1, np.eye(3))
        assert np.allclose(lam0 @ lam1, 0)

    def test_algebra_basis_spans_blocks(self):
        basis = spectra.EigenprojectorBasis(m=(1, 2))
        elems = basis.algebra_basis()
        assert len(elems) == 1 + 4  # sum of m_j^2
        for x in elems:
            assert np.linalg.norm(x + x.conj().T) <= 1e-14
            assert basis.offblock_norm(x) <= 1e-14
