"""Spectral data of density operators.

Eigenvalue/degeneracy spectra (p, m), spectral bounds (alpha), the
block-adapted auxiliary basis, and decomposition of density matrices into
near-degenerate eigenblocks with the zero eigenvalue excluded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (
    LengthMismatch,
    NotAState,
    NotDescending,
    NotNormalized,
)

Array = np.ndarray

NORM_TOL = 1e-12
STATE_TOL = 1e-10


def validate(p, m, norm_tol: float = NORM_TOL, strict: bool = True) -> None:
    """Check that (p, m) is a valid spectral pair.

    p must be positive and (strictly, unless strict=False) descending, m
    positive integers of the same length, and sum_j m_j p_j = 1 within
    norm_tol. Raises NotDescending, NotNormalized, or LengthMismatch.
    """
    p = np.asarray(p, dtype=float)
    m = np.asarray(m, dtype=int)
    if p.ndim != 1 or m.ndim != 1 or p.size != m.size:
        raise LengthMismatch(f"p has length {p.size}, m has length {m.size}")
    if p.size == 0:
        raise LengthMismatch("empty spectrum")
    if np.any(m < 1):
        raise LengthMismatch("degeneracies must be positive integers")
    if np.any(p <= 0.0):
        raise NotDescending("eigenvalues must be positive")
    diffs = p[:-1] - p[1:]
    if strict and np.any(diffs <= 0.0):
        raise NotDescending(f"eigenvalues not strictly descending: {p.tolist()}")
    if not strict and np.any(diffs < -norm_tol):
        raise NotDescending(f"eigenvalues not descending: {p.tolist()}")
    total = float(np.dot(p, m))
    if abs(total - 1.0) > norm_tol:
        raise NotNormalized(f"sum_j m_j p_j = {total!r} != 1")


def check_bound(p, alpha) -> list[int]:
    """Indices j where p_j < alpha_j; empty list means the bound holds."""
    p = np.asarray(p, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if p.shape != alpha.shape:
        raise LengthMismatch(f"p has length {p.size}, alpha has length {alpha.size}")
    return [int(j) for j in np.nonzero(p < alpha)[0]]


def simplex_coords(p, m, norm_tol: float = NORM_TOL) -> Array:
    """Coordinates of (p, m) in the open weighted simplex.

    The coordinates are p itself; the constraint sum_j x_j m_j = 1 is
    verified. The simplex has dimension l - 1.
    """
    validate(p, m, norm_tol=norm_tol)
    return np.asarray(p, dtype=float).copy()


@dataclass(frozen=True)
class EigenprojectorBasis:
    """Block-adapted orthonormal basis of the auxiliary space.

    Basis index q maps to the label (j, a): block j of size m_j, slot a.
    The j-th block projector is the identity on slots of block j.
    """

    m: tuple[int, ...]

    def __post_init__(self):
        if len(self.m) == 0 or any(int(x) < 1 for x in self.m):
            raise LengthMismatch(f"invalid degeneracy spectrum {self.m}")
        object.__setattr__(self, "m", tuple(int(x) for x in self.m))

    @property
    def dim_k(self) -> int:
        return sum(self.m)

    @property
    def blocks(self) -> list[tuple[int, int]]:
        """Half-open index ranges of the blocks."""
        out, start = [], 0
        for mj in self.m:
            out.append((start, start + mj))
            start += mj
        return out

    @property
    def labels(self) -> list[tuple[int, int]]:
        """(j, a) label of each basis index, blocks and slots 1-based."""
        return [(j + 1, a + 1) for j, mj in enumerate(self.m) for a in range(mj)]

    def lambda_mat(self, j: int) -> Array:
        """Projector onto block j (0-based) as a dim_k x dim_k matrix."""
        lam = np.zeros((self.dim_k, self.dim_k), dtype=np.complex128)
        lo, hi = self.blocks[j]
        lam[lo:hi, lo:hi] = np.eye(hi - lo)
        return lam

    def block_diag_part(self, mat: Array) -> Array:
        """sum_j Lambda_j M Lambda_j: zero everything off the blocks."""
        out = np.zeros_like(mat)
        for lo, hi in self.blocks:
            out[lo:hi, lo:hi] = mat[lo:hi, lo:hi]
        return out

    def offblock_norm(self, mat: Array) -> float:
        """Frobenius mass of the entries off the block diagonal."""
        return float(np.linalg.norm(mat - self.block_diag_part(mat)))

    def algebra_basis(self) -> list[Array]:
        """Real basis of the skew-Hermitian block-commuting operators.

        Its span has dimension sum_j m_j^2, matching the gauge group.
        """
        out = []
        for lo, hi in self.blocks:
            for a in range(lo, hi):
                x = np.zeros((self.dim_k, self.dim_k), dtype=np.complex128)
                x[a, a] = 1j
                out.append(x)
                for b in range(a + 1, hi):
                    x = np.zeros((self.dim_k, self.dim_k), dtype=np.complex128)
                    x[a, b], x[b, a] = 1.0, -1.0
                    out.append(x / np.sqrt(2.0))
                    x = np.zeros((self.dim_k, self.dim_k), dtype=np.complex128)
                    x[a, b], x[b, a] = 1j, 1j
                    out.append(x / np.sqrt(2.0))
        return out


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """A density matrix together with its cached spectral data.

    p holds the distinct positive eigenvalues (block means, descending), m
    their multiplicities, frames the per-block orthonormal eigenvector
    matrices, and kernel an orthonormal basis of the zero eigenspace.
    """

    matrix: Array
    p: tuple[float, ...]
    m: tuple[int, ...]
    frames: tuple[Array, ...]
    kernel: Array

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def rank(self) -> int:
        return sum(self.m)

    @property
    def basis(self) -> EigenprojectorBasis:
        return EigenprojectorBasis(self.m)

    @property
    def support_frame(self) -> Array:
        """All support eigenvectors, block by block, as an n x r matrix."""
        return np.concatenate(self.frames, axis=1)

    @property
    def full_frame(self) -> Array:
        """Support eigenvectors followed by kernel vectors; an n x n unitary."""
        if self.kernel.shape[1] == 0:
            return self.support_frame
        return np.concatenate([self.support_frame, self.kernel], axis=1)

    def projector(self, j: int) -> Array:
        """Orthogonal projector onto the eigenspace of p_j (0-based)."""
        f = self.frames[j]
        return f @ f.conj().T

    def kernel_projector(self) -> Array:
        if self.kernel.shape[1] == 0:
            return np.zeros_like(self.matrix)
        return self.kernel @ self.kernel.conj().T


def spectral_decompose(
    rho,
    gap_tol: float = linalg.GAP_TOL,
    zero_tol: float = linalg.ZERO_TOL,
    state_tol: float = STATE_TOL,
) -> DensityOperator:
    """Decompose a density matrix into near-degenerate positive eigenblocks.

    Eigenvalues within gap_tol of each other are merged into one block;
    eigenvalues at or below zero_tol are treated as the excluded zero
    eigenvalue. Raises NotAState if the Hermitian/PSD/unit-trace checks fail.
    """
    rho = linalg.as_cmat(rho)
    if rho.shape[0] != rho.shape[1]:
        raise NotAState(f"not square: {rho.shape}")
    if linalg.herm_deviation(rho) > state_tol * max(1.0, linalg.frob(rho)):
        raise NotAState("not Hermitian within tolerance")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > state_tol:
        raise NotAState(f"trace {tr!r} != 1")
    eig = linalg.hermitian_eig(rho, tol=state_tol)
    if eig.values[-1] < -state_tol:
        raise NotAState(f"negative eigenvalue {eig.values[-1]:.3e}")
    positive = eig.values > zero_tol
    r = int(np.count_nonzero(positive))
    if r == 0:
        raise NotAState("zero rank")
    blocks = linalg.cluster(eig.values[:r], gap_tol)
    p = tuple(float(np.mean(eig.values[lo:hi])) for lo, hi in blocks)
    m = tuple(hi - lo for lo, hi in blocks)
    frames = tuple(eig.frame[:, lo:hi].copy() for lo, hi in blocks)
    kernel = eig.frame[:, r:].copy()
    return DensityOperator(matrix=rho, p=p, m=m, frames=frames, kernel=kernel)


def assemble(p, m, frames) -> Array:
    """Rebuild the density matrix sum_j p_j Psi_j Psi_j^dag from spectral data."""
    validate(p, m, norm_tol=1e-9)
    n = frames[0].shape[0]
    rho = np.zeros((n, n), dtype=np.complex128)
    for pj, f in zip(p, frames):
        rho += pj * (f @ f.conj().T)
    return rho
