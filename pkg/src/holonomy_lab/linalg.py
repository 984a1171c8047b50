"""Dense complex-matrix kernels.

Hermitian eigendecomposition with descending eigenvalues and degeneracy
clustering, polar decomposition, short-time unitary propagator steps, and
the Moore-Penrose pseudoinverse. All matrices are plain complex ndarrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, NonHermitian, RankDeficient, Singular

Array = np.ndarray

HERM_TOL = 1e-10
GAP_TOL = 1e-9
SINGULAR_TOL = 1e-12
ZERO_TOL = 1e-10


def as_cmat(m) -> Array:
    """Coerce input to a finite 2-d complex128 array."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise ValueError("matrix has non-finite entries")
    return a


def herm_deviation(m: Array) -> float:
    """Frobenius norm of the anti-Hermitian part of a square matrix."""
    return float(np.linalg.norm(m - m.conj().T))


def frob(m: Array) -> float:
    return float(np.linalg.norm(m))


@dataclass(frozen=True, eq=False)
class EigResult:
    """Spectral decomposition: descending real eigenvalues and an
    orthonormal frame whose column j pairs with value j."""

    values: Array
    frame: Array


def hermitian_eig(m: Array, tol: float = HERM_TOL) -> EigResult:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Raises NonHermitian if the symmetry check fails and NoConvergence if
    the underlying iteration stalls.
    """
    m = as_cmat(m)
    if m.shape[0] != m.shape[1]:
        raise NonHermitian(f"matrix is not square: {m.shape}")
    if herm_deviation(m) > tol * max(1.0, frob(m)):
        raise NonHermitian(f"Hermiticity deviation {herm_deviation(m):.3e} exceeds {tol:.3e}")
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return EigResult(values=w[::-1].copy(), frame=v[:, ::-1].copy())


def hermitian_eig_stack(ms: Array, tol: float = HERM_TOL) -> tuple[Array, Array]:
    """Batched descending eigendecomposition of a stack (N, n, n) of
    Hermitian matrices. Returns (values (N, n), frames (N, n, n))."""
    ms = np.asarray(ms, dtype=np.complex128)
    dev = np.linalg.norm(ms - np.conj(np.swapaxes(ms, -1, -2)), axis=(-2, -1))
    scale = np.maximum(1.0, np.linalg.norm(ms, axis=(-2, -1)))
    if np.any(dev > tol * scale):
        k = int(np.argmax(dev / scale))
        raise NonHermitian(f"sample {k}: Hermiticity deviation {dev[k]:.3e}")
    try:
        w, v = np.linalg.eigh(ms)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return w[:, ::-1].copy(), v[:, :, ::-1].copy()


def cluster(values, gap_tol: float = GAP_TOL) -> list[tuple[int, int]]:
    """Partition descending values into blocks of near-degenerate entries.

    Consecutive values closer than gap_tol share a block; the returned
    blocks are half-open index ranges (start, stop).
    """
    vals = np.asarray(values, dtype=float)
    if vals.size == 0:
        return []
    blocks = []
    start = 0
    for i in range(1, vals.size):
        if vals[i - 1] - vals[i] > gap_tol:
            blocks.append((start, i))
            start = i
    blocks.append((start, vals.size))
    return blocks


def polar_unitary(m: Array, tol: float = SINGULAR_TOL) -> Array:
    """Unitary factor U of the polar decomposition M = U P.

    P = U^dag M is then Hermitian positive-definite. Raises Singular if the
    smallest singular value is at or below tol.
    """
    m = as_cmat(m)
    u, s, vh = np.linalg.svd(m)
    if m.shape[0] != m.shape[1] or s[-1] <= tol:
        raise Singular(f"smallest singular value {s[-1] if s.size else 0.0:.3e} <= {tol:.3e}")
    return u @ vh


def pinv(w: Array, tol: float = SINGULAR_TOL) -> Array:
    """Moore-Penrose pseudoinverse (W^dag W)^{-1} W^dag of a full-column-rank map."""
    w = as_cmat(w)
    gram = w.conj().T @ w
    eigvals = np.linalg.eigvalsh(gram)
    if eigvals[0] <= tol:
        raise RankDeficient(f"smallest Gram eigenvalue {eigvals[0]:.3e} <= {tol:.3e}")
    return np.linalg.solve(gram, w.conj().T)


def propagator_step(h: Array, dt: float, tol: float = HERM_TOL) -> Array:
    """exp(-i H dt) for Hermitian H, via the spectral decomposition."""
    eig = hermitian_eig(h, tol=tol)
    phases = np.exp(-1j * eig.values * dt)
    return (eig.frame * phases) @ eig.frame.conj().T


def propagator_step_stack(hs: Array, dt: float, tol: float = HERM_TOL) -> Array:
    """Batched exp(-i H dt) over a stack (N, n, n) of Hermitian matrices."""
    vals, frames = hermitian_eig_stack(hs, tol=tol)
    phases = np.exp(-1j * vals * dt)
    return (frames * phases[:, None, :]) @ np.conj(np.swapaxes(frames, -1, -2))
