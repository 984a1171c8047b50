"""Amplitude bundle over the isodegenerate density operators.

Amplitudes W with W^dag W block-scalar in the adapted auxiliary basis,
block-diagonal gauge unitaries, the connection one-form and its
vertical/horizontal splitting, discrete horizontal lifts by polar-aligned
eigenframe transport, holonomies of closed curves, and the induced metric
on the state space.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import linalg
from .curves import OperatorCurve, grid_derivative
from .errors import (
    DegeneracyMismatch,
    EndpointMismatch,
    GaugeViolation,
    MultiplicityChange,
    NotClosed,
    NotTangent,
    Singular,
)
from .spectra import DensityOperator, EigenprojectorBasis, spectral_decompose

Array = np.ndarray

logger = logging.getLogger(__name__)

AMPLITUDE_TOL = 1e-9
GAUGE_TOL = 1e-9
CLOSED_TOL = 1e-8
OFFBLOCK_TOL = 1e-6
TANGENT_TOL = 1e-6
PROJECTION_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Amplitude:
    """Linear map W from the auxiliary space into the system space whose
    Gram matrix W^dag W is block-scalar with descending values."""

    w: Array
    basis: EigenprojectorBasis

    def __post_init__(self):
        w = linalg.as_cmat(self.w)
        object.__setattr__(self, "w", w)
        if w.shape[1] != self.basis.dim_k:
            raise DegeneracyMismatch(f"W has {w.shape[1]} columns, basis needs {self.basis.dim_k}")
        gram = w.conj().T @ w
        if self.basis.offblock_norm(gram) > AMPLITUDE_TOL * max(1.0, linalg.frob(gram)):
            raise DegeneracyMismatch("W^dag W is not block diagonal")
        q = []
        for lo, hi in self.basis.blocks:
            block = gram[lo:hi, lo:hi]
            qj = float(np.mean(np.diag(block).real))
            if linalg.frob(block - qj * np.eye(hi - lo)) > AMPLITUDE_TOL:
                raise DegeneracyMismatch("W^dag W block is not scalar")
            q.append(qj)
        if any(q[j] - q[j + 1] < -AMPLITUDE_TOL for j in range(len(q) - 1)) or q[-1] <= 0.0:
            raise DegeneracyMismatch(f"block values not positive descending: {q}")
        object.__setattr__(self, "_block_values", tuple(q))

    @property
    def block_values(self) -> tuple[float, ...]:
        """The descending scalars q_j with W^dag W = sum_j q_j Lambda_j."""
        return self._block_values

    @property
    def dim_h(self) -> int:
        return self.w.shape[0]


@dataclass(frozen=True, eq=False)
class GaugeElement:
    """Unitary on the auxiliary space commuting with every block projector."""

    u: Array
    basis: EigenprojectorBasis

    def __post_init__(self):
        u = linalg.as_cmat(self.u)
        object.__setattr__(self, "u", u)
        if not gauge_membership(u, self.basis, tol=GAUGE_TOL):
            raise GaugeViolation("matrix is not a block-diagonal unitary")


@dataclass(frozen=True, eq=False)
class ConnectionValue:
    """Value of the connection form: skew-Hermitian and block-diagonal."""

    a: Array
    basis: EigenprojectorBasis

    def __post_init__(self):
        a = linalg.as_cmat(self.a)
        object.__setattr__(self, "a", a)
        dev = max(linalg.frob(a + a.conj().T), self.basis.offblock_norm(a))
        if dev > GAUGE_TOL * max(1.0, linalg.frob(a)):
            raise GaugeViolation(f"not a gauge algebra element (deviation {dev:.3e})")


def gauge_membership(u: Array, basis: EigenprojectorBasis, tol: float = GAUGE_TOL) -> bool:
    """True iff u is unitary and commutes with every block projector."""
    u = linalg.as_cmat(u)
    if u.shape != (basis.dim_k, basis.dim_k):
        return False
    unit_dev = linalg.frob(u.conj().T @ u - np.eye(basis.dim_k))
    return unit_dev <= tol * max(1.0, linalg.frob(u)) and basis.offblock_norm(u) <= tol * max(1.0, linalg.frob(u))


def project(amp: Amplitude, gap_tol: float = linalg.GAP_TOL) -> DensityOperator:
    """Bundle projection W -> W W^dag."""
    return spectral_decompose(amp.w @ amp.w.conj().T, gap_tol=gap_tol)


def canonical_amplitude(rho: DensityOperator, basis: EigenprojectorBasis | None = None) -> Amplitude:
    """Amplitude whose block-j columns are sqrt(p_j) times the eigenframe."""
    basis = basis if basis is not None else rho.basis
    if tuple(basis.m) != tuple(rho.m):
        raise DegeneracyMismatch(f"basis m={basis.m} but state has m={rho.m}")
    cols = [np.sqrt(pj) * f for pj, f in zip(rho.p, rho.frames)]
    return Amplitude(w=np.concatenate(cols, axis=1), basis=basis)


def metric_G(wdot1: Array, wdot2: Array) -> float:
    """Riemannian metric on amplitudes: Re tr(Wdot1^dag Wdot2)."""
    wdot1, wdot2 = linalg.as_cmat(wdot1), linalg.as_cmat(wdot2)
    if wdot1.shape != wdot2.shape:
        raise DegeneracyMismatch(f"shape mismatch {wdot1.shape} vs {wdot2.shape}")
    return float(np.real(np.sum(wdot1.conj() * wdot2)))


def connection_form(amp: Amplitude, wdot: Array) -> ConnectionValue:
    """Connection form value (1/2) sum_j Lambda_j (W^+ Wdot - h.c.) Lambda_j."""
    wdot = linalg.as_cmat(wdot)
    if wdot.shape != amp.w.shape:
        raise DegeneracyMismatch(f"Wdot shape {wdot.shape} != W shape {amp.w.shape}")
    p = linalg.pinv(amp.w) @ wdot
    return ConnectionValue(a=amp.basis.block_diag_part(0.5 * (p - p.conj().T)), basis=amp.basis)


def connection_form_isospectral(amp: Amplitude, wdot: Array, tangent_tol: float = 1e-8) -> ConnectionValue:
    """Connection form sum_j p_j^{-1} Lambda_j W^dag Wdot Lambda_j.

    Valid only on tangents to the isospectral amplitude space, i.e. when
    Wdot^dag W = -W^dag Wdot; raises NotTangent otherwise.
    """
    wdot = linalg.as_cmat(wdot)
    if wdot.shape != amp.w.shape:
        raise DegeneracyMismatch(f"Wdot shape {wdot.shape} != W shape {amp.w.shape}")
    b = amp.w.conj().T @ wdot
    dev = linalg.frob(b + b.conj().T)
    if dev > tangent_tol * max(1.0, linalg.frob(b)):
        raise NotTangent(f"not an isospectral tangent (deviation {dev:.3e})")
    a = np.zeros_like(b)
    for (lo, hi), qj in zip(amp.basis.blocks, amp.block_values):
        a[lo:hi, lo:hi] = b[lo:hi, lo:hi] / qj
    return ConnectionValue(a=a, basis=amp.basis)


def split(amp: Amplitude, wdot: Array) -> tuple[Array, Array]:
    """Split a tangent into (vertical, horizontal) = (W A(Wdot), rest)."""
    a = connection_form(amp, wdot)
    vertical = amp.w @ a.a
    return vertical, np.asarray(wdot, dtype=np.complex128) - vertical


# ---------------------------------------------------------------------------
# tangent lifts and the induced metric on the state space


def _lift_tangents(lam: Array, frames: Array, blocks: list[tuple[int, int]], r: int,
                   rdots: Array, tangent_tol: float) -> Array:
    """Horizontal lifts of state tangents, in eigenbasis coordinates.

    lam (N, n) holds per-sample eigenvalues (block means repeated, zeros on
    the kernel), frames (N, n, n) the matching eigenvector stacks, rdots
    (N, n, n) Hermitian tangents. Returns (N, n, r) lifted tangents; raises
    NotTangent when reprojection misses rdot by more than tangent_tol
    (relative).
    """
    n = lam.shape[1]
    big = frames.conj().transpose(0, 2, 1) @ rdots @ frames
    blk_id = np.full(n, len(blocks), dtype=int)
    for j, (lo, hi) in enumerate(blocks):
        blk_id[lo:hi] = j
    same = blk_id[:, None] == blk_id[None, :]
    denom = lam[:, None, :] - lam[:, :, None]
    denom[:, same] = 1.0
    K = np.where(same[None, :, :], 0.0, 1j * big / denom)
    sqrtp = np.sqrt(lam[:, :r])
    wt = -1j * K[:, :, :r] * sqrtp[:, None, :]
    diag = np.real(np.einsum("kii->ki", big))
    for j, (lo, hi) in enumerate(blocks):
        pdot = np.mean(diag[:, lo:hi], axis=1)
        wt[:, range(lo, hi), range(lo, hi)] += (pdot / (2.0 * np.sqrt(lam[:, lo])))[:, None]
    # reproject and compare: the defect is the non-tangent component of rdot
    e = np.zeros_like(big)
    e[:, :, :r] = wt * sqrtp[:, None, :]
    residual = e + e.conj().transpose(0, 2, 1) - big
    res = np.linalg.norm(residual, axis=(1, 2))
    scale = np.maximum(1.0, np.linalg.norm(big, axis=(1, 2)))
    worst = int(np.argmax(res / scale))
    if res[worst] > tangent_tol * scale[worst]:
        raise NotTangent(f"sample {worst}: lift residual {res[worst]:.3e} exceeds tolerance")
    return wt


def _state_eigendata(rho: DensityOperator) -> tuple[Array, Array, list[tuple[int, int]], int]:
    lam = np.concatenate([np.repeat(rho.p, rho.m), np.zeros(rho.dim - rho.rank)])
    blocks, start = [], 0
    for mj in rho.m:
        blocks.append((start, start + mj))
        start += mj
    return lam[None, :], rho.full_frame[None, :, :], blocks, rho.rank


def path_speeds_sq(spath: "SpectralPath", rdots: Array, tangent_tol: float = TANGENT_TOL) -> Array:
    """Squared metric speeds g(rdot, rdot) along a decomposed state path."""
    wt = _lift_tangents(spath.support_lam(), spath.frames, spath.blocks, spath.rank,
                        rdots, tangent_tol)
    return np.real(np.sum(np.abs(wt) ** 2, axis=(1, 2)))


def metric_g(rho: DensityOperator, rdot1: Array, rdot2: Array, tangent_tol: float = TANGENT_TOL) -> float:
    """Induced metric on the state space, evaluated by horizontal lifting.

    The value is independent of the choice of amplitude over rho. Raises
    NotTangent if either argument fails to be tangent to the fixed-degeneracy
    stratum at rho within tangent_tol.
    """
    lam, frames, blocks, r = _state_eigendata(rho)
    rd1 = linalg.as_cmat(rdot1)[None, :, :]
    rd2 = linalg.as_cmat(rdot2)[None, :, :]
    w1 = _lift_tangents(lam, frames, blocks, r, rd1, tangent_tol)[0]
    w2 = _lift_tangents(lam, frames, blocks, r, rd2, tangent_tol)[0]
    return float(np.real(np.sum(w1.conj() * w2)))


# ---------------------------------------------------------------------------
# spectral paths, discrete transport, holonomy


@dataclass(frozen=True, eq=False)
class SpectralPath:
    """Per-sample eigendata of a curve of density operators with constant
    multiplicity structure. values/frames cover the full space, descending;
    the first r columns are the support, block j spanning blocks[j]."""

    values: Array
    frames: Array
    blocks: list[tuple[int, int]]
    m: tuple[int, ...]

    @property
    def rank(self) -> int:
        return sum(self.m)

    def block_means(self) -> Array:
        """(N, l) per-sample block-averaged eigenvalues."""
        return np.stack([np.mean(self.values[:, lo:hi], axis=1) for lo, hi in self.blocks], axis=1)

    def support_lam(self) -> Array:
        """(N, n) block means repeated within blocks, zeros on the kernel."""
        out = np.zeros_like(self.values)
        means = self.block_means()
        for j, (lo, hi) in enumerate(self.blocks):
            out[:, lo:hi] = means[:, j : j + 1]
        return out


def decompose_path(curve: OperatorCurve, gap_tol: float = linalg.GAP_TOL,
                   zero_tol: float = linalg.ZERO_TOL) -> SpectralPath:
    """Eigendecompose every sample and check the block structure is constant.

    Aborts with MultiplicityChange whenever the rank changes, the clustering
    changes, or an inter-block gap dips below 10x gap_tol at any sample.
    """
    vals, frames = linalg.hermitian_eig_stack(curve.samples, tol=1e-8)
    n = vals.shape[1]
    positive0 = vals[0] > zero_tol
    r = int(np.count_nonzero(positive0))
    if r == 0:
        raise MultiplicityChange("initial sample has zero rank")
    blocks = linalg.cluster(vals[0, :r], gap_tol)
    if np.any(vals[:, r - 1] <= zero_tol):
        raise MultiplicityChange("rank drops along the curve")
    if r < n and np.any(vals[:, r] > zero_tol):
        raise MultiplicityChange("rank grows along the curve")
    for lo, hi in blocks:
        if hi - lo > 1 and np.any(vals[:, lo : hi - 1] - vals[:, lo + 1 : hi] > gap_tol):
            raise MultiplicityChange("eigenvalue block splits along the curve")
        if hi < r and np.any(vals[:, hi - 1] - vals[:, hi] < 10.0 * gap_tol):
            raise MultiplicityChange("inter-block gap closes along the curve")
    return SpectralPath(values=vals, frames=frames, blocks=blocks, m=tuple(hi - lo for lo, hi in blocks))


def _transport_frames(spath: SpectralPath, frames0: Array, singular_tol: float = 1e-8) -> Array:
    """Discretely parallel-transport initial support frames along the path.

    Per block and per step the new eigenframe is right-aligned by the
    unitary polar factor of the overlap, which makes each consecutive block
    overlap Hermitian positive. Returns the (N, n, r) transported frames.
    """
    nsamp, n, _ = spath.frames.shape
    r = spath.rank
    out = np.empty((nsamp, n, r), dtype=np.complex128)
    for lo, hi in spath.blocks:
        raw = spath.frames[:, :, lo:hi]
        mj = hi - lo
        s0 = raw[0].conj().T @ frames0[:, lo:hi]
        if mj == 1:
            z = np.einsum("kn,kn->k", raw[:-1, :, 0].conj(), raw[1:, :, 0])
            mags = np.abs(z)
            if np.any(mags <= singular_tol):
                raise Singular("consecutive eigenvector overlap vanishes")
            steps = np.concatenate([[complex(linalg.polar_unitary(s0)[0, 0])], (z / mags).conj()])
            out[:, :, lo:hi] = raw * np.cumprod(steps)[:, None, None]
        else:
            overlaps = np.einsum("kna,knb->kab", raw[:-1].conj(), raw[1:])
            u, s, vh = np.linalg.svd(overlaps)
            if np.any(s[:, -1] <= singular_tol):
                raise Singular("consecutive eigenframe overlap is singular")
            uf = u @ vh
            cur = linalg.polar_unitary(s0)
            out[0, :, lo:hi] = raw[0] @ cur
            for k in range(nsamp - 1):
                cur = uf[k].conj().T @ cur
                out[k + 1, :, lo:hi] = raw[k + 1] @ cur
    return out


def _assemble_lift(spath: SpectralPath, frames_t: Array) -> Array:
    """Amplitude samples sqrt(p_{j;t}) on block j applied to the frames."""
    scale = np.sqrt(spath.support_lam()[:, : spath.rank])
    return frames_t * scale[:, None, :]


def horizontal_lift(rho_curve: OperatorCurve, w0: Amplitude,
                    gap_tol: float = linalg.GAP_TOL, zero_tol: float = linalg.ZERO_TOL,
                    proj_tol: float = PROJECTION_TOL) -> OperatorCurve:
    """Discrete horizontal lift of a state curve starting at the amplitude w0.

    The lift projects back onto the curve and its consecutive block frame
    overlaps are Hermitian positive (the discrete horizontality condition).
    """
    spath = decompose_path(rho_curve, gap_tol=gap_tol, zero_tol=zero_tol)
    samples = _lift_samples(rho_curve, spath, w0, proj_tol)
    return OperatorCurve(grid=rho_curve.grid, samples=samples)


def _lift_samples(rho_curve: OperatorCurve, spath: SpectralPath, w0: Amplitude, proj_tol: float) -> Array:
    if tuple(w0.basis.m) != spath.m:
        raise DegeneracyMismatch(f"amplitude basis m={w0.basis.m}, curve has m={spath.m}")
    defect = linalg.frob(w0.w @ w0.w.conj().T - rho_curve.samples[0])
    if defect > proj_tol:
        raise EndpointMismatch(f"W0 projects {defect:.3e} away from the initial state")
    p0 = spath.block_means()[0]
    frames0 = np.concatenate(
        [w0.w[:, lo:hi] / np.sqrt(p0[j]) for j, (lo, hi) in enumerate(spath.blocks)], axis=1
    )
    frames_t = _transport_frames(spath, frames0)
    samples = _assemble_lift(spath, frames_t)
    samples[0] = w0.w
    return samples


def transported_frame(rho_curve: OperatorCurve, frames0, gap_tol: float = linalg.GAP_TOL,
                      zero_tol: float = linalg.ZERO_TOL, tol: float = PROJECTION_TOL) -> Array:
    """Parallel-transport initial eigenframes along the curve.

    frames0 may be an (n, r) matrix or a sequence of per-block matrices; it
    must diagonalize the initial sample blockwise. Returns an (N, n, r)
    array of transported frames.
    """
    if not isinstance(frames0, np.ndarray):
        frames0 = np.concatenate([np.asarray(f, dtype=np.complex128) for f in frames0], axis=1)
    spath = decompose_path(rho_curve, gap_tol=gap_tol, zero_tol=zero_tol)
    r = spath.rank
    if frames0.shape != (rho_curve.samples.shape[1], r):
        raise DegeneracyMismatch(f"frames have shape {frames0.shape}, expected {(rho_curve.samples.shape[1], r)}")
    rho0 = rho_curve.samples[0]
    means0 = spath.block_means()[0]
    for j, (lo, hi) in enumerate(spath.blocks):
        f = frames0[:, lo:hi]
        ortho = linalg.frob(f.conj().T @ f - np.eye(hi - lo))
        eig_defect = linalg.frob(rho0 @ f - means0[j] * f)
        if max(ortho, eig_defect) > tol:
            raise EndpointMismatch(f"block {j}: frames do not diagonalize the initial sample")
    return _transport_frames(spath, frames0)


def holonomy(rho_curve: OperatorCurve, w0: Amplitude,
             gap_tol: float = linalg.GAP_TOL, zero_tol: float = linalg.ZERO_TOL,
             closed_tol: float = CLOSED_TOL, offblock_tol: float = OFFBLOCK_TOL) -> GaugeElement:
    """Holonomy of a closed state curve at the amplitude w0.

    Computed as W0^+ W_tau from the horizontal lift, then re-unitarized
    blockwise by polar projection (the deviation is logged). Raises
    NotClosed for open curves and GaugeViolation when the raw holonomy
    carries more than offblock_tol of block-off-diagonal mass.
    """
    defect = rho_curve.closure_defect()
    if defect > closed_tol:
        raise NotClosed(f"curve closure defect {defect:.3e} exceeds {closed_tol:.3e}")
    spath = decompose_path(rho_curve, gap_tol=gap_tol, zero_tol=zero_tol)
    samples = _lift_samples(rho_curve, spath, w0, PROJECTION_TOL)
    return _holonomy_from_endpoint(w0, samples[-1], offblock_tol)


def _holonomy_from_endpoint(w0: Amplitude, w_final: Array, offblock_tol: float) -> GaugeElement:
    raw = linalg.pinv(w0.w) @ w_final
    off = w0.basis.offblock_norm(raw)
    if off > offblock_tol:
        raise GaugeViolation(f"block-off-diagonal holonomy mass {off:.3e} exceeds {offblock_tol:.3e}")
    u = np.zeros_like(raw)
    for lo, hi in w0.basis.blocks:
        u[lo:hi, lo:hi] = linalg.polar_unitary(raw[lo:hi, lo:hi])
    deviation = linalg.frob(u - raw)
    logger.debug("holonomy re-unitarization deviation %.3e (off-block %.3e)", deviation, off)
    return GaugeElement(u=u, basis=w0.basis)


def lift_connection_residuals(lift: OperatorCurve, basis: EigenprojectorBasis) -> Array:
    """Norm of the connection form along a lift, via finite differences.

    For an exactly horizontal lift this vanishes; the discrete transport
    leaves a residual that shrinks with the step size.
    """
    wdots = grid_derivative(lift.samples, lift.grid.dt)
    out = np.empty(lift.samples.shape[0])
    for k in range(lift.samples.shape[0]):
        amp = Amplitude(w=lift.samples[k], basis=basis)
        out[k] = linalg.frob(connection_form(amp, wdots[k]).a)
    return out
