"""Holonomy invariants and the isoholonomic inequalities.

Eigenphase spectra of gauge unitaries, the Wilson loop, the geometric
phase, the isoholonomic bounds (fixed-spectrum and spectrally constrained),
curve length/energy in the induced metric, and the inequality checker.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bundle, linalg
from .curves import OperatorCurve, ProbabilityPath, fisher_rao, grid_derivative, trapezoid
from .errors import (
    BoundViolated,
    NotClosed,
    OutOfRange,
    ShapeMismatch,
    UndefinedPhase,
)

Array = np.ndarray

TWO_PI = 2.0 * np.pi
PHASE_TOL = 1e-7
SLACK_TOL = 1e-6
TRACE_TOL = 1e-9
CONST_SPECTRUM_TOL = 1e-7
LENGTH_TANGENT_TOL = 1e-3


@dataclass(frozen=True, eq=False)
class PhaseSpectrum:
    """Per-block eigenphases of a gauge unitary, each in [0, 2pi),
    descending within the block."""

    blocks: tuple[Array, ...]

    def __post_init__(self):
        cleaned = []
        for ph in self.blocks:
            ph = np.asarray(ph, dtype=float)
            if np.any(ph < 0.0) or np.any(ph >= TWO_PI):
                raise OutOfRange(f"phases {ph.tolist()} leave [0, 2pi)")
            cleaned.append(ph)
        object.__setattr__(self, "blocks", tuple(cleaned))

    @property
    def m(self) -> tuple[int, ...]:
        return tuple(ph.size for ph in self.blocks)

    def flat(self) -> Array:
        return np.concatenate(self.blocks)


def eigenphases(g: bundle.GaugeElement, phase_tol: float = PHASE_TOL) -> PhaseSpectrum:
    """Blockwise eigenphases of a gauge unitary, mapped into [0, 2pi).

    Phases within phase_tol of 2pi wrap to 0, which leaves every bound
    built on theta(2pi - theta) unchanged.
    """
    out = []
    for lo, hi in g.basis.blocks:
        vals = np.linalg.eigvals(g.u[lo:hi, lo:hi])
        ph = np.mod(np.angle(vals), TWO_PI)
        ph[ph >= TWO_PI - phase_tol] = 0.0
        out.append(np.sort(ph)[::-1])
    return PhaseSpectrum(blocks=tuple(out))


def pure_ihb(theta: float) -> float:
    """Lower bound sqrt(theta (2pi - theta)) on the length of a closed pure
    state curve with geometric phase theta."""
    if not 0.0 <= theta < TWO_PI:
        raise OutOfRange(f"theta {theta!r} outside [0, 2pi)")
    return float(np.sqrt(theta * (TWO_PI - theta)))


def _weighted_bound(weights, phases: PhaseSpectrum) -> float:
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 1 or weights.size != len(phases.blocks):
        raise ShapeMismatch(f"{weights.size} weights for {len(phases.blocks)} phase blocks")
    total = 0.0
    for wj, ph in zip(weights, phases.blocks):
        total += wj * float(np.sum(ph * (TWO_PI - ph)))
    return float(np.sqrt(max(total, 0.0)))


def ihb_isospectral(p, phases: PhaseSpectrum) -> float:
    """Isoholonomic bound sqrt(sum_ja p_j theta_ja (2pi - theta_ja))."""
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0.0):
        raise ShapeMismatch("eigenvalues must be positive")
    return _weighted_bound(p, phases)


def ihb_constrained(alpha, phases: PhaseSpectrum) -> float:
    """Spectrally constrained bound sqrt(sum_ja alpha_j theta_ja (2pi - theta_ja))."""
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha < 0.0):
        raise ShapeMismatch("spectral bounds must be nonnegative")
    return _weighted_bound(alpha, phases)


def wilson_loop(g: bundle.GaugeElement) -> complex:
    """Trace of the holonomy."""
    return complex(np.trace(g.u))


def geometric_phase(rho_curve: OperatorCurve, w0: bundle.Amplitude,
                    gap_tol: float = linalg.GAP_TOL, zero_tol: float = linalg.ZERO_TOL,
                    trace_tol: float = TRACE_TOL) -> float:
    """Geometric phase arg tr(W0^dag W_tau) of the lifted curve, in (-pi, pi].

    Raises UndefinedPhase when the trace is too close to zero for the
    argument to be meaningful.
    """
    lift = bundle.horizontal_lift(rho_curve, w0, gap_tol=gap_tol, zero_tol=zero_tol)
    tr = complex(np.trace(w0.w.conj().T @ lift.samples[-1]))
    if abs(tr) <= trace_tol:
        raise UndefinedPhase(f"|tr(W0^dag W_tau)| = {abs(tr):.3e} is below {trace_tol:.3e}")
    return float(np.angle(tr))


def curve_length_energy(rho_curve: OperatorCurve,
                        gap_tol: float = linalg.GAP_TOL, zero_tol: float = linalg.ZERO_TOL,
                        tangent_tol: float = LENGTH_TANGENT_TOL) -> tuple[float, float]:
    """Length and kinetic energy of a state curve in the induced metric.

    Speeds come from finite-difference tangents lifted horizontally; the
    quadrature is the composite trapezoid rule.
    """
    spath = bundle.decompose_path(rho_curve, gap_tol=gap_tol, zero_tol=zero_tol)
    rdots = grid_derivative(rho_curve.samples, rho_curve.grid.dt)
    sq = bundle.path_speeds_sq(spath, rdots, tangent_tol=tangent_tol)
    sq = np.maximum(sq, 0.0)
    dt = rho_curve.grid.dt
    return trapezoid(np.sqrt(sq), dt), 0.5 * trapezoid(sq, dt)


@dataclass(frozen=True, eq=False)
class IsoReport:
    """Isoholonomic accounting for one closed curve."""

    length: float
    energy: float
    fr_length: float
    ihb: float
    ihb_alpha: float | None
    slack: float
    strong_slack: float | None
    spectrum_constant: bool
    holonomy: bundle.GaugeElement
    phases: PhaseSpectrum


def check_isoholonomic(rho_curve: OperatorCurve, w0: bundle.Amplitude, alpha=None,
                       gap_tol: float = linalg.GAP_TOL, zero_tol: float = linalg.ZERO_TOL,
                       closed_tol: float = bundle.CLOSED_TOL,
                       slack_tol: float = SLACK_TOL,
                       phase_tol: float = PHASE_TOL,
                       const_spectrum_tol: float = CONST_SPECTRUM_TOL,
                       tangent_tol: float = LENGTH_TANGENT_TOL) -> IsoReport:
    """Evaluate the isoholonomic inequalities on a closed curve.

    For constant-spectrum curves the fixed-spectrum bound applies; when
    alpha is given the constrained and strong inequalities are evaluated as
    well. Negative slack beyond slack_tol raises BoundViolated, which
    signals a numerical-method bug rather than physics.
    """
    defect = rho_curve.closure_defect()
    if defect > closed_tol:
        raise NotClosed(f"curve closure defect {defect:.3e} exceeds {closed_tol:.3e}")
    spath = bundle.decompose_path(rho_curve, gap_tol=gap_tol, zero_tol=zero_tol)
    samples = bundle._lift_samples(rho_curve, spath, w0, bundle.PROJECTION_TOL)
    hol = bundle._holonomy_from_endpoint(w0, samples[-1], bundle.OFFBLOCK_TOL)
    phases = eigenphases(hol, phase_tol=phase_tol)

    means = spath.block_means()
    constant = bool(np.max(np.abs(means - means[0])) <= const_spectrum_tol)

    rdots = grid_derivative(rho_curve.samples, rho_curve.grid.dt)
    sq = np.maximum(bundle.path_speeds_sq(spath, rdots, tangent_tol=tangent_tol), 0.0)
    dt = rho_curve.grid.dt
    length = trapezoid(np.sqrt(sq), dt)
    energy = 0.5 * trapezoid(sq, dt)
    fr_length, _ = fisher_rao(ProbabilityPath(grid=rho_curve.grid, values=means, m=spath.m))

    ihb_alpha = None
    if alpha is not None:
        alpha = np.asarray(alpha, dtype=float)
        if alpha.shape != (means.shape[1],):
            raise ShapeMismatch(f"{alpha.size} bounds for {means.shape[1]} blocks")
        if np.any(means < alpha[None, :] - 1e-12):
            raise OutOfRange("curve leaves the spectrally bounded region")
        ihb_alpha = ihb_constrained(alpha, phases)
    ihb = ihb_isospectral(means[0], phases) if constant else (ihb_alpha if ihb_alpha is not None else 0.0)

    slack = length - ihb
    strong_slack = None
    if ihb_alpha is not None:
        strong_slack = length**2 - fr_length**2 - ihb_alpha**2
    if slack < -slack_tol:
        raise BoundViolated(f"length undershoots the bound by {-slack:.3e}")
    if strong_slack is not None and strong_slack < -slack_tol:
        raise BoundViolated(f"strong inequality violated by {-strong_slack:.3e}")
    return IsoReport(
        length=length, energy=energy, fr_length=fr_length, ihb=ihb, ihb_alpha=ihb_alpha,
        slack=slack, strong_slack=strong_slack, spectrum_constant=constant,
        holonomy=hol, phases=phases,
    )
