"""Sampled operator curves and functionals on them.

Uniform time grids, curve concatenation/reversal/reparameterization, the
finite-difference/trapezoid toolbox, and the Fisher-Rao length and kinetic
energy of eigenvalue paths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    EndpointMismatch,
    GridMismatch,
    NonPositiveEigenvalue,
    NotDescending,
    NotNormalized,
    ZeroLength,
)

Array = np.ndarray

ENDPOINT_TOL = 1e-9


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_k = k tau / (n - 1) on [0, tau]."""

    tau: float
    n: int

    def __post_init__(self):
        if not (self.tau > 0.0 and np.isfinite(self.tau)):
            raise ValueError(f"tau must be finite and positive, got {self.tau}")
        if self.n < 2:
            raise ValueError(f"need at least 2 samples, got {self.n}")

    @property
    def dt(self) -> float:
        return self.tau / (self.n - 1)

    @property
    def times(self) -> Array:
        return np.linspace(0.0, self.tau, self.n)


@dataclass(frozen=True, eq=False)
class OperatorCurve:
    """Matrix-valued samples on a uniform time grid; samples has shape
    (n, rows, cols)."""

    grid: TimeGrid
    samples: Array

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.complex128)
        if s.ndim != 3 or s.shape[0] != self.grid.n:
            raise ValueError(f"samples shape {s.shape} does not match grid n={self.grid.n}")
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_samples(cls, tau: float, samples) -> "OperatorCurve":
        s = np.asarray(samples, dtype=np.complex128)
        return cls(grid=TimeGrid(tau=float(tau), n=s.shape[0]), samples=s)

    @property
    def initial(self) -> Array:
        return self.samples[0]

    @property
    def final(self) -> Array:
        return self.samples[-1]

    def closure_defect(self) -> float:
        return float(np.linalg.norm(self.samples[0] - self.samples[-1]))


@dataclass(frozen=True, eq=False)
class ProbabilityPath:
    """Per-block eigenvalue samples p_{j;t} with fixed multiplicities m."""

    grid: TimeGrid
    values: Array
    m: tuple[int, ...]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != self.grid.n or v.shape[1] != len(self.m):
            raise ValueError(f"values shape {v.shape} does not match grid/m")
        if np.any(v <= 0.0):
            raise NonPositiveEigenvalue("eigenvalue path touches zero")
        # boundary points of the simplex (ties) are admitted
        if v.shape[1] > 1 and np.any(v[:, :-1] - v[:, 1:] < -1e-9):
            raise NotDescending("eigenvalue path is not descending")
        totals = v @ np.asarray(self.m, dtype=float)
        if np.any(np.abs(totals - 1.0) > 1e-9):
            raise NotNormalized("eigenvalue path is not normalized")
        object.__setattr__(self, "values", v)


def grid_derivative(samples: Array, dt: float) -> Array:
    """d/dt along axis 0: central differences inside (five-point stencil
    where available), second-order one-sided differences at the endpoints."""
    s = np.asarray(samples)
    if s.shape[0] < 3:
        d = np.empty_like(s)
        d[:] = (s[-1] - s[0]) / dt
        return d
    d = np.empty_like(s)
    d[1:-1] = (s[2:] - s[:-2]) / (2.0 * dt)
    if s.shape[0] >= 5:
        d[2:-2] = (s[:-4] - 8.0 * s[1:-3] + 8.0 * s[3:-1] - s[4:]) / (12.0 * dt)
    d[0] = (-3.0 * s[0] + 4.0 * s[1] - s[2]) / (2.0 * dt)
    d[-1] = (3.0 * s[-1] - 4.0 * s[-2] + s[-3]) / (2.0 * dt)
    return d


def trapezoid(values: Array, dt: float) -> float:
    return float(np.trapezoid(np.asarray(values, dtype=float), dx=dt))


def concatenate(c1: OperatorCurve, c2: OperatorCurve, tol: float = ENDPOINT_TOL) -> OperatorCurve:
    """Join two curves end to start, dropping the duplicate junction sample.

    The final sample of c1 must equal the initial sample of c2 within tol,
    and both curves must share the same sample spacing so the joined grid
    stays uniform.
    """
    if c1.samples.shape[1:] != c2.samples.shape[1:]:
        raise EndpointMismatch(f"sample shapes differ: {c1.samples.shape[1:]} vs {c2.samples.shape[1:]}")
    gap = float(np.linalg.norm(c1.final - c2.initial))
    if gap > tol:
        raise EndpointMismatch(f"junction gap {gap:.3e} exceeds {tol:.3e}")
    if abs(c1.grid.dt - c2.grid.dt) > 1e-9 * max(c1.grid.dt, c2.grid.dt):
        raise GridMismatch(f"sample spacings differ: {c1.grid.dt!r} vs {c2.grid.dt!r}")
    samples = np.concatenate([c1.samples, c2.samples[1:]], axis=0)
    return OperatorCurve(grid=TimeGrid(tau=c1.grid.tau + c2.grid.tau, n=samples.shape[0]), samples=samples)


def reverse(c: OperatorCurve) -> OperatorCurve:
    """Time-reversed curve on the same grid."""
    return OperatorCurve(grid=c.grid, samples=c.samples[::-1].copy())


def reparam_arclength(c: OperatorCurve, speed, n_out: int | None = None) -> OperatorCurve:
    """Resample a curve proportionally to arc length.

    speed holds the per-sample speeds of c in whatever metric the caller
    uses; the output curve covers the same time interval with the same
    orientation but (up to quadrature error) constant speed. Samples are
    interpolated linearly. Raises ZeroLength for curves of zero total length.
    """
    speed = np.asarray(speed, dtype=float)
    if speed.shape != (c.grid.n,):
        raise GridMismatch(f"speed has shape {speed.shape}, expected ({c.grid.n},)")
    if np.any(speed < 0.0):
        raise ValueError("speeds must be nonnegative")
    dt = c.grid.dt
    s = np.concatenate([[0.0], np.cumsum(0.5 * (speed[1:] + speed[:-1]) * dt)])
    total = s[-1]
    if total <= 0.0:
        raise ZeroLength("curve has zero length")
    n_out = c.grid.n if n_out is None else int(n_out)
    # nudge flat stretches so the inverse map stays single valued
    s = s + np.arange(c.grid.n) * (total * 1e-15)
    targets = np.linspace(0.0, s[-1], n_out)
    t_of_s = np.interp(targets, s, c.grid.times)
    idx = np.clip(np.searchsorted(c.grid.times, t_of_s, side="right") - 1, 0, c.grid.n - 2)
    w = (t_of_s - c.grid.times[idx]) / dt
    samples = (1.0 - w)[:, None, None] * c.samples[idx] + w[:, None, None] * c.samples[idx + 1]
    return OperatorCurve(grid=TimeGrid(tau=c.grid.tau, n=n_out), samples=samples)


def fisher_rao(path: ProbabilityPath) -> tuple[float, float]:
    """Fisher-Rao length and kinetic energy of an eigenvalue path.

    The squared speed of the weighted distribution (m_1 p_1, ..., m_l p_l)
    is sum_j m_j pdot_j^2 / p_j / 4; the length carries a 1/2 prefactor and
    the energy a 1/8 prefactor. Derivatives are finite differences and the
    quadrature is the composite trapezoid rule.
    """
    p = path.values
    if np.any(p <= 0.0):
        raise NonPositiveEigenvalue("eigenvalue path touches zero")
    pdot = grid_derivative(p, path.grid.dt)
    mvec = np.asarray(path.m, dtype=float)
    quad = np.sum(mvec * pdot**2 / p, axis=1)
    length = 0.5 * trapezoid(np.sqrt(quad), path.grid.dt)
    energy = 0.125 * trapezoid(quad, path.grid.dt)
    return length, energy
