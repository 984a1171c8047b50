import numpy as np
import pytest

from holonomy_lab import curves, invariants
from holonomy_lab.curves import OperatorCurve, ProbabilityPath, TimeGrid
from holonomy_lab.errors import (
    EndpointMismatch,
    GridMismatch,
    NonPositiveEigenvalue,
    ZeroLength,
)
from qutil import great_circle_section, pure_curve


def constant_curve(mat, tau, nsamp):
    return OperatorCurve.from_samples(tau, np.broadcast_to(mat, (nsamp, *mat.shape)).copy())


class TestTimeGrid:
    def test_uniform(self):
        grid = TimeGrid(tau=2.0, n=5)
        assert np.allclose(grid.times, [0.0, 0.5, 1.0, 1.5, 2.0])
        assert grid.dt == 0.5

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            TimeGrid(tau=-1.0, n=5)
        with pytest.raises(ValueError):
            TimeGrid(tau=1.0, n=1)


class TestConcatenate:
    def test_pole_to_pole_halves(self):
        # two half great circles of pure states, each of length pi/2
        c1 = pure_curve(great_circle_section(501, 0.0, np.pi / 2), tau=0.5)
        c2 = pure_curve(great_circle_section(501, np.pi / 2, np.pi), tau=0.5)
        l1, _ = invariants.curve_length_energy(c1)
        l2, _ = invariants.curve_length_energy(c2)
        joined = curves.concatenate(c1, c2)
        total, _ = invariants.curve_length_energy(joined)
        assert abs(l1 - np.pi / 2) <= 1e-6
        assert abs(l2 - np.pi / 2) <= 1e-6
        assert abs(total - (l1 + l2)) <= 1e-6
        assert joined.closure_defect() <= 1e-12
        assert joined.grid.n == 1001

    def test_endpoint_mismatch(self):
        c1 = pure_curve(great_circle_section(11, 0.0, 1.0), tau=0.5)
        c2 = pure_curve(great_circle_section(11, 2.0, 3.0), tau=0.5)
        with pytest.raises(EndpointMismatch):
            curves.concatenate(c1, c2)

    def test_spacing_mismatch(self):
        c1 = pure_curve(great_circle_section(11, 0.0, 1.0), tau=0.5)
        c2 = pure_curve(great_circle_section(21, 1.0, 2.0), tau=0.5)
        with pytest.raises(GridMismatch):
            curves.concatenate(c1, c2)


class TestReverse:
    def test_involution(self):
        c = pure_curve(great_circle_section(31, 0.0, 2.0), tau=1.0)
        back = curves.reverse(curves.reverse(c))
        assert np.array_equal(back.samples, c.samples)

    def test_preserves_length(self):
        c = pure_curve(great_circle_section(401, 0.0, 2.0), tau=1.0)
        l_fwd, _ = invariants.curve_length_energy(c)
        l_rev, _ = invariants.curve_length_energy(curves.reverse(c))
        assert abs(l_fwd - l_rev) <= 1e-12

    def test_constant_fixed_point(self):
        c = constant_curve(np.diag([0.7, 0.3]).astype(complex), 1.0, 11)
        assert np.array_equal(curves.reverse(c).samples, c.samples)


class TestReparamArclength:
    def test_constant_speed_unchanged(self):
        c = pure_curve(great_circle_section(801, 0.0, np.pi), tau=1.0)
        speed = np.full(801, np.pi)
        out = curves.reparam_arclength(c, speed)
        assert np.max(np.abs(out.samples - c.samples)) <= 1e-6

    def test_closes_cauchy_schwarz_gap(self):
        # full-rank qubit loop traversed with speed proportional to
        # sin^2(pi t / tau); linear resampling keeps full-rank curves on
        # their stratum (rank-deficient ones would leave it)
        from holonomy_lab import bundle
        from qutil import qubit_axis, qubit_propagators

        nsamp = 2001
        t = np.linspace(0.0, 1.0, nsamp)
        angle = t - np.sin(2.0 * np.pi * t) / (2.0 * np.pi)
        props = qubit_propagators(qubit_axis(0.3), 2.0 * np.pi, angle)
        rho0 = np.diag([0.7, 0.3]).astype(complex)
        states = props @ rho0 @ np.conj(np.swapaxes(props, -1, -2))
        c = OperatorCurve.from_samples(1.0, states)
        length, energy = invariants.curve_length_energy(c)
        assert length**2 <= 2.0 * 1.0 * energy + 1e-9
        gap_before = 1.0 - length**2 / (2.0 * energy)
        assert gap_before > 0.1
        speeds = 1.0 - np.cos(2.0 * np.pi * t)  # proportional to the true speed
        out = curves.reparam_arclength(c, speeds)
        length2, energy2 = invariants.curve_length_energy(out)
        assert abs(length2 - length) / length <= 5e-3
        assert 1.0 - length2**2 / (2.0 * energy2) <= 1e-3
        # constant speed within 2 percent away from the flat endpoints
        spath = bundle.decompose_path(out)
        rdots = curves.grid_derivative(out.samples, out.grid.dt)
        sp = np.sqrt(bundle.path_speeds_sq(spath, rdots, tangent_tol=1e-2))
        inner = sp[5:-5]
        assert np.max(np.abs(inner - np.mean(inner))) / np.mean(inner) <= 0.02

    def test_zero_length_rejected(self):
        c = constant_curve(np.diag([0.7, 0.3]).astype(complex), 1.0, 11)
        with pytest.raises(ZeroLength):
            curves.reparam_arclength(c, np.zeros(11))


class TestFisherRao:
    def test_constant_spectrum(self):
        path = ProbabilityPath(grid=TimeGrid(tau=1.0, n=51),
                               values=np.tile([0.7, 0.3], (51, 1)), m=(1, 1))
        length, energy = curves.fisher_rao(path)
        assert abs(length) <= 1e-12 and abs(energy) <= 1e-12

    def test_geodesic_length(self):
        # pull back to the sphere: y_j = sqrt(p_j) traces a great-circle arc
        y0 = np.sqrt(np.array([0.9, 0.1]))
        y1 = np.sqrt(np.array([0.5, 0.5]))
        angle = np.arccos(y0 @ y1)
        u = np.linspace(0.0, 1.0, 2001)
        ys = (np.sin((1 - u))[:, None] * 0 + np.sin((1 - u) * angle)[:, None] * y0 + np.sin(u * angle)[:, None] * y1) / np.sin(angle)
        path = ProbabilityPath(grid=TimeGrid(tau=1.0, n=2001), values=ys**2, m=(1, 1))
        length, _ = curves.fisher_rao(path)
        expected = np.arccos(np.sqrt(0.9 * 0.5) + np.sqrt(0.1 * 0.5))
        assert abs(expected - 0.46364760900080615) <= 1e-12
        assert abs(length - expected) <= 1e-6

    def test_reparameterization_invariance(self):
        u = np.linspace(0.0, 1.0, 3001)
        warped = u + 0.2 * np.sin(np.pi * u) ** 2
        warped /= warped[-1]
        base = np.stack([0.9 - 0.4 * u, 0.1 + 0.4 * u], axis=1)
        path1 = ProbabilityPath(grid=TimeGrid(tau=1.0, n=3001), values=base, m=(1, 1))
        path2 = ProbabilityPath(grid=TimeGrid(tau=1.0, n=3001),
                                values=np.stack([0.9 - 0.4 * warped, 0.1 + 0.4 * warped], axis=1),
                                m=(1, 1))
        l1, _ = curves.fisher_rao(path1)
        l2, _ = curves.fisher_rao(path2)
        assert abs(l1 - l2) <= 1e-6

    def test_positive_required(self):
        with pytest.raises(NonPositiveEigenvalue):
            ProbabilityPath(grid=TimeGrid(tau=1.0, n=3),
                            values=np.array([[0.7, 0.3], [1.0, 0.0], [0.7, 0.3]]), m=(1, 1))


class TestQuadratureConvergence:
    def test_length_converges_second_order(self):
        def length_at(nsamp):
            t = np.linspace(0.0, 1.0, nsamp)
            s = 1.2 * t + 0.3 * np.sin(2.2 * t)
            c = pure_curve(np.stack([np.cos(s), np.sin(s)], axis=1).astype(complex), tau=1.0)
            return invariants.curve_length_energy(c)[0]

        l1, l2, l3 = length_at(251), length_at(501), length_at(1001)
        ratio = abs(l1 - l2) / abs(l2 - l3)
        assert 3.0 <= ratio <= 5.0
