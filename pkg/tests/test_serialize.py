import json

import numpy as np
import pytest

from holonomy_lab import bundle, serialize, spectra
from holonomy_lab.curves import OperatorCurve
from qutil import precessing_qubit_curve, rand_unitary


class TestMatrixRoundTrip:
    def test_bit_identical(self, rng):
        m = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
        data = json.loads(json.dumps(serialize.matrix_to_json(m)))
        back = serialize.matrix_from_json(data)
        assert np.array_equal(back, m)

    def test_rejects_bad_shape(self):
        with pytest.raises(ValueError):
            serialize.matrix_from_json([[1.0, 2.0], [3.0, 4.0]])


class TestStateRoundTrip:
    def test_round_trip(self, rng):
        u = rand_unitary(rng, 3)
        rho = u @ np.diag([0.5, 0.3, 0.2]).astype(complex) @ u.conj().T
        data = json.loads(json.dumps(serialize.state_to_json(rho)))
        assert np.array_equal(serialize.state_from_json(data), rho)

    def test_dim_consistency(self):
        data = serialize.state_to_json(np.eye(2, dtype=complex) / 2)
        data["dim"] = 3
        with pytest.raises(ValueError):
            serialize.state_from_json(data)


class TestCurveRoundTrip:
    def test_round_trip(self):
        c = precessing_qubit_curve(0.6, 2 * np.pi, 0.7, 11)
        data = json.loads(json.dumps(serialize.curve_to_json(c)))
        back = serialize.curve_from_json(data)
        assert back.grid.tau == c.grid.tau
        assert np.array_equal(back.samples, c.samples)


class TestAmplitudeRoundTrip:
    def test_round_trip(self):
        rho = spectra.spectral_decompose(np.diag([0.7, 0.3]).astype(complex))
        w = bundle.canonical_amplitude(rho)
        data = json.loads(json.dumps(serialize.amplitude_to_json(w)))
        back = serialize.amplitude_from_json(data)
        assert np.array_equal(back.w, w.w)
        assert back.basis.m == w.basis.m


class TestFileIO:
    def test_write_read(self, tmp_path):
        c = precessing_qubit_curve(0.2, 2 * np.pi, 0.7, 7)
        path = tmp_path / "curve.json"
        serialize.write_json(path, serialize.curve_to_json(c))
        back = serialize.curve_from_json(serialize.read_json(path))
        assert np.array_equal(back.samples, c.samples)
