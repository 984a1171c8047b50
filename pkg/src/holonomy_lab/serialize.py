"""JSON schemas for states, curves, schedules, amplitudes, and reports.

Complex entries are [re, im] pairs; matrices are nested row-major lists.
Floats go through Python's shortest round-trip repr, so write/read is
bit-exact for finite values.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import bundle, dynamics, invariants, linalg, synthesis
from .curves import OperatorCurve, TimeGrid
from .spectra import EigenprojectorBasis

Array = np.ndarray


def matrix_to_json(m: Array) -> list:
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(data) -> Array:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError(f"matrix JSON must be rows of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def state_to_json(rho: Array) -> dict:
    rho = linalg.as_cmat(rho)
    return {"dim": rho.shape[0], "matrix": matrix_to_json(rho)}


def state_from_json(data: dict) -> Array:
    rho = matrix_from_json(data["matrix"])
    if rho.shape != (data["dim"], data["dim"]):
        raise ValueError(f"matrix shape {rho.shape} contradicts dim {data['dim']}")
    return rho


def curve_to_json(curve: OperatorCurve) -> dict:
    return {"tau": curve.grid.tau, "samples": [matrix_to_json(s) for s in curve.samples]}


def curve_from_json(data: dict) -> OperatorCurve:
    samples = np.stack([matrix_from_json(s) for s in data["samples"]])
    return OperatorCurve(grid=TimeGrid(tau=float(data["tau"]), n=samples.shape[0]), samples=samples)


def schedule_from_json(data: dict) -> dynamics.HamiltonianSchedule:
    samples = np.stack([matrix_from_json(s) for s in data["samples"]])
    return dynamics.HamiltonianSchedule(grid=TimeGrid(tau=float(data["tau"]), n=samples.shape[0]), samples=samples)


def amplitude_to_json(amp: bundle.Amplitude) -> dict:
    return {"matrix": matrix_to_json(amp.w), "basis": {"m": list(amp.basis.m)}}


def amplitude_from_json(data: dict) -> bundle.Amplitude:
    basis = EigenprojectorBasis(m=tuple(int(x) for x in data["basis"]["m"]))
    return bundle.Amplitude(w=matrix_from_json(data["matrix"]), basis=basis)


def amplitude_curve_to_json(curve: OperatorCurve, basis: EigenprojectorBasis) -> dict:
    out = curve_to_json(curve)
    out["basis"] = {"m": list(basis.m)}
    return out


def unitary_to_json(g: bundle.GaugeElement) -> dict:
    return {"matrix": matrix_to_json(g.u), "basis": {"m": list(g.basis.m)}}


def unitary_from_json(data: dict) -> bundle.GaugeElement:
    basis = EigenprojectorBasis(m=tuple(int(x) for x in data["basis"]["m"]))
    return bundle.GaugeElement(u=matrix_from_json(data["matrix"]), basis=basis)


def iso_report_to_json(report: invariants.IsoReport) -> dict:
    return {
        "L": report.length,
        "E": report.energy,
        "L_FR": report.fr_length,
        "iHB": report.ihb,
        "iHB_alpha": report.ihb_alpha,
        "slack": report.slack,
        "strong_slack": report.strong_slack,
        "spectrum_constant": report.spectrum_constant,
        "phases": [list(map(float, ph)) for ph in report.phases.blocks],
        "wilson_loop": [float(np.real(invariants.wilson_loop(report.holonomy))),
                        float(np.imag(invariants.wilson_loop(report.holonomy)))],
        "holonomy": matrix_to_json(report.holonomy.u),
    }


def speed_report_to_json(report: dynamics.SpeedLimitReport) -> dict:
    return {
        "tau": report.tau,
        "delta_E": report.delta_e,
        "iHB": report.ihb,
        "bound": report.bound,
        "margin": report.margin,
        "dH": [float(x) for x in report.dh],
        "dH_co": [float(x) for x in report.dh_co],
        "dH_in": [float(x) for x in report.dh_in],
        "phases": [list(map(float, ph)) for ph in report.phases.blocks],
    }


def saturation_report_to_json(report: synthesis.SaturationReport) -> dict:
    return {
        "holonomy_error": report.holonomy_error,
        "L": report.length,
        "iHB": report.ihb,
        "length_error": report.length_error,
        "slack": report.slack,
        "max_H_in": report.max_h_in,
        "dH_deviation": report.dh_deviation,
        "energy_gap": report.energy_gap,
        "bound_gap": report.bound_gap,
    }


def plan_manifest_to_json(plan: synthesis.SaturatingPlan) -> dict:
    return {
        "tau": plan.tau,
        "iHB": plan.ihb,
        "target": unitary_to_json(plan.target),
        "amplitude": amplitude_to_json(plan.w),
        "state": state_to_json(plan.rho.matrix),
        "loops": [
            {
                "theta": loop.theta,
                "speed": loop.speed,
                "psi": matrix_to_json(loop.psi[:, None]),
                "phi": matrix_to_json(loop.phi[:, None]),
            }
            for loop in plan.loops
        ],
    }


def write_json(path: str | Path, payload) -> None:
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def read_json(path: str | Path):
    return json.loads(Path(path).read_text(encoding="utf-8"))
