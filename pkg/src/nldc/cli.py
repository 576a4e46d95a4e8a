"""Command line front end: run scenarios, scan parameters, render events.

A scenario is a JSON document naming exactly one source state (biphoton,
stationary or a bare covariance), the dispersion hardware, optional
detector jitter and an optional sampling block.  Field names carry units.
`run` produces a RunRecord JSON plus requested CSVs, `scan` sweeps one
numeric scenario field into a CSV table, `render` turns a sampled
RunRecord into deterministic SVG plots.

Exit codes: 0 success, 2 validation error (malformed scenario, bad
parameter path, missing events), 3 numerical precondition error (grid too
coarse or narrow, window too small, inadmissible cross-spectrum, ...).
Errors are emitted as one JSON object on stderr.

jitter_sigma_ps is the RMS timing jitter of the coincidence time
difference: the analytic route adds jitter_sigma^2 to Var(tau) and the
sampling route applies jitter_sigma/sqrt(2) per detector channel, which
adds the same.

The default output directory is the NLDC_OUT_DIR environment variable,
falling back to ./nldc_out; a scenario "outputs.dir" entry or --out
overrides it.  RunRecords are deterministic for fixed seeds apart from the
created_utc stamp.
"""

from __future__ import annotations

import argparse
import copy
import datetime
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from . import biphoton as bp
from . import sampler as sp
from . import spectral as spc
from . import stationary as st
from .errors import DegenerateStateError, PreconditionError
from .moments import (
    DispersionKit,
    TemporalCovariance,
    apply_jitter,
    evaluate_witness,
    jitter_feasibility,
    separability_check,
    shear_covariance,
)

SCHEMA_VERSION = 1
ENV_OUT_DIR = "NLDC_OUT_DIR"

_GRID_SCHEMA = {
    "type": "object",
    "required": ["n", "domega_rad_ps"],
    "additionalProperties": False,
    "properties": {
        "n": {"type": "integer", "minimum": 8},
        "domega_rad_ps": {"type": "number", "exclusiveMinimum": 0},
    },
}

_GAUSSIAN_SCHEMA = {
    "type": "object",
    "required": ["peak", "sigma_rad_ps"],
    "additionalProperties": False,
    "properties": {
        "peak": {"type": "number", "minimum": 0},
        "sigma_rad_ps": {"type": "number", "exclusiveMinimum": 0},
        "center_rad_ps": {"type": "number"},
    },
}

_FLAT_SCHEMA = {
    "type": "object",
    "required": ["value"],
    "additionalProperties": False,
    "properties": {"value": {"type": "number", "minimum": 0}},
}

_SPECTRUM_SCHEMA = {
    "type": "object",
    "minProperties": 1,
    "maxProperties": 1,
    "additionalProperties": False,
    "properties": {
        "gaussian": _GAUSSIAN_SCHEMA,
        "flat": _FLAT_SCHEMA,
        "csv": {"type": "string"},
    },
}

_CROSS_SCHEMA = {
    "oneOf": [
        {"const": "classical-extremal"},
        _SPECTRUM_SCHEMA,
    ]
}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["state", "kit"],
    "additionalProperties": False,
    "properties": {
        "state": {
            "type": "object",
            "minProperties": 1,
            "maxProperties": 1,
            "additionalProperties": False,
            "properties": {
                "biphoton": {
                    "type": "object",
                    "required": ["pump_sigma_rad_ps", "pm_sigma_rad_ps", "grid"],
                    "additionalProperties": False,
                    "properties": {
                        "pump_sigma_rad_ps": {"type": "number", "exclusiveMinimum": 0},
                        "pm_sigma_rad_ps": {"type": "number", "exclusiveMinimum": 0},
                        "grid": _GRID_SCHEMA,
                    },
                },
                "stationary": {
                    "type": "object",
                    "required": ["grid", "s1", "s2", "cross", "window_T_ps"],
                    "additionalProperties": False,
                    "properties": {
                        "grid": _GRID_SCHEMA,
                        "s1": _SPECTRUM_SCHEMA,
                        "s2": _SPECTRUM_SCHEMA,
                        "cross": _CROSS_SCHEMA,
                        "window_T_ps": {"type": "number", "exclusiveMinimum": 0},
                    },
                },
                "covariance": {
                    "type": "object",
                    "required": ["var_tau_ps2", "var_omega_rad2_ps2"],
                    "additionalProperties": False,
                    "properties": {
                        "var_tau_ps2": {"type": "number", "minimum": 0},
                        "var_omega_rad2_ps2": {"type": "number", "minimum": 0},
                        "cov_tau_omega": {"type": "number"},
                        "mean_tau_ps": {"type": "number"},
                        "mean_omega_rad_ps": {"type": "number"},
                    },
                },
            },
        },
        "kit": {
            "type": "object",
            "required": ["beta_L_ps2"],
            "additionalProperties": False,
            "properties": {
                "beta_L_ps2": {"type": "number"},
                "delay_1_ps": {"type": "number"},
                "delay_2_ps": {"type": "number"},
            },
        },
        "jitter_sigma_ps": {"type": "number", "minimum": 0},
        "sampler": {
            "type": "object",
            "required": ["n_events", "seed"],
            "additionalProperties": False,
            "properties": {
                "n_events": {"type": "integer", "minimum": 2},
                "seed": {"type": "integer", "minimum": 0},
            },
        },
        "outputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dir": {"type": "string"},
                "events_csv": {"type": "boolean"},
                "tau_profile_csv": {"type": "boolean"},
                "density_binary": {"type": "boolean"},
            },
        },
    },
}


class ScenarioError(ValueError):
    """Scenario content failed validation (maps to exit code 2)."""


def normalize_scenario(raw: dict) -> dict:
    """Validate against the schema and fill defaults; returns a new dict."""
    try:
        jsonschema.validate(raw, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as err:
        path = ".".join(str(p) for p in err.absolute_path) or "<root>"
        raise ScenarioError(f"scenario invalid at {path}: {err.message}") from err
    scenario = copy.deepcopy(raw)
    kit = scenario["kit"]
    kit.setdefault("delay_1_ps", 0.0)
    kit.setdefault("delay_2_ps", 0.0)
    scenario.setdefault("jitter_sigma_ps", 0.0)
    state = scenario["state"]
    if "covariance" in state:
        cov = state["covariance"]
        cov.setdefault("cov_tau_omega", 0.0)
        cov.setdefault("mean_tau_ps", 0.0)
        cov.setdefault("mean_omega_rad_ps", 0.0)
        if "sampler" in scenario:
            raise ScenarioError("sampling needs a biphoton or stationary state, not a bare covariance")
    for spec_dict in _iter_spectrum_specs(scenario):
        if "gaussian" in spec_dict:
            spec_dict["gaussian"].setdefault("center_rad_ps", 0.0)
    outputs = scenario.setdefault("outputs", {})
    outputs.setdefault("events_csv", True)
    outputs.setdefault("tau_profile_csv", True)
    outputs.setdefault("density_binary", False)
    return scenario


def _iter_spectrum_specs(scenario):
    stationary = scenario["state"].get("stationary")
    if stationary is None:
        return
    yield stationary["s1"]
    yield stationary["s2"]
    if isinstance(stationary["cross"], dict):
        yield stationary["cross"]


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def scenario_hash(scenario: dict) -> str:
    return "sha256:" + hashlib.sha256(canonical_json(scenario).encode("utf-8")).hexdigest()


def load_scenario(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as err:
            raise ScenarioError(f"{path} is not valid JSON: {err}") from err
    return normalize_scenario(raw)


def _build_grid(grid_spec) -> spc.FrequencyGrid:
    return spc.FrequencyGrid(n=grid_spec["n"], domega=grid_spec["domega_rad_ps"])


def _build_spectrum(spec_dict, grid, base_dir) -> spc.SpectralModel:
    if "gaussian" in spec_dict:
        g = spec_dict["gaussian"]
        return spc.gaussian_spectrum(grid, g["peak"], g["sigma_rad_ps"], g["center_rad_ps"])
    if "flat" in spec_dict:
        return spc.flat_spectrum(grid, spec_dict["flat"]["value"])
    model = spc.spectrum_from_csv(Path(base_dir) / spec_dict["csv"])
    if model.grid != grid:
        raise ScenarioError(f"spectrum CSV {spec_dict['csv']} does not match the scenario grid")
    return model


def _build_cross(cross_spec, s1, s2, grid, base_dir) -> spc.CrossSpectrum:
    if cross_spec == "classical-extremal":
        return spc.max_classical_cross(s1, s2)
    if "gaussian" in cross_spec:
        g = cross_spec["gaussian"]
        return spc.gaussian_cross(grid, g["peak"], g["sigma_rad_ps"], g["center_rad_ps"])
    if "flat" in cross_spec:
        return spc.flat_cross(grid, cross_spec["flat"]["value"])
    cross = spc.cross_from_csv(Path(base_dir) / cross_spec["csv"])
    if cross.grid != grid:
        raise ScenarioError(f"cross CSV {cross_spec['csv']} does not match the scenario grid")
    return cross


@dataclass
class StateBundle:
    kind: str
    cov_before: TemporalCovariance
    cov_plus: TemporalCovariance
    cov_minus: TemporalCovariance
    psi: bp.BiphotonAmplitude | None = None
    densities: dict | None = None
    model: st.StationaryPairModel | None = None
    profile: st.TauDensity | None = None
    fft: dict | None = None


def _build_state(scenario: dict, kit: DispersionKit, base_dir, want_sampling: bool) -> StateBundle:
    state = scenario["state"]
    if "biphoton" in state:
        cfg = state["biphoton"]
        grid = _build_grid(cfg["grid"])
        psi = bp.build_pdc_amplitude(grid, cfg["pump_sigma_rad_ps"], cfg["pm_sigma_rad_ps"])
        psi_plus = bp.apply_dispersion_phase(psi, kit)
        psi_minus = bp.apply_dispersion_phase(psi, kit.swapped())
        cov0 = bp.amplitude_moments(psi)
        cov_p = bp.amplitude_moments(psi_plus)
        cov_m = bp.amplitude_moments(psi_minus)
        fft = {
            "var_tau_before_ps2": cov0.var_tau,
            "var_tau_plus_ps2": cov_p.var_tau,
            "var_tau_minus_ps2": cov_m.var_tau,
            "symmetrized_var_tau_ps2": 0.5 * (cov_p.var_tau + cov_m.var_tau),
        }
        densities = None
        if want_sampling:
            densities = {
                "before": bp.to_time_domain(psi),
                "plus": bp.to_time_domain(psi_plus),
                "minus": bp.to_time_domain(psi_minus),
            }
        return StateBundle(
            kind="biphoton", cov_before=cov0, cov_plus=cov_p, cov_minus=cov_m,
            psi=psi, densities=densities, fft=fft,
        )
    if "stationary" in state:
        cfg = state["stationary"]
        grid = _build_grid(cfg["grid"])
        s1 = _build_spectrum(cfg["s1"], grid, base_dir)
        s2 = _build_spectrum(cfg["s2"], grid, base_dir)
        cross = _build_cross(cfg["cross"], s1, s2, grid, base_dir)
        model = st.make_pair_model(s1, s2, cross, cfg["window_T_ps"])
        cov0 = st.windowed_covariance(model)
        return StateBundle(
            kind="stationary",
            cov_before=cov0,
            cov_plus=shear_covariance(cov0, kit),
            cov_minus=shear_covariance(cov0, kit.swapped()),
            model=model,
            profile=st.coincidence_profile(model),
        )
    cfg = state["covariance"]
    cov0 = TemporalCovariance(
        var_tau=cfg["var_tau_ps2"],
        var_omega=cfg["var_omega_rad2_ps2"],
        cov_tau_omega=cfg["cov_tau_omega"],
        mean_tau=cfg["mean_tau_ps"],
        mean_omega=cfg["mean_omega_rad_ps"],
    )
    return StateBundle(
        kind="covariance",
        cov_before=cov0,
        cov_plus=shear_covariance(cov0, kit),
        cov_minus=shear_covariance(cov0, kit.swapped()),
    )


def _kit_from(scenario) -> DispersionKit:
    kit = scenario["kit"]
    return DispersionKit(
        beta_L=kit["beta_L_ps2"], delay_1=kit["delay_1_ps"], delay_2=kit["delay_2_ps"]
    )


def _cov_dict(cov: TemporalCovariance) -> dict:
    return {
        "var_tau_ps2": cov.var_tau,
        "var_omega_rad2_ps2": cov.var_omega,
        "cov_tau_omega": cov.cov_tau_omega,
        "mean_tau_ps": cov.mean_tau,
        "mean_omega_rad_ps": cov.mean_omega,
    }


def _witness_dict(cov: TemporalCovariance, kit: DispersionKit) -> dict:
    try:
        w = evaluate_witness(cov, kit)
    except DegenerateStateError as err:
        return {"evaluable": False, "reason": str(err)}
    return {
        "evaluable": True,
        "lhs_ps2": w.lhs,
        "rhs_ps2": w.rhs,
        "margin_ps2": w.margin,
        "violated": w.violated,
        "product": w.product,
    }


def _stats_dict(stats: sp.TauStats) -> dict:
    return {
        "n": stats.n,
        "var_tau_ps2": stats.var_tau,
        "stderr_ps2": stats.stderr,
        "mean_tau_ps": stats.mean_tau,
    }


def _sample_batches(bundle: StateBundle, kit: DispersionKit, count: int, seed: int) -> dict:
    if bundle.kind == "biphoton":
        return {
            "before": sp.sample_biphoton(bundle.densities["before"], count, sp.derive_seed(seed, "before")),
            "plus": sp.sample_biphoton(bundle.densities["plus"], count, sp.derive_seed(seed, "plus")),
            "minus": sp.sample_biphoton(bundle.densities["minus"], count, sp.derive_seed(seed, "minus")),
        }
    return {
        "before": sp.sample_stationary(bundle.model, count, sp.derive_seed(seed, "before")),
        "plus": sp.sample_stationary_sheared(bundle.model, kit, count, sp.derive_seed(seed, "plus")),
        "minus": sp.sample_stationary_sheared(bundle.model, kit.swapped(), count, sp.derive_seed(seed, "minus")),
    }


def run_scenario(scenario: dict, out_dir: Path, base_dir: Path = Path(".")) -> dict:
    """Execute one normalized scenario, writing outputs into out_dir."""
    kit = _kit_from(scenario)
    jitter_sigma = scenario["jitter_sigma_ps"]
    jitter_var = jitter_sigma ** 2
    want_sampling = "sampler" in scenario
    bundle = _build_state(scenario, kit, base_dir, want_sampling)
    cov0 = bundle.cov_before

    record = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "scenario": scenario,
        "scenario_hash": scenario_hash(scenario),
        "state_kind": bundle.kind,
        "covariance_before": _cov_dict(cov0),
        "covariance_after_plus": _cov_dict(bundle.cov_plus),
        "covariance_after_minus": _cov_dict(bundle.cov_minus),
        "separability": {
            "product": separability_check(cov0).product,
            "separable_consistent": separability_check(cov0).separable_consistent,
        },
        "witness": _witness_dict(cov0, kit),
    }
    if bundle.fft is not None:
        record["fft"] = bundle.fft
    if bundle.kind == "stationary":
        stats = st.windowed_tau_variance(bundle.profile)
        record["windowed"] = {
            "variance_ps2": stats.variance,
            "signal_fraction": stats.signal_fraction,
            "background": bundle.profile.background,
            "regime": bundle.model.regime,
        }
    if jitter_var > 0.0:
        cov_obs = apply_jitter(cov0, jitter_var)
        feas = jitter_feasibility(cov0, kit, jitter_var)
        record["jitter"] = {
            "sigma_ps": jitter_sigma,
            "var_ps2": jitter_var,
            "feasibility": {
                "linewidth_ok": feas.linewidth_ok,
                "dispersion_ok": feas.dispersion_ok,
                "linewidth_product": feas.linewidth_product,
                "dispersion_ratio": feas.dispersion_ratio,
            },
        }
        record["witness_observed"] = _witness_dict(cov_obs, kit)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs: dict = {"runrecord": "runrecord.json"}

    if want_sampling:
        count = scenario["sampler"]["n_events"]
        seed = scenario["sampler"]["seed"]
        batches = _sample_batches(bundle, kit, count, seed)
        sigma_per_detector = jitter_sigma / math.sqrt(2.0)
        estimates = {
            label: sp.estimate_tau_stats(
                batch, sigma_per_detector, sp.derive_seed(seed, f"jitter-{label}")
            )
            for label, batch in batches.items()
        }
        try:
            emp = sp.empirical_witness(estimates["before"], estimates["plus"], estimates["minus"], kit)
            empirical = {
                "evaluable": True,
                "lhs_ps2": emp.lhs,
                "rhs_ps2": emp.rhs,
                "margin_ps2": emp.margin,
                "margin_stderr_ps2": emp.margin_stderr,
                "significance": emp.significance,
                "violated": emp.violated,
            }
        except DegenerateStateError as err:
            empirical = {"evaluable": False, "reason": str(err)}
        sampling: dict = {
            "n_events": count,
            "seed": seed,
            "estimates": {label: _stats_dict(s) for label, s in estimates.items()},
            "empirical_witness": empirical,
        }
        if scenario["outputs"]["events_csv"]:
            events = {}
            for label, batch in batches.items():
                name = f"events_{label}.csv"
                sp.events_to_csv(batch, out_dir / name)
                events[label] = name
            sampling["events"] = events
            outputs["events"] = events
        record["sampling"] = sampling

    if bundle.kind == "stationary" and scenario["outputs"]["tau_profile_csv"]:
        st.tau_density_to_csv(bundle.profile, out_dir / "tau_profile.csv")
        outputs["tau_profile"] = "tau_profile.csv"
    if bundle.kind == "biphoton" and scenario["outputs"]["density_binary"]:
        bp.density_to_binary(bp.to_time_domain(bundle.psi), out_dir / "density_before.bin")
        outputs["density_before"] = "density_before.bin"

    record["outputs"] = outputs
    with open(out_dir / "runrecord.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_plain(record), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return record


def _plain(obj):
    """Recursively convert numpy scalars so json sees pure Python types."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _resolve_numeric_path(scenario: dict, dotted: str):
    node = scenario
    parts = dotted.split(".")
    for key in parts[:-1]:
        if not isinstance(node, dict) or key not in node:
            raise ScenarioError(f"unknown parameter path {dotted!r}")
        node = node[key]
    leaf = parts[-1]
    if not isinstance(node, dict) or leaf not in node:
        raise ScenarioError(f"unknown parameter path {dotted!r}")
    if isinstance(node[leaf], bool) or not isinstance(node[leaf], (int, float)):
        raise ScenarioError(f"parameter path {dotted!r} does not address a numeric field")
    return node, leaf


def scan_scenario(scenario: dict, param: str, values, base_dir: Path = Path(".")) -> list[dict]:
    """Witness quantities per swept value; fails before any output on a bad point.

    lhs/rhs/margin and the product refer to the jitter-observed covariance,
    so jitter sweeps show the feasibility degradation directly.  Rows are
    assembled in the order given regardless of evaluation strategy.
    """
    _resolve_numeric_path(scenario, param)
    rows = []
    for value in values:
        variant = copy.deepcopy(scenario)
        node, leaf = _resolve_numeric_path(variant, param)
        node[leaf] = float(value)
        variant = normalize_scenario(variant)
        kit = _kit_from(variant)
        bundle = _build_state(variant, kit, base_dir, want_sampling=False)
        cov_obs = apply_jitter(bundle.cov_before, variant["jitter_sigma_ps"] ** 2)
        report = evaluate_witness(cov_obs, kit)
        rows.append(
            {
                "value": float(value),
                "lhs_ps2": report.lhs,
                "rhs_ps2": report.rhs,
                "margin_ps2": report.margin,
                "product": report.product,
            }
        )
    return rows


def write_scan_csv(rows: list[dict], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("value,lhs_ps2,rhs_ps2,margin_ps2,product\n")
        for row in rows:
            fh.write(
                f"{row['value']:.17g},{row['lhs_ps2']:.17g},{row['rhs_ps2']:.17g},"
                f"{row['margin_ps2']:.17g},{row['product']:.17g}\n"
            )


# ---------------------------------------------------------------------------
# Rendering: hand-rolled SVG so output is deterministic byte for byte.

def _svg_header(width, height, title):
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n'
        f'<title>{title}</title>\n'
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>\n'
    )


def _axis_bounds(lo, hi):
    if lo == hi:
        pad = 0.5 if lo == 0.0 else abs(lo) * 0.1
        return lo - pad, hi + pad
    pad = (hi - lo) * 0.05
    return lo - pad, hi + pad


def render_scatter(batch: sp.EventBatch, path) -> None:
    size, margin = 640, 70
    span = size - 2 * margin
    if batch.window is not None:
        lo, hi = batch.window
    else:
        lo = float(min(batch.t1.min(), batch.t2.min()))
        hi = float(max(batch.t1.max(), batch.t2.max()))
    lo, hi = _axis_bounds(lo, hi)
    scale = span / (hi - lo)
    parts = [_svg_header(size, size, f"detection times: {batch.source}")]
    parts.append(
        f'<rect x="{margin}" y="{margin}" width="{span}" height="{span}" '
        'fill="none" stroke="black" stroke-width="1"/>\n'
    )
    for frac in (0.0, 0.5, 1.0):
        v = lo + frac * (hi - lo)
        x = margin + frac * span
        parts.append(
            f'<text x="{x:.1f}" y="{size - margin + 24}" font-size="13" '
            f'text-anchor="middle">{v:.6g}</text>\n'
        )
        parts.append(
            f'<text x="{margin - 8}" y="{size - margin - frac * span:.1f}" font-size="13" '
            f'text-anchor="end">{v:.6g}</text>\n'
        )
    parts.append(
        f'<text x="{size / 2:.1f}" y="{size - 18}" font-size="15" text-anchor="middle">t1 (ps)</text>\n'
    )
    parts.append(
        f'<text x="20" y="{size / 2:.1f}" font-size="15" text-anchor="middle" '
        f'transform="rotate(-90 20 {size / 2:.1f})">t2 (ps)</text>\n'
    )
    for a, b in zip(batch.t1, batch.t2):
        x = margin + (a - lo) * scale
        y = size - margin - (b - lo) * scale
        parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="1.2" fill="#1f77b4" fill-opacity="0.5"/>\n')
    parts.append("</svg>\n")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("".join(parts))


def render_tau_hist(batch: sp.EventBatch, path, bins: int = 64) -> None:
    width, height, margin = 640, 420, 70
    tau = batch.tau
    counts, edges = np.histogram(tau, bins=bins)
    peak = max(int(counts.max()), 1)
    span_x = width - 2 * margin
    span_y = height - 2 * margin
    lo, hi = edges[0], edges[-1]
    if hi == lo:
        hi = lo + 1.0
    parts = [_svg_header(width, height, f"tau histogram: {batch.source}")]
    parts.append(
        f'<rect x="{margin}" y="{margin}" width="{span_x}" height="{span_y}" '
        'fill="none" stroke="black" stroke-width="1"/>\n'
    )
    for i, c in enumerate(counts):
        if c == 0:
            continue
        x0 = margin + (edges[i] - lo) / (hi - lo) * span_x
        x1 = margin + (edges[i + 1] - lo) / (hi - lo) * span_x
        h = c / peak * span_y
        parts.append(
            f'<rect x="{x0:.2f}" y="{height - margin - h:.2f}" width="{x1 - x0:.2f}" '
            f'height="{h:.2f}" fill="#ff7f0e"/>\n'
        )
    for frac in (0.0, 0.5, 1.0):
        v = lo + frac * (hi - lo)
        x = margin + frac * span_x
        parts.append(
            f'<text x="{x:.1f}" y="{height - margin + 24}" font-size="13" '
            f'text-anchor="middle">{v:.6g}</text>\n'
        )
    parts.append(
        f'<text x="{width / 2:.1f}" y="{height - 18}" font-size="15" '
        'text-anchor="middle">tau = t1 - t2 (ps)</text>\n'
    )
    parts.append(f'<text x="{margin}" y="{margin - 10}" font-size="13">peak bin: {peak} events</text>\n')
    parts.append("</svg>\n")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("".join(parts))


def render_record(record_path, out_dir=None) -> list[Path]:
    record_path = Path(record_path)
    with open(record_path, "r", encoding="utf-8") as fh:
        record = json.load(fh)
    sampling = record.get("sampling")
    if not sampling or "events" not in sampling:
        raise ScenarioError(f"{record_path} contains no sampled events to render")
    events_path = record_path.parent / sampling["events"]["before"]
    if not events_path.exists():
        raise ScenarioError(f"events file {events_path} is missing")
    batch = sp.events_from_csv(events_path)
    out_dir = Path(out_dir) if out_dir is not None else record_path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    scatter = out_dir / "scatter.svg"
    hist = out_dir / "tau_hist.svg"
    render_scatter(batch, scatter)
    render_tau_hist(batch, hist)
    return [scatter, hist]


# ---------------------------------------------------------------------------
# Entry points.

def _default_out_dir() -> Path:
    return Path(os.environ.get(ENV_OUT_DIR, "nldc_out"))


def _emit_error(kind: str, err: Exception) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": str(err)}) + "\n")


def _cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    out_dir = Path(args.out) if args.out else Path(scenario["outputs"].get("dir", _default_out_dir()))
    record = run_scenario(scenario, out_dir, base_dir=Path(args.scenario).parent)
    witness = record["witness"]
    if witness.get("evaluable"):
        line = (
            f"witness: lhs={witness['lhs_ps2']:.6g} ps^2 rhs={witness['rhs_ps2']:.6g} ps^2 "
            f"margin={witness['margin_ps2']:.6g} ps^2 violated={witness['violated']}"
        )
    else:
        line = f"witness: non-evaluable ({witness['reason']})"
    print(line)
    print(f"runrecord: {out_dir / 'runrecord.json'}")
    return 0


def _cmd_scan(args) -> int:
    scenario = load_scenario(args.scenario)
    values = [float(v) for v in args.values.split(",") if v.strip() != ""]
    if not values:
        raise ScenarioError("scan needs at least one value")
    rows = scan_scenario(scenario, args.param, values, base_dir=Path(args.scenario).parent)
    out_dir = Path(args.out) if args.out else _default_out_dir()
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"scan_{args.param.replace('.', '_')}.csv"
    write_scan_csv(rows, path)
    print(f"scan: {path}")
    return 0


def _cmd_render(args) -> int:
    paths = render_record(args.runrecord, args.out)
    for p in paths:
        print(f"rendered: {p}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nldc",
        description="Twin-beam dispersion-cancellation witness toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario and write a RunRecord")
    p_run.add_argument("scenario", help="scenario JSON file")
    p_run.add_argument("--out", help="output directory")
    p_run.set_defaults(func=_cmd_run)

    p_scan = sub.add_parser("scan", help="sweep one numeric scenario field")
    p_scan.add_argument("scenario", help="scenario JSON file")
    p_scan.add_argument("--param", required=True, help="dotted path, e.g. kit.beta_L_ps2")
    p_scan.add_argument("--values", required=True, help="comma-separated numbers")
    p_scan.add_argument("--out", help="output directory")
    p_scan.set_defaults(func=_cmd_scan)

    p_render = sub.add_parser("render", help="render SVG plots from a sampled RunRecord")
    p_render.add_argument("runrecord", help="runrecord.json produced by run")
    p_render.add_argument("--out", help="output directory (default: next to the record)")
    p_render.set_defaults(func=_cmd_render)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PreconditionError as err:
        _emit_error(type(err).__name__, err)
        return 3
    except (ScenarioError, ValueError, OSError) as err:
        _emit_error(type(err).__name__, err)
        return 2


def entry() -> None:
    sys.exit(main())
