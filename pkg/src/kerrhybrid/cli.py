"""Command-line scenario runner.

    simulate <mode> --config <file> --out <dir> [--fixed-step DT] [--fock-dim N] [--workers K]

Modes: ``hybrid``, ``lindblad``, ``compare``, ``steady`` and ``sweep``.  Configs
are JSON; frequencies are numbers in rad/s or strings such as ``"32 MHz"``
(meaning ``f = omega / 2 pi``), times are seconds or strings such as
``"15/kappa"`` or ``"20 ns"``.
"""

from __future__ import annotations

import argparse
import copy
import json
import logging
import math
import os
import re
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import hybrid, lindblad, metrics, steady_state
from .config import (
    ConstantDrive,
    KerrNonlinearity,
    PiecewiseConstantDrive,
    PolynomialNonlinearity,
    SimConfig,
    bath_photons,
    rescale,
    temperature_from_photons,
)
from .errors import ConfigError, KerrHybridError, TruncationOverflow
from .fock_gaussian import from_phase_space
from .gaussian_state import GaussianState

log = logging.getLogger("kerrhybrid")

MODES = ("hybrid", "lindblad", "compare", "steady", "sweep")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_TRUNCATION = 0, 2, 3, 4

TRAJECTORY_COLUMNS = [
    "t", "re_beta", "im_beta", "w1", "w2", "k", "d0", "b", "theta",
    "squeeze_factor", "unsqueeze_factor", "n_th", "nbar",
]
ORACLE_COLUMNS = [
    "t", "re_a", "im_a", "d0", "b", "theta", "squeeze_factor", "unsqueeze_factor",
    "n_th", "nbar", "fit_infidelity", "coherent_infidelity", "trace",
]

ALLOWED_KEYS = {
    "description", "kappa", "detuning", "eta", "nonlinearity_coeffs", "drive", "n_b", "T_b",
    "omega_r0", "t_final", "dt_out", "initial", "fock_dim", "eps_tilde", "delta_omega_tilde",
    "eta_over_kappa", "sweep",
}
DIMENSIONLESS_KEYS = {"eps_tilde", "delta_omega_tilde", "eta_over_kappa"}
SWEEP_KEYS = {"parameter", "values", "start", "stop", "count", "mode"}

_FREQ_UNITS = {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9}
_TIME_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9}
_TEMP_UNITS = {"K": 1.0, "mK": 1e-3, "uK": 1e-6}
_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z/]*)\s*$")


# -- config parsing ----------------------------------------------------------------


def _split(text, key):
    m = _QUANTITY.match(text)
    if not m:
        raise ConfigError(f"cannot parse quantity {text!r}", key)
    return float(m.group(1)), m.group(2)


def parse_frequency(value, key: str) -> float:
    """Angular frequency in rad/s from a number (rad/s) or ``"<f> <Hz|kHz|MHz|GHz|rad/s>"``."""
    if isinstance(value, bool):
        raise ConfigError("expected a frequency", key)
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"expected a frequency, got {value!r}", key)
    number, unit = _split(value, key)
    if unit in ("", "rad/s"):
        return number
    if unit in _FREQ_UNITS:
        return 2.0 * math.pi * number * _FREQ_UNITS[unit]
    raise ConfigError(f"unknown frequency unit {unit!r}", key)


def parse_complex_frequency(value, key: str) -> complex:
    if isinstance(value, list):
        if len(value) != 2:
            raise ConfigError("complex values are [re, im]", key)
        return complex(parse_frequency(value[0], key), parse_frequency(value[1], key))
    return complex(parse_frequency(value, key))


def parse_time(value, key: str, kappa: float) -> float:
    if isinstance(value, bool):
        raise ConfigError("expected a time", key)
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"expected a time, got {value!r}", key)
    number, unit = _split(value, key)
    if unit == "/kappa":
        return number / kappa
    if unit in _TIME_UNITS:
        return number * _TIME_UNITS[unit]
    raise ConfigError(f"unknown time unit {unit!r}", key)


def parse_temperature(value, key: str) -> float:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"expected a temperature, got {value!r}", key)
    number, unit = _split(value, key)
    if unit not in _TEMP_UNITS:
        raise ConfigError(f"unknown temperature unit {unit!r}", key)
    return number * _TEMP_UNITS[unit]


@dataclass
class RunSpec:
    """Validated run description."""

    config: SimConfig
    initial: str = "vacuum"
    fock_dim: int | None = None
    sweep: dict | None = None
    raw: dict = field(default_factory=dict)

    def canonical(self) -> dict:
        """Config dictionary with every quantity in rad/s, s or photons."""
        cfg = self.config
        out = {"kappa": cfg.kappa, "detuning": cfg.detuning}
        if isinstance(cfg.nonlinearity, KerrNonlinearity):
            out["eta"] = cfg.nonlinearity.eta
        else:
            out["nonlinearity_coeffs"] = list(cfg.nonlinearity.coeffs)
        out["drive"] = _canonical_drive(cfg.drive)
        out["n_b"] = cfg.n_b
        if cfg.omega_r0 is not None:
            out["omega_r0"] = cfg.omega_r0
        out["t_final"] = cfg.t_final
        out["dt_out"] = cfg.dt_out
        out["initial"] = self.initial
        if self.fock_dim is not None:
            out["fock_dim"] = self.fock_dim
        if self.sweep is not None:
            out["sweep"] = self.sweep
        return out


def _canonical_drive(drive):
    def pair(z):
        z = complex(z)
        return z.real if z.imag == 0 else [z.real, z.imag]

    if isinstance(drive, ConstantDrive):
        return pair(drive.amplitude)
    return {"switch_times": list(drive.times), "amplitudes": [pair(a) for a in drive.amplitudes]}


def _parse_drive(value, kappa):
    if isinstance(value, dict):
        unknown = set(value) - {"switch_times", "amplitudes"}
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)}", "drive")
        try:
            times = tuple(parse_time(t, "drive.switch_times", kappa) for t in value["switch_times"])
            amps = tuple(parse_complex_frequency(a, "drive.amplitudes") for a in value["amplitudes"])
        except KeyError as exc:
            raise ConfigError(f"missing {exc.args[0]!r}", "drive") from None
        return PiecewiseConstantDrive(times, amps)
    return ConstantDrive(parse_complex_frequency(value, "drive"))


def validate_config(text: str) -> RunSpec:
    """Parse and validate a JSON config.

    Raises
    ------
    ConfigError
        With the offending field (or the JSON line/column for syntax errors).
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError("top level must be an object")
    return spec_from_dict(raw)


def spec_from_dict(raw: dict) -> RunSpec:
    unknown = set(raw) - ALLOWED_KEYS
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", sorted(unknown)[0])
    kappa = parse_frequency(raw.get("kappa", 1.0), "kappa")
    if not kappa > 0:
        raise ConfigError(f"must be positive, got {kappa}", "kappa")

    dimensionless = DIMENSIONLESS_KEYS & set(raw)
    if dimensionless:
        clash = {"eta", "drive", "detuning", "nonlinearity_coeffs"} & set(raw)
        if clash:
            raise ConfigError(f"cannot combine with dimensionless parameters {sorted(dimensionless)}", sorted(clash)[0])
        for key in ("eps_tilde", "delta_omega_tilde"):
            if key not in raw:
                raise ConfigError("required with dimensionless parameters", key)
        eta = float(raw.get("eta_over_kappa", -1.0)) * kappa
        if eta == 0:
            raise ConfigError("must be nonzero", "eta_over_kappa")
        sign = 1.0 if eta > 0 else -1.0
        eps_t = raw["eps_tilde"]
        eps_t = complex(*eps_t) if isinstance(eps_t, list) else complex(eps_t)
        nonlinearity = KerrNonlinearity(eta)
        drive = ConstantDrive(eps_t * kappa**1.5 / math.sqrt(abs(eta)))
        detuning = -sign * float(raw["delta_omega_tilde"]) * kappa
    else:
        detuning = parse_frequency(raw.get("detuning", 0.0), "detuning")
        if "nonlinearity_coeffs" in raw:
            if "eta" in raw:
                raise ConfigError("give either eta or nonlinearity_coeffs", "nonlinearity_coeffs")
            coeffs = raw["nonlinearity_coeffs"]
            if not isinstance(coeffs, list) or not coeffs:
                raise ConfigError("must be a nonempty list", "nonlinearity_coeffs")
            nonlinearity = PolynomialNonlinearity(tuple(float(c) for c in coeffs))
        else:
            nonlinearity = KerrNonlinearity(parse_frequency(raw.get("eta", 0.0), "eta"))
        drive = _parse_drive(raw.get("drive", 0.0), kappa)

    omega_r0 = parse_frequency(raw["omega_r0"], "omega_r0") if "omega_r0" in raw else None
    if "T_b" in raw:
        if "n_b" in raw:
            raise ConfigError("give either n_b or T_b", "T_b")
        if omega_r0 is None:
            raise ConfigError("T_b needs omega_r0", "T_b")
        t_b = parse_temperature(raw["T_b"], "T_b")
        if t_b < 0:
            raise ConfigError(f"must be nonnegative, got {t_b}", "T_b")
        n_b = bath_photons(t_b, omega_r0)
    else:
        n_b = raw.get("n_b", 0.0)
        if isinstance(n_b, bool) or not isinstance(n_b, (int, float)):
            raise ConfigError(f"expected a number, got {n_b!r}", "n_b")
        n_b = float(n_b)

    t_final = parse_time(raw.get("t_final", "15/kappa"), "t_final", kappa)
    dt_out = parse_time(raw.get("dt_out", "0.1/kappa"), "dt_out", kappa)
    if not t_final > 0:
        raise ConfigError("must be positive", "t_final")
    if not 0 < dt_out <= t_final:
        raise ConfigError("must be positive and at most t_final", "dt_out")
    initial = raw.get("initial", "vacuum")
    if initial not in ("vacuum", "thermal"):
        raise ConfigError(f"must be 'vacuum' or 'thermal', got {initial!r}", "initial")
    fock_dim = raw.get("fock_dim")
    if fock_dim is not None and (not isinstance(fock_dim, int) or fock_dim < 2):
        raise ConfigError("must be an integer >= 2", "fock_dim")
    sweep = raw.get("sweep")
    if sweep is not None:
        _check_sweep(sweep)

    config = SimConfig(
        kappa=kappa, detuning=detuning, nonlinearity=nonlinearity, drive=drive, n_b=n_b,
        t_final=t_final, dt_out=dt_out, omega_r0=omega_r0,
    )
    return RunSpec(config, initial, fock_dim, sweep, raw)


def _check_sweep(sweep):
    if not isinstance(sweep, dict):
        raise ConfigError("must be an object", "sweep")
    unknown = set(sweep) - SWEEP_KEYS
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", "sweep")
    param = sweep.get("parameter")
    if param not in ALLOWED_KEYS - {"sweep", "description", "initial"}:
        raise ConfigError(f"cannot sweep {param!r}", "sweep.parameter")
    if "values" not in sweep and not {"start", "stop", "count"} <= set(sweep):
        raise ConfigError("need 'values' or 'start', 'stop' and 'count'", "sweep")
    if sweep.get("mode", "hybrid") not in ("hybrid", "lindblad", "compare", "steady"):
        raise ConfigError(f"unknown mode {sweep.get('mode')!r}", "sweep.mode")


def sweep_values(sweep: dict) -> list:
    if "values" in sweep:
        return list(sweep["values"])
    return [float(v) for v in np.linspace(float(sweep["start"]), float(sweep["stop"]), int(sweep["count"]))]


# -- output helpers ---------------------------------------------------------------------


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_csv(columns, rows) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join("%.11e" % float(v) for v in row))
    return "\n".join(lines) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def write_json(path: Path, data: dict):
    _atomic_write(path, json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")


def trajectory_rows(traj: hybrid.Trajectory, infidelity=None):
    rows = np.column_stack([
        traj.times, traj.beta.real, traj.beta.imag, traj.w1, traj.w2, traj.k,
        traj.d0, traj.b, traj.theta, traj.squeeze_factor, traj.unsqueeze_factor, traj.n_th, traj.nbar,
    ])
    if infidelity is not None:
        rows = np.column_stack([rows, infidelity])
    return rows


def _state_summary(state: GaussianState, config: SimConfig) -> dict:
    out = {
        "beta": state.center,
        "photons": abs(state.center) ** 2,
        "d0": state.d0,
        "b": state.b,
        "theta": state.theta,
        "squeeze_factor": state.squeeze_factor,
        "unsqueeze_factor": state.unsqueeze_factor,
        "n_th": state.n_th,
        "nbar": state.mean_photon(),
    }
    if config.omega_r0 is not None:
        out["T_eff_K"] = temperature_from_photons(state.n_th, config.omega_r0)
    return out


def _initial_state(spec: RunSpec) -> hybrid.HybridState:
    seed = hybrid.HybridState.vacuum(spec.config)
    if spec.initial == "thermal":
        cb = spec.config.coth_b
        return hybrid.HybridState(seed.beta, cb, 1.0 / cb, 0.0)
    return seed


def _initial_rho(spec: RunSpec, dim: int) -> lindblad.FockDensityMatrix:
    if spec.initial == "thermal":
        return lindblad.FockDensityMatrix.thermal(spec.config.n_b, dim)
    return lindblad.FockDensityMatrix.vacuum(dim)


def validity_warnings(traj: hybrid.Trajectory) -> list[str]:
    """Samples where ``|beta|^2 > [4(d0+b)]^3`` fails."""
    bad = traj.photons <= traj.unsqueeze_factor**3
    if not bad.any():
        return []
    times = traj.times[bad]
    return [
        f"|beta|^2 > [4(d0+b)]^3 violated at {int(bad.sum())} of {len(bad)} samples "
        f"(t from {times[0]:.6g} to {times[-1]:.6g} s)"
    ]


def steady_summary(config: SimConfig) -> dict:
    """Steady branches with their shapes (Kerr, constant drive)."""
    out = {}
    if not isinstance(config.nonlinearity, KerrNonlinearity) or not isinstance(config.drive, ConstantDrive):
        return {"available": False}
    out["available"] = True
    if config.eta != 0:
        dim = rescale(config)
        out["eps_tilde"] = abs(dim.eps_tilde)
        out["delta_omega_tilde"] = dim.delta_omega_tilde
        out["root_structure"] = steady_state.root_structure(dim.eps_tilde, dim.delta_omega_tilde)
        bounds = steady_state.bistability_bounds(dim.delta_omega_tilde)
        out["bistability_bounds"] = list(bounds) if bounds else None
    branches = []
    for br in steady_state.steady_branches(config):
        entry = {"label": br.stability_label, "n_tilde": br.n_tilde, "beta": br.beta}
        try:
            state, _, _ = steady_state.steady_shape(br.beta, config)
            entry.update(_state_summary(state, config))
        except KerrHybridError as exc:
            entry["error"] = str(exc)
        branches.append(entry)
    out["branches"] = branches
    return out


def _peak(traj: hybrid.Trajectory) -> dict:
    i = int(np.argmax(traj.squeeze_factor))
    return {
        "t": traj.times[i],
        "squeeze_factor": traj.squeeze_factor[i],
        "unsqueeze_factor": traj.unsqueeze_factor[i],
        "photons": traj.photons[i],
        "max_unsqueeze_factor": float(traj.unsqueeze_factor.max()),
    }


# -- modes ---------------------------------------------------------------------------


def run_hybrid(spec: RunSpec, out: Path, fixed_step=None):
    start = time.perf_counter()
    traj = hybrid.evolve(_initial_state(spec), spec.config, fixed_step=fixed_step)
    elapsed = time.perf_counter() - start
    _atomic_write(out / "trajectory.csv", format_csv(TRAJECTORY_COLUMNS, trajectory_rows(traj)))
    summary = {
        "mode": "hybrid",
        "config": spec.canonical(),
        "timings_s": {"hybrid": elapsed},
        "peak_squeezing": _peak(traj),
        "final": _state_summary(traj.gaussians[-1], spec.config),
        "steady": steady_summary(spec.config),
        "warnings": validity_warnings(traj),
    }
    write_json(out / "summary.json", summary)
    return summary


def _oracle(spec: RunSpec, dim: int, times):
    start = time.perf_counter()
    rhos = lindblad.evolve(_initial_rho(spec, dim), spec.config, times)
    elapsed = time.perf_counter() - start
    rows = []
    fits = []
    for t, rho in zip(times, rhos.states):
        state, fit_inf = metrics.gaussian_fit(rho)
        coh = metrics.coherent_infidelity(state.center, rho)
        fits.append(state)
        rows.append([
            t, state.center.real, state.center.imag, state.d0, state.b, state.theta,
            state.squeeze_factor, state.unsqueeze_factor, state.n_th, state.mean_photon(),
            fit_inf, coh, rho.trace,
        ])
    return rhos, fits, np.array(rows), elapsed


def _fock_dim(spec: RunSpec, override):
    if override is not None:
        return override
    if spec.fock_dim is not None:
        return spec.fock_dim
    n_peak, w1_max = hybrid.peak_photons(spec.config, initial=_initial_state(spec))
    return lindblad.truncation_dim(n_peak, w1_max)


def run_lindblad(spec: RunSpec, out: Path, fock_dim=None):
    dim = _fock_dim(spec, fock_dim)
    times = spec.config.sample_times()
    _, _, rows, elapsed = _oracle(spec, dim, times)
    _atomic_write(out / "oracle.csv", format_csv(ORACLE_COLUMNS, rows))
    summary = {
        "mode": "lindblad",
        "config": spec.canonical(),
        "fock_dim": dim,
        "timings_s": {"oracle": elapsed},
        "max_fit_infidelity": float(rows[:, 10].max()),
        "final_fit_infidelity": float(rows[-1, 10]),
        "max_trace_error": float(np.abs(rows[:, 12] - 1.0).max()),
    }
    write_json(out / "summary.json", summary)
    return summary


def run_compare(spec: RunSpec, out: Path, fixed_step=None, fock_dim=None):
    dim = _fock_dim(spec, fock_dim)
    times = spec.config.sample_times()
    start = time.perf_counter()
    traj = hybrid.evolve(_initial_state(spec), spec.config, times, fixed_step=fixed_step)
    hybrid_time = time.perf_counter() - start
    rhos, _, rows, oracle_time = _oracle(spec, dim, times)
    infidelity = np.array([1.0 - metrics.gaussian_fidelity(g, r) for g, r in zip(traj.gaussians, rhos.states)])
    coherent = np.array([metrics.coherent_infidelity(b, r) for b, r in zip(traj.beta, rhos.states)])
    _atomic_write(out / "trajectory.csv", format_csv(TRAJECTORY_COLUMNS + ["infidelity"], trajectory_rows(traj, infidelity)))
    rows = np.column_stack([rows, coherent])
    _atomic_write(out / "oracle.csv", format_csv(ORACLE_COLUMNS + ["coherent_infidelity_hybrid_center"], rows))
    i_max = int(np.argmax(infidelity))
    summary = {
        "mode": "compare",
        "config": spec.canonical(),
        "fock_dim": dim,
        "timings_s": {"hybrid": hybrid_time, "oracle": oracle_time, "ratio": oracle_time / hybrid_time},
        "infidelity": {
            "max": infidelity[i_max],
            "t_max": times[i_max],
            "final": infidelity[-1],
            "fit_final": float(rows[-1, 10]),
            "coherent_final": coherent[-1],
        },
        "peak_squeezing": _peak(traj),
        "final": _state_summary(traj.gaussians[-1], spec.config),
        "steady": steady_summary(spec.config),
        "warnings": validity_warnings(traj),
    }
    write_json(out / "summary.json", summary)
    return summary


def run_steady(spec: RunSpec, out: Path):
    summary = {"mode": "steady", "config": spec.canonical(), "steady": steady_summary(spec.config)}
    rs = summary["steady"].get("root_structure")
    summary["critical_point"] = bool(rs and rs["near_critical"])
    write_json(out / "summary.json", summary)
    return summary


def _sweep_point(args):
    raw, mode, out, fixed_step, fock_dim = args
    spec = spec_from_dict(raw)
    return dispatch(mode, spec, Path(out), fixed_step=fixed_step, fock_dim=fock_dim)


def run_sweep(spec: RunSpec, out: Path, fixed_step=None, fock_dim=None, workers=None):
    if spec.sweep is None:
        raise ConfigError("sweep mode needs a 'sweep' block", "sweep")
    sweep = spec.sweep
    mode = sweep.get("mode", "hybrid")
    values = sweep_values(sweep)
    jobs = []
    for i, value in enumerate(values):
        raw = copy.deepcopy(spec.raw)
        raw.pop("sweep")
        raw[sweep["parameter"]] = value
        spec_from_dict(raw)  # fail early on a bad point
        jobs.append((raw, mode, str(out / f"point_{i:03d}"), fixed_step, fock_dim))
    workers = workers or os.cpu_count() or 1
    if workers == 1:
        results = [_sweep_point(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, jobs))
    rows = []
    for value, res in zip(values, results):
        row = {"value": value}
        if "peak_squeezing" in res:
            row["peak_squeeze_factor"] = res["peak_squeezing"]["squeeze_factor"]
            row["final_squeeze_factor"] = res["final"]["squeeze_factor"]
            row["final_nbar"] = res["final"]["nbar"]
        branches = res.get("steady", {}).get("branches") or []
        squeezes = [b["squeeze_factor"] for b in branches if "squeeze_factor" in b]
        row["steady_max_squeeze_factor"] = max(squeezes) if squeezes else float("nan")
        rows.append(row)
    columns = ["index", "value", "peak_squeeze_factor", "final_squeeze_factor", "final_nbar", "steady_max_squeeze_factor"]
    table = [[i, *(float(r.get(c, float("nan"))) for c in columns[1:])] for i, r in enumerate(rows)]
    _atomic_write(out / "sweep.csv", format_csv(columns, table))
    summary = {"mode": "sweep", "parameter": sweep["parameter"], "point_mode": mode, "points": rows}
    write_json(out / "summary.json", summary)
    return summary


def dispatch(mode, spec, out, *, fixed_step=None, fock_dim=None, workers=None):
    if mode == "hybrid":
        return run_hybrid(spec, out, fixed_step)
    if mode == "lindblad":
        return run_lindblad(spec, out, fock_dim)
    if mode == "compare":
        return run_compare(spec, out, fixed_step, fock_dim)
    if mode == "steady":
        return run_steady(spec, out)
    if mode == "sweep":
        return run_sweep(spec, out, fixed_step, fock_dim, workers)
    raise ConfigError(f"unknown mode {mode!r}", "mode")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simulate", description="Driven Kerr resonator simulations.")
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", required=True, type=Path, help="JSON config file")
    parser.add_argument("--out", required=True, type=Path, help="output directory")
    parser.add_argument("--fixed-step", type=str, default=None, help="fixed RK4 step (seconds or e.g. '0.001/kappa')")
    parser.add_argument("--fock-dim", type=int, default=None, help="override the oracle basis size")
    parser.add_argument("--workers", type=int, default=None, help="sweep worker processes")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        spec = validate_config(args.config.read_text())
        fixed = None
        if args.fixed_step is not None:
            fixed = parse_time(_number_or_text(args.fixed_step), "--fixed-step", spec.config.kappa)
        summary = dispatch(args.mode, spec, args.out, fixed_step=fixed, fock_dim=args.fock_dim, workers=args.workers)
    except ConfigError as exc:
        print(f"config error in {args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TruncationOverflow as exc:
        print(f"truncation overflow ({args.mode} run, {args.config}): {exc}", file=sys.stderr)
        return EXIT_TRUNCATION
    except (KerrHybridError, ArithmeticError) as exc:
        print(f"numerical failure ({args.mode} run, {args.config}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for warning in summary.get("warnings", []):
        log.warning(warning)
    return EXIT_OK


def _number_or_text(text):
    try:
        return float(text)
    except ValueError:
        return text


if __name__ == "__main__":
    sys.exit(main())
