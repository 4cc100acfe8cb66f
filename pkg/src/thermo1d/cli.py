"""Batch command line: configuration parsing, dispatch and deterministic output.

Usage::

    thermo1d <subcommand> --config run.ini [--out-dir DIR] [--seed INT]

Subcommands: ``run``, ``mms``, ``uniq``, ``sweep-galerkin``, ``cfhs``,
``fit-bound``.  Exit codes: 0 success and all checks pass, 1 usage or
configuration error, 2 positivity guard tripped, 3 a check failed.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import harness
from .diagnostics import DiagnosticsRow, prop33_check
from .errors import ConfigurationError, ContractError
from .solver import RunSpec, Scheme, Status, Trajectory, run, stable_dt
from .state import PRESET_PARAMS

__all__ = [
    "HarnessParams",
    "Config",
    "parse_config",
    "parse_config_text",
    "format_config",
    "write_trajectory_csv",
    "write_table_csv",
    "write_summary",
    "dispatch",
    "main",
    "EXIT_OK",
    "EXIT_CONFIG",
    "EXIT_GUARD",
    "EXIT_CHECK",
]

EXIT_OK, EXIT_CONFIG, EXIT_GUARD, EXIT_CHECK = 0, 1, 2, 3
SUBCOMMANDS = ("run", "mms", "uniq", "sweep-galerkin", "cfhs", "fit-bound")


@dataclass(frozen=True)
class HarnessParams:
    levels: int = 3
    delta: float = 1e-6
    mode_counts: tuple = (4, 8, 16)
    count: int = 1000
    max_modes: int = 8
    energy_tol: float = 1e-6


@dataclass(frozen=True)
class Config:
    spec: RunSpec
    harness: HarnessParams = field(default_factory=HarnessParams)


_REQUIRED = {
    "domain": ("a", "b"),
    "grid": ("n",),
    "params": ("mu",),
    "time": ("T",),
    "scheme": ("name",),
    "init": ("preset",),
}
_OPTIONAL = {
    "time": ("dt",),
    "galerkin": ("n_modes",),
    "output": ("csv", "json", "sample_every"),
    "guards": ("theta_floor_guard",),
    "harness": ("levels", "delta", "mode_counts", "count", "max_modes", "energy_tol"),
}


def _convert(raw: str, kind, key: str):
    try:
        if kind is int:
            value = float(raw)
            if not value.is_integer():
                raise ValueError(raw)
            return int(value)
        return kind(raw)
    except ValueError:
        raise ConfigurationError(f"{key}: cannot read {raw!r} as {kind.__name__}") from None


def parse_config_text(text: str, base_dir: str | Path = ".") -> Config:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigurationError(f"line {exc.lineno}: expected a [section] header") from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigurationError(f"line {lineno}: cannot parse {line!r}") from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ConfigurationError(f"line {exc.lineno}: {exc.message}") from None

    preset_name = parser.get("init", "preset", fallback=None)
    allowed = {sec: set(_REQUIRED.get(sec, ())) | set(_OPTIONAL.get(sec, ())) for sec in
               set(_REQUIRED) | set(_OPTIONAL)}
    if preset_name in PRESET_PARAMS:
        allowed["init"] |= set(PRESET_PARAMS[preset_name])
    for section in parser.sections():
        if section not in allowed:
            raise ConfigurationError(f"unknown section [{section}]")
        for key in parser[section]:
            if key not in allowed[section]:
                raise ConfigurationError(f"unknown key {section}.{key}")
    for section, keys in _REQUIRED.items():
        for key in keys:
            if not parser.has_option(section, key):
                raise ConfigurationError(f"missing required key {section}.{key}")

    def get(section, key, kind, default=None):
        if not parser.has_option(section, key):
            return default
        return _convert(parser.get(section, key).strip(), kind, f"{section}.{key}")

    dt_raw = parser.get("time", "dt", fallback="auto").strip()
    dt = "auto" if dt_raw == "auto" else _convert(dt_raw, float, "time.dt")
    modes_raw = parser.get("galerkin", "n_modes", fallback="grid").strip()
    n_modes = "grid" if modes_raw == "grid" else _convert(modes_raw, int, "galerkin.n_modes")

    params = {}
    if preset_name in PRESET_PARAMS:
        for key, kind in PRESET_PARAMS[preset_name].items():
            if parser.has_option("init", key):
                raw = parser.get("init", key).strip()
                if key == "path":
                    params[key] = str((Path(base_dir) / raw)) if not Path(raw).is_absolute() else raw
                else:
                    params[key] = _convert(raw, kind, f"init.{key}")

    spec = RunSpec(
        a=get("domain", "a", float),
        b=get("domain", "b", float),
        n=get("grid", "n", int),
        mu=get("params", "mu", float),
        T=get("time", "T", float),
        dt=dt,
        scheme=Scheme.parse(parser.get("scheme", "name").strip()),
        n_modes=n_modes,
        preset=preset_name,
        preset_params=params,
        sample_every=get("output", "sample_every", int, 1),
        theta_floor_guard=get("guards", "theta_floor_guard", float, 0.0),
        csv_path=parser.get("output", "csv", fallback="diagnostics.csv").strip(),
        json_path=parser.get("output", "json", fallback="summary.json").strip(),
    )
    if preset_name not in PRESET_PARAMS:
        raise ConfigurationError(f"init.preset: unknown preset {preset_name!r}; choose one of {sorted(PRESET_PARAMS)}")
    # resolve 'auto' and snap so that T / dt is an integer
    spec = spec.replace(dt=spec.time_steps()[0])

    defaults = HarnessParams()
    modes_text = parser.get("harness", "mode_counts", fallback=None)
    if modes_text is None:
        mode_counts = defaults.mode_counts
    else:
        mode_counts = tuple(_convert(m.strip(), int, "harness.mode_counts") for m in modes_text.split(",") if m.strip())
    hp = HarnessParams(
        levels=get("harness", "levels", int, defaults.levels),
        delta=get("harness", "delta", float, defaults.delta),
        mode_counts=mode_counts,
        count=get("harness", "count", int, defaults.count),
        max_modes=get("harness", "max_modes", int, defaults.max_modes),
        energy_tol=get("harness", "energy_tol", float, defaults.energy_tol),
    )
    return Config(spec, hp)


def parse_config(path: str | Path) -> Config:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, base_dir=path.parent)


def format_config(config: Config) -> str:
    """Effective configuration as text; ``parse_config_text`` of it gives back the same spec."""
    s, h = config.spec, config.harness
    lines = [
        "[domain]", f"a = {s.a!r}", f"b = {s.b!r}", "",
        "[grid]", f"n = {s.n}", "",
        "[params]", f"mu = {s.mu!r}", "",
        "[time]", f"T = {s.T!r}", f"dt = {s.dt!r}" if not isinstance(s.dt, str) else f"dt = {s.dt}", "",
        "[scheme]", f"name = {s.scheme.value}", "",
        "[galerkin]", f"n_modes = {s.n_modes}", "",
        "[init]", f"preset = {s.preset}",
    ]
    for key, value in s.preset_params.items():
        lines.append(f"{key} = {value!r}" if not isinstance(value, str) else f"{key} = {value}")
    lines += [
        "",
        "[output]", f"csv = {s.csv_path}", f"json = {s.json_path}", f"sample_every = {s.sample_every}", "",
        "[guards]", f"theta_floor_guard = {s.theta_floor_guard!r}", "",
        "[harness]", f"levels = {h.levels}", f"delta = {h.delta!r}",
        f"mode_counts = {', '.join(str(m) for m in h.mode_counts)}", f"count = {h.count}",
        f"max_modes = {h.max_modes}", f"energy_tol = {h.energy_tol!r}", "",
    ]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# emission


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_trajectory_csv(traj: Trajectory, path: str | Path) -> None:
    lines = [",".join(DiagnosticsRow.columns())]
    lines += [",".join(_fmt(x) for x in row.values()) for row in traj.rows]
    _atomic_write(Path(path), "\n".join(lines) + "\n")


def write_table_csv(columns, rows, path: str | Path) -> None:
    lines = [",".join(columns)]
    lines += [",".join("" if x is None else _fmt(x) for x in row) for row in rows]
    _atomic_write(Path(path), "\n".join(lines) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (Status, Scheme)):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def write_summary(summary: dict, path: str | Path) -> None:
    _atomic_write(Path(path), json.dumps(_jsonable(summary), indent=2) + "\n")


# ---------------------------------------------------------------------------
# subcommands


def _trajectory_summary(traj: Trajectory, tol: float) -> tuple[dict, dict]:
    rows = traj.rows
    e0, e1 = rows[0].E_total, rows[-1].E_total
    drift = abs(e1 - e0) / abs(e0)
    states = traj.states
    grid = traj.grid
    fisher_bound = all(prop33_check(s, grid).ok for s in states)
    positive = all(r.min_theta > 0.0 for r in rows)
    certificate = all(r.min_theta >= r.positivity_floor for r in rows)
    res = np.array([r.residual for r in rows[1:-1]])
    res = res[np.isfinite(res)]
    dt, steps = traj.spec.time_steps()
    summary = {
        "status": traj.status,
        "message": traj.message,
        "dt": dt,
        "steps": steps,
        "samples": len(rows),
        "final_t": rows[-1].t,
        "energy_drift": drift,
        "min_theta": min(r.min_theta for r in rows),
        "max_interior_residual": float(np.max(np.abs(res))) if res.size else None,
    }
    checks = {
        "energy_balance": drift <= tol,
        "positivity": positive,
        "positivity_certificate": certificate,
        "fisher_dissipation_bound": fisher_bound,
    }
    return summary, checks


def _exit_code(status: Status, checks: dict) -> int:
    if status is Status.GUARD_TRIPPED:
        return EXIT_GUARD
    if status is Status.DIVERGED or not all(checks.values()):
        return EXIT_CHECK
    return EXIT_OK


def _cmd_run(cfg: Config, out: Path, seed: int) -> int:
    traj = run(cfg.spec)
    summary, checks = _trajectory_summary(traj, cfg.harness.energy_tol)
    summary["checks"] = checks
    write_trajectory_csv(traj, out / cfg.spec.csv_path)
    write_summary(summary, out / cfg.spec.json_path)
    _atomic_write(out / "effective_config.ini", format_config(cfg))
    return _exit_code(traj.status, checks)


def _cmd_fit_bound(cfg: Config, out: Path, seed: int) -> int:
    traj = run(cfg.spec)
    write_trajectory_csv(traj, out / cfg.spec.csv_path)
    if traj.status is not Status.COMPLETED:
        write_summary({"status": traj.status, "message": traj.message}, out / cfg.spec.json_path)
        return _exit_code(traj.status, {})
    fit = harness.exp_bound_fit(traj)
    checks = {"finite_C2": math.isfinite(fit.C2), "bound_covers_samples": fit.max_relative_excess <= 0.0}
    summary = {
        "status": traj.status,
        "C1": fit.C1,
        "C2": fit.C2,
        "max_relative_excess": fit.max_relative_excess,
        "degenerate": fit.degenerate,
        "checks": checks,
    }
    write_summary(summary, out / cfg.spec.json_path)
    return _exit_code(traj.status, checks)


def _cmd_mms(cfg: Config, out: Path, seed: int) -> int:
    table = harness.manufactured_convergence(cfg.spec, cfg.harness.levels)
    cols = ("n", "dt", "error", "order", "error_u", "error_v", "error_theta")
    rows = [(r.extra["n"], r.extra["dt"], r.error, r.order, r.extra["error_u"], r.extra["error_v"],
             r.extra["error_theta"]) for r in table.rows]
    write_table_csv(cols, rows, out / cfg.spec.csv_path)
    finest = [o for o in table.orders[-2:] if o is not None]
    checks = {"spatial_order": bool(finest) and all(abs(o - 2.0) <= 0.3 for o in finest)}
    write_summary({"levels": [dict(zip(cols, r)) for r in rows], "checks": checks}, out / cfg.spec.json_path)
    return _exit_code(Status.COMPLETED, checks)


def _cmd_uniq(cfg: Config, out: Path, seed: int) -> int:
    rep = harness.uniqueness_experiment(cfg.spec, cfg.harness.delta)
    write_table_csv(("t", "N"), list(zip(rep.times, rep.N)), out / cfg.spec.csv_path)
    status = Status.GUARD_TRIPPED if Status.GUARD_TRIPPED in rep.statuses else (
        Status.DIVERGED if Status.DIVERGED in rep.statuses else Status.COMPLETED)
    if rep.delta == 0.0:
        checks = {"identical_twins": bool(np.all(rep.N == 0.0))}
    else:
        tol = 1e-8 * float(rep.N[0]) if rep.N.size else 0.0
        checks = {"finite_rate": math.isfinite(rep.growth_rate) and not rep.degenerate,
                  "gronwall_bound": rep.max_violation <= tol}
    summary = {
        "delta": rep.delta,
        "statuses": list(rep.statuses),
        "growth_rate": rep.growth_rate,
        "gronwall_rate": rep.gronwall_rate,
        "max_violation": rep.max_violation,
        "degenerate": rep.degenerate,
        "checks": checks,
    }
    write_summary(summary, out / cfg.spec.json_path)
    return _exit_code(status, checks)


def _cmd_sweep_galerkin(cfg: Config, out: Path, seed: int) -> int:
    table = harness.galerkin_sweep(cfg.spec, cfg.harness.mode_counts)
    keys = ("u_H2", "ut_H1", "theta_H1", "theta_t_L2L2")
    cols = ("n_modes", "sup_difference", "order") + keys
    rows = [(r.resolution, r.error, r.order) + tuple(r.extra[k] for k in keys) for r in table.rows]
    write_table_csv(cols, rows, out / cfg.spec.csv_path)
    errs = table.errors
    high = [r for r in table.rows if r.resolution >= 8]
    spread = {k: (max(r.extra[k] for r in high) - min(r.extra[k] for r in high)) / max(r.extra[k] for r in high)
              for k in keys} if high else {}
    checks = {
        "monotone_decrease": bool(np.all(np.diff(errs) < 0.0)),
        "uniform_bounds": all(v <= 0.10 for v in spread.values()),
    }
    summary = {"rows": [dict(zip(cols, r)) for r in rows], "reference": table.reference,
               "relative_spread": spread, "checks": checks}
    write_summary(summary, out / cfg.spec.json_path)
    bad = [r for r in table.rows if r.extra["status"] != Status.COMPLETED.value]
    return _exit_code(Status.GUARD_TRIPPED if bad else Status.COMPLETED, checks)


def _cmd_cfhs(cfg: Config, out: Path, seed: int) -> int:
    rep = harness.cfhs_property_sweep(cfg.harness.count, seed, cfg.spec.grid(), cfg.harness.max_modes)
    write_table_csv(("index", "ratio"), [(i, None if math.isnan(r) else r) for i, r in enumerate(rep.ratios)],
                    out / cfg.spec.csv_path)
    checks = {"no_violations": not rep.violations}
    summary = {
        "count": rep.count,
        "seed": rep.seed,
        "violations": len(rep.violations),
        "violating_indices": rep.violations,
        "max_ratio": rep.max_ratio,
        "bound": 13.0 / 8.0,
        "undefined": rep.n_undefined,
        "checks": checks,
    }
    write_summary(summary, out / cfg.spec.json_path)
    return _exit_code(Status.COMPLETED, checks)


_COMMANDS = {
    "run": _cmd_run,
    "mms": _cmd_mms,
    "uniq": _cmd_uniq,
    "sweep-galerkin": _cmd_sweep_galerkin,
    "cfhs": _cmd_cfhs,
    "fit-bound": _cmd_fit_bound,
}


def dispatch(subcommand: str, config: Config | str | Path, out_dir: str | Path = ".", seed: int = 0) -> int:
    """Execute one subcommand and return its exit code."""
    if subcommand not in _COMMANDS:
        print(f"thermo1d: unknown subcommand {subcommand!r}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = config if isinstance(config, Config) else parse_config(config)
        return _COMMANDS[subcommand](cfg, Path(out_dir), seed)
    except (ConfigurationError, ContractError) as exc:
        print(f"thermo1d: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="thermo1d", description=__doc__.splitlines()[0])
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", required=True, help="INI-style run configuration")
    parser.add_argument("--out-dir", default=".", help="directory for CSV and summary files")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized sweeps")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    return dispatch(args.subcommand, args.config, args.out_dir, args.seed)


if __name__ == "__main__":
    sys.exit(main())
