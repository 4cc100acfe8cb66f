"""Solution states, initial-data presets and the half-Galerkin representation."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .domain import Grid, SineBasis, project_sine
from .errors import BoundaryViolation, ConfigurationError, ContractError, NonPositiveTemperature

__all__ = [
    "State",
    "InitialData",
    "GalerkinState",
    "PRESETS",
    "validate_initial",
    "preset",
    "project_initial",
    "load_table",
    "ENDPOINT_TOL",
]

ENDPOINT_TOL = 1e-12


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class State:
    """Nodal displacement ``u``, velocity ``v = u_t`` and temperature ``theta`` at time ``t``."""

    t: float
    u: np.ndarray
    v: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        for name in ("u", "v", "theta"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        if not (self.u.shape == self.v.shape == self.theta.shape) or self.u.ndim != 1:
            raise ContractError("u, v and theta must be 1D arrays of equal length")


@dataclass(frozen=True, eq=False)
class GalerkinState:
    """Sine coefficients ``uc``, ``vc`` of displacement and velocity; nodal temperature."""

    t: float
    uc: np.ndarray
    vc: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        for name in ("uc", "vc", "theta"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        if self.uc.shape != self.vc.shape:
            raise ContractError("uc and vc must have equal length")

    def to_nodal(self, basis: SineBasis) -> State:
        return State(self.t, basis.reconstruct(self.uc), basis.reconstruct(self.vc), self.theta)


@dataclass(frozen=True, eq=False)
class InitialData:
    u0: np.ndarray
    v0: np.ndarray
    theta0: np.ndarray
    theta_floor: float

    def __post_init__(self):
        for name in ("u0", "v0", "theta0"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    def to_state(self) -> State:
        return State(0.0, self.u0, self.v0, self.theta0)


def validate_initial(data: InitialData) -> InitialData:
    """Check endpoint values, positivity and the temperature floor; return ``data``."""
    if not (data.u0.shape == data.v0.shape == data.theta0.shape) or data.u0.ndim != 1:
        raise ContractError("u0, v0 and theta0 must be 1D arrays of equal length")
    for name in ("u0", "v0", "theta0"):
        if not np.all(np.isfinite(getattr(data, name))):
            raise ContractError(f"{name} contains non-finite values")
    for name in ("u0", "v0"):
        f = getattr(data, name)
        if abs(f[0]) > ENDPOINT_TOL or abs(f[-1]) > ENDPOINT_TOL:
            raise BoundaryViolation(f"{name} must vanish at both endpoints (got {f[0]!r}, {f[-1]!r})")
    tmin = float(np.min(data.theta0))
    if tmin <= 0.0:
        raise NonPositiveTemperature(f"theta0 must be positive, min is {tmin!r}")
    if not data.theta_floor > 0.0:
        raise NonPositiveTemperature(f"theta_floor must be positive, got {data.theta_floor!r}")
    if tmin < data.theta_floor:
        raise NonPositiveTemperature(
            f"theta0 dips to {tmin!r}, below the declared floor {data.theta_floor!r}"
        )
    return data


def _rest(grid: Grid, theta: float = 1.0):
    z = np.zeros(grid.n)
    return z, z, np.full(grid.n, float(theta))


def _sine_mode(grid: Grid, k: int = 1, A: float = 0.1, theta: float = 1.0):
    if int(k) != k or k < 1:
        raise ConfigurationError(f"sine-mode needs a positive integer k, got {k}")
    u0 = A * np.sin(int(k) * np.pi * grid.xhat)
    u0[0] = u0[-1] = 0.0
    return u0, np.zeros(grid.n), np.full(grid.n, float(theta))


def _bump(grid: Grid, c: float = 2.0, A: float = 0.5):
    z = np.zeros(grid.n)
    return z, z, c + A * np.cos(np.pi * grid.xhat)


def _custom_table(grid: Grid, path: str | Path):
    return load_table(path, grid)


PRESETS = {
    "rest": _rest,
    "sine-mode": _sine_mode,
    "bump": _bump,
    "custom-table": _custom_table,
}

PRESET_PARAMS = {
    "rest": {"theta": float},
    "sine-mode": {"k": int, "A": float, "theta": float},
    "bump": {"c": float, "A": float},
    "custom-table": {"path": str},
}


def load_table(path: str | Path, grid: Grid):
    """Read ``x u0 v0 theta0`` rows; ``x`` must reproduce the grid nodes."""
    try:
        table = np.loadtxt(path, dtype=float, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigurationError(f"cannot read table {path}: {exc}") from exc
    if table.shape != (grid.n, 4):
        raise ConfigurationError(
            f"table {path} has shape {table.shape}, expected ({grid.n}, 4) for this grid"
        )
    x = table[:, 0]
    if np.max(np.abs(x - grid.nodes)) > 1e-12 * max(1.0, abs(grid.a), abs(grid.b)):
        raise ConfigurationError(f"table {path} nodes do not match the run grid")
    return table[:, 1].copy(), table[:, 2].copy(), table[:, 3].copy()


def preset(name: str, grid: Grid, params: Mapping | None = None) -> InitialData:
    """Build validated initial data from a named preset.

    ``theta_floor`` is set to the minimum of ``theta0``.
    """
    params = dict(params or {})
    if name not in PRESETS:
        raise ConfigurationError(f"unknown preset {name!r}; choose one of {sorted(PRESETS)}")
    unknown = set(params) - set(PRESET_PARAMS[name])
    if unknown:
        raise ConfigurationError(f"preset {name!r} does not take {sorted(unknown)}")
    u0, v0, theta0 = PRESETS[name](grid, **params)
    floor = float(np.min(theta0))
    if floor <= 0.0:
        raise NonPositiveTemperature(f"preset {name!r} gives min theta0 = {floor!r}")
    return validate_initial(InitialData(u0, v0, theta0, floor))


def project_initial(data: InitialData, basis: SineBasis) -> GalerkinState:
    """Project ``u0``, ``v0`` onto the sine modes; the temperature is kept nodal."""
    grid = basis.grid
    uc = project_sine(data.u0, basis, grid, tol=ENDPOINT_TOL)
    vc = project_sine(data.v0, basis, grid, tol=ENDPOINT_TOL)
    return GalerkinState(0.0, uc, vc, data.theta0)
