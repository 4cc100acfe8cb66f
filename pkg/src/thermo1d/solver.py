"""Semi-discrete right-hand sides and time integration.

Two integrators are provided.  ``RK4`` is the classical four-stage method on
the whole coupled system and needs the parabolic step restriction.
``IMEX_CN`` is a Strang splitting: a half step of RK4 on the non-diffusive
part (wave, coupling, forcing), a Crank-Nicolson step of the Neumann heat
operator, and a closing half step of RK4.  Each sub-flow preserves the
discrete total energy of :func:`thermo1d.diagnostics.energy`, so energy drift
comes only from the explicit sub-steps and is of fourth order in ``dt``.

Both integrators run on the nodal representation and on the half-Galerkin one
(sine coefficients for ``u``, ``v``; nodal ``theta``).
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, NamedTuple, Union

import numpy as np
from scipy.linalg import solve_banded

from .diagnostics import DiagnosticsRow, diagnose, identity_residual
from .domain import DIRICHLET, NEUMANN, Grid, SineBasis, derivative, make_grid
from .errors import (
    ConfigurationError,
    ContractError,
    Diverged,
    FloorTripped,
    PositivityGuardTripped,
)
from .state import GalerkinState, InitialData, State, preset, project_initial

__all__ = [
    "Scheme",
    "Status",
    "RunSpec",
    "Trajectory",
    "StateDerivative",
    "GalerkinDerivative",
    "rhs",
    "rhs_galerkin",
    "stable_dt",
    "n_steps",
    "step",
    "run",
    "CFL_WAVE",
    "CFL_DIFFUSION",
]

CFL_WAVE = 0.5
CFL_DIFFUSION = 0.25

# forcing(t) -> (f_u, f_theta), added to dv/dt and dtheta/dt
Forcing = Callable[[float], "tuple[np.ndarray, np.ndarray]"]


class Scheme(enum.Enum):
    RK4 = "rk4"
    IMEX_CN = "imex-cn"

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        for member in cls:
            if member.value == key:
                return member
        raise ConfigurationError(f"unknown scheme {value!r}; choose 'rk4' or 'imex-cn'")


class Status(enum.Enum):
    COMPLETED = "Completed"
    GUARD_TRIPPED = "PositivityGuardTripped"
    DIVERGED = "Diverged"


class StateDerivative(NamedTuple):
    du: np.ndarray
    dv: np.ndarray
    dtheta: np.ndarray


class GalerkinDerivative(NamedTuple):
    duc: np.ndarray
    dvc: np.ndarray
    dtheta: np.ndarray


def stable_dt(grid: Grid, scheme: Scheme, T: float | None = None) -> float:
    """Largest step allowed by the CFL constants; snapped to divide ``T`` if given."""
    dx = grid.dx
    scheme = Scheme.parse(scheme)
    if scheme is Scheme.RK4:
        dt = min(CFL_WAVE * dx, CFL_DIFFUSION * dx * dx)
    else:
        dt = CFL_WAVE * dx
    if T is not None:
        dt = T / n_steps(T, dt)
    return dt


def n_steps(T: float, dt: float) -> int:
    """Number of steps of size at most ``dt`` covering ``[0, T]``."""
    return max(1, math.ceil(T / dt - 1e-9))


# ---------------------------------------------------------------------------
# semi-discrete systems, operating on tuples (q, p, theta)


class _GridSystem:
    def __init__(self, grid: Grid, mu: float, forcing: Forcing | None = None):
        self.grid = grid
        self.mu = float(mu)
        self.forcing = forcing

    def explicit(self, t, y):
        u, v, theta = y
        dv = derivative(u, self.grid, 2, DIRICHLET) + self.mu * derivative(theta, self.grid, 1, NEUMANN)
        dtheta = self.mu * theta * derivative(v, self.grid, 1, DIRICHLET)
        if self.forcing is not None:
            fu, ftheta = self.forcing(t)
            dv = dv + fu
            dtheta = dtheta + ftheta
        dv[0] = dv[-1] = 0.0
        return (v.copy(), dv, dtheta)

    def full(self, t, y):
        du, dv, dtheta = self.explicit(t, y)
        return (du, dv, dtheta + derivative(y[2], self.grid, 2, NEUMANN))

    @staticmethod
    def fix(y):
        u, v, theta = y
        u[0] = u[-1] = 0.0
        v[0] = v[-1] = 0.0
        return y


class _GalerkinSystem:
    def __init__(self, grid: Grid, mu: float, basis: SineBasis):
        self.grid = grid
        self.mu = float(mu)
        self.basis = basis
        self.omega2 = basis.wavenumbers**2
        # weak coupling: <theta, phi_k'> / <phi_k, phi_k>
        self.coupling = (basis.mode_derivatives * grid.weights) / basis.mass[:, None]

    def explicit(self, t, y):
        uc, vc, theta = y
        # the coupling rows annihilate constants; the shift makes that hold in floating point too
        dvc = -self.omega2 * uc - self.mu * (self.coupling @ (theta - theta[0]))
        dtheta = self.mu * theta * self.basis.reconstruct_derivative(vc)
        return (vc.copy(), dvc, dtheta)

    def full(self, t, y):
        duc, dvc, dtheta = self.explicit(t, y)
        return (duc, dvc, dtheta + derivative(y[2], self.grid, 2, NEUMANN))

    @staticmethod
    def fix(y):
        return y


def _axpy(y, k, h):
    return tuple(a + h * b for a, b in zip(y, k))


def _rk4(f, fix, t, y, dt):
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, fix(_axpy(y, k1, 0.5 * dt)))
    k3 = f(t + 0.5 * dt, fix(_axpy(y, k2, 0.5 * dt)))
    k4 = f(t + dt, fix(_axpy(y, k3, dt)))
    return fix(tuple(a + dt / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
                     for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)))


class _CrankNicolson:
    """``(I - dt/2 D2) theta_new = (I + dt/2 D2) theta_old`` with the mirrored Neumann closure.

    Solved for the increment, so constant temperatures are reproduced bit for bit.
    """

    def __init__(self, grid: Grid, dt: float):
        self.grid = grid
        self.half = 0.5 * dt
        n = grid.n
        r = self.half / grid.dx**2
        ab = np.zeros((3, n))
        ab[0, 2:] = -r
        ab[0, 1] = -2.0 * r
        ab[1, :] = 1.0 + 2.0 * r
        ab[2, :-2] = -r
        ab[2, n - 2] = -2.0 * r
        self.ab = ab

    def __call__(self, theta):
        lap = derivative(theta, self.grid, 2, NEUMANN)
        return theta + solve_banded((1, 1), self.ab, 2.0 * self.half * lap, check_finite=False)


class _Stepper:
    def __init__(self, system, scheme: Scheme, dt: float, guard: float):
        self.system = system
        self.scheme = Scheme.parse(scheme)
        self.dt = float(dt)
        self.guard = float(guard)
        self.cn = _CrankNicolson(system.grid, dt) if self.scheme is Scheme.IMEX_CN else None

    def __call__(self, t, y):
        sysm, dt = self.system, self.dt
        if self.scheme is Scheme.RK4:
            y = _rk4(sysm.full, sysm.fix, t, y, dt)
        else:
            y = _rk4(sysm.explicit, sysm.fix, t, y, 0.5 * dt)
            y = (y[0], y[1], self.cn(y[2]))
            y = _rk4(sysm.explicit, sysm.fix, t + 0.5 * dt, y, 0.5 * dt)
        if not all(np.all(np.isfinite(a)) for a in y):
            raise Diverged(f"non-finite values after step from t={t!r}")
        tmin = float(np.min(y[2]))
        if tmin <= self.guard:
            raise PositivityGuardTripped(
                f"min theta = {tmin!r} at t={t + dt!r} reached the guard {self.guard!r}"
            )
        return y


def _check_theta(theta):
    if not float(np.min(theta)) > 0.0:
        raise PositivityGuardTripped(f"non-positive temperature, min = {float(np.min(theta))!r}")


def rhs(state: State, mu: float, grid: Grid, forcing: Forcing | None = None) -> StateDerivative:
    """Time derivative of the nodal semi-discrete system."""
    if state.u.shape != (grid.n,):
        raise ContractError(f"state has {state.u.size} nodes, grid has {grid.n}")
    _check_theta(state.theta)
    system = _GridSystem(grid, mu, forcing)
    y = (np.array(state.u), np.array(state.v), np.array(state.theta))
    return StateDerivative(*system.full(state.t, y))


def rhs_galerkin(state: GalerkinState, mu: float, grid: Grid, basis: SineBasis) -> GalerkinDerivative:
    """Time derivative of the half-Galerkin system.

    The momentum equation is tested against each mode with the derivative
    moved onto the mode; the heat equation is nodal, driven by the exact
    x-derivative of the modal velocity.
    """
    if state.uc.shape != (basis.n_modes,):
        raise ContractError(f"state has {state.uc.size} modes, basis has {basis.n_modes}")
    _check_theta(state.theta)
    system = _GalerkinSystem(grid, mu, basis)
    y = (np.array(state.uc), np.array(state.vc), np.array(state.theta))
    return GalerkinDerivative(*system.full(state.t, y))


def step(state, dt: float, mu: float, grid: Grid, scheme: Scheme, basis: SineBasis | None = None,
         theta_floor_guard: float = 0.0, forcing: Forcing | None = None):
    """Advance a :class:`State` or :class:`GalerkinState` by one step of size ``dt``."""
    if isinstance(state, GalerkinState):
        if basis is None:
            raise ContractError("stepping a GalerkinState needs its basis")
        if forcing is not None:
            raise ContractError("forcing is only supported on the nodal system")
        system = _GalerkinSystem(grid, mu, basis)
        y = (state.uc, state.vc, state.theta)
    else:
        system = _GridSystem(grid, mu, forcing)
        y = (state.u, state.v, state.theta)
    q, p, theta = _Stepper(system, scheme, dt, theta_floor_guard)(state.t, y)
    return type(state)(state.t + dt, q, p, theta)


# ---------------------------------------------------------------------------
# run configuration and driver


@dataclass(frozen=True)
class RunSpec:
    a: float = 0.0
    b: float = 1.0
    n: int = 101
    mu: float = 1.0
    T: float = 1.0
    dt: Union[float, str] = "auto"
    scheme: Scheme = Scheme.IMEX_CN
    n_modes: Union[int, str] = "grid"
    preset: str = "bump"
    preset_params: Mapping = field(default_factory=dict)
    sample_every: int = 1
    theta_floor_guard: float = 0.0
    csv_path: str = "diagnostics.csv"
    json_path: str = "summary.json"

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        object.__setattr__(self, "preset_params", dict(self.preset_params))
        grid = self.grid()
        if not (math.isfinite(self.T) and self.T > 0.0):
            raise ConfigurationError(f"time.T must be positive, got {self.T!r}")
        if isinstance(self.dt, str):
            if self.dt != "auto":
                raise ConfigurationError(f"time.dt must be a positive number or 'auto', got {self.dt!r}")
        elif not (math.isfinite(self.dt) and self.dt > 0.0):
            raise ConfigurationError(f"time.dt must be positive, got {self.dt!r}")
        if isinstance(self.n_modes, str):
            if self.n_modes != "grid":
                raise ConfigurationError(f"galerkin.n_modes must be an integer or 'grid', got {self.n_modes!r}")
        elif int(self.n_modes) != self.n_modes or not 1 <= self.n_modes <= grid.n / 2:
            raise ConfigurationError(
                f"galerkin.n_modes must be an integer in [1, n/2] = [1, {grid.n // 2}], got {self.n_modes!r}"
            )
        if int(self.sample_every) != self.sample_every or self.sample_every < 1:
            raise ConfigurationError(f"output.sample_every must be >= 1, got {self.sample_every!r}")
        if not self.theta_floor_guard >= 0.0:
            raise ConfigurationError(f"guards.theta_floor_guard must be >= 0, got {self.theta_floor_guard!r}")

    def grid(self) -> Grid:
        return make_grid(self.a, self.b, self.n)

    @property
    def galerkin(self) -> bool:
        return not isinstance(self.n_modes, str)

    def time_steps(self) -> tuple[float, int]:
        """Resolved ``(dt, number_of_steps)`` with ``dt * steps == T``."""
        dt = stable_dt(self.grid(), self.scheme) if self.dt == "auto" else float(self.dt)
        steps = n_steps(self.T, dt)
        return self.T / steps, steps

    def replace(self, **changes) -> "RunSpec":
        return dataclasses.replace(self, **changes)


@dataclass
class Trajectory:
    spec: RunSpec
    samples: list = field(default_factory=list)
    status: Status = Status.COMPLETED
    message: str = ""

    @property
    def grid(self) -> Grid:
        return self.spec.grid()

    @property
    def states(self) -> list[State]:
        return [s for s, _ in self.samples]

    @property
    def rows(self) -> list[DiagnosticsRow]:
        return [r for _, r in self.samples]

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for _, r in self.samples])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for _, r in self.samples])


def run(spec: RunSpec, *, initial: InitialData | None = None, forcing: Forcing | None = None) -> Trajectory:
    """Integrate from ``t = 0`` to ``spec.T``, sampling diagnostics along the way.

    Initial data come from ``spec.preset`` unless ``initial`` is given;
    configuration errors raise before stepping starts.  Guard and divergence
    events end the run early and are reported through ``status``.
    """
    grid = spec.grid()
    data = initial if initial is not None else preset(spec.preset, grid, spec.preset_params)
    dt, steps = spec.time_steps()
    if spec.galerkin:
        if forcing is not None:
            raise ContractError("forcing is only supported on the nodal system")
        basis = SineBasis(spec.n_modes, grid)
        g0 = project_initial(data, basis)
        system = _GalerkinSystem(grid, spec.mu, basis)
        y = (np.array(g0.uc), np.array(g0.vc), np.array(g0.theta))

        def nodal(t, y):
            return State(t, basis.reconstruct(y[0]), basis.reconstruct(y[1]), y[2])
    else:
        system = _GridSystem(grid, spec.mu, forcing)
        y = (np.array(data.u0), np.array(data.v0), np.array(data.theta0))

        def nodal(t, y):
            return State(t, y[0], y[1], y[2])

    stepper = _Stepper(system, spec.scheme, dt, spec.theta_floor_guard)
    traj = Trajectory(spec)

    def record(t, y):
        s = nodal(t, y)
        traj.samples.append((s, diagnose(s, grid, spec.mu)))

    try:
        # a blow-up is reported through the status; overflow warnings on the way add nothing
        with np.errstate(over="ignore", invalid="ignore"):
            record(0.0, y)
            for i in range(1, steps + 1):
                t_prev = spec.T * (i - 1) / steps
                y = stepper(t_prev, y)
                if i % spec.sample_every == 0 or i == steps:
                    record(spec.T * i / steps, y)
    except (PositivityGuardTripped, FloorTripped) as exc:
        traj.status, traj.message = Status.GUARD_TRIPPED, str(exc)
    except Diverged as exc:
        traj.status, traj.message = Status.DIVERGED, str(exc)

    with np.errstate(over="ignore", invalid="ignore"):
        _fill_residuals(traj)
    return traj


def _fill_residuals(traj: Trajectory) -> None:
    t = traj.times
    if len(t) < 3:
        return
    steps = np.diff(t)
    uniform = np.abs(steps - steps[0]) <= 1e-9 * max(1.0, abs(t[-1]))
    # a shorter final interval (steps not divisible by sample_every) is left out
    m = len(t) if uniform.all() else int(np.argmin(uniform)) + 1
    if m < 3:
        return
    prefix = Trajectory(traj.spec, traj.samples[:m], traj.status)
    res = identity_residual(prefix)
    for (_, row), r in zip(traj.samples[:m], res):
        row.residual = float(r)
