"""Energy, Fisher information, entropy dissipation and the inequality checks.

All spatial derivatives come from :func:`thermo1d.domain.derivative`: the
temperature uses the Neumann closure, displacement and velocity the Dirichlet
one.  The elastic energy is evaluated on cell faces, which makes the discrete
total energy an exact invariant of the semi-discrete system.
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass, fields
from typing import NamedTuple

import numpy as np

from .domain import DIRICHLET, NEUMANN, Grid, derivative, face_gradient, integrate
from .errors import ContractError, FloorTripped
from .state import State

__all__ = [
    "THETA_FLOOR",
    "CFHS_CONSTANT",
    "DiagnosticsRow",
    "CfhsReport",
    "Prop33Report",
    "Energy",
    "energy",
    "fisher",
    "dissipation",
    "lyapunov",
    "coupling",
    "log_theta_norms",
    "diagnose",
    "identity_residual",
    "cfhs_check",
    "prop33_check",
    "inequality_tolerance",
]

THETA_FLOOR = 1e-12
CFHS_CONSTANT = 13.0 / 8.0


def inequality_tolerance(rhs: float) -> float:
    return 1e-8 * (1.0 + abs(rhs))


def _theta(state_or_theta, grid: Grid) -> np.ndarray:
    theta = getattr(state_or_theta, "theta", state_or_theta)
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (grid.n,):
        raise ContractError(f"theta has shape {theta.shape}, grid expects ({grid.n},)")
    tmin = float(np.min(theta))
    if not tmin > THETA_FLOOR:
        raise FloorTripped(f"min theta = {tmin!r} is not above the floor {THETA_FLOOR}")
    return theta


class Energy(NamedTuple):
    E_kin: float
    E_el: float
    E_th: float
    E_total: float


def energy(state: State, grid: Grid) -> Energy:
    e_kin = 0.5 * integrate(state.v**2, grid)
    e_el = 0.5 * grid.dx * float(np.sum(face_gradient(state.u, grid) ** 2))
    e_th = integrate(state.theta, grid)
    return Energy(e_kin, e_el, e_th, e_kin + e_el + e_th)


def fisher(state, grid: Grid) -> float:
    """``int theta_x^2 / theta``."""
    theta = _theta(state, grid)
    tx = derivative(theta, grid, 1, NEUMANN)
    return integrate(tx**2 / theta, grid)


def _log_theta_xx(theta: np.ndarray, grid: Grid) -> np.ndarray:
    tx = derivative(theta, grid, 1, NEUMANN)
    txx = derivative(theta, grid, 2, NEUMANN)
    return txx / theta - (tx / theta) ** 2


def dissipation(state, grid: Grid) -> float:
    """``int theta [(log theta)_xx]^2``, using ``(log theta)_xx = theta_xx/theta - (theta_x/theta)^2``."""
    theta = _theta(state, grid)
    return integrate(theta * _log_theta_xx(theta, grid) ** 2, grid)


def lyapunov(state: State, grid: Grid) -> float:
    """``(F + int v_x^2 + int u_xx^2) / 2``."""
    vx = derivative(state.v, grid, 1, DIRICHLET)
    uxx = derivative(state.u, grid, 2, DIRICHLET)
    return 0.5 * (fisher(state, grid) + integrate(vx**2, grid) + integrate(uxx**2, grid))


def coupling(state: State, grid: Grid, mu: float) -> float:
    """``(mu/2) int (theta_x^2 / theta) v_x``."""
    theta = _theta(state, grid)
    tx = derivative(theta, grid, 1, NEUMANN)
    vx = derivative(state.v, grid, 1, DIRICHLET)
    return 0.5 * mu * integrate(tx**2 / theta * vx, grid)


def log_theta_norms(state, grid: Grid) -> tuple[float, float]:
    """``(max |log theta|, ||log theta||_H1)``.

    The sup norm is rounded up, if needed, so that ``exp(-Linf) <= min theta``
    holds in floating point and not only in exact arithmetic.
    """
    theta = _theta(state, grid)
    tau = np.log(theta)
    linf = float(np.max(np.abs(tau)))
    tmin = float(np.min(theta))
    while math.exp(-linf) > tmin:
        linf = math.nextafter(linf, math.inf)
    tau_x = derivative(tau, grid, 1, NEUMANN)
    h1 = math.sqrt(integrate(tau**2, grid) + integrate(tau_x**2, grid))
    return linf, h1


@dataclass
class DiagnosticsRow:
    t: float
    E_kin: float
    E_el: float
    E_th: float
    E_total: float
    F: float
    L: float
    D: float
    G: float
    min_theta: float
    max_theta: float
    logtheta_Linf: float
    logtheta_H1: float
    residual: float = math.nan

    @classmethod
    def columns(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    def values(self) -> tuple[float, ...]:
        return astuple(self)

    @property
    def positivity_floor(self) -> float:
        """Lower bound ``exp(-||log theta||_inf)`` for the temperature."""
        return math.exp(-self.logtheta_Linf)


def diagnose(state: State, grid: Grid, mu: float) -> DiagnosticsRow:
    e = energy(state, grid)
    linf, h1 = log_theta_norms(state, grid)
    return DiagnosticsRow(
        t=float(state.t),
        E_kin=e.E_kin,
        E_el=e.E_el,
        E_th=e.E_th,
        E_total=e.E_total,
        F=fisher(state, grid),
        L=lyapunov(state, grid),
        D=dissipation(state, grid),
        G=coupling(state, grid, mu),
        min_theta=float(np.min(state.theta)),
        max_theta=float(np.max(state.theta)),
        logtheta_Linf=linf,
        logtheta_H1=h1,
    )


def identity_residual(traj, mu: float | None = None) -> np.ndarray:
    """Per-sample defect of ``dL/dt = -D + G`` along a trajectory.

    ``dL/dt`` is a second-order centred difference in time; the first and last
    entries use second-order one-sided stencils and should be read with that
    in mind.  With ``mu`` given, ``D`` and ``G`` are recomputed from the
    stored states; otherwise the cached rows are used.
    """
    rows = [row for _, row in traj.samples]
    if len(rows) < 3:
        raise ContractError("identity residual needs at least 3 samples")
    t = np.array([r.t for r in rows])
    steps = np.diff(t)
    if np.max(np.abs(steps - steps[0])) > 1e-9 * max(1.0, abs(t[-1])):
        raise ContractError("identity residual needs uniformly spaced samples")
    if mu is None:
        lyap = np.array([r.L for r in rows])
        diss = np.array([r.D for r in rows])
        coup = np.array([r.G for r in rows])
    else:
        grid = traj.grid
        states = [s for s, _ in traj.samples]
        lyap = np.array([lyapunov(s, grid) for s in states])
        diss = np.array([dissipation(s, grid) for s in states])
        coup = np.array([coupling(s, grid, mu) for s in states])
    dldt = np.gradient(lyap, steps[0], edge_order=2)
    return dldt + diss - coup


@dataclass(frozen=True)
class CfhsReport:
    lhs: float
    rhs: float
    ratio: float | None
    bound: float = CFHS_CONSTANT

    @property
    def violated(self) -> bool:
        return self.lhs > self.bound * self.rhs + inequality_tolerance(self.rhs)


def _check_neumann(psi: np.ndarray, grid: Grid) -> None:
    # second-order one-sided slopes; the mirrored central difference is zero by construction
    dx = grid.dx
    left = (-3.0 * psi[0] + 4.0 * psi[1] - psi[2]) / (2.0 * dx)
    right = (3.0 * psi[-1] - 4.0 * psi[-2] + psi[-3]) / (2.0 * dx)
    inner = np.abs(np.gradient(psi, dx))
    scale = float(np.max(inner))
    if max(abs(left), abs(right)) > 0.05 * scale + 1e-12 * float(np.max(np.abs(psi))):
        raise ContractError(
            f"psi does not satisfy the Neumann condition (endpoint slopes {left:.3e}, {right:.3e})"
        )


def cfhs_check(psi, grid: Grid) -> CfhsReport:
    """Both sides of ``int [(sqrt psi)_xx]^2 <= (13/8) int psi [(log psi)_xx]^2``."""
    psi = np.asarray(psi, dtype=float)
    if psi.shape != (grid.n,):
        raise ContractError(f"psi has shape {psi.shape}, grid expects ({grid.n},)")
    if not np.all(psi > 0.0):
        raise ContractError("psi must be positive")
    _check_neumann(psi, grid)
    root_xx = derivative(np.sqrt(psi), grid, 2, NEUMANN)
    lhs = integrate(root_xx**2, grid)
    rhs = integrate(psi * _log_theta_xx(psi, grid) ** 2, grid)
    ratio = lhs / rhs if rhs > 0.0 else None
    return CfhsReport(lhs, rhs, ratio)


@dataclass(frozen=True)
class Prop33Report:
    lhs: float
    rhs: float
    ok: bool


def prop33_check(state, grid: Grid) -> Prop33Report:
    """``(int (sqrt theta)_x^2)^2 <= (13/8) (int theta) D``; note ``int (sqrt theta)_x^2 = F/4``."""
    theta = _theta(state, grid)
    lhs = (fisher(theta, grid) / 4.0) ** 2
    rhs = CFHS_CONSTANT * integrate(theta, grid) * dissipation(theta, grid)
    return Prop33Report(lhs, rhs, lhs <= rhs + inequality_tolerance(rhs))
