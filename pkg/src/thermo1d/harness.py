"""Composite experiments: manufactured solutions, bound fits, uniqueness, sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .diagnostics import cfhs_check
from .domain import DIRICHLET, NEUMANN, Grid, derivative, integrate
from .errors import ContractError
from .solver import RunSpec, Scheme, Status, Trajectory, run, stable_dt
from .state import InitialData, preset, validate_initial

__all__ = [
    "ConvergenceRow",
    "ConvergenceTable",
    "BoundFit",
    "UniquenessReport",
    "CfhsSweepReport",
    "manufactured_fields",
    "manufactured_forcing",
    "manufactured_convergence",
    "exp_bound_fit",
    "uniqueness_experiment",
    "galerkin_sweep",
    "bound_quantities",
    "sup_difference",
    "scheme_agreement",
    "random_neumann_function",
    "cfhs_property_sweep",
]


@dataclass
class ConvergenceRow:
    resolution: int
    error: float
    order: float | None = None
    extra: dict = field(default_factory=dict)


@dataclass
class ConvergenceTable:
    rows: list[ConvergenceRow] = field(default_factory=list)
    label: str = ""
    reference: dict = field(default_factory=dict)

    @property
    def errors(self) -> np.ndarray:
        return np.array([r.error for r in self.rows])

    @property
    def orders(self) -> list[float | None]:
        return [r.order for r in self.rows]

    def append(self, resolution: int, error: float, **extra) -> None:
        order = None
        if self.rows:
            prev = self.rows[-1]
            if prev.error > 0.0 and error > 0.0:
                order = math.log(prev.error / error) / math.log(resolution / prev.resolution)
        self.rows.append(ConvergenceRow(resolution, error, order, extra))


# ---------------------------------------------------------------------------
# manufactured solution
#
# With s = sin(pi xh), c = cos(pi xh), xh = (x - a)/(b - a), k = pi/(b - a):
#   u*  = s cos t,       v* = -s sin t,       theta* = 2 + exp(-t) c
#   u*_tt - u*_xx - mu theta*_x
#       = s [(k^2 - 1) cos t + mu k exp(-t)]
#   theta*_t - theta*_xx - mu theta* u*_tx
#       = exp(-t) c (k^2 - 1) + mu k c sin t (2 + exp(-t) c)


def manufactured_fields(grid: Grid, t: float):
    """Exact ``(u, v, theta)`` of the manufactured problem at time ``t``."""
    s = np.sin(np.pi * grid.xhat)
    s[0] = s[-1] = 0.0
    c = np.cos(np.pi * grid.xhat)
    return s * math.cos(t), -s * math.sin(t), 2.0 + math.exp(-t) * c


def manufactured_forcing(grid: Grid, mu: float):
    """Forcing ``f(t) -> (f_u, f_theta)`` for which the manufactured fields are exact."""
    k = math.pi / grid.length
    s = np.sin(np.pi * grid.xhat)
    s[0] = s[-1] = 0.0
    c = np.cos(np.pi * grid.xhat)

    def forcing(t):
        e = math.exp(-t)
        fu = s * ((k * k - 1.0) * math.cos(t) + mu * k * e)
        ftheta = e * c * (k * k - 1.0) + mu * k * c * math.sin(t) * (2.0 + e * c)
        return fu, ftheta

    return forcing


def _manufactured_initial(grid: Grid) -> InitialData:
    u0, v0, theta0 = manufactured_fields(grid, 0.0)
    return validate_initial(InitialData(u0, v0, theta0, float(np.min(theta0))))


def _l2_errors(traj: Trajectory) -> dict:
    grid = traj.grid
    final = traj.states[-1]
    u, v, theta = manufactured_fields(grid, final.t)
    eu = math.sqrt(integrate((final.u - u) ** 2, grid))
    ev = math.sqrt(integrate((final.v - v) ** 2, grid))
    etheta = math.sqrt(integrate((final.theta - theta) ** 2, grid))
    return {"u": eu, "v": ev, "theta": etheta, "total": math.sqrt(eu**2 + ev**2 + etheta**2)}


def manufactured_convergence(base_spec: RunSpec, levels: int, steps_only: int | None = None) -> ConvergenceTable:
    """L2 errors at ``T`` against the manufactured solution, doubling ``n - 1`` per level.

    The step is ``stable_dt`` of each level unless ``base_spec.dt`` is numeric,
    in which case it is scaled with ``dx``.  The preset in ``base_spec`` is
    ignored.  With ``steps_only`` the run stops after that many steps (used for
    local-error checks).
    """
    if levels < 3:
        raise ContractError("manufactured_convergence needs at least 3 levels")
    if base_spec.galerkin:
        raise ContractError("manufactured solutions are run on the nodal system")
    table = ConvergenceTable(label="manufactured")
    for level in range(levels):
        n = (base_spec.n - 1) * 2**level + 1
        spec = base_spec.replace(n=n)
        grid = spec.grid()
        if isinstance(base_spec.dt, str):
            dt = stable_dt(grid, spec.scheme)
        else:
            dt = float(base_spec.dt) / 2**level
        if steps_only is not None:
            spec = spec.replace(T=steps_only * dt, dt=dt, sample_every=max(1, steps_only))
        else:
            spec = spec.replace(dt=dt, sample_every=10**9)
        traj = run(spec, initial=_manufactured_initial(grid), forcing=manufactured_forcing(grid, spec.mu))
        if traj.status is not Status.COMPLETED:
            raise ContractError(f"manufactured run at n={n} ended with {traj.status.value}: {traj.message}")
        errs = _l2_errors(traj)
        table.append(n - 1, errs["total"], n=n, dt=spec.time_steps()[0], **{f"error_{k}": v for k, v in errs.items()})
    return table


# ---------------------------------------------------------------------------
# exponential bound


@dataclass
class BoundFit:
    C1: float
    C2: float
    max_relative_excess: float
    degenerate: bool = False
    slope_intercept: tuple[float, float] = (0.0, 0.0)


def _exp_fit(t: np.ndarray, y: np.ndarray):
    """Least-squares line through ``log y``; intercept inflated to dominate every sample."""
    slope, intercept = np.polyfit(t, np.log(y), 1)
    c1 = math.exp(intercept)
    c1 *= max(1.0, float(np.max(y / (c1 * np.exp(slope * t)))))
    while float(np.max(y / (c1 * np.exp(slope * t)))) > 1.0:
        c1 = math.nextafter(c1, math.inf)
    excess = float(np.max(y / (c1 * np.exp(slope * t)))) - 1.0
    return c1, float(slope), excess, (float(slope), float(intercept))


def exp_bound_fit(traj: Trajectory) -> BoundFit:
    """Fit ``L(t) <= C1 exp(C2 t)`` to the Lyapunov column of a completed run."""
    if traj.status is not Status.COMPLETED:
        raise ContractError(f"cannot fit a bound to a run that ended with {traj.status.value}")
    t = traj.times
    lyap = traj.column("L")
    if len(t) < 2 or float(np.max(lyap)) <= 0.0:
        return BoundFit(0.0, 0.0, 0.0, degenerate=True)
    if np.any(lyap <= 0.0):
        raise ContractError("Lyapunov functional vanishes at some samples but not all")
    c1, c2, excess, line = _exp_fit(t, lyap)
    return BoundFit(c1, c2, excess, False, line)


# ---------------------------------------------------------------------------
# uniqueness by perturbation


@dataclass
class UniquenessReport:
    delta: float
    times: np.ndarray
    N: np.ndarray
    growth_rate: float
    gronwall_rate: float
    max_violation: float
    degenerate: bool
    statuses: tuple[Status, Status]


def _difference_norm(s1, s2, grid: Grid) -> float:
    dv = s1.v - s2.v
    dux = derivative(s1.u - s2.u, grid, 1, DIRICHLET)
    dtheta = s1.theta - s2.theta
    return integrate(dv**2, grid) + integrate(dux**2, grid) + integrate(dtheta**2, grid)


def uniqueness_experiment(spec: RunSpec, delta: float) -> UniquenessReport:
    """Twin runs with ``theta0`` and ``theta0 + delta cos(pi xh)``; growth of their squared distance.

    ``growth_rate`` is the least-squares slope of ``log N``; ``gronwall_rate``
    is the smallest ``c`` with ``N(t) <= N(0) exp(c t)`` at every sample.
    """
    if delta < 0.0:
        raise ContractError("delta must be >= 0")
    grid = spec.grid()
    base = preset(spec.preset, grid, spec.preset_params)
    theta = base.theta0 + delta * np.cos(np.pi * grid.xhat)
    perturbed = validate_initial(InitialData(base.u0, base.v0, theta, float(np.min(theta))))
    first = run(spec, initial=base)
    second = run(spec, initial=perturbed)
    m = min(len(first.samples), len(second.samples))
    times = first.times[:m]
    N = np.array([_difference_norm(a, b, grid) for a, b in zip(first.states[:m], second.states[:m])])
    statuses = (first.status, second.status)
    if m < 2 or N[0] <= 0.0 or np.any(N <= 0.0):
        return UniquenessReport(delta, times, N, 0.0, 0.0, float(np.max(N) - N[0]) if m else 0.0,
                                True, statuses)
    slope, _ = np.polyfit(times, np.log(N), 1)
    later = times > 0.0
    gronwall = float(np.max(np.log(N[later] / N[0]) / times[later]))
    violation = float(np.max(N - N[0] * np.exp(gronwall * times)))
    return UniquenessReport(delta, times, N, float(slope), gronwall, violation, False, statuses)


# ---------------------------------------------------------------------------
# Galerkin sweep and norm quantities


def bound_quantities(traj: Trajectory) -> dict:
    """Discrete analogues of the uniform-in-n estimates of the half-Galerkin scheme."""
    grid = traj.grid
    u_h2 = ut_h1 = theta_h1 = 0.0
    for s in traj.states:
        ux = derivative(s.u, grid, 1, DIRICHLET)
        uxx = derivative(s.u, grid, 2, DIRICHLET)
        vx = derivative(s.v, grid, 1, DIRICHLET)
        tx = derivative(s.theta, grid, 1, NEUMANN)
        u_h2 = max(u_h2, math.sqrt(integrate(s.u**2 + ux**2 + uxx**2, grid)))
        ut_h1 = max(ut_h1, math.sqrt(integrate(s.v**2 + vx**2, grid)))
        theta_h1 = max(theta_h1, math.sqrt(integrate(s.theta**2 + tx**2, grid)))
    t = traj.times
    thetas = np.array([s.theta for s in traj.states])
    theta_t = np.gradient(thetas, t, axis=0, edge_order=2)
    inner = np.array([integrate(row**2, grid) for row in theta_t])
    theta_t_l2 = math.sqrt(float(trapezoid(inner, t)))
    return {"u_H2": u_h2, "ut_H1": ut_h1, "theta_H1": theta_h1, "theta_t_L2L2": theta_t_l2}


def sup_difference(first: Trajectory, second: Trajectory) -> float:
    """Max over shared sample times and nodes of ``|u1-u2|, |v1-v2|, |theta1-theta2|``."""
    t1, t2 = first.times, second.times
    worst = 0.0
    j = 0
    for i, t in enumerate(t1):
        while j < len(t2) and t2[j] < t - 1e-9:
            j += 1
        if j == len(t2):
            break
        if abs(t2[j] - t) > 1e-9:
            continue
        a, b = first.states[i], second.states[j]
        worst = max(worst, float(np.max(np.abs(a.u - b.u))), float(np.max(np.abs(a.v - b.v))),
                    float(np.max(np.abs(a.theta - b.theta))))
    return worst


def galerkin_sweep(spec: RunSpec, mode_counts, initial: InitialData | None = None) -> ConvergenceTable:
    """Half-Galerkin runs at each mode count against a full-grid reference run."""
    counts = [int(m) for m in mode_counts]
    if any(b <= a for a, b in zip(counts, counts[1:])):
        raise ContractError("mode_counts must be strictly increasing")
    if counts and counts[-1] > spec.n / 2:
        raise ContractError(f"mode counts must not exceed n/2 = {spec.n // 2}")
    ref = run(spec.replace(n_modes="grid"), initial=initial)
    table = ConvergenceTable(label="galerkin", reference=bound_quantities(ref))
    for m in counts:
        traj = run(spec.replace(n_modes=m), initial=initial)
        table.append(m, sup_difference(traj, ref), status=traj.status.value, **bound_quantities(traj))
    return table


def scheme_agreement(spec: RunSpec, sample_dt: float) -> float:
    """Sup-norm difference between IMEX-CN and RK4 runs of ``spec``, each at its own ``stable_dt``.

    Both runs are sampled every ``sample_dt``, which must be a multiple of both steps.
    """
    trajs = []
    for scheme in (Scheme.IMEX_CN, Scheme.RK4):
        s = spec.replace(scheme=scheme, dt="auto")
        dt, _ = s.time_steps()
        every = round(sample_dt / dt)
        if every < 1 or abs(every * dt - sample_dt) > 1e-9 * sample_dt:
            raise ContractError(f"sample_dt={sample_dt} is not a multiple of the {scheme.value} step {dt}")
        trajs.append(run(s.replace(sample_every=every)))
    return sup_difference(*trajs)


# ---------------------------------------------------------------------------
# CFHS sweep


def random_neumann_function(rng: np.random.Generator, grid: Grid, max_modes: int = 8,
                            amplitude: float = 1.0) -> np.ndarray:
    """``c0 + sum a_k cos(k pi xh)`` with ``c0 = 1 + sum |a_k|``; positive and Neumann by construction."""
    k = int(rng.integers(1, max_modes + 1))
    a = amplitude * rng.uniform(-1.0, 1.0, size=k)
    c0 = 1.0 + float(np.sum(np.abs(a)))
    modes = np.cos(np.outer(np.arange(1, k + 1) * np.pi, grid.xhat))
    return c0 + a @ modes


@dataclass
class CfhsSweepReport:
    count: int
    seed: int
    ratios: np.ndarray
    violations: list[int]
    max_ratio: float
    n_undefined: int


def cfhs_property_sweep(count: int, seed: int, grid: Grid, max_modes: int = 8,
                        amplitude: float = 1.0) -> CfhsSweepReport:
    if count < 1:
        raise ContractError("count must be >= 1")
    rng = np.random.default_rng(seed)
    ratios = np.full(count, np.nan)
    violations = []
    for i in range(count):
        report = cfhs_check(random_neumann_function(rng, grid, max_modes, amplitude), grid)
        if report.ratio is not None:
            ratios[i] = report.ratio
        if report.violated:
            violations.append(i)
    defined = ratios[~np.isnan(ratios)]
    max_ratio = float(np.max(defined)) if defined.size else math.nan
    return CfhsSweepReport(count, seed, ratios, violations, max_ratio, int(np.sum(np.isnan(ratios))))
