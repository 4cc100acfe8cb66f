"""Finite-difference and half-Galerkin solver for one-dimensional thermoelasticity.

The displacement obeys ``u_tt - u_xx = mu theta_x`` with clamped ends and the
temperature ``theta_t - theta_xx = mu theta u_tx`` with insulated ends.
"""

from .diagnostics import (
    CFHS_CONSTANT,
    THETA_FLOOR,
    CfhsReport,
    DiagnosticsRow,
    Energy,
    Prop33Report,
    cfhs_check,
    coupling,
    diagnose,
    dissipation,
    energy,
    fisher,
    identity_residual,
    log_theta_norms,
    lyapunov,
    prop33_check,
)
from .domain import BoundaryKind, Grid, SineBasis, derivative, face_gradient, integrate, make_grid, project_sine
from .errors import (
    BoundaryViolation,
    ConfigurationError,
    ContractError,
    Diverged,
    FloorTripped,
    NonPositiveTemperature,
    PositivityGuardTripped,
    Thermo1dError,
)
from .solver import RunSpec, Scheme, Status, Trajectory, rhs, rhs_galerkin, run, stable_dt, step
from .state import GalerkinState, InitialData, State, preset, project_initial, validate_initial

__all__ = [name for name in dir() if not name.startswith("_")]
