"""Uniform grid, finite-difference operators, trapezoid quadrature and the sine basis.

Two boundary closures are supported.  ``NEUMANN_ZERO`` mirrors the field
across the endpoint (``f[-1] = f[1]``); the first derivative is then exactly
zero at the endpoints.  ``DIRICHLET_ZERO`` uses the antisymmetric ghost
``f[-1] = 2 f[0] - f[1]``, which for a field vanishing at the endpoint is the
odd reflection ``-f[1]``.  With this closure the discrete second derivative is
zero at the endpoints, as it is for any odd-extendable smooth field, and the
first derivative reduces to ``f[1] / dx``.

The difference operators, together with the trapezoid weights, satisfy exact
summation-by-parts identities: ``D2_N`` annihilates constants in the weighted
sum, and ``<f, D1_N g> + <D1_D f, g> = 0`` whenever ``f`` vanishes at both
endpoints.  The solver relies on both to conserve the discrete total energy.
"""

from __future__ import annotations

import enum
import math
from fractions import Fraction
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, ContractError

__all__ = [
    "BoundaryKind",
    "Grid",
    "SineBasis",
    "make_grid",
    "derivative",
    "integrate",
    "face_gradient",
    "project_sine",
]


class BoundaryKind(enum.Enum):
    DIRICHLET_ZERO = "dirichlet"
    NEUMANN_ZERO = "neumann"


DIRICHLET = BoundaryKind.DIRICHLET_ZERO
NEUMANN = BoundaryKind.NEUMANN_ZERO


@dataclass(frozen=True)
class Grid:
    """Uniform mesh of ``n`` nodes on ``[a, b]``."""

    a: float
    b: float
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or self.a >= self.b:
            raise ConfigurationError(f"grid needs a < b, got a={self.a}, b={self.b}")
        if int(self.n) != self.n or self.n < 3:
            raise ConfigurationError(f"grid needs n >= 3 nodes, got n={self.n}")

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def dx(self) -> float:
        return (self.b - self.a) / (self.n - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        x = self.a + self.dx * np.arange(self.n)
        x[-1] = self.b
        return x

    @cached_property
    def weights(self) -> np.ndarray:
        w = np.full(self.n, self.dx)
        # end weights chosen so the correctly rounded sum is exactly b - a
        interior = Fraction(self.dx) * (self.n - 2)
        w[0] = w[-1] = float((Fraction(self.length) - interior) / 2)
        w.setflags(write=False)
        return w

    @property
    def xhat(self) -> np.ndarray:
        """Nodes rescaled to ``[0, 1]``."""
        return (self.nodes - self.a) / self.length


def make_grid(a: float, b: float, n: int) -> Grid:
    return Grid(float(a), float(b), int(n))


def _check_length(field: np.ndarray, grid: Grid) -> np.ndarray:
    f = np.asarray(field, dtype=float)
    if f.shape != (grid.n,):
        raise ContractError(f"field has shape {f.shape}, grid expects ({grid.n},)")
    return f


def derivative(field, grid: Grid, order: int, bc: BoundaryKind) -> np.ndarray:
    """Second-order central difference of ``field`` with ghost-point closure.

    ``order`` is 1 or 2.  Ghost values follow the module docstring.
    """
    f = _check_length(field, grid)
    dx = grid.dx
    out = np.empty_like(f)
    if order == 1:
        out[1:-1] = (f[2:] - f[:-2]) / (2.0 * dx)
        if bc is BoundaryKind.NEUMANN_ZERO:
            out[0] = out[-1] = 0.0
        else:
            out[0] = (f[1] - f[0]) / dx
            out[-1] = (f[-1] - f[-2]) / dx
    elif order == 2:
        out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (dx * dx)
        if bc is BoundaryKind.NEUMANN_ZERO:
            out[0] = 2.0 * (f[1] - f[0]) / (dx * dx)
            out[-1] = 2.0 * (f[-2] - f[-1]) / (dx * dx)
        else:
            out[0] = out[-1] = 0.0
    else:
        raise ContractError(f"derivative order must be 1 or 2, got {order}")
    return out


def face_gradient(field, grid: Grid) -> np.ndarray:
    """Forward differences ``(f[i+1] - f[i]) / dx`` on the ``n - 1`` cell faces."""
    f = _check_length(field, grid)
    return np.diff(f) / grid.dx


def integrate(field, grid: Grid) -> float:
    """Composite trapezoid rule, summed with correct rounding."""
    f = _check_length(field, grid)
    return math.fsum(grid.weights * f)


class SineBasis:
    """Modes ``sin(k pi (x - a) / (b - a))``, ``k = 1..n_modes``, sampled on a grid.

    The sampled modes are exactly orthogonal under the trapezoid rule as long as
    ``n_modes <= n - 2`` (discrete sine transform orthogonality), with
    ``<phi_k, phi_k> = (b - a) / 2``.
    """

    def __init__(self, n_modes: int, grid: Grid):
        if int(n_modes) != n_modes or n_modes < 1:
            raise ConfigurationError(f"n_modes must be a positive integer, got {n_modes}")
        if n_modes > grid.n - 2:
            raise ConfigurationError(
                f"n_modes={n_modes} exceeds the {grid.n - 2} modes resolvable on {grid.n} nodes"
            )
        self.n_modes = int(n_modes)
        self.grid = grid
        k = np.arange(1, self.n_modes + 1)
        self.wavenumbers = k * np.pi / grid.length
        arg = np.outer(k * np.pi, grid.xhat)
        self.modes = np.sin(arg)
        self.modes[:, 0] = 0.0
        self.modes[:, -1] = 0.0
        self.mode_derivatives = self.wavenumbers[:, None] * np.cos(arg)
        self.mass = self.modes**2 @ grid.weights

    def gram(self) -> np.ndarray:
        """Discrete L2 Gram matrix of the modes."""
        return (self.modes * self.grid.weights) @ self.modes.T

    def reconstruct(self, coeffs) -> np.ndarray:
        return np.asarray(coeffs, dtype=float) @ self.modes

    def reconstruct_derivative(self, coeffs) -> np.ndarray:
        """Exact x-derivative of the modal expansion, evaluated at the nodes."""
        return np.asarray(coeffs, dtype=float) @ self.mode_derivatives


def project_sine(field, basis: SineBasis, grid: Grid, tol: float = 1e-12) -> np.ndarray:
    """Discrete L2 projection coefficients ``<f, phi_k> / <phi_k, phi_k>``.

    For sine modes these coincide with the H1_0 projection coefficients, since
    the modes diagonalise ``-d^2/dx^2``.
    """
    f = _check_length(field, grid)
    scale = max(1.0, float(np.max(np.abs(f))))
    if abs(f[0]) > tol * scale or abs(f[-1]) > tol * scale:
        raise ContractError(
            f"projection needs zero endpoint values, got {f[0]:.3e} and {f[-1]:.3e}"
        )
    return (basis.modes @ (grid.weights * f)) / basis.mass
