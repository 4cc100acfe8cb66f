import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from thermo1d import (
    CFHS_CONSTANT,
    ContractError,
    DiagnosticsRow,
    FloorTripped,
    RunSpec,
    State,
    cfhs_check,
    coupling,
    diagnose,
    dissipation,
    energy,
    fisher,
    identity_residual,
    log_theta_norms,
    lyapunov,
    make_grid,
    prop33_check,
    run,
)
from thermo1d.harness import random_neumann_function
from thermo1d.solver import Trajectory


def _grid(n=201):
    return make_grid(0, 1, n)


def _sin(g):
    f = np.sin(np.pi * g.nodes)
    f[0] = f[-1] = 0.0
    return f


def _state(g, u=None, v=None, theta=None):
    z = np.zeros(g.n)
    return State(0.0, z if u is None else u, z if v is None else v, np.ones(g.n) if theta is None else theta)


def test_energy_of_rest_state():
    g = _grid()
    assert tuple(energy(_state(g, theta=np.full(g.n, 3.0)), g)) == (0.0, 0.0, 3.0, 3.0)


def test_energy_kinetic_and_elastic():
    g = _grid()
    e = energy(_state(g, v=_sin(g)), g)
    assert e.E_kin == pytest.approx(0.25, abs=g.dx**2)
    e = energy(_state(g, u=_sin(g)), g)
    assert e.E_el == pytest.approx(np.pi**2 / 4, abs=10 * g.dx**2)
    assert e.E_total == e.E_kin + e.E_el + e.E_th


def test_fisher_of_constant():
    g = _grid()
    assert fisher(np.full(g.n, 5.0), g) == 0.0


@pytest.mark.parametrize(
    "theta,exact",
    [(lambda x: (1 + x) ** 2, 4.0), (np.exp, math.e - 1)],
    ids=["square", "exp"],
)
def test_fisher_reference_values(theta, exact):
    # these profiles are not insulated at the ends, so the closure costs O(dx)
    errs = []
    for n in (201, 401):
        g = _grid(n)
        errs.append(abs(fisher(theta(g.nodes), g) - exact))
        assert errs[-1] <= 5 * g.dx
    assert errs[0] / errs[1] == pytest.approx(2.0, rel=0.1)


def test_floor_trips():
    g = _grid(11)
    theta = np.ones(11)
    theta[4] = 1e-13
    for fn in (fisher, dissipation):
        with pytest.raises(FloorTripped):
            fn(theta, g)
    with pytest.raises(FloorTripped):
        log_theta_norms(theta, g)
    with pytest.raises(FloorTripped):
        prop33_check(theta, g)


def test_dissipation_of_constant():
    assert dissipation(np.full(51, 2.0), _grid(51)) == 0.0


def test_log_linear_profile_has_no_interior_dissipation():
    from thermo1d.diagnostics import _log_theta_xx

    g = _grid()
    lxx = _log_theta_xx(np.exp(0.7 * g.nodes), g)
    assert np.max(np.abs(lxx[1:-1])) < 1e-4


@pytest.mark.parametrize("alpha", [0.3, 1.0])
def test_dissipation_against_quadrature(alpha):
    # theta = exp(alpha cos(pi x)): insulated, (log theta)_xx = -alpha pi^2 cos(pi x)
    oracle = quad(lambda x: math.exp(alpha * math.cos(math.pi * x)) * (alpha * math.pi**2 * math.cos(math.pi * x)) ** 2,
                  0, 1)[0]
    errs = []
    for n in (201, 401):
        g = _grid(n)
        errs.append(abs(dissipation(np.exp(alpha * np.cos(np.pi * g.nodes)), g) - oracle))
    assert errs[1] < 1e-3 * oracle
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.2)


def test_lyapunov_and_coupling_of_rest_state():
    g = _grid()
    s = _state(g, theta=np.full(g.n, 2.0))
    assert lyapunov(s, g) == 0.0
    assert coupling(s, g, 1.0) == 0.0


def test_coupling_vanishes_without_velocity():
    g = _grid()
    assert coupling(_state(g, u=_sin(g), theta=2 + np.cos(3 * np.pi * g.nodes)), g, 5.0) == 0.0


def test_lyapunov_reference_value():
    g = _grid(401)
    s = _state(g, u=_sin(g), v=_sin(g), theta=np.exp(g.nodes))
    exact = 0.5 * ((math.e - 1) + np.pi**2 / 2 + np.pi**4 / 2)
    assert lyapunov(s, g) == pytest.approx(exact, abs=5 * g.dx)


def test_coupling_against_quadrature():
    g = _grid(401)
    theta = 2 + np.cos(np.pi * g.nodes)
    v = 0.3 * _sin(g)
    oracle = 0.5 * 0.7 * quad(
        lambda x: (math.pi * math.sin(math.pi * x)) ** 2 / (2 + math.cos(math.pi * x)) * 0.3 * math.pi * math.cos(math.pi * x),
        0, 1)[0]
    assert coupling(_state(g, v=v, theta=theta), g, 0.7) == pytest.approx(oracle, abs=1e-5)


def test_log_theta_norms_reference_values():
    g = _grid(401)
    c = 2.5
    linf, h1 = log_theta_norms(np.full(g.n, c), g)
    assert linf == pytest.approx(math.log(c), rel=1e-15)
    assert h1 == pytest.approx(math.log(c), rel=1e-12)
    g2 = make_grid(0, 3, 31)
    _, h1 = log_theta_norms(np.full(31, c), g2)
    assert h1 == pytest.approx(math.log(c) * math.sqrt(3), rel=1e-12)
    assert log_theta_norms(np.ones(g.n), g) == (0.0, 0.0)
    linf, h1 = log_theta_norms(np.exp(g.nodes), g)
    assert linf == pytest.approx(1.0, rel=1e-15)
    assert h1 == pytest.approx(math.sqrt(4 / 3), abs=2 * g.dx)


@given(st.integers(0, 2**31), st.floats(1e-6, 1e3))
@settings(max_examples=100)
def test_positivity_certificate_is_exact(seed, scale):
    g = _grid(101)
    theta = scale * random_neumann_function(np.random.default_rng(seed), g, amplitude=5.0)
    linf, _ = log_theta_norms(theta, g)
    assert math.exp(-linf) <= float(np.min(theta))


@given(st.integers(0, 2**31), st.floats(0.01, 100.0))
@settings(max_examples=50)
def test_scaling_laws(seed, lam):
    g = _grid(101)
    theta = random_neumann_function(np.random.default_rng(seed), g)
    assert fisher(theta, g) >= 0.0 and dissipation(theta, g) >= 0.0
    assert fisher(lam * theta, g) == pytest.approx(lam * fisher(theta, g), rel=1e-10, abs=1e-300)
    assert dissipation(lam * theta, g) == pytest.approx(lam * dissipation(theta, g), rel=1e-9, abs=1e-300)
    r1, r2 = cfhs_check(theta, g).ratio, cfhs_check(lam * theta, g).ratio
    if r1 is not None:
        assert r2 == pytest.approx(r1, rel=1e-9)


def test_cfhs_constant():
    rep = cfhs_check(np.full(51, 4.0), _grid(51))
    assert rep.lhs == 0.0 and rep.rhs == 0.0 and rep.ratio is None
    assert not rep.violated
    assert rep.bound == 13 / 8 == CFHS_CONSTANT


def test_cfhs_small_perturbation_limit():
    g = _grid(401)
    rep = cfhs_check(1 + 1e-3 * np.cos(2 * np.pi * g.nodes), g)
    assert rep.ratio == pytest.approx(0.25, rel=0.01)


def test_cfhs_large_perturbation_against_quadrature():
    g = _grid(801)
    rep = cfhs_check(2 + np.cos(2 * np.pi * g.nodes), g)
    assert not rep.violated and rep.ratio <= 13 / 8

    import sympy as sp

    x = sp.symbols("x")
    psi = 2 + sp.cos(2 * sp.pi * x)
    lhs_f = sp.lambdify(x, sp.diff(sp.sqrt(psi), x, 2) ** 2)
    rhs_f = sp.lambdify(x, psi * sp.diff(sp.log(psi), x, 2) ** 2)
    lhs, rhs = quad(lhs_f, 0, 1, limit=200)[0], quad(rhs_f, 0, 1, limit=200)[0]
    assert rep.lhs == pytest.approx(lhs, rel=1e-3)
    assert rep.rhs == pytest.approx(rhs, rel=1e-3)


def test_cfhs_contract_errors():
    g = _grid(51)
    with pytest.raises(ContractError):
        cfhs_check(2 + g.nodes, g)
    psi = np.ones(51)
    psi[10] = -1.0
    with pytest.raises(ContractError):
        cfhs_check(psi, g)
    with pytest.raises(ContractError):
        cfhs_check(np.ones(50), g)


def test_fisher_bound_constant():
    rep = prop33_check(np.full(41, 3.0), _grid(41))
    assert (rep.lhs, rep.rhs, rep.ok) == (0.0, 0.0, True)


def test_fisher_bound_cosine_against_quadrature():
    g = _grid(401)
    rep = prop33_check(2 + np.cos(np.pi * g.nodes), g)
    assert rep.ok
    F = quad(lambda x: (math.pi * math.sin(math.pi * x)) ** 2 / (2 + math.cos(math.pi * x)), 0, 1)[0]
    tx = lambda x: -math.pi * math.sin(math.pi * x)
    txx = lambda x: -math.pi**2 * math.cos(math.pi * x)
    th = lambda x: 2 + math.cos(math.pi * x)
    Dq = quad(lambda x: th(x) * (txx(x) / th(x) - (tx(x) / th(x)) ** 2) ** 2, 0, 1)[0]
    assert rep.lhs == pytest.approx((F / 4) ** 2, rel=1e-4)
    assert rep.rhs == pytest.approx(13 / 8 * 2 * Dq, rel=1e-4)


def test_fisher_bound_mollified_exponential():
    # exp(0.1 s(x)) with s' = 1 - cos(2 pi x), which vanishes at both ends
    g = _grid(401)
    s = g.nodes - np.sin(2 * np.pi * g.nodes) / (2 * np.pi)
    assert prop33_check(np.exp(0.1 * s), g).ok


def test_diagnostics_row_layout_and_invariants():
    assert DiagnosticsRow.columns() == (
        "t", "E_kin", "E_el", "E_th", "E_total", "F", "L", "D", "G",
        "min_theta", "max_theta", "logtheta_Linf", "logtheta_H1", "residual",
    )
    g = _grid(101)
    s = _state(g, u=0.1 * _sin(g), v=0.2 * _sin(g), theta=2 + 0.5 * np.cos(np.pi * g.nodes))
    row = diagnose(s, g, 1.0)
    assert row.E_total == row.E_kin + row.E_el + row.E_th
    assert row.F >= 0 and row.D >= 0 and row.L >= row.F / 2
    assert math.isnan(row.residual)
    assert row.min_theta >= row.positivity_floor


def test_identity_residual_rest_state():
    traj = run(RunSpec(n=41, T=0.2, preset="rest", preset_params={"theta": 2.0}))
    np.testing.assert_array_equal(identity_residual(traj), 0.0)
    np.testing.assert_array_equal(identity_residual(traj, mu=1.0), 0.0)


def test_identity_residual_needs_uniform_samples():
    traj = run(RunSpec(n=41, T=0.2, sample_every=3))
    with pytest.raises(ContractError):
        identity_residual(traj)
    assert math.isnan(traj.rows[-1].residual)
    assert not math.isnan(traj.rows[-2].residual)
    short = Trajectory(traj.spec, traj.samples[:2])
    with pytest.raises(ContractError):
        identity_residual(short)


def test_identity_residual_recomputation_matches_rows():
    traj = run(RunSpec(n=61, T=0.3, mu=-1.0, preset="bump"))
    np.testing.assert_allclose(identity_residual(traj, mu=-1.0), identity_residual(traj), rtol=1e-12, atol=1e-14)


def test_heat_only_identity_residual_converges():
    worst = []
    for n in (101, 201):
        traj = run(RunSpec(n=n, T=0.5, mu=0.0, preset="bump"))
        res = identity_residual(traj)
        worst.append(np.max(np.abs(res[1:-1])))
        # with u = 0 the functional reduces to F/2 and the identity to dF/2dt = -D
        assert traj.column("L") == pytest.approx(traj.column("F") / 2)
    assert worst[0] / worst[1] >= 3.0
