import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermo1d import (
    BoundaryViolation,
    ConfigurationError,
    ContractError,
    InitialData,
    NonPositiveTemperature,
    SineBasis,
    State,
    energy,
    make_grid,
    preset,
    project_initial,
    project_sine,
    validate_initial,
)
from thermo1d.state import load_table


@pytest.fixture
def grid():
    return make_grid(0, 1, 101)


def test_rest_data_is_accepted(grid):
    z = np.zeros(grid.n)
    data = InitialData(z, z, np.ones(grid.n), 1.0)
    assert validate_initial(data) is data


def test_single_negative_node_is_rejected(grid):
    theta = np.ones(grid.n)
    theta[37] = -0.1
    with pytest.raises(NonPositiveTemperature):
        validate_initial(InitialData(np.zeros(grid.n), np.zeros(grid.n), theta, 0.5))


def test_mixed_smooth_data_accepted(grid):
    x = grid.nodes
    v0 = np.sin(np.pi * x)
    v0[-1] = 0.0
    theta0 = 2 + np.cos(np.pi * x)
    validate_initial(InitialData(x * (1 - x), v0, theta0, 1.0))


def test_boundary_violation(grid):
    u0 = np.zeros(grid.n)
    u0[-1] = 1e-9
    with pytest.raises(BoundaryViolation):
        validate_initial(InitialData(u0, np.zeros(grid.n), np.ones(grid.n), 1.0))


def test_endpoint_rounding_is_tolerated(grid):
    u0 = np.zeros(grid.n)
    u0[0] = 5e-13
    validate_initial(InitialData(u0, np.zeros(grid.n), np.ones(grid.n), 1.0))


def test_floor_above_minimum_is_rejected(grid):
    with pytest.raises(NonPositiveTemperature):
        validate_initial(InitialData(np.zeros(grid.n), np.zeros(grid.n), np.ones(grid.n), 1.5))
    with pytest.raises(NonPositiveTemperature):
        validate_initial(InitialData(np.zeros(grid.n), np.zeros(grid.n), np.ones(grid.n), 0.0))


def test_length_mismatch(grid):
    with pytest.raises(ContractError):
        validate_initial(InitialData(np.zeros(5), np.zeros(6), np.ones(5), 1.0))


def test_rest_preset(grid):
    data = preset("rest", grid, {"theta": 1.0})
    assert np.all(data.u0 == 0) and np.all(data.v0 == 0) and np.all(data.theta0 == 1.0)
    assert data.theta_floor == 1.0


def test_bump_with_negative_minimum(grid):
    with pytest.raises(NonPositiveTemperature):
        preset("bump", grid, {"c": 1.0, "A": 2.0})


def test_sine_mode_peak(grid):
    data = preset("sine-mode", grid, {"k": 1, "A": 0.1})
    assert np.argmax(data.u0) == 50
    assert data.u0[50] == pytest.approx(0.1, rel=1e-15)


def test_unknown_preset_and_parameter(grid):
    with pytest.raises(ConfigurationError):
        preset("wobble", grid)
    with pytest.raises(ConfigurationError):
        preset("rest", grid, {"k": 2})
    with pytest.raises(ConfigurationError):
        preset("sine-mode", grid, {"k": 1.5})


@given(
    st.sampled_from(["rest", "sine-mode", "bump"]),
    st.floats(0.01, 10.0),
    st.floats(-1.0, 1.0),
    st.integers(1, 20),
    st.integers(5, 200),
)
@settings(max_examples=60)
def test_presets_in_range_always_validate(name, level, frac, k, n):
    g = make_grid(-1, 2, n)
    params = {
        "rest": {"theta": level},
        "sine-mode": {"k": k, "A": frac, "theta": level},
        "bump": {"c": level, "A": 0.99 * frac * level},
    }[name]
    data = preset(name, g, params)
    assert data.theta_floor == pytest.approx(float(np.min(data.theta0)))


def test_state_arrays_are_read_only(grid):
    s = State(0.0, np.zeros(grid.n), np.zeros(grid.n), np.ones(grid.n))
    with pytest.raises(ValueError):
        s.theta[0] = 2.0


def test_project_basis_element(grid):
    basis = SineBasis(4, grid)
    data = InitialData(basis.modes[1], np.zeros(grid.n), np.ones(grid.n), 1.0)
    g0 = project_initial(data, basis)
    np.testing.assert_allclose(g0.uc, [0, 1, 0, 0], atol=1e-12)
    np.testing.assert_array_equal(g0.vc, 0.0)
    np.testing.assert_array_equal(g0.theta, data.theta0)
    assert g0.t == 0.0


def test_project_parabola_truncation_error():
    g = make_grid(0, 1, 401)
    x = g.nodes
    u0 = x * (1 - x)
    basis = SineBasis(8, g)
    g0 = project_initial(InitialData(u0, np.zeros(g.n), np.ones(g.n), 1.0), basis)
    err = np.max(np.abs(basis.reconstruct(g0.uc) - u0))
    k = np.arange(9, 20001, 2)
    tail = 8 / (np.pi**3 * k**3)
    # triangle-inequality bound on the omitted odd modes
    assert err <= tail.sum() + 1e-8
    exact_tail = np.max(np.abs(tail[:2000] @ np.sin(np.pi * np.outer(k[:2000], x))))
    assert err == pytest.approx(exact_tail, abs=1e-6)
    assert 8 / (np.pi**3 * 9**3) < err


@given(st.lists(st.floats(-1, 1), min_size=6, max_size=6), st.integers(1, 6))
@settings(max_examples=30)
def test_projection_idempotent(coeffs, m):
    g = make_grid(0, 2, 90)
    full = SineBasis(6, g)
    u0 = full.reconstruct(np.array(coeffs)) + 0.01 * np.sin(np.pi * g.xhat) ** 3
    u0[0] = u0[-1] = 0.0
    basis = SineBasis(m, g)
    c1 = project_sine(u0, basis, g)
    c2 = project_sine(basis.reconstruct(c1), basis, g)
    np.testing.assert_allclose(c2, c1, atol=1e-12)


@given(st.floats(-1, 1), st.floats(-1, 1), st.integers(1, 10))
@settings(max_examples=30)
def test_projection_does_not_increase_energy(a, b, m):
    g = make_grid(0, 1, 121)
    x = g.nodes
    u0 = a * x * (1 - x) * np.exp(x)
    v0 = b * np.sin(np.pi * x) ** 2 * (1 + x)
    u0[0] = u0[-1] = v0[0] = v0[-1] = 0.0
    theta = np.ones(g.n)
    basis = SineBasis(m, g)
    g0 = project_initial(InitialData(u0, v0, theta, 1.0), basis)
    before = energy(State(0, u0, v0, theta), g)
    after = energy(g0.to_nodal(basis), g)
    assert after.E_kin <= before.E_kin + 1e-12
    # the elastic part is exact for H1_0 projection only up to the difference operator
    assert after.E_el <= before.E_el * (1 + 1e-3) + 1e-12


def test_custom_table_round_trip(tmp_path, grid):
    x = grid.nodes
    u0 = 0.1 * np.sin(2 * np.pi * x)
    u0[-1] = 0.0
    rows = np.column_stack([x, u0, np.zeros(grid.n), 1.5 + 0.2 * np.cos(np.pi * x)])
    path = tmp_path / "init.txt"
    np.savetxt(path, rows, fmt="%.17g")
    data = preset("custom-table", grid, {"path": str(path)})
    np.testing.assert_array_equal(data.u0, u0)
    assert data.theta_floor == pytest.approx(1.3)


def test_custom_table_on_wrong_grid(tmp_path, grid):
    path = tmp_path / "init.txt"
    g2 = make_grid(0, 1, 51)
    np.savetxt(path, np.column_stack([g2.nodes, np.zeros(51), np.zeros(51), np.ones(51)]))
    with pytest.raises(ConfigurationError):
        load_table(path, grid)
    shifted = make_grid(0.01, 1.01, 51)
    with pytest.raises(ConfigurationError):
        load_table(path, shifted)
    with pytest.raises(ConfigurationError):
        load_table(tmp_path / "missing.txt", grid)
