import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import pair_ode, random_pair
from oracle_values import REF_FLOW_SEED, REF_FLOW_Y1
from tentkit.ode_core import (
    LinearStructuredOde,
    OrderFitError,
    SolverError,
    StructuredOde,
    SubtentPlan,
    classical_rk_step,
    classical_rk_tent_solve,
    linear_family,
    local_order_estimate,
    reference_flow,
    sark_step,
    sark_tent_solve,
)
from tentkit.tableau import SARK_NAMES, builtin_rk, builtin_sark


def closed_form_T(s, tau, A, B):
    eye = np.eye(A.shape[0])
    T = eye + tau * A + 0.5 * tau**2 * A @ (B + A)
    if s == 3:
        T = T + tau**3 / 6 * A @ (2 * B + A) @ (B + A)
    return T


def plain_rk_step(t, f, y, tau):
    k = []
    for i in range(t.s):
        yi = y + tau * sum(t.a[i, j] * k[j] for j in range(i))
        k.append(f(yi))
    return y + tau * sum(t.b[i] * k[i] for i in range(t.s))


def test_solver_error_context():
    err = SolverError("boom", element=3)
    err.add_context(tent=7).add_context(element=99)
    assert err.context == {"element": 3, "tent": 7}
    assert "tent=7" in str(err) and "element=3" in str(err)


def test_linear_ode_satisfies_protocol():
    assert isinstance(LinearStructuredOde(np.eye(2), np.eye(2), np.eye(2)), StructuredOde)


def test_singular_solve_raises_solver_error():
    ode = LinearStructuredOde(np.eye(2), np.eye(2), np.zeros((2, 2)))
    with pytest.raises(SolverError):
        ode.solve_M(1.0, np.ones(2))


def test_scalar_heun2_closed_form():
    lam, beta, tau, y = -0.7, 0.3, 0.25, 1.3
    ode = LinearStructuredOde(np.eye(1), np.array([[beta]]), np.array([[lam]]))
    out = sark_step(ode, builtin_sark("sark2-heun"), tau, np.array([y]))
    expect = y * (1 + tau * lam + 0.5 * tau**2 * lam * (beta + lam))
    assert out[0] == pytest.approx(expect, rel=1e-15, abs=1e-15)


@pytest.mark.parametrize("name", SARK_NAMES)
def test_zero_correction_reduces_to_underlying_rk(name, rng):
    t = builtin_sark(name)
    A = rng.standard_normal((3, 3))
    ode = LinearStructuredOde(np.eye(3), np.zeros((3, 3)), A)
    y = rng.standard_normal(3)
    out = sark_step(ode, t, 0.3, y)
    ref = plain_rk_step(t.underlying_rk(), lambda v: A @ v, y, 0.3)
    np.testing.assert_allclose(out, ref, atol=1e-13, rtol=0)


@pytest.mark.parametrize("name", SARK_NAMES)
def test_product_of_closed_forms_over_substeps(name):
    t = builtin_sark(name)
    L, B = random_pair(7)
    M0 = np.eye(4) + 0.1 * random_pair(8)[0]
    r = 5
    A = L @ M0
    M1 = B @ M0
    family = linear_family(M0, M1, A, r)
    U0 = np.arange(1.0, 5.0)
    U1, trace = sark_tent_solve(family, t, SubtentPlan(r), U0=U0)
    Y = M0 @ U0
    for k in range(r):
        M0k = M0 - (k / r) * M1
        Yk = Y
        Y = closed_form_T(t.s, 1 / r, A @ np.linalg.inv(M0k), M1 @ np.linalg.inv(M0k)) @ Y
        np.testing.assert_allclose(trace.ys[k], Yk, atol=1e-13)
    np.testing.assert_allclose(trace.ys[-1], Y, atol=1e-13)
    np.testing.assert_allclose(U1, np.linalg.solve(M0 - M1, Y), atol=1e-12)


@pytest.mark.parametrize("name", SARK_NAMES)
def test_classical_path_matches_sark_without_correction(name, rng):
    t = builtin_sark(name)
    M0 = np.eye(3) + 0.1 * rng.standard_normal((3, 3))
    A = rng.standard_normal((3, 3))
    family = linear_family(M0, np.zeros((3, 3)), A, 3)
    U0 = rng.standard_normal(3)
    U_sark, _ = sark_tent_solve(family, t, SubtentPlan(3), U0=U0)
    U_rk = classical_rk_tent_solve(family, t.underlying_rk(), SubtentPlan(3), U0=U0)
    np.testing.assert_allclose(U_sark, U_rk, atol=1e-13)


def test_classical_step_uses_stage_times():
    # Y' = Y / (1 - t); midpoint evaluates M at t = 0.25
    ode = LinearStructuredOde(np.eye(1), np.eye(1), np.eye(1))
    t = builtin_rk("rk2-midpoint")
    out = classical_rk_step(ode, t, 0.5, np.array([2.0]))[0]
    assert out == pytest.approx(2.0 + 0.5 * 2.5 / 0.75, rel=1e-15)


def test_tent_solve_needs_exactly_one_start():
    family = linear_family(np.eye(2), np.zeros((2, 2)), np.eye(2), 1)
    t = builtin_sark("sark2-heun")
    with pytest.raises(ValueError):
        sark_tent_solve(family, t, SubtentPlan(1))
    with pytest.raises(ValueError):
        sark_tent_solve(family, t, SubtentPlan(1), U0=np.ones(2), Y0=np.ones(2))


def test_solver_error_carries_substep_and_stage():
    # M(t) = 1 - t is singular exactly at the tent top
    family = linear_family(np.eye(1), np.eye(1), np.zeros((1, 1)), 2)
    with pytest.raises(SolverError) as info:
        sark_tent_solve(family, builtin_sark("sark2-heun"), SubtentPlan(2), U0=np.ones(1))
    assert info.value.context["substep"] == "top"
    family = linear_family(np.eye(1), 2 * np.eye(1), np.ones((1, 1)), 2)
    with pytest.raises(SolverError) as info:
        sark_tent_solve(family, builtin_sark("sark2-heun"), SubtentPlan(2), U0=np.ones(1))
    assert info.value.context == {"stage": 1, "substep": 1}


def test_subtent_plan():
    plan = SubtentPlan(4)
    np.testing.assert_allclose(plan.breakpoints, [0, 0.25, 0.5, 0.75, 1])
    assert plan.tau == 0.25
    with pytest.raises(ValueError):
        SubtentPlan(0)


def test_reference_flow_matches_brute_force():
    L, B = random_pair(REF_FLOW_SEED)
    out = reference_flow(pair_ode(L, B), np.ones(4), 1.0, tol=1e-12)
    np.testing.assert_allclose(out, REF_FLOW_Y1, atol=1e-12, rtol=0)


def test_reference_flow_zero_time():
    L, B = random_pair(1)
    np.testing.assert_array_equal(reference_flow(pair_ode(L, B), np.ones(4), 0.0), np.ones(4))


@pytest.mark.parametrize("name,expect", [("sark2-ralston", 3.0), ("sark3-heun", 4.0)])
def test_local_order(name, expect):
    L, B = random_pair(3)
    taus = 2.0 ** -np.arange(3, 9)
    slope = local_order_estimate(builtin_sark(name), pair_ode(L, B), taus)
    assert abs(slope - expect) < 0.2


def test_local_order_rejects_rounding_floor():
    # zero operator: every method is exact
    ode = pair_ode(np.zeros((2, 2)), np.zeros((2, 2)))
    with pytest.raises(OrderFitError):
        local_order_estimate(builtin_sark("sark2-heun"), ode, [0.5, 0.25])


def test_local_order_needs_decreasing_taus():
    L, B = random_pair(3)
    with pytest.raises(ValueError):
        local_order_estimate(builtin_sark("sark2-heun"), pair_ode(L, B), [0.1, 0.2])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 0.5), st.sampled_from(SARK_NAMES))
def test_step_is_linear_in_y(seed, tau, name):
    L, B = random_pair(seed, m=3)
    ode = pair_ode(L, B)
    t = builtin_sark(name)
    rng = np.random.default_rng(seed)
    y, z = rng.standard_normal(3), rng.standard_normal(3)
    lhs = sark_step(ode, t, tau, 2.0 * y - 3.0 * z)
    rhs = 2.0 * sark_step(ode, t, tau, y) - 3.0 * sark_step(ode, t, tau, z)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(SARK_NAMES), st.integers(1, 6))
def test_constant_state_with_zero_transport_is_kept(seed, name, r):
    # A(U) = 0 keeps Y fixed, so U1 = M(1)^{-1} M0 U0
    rng = np.random.default_rng(seed)
    M0 = np.eye(3) + 0.1 * rng.standard_normal((3, 3))
    M1 = 0.3 * rng.standard_normal((3, 3))
    family = linear_family(M0, M1, np.zeros((3, 3)), r)
    U0 = rng.standard_normal(3)
    U1, _ = sark_tent_solve(family, builtin_sark(name), SubtentPlan(r), U0=U0)
    np.testing.assert_allclose((M0 - M1) @ U1, M0 @ U0, atol=1e-12)
