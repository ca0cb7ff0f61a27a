import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import Polynomial, legendre

from oracle_values import PROJ_ERR_P2_H01
from tentkit.dg1d import (
    DgSpace,
    PatchGeometry,
    PatchSystem,
    conserved_integral,
    eval_operators,
    l2_error,
    project_initial,
    propagate_tent,
    run_slab,
)
from tentkit.mesh_tents import Mesh1D, Tent, pitch_slab
from tentkit.models import Advection1D, Burgers1D, burgers_initial
from tentkit.ode_core import SolverError
from tentkit.tableau import builtin_rk, builtin_sark


def _tent(mesh, v, phi_b, phi_t, index=0):
    elems, verts = mesh.patch(v)
    return Tent(index, v, elems, verts, mesh.lengths[list(elems)],
                np.asarray(phi_b, float), np.asarray(phi_t, float))


@pytest.mark.parametrize("p", [0, 1, 2, 4])
def test_mass_diagonal_matches_quadrature(p):
    sp = DgSpace(p)
    M = sp.V.T @ (sp.weights[:, None] * sp.V) * 0.5 * 0.3
    np.testing.assert_allclose(M, np.diag(sp.mass_diag(0.3)), atol=1e-15)


def test_space_rejects_bad_arguments():
    with pytest.raises(ValueError):
        DgSpace(-1)
    with pytest.raises(ValueError):
        DgSpace(2, q=3)


@pytest.mark.parametrize("p", [0, 1, 3])
def test_projection_reproduces_polynomials(p):
    mesh = Mesh1D(np.array([0.0, 0.2, 0.45, 1.0]))
    poly = Polynomial(np.arange(1.0, p + 2))
    st_ = project_initial(mesh, DgSpace(p), poly)
    x = np.linspace(0, 1, 37)
    np.testing.assert_allclose(st_.evaluate(x), poly(x), atol=1e-13)
    assert l2_error(st_, poly) < 1e-14


def test_projection_error_oracle():
    st_ = project_initial(Mesh1D.uniform(10), DgSpace(2), burgers_initial)
    assert l2_error(st_, burgers_initial, extra=10) == pytest.approx(PROJ_ERR_P2_H01, rel=1e-10)


def test_projection_error_rate():
    errs = [l2_error(project_initial(Mesh1D.uniform(n), DgSpace(2), burgers_initial),
                     burgers_initial) for n in (40, 80, 160)]
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(rates - 3.0) < 0.1)


def test_l2_error_needs_flat_front():
    st_ = project_initial(Mesh1D.uniform(4), DgSpace(1), np.cos)
    st_.front[2] = 0.1
    with pytest.raises(ValueError):
        l2_error(st_, np.cos)


def _exact_A_linear(coeffs, mesh, tent, b):
    """Patch transport for f(u) = b u by exact polynomial integration."""
    P = coeffs.shape[1]
    out = np.zeros_like(coeffs)
    delta = tent.delta
    for k, e in enumerate(tent.elements):
        x0, x1 = mesh.vertices[e], mesh.vertices[e + 1]
        to_ref = Polynomial([-(x0 + x1) / (x1 - x0), 2 / (x1 - x0)])
        u = legendre.Legendre(coeffs[k]).convert(kind=Polynomial)(to_ref)
        dl = Polynomial([delta[k] * x1 - delta[k + 1] * x0, delta[k + 1] - delta[k]]) / (x1 - x0)
        for i in range(P):
            psi = legendre.Legendre.basis(i).convert(kind=Polynomial)(to_ref)
            F = (dl * b * u * psi.deriv()).integ()
            out[k, i] = F(x1) - F(x0)
    # upwind facet at the center, b > 0: left trace
    left, right = 0, 1
    ul = coeffs[left].sum()
    flux = delta[tent.center_pos] * b * ul
    signs = (-1.0) ** np.arange(P)
    out[right] += flux * signs
    out[left] -= flux
    return out


@pytest.mark.parametrize("p", [1, 2, 3])
def test_transport_matches_exact_integration(p, rng):
    mesh = Mesh1D(np.array([0.0, 0.3, 0.55, 1.0]))
    tent = _tent(mesh, 1, [0.0, 0.01, 0.02], [0.0, 0.09, 0.02])
    model = Advection1D(speed=1.3, periodic=False)
    ps = PatchSystem(PatchGeometry(tent, model, DgSpace(p), mesh), 0.0)
    W = rng.standard_normal((2, p + 1))
    got = ps.apply_A(W.ravel()).reshape(2, -1)
    np.testing.assert_allclose(got, _exact_A_linear(W, mesh, tent, 1.3), atol=1e-12)


def test_boundary_tent_uses_outward_normal():
    # right boundary, outflow: flux b u_L leaves through x = 1
    mesh = Mesh1D.uniform(3)
    tent = _tent(mesh, 3, [0.0, 0.0], [0.0, 0.05])
    model = Advection1D(speed=1.0, periodic=False)
    ps = PatchSystem(PatchGeometry(tent, model, DgSpace(0), mesh), 0.0)
    assert ps.apply_A(np.array([2.0]))[0] == pytest.approx(-0.05 * 2.0)


def test_operators_linear_in_state_for_advection(rng):
    mesh = Mesh1D.uniform(5, periodic=True)
    slab = pitch_slab(mesh, 2.0, 0.1)
    ps = PatchSystem(PatchGeometry(slab.tents[0], Advection1D(), DgSpace(2), mesh), 0.25)
    u, v = rng.standard_normal(6), rng.standard_normal(6)
    for lhs, pu, pv in zip(eval_operators(ps, u + 2 * v), eval_operators(ps, u),
                           eval_operators(ps, v)):
        np.testing.assert_allclose(lhs, pu + 2 * pv, atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.0, 0.06), st.floats(0.0, 1.0))
def test_burgers_mass_round_trip(seed, lift, t):
    rng = np.random.default_rng(seed)
    mesh = Mesh1D.uniform(10)
    tent = _tent(mesh, 4, [0.0, lift, 0.0], [0.0, lift + 0.05, 0.0])
    ps = PatchSystem(PatchGeometry(tent, Burgers1D(), DgSpace(2), mesh), 0.0)
    U = 0.5 + 0.3 * rng.standard_normal(6)
    R = ps.apply_M(t, U)
    W = ps.solve_M(t, R)
    np.testing.assert_allclose(ps.apply_M(t, W), R, atol=1e-12 * (1 + np.linalg.norm(R)))
    np.testing.assert_allclose(ps.apply_M0(ps.solve_M0(R)), R, atol=1e-12 * (1 + np.linalg.norm(R)))


def test_newton_failure_reports_element():
    # a steep front makes u - k s u^2 non-invertible for large data
    mesh = Mesh1D.uniform(4)
    tent = _tent(mesh, 2, [0.0, 2.0, 0.0], [0.0, 2.5, 0.0])
    ps = PatchSystem(PatchGeometry(tent, Burgers1D(), DgSpace(1), mesh), 0.0)
    with pytest.raises(SolverError) as info:
        ps.solve_M0(np.array([50.0, 0.0, 50.0, 0.0]))
    assert info.value.context["element"] in tent.elements


def _constant_burgers(c):
    return Burgers1D(inflow=c, u0=lambda x: np.full_like(np.asarray(x, float), c))


@pytest.mark.parametrize("scheme", ["sark2-ralston", "sark3-heun", "rk3-heun"])
def test_free_stream_burgers(scheme):
    c = 0.7
    model = _constant_burgers(c)
    mesh = Mesh1D.uniform(10)
    st_ = project_initial(mesh, DgSpace(2), model.initial)
    slab = pitch_slab(mesh, 8.0, 0.1)
    name = builtin_sark(scheme) if scheme.startswith("sark") else builtin_rk(scheme)
    run_slab(st_, slab, name, 4, model)
    np.testing.assert_allclose(st_.coeffs[:, 0], c, atol=1e-11)
    np.testing.assert_allclose(st_.coeffs[:, 1:], 0.0, atol=1e-11)


def test_conservation_periodic_advection():
    model = Advection1D(speed=1.0)
    mesh = Mesh1D.uniform(16, periodic=True)
    st_ = project_initial(mesh, DgSpace(3), lambda x: 1.0 + np.sin(2 * np.pi * x) ** 3)
    before = conserved_integral(st_, model)
    slab = pitch_slab(mesh, 4.0, 0.2)
    for i, tent in enumerate(slab.tents):
        propagate_tent(st_, tent, builtin_sark("sark3-kutta"), 3, model)
        if i % 7 == 0:
            # the front is sloped mid-slab; the mapped integral is still conserved
            assert conserved_integral(st_, model) == pytest.approx(before, abs=1e-10)
    assert conserved_integral(st_, model) == pytest.approx(before, abs=1e-10)


def test_advection_converges_to_shifted_sine():
    model = Advection1D(speed=1.0)
    errs = []
    for n in (10, 20, 40):
        mesh = Mesh1D.uniform(n, periodic=True)
        st_ = project_initial(mesh, DgSpace(2), model.initial)
        run_slab(st_, pitch_slab(mesh, 2.0, 0.25), builtin_sark("sark3-heun"), 4, model)
        errs.append(l2_error(st_, lambda x: model.exact_solution(x, 0.25)))
    assert np.log2(errs[1] / errs[2]) > 2.7


def test_stationary_polynomial_is_kept():
    model = Advection1D(speed=0.0)
    mesh = Mesh1D.uniform(6, periodic=True)
    poly = Polynomial([0.3, -1.0, 2.0])
    st_ = project_initial(mesh, DgSpace(2), poly)
    start = st_.coeffs.copy()
    # wavespeed zero: any c_max works
    run_slab(st_, pitch_slab(mesh, 1.0, 0.3), builtin_sark("sark2-heun"), 2, model)
    np.testing.assert_allclose(st_.coeffs, start, atol=1e-14)


def test_front_mismatch_is_rejected():
    mesh = Mesh1D.uniform(6)
    slab = pitch_slab(mesh, 2.0, 0.2)
    st_ = project_initial(mesh, DgSpace(1), np.sin)
    with pytest.raises(ValueError, match="front"):
        propagate_tent(st_, slab.tents[3], builtin_sark("sark2-heun"), 2, Burgers1D())


def test_threads_are_bit_identical():
    model = Burgers1D()
    mesh = Mesh1D.uniform(20)
    slab = pitch_slab(mesh, 8.0, 0.05)
    a = project_initial(mesh, DgSpace(2), model.initial)
    b = a.copy()
    run_slab(a, slab, builtin_sark("sark3-heun"), 4, model, threads=1)
    run_slab(b, slab, builtin_sark("sark3-heun"), 4, model, threads=3)
    np.testing.assert_array_equal(a.coeffs, b.coeffs)
    np.testing.assert_array_equal(a.front, b.front)
