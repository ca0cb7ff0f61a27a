"""Discontinuous Galerkin discretisation on tent patches.

On a tent over the patch of vertex ``V`` the mapped conservation law
becomes the structured ODE ``d/dt (M0(U) - t M1(U)) = A(U)`` with

    M0(U)_i = int (g(u) - f(u) phi')  psi_i
    M1(U)_i = int f(u) delta'         psi_i
    A(U)_i  = sum_T int delta f(u) psi_i'  +  delta(V) f_n(u+, u-, n) [[psi_i]]

where ``phi`` is the front at the start of the current substep and
``delta`` the pole-height hat function.  Dual vectors hold the integrals
against the Legendre basis directly (no mass-matrix inversion).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import legendre

from . import _kernels
from .mesh_tents import Mesh1D, Tent, TentSlab
from .models import FluxModel
from .ode_core import (
    SolverError,
    SubtentPlan,
    classical_rk_tent_solve,
    sark_tent_solve,
)
from .tableau import ButcherTableau, SarkTableau

__all__ = [
    "DgSpace",
    "GlobalState",
    "PatchGeometry",
    "PatchSystem",
    "patch_family",
    "eval_operators",
    "propagate_tent",
    "run_slab",
    "project_initial",
    "l2_error",
    "conserved_integral",
]

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50


class DgSpace:
    """Piecewise polynomials of degree ``p`` in a Legendre modal basis."""

    def __init__(self, p: int, q: int | None = None):
        if p < 0:
            raise ValueError("p must be >= 0")
        q = p + 3 if q is None else q
        if q < p + 3:
            raise ValueError("need at least p + 3 quadrature points")
        self.p = p
        self.q = q
        self.nodes, self.weights = legendre.leggauss(q)
        self.V, self.D = self.tabulate(self.nodes)

    @property
    def ndof(self) -> int:
        return self.p + 1

    def tabulate(self, xi: np.ndarray):
        """Basis values and reference derivatives at points of ``[-1, 1]``."""
        xi = np.asarray(xi, dtype=float)
        V = legendre.legvander(xi, self.p)
        D = np.empty_like(V)
        for k in range(self.p + 1):
            coef = np.zeros(self.p + 1)
            coef[k] = 1.0
            D[:, k] = legendre.legval(xi, legendre.legder(coef))
        return V, D

    def mass_diag(self, h: float) -> np.ndarray:
        return h / (2 * np.arange(self.p + 1) + 1)

    def quadrature(self, extra: int = 0):
        if extra == 0:
            return self.nodes, self.weights
        return legendre.leggauss(self.q + extra)


@dataclass
class GlobalState:
    """Coefficients of ``u_h`` on the current front, one row per element."""

    mesh: Mesh1D
    space: DgSpace
    coeffs: np.ndarray
    front: np.ndarray

    def copy(self) -> "GlobalState":
        return GlobalState(self.mesh, self.space, self.coeffs.copy(), self.front.copy())

    @property
    def is_flat(self) -> bool:
        return bool(np.all(self.front == self.front[0]))

    def evaluate(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        verts = self.mesh.vertices
        e = np.clip(np.searchsorted(verts, x, side="right") - 1, 0, self.mesh.n_elements - 1)
        xi = 2.0 * (x - verts[e]) / (verts[e + 1] - verts[e]) - 1.0
        V = legendre.legvander(xi, self.space.p)
        return np.einsum("ij,ij->i", V, self.coeffs[e])


def project_initial(mesh: Mesh1D, space: DgSpace, u0: Callable, t0: float = 0.0,
                    extra: int = 4) -> GlobalState:
    """Element-wise L2 projection onto the Legendre basis."""
    xi, w = space.quadrature(extra)
    V, _ = space.tabulate(xi)
    verts = mesh.vertices
    h = mesh.lengths
    x = verts[:-1, None] + 0.5 * (xi[None, :] + 1.0) * h[:, None]
    vals = np.asarray(u0(x), dtype=float)
    # (2k+1)/2 * int_{-1}^{1} u P_k
    coeffs = (vals * w) @ V * ((2 * np.arange(space.p + 1) + 1) / 2.0)
    return GlobalState(mesh, space, coeffs, np.full(mesh.n_front, float(t0)))


def l2_error(state: GlobalState, reference, extra: int = 4) -> float:
    """``||u_h - reference||`` over the mesh; ``reference`` is a callable or state."""
    if not state.is_flat:
        raise ValueError("l2_error needs a flat front")
    xi, w = state.space.quadrature(extra)
    V, _ = state.space.tabulate(xi)
    verts = state.mesh.vertices
    h = state.mesh.lengths
    x = verts[:-1, None] + 0.5 * (xi[None, :] + 1.0) * h[:, None]
    uh = state.coeffs @ V.T
    if isinstance(reference, GlobalState):
        ref = reference.evaluate(x.ravel()).reshape(x.shape)
    else:
        ref = np.asarray(reference(x), dtype=float)
    return float(np.sqrt(np.sum(((uh - ref) ** 2) * w[None, :] * (0.5 * h[:, None]))))


def conserved_integral(state: GlobalState, model: FluxModel) -> float:
    """``sum_T int (g(u) - f(u) phi')``; equals ``int u`` on a flat front."""
    space = state.space
    xi, w = space.nodes, space.weights
    mesh = state.mesh
    h = mesh.lengths
    total = 0.0
    for e in range(mesh.n_elements):
        v0, v1 = mesh.element_vertices(e)
        slope = (state.front[v1] - state.front[v0]) / h[e]
        u = space.V @ state.coeffs[e]
        total += 0.5 * h[e] * np.sum(w * (model.g(u) - model.f(u) * slope))
    return float(total)


class PatchGeometry:
    """Everything about one tent that the kernels need, computed once."""

    def __init__(self, tent: Tent, model: FluxModel, space: DgSpace, mesh: Mesh1D):
        self.tent = tent
        self.model = model
        self.space = space
        self.ne = len(tent.elements)
        self.dim = self.ne * space.ndof
        self.shape = (self.ne, space.ndof)
        self.hs = np.asarray(tent.lengths, dtype=float)
        self.grad_b = tent.grad_b
        self.ddelta = tent.grad_delta
        delta = tent.delta
        xi = space.nodes
        self.dq = (0.5 * (1.0 - xi)[None, :] * delta[:-1, None]
                   + 0.5 * (1.0 + xi)[None, :] * delta[1:, None])
        c = tent.center_pos
        self.fdelta = float(delta[c])
        self.alpha = 1.0
        self.beta = 0.0
        self.eL = self.eR = 0
        if self.ne == 2:
            self.kind, self.eL, self.eR = 0, 0, 1
        elif c == 0:
            self.kind, self.eR = 1, 0
            self.alpha, self.beta = model.boundary_affine("left")
        else:
            self.kind, self.eL = 2, 0
            self.alpha, self.beta = model.boundary_affine("right")
        self.linear = bool(model.is_linear)
        self.prm = float(model.param)
        self.kernels = _kernels.build_kernels(*model.kernel_funcs())


class PatchSystem:
    """Structured ODE for substep ``k``: front origin ``phi_b + t0 * delta``."""

    def __init__(self, geom: PatchGeometry, t0: float = 0.0):
        self.geom = geom
        self.t0 = t0
        self.slope0 = geom.grad_b + t0 * geom.ddelta
        self.dim = geom.dim
        self.is_linear = geom.linear

    def _mat(self, W):
        return np.ascontiguousarray(W, dtype=float).reshape(self.geom.shape)

    def apply_M0(self, W):
        g = self.geom
        M, _, _, _ = g.kernels
        return M(self._mat(W), g.hs, self.slope0, g.space.V, g.space.weights, g.prm).ravel()

    def apply_M(self, t, W):
        g = self.geom
        M, _, _, _ = g.kernels
        slope = self.slope0 + t * g.ddelta
        return M(self._mat(W), g.hs, slope, g.space.V, g.space.weights, g.prm).ravel()

    def apply_M1(self, W):
        g = self.geom
        _, M1, _, _ = g.kernels
        return M1(self._mat(W), g.hs, g.ddelta, g.space.V, g.space.weights, g.prm).ravel()

    def apply_A(self, W):
        g = self.geom
        _, _, A, _ = g.kernels
        return A(self._mat(W), g.dq, g.space.V, g.space.D, g.space.weights, g.kind,
                 g.eL, g.eR, g.fdelta, g.alpha, g.beta, g.prm).ravel()

    def solve_M0(self, R):
        return self._solve(self.slope0, R)

    def solve_M(self, t, R):
        if t == 0.0:
            return self._solve(self.slope0, R)
        return self._solve(self.slope0 + t * self.geom.ddelta, R)

    def _solve(self, slope, R):
        g = self.geom
        _, _, _, solve = g.kernels
        U, status, elem, resid = solve(
            self._mat(R), g.hs, slope, g.space.V, g.space.weights, g.prm,
            g.linear, NEWTON_TOL, NEWTON_MAX_ITER,
        )
        if status != _kernels.OK:
            what = "singular Jacobian" if status == _kernels.SINGULAR else "Newton did not converge"
            raise SolverError(
                f"{what} inverting M", element=g.tent.elements[elem], residual=resid
            )
        return U.ravel()


def patch_family(tent: Tent, model: FluxModel, space: DgSpace, mesh: Mesh1D,
                 r: int) -> Callable[[int], PatchSystem]:
    geom = PatchGeometry(tent, model, space, mesh)
    systems = [PatchSystem(geom, k / r) for k in range(r)]
    return systems.__getitem__


def eval_operators(ps: PatchSystem, W: np.ndarray):
    return ps.apply_M0(W), ps.apply_M1(W), ps.apply_A(W)


def propagate_tent(state: GlobalState, tent: Tent, scheme, r: int,
                   model: FluxModel) -> GlobalState:
    """Advance ``state`` through one tent in place and return it."""
    verts = list(tent.vertices)
    if not np.array_equal(state.front[verts], tent.phi_b):
        raise ValueError(f"state front does not match the bottom of tent {tent.index}")
    elems = list(tent.elements)
    U0 = state.coeffs[elems].ravel()
    family = patch_family(tent, model, state.space, state.mesh, r)
    plan = SubtentPlan(r)
    try:
        if isinstance(scheme, SarkTableau):
            U1, _ = sark_tent_solve(family, scheme, plan, U0=U0)
        elif isinstance(scheme, ButcherTableau):
            U1 = classical_rk_tent_solve(family, scheme, plan, U0=U0)
        else:
            raise TypeError(f"unsupported scheme type {type(scheme).__name__}")
    except SolverError as exc:
        raise exc.add_context(tent=tent.index)
    state.coeffs[elems] = U1.reshape(len(elems), -1)
    state.front[tent.center] = tent.phi_t[tent.center_pos]
    return state


def run_slab(state: GlobalState, slab: TentSlab, scheme, r: int, model: FluxModel,
             threads: int = 1) -> GlobalState:
    """Propagate every tent of ``slab`` level by level."""
    if threads <= 1:
        for tent in slab.tents:
            propagate_tent(state, tent, scheme, r, model)
        return state
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for level in slab.levels:
            tents = [slab.tents[i] for i in level]
            if len(tents) == 1:
                propagate_tent(state, tents[0], scheme, r, model)
                continue
            list(pool.map(lambda t: propagate_tent(state, t, scheme, r, model), tents))
    return state
