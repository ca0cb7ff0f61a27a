"""Linear stability of tent propagation.

For a linear model every piece of the tent solve is a matrix.  The tent
propagation matrix ``S = M(1)^{-1} T M(0)`` maps bottom coefficients to top
coefficients; its norm from the ``M(0)``-energy to the ``M(1)``-energy is the
square root of the largest generalized eigenvalue of
``(S^T M1w S, M0w)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .dg1d import DgSpace, PatchGeometry, PatchSystem
from .mesh_tents import Mesh1D, Tent, pitch_slab
from .models import FluxModel
from .ode_core import LinearStructuredOde, classical_rk_step, sark_step
from .tableau import ButcherTableau, SarkTableau

__all__ = [
    "LinearTentOperators",
    "StabilityReport",
    "tent_operators",
    "build_T_subtent",
    "build_S",
    "norm_S",
    "slab_cbar",
    "cbar_sweep",
    "fit_slope",
]


@dataclass(frozen=True)
class LinearTentOperators:
    """Dense operators of one tent (dual representation).

    ``M0`` is taken at the tent bottom; the energy matrices ``Mw0``/``Mw1``
    are ``M(0)`` and ``M(1)``.
    """

    M0: np.ndarray
    M1: np.ndarray
    A: np.ndarray

    @property
    def Mw0(self) -> np.ndarray:
        return _sym(self.M0)

    @property
    def Mw1(self) -> np.ndarray:
        return _sym(self.M0 - self.M1)

    def substep(self, k: int, r: int) -> "LinearTentOperators":
        return LinearTentOperators(self.M0 - (k / r) * self.M1, self.M1, self.A)


@dataclass
class StabilityReport:
    c_values: np.ndarray
    cbar: float
    p: int
    s: int
    r: int
    scheme: str
    extra: dict = field(default_factory=dict)


def _sym(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def _columns(apply, m: int) -> np.ndarray:
    out = np.empty((m, m))
    for j in range(m):
        e = np.zeros(m)
        e[j] = 1.0
        out[:, j] = apply(e)
    return out


def tent_operators(tent: Tent, model: FluxModel, space: DgSpace,
                   mesh: Mesh1D) -> LinearTentOperators:
    if not model.is_linear:
        raise ValueError("stability matrices need a linear model")
    ps = PatchSystem(PatchGeometry(tent, model, space, mesh), 0.0)
    m = ps.dim
    return LinearTentOperators(
        _columns(ps.apply_M0, m), _columns(ps.apply_M1, m), _columns(ps.apply_A, m)
    )


def build_T_subtent(ops: LinearTentOperators, t, tau: float) -> np.ndarray:
    """Matrix of one step, built by stepping each unit vector."""
    ode = LinearStructuredOde(ops.M0, ops.M1, ops.A)
    m = ops.M0.shape[0]
    if isinstance(t, SarkTableau):
        return _columns(lambda y: sark_step(ode, t, tau, y), m)
    if isinstance(t, ButcherTableau):
        return _columns(lambda y: classical_rk_step(ode, t, tau, y), m)
    raise TypeError(f"unsupported scheme type {type(t).__name__}")


def build_S(ops: LinearTentOperators, scheme, r: int) -> np.ndarray:
    """``S = M(1)^{-1} T^[r] ... T^[1] M(0)``."""
    T = np.eye(ops.M0.shape[0])
    for k in range(r):
        T = build_T_subtent(ops.substep(k, r), scheme, 1.0 / r) @ T
    top = ops.M0 - ops.M1
    try:
        lu = scipy.linalg.lu_factor(top, check_finite=True)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise ValueError("M(1) could not be factorized") from exc
    if np.any(np.diag(lu[0]) == 0.0):
        raise ValueError("M(1) is singular")
    return scipy.linalg.lu_solve(lu, T @ ops.M0)


def norm_S(S, M0w, M1w) -> float:
    """``sup_W |S W|_{M1w} / |W|_{M0w}``."""
    S = np.atleast_2d(np.asarray(S, dtype=float))
    M0w = np.atleast_2d(np.asarray(M0w, dtype=float))
    M1w = np.atleast_2d(np.asarray(M1w, dtype=float))
    try:
        lam = scipy.linalg.eigh(_sym(S.T @ M1w @ S), M0w, eigvals_only=True)
    except np.linalg.LinAlgError as exc:
        raise ValueError("energy matrix is not positive definite") from exc
    return float(np.sqrt(max(lam[-1], 0.0)))


def _scheme_name(scheme) -> str:
    return getattr(scheme, "name", "custom")


def cbar_sweep(mesh: Mesh1D, model: FluxModel, scheme, p: int,
               r_list: Sequence[int], c_max: float, t_max: float,
               gamma: float = 0.99) -> list[StabilityReport]:
    """``slab_cbar`` for several ``r`` sharing one slab and one set of operators."""
    slab = pitch_slab(mesh, c_max, t_max, gamma)
    space = DgSpace(p)
    ops = [tent_operators(t, model, space, mesh) for t in slab.tents]
    for o in ops:
        for w in (o.Mw0, o.Mw1):
            try:
                np.linalg.cholesky(w)
            except np.linalg.LinAlgError as exc:
                raise ValueError("tent energy matrix is not positive definite") from exc
    reports = []
    for r in r_list:
        c = np.array([norm_S(build_S(o, scheme, r), o.Mw0, o.Mw1) for o in ops])
        reports.append(StabilityReport(
            c, float(np.max(c - 1.0)), p, scheme.s, int(r), _scheme_name(scheme),
            extra={"n_tents": len(slab.tents)},
        ))
    return reports


def slab_cbar(mesh: Mesh1D, model: FluxModel, scheme, p: int, r: int,
              c_max: float, t_max: float, gamma: float = 0.99) -> StabilityReport:
    return cbar_sweep(mesh, model, scheme, p, [r], c_max, t_max, gamma)[0]


def fit_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope in log-log coordinates."""
    slope, _ = np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)
    return float(slope)
