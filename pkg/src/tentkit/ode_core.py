"""Time integration of the structured tent ODE  d/dt M(t, U) = A(U).

The ODE on one tent is never written in the standard form ``U' = F(t, U)``.
Instead, an integrator talks to an object implementing :class:`StructuredOde`,
which evaluates ``M0``, ``M1`` and ``A`` and inverts ``M(t) = M0 - t M1``.

Two families of integrators live here:

* :func:`sark_step` / :func:`sark_tent_solve` -- structure aware schemes that
  only ever invert the time-independent ``M0`` of each substep;
* :func:`classical_rk_step` / :func:`classical_rk_tent_solve` -- plain
  Runge-Kutta applied to ``Y' = A(M(t)^{-1} Y)``, the baseline that suffers
  from order reduction.

:func:`reference_flow` integrates the exact ``Y``/``Z`` system to high
accuracy and is used as the oracle for local order checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence, runtime_checkable

import numpy as np

from .tableau import ButcherTableau, SarkTableau

__all__ = [
    "SolverError",
    "OrderFitError",
    "StructuredOde",
    "LinearStructuredOde",
    "linear_family",
    "SubtentPlan",
    "StepTrace",
    "sark_step",
    "sark_tent_solve",
    "classical_rk_step",
    "classical_rk_tent_solve",
    "reference_flow",
    "local_order_estimate",
]


class SolverError(RuntimeError):
    """An inner inversion of ``M0`` or ``M(t)`` failed.

    Context fields are filled in as the error travels outwards.
    """

    def __init__(self, message: str, **context):
        super().__init__(message)
        self.message = message
        self.context = dict(context)

    def add_context(self, **context) -> "SolverError":
        for key, value in context.items():
            self.context.setdefault(key, value)
        return self

    def __str__(self) -> str:
        if not self.context:
            return self.message
        ctx = ", ".join(f"{k}={v}" for k, v in self.context.items())
        return f"{self.message} ({ctx})"


class OrderFitError(ValueError):
    """Errors sit at the rounding floor; a slope is meaningless."""


@runtime_checkable
class StructuredOde(Protocol):
    """Capability contract for one substep of a tent ODE.

    ``M(t, W) = M0(W) - t M1(W)`` where ``t`` is measured from the start of
    the substep.  Dual vectors are the images of ``M0``, ``M1`` and ``A``.
    """

    dim: int
    is_linear: bool

    def apply_A(self, W: np.ndarray) -> np.ndarray: ...

    def apply_M0(self, W: np.ndarray) -> np.ndarray: ...

    def apply_M1(self, W: np.ndarray) -> np.ndarray: ...

    def solve_M0(self, R: np.ndarray) -> np.ndarray: ...

    def solve_M(self, t: float, R: np.ndarray) -> np.ndarray: ...


class LinearStructuredOde:
    """Dense-matrix structured ODE; ``M0``, ``M1`` and ``A`` are m x m arrays."""

    is_linear = True

    def __init__(self, M0, M1, A):
        self.M0 = np.asarray(M0, dtype=float)
        self.M1 = np.asarray(M1, dtype=float)
        self.A = np.asarray(A, dtype=float)
        self.dim = self.M0.shape[0]

    def apply_A(self, W):
        return self.A @ W

    def apply_M0(self, W):
        return self.M0 @ W

    def apply_M1(self, W):
        return self.M1 @ W

    def solve_M0(self, R):
        return self.solve_M(0.0, R)

    def solve_M(self, t, R):
        try:
            return np.linalg.solve(self.M0 - t * self.M1, R)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"M({t}) is singular") from exc


def linear_family(M0, M1, A, r: int) -> Callable[[int], LinearStructuredOde]:
    """Substep provider for a linear tent: substep k starts at t = k/r."""
    M0 = np.asarray(M0, dtype=float)
    M1 = np.asarray(M1, dtype=float)
    odes = [LinearStructuredOde(M0 - (k / r) * M1, M1, A) for k in range(r)]
    return odes.__getitem__


@dataclass(frozen=True)
class SubtentPlan:
    r: int

    def __post_init__(self):
        if int(self.r) != self.r or self.r < 1:
            raise ValueError("r must be a positive integer")

    @property
    def breakpoints(self) -> np.ndarray:
        return np.arange(self.r + 1) / self.r

    @property
    def tau(self) -> float:
        return 1.0 / self.r


@dataclass
class StepTrace:
    ys: list = field(default_factory=list)
    stages: list | None = None


def _transport_and_correction(ode: StructuredOde, Z: np.ndarray):
    U = ode.solve_M0(Z)
    return ode.apply_A(U), ode.apply_M1(U)


def sark_step(ode: StructuredOde, t: SarkTableau, tau: float, Y: np.ndarray,
              stages: list | None = None) -> np.ndarray:
    """One structure aware step of size ``tau`` starting from ``Y``."""
    s = t.s
    a, d, b = t.a, t.d, t.b
    AZ = [None] * s
    MZ = [None] * s
    Y = np.asarray(Y, dtype=float)
    out = Y.copy()
    for i in range(s):
        Z = Y.copy()
        for j in range(i):
            if d[i, j] != 0.0:
                Z += (tau * d[i, j]) * MZ[j]
            if a[i, j] != 0.0:
                Z += (tau * a[i, j]) * AZ[j]
        try:
            AZ[i], MZ[i] = _transport_and_correction(ode, Z)
        except SolverError as exc:
            raise exc.add_context(stage=i + 1)
        if stages is not None:
            stages.append(Z)
        if b[i] != 0.0:
            out += (tau * b[i]) * AZ[i]
    return out


def sark_tent_solve(ode_family: Callable[[int], StructuredOde], t: SarkTableau,
                    plan: SubtentPlan, U0: np.ndarray | None = None,
                    Y0: np.ndarray | None = None, keep_stages: bool = False):
    """Algorithm over ``plan.r`` subtents; returns ``(U1, trace)``.

    Exactly one of ``U0`` (coefficients at the tent bottom) or ``Y0``
    (``M0(U0)`` with the first substep's operators) must be given.
    """
    if (U0 is None) == (Y0 is None):
        raise ValueError("give exactly one of U0 or Y0")
    tau = plan.tau
    Y = ode_family(0).apply_M0(U0) if Y0 is None else np.array(Y0, dtype=float)
    trace = StepTrace(ys=[Y], stages=[] if keep_stages else None)
    ode = None
    for k in range(plan.r):
        ode = ode_family(k)
        stages = [] if keep_stages else None
        try:
            Y = sark_step(ode, t, tau, Y, stages)
        except SolverError as exc:
            raise exc.add_context(substep=k)
        trace.ys.append(Y)
        if keep_stages:
            trace.stages.append(stages)
    try:
        U1 = ode.solve_M(tau, Y)
    except SolverError as exc:
        raise exc.add_context(substep="top")
    return U1, trace


def classical_rk_step(ode: StructuredOde, t: ButcherTableau, tau: float,
                      Y: np.ndarray) -> np.ndarray:
    """One classical step on ``Y' = A(M(t)^{-1} Y)`` over the substep."""
    a, b, c = t.a, t.b, t.c
    K = [None] * t.s
    Y = np.asarray(Y, dtype=float)
    out = Y.copy()
    for i in range(t.s):
        Yi = Y.copy()
        for j in range(i):
            if a[i, j] != 0.0:
                Yi += (tau * a[i, j]) * K[j]
        try:
            K[i] = ode.apply_A(ode.solve_M(c[i] * tau, Yi))
        except SolverError as exc:
            raise exc.add_context(stage=i + 1)
        if b[i] != 0.0:
            out += (tau * b[i]) * K[i]
    return out


def classical_rk_tent_solve(ode_family: Callable[[int], StructuredOde],
                            t: ButcherTableau, plan: SubtentPlan,
                            U0: np.ndarray | None = None,
                            Y0: np.ndarray | None = None) -> np.ndarray:
    if (U0 is None) == (Y0 is None):
        raise ValueError("give exactly one of U0 or Y0")
    tau = plan.tau
    Y = ode_family(0).apply_M0(U0) if Y0 is None else np.array(Y0, dtype=float)
    ode = None
    for k in range(plan.r):
        ode = ode_family(k)
        try:
            Y = classical_rk_step(ode, t, tau, Y)
        except SolverError as exc:
            raise exc.add_context(substep=k)
    try:
        return ode.solve_M(tau, Y)
    except SolverError as exc:
        raise exc.add_context(substep="top")


def _correction_matrix(ode: StructuredOde) -> np.ndarray:
    m = ode.dim
    B = np.empty((m, m))
    for j in range(m):
        e = np.zeros(m)
        e[j] = 1.0
        B[:, j] = ode.apply_M1(ode.solve_M0(e))
    return B


def reference_flow(ode: StructuredOde, Y0: np.ndarray, t_end: float,
                   tol: float = 1e-13, max_halvings: int = 20) -> np.ndarray:
    """Accurate ``Y(t_end)`` of the exact ``Y``/``Z`` system.

    With ``B`` the (linear) front-correction operator the system reads
    ``(I - tB) Z' = A~(Z) + B Z``, ``Y' = A~(Z)``; it is integrated with
    classical RK4, halving the step until two successive answers agree
    to ``tol`` (relative to ``1 + |Y0|``).
    """
    Y0 = np.asarray(Y0, dtype=float)
    m = Y0.size
    B = _correction_matrix(ode)
    eye = np.eye(m)

    def atilde(Z):
        return ode.apply_A(ode.solve_M0(Z))

    def rhs(t, Z):
        aZ = atilde(Z)
        try:
            dZ = np.linalg.solve(eye - t * B, aZ + B @ Z)
        except np.linalg.LinAlgError:
            raise SolverError(f"I - tB is singular at t={t}") from None
        return dZ, aZ

    def integrate(n):
        h = t_end / n
        Z = Y0.copy()
        Y = Y0.copy()
        for step in range(n):
            t0 = step * h
            k1z, k1y = rhs(t0, Z)
            k2z, k2y = rhs(t0 + h / 2, Z + (h / 2) * k1z)
            k3z, k3y = rhs(t0 + h / 2, Z + (h / 2) * k2z)
            k4z, k4y = rhs(t0 + h, Z + h * k3z)
            Z = Z + (h / 6) * (k1z + 2 * k2z + 2 * k3z + k4z)
            Y = Y + (h / 6) * (k1y + 2 * k2y + 2 * k3y + k4y)
        return Y

    if t_end == 0.0:
        return Y0.copy()
    scale = 1.0 + np.linalg.norm(Y0)
    n = 4
    prev = integrate(n)
    for _ in range(max_halvings):
        n *= 2
        cur = integrate(n)
        if np.linalg.norm(cur - prev) < tol * scale:
            return cur
        prev = cur
    raise SolverError(f"reference flow did not settle to {tol} with {n} steps")


def local_order_estimate(t: SarkTableau, ode: StructuredOde,
                         taus: Sequence[float], y0: np.ndarray | None = None,
                         floor: float = 1e-14) -> float:
    """Least-squares slope of log one-step error against log tau."""
    taus = np.asarray(taus, dtype=float)
    if taus.size < 2 or np.any(np.diff(taus) >= 0):
        raise ValueError("taus must be a decreasing sequence of length >= 2")
    y0 = np.ones(ode.dim) if y0 is None else np.asarray(y0, dtype=float)
    scale = 1.0 + np.linalg.norm(y0)
    errs = np.array([
        np.linalg.norm(sark_step(ode, t, tau, y0) - reference_flow(ode, y0, tau))
        for tau in taus
    ])
    if np.any(errs <= floor * scale):
        raise OrderFitError(f"errors at rounding floor: {errs}")
    slope, _ = np.polyfit(np.log(taus), np.log(errs), 1)
    return float(slope)
