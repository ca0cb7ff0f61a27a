"""Scalar 1D conservation laws ``d_t g(u) + d_x f(u) = 0`` with data and exact solutions.

Flux pieces are numba ufuncs taking one model parameter, so the same
definitions serve numpy callers and the compiled DG kernels.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from numba import vectorize

__all__ = [
    "FluxModel",
    "Advection1D",
    "Burgers1D",
    "burgers_initial",
    "burgers_exact",
    "burgers_breaking_time",
    "advection_exact",
    "make_model",
    "MODEL_NAMES",
]

_SIG2 = ["float64(float64, float64)"]
_SIG4 = ["float64(float64, float64, float64, float64)"]


@vectorize(_SIG2, cache=True)
def _identity(u, k):
    return u


@vectorize(_SIG2, cache=True)
def _one(u, k):
    return 1.0


@vectorize(_SIG2, cache=True)
def _adv_flux(u, b):
    return b * u


@vectorize(_SIG2, cache=True)
def _adv_dflux(u, b):
    return b


@vectorize(_SIG2, cache=True)
def _adv_speed(u, b):
    return abs(b)


@vectorize(_SIG4, cache=True)
def _adv_upwind(up, um, n, b):
    bn = b * n
    return bn * um if bn >= 0.0 else bn * up


@vectorize(_SIG2, cache=True)
def _burgers_flux(u, k):
    return k * u * u


@vectorize(_SIG2, cache=True)
def _burgers_dflux(u, k):
    return 2.0 * k * u


@vectorize(_SIG2, cache=True)
def _burgers_speed(u, k):
    return abs(2.0 * k * u)


@vectorize(_SIG4, cache=True)
def _burgers_rusanov(up, um, n, k):
    lam = max(abs(2.0 * k * up), abs(2.0 * k * um))
    return 0.5 * (k * up * up + k * um * um) * n - 0.5 * lam * (up - um)


class FluxModel:
    """Base for scalar conservation laws (``L = 1``).

    Subclasses set the numba ufuncs ``_g, _dg, _f, _df, _c, _fn`` and the
    scalar ``param`` passed to them.  Boundary data is affine in the interior
    trace: ``exterior = alpha * interior + beta``.
    """

    name = "model"
    L = 1
    is_linear = False
    periodic = False
    param = 0.0

    _g = staticmethod(_identity)
    _dg = staticmethod(_one)
    _f: Callable
    _df: Callable
    _c: Callable
    _fn: Callable

    def g(self, u):
        return self._g(u, self.param)

    def dg(self, u):
        return self._dg(u, self.param)

    def f(self, u):
        return self._f(u, self.param)

    def df(self, u):
        return self._df(u, self.param)

    def wavespeed(self, u):
        return self._c(u, self.param)

    def numerical_flux(self, up, um, n):
        """Flux through a facet with unit normal ``n``; ``up`` lies on the side ``n`` points to."""
        return self._fn(up, um, n, self.param)

    def boundary_affine(self, side: str) -> tuple[float, float]:
        return 1.0, 0.0

    def boundary_value(self, x: float, t: float, side: str, interior):
        alpha, beta = self.boundary_affine(side)
        return alpha * np.asarray(interior) + beta

    def kernel_funcs(self):
        return self._g, self._dg, self._f, self._df, self._fn

    def initial(self, x):
        raise NotImplementedError

    def exact_solution(self, x, t):
        raise NotImplementedError


class Advection1D(FluxModel):
    """Linear transport ``u_t + (b u)_x = 0`` on a periodic domain ``[0, 1)``."""

    name = "advection1d"
    is_linear = True

    _f = staticmethod(_adv_flux)
    _df = staticmethod(_adv_dflux)
    _c = staticmethod(_adv_speed)
    _fn = staticmethod(_adv_upwind)

    def __init__(self, speed: float = 1.0, u0: Callable | None = None,
                 periodic: bool = True, inflow: float = 0.0):
        self.param = float(speed)
        self.periodic = periodic
        self.inflow = float(inflow)
        self.u0 = u0 if u0 is not None else (lambda x: np.sin(2 * np.pi * np.asarray(x)))

    @property
    def speed(self) -> float:
        return self.param

    def boundary_affine(self, side):
        # inflow side gets a fixed value, outflow side copies the interior
        upstream = "left" if self.param >= 0 else "right"
        return (0.0, self.inflow) if side == upstream else (1.0, 0.0)

    def initial(self, x):
        return self.u0(x)

    def exact_solution(self, x, t):
        return advection_exact(x, t, self.u0, self.param)


def burgers_initial(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-50.0 * (x - 0.5) ** 2)


def _burgers_initial_slope(x):
    return -100.0 * (x - 0.5) * burgers_initial(x)


def burgers_breaking_time(flux_scale: float = 0.5, samples: int = 200001) -> float:
    """First crossing time of characteristics for the Gaussian data."""
    x = np.linspace(0.0, 1.0, samples)
    slope = _burgers_initial_slope(x)
    neg = slope[slope < 0]
    return float(np.min(-1.0 / (2.0 * flux_scale * neg)))


def burgers_exact(x, t, tol: float = 1e-13, flux_scale: float = 0.5,
                  max_iter: int = 50):
    """Pre-shock solution by characteristics.

    Solves ``xi + 2 k u0(xi) t = x`` by Newton from ``xi = x`` and returns
    ``u0(xi)``; ``k`` is the coefficient in ``f(u) = k u^2``.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    x, t = np.broadcast_arrays(x, t)
    speed = 2.0 * flux_scale * t
    xi = x.copy()
    for _ in range(max_iter):
        res = xi + speed * burgers_initial(xi) - x
        if np.all(np.abs(res) <= tol):
            break
        jac = 1.0 + speed * _burgers_initial_slope(xi)
        if np.any(jac <= 0.0):
            raise ValueError(
                "characteristics lose monotonicity (shock has formed) at "
                f"t={float(np.max(t[jac <= 0]))}"
            )
        xi = xi - res / jac
    else:
        res = xi + speed * burgers_initial(xi) - x
        if not np.all(np.abs(res) <= tol):
            raise ValueError(
                f"characteristic Newton did not converge: max residual {np.max(np.abs(res))}"
            )
    u = burgers_initial(xi)
    return u if u.ndim else float(u)


class Burgers1D(FluxModel):
    """``u_t + (k u^2)_x = 0`` on ``[0, 1]``, inflow at 0 and outflow at 1.

    ``flux_scale`` is ``k``; the default ``1/2`` keeps the Gaussian data
    smooth up to ``t = 0.164``.
    """

    name = "burgers1d"

    _f = staticmethod(_burgers_flux)
    _df = staticmethod(_burgers_dflux)
    _c = staticmethod(_burgers_speed)
    _fn = staticmethod(_burgers_rusanov)

    def __init__(self, flux_scale: float = 0.5, inflow: float | None = None,
                 u0: Callable | None = None, periodic: bool = False):
        self.param = float(flux_scale)
        self.u0 = u0 if u0 is not None else burgers_initial
        self.inflow = float(self.u0(0.0)) if inflow is None else float(inflow)
        self.periodic = periodic

    @property
    def flux_scale(self) -> float:
        return self.param

    def boundary_affine(self, side):
        return (0.0, self.inflow) if side == "left" else (1.0, 0.0)

    def initial(self, x):
        return self.u0(x)

    def exact_solution(self, x, t):
        if self.u0 is not burgers_initial:
            raise NotImplementedError("exact solution only for the Gaussian data")
        return burgers_exact(x, t, flux_scale=self.param)


def advection_exact(x, t, u0: Callable, b: float = 1.0):
    x = np.asarray(x, dtype=float)
    shifted = x - b * t
    return u0(shifted - np.floor(shifted))


MODEL_NAMES = ("advection1d", "burgers1d")


def make_model(name: str, speed: float = 1.0, flux_scale: float = 0.5) -> FluxModel:
    if name == "advection1d":
        return Advection1D(speed=speed)
    if name == "burgers1d":
        return Burgers1D(flux_scale=flux_scale)
    raise ValueError(f"unknown model {name!r}; valid names: {', '.join(MODEL_NAMES)}")
