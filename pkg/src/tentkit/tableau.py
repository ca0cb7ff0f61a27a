"""Coefficient tableaus for structure aware and classical explicit Runge-Kutta schemes.

A structure aware scheme carries two strictly lower triangular matrices:
``a`` multiplies the transport operator and ``d`` multiplies the
time-derivative of the front correction.  Dropping ``d`` gives back the
classical Butcher tableau the scheme was built on.

Built-in tableaus keep an exact rational copy of their entries so that
order-condition residuals evaluate to exactly ``0.0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

__all__ = [
    "ButcherTableau",
    "OrderReport",
    "SarkTableau",
    "SARK_NAMES",
    "RK_NAMES",
    "builtin_rk",
    "builtin_sark",
    "order_residuals",
    "verify_order",
    "resolve_scheme",
]


def _as_matrix(rows, s: int) -> np.ndarray:
    m = np.zeros((s, s))
    for i, row in enumerate(rows):
        for j, v in enumerate(row):
            m[i, j] = float(v)
    return m


def _check_lower(name: str, m: np.ndarray) -> None:
    if np.any(np.triu(m) != 0.0):
        raise ValueError(f"{name} must be strictly lower triangular")


@dataclass(frozen=True)
class ButcherTableau:
    """Explicit Runge-Kutta tableau ``c | a / b``."""

    a: np.ndarray
    b: np.ndarray
    name: str = "custom"
    order: int | None = None
    exact: dict | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        b = np.array(self.b, dtype=float)
        if a.ndim != 2 or a.shape != (b.size, b.size):
            raise ValueError("a must be s x s with s = len(b)")
        _check_lower("a", a)
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def s(self) -> int:
        return self.b.size

    @property
    def c(self) -> np.ndarray:
        if self.exact is not None:
            return np.array([float(sum(row)) for row in self.exact["a"]])
        return self.a.sum(axis=1)


@dataclass(frozen=True)
class SarkTableau:
    """Structure aware tableau ``c | a | d / b``.

    ``c`` is never stored; it follows from the row sums of ``a``.
    """

    a: np.ndarray
    d: np.ndarray
    b: np.ndarray
    name: str = "custom"
    order: int | None = None
    exact: dict | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        d = np.array(self.d, dtype=float)
        b = np.array(self.b, dtype=float)
        s = b.size
        if s < 1:
            raise ValueError("a tableau needs at least one stage")
        if a.shape != (s, s) or d.shape != (s, s):
            raise ValueError("a and d must be s x s with s = len(b)")
        _check_lower("a", a)
        _check_lower("d", d)
        for arr in (a, d, b):
            arr.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "b", b)

    @property
    def s(self) -> int:
        return self.b.size

    @property
    def c(self) -> np.ndarray:
        if self.exact is not None:
            return np.array([float(sum(row)) for row in self.exact["a"]])
        return self.a.sum(axis=1)

    def underlying_rk(self) -> ButcherTableau:
        """The classical tableau obtained by dropping ``d``."""
        exact = None
        if self.exact is not None:
            exact = {"a": self.exact["a"], "b": self.exact["b"]}
        return ButcherTableau(self.a, self.b, name=self.name, order=None, exact=exact)


def _sark(name, a, d, b, order) -> SarkTableau:
    s = len(b)
    a = [[Fraction(x) for x in row] + [Fraction(0)] * (s - len(row)) for row in a]
    d = [[Fraction(x) for x in row] + [Fraction(0)] * (s - len(row)) for row in d]
    b = [Fraction(x) for x in b]
    return SarkTableau(
        _as_matrix(a, s), _as_matrix(d, s), np.array([float(x) for x in b]),
        name=name, order=order, exact={"a": a, "d": d, "b": b},
    )


def _rk(name, a, b, order) -> ButcherTableau:
    s = len(b)
    a = [[Fraction(x) for x in row] + [Fraction(0)] * (s - len(row)) for row in a]
    b = [Fraction(x) for x in b]
    return ButcherTableau(
        _as_matrix(a, s), np.array([float(x) for x in b]),
        name=name, order=order, exact={"a": a, "b": b},
    )


F = Fraction

_SARK_TABLE = {
    "sark2-midpoint": lambda: _sark(
        "sark2-midpoint", [[], [F(1, 2)]], [[], [F(1, 2)]], [0, 1], 2),
    "sark2-ralston": lambda: _sark(
        "sark2-ralston", [[], [F(2, 3)]], [[], [F(2, 3)]], [F(1, 4), F(3, 4)], 2),
    "sark2-heun": lambda: _sark(
        "sark2-heun", [[], [1]], [[], [1]], [F(1, 2), F(1, 2)], 2),
    "sark3-kutta": lambda: _sark(
        "sark3-kutta",
        [[], [F(1, 2)], [-1, 2]],
        [[], [F(1, 2)], [-3, 4]],
        [F(1, 6), F(2, 3), F(1, 6)], 3),
    "sark3-heun": lambda: _sark(
        "sark3-heun",
        [[], [F(1, 3)], [0, F(2, 3)]],
        [[], [F(1, 3)], [F(-2, 3), F(4, 3)]],
        [F(1, 4), 0, F(3, 4)], 3),
}

_RK_TABLE = {
    "rk1-euler": lambda: _rk("rk1-euler", [[]], [1], 1),
    "rk2-midpoint": lambda: _rk("rk2-midpoint", [[], [F(1, 2)]], [0, 1], 2),
    "rk2-ralston": lambda: _rk("rk2-ralston", [[], [F(2, 3)]], [F(1, 4), F(3, 4)], 2),
    "rk2-heun": lambda: _rk("rk2-heun", [[], [1]], [F(1, 2), F(1, 2)], 2),
    "rk3-kutta": lambda: _rk(
        "rk3-kutta", [[], [F(1, 2)], [-1, 2]], [F(1, 6), F(2, 3), F(1, 6)], 3),
    "rk3-heun": lambda: _rk(
        "rk3-heun", [[], [F(1, 3)], [0, F(2, 3)]], [F(1, 4), 0, F(3, 4)], 3),
    "rk4-classic": lambda: _rk(
        "rk4-classic",
        [[], [F(1, 2)], [0, F(1, 2)], [0, 0, 1]],
        [F(1, 6), F(1, 3), F(1, 3), F(1, 6)], 4),
}

SARK_NAMES = tuple(_SARK_TABLE)
RK_NAMES = tuple(_RK_TABLE)

# each SARK scheme and the classical method its a/b coefficients come from
UNDERLYING_RK = {
    "sark2-midpoint": "rk2-midpoint",
    "sark2-ralston": "rk2-ralston",
    "sark2-heun": "rk2-heun",
    "sark3-kutta": "rk3-kutta",
    "sark3-heun": "rk3-heun",
}


def builtin_sark(name: str) -> SarkTableau:
    try:
        return _SARK_TABLE[name]()
    except KeyError:
        raise ValueError(
            f"unknown SARK scheme {name!r}; valid names: {', '.join(SARK_NAMES)}"
        ) from None


def builtin_rk(name: str) -> ButcherTableau:
    try:
        return _RK_TABLE[name]()
    except KeyError:
        raise ValueError(
            f"unknown Runge-Kutta scheme {name!r}; valid names: {', '.join(RK_NAMES)}"
        ) from None


def resolve_scheme(name: str) -> SarkTableau | ButcherTableau:
    """Look a scheme up in either table."""
    if name in _SARK_TABLE:
        return builtin_sark(name)
    if name in _RK_TABLE:
        return builtin_rk(name)
    raise ValueError(
        f"unknown scheme {name!r}; valid names: {', '.join(SARK_NAMES + RK_NAMES)}"
    )


@dataclass(frozen=True)
class OrderReport:
    r1: float
    r2: np.ndarray
    r3: np.ndarray
    tol: float = 1e-12

    @property
    def attained_order(self) -> int:
        if abs(self.r1) > self.tol:
            return 0
        if np.any(np.abs(self.r2) > self.tol):
            return 1
        if np.any(np.abs(self.r3) > self.tol):
            return 2
        return 3


def _residuals(a: Sequence[Sequence], d: Sequence[Sequence], b: Sequence, one):
    s = len(b)
    rng = range(s)
    ra = [sum(a[i][j] for j in range(i)) for i in rng]
    rd = [sum(d[i][j] for j in range(i)) for i in rng]
    r1 = sum(b) - one
    r2 = (
        2 * sum(b[i] * rd[i] for i in rng) - one,
        2 * sum(b[i] * ra[i] for i in rng) - one,
    )

    def triple(x, y):
        return sum(
            b[i] * x[i][j] * y[j][k]
            for i in rng for j in range(i) for k in range(j)
        )

    r3 = (
        3 * sum(b[i] * ra[i] ** 2 for i in rng) - one,
        3 * sum(b[i] * rd[i] ** 2 for i in rng) - one,
        3 * sum(b[i] * ra[i] * rd[i] for i in rng) - one,
        6 * triple(a, a) - one,
        6 * triple(a, d) - one,
        3 * triple(d, a) - one,
        3 * triple(d, d) - one,
    )
    return r1, r2, r3


def order_residuals(t: SarkTableau, tol: float = 1e-12) -> OrderReport:
    """Residuals of the order conditions up to third order.

    The third-order residuals follow the elementary differentials
    a2(al,al), a2(mu,mu), a2(al,mu), a1(a1 al), a1(a1 mu), a1(m1 al), a1(m1 mu),
    where ``al``/``mu`` are the transport and front-correction increments.
    """
    if t.exact is not None:
        r1, r2, r3 = _residuals(t.exact["a"], t.exact["d"], t.exact["b"], Fraction(1))
    else:
        r1, r2, r3 = _residuals(t.a.tolist(), t.d.tolist(), t.b.tolist(), 1.0)
    return OrderReport(
        float(r1), np.array([float(x) for x in r2]), np.array([float(x) for x in r3]), tol
    )


def verify_order(t: SarkTableau, tol: float = 1e-12) -> int:
    if tol <= 0:
        raise ValueError("tol must be positive")
    return order_residuals(t, tol).attained_order
