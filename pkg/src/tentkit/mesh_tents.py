"""1D meshes, advancing fronts and greedy tent pitching."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Mesh1D",
    "Tent",
    "TentSlab",
    "pitch_slab",
    "subtent_fronts",
    "dependency_levels",
]


@dataclass(frozen=True)
class Mesh1D:
    """Strictly increasing vertices ``x_0 < ... < x_n``.

    On a periodic mesh vertex ``n`` is identified with vertex ``0``, so the
    front lives on ``n`` vertices instead of ``n + 1``.
    """

    vertices: np.ndarray
    periodic: bool = False

    def __post_init__(self):
        x = np.array(self.vertices, dtype=float)
        if x.ndim != 1 or x.size < 3:
            raise ValueError("a mesh needs at least two elements")
        if np.any(np.diff(x) <= 0):
            raise ValueError("vertices must be strictly increasing")
        if self.periodic and x.size < 4:
            raise ValueError("a periodic mesh needs at least three elements")
        x.setflags(write=False)
        object.__setattr__(self, "vertices", x)

    @classmethod
    def uniform(cls, n: int, a: float = 0.0, b: float = 1.0, periodic: bool = False):
        return cls(np.linspace(a, b, n + 1), periodic)

    @property
    def n_elements(self) -> int:
        return self.vertices.size - 1

    @property
    def n_front(self) -> int:
        return self.n_elements if self.periodic else self.n_elements + 1

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.vertices)

    def element_vertices(self, e: int) -> tuple[int, int]:
        right = e + 1
        if self.periodic and right == self.n_elements:
            right = 0
        return e, right

    def patch(self, v: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Elements of the vertex patch and its vertices, left to right."""
        n = self.n_elements
        if self.periodic:
            left = (v - 1) % n
            return (left, v), (left, v, (v + 1) % n)
        if v == 0:
            return (0,), (0, 1)
        if v == n:
            return (n - 1,), (n - 1, n)
        return (v - 1, v), (v - 1, v, v + 1)


@dataclass(frozen=True, eq=False)
class Tent:
    """Spacetime tent over the patch of ``center``.

    ``phi_b``/``phi_t`` hold front values at the patch vertices and differ
    only at the center vertex.
    """

    index: int
    center: int
    elements: tuple[int, ...]
    vertices: tuple[int, ...]
    lengths: np.ndarray
    phi_b: np.ndarray
    phi_t: np.ndarray
    level: int = 0

    @property
    def delta(self) -> np.ndarray:
        return self.phi_t - self.phi_b

    @property
    def pole_height(self) -> float:
        return float(self.phi_t[self.center_pos] - self.phi_b[self.center_pos])

    @property
    def center_pos(self) -> int:
        """Index of the center among the patch vertices."""
        return self.vertices.index(self.center)

    @property
    def grad_b(self) -> np.ndarray:
        return np.diff(self.phi_b) / self.lengths

    @property
    def grad_t(self) -> np.ndarray:
        return np.diff(self.phi_t) / self.lengths

    @property
    def grad_delta(self) -> np.ndarray:
        return np.diff(self.delta) / self.lengths

    def describe(self) -> str:
        fmt = ",".join
        return (
            f"tent {self.index} center={self.center} level={self.level} "
            f"phib={fmt(repr(float(v)) for v in self.phi_b)} "
            f"phit={fmt(repr(float(v)) for v in self.phi_t)}"
        )


@dataclass
class TentSlab:
    mesh: Mesh1D
    tents: list[Tent]
    c_max: float
    t_max: float
    gamma: float
    levels: list[list[int]] = field(default_factory=list)

    def dump(self) -> str:
        return "\n".join(t.describe() for t in self.tents) + "\n"


def pitch_slab(mesh: Mesh1D, c_max: float, t_max: float, gamma: float = 0.99,
               t0: float = 0.0) -> TentSlab:
    """Fill ``[t0, t_max]`` with tents by greedy minimal-front pitching.

    The vertex with the lowest front value (lowest index on ties) is raised
    to ``min(t_max, min_W tau(W) + gamma |x_V - x_W| / c_max)``.
    """
    if c_max <= 0 or t_max <= t0:
        raise ValueError("need c_max > 0 and t_max > t0")
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    nv = mesh.n_front
    h = mesh.lengths
    tau = np.full(nv, float(t0))
    # per-vertex neighbour lists as (index, distance)
    neighbours = []
    patches = []
    for v in range(nv):
        elems, verts = mesh.patch(v)
        patches.append((elems, verts))
        nb = []
        for e in elems:
            w0, w1 = mesh.element_vertices(e)
            nb.append((w1 if w0 == v else w0, h[e]))
        neighbours.append(nb)
    last_level = np.full(mesh.n_elements, -1, dtype=np.int64)
    tents: list[Tent] = []
    levels: list[list[int]] = []
    active = np.where(tau < t_max, tau, np.inf)
    while True:
        v = int(np.argmin(active))
        if not np.isfinite(active[v]):
            break
        new = t_max
        for w, dist in neighbours[v]:
            new = min(new, tau[w] + gamma * dist / c_max)
        if not new > tau[v]:
            raise RuntimeError(
                f"tent pitching stalled at vertex {v}: front {tau[v]!r}, "
                f"neighbour bound {new!r}"
            )
        elems, verts = patches[v]
        phi_b = tau[list(verts)]
        tau[v] = new
        phi_t = tau[list(verts)]
        level = int(max(last_level[e] for e in elems)) + 1
        for e in elems:
            last_level[e] = level
        tent = Tent(len(tents), v, elems, verts, h[list(elems)], phi_b, phi_t, level)
        tents.append(tent)
        if level == len(levels):
            levels.append([])
        levels[level].append(tent.index)
        active[v] = new if new < t_max else np.inf
    return TentSlab(mesh, tents, float(c_max), float(t_max), float(gamma), levels)


def subtent_fronts(t: Tent, r: int) -> list[tuple[np.ndarray, np.ndarray]]:
    if r < 1:
        raise ValueError("r must be >= 1")
    fronts = [t.phi_b + (k / r) * t.delta for k in range(r + 1)]
    fronts[0] = t.phi_b.copy()
    fronts[r] = t.phi_t.copy()
    return [(fronts[k], fronts[k + 1]) for k in range(r)]


def dependency_levels(slab: TentSlab) -> list[list[int]]:
    """Group tents into layers whose patches share no element.

    A tent's level exceeds that of every earlier tent sharing a patch
    element.  Two such tents touch disjoint coefficients, and neither
    center lies in the other's patch, so a layer can run concurrently.
    """
    last = {}
    layers: list[list[int]] = []
    for t in slab.tents:
        level = max((last.get(e, -1) for e in t.elements), default=-1) + 1
        for e in t.elements:
            last[e] = level
        if level == len(layers):
            layers.append([])
        layers[level].append(t.index)
    return layers
