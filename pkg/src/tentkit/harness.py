"""Convergence and stability studies with CSV output."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .dg1d import DgSpace, l2_error, project_initial, run_slab
from .mesh_tents import Mesh1D, pitch_slab
from .models import make_model
from .ode_core import SolverError
from .stability import cbar_sweep
from .tableau import resolve_scheme

__all__ = [
    "RunConfig",
    "ConvergenceRow",
    "StabilityRow",
    "ConvergenceAborted",
    "run_convergence",
    "run_stability",
    "compute_eoc",
    "emit_csv",
    "gnuplot_script",
    "parse_levels",
    "parse_int_list",
]

log = logging.getLogger(__name__)

CONVERGENCE_COLUMNS = ("h", "dof", "error", "eoc")
STABILITY_COLUMNS = ("r", "p", "s", "scheme", "cbar")


def parse_levels(text: str) -> tuple[int, int]:
    """``"i0..i1"`` or a single ``"i"``."""
    parts = text.split("..")
    try:
        if len(parts) == 1:
            return int(parts[0]), int(parts[0])
        if len(parts) == 2:
            return int(parts[0]), int(parts[1])
    except ValueError:
        pass
    raise ValueError(f"levels must look like 0..6, got {text!r}")


def parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ValueError(f"expected comma separated integers, got {text!r}") from None


@dataclass
class RunConfig:
    model: str = "burgers1d"
    scheme: str = "sark3-heun"
    p: int = 2
    r: int = 4
    cmax: float = 8.0
    gamma: float = 0.99
    tmax: float = 0.1
    levels: tuple[int, int] = (0, 6)
    h0: float = 0.1
    out: str | None = None
    threads: int = 1
    seed: int = 0
    r_list: tuple[int, ...] = (2, 4, 8, 16, 32)
    speed: float = 1.0
    flux_scale: float = 0.5

    def __post_init__(self):
        if isinstance(self.levels, str):
            self.levels = parse_levels(self.levels)
        if isinstance(self.r_list, str):
            self.r_list = parse_int_list(self.r_list)
        self.levels = tuple(int(v) for v in self.levels)
        self.r_list = tuple(int(v) for v in self.r_list)
        self.validate()

    def validate(self) -> None:
        if self.p < 0:
            raise ValueError("p must be >= 0")
        for key in ("r", "threads"):
            if getattr(self, key) < 1:
                raise ValueError(f"{key} must be >= 1")
        for key in ("cmax", "tmax", "h0", "flux_scale"):
            if not getattr(self, key) > 0:
                raise ValueError(f"{key} must be positive")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if len(self.levels) != 2 or self.levels[0] < 0 or self.levels[1] < self.levels[0]:
            raise ValueError("levels must be a nonempty range i0..i1 with 0 <= i0 <= i1")
        if not self.r_list or min(self.r_list) < 1:
            raise ValueError("r_list must hold positive integers")
        resolve_scheme(self.scheme)
        make_model(self.model, self.speed, self.flux_scale)

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        norm = {k.replace("-", "_"): v for k, v in data.items()}
        unknown = sorted(set(norm) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**norm)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ConvergenceRow:
    h: float
    dof: int
    error: float
    eoc: float | None = None


@dataclass
class StabilityRow:
    r: int
    p: int
    s: int
    scheme: str
    cbar: float


class ConvergenceAborted(RuntimeError):
    """A level failed; ``rows`` holds the levels completed before it."""

    def __init__(self, level: int, cause: Exception, rows: list[ConvergenceRow]):
        super().__init__(f"level {level} failed: {cause}")
        self.level = level
        self.cause = cause
        self.rows = rows


def compute_eoc(hs: Sequence[float], errors: Sequence[float]) -> list[float | None]:
    out: list[float | None] = [None]
    for i in range(1, len(errors)):
        out.append(math.log(errors[i - 1] / errors[i]) / math.log(hs[i - 1] / hs[i]))
    return out


def _level_mesh(cfg: RunConfig, i: int, periodic: bool) -> Mesh1D:
    h = cfg.h0 * 2.0 ** (-i)
    n = round(1.0 / h)
    if not math.isclose(n * h, 1.0, rel_tol=1e-9):
        raise ValueError(f"h = {h} does not divide the unit interval")
    return Mesh1D.uniform(n, periodic=periodic)


def run_convergence(cfg: RunConfig) -> list[ConvergenceRow]:
    """Error at ``tmax`` against the exact solution on each mesh level."""
    model = make_model(cfg.model, cfg.speed, cfg.flux_scale)
    scheme = resolve_scheme(cfg.scheme)
    space = DgSpace(cfg.p)
    hs: list[float] = []
    errors: list[float] = []
    dofs: list[int] = []

    def rows():
        return [ConvergenceRow(h, d, e, q)
                for h, d, e, q in zip(hs, dofs, errors, compute_eoc(hs, errors))]

    for i in range(cfg.levels[0], cfg.levels[1] + 1):
        mesh = _level_mesh(cfg, i, model.periodic)
        try:
            state = project_initial(mesh, space, model.initial)
            slab = pitch_slab(mesh, cfg.cmax, cfg.tmax, cfg.gamma)
            run_slab(state, slab, scheme, cfg.r, model, threads=cfg.threads)
            err = l2_error(state, lambda x: model.exact_solution(x, cfg.tmax))
        except (SolverError, FloatingPointError) as exc:
            raise ConvergenceAborted(i, exc, rows()) from exc
        if not np.isfinite(err):
            raise ConvergenceAborted(i, SolverError("non-finite error", level=i), rows())
        hs.append(float(mesh.lengths[0]))
        dofs.append(mesh.n_elements * space.ndof)
        errors.append(err)
        log.info("level %d: %d tents, error %.6e", i, len(slab.tents), err)
    return rows()


def run_stability(cfg: RunConfig) -> list[StabilityRow]:
    """``cbar`` over ``cfg.r_list`` on a periodic mesh of width ``h0``."""
    model = make_model(cfg.model, cfg.speed, cfg.flux_scale)
    if not model.is_linear:
        raise ValueError("stability studies need a linear model")
    scheme = resolve_scheme(cfg.scheme)
    mesh = _level_mesh(cfg, cfg.levels[0], periodic=True)
    reports = cbar_sweep(mesh, model, scheme, cfg.p, cfg.r_list, cfg.cmax, cfg.tmax, cfg.gamma)
    return [StabilityRow(rep.r, rep.p, rep.s, rep.scheme, rep.cbar) for rep in reports]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.16e}"
    return str(value)


def emit_csv(rows: Iterable, path, columns: Sequence[str] | None = None) -> None:
    """Write dataclass rows as CSV; ``path`` may be a filename or an open text stream."""
    rows = list(rows)
    if columns is None:
        if not rows:
            raise ValueError("columns are required for an empty table")
        columns = [f.name for f in fields(rows[0])]

    def write(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(getattr(row, c)) for c in columns])

    if hasattr(path, "write"):
        write(path)
    else:
        with open(Path(path), "w", encoding="utf-8", newline="") as fh:
            write(fh)


def gnuplot_script(csv_path: str, kind: str = "convergence") -> str:
    """Plot commands for a CSV written by ``emit_csv``."""
    head = "set datafile separator ','\nset logscale xy\nset key autotitle columnhead\n"
    if kind == "convergence":
        return head + f"plot '{csv_path}' using 1:3 with linespoints\n"
    if kind == "stability":
        return head + f"plot '{csv_path}' using 1:5 with linespoints\n"
    raise ValueError(f"unknown plot kind {kind!r}")
