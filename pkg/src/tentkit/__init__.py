"""Mapped tent pitching for 1D conservation laws with structure aware Runge-Kutta schemes."""

from .dg1d import DgSpace, GlobalState, project_initial, propagate_tent, run_slab
from .harness import RunConfig, run_convergence, run_stability
from .mesh_tents import Mesh1D, Tent, TentSlab, pitch_slab
from .models import Advection1D, Burgers1D, burgers_exact
from .ode_core import SolverError, reference_flow, sark_step, sark_tent_solve
from .stability import build_S, norm_S, slab_cbar
from .tableau import ButcherTableau, SarkTableau, builtin_sark, resolve_scheme, verify_order

__version__ = "0.1.0"

__all__ = [
    "DgSpace", "GlobalState", "project_initial", "propagate_tent", "run_slab",
    "RunConfig", "run_convergence", "run_stability",
    "Mesh1D", "Tent", "TentSlab", "pitch_slab",
    "Advection1D", "Burgers1D", "burgers_exact",
    "SolverError", "reference_flow", "sark_step", "sark_tent_solve",
    "build_S", "norm_S", "slab_cbar",
    "ButcherTableau", "SarkTableau", "builtin_sark", "resolve_scheme", "verify_order",
]
