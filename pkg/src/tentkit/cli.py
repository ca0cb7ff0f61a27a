"""Command line front-end: ``tentkit converge|stability|tableau check``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .harness import (
    CONVERGENCE_COLUMNS,
    STABILITY_COLUMNS,
    ConvergenceAborted,
    RunConfig,
    emit_csv,
    gnuplot_script,
    run_convergence,
    run_stability,
)
from .ode_core import SolverError
from .tableau import builtin_sark, order_residuals

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2

log = logging.getLogger("tentkit")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; that code is reserved for solver failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_run_flags(p: argparse.ArgumentParser, stability: bool) -> None:
    p.add_argument("--config", type=Path, help="JSON file with the same keys as the flags")
    p.add_argument("--model")
    p.add_argument("--scheme")
    p.add_argument("--p", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--cmax", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--tmax", type=float)
    p.add_argument("--levels", help="mesh levels i0..i1, h = h0 * 2^-i")
    p.add_argument("--h0", type=float)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--threads", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--speed", type=float, help="advection speed")
    p.add_argument("--flux-scale", dest="flux_scale", type=float,
                   help="k in the Burgers flux k u^2")
    p.add_argument("--gnuplot", type=Path, help="also write a gnuplot script here")
    if stability:
        p.add_argument("--r-list", dest="r_list", help="comma separated substep counts")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tentkit", description="Mapped tent pitching with SARK integrators")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _add_run_flags(sub.add_parser("converge", help="mesh convergence study"), False)
    _add_run_flags(sub.add_parser("stability", help="cbar versus substep count"), True)
    tab = sub.add_parser("tableau", help="tableau utilities")
    tsub = tab.add_subparsers(dest="tab_command", required=True, parser_class=_Parser)
    chk = tsub.add_parser("check", help="order-condition residuals of a SARK tableau")
    chk.add_argument("name")
    chk.add_argument("--tol", type=float, default=1e-12)
    return parser


_RUN_KEYS = ("model", "scheme", "p", "r", "cmax", "gamma", "tmax", "levels", "h0",
             "out", "threads", "seed", "speed", "flux_scale", "r_list")

_STABILITY_DEFAULTS = {"model": "advection1d", "scheme": "sark2-ralston", "cmax": 4.0,
                       "tmax": 0.05, "levels": "0..0"}


def load_config(args: argparse.Namespace, defaults: dict | None = None) -> RunConfig:
    data = dict(defaults or {})
    if args.config is not None:
        try:
            loaded = json.loads(args.config.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValueError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ValueError("config file must hold a JSON object")
        data.update(loaded)
    for key in _RUN_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    return RunConfig.from_mapping(data)


def _write(rows, cfg: RunConfig, columns, kind: str, gnuplot: Path | None) -> None:
    if cfg.out:
        emit_csv(rows, cfg.out, columns)
    else:
        emit_csv(rows, sys.stdout, columns)
    if gnuplot is not None:
        gnuplot.write_text(gnuplot_script(cfg.out or "-", kind), encoding="utf-8")


def _cmd_converge(args) -> int:
    cfg = load_config(args)
    try:
        rows = run_convergence(cfg)
    except ConvergenceAborted as exc:
        _write(exc.rows, cfg, CONVERGENCE_COLUMNS, "convergence", args.gnuplot)
        log.error("%s", exc)
        return EXIT_SOLVER
    _write(rows, cfg, CONVERGENCE_COLUMNS, "convergence", args.gnuplot)
    return EXIT_OK


def _cmd_stability(args) -> int:
    cfg = load_config(args, _STABILITY_DEFAULTS)
    rows = run_stability(cfg)
    _write(rows, cfg, STABILITY_COLUMNS, "stability", args.gnuplot)
    return EXIT_OK


def _cmd_tableau_check(args) -> int:
    if not args.tol > 0:
        raise ValueError("tol must be positive")
    t = builtin_sark(args.name)
    rep = order_residuals(t, args.tol)
    print(f"scheme {t.name} stages {t.s} nominal order {t.order}")
    print(f"order 1 residual: {rep.r1!r}")
    print("order 2 residuals: " + " ".join(repr(float(v)) for v in rep.r2))
    print("order 3 residuals: " + " ".join(repr(float(v)) for v in rep.r3))
    print(f"attained order {rep.attained_order}")
    return EXIT_OK if rep.attained_order == t.order else EXIT_CONFIG


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"converge": _cmd_converge, "stability": _cmd_stability,
                "tableau": _cmd_tableau_check}
    try:
        return handlers[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"tentkit: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"tentkit: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
