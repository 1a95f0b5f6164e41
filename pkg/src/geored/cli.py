"""Command-line driver: ``geored <run|reduce|verify|invariance|frame|list>``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from typing import List, Optional, Sequence

import numpy as np

from . import kernels
from .errors import ConfigError, GateFailure, GeoredError
from .frame_bundle import FrameState, orthonormal_frame, transport_frame
from .reduction import assemble_reduced_field, verify_reduction
from .scenarios import DEFAULT_SEED, list_builtins, load_scenario
from .spray import integrate
from .verify import TOLERANCES, distribution_report, verify_scenario

log = logging.getLogger("geored")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_ERROR = 2

_LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def _table(header, rows, fmt: str, meta: dict) -> str:
    if fmt == "json":
        return _json_text({"columns": list(header), "rows": [[float(v) for v in r] for r in rows], "meta": meta})
    return _csv_text(header, rows)


def _emit(text: str, output: Optional[str]):
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _state_header(n: int) -> List[str]:
    return ["t"] + [f"x{i + 1}" for i in range(n)] + [f"v{i + 1}" for i in range(n)]


def _load(args):
    scen = load_scenario(spec=args.scenario, config=args.config)
    if args.seed is not None:
        scen.seed = args.seed
    return scen


def _t_end(args, scen):
    return scen.t_end if args.t_end is None else args.t_end


def _dt(args, scen):
    return scen.dt if args.dt is None else args.dt


def _meta(scen, args, **extra):
    out = {"scenario": scen.name, "coordinates": list(scen.coordinates), "seed": scen.seed}
    out.update(extra)
    return out


def cmd_run(args) -> int:
    scen = _load(args)
    if scen.initial is None:
        raise ConfigError(f"scenario {scen.name!r} has no initial state")
    traj = integrate(scen.spray(), scen.initial, _t_end(args, scen), _dt(args, scen))
    rows = np.column_stack([traj.t, traj.states])
    meta = _meta(scen, args, dt=traj.dt, t_end=float(traj.t[-1]), field=traj.meta["field"])
    _emit(_table(_state_header(scen.dim), rows, args.format or "csv", meta), args.output)
    return EXIT_OK


def cmd_frame(args) -> int:
    scen = _load(args)
    s0 = scen.initial
    if s0 is None:
        raise ConfigError(f"scenario {scen.name!r} has no initial state")
    n = scen.dim
    f0 = orthonormal_frame(scen.metric, s0.x) if scen.metric is not None else FrameState(s0.x, np.eye(n))
    xi = scen.frame_xi if scen.frame_xi is not None else np.linalg.solve(f0.u, s0.v)
    ft = transport_frame(scen.dynamics_connection(), f0, xi, _t_end(args, scen), _dt(args, scen))
    header = _state_header(n) + [f"u{i + 1}{j + 1}" for i in range(n) for j in range(n)]
    rows = np.column_stack([ft.t, ft.x, ft.v, ft.u.reshape(ft.t.size, n * n)])
    meta = _meta(scen, args, dt=ft.dt, xi=[float(v) for v in xi])
    _emit(_table(header, rows, args.format or "csv", meta), args.output)
    return EXIT_OK


def cmd_reduce(args) -> int:
    scen = _load(args)
    if scen.symmetry is None:
        raise ConfigError(f"scenario {scen.name!r} declares no symmetry")
    sym = scen.symmetry
    rf = assemble_reduced_field(sym)
    report, red = verify_reduction(sym, scen.initial, _t_end(args, scen), _dt(args, scen), rf=rf,
                                   seed=scen.seed, raise_on_fail=True)
    eng = rf.engine
    m, r = sym.m, sym.r
    traces = []
    for xb, vb, eta in zip(red.xbar, red.vbar, red.eta):
        _, sz = eng.S_Z(xb, vb)
        traces.append(np.concatenate([sz, eng.script_S(eta, xb), eng.mixed_term(vb, eta, xb),
                                      eng.R_Z(vb, xb), eng.U_Z(eta, xb), eng.adjoint_connection_term(vb, eta, xb)]))
    traces = np.array(traces).reshape(red.t.size, 3 * m + 3 * r)

    def cols(prefix, k):
        return [f"{prefix}{i + 1}" for i in range(k)]

    header = (["t"] + cols("xbar", m) + cols("vbar", m) + cols("eta", r) + cols("S_Z", m) + cols("script_S", m)
              + cols("mixed", m) + cols("R_Z", r) + cols("U_Z", r) + cols("adjoint", r))
    rows = np.column_stack([red.t, red.states, traces])
    meta = _meta(scen, args, gate=report.to_dict(), dt=red.dt)
    _emit(_table(header, rows, args.format or "csv", meta), args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    scen = _load(args)
    report = verify_scenario(scen, seed=scen.seed, t_end=args.t_end, dt=args.dt)
    report["backend"] = kernels.BACKEND
    _emit(_json_text(report), args.output)
    return EXIT_OK if report["pass"] else EXIT_CHECK_FAILED


def cmd_invariance(args) -> int:
    scen = _load(args)
    names = sorted(scen.distributions) if args.distribution is None else [args.distribution]
    for name in names:
        if name not in scen.distributions:
            raise ConfigError(f"scenario {scen.name!r} has no distribution {name!r}; "
                              f"known: {sorted(scen.distributions)}")
    t_end = 1.0 if args.t_end is None else args.t_end
    reports = [distribution_report(scen, name, scen.seed, t_end, _dt(args, scen)) for name in names]
    ok = all(rep["consistent"] and rep["verdict"] == "pass" for rep in reports)
    out = {"scenario": scen.name, "seed": scen.seed, "tolerances": dict(TOLERANCES), "reports": reports, "pass": ok}
    _emit(_json_text(out), args.output)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_list(args) -> int:
    items = list_builtins()
    if args.format == "csv":
        text = "name,dim,symmetry,description\n" + "".join(
            f"{it['name']},{it['dim']},{(it['symmetry'] or {}).get('group', '')},\"{it['description']}\"\n"
            for it in items)
    else:
        text = _json_text({"builtins": items, "backend": kernels.BACKEND})
    _emit(text, args.output)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "reduce": cmd_reduce, "verify": cmd_verify, "invariance": cmd_invariance,
            "frame": cmd_frame, "list": cmd_list}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geored", description="Geodesic sprays, invariance tests and symmetry reduction.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=(fn.__doc__ or name).strip().splitlines()[0] if fn.__doc__ else name)
        if name != "list":
            src = p.add_mutually_exclusive_group(required=True)
            src.add_argument("--scenario", help="builtin name, optionally with parameters (name:key=val,...)")
            src.add_argument("--config", help="path to a JSON scenario file")
            p.add_argument("--t-end", type=float, default=None)
            p.add_argument("--dt", type=float, default=None)
            p.add_argument("--seed", type=int, default=None, help=f"PRNG seed (default {DEFAULT_SEED})")
        if name == "invariance":
            p.add_argument("--distribution", default=None)
        p.add_argument("--output", default=None)
        p.add_argument("--format", choices=["csv", "json"], default=None)
        p.add_argument("--json-errors", action="store_true", help="print errors as a JSON object on stderr")
    return parser


def _configure_logging():
    level = _LOG_LEVELS.get(os.environ.get("GEORED_LOG", "warn").lower(), logging.WARNING)
    logging.basicConfig(level=level, format="geored %(levelname)s: %(message)s", stream=sys.stderr)


def main(argv: Optional[Sequence[str]] = None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        with np.errstate(all="ignore"):
            return COMMANDS[args.command](args)
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head)
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    except GeoredError as exc:
        _report_error(args, exc.to_dict(), exc)
        return EXIT_CHECK_FAILED if isinstance(exc, GateFailure) else EXIT_ERROR
    except (OSError, ValueError) as exc:
        _report_error(args, {"error": type(exc).__name__, "message": str(exc)}, exc)
        return EXIT_ERROR


def _report_error(args, payload: dict, exc: Exception):
    if getattr(args, "json_errors", False):
        sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    else:
        sys.stderr.write(f"geored: {payload['error']}: {exc}\n")
    log.debug("traceback", exc_info=exc)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
