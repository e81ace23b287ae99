"""Command-line front end.

Subcommands: ``run`` (integrate a scenario and write the trajectory),
``verify`` (invariant suite), ``derive`` (re-derive Hamiltonian coefficients
from an operator file), ``scan`` (parameter grid) and ``export`` (write a
scenario's operators to an operator file).

Exit codes: 0 success, 1 verification failure, 2 usage or parameter error,
3 numerical failure.
"""

import argparse
import itertools
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import io as eio
from .derivation import derive_coefficients
from .dynamics import integrate
from .errors import (
    ClosureError,
    DegenerateConstantsError,
    DerivationError,
    DimensionMismatchError,
    DomainError,
    IntegrationError,
    LinearDependenceError,
    NotHermitianError,
)
from .scenarios import SCENARIO_PARAMETERS, SCENARIOS, build_scenario
from .special_solutions import Case1System, Case2System, case2_theta_shift
from .verification import verify_scenario, verify_system

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

log = logging.getLogger("ellipt_vne")

PARAM_FLAGS = ("tau", "delta", "kappa", "k", "alpha", "phi", "mu", "omega", "lam", "b", "nu")
# settings a config file may supply, besides the scenario parameters
CONFIG_KEYS = PARAM_FLAGS + (
    "scenario", "t", "periods", "samples", "format", "output", "rtol", "atol",
    "operators", "case", "grid", "workers",
)
DEFAULTS = {
    "run": {"samples": 401, "format": "csv"},
    "scan": {"samples": 201, "workers": 4},
    "verify": {"samples": 201},
}


class UsageError(Exception):
    pass


def _add_scenario_args(p):
    p.add_argument("--scenario", choices=SCENARIOS)
    g = p.add_argument_group("scenario parameters")
    for name in PARAM_FLAGS:
        if name == "lam":
            g.add_argument("--lambda", dest="lam", type=float)
        else:
            g.add_argument(f"--{name}", type=float)


def _add_common(p):
    p.add_argument("--config", help="JSON file with default values for any flag")
    p.add_argument("--output", "-o", help="output path (default: stdout)")
    p.add_argument("-v", "--verbose", action="store_true")


def _add_time_args(p):
    p.add_argument("--t", help="time span start:end")
    p.add_argument("--periods", type=float, help="span of N elliptic periods from t = 0")
    p.add_argument("--samples", type=int)
    p.add_argument("--rtol", type=float)
    p.add_argument("--atol", type=float)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ellipt-vne",
        description="Elliptic-function solutions of nonlinear von Neumann equations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate a scenario and write the trajectory")
    _add_scenario_args(p)
    _add_time_args(p)
    p.add_argument("--format", choices=("csv", "json"))
    _add_common(p)

    p = sub.add_parser("verify", help="run the invariant suite")
    _add_scenario_args(p)
    p.add_argument("--operators", help="operator file to verify instead of a scenario")
    p.add_argument("--case", type=int, choices=(1, 2))
    p.add_argument("--samples", type=int)
    _add_common(p)

    p = sub.add_parser("derive", help="re-derive the Hamiltonian coefficients")
    p.add_argument("--operators", help="operator file")
    p.add_argument("--case", type=int, choices=(1, 2))
    p.add_argument("--omega", type=float)
    p.add_argument("--k", type=float)
    p.add_argument("--nu", type=float)
    _add_common(p)

    p = sub.add_parser("scan", help="integrate over a parameter grid")
    _add_scenario_args(p)
    _add_time_args(p)
    p.add_argument("--grid", action="append",
                   help="NAME=v1,v2,... (repeatable); the grid is the Cartesian product")
    p.add_argument("--workers", type=int)
    _add_common(p)

    p = sub.add_parser("export", help="write a scenario's operators to an operator file")
    _add_scenario_args(p)
    _add_common(p)
    return parser


def _normalize_argv(argv):
    # let "--t -10:10" through argparse, which would read "-10:10" as a flag
    out = []
    it = iter(argv)
    for a in it:
        if a == "--t":
            nxt = next(it, None)
            if nxt is None:
                out.append(a)
            else:
                out.append(f"--t={nxt}")
        else:
            out.append(a)
    return out


def _merge_config(args):
    """Fill unset flags from ``--config``; explicit flags win."""
    cfg = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        if "lambda" in cfg:
            cfg["lam"] = cfg.pop("lambda")
        unknown = sorted(set(cfg) - set(CONFIG_KEYS))
        if unknown:
            raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
    for key, val in cfg.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, val)
    for key, val in DEFAULTS.get(args.command, {}).items():
        if getattr(args, key, None) is None:
            setattr(args, key, val)
    return args


def _scenario_params(args):
    return {name: getattr(args, name, None) for name in PARAM_FLAGS}


def _scenario_from_args(args, overrides=None):
    if not args.scenario:
        raise UsageError("--scenario is required")
    params = _scenario_params(args)
    if overrides:
        params.update(overrides)
    allowed = set(SCENARIO_PARAMETERS[args.scenario])
    extra = sorted(p for p, v in params.items() if v is not None and p not in allowed)
    if extra:
        flags = ", ".join("--lambda" if p == "lam" else f"--{p}" for p in extra)
        raise UsageError(f"scenario {args.scenario} does not take {flags}")
    return build_scenario(args.scenario, **params)


def parse_span(text):
    try:
        start, end = (float(x) for x in str(text).split(":"))
    except ValueError:
        raise UsageError(f"--t expects start:end, got {text!r}") from None
    if not (np.isfinite(start) and np.isfinite(end)):
        raise UsageError("time span must be finite")
    if not start < end:
        raise UsageError(f"empty time span {start}:{end}")
    return start, end


def time_span(args, scenario):
    if args.t is not None and args.periods is not None:
        raise UsageError("give either --t or --periods, not both")
    if args.t is not None:
        return parse_span(args.t)
    p = scenario.period
    if args.periods is not None:
        if p is None:
            raise UsageError("--periods needs k < 1 (the period is infinite at k = 1)")
        if not args.periods > 0:
            raise UsageError("--periods must be positive")
        return 0.0, args.periods * p
    if p is None:
        w = abs(scenario.omega)
        return -10.0 / w, 10.0 / w
    return 0.0, p


def _samples(args):
    n = int(args.samples)
    if n < 2:
        raise UsageError("--samples must be at least 2")
    return n


def _integrate_scenario(scenario, span, samples, rtol=None, atol=None):
    times = np.linspace(span[0], span[1], samples)
    t0 = 0.0 if span[0] <= 0.0 <= span[1] else span[0]
    return integrate(scenario.state(t0), scenario.hamiltonian, times, t0=t0,
                     rtol=rtol, atol=atol, reference=scenario.state)


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _emit_json(doc, path):
    fh, close = _open_out(path)
    try:
        json.dump(doc, fh, indent=1, default=_json_default)
        fh.write("\n")
    finally:
        if close:
            fh.close()


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not serializable: {type(o).__name__}")


def cmd_run(args):
    scenario = _scenario_from_args(args)
    span = time_span(args, scenario)
    traj = _integrate_scenario(scenario, span, _samples(args), args.rtol, args.atol)
    fh, close = _open_out(args.output)
    try:
        if args.format == "csv":
            eio.write_trajectory_csv(fh, traj)
        else:
            eio.write_trajectory_json(fh, traj, {"scenario": scenario.name,
                                                 "params": scenario.params})
            fh.write("\n")
    finally:
        if close:
            fh.close()
    log.info("wrote %d samples, max residual %.3e", len(traj), np.nanmax(traj.residuals))
    return EXIT_OK


def _system_from_operators(ops, header, args):
    case = args.case or header.get("case") or eio.infer_case(ops)
    omega = getattr(args, "omega", None)
    omega = header.get("omega") if omega is None else omega
    k = getattr(args, "k", None)
    k = header.get("k") if k is None else k
    if omega is None or k is None:
        raise UsageError("omega and k are needed (flags or operator file header)")
    nu = getattr(args, "nu", None) or 0.0
    roles = eio.CASE_ROLES[case]
    missing = [r for r in roles if r not in ops]
    if missing:
        raise UsageError(f"case {case} operator file lacks {', '.join(missing)}")
    if case == 1:
        theta = ops.get("theta", np.zeros_like(ops["A"]))
        return Case1System.build(theta, ops["A"], ops["B"], ops["X"], omega, k, nu)
    if "theta0" not in ops:
        raise UsageError("case 2 operator file needs theta0")
    return Case2System.build(ops["theta0"], ops["A"], ops["C"], ops["D"], omega, k, nu,
                             theta=ops.get("theta"))


def cmd_verify(args):
    samples = _samples(args)
    if args.operators:
        ops, header = eio.read_operators(args.operators)
        try:
            system = _system_from_operators(ops, header, args)
        except ClosureError as exc:
            from .verification import VerificationReport

            report = VerificationReport(args.operators)
            report.fail("closure_fit", None, f"{exc} (relation {exc.relation})", exc.residual)
            doc = report.to_dict()
            doc["failed_relation"] = exc.relation
            _emit_json(doc, args.output)
            return EXIT_VERIFY
        report = verify_system(system, system.hamiltonian(), args.operators, samples=samples)
    else:
        report = verify_scenario(_scenario_from_args(args), samples=samples)
    _emit_json(report.to_dict(), args.output)
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_derive(args):
    if not args.operators:
        raise UsageError("--operators is required")
    ops, header = eio.read_operators(args.operators)
    try:
        system = _system_from_operators(ops, header, args)
        case = 1 if isinstance(system, Case1System) else 2
        if case == 1:
            named = {"A": system.A, "B": system.B, "X": system.X, "theta": system.theta}
        else:
            t_coeffs = (0.0, 0.0, case2_theta_shift(system.k, system.alpha, system.delta))
            named = {"A": system.A, "C": system.C, "D": system.D, "theta0": system.theta0}
            if "theta" in ops:
                named["theta"] = system.theta
            else:
                named["t_coeffs"] = t_coeffs
        der = derive_coefficients(case, named, system.omega, system.k, system.nu)
    except ClosureError as exc:
        _emit_json({"status": "closure_failure", "relation": exc.relation,
                    "residual": exc.residual, "message": str(exc)}, args.output)
        return EXIT_VERIFY
    except DerivationError as exc:
        _emit_json({"status": "derivation_failure", "residual": exc.residual,
                    "message": str(exc)}, args.output)
        return EXIT_VERIFY
    doc = der.to_dict()
    doc["status"] = "ok"
    names = ("alpha", "beta") if case == 1 else ("alpha", "delta")
    doc["fitted_constants"] = dict(zip(names, system.constants.values))
    doc["closure_residuals"] = dict(system.constants.residuals)
    _emit_json(doc, args.output)
    return EXIT_OK


def parse_grid(specs):
    grid = []
    for spec in specs or []:
        name, sep, values = spec.partition("=")
        name = name.strip()
        if name == "lambda":
            name = "lam"
        if not sep or name not in PARAM_FLAGS:
            raise UsageError(f"bad --grid entry {spec!r}; expected NAME=v1,v2,...")
        try:
            vals = [float(v) for v in values.split(",") if v.strip()]
        except ValueError:
            raise UsageError(f"bad --grid values in {spec!r}") from None
        if not vals:
            raise UsageError(f"--grid {name} has no values")
        grid.append((name, vals))
    if not grid:
        raise UsageError("scan needs at least one --grid NAME=v1,v2,...")
    return grid


def _scan_point(args, point):
    try:
        scenario = _scenario_from_args(args, point)
        span = time_span(args, scenario)
        traj = _integrate_scenario(scenario, span, _samples(args), args.rtol, args.atol)
    except (UsageError, DomainError, ClosureError, LinearDependenceError,
            DegenerateConstantsError, NotHermitianError, DimensionMismatchError) as exc:
        return {"params": point, "status": "invalid", "message": str(exc)}
    except IntegrationError as exc:
        return {"params": point, "status": "numerical_failure", "message": str(exc)}
    from .dynamics import conservation_report

    rep = conservation_report(traj, index=int(np.argmin(np.abs(traj.times))))
    ok = rep.max_residual <= 1e-6 and rep.max_eigenvalue_drift <= 1e-8
    return {"params": point, "status": "pass" if ok else "fail",
            "t_span": [float(traj.times[0]), float(traj.times[-1])], **rep.to_dict()}


def cmd_scan(args):
    grid = parse_grid(args.grid)
    names = [n for n, _ in grid]
    points = [dict(zip(names, combo)) for combo in itertools.product(*(v for _, v in grid))]
    workers = max(1, int(args.workers))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map preserves input order, so the merge is deterministic
        results = list(pool.map(lambda p: _scan_point(args, p), points))
    _emit_json({"scenario": args.scenario, "grid": {n: v for n, v in grid},
                "results": results}, args.output)
    statuses = {r["status"] for r in results}
    if "invalid" in statuses:
        return EXIT_USAGE
    if "numerical_failure" in statuses:
        return EXIT_NUMERIC
    if "fail" in statuses:
        return EXIT_VERIFY
    return EXIT_OK


def cmd_export(args):
    scenario = _scenario_from_args(args)
    doc = eio.operators_to_json(scenario.operators(), scenario.case, scenario.omega,
                                scenario.k)
    _emit_json(doc, args.output)
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "verify": cmd_verify,
    "derive": cmd_derive,
    "scan": cmd_scan,
    "export": cmd_export,
}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_normalize_argv(argv))
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        _merge_config(args)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (eio.FormatError, DomainError, NotHermitianError, DimensionMismatchError,
            LinearDependenceError, DegenerateConstantsError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ClosureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except IntegrationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
