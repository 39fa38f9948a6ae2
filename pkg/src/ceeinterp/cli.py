"""Command-line front end.

Subcommands::

    ceeinterp solve    --input problem.json --output solution.json [--trace path.csv]
    ceeinterp identify --input series.csv|model.json --output report.json [--seed N] [--analytic-covariance]
    ceeinterp design   --input design.json --output design_out.json
    ceeinterp spectrum --input solution.json --output spectrum.csv [--grid 1024]

Exit codes: 0 ok, 2 parse error, 3 infeasible, 4 ill-conditioned,
5 path-tracking failure, 6 insufficient data.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cee import CEESolution, positive_degree
from .control import (
    Constraint,
    Plant,
    SensitivitySpec,
    design_controller,
    hinf_norm,
    s_ideal,
    sensitivity_constraints,
    sensitivity_response,
    step_metrics,
)
from .errors import InfeasibleError, InterpolationError, ParseError
from .homotopy import HomotopyOptions, trace_to_csv
from .mobius import INF, is_inf
from .problem import _parse_complex, problem_from_dict, problem_to_dict
from .specest import (
    DEFAULT_BURN_IN,
    DEFAULT_WINDOW,
    FilterBank,
    analytic_state_covariance,
    estimate_spectrum,
    identify,
    run_filter_bank,
    simulate,
)

EXIT_OK = 0


# -- I/O helpers -----------------------------------------------------------------

def _read_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
                         field=str(path)) from exc


def _write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_csv(path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) for x in row])
    Path(path).write_text(buf.getvalue())


def _pair(z):
    if is_inf(z):
        return "inf"
    return [float(np.real(z)), float(np.imag(z))]


def _complex_list(items, where):
    if items is None:
        return None
    if not isinstance(items, list):
        raise ParseError("expected a list", field=where)
    return [_parse_complex(x, f"{where}[{k}]") for k, x in enumerate(items)]


def _real_list(items, where):
    if not isinstance(items, list) or not items:
        raise ParseError("expected a non-empty list of numbers", field=where)
    try:
        return [float(x) for x in items]
    except (TypeError, ValueError):
        raise ParseError("expected numbers", field=where) from None


def _rational_to_dict(r) -> dict:
    return {"numerator": r.numerator.to_json(), "denominator": r.denominator.to_json(),
            "scale": float(r.scale)}


def _companion_path(output, suffix) -> Path:
    out = Path(output)
    return out.with_name(out.stem + suffix)


def _options(args) -> HomotopyOptions:
    kw = {}
    if args.tol is not None:
        kw["tol"] = args.tol
    if args.step is not None:
        kw["step"] = args.step
        kw["min_step"] = min(HomotopyOptions.min_step, args.step)
    return HomotopyOptions(**kw)


def _config(args) -> dict:
    keys = ("command", "input", "output", "trace", "seed", "grid", "tol", "step",
            "analytic_covariance", "order", "burn_in", "window", "csv")
    opts = _options(args)
    cfg = {k: getattr(args, k) for k in keys if hasattr(args, k)}
    cfg["solver"] = {"step": opts.step, "min_step": opts.min_step, "tol": opts.tol,
                     "max_corrector": opts.max_corrector, "schur_margin": opts.schur_margin}
    return cfg


def _envelope(args, body: dict) -> dict:
    return {"version": __version__, "config": _config(args), **body}


# -- subcommands -------------------------------------------------------------

def cmd_solve(args) -> int:
    from .solver import solve_interpolation

    data = _read_json(args.input)
    problem = problem_from_dict(data)
    zeros = _complex_list(data.get("spectral_zeros"), "spectral_zeros")
    if zeros is not None and any(is_inf(z) for z in zeros):
        raise ParseError("spectral zeros must be finite", field="spectral_zeros")
    pivot = data.get("pivot")
    try:
        result = solve_interpolation(problem, zeros, pivot=pivot, options=_options(args))
    except InfeasibleError as exc:
        _write_json(args.output, _envelope(args, {
            "status": "infeasible", "message": str(exc),
            "pick_min_eigenvalue": exc.min_eigenvalue}))
        raise
    sol = result.solution
    rank, sv = positive_degree(sol.P)
    body = {
        "status": "ok",
        "problem": problem_to_dict(problem),
        "spectral_zeros": None if zeros is None else [_pair(z) for z in zeros],
        "pivot": result.record.pivot,
        "normalization": {"scale": result.record.scale, "shift": result.record.shift,
                          "node_map": [[_pair(x) for x in row] for row in result.record.node_map.matrix]},
        "solution": sol.to_dict(),
        "interpolant": _rational_to_dict(result.f),
        "pick_min_eigenvalue": result.pick_min_eigenvalue,
        "positive_degree": rank,
        "interpolation_error": result.interpolation_error(),
        "homotopy": {"steps": len(result.trace) - 1, "rejected": result.trace.rejected,
                     "min_step": result.trace.min_step},
    }
    _write_json(args.output, _envelope(args, body))
    if args.trace:
        Path(args.trace).write_text(trace_to_csv(result.trace))
    return EXIT_OK


def _read_series(path) -> np.ndarray:
    values = []
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            values.append(float(line.split(",")[0]))
        except ValueError:
            if not values and lineno == 1:
                continue  # header line
            raise ParseError(f"line {lineno}: not a number: {line!r}", field=str(path)) from None
    return np.array(values)


def cmd_identify(args) -> int:
    """Identify a spectral density from a time series (CSV) or a generating model (JSON)."""
    text_is_json = str(args.input).endswith(".json")
    model = _read_json(args.input) if text_is_json else {}
    order = args.order if args.order is not None else int(model.get("order", 6))
    bank = FilterBank.covariance_lags(order)
    zeros = _complex_list(model.get("spectral_zeros"), "spectral_zeros")
    if args.zeros is not None:
        zeros = [complex(x.replace(" ", "")) for x in args.zeros.split(";") if x.strip()]
    source = {}
    if text_is_json:
        num = _real_list(model.get("numerator"), "numerator")
        den = _real_list(model.get("denominator"), "denominator")
        if args.analytic_covariance:
            cov = analytic_state_covariance(num, den, bank)
            source = {"kind": "analytic"}
        else:
            samples = int(model.get("samples", 100_000))
            y = simulate(num, den, samples, seed=args.seed)
            cov = run_filter_bank(y, bank, args.burn_in, args.window)
            source = {"kind": "simulated", "samples": samples, "seed": args.seed}
    else:
        if args.analytic_covariance:
            raise ParseError("--analytic-covariance needs a JSON model input", field="input")
        y = _read_series(args.input)
        cov = run_filter_bank(y, bank, args.burn_in, args.window)
        source = {"kind": "series", "samples": int(y.size)}
    W, result = identify(cov, bank, zeros, options=_options(args))
    sol = result.solution
    variance = 2.0 * float(W[0, 0].real)
    rank, sv = positive_degree(sol.P)
    theta, phi = estimate_spectrum(sol, args.grid, scale=variance)
    spectrum_path = Path(args.csv) if args.csv else _companion_path(args.output, ".spectrum.csv")
    body = {
        "status": "ok",
        "source": source,
        "order": order,
        "spectral_zeros": None if zeros is None else [_pair(z) for z in zeros],
        "W": [[_pair(x) for x in row] for row in W],
        "variance": variance,
        "solution": sol.to_dict(),
        "spectrum_scale": variance,
        "singular_values": [float(x) for x in sv],
        "positive_degree": rank,
        "spectrum_csv": str(spectrum_path),
    }
    _write_json(args.output, _envelope(args, body))
    _write_csv(spectrum_path, ["theta", "Phi"], zip(theta, phi))
    return EXIT_OK


def _parse_design(data: dict):
    plant_d = data.get("plant")
    if not isinstance(plant_d, dict):
        raise ParseError("missing plant object", field="plant")
    plant = Plant(_real_list(plant_d.get("numerator"), "plant.numerator"),
                  _real_list(plant_d.get("denominator"), "plant.denominator"))
    if "gamma" not in data:
        raise ParseError("missing", field="gamma")
    try:
        gamma = float(data["gamma"])
    except (TypeError, ValueError):
        raise ParseError("expected a number", field="gamma") from None
    rel_c = int(data.get("controller_relative_degree", 1))
    if "constraints" in data:
        cons = []
        for k, c in enumerate(data["constraints"]):
            try:
                node = _parse_complex(c["node"], f"constraints[{k}].node")
                cons.append(Constraint(INF if is_inf(node) else node, int(c.get("order", 0)),
                                       _parse_complex(c["value"], f"constraints[{k}].value")))
            except (KeyError, TypeError) as exc:
                raise ParseError(f"malformed constraint: {exc}", field=f"constraints[{k}]") from None
    else:
        cons = sensitivity_constraints(plant, rel_c)
    zeros = _complex_list(data.get("spectral_zeros", []), "spectral_zeros")
    spec = SensitivitySpec(gamma, tuple(cons), tuple(zeros), data.get("zeros_domain", "s"),
                           float(data.get("mobius_k", 10.0 / 9.0)), rel_c, data.get("pivot"))
    sim = data.get("simulation", {})
    return plant, spec, sim


def cmd_design(args) -> int:
    data = _read_json(args.input)
    plant, spec, sim = _parse_design(data)
    design = design_controller(plant, spec, options=_options(args))
    C = design.controller
    metrics = step_metrics(plant, C, horizon=float(sim.get("horizon", 20.0)),
                           dt=float(sim.get("dt", 1e-3)), band=float(sim.get("band", 0.05)))
    points = int(sim.get("frequency_points", 10_000))
    peak = hinf_norm(plant, C, points)
    omega = np.logspace(-3, 3, args.grid)
    s_mag = np.abs(sensitivity_response(plant, C, omega))
    ideal = np.abs(s_ideal(1j * omega))
    freq_path = Path(args.csv) if args.csv else _companion_path(args.output, ".frequency.csv")
    body = {
        "status": "ok",
        "gamma": spec.gamma,
        "constraints": [{"node": _pair(c.node), "order": c.order, "value": _pair(c.value)}
                        for c in spec.constraints],
        "disc_problem": problem_to_dict(design.problem),
        "disc_spectral_zeros": [_pair(z) for z in spec.disc_spectral_zeros()],
        "controller": _rational_to_dict(C),
        "sensitivity": _rational_to_dict(design.sensitivity),
        "closed_loop_poles": [_pair(p) for p in sorted(design.closed_loop_poles, key=lambda z: (z.real, z.imag))],
        "internally_stable": design.is_stable,
        "metrics": {
            "settling_time": metrics.settling_time if metrics.settled else None,
            "settling_band": metrics.band,
            "overshoot_percent": metrics.overshoot_percent,
            "max_control": metrics.max_control,
            "hinf_norm_S": peak,
        },
        "frequency_csv": str(freq_path),
    }
    _write_json(args.output, _envelope(args, body))
    _write_csv(freq_path, ["omega", "abs_S", "abs_S_ideal"], zip(omega, s_mag, ideal))
    return EXIT_OK


def cmd_spectrum(args) -> int:
    data = _read_json(args.input)
    if "solution" not in data:
        raise ParseError("missing", field="solution")
    sol = CEESolution.from_dict(data["solution"])
    scale = float(data.get("spectrum_scale", 1.0))
    theta, phi = estimate_spectrum(sol, args.grid, scale=scale)
    _write_csv(args.output, ["theta", "Phi"], zip(theta, phi))
    return EXIT_OK


# -- entry point ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ceeinterp", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--input", required=True)
        p.add_argument("--output", required=True)
        p.add_argument("--tol", type=float, default=None, help="corrector tolerance")
        p.add_argument("--step", type=float, default=None, help="initial continuation step")
        p.add_argument("--grid", type=int, default=1024, help="spectrum / frequency grid size")
        return p

    p = common(sub.add_parser("solve", help="solve an interpolation problem file"))
    p.add_argument("--trace", default=None, help="write the continuation trace as CSV")
    p.set_defaults(func=cmd_solve)

    p = common(sub.add_parser("identify", help="spectral estimation from data or a model"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--analytic-covariance", action="store_true")
    p.add_argument("--order", type=int, default=None)
    p.add_argument("--zeros", default=None, help="spectral zeros, e.g. '0.5+0.2j;0.5-0.2j'")
    p.add_argument("--burn-in", type=int, default=DEFAULT_BURN_IN)
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    p.add_argument("--csv", default=None, help="spectrum CSV path")
    p.set_defaults(func=cmd_identify)

    p = common(sub.add_parser("design", help="sensitivity-shaping controller design"))
    p.add_argument("--csv", default=None, help="frequency-response CSV path")
    p.set_defaults(func=cmd_design)

    p = common(sub.add_parser("spectrum", help="sample the spectral density of a solution"))
    p.set_defaults(func=cmd_spectrum)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    paths = [getattr(args, k, None) for k in ("input", "output", "trace", "csv")]
    paths = [str(Path(p).resolve()) for p in paths if p]
    if len(set(paths)) != len(paths):
        print("error: input, output and auxiliary paths must be distinct", file=sys.stderr)
        return 2
    if args.grid < 1:
        print("error: --grid must be positive", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except InterpolationError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
