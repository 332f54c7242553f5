"""Command-line front end.

Every command reads a JSON scenario (except ``validate-paper``) and writes
deterministic JSON: keys sorted, floats in shortest round-trip form.

Scenario layout::

    {
      "equation": {"form": "linear" | "doebner-goldin" | "numu" | "ab",
                   "params": {"hbar": 1, "m": 1, "e": 0, "c": 1, "D": 0, "Dprime": 0,
                              "cvals": [0, 0, 0, 0, 0], "V": "0", "Phi": "0", "A": ["0"]},
                   "coefficients": {"a1": "...", ...},
                   "dim": 1},
      "gauge": {"Lambda": "1", "gamma": "0", "lambda": "0", "kappa": "1",
                "theta": "0", "phi": "0"},
      "grid": {"L": 40, "N": 256},
      "initial": {"S": "0", "T": "-x^2/4", "winding": 0}
              or {"psi": {"re": "...", "im": "..."}}
              or {"gaussian": {"k0": 0, "x0": 0, "sigma0": 1, "pedestal": 1}},
      "run": {"t0": 0, "t1": 1, "dt": 0.001, "snapshots": 11},
      "outputs": {"trajectory": "trajectory.csv", "summary": "summary.json"},
      "time": 0
    }
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import expr as ex
from .equation_model import (ABCoefficients, NuMuCoefficients, PhysicalParams, ab_from_numu,
                             doebner_goldin_numu, linear_schroedinger_ab, numu_from_ab)
from .errors import DegenerateEquationError, NLGaugeError, NumericalError, ValidationError
from .gauge_group import GaugeElement, is_subgroup
from .gauge_transform import compare_numu, transform_ab, transform_numu_subgroup, validate_against_paper
from .grid import Grid, STField, WaveFunction
from .invariants import gauge_invariants
from . import solver

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3
EQUATION_FORMS = ("linear", "doebner-goldin", "numu", "ab")


class ConfigError(ValidationError):
    """A validation error tied to a location in the scenario file."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


def _at(path, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except ConfigError:
        raise
    except (NLGaugeError, ValueError, TypeError, KeyError) as err:
        if isinstance(err, NumericalError):
            raise
        raise ConfigError(path, str(err).strip("'\"")) from None


def _require(d, key, path):
    if not isinstance(d, dict) or key not in d:
        raise ConfigError(f"{path}.{key}" if path else key, "missing")
    return d[key]


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


# -- scenario parsing -------------------------------------------------------------

def load_scenario(path) -> dict:
    p = Path(path)
    try:
        data = json.loads(p.read_text())
    except FileNotFoundError:
        raise ConfigError(str(p), "scenario file not found") from None
    except json.JSONDecodeError as err:
        raise ConfigError(str(p), f"invalid JSON ({err})") from None
    if not isinstance(data, dict):
        raise ConfigError(str(p), "scenario must be a JSON object")
    return data


def parse_params(d: dict, dim: int, path="equation.params") -> PhysicalParams:
    known = {"hbar", "m", "e", "c", "D", "Dprime", "cvals", "V", "Phi", "A"}
    for k in d:
        if k not in known:
            raise ConfigError(f"{path}.{k}", "unknown parameter")
    kw = {}
    for k in ("hbar", "m", "e", "c", "D", "Dprime"):
        if k in d:
            kw[k] = _at(f"{path}.{k}", float, d[k])
    if "cvals" in d:
        kw["cvals"] = _at(f"{path}.cvals", lambda v: tuple(float(c) for c in v), d["cvals"])
    for k in ("V", "Phi"):
        if k in d:
            kw[k] = _at(f"{path}.{k}", ex.as_expr, d[k])
    if "A" in d:
        kw["Avec"] = _at(f"{path}.A", ex.as_vector, d["A"], dim)
    return _at(path, PhysicalParams, dim=dim, **kw)


def parse_equation(sc: dict):
    """(NuMuCoefficients, ABCoefficients, form) from the ``equation`` block."""
    eq = _require(sc, "equation", "")
    form = _require(eq, "form", "equation")
    if form not in EQUATION_FORMS:
        raise ConfigError("equation.form", f"must be one of {list(EQUATION_FORMS)}, got {form!r}")
    dim = _at("equation.dim", int, eq.get("dim", 1))
    if form in ("linear", "doebner-goldin"):
        p = parse_params(eq.get("params", {}), dim)
        if form == "linear":
            ab = linear_schroedinger_ab(p)
            return numu_from_ab(ab), ab, form
        nm = doebner_goldin_numu(p)
        return nm, ab_from_numu(nm), form
    coeffs = _require(eq, "coefficients", "equation")
    if not isinstance(coeffs, dict):
        raise ConfigError("equation.coefficients", "must be an object")
    cls = NuMuCoefficients if form == "numu" else ABCoefficients
    slots = cls._scalars + cls._fields + cls._vectors
    kw = {}
    for k, v in coeffs.items():
        path = f"equation.coefficients.{k}"
        if k not in slots:
            raise ConfigError(path, f"unknown {form} slot")
        if k in cls._vectors:
            kw[k] = _at(path, ex.as_vector, v, dim)
        else:
            kw[k] = _at(path, ex.as_expr, v)
    obj = _at("equation.coefficients", cls.build, dim=dim, **kw)
    if form == "numu":
        return obj, ab_from_numu(obj), form
    return numu_from_ab(obj), obj, form


def parse_gauge(sc: dict, required=True):
    if "gauge" not in sc:
        if required:
            raise ConfigError("gauge", "missing (this command needs a gauge element)")
        return None
    d = sc["gauge"]
    if not isinstance(d, dict):
        raise ConfigError("gauge", "must be an object")
    for k, v in d.items():
        _at(f"gauge.{k}", ex.as_expr, v)
    return _at("gauge", GaugeElement.from_json, d)


def parse_grid(sc: dict) -> Grid:
    d = _require(sc, "grid", "")
    L = _at("grid.L", float, _require(d, "L", "grid"))
    N = _at("grid.N", int, _require(d, "N", "grid"))
    return _at("grid", Grid, L, N, d.get("x0"))


def parse_initial(sc: dict, grid: Grid):
    """(STField, gaussian parameters or None)."""
    d = _require(sc, "initial", "")
    if "gaussian" in d:
        gauss = dict(k0=0.0, x0=0.0, sigma0=1.0, pedestal=1.0)
        for k, v in d["gaussian"].items():
            if k not in gauss:
                raise ConfigError(f"initial.gaussian.{k}", "unknown key")
            gauss[k] = _at(f"initial.gaussian.{k}", float, v)
        w = solver.free_gaussian(grid, **gauss)
        return _at("initial.gaussian", w.to_st), gauss
    if "psi" in d:
        re = _at("initial.psi.re", ex.as_expr, _require(d["psi"], "re", "initial.psi"))
        im = _at("initial.psi.im", ex.as_expr, d["psi"].get("im", 0))
        psi = _at("initial.psi", lambda: re(x=grid.x) + 1j * im(x=grid.x))
        return _at("initial.psi", WaveFunction(grid, psi).to_st), None
    S = _at("initial.S", ex.as_expr, d.get("S", 0))
    T = _at("initial.T", ex.as_expr, d.get("T", 0))
    winding = _at("initial.winding", int, d.get("winding", 0))
    return _at("initial", STField.from_expressions, grid, S, T, 0.0, winding), None


def parse_run(sc: dict) -> dict:
    d = _require(sc, "run", "")
    out = {"t0": 0.0, "t1": 1.0, "dt": 1e-3, "snapshots": 11}
    for k in d:
        if k not in out:
            raise ConfigError(f"run.{k}", "unknown key")
        out[k] = _at(f"run.{k}", int if k == "snapshots" else float, d[k])
    if not out["dt"] > 0:
        raise ConfigError("run.dt", "must be positive")
    if not out["t1"] > out["t0"]:
        raise ConfigError("run.t1", "must exceed run.t0")
    if out["snapshots"] < 3:
        raise ConfigError("run.snapshots", "need at least 3 (residuals use interior snapshots)")
    return out


def _check_step(ab, grid, run):
    cfl = solver.cfl_number(ab, grid, run["dt"], run["t0"], run["t1"])
    if cfl > solver.CFL_LIMIT:
        raise ConfigError("run.dt", f"step bound violated: dt * rho(C2) * kmax^2 = {cfl:.3g} > 0.5")


# -- commands --------------------------------------------------------------------

def cmd_convert(sc, args) -> dict:
    nm, ab, form = parse_equation(sc)
    return {"form": form, "numu": nm.to_json(), "ab": ab.to_json()}


def cmd_transform(sc, args) -> dict:
    nm, ab, form = parse_equation(sc)
    g = parse_gauge(sc)
    engine = _at("gauge", transform_ab, ab, g)
    out = {"gauge": g.to_json(), "subgroup": is_subgroup(g), "engine": {
        "ab": engine.to_json(), "numu": numu_from_ab(engine).to_json()}}
    if out["subgroup"]:
        try:
            closed = transform_numu_subgroup(nm, g)
        except ValidationError as err:
            out["closed_form"] = None
            out["closed_form_note"] = str(err)
        else:
            rng = np.random.default_rng(0)
            pts = (rng.uniform(-2, 2, 32), np.zeros(32), np.zeros(32), rng.uniform(0, 1, 32))
            if nm.dim > 1:
                pts = tuple(rng.uniform(-2, 2, 32) if i < nm.dim else pts[i] for i in range(3)) + (pts[3],)
            out["closed_form"] = closed.to_json()
            out["difference"] = compare_numu(closed, numu_from_ab(engine), pts)
    return out


def cmd_invariants(sc, args) -> dict:
    nm, ab, form = parse_equation(sc)
    t = _at("time", float, sc.get("time", 0.0))
    inv, note = gauge_invariants(nm, t)
    out = inv.to_json()
    out["t"] = t
    if note:
        out["note"] = note
    return out


def _gaussian_oracle(nm, form, sc, gauss, traj):
    """Free-particle comparison; only meaningful for the field-free linear equation."""
    params = sc["equation"].get("params", {})
    free = (form == "linear" and all(ex.as_expr(params.get(k, 0)).is_number(0.0)
                                     for k in ("V", "Phi"))
            and all(ex.as_expr(a).is_number(0.0) for a in ex.as_vector(params.get("A", 0), 1)))
    if not free:
        return None
    hbar = float(params.get("hbar", 1.0))
    m = float(params.get("m", 1.0))
    f = traj.final
    t = traj.times[-1]
    exact = solver.free_gaussian(f.grid, t=t, hbar=hbar, m=m, **gauss)
    rho_err = math.sqrt(f.grid.integrate((f.rho - np.abs(exact.psi) ** 2) ** 2))
    width = solver.packet_width(f.to_wavefunction(), gauss["pedestal"])
    expect = solver.gaussian_width(t, gauss["sigma0"], hbar, m)
    return {"t": t, "width": width, "width_expected": expect, "width_error": abs(width - expect),
            "rho_L2_error": rho_err}


def _summary(nm, traj, warnings):
    norms = [f.grid.integrate(f.rho) for f in traj.fields]
    out = {"stats": traj.stats(), "norm_drift": max(abs(n - norms[0]) for n in norms),
           "times": list(traj.times), "warnings": warnings}
    if len(traj.times) >= 3:
        c = solver.continuity_residual(nm, traj)
        out.update(continuity_residual=c["continuity"], fokker_planck_residual=c["fokker_planck"],
                   continuity_applicable=c["applicable"])
        try:
            h = solver.hydrodynamic_residual(nm, traj)
            out["hydrodynamic_residual"] = h["relative"]
            out["ehrenfest_residual"] = solver.ehrenfest_residual(nm, traj)
        except DegenerateEquationError as err:
            out["hydrodynamic_residual"] = None
            out["hydrodynamic_note"] = str(err)
    return out


def _write_outputs(sc, out_dir, traj, nm, summary):
    outputs = sc.get("outputs", {})
    out_dir.mkdir(parents=True, exist_ok=True)
    tpath = out_dir / outputs.get("trajectory", "trajectory.csv")
    spath = out_dir / outputs.get("summary", "summary.json")
    traj.to_csv(tpath, nm)
    spath.write_text(dumps(summary))
    return tpath, spath


def cmd_evolve(sc, args) -> dict:
    nm, ab, form = parse_equation(sc)
    grid = parse_grid(sc)
    f0, gauss = parse_initial(sc, grid)
    run = parse_run(sc)
    _check_step(ab, grid, run)
    warnings = []
    if gauss is not None:
        if not solver.pedestal_seam_ok(f0, gauss["pedestal"]):
            warnings.append("the Gaussian packet is not negligible at the domain edge")
    else:
        w = solver.seam_warning(f0)
        if w:
            warnings.append(w)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    out_dir = Path(args.out or ".")
    try:
        traj = _at("equation", solver.evolve, ab, f0, run["t0"], run["t1"], run["dt"],
                   run["snapshots"])
    except NumericalError as err:
        partial = err.trajectory
        if partial is not None:
            summary = {"error": str(err), "stats": partial.stats(), "times": partial.times}
            _write_outputs(sc, out_dir, partial, nm, summary)
        raise
    summary = _summary(nm, traj, warnings)
    if gauss is not None:
        summary["gaussian_oracle"] = _gaussian_oracle(nm, form, sc, gauss, traj)
    tpath, spath = _write_outputs(sc, out_dir, traj, nm, summary)
    summary["files"] = {"trajectory": str(tpath), "summary": str(spath)}
    return summary


def cmd_covariance(sc, args) -> dict:
    nm, ab, form = parse_equation(sc)
    g = parse_gauge(sc)
    grid = parse_grid(sc)
    f0, _ = parse_initial(sc, grid)
    run = parse_run(sc)
    _check_step(ab, grid, run)
    res = _at("gauge", solver.covariance_experiment, ab, g, f0, run["t0"], run["t1"], run["dt"])
    leg1, leg2 = res["legs"]
    return {"deviation": res["deviation"], "deviation_S": res["deviation_S"],
            "deviation_T": res["deviation_T"], "subgroup": is_subgroup(g),
            "legs": {"original": leg1.stats(), "transformed": leg2.stats()}}


def cmd_validate_paper(sc, args) -> dict:
    if args.samples < 1:
        raise ConfigError("--samples", "must be at least 1")
    return validate_against_paper(args.samples, args.seed).to_json()


COMMANDS = {
    "convert": cmd_convert,
    "transform": cmd_transform,
    "invariants": cmd_invariants,
    "evolve": cmd_evolve,
    "covariance": cmd_covariance,
    "validate-paper": cmd_validate_paper,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nlgauge", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        if name == "validate-paper":
            sp.add_argument("--samples", type=int, default=20)
            sp.add_argument("--seed", type=int, required=True)
        else:
            sp.add_argument("--scenario", required=True)
        sp.add_argument("--out", default=None,
                        help="output directory (evolve writes its files here; other "
                             "commands also save <command>.json)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        sc = load_scenario(args.scenario) if args.command != "validate-paper" else {}
        result = COMMANDS[args.command](sc, args)
    except NumericalError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except NLGaugeError as err:
        where = f"{args.scenario}: " if getattr(args, "scenario", None) else ""
        print(f"error: {where}{err}", file=sys.stderr)
        return EXIT_VALIDATION
    text = dumps(result)
    if args.out and args.command != "evolve":
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{args.command}.json").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
