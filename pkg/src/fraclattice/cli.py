"""Command-line interface: ``fraclattice {kernel,semigroup,solve,verify}``.

Settings come from an INI file (``--config``) and flags; flags win.  Every
run writes the resolved settings next to its output as ``<output>.ini``.
Relative output paths are resolved against ``$FRACLATTICE_OUTPUT_DIR`` when
it is set.

Exit codes: 0 success, 2 configuration or hypothesis error, 3 numerical
failure, 4 non-convergence.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import os
import sys

import numpy as np

from .evolution import (
    HypothesisError,
    NonConvergenceError,
    Profile,
    SolverConfig,
    make_model,
    monotone_solve,
    solution_csv,
)
from .kernels import Family, InvalidSpecError, OperatorSpec, Sign, fractional_kernel
from .quadrature import QuadratureError
from .semigroups import (
    CrossCheckError,
    markov_check,
    semigroup_kernel_closed,
    semigroup_kernel_general,
    subordinated_semigroup_kernel,
)
from .seq_algebra import LatticeSeq, WindowOverflowError, WindowPolicy
from .special_functions import EvaluationError, SeriesConvergenceError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_NONCONVERGENCE = 0, 2, 3, 4
OUTPUT_DIR_ENV = "FRACLATTICE_OUTPUT_DIR"


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


# section -> key -> (type, default)
SCHEMA = {
    "operator": {"family": (str, "discrete-laplacian"), "alpha": (float, 1.0),
                 "sign": (str, "power-form"), "kernel": (str, "")},
    "fractional": {"beta": (float, 1.0)},
    "model": {"kind": (str, "fisher-kpp"), "gamma": (float, None), "rho": (float, None),
              "c": (float, 0.0), "p": (float, 1.0), "a": (float, 1.0),
              "profile": (str, "constant"), "level": (float, 1.0), "center": (float, 0.0),
              "steepness": (float, 1.0)},
    "initial": {"shape": (str, "indicator"), "level": (float, 0.5), "radius": (int, 3)},
    "grid": {"N": (int, 40), "T": (float, 1.0), "M": (int, 64)},
    "tolerances": {"series": (float, 1e-14), "quad": (float, 1e-8), "iter": (float, 1e-8),
                   "max_iters": (int, 200), "markov": (float, 1e-9)},
    "output": {"path": (str, None), "precision": (int, 17)},
}

# flag dest -> (section, key)
FLAGS = {
    "family": ("operator", "family"), "alpha": ("operator", "alpha"),
    "sign": ("operator", "sign"), "kernel": ("operator", "kernel"),
    "beta": ("fractional", "beta"),
    "kind": ("model", "kind"), "gamma": ("model", "gamma"), "rho": ("model", "rho"),
    "c": ("model", "c"), "p": ("model", "p"), "a": ("model", "a"),
    "profile": ("model", "profile"), "level": ("model", "level"),
    "center": ("model", "center"), "steepness": ("model", "steepness"),
    "phi_shape": ("initial", "shape"), "phi_level": ("initial", "level"),
    "phi_radius": ("initial", "radius"),
    "N": ("grid", "N"), "T": ("grid", "T"), "M": ("grid", "M"),
    "tol_series": ("tolerances", "series"), "tol_quad": ("tolerances", "quad"),
    "tol_iter": ("tolerances", "iter"), "max_iters": ("tolerances", "max_iters"),
    "tol_markov": ("tolerances", "markov"),
    "output": ("output", "path"), "precision": ("output", "precision"),
}

DEFAULT_OUTPUT = {"kernel": "kernel.csv", "semigroup": "semigroup.csv",
                  "solve": "solution.csv", "verify": "verify.txt"}


def _convert(kind, raw, where):
    try:
        return kind(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: cannot read {raw!r} as {kind.__name__}") from None


def load_config(path=None, overrides=None):
    """Resolved settings ``{section: {key: value}}``: defaults, then file, then flags."""
    resolved = {sec: {k: d for k, (_, d) in keys.items()} for sec, keys in SCHEMA.items()}
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        for sec in parser.sections():
            if sec not in SCHEMA:
                raise ConfigError(f"unknown section [{sec}]")
            for key, raw in parser.items(sec):
                if key not in SCHEMA[sec]:
                    raise ConfigError(f"unknown key {key!r} in [{sec}]")
                resolved[sec][key] = _convert(SCHEMA[sec][key][0], raw, f"[{sec}] {key}")
    for dest, value in (overrides or {}).items():
        if value is None:
            continue
        sec, key = FLAGS[dest]
        resolved[sec][key] = _convert(SCHEMA[sec][key][0], value, f"--{dest}")
    return resolved


def write_config(resolved, path):
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    for sec, keys in resolved.items():
        parser[sec] = {k: ("" if v is None else repr(v) if isinstance(v, float) else str(v))
                       for k, v in keys.items() if v is not None}
    with open(path, "w", encoding="utf-8") as fh:
        parser.write(fh)


def output_path(resolved, command):
    path = resolved["output"]["path"] or DEFAULT_OUTPUT[command]
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not os.path.isabs(path):
        path = os.path.join(base, path)
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    return path


def _parse_kernel(text):
    entries = {}
    for item in text.replace(";", ",").split(","):
        item = item.strip()
        if not item:
            continue
        try:
            n, v = item.split(":")
            entries[int(n)] = float(v)
        except ValueError:
            raise ConfigError(f"custom kernel entries look like 'n:value', got {item!r}") from None
    if not entries:
        raise ConfigError("the custom family needs [operator] kernel = n:value, ...")
    return LatticeSeq.from_dict(entries)


def operator_spec(resolved):
    op = resolved["operator"]
    family = op["family"]
    try:
        Family(family)
    except ValueError:
        raise ConfigError(f"unknown family {family!r}") from None
    custom = _parse_kernel(op["kernel"]) if family == Family.CUSTOM.value else None
    if custom is None and op["kernel"]:
        raise ConfigError("[operator] kernel is only used with family = custom")
    return OperatorSpec(family, op["alpha"], custom, op["sign"])


def _fmt(precision):
    return f"{{:.{int(precision)}g}}"


def _write_rows(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


# -- commands ----------------------------------------------------------------

def cmd_kernel(resolved):
    spec = operator_spec(resolved)
    N = resolved["grid"]["N"]
    k = fractional_kernel(spec, N)
    path = output_path(resolved, "kernel")
    fmt = _fmt(resolved["output"]["precision"])
    _write_rows(path, ["n", "value"], [[int(n), fmt.format(v)] for n, v in zip(k.indices, k.values)])
    write_config(resolved, path + ".ini")
    print(f"wrote {len(k)} rows to {path} (tail bound {k.tail:.3e})")
    return EXIT_OK


def cmd_semigroup(resolved):
    spec = operator_spec(resolved)
    N, t = resolved["grid"]["N"], resolved["grid"]["T"]
    tol = resolved["tolerances"]
    if spec.family is Family.CUSTOM:
        gen = spec.custom_kernel
        kernel = semigroup_kernel_general(gen, t, tol["series"], WindowPolicy.truncate(N))
        markov_tol = tol["markov"]
    elif spec.alpha == 1.0:
        kernel = semigroup_kernel_closed(spec.family, t, N)
        markov_tol = tol["markov"]
    else:
        res = subordinated_semigroup_kernel(spec, t, quad_tol=tol["quad"], N=N)
        kernel = res.kernel
        markov_tol = max(tol["markov"], 1e-6)
    report = markov_check(kernel, markov_tol)
    path = output_path(resolved, "semigroup")
    fmt = _fmt(resolved["output"]["precision"])
    _write_rows(path, ["n", "value"],
                [[int(n), fmt.format(v)] for n, v in zip(kernel.indices, kernel.values)])
    with open(path + ".report.txt", "w", encoding="utf-8") as fh:
        fh.write(str(report) + "\n")
    write_config(resolved, path + ".ini")
    print(report)
    return EXIT_OK


def initial_data(resolved, gamma):
    init = resolved["initial"]
    N = resolved["grid"]["N"]
    n = np.arange(-N, N + 1)
    shape, level = init["shape"], init["level"]
    if shape == "indicator":
        return np.where(np.abs(n) <= init["radius"], level, 0.0)
    if shape == "constant":
        return np.full(n.size, level)
    if shape == "delta":
        return np.where(n == 0, level, 0.0)
    raise ConfigError(f"unknown initial shape {shape!r} (indicator, constant or delta)")


def solver_setup(resolved):
    m = resolved["model"]
    profile = Profile(m["profile"], m["level"], m["center"], m["steepness"])
    if m["kind"] == "custom":
        raise ConfigError("custom nonlinearities are available from Python only")
    model = make_model(m["kind"], gamma=m["gamma"], rho=m["rho"], c=m["c"], p=m["p"],
                       a=m["a"], profile=profile)
    g, tol = resolved["grid"], resolved["tolerances"]
    cfg = SolverConfig(N=g["N"], T=g["T"], M=g["M"], tol_iter=tol["iter"],
                       max_iters=tol["max_iters"], tol_series=tol["series"],
                       quad_tol=tol["quad"], beta=resolved["fractional"]["beta"],
                       operator=operator_spec(resolved).with_sign(Sign.POWER))
    return model, cfg, initial_data(resolved, model.gamma)


def cmd_solve(resolved):
    model, cfg, phi = solver_setup(resolved)
    path = output_path(resolved, "solve")
    write_config(resolved, path + ".ini")
    try:
        v, w, u = monotone_solve(model, phi, cfg)
    except NonConvergenceError as exc:
        _write_solve_report(path, exc.diagnostics, None, model)
        raise
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(solution_csv(v, w, u, resolved["output"]["precision"]))
    _write_solve_report(path, v.diagnostics, u, model)
    d = v.diagnostics
    print(f"converged in {d.iterations} iterations, gap {d.gaps[-1]:.3e}, "
          f"certificate {u.in_interval_certificate}; wrote {path}")
    return EXIT_OK


def _write_solve_report(path, diag, u, model):
    lines = [f"converged: {diag.converged}", f"iterations: {diag.iterations}",
             f"final_gap: {diag.gaps[-1]!r}" if diag.gaps else "final_gap: nan",
             f"sandwich_violation: {diag.sandwich_violation!r}",
             f"fixed_point_residual: {diag.fixed_point_residual!r}",
             f"gamma: {model.gamma!r}", f"rho: {model.rho!r}"]
    if u is not None:
        lines.append(f"in_interval_certificate: {u.in_interval_certificate}")
    lines.append("gaps: " + " ".join(f"{g:.6e}" for g in diag.gaps))
    with open(path + ".report.txt", "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def cmd_verify(resolved, only=None, inject=None, enforce_budget=True):
    from .verify import format_report, run_checks
    results = run_checks(only, inject, enforce_budget)
    text = format_report(results)
    sys.stdout.write(text)
    if resolved["output"]["path"]:
        path = output_path(resolved, "verify")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERIC


# -- argument parsing --------------------------------------------------------

def _add_common(p):
    p.add_argument("--config", help="INI file with [operator] [fractional] [model] [initial] "
                                    "[grid] [tolerances] [output] sections")
    g = p.add_argument_group("operator")
    g.add_argument("--family", choices=[f.value for f in Family])
    g.add_argument("--alpha")
    g.add_argument("--sign", choices=[s.value for s in Sign])
    g.add_argument("--kernel", help="custom generator kernel as 'n:value, ...' "
                                    "(write --kernel=-1:1,... when it starts with a minus)")
    p.add_argument("--beta")
    m = p.add_argument_group("model")
    for name in ("kind", "gamma", "rho", "c", "p", "a", "profile", "level", "center",
                 "steepness"):
        m.add_argument(f"--{name}")
    i = p.add_argument_group("initial data")
    i.add_argument("--phi-shape", dest="phi_shape")
    i.add_argument("--phi-level", dest="phi_level")
    i.add_argument("--phi-radius", dest="phi_radius")
    gr = p.add_argument_group("grid")
    for name in ("N", "T", "M"):
        gr.add_argument(f"--{name}")
    t = p.add_argument_group("tolerances")
    t.add_argument("--tol-series", dest="tol_series")
    t.add_argument("--tol-quad", dest="tol_quad")
    t.add_argument("--tol-iter", dest="tol_iter")
    t.add_argument("--max-iters", dest="max_iters")
    t.add_argument("--tol-markov", dest="tol_markov")
    o = p.add_argument_group("output")
    o.add_argument("--output", "-o")
    o.add_argument("--precision")


def build_parser():
    parser = argparse.ArgumentParser(prog="fraclattice",
                                     description="Fractional evolution on the integer lattice.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("kernel", "write a fractional difference kernel as CSV"),
                       ("semigroup", "write a semigroup kernel and its Markov report"),
                       ("solve", "solve the nonlinear problem by monotone iteration"),
                       ("verify", "run the acceptance checks")):
        p = sub.add_parser(name, help=text)
        _add_common(p)
        if name == "verify":
            p.add_argument("--only", action="append",
                           help="criterion numbers, names or tags (comma separated)")
            p.add_argument("--inject-fault", dest="inject_fault", choices=["gamma-constant"])
            p.add_argument("--no-budget", dest="no_budget", action="store_true",
                           help="do not fail criteria for exceeding their time budget")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {dest: getattr(args, dest, None) for dest in FLAGS}
    try:
        resolved = load_config(args.config, overrides)
        if args.command == "kernel":
            return cmd_kernel(resolved)
        if args.command == "semigroup":
            return cmd_semigroup(resolved)
        if args.command == "solve":
            return cmd_solve(resolved)
        only = [tok for chunk in (args.only or []) for tok in chunk.split(",")]
        return cmd_verify(resolved, only, args.inject_fault, not args.no_budget)
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (SeriesConvergenceError, EvaluationError, QuadratureError, CrossCheckError,
            WindowOverflowError, FloatingPointError, OverflowError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, HypothesisError, InvalidSpecError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
