"""End-to-end acceptance checks, one per numbered criterion.

Every check returns a :class:`CheckResult`; :func:`run_checks` runs a
selection and :func:`format_report` renders one machine-readable line per
criterion.  The oracles here are independent of the code path under test
(Fourier quadrature for kernels, scaled Bessel values from SciPy, Wright and
Levy quadratures, an explicit Euler integrator).
"""

from __future__ import annotations

import contextlib
import io
import math
import os
import tempfile
import time
from dataclasses import dataclass
from unittest import mock

import numpy as np
from scipy.special import ive

from . import kernels as _kernels
from .evolution import SolverConfig, linear_solve, make_model, monotone_solve, compare_solutions
from .kernels import Family, OperatorSpec, Sign, base_generator, fractional_kernel, kernel_by_fourier
from .quadrature import integrate
from .resolvents import (
    ResolventParams,
    integral_resolvent_P_by_subordination,
    integral_resolvent_P_kernel,
    resolvent_equation_residual,
    resolvent_S_by_subordination,
    resolvent_S_kernel,
)
from .semigroups import semigroup_kernel_closed, subordinated_semigroup_kernel
from .seq_algebra import delta, l1_norm
from .special_functions import (
    levy_density,
    levy_mass_below,
    levy_mass_beyond,
    mittag_leffler_scalar,
    wright_cutoff,
    wright_phi,
)


@dataclass(frozen=True)
class CheckResult:
    number: int
    name: str
    passed: bool
    value: float
    threshold: float
    seconds: float
    budget: float
    detail: str = ""

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"criterion={self.number} name={self.name} status={status} "
                f"value={self.value:.3e} threshold={self.threshold:.1e} "
                f"seconds={self.seconds:.2f} budget={self.budget:g}"
                + (f" detail={self.detail}" if self.detail else ""))


# -- criteria ----------------------------------------------------------------

def check_kernel_oracle():
    worst = 0.0
    for fam in (Family.DISCRETE_LAPLACIAN, Family.FORWARD_EULER, Family.BACKWARD_EULER):
        for alpha in (0.25, 0.5, 0.75):
            spec = OperatorSpec(fam, alpha)
            k = fractional_kernel(spec, 10)
            for n in range(-10, 11):
                worst = max(worst, abs(k(n) - kernel_by_fourier(spec, n)))
    return worst, 1e-8, ""


def check_alpha_one():
    worst = 0.0
    for fam in _kernels.NAMED_FAMILIES:
        for sign in Sign:
            k = fractional_kernel(OperatorSpec(fam, 1.0, sign=sign), 5)
            base = base_generator(fam)
            if sign is Sign.POWER:
                base = -base
            idx = np.arange(-5, 6)
            worst = max(worst, float(np.max(np.abs(k(idx) - base(idx)))))
    return worst, 1e-12, ""


def check_markov_closed():
    worst_defect = 0.0
    worst_neg = 0.0
    ok = True
    for fam in _kernels.NAMED_FAMILIES:
        for t in (0.5, 1.0, 2.0):
            k = semigroup_kernel_closed(fam, t, 60)
            defect = abs(1.0 - k.sum())
            ok &= defect < 1e-9 + k.tail
            ok &= float(np.min(k.values)) > -1e-12
            worst_defect = max(worst_defect, defect - k.tail)
            worst_neg = max(worst_neg, -float(np.min(k.values)))
    # the reported value is the defect in excess of the tail bound
    return (max(worst_defect, 0.0) if ok else math.inf), 1e-9, f"max_negative={worst_neg:.1e}"


def check_markov_fractional():
    worst_diff = worst_defect = worst_neg = 0.0
    for alpha in (0.3, 0.5, 0.7):
        for t in (0.5, 1.0):
            spec = OperatorSpec(Family.DISCRETE_LAPLACIAN, alpha)
            res = subordinated_semigroup_kernel(spec, t, quad_tol=1e-8, N=40, check_tol=math.inf)
            worst_diff = max(worst_diff, res.l1_difference)
            worst_defect = max(worst_defect, res.mass_defect)
            worst_neg = max(worst_neg, -float(np.min(res.kernel.values)),
                            -float(np.min(res.quadrature_kernel.values)))
    ok = worst_defect < 1e-6 and worst_neg < 1e-9
    value = worst_diff if ok else math.inf
    return value, 1e-6, f"mass_defect={worst_defect:.1e},max_negative={max(worst_neg, 0):.1e}"


def check_special_functions():
    errors = []
    for alpha in (0.25, 0.5, 0.75):
        tm = wright_cutoff(alpha, 1e-12)
        v, _ = integrate(lambda u: wright_phi(alpha, u), 0.0, tm, 1e-13, 1e-13)
        errors.append(abs(v - 1.0) / 1e-8)
    for beta in (0.3, 0.5, 0.8):
        tm = wright_cutoff(beta, 1e-12)
        for z in np.linspace(-3.0, 0.0, 7):
            v, _ = integrate(lambda u: wright_phi(beta, u) * np.exp(z * u), 0.0, tm, 1e-12, 1e-12)
            errors.append(abs(mittag_leffler_scalar(beta, 1.0, z) - v) / 1e-6)
    for alpha in (0.3, 0.5, 0.7):
        for t in (0.5, 1.0):
            lo, hi = 1.0, 1.0
            while levy_mass_beyond(alpha, t, hi) > 1e-12:
                hi *= 10.0
            while levy_mass_below(alpha, t, lo) > 1e-12:
                lo /= 10.0
            for a in (0.5, 1.0, 2.0):
                def g(u, a=a):
                    lam = np.exp(u)
                    return levy_density(alpha, t, lam) * lam * np.exp(-a * lam)
                v = sum(integrate(g, p, q, 1e-13, 1e-12)[0]
                        for p, q in ((math.log(lo), 0.0), (0.0, math.log(hi))))
                errors.append(abs(v / math.exp(-t * a ** alpha) - 1.0) / 1e-6)
    # normalized: every entry is (error / its own tolerance)
    return max(errors), 1.0, "worst_error_over_tolerance"


def _fractional_laplacian_generator(alpha, N):
    return fractional_kernel(OperatorSpec(Family.DISCRETE_LAPLACIAN, alpha, sign=Sign.GENERATOR), N)


def check_resolvent_dual():
    b = _fractional_laplacian_generator(0.5, 40)
    worst = 0.0
    for beta in (0.4, 0.7):
        p = ResolventParams(beta, b, N=40)
        for t in (0.25, 1.0):
            worst = max(worst,
                        l1_norm(resolvent_S_kernel(p, t) - resolvent_S_by_subordination(p, t)),
                        l1_norm(integral_resolvent_P_kernel(p, t).as_kernel()
                                - integral_resolvent_P_by_subordination(p, t).as_kernel()))
    return worst, 1e-6, ""


def check_resolvent_equation():
    frac, _ = resolvent_equation_residual(
        ResolventParams(0.5, _fractional_laplacian_generator(0.5, 40), N=40), 1.0)
    heat, _ = resolvent_equation_residual(
        ResolventParams(1.0, base_generator(Family.DISCRETE_LAPLACIAN), N=40), 1.0)
    # normalized against the two separate thresholds
    return max(frac / 1e-5, heat / 1e-8), 1.0, f"fractional={frac:.1e},classical={heat:.1e}"


def check_linear_closed_form():
    cfg = SolverConfig(N=40, T=1.0, M=16)
    g = linear_solve(cfg.generator(), 1.0, delta(0), None, cfg)
    n = np.arange(-20, 21)
    return float(np.max(np.abs(g.u[n + cfg.N, -1] - ive(n, 2.0)))), 1e-8, ""


def _bump(level, radius, N):
    return np.where(np.abs(np.arange(-N, N + 1)) <= radius, float(level), 0.0)


def check_sandwich():
    model = make_model("fisher-kpp", c=0.5)
    phi = _bump(0.5, 3, 40)
    worst_gap = worst_sandwich = 0.0
    ok = True
    for beta in (0.6, 1.0):
        cfg = SolverConfig(N=40, T=1.0, M=64, beta=beta)
        v, w, u = monotone_solve(model, phi, cfg)
        d = v.diagnostics
        worst_gap = max(worst_gap, d.gaps[-1])
        worst_sandwich = max(worst_sandwich, d.sandwich_violation)
        ok &= d.iterations <= 200 and u.in_interval_certificate
        ok &= float(np.min(u.u)) >= -1e-10 and float(np.max(u.u)) <= 1 + 1e-10
    ok &= worst_sandwich <= 1e-10
    return (worst_gap if ok else math.inf), 1e-8, f"sandwich_violation={worst_sandwich:.1e}"


def check_equilibria():
    model = make_model("fisher-kpp")
    worst = 0.0
    for beta in (0.6, 1.0):
        cfg = SolverConfig(N=40, T=1.0, M=32, beta=beta)
        zero = monotone_solve(model, np.zeros(81), cfg)[2]
        full = monotone_solve(model, np.full(81, model.gamma), cfg)[2]
        worst = max(worst, float(np.max(np.abs(zero.u))),
                    float(np.max(np.abs(full.u - model.gamma))))
    return worst, 1e-8, ""


COMPARISON_PAIRS = (
    ("zero-vs-ceiling", lambda N, g: (np.zeros(2 * N + 1), np.full(2 * N + 1, g))),
    ("nested-bumps", lambda N, g: (_bump(0.3 * g, 5, N), _bump(0.6 * g, 5, N))),
    ("narrow-vs-wide", lambda N, g: (_bump(0.4 * g, 2, N), _bump(0.4 * g, 8, N))),
)


def check_comparison():
    models = (make_model("fisher-kpp", c=0.5), make_model("generalized-fisher-p", p=2.0))
    worst = -math.inf
    for model in models:
        for beta in (0.6, 1.0):
            cfg = SolverConfig(N=40, T=1.0, M=32, beta=beta)
            for _, pair in COMPARISON_PAIRS:
                phi, psi = pair(cfg.N, model.gamma)
                _, report = compare_solutions(model, phi, psi, cfg)
                worst = max(worst, report.worst_violation)
    return worst, 1e-8, "cases=12"


def explicit_euler_reference(model, phi, N, T, dt):
    """``du/dt = Delta_d u + f(n - c t, u)`` by forward Euler with edge ghost cells."""
    u = np.array(phi, dtype=float)
    n = np.arange(-N, N + 1, dtype=float)
    for k in range(int(round(T / dt))):
        ext = np.concatenate(([u[0]], u, [u[-1]]))
        u = u + dt * (ext[2:] - 2.0 * u + ext[:-2] + model.f(n - model.c * k * dt, u))
    return u


def check_classical_reduction():
    model = make_model("fisher-kpp", c=0.5)
    phi = _bump(0.5, 3, 40)
    cfg = SolverConfig(N=40, T=1.0, M=64, beta=1.0)
    u = monotone_solve(model, phi, cfg)[2]
    ref = explicit_euler_reference(model, phi, 40, 1.0, 1e-4)
    return float(np.max(np.abs(u.u[:, -1] - ref))), 5e-3, ""


def check_determinism():
    from .cli import main
    with tempfile.TemporaryDirectory() as tmp:
        outputs = []
        for run in range(2):
            path = os.path.join(tmp, f"run{run}.csv")
            with contextlib.redirect_stdout(io.StringIO()):
                code = main(["solve", "--kind", "fisher-kpp", "--beta", "0.8", "--alpha", "0.5",
                             "--N", "20", "--M", "16", "--output", path])
            if code != 0:
                return math.inf, 0.5, f"solve exited with {code}"
            with open(path, "rb") as fh:
                outputs.append(fh.read())
    same = outputs[0] == outputs[1]
    return (0.0 if same else 1.0), 0.5, f"identical_bytes={same},size={len(outputs[0])}"


# -- registry ----------------------------------------------------------------

@dataclass(frozen=True)
class Criterion:
    number: int
    name: str
    tags: tuple
    budget: float
    run: object


CRITERIA = (
    Criterion(1, "kernel-oracle", ("kernels",), 5.0, check_kernel_oracle),
    Criterion(2, "alpha-one-reduction", ("kernels",), 1.0, check_alpha_one),
    Criterion(3, "markov-closed-forms", ("markov", "semigroups"), 5.0, check_markov_closed),
    Criterion(4, "markov-fractional", ("markov", "semigroups"), 60.0, check_markov_fractional),
    Criterion(5, "special-function-oracles", ("special",), 30.0, check_special_functions),
    Criterion(6, "resolvent-dual", ("resolvents",), 60.0, check_resolvent_dual),
    Criterion(7, "resolvent-equation", ("resolvents",), 30.0, check_resolvent_equation),
    Criterion(8, "linear-closed-form", ("solver",), 5.0, check_linear_closed_form),
    Criterion(9, "monotone-sandwich", ("solver",), 120.0, check_sandwich),
    Criterion(10, "equilibria", ("solver",), 60.0, check_equilibria),
    Criterion(11, "comparison-principle", ("solver", "comparison"), 300.0, check_comparison),
    Criterion(12, "classical-reduction", ("solver",), 60.0, check_classical_reduction),
    Criterion(13, "determinism", ("cli",), 60.0, check_determinism),
)


def select(only=None):
    """Criteria matching any token in ``only`` (numbers, names or tags)."""
    if not only:
        return list(CRITERIA)
    tokens = {str(t).strip() for t in only if str(t).strip()}
    picked = [c for c in CRITERIA
              if str(c.number) in tokens or c.name in tokens or tokens & set(c.tags)]
    if not picked:
        raise ValueError(f"no criterion matches {sorted(tokens)}")
    return picked


@contextlib.contextmanager
def fault(name):
    """Deliberately break one ingredient, to show that the checks notice."""
    if name is None:
        yield
        return
    if name != "gamma-constant":
        raise ValueError(f"unknown fault {name!r}")
    real = _kernels.gamma_real
    with mock.patch.object(_kernels, "gamma_real", lambda x: real(x) * (1.0 + 1e-3)):
        yield


def run_checks(only=None, inject=None, enforce_budget=True):
    results = []
    with fault(inject):
        for crit in select(only):
            start = time.perf_counter()
            try:
                value, threshold, detail = crit.run()
                error = None
            except Exception as exc:  # a crash is reported as a failure, not hidden
                value, threshold, detail = math.inf, 0.0, ""
                error = f"{type(exc).__name__}: {exc}".replace(" ", "_")
            elapsed = time.perf_counter() - start
            passed = error is None and value < threshold
            if enforce_budget and elapsed > crit.budget:
                passed = False
                detail = (detail + " over-budget").strip()
            results.append(CheckResult(crit.number, crit.name, passed, value, threshold, elapsed,
                                       crit.budget, error or detail.replace(" ", ",")))
    return results


def format_report(results):
    lines = [r.line() for r in results]
    lines.append(f"summary passed={sum(r.passed for r in results)} total={len(results)}")
    return "\n".join(lines) + "\n"
