import math

import numpy as np
import pytest

from fraclattice.evolution import (
    HypothesisError,
    NonConvergenceError,
    Profile,
    SolutionGrid,
    SolverConfig,
    apply_K_beta,
    compare_solutions,
    linear_solve,
    make_model,
    monotone_solve,
    solution_csv,
    sub_super_check,
)
from fraclattice.kernels import Family, OperatorSpec
from fraclattice.seq_algebra import LatticeSeq

CFG = SolverConfig(N=12, T=1.0, M=16, beta=0.7,
                   operator=OperatorSpec(Family.DISCRETE_LAPLACIAN, 0.5))


def bump(cfg, level=0.5, radius=3):
    return np.where(np.abs(cfg.sites) <= radius, level, 0.0)


def const_grid(value, cfg):
    return SolutionGrid(cfg.times, cfg.N, np.full((2 * cfg.N + 1, cfg.M + 1), float(value)))


# -- models ------------------------------------------------------------------

def test_model_defaults():
    fisher = make_model("fisher-kpp")
    assert (fisher.gamma, fisher.rho) == (1.0, 3.0)
    gen = make_model("generalized-fisher-p", p=2.0)
    assert gen.gamma == 1.0 and gen.rho == 4.0
    cubic = make_model("cubic-bistable-free", a=2.0)
    assert (cubic.gamma, cubic.rho) == (2.0, 12.0)
    gen4 = make_model("generalized-fisher-p", p=2.0, profile=Profile(level=4.0))
    assert gen4.gamma == pytest.approx(2.0)
    assert np.all(gen4.f(0.0, np.array([gen4.gamma])) <= 1e-12)


def test_F_is_monotone_on_the_invariant_interval():
    model = make_model("fisher-kpp", profile=Profile("tanh-front", 1.0, 0.0, 0.8))
    s = np.linspace(0, model.gamma, 101)
    for x in (-10.0, 0.0, 10.0):
        assert np.all(np.diff(model.F(x, s)) >= -1e-14)


def test_model_rejections():
    with pytest.raises(HypothesisError, match="nondecreasing"):
        make_model("fisher-kpp", profile=Profile("tanh-front", 1.0, 0.0, -1.0))
    with pytest.raises(HypothesisError):
        make_model("fisher-kpp", gamma=2.0)
    with pytest.raises(HypothesisError):
        make_model("fisher-kpp", rho=0.5)
    with pytest.raises(HypothesisError):
        make_model("generalized-fisher-p", p=0.5)
    with pytest.raises(HypothesisError):
        make_model("fisher-kpp", c=-1.0)
    with pytest.raises(HypothesisError):
        make_model("custom")


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(M=0)
    with pytest.raises(ValueError):
        SolverConfig(beta=1.5)
    with pytest.raises(ValueError):
        SolverConfig(T=-1.0)


# -- linear problem ----------------------------------------------------------

def test_linear_zero_generator_keeps_data():
    cfg = SolverConfig(N=5, M=8)
    zero = LatticeSeq(0, [0.0], 0.0, 0.0)
    phi = np.linspace(0, 1, 11)
    sol = linear_solve(zero, 0.6, phi, None, cfg)
    assert np.allclose(sol.u, phi[:, None], atol=1e-14, rtol=0)


def test_linear_forcing_at_origin():
    cfg = SolverConfig(N=5, M=8)
    zero = LatticeSeq(0, [0.0], 0.0, 0.0)
    sol = linear_solve(zero, 1.0, np.zeros(11), lambda n, t: (n == 0).astype(float), cfg)
    assert np.allclose(sol.u[5], cfg.times, atol=1e-13)
    assert np.allclose(np.delete(sol.u, 5, axis=0), 0.0)


def test_linear_heat_matches_semigroup():
    cfg = SolverConfig(N=20, T=0.5, M=4)
    sol = linear_solve(cfg.generator(), 1.0, (cfg.sites == 0).astype(float), None, cfg)
    n = cfg.sites
    from scipy.special import ive
    assert np.allclose(sol.u[:, -1], ive(n, 2 * cfg.T), atol=1e-12)


# -- fixed-point operator ----------------------------------------------------

def test_K_of_zero_state_with_zero_nonlinearity_is_S_phi():
    model = make_model("custom", gamma=1.0, rho=1.0, custom_f=lambda x, s: 0.0 * s)
    phi = bump(CFG)
    out = apply_K_beta(const_grid(0.0, CFG), model, phi, CFG)
    assert np.allclose(out.u[:, 0], phi)
    assert np.all(out.u[:, -1] < phi.max()) and np.all(out.u >= 0)


def test_K_keeps_the_ceiling_and_is_monotone():
    model = make_model("fisher-kpp")
    phi = bump(CFG)
    top = apply_K_beta(const_grid(model.gamma, CFG), model, phi, CFG)
    assert np.max(top.u) <= model.gamma + 1e-12
    lo = apply_K_beta(const_grid(0.2, CFG), model, phi, CFG)
    hi = apply_K_beta(const_grid(0.4, CFG), model, phi, CFG)
    assert np.all(lo.u <= hi.u + 1e-14)


# -- nonlinear solver --------------------------------------------------------

def test_monotone_solve_brackets_and_converges():
    model = make_model("fisher-kpp")
    v, w, u = monotone_solve(model, bump(CFG), CFG)
    assert np.max(np.abs(w.u - v.u)) <= CFG.tol_iter
    assert np.all(v.u <= u.u + 1e-15) and np.all(u.u <= w.u + 1e-15)
    assert u.in_interval_certificate
    assert u.diagnostics.sandwich_violation <= 1e-12
    assert all(a >= b - 1e-15 for a, b in zip(u.gaps, u.gaps[1:]))


def test_zero_nonlinearity_matches_linear_solve():
    model = make_model("custom", gamma=1.0, rho=1.0, custom_f=lambda x, s: 0.0 * s)
    cfg = SolverConfig(N=12, T=1.0, M=64, beta=0.7, tol_iter=1e-12,
                       operator=CFG.operator)
    u = monotone_solve(model, bump(cfg), cfg)[2]
    ref = linear_solve(cfg.generator(), cfg.beta, bump(cfg), None, cfg)
    assert np.max(np.abs(u.u - ref.u)) < 1e-3


def test_grid_refinement_reduces_the_error():
    model = make_model("fisher-kpp")
    base = dict(N=10, T=0.5, beta=0.8, tol_iter=1e-12, operator=CFG.operator)
    finest = monotone_solve(model, bump(SolverConfig(M=128, **base)),
                            SolverConfig(M=128, **base))[2].u[:, -1]
    errs = []
    for M in (8, 16, 32):
        cfg = SolverConfig(M=M, **base)
        errs.append(np.max(np.abs(monotone_solve(model, bump(cfg), cfg)[2].u[:, -1] - finest)))
    order = math.log2(errs[1] / errs[2])
    print(f"observed time order {order:.2f}, errors {errs}")
    assert errs[0] > errs[1] > errs[2] and order > 0.5


def test_rejects_data_outside_the_interval():
    model = make_model("fisher-kpp")
    with pytest.raises(HypothesisError):
        monotone_solve(model, bump(CFG, level=1.2), CFG)
    with pytest.raises(HypothesisError):
        monotone_solve(model, bump(CFG, level=-0.1), CFG)


def test_non_convergence_reports_diagnostics():
    cfg = SolverConfig(N=12, T=1.0, M=16, max_iters=2, beta=0.7, operator=CFG.operator)
    with pytest.raises(NonConvergenceError) as info:
        monotone_solve(make_model("fisher-kpp"), bump(cfg), cfg)
    assert len(info.value.diagnostics.gaps) == 2


# -- comparison and sub/super solutions --------------------------------------

def test_comparison_principle():
    model = make_model("cubic-bistable-free")
    ok, rep = compare_solutions(model, bump(CFG, 0.3), bump(CFG, 0.6, 5), CFG)
    assert ok and rep.worst_violation == 0.0
    with pytest.raises(HypothesisError):
        compare_solutions(model, bump(CFG, 0.6), bump(CFG, 0.3), CFG)


def test_sub_super_solutions():
    model = make_model("fisher-kpp")
    phi = bump(CFG)
    ok, rep = sub_super_check(model, const_grid(0.0, CFG), const_grid(model.gamma, CFG), phi,
                              CFG)
    assert ok and rep.premises_hold
    u = monotone_solve(model, phi, CFG)[2]
    ok, _ = sub_super_check(model, u, u, phi, CFG, tol=1e-7)
    assert ok
    ok, rep = sub_super_check(model, const_grid(0.0, CFG), const_grid(0.0, CFG), phi, CFG)
    assert not ok and rep.super_violation > 0


def test_csv_layout_is_stable():
    model = make_model("fisher-kpp")
    v, w, u = monotone_solve(model, bump(CFG), CFG)
    text = solution_csv(v, w, u)
    lines = text.splitlines()
    assert lines[0] == "n,t,u,v,w"
    assert len(lines) == 1 + (CFG.M + 1) * (2 * CFG.N + 1)
    assert lines[1].startswith("-12,0,")
    assert text == solution_csv(*monotone_solve(model, bump(CFG), CFG))
