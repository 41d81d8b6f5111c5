"""Linear and nonlinear evolution on the lattice window ``[-N, N]``.

The mild formulation of ``D_t^beta u = B u + f(n - c t, u)`` is rewritten
with ``B_rho = B - rho I`` and ``F(x, s) = rho s + f(x, s)``:

    u(t) = S(t) phi + int_0^t P(t - s) F(. - c s, u(s)) ds,

where ``S`` and ``P`` are the resolvent families of ``B_rho``.  Time is
discretized on a uniform grid by product integration: ``F`` is interpolated
linearly in ``s`` and the kernel ``P`` is integrated exactly against each
hat function, so every discrete weight is itself a nonnegative convolution
kernel.  The nonlinear problem is solved by the monotone iteration from the
barriers ``0`` and ``gamma``.

Off the window the state is extended by its edge values; the kernel mass
that falls outside is routed to the edge columns, so constants are mapped
exactly and positivity is preserved.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import mpmath
import numpy as np

from .kernels import Family, OperatorSpec, Sign, fractional_kernel
from .resolvents import PowerBasis
from .seq_algebra import LatticeSeq, delta
from .special_functions import (
    ml_taylor_coefficients,
    ml_taylor_coefficients_mp,
    recentred_weights,
)

SLACK = 1e-10


class HypothesisError(ValueError):
    """A structural hypothesis on the model or the data does not hold."""


class NonConvergenceError(RuntimeError):
    """The monotone iteration hit ``max_iters`` with the gap above ``tol_iter``.

    ``diagnostics`` is a :class:`SolveDiagnostics` describing the run.
    """

    def __init__(self, message, diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


# -- nonlinear models --------------------------------------------------------

class ModelKind(enum.Enum):
    CUBIC = "cubic-bistable-free"
    FISHER_KPP = "fisher-kpp"
    GENERALIZED = "generalized-fisher-p"
    CUSTOM = "custom"


@dataclass(frozen=True)
class Profile:
    """The growth profile ``r``: a constant, or ``level (1 + tanh(k (x - x0))) / 2``."""

    kind: str = "constant"
    level: float = 1.0
    center: float = 0.0
    steepness: float = 1.0

    def __post_init__(self):
        if self.kind not in ("constant", "tanh-front"):
            raise HypothesisError(f"unknown profile {self.kind!r}")
        for name in ("level", "center", "steepness"):
            if not math.isfinite(getattr(self, name)):
                raise HypothesisError(f"profile {name} must be finite")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            return np.full(x.shape, self.level)
        return 0.5 * self.level * (1.0 + np.tanh(self.steepness * (x - self.center)))

    @property
    def limit(self):
        """``r(+inf)``."""
        if self.kind == "constant" or self.steepness == 0:
            return self.level if self.kind == "constant" else 0.5 * self.level
        return self.level if self.steepness > 0 else 0.0


@dataclass(frozen=True)
class NonlinearModel:
    """Reaction term ``f(x, s)`` with its invariant ceiling and monotonization constant.

    ``F(x, s) = rho s + f(x, s)`` is nondecreasing in ``s`` on ``[0, gamma]``
    once the construction checks pass.
    """

    kind: ModelKind
    gamma: float
    rho: float
    c: float = 0.0
    p: float = 1.0
    a: float = 1.0
    profile: Profile = field(default_factory=Profile)
    custom_f: Callable | None = None

    def f(self, x, s):
        s = np.asarray(s, dtype=float)
        if self.kind is ModelKind.CUBIC:
            return s * (self.a ** 2 - s * s)
        if self.kind is ModelKind.FISHER_KPP:
            return s * (self.profile(x) - s)
        if self.kind is ModelKind.GENERALIZED:
            return s * (self.profile(x) - np.abs(s) ** self.p)
        return np.asarray(self.custom_f(np.asarray(x, dtype=float), s), dtype=float)

    def F(self, x, s):
        return self.rho * np.asarray(s, dtype=float) + self.f(x, s)


def _check_hypotheses(model, x_range=60.0, samples=241, s_samples=41):
    x = np.linspace(-x_range, x_range, samples)
    gam = model.gamma
    s = np.linspace(0.0, gam, s_samples)
    X, S = np.meshgrid(x, s, indexing="ij")
    h = 1e-5 * gam
    tol = 1e-7 * max(1.0, gam, model.rho)
    f0 = model.f(x, np.zeros_like(x))
    if np.max(np.abs(f0)) > tol:
        raise HypothesisError("f(x, 0) = 0 fails")
    if np.max(model.f(x, np.full_like(x, gam))) > tol:
        raise HypothesisError("f(x, gamma) <= 0 fails")
    dF = model.rho + (model.f(x, np.full_like(x, gam)) - model.f(x, np.full_like(x, gam - h))) / h
    if np.min(dF) < -tol * 10:
        raise HypothesisError("rho + d_s f(x, gamma) >= 0 fails")
    second = model.f(X, S + h) - 2.0 * model.f(X, S) + model.f(X, S - h)
    if np.max(second[:, 1:-1]) / (h * h) > 1e-3 * max(1.0, model.rho):
        raise HypothesisError("concavity of f(x, .) on [0, gamma] fails")
    slope0 = (model.f(x, np.full_like(x, h)) - f0) / h
    if np.min(np.diff(slope0)) < -tol * 10:
        raise HypothesisError("d_s f(x, 0) must be nondecreasing in x (r nondecreasing)")


def make_model(kind, *, gamma=None, rho=None, c=0.0, p=1.0, a=1.0, profile=None,
               custom_f=None):
    """Build a model with the standard monotonization constant and check it.

    ``rho`` defaults to ``3 a^2`` (cubic), ``3 gamma`` (Fisher-KPP) and
    ``(p + 2) gamma^p`` (generalized); ``gamma`` is ``a`` for the cubic
    family, ``r(inf)`` for Fisher-KPP and ``r(inf)^(1/p)`` for the
    generalized family.  A ``gamma`` that contradicts this is rejected.
    Custom models need ``custom_f``, ``gamma`` and ``rho``.
    """
    kind = ModelKind(kind)
    profile = profile if profile is not None else Profile()
    if not (math.isfinite(c) and c >= 0):
        raise HypothesisError("c must be a nonnegative real")
    if kind is ModelKind.CUBIC:
        if not a > 0:
            raise HypothesisError("a must be positive")
        implied = a
        default_rho = 3.0 * a * a
    elif kind in (ModelKind.FISHER_KPP, ModelKind.GENERALIZED):
        if kind is ModelKind.GENERALIZED and not p >= 1:
            raise HypothesisError("p must be >= 1")
        if profile.kind == "tanh-front" and profile.level * profile.steepness < 0:
            raise HypothesisError("the profile r must be nondecreasing")
        r_inf = profile.limit
        if not r_inf > 0:
            raise HypothesisError("r(inf) must be positive")
        q = 1.0 if kind is ModelKind.FISHER_KPP else p
        implied = r_inf ** (1.0 / q)
        default_rho = (q + 2.0) * implied ** q
    else:
        if custom_f is None or gamma is None or rho is None:
            raise HypothesisError("custom models need custom_f, gamma and rho")
        implied = gamma
        default_rho = rho
    if gamma is not None and not math.isclose(gamma, implied, rel_tol=1e-12):
        raise HypothesisError(f"gamma = {gamma} contradicts the model's ceiling {implied}")
    rho = default_rho if rho is None else float(rho)
    if not (implied > 0 and rho > 0):
        raise HypothesisError("gamma and rho must be positive")
    model = NonlinearModel(kind, float(implied), rho, float(c), float(p), float(a), profile,
                           custom_f)
    _check_hypotheses(model)
    return model


# -- grids and configuration -------------------------------------------------

@dataclass(frozen=True)
class SolverConfig:
    """Grid and tolerances.

    ``beta`` and ``operator`` select the time order and the spatial
    generator (the generator form of ``operator``).
    """

    N: int = 40
    T: float = 1.0
    M: int = 64
    tol_iter: float = 1e-8
    max_iters: int = 200
    tol_series: float = 1e-14
    quad_tol: float = 1e-10
    beta: float = 1.0
    operator: OperatorSpec = field(
        default_factory=lambda: OperatorSpec(Family.DISCRETE_LAPLACIAN, 1.0))

    def __post_init__(self):
        if not (isinstance(self.N, (int, np.integer)) and self.N >= 1):
            raise ValueError("N must be a positive integer")
        if not (isinstance(self.M, (int, np.integer)) and self.M >= 1):
            raise ValueError("M must be >= 1")
        if not (math.isfinite(self.T) and self.T > 0):
            raise ValueError("T must be positive")
        for name in ("tol_iter", "tol_series", "quad_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError("beta must lie in (0, 1]")

    @property
    def times(self):
        return np.linspace(0.0, self.T, self.M + 1)

    @property
    def sites(self):
        return np.arange(-self.N, self.N + 1)

    def generator(self):
        """Generator-form kernel on ``[-2N, 2N]``."""
        return fractional_kernel(self.operator.with_sign(Sign.GENERATOR), 2 * self.N)


@dataclass
class SolutionGrid:
    """Values ``u[n, m]`` (space by time) on ``[-N, N] x {t_0, .., t_M}``."""

    times: np.ndarray
    N: int
    u: np.ndarray
    gaps: list = field(default_factory=list)
    iterations_used: int = 0
    in_interval_certificate: bool = False

    @property
    def sites(self):
        return np.arange(-self.N, self.N + 1)

    def at(self, m):
        return self.u[:, m]


@dataclass
class SolveDiagnostics:
    gaps: list
    iterations: int
    sandwich_violation: float
    fixed_point_residual: float
    converged: bool


# -- the discrete solution operator ------------------------------------------

def _edge_matrix(vals, exact_mass, N):
    """Convolution with ``vals`` (on ``[-2N, 2N]``) acting on edge-extended states.

    Kernel mass beyond ``[-2N, 2N]`` (exact mass minus the stored sum) is
    split between the two sides in proportion to the outermost entries.
    """
    W = 2 * N
    n = np.arange(-N, N + 1)
    idx = n[:, None] - n[None, :] + W
    mat = vals[idx].copy()
    csum = np.concatenate(([0.0], np.cumsum(vals)))
    missing = max(exact_mass - float(csum[-1]), 0.0) if exact_mass is not None else 0.0
    eL, eR = abs(vals[0]), abs(vals[-1])
    frac_right = eR / (eL + eR) if eL + eR > 0 else 0.5
    # left extension (k < -N) sees kernel offsets m = n - k > n + N
    right_part = csum[-1] - csum[n + N + W + 1] + missing * frac_right
    # right extension (k > N) sees offsets m < n - N
    left_part = csum[n - N + W] + missing * (1.0 - frac_right)
    mat[:, 0] += right_part
    mat[:, -1] += left_part
    return mat


@dataclass
class DiscreteOperator:
    """Matrices of ``S(t_m)`` and of the product-integration weights.

    ``U[m] = S[m] phi + Wa[m] F_0 + sum_{j=1}^{m} D[m-j] F_j`` with
    ``D[0] = Wb(1)`` and ``D[k] = Wa(k) + Wb(k+1)``.
    """

    S: np.ndarray       # (M+1, 2N+1, 2N+1)
    Wa: np.ndarray      # (M+1, ...), index 0 unused
    D: np.ndarray       # (M, ...)
    powers: int
    series_remainder: float

    def apply(self, phi, Fvals):
        M = self.D.shape[0]
        U = np.empty((M + 1, phi.size))
        U[0] = phi
        G = np.einsum("kab,jb->kja", self.D, Fvals[1:])   # G[k, j-1] = D[k] F_j
        for m in range(1, M + 1):
            j = np.arange(m)
            U[m] = self.S[m] @ phi + self.Wa[m] @ Fvals[0] + G[m - 1 - j, j].sum(axis=0)
        return U


_OPERATOR_CACHE: dict = {}


def _mp_coefficients(beta, gam, X, J, d, wnorm):
    """``X^beta``-scaled Taylor weights of ``E_{beta,gam}(X^beta (d + w))`` in mp."""
    T = X ** beta
    coef, dps = ml_taylor_coefficients_mp(beta, gam, T * d, J, T, wnorm)
    return coef, dps


def _mp_mass(beta, gam, z):
    coef, _ = ml_taylor_coefficients_mp(beta, gam, z, 0, 1.0, 0.0)
    return coef[0]


def build_operator(b, beta, rho, N, T, M, tol):
    """Assemble (and cache) the discrete operator for generator ``b``.

    ``b`` must be known on ``[-2N, 2N]`` (entries beyond are accounted for
    by its ``tail`` and ``mass``).
    """
    key = (beta, rho, b.offset, b.values.tobytes(), b.tail, b.mass, N, T, M, tol)
    if key in _OPERATOR_CACHE:
        return _OPERATOR_CACHE[key]
    W = 2 * N
    b_eff = b - rho * delta(0)
    basis = PowerBasis(b_eff, W)
    d, wnorm = basis.d, basis.wnorm
    mass_b = b.mass if b.mass is not None else b.sum()
    mass_eff = mass_b - rho
    TT = T ** beta
    weights, remainder = recentred_weights(beta, 1.0, TT * d, TT, wnorm, tol, 20000)
    J = weights.size - 1
    basis.ensure(J)
    table = basis.table[:J + 1]
    h = T / M
    n_sites = 2 * N + 1

    S = np.empty((M + 1, n_sites, n_sites))
    A_mp, B_mp, A_mass, B_mass = [], [], [], []
    dps_all = 30
    for k in range(M + 1):
        X = k * h
        if k == 0:
            S[0] = np.eye(n_sites)
            A_mp.append([mpmath.mpf(0)] * (J + 1))
            B_mp.append([mpmath.mpf(0)] * (J + 1))
            A_mass.append(mpmath.mpf(0))
            B_mass.append(mpmath.mpf(0))
            continue
        Tk = X ** beta
        cS = ml_taylor_coefficients(beta, 1.0, Tk * d, J, Tk, wnorm)
        S[k] = _edge_matrix(cS @ table, float(_mp_mass(beta, 1.0, mass_eff * Tk)), N)
        c1, dps1 = _mp_coefficients(beta, beta + 1.0, X, J, d, wnorm)
        c2, dps2 = _mp_coefficients(beta, beta + 2.0, X, J, d, wnorm)
        dps_all = max(dps_all, dps1, dps2)
        with mpmath.workdps(dps_all):
            xb = mpmath.mpf(Tk)
            xb1 = xb * mpmath.mpf(X)
            A_mp.append([xb * c for c in c1])
            B_mp.append([xb1 * (u - v) for u, v in zip(c1, c2)])
            m1 = _mp_mass(beta, beta + 1.0, mass_eff * Tk)
            m2 = _mp_mass(beta, beta + 2.0, mass_eff * Tk)
            A_mass.append(xb * m1)
            B_mass.append(xb1 * (m1 - m2))

    Wa = np.zeros((M + 1, n_sites, n_sites))
    Wb = np.zeros((M + 2, n_sites, n_sites))
    with mpmath.workdps(dps_all):
        hm = mpmath.mpf(h)
        for k in range(1, M + 1):
            lo = (k - 1) * hm
            hi = k * hm
            dA = [u - v for u, v in zip(A_mp[k], A_mp[k - 1])]
            dB = [u - v for u, v in zip(B_mp[k], B_mp[k - 1])]
            # the exact weights are integrals of a hat function against a
            # nonnegative kernel, so tiny negative values are rounding
            wa = np.maximum([float((db - lo * da) / hm) for da, db in zip(dA, dB)], 0.0)
            wb = np.maximum([float((hi * da - db) / hm) for da, db in zip(dA, dB)], 0.0)
            dAm = A_mass[k] - A_mass[k - 1]
            dBm = B_mass[k] - B_mass[k - 1]
            Wa[k] = _edge_matrix(wa @ table, float((dBm - lo * dAm) / hm), N)
            Wb[k] = _edge_matrix(wb @ table, float((hi * dAm - dBm) / hm), N)
    D = np.empty((M, n_sites, n_sites))
    D[0] = Wb[1]
    for k in range(1, M):
        D[k] = Wa[k] + Wb[k + 1]
    op = DiscreteOperator(S, Wa, D, J, remainder)
    _OPERATOR_CACHE[key] = op
    return op


def _window_values(phi, N, name="phi"):
    if isinstance(phi, LatticeSeq):
        return phi.window(N).astype(float)
    arr = np.asarray(phi, dtype=float)
    if arr.shape != (2 * N + 1,):
        raise ValueError(f"{name} must be a LatticeSeq or an array of length 2N+1")
    return arr.copy()


def linear_solve(b, beta, phi, forcing, cfg):
    """``u(t) = S(t) phi + int_0^t P(t-s) f(., s) ds`` on the grid.

    ``forcing(n, t)`` returns the source on the sites ``n`` at time ``t``
    (``None`` for no source).  ``b`` is the generator kernel, known on
    ``[-2N, 2N]``.
    """
    N = cfg.N
    op = build_operator(b, beta, 0.0, N, cfg.T, cfg.M, cfg.tol_series)
    phi_v = _window_values(phi, N)
    sites = cfg.sites
    times = cfg.times
    if forcing is None:
        Fvals = np.zeros((cfg.M + 1, sites.size))
    else:
        Fvals = np.array([np.broadcast_to(forcing(sites, t), sites.shape) for t in times],
                         dtype=float)
    U = op.apply(phi_v, Fvals)
    return SolutionGrid(times, N, U.T.copy())


def _operator_for(model, cfg):
    b = cfg.generator()
    return build_operator(b, cfg.beta, model.rho, cfg.N, cfg.T, cfg.M, cfg.tol_series)


def _apply(op, model, phi_v, U, cfg):
    sites = cfg.sites.astype(float)
    times = cfg.times
    Fvals = np.array([model.F(sites - model.c * t, U[m]) for m, t in enumerate(times)])
    return op.apply(phi_v, Fvals)


def apply_K_beta(state, model, phi, cfg):
    """One application of the fixed-point operator to a state on the grid."""
    op = _operator_for(model, cfg)
    phi_v = _window_values(phi, cfg.N)
    U = _apply(op, model, phi_v, state.u.T, cfg)
    return SolutionGrid(state.times.copy(), cfg.N, U.T.copy())


def _check_initial(phi_v, gamma):
    if np.any(~np.isfinite(phi_v)):
        raise HypothesisError("initial data must be finite")
    if np.min(phi_v) < 0 or np.max(phi_v) > gamma:
        raise HypothesisError(
            f"initial data must lie in [0, gamma] = [0, {gamma}]; got range "
            f"[{float(np.min(phi_v))!r}, {float(np.max(phi_v))!r}]")


def _constant_grid(value, cfg):
    return SolutionGrid(cfg.times, cfg.N, np.full((2 * cfg.N + 1, cfg.M + 1), float(value)))


def monotone_solve(model, phi, cfg):
    """Monotone iteration ``v_k = K v_{k-1}`` from ``0`` and ``w_k = K w_{k-1}`` from ``gamma``.

    Returns ``(v, w, u)`` with ``u = (v + w) / 2``.  Raises
    :class:`HypothesisError` for data outside ``[0, gamma]`` and
    :class:`NonConvergenceError` when the gap does not fall below
    ``tol_iter`` within ``max_iters`` iterations.
    """
    phi_v = _window_values(phi, cfg.N)
    _check_initial(phi_v, model.gamma)
    op = _operator_for(model, cfg)
    V = np.zeros((cfg.M + 1, phi_v.size))
    Wt = np.full_like(V, model.gamma)
    gaps = []
    worst = 0.0
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        V_new = _apply(op, model, phi_v, V, cfg)
        W_new = _apply(op, model, phi_v, Wt, cfg)
        worst = max(worst, float(np.max(V - V_new)), float(np.max(V_new - W_new)),
                    float(np.max(W_new - Wt)))
        V, Wt = V_new, W_new
        gap = float(np.max(np.abs(Wt - V)))
        gaps.append(gap)
        if gap <= cfg.tol_iter:
            converged = True
            break
    U = 0.5 * (V + Wt)
    residual = float(np.max(np.abs(_apply(op, model, phi_v, U, cfg) - U)))
    diag = SolveDiagnostics(gaps, it, max(worst, 0.0), residual, converged)
    if not converged:
        raise NonConvergenceError(
            f"gap {gaps[-1]:.3e} above tol_iter {cfg.tol_iter:.1e} after {it} iterations",
            diag)
    lo, hi = -SLACK, model.gamma + SLACK
    inside = bool(np.min(V) >= lo and np.max(Wt) <= hi and worst <= SLACK)
    grids = []
    for arr in (V, Wt, U):
        g = SolutionGrid(cfg.times, cfg.N, arr.T.copy(), list(gaps), it, inside)
        g.diagnostics = diag
        grids.append(g)
    return tuple(grids)


@dataclass(frozen=True)
class ComparisonReport:
    holds: bool
    worst_violation: float
    tol: float


def compare_solutions(model, phi, psi, cfg, tol=1e-8):
    """Solve from ``phi <= psi`` and check ``u_phi <= u_psi + tol`` on the grid."""
    phi_v = _window_values(phi, cfg.N)
    psi_v = _window_values(psi, cfg.N, "psi")
    if np.any(phi_v > psi_v):
        raise HypothesisError("comparison needs phi <= psi entrywise")
    _check_initial(phi_v, model.gamma)
    _check_initial(psi_v, model.gamma)
    u1 = monotone_solve(model, phi_v, cfg)[2]
    u2 = monotone_solve(model, psi_v, cfg)[2]
    worst = float(np.max(u1.u - u2.u))
    return worst <= tol, ComparisonReport(worst <= tol, max(worst, 0.0), tol)


@dataclass(frozen=True)
class SubSuperReport:
    premises_hold: bool
    conclusion_holds: bool
    sub_violation: float
    super_violation: float
    order_violation: float
    iterations: int


def sub_super_check(model, v0, w0, phi, cfg, tol=1e-8):
    """Check ``K v0 >= v0`` and ``K w0 <= w0``, then the ordered limits ``v0 <= v* <= w* <= w0``."""
    phi_v = _window_values(phi, cfg.N)
    V0, W0 = v0.u.T, w0.u.T
    if np.any(V0[0] > W0[0] + tol):
        raise HypothesisError("need v0(., 0) <= w0(., 0)")
    op = _operator_for(model, cfg)
    KV = _apply(op, model, phi_v, V0, cfg)
    KW = _apply(op, model, phi_v, W0, cfg)
    sub_v = max(float(np.max(V0 - KV)), 0.0)
    sup_v = max(float(np.max(KW - W0)), 0.0)
    premises = sub_v <= tol and sup_v <= tol
    V, Wt = KV, KW
    it = 1
    while it < cfg.max_iters and float(np.max(np.abs(Wt - V))) > cfg.tol_iter:
        V = _apply(op, model, phi_v, V, cfg)
        Wt = _apply(op, model, phi_v, Wt, cfg)
        it += 1
    order = max(float(np.max(V0 - V)), float(np.max(V - Wt)), float(np.max(Wt - W0)), 0.0)
    report = SubSuperReport(premises, premises and order <= tol, sub_v, sup_v, order, it)
    return report.conclusion_holds, report


# -- output ------------------------------------------------------------------

def solution_csv(v, w, u, precision=17):
    """CSV text with header ``n,t,u,v,w``; rows by time, then site."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "t", "u", "v", "w"])
    fmt = f"{{:.{int(precision)}g}}"
    for m, t in enumerate(u.times):
        for i, n in enumerate(u.sites):
            writer.writerow([int(n), fmt.format(t), fmt.format(u.u[i, m]),
                             fmt.format(v.u[i, m]), fmt.format(w.u[i, m])])
    return buf.getvalue()


__all__ = [
    "ComparisonReport", "DiscreteOperator", "HypothesisError", "ModelKind", "NonConvergenceError",
    "NonlinearModel", "Profile", "SolutionGrid", "SolveDiagnostics", "SolverConfig",
    "SubSuperReport", "apply_K_beta", "build_operator", "compare_solutions", "linear_solve",
    "make_model", "monotone_solve", "solution_csv", "sub_super_check",
]
