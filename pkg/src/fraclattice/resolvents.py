"""Resolvent and integral resolvent families of ``D_t^beta u = B u``.

With ``B`` acting by convolution with ``b_eff = b - rho delta_0``,

    S(t) = E_{beta,1}(t^beta b_eff),
    P(t) = t^(beta-1) E_{beta,beta}(t^beta b_eff),

evaluated in the convolution algebra (the reference route), and
independently through Wright subordination,

    S(t) = int_0^inf Phi_beta(tau) e^{tau t^beta b_eff} dtau,
    P(t) = t^(beta-1) int_0^inf beta tau Phi_beta(tau) e^{tau t^beta b_eff} dtau.

Every kernel here is a combination ``sum_j weight_j w^j`` of the powers of
the off-diagonal part ``w`` of ``b_eff``; :class:`PowerBasis` holds those
powers once per generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .quadrature import integrate_fixed
from .seq_algebra import (
    LatticeSeq, WindowPolicy, convolve, delta, l1_norm, power_table, split_diagonal,
)
from .special_functions import (
    DEFAULT_CONTROL,
    SeriesControl,
    mittag_leffler_element,
    mittag_leffler_scalar,
    ml_taylor_coefficients,
    recentred_weights,
    wright_cutoff,
    wright_phi,
)


@dataclass(frozen=True)
class ResolventParams:
    """Order ``beta``, generator kernel ``b`` and perturbation ``rho``.

    ``N`` is the half-width of the window on which kernels are returned; by
    default the extent of ``b``.
    """

    beta: float
    b: LatticeSeq
    rho: float = 0.0
    ctl: SeriesControl = DEFAULT_CONTROL
    quad_tol: float = 1e-10
    N: int | None = None

    def __post_init__(self):
        if not 0.0 < self.beta <= 1.0:
            raise ValueError("beta must lie in (0, 1]")
        if not self.quad_tol > 0:
            raise ValueError("quad_tol must be positive")
        if self.rho < 0:
            raise ValueError("rho must be nonnegative")
        if self.N is None:
            extent = max(abs(self.b.offset), abs(self.b.stop - 1), 1)
            object.__setattr__(self, "N", extent)

    @property
    def b_eff(self):
        return self.b - self.rho * delta(0)

    @property
    def policy(self):
        return WindowPolicy.truncate(self.N)


@dataclass
class PowerBasis:
    """Powers ``w^0 .. w^J`` of the off-diagonal part of a generator on a window.

    ``d`` is the diagonal entry, ``wnorm`` the l1 norm of ``w``; the table
    grows on demand.
    """

    generator: LatticeSeq
    N: int
    d: float = field(init=False)
    w: LatticeSeq = field(init=False)
    wnorm: float = field(init=False)
    table: np.ndarray = field(init=False)
    errs: np.ndarray = field(init=False)

    def __post_init__(self):
        self.d, self.w = split_diagonal(self.generator)
        self.wnorm = l1_norm(self.w)
        self.table, self.errs = power_table(self.w, 0, WindowPolicy.truncate(self.N))

    def ensure(self, J):
        if J >= self.table.shape[0]:
            size = max(J, 2 * self.table.shape[0])
            self.table, self.errs = power_table(self.w, size, WindowPolicy.truncate(self.N))

    def combine(self, weights, extra_tail=0.0, mass=None):
        """``sum_j weights[j] w^j`` as a sequence on the window."""
        weights = np.asarray(weights, dtype=float)
        self.ensure(weights.size - 1)
        J = weights.size
        vals = weights @ self.table[:J]
        tail = extra_tail + float(np.abs(weights) @ self.errs[:J])
        return LatticeSeq(-self.N, vals, tail, mass)


# -- series route ------------------------------------------------------------

def resolvent_S_kernel(params, t):
    """Kernel of ``S_beta(t) = E_{beta,1}(t^beta b_eff)``; ``delta_0`` at ``t = 0``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return delta(0).restrict(params.N)
    return mittag_leffler_element(params.beta, 1.0, params.b_eff, t, params.ctl, params.policy)


@dataclass(frozen=True)
class IntegralResolventKernel:
    """``P_beta(t)`` stored as ``weight * kernel`` with ``weight = t^(beta-1)``.

    Keeping the weakly singular scalar apart lets callers integrate it
    analytically.
    """

    t: float
    weight: float
    kernel: LatticeSeq

    def as_kernel(self):
        return self.kernel * self.weight


def integral_resolvent_P_kernel(params, t):
    """Kernel of ``P_beta(t) = t^(beta-1) E_{beta,beta}(t^beta b_eff)`` for ``t > 0``."""
    if t <= 0:
        raise ValueError("t must be positive")
    beta = params.beta
    kernel = mittag_leffler_element(beta, beta, params.b_eff, t, params.ctl, params.policy)
    return IntegralResolventKernel(t, t ** (beta - 1.0), kernel)


def scalar_resolvents(beta, rho, t, ctl=DEFAULT_CONTROL):
    """``(E_{beta,1}(-rho t^beta), t^(beta-1) E_{beta,beta}(-rho t^beta))``.

    At ``t = 0`` the second value is ``1`` for ``beta = 1`` and ``inf``
    otherwise.
    """
    if rho < 0 or t < 0:
        raise ValueError("rho and t must be nonnegative")
    z = -rho * t ** beta
    S = mittag_leffler_scalar(beta, 1.0, z, ctl)
    if t == 0:
        return S, (1.0 if beta == 1.0 else math.inf)
    return S, t ** (beta - 1.0) * mittag_leffler_scalar(beta, beta, z, ctl)


# -- subordination route -----------------------------------------------------

def _taylor_order(r, tol):
    term, k, total = 1.0, 0, 1.0
    while True:
        k += 1
        term *= r / k
        total += term
        if k > r and term * (r / (k + 1)) / (1.0 - r / (k + 1)) <= tol * total:
            return k


def _wright_weights(params, t, first_moment):
    """``m_j = int Phi(tau) tau^p e^{tau T d} (tau T)^j / j! dtau`` for j = 0..K.

    Because ``exp(tau T b_eff) = e^{tau T d} sum_j (tau T)^j w^j / j!``, the
    subordination integral is ``sum_j m_j w^j``; the m_j are computed by
    composite Gauss-Legendre on ``[0, tau_max]`` with ``tau_max`` the Wright
    cutoff carrying all but ``1e-10`` of the unit mass.
    """
    beta = params.beta
    basis = PowerBasis(params.b_eff, params.N)
    T = t ** beta
    tau_max = wright_cutoff(beta, 1e-10)
    r = tau_max * T * basis.wnorm
    K = _taylor_order(r, 1e-17)
    j = np.arange(K + 1)
    log_fact = np.array([math.lgamma(k + 1.0) for k in j])

    def integrand(tau):
        phi = wright_phi(beta, tau)
        with np.errstate(divide="ignore"):
            logt = np.log(tau * T)
        powers = np.exp(j[None, :] * logt[:, None] - log_fact[None, :]
                        + tau[:, None] * T * basis.d)
        powers[tau == 0, 1:] = 0.0
        weight = phi * (beta * tau if first_moment else 1.0)
        return powers * weight[:, None]

    panels = 64
    m = integrate_fixed(integrand, 0.0, tau_max, panels=panels)
    m_half = integrate_fixed(integrand, 0.0, tau_max, panels=panels // 2)
    quad_err = float(np.abs(m - m_half) @ basis.wnorm ** j)
    # mass beyond tau_max: at most 1e-10 times the norm of exp(tau T b_eff)
    growth = math.exp(max(0.0, tau_max * T * (basis.d + basis.wnorm)))
    truncation = 1e-10 * growth * (tau_max * beta if first_moment else 1.0)
    return basis, m, quad_err + truncation


def resolvent_S_by_subordination(params, t):
    """``S_beta(t)`` by Wright subordination (independent of the series route)."""
    if params.beta >= 1.0:
        raise ValueError("subordination needs beta < 1")
    if t <= 0:
        raise ValueError("t must be positive")
    basis, m, err = _wright_weights(params, t, first_moment=False)
    return basis.combine(m, err)


def integral_resolvent_P_by_subordination(params, t):
    """``P_beta(t)`` by Wright subordination, as an :class:`IntegralResolventKernel`."""
    if params.beta >= 1.0:
        raise ValueError("subordination needs beta < 1")
    if t <= 0:
        raise ValueError("t must be positive")
    basis, m, err = _wright_weights(params, t, first_moment=True)
    return IntegralResolventKernel(t, t ** (params.beta - 1.0), basis.combine(m, err))


# -- resolvent equation ------------------------------------------------------

def _S_coefficients(beta, basis, s, J):
    """Weights of ``S_beta(s)`` in the power basis, ``j = 0..J``."""
    T = s ** beta
    return ml_taylor_coefficients(beta, 1.0, T * basis.d, J, T, basis.wnorm)


def resolvent_equation_residual(params, t, quad_tol=None, nodes=48):
    """l1 norm of ``S(t)x - x - int_0^t g_beta(t-s) b_eff * S(s)x ds`` at ``x = delta_0``.

    ``g_beta(u) = u^(beta-1) / Gamma(beta)``.  The integral is split at
    ``t/2``; on the left ``s = v^(1/beta)`` removes the ``s^beta``
    behaviour of ``S`` and on the right ``u = (t-s)^beta`` absorbs the
    singular kernel, leaving smooth integrands for Gauss-Legendre.  Every
    ``S(s)`` is expanded in one shared power basis, so only scalar
    coefficients are integrated.  Returns ``(residual, quadrature_estimate)``
    where the estimate compares ``nodes`` against ``nodes / 2`` points.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    beta = params.beta
    b_eff = params.b_eff
    basis = PowerBasis(b_eff, params.N)
    T = t ** beta
    tol = params.ctl.abs_tol if quad_tol is None else quad_tol
    weights_t, remainder = recentred_weights(beta, 1.0, T * basis.d, T, basis.wnorm,
                                             min(tol, params.ctl.abs_tol))
    J = weights_t.size - 1
    gamma_b = math.gamma(beta)

    def integral(count):
        x, w = np.polynomial.legendre.leggauss(count)
        total = np.zeros(J + 1)
        # left half: s = v^(1/beta), v in [0, (t/2)^beta]
        vmax = (0.5 * t) ** beta
        for xi, wi in zip(x, w):
            v = 0.5 * vmax * (xi + 1.0)
            s = v ** (1.0 / beta)
            jac = 0.5 * vmax * s ** (1.0 - beta) / beta
            g = (t - s) ** (beta - 1.0) / gamma_b
            total += wi * jac * g * _S_coefficients(beta, basis, s, J)
        # right half: u = (t - s)^beta, u in [0, (t/2)^beta]; g ds = du / Gamma(beta+1)
        for xi, wi in zip(x, w):
            u = 0.5 * vmax * (xi + 1.0)
            s = t - u ** (1.0 / beta)
            total += wi * 0.5 * vmax / (beta * gamma_b) * _S_coefficients(beta, basis, s, J)
        return total

    fine = integral(nodes)
    coarse = integral(nodes // 2)
    S_t = basis.combine(weights_t, remainder)
    rhs = convolve(b_eff, basis.combine(fine), params.policy)
    diff = (S_t - delta(0) - rhs).restrict(params.N)
    powers = basis.wnorm ** np.arange(J + 1)
    estimate = l1_norm(b_eff) * float(np.abs(fine - coarse) @ powers)
    return l1_norm(diff), estimate


__all__ = [
    "IntegralResolventKernel", "PowerBasis", "ResolventParams",
    "integral_resolvent_P_by_subordination", "integral_resolvent_P_kernel",
    "resolvent_S_by_subordination", "resolvent_S_kernel", "resolvent_equation_residual",
    "scalar_resolvents",
]
