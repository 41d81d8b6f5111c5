"""Scalar special functions: Gamma, Wright, Mittag-Leffler, Levy, Bessel.

Wright's function here is the one-parameter (Mainardi) function

    Phi_a(x) = sum_n (-x)^n / (n! Gamma(1 - a - a n)),   0 < a < 1,

a probability density on [0, inf).  Its power series is exact but loses all
accuracy to cancellation once the terms grow large, so beyond that point it is
evaluated from Kanter's real integral representation of the one-sided stable
law, whose integrand is positive:

    Phi_a(x) = x^(a/(1-a)) / (pi (1-a)) * int_0^pi A(u) exp(-A(u) x^(1/(1-a))) du,
    A(u) = sin(a u)^(a/(1-a)) sin((1-a) u) / sin(u)^(1/(1-a)).

The one-sided stable (Levy) density with Laplace transform exp(-t s^a) is
``a t lam^(-1-a) Phi_a(t lam^(-a))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy.special import gammaln

from .quadrature import integrate

from .seq_algebra import (
    LatticeSeq,
    WindowMode,
    convolve,
    delta,
    l1_norm,
    power_table,
    split_diagonal,
)

EPS = np.finfo(float).eps


class SeriesConvergenceError(RuntimeError):
    """A series ran out of terms before meeting its tolerance."""


class PoleError(ValueError):
    """Gamma evaluated at a nonpositive integer."""


class EvaluationError(RuntimeError):
    """An internal accuracy target could not be met."""


@dataclass(frozen=True)
class SeriesControl:
    abs_tol: float = 1e-14
    max_terms: int = 5000

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")


DEFAULT_CONTROL = SeriesControl()


def gamma_real(x):
    """Real Gamma function; raises :class:`PoleError` at 0, -1, -2, ..."""
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise PoleError(f"Gamma has a pole at {x}")
    return math.gamma(x)


def _rgamma_signed_log(y):
    """``(log|1/Gamma(y)|, sign)`` elementwise, with 1/Gamma = 0 at the poles."""
    y = np.asarray(y, dtype=float)
    pole = (y <= 0) & (y == np.floor(y))
    logmag = np.where(pole, -np.inf, -gammaln(np.where(pole, 1.0, y)))
    # sign of Gamma(y) for negative non-integers is (-1)^ceil(-y)
    neg = (y < 0) & ~pole
    sign = np.where(neg, np.where(np.ceil(-y) % 2 == 0, 1.0, -1.0), 1.0)
    sign = np.where(pole, 0.0, sign)
    return logmag, sign


# -- Wright / Mainardi function -------------------------------------------

def _wright_series_terms(alpha, x, n_terms):
    n = np.arange(n_terms)
    logmag, sign = _rgamma_signed_log(1.0 - alpha - alpha * n)
    if x == 0:
        logt = np.where(n == 0, logmag, -np.inf)
    else:
        logt = n * math.log(x) - gammaln(n + 1.0) + logmag
    with np.errstate(over="ignore"):  # huge terms are rejected by the caller
        return sign * (-1.0) ** n * np.exp(logt)


def _wright_series(alpha, x, ctl):
    """Series value and a rounding-error estimate (inf if it did not converge)."""
    terms = _wright_series_terms(alpha, x, min(ctl.max_terms, 4000))
    mags = np.abs(terms)
    big = np.flatnonzero(mags >= 1e-3 * ctl.abs_tol)
    if big.size and big[-1] >= mags.size - 8:
        return math.nan, math.inf
    stop = int(big[-1]) + 1 if big.size else 1
    value = math.fsum(terms[:stop])
    # each term is exp(log t) with log t accurate to a few ulps of |log t|
    m = mags[:stop]
    with np.errstate(divide="ignore"):
        amplification = 4.0 + 2.0 * np.abs(np.where(m > 0, np.log(np.where(m > 0, m, 1.0)), 0.0))
    return value, EPS * math.fsum(m * amplification)


def _kanter_log_a(u, alpha):
    return ((alpha / (1.0 - alpha)) * np.log(np.sin(alpha * u))
            + np.log(np.sin((1.0 - alpha) * u))
            - np.log(np.sin(u)) / (1.0 - alpha))


def _kanter_exponent(u, alpha, X, with_prefactor):
    la = _kanter_log_a(u, alpha)
    with np.errstate(over="ignore"):
        # A overflows near pi when alpha is close to 1; the integrand is then 0
        return (la if with_prefactor else 0.0) - X * np.exp(la)


def _kanter_probe():
    # geometric towards both ends, where the peak of the integrand can be narrow
    ends = np.geomspace(1e-14, 0.5, 400)
    middle = np.linspace(0.5, math.pi - 0.5, 200)[1:-1]
    return np.concatenate((ends, middle, math.pi - ends[::-1]))


_PROBE = _kanter_probe()


def _kanter_batch(alpha, X, with_prefactor, rel_tol=1e-13, log_pref=None):
    """``int_0^pi A^p exp(-A X) du`` for an array of X > 0 (p=1 or 0).

    Returns ``(value, log_scale)`` with the integral equal to
    ``value * exp(log_scale)``.  ``A`` increases on ``(0, pi)``, so the
    integrand is unimodal; each component is integrated only where it is
    within a factor ``e^-45`` of its peak, by composite Gauss-Legendre with
    the panel count doubled until two successive levels agree.  Components
    whose result times ``exp(log_pref)`` would underflow are returned as 0.
    """
    X = np.asarray(X, dtype=float)
    expo = _kanter_exponent(_PROBE[:, None], alpha, X[None, :], with_prefactor)
    log_scale = np.max(expo, axis=0)
    live = expo >= (log_scale - 45.0)[None, :]
    first = np.argmax(live, axis=0)
    last = live.shape[0] - 1 - np.argmax(live[::-1], axis=0)
    grid = np.concatenate(([0.0], _PROBE, [math.pi]))
    lo = grid[first]            # one probe step before the first live point
    hi = grid[last + 2]         # one probe step after the last live point
    negligible = np.zeros(X.shape, dtype=bool)
    if log_pref is not None:
        negligible = log_scale + log_pref < -760.0
    x, w = np.polynomial.legendre.leggauss(20)
    value = None
    converged = np.zeros(X.shape, dtype=bool)
    for panels in (4, 8, 16, 32, 64, 128, 256):
        edges = np.linspace(0.0, 1.0, panels + 1)
        half = 0.5 / panels
        s = (half * x[None, :] + 0.5 * (edges[1:] + edges[:-1])[:, None]).ravel()
        ws = np.tile(half * w, panels)
        u = lo[None, :] + (hi - lo)[None, :] * s[:, None]
        vals = np.exp(_kanter_exponent(u, alpha, X[None, :], with_prefactor)
                      - log_scale[None, :])
        previous, value = value, (hi - lo) * (ws @ vals)
        if previous is not None:
            converged = negligible | (np.abs(value - previous) <= rel_tol * np.abs(value))
            if np.all(converged):
                value[negligible] = 0.0
                return value, log_scale
    # sharp edges (tiny X without the prefactor) go to the adaptive rule
    bad = np.flatnonzero(~converged)
    for i in bad:
        def integrand(uu, i=i):
            return np.exp(_kanter_exponent(uu, alpha, X[i], with_prefactor) - log_scale[i])
        v, err = integrate(integrand, 0.0, math.pi, abs_tol=rel_tol * abs(value[i]),
                           rel_tol=rel_tol, max_panels=4000)
        if not err <= 1e3 * rel_tol * abs(v):
            raise EvaluationError("Kanter integral did not converge")
        value[i] = v
    return value, log_scale


def _wright_kanter(alpha, x):
    x = np.asarray(x, dtype=float)
    X = x ** (1.0 / (1.0 - alpha))
    logpref = (alpha / (1.0 - alpha)) * np.log(x) - math.log(math.pi * (1.0 - alpha))
    val, log_scale = _kanter_batch(alpha, X, True, log_pref=logpref)
    return val * np.exp(log_scale + logpref)


def wright_phi(alpha, x, ctl=DEFAULT_CONTROL):
    """Wright (Mainardi) function ``Phi_alpha(x)`` for ``x >= 0``.

    Accepts a scalar or an array.  The power series is used wherever its
    rounding error is below ``ctl.abs_tol``; elsewhere the Kanter integral.
    Results within ``abs_tol`` below zero are clamped to zero.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs < 0):
        raise ValueError("x must be nonnegative")
    out = np.empty_like(xs)
    deferred = []
    for i, xi in enumerate(xs):
        if xi <= 8.0:
            value, err = _wright_series(alpha, xi, ctl)
            if err <= 0.1 * ctl.abs_tol:
                out[i] = value
                continue
        deferred.append(i)
    if deferred:
        out[deferred] = _wright_kanter(alpha, xs[deferred])
    if np.any(out < -ctl.abs_tol):
        raise EvaluationError("Wright function evaluated below -abs_tol")
    out = np.maximum(out, 0.0)
    return float(out[0]) if np.ndim(x) == 0 else out


def wright_mass(alpha, x, ctl=DEFAULT_CONTROL):
    """``int_0^x Phi_alpha``: the series for small x, else ``1 - wright_tail``."""
    x = float(x)
    if x <= 0:
        return 0.0
    n = np.arange(min(ctl.max_terms, 4000))
    logmag, sign = _rgamma_signed_log(1.0 - alpha - alpha * n)
    terms = sign * (-1.0) ** n * np.exp((n + 1) * math.log(x) - gammaln(n + 2.0) + logmag)
    mags = np.abs(terms)
    value = math.fsum(terms)
    rounding = 4.0 * EPS * math.fsum(mags)
    if mags[-1] < EPS * ctl.abs_tol and rounding <= max(1e-3 * ctl.abs_tol, 1e-12 * abs(value)):
        return value
    return 1.0 - wright_tail(alpha, x)


def wright_tail(alpha, x):
    """``int_x^inf Phi_alpha`` via ``(1/pi) int_0^pi exp(-A(u) x^(1/(1-alpha))) du``."""
    x = float(x)
    if x <= 0:
        return 1.0
    X = np.array([x ** (1.0 / (1.0 - alpha))])
    # tails below exp(-760) are returned as 0 rather than resolved
    val, log_scale = _kanter_batch(alpha, X, False, log_pref=np.zeros(1))
    return float(val[0] * math.exp(log_scale[0]) / math.pi)


@lru_cache(maxsize=None)
def wright_cutoff(alpha, mass_tol=1e-10):
    """Smallest (bisected) ``tau`` with ``int_tau^inf Phi_alpha <= mass_tol``."""
    hi = 1.0
    while wright_tail(alpha, hi) > mass_tol:
        hi *= 2.0
    lo = 0.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if wright_tail(alpha, mid) > mass_tol:
            lo = mid
        else:
            hi = mid
    return hi


# -- Levy (one-sided stable) density ---------------------------------------

def levy_density(alpha, t, lam, ctl=DEFAULT_CONTROL):
    """Density of the one-sided stable law with Laplace transform ``exp(-t s^alpha)``."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if t <= 0:
        raise ValueError("t must be positive")
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
    out = np.zeros_like(lam_arr)
    pos = lam_arr > 0
    if np.any(pos):
        lp = lam_arr[pos]
        z = t * lp ** (-alpha)
        out[pos] = alpha * t * lp ** (-1.0 - alpha) * wright_phi(alpha, z, ctl)
    if np.any(out < 0) or not np.all(np.isfinite(out)):
        raise EvaluationError("Levy density evaluation failed")
    return float(out[0]) if np.ndim(lam) == 0 else out


def levy_mass_beyond(alpha, t, L, ctl=DEFAULT_CONTROL):
    """``int_L^inf`` of the Levy density (equals the Wright mass below ``t L^-alpha``)."""
    return wright_mass(alpha, t * L ** (-alpha), ctl)


def levy_mass_below(alpha, t, L):
    """``int_0^L`` of the Levy density."""
    return wright_tail(alpha, t * L ** (-alpha))


# -- Mittag-Leffler ----------------------------------------------------------

def _ml_log_terms(beta, gam, absz, n):
    k = np.arange(n)
    if absz == 0:
        return np.where(k == 0, -gammaln(gam), -np.inf)
    return k * math.log(absz) - gammaln(beta * k + gam)


def _ml_series_length(beta, gam, absz, tol, max_terms):
    """Number of terms after which sum_{k>=n} absz^k / Gamma(beta k + gam) <= tol."""
    n = 64
    while True:
        lt = _ml_log_terms(beta, gam, absz, n + 1)
        if absz == 0:
            return 1
        # log-terms are concave in k, so past the peak the ratios decrease and
        # the tail is bounded by a geometric series
        q = np.exp(np.diff(lt))
        with np.errstate(divide="ignore", invalid="ignore"):
            bound = np.where(q < 1, np.exp(lt[1:]) / (1.0 - q), np.inf)
        ok = np.flatnonzero(bound <= tol)
        if ok.size:
            return int(ok[0]) + 1
        if n >= max_terms:
            raise SeriesConvergenceError("Mittag-Leffler series did not converge")
        n = min(2 * n, max_terms)


def mittag_leffler_scalar(beta, gam, z, ctl=DEFAULT_CONTROL):
    """Two-parameter Mittag-Leffler ``E_{beta,gam}(z) = sum_k z^k / Gamma(beta k + gam)``.

    For ``z <= 0`` the alternating series is summed in floating point when
    its rounding error is below ``ctl.abs_tol`` and otherwise in multiple
    precision with enough digits to absorb the cancellation.
    """
    if not 0.0 < beta <= 1.0:
        raise ValueError("beta must lie in (0, 1]")
    if gam <= 0:
        raise ValueError("gam must be positive")
    z = float(z)
    n = _ml_series_length(beta, gam, abs(z), ctl.abs_tol * 1e-3, ctl.max_terms)
    lt = _ml_log_terms(beta, gam, abs(z), n)
    mags = np.exp(lt)
    sign = np.where(np.arange(n) % 2 == 0, 1.0, -1.0) if z < 0 else np.ones(n)
    if z >= 0 or 4.0 * EPS * math.fsum(mags) <= 0.1 * ctl.abs_tol:
        return math.fsum(sign * mags)
    dps = int(20 + max(lt) / math.log(10) - math.log10(ctl.abs_tol) / 2)
    with mpmath.workdps(dps):
        zz = mpmath.mpf(z)
        b = mpmath.mpf(beta)
        g = mpmath.mpf(gam)
        total = mpmath.fsum(zz ** k * mpmath.rgamma(b * k + g) for k in range(n))
        return float(total)


@lru_cache(maxsize=4096)
def ml_taylor_coefficients_mp(beta, gam, z0, count, scale=1.0, norm=1.0):
    """Multiple-precision version of :func:`ml_taylor_coefficients`.

    Returns ``(coefficients, dps)``: a tuple of ``mpmath.mpf`` values
    ``c_j scale^j`` and the number of digits they were computed with.
    """
    scale = float(scale)
    # sum_j |shifted coefficient| norm^j scale^j is dominated by E(|z0| + scale norm)
    reach = abs(z0) + scale * norm
    n = max(_ml_series_length(beta, gam, reach, 1e-20, 100000), count + 1)
    lt = _ml_log_terms(beta, gam, reach, n)
    dps = int(22 + (max(0.0, float(np.max(lt))) + math.log(n)) / math.log(10))
    with mpmath.workdps(dps):
        b = mpmath.mpf(beta)
        g = mpmath.mpf(gam)
        a = [mpmath.rgamma(b * k + g) for k in range(n)]
        zz = mpmath.mpf(z0)
        s = mpmath.mpf(scale)
        out = []
        # Horner-style Taylor shift; pass i fixes coefficient i
        for i in range(count + 1):
            acc = mpmath.mpf(0)
            for k in range(n - 1, i - 1, -1):
                acc = acc * zz + a[k]
                a[k] = acc
            out.append(a[i] * s ** i)
    return tuple(out), dps


def ml_taylor_coefficients(beta, gam, z0, count, scale=1.0, norm=1.0):
    """Scaled Taylor coefficients ``c_j scale^j`` with ``c_j = E_{beta,gam}^{(j)}(z0) / j!``.

    Returned for ``j = 0 .. count``.  For ``z0 <= 0`` and ``gam >= beta``
    every ``c_j`` is nonnegative (complete monotonicity).  The coefficients
    come from a multiple-precision Taylor shift of the power series, carried
    out with enough digits that ``sum_j |error_j| norm^j`` stays below about
    ``1e-20``.
    """
    scale = float(scale)
    if beta == 1.0 and gam == 1.0:
        if scale == 0.0:
            return np.array([math.exp(z0)] + [0.0] * count)
        return np.array([math.exp(z0 + j * math.log(scale) - math.lgamma(j + 1.0))
                         for j in range(count + 1)])
    out, _ = ml_taylor_coefficients_mp(beta, gam, float(z0), int(count), scale, float(norm))
    coef = np.array([float(c) for c in out])
    if z0 <= 0 and gam >= beta:
        coef = np.maximum(coef, 0.0)
    return coef


def _ml_remainder(beta, gam, r, K):
    """``sum_{k>K} r^k / Gamma(beta k + gam)``."""
    n = _ml_series_length(beta, gam, r, 1e-30, 100000)
    if n <= K + 1:
        return 0.0
    lt = _ml_log_terms(beta, gam, r, n)
    return math.fsum(np.exp(lt[K + 1:]))


def _ml_order(beta, gam, r, tol, max_terms):
    """Least K whose remainder bound is below ``tol``."""
    n = _ml_series_length(beta, gam, r, tol, max_terms)
    lt = _ml_log_terms(beta, gam, r, n + 1)
    tails = np.cumsum(np.exp(lt[::-1]))[::-1]  # tails[k] = sum_{i>=k}
    ok = np.flatnonzero(tails <= tol)
    K = int(ok[0]) - 1 if ok.size else n
    return max(K, 0)


def recentred_weights(beta, gam, z0, T, wnorm, tol, max_terms=5000):
    """Weights ``c_j T^j`` of the expansion of ``E_{beta,gam}`` about ``z0``.

    Returns ``(weights, remainder)`` where ``remainder`` bounds
    ``sum_{j>J} |c_j| (T wnorm)^j``.  When the coefficients are nonnegative
    the remainder is exactly ``E(z0 + T wnorm) - sum_{j<=J} c_j (T wnorm)^j``,
    which gives a sharp stopping rule; otherwise the crude majorant
    ``sum_{k>J} (|z0| + T wnorm)^k / Gamma(beta k + gam)`` is used.
    """
    r = T * wnorm
    if r == 0.0:
        return ml_taylor_coefficients(beta, gam, z0, 0, T, wnorm), 0.0
    if z0 <= 0 and gam >= beta:
        exact = SeriesControl(abs_tol=min(1e-17, 1e-3 * tol), max_terms=100000)
        target = mittag_leffler_scalar(beta, gam, z0 + r, exact)
        J = 16
        while True:
            weights = ml_taylor_coefficients(beta, gam, z0, J, T, wnorm)
            partial = math.fsum(weights * wnorm ** np.arange(J + 1))
            remainder = max(target - partial, 0.0) + 8.0 * EPS * abs(target)
            if remainder <= tol:
                return weights, remainder
            if J >= max_terms:
                raise SeriesConvergenceError("Mittag-Leffler expansion did not converge")
            J = min(2 * J, max_terms)
    bound_r = r + abs(z0)
    J = _ml_order(beta, gam, bound_r, tol, max_terms)
    weights = ml_taylor_coefficients(beta, gam, z0, J, T, wnorm)
    return weights, _ml_remainder(beta, gam, bound_r, J)


def mittag_leffler_element(beta, gam, a, t, ctl, policy):
    """``E_{beta,gam}(t^beta a) = sum_k t^(beta k) a^k / Gamma(beta k + gam)``.

    The series is regrouped about the diagonal: with ``a = d delta_0 + w``,

        E(T a) = sum_j c_j T^j w^j,   c_j = E^{(j)}(T d) / j!,

    so when ``d <= 0`` and ``w >= 0`` every term is nonnegative.  The
    truncation order and its remainder bound come from
    :func:`recentred_weights`.
    """
    if not 0.0 < beta <= 1.0:
        raise ValueError("beta must lie in (0, 1]")
    if t < 0:
        raise ValueError("t must be nonnegative")
    T = t ** beta
    d, w = split_diagonal(a)
    wnorm = l1_norm(w)
    weights, remainder = recentred_weights(beta, gam, T * d, T, wnorm, ctl.abs_tol,
                                           ctl.max_terms)
    J = weights.size - 1
    mass = None
    if a.mass is not None:
        mass = mittag_leffler_scalar(beta, gam, T * a.mass, ctl)
    if policy.mode is WindowMode.GROW:
        perturb = 0.0
        if a.tail:
            # an l1 perturbation of size tail moves sum_j c_j T^j w^j by at most
            # sum_j |c_j| T^j ((|w| + tail)^j - |w|^j)
            z0 = T * d
            if z0 > 0 or gam < beta:
                z0 = -abs(z0)
                lo_arg, hi_arg = T * l1_norm(a), T * (l1_norm(a) + a.tail)
            else:
                lo_arg, hi_arg = z0 + T * wnorm, z0 + T * (wnorm + a.tail)
            perturb = (mittag_leffler_scalar(beta, gam, hi_arg, ctl)
                       - mittag_leffler_scalar(beta, gam, lo_arg, ctl))
        acc = delta(0) * weights[0]
        term = delta(0)
        for j in range(1, J + 1):
            term = convolve(w, term, policy)
            acc = acc + term * weights[j]
        return LatticeSeq(acc.offset, acc.values, acc.tail + remainder + perturb, mass)
    N = policy.half_width
    P, errs = power_table(w, J, policy)
    vals = np.einsum("j,jn->n", weights, P)
    # errs already carries the input tail through the powers
    tail = remainder + float(np.dot(np.abs(weights), errs))
    return LatticeSeq(-N, vals, tail, mass)


# -- modified Bessel ---------------------------------------------------------

def bessel_i(n, x, ctl=DEFAULT_CONTROL):
    """Modified Bessel function ``I_n(x)`` of integer order by its power series."""
    n = abs(int(n))
    x = float(x)
    if x < 0:
        raise ValueError("x must be nonnegative")
    if x == 0:
        return 1.0 if n == 0 else 0.0
    half = 0.5 * x
    term = math.exp(n * math.log(half) - math.lgamma(n + 1.0))
    q = half * half
    total = [term]
    for k in range(1, ctl.max_terms):
        term *= q / (k * (k + n))
        total.append(term)
        ratio = q / ((k + 1) * (k + 1 + n))
        if ratio < 1 and term * ratio / (1.0 - ratio) <= ctl.abs_tol * 1e-3:
            return math.fsum(total)
    raise SeriesConvergenceError("Bessel series did not converge")
