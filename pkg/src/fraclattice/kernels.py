"""Convolution kernels of the lattice difference operators and their fractional powers.

Four families are built in:

* ``discrete-laplacian``: ``Delta_d f(n) = f(n+1) - 2 f(n) + f(n-1)``
* ``forward-euler``:      ``-Delta f(n) = f(n) - f(n+1)``
* ``backward-euler``:     ``nabla f(n) = f(n) - f(n-1)``
* ``two-step-laplacian``: ``Delta_dd f(n) = f(n+2) - 2 f(n) + f(n-2)``

Convolution is ``(K * f)(n) = sum_k K(n - k) f(k)`` and the symbol of a
kernel is ``sum_n K(n) e^{i n theta}``, so ``K(n)`` is recovered as
``(1/2pi) int symbol(theta) e^{-i n theta} dtheta``.

Fractional powers are taken of the nonnegative operators ``-Delta_d``,
``-Delta``, ``nabla`` and ``-Delta_dd``.  The "power" form is the kernel of
that power, the "generator" form its negative (the generator of a Markov
semigroup).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .quadrature import integrate
from .seq_algebra import LatticeSeq, l1_norm
from .special_functions import gamma_real


class Family(enum.Enum):
    DISCRETE_LAPLACIAN = "discrete-laplacian"
    FORWARD_EULER = "forward-euler"
    BACKWARD_EULER = "backward-euler"
    TWO_STEP_LAPLACIAN = "two-step-laplacian"
    CUSTOM = "custom"


class Sign(enum.Enum):
    GENERATOR = "generator-form"
    POWER = "power-form"


NAMED_FAMILIES = (Family.DISCRETE_LAPLACIAN, Family.FORWARD_EULER,
                  Family.BACKWARD_EULER, Family.TWO_STEP_LAPLACIAN)


class InvalidSpecError(ValueError):
    """An operator specification is out of range or inconsistent."""


@dataclass(frozen=True)
class OperatorSpec:
    """A convolution operator family together with a fractional exponent.

    For ``family = custom`` the supplied kernel is read as the generator
    kernel ``b`` of the operator at power one, so only ``alpha = 1`` is
    accepted for it.
    """

    family: Family
    alpha: float = 1.0
    custom_kernel: LatticeSeq | None = None
    sign: Sign = Sign.POWER

    def __post_init__(self):
        try:
            object.__setattr__(self, "family", Family(self.family))
            object.__setattr__(self, "sign", Sign(self.sign))
        except ValueError as exc:
            raise InvalidSpecError(str(exc)) from None
        alpha = float(self.alpha)
        if not 0.0 < alpha <= 1.0 or not math.isfinite(alpha):
            raise InvalidSpecError(f"alpha must lie in (0, 1], got {self.alpha}")
        object.__setattr__(self, "alpha", alpha)
        if self.family is Family.CUSTOM:
            if self.custom_kernel is None:
                raise InvalidSpecError("the custom family needs a kernel")
            if not math.isfinite(l1_norm(self.custom_kernel) + self.custom_kernel.tail):
                raise InvalidSpecError("custom kernels must have finite l1 norm")
        elif self.custom_kernel is not None:
            raise InvalidSpecError("custom_kernel is only allowed for the custom family")

    def with_sign(self, sign):
        return OperatorSpec(self.family, self.alpha, self.custom_kernel, Sign(sign))


_BASE = {
    Family.DISCRETE_LAPLACIAN: {-1: 1.0, 0: -2.0, 1: 1.0},
    Family.FORWARD_EULER: {0: 1.0, -1: -1.0},
    Family.BACKWARD_EULER: {0: 1.0, 1: -1.0},
    Family.TWO_STEP_LAPLACIAN: {-2: 1.0, 0: -2.0, 2: 1.0},
}


def base_kernel(family):
    """Kernel of ``Delta_d``, ``-Delta``, ``nabla`` or ``Delta_dd``."""
    family = Family(family)
    if family is Family.CUSTOM:
        raise InvalidSpecError("custom kernels have no built-in base kernel")
    return LatticeSeq.from_dict(_BASE[family], mass=0.0)


def base_generator(family):
    """Generator-form kernel of the first power (a Markov generator)."""
    family = Family(family)
    k = base_kernel(family)
    # the Laplacians are already generators; the Euler kernels are their negatives
    if family in (Family.FORWARD_EULER, Family.BACKWARD_EULER):
        return -k
    return k


def _laplacian_half(alpha, N):
    """``|K_d|`` on ``0..N`` and the exact one-sided tail beyond ``N``.

    ``K(0) = Gamma(2a+1)/Gamma(1+a)^2`` and ``K(n+1)/K(n) = (n-a)/(n+a+1)``.
    Telescoping ``a_n (n-a) = a_{n+1} (n+1+a)`` gives
    ``sum_{n>N} |K(n)| = |K(N)| (N - a) / (2a)``.
    """
    n = np.arange(N)
    ratios = (n - alpha) / (n + alpha + 1.0)
    k0 = gamma_real(2.0 * alpha + 1.0) / gamma_real(1.0 + alpha) ** 2
    vals = k0 * np.concatenate(([1.0], np.cumprod(ratios)))
    tail = abs(vals[-1]) * max(N - alpha, 0.0) / (2.0 * alpha)
    return vals, tail


def _euler_half(alpha, N):
    """Binomial weights ``(-1)^m C(a, m)`` for ``m = 0..N`` and the tail beyond ``N``.

    Here ``a_{m+1} (m+1) = a_m (m - a)`` telescopes to
    ``sum_{m>N} |K(m)| = |K(N)| (N - a) / a``.
    """
    m = np.arange(N)
    vals = np.concatenate(([1.0], np.cumprod((m - alpha) / (m + 1.0))))
    tail = abs(vals[-1]) * max(N - alpha, 0.0) / alpha
    return vals, tail


def fractional_kernel(spec, N):
    """Kernel of the ``alpha``-th power on ``[-N, N]``.

    Entries come from pole-free term-ratio recurrences seeded at the origin.
    The stored ``tail`` is the exact l1 mass beyond the window (obtained by
    telescoping the recurrence) with a relative safety margin for rounding.
    """
    if N < 1:
        raise InvalidSpecError("N must be >= 1")
    sgn = -1.0 if spec.sign is Sign.GENERATOR else 1.0
    alpha = spec.alpha
    fam = spec.family
    if fam is Family.CUSTOM:
        if alpha != 1.0:
            raise InvalidSpecError("fractional powers of custom kernels are not supported")
        gen = spec.custom_kernel
        k = gen if spec.sign is Sign.GENERATOR else -gen
        return k.restrict(N)
    out = np.zeros(2 * N + 1)
    if fam is Family.DISCRETE_LAPLACIAN:
        half, tail = _laplacian_half(alpha, N)
        out[N:] = half
        out[:N + 1] = half[::-1]
        tail *= 2.0
    elif fam is Family.TWO_STEP_LAPLACIAN:
        M = N // 2
        half, tail = _laplacian_half(alpha, M)
        out[N::2] = half
        out[N::-2] = half
        tail *= 2.0
    else:
        half, tail = _euler_half(alpha, N)
        if fam is Family.FORWARD_EULER:
            out[:N + 1] = half[::-1]   # supported on n <= 0
        else:
            out[N:] = half             # supported on n >= 0
    if alpha == 1.0:
        tail = 0.0
    tail *= 1.0 + 1e-12
    return LatticeSeq(-N, sgn * out, tail, 0.0)


def symbol(spec, theta):
    """The Fourier symbol of the power-form (or generator-form) kernel."""
    theta = np.asarray(theta, dtype=float)
    a = spec.alpha
    fam = spec.family
    if fam is Family.DISCRETE_LAPLACIAN:
        s = (4.0 * np.sin(0.5 * theta) ** 2) ** a + 0j
    elif fam is Family.TWO_STEP_LAPLACIAN:
        s = (4.0 * np.sin(theta) ** 2) ** a + 0j
    elif fam is Family.FORWARD_EULER:
        s = (1.0 - np.exp(-1j * theta)) ** a
    elif fam is Family.BACKWARD_EULER:
        s = (1.0 - np.exp(1j * theta)) ** a
    else:
        raise InvalidSpecError("custom kernels have no closed-form symbol")
    return -s if spec.sign is Sign.GENERATOR else s


def kernel_by_fourier(spec, n, quad_tol=1e-12):
    """``K(n) = (1/2pi) int_{-pi}^{pi} symbol(theta) e^{-i n theta} dtheta`` by quadrature.

    The range is split at the zeros of the symbol, where it is not smooth.
    """
    n = int(n)
    breaks = [-math.pi, 0.0, math.pi]
    if spec.family is Family.TWO_STEP_LAPLACIAN:
        breaks = [-math.pi, -0.5 * math.pi, 0.0, 0.5 * math.pi, math.pi]

    def f(theta):
        return np.real(symbol(spec, theta) * np.exp(-1j * n * theta))

    total = 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        v, _ = integrate(f, lo, hi, abs_tol=quad_tol, rel_tol=0.0, strict=True)
        total += v
    return total / (2.0 * math.pi)
