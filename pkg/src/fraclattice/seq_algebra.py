"""The convolution algebra l1(Z) on finite windows.

A :class:`LatticeSeq` stores a real sequence on a contiguous block of
indices together with a certified l1 bound on everything it does not store
(``tail``).  Products are discrete convolutions; the unit is ``delta(0)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

# largest support length a single product may materialise
MAX_SUPPORT = 1 << 24


class WindowOverflowError(ValueError):
    """The exact support of a result is too large to represent."""


class WindowMode(enum.Enum):
    TRUNCATE = "truncate"
    GROW = "grow"


@dataclass(frozen=True)
class WindowPolicy:
    """How products are cut back to a window ``[-half_width, half_width]``.

    In ``GROW`` mode supports are kept exactly and ``half_width`` is unused
    except as a sanity bound; in ``TRUNCATE`` mode entries outside the window
    are dropped and their l1 mass is added to the result's tail bound.
    """

    half_width: int
    mode: WindowMode = WindowMode.TRUNCATE

    def __post_init__(self):
        if self.half_width < 1:
            raise ValueError("half_width must be >= 1")
        object.__setattr__(self, "mode", WindowMode(self.mode))

    @classmethod
    def truncate(cls, half_width):
        return cls(half_width, WindowMode.TRUNCATE)

    @classmethod
    def grow(cls, half_width=MAX_SUPPORT // 2):
        return cls(half_width, WindowMode.GROW)


def _readonly(values):
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class LatticeSeq:
    """A real sequence on Z, stored on ``offset .. offset + len(values) - 1``.

    ``tail`` bounds, in l1, the difference between the represented element
    and the stored values (zero for exactly finitely supported data).
    ``mass`` is the exact sum over all of Z when it is known independently of
    the stored window (e.g. zero for the fractional difference kernels); it is
    carried through algebra operations and ``None`` otherwise.
    """

    offset: int
    values: np.ndarray
    tail: float = 0.0
    mass: float | None = field(default=None)

    def __post_init__(self):
        vals = _readonly(np.atleast_1d(self.values))
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("values must be a nonempty 1-D sequence")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")
        if not self.tail >= 0:
            raise ValueError("tail bound must be nonnegative")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "offset", int(self.offset))
        object.__setattr__(self, "tail", float(self.tail))

    # -- construction -------------------------------------------------
    @classmethod
    def from_dict(cls, entries, tail=0.0, mass=None):
        """Build from ``{index: value}``; missing indices inside the span are 0."""
        if not entries:
            raise ValueError("need at least one entry")
        lo, hi = min(entries), max(entries)
        vals = np.zeros(hi - lo + 1)
        for n, v in entries.items():
            vals[n - lo] = v
        return cls(lo, vals, tail, mass)

    @classmethod
    def from_window(cls, values, tail=0.0, mass=None):
        """Build from values on a symmetric window ``[-N, N]``."""
        values = np.asarray(values, dtype=float)
        if values.size % 2 != 1:
            raise ValueError("a symmetric window needs an odd number of entries")
        return cls(-(values.size // 2), values, tail, mass)

    @classmethod
    def zero(cls):
        return cls(0, [0.0], 0.0, 0.0)

    # -- access -------------------------------------------------------
    @property
    def stop(self):
        """One past the last stored index."""
        return self.offset + self.values.size

    @property
    def indices(self):
        return np.arange(self.offset, self.stop)

    def __len__(self):
        return self.values.size

    def __call__(self, n):
        n = np.asarray(n)
        k = n - self.offset
        inside = (k >= 0) & (k < self.values.size)
        out = np.where(inside, self.values[np.clip(k, 0, self.values.size - 1)], 0.0)
        return float(out) if out.ndim == 0 else out

    def window(self, half_width):
        """Stored values restricted/padded to ``[-half_width, half_width]``."""
        return self(np.arange(-half_width, half_width + 1))

    def restrict(self, half_width):
        """The element cut to ``[-N, N]``, discarded mass moved into the tail."""
        kept = self.window(half_width)
        dropped = float(np.sum(np.abs(self.values))) - float(np.sum(np.abs(kept)))
        return LatticeSeq(-half_width, kept, self.tail + max(dropped, 0.0), self.mass)

    def trimmed(self):
        """Drop exact zeros at both ends (keeps at least one entry)."""
        nz = np.flatnonzero(self.values)
        if nz.size == 0:
            return LatticeSeq(0, [0.0], self.tail, self.mass)
        return LatticeSeq(self.offset + nz[0], self.values[nz[0]:nz[-1] + 1], self.tail,
                          self.mass)

    def sum(self):
        return math.fsum(self.values)

    def equals(self, other, atol=0.0):
        """Entrywise comparison over the union of both supports."""
        lo = min(self.offset, other.offset)
        hi = max(self.stop, other.stop)
        idx = np.arange(lo, hi)
        return bool(np.all(np.abs(self(idx) - other(idx)) <= atol))

    # -- linear structure ---------------------------------------------
    def _combine(self, other, sign):
        lo = min(self.offset, other.offset)
        hi = max(self.stop, other.stop)
        idx = np.arange(lo, hi)
        mass = None
        if self.mass is not None and other.mass is not None:
            mass = self.mass + sign * other.mass
        return LatticeSeq(lo, self(idx) + sign * other(idx), self.tail + other.tail, mass)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __mul__(self, scalar):
        scalar = float(scalar)
        mass = None if self.mass is None else scalar * self.mass
        return LatticeSeq(self.offset, scalar * self.values, abs(scalar) * self.tail, mass)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __repr__(self):
        return (f"LatticeSeq(offset={self.offset}, len={len(self)}, "
                f"tail={self.tail:.3e}, mass={self.mass})")


def delta(n=0):
    """The Kronecker sequence concentrated at ``n``."""
    return LatticeSeq(n, [1.0], 0.0, 1.0)


def l1_norm(a):
    return math.fsum(np.abs(a.values))


def lp_norm(a, p):
    if p == math.inf:
        return sup_norm(a)
    if p < 1:
        raise ValueError("p must lie in [1, inf]")
    return math.fsum(np.abs(a.values) ** p) ** (1.0 / p)


def sup_norm(a):
    return float(np.max(np.abs(a.values)))


def convolve(a, b, policy, method="direct"):
    """Discrete convolution ``c(n) = sum_j a(n - j) b(j)``.

    ``method="direct"`` is the reference O(len(a) len(b)) summation; ``"fft"``
    is an optional fast path.
    """
    length = len(a) + len(b) - 1
    if length > MAX_SUPPORT:
        raise WindowOverflowError(f"product support of length {length} exceeds {MAX_SUPPORT}")
    if method == "direct":
        vals = np.convolve(a.values, b.values)
    elif method == "fft":
        vals = fftconvolve(a.values, b.values)
    else:
        raise ValueError(f"unknown method {method!r}")
    offset = a.offset + b.offset
    na, nb = l1_norm(a), l1_norm(b)
    tail = a.tail * nb + b.tail * na + a.tail * b.tail
    mass = None if a.mass is None or b.mass is None else a.mass * b.mass
    c = LatticeSeq(offset, vals, tail, mass)
    if policy.mode is WindowMode.GROW:
        if max(abs(c.offset), abs(c.stop - 1)) > policy.half_width:
            raise WindowOverflowError("result support exceeds the policy bound")
        return c
    return _truncate(c, policy.half_width)


def _truncate(c, N):
    lo, hi = max(c.offset, -N), min(c.stop, N + 1)
    if lo >= hi:
        return LatticeSeq(-N, np.zeros(2 * N + 1), c.tail + l1_norm(c), c.mass)
    kept = c.values[lo - c.offset:hi - c.offset]
    dropped = math.fsum(np.abs(c.values[:lo - c.offset])) + math.fsum(
        np.abs(c.values[hi - c.offset:]))
    return LatticeSeq(lo, kept, c.tail + dropped, c.mass)


def power(a, j, policy):
    """``a^j`` under convolution; ``a^0 = delta(0)``."""
    if j < 0:
        raise ValueError("j must be nonnegative")
    result = delta(0)
    for _ in range(j):
        result = convolve(a, result, policy)
    return result


def split_diagonal(a):
    """Return ``(d, w)`` with ``a = d * delta(0) + w`` and ``w(0) = 0``."""
    d = a(0)
    if a.offset <= 0 < a.stop:
        vals = a.values.copy()
        vals[-a.offset] = 0.0
        w_mass = None if a.mass is None else a.mass - d
        return d, LatticeSeq(a.offset, vals, a.tail, w_mass)
    return d, a


def power_table(w, count, policy, method="direct"):
    """Powers ``w^0 .. w^count`` on the policy window.

    Returns ``(P, errs)``: ``P[j]`` holds ``w^j`` on ``[-N, N]`` and
    ``errs[j]`` bounds its l1 distance to the exact power (window
    truncation plus the input tail, propagated).
    """
    N = policy.half_width
    if policy.mode is not WindowMode.TRUNCATE:
        raise ValueError("power tables need a truncating window")
    wn = l1_norm(w) + w.tail
    base = w.restrict(2 * N)
    kernel = base.values
    k_off = base.offset
    P = np.zeros((count + 1, 2 * N + 1))
    P[0, N] = 1.0
    errs = np.zeros(count + 1)
    conv = np.convolve if method == "direct" else fftconvolve
    for j in range(1, count + 1):
        full = conv(kernel, P[j - 1])
        start = -k_off  # position of n = -N in the full product
        kept = full[start:start + 2 * N + 1]
        dropped = math.fsum(np.abs(full)) - math.fsum(np.abs(kept))
        P[j] = kept
        # error recursion: e_j <= |w| e_{j-1} + |w^{j-1}| tail(w) + dropped
        errs[j] = wn * errs[j - 1] + math.fsum(np.abs(P[j - 1])) * base.tail + max(dropped, 0.0)
    return P, errs


def exp_element(a, t, tol, policy, method="direct"):
    """``exp(t a) = sum_k t^k a^k / k!`` in the convolution algebra.

    The diagonal is split off first, ``exp(t a) = e^{t a(0)} exp(t w)``, so a
    generator with nonnegative off-diagonal entries is summed with
    nonnegative terms only.  The number of terms is the least ``K`` whose
    remainder bound ``e^{t a(0)} sum_{k>K} (t |w|_1)^k / k!`` is below ``tol``;
    the bound, window losses and the input tail are recorded in ``tail``.
    ``method`` selects the convolution used for the powers in truncate mode.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if tol <= 0:
        raise ValueError("tol must be positive")
    d, w = split_diagonal(a)
    wn = l1_norm(w)
    r = t * wn
    scale = math.exp(t * d)
    K, remainder = _taylor_terms(r, tol / max(scale, 1e-300))
    mass = None if a.mass is None else math.exp(t * a.mass)
    if policy.mode is WindowMode.GROW:
        term = delta(0)
        acc = delta(0)
        comp = None
        for k in range(1, K + 1):
            term = convolve(w, term, policy) * (t / k)
            acc, comp = _kahan_add(acc, term, comp)
        out = acc * scale
        perturb = scale * math.exp(r) * math.expm1(t * a.tail) if a.tail else 0.0
        return LatticeSeq(out.offset, out.values, scale * remainder + perturb + out.tail, mass)
    N = policy.half_width
    P, errs = power_table(w, K, policy, method)
    coef = np.array([t ** k / math.factorial(k) for k in range(K + 1)])
    vals = _kahan_dot(coef, P)
    # errs already carries the input tail through the powers
    trunc_err = float(np.dot(coef, errs))
    tail = scale * (remainder + trunc_err)
    return LatticeSeq(-N, scale * vals, tail, mass)


def _taylor_terms(r, tol, k_max=100000):
    """Least K with sum_{k>K} r^k/k! <= tol, and that remainder bound."""
    term = 1.0
    k = 0
    while True:
        k += 1
        term *= r / k
        if k > r:
            # geometric bound on the remainder once ratios fall below 1
            q = r / (k + 1)
            rem = term * q / (1.0 - q) if q < 1 else math.inf
            if rem <= tol:
                return k, rem
        if k > k_max:
            raise RuntimeError("Taylor series did not reach the requested tolerance")


def _kahan_add(acc, term, comp):
    # compensated accumulation over the union of supports
    lo = min(acc.offset, term.offset)
    hi = max(acc.stop, term.stop)
    idx = np.arange(lo, hi)
    s = acc(idx)
    c = np.zeros_like(s) if comp is None else comp(idx)
    y = term(idx) - c
    tot = s + y
    c = (tot - s) - y
    return LatticeSeq(lo, tot, acc.tail + term.tail), LatticeSeq(lo, c)


def _kahan_dot(coef, rows):
    """Compensated ``sum_k coef[k] * rows[k]`` along the first axis."""
    s = np.zeros(rows.shape[1:])
    c = np.zeros_like(s)
    for k in range(coef.size):
        y = coef[k] * rows[k] - c
        tot = s + y
        c = (tot - s) - y
        s = tot
    return s
