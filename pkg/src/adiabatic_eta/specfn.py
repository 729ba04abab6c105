"""Double-precision special functions: log-gamma, digamma, Hurwitz zeta.

Everything here works on complex arguments embedded from reals; no
arbitrary precision.  ``digamma`` is vectorised over numpy arrays since the
trace-formula integrands evaluate it on whole quadrature grids.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import PoleError

__all__ = [
    "BernoulliTable",
    "BERNOULLI",
    "bernoulli_numbers",
    "bernoulli_poly_coeffs",
    "log_gamma",
    "gamma",
    "digamma",
    "hurwitz_zeta",
    "zeta0",
    "rising",
]


@lru_cache(maxsize=None)
def bernoulli_numbers(n_max: int) -> tuple[Fraction, ...]:
    """Exact B_0..B_{n_max} with the B_1 = -1/2 convention."""
    b = [Fraction(1)]
    for m in range(1, n_max + 1):
        acc = Fraction(0)
        for k in range(m):
            acc += math.comb(m + 1, k) * b[k]
        b.append(-acc / (m + 1))
    return tuple(b)


@lru_cache(maxsize=None)
def bernoulli_poly_coeffs(n: int) -> tuple[Fraction, ...]:
    """Coefficients c_j of B_n(x) = sum_j c_j x^j (index j = power)."""
    b = bernoulli_numbers(n)
    coeffs = [Fraction(0)] * (n + 1)
    for k in range(n + 1):
        coeffs[n - k] += math.comb(n, k) * b[k]
    return tuple(coeffs)


@dataclass(frozen=True)
class BernoulliTable:
    """Even-index Bernoulli numbers B_2, B_4, ..., B_{2K} as floats."""

    values: tuple[float, ...]

    @classmethod
    def build(cls, k_max: int = 30) -> "BernoulliTable":
        if k_max < 30:
            raise ValueError("table must hold at least B_2..B_60")
        b = bernoulli_numbers(2 * k_max)
        return cls(tuple(float(b[2 * k]) for k in range(1, k_max + 1)))

    def __len__(self) -> int:
        return len(self.values)

    def b2k(self, k: int) -> float:
        """B_{2k} for k >= 1."""
        return self.values[k - 1]


BERNOULLI = BernoulliTable.build(30)

# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _is_nonpositive_integer(z: complex) -> bool:
    return z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real)


def log_gamma(z) -> complex:
    """Principal branch of log Gamma(z).

    Lanczos for Re z >= 1/2; smaller real parts are shifted up with the
    recurrence, summing principal logs, which keeps the analytic branch.
    """
    z = complex(z)
    if _is_nonpositive_integer(z):
        raise PoleError(f"log_gamma has a pole at z={z.real:g}")
    shift = 0j
    while z.real < 0.5:
        shift += cmath.log(z)
        z += 1.0
    zm = z - 1.0
    x = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        x += _LANCZOS[i] / (zm + i)
    t = zm + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (zm + 0.5) * cmath.log(t) - t + cmath.log(x) - shift


def gamma(z) -> complex:
    return cmath.exp(log_gamma(z))


_PSI_MIN_ABS = 12.0
_PSI_TERMS = 10


def digamma(z):
    """Complex digamma psi(z) = Gamma'(z)/Gamma(z).

    Reflection for Re z < 1/2, then upward recurrence until |z| >= 12 and the
    Bernoulli asymptotic series.  Accepts scalars or numpy arrays.
    """
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex)).copy()
    bad = (z.imag == 0) & (z.real <= 0) & (z.real == np.floor(z.real))
    if np.any(bad):
        raise PoleError(f"digamma has a pole at z={z[bad][0].real:g}")

    out = np.zeros_like(z)
    refl = z.real < 0.5
    if np.any(refl):
        # psi(z) = psi(1-z) - pi cot(pi z)
        out[refl] -= np.pi / np.tan(np.pi * z[refl])
        z[refl] = 1.0 - z[refl]

    small = np.abs(z) < _PSI_MIN_ABS
    while np.any(small):
        out[small] -= 1.0 / z[small]
        z[small] += 1.0
        small = np.abs(z) < _PSI_MIN_ABS

    inv2 = 1.0 / (z * z)
    series = np.zeros_like(z)
    power = inv2.copy()
    for k in range(1, _PSI_TERMS + 1):
        series += BERNOULLI.b2k(k) / (2 * k) * power
        power = power * inv2
    out += np.log(z) - 0.5 / z - series
    if scalar:
        return complex(out[0])
    return out


def rising(s: complex, n: int) -> complex:
    """Pochhammer symbol (s)_n = s (s+1) ... (s+n-1)."""
    acc = 1.0 + 0j
    for j in range(n):
        acc *= s + j
    return acc


_EM_TERMS = 12
_EM_N0 = 16


def hurwitz_zeta(s, a: float) -> complex:
    """Hurwitz zeta(s, a) = sum_{k>=0} (k+a)^{-s}, continued to s != 1.

    Euler-Maclaurin: direct sum until k + a >= N, then the tail integral and
    corrections through B_24.  N grows with |s| so the correction terms keep
    shrinking geometrically.

    For Re s < 0 the head and tail are each of size x^{1-s} while the result
    can be much smaller, so the relative accuracy degrades like
    eps x^{1-Re s}: about 1e-11 at Re s = -4 and 1e-8 at Re s = -6.
    Non-positive integers are exact.
    """
    s = complex(s)
    a = float(a)
    if a <= 0:
        raise ValueError("hurwitz_zeta needs a > 0")
    if s == 1:
        raise PoleError("hurwitz_zeta has a pole at s=1")
    if s.imag == 0 and s.real <= 0 and s.real == math.floor(s.real):
        # the correction series terminates: exact Bernoulli polynomial
        n_direct = 0
    elif s.real >= 0:
        n_direct = max(0, math.ceil(max(_EM_N0, abs(s) + 16) - a))
    else:
        # keep the shift short: head and tail both scale like x^{1-s}
        n_direct = max(0, math.ceil((abs(s) + 2 * _EM_TERMS) / math.pi + 2 - a))
    head = 0j
    for k in range(n_direct):
        head += cmath.exp(-s * math.log(k + a))
    x = n_direct + a
    logx = math.log(x)
    x_s = cmath.exp(-s * logx)
    tail = x * x_s / (s - 1.0) + 0.5 * x_s
    # sum_j B_2j/(2j)! (s)_{2j-1} x^{-s-2j+1}
    poch = s
    term_pow = x_s / x
    fact = 2.0
    for j in range(1, _EM_TERMS + 1):
        tail += BERNOULLI.b2k(j) / fact * poch * term_pow
        poch *= (s + 2 * j - 1) * (s + 2 * j)
        term_pow /= x * x
        fact *= (2 * j + 1) * (2 * j + 2)
    return head + tail


def zeta0(s, a: float) -> complex:
    """Odd-index zeta: sum_{k>=1} (2k-1+a)^{-s}.

    Evaluated as 2^{-s} zeta(s, (1+a)/2), which is exact and avoids the
    cancellation in zeta(s,a) - 2^{-s} zeta(s,a/2) when a is tiny; at a = 0
    it is (1 - 2^{-s}) zeta(s).
    """
    s = complex(s)
    a = float(a)
    if a < 0:
        raise ValueError("zeta0 needs a >= 0")
    if s == 1:
        raise PoleError("zeta0 has a pole at s=1")
    return cmath.exp(-s * math.log(2.0)) * hurwitz_zeta(s, 0.5 * (1.0 + a))
