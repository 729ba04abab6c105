"""Eta-function components at s = 0 and the adiabatic sweep.

The discrete part splits into the minimal K-type family (closed form through
odd-index Hurwitz zeta values) and a double sum over pairs of K-types, which
is continued to s = 0 through residues of the sums

    H_w(s) = sum_{l > k >= 1} (2k-1)^w q_r(k, l)^{-s},   w = 0, 1.

The principal-series part is the Mellin transform of the heat trace Tr_p(t),
regularized by subtracting a fitted small-time expansion term by term.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContinuationError, DomainError, FitError, PoleError, TruncationError
from .heat import DEFAULT_POLICY, AsymptoticFit, TruncationPolicy, fit_small_time
from .quadrature import integrate
from .selberg import QuadratureSpec, continuous_term
from .specfn import BERNOULLI, digamma, hurwitz_zeta, rising, zeta0
from .spectrum import _params
from .surface import SurfaceData, adiabatic_limit, kappa_trivial

_COMPONENTS = ("d1", "d2", "p", "total")
SQRT_PI = math.sqrt(math.pi)
# -psi(1/2) = gamma + 2 log 2
_MINUS_PSI_HALF = -float(digamma(0.5).real)


@dataclass(frozen=True)
class EtaResult:
    value: complex
    s: complex
    component: str
    pole_subtracted: bool = False
    residue_r0: float = 0.0
    err_estimate: float = 0.0
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.component not in _COMPONENTS:
            raise DomainError(f"unknown eta component {self.component!r}")
        if not self.err_estimate >= 0:
            raise DomainError("err_estimate must be non-negative")
        if self.component != "p" and self.residue_r0 != 0:
            raise DomainError("only the principal part carries a residue at s=0")

    def as_dict(self) -> dict:
        out = {
            "component": self.component,
            "value": _jsonable(self.value),
            "s": _jsonable(self.s),
            "pole_subtracted": self.pole_subtracted,
            "residue_r0": self.residue_r0,
            "err_estimate": self.err_estimate,
        }
        if self.details:
            out["details"] = self.details
        return out


def _jsonable(z):
    z = complex(z)
    return z.real if z.imag == 0 else {"re": z.real, "im": z.imag}


def _real_if_real(value: complex, s: complex):
    return float(value.real) if complex(s).imag == 0 else complex(value)


@dataclass(frozen=True)
class QIndex:
    """Pair of K-types l > k >= 1 with q = sqrt((2l-1)^2 (1+r^2) - r^2 (2k-1)^2)."""

    k: int
    l: int
    r: float

    def __post_init__(self):
        if self.k < 1 or self.l <= self.k:
            raise DomainError(f"need l > k >= 1, got k={self.k}, l={self.l}")
        if not self.r > 0:
            raise DomainError("r must be positive")

    @property
    def q(self) -> float:
        big, small = 2 * self.l - 1, 2 * self.k - 1
        return math.sqrt(big * big * (1.0 + self.r * self.r) - (self.r * small) ** 2)


def _surface_counts(surface: SurfaceData) -> tuple[int, int]:
    """(2g-2+kappa, kappa_t); refuses spin structures nontrivial on the fiber."""
    if surface.spin.eps_k != 1:
        raise DomainError("eta is only computed for spin structures trivial along the fiber")
    return 2 * surface.genus - 2 + surface.kappa, kappa_trivial(surface)


# --- minimal K-type family -------------------------------------------------

def eta_d1(params, surface: SurfaceData, s=0.0) -> EtaResult:
    """Closed form 2(2-2g-kappa) r^s (z(s-1) - a z(s)) + 2 kappa_t r^s z(s), z = zeta0(., a), a = r^2/2."""
    p = _params(params)
    chi, kt = _surface_counts(surface)
    s = complex(s)
    if s in (1, 2):
        raise PoleError(f"eta_d1 has a simple pole at s={s.real:g}")
    a = 0.5 * p.r * p.r
    rs = cmath.exp(s * math.log(p.r))
    z1 = zeta0(s - 1.0, a)
    z0 = zeta0(s, a)
    value = -2.0 * chi * rs * (z1 - a * z0) + 2.0 * kt * rs * z0
    return EtaResult(_real_if_real(value, s), s, "d1")


def d1_spectrum(params, surface: SurfaceData, k_max: int):
    """Eigenvalues -(2k-1+r^2/2)/r, k = 1..k_max, and their signed multiplicities.

    The multiplicity 2(2g-2+kappa)(2k-1) - 2 kappa_t already absorbs the
    cusp correction; all eigenvalues in this family are negative.
    """
    p = _params(params)
    chi, kt = _surface_counts(surface)
    k = np.arange(1, k_max + 1, dtype=float)
    lam = -(2.0 * k - 1.0 + 0.5 * p.r * p.r) / p.r
    mult = 2.0 * chi * (2.0 * k - 1.0) - 2.0 * kt
    return lam, mult


def _reg_power(power: float, has_log: bool, T: float) -> float:
    """Finite part at s=0 of int_0^T t^{(s-1)/2} t^power (log t)^q dt / Gamma((s+1)/2) * sqrt(pi).

    For power = -1/2 (no log) the 1/s pole is dropped and the finite part picks
    up -psi(1/2) from the Gamma factor.
    """
    alpha = power + 0.5
    if abs(alpha) < 1e-12:
        if has_log:
            raise FitError("a t^{-1/2} log t term would give a double pole at s=0")
        return math.log(T) + _MINUS_PSI_HALF
    ta = T ** alpha
    if has_log:
        return ta * (math.log(T) / alpha - 1.0 / (alpha * alpha))
    return ta / alpha


@dataclass(frozen=True)
class MellinPiece:
    """Regularized Mellin value of one heat-trace component, already divided by sqrt(pi)."""

    value: float
    residue_r0: float
    fit: AsymptoticFit | None
    err_estimate: float
    window: tuple[float, float] | None


def _regularize(fit: AsymptoticFit, T: float, tail: float) -> tuple[float, float]:
    acc = tail
    r0 = 0.0
    for (pw, lg), c in zip(fit.exponents, fit.coefficients):
        acc += c * _reg_power(pw, lg, T)
        if abs(pw + 0.5) < 1e-12 and not lg:
            r0 = 2.0 * c / SQRT_PI
    return acc / SQRT_PI, r0


def regularized_mellin(func, window: tuple[float, float], n_samples: int, template,
                       t_max: float, tail_tol: float = 1e-13, max_residual: float = 1e-9,
                       vectorized: bool = False) -> MellinPiece:
    """(1/sqrt pi) Reg int_0^inf t^{-1/2} F(t) dt for a heat-trace component F.

    F is sampled on a log grid over ``window``; the fitted expansion replaces F
    below the window top T and is integrated exactly, F itself is integrated
    from T to t_max in log t.  The error estimate compares with a refit on
    the upper two thirds of the samples.
    """
    lo, hi = window
    if not 0 < lo < hi < t_max:
        raise DomainError(f"bad window {window} for t_max={t_max}")
    ts = np.logspace(math.log10(lo), math.log10(hi), n_samples)
    ys = np.asarray(func(ts), dtype=float) if vectorized else np.array([func(t) for t in ts])
    fit = fit_small_time(zip(ts, ys), template)
    if fit.residual > max_residual:
        raise FitError(f"small-time fit residual {fit.residual:.2e} exceeds {max_residual:.1e}")
    T = ts[-1]
    tail = _log_time_integral(func, T, t_max, tail_tol, vectorized)
    value, r0 = _regularize(fit, T, tail.value)
    # the refit only drops samples, so no new evaluations are needed
    keep = n_samples // 3
    try:
        alt = fit_small_time(zip(ts[keep:], ys[keep:]), template)
        alt_value, _ = _regularize(alt, T, tail.value)
        spread = abs(alt_value - value)
    except FitError:
        spread = 0.0
    err = spread + tail.error / SQRT_PI
    return MellinPiece(float(value), float(r0), fit, float(err), (lo, hi))


def _log_time_integral(func, t_lo, t_hi, tol, vectorized=False):
    """int_{t_lo}^{t_hi} t^{-1/2} F(t) dt computed as an integral over log t."""
    if vectorized:
        g = lambda x: np.exp(0.5 * x) * np.asarray(func(np.exp(x)), dtype=float)
    else:
        g = lambda x: np.array([math.exp(0.5 * v) * func(math.exp(v)) for v in x])
    return integrate(g, math.log(t_lo), math.log(t_hi), abs_tol=tol, rel_tol=1e-12)


# small-time exponents of the minimal K-type heat trace: the family is an
# arithmetic progression, so only t^{-3/2}, t^{-1} and integer powers occur
_D1_TEMPLATE = ((-1.5, False), (-1.0, False), (0.0, False), (1.0, False), (2.0, False),
                (3.0, False))


def eta_d1_mellin_oracle(params=None, surface: SurfaceData | None = None, *,
                         eigenvalues=None, multiplicities=None) -> float:
    """Heat-kernel evaluation of the minimal K-type eta value at s=0.

    Works on Theta(t) = sum mult * lam * exp(-t lam^2) only; no zeta values
    are used.  Either pass (params, surface) or an explicit finite family via
    ``eigenvalues``/``multiplicities``.  A finite family has no small-time
    singularity and needs no fit.
    """
    if eigenvalues is not None:
        lam = np.asarray(eigenvalues, dtype=float)
        mult = np.ones_like(lam) if multiplicities is None else np.asarray(multiplicities, float)
        if np.any(lam == 0):
            raise DomainError("zero eigenvalues have no sign")
        # int_0^inf t^{-1/2} lam e^{-t lam^2} dt = sqrt(pi) sign(lam)
        return float(np.sum(mult * np.sign(lam)))
    p = _params(params)
    # the spectrum scales like 1/r, so does the natural time scale r^2
    scale = p.r * p.r
    k_max = int(math.ceil(0.5 * (p.r * math.sqrt(80.0 / (1e-4 * scale)) + 1))) + 2
    lam, mult = d1_spectrum(p, surface, k_max)
    absl = np.abs(lam)

    def theta(t):
        t = np.atleast_1d(t)
        return (mult[None, :] * lam[None, :] * np.exp(-t[:, None] * lam[None, :] ** 2)).sum(axis=1)

    lo, hi = 1e-4 * scale, 3e-2 * scale
    ts = np.logspace(math.log10(lo), math.log10(hi), 40)
    fit = fit_small_time(zip(ts, theta(ts)), _D1_TEMPLATE)
    if fit.residual > 1e-10:
        raise FitError(f"small-time fit residual {fit.residual:.2e} too large")
    # beyond the window the heat trace integrates in closed form per eigenvalue
    tail = SQRT_PI * float(np.sum(mult * np.sign(lam) * np.array([math.erfc(math.sqrt(hi) * x) for x in absl])))
    value, _ = _regularize(fit, hi, tail)
    return value


# --- pairs of K-types ------------------------------------------------------

_EM_ORDER = 8


def _em_coefficients(beta: complex) -> list[complex]:
    """c_n with sum_{m>=1} (K+2m)^{-beta} ~ K^{1-beta}/(2(beta-1)) - K^{-beta}/2 + sum_n c_n K^{1-beta-2n}."""
    return [BERNOULLI.b2k(n) * 2.0 ** (2 * n - 1) * rising(beta, 2 * n - 1) / math.factorial(2 * n)
            for n in range(1, _EM_ORDER + 1)]


def _odd_tail(w: complex, k0: int) -> complex:
    """sum over odd K >= k0 of K^{-w}, continued in w."""
    return cmath.exp(-w * math.log(2.0)) * hurwitz_zeta(w, 0.5 * k0)


def _pair_zeta(alpha: int, beta: complex) -> complex:
    """sum_{l>k>=1} (2k-1)^alpha (2l-1)^{-beta}, continued in beta.

    The inner sum over l is summed exactly for small 2k-1 and replaced by its
    Euler-Maclaurin expansion beyond a cutoff, where every term becomes an
    odd-index Hurwitz tail.
    """
    beta = complex(beta)
    if beta == 1:
        raise PoleError("pair zeta has a pole at beta=1")
    k0 = max(61, 2 * int(abs(beta)) + 41) | 1
    coeffs = _em_coefficients(beta)
    val = _odd_tail(beta - alpha - 1, k0) / (2.0 * (beta - 1.0)) - 0.5 * _odd_tail(beta - alpha, k0)
    for n, c in enumerate(coeffs, start=1):
        val += c * _odd_tail(beta + 2 * n - 1 - alpha, k0)
    # inner tail at K = k0 from the expansion, then exact steps down to K = 1
    inner = k0 ** (1 - beta) / (2.0 * (beta - 1.0)) - 0.5 * k0 ** (-beta)
    for n, c in enumerate(coeffs, start=1):
        inner += c * k0 ** (1 - beta - 2 * n)
    for K in range(k0 - 2, 0, -2):
        inner += (K + 2) ** (-beta)
        val += K ** alpha * inner
    return val


def qsum(w: int, s, r: float, policy: TruncationPolicy = DEFAULT_POLICY) -> complex:
    """H_w(s) = sum_{l>k>=1} (2k-1)^w q_r(k,l)^{-s}, continued to s away from its poles.

    Uses q^{-s} = L^{-s} (1+r^2)^{-s/2} (1-x)^{-s/2}, x = r^2 K^2/(L^2 (1+r^2)) <= y = r^2/(1+r^2),
    expanded binomially; term j is a pair zeta times (s/2)_j/j! y^j.
    Poles sit at s = w+2, w+1, ... (simple).
    """
    if w not in (0, 1):
        raise DomainError("weight exponent w must be 0 or 1")
    s = complex(s)
    y = r * r / (1.0 + r * r)
    total = 0j
    coef = 1.0 + 0j
    for j in range(policy.max_terms):
        term = coef * y ** j * _pair_zeta(w + 2 * j, s + 2 * j)
        total += term
        if j > 2 and abs(term) <= policy.eps_tail * max(abs(total), 1e-300):
            break
        coef *= (0.5 * s + j) / (j + 1)
    else:
        raise TruncationError("binomial series in r^2 did not converge")
    return cmath.exp(-0.5 * s * math.log1p(r * r)) * total


def qsum_residue(w: int, pole: int, r: float, radius: float = 0.125, n_points: int = 32,
                 policy: TruncationPolicy = DEFAULT_POLICY, max_residual: float = 1e-6):
    """Residue of H_w at an integer pole from a Laurent fit on a small circle.

    Returns (residue, diagnostics).  The fit is the discrete Laurent transform
    of H on the circle; the coefficient of (s-pole)^{-2} must vanish for a
    simple pole and the highest coefficient measures truncation.
    """
    theta = 2.0 * math.pi * (np.arange(n_points) + 0.5) / n_points
    z = radius * np.exp(1j * theta)
    vals = np.array([qsum(w, pole + zz, r, policy) for zz in z])
    # coefficient of (s-pole)^n is mean(H z^{-n})
    laurent = {n: complex(np.mean(vals * z ** (-n))) for n in (-3, -2, -1, 0, n_points // 2 - 2)}
    res = laurent[-1].real
    diag = {
        "double_pole": abs(laurent[-2]),
        "triple_pole": abs(laurent[-3]),
        "imag_part": abs(laurent[-1].imag),
        "tail": abs(laurent[n_points // 2 - 2]) * radius ** (n_points // 2 - 2),
    }
    worst = max(diag.values()) / max(1.0, abs(res))
    diag["residual"] = worst
    if worst > max_residual:
        raise ContinuationError(f"Laurent fit of H_{w} at s={pole} has residual {worst:.2e}")
    return res, diag


def _signed_pair_sums(s, r: float, policy: TruncationPolicy, k_max: int = 41):
    """(f_r(s), g_r(s)) through the expansion in a = r^2/2 of (q-a)^{-s} - (q+a)^{-s}.

    (q-a)^{-s} - (q+a)^{-s} = 2 sum_{k odd} (s)_k/k! a^k q^{-s-k}.
    """
    s = complex(s)
    a = 0.5 * r * r
    f = g = 0j
    for k in range(1, k_max + 1, 2):
        c = 2.0 * rising(s, k) / math.factorial(k) * a ** k
        if c == 0:
            break
        tf = c * qsum(1, s + k, r, policy)
        tg = c * qsum(0, s + k, r, policy)
        f += tf
        g += tg
        if abs(tf) + abs(tg) <= policy.eps_tail * (abs(f) + abs(g)):
            break
    return f, g


def eta_d2(params, surface: SurfaceData, s, policy: TruncationPolicy = DEFAULT_POLICY) -> EtaResult:
    """2(2g-2+kappa) r^s f_r(s) - 2 kappa_t r^s g_r(s) at s away from integers, via continuation."""
    p = _params(params)
    chi, kt = _surface_counts(surface)
    s = complex(s)
    if s.imag == 0 and s.real == round(s.real) and s.real <= 2:
        raise PoleError("use eta_d2_at_zero at s=0; other integers s <= 2 may be poles")
    f, g = _signed_pair_sums(s, p.r, policy)
    rs = cmath.exp(s * math.log(p.r))
    value = 2.0 * chi * rs * f - 2.0 * kt * rs * g
    return EtaResult(_real_if_real(value, s), s, "d2")


def eta_d2_at_zero(params, surface: SurfaceData, policy: TruncationPolicy = DEFAULT_POLICY) -> EtaResult:
    """eta_d2 at s=0.

    Only the terms with a pole of H_w at s+k cancel the factor (s)_k, so
    f_r(0) = sum_k (2 a^k / k) Res_{s=k} H_1 and g_r(0) likewise with H_0;
    H_1 has poles up to s=3 and H_0 up to s=2, so k = 1, 3 suffice.
    """
    p = _params(params)
    chi, kt = _surface_counts(surface)
    if p.r > 0.5:
        raise DomainError("eta_d2_at_zero is validated for r <= 0.5")
    a = 0.5 * p.r * p.r
    f0 = g0 = 0.0
    diags = {}
    for k in (1, 3):
        res1, d1 = qsum_residue(1, k, p.r, policy=policy)
        res0, d0 = qsum_residue(0, k, p.r, policy=policy)
        f0 += 2.0 * a ** k / k * res1
        g0 += 2.0 * a ** k / k * res0
        diags[f"H1_res{k}"] = res1
        diags[f"H0_res{k}"] = res0
        diags[f"laurent_residual_{k}"] = max(d1["residual"], d0["residual"])
    value = 2.0 * chi * f0 - 2.0 * kt * g0
    err = (2.0 * abs(chi) + 2.0 * kt) * a * max(diags[f"laurent_residual_{k}"] for k in (1, 3))
    return EtaResult(value, 0j, "d2", err_estimate=err, details={"f0": f0, "g0": g0, **diags})


def _pair_row(s, r, a, L, w):
    """sum over k < l of K^w ((q-a)^{-s} - (q+a)^{-s}) for one l, cancellation-free."""
    K = np.arange(1.0, L, 2.0)
    q = np.sqrt(L * L * (1.0 + r * r) - (r * K) ** 2)
    x = a / q
    lm, lp = np.log1p(-x), np.log1p(x)
    # e^{-s lm} - e^{-s lp} = 2 e^{-s (lm+lp)/2} sinh(s (lp-lm)/2)
    diff = 2.0 * np.exp(-s * (0.5 * (lm + lp) + np.log(q))) * np.sinh(0.5 * s * (lp - lm))
    return np.sum(K ** w * diff)


def pair_partial_sums(s, r: float, l_max: int):
    """Partial sums of (f_r(s), g_r(s)) over l <= l_max, by direct summation."""
    s = complex(s)
    a = 0.5 * r * r
    f = g = 0j
    for l in range(l_max, 1, -1):
        L = 2.0 * l - 1.0
        f += _pair_row(s, r, a, L, 1)
        g += _pair_row(s, r, a, L, 0)
    return f, g


def eta_d2_direct(params, surface: SurfaceData, s, policy: TruncationPolicy = DEFAULT_POLICY,
                  l_start: int = 250, levels: int = 5) -> EtaResult:
    """Direct double sum for Re(s) > 2.5, accelerated over the cutoff in l.

    The tail beyond l_max behaves like sum_i c_i l_max^{-(s-1-w)-i}; partial sums
    at l_max = l_start 2^j are combined to cancel the leading `levels-1` terms.
    """
    p = _params(params)
    chi, kt = _surface_counts(surface)
    s = complex(s)
    if s.real <= 2.5:
        raise DomainError("direct summation needs Re(s) > 2.5")
    l_top = l_start * 2 ** (levels - 1)
    if l_top * l_top // 2 > policy.max_terms * 1000:
        raise TruncationError(f"double sum would need {l_top * l_top // 2} terms")
    sums = [pair_partial_sums(s, p.r, l_start * 2 ** j) for j in range(levels)]

    def extrapolate(n_levels):
        out = []
        for w, idx in ((1, 0), (0, 1)):
            row = [v[idx] for v in sums[:n_levels]]
            # Richardson over exponents s-1-w, s-w, ...
            for i in range(n_levels - 1):
                fac = 2.0 ** (s - 1 - w + i)
                row = [(fac * row[m + 1] - row[m]) / (fac - 1.0) for m in range(len(row) - 1)]
            out.append(row[0])
        return out

    rs = cmath.exp(s * math.log(p.r))
    f, g = extrapolate(levels)
    f1, g1 = extrapolate(levels - 1)
    value = 2.0 * chi * rs * f - 2.0 * kt * rs * g
    coarse = 2.0 * chi * rs * f1 - 2.0 * kt * rs * g1
    return EtaResult(_real_if_real(value, s), s, "d2", err_estimate=float(abs(value - coarse)))


# --- principal series ------------------------------------------------------

# Small-time templates per continuous term, with sample windows in units of
# r^2 (the spectrum scales like 1/r).  The identity term only has half-integer
# powers, the log 2 term only integer ones; the digamma and J terms carry
# t^k log t.  The J term needs the smallest window because its expansion
# mixes the fiber and base scales until t << r^2.
_HALF = tuple((k + 0.5, False) for k in range(-2, 4))
_INTEGER = tuple((float(k), False) for k in range(-1, 4))
_WITH_LOGS = ((-1.0, False), (-1.0, True), (-0.5, False), (0.0, False), (0.0, True),
              (0.5, False), (1.0, False), (1.0, True))
FIT_PLAN = {
    "identity": (_HALF, (1e-4, 1e-2)),
    "cusp_log2": (_INTEGER, (1e-4, 1e-2)),
    "cusp_psi": (_WITH_LOGS, (1e-6, 1e-3)),
    "jterm": (_WITH_LOGS, (1e-6, 1e-4)),
}
# terms that vanish faster than any power as t -> 0 and are integrated as they are
DIRECT_TERMS = ("hyperbolic", "h_zero")
PIPELINE_QUAD = QuadratureSpec(abs_tol=1e-14, rel_tol=1e-13)

# names of the leading coefficients of the combined expansion
_COEFF_NAMES = {"a0": (-1.5, False), "a1": (-1.0, False), "b0": (-1.0, True),
                "a2": (-0.5, False), "a3": (0.0, False), "b1": (0.0, True)}


def _t_max(p) -> float:
    """Time beyond which every continuous term is below ~1e-16: e^{-t (c - r/2)^2}."""
    gap = math.sqrt(p.c2) - 0.5 * p.r
    return 52.0 / (gap * gap)


def _direct_lower(name, p, classes) -> float:
    if name == "hyperbolic":
        u = min(c.u for c in classes)
        # weight ~ exp(-u^2/(16 t))
        return u * u / 720.0
    # h(0) is a theta sum in j; its dual terms decay like exp(-pi^2/(4 c^2 t))
    return math.pi ** 2 / (180.0 * p.c2)


def eta_p_regularized(params, surface: SurfaceData, classes=(), quad: QuadratureSpec | None = None,
                      policy: TruncationPolicy = DEFAULT_POLICY, weight_mode: str = "diagonal",
                      n_samples: int = 24) -> EtaResult:
    """Principal-series eta value from the heat trace Tr_p(t).

    Each continuous term of Tr_p is sampled at small t, fitted with its own
    template, and its regularized Mellin transform is taken; the pole at s=0
    (coefficient of t^{-1/2}) is reported as residue_r0 and subtracted.
    Terms that are exponentially small at t -> 0 are integrated directly.
    """
    p = _params(params)
    chi, kt = _surface_counts(surface)
    if p.r > 0.5:
        raise DomainError("the principal-series eta is only computed for r <= 0.5")
    quad = PIPELINE_QUAD if quad is None else quad
    scale = p.r * p.r
    t_max = _t_max(p)

    def term(name):
        return lambda t: continuous_term(name, t, p, surface, classes, quad, policy, weight_mode)

    active = {"identity": True, "cusp_log2": surface.kappa > kt, "cusp_psi": kt > 0,
              "jterm": kt > 0, "hyperbolic": bool(classes), "h_zero": kt > 0}
    parts, errs, fits = {}, {}, {}
    r0 = 0.0
    for name, (template, (lo, hi)) in FIT_PLAN.items():
        if not active[name]:
            continue
        piece = regularized_mellin(term(name), (lo * scale, hi * scale), n_samples, template, t_max)
        parts[name], errs[name] = piece.value, piece.err_estimate
        fits[name] = piece.fit
        r0 += piece.residue_r0
    for name in DIRECT_TERMS:
        if not active[name]:
            continue
        res = _log_time_integral(term(name), _direct_lower(name, p, classes), t_max, 1e-13)
        parts[name], errs[name] = res.value / SQRT_PI, res.error / SQRT_PI
    value = 0.0
    for name in ("identity", "hyperbolic", "cusp_psi", "cusp_log2", "h_zero", "jterm"):
        value += parts.get(name, 0.0)
    coeffs = {key: sum(f.coefficient(*pw) for f in fits.values()) for key, pw in _COEFF_NAMES.items()}
    details = {"terms": parts, "term_errors": errs, "coefficients": coeffs,
               "windows": {n: [FIT_PLAN[n][1][0] * scale, FIT_PLAN[n][1][1] * scale] for n in fits}}
    return EtaResult(float(value), 0j, "p", pole_subtracted=True, residue_r0=float(r0),
                     err_estimate=float(sum(errs.values())), details=details)


def eta_p_term_values(params, surface: SurfaceData) -> dict:
    """Value of each continuous term's regularized Mellin transform at s=0, in closed form.

    With rho = r^2/sqrt(1+r^2): identity chi rho (r^2/24 - 1/12), digamma term
    -kappa_t rho/4, h(0) term kappa_t rho/2, J term -kappa_t rho/8; the
    hyperbolic and log 2 terms give zero.  Each follows from the pole of the
    term's Mellin transform at s=1 (and s=3 for the identity term), the only
    poles that survive the factor (s)_k at s=0.
    """
    p = _params(params)
    chi, kt = _surface_counts(surface)
    rho = p.r * p.r / math.sqrt(1.0 + p.r * p.r)
    return {
        "identity": chi * rho * (p.r * p.r / 24.0 - 1.0 / 12.0),
        "hyperbolic": 0.0,
        "cusp_psi": -0.25 * kt * rho,
        "cusp_log2": 0.0,
        "h_zero": 0.5 * kt * rho,
        "jterm": -0.125 * kt * rho,
    }


def eta_p_analytic(params, surface: SurfaceData) -> EtaResult:
    """Closed form r^2/sqrt(1+r^2) ((2g-2+kappa)(r^2/24 - 1/12) + kappa_t/8); no pole at s=0."""
    vals = eta_p_term_values(params, surface)
    total = 0.0
    for name in ("identity", "hyperbolic", "cusp_psi", "cusp_log2", "h_zero", "jterm"):
        total += vals[name]
    return EtaResult(total, 0j, "p", pole_subtracted=True, details={"terms": vals, "method": "analytic"})


# --- totals and the adiabatic sweep ------------------------------------------

def eta_total(params, surface: SurfaceData, classes=(), method: str = "heat",
              quad: QuadratureSpec | None = None, policy: TruncationPolicy = DEFAULT_POLICY,
              weight_mode: str = "diagonal") -> EtaResult:
    """eta_d1(0) + eta_d2(0) + eta_p, with component errors added in quadrature.

    ``method="heat"`` computes eta_p from the heat trace; ``"analytic"`` uses
    the closed form of eta_p_analytic instead.
    """
    p = _params(params)
    d1 = eta_d1(p, surface, 0.0)
    d2 = eta_d2_at_zero(p, surface, policy)
    if method == "heat":
        pp = eta_p_regularized(p, surface, classes, quad, policy, weight_mode)
    elif method == "analytic":
        pp = eta_p_analytic(p, surface)
    else:
        raise DomainError(f"unknown method {method!r}; use 'heat' or 'analytic'")
    value = d1.value + d2.value + pp.value
    err = math.sqrt(d1.err_estimate ** 2 + d2.err_estimate ** 2 + pp.err_estimate ** 2)
    details = {"d1": d1, "d2": d2, "p": pp, "method": method}
    return EtaResult(value, 0j, "total", pole_subtracted=True, err_estimate=err, details=details)


@dataclass(frozen=True)
class SweepRow:
    r: float
    eta_d1: float
    eta_d2: float
    eta_p: float
    eta_total: float
    err_estimate: float
    residue_r0: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    limit: float
    limit_err: float
    target: float
    monotone: bool
    orders: dict

    @property
    def deviation(self) -> float:
        return self.limit - self.target


def richardson_r2(rs, values) -> tuple[float, float]:
    """Extrapolate values(r) to r=0 with a polynomial in r^2 through all points.

    The error estimate is the change when the largest r is dropped.
    """
    h = np.asarray(rs, dtype=float) ** 2
    v = np.asarray(values, dtype=float)
    if len(h) < 2:
        raise DomainError("need at least two radii to extrapolate")

    def neville(hh, vv):
        p = list(vv)
        n = len(hh)
        for k in range(1, n):
            for i in range(n - k):
                p[i] = (hh[i] * p[i + 1] - hh[i + k] * p[i]) / (hh[i] - hh[i + k])
        return p[0]

    full = neville(h, v)
    fewer = neville(h[1:], v[1:])
    return float(full), float(abs(full - fewer))


def empirical_order(rs, values) -> float:
    """Least-squares slope of log|value| against log r."""
    x = np.log(np.asarray(rs, dtype=float))
    y = np.log(np.abs(np.asarray(values, dtype=float)))
    return float(np.polyfit(x, y, 1)[0])


def _sweep_one(args):
    r, surface, classes, method, quad, policy = args
    tot = eta_total(r, surface, classes, method, quad, policy)
    d = tot.details
    return SweepRow(r, d["d1"].value, d["d2"].value, d["p"].value, tot.value,
                    tot.err_estimate, d["p"].residue_r0)


def adiabatic_sweep(r_list, surface: SurfaceData, classes=(), method: str = "heat",
                    quad: QuadratureSpec | None = None, policy: TruncationPolicy = DEFAULT_POLICY,
                    workers: int = 1) -> SweepResult:
    """eta components over decreasing r, extrapolated to r -> 0 and compared with -vol/(12 pi).

    With workers > 1 the radii are computed in separate processes; rows keep
    the order of r_list either way.
    """
    rs = [float(r) for r in r_list]
    if not rs:
        raise DomainError("r_list is empty")
    if any(not 0 < r <= 0.5 for r in rs):
        raise DomainError("every r must lie in (0, 0.5]")
    if any(b >= a for a, b in zip(rs, rs[1:])):
        raise DomainError("r_list must be strictly decreasing")
    _surface_counts(surface)
    jobs = [(r, surface, tuple(classes), method, quad, policy) for r in rs]
    if workers > 1 and len(rs) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = tuple(pool.map(_sweep_one, jobs))
    else:
        rows = tuple(_sweep_one(j) for j in jobs)
    target = adiabatic_limit(surface)
    if len(rows) > 1:
        limit, limit_err = richardson_r2(rs, [row.eta_total for row in rows])
    else:
        limit, limit_err = rows[0].eta_total, float("nan")
    gaps = [abs(row.eta_total - target) for row in rows]
    monotone = all(b <= a for a, b in zip(gaps, gaps[1:]))
    orders = {}
    if len(rows) > 1:
        for name in ("eta_d2", "eta_p"):
            vals = [getattr(row, name) for row in rows]
            if all(v != 0 for v in vals):
                orders[name] = empirical_order(rs, vals)
    return SweepResult(rows, limit, limit_err, target, monotone, orders)
