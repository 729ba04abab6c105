"""Fourier transforms of the odd heat kernel D e^{-tD^2} on K-type blocks.

``h_principal`` is the principal-series transform h_{t,r}(tau), a sum over
all odd j = m-1 of the two block eigenvalues weighted by their Gaussians;
``h_discrete`` is the analogue for the discrete series of weight n.  Also here:
the theta-type sum and its Poisson dual, and least-squares fitting of small-t
expansions.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, FitError, TruncationError
from .spectrum import _params, minimal_ktype_eigenvalue
from .surface import SurfaceData, kappa_trivial


@dataclass(frozen=True)
class TruncationPolicy:
    eps_tail: float = 1e-16
    max_terms: int = 10**6

    def __post_init__(self):
        if not 0 < self.eps_tail < 1:
            raise DomainError("eps_tail must lie in (0, 1)")
        if self.max_terms < 1:
            raise DomainError("max_terms must be positive")


DEFAULT_POLICY = TruncationPolicy()

# bound on the (blocks x nodes) work arrays
CHUNK_ELEMENTS = 1 << 20


def _pair_parts(t, r, root):
    """e^{-t(R^2 + r^2/4)} times (cosh, sinh) of r R t, without overflow."""
    x = r * root * t
    y = t * (root * root + 0.25 * r * r)
    with np.errstate(over="ignore", under="ignore"):
        small = x < 300.0
        xs = np.where(small, x, 0.0)
        ey = np.exp(-y)
        ch = np.where(small, np.cosh(xs) * ey, 0.5 * np.exp(x - y))
        sh = np.where(small, np.sinh(xs) * ey, 0.5 * np.exp(x - y))
    return ch, sh


def _pair_sum(t, r, root):
    """lambda_+ e^{-t lambda_+^2} + lambda_- e^{-t lambda_-^2} with lambda = -r/2 +- root.

    Written as e^{-t(R^2+r^2/4)} (2R sinh(rRt) - r cosh(rRt)), which avoids
    the cancellation between the two eigenvalues when t R^2 is small.
    """
    ch, sh = _pair_parts(t, r, root)
    return 2.0 * root * sh - r * ch


def _pair_diff(t, r, root):
    """lambda_+ e^{-t lambda_+^2} - lambda_- e^{-t lambda_-^2}."""
    ch, sh = _pair_parts(t, r, root)
    return 2.0 * root * ch - r * sh


def _odd_cutoff(t, r, c, policy, n0=0.0):
    """Largest odd j needed so that every dropped pair is below eps_tail.

    A pair with root R contributes at most (R + r) e^{-t (R - r/2)^2}; R grows
    like j c, so solve t (j c - r/2)^2 >= ln(1/eps) + ln(j c + r) with margin.
    """
    log_eps = -math.log(policy.eps_tail)
    x = 0.5 * r + math.sqrt((log_eps + 10.0) / t)
    for _ in range(4):
        x = 0.5 * r + math.sqrt((log_eps + math.log(x + r + 1.0)) / t)
    j = int(math.ceil(math.hypot(x, n0) / c)) + 2
    if j % 2 == 0:
        j += 1
    if (j + 1) // 2 > policy.max_terms:
        raise TruncationError(
            f"m-sum needs {(j + 1) // 2} terms at t={t}, more than max_terms={policy.max_terms}"
        )
    return j


def h_principal(t: float, params, tau, policy: TruncationPolicy = DEFAULT_POLICY):
    """h_{t,r}(tau) = sum over even m of the block pair at (tau, m).

    Vectorised in tau.  Each odd j = m - 1 occurs exactly once, so the sum is
    twice the sum over positive odd j.
    """
    if t <= 0:
        raise DomainError("t must be positive")
    p = _params(params)
    r, c = p.r, math.sqrt(p.c2)
    tau = np.asarray(tau, dtype=float)
    j_max = _odd_cutoff(t, r, c, policy)
    tau2 = 4.0 * tau.reshape(1, -1) ** 2
    chunk = max(1, CHUNK_ELEMENTS // tau2.size)
    parts = []
    for j0 in range(1, j_max + 1, 2 * chunk):
        js = np.arange(j0, min(j0 + 2 * chunk, j_max + 1), 2, dtype=float)
        root = np.sqrt((js * js * p.c2)[:, None] + tau2)
        parts.append(_pair_sum(t, r, root)[::-1].sum(axis=0))
    # small blocks are added last
    out = 2.0 * np.sum(parts[::-1], axis=0)
    return out.reshape(tau.shape) if tau.ndim else float(out[0])


def h_principal_series_form(t: float, params, tau, policy: TruncationPolicy = DEFAULT_POLICY,
                            K: int | None = None):
    """Same transform via the Taylor series of cosh/sinh in r t I.

    sum_k (-r (rt)^{2k}/(2k)! + 2 (rt)^{2k-1}/(2k-1)!) I^{2k}, the k = 0 odd
    term being absent.  ``K`` truncates at k <= K; by default the series runs
    until its terms stop mattering.
    """
    if t <= 0:
        raise DomainError("t must be positive")
    p = _params(params)
    r = p.r
    if t > 1 or r > 1:
        warnings.warn("series form is meant for t in (0, 1] and r in (0, 1]", RuntimeWarning)
    if K is not None and K < 1:
        raise DomainError("series depth K must be >= 1")
    scalar = np.ndim(tau) == 0
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    j_max = _odd_cutoff(t, r, math.sqrt(p.c2), policy)
    js = np.arange(1, j_max + 1, 2, dtype=float)
    i2 = (js * js * p.c2)[:, None] + 4.0 * tau[None, :] ** 2
    x2 = (r * t) ** 2 * i2  # (r t I)^2
    # even part: sum (rtI)^{2k}/(2k)!; odd part: sum (rt)^{2k-1} I^{2k}/(2k-1)!
    even = np.ones_like(i2)
    odd = np.zeros_like(i2)
    term_even = np.ones_like(i2)
    term_odd = r * t * i2  # k = 1
    k = 1
    k_cap = K if K is not None else 100000
    while k <= k_cap:
        term_even = term_even * x2 / ((2 * k - 1) * (2 * k))
        even += term_even
        odd += term_odd
        if K is None and np.all(term_even <= 1e-17 * even) and np.all(term_odd <= 1e-17 * odd):
            break
        term_odd = term_odd * x2 / ((2 * k) * (2 * k + 1))
        k += 1
    inner = -r * even + 2.0 * odd
    gauss = np.exp(-t * (0.25 * r * r + i2))
    out = 2.0 * (gauss * inner)[::-1].sum(axis=0)
    return float(out[0]) if scalar else out


def htr_estimate_bound(t: float, params, tau, policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """Right-hand side of the pointwise bound on |h_{t,r}(tau)|.

    2 r e^{-r^2 t/4 - 4 tau^2 t} sum_m e^{-(m-1)^2 (1+r^-2) t} (1 + I^2 + e^{I^2 r t}).
    The sum diverges for r >= 1, in which case the bound is +inf.
    """
    p = _params(params)
    r = p.r
    # exponent per j: -j^2 c^2 t + (j^2 c^2 + 4 tau^2) r t
    rate = p.c2 * t * (1.0 - r)
    if rate <= 0:
        return math.inf
    log_eps = -math.log(policy.eps_tail)
    j_max = int(math.ceil(math.sqrt((log_eps + 4.0 * tau * tau * r * t + 50.0) / rate))) + 3
    js = np.arange(1, j_max + 1, 2, dtype=float)
    i2 = js * js * p.c2 + 4.0 * tau * tau
    terms = np.exp(-js * js * p.c2 * t) * (1.0 + i2) + np.exp(-js * js * p.c2 * t + i2 * r * t)
    return float(4.0 * r * math.exp(-0.25 * r * r * t - 4.0 * tau * tau * t) * terms.sum())


def h_discrete(t: float, params, n: int, policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """h_{t,r}(n): the lowest K-type eigenvalue plus the blocks m = n+2, n+4, ...

    Depends only on |n|, so h(n) = h(-n).
    """
    if t <= 0:
        raise DomainError("t must be positive")
    p = _params(params)
    n = abs(int(n))
    if n < 2 or n % 2:
        raise DomainError(f"n must be an even integer with |n| >= 2, got {n}")
    r = p.r
    lam = minimal_ktype_eigenvalue(p, n)
    j_max = max(_odd_cutoff(t, r, math.sqrt(p.c2), policy, n0=n - 1), n + 1)
    js = np.arange(n + 1, j_max + 1, 2, dtype=float)  # j = m - 1 for m = n+2, n+4, ...
    root = np.sqrt(js * js * p.c2 - (n - 1) ** 2)
    rest = _pair_sum(t, r, root)[::-1].sum()
    return float(lam * math.exp(-t * lam * lam) + rest)


def _discrete_n_max(t, params, policy):
    """Even n beyond which exp(-t lambda(n)^2) is negligible."""
    p = _params(params)
    log_eps = -math.log(policy.eps_tail)
    # |lambda(n)| = r/2 + (n-1)/r
    n = int(math.ceil(1 + p.r * math.sqrt((log_eps + 20.0) / t))) + 2
    n += n % 2
    if n // 2 > policy.max_terms:
        raise TruncationError(f"discrete n-sum needs {n // 2} terms, more than max_terms")
    return n


def tr_discrete_part(t: float, params, surface: SurfaceData,
                     policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """Discrete-series contribution to Tr(D e^{-tD^2}).

    vol/(2pi) sum_{n even, n != 0} (|n| - 1) h(n) - kappa_t sum_n h(n), with
    the +-n pairs folded: 2 (2g-2+kappa) sum_{n>=2} (n-1) h(n) - 2 kappa_t sum h(n).
    """
    if surface.spin.eps_k != 1:
        raise DomainError("only spin structures trivial along the fiber are supported")
    chi = 2 * surface.genus - 2 + surface.kappa
    kt = kappa_trivial(surface)
    total = 0.0
    for n in range(_discrete_n_max(t, params, policy), 1, -2):
        total += (2.0 * chi * (n - 1) - 2.0 * kt) * h_discrete(t, params, n, policy)
    return total


# --- theta sum and Poisson dual --------------------------------------------

def _poisson_lhs(p, t, c2, eps):
    jmax = int(math.ceil(math.sqrt((-math.log(eps) + 40.0 + 2 * p * 10) / (c2 * t)))) + 3
    js = np.arange(1, jmax + 1, 2, dtype=float)
    x = js * js * c2
    return float(2.0 * (x ** p * np.exp(-x * t))[::-1].sum())


def _poly_derivative(poly, beta):
    """d/dt of sum_e c_e t^e exp(-beta/t), returned as the same kind of dict."""
    out = {}
    for e, coef in poly.items():
        out[e - 1] = out.get(e - 1, 0.0) + e * coef
        if beta:
            out[e - 2] = out.get(e - 2, 0.0) + beta * coef
    return out


def _poisson_rhs(p, t, c2, eps):
    c = math.sqrt(c2)
    total = 0.0
    k = 0
    while True:
        beta = math.pi ** 2 * k * k / (4.0 * c2)
        if k > 0 and beta / t > -math.log(eps) + 60.0:
            break
        poly = {-0.5: math.sqrt(math.pi) / (2.0 * c)}
        for _ in range(p):
            poly = _poly_derivative(poly, beta)
        val = sum(coef * t ** e for e, coef in poly.items()) * math.exp(-beta / t)
        weight = 1.0 if k == 0 else 2.0 * (-1.0) ** k
        total += weight * val
        k += 1
    return (-1.0) ** p * total


def poisson_theta(p: int, t: float, params, side: str = "lhs",
                  policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """sum_{m even} (m-1)^{2p} c^{2p} e^{-(m-1)^2 c^2 t} with c^2 = 1 + r^-2.

    ``side="rhs"`` evaluates the Poisson-dual form, differentiating each
    Gaussian term of the dual sum in closed form.
    """
    if p < 0 or int(p) != p:
        raise DomainError("p must be a non-negative integer")
    if t <= 0:
        raise DomainError("t must be positive")
    c2 = _params(params).c2
    if side == "lhs":
        return _poisson_lhs(int(p), t, c2, policy.eps_tail)
    if side == "rhs":
        return _poisson_rhs(int(p), t, c2, policy.eps_tail)
    raise DomainError(f"side must be 'lhs' or 'rhs', got {side!r}")


# --- small-t fitting --------------------------------------------------------

@dataclass(frozen=True)
class AsymptoticFit:
    exponents: tuple[tuple[float, bool], ...]
    coefficients: tuple[float, ...]
    residual: float
    condition: float = float("nan")

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for (pw, lg), c in zip(self.exponents, self.coefficients):
            out = out + c * t ** pw * (np.log(t) if lg else 1.0)
        return out

    def coefficient(self, power: float, has_log: bool = False) -> float:
        for (pw, lg), c in zip(self.exponents, self.coefficients):
            if abs(pw - power) < 1e-12 and lg == has_log:
                return c
        return 0.0


def small_time_template(n_terms: int = 4, with_logs: bool = True):
    """Exponents t^{(k-3)/2} for k < n_terms, and t^{k-1} log t when with_logs.

    Log terms t^{k-1} log t are included for powers that the half-integer list
    reaches.
    """
    template = [((k - 3) / 2.0, False) for k in range(n_terms)]
    if with_logs:
        top = (n_terms - 4) / 2.0
        k = 0
        while k - 1 <= top + 1e-12:
            template.append((float(k - 1), True))
            k += 1
    return tuple(template)


def fit_small_time(samples, template) -> AsymptoticFit:
    """Least-squares fit of sum_i c_i t^{p_i} (log t)^{q_i} to (t, value) pairs.

    Times are rescaled by their geometric mean before building the basis and
    every column is normalised, which keeps log and power columns comparable;
    the coefficients are mapped back to the unscaled basis.  Warns when the
    normalised design matrix has condition number above 1e12.
    """
    samples = list(samples)
    template = tuple((float(p), bool(q)) for p, q in template)
    if len(samples) < 2 * len(template):
        raise FitError(f"need at least {2 * len(template)} samples, got {len(samples)}")
    t = np.array([s[0] for s in samples], dtype=float)
    y = np.array([s[1] for s in samples], dtype=float)
    if np.any(t <= 0):
        raise FitError("sample times must be positive")
    t0 = math.exp(np.mean(np.log(t)))
    u = t / t0
    lu, l0 = np.log(u), math.log(t0)
    # log columns use log(t/t0); mixing in log(t0) would make them nearly
    # parallel to the plain power columns
    a = np.stack([u ** pw * (lu if lg else 1.0) for pw, lg in template], axis=1)
    scale = np.linalg.norm(a, axis=0)
    if np.any(scale == 0):
        raise FitError("degenerate basis column")
    an = a / scale
    cond = float(np.linalg.cond(an))
    if cond > 1e12:
        warnings.warn(f"ill-conditioned small-time fit (condition number {cond:.2e})", RuntimeWarning)
    d, *_ = np.linalg.lstsq(an, y, rcond=None)
    resid = float(np.linalg.norm(an @ d - y) / max(np.linalg.norm(y), 1e-300))
    d = d / scale
    coeffs = []
    for i, (pw, lg) in enumerate(template):
        c = d[i]
        if not lg:
            # u^p log u = t0^-p (t^p log t - l0 t^p) feeds the plain column
            for k, (pk, lk) in enumerate(template):
                if lk and abs(pk - pw) < 1e-12:
                    c -= l0 * d[k]
        coeffs.append(float(c / t0 ** pw))
    coeffs = tuple(coeffs)
    return AsymptoticFit(template, coeffs, resid, cond)
