"""Geometric side of the Selberg trace formula for the kernel of D e^{-tD^2}.

Every continuous term is an integral over tau of some weight against the
principal-series transform h_{t,r}(tau).  All weights used here are even in
tau once the odd imaginary parts are dropped, so integrals are computed as
twice the integral over [0, cutoff].
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PoleError
from .heat import (CHUNK_ELEMENTS, DEFAULT_POLICY, TruncationPolicy, _odd_cutoff, _pair_parts,
                   h_discrete, h_principal, _discrete_n_max)
from .quadrature import integrate
from .specfn import digamma
from .spectrum import _params
from .surface import HyperbolicClass, SurfaceData, kappa_trivial

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-12
    margin: float = 2.0
    rule: str = "gk15-adaptive"
    max_panels: int = 20000

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError("abs_tol must be positive")
        if self.rule != "gk15-adaptive":
            raise DomainError(f"unknown quadrature rule {self.rule!r}")

    def refined(self, factor: float = 0.5) -> "QuadratureSpec":
        return QuadratureSpec(self.abs_tol * factor, self.rel_tol * factor,
                              self.margin * 2.0, self.rule, self.max_panels * 2)


DEFAULT_QUAD = QuadratureSpec()


def tau_cutoff(t: float, params, quad: QuadratureSpec = DEFAULT_QUAD,
               policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """|tau| beyond which e^{-4 tau^2 t} (shifted by r/2) is below eps_tail."""
    r = _params(params).r
    return math.sqrt(-math.log(policy.eps_tail) / (4.0 * t)) + 0.25 * r + quad.margin


def _even_integral(f, t, params, quad, policy):
    """Integral over the real line of an even integrand, as 2 * int_0^cutoff."""
    cut = tau_cutoff(t, params, quad, policy)
    res = integrate(f, 0.0, cut, abs_tol=0.5 * quad.abs_tol, rel_tol=quad.rel_tol,
                    max_panels=quad.max_panels, breakpoints=(1.0, 4.0))
    return 2.0 * res.value, 2.0 * res.error


@dataclass(frozen=True)
class TraceBreakdown:
    identity_cont: float
    identity_disc: float
    hyperbolic: float
    cusp_psi: float
    cusp_disc: float
    cusp_log2: float
    h_zero: float
    pv_jterm: float
    total: float
    errors: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "identity_cont": self.identity_cont,
            "identity_disc": self.identity_disc,
            "hyperbolic": self.hyperbolic,
            "cusp_psi": self.cusp_psi,
            "cusp_disc": self.cusp_disc,
            "cusp_log2": self.cusp_log2,
            "h_zero": self.h_zero,
            "pv_jterm": self.pv_jterm,
            "total": self.total,
            "errors": dict(self.errors),
        }

    @property
    def principal(self) -> float:
        """Everything except the discrete-series sums."""
        return self.total - self.identity_disc - self.cusp_disc


def _chi(surface: SurfaceData) -> int:
    return 2 * surface.genus - 2 + surface.kappa


def _sum_h_discrete(t, params, policy, weight):
    total = 0.0
    for n in range(_discrete_n_max(t, params, policy), 1, -2):
        total += weight(n) * h_discrete(t, params, n, policy)
    return total


def identity_term(t: float, params, surface: SurfaceData, quad: QuadratureSpec = DEFAULT_QUAD,
                  policy: TruncationPolicy = DEFAULT_POLICY):
    """(vol/2pi) int tau tanh(pi tau) h(tau) dtau and (vol/2pi) sum_n (|n|-1) h(n)."""
    if t <= 0:
        raise DomainError("t must be positive")
    chi = _chi(surface)
    val, _ = _even_integral(lambda x: x * np.tanh(np.pi * x) * h_principal(t, params, x, policy),
                            t, params, quad, policy)
    disc = 2.0 * chi * _sum_h_discrete(t, params, policy, lambda n: n - 1)
    return chi * val, disc


def hyperbolic_weight(c: HyperbolicClass) -> float:
    return c.chi_trace * c.u / (4.0 * math.pi * c.index * math.sinh(0.5 * c.u))


def hyperbolic_term(t: float, params, classes, quad: QuadratureSpec = DEFAULT_QUAD,
                    policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    if t <= 0:
        raise DomainError("t must be positive")
    total = 0.0
    for c in classes:
        val, _ = _even_integral(lambda x, u=c.u: np.cos(u * x) * h_principal(t, params, x, policy),
                                t, params, quad, policy)
        total += hyperbolic_weight(c) * val
    return total


# --- J factor ---------------------------------------------------------------

def jfactor(m: int, tau: float) -> tuple[complex, complex]:
    """The digamma combination attached to weight m, in two algebraically equal forms.

    A: psi(1/2+i tau) + psi(i tau) - psi((1+m)/2 + i tau) - psi((1-m)/2 + i tau)
    B: 2(psi(1+i tau) - psi(1+2i tau)) - 1/(i tau) + 2 log 2 - 4 sum_{j odd < |m|} j/(j^2+4 tau^2)
    """
    if tau == 0:
        raise PoleError("the J factor has a pole at tau=0")
    if int(m) != m:
        raise DomainError("m must be an integer")
    it = 1j * tau
    form_a = (digamma(0.5 + it) + digamma(it)
              - digamma(0.5 * (1 + m) + it) - digamma(0.5 * (1 - m) + it))
    odd = np.arange(1, abs(int(m)), 2, dtype=float)
    finite = float(np.sum(odd / (odd * odd + 4.0 * tau * tau)))
    form_b = 2.0 * (digamma(1.0 + it) - digamma(1.0 + 2.0 * it)) - 1.0 / it + 2.0 * LOG2 - 4.0 * finite
    return complex(form_a), complex(form_b)


def jfactor_even_part(k_max: int, tau) -> np.ndarray:
    """Real (even in tau) part of the J factor for weights k = 0, 2, ..., k_max.

    Returns an array of shape (k_max//2 + 1, len(tau)); finite at tau = 0.
    """
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    it = 1j * tau
    base = 2.0 * (digamma(1.0 + it) - digamma(1.0 + 2.0 * it)).real + 2.0 * LOG2
    odd = np.arange(1, k_max, 2, dtype=float)
    if len(odd) == 0:
        return base[None, :]
    terms = odd[:, None] / (odd[:, None] ** 2 + 4.0 * tau[None, :] ** 2)
    cum = np.vstack([np.zeros((1, len(tau))), np.cumsum(terms, axis=0)])
    return base[None, :] - 4.0 * cum


def jterm_density(t: float, params, tau, policy: TruncationPolicy = DEFAULT_POLICY,
                  weight_mode: str = "diagonal") -> np.ndarray:
    """sum_m Re J-factor(m) times the heat operator's diagonal entry on K-type m.

    The block with odd j = m - 1 couples K-types j-1 and j+1.  On it the heat
    operator is g_+ P_+ + g_- P_- with g(lam) = lam e^{-t lam^2}; its diagonal
    entries are S +- A with S = (g_+ + g_-)/2 and A = (g_+ - g_-) j / (2 r R).
    ``weight_mode="trace"`` keeps only S, i.e. splits the block trace evenly.
    Blocks j and -j give equal contributions.

    The factors on K-types j-1 and j+1 differ by 4 j/(j^2 + 4 tau^2), so only
    the lower one is accumulated; blocks are processed in chunks of j to bound
    memory at small t.
    """
    if weight_mode not in ("diagonal", "trace"):
        raise DomainError(f"unknown weight_mode {weight_mode!r}")
    p = _params(params)
    r = p.r
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    tau2 = 4.0 * tau * tau
    j_max = _odd_cutoff(t, r, math.sqrt(p.c2), policy)
    it = 1j * tau
    lower = 2.0 * (digamma(1.0 + it) - digamma(1.0 + 2.0 * it)).real + 2.0 * LOG2
    chunk = max(1, CHUNK_ELEMENTS // max(len(tau), 1))
    parts = []
    for j0 in range(1, j_max + 1, 2 * chunk):
        js = np.arange(j0, min(j0 + 2 * chunk, j_max + 1), 2, dtype=float)[:, None]
        w = js / (js * js + tau2)
        # factor on K-type j-1 for every block of the chunk
        lo = lower - 4.0 * np.vstack([np.zeros((1, len(tau))), np.cumsum(w[:-1], axis=0)])
        lower = lo[-1] - 4.0 * w[-1]
        root = np.sqrt(js * js * p.c2 + tau2)
        ch, sh = _pair_parts(t, r, root)
        s = root * sh - 0.5 * r * ch
        out = s * (2.0 * lo - 4.0 * w)
        if weight_mode == "diagonal":
            a = (2.0 * root * ch - r * sh) * js / (2.0 * r * root)
            out += 4.0 * a * w
        parts.append(out[::-1].sum(axis=0))
    return 2.0 * np.sum(parts[::-1], axis=0)


def pv_jterm(t: float, params, policy: TruncationPolicy = DEFAULT_POLICY,
             quad: QuadratureSpec = DEFAULT_QUAD, weight_mode: str = "diagonal") -> float:
    """-(1/4pi) p.v. int Tr(J^{-1} J' pi(f)) dtau for a single cusp.

    The odd 1/(i tau) part integrates to zero against the even weights and is
    dropped exactly, which is the principal value.
    """
    if t <= 0:
        raise DomainError("t must be positive")
    val, _ = _even_integral(lambda x: jterm_density(t, params, x, policy, weight_mode),
                            t, params, quad, policy)
    return -val / (4.0 * math.pi)


def cusp_terms(t: float, params, surface: SurfaceData, quad: QuadratureSpec = DEFAULT_QUAD,
               policy: TruncationPolicy = DEFAULT_POLICY):
    """(psi integral, discrete sum, log 2 integral, h(0) term) of the cusp contribution."""
    if t <= 0:
        raise DomainError("t must be positive")
    kt = kappa_trivial(surface)
    kappa = surface.kappa
    psi_int = disc = log2_int = h0 = 0.0
    if kt:
        val, _ = _even_integral(
            lambda x: digamma(1.0 + 2.0j * x).real * h_principal(t, params, x, policy),
            t, params, quad, policy)
        psi_int = -kt * val / math.pi
        disc = -2.0 * kt * _sum_h_discrete(t, params, policy, lambda n: 1.0)
        h0 = 0.5 * kt * h_principal(t, params, 0.0, policy)
    if kappa - kt:
        val, _ = _even_integral(lambda x: h_principal(t, params, x, policy), t, params, quad, policy)
        log2_int = (kappa - kt) * LOG2 * val / math.pi
    return psi_int, disc, log2_int, h0


CONTINUOUS_TERMS = ("identity", "hyperbolic", "cusp_psi", "cusp_log2", "h_zero", "jterm")


def continuous_term(name: str, t: float, params, surface: SurfaceData, classes=(),
                    quad: QuadratureSpec = DEFAULT_QUAD, policy: TruncationPolicy = DEFAULT_POLICY,
                    weight_mode: str = "diagonal") -> float:
    """One continuous piece of Tr_p(t), with its surface multiplicity included.

    Tr_p is the sum of these six pieces; they are exposed separately because
    their small-time behaviour differs term by term.
    """
    if t <= 0:
        raise DomainError("t must be positive")
    kt = kappa_trivial(surface)
    if name == "identity":
        return identity_term(t, params, surface, quad, policy)[0]
    if name == "hyperbolic":
        return hyperbolic_term(t, params, classes, quad, policy)
    if name == "cusp_psi":
        if not kt:
            return 0.0
        val, _ = _even_integral(
            lambda x: digamma(1.0 + 2.0j * x).real * h_principal(t, params, x, policy),
            t, params, quad, policy)
        return -kt * val / math.pi
    if name == "cusp_log2":
        if surface.kappa == kt:
            return 0.0
        val, _ = _even_integral(lambda x: h_principal(t, params, x, policy), t, params, quad, policy)
        return (surface.kappa - kt) * LOG2 * val / math.pi
    if name == "h_zero":
        return 0.5 * kt * h_principal(t, params, 0.0, policy) if kt else 0.0
    if name == "jterm":
        return kt * pv_jterm(t, params, policy, quad, weight_mode) if kt else 0.0
    raise DomainError(f"unknown term {name!r}; expected one of {CONTINUOUS_TERMS}")


def geometric_side(t: float, params, surface: SurfaceData, classes=(),
                   quad: QuadratureSpec = DEFAULT_QUAD, policy: TruncationPolicy = DEFAULT_POLICY,
                   weight_mode: str = "diagonal") -> TraceBreakdown:
    """All terms of the geometric side; the J term enters once per trivial cusp."""
    if surface.spin.eps_k != 1:
        raise DomainError("only spin structures trivial along the fiber are supported")
    cont, disc = identity_term(t, params, surface, quad, policy)
    hyp = hyperbolic_term(t, params, classes, quad, policy)
    psi_int, cdisc, log2_int, h0 = cusp_terms(t, params, surface, quad, policy)
    kt = kappa_trivial(surface)
    jt = kt * pv_jterm(t, params, policy, quad, weight_mode) if kt else 0.0
    total = 0.0
    for part in (cont, disc, hyp, psi_int, cdisc, log2_int, h0, jt):
        total += part
    # each integral is converged to abs_tol/2 on the half line
    n_int = 1 + len(classes) + (2 if kt else 0) + (1 if surface.kappa - kt else 0)
    errors = {"quadrature": n_int * quad.abs_tol, "truncation": policy.eps_tail}
    return TraceBreakdown(cont, disc, hyp, psi_int, cdisc, log2_int, h0, jt, total, errors)


def principal_density(t: float, params, surface: SurfaceData, classes=(),
                      policy: TruncationPolicy = DEFAULT_POLICY, weight_mode: str = "diagonal"):
    """Combined even tau-integrand of every continuous term, as a callable."""
    chi = _chi(surface)
    kt = kappa_trivial(surface)
    kappa = surface.kappa
    weights = [(c.u, hyperbolic_weight(c)) for c in classes]

    def f(x):
        h = h_principal(t, params, x, policy)
        w = chi * x * np.tanh(np.pi * x)
        for u, cw in weights:
            w = w + cw * np.cos(u * x)
        if kt:
            w = w - (kt / math.pi) * digamma(1.0 + 2.0j * x).real
        if kappa - kt:
            w = w + (kappa - kt) * LOG2 / math.pi
        out = w * h
        if kt:
            out = out - kt / (4.0 * math.pi) * jterm_density(t, params, x, policy, weight_mode)
        return out

    return f


def principal_trace(t: float, params, surface: SurfaceData, classes=(),
                    quad: QuadratureSpec = DEFAULT_QUAD, policy: TruncationPolicy = DEFAULT_POLICY,
                    weight_mode: str = "diagonal") -> tuple[float, float]:
    """Tr_p(t): the geometric side minus its discrete-series sums, with an error estimate.

    Evaluated as one tau-integral of the combined integrand plus the h(0) term.
    """
    if t <= 0:
        raise DomainError("t must be positive")
    if surface.spin.eps_k != 1:
        raise DomainError("only spin structures trivial along the fiber are supported")
    f = principal_density(t, params, surface, classes, policy, weight_mode)
    val, err = _even_integral(f, t, params, quad, policy)
    kt = kappa_trivial(surface)
    if kt:
        val += 0.5 * kt * h_principal(t, params, 0.0, policy)
    return val, err
