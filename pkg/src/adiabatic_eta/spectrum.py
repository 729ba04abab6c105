"""Eigenvalues of the Dirac operator on individual K-types.

Weights ``m`` in the block formulas are even integers and the blocks couple
the K-types m-2 and m; the relevant quantity is (m-1).  Continuous bands are
indexed the other way, by the integer that actually appears in the gap
formula (odd for fiber-trivial spin structures, even otherwise).  A block with
weight m therefore corresponds to band index m-1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .surface import SurfaceData, kappa_trivial


@dataclass(frozen=True)
class SpectralParams:
    r: float

    def __post_init__(self):
        if not (self.r > 0 and math.isfinite(self.r)):
            raise DomainError(f"fiber radius r must be positive and finite, got {self.r}")

    @property
    def ell(self) -> float:
        return (2.0 - self.r * self.r) / self.r

    @property
    def c2(self) -> float:
        """1 + r^{-2}."""
        return 1.0 + 1.0 / (self.r * self.r)


def _params(params) -> SpectralParams:
    return params if isinstance(params, SpectralParams) else SpectralParams(float(params))


@dataclass(frozen=True)
class EigenPair:
    lambda_plus: float
    lambda_minus: float
    m: int
    series: str  # "principal" or "discrete"
    tau: float | None = None
    n: int | None = None


@dataclass(frozen=True)
class Band:
    """Gap (gap_low, gap_high) around -r/2; spectrum outside it has this multiplicity."""

    m: int
    gap_low: float
    gap_high: float
    multiplicity: int


def _check_even(m, name="m"):
    if int(m) != m or int(m) % 2:
        raise DomainError(f"{name} must be an even integer, got {m}")


def principal_block(params, m: int, tau: float) -> np.ndarray:
    p = _params(params)
    _check_even(m)
    r, half_ell = p.r, 0.5 * p.ell
    return np.array(
        [
            [(m - 2) / r + half_ell, -1j * (m - 1 - 2j * tau)],
            [1j * (m - 1 + 2j * tau), -m / r + half_ell],
        ],
        dtype=complex,
    )


def principal_eigenvalues(params, m: int, tau: float) -> EigenPair:
    p = _params(params)
    _check_even(m)
    root = math.sqrt((m - 1) ** 2 * p.c2 + 4.0 * tau * tau)
    return EigenPair(-0.5 * p.r + root, -0.5 * p.r - root, int(m), "principal", tau=float(tau))


def _check_discrete(n, m):
    _check_even(n, "n")
    if n < 2:
        raise DomainError(f"discrete series needs n >= 2, got {n}")
    if int(m) != m or m <= n or (m - n) % 2:
        raise DomainError(f"discrete block needs m in n+2, n+4, ...; got n={n}, m={m}")


def discrete_block(params, n: int, m: int) -> np.ndarray:
    p = _params(params)
    _check_discrete(n, m)
    r, half_ell = p.r, 0.5 * p.ell
    return np.array(
        [[(m - 2) / r + half_ell, n - m], [-(n + m - 2), -m / r + half_ell]], dtype=float
    )


def discrete_eigenvalues(params, n: int, m: int) -> EigenPair:
    p = _params(params)
    _check_discrete(n, m)
    radicand = (m - 1) ** 2 * p.c2 - (n - 1) ** 2
    root = math.sqrt(radicand)
    return EigenPair(-0.5 * p.r + root, -0.5 * p.r - root, int(m), "discrete", n=int(n))


def minimal_ktype_eigenvalue(params, n: int, sign: int = 1) -> float:
    """Eigenvalue on the lowest K-type of the discrete series of weight sign*n.

    Holomorphic and antiholomorphic partners give the same value.
    """
    p = _params(params)
    _check_even(abs(n), "n")
    if abs(n) < 2:
        raise DomainError("n must satisfy |n| >= 2")
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    return -0.5 * p.r + (1 - abs(n)) / p.r


def gap_half_width(params, m: int) -> float:
    return abs(m) * math.sqrt(_params(params).c2)


def continuous_bands(params, surface: SurfaceData, max_index: int) -> list[Band]:
    """Gaps of the essential spectrum for band indices |m| <= max_index.

    Odd indices when the spin structure is trivial on the fiber, even ones
    (including the gapless m = 0) otherwise.  Each band carries kappa_t
    copies; with no trivial cusp there is no continuous spectrum at all.
    """
    p = _params(params)
    if max_index < 1:
        raise DomainError("max_index must be >= 1")
    kt = kappa_trivial(surface)
    if kt == 0:
        return []
    start = 1 if surface.spin.eps_k == 1 else 0
    bands = []
    for m in range(-max_index, max_index + 1):
        if (m - start) % 2:
            continue
        w = gap_half_width(p, m)
        bands.append(Band(m, -0.5 * p.r - w, -0.5 * p.r + w, kt))
    return bands


def bnormal_matrix(params, m: int, s: float) -> np.ndarray:
    p = _params(params)
    return np.array(
        [[-2.0 * s, -1j * m * p.c2], [1j * m, 2.0 * s]], dtype=complex
    ) - 0.5 * p.r * np.eye(2)


def bnormal_det(params, m: int, s: float, lam: float) -> float:
    """det(N(s) - lam), which is real: (lam + r/2)^2 - 4 s^2 - m^2 (1 + r^-2)."""
    p = _params(params)
    x = lam + 0.5 * p.r
    return x * x - 4.0 * s * s - m * m * p.c2


def gap_from_bnormal(params, m: int) -> tuple[float, float]:
    """Open interval of lam with det(N(s) - lam) != 0 for every real s.

    The determinant is x^2 - 4 s^2 - m^2 c^2 with x = lam + r/2; it has a real
    zero in s exactly when x^2 >= m^2 c^2.
    """
    p = _params(params)
    w = abs(m) * math.sqrt(p.c2)
    return (-0.5 * p.r - w, -0.5 * p.r + w)
