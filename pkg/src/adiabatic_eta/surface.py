"""Base orbifold data, spin structures and hyperbolic conjugacy classes.

Also holds the JSON config loader, since the config schema is just these
types serialised.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

from .errors import ConfigError, DomainError

_SIGNS = (1, -1)


def _check_signs(values, name):
    for i, v in enumerate(values):
        if v not in _SIGNS:
            raise DomainError(f"{name}[{i}] must be +1 or -1, got {v!r}")


@dataclass(frozen=True)
class SpinStructure:
    """Signs of the Z_2 representation on the generators x_i, y_i, h_j, k.

    ``eps_k = +1`` means the spin structure is trivial along the fiber.
    """

    eps_x: tuple[int, ...]
    eps_y: tuple[int, ...]
    eps_h: tuple[int, ...]
    eps_k: int = 1

    def __post_init__(self):
        object.__setattr__(self, "eps_x", tuple(self.eps_x))
        object.__setattr__(self, "eps_y", tuple(self.eps_y))
        object.__setattr__(self, "eps_h", tuple(self.eps_h))
        _check_signs(self.eps_x, "eps_x")
        _check_signs(self.eps_y, "eps_y")
        _check_signs(self.eps_h, "eps_h")
        _check_signs((self.eps_k,), "eps_k")
        if len(self.eps_x) != len(self.eps_y):
            raise DomainError("eps_x and eps_y must both have length g")
        # prod [x_i, y_i] prod h_j = 1 and commutators map to +1
        if math.prod(self.eps_h) != 1:
            raise DomainError("product of cusp signs eps_h must be +1")

    @property
    def fiber_trivial(self) -> bool:
        return self.eps_k == 1

    @classmethod
    def trivial(cls, genus: int, kappa: int) -> "SpinStructure":
        return cls((1,) * genus, (1,) * genus, (1,) * kappa, 1)


@dataclass(frozen=True)
class SurfaceData:
    genus: int
    kappa: int
    spin: SpinStructure = None

    def __post_init__(self):
        if self.genus < 0 or self.kappa < 0:
            raise DomainError("genus and cusp count must be non-negative")
        if 2 * self.genus - 2 + self.kappa <= 0:
            raise DomainError(
                f"2g-2+kappa = {2 * self.genus - 2 + self.kappa} must be positive "
                "(the quotient must have positive finite volume)"
            )
        if self.spin is None:
            object.__setattr__(self, "spin", SpinStructure.trivial(self.genus, self.kappa))
        if len(self.spin.eps_x) != self.genus:
            raise DomainError("spin structure has the wrong number of genus signs")
        if len(self.spin.eps_h) != self.kappa:
            raise DomainError("spin structure has the wrong number of cusp signs")

    @property
    def euler_char(self) -> int:
        """2 - 2g - kappa."""
        return 2 - 2 * self.genus - self.kappa

    def kappa_trivial(self) -> int:
        return kappa_trivial(self)

    def volume(self) -> float:
        return volume(self)

    def with_kappa_t(self, kappa_t: int) -> "SurfaceData":
        """Same (g, kappa) with the first ``kappa_t`` cusps trivial.

        The remaining cusps get -1; fails when kappa - kappa_t is odd.
        """
        if not 0 <= kappa_t <= self.kappa or (self.kappa - kappa_t) % 2:
            raise DomainError(f"no spin structure with kappa_t={kappa_t} for kappa={self.kappa}")
        eps_h = (1,) * kappa_t + (-1,) * (self.kappa - kappa_t)
        spin = SpinStructure(self.spin.eps_x, self.spin.eps_y, eps_h, self.spin.eps_k)
        return SurfaceData(self.genus, self.kappa, spin)


@dataclass(frozen=True)
class HyperbolicClass:
    """Hyperbolic conjugacy class: translation length, tr chi(gamma), centralizer index."""

    u: float
    chi_trace: float = 2.0
    index: int = 1

    def __post_init__(self):
        if not self.u > 0:
            raise DomainError(f"hyperbolic length u must be positive, got {self.u}")
        if int(self.index) != self.index or self.index < 1:
            raise DomainError(f"centralizer index must be an integer >= 1, got {self.index}")


def kappa_trivial(surface: SurfaceData) -> int:
    """Number of cusps along which the spin structure is trivial."""
    return sum(1 for e in surface.spin.eps_h if e == 1)


def volume(surface: SurfaceData) -> float:
    """vol(Gamma\\G) = 2 pi (2g - 2 + kappa); same number as the Poincare area of the base."""
    chi = 2 * surface.genus - 2 + surface.kappa
    if chi <= 0:
        raise DomainError("non-positive volume")
    return 2.0 * math.pi * chi


def adiabatic_limit(surface: SurfaceData) -> float:
    """-vol/(12 pi) = (2 - 2g - kappa)/6."""
    return -volume(surface) / (12.0 * math.pi)


def count_spin_structures(g: int, kappa: int) -> int:
    return 2 ** (2 * g + kappa)


def totally_nontrivial_exists(kappa: int) -> bool:
    if kappa < 1:
        raise DomainError("needs at least one cusp")
    return kappa % 2 == 0


def enumerate_spin_structures(g: int, kappa: int) -> Iterator[SpinStructure]:
    """All sign assignments compatible with prod eps_h = +1.

    With cusps the last cusp sign is forced, giving 2^{2g+kappa} structures;
    without cusps nothing is forced and there are 2^{2g+1}.
    """
    if g < 0 or kappa < 0:
        raise DomainError("g and kappa must be non-negative")
    free_h = max(kappa - 1, 0)
    for xs in itertools.product(_SIGNS, repeat=g):
        for ys in itertools.product(_SIGNS, repeat=g):
            for hs in itertools.product(_SIGNS, repeat=free_h):
                if kappa:
                    hs = hs + (math.prod(hs),)
                for k in _SIGNS:
                    yield SpinStructure(xs, ys, hs, k)


# --- JSON config ------------------------------------------------------------

@dataclass(frozen=True)
class SurfaceConfig:
    surface: SurfaceData
    classes: tuple[HyperbolicClass, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        sp = self.surface.spin
        return {
            "genus": self.surface.genus,
            "cusps": self.surface.kappa,
            "spin": {"x": list(sp.eps_x), "y": list(sp.eps_y), "h": list(sp.eps_h), "k": sp.eps_k},
            "hyperbolic_classes": [
                {"u": c.u, "chi_trace": c.chi_trace, "index": c.index} for c in self.classes
            ],
        }


def _need(obj, key, kind, where):
    if key not in obj:
        raise ConfigError(f"missing field '{where}{key}'", field=f"{where}{key}")
    val = obj[key]
    ok = isinstance(val, kind) and not (kind is not bool and isinstance(val, bool))
    if not ok:
        name = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise ConfigError(f"field '{where}{key}' must be {name}, got {val!r}", field=f"{where}{key}")
    return val


def _sign_list(obj, key, where, length):
    vals = _need(obj, key, list, where)
    for i, v in enumerate(vals):
        if isinstance(v, bool) or v not in _SIGNS:
            raise ConfigError(f"field '{where}{key}[{i}]' must be +1 or -1, got {v!r}",
                              field=f"{where}{key}[{i}]")
    if len(vals) != length:
        raise ConfigError(f"field '{where}{key}' must have length {length}, got {len(vals)}",
                          field=f"{where}{key}")
    return tuple(vals)


def parse_config(data: dict) -> SurfaceConfig:
    """Validate a decoded config dictionary; errors name the offending field."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object", field="$")
    known = {"genus", "cusps", "spin", "hyperbolic_classes"}
    extra = sorted(set(data) - known)
    if extra:
        raise ConfigError(f"unknown field '{extra[0]}'", field=extra[0])
    g = _need(data, "genus", int, "")
    kappa = _need(data, "cusps", int, "")
    if g < 0:
        raise ConfigError("field 'genus' must be >= 0", field="genus")
    if kappa < 0:
        raise ConfigError("field 'cusps' must be >= 0", field="cusps")
    if "spin" in data:
        sp = _need(data, "spin", dict, "")
        extra = sorted(set(sp) - {"x", "y", "h", "k"})
        if extra:
            raise ConfigError(f"unknown field 'spin.{extra[0]}'", field=f"spin.{extra[0]}")
        xs = _sign_list(sp, "x", "spin.", g)
        ys = _sign_list(sp, "y", "spin.", g)
        hs = _sign_list(sp, "h", "spin.", kappa)
        k = _need(sp, "k", int, "spin.")
        if k not in _SIGNS:
            raise ConfigError("field 'spin.k' must be +1 or -1", field="spin.k")
        if math.prod(hs) != 1:
            raise ConfigError("field 'spin.h': product of cusp signs must be +1", field="spin.h")
        spin = SpinStructure(xs, ys, hs, k)
    else:
        spin = SpinStructure.trivial(g, kappa)
    try:
        surface = SurfaceData(g, kappa, spin)
    except DomainError as exc:
        raise ConfigError(str(exc), field="genus") from exc
    classes = []
    for i, item in enumerate(data.get("hyperbolic_classes", [])):
        where = f"hyperbolic_classes[{i}]."
        if not isinstance(item, dict):
            raise ConfigError(f"'{where[:-1]}' must be an object", field=where[:-1])
        extra = sorted(set(item) - {"u", "chi_trace", "index"})
        if extra:
            raise ConfigError(f"unknown field '{where}{extra[0]}'", field=f"{where}{extra[0]}")
        u = float(_need(item, "u", (int, float), where))
        chi = float(item.get("chi_trace", 2.0))
        idx = item.get("index", 1)
        if isinstance(idx, bool) or not isinstance(idx, int):
            raise ConfigError(f"field '{where}index' must be int", field=f"{where}index")
        try:
            classes.append(HyperbolicClass(u, chi, idx))
        except DomainError as exc:
            raise ConfigError(str(exc), field=f"{where}u" if u <= 0 else f"{where}index") from exc
    return SurfaceConfig(surface, tuple(classes))


def load_config(path) -> SurfaceConfig:
    """Read and validate a JSON config; JSON syntax errors report line and column."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}",
                          field=f"line {exc.lineno}") from exc
    return parse_config(data)


def classes_from_lengths(lengths: Sequence[float], chi_trace: float = 2.0) -> tuple[HyperbolicClass, ...]:
    return tuple(HyperbolicClass(u, chi_trace, 1) for u in lengths)
