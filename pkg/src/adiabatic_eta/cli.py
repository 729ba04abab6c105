"""Command-line front end.

Every command writes a single artifact (JSON or CSV) to stdout or ``--out``.
JSON output embeds the resolved configuration; CSV files start with a
versioned header comment.  Failures print a JSON error object to stderr and
exit with 2 (config parse), 3 (validation) or 4 (numeric failure).
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .errors import ConfigError, DomainError, EtaError
from .eta import adiabatic_sweep, eta_total
from .heat import TruncationPolicy, tr_discrete_part
from .selberg import QuadratureSpec, geometric_side, principal_trace
from .spectrum import SpectralParams, continuous_bands
from .surface import SurfaceConfig, SurfaceData, load_config

CSV_SCHEMA = "adiabatic-eta-csv/1"
JSON_SCHEMA = "adiabatic-eta-json/1"
COMMANDS = ("spectrum", "heat", "trace", "eta", "sweep", "selftest")

EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, EXIT_NUMERIC = 0, 2, 3, 4


@dataclasses.dataclass(frozen=True)
class RunConfig:
    command: str
    surface_path: str | None = None
    r: tuple[float, ...] = (1.0,)
    t: tuple[float, ...] = (1.0,)
    max_weight: int = 3
    output: str | None = None
    format: str = "json"
    abs_tol: float | None = None
    eps_tail: float | None = None
    method: str = "heat"
    workers: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}", field="command")
        if self.format not in ("json", "csv"):
            raise ConfigError("format must be json or csv", field="format")
        if self.surface_path is not None and not os.path.isfile(self.surface_path):
            raise ConfigError(f"config file not found: {self.surface_path}", field="config")
        for name in ("r", "t"):
            vals = getattr(self, name)
            if not vals or any(not (v > 0 and math.isfinite(v)) for v in vals):
                raise ConfigError(f"--{name} values must be positive and finite", field=name)
        for name in ("abs_tol", "eps_tail"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigError(f"--{name.replace('_', '-')} must be positive", field=name)
        if self.max_weight < 1:
            raise ConfigError("--max-weight must be >= 1", field="max_weight")
        if self.method not in ("heat", "analytic"):
            raise ConfigError("--method must be heat or analytic", field="method")
        if self.command in ("eta", "sweep") and max(self.r) > 0.5:
            raise ConfigError("eta values are computed for fiber radii r <= 0.5", field="r")

    def quad(self) -> QuadratureSpec:
        return QuadratureSpec() if self.abs_tol is None else QuadratureSpec(abs_tol=self.abs_tol)

    def policy(self) -> TruncationPolicy:
        return TruncationPolicy() if self.eps_tail is None else TruncationPolicy(eps_tail=self.eps_tail)


def _float_list(text: str, name: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"--{name} expects comma-separated numbers, got {text!r}", field=name) from None


def _workers_from_env() -> int:
    raw = os.environ.get("ETA_NUM_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"ETA_NUM_THREADS must be an integer, got {raw!r}",
                          field="ETA_NUM_THREADS") from None
    if n < 1:
        raise ConfigError("ETA_NUM_THREADS must be >= 1", field="ETA_NUM_THREADS")
    return n


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message, field="argv")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="adiabatic-eta", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="surface JSON config (default: genus 2, no cusps)")
        p.add_argument("--r", default="1.0" if name != "sweep" else "0.4,0.2,0.1,0.05",
                       help="fiber radius, or a comma-separated list")
        p.add_argument("--t", default="1.0", help="time, or a comma-separated grid")
        p.add_argument("--max-weight", type=int, default=3)
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=("json", "csv"),
                       default="csv" if name in ("spectrum", "sweep") else "json")
        p.add_argument("--abs-tol", type=float)
        p.add_argument("--eps-tail", type=float)
        p.add_argument("--method", choices=("heat", "analytic"), default="heat")
    return parser


def parse_args(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    return RunConfig(
        command=ns.command,
        surface_path=ns.config,
        r=_float_list(ns.r, "r"),
        t=_float_list(ns.t, "t"),
        max_weight=ns.max_weight,
        output=ns.out,
        format=ns.format,
        abs_tol=ns.abs_tol,
        eps_tail=ns.eps_tail,
        method=ns.method,
        workers=_workers_from_env(),
    )


def _load_surface(cfg: RunConfig) -> SurfaceConfig:
    if cfg.surface_path is None:
        return SurfaceConfig(SurfaceData(2, 0))
    return load_config(cfg.surface_path)


def _to_json(obj):
    """json.dumps default hook for the library's result objects."""
    if hasattr(obj, "as_dict"):
        return obj.as_dict()
    if dataclasses.is_dataclass(obj):
        return dataclasses.asdict(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _resolved(cfg: RunConfig, sc: SurfaceConfig | None) -> dict:
    out = dataclasses.asdict(cfg)
    out.pop("output")
    out["quadrature"] = dataclasses.asdict(cfg.quad())
    out["truncation"] = dataclasses.asdict(cfg.policy())
    if sc is not None:
        out["surface"] = sc.to_dict()
    return out


# --- commands ---------------------------------------------------------------

def cmd_spectrum(cfg, sc):
    # gaps depend on |m| only, so the table lists m >= 0
    rows = []
    for r in cfg.r:
        for b in continuous_bands(SpectralParams(r), sc.surface, cfg.max_weight):
            if b.m < 0:
                continue
            rows.append({"r": r, "m": b.m, "gap_low": b.gap_low, "gap_high": b.gap_high,
                         "multiplicity": b.multiplicity})
    return rows, ["r", "m", "gap_low", "gap_high", "multiplicity"]


def cmd_heat(cfg, sc):
    rows = []
    for r in cfg.r:
        for t in cfg.t:
            disc = tr_discrete_part(t, r, sc.surface, cfg.policy())
            prin, err = principal_trace(t, r, sc.surface, sc.classes, cfg.quad(), cfg.policy())
            rows.append({"r": r, "t": t, "tr_discrete": disc, "tr_principal": prin,
                         "tr_total": disc + prin, "err_estimate": err})
    return rows, ["r", "t", "tr_discrete", "tr_principal", "tr_total", "err_estimate"]


_TRACE_FIELDS = ["identity_cont", "identity_disc", "hyperbolic", "cusp_psi", "cusp_disc",
                 "cusp_log2", "h_zero", "pv_jterm", "total"]


def cmd_trace(cfg, sc):
    rows = []
    for r in cfg.r:
        for t in cfg.t:
            tb = geometric_side(t, r, sc.surface, sc.classes, cfg.quad(), cfg.policy())
            row = {"r": r, "t": t}
            row.update({k: getattr(tb, k) for k in _TRACE_FIELDS})
            row["err_quadrature"] = tb.errors.get("quadrature", 0.0)
            row["err_truncation"] = tb.errors.get("truncation", 0.0)
            rows.append(row)
    return rows, ["r", "t"] + _TRACE_FIELDS + ["err_quadrature", "err_truncation"]


def cmd_eta(cfg, sc):
    rows, full = [], []
    for r in cfg.r:
        res = eta_total(r, sc.surface, sc.classes, cfg.method, cfg.quad(), cfg.policy())
        d = res.details
        rows.append({"r": r, "eta_d1": d["d1"].value, "eta_d2": d["d2"].value,
                     "eta_p": d["p"].value, "eta_total": res.value,
                     "err_estimate": res.err_estimate, "residue_r0": d["p"].residue_r0})
        full.append({"r": r, "total": res.value, "err_estimate": res.err_estimate,
                     "components": {k: d[k] for k in ("d1", "d2", "p")}})
    return rows, list(rows[0]), {"results": full}


def cmd_sweep(cfg, sc):
    sw = adiabatic_sweep(cfg.r, sc.surface, sc.classes, cfg.method, cfg.quad(), cfg.policy(),
                         workers=min(cfg.workers, len(cfg.r)))
    rows = [dataclasses.asdict(row) for row in sw.rows]
    summary = {"limit": sw.limit, "limit_err": sw.limit_err, "target": sw.target,
               "deviation": sw.deviation, "monotone": sw.monotone, "orders": sw.orders}
    return rows, list(rows[0]), {"summary": summary}


def _selftest_checks():
    """Quick invariants covering each module; returns (name, ok, detail) triples."""
    from .eta import eta_d1, eta_d1_mellin_oracle
    from .heat import h_principal, h_principal_series_form, poisson_theta
    from .selberg import jfactor
    from .specfn import digamma, hurwitz_zeta, zeta0
    from .spectrum import discrete_block, discrete_eigenvalues, gap_from_bnormal, gap_half_width
    from .spectrum import principal_block, principal_eigenvalues

    checks = []

    def add(name, err, tol):
        checks.append((name, bool(err <= tol), f"max error {err:.2e} (tol {tol:.0e})"))

    errs = []
    for a in (0.005, 0.125, 0.5):
        errs.append(abs(hurwitz_zeta(0.0, a) - (0.5 - a)))
        errs.append(abs(hurwitz_zeta(-1.0, a) + 0.5 * (a * a - a + 1 / 6)))
        errs.append(abs(zeta0(-1.0, a) + 0.25 * (a * a - 1 / 3)))
    errs.append(abs(digamma(2.5) - digamma(1.5) - 1 / 1.5))
    add("special functions", max(errs), 1e-11)

    rng = np.random.default_rng(0)
    errs = []
    for _ in range(50):
        r, tau, m = rng.uniform(0.05, 2), rng.uniform(-5, 5), 2 * int(rng.integers(-5, 6))
        ev = np.sort(np.linalg.eigvalsh(principal_block(r, m, tau)))
        pair = principal_eigenvalues(r, m, tau)
        errs.append(np.max(np.abs(ev - [pair.lambda_minus, pair.lambda_plus])))
        n = 2 * int(rng.integers(1, 4))
        mm = n + 2 * int(rng.integers(1, 4))
        ev = np.sort(np.linalg.eigvals(discrete_block(r, n, mm)).real)
        pair = discrete_eigenvalues(r, n, mm)
        errs.append(np.max(np.abs(ev - [pair.lambda_minus, pair.lambda_plus])))
    add("eigenvalue blocks", float(max(errs)), 1e-10)

    errs = [abs(gap_from_bnormal(r, m)[1] - gap_from_bnormal(r, m)[0] - 2 * gap_half_width(r, m))
            for r in (0.05, 1.0) for m in range(-4, 5)]
    add("band gaps", max(errs), 1e-12)

    errs = [abs(poisson_theta(p, t, 1.0, "lhs") - poisson_theta(p, t, 1.0, "rhs"))
            for p in (0, 1, 2) for t in (0.1, 1.0)]
    add("poisson identity", max(errs), 1e-9)

    taus = np.linspace(0, 5, 5)
    errs = [float(np.max(np.abs(h_principal(t, 0.5, taus) - h_principal_series_form(t, 0.5, taus))))
            for t in (0.2, 1.0)]
    add("heat kernel forms", max(errs), 1e-8)

    errs = []
    for m in (0, 2, 4):
        for tau in (0.25, 2.0):
            a, b = jfactor(m, tau)
            errs.append(abs(a - b))
    add("J factor", max(errs), 1e-10)

    surf = SurfaceData(2, 0)
    closed = eta_d1(0.1, surf).value
    oracle = eta_d1_mellin_oracle(0.1, surf)
    add("eta_d1 oracle", abs(closed - oracle), 1e-5)
    return checks


def cmd_selftest(cfg, sc):
    rows = [{"check": n, "passed": ok, "detail": d} for n, ok, d in _selftest_checks()]
    return rows, ["check", "passed", "detail"]


_DISPATCH = {"spectrum": cmd_spectrum, "heat": cmd_heat, "trace": cmd_trace,
             "eta": cmd_eta, "sweep": cmd_sweep, "selftest": cmd_selftest}


# --- output -----------------------------------------------------------------

def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(cfg: RunConfig, sc, rows, columns, extra=None) -> str:
    if cfg.format == "csv":
        buf = io.StringIO()
        buf.write(f"# {CSV_SCHEMA} command={cfg.command} version={__version__}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in columns])
        # trailing comments keep the table itself plot-ready
        for key, val in ((extra or {}).get("summary") or {}).items():
            buf.write(f"# {key}={json.dumps(val, default=_to_json)}\n")
        return buf.getvalue()
    doc = {"schema": JSON_SCHEMA, "version": __version__, "command": cfg.command,
           "config": _resolved(cfg, sc), "rows": rows}
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, default=_to_json, allow_nan=True) + "\n"


def _error(kind: str, exc: Exception, field=None) -> str:
    return json.dumps({"error": kind, "message": str(exc),
                       "field": field if field is not None else getattr(exc, "field", None),
                       "exception": type(exc).__name__})


def _guess_field(message: str) -> str:
    """Best match between a library error message and a config field."""
    for name, words in (("r", ("radius", "r must", "r_list")), ("t", ("t must",)),
                        ("config", ("spin", "kappa", "genus", "cusp"))):
        if any(w in message for w in words):
            return name
    return "parameters"


def run(cfg: RunConfig) -> tuple[int, str]:
    """Execute one command; returns (exit code, rendered artifact or error JSON)."""
    try:
        sc = None if cfg.command == "selftest" else _load_surface(cfg)
    except ConfigError as exc:
        code = EXIT_PARSE if str(exc.field or "").startswith("line") else EXIT_VALIDATION
        return code, _error("config", exc)
    try:
        result = _DISPATCH[cfg.command](cfg, sc)
    except DomainError as exc:
        return EXIT_VALIDATION, _error("validation", exc, field=_guess_field(str(exc)))
    except (EtaError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return EXIT_NUMERIC, _error("numeric", exc)
    rows, columns, *extra = result
    text = render(cfg, sc, rows, columns, extra[0] if extra else None)
    if cfg.command == "selftest" and not all(row["passed"] for row in rows):
        return EXIT_NUMERIC, text
    return EXIT_OK, text


def main(argv=None) -> int:
    try:
        cfg = parse_args(sys.argv[1:] if argv is None else argv)
    except ConfigError as exc:
        code = EXIT_PARSE if exc.field == "argv" else EXIT_VALIDATION
        print(_error("config", exc), file=sys.stderr)
        return code
    start = time.perf_counter()
    code, text = run(cfg)
    if code not in (EXIT_OK,) and text.startswith("{\"error\""):
        print(text, file=sys.stderr)
        return code
    if cfg.output:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"{cfg.command}: done in {time.perf_counter() - start:.2f} s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
