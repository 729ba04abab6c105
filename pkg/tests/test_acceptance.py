"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` or ``python tests/test_acceptance.py``.
"""
import math
import sys
import time

import numpy as np
import pytest

from adiabatic_eta.eta import (adiabatic_sweep, empirical_order, eta_d1, eta_d1_mellin_oracle)
from adiabatic_eta.heat import (h_principal, h_principal_series_form, htr_estimate_bound,
                                poisson_theta)
from adiabatic_eta.selberg import QuadratureSpec, geometric_side, jfactor, principal_trace
from adiabatic_eta.specfn import digamma, hurwitz_zeta, zeta0
from adiabatic_eta.spectrum import (continuous_bands, discrete_block, discrete_eigenvalues,
                                    gap_from_bnormal, principal_block, principal_eigenvalues)
from adiabatic_eta.surface import (HyperbolicClass, SpinStructure, SurfaceData, adiabatic_limit,
                                   classes_from_lengths)

SWEEP_R = (0.4, 0.2, 0.1, 0.05)


def _cusped(kappa_t=2):
    return SurfaceData(0, 4).with_kappa_t(kappa_t)


def criterion_1():
    start = time.perf_counter()
    err = 0.0
    for a in (0.0, 0.005, 0.125, 0.5):
        if a > 0:
            err = max(err, abs(hurwitz_zeta(0, a) - (0.5 - a)),
                      abs(hurwitz_zeta(-1, a) + 0.5 * (a * a - a + 1 / 6)))
        err = max(err, abs(zeta0(0, a) + a / 2), abs(zeta0(-1, a) + 0.25 * (a * a - 1 / 3)))
    rng = np.random.default_rng(11)
    z = rng.uniform(0.1, 8, 200) + 1j * rng.uniform(-10, 10, 200)
    dig = max(float(np.max(np.abs(digamma(z + 1) - digamma(z) - 1 / z))),
              float(np.max(np.abs(digamma(z) + digamma(z + 0.5) - 2 * (digamma(2 * z) - math.log(2))))))
    elapsed = time.perf_counter() - start
    ok = err <= 1e-12 and dig <= 1e-11 and elapsed < 1.0
    return ok, f"zeta err {err:.1e}, digamma err {dig:.1e}, {elapsed:.2f} s"


def criterion_2():
    start = time.perf_counter()
    rng = np.random.default_rng(12)
    worst = 0.0
    for _ in range(500):
        r = rng.uniform(0.02, 3.0)
        m = 2 * int(rng.integers(-12, 13))
        tau = rng.uniform(-20, 20)
        ev = np.linalg.eigvalsh(principal_block(r, m, tau))
        pair = principal_eigenvalues(r, m, tau)
        worst = max(worst, abs(ev[0] - pair.lambda_minus), abs(ev[1] - pair.lambda_plus))
        n = 2 * int(rng.integers(1, 10))
        mm = n + 2 * int(rng.integers(1, 15))
        ev = np.sort(np.linalg.eigvals(discrete_block(r, n, mm)).real)
        pair = discrete_eigenvalues(r, n, mm)
        worst = max(worst, abs(ev[0] - pair.lambda_minus), abs(ev[1] - pair.lambda_plus))
    elapsed = time.perf_counter() - start
    return worst <= 1e-10 and elapsed < 1.0, f"max |dlambda| {worst:.1e}, {elapsed:.2f} s"


def criterion_3():
    worst = 0.0
    trivial = _cusped(4)
    for r in (0.05, 0.3, 1.0, 2.0):
        for b in continuous_bands(r, trivial, 8):
            lo, hi = gap_from_bnormal(r, b.m)
            worst = max(worst, abs(lo - b.gap_low), abs(hi - b.gap_high))
    odd = {b.m for b in continuous_bands(1.0, trivial, 8)}
    flipped = SurfaceData(0, 4, SpinStructure((), (), (1, 1, 1, 1), -1))
    even = {b.m for b in continuous_bands(1.0, flipped, 8)}
    parity = all(m % 2 for m in odd) and all(m % 2 == 0 for m in even) and 0 in even
    return worst <= 1e-12 and parity, f"gap mismatch {worst:.1e}, parity switch {parity}"


def criterion_4():
    worst = 0.0
    for p in (0, 1, 2):
        for t in (0.1, 1.0):
            for r in (0.3, 1.0):
                worst = max(worst, abs(poisson_theta(p, t, r, "lhs") - poisson_theta(p, t, r, "rhs")))
    spot = poisson_theta(0, 1.0, 1.0, "lhs"), poisson_theta(0, 1.0, 1.0, "rhs")
    ok = worst <= 1e-9 and all(abs(v - 0.27067) < 1e-5 for v in spot)
    return ok, f"max |lhs-rhs| {worst:.1e}, spot ({spot[0]:.5f}, {spot[1]:.5f})"


def criterion_5():
    grid_t = np.linspace(0.2, 1.0, 5)
    grid_r = np.linspace(0.2, 1.0, 5)
    taus = np.linspace(0.0, 5.0, 5)
    worst, bound_ok = 0.0, True
    for t in grid_t:
        for r in grid_r:
            a = h_principal(t, r, taus)
            b = h_principal_series_form(t, r, taus)
            worst = max(worst, float(np.max(np.abs(a - b))))
            bound_ok &= all(abs(h) <= htr_estimate_bound(t, r, x) for x, h in zip(taus, a))
    return worst <= 1e-8 and bound_ok, f"max cross-form diff {worst:.1e}, estimate holds {bound_ok}"


def criterion_6():
    worst = 0.0
    for m in (0, 2, 4, 6, 8):
        for tau in (0.25, 0.5, 1.0, 2.0, 5.0):
            a, b = jfactor(m, tau)
            worst = max(worst, abs(a - b))
    return worst <= 1e-10, f"max |formA-formB| {worst:.1e}"


def criterion_7():
    start = time.perf_counter()
    closed_err, oracle_err = 0.0, 0.0
    for surf in (SurfaceData(2, 0), _cusped(2), SurfaceData(1, 3).with_kappa_t(1)):
        chi = 2 * surf.genus - 2 + surf.kappa
        kt = surf.kappa_trivial()
        for r in (0.05, 0.1, 0.2, 0.5, 1.0):
            expected = -chi * (1 / 6 + r ** 4 / 8) - kt * r * r / 2
            closed_err = max(closed_err, abs(eta_d1(r, surf).value - expected))
        for r in (0.2, 0.1):
            oracle_err = max(oracle_err, abs(eta_d1_mellin_oracle(r, surf) - eta_d1(r, surf).value))
    elapsed = time.perf_counter() - start
    ok = closed_err <= 1e-13 and oracle_err <= 1e-5 and elapsed < 30
    return ok, f"closed form err {closed_err:.1e}, Mellin oracle err {oracle_err:.1e}, {elapsed:.1f} s"


def criterion_8():
    start = time.perf_counter()
    cases = [(SurfaceData(2, 0), ()), (_cusped(2), classes_from_lengths([1.5]))]
    ok, notes = True, []
    for surf, classes in cases:
        sw = adiabatic_sweep(SWEEP_R, surf, classes, method="heat")
        target = adiabatic_limit(surf)
        ok &= abs(sw.limit - target) <= 1e-3
        note = f"(g={surf.genus},k={surf.kappa}) limit {sw.limit:.10f} vs {target:.10f}"
        for name in ("eta_d2", "eta_p"):
            vals = [getattr(row, name) for row in sw.rows]
            shrinking = all(abs(b) < abs(a) for a, b in zip(vals, vals[1:]))
            # the true order is exactly 2, approached from below for eta_p; the
            # local slope over the two smallest radii is the sharpest estimate
            local = empirical_order(SWEEP_R[-2:], vals[-2:])
            scaled = [abs(v) / r ** 2 for v, r in zip(vals, SWEEP_R)]
            bounded = max(scaled) / min(scaled) < 2.0
            ok &= shrinking and local >= 1.95 and bounded
            note += f", {name} order {sw.orders[name]:.2f} (local {local:.2f})"
        notes.append(note)
    elapsed = time.perf_counter() - start
    ok &= elapsed < 600
    return ok, "; ".join(notes) + f"; {elapsed:.1f} s"


def criterion_9():
    ts = np.geomspace(0.01, 1.0, 9)
    cases = [(SurfaceData(2, 0), ()), (_cusped(2), classes_from_lengths([1.5]))]
    spreads = []
    for surf, classes in cases:
        consts = []
        for r in (0.4, 0.2, 0.1):
            ratio = [abs(t ** 1.5 * principal_trace(t, r, surf, classes)[0]) / r ** 2 for t in ts]
            consts.append(max(ratio))
        spreads.append(max(consts) / min(consts))
    return max(spreads) < 10, "spread of sup_t |t^1.5 Tr_p|/r^2 over r: " + ", ".join(
        f"{s:.2f}x" for s in spreads)


def criterion_10():
    surf = _cusped(2)
    classes = classes_from_lengths([1.5])
    stable = 0.0
    for t, r in ((1.0, 1.0), (0.3, 0.4), (0.1, 0.2)):
        a = geometric_side(t, r, surf, classes).total
        b = geometric_side(t, r, surf, classes, QuadratureSpec().refined(0.01)).total
        stable = max(stable, abs(a - b))
    extra = (HyperbolicClass(2.3, -2.0, 2),)
    base = geometric_side(0.5, 0.3, surf).total
    ga = geometric_side(0.5, 0.3, surf, classes).total
    gb = geometric_side(0.5, 0.3, surf, extra).total
    both = geometric_side(0.5, 0.3, surf, classes + extra).total
    additive = abs((both - base) - (ga - base) - (gb - base))
    decay = [abs(geometric_side(t, 0.1, surf, classes).total) for t in (1.0, 4.0, 16.0)]
    decays = decay[0] > decay[1] > decay[2]
    ok = stable <= 1e-7 and additive <= 1e-12 and decays
    return ok, f"refinement change {stable:.1e}, additivity defect {additive:.1e}, decays {decays}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10]


def _report(index, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {index}: {detail}"
    print(line, flush=True)
    return line


@pytest.mark.parametrize("index", range(1, 11))
def test_acceptance_criterion(index, capsys):
    ok, detail = CRITERIA[index - 1]()
    with capsys.disabled():
        print()
        _report(index, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    results = [CRITERIA[i - 1]() for i in range(1, 11)]
    for i, (ok, detail) in enumerate(results, start=1):
        _report(i, ok, detail)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
