import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adiabatic_eta.errors import DomainError, FitError
from adiabatic_eta.heat import (TruncationPolicy, fit_small_time, h_discrete, h_principal,
                                h_principal_series_form, htr_estimate_bound, poisson_theta,
                                small_time_template, tr_discrete_part)
from adiabatic_eta.spectrum import (discrete_eigenvalues, minimal_ktype_eigenvalue,
                                    principal_eigenvalues)
from adiabatic_eta.surface import SurfaceData


def brute_h_principal(t, r, tau, m_max=60):
    total = 0.0
    for m in range(-m_max, m_max + 1, 2):
        pair = principal_eigenvalues(r, m, tau)
        for lam in (pair.lambda_plus, pair.lambda_minus):
            total += lam * math.exp(-t * lam * lam)
    return total


def brute_h_discrete(t, r, n, extra=60):
    lam = minimal_ktype_eigenvalue(r, n)
    total = lam * math.exp(-t * lam * lam)
    for m in range(n + 2, n + 2 * extra, 2):
        pair = discrete_eigenvalues(r, n, m)
        for lam in (pair.lambda_plus, pair.lambda_minus):
            total += lam * math.exp(-t * lam * lam)
    return total


def test_h_principal_example():
    v = h_principal(1.0, 1.0, 0.0)
    assert v == pytest.approx(0.6946, abs=1e-3)
    assert v == pytest.approx(brute_h_principal(1.0, 1.0, 0.0), abs=1e-13)
    assert abs(h_principal(1.0, 1.0, 12.0)) < 1e-100


@pytest.mark.parametrize("t, r, tau", [(0.3, 0.2, 0.0), (1.0, 0.5, 1.3), (0.05, 1.0, 4.0),
                                       (2.0, 3.0, 0.2)])
def test_h_principal_brute_force(t, r, tau):
    assert h_principal(t, r, tau) == pytest.approx(brute_h_principal(t, r, tau, 400), abs=1e-12)


def test_h_principal_vectorised_and_even():
    taus = np.linspace(-5, 5, 11)
    vals = h_principal(0.4, 0.3, taus)
    assert vals.shape == taus.shape
    np.testing.assert_array_equal(vals, vals[::-1])
    assert vals[3] == h_principal(0.4, 0.3, taus[3])


def test_series_form_example():
    a = h_principal(0.5, 0.3, 0.7)
    b = h_principal_series_form(0.5, 0.3, 0.7)
    assert abs(a - b) < 1e-9


def test_series_form_leading_structure():
    t, r, tau = 0.5, 0.3, 0.7
    c2 = 1 + 1 / r ** 2
    js = np.arange(1, 201, 2)
    i2 = js ** 2 * c2 + 4 * tau ** 2
    gauss = np.exp(-t * (r * r / 4 + i2))
    expected = 2 * np.sum(gauss * (-r + r * t * (2 - r * r * t / 2) * i2))
    assert h_principal_series_form(t, r, tau, K=1) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(DomainError):
        h_principal_series_form(t, r, tau, K=0)


def test_cross_form_grid_and_estimate():
    grid = np.linspace(0.2, 1.0, 5)
    taus = np.linspace(0.0, 5.0, 5)
    worst = 0.0
    for t in grid:
        for r in grid:
            a = h_principal(t, r, taus)
            b = h_principal_series_form(t, r, taus)
            worst = max(worst, float(np.max(np.abs(a - b))))
            for tau, h in zip(taus, a):
                assert abs(h) <= htr_estimate_bound(t, r, tau)
    assert worst < 1e-8


def test_series_form_warns_outside_range():
    with pytest.warns(RuntimeWarning):
        h_principal_series_form(2.0, 0.5, 0.0)


def test_h_discrete_example():
    v = h_discrete(1.0, 1.0, 2)
    assert v == pytest.approx(-0.15809, abs=1e-4)
    assert v == pytest.approx(brute_h_discrete(1.0, 1.0, 2), abs=1e-13)
    assert h_discrete(1.0, 1.0, -4) == h_discrete(1.0, 1.0, 4)
    assert abs(h_discrete(200.0, 0.2, 2)) < 1e-300
    with pytest.raises(DomainError):
        h_discrete(1.0, 1.0, 3)


@pytest.mark.parametrize("t, r, n", [(0.1, 0.3, 2), (0.5, 0.1, 4), (0.02, 0.5, 6)])
def test_h_discrete_brute_force(t, r, n):
    assert h_discrete(t, r, n) == pytest.approx(brute_h_discrete(t, r, n, 400), abs=1e-12)


def test_truncation_policy_stable():
    base = h_principal(0.3, 0.4, 1.0)
    more = h_principal(0.3, 0.4, 1.0, TruncationPolicy(max_terms=10 ** 7))
    assert base == more
    finer = h_principal(0.3, 0.4, 1.0, TruncationPolicy(eps_tail=1e-20))
    assert abs(finer - base) < 1e-15
    with pytest.raises(DomainError):
        TruncationPolicy(eps_tail=0.0)


def test_poisson_example():
    lhs = poisson_theta(0, 1.0, 1.0, "lhs")
    rhs = poisson_theta(0, 1.0, 1.0, "rhs")
    assert lhs == pytest.approx(0.27067, abs=1e-5)
    assert lhs == pytest.approx(2 * math.exp(-2) + 2 * math.exp(-18) + 2 * math.exp(-50), abs=1e-15)
    assert abs(lhs - rhs) < 1e-10


@pytest.mark.parametrize("p", [0, 1, 2])
@pytest.mark.parametrize("t", [0.1, 1.0])
@pytest.mark.parametrize("r", [0.3, 0.5, 1.0])
def test_poisson_identity(p, t, r):
    lhs = poisson_theta(p, t, r, "lhs")
    rhs = poisson_theta(p, t, r, "rhs")
    assert abs(lhs - rhs) < 1e-9 * max(1.0, abs(lhs))


def test_poisson_small_t_leading_term():
    r = 0.5
    for t in (1e-3, 1e-4):
        lead = math.sqrt(math.pi) * r / (2 * math.sqrt((1 + r * r) * t))
        assert poisson_theta(0, t, r, "rhs") == pytest.approx(lead, rel=1e-10)


def test_tr_discrete_closed_surface_reduction():
    surf = SurfaceData(2, 0)
    t, r = 0.7, 0.3
    direct = sum(4 * (n - 1) * h_discrete(t, r, n) for n in range(2, 200, 2))
    assert tr_discrete_part(t, r, surf) == pytest.approx(direct, rel=1e-13)


def test_tr_discrete_eigenvalue_list_oracle():
    """Sum over every eigenvalue with its multiplicity, no h-function in between."""
    surf = SurfaceData(0, 4).with_kappa_t(2)
    t, r = 1.0, 0.1
    chi, kt = 2, 2
    total = 0.0
    for n in range(2, 40, 2):
        weight = 2 * chi * (n - 1) - 2 * kt
        lam = minimal_ktype_eigenvalue(r, n)
        total += weight * lam * math.exp(-t * lam * lam)
        for m in range(n + 2, n + 80, 2):
            pair = discrete_eigenvalues(r, n, m)
            for lam in (pair.lambda_plus, pair.lambda_minus):
                total += weight * lam * math.exp(-t * lam * lam)
    assert tr_discrete_part(t, r, surf) == pytest.approx(total, abs=1e-10)
    assert abs(tr_discrete_part(1e3, r, surf)) < 1e-300


def test_fit_recovers_pure_power():
    t = np.geomspace(1e-3, 1e-1, 30)
    fit = fit_small_time(zip(t, 2.5 * t ** -1.5), small_time_template(4, with_logs=False))
    assert fit.coefficient(-1.5) == pytest.approx(2.5, abs=1e-8)
    assert fit.residual < 1e-12


def test_fit_recovers_log_term():
    t = np.geomspace(1e-3, 1e-1, 40)
    y = 1.25 * t ** -1.5 - 0.75 * t ** -1.0 * np.log(t) + 0.3 * t ** -0.5
    fit = fit_small_time(zip(t, y), small_time_template(4, with_logs=True))
    assert fit.coefficient(-1.5) == pytest.approx(1.25, abs=1e-6)
    assert fit.coefficient(-1.0, True) == pytest.approx(-0.75, abs=1e-6)
    np.testing.assert_allclose(fit.evaluate(t), y, rtol=1e-9)


def test_fit_needs_samples():
    with pytest.raises(FitError):
        fit_small_time([(0.1, 1.0)], small_time_template(4))


def test_template_shapes():
    plain = small_time_template(4, with_logs=False)
    assert plain == ((-1.5, False), (-1.0, False), (-0.5, False), (0.0, False))
    assert (-1.0, True) in small_time_template(4)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 1.0), st.floats(0.05, 1.0), st.floats(0.0, 5.0))
def test_cross_form_property(t, r, tau):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = h_principal(t, r, tau)
        b = h_principal_series_form(t, r, tau)
    assert abs(a - b) < 1e-8 * max(1.0, abs(a))
    assert abs(a) <= htr_estimate_bound(t, r, tau)
