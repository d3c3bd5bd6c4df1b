import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import cached_sieve, invariants
from mertens_nf.fields import FieldInvariants
from mertens_nf.observables import (_loglog_tail, _mertens_kernel_integral, a_integral, cramer_integral,
                                    error_term, explicit_check, explicit_formula_estimate,
                                    lambda_sum_identity_check, loglog_gamma_identity_check, psi_check,
                                    psi_explicit_estimate, scan)
from mertens_nf.sieve import sieve
from mertens_nf.zeros import ZeroSet
from mertens_nf import QuadraticField


def test_loglog_identity_random_points():
    rng = np.random.default_rng(2024)
    xs = np.exp(rng.uniform(math.log(1.0001), math.log(1e12), 1000))
    worst = max(abs(loglog_gamma_identity_check(float(x))) for x in xs)
    assert worst < 1e-10
    with pytest.raises(ValueError):
        loglog_gamma_identity_check(1.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(1.5, 1e9))
def test_loglog_tail_bound(x):
    # 1/log t <= 1/log x on [x, inf)
    assert 0 < _loglog_tail(x) <= 1 / (x * math.log(x)) * (1 + 1e-12)


def test_kernel_integral_small_x():
    assert _mertens_kernel_integral(1.0) == 0.0
    # integrand -> 1 as u -> 0
    assert _mertens_kernel_integral(math.exp(1e-6)) == pytest.approx(1e-6, rel=1e-6)


def test_error_term_rational_positive_at_1e4():
    s = cached_sieve(1, 10**4)
    e = error_term(s, invariants(1), 1e4)
    assert e.E_K > 0 and e.in_M_K


def test_zero_error_term_not_in_M():
    from mertens_nf.observables import ErrorTermSample

    assert not ErrorTermSample(10.0, 0.0).in_M_K


def test_error_term_needs_grid_point():
    s = cached_sieve(5, 10**4)
    with pytest.raises(KeyError):
        error_term(s, invariants(5), 1234.5)


def test_rational_scan_has_no_sign_change():
    s = cached_sieve(1, 10**6)
    rep = scan(s, invariants(1))
    assert rep.sign_changes == []
    assert np.all(rep.E_K > 0)
    assert rep.density[-1] == 1.0
    assert len(list(rep.rows())) == rep.x.size


def test_scan_synthetic_constant_sign():
    s = cached_sieve(5, 10**4)
    grid = s.checkpoints[s.checkpoints >= 2]
    # a huge fake residue pushes E below zero everywhere
    fake = FieldInvariants((1, 1), 1.0, 1, 1e6)
    rep = scan(s, fake, grid)
    assert rep.sign_changes == [] and np.all(rep.density == 0.0)
    with pytest.raises(ValueError):
        scan(s, fake, [1.0, 2.0])


def test_scan_density_in_unit_interval():
    s = cached_sieve(13, 10**5)
    rep = scan(s, invariants(13))
    assert np.all((rep.density >= 0) & (rep.density <= 1))
    for a, b in rep.sign_changes:
        assert a < b


def test_a_integral_at_two():
    s = cached_sieve(5, 10**4)
    # no ideal of norm <= 2 in Q(sqrt5): 2 is inert
    assert a_integral(s, 2.0) == -_mertens_kernel_integral(2.0)


def test_a_integral_tracks_log_kappa():
    s = cached_sieve(5, 10**6)
    inv = invariants(5)
    # A(x) -> log kappa, with an error of size log x / sqrt x
    for x in (1e4, 1e5, 1e6):
        gap = a_integral(s, x) - math.log(inv.residue)
        assert abs(gap) < math.log(x) / math.sqrt(x)


@pytest.mark.parametrize("q", [1, 5, 13])
def test_lambda_sum_identity(q):
    s = cached_sieve(q, 10**6)
    for x in (1e4, 1e5, 1e6):
        chk = lambda_sum_identity_check(s, x)
        assert chk.c < 10


def test_cramer_small_and_rational():
    s = cached_sieve(1, 2 * 10**5, keep_events=True)
    assert math.isfinite(cramer_integral(s, 2.0))
    for x in (1e3, 1e4, 1e5):
        assert cramer_integral(s, x) <= 1.0
    with pytest.raises(ValueError):
        cramer_integral(s, 1.5e5)
    with pytest.raises(ValueError):
        cramer_integral(cached_sieve(1, 10**4), 10.0)


def test_cramer_matches_quadrature_oracle():
    s = cached_sieve(5, 10**4, keep_events=True)
    x = 1000.0
    t = np.linspace(x, 2 * x, 400001)
    vals = np.array([(s.psi(v) - v) ** 2 for v in t])
    assert cramer_integral(s, x) == pytest.approx(np.trapezoid(vals, t) / x ** 2, rel=1e-3)


def test_explicit_formulas_below_first_ordinate(zeros5):
    merged = zeros5[2]
    assert explicit_formula_estimate(merged, 1e4, 1.0) == 1.0
    assert psi_explicit_estimate(merged, 1e4, 1.0) == 1e4
    with pytest.raises(ValueError):
        psi_explicit_estimate(merged, 1e4, 1e6)


def test_explicit_formula_single_zero():
    z = ZeroSet("zeta", np.array([3.0]), 12)
    x = 7.0
    rho = 0.5 + 3j
    assert explicit_formula_estimate(z, x, 3.0) == pytest.approx(1 + 2 * (x ** (3j) / (1 - rho)).real, rel=1e-15)
    assert psi_explicit_estimate(z, x, 3.0) == pytest.approx(x - 2 * (x ** rho / rho).real, rel=1e-15)


def test_explicit_residuals_shrink(zeros5):
    s = sieve(QuadraticField(5), 10**4, grid=[1e4], keep_events=True)
    checks = [explicit_check(s, zeros5[2], invariants(5), 1e4, T) for T in (1e2, 1e3, 1e4)]
    psi = [c.psi_residual_mean for c in checks]
    E = [c.E_residual_mean for c in checks]
    assert psi[0] > psi[1] > psi[2]
    assert E[0] > E[1] > E[2]
    assert all(c.psi_constant < 10 for c in checks)


def test_psi_check_refines(zeros5):
    s = sieve(QuadraticField(5), 10**4, grid=[1e4], keep_events=True)
    r = [abs(psi_check(s, zeros5[2], 5000.5, T)) for T in (1e3, 1e4)]
    assert r[1] < 50
