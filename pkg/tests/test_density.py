import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mertens_nf.bessel import bessel_j0
from mertens_nf.density import (CompensatingPolynomial, DensityParams, TailSums, b1_coefficient,
                                compensating_polynomial, default_M, delta_density, dissipation_scan,
                                monte_carlo_density, omega_hat, poisson_error_bound, product_error_bound,
                                tail_sums, truncation_error_bound)
from mertens_nf.zeros import ZeroSet, merge, quarter_shift_closed_form

EMPTY = ZeroSet("zeta", np.zeros(0), 12)


def test_params_validation():
    with pytest.raises(ValueError):
        DensityParams(epsilon=0)
    with pytest.raises(ValueError):
        DensityParams(M=0)
    with pytest.raises(ValueError):
        DensityParams(A=3)
    assert DensityParams().n_max == 500


def test_polynomial():
    with pytest.raises(ValueError):
        CompensatingPolynomial((0.5, 1.0))
    p = CompensatingPolynomial((1.0, -0.5, 0.25))
    assert p(2.0) == 1.0 - 0.5 * 4 + 0.25 * 16


def test_omega_hat_basic(zeros5):
    merged = zeros5[2]
    assert omega_hat(0.0, merged) == 1.0
    assert np.all(omega_hat(np.linspace(-5, 5, 11), EMPTY) == 1.0)
    t = np.linspace(0.1, 25, 40)
    assert np.array_equal(omega_hat(t, merged, X=2000.0), omega_hat(-t, merged, X=2000.0))


def test_omega_hat_against_direct_product(zeros5):
    merged = zeros5[2].truncate(300.0)
    t = np.array([0.3, 1.7, 4.0, 9.5, 17.0])
    r = 2 / np.sqrt(0.25 + merged.ordinates ** 2)
    direct = np.array([math.prod(bessel_j0(tt * r).tolist()) for tt in t])
    np.testing.assert_allclose(omega_hat(t, merged), direct, rtol=1e-12, atol=1e-300)


@settings(max_examples=30, deadline=None)
@given(st.floats(-25, 25, allow_nan=False))
def test_omega_hat_bounded_by_polynomial(t):
    from conftest import field_zeros

    merged = field_zeros(5)[2]
    p = CompensatingPolynomial((1.0, -2.9e-4))
    assert abs(omega_hat(t, merged, p, X=9999.0)) <= abs(p(t)) + 1e-300


@pytest.mark.parametrize("q", [5, 13])
def test_factorization(q, zeros_for):
    zeta, lchi, merged = zeros_for(q)
    t = DensityParams().nodes()[::7]
    whole = omega_hat(t, merged, X=9999.0)
    split = omega_hat(t, zeta, X=9999.0) * omega_hat(t, lchi, X=9999.0)
    np.testing.assert_allclose(whole, split, rtol=1e-13, atol=0)


@pytest.mark.parametrize("q,expected", [(5, -0.000292143), (13, -0.000307347)])
def test_b1(q, expected, zeros_for):
    merged = zeros_for(q)[2]
    b1 = compensating_polynomial(tail_sums(merged, 9999.0), 1).coefficients[1]
    # the reference digits are truncated, not rounded
    assert math.trunc(b1 * 1e9) == round(expected * 1e9)
    # closed-form route through logarithmic derivatives agrees
    b1_closed = b1_coefficient(merged, quarter_shift_closed_form(merged), 9999.0)
    assert b1 == pytest.approx(b1_closed, abs=1e-11)


def test_b1_vanishes_without_tail():
    z = ZeroSet("zeta", np.array([14.134725, 21.022040]), 6)
    full = float(np.sum(1 / (0.25 + z.ordinates ** 2)))
    assert b1_coefficient(z, full, 100.0) == 0.0


def test_truncation_bound_single_factor(zeros5):
    merged = zeros5[2]
    g1 = merged.ordinates[0]
    C = 25.0
    hand = (0.25 + g1 ** 2) ** 0.25 / math.pi ** 1.5 * (2 / C ** 0.5 + 1 / (20 * C ** 1.5))
    assert truncation_error_bound(DensityParams(C=C), merged, 1) == pytest.approx(hand, rel=1e-14)
    with pytest.raises(ValueError):
        truncation_error_bound(DensityParams(), merged, len(merged) + 1)


def test_default_m_is_minimal(zeros5):
    merged = zeros5[2]
    p = DensityParams()
    M = default_M(p, merged)
    assert truncation_error_bound(p, merged, M) < 1e-9 <= truncation_error_bound(p, merged, M - 1)


def test_poisson_bound(zeros5):
    merged = zeros5[2]
    assert poisson_error_bound(1 / 20, merged) < 1e-20
    assert poisson_error_bound(2.0, merged) > 1
    eps = [0.05, 0.1, 0.2, 0.5, 1.0, 2.0]
    vals = [poisson_error_bound(e, merged) for e in eps]
    assert vals == sorted(vals)


def test_product_bound_decreases_with_A(zeros5):
    merged = zeros5[2]
    T1 = tail_sums(merged, 9999.0).s1
    b = [product_error_bound(DensityParams(A=A), merged, T1) for A in (0, 1, 2)]
    assert b[0] > b[1] > b[2] > 0


def test_empty_zero_set_density():
    r = delta_density(DensityParams(), EMPTY)
    # the Riemann sum of sinc tends to pi, so delta tends to 1
    assert r.delta == pytest.approx(1.0, abs=1 / (math.pi * 25))
    r_wide = delta_density(DensityParams(C=400.0), EMPTY)
    assert abs(r_wide.delta - 1) < abs(r.delta - 1) + 1e-12


@pytest.mark.parametrize("q", [5, 13])
def test_epsilon_refinement(q, zeros_for):
    merged = zeros_for(q)[2]
    a = delta_density(DensityParams(epsilon=1 / 20), merged)
    b = delta_density(DensityParams(epsilon=1 / 40), merged)
    assert abs(a.delta - b.delta) <= a.poisson_error + b.poisson_error + 1e-12
    assert 0.5 < a.delta < 1


def test_monte_carlo_deterministic_across_threads(zeros5):
    merged = zeros5[2]
    a = monte_carlo_density(merged, 20000, seed=7, cutoff=200.0, threads=1)
    b = monte_carlo_density(merged, 20000, seed=7, cutoff=200.0, threads=3)
    assert a == b
    c = monte_carlo_density(merged, 20000, seed=8, cutoff=200.0)
    assert c.estimate != a.estimate or c.upper_half != a.upper_half


def test_monte_carlo_degenerate_and_symmetric(zeros5):
    merged = zeros5[2]
    r = monte_carlo_density(merged, 10**4, seed=1, cutoff=0.0)
    assert r.estimate == 1.0 and r.n_zeros == 0
    r = monte_carlo_density(merged, 10**5, seed=3, cutoff=300.0)
    assert abs(r.upper_half - 0.5) < 3 * r.upper_half_stderr


def test_monte_carlo_matches_poisson_small(zeros13):
    merged = zeros13[2]
    mc = monte_carlo_density(merged, 2 * 10**5, seed=11, cutoff=200.0)
    d = delta_density(DensityParams(X=200.0, A=0), merged)
    assert abs(mc.estimate - d.delta) < 3 * mc.stderr


def test_dissipation_scan(zeros5, zeros13):
    rows = dissipation_scan({5: zeros5[:2], 13: zeros13[:2]})
    assert [r.q for r in rows] == [5, 13]
    assert rows[0].delta > rows[1].delta
    for r in rows:
        assert r.bound_holds and r.l_only_bound >= r.bias
    assert len(dissipation_scan({5: zeros5[:2]})) == 1
