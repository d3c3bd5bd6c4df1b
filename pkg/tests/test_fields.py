import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mertens_nf import (QuadraticField, RationalField, class_number, dirichlet_L1, field_invariants,
                        fundamental_unit, regulator, residue_kappa)
from mertens_nf.fields import InvariantError, is_squarefree, kronecker


def brute_force_unit(D, bmax=10**4):
    """Smallest (a, b), b >= 1, with a^2 - D b^2 = +-4 (a, b same parity as required)."""
    for b in range(1, bmax + 1):
        for target in (-4, 4):
            a2 = D * b * b + target
            if a2 > 0:
                a = math.isqrt(a2)
                if a * a == a2:
                    return a, b
    raise AssertionError("no unit found")


@pytest.mark.parametrize("q,expected", [(5, (1, 1)), (13, (3, 1)), (2, (2, 1))])
def test_fundamental_unit_examples(q, expected):
    K = QuadraticField(q)
    assert fundamental_unit(K) == expected
    assert brute_force_unit(K.discriminant) == expected


@pytest.mark.parametrize("q", [3, 6, 7, 10, 11, 14, 17, 19, 21, 22, 29, 31, 37, 41, 46, 53, 61])
def test_fundamental_unit_matches_brute_force(q):
    K = QuadraticField(q)
    assert fundamental_unit(K) == brute_force_unit(K.discriminant)


def test_large_period_unit_is_exact():
    # q = 94: eps = 2143295 + 221064 sqrt(94)
    K = QuadraticField(94)
    a, b = fundamental_unit(K)
    assert a * a - K.discriminant * b * b in (4, -4)
    assert (a, b) == (2 * 2143295, 221064)


@pytest.mark.parametrize("q,expected", [(5, "0.4812118250596"), (13, "1.1947632172871")])
def test_regulator_examples(q, expected):
    K = QuadraticField(q)
    R = regulator(fundamental_unit(K), K)
    assert R == pytest.approx(float(expected), abs=1e-13)


def test_regulator_against_high_precision_log():
    for q in (5, 13, 94, 331, 433):
        K = QuadraticField(q)
        a, b = fundamental_unit(K)
        with mpmath.workdps(50):
            ref = float(mpmath.log((a + b * mpmath.sqrt(K.discriminant)) / 2))
        assert abs(regulator((a, b), K) - ref) <= 1e-14 * ref


def test_regulator_rejects_non_unit():
    K = QuadraticField(5)
    with pytest.raises(ValueError, match="not a unit > 1"):
        regulator((2, 0), K)


def averaged_partial_sums_L1(D, N=2 * 10**6):
    """L(1, chi) from partial sums of the Dirichlet series, averaged over one period.

    The partial sums oscillate with period D around L; averaging S_N over
    N0 <= N < N0 + D cancels the leading 1/N term.
    """
    chi = np.array([kronecker(D, a) if a else 0 for a in range(D)], dtype=float)
    n = np.arange(1, N + D, dtype=float)
    S = np.cumsum(chi[np.arange(1, N + D) % D] / n)
    return float(S[N - 1:N - 1 + D].mean())


@pytest.mark.parametrize("q,expected", [(5, 0.4304089409640), (13, 0.6627353910718)])
def test_dirichlet_L1_examples(q, expected):
    K = QuadraticField(q)
    v = dirichlet_L1(K)
    assert v == pytest.approx(expected, abs=1e-12)
    assert v == pytest.approx(averaged_partial_sums_L1(K.discriminant), abs=1e-10)


def test_dirichlet_L1_rejects_bad_modulus():
    with pytest.raises(ValueError):
        dirichlet_L1(RationalField())


@pytest.mark.parametrize("q,h", [(5, 1), (13, 1), (229, 3), (79, 3), (10, 2)])
def test_class_number(q, h):
    assert class_number(QuadraticField(q)) == h


def test_class_number_mismatch_raises():
    K = QuadraticField(5)
    with pytest.raises(InvariantError, match="invariant mismatch"):
        class_number(K, R=0.3)


def test_residue_linear_in_h():
    K = QuadraticField(13)
    R = regulator(fundamental_unit(K), K)
    assert residue_kappa(K, 2, R) == 2 * residue_kappa(K, 1, R)
    assert residue_kappa(K, 1, R) == pytest.approx(0.6627353910718, abs=1e-12)


def test_consistency_with_brute_force_inputs():
    K = QuadraticField(5)
    a, b = brute_force_unit(5)
    with mpmath.workdps(40):
        R = mpmath.log((a + b * mpmath.sqrt(5)) / 2)
        ref = float(2 * R / mpmath.sqrt(5))
    assert dirichlet_L1(K) == pytest.approx(ref, rel=1e-13)


def test_field_types():
    K = QuadraticField(3)
    assert K.discriminant == 12 and K.degree == K.r1 + 2 * K.r2
    assert QuadraticField(17).discriminant == 17
    for bad in (1, 4, 12, 0, -5):
        with pytest.raises(ValueError):
            QuadraticField(bad)
    Q = RationalField()
    assert field_invariants(Q).residue == 1.0


squarefree = st.integers(2, 3000).filter(is_squarefree)


@settings(max_examples=60, deadline=None)
@given(squarefree)
def test_invariant_properties(q):
    K = QuadraticField(q)
    a, b = fundamental_unit(K)
    assert a * a - K.discriminant * b * b in (4, -4)
    inv = field_invariants(K)
    assert inv.regulator > 0
    assert abs(inv.residue - inv.l_value) < 1e-10 * inv.residue
    assert inv.residue == pytest.approx(residue_kappa(K, inv.class_number, inv.regulator), rel=1e-12)
