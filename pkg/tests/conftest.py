import functools

import pytest

from mertens_nf import QuadraticField, RationalField, field_invariants
from mertens_nf.sieve import sieve
from mertens_nf.zeros import load_field_zeros, load_zeros, zero_file


@functools.lru_cache(maxsize=None)
def field_zeros(q):
    K = QuadraticField(q)
    return load_field_zeros(K.discriminant)


@functools.lru_cache(maxsize=None)
def zeta_zeros():
    return load_zeros(zero_file("zeta"), "zeta")


@functools.lru_cache(maxsize=None)
def cached_sieve(q, x_max, keep_events=False):
    K = RationalField() if q == 1 else QuadraticField(q)
    return sieve(K, x_max, keep_events=keep_events)


@functools.lru_cache(maxsize=None)
def invariants(q):
    K = RationalField() if q == 1 else QuadraticField(q)
    return field_invariants(K)


@pytest.fixture(scope="session")
def zeros5():
    return field_zeros(5)


@pytest.fixture(scope="session")
def zeros13():
    return field_zeros(13)


@pytest.fixture(scope="session")
def zeta():
    return zeta_zeros()


@pytest.fixture(scope="session")
def zeros_for():
    return field_zeros
