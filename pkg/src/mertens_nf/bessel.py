"""Bessel function J0 to about 1e-15 absolute accuracy, vectorized over numpy arrays.

|x| <= 2   power series in double precision (no cancellation: all terms <= 1)
|x| <= 20  power series with terms and partial sums carried in double-double
|x| > 20   Hankel asymptotic expansion, truncated at its smallest term
"""
from __future__ import annotations

import math

import numpy as np

SERIES_DD_LIMIT = 20.0
_SPLIT = 134217729.0  # 2^27 + 1

# 1/(m!)^2 for the plain double series on |x| <= 2
_INV_FACT_SQ = np.array([1.0 / math.factorial(m) ** 2 for m in range(14)])


def _two_prod(a, b):
    p = a * b
    t = _SPLIT * a
    ah = t - (t - a)
    al = a - ah
    t = _SPLIT * b
    bh = t - (t - b)
    bl = b - bh
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def _quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _dd_mul(ah, al, bh, bl):
    p, e = _two_prod(ah, bh)
    e = e + (ah * bl + al * bh)
    return _quick_two_sum(p, e)


def _dd_div_scalar(ah, al, d):
    q1 = ah / d
    p, e = _two_prod(q1, d)
    r = ((ah - p) - e + al) / d
    return _quick_two_sum(q1, r)


def _dd_add(ah, al, bh, bl):
    s, e = _two_sum(ah, bh)
    e = e + (al + bl)
    return _quick_two_sum(s, e)


def _series_small(x):
    y = -(x * x) / 4.0
    acc = np.full_like(x, _INV_FACT_SQ[-1])
    for c in _INV_FACT_SQ[-2::-1]:
        acc = acc * y + c
    return acc


def _series_dd(x):
    # term_m = (-x^2/4)^m / (m!)^2, every step in double-double
    yh, yl = _two_prod(x, x)
    yh, yl = -yh / 4.0, -yl / 4.0
    th = np.ones_like(x)
    tl = np.zeros_like(x)
    sh = np.ones_like(x)
    sl = np.zeros_like(x)
    m = 1
    while True:
        th, tl = _dd_mul(th, tl, yh, yl)
        th, tl = _dd_div_scalar(th, tl, float(m * m))
        sh, sl = _dd_add(sh, sl, th, tl)
        if np.all(np.abs(th) < 1e-34 * np.maximum(1.0, np.abs(sh))) or m > 200:
            break
        if m > 10 and np.all(np.abs(th) < 1e-20):
            break
        m += 1
    return sh + sl


def _hankel(x):
    # P and Q series in 1/(8x); coefficients for order nu = 0
    z = 1.0 / (8.0 * x)
    P = np.ones_like(x)
    Q = np.zeros_like(x)
    term = np.ones_like(x)
    done = np.zeros(x.shape, dtype=bool)
    last = np.full_like(x, np.inf)
    k = 1
    while not np.all(done) and k < 80:
        # a_k = a_{k-1} * (-(2k-1)^2) / k * z
        term = term * (-(2 * k - 1) ** 2) / k * z
        mag = np.abs(term)
        stop = done | (mag >= last)
        add = np.where(stop, 0.0, term)
        if k % 2 == 1:
            Q = Q + add if (k // 2) % 2 == 0 else Q - add
        else:
            P = P + add if (k // 2) % 2 == 0 else P - add
        done = stop | (mag < 1e-18)
        last = np.where(done, last, mag)
        k += 1
    # cos(x - pi/4) = (cos x + sin x)/sqrt2, sin(x - pi/4) = (sin x - cos x)/sqrt2
    c, s = np.cos(x), np.sin(x)
    chi_c = (c + s) / math.sqrt(2.0)
    chi_s = (s - c) / math.sqrt(2.0)
    return np.sqrt(2.0 / (math.pi * x)) * (P * chi_c - Q * chi_s)


def bessel_j0(t):
    """J0(t) for real t (scalar or array)."""
    arr = np.abs(np.asarray(t, dtype=float))
    out = np.empty_like(arr)
    flat_in = arr.reshape(-1)
    flat_out = out.reshape(-1)
    small = flat_in <= 2.0
    mid = (flat_in > 2.0) & (flat_in <= SERIES_DD_LIMIT)
    big = flat_in > SERIES_DD_LIMIT
    if small.any():
        flat_out[small] = _series_small(flat_in[small])
    if mid.any():
        flat_out[mid] = _series_dd(flat_in[mid])
    if big.any():
        flat_out[big] = _hankel(flat_in[big])
    if np.ndim(t) == 0:
        return float(out)
    return out


def bessel_j0_minus_one(t):
    """J0(t) - 1 without the cancellation near t = 0."""
    arr = np.abs(np.asarray(t, dtype=float))
    small = arr <= 2.0
    out = np.empty_like(arr)
    if small.any():
        y = -(arr[small] ** 2) / 4.0
        acc = np.full_like(y, _INV_FACT_SQ[-1])
        for c in _INV_FACT_SQ[-2:0:-1]:
            acc = acc * y + c
        out[small] = acc * y
    if (~small).any():
        out[~small] = bessel_j0(arr[~small]) - 1.0
    if np.ndim(t) == 0:
        return float(out)
    return out
