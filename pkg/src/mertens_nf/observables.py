"""The normalized Mertens error term E_K and quantities built from it.

E_K(x) = sqrt(x) log x (log prod_{N(p)<=x} (1 - 1/N(p))^-1 - log kappa_K - log log x - gamma)

and the bias set M_K = {x : E_K(x) > 0}.  Also the integral form A(x), two exact
identities used as numerical checks, the normalized Cramer integral and the
truncated explicit formulas over zeros.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from .fields import EULER_GAMMA, FieldInvariants
from .sieve import SieveResult
from .zeros import ZeroSet

QUAD_EPSABS = 1e-12


@dataclass(frozen=True)
class ErrorTermSample:
    x: float
    E_K: float

    @property
    def in_M_K(self) -> bool:
        return self.E_K > 0


def _error_terms(x: np.ndarray, lms: np.ndarray, kappa: float) -> np.ndarray:
    lx = np.log(x)
    return np.sqrt(x) * lx * (lms - math.log(kappa) - np.log(lx) - EULER_GAMMA)


def error_term(sieve: SieveResult, invariants: FieldInvariants, x: float) -> ErrorTermSample:
    i = sieve.index(x)
    if x <= 1:
        raise ValueError("E_K needs x > 1")
    E = float(_error_terms(np.array([float(x)]), sieve.log_mertens_sum[i:i + 1], invariants.residue)[0])
    return ErrorTermSample(float(x), E)


@dataclass(frozen=True)
class ScanReport:
    x: np.ndarray
    E_K: np.ndarray
    sign_changes: List[Tuple[float, float]]  # (left, right) grid points of opposite sign
    density: np.ndarray  # empirical logarithmic density of M_K over [2, x]

    @property
    def in_M_K(self) -> np.ndarray:
        return self.E_K > 0

    def rows(self):
        for x, e, d in zip(self.x, self.E_K, self.density):
            yield float(x), float(e), bool(e > 0), float(d)


def scan(sieve: SieveResult, invariants: FieldInvariants,
         grid: Optional[Sequence[float]] = None) -> ScanReport:
    """Sign changes of E_K along a grid and the running logarithmic density.

    Each grid interval contributes log(right/left) weighted by the mean of the
    indicator at its two endpoints; the running integral is normalized by
    log(x/x0), the total log-measure of the scanned range [x0, x] (x0 = 2 by default).
    """
    if grid is None:
        x = sieve.checkpoints[sieve.checkpoints >= 2]
    else:
        x = np.asarray(grid, dtype=float)
        if np.any(x < 2):
            raise ValueError("scan grid must start at x >= 2")
    idx = np.array([sieve.index(v) for v in x], dtype=np.int64)
    E = _error_terms(x, sieve.log_mertens_sum[idx], invariants.residue)
    sgn = np.sign(E)
    changes = []
    nz = np.flatnonzero(sgn != 0)
    for a, b in zip(nz[:-1], nz[1:]):
        if sgn[a] != sgn[b]:
            changes.append((float(x[a]), float(x[b])))
    ind = (E > 0).astype(float)
    if x.size == 0:
        return ScanReport(x, E, changes, np.zeros(0))
    seg = 0.5 * (ind[1:] + ind[:-1]) * np.diff(np.log(x))
    acc = np.concatenate([[0.0], np.cumsum(seg)])
    span = np.log(x / x[0])
    dens = np.full(x.size, ind[0])
    # clip the last-ulp overshoot of cumsum against log(x/x0)
    dens[1:] = np.clip(acc[1:] / span[1:], 0.0, 1.0)
    return ScanReport(x, E, changes, dens)


# ---------------------------------------------------------------- integral form

def _mertens_kernel_integral(x: float) -> float:
    """int_1^x (1 - 1/t) / (t log t) dt, written as int_0^{log x} (1 - e^-u)/u du."""
    if x <= 1:
        return 0.0
    L = math.log(x)
    f = lambda u: -math.expm1(-u) / u if u > 0 else 1.0
    val, _ = integrate.quad(f, 0.0, L, epsabs=QUAD_EPSABS, epsrel=1e-14, limit=400)
    return val


def _loglog_tail(x: float) -> float:
    """int_x^inf dt / (t^2 log t) through u = 1/t: int_0^{1/x} du / (-log u).

    For x < 2 the piece u in [1/2, 1/x] has a near-singular integrand; it is
    done in v = -log u instead, where it becomes int_{log x}^{log 2} e^-v / v dv.
    """
    b = 1.0 / x
    f = lambda u: -1.0 / math.log(u) if u > 0 else 0.0
    top = min(b, 0.5)
    val, _ = integrate.quad(f, 0.0, top, epsabs=QUAD_EPSABS * 1e-2, epsrel=1e-14, limit=400)
    if b > 0.5:
        g = lambda v: math.exp(-v) / v
        lo = math.log(x)
        # split geometrically so the 1/v growth near log x is resolved
        edges = np.geomspace(lo, math.log(2.0), 8) if lo > 0 else [math.log(2.0)]
        for a, c in zip(edges[:-1], edges[1:]):
            part, _ = integrate.quad(g, a, c, epsabs=QUAD_EPSABS * 1e-2, epsrel=1e-12, limit=200)
            val += part
    return val


def a_integral(sieve: SieveResult, x: float) -> float:
    """A(x) = sum_{N(p)^m <= x} 1/(m N(p)^m) - int_1^x (1 - 1/t)/(t log t) dt."""
    i = sieve.index(x)
    return float(sieve.recip_sum[i]) - _mertens_kernel_integral(x)


def loglog_gamma_identity_check(x: float) -> float:
    """log log x + gamma - int_1^x (1-1/t)/(t log t) dt + int_x^inf dt/(t^2 log t), exactly 0."""
    if not x > 1:
        raise ValueError("x must exceed 1")
    return (math.log(math.log(x)) + EULER_GAMMA - _mertens_kernel_integral(x)) + _loglog_tail(x)


@dataclass(frozen=True)
class LambdaSumCheck:
    x: float
    lhs: float       # -sum log(1 - 1/N(p))
    rhs: float       # sum Lambda_K(a) / (N(a) log N(a))
    residual: float  # lhs - rhs - 1/(sqrt(x) log x)
    c: float         # |residual| sqrt(x) log^2 x


def lambda_sum_identity_check(sieve: SieveResult, x: float) -> LambdaSumCheck:
    i = sieve.index(x)
    lhs = float(sieve.log_mertens_sum[i])
    # Lambda_K(a) / (N(a) log N(a)) = 1/(m N(p)^m) for a = p^m
    rhs = float(sieve.recip_sum[i])
    lx = math.log(x)
    res = lhs - rhs - 1.0 / (math.sqrt(x) * lx)
    return LambdaSumCheck(float(x), lhs, rhs, res, abs(res) * math.sqrt(x) * lx * lx)


# ---------------------------------------------------------------- Cramer integral

def cramer_integral(sieve: SieveResult, x: float) -> float:
    """int_x^{2x} (psi_K(t) - t)^2 dt / x^2, exact over the steps of psi_K."""
    if sieve.event_norms is None:
        raise ValueError("cramer_integral needs a sieve run with keep_events=True")
    if 2 * x > sieve.x_max:
        raise ValueError(f"sieve range {sieve.x_max} does not cover [x, 2x] for x={x}")
    norms = sieve.event_norms
    cum = sieve._psi_cumulative()
    lo = int(np.searchsorted(norms, x, side="right"))
    hi = int(np.searchsorted(norms, 2 * x, side="right"))
    # psi is right-continuous and constant on [breaks[k], breaks[k+1])
    inner = norms[lo:hi].astype(float)
    breaks = np.concatenate([[x], inner, [2 * x]])
    levels = cum[lo:hi + 1]
    a = breaks[:-1] - levels
    b = breaks[1:] - levels
    pieces = (b ** 3 - a ** 3) / 3.0
    return math.fsum(pieces.tolist()) / (x * x)


# ---------------------------------------------------------------- explicit formulas

def _ordinates_upto(zeros: ZeroSet, T: float) -> np.ndarray:
    if T > zeros.max_ordinate and len(zeros) and T - zeros.max_ordinate > 1e-9:
        raise ValueError(f"T={T} beyond the zero data (max ordinate {zeros.max_ordinate})")
    return zeros.ordinates[zeros.ordinates <= T]


def explicit_formula_estimate(zeros: ZeroSet, x: float, T: float) -> float:
    """1 + 2 Re sum_{0 < gamma <= T} x^(i gamma) / (1/2 - i gamma).

    Each zero enters the prime sum as -x^(rho-1) / ((rho-1) log x), so the
    oscillating part carries 1/(1 - rho) = 1/(1/2 - i gamma).
    """
    g = _ordinates_upto(zeros, T)
    lx = math.log(x)
    terms = (np.cos(g * lx) * 0.5 - np.sin(g * lx) * g) / (0.25 + g * g)
    return 1.0 + 2.0 * math.fsum(terms.tolist())


def psi_explicit_estimate(zeros: ZeroSet, x: float, T: float) -> float:
    """x - 2 Re sum_{0 < gamma <= T} x^(1/2 + i gamma) / (1/2 + i gamma)."""
    g = _ordinates_upto(zeros, T)
    lx = math.log(x)
    terms = (np.cos(g * lx) * 0.5 + np.sin(g * lx) * g) / (0.25 + g * g)
    return x - 2.0 * math.sqrt(x) * math.fsum(terms.tolist())


def _psi_midpoint(sieve: SieveResult, x: float) -> float:
    """(psi(x-) + psi(x+)) / 2, the value the explicit formula converges to."""
    if sieve.event_norms is None:
        return float(sieve.psi_K[sieve.index(x)])
    cum = sieve._psi_cumulative()
    k_left = int(np.searchsorted(sieve.event_norms, x, side="left"))
    k_right = int(np.searchsorted(sieve.event_norms, x, side="right"))
    return 0.5 * (float(cum[k_left]) + float(cum[k_right]))


def psi_check(sieve: SieveResult, zeros: ZeroSet, x: float, T: float) -> float:
    """psi_K(x) minus its truncated explicit formula."""
    return _psi_midpoint(sieve, x) - psi_explicit_estimate(zeros, x, T)


@dataclass(frozen=True)
class ExplicitCheck:
    x: float
    T: float
    psi_residual_mean: float  # mean |psi residual| over T' log-spaced in (T/10, T]
    psi_constant: float       # psi_residual_mean * T / (x log^2 x)
    E_residual_mean: float
    E_constant: float         # E_residual_mean * T / (sqrt(x) (log x + log^2 T / log x))


def explicit_check(sieve: SieveResult, zeros: ZeroSet, invariants: FieldInvariants,
                   x: float, T: float, n_heights: int = 64) -> ExplicitCheck:
    """Decade-averaged residuals of both explicit formulas at truncation height T."""
    Ts = T * 10.0 ** (-np.arange(n_heights) / n_heights)
    psi_res = np.array([abs(psi_check(sieve, zeros, x, t)) for t in Ts])
    E_true = error_term(sieve, invariants, x).E_K
    E_res = np.array([abs(E_true - explicit_formula_estimate(zeros, x, t)) for t in Ts])
    lx = math.log(x)
    pm = float(psi_res.mean())
    em = float(E_res.mean())
    return ExplicitCheck(x, T, pm, pm * T / (x * lx * lx), em,
                         em * T / (math.sqrt(x) * (lx + math.log(T) ** 2 / lx)))
