"""Logarithmic density of the set where the Mertens error term is positive.

Under GRH and linear independence of the ordinates, E_K(e^y) has a limiting
distribution equal to that of

    Z = 1 + 2 Re sum_{gamma > 0} X(gamma) / sqrt(1/4 + gamma^2),

X(gamma) independent and uniform on the unit circle.  The centred part Y = Z - 1
has characteristic function

    omega_hat(t) = prod_{gamma > 0} J0(2 t / sqrt(1/4 + gamma^2)),

and P(Z > 0) is evaluated by a Poisson sum of sinc(t) omega_hat(t) on the grid
t = n * epsilon, |t| <= C.  The product is cut at gamma <= X and the missing
factors are approximated by the polynomial p(t) = 1 + b1 t^2 (+ b2 t^4).
Each approximation carries its own error bound.
"""
from __future__ import annotations

import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .bessel import bessel_j0_minus_one
from .summation import VectorNeumaier
from .zeros import ZeroSet, merge, quarter_shift_closed_form, tail_sum

LOW_CONFIDENCE_BUDGET = 1e-4
DEFAULT_M_TARGET = 1e-9
ZERO_CHUNK = 2048
MC_CHUNK = 2048
J1_MAX = 0.5818652  # max |J1| on the real line


@dataclass(frozen=True)
class DensityParams:
    epsilon: float = 1.0 / 20.0
    C: float = 25.0
    M: Optional[int] = None  # None: smallest M with truncation bound below 1e-9
    X: float = 9999.0
    A: int = 1

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.C > 0:
            raise ValueError("C must be positive")
        if self.M is not None and self.M < 1:
            raise ValueError("M must be >= 1")
        if not self.X > 0:
            raise ValueError("X must be positive")
        if self.A < 0 or self.A > 2:
            raise ValueError("compensating polynomial degree A must be 0, 1 or 2")

    @property
    def n_max(self) -> int:
        return int(math.floor(self.C / self.epsilon + 1e-9))

    def nodes(self) -> np.ndarray:
        """Non-negative grid points n * epsilon, n = 0..n_max."""
        return np.arange(self.n_max + 1) * self.epsilon


@dataclass(frozen=True)
class CompensatingPolynomial:
    """p(t) = sum_m b_m t^(2m), b_0 = 1."""

    coefficients: Tuple[float, ...] = (1.0,)

    def __post_init__(self):
        if not self.coefficients or self.coefficients[0] != 1.0:
            raise ValueError("b_0 must be 1")

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, t):
        t2 = np.asarray(t, dtype=float) ** 2
        acc = np.zeros_like(t2) + self.coefficients[-1]
        for b in self.coefficients[-2::-1]:
            acc = acc * t2 + b
        return acc


@dataclass(frozen=True)
class TailSums:
    """sum over gamma > X of r^2 and r^4 with r^2 = 1/(1/4 + gamma^2)."""

    X: float
    s1: float
    s2: float


def tail_sums(zeros: ZeroSet, X: float) -> TailSums:
    if X > zeros.max_ordinate:
        raise ValueError(f"X={X} beyond the zero data (max ordinate {zeros.max_ordinate})")
    s1 = tail_sum(zeros, lambda t: 1.0 / (0.25 + t * t), X)
    s2 = tail_sum(zeros, lambda t: 1.0 / (0.25 + t * t) ** 2, X)
    return TailSums(X, s1, s2)


def b1_coefficient(zeros: ZeroSet, quarter_shift_full_sum: float, X: float) -> float:
    """b1 = -(full sum of 1/(1/4+gamma^2) minus its part over gamma <= X)."""
    g = zeros.ordinates[zeros.ordinates <= X]
    partial = math.fsum((1.0 / (0.25 + g * g)).tolist())
    return -(quarter_shift_full_sum - partial)


def compensating_polynomial(tails: TailSums, A: int) -> CompensatingPolynomial:
    """Taylor polynomial in t^2 of exp(-s1 t^2 - s2 t^4 / 4), the missing J0 factors.

    log J0(z) = -z^2/4 - z^4/64 - ..., and z = 2 t r, so each omitted factor
    contributes -r^2 t^2 - r^4 t^4 / 4 to the log.
    """
    coeffs = [1.0, -tails.s1, 0.5 * tails.s1 ** 2 - 0.25 * tails.s2]
    return CompensatingPolynomial(tuple(coeffs[: A + 1]))


def _radii(zeros: ZeroSet, X: Optional[float]) -> np.ndarray:
    g = zeros.ordinates if X is None else zeros.ordinates[zeros.ordinates <= X]
    return 2.0 / np.sqrt(0.25 + g * g)


def _log_abs_product(t: np.ndarray, radii: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """log prod |J0(t r)| and the number of negative factors, per t."""
    acc = VectorNeumaier(t.shape)
    neg = np.zeros(t.shape, dtype=np.int64)
    with np.errstate(divide="ignore"):
        for lo in range(0, radii.size, ZERO_CHUNK):
            z = np.multiply.outer(t, radii[lo:lo + ZERO_CHUNK])
            jm1 = bessel_j0_minus_one(z)
            neg += np.count_nonzero(jm1 < -1.0, axis=1)
            logs = np.where(jm1 > -0.5, np.log1p(np.maximum(jm1, -0.5)), np.log(np.abs(1.0 + jm1)))
            acc.add(logs.sum(axis=1))
    return acc.value(), neg


def omega_hat(t, zeros: ZeroSet, p: Optional[CompensatingPolynomial] = None,
              X: Optional[float] = None, threads: int = 1):
    """p(t) * prod_{0 < gamma <= X} J0(2t / sqrt(1/4 + gamma^2))."""
    scalar = np.ndim(t) == 0
    tt = np.abs(np.atleast_1d(np.asarray(t, dtype=float)))
    radii = _radii(zeros, X)
    if threads > 1 and tt.size > 1:
        parts = np.array_split(np.arange(tt.size), threads)
        with ThreadPoolExecutor(threads) as pool:
            res = list(pool.map(lambda idx: _log_abs_product(tt[idx], radii), parts))
        logmag = np.concatenate([r[0] for r in res])
        neg = np.concatenate([r[1] for r in res])
    else:
        logmag, neg = _log_abs_product(tt, radii)
    out = np.where(neg % 2 == 1, -1.0, 1.0) * np.exp(logmag)
    if p is not None:
        out = out * p(tt)
    return float(out[0]) if scalar else out


def _sinc(t: np.ndarray) -> np.ndarray:
    return np.sinc(t / math.pi)


def _node_weights(params: DensityParams) -> np.ndarray:
    """epsilon for n = 0 and 2 epsilon for the paired +-n terms."""
    w = np.full(params.n_max + 1, 2.0 * params.epsilon)
    w[0] = params.epsilon
    return w


def poisson_sum(params: DensityParams, omega: np.ndarray, p: CompensatingPolynomial) -> float:
    t = params.nodes()
    terms = _node_weights(params) * _sinc(t) * p(t) * omega
    return 0.5 + math.fsum(terms.tolist()) / (2.0 * math.pi)


# ---------------------------------------------------------------- error bounds

def poisson_error_bound(epsilon: float, zeros: ZeroSet, variance: Optional[float] = None) -> float:
    """Bound on the aliased terms sum_{n != 0} phi_hat(n / epsilon).

    phi_hat(x) is half the mass the distribution of Y puts on [x-1, x+1], so for
    x > 1 it is at most P(Y >= x - 1) / 2, and Y is symmetric.  E exp(s * 2 r cos theta) = I0(2 r s) <=
    exp(r^2 s^2), which makes Y sub-Gaussian: P(Y >= u) <= exp(-u^2 / (4 V))
    with V = sum 1/(1/4 + gamma^2) over all gamma > 0.  Values below the
    smallest normal double are returned as that double.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    V = quarter_shift_closed_form(zeros) if variance is None else variance
    if V <= 0:
        # Y == 0: phi_hat(x) vanishes once the window [x-1, x+1] misses 0
        n_near = int(math.floor(epsilon * (1.0 + 1e-12)))
        return float(n_near)
    log_half = math.log(0.5)
    logs = []
    n = 1
    while True:
        x = n / epsilon
        lg = log_half if x <= 1.0 else log_half - (x - 1.0) ** 2 / (4.0 * V)
        logs.append(lg)
        if x > 1.0 and lg < max(logs) - 60.0:
            break
        n += 1
    top = max(logs)
    log_total = math.log(2.0) + top + math.log(math.fsum(math.exp(v - top) for v in logs))
    return max(math.exp(log_total), sys.float_info.min) if log_total > -700 else sys.float_info.min


def _truncation_log_bounds(C: float, g: np.ndarray) -> np.ndarray:
    """log of the truncation bound for M = 1..len(g)."""
    M = np.arange(1, g.size + 1, dtype=float)
    log_prod = np.cumsum(0.25 * np.log(0.25 + g * g))
    log_pref = log_prod - (M / 2 + 1) * math.log(math.pi)
    log_c = math.log(C)
    bracket = np.logaddexp(math.log(2.0) - np.log(M) - (M / 2) * log_c,
                           -math.log(20.0) - (M / 2 + 1) * log_c)
    return log_pref + bracket


def truncation_error_bound(params: DensityParams, zeros: ZeroSet, M: Optional[int] = None) -> float:
    """prod_{j<=M} (1/4 + gamma_j^2)^(1/4) / pi^(M/2+1) * (2/(M C^(M/2)) + 1/(20 C^(M/2+1)))."""
    M = params.M if M is None else M
    if M is None or M < 1:
        raise ValueError("M must be a positive integer")
    if M > len(zeros):
        raise ValueError(f"M={M} exceeds the {len(zeros)} available ordinates")
    lb = float(_truncation_log_bounds(params.C, zeros.ordinates[:M])[-1])
    return math.exp(lb) if lb < 709 else math.inf


def default_M(params: DensityParams, zeros: ZeroSet, target: float = DEFAULT_M_TARGET) -> int:
    """Smallest M whose truncation bound is below target."""
    if not len(zeros):
        raise ValueError("empty zero set")
    lb = _truncation_log_bounds(params.C, zeros.ordinates)
    ok = np.nonzero(lb < math.log(target))[0]
    if not ok.size:
        raise ValueError(f"truncation bound never drops below {target}; "
                         f"its minimum is {math.exp(lb.min()):.3g} at M={int(lb.argmin()) + 1}")
    return int(ok[0]) + 1


def product_error_bound(params: DensityParams, zeros: ZeroSet, T1: float,
                        abs_omega: Optional[np.ndarray] = None) -> float:
    """(1/2pi) sum eps |sinc(n eps)| prod |J0| * 2 (T1 n^2 eps^2)^(A+1) / (A+1)!.

    T1 is the sum of 1/(1/4 + gamma^2) over the omitted ordinates gamma > X.
    """
    t = params.nodes()
    if abs_omega is None:
        abs_omega = np.abs(omega_hat(t, zeros, X=params.X))
    A = params.A
    terms = (_node_weights(params) * np.abs(_sinc(t)) * abs_omega
             * 2.0 * (T1 * t * t) ** (A + 1) / math.factorial(A + 1))
    return math.fsum(terms.tolist()) / (2.0 * math.pi)


def zero_precision_error(params: DensityParams, zeros: ZeroSet, abs_p_omega_bound: np.ndarray) -> float:
    """First-order effect of rounding every ordinate by half a unit in its last stated digit.

    Changing one factor J0(t r_j) by d moves the product by at most |d| since the
    other factors have modulus <= 1; |dJ0/dgamma| = |J1(t r)| t |dr/dgamma|.
    """
    h = 0.5 * 10.0 ** (-zeros.stated_precision)
    g = zeros.ordinates[zeros.ordinates <= params.X]
    r = 2.0 / np.sqrt(0.25 + g * g)
    dr = 2.0 * g / (0.25 + g * g) ** 1.5
    t = params.nodes()
    z = np.multiply.outer(t, r)
    j1 = np.minimum(z / 2.0, J1_MAX)
    sens = (j1 * t[:, None] * dr[None, :]).sum(axis=1) * h
    terms = _node_weights(params) * np.abs(_sinc(t)) * abs_p_omega_bound * sens
    return math.fsum(terms.tolist()) / (2.0 * math.pi)


# ---------------------------------------------------------------- density

@dataclass(frozen=True)
class DensityResult:
    delta: float
    poisson_error: float
    truncation_error: float
    product_error: float
    total_budget: float
    params: DensityParams
    M: int
    polynomial: CompensatingPolynomial
    n_zeros: int
    zero_precision_error: float = 0.0
    low_confidence: bool = False
    notes: Tuple[str, ...] = ()

    @property
    def b1(self) -> float:
        return self.polynomial.coefficients[1] if self.polynomial.degree >= 1 else 0.0


def delta_density(params: DensityParams, zeros: ZeroSet, *, tails: Optional[TailSums] = None,
                  threads: int = 1) -> DensityResult:
    """delta = 1/2 + (1/2pi) sum_{|n eps| <= C} eps sinc(n eps) p(n eps) omega_hat(n eps)."""
    notes: List[str] = []
    if len(zeros) and params.X > zeros.max_ordinate:
        raise ValueError(f"X={params.X} beyond the zero data (max ordinate {zeros.max_ordinate})")
    if len(zeros) == 0:
        tails = TailSums(params.X, 0.0, 0.0)
    elif tails is None:
        tails = tail_sums(zeros, params.X)
    p = compensating_polynomial(tails, params.A)
    t = params.nodes()
    omega = omega_hat(t, zeros, X=params.X, threads=threads) if len(zeros) else np.ones_like(t)
    delta = poisson_sum(params, omega, p)

    if len(zeros):
        if params.M is not None:
            M = params.M
        else:
            try:
                M = default_M(params, zeros)
            except ValueError as exc:
                M = int(_truncation_log_bounds(params.C, zeros.ordinates).argmin()) + 1
                notes.append(str(exc))
        trunc = truncation_error_bound(params, zeros, M)
        poisson = poisson_error_bound(params.epsilon, zeros)
        prod = product_error_bound(params, zeros, tails.s1, np.abs(omega))
        zp = zero_precision_error(params, zeros, np.abs(omega * p(t)))
    else:
        M, trunc, poisson, prod, zp = 0, math.nan, math.nan, 0.0, 0.0
        notes.append("no zeros: the distribution is a point mass and the Poisson sum only approximates 1")
    total = poisson + trunc + prod
    low = not (total <= LOW_CONFIDENCE_BUDGET)
    if poisson > 1.0:
        notes.append("aliasing bound exceeds 1; epsilon too large for a usable result")
    return DensityResult(delta, poisson, trunc, prod, total, params, M, p,
                         int(np.count_nonzero(zeros.ordinates <= params.X)), zp, low, tuple(notes))


# ---------------------------------------------------------------- Monte Carlo

@dataclass(frozen=True)
class MonteCarloResult:
    estimate: float       # P(Z > 0)
    stderr: float
    upper_half: float     # P(Z - 1 > 0), 1/2 by symmetry
    upper_half_stderr: float
    n_samples: int
    cutoff: float
    n_zeros: int
    seed: int


def _mc_chunk(radii: np.ndarray, seed: int, index: int, size: int) -> Tuple[int, int]:
    rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
    if radii.size == 0:
        return size, 0
    theta = rng.random((size, radii.size))
    theta *= 2.0 * math.pi
    np.cos(theta, out=theta)
    y = theta @ radii
    return int(np.count_nonzero(y > -1.0)), int(np.count_nonzero(y > 0.0))


def monte_carlo_density(zeros: ZeroSet, n_samples: int, seed: int, cutoff: Optional[float] = None,
                        threads: int = 1) -> MonteCarloResult:
    """Sample Z = 1 + sum 2 r_j cos(theta_j) and estimate P(Z > 0).

    Chunk k draws from SeedSequence([seed, k]) with a fixed chunk size, so the
    result does not depend on the thread count.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    cutoff = zeros.max_ordinate if cutoff is None else cutoff
    radii = _radii(zeros, cutoff)
    sizes = [MC_CHUNK] * (n_samples // MC_CHUNK)
    if n_samples % MC_CHUNK:
        sizes.append(n_samples % MC_CHUNK)
    jobs = list(enumerate(sizes))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            counts = list(pool.map(lambda job: _mc_chunk(radii, seed, job[0], job[1]), jobs))
    else:
        counts = [_mc_chunk(radii, seed, k, m) for k, m in jobs]
    pos = sum(c[0] for c in counts)
    up = sum(c[1] for c in counts)
    p = pos / n_samples
    u = up / n_samples
    se = math.sqrt(max(p * (1 - p), 0.0) / n_samples)
    se_u = math.sqrt(max(u * (1 - u), 0.0) / n_samples)
    return MonteCarloResult(p, se, u, se_u, n_samples, cutoff, int(radii.size), seed)


# ---------------------------------------------------------------- dissipation

@dataclass(frozen=True)
class DissipationRow:
    q: int
    delta: float
    bias: float                  # |delta - 1/2|
    l_only_signed: float         # (1/2pi) |sum eps sinc omega_hat_chi|
    l_only_bound: float          # (1/2pi) sum eps |sinc| |omega_hat_chi|
    bound_holds: bool


def dissipation_scan(entries: Dict[int, Tuple[ZeroSet, ZeroSet]],
                     params: Optional[DensityParams] = None, threads: int = 1) -> List[DissipationRow]:
    """delta per field together with two L-only quantities.

    entries maps q to (zeta zeros, L zeros).  l_only_signed replaces omega_hat_K
    by omega_hat_chi inside the density integral; l_only_bound integrates
    |sinc| |omega_hat_chi|, which dominates |delta - 1/2| because
    |omega_hat_zeta| <= 1.
    """
    rows = []
    for q in sorted(entries):
        zeta, lchi = entries[q]
        X = min(zeta.max_ordinate, lchi.max_ordinate)
        prm = params or DensityParams(X=X)
        if prm.X > X:
            prm = DensityParams(prm.epsilon, prm.C, prm.M, X, prm.A)
        res = delta_density(prm, merge(zeta, lchi), threads=threads)
        t = prm.nodes()
        w = _node_weights(prm) * _sinc(t)
        om_chi = omega_hat(t, lchi, X=prm.X, threads=threads)
        signed = abs(math.fsum((w * om_chi).tolist())) / (2 * math.pi)
        bound = math.fsum((np.abs(w) * np.abs(om_chi)).tolist()) / (2 * math.pi)
        bias = abs(res.delta - 0.5)
        rows.append(DissipationRow(q, res.delta, bias, signed, bound, bound >= bias))
    return rows
