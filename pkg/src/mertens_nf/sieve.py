"""Prime-ideal norms of Q(sqrt(q)) via rational primes and a segmented sieve.

A rational prime p contributes two ideals of norm p when it splits, one of norm
p when it ramifies and one of norm p^2 when it stays inert.  Every ideal power
N(p)^m <= x is an event; events are accumulated in increasing norm with
compensated sums so the output does not depend on how the range was segmented.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from numba import njit

from .fields import QuadraticField, RationalField, kronecker

MAX_X = 10**9
DEFAULT_SEGMENT = 1 << 21


class SieveBudgetError(ValueError):
    pass


class OffGridError(KeyError):
    pass


class SplittingType(Enum):
    SPLIT = "split"
    INERT = "inert"
    RAMIFIED = "ramified"


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def splitting_type(p: int, field: QuadraticField) -> SplittingType:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    c = kronecker(field.discriminant, p)
    if c == 0:
        return SplittingType.RAMIFIED
    return SplittingType.SPLIT if c == 1 else SplittingType.INERT


def primes_upto(n: int) -> np.ndarray:
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p::p] = False
    return np.flatnonzero(flags).astype(np.int64)


def segment_primes(lo: int, hi: int, base: np.ndarray) -> np.ndarray:
    """Primes in [lo, hi) given all primes up to sqrt(hi)."""
    lo = max(lo, 2)
    if hi <= lo:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(hi - lo, dtype=bool)
    for p in base:
        p = int(p)
        if p * p >= hi:
            break
        start = max(p * p, (lo + p - 1) // p * p)
        flags[start - lo::p] = False
    return np.flatnonzero(flags).astype(np.int64) + lo


def _ideal_multiplicity(field, primes: np.ndarray) -> np.ndarray:
    """Number of prime ideals of norm p above each p (0 when p is inert)."""
    if isinstance(field, RationalField):
        return np.ones(primes.size, dtype=np.int64)
    D = field.discriminant
    table = np.array([kronecker(D, r) if r else 0 for r in range(D)], dtype=np.int64)
    chi = table[primes % D]
    # chi is periodic in p only for odd p; p = 2 handled directly
    chi[primes == 2] = kronecker(D, 2)
    return np.where(chi == 0, 1, np.where(chi == 1, 2, 0)).astype(np.int64)


def geometric_grid(x0: float, ratio: float, count: int) -> np.ndarray:
    return x0 * ratio ** np.arange(count)


def default_grid(x_max: float) -> np.ndarray:
    """All integers <= 1000, a ratio-1.01 geometric grid from 100 to x_max, and powers of ten."""
    ints = np.arange(2, min(1000, int(x_max)) + 1, dtype=float)
    if x_max >= 100:
        n = int(math.floor(math.log(x_max / 100) / math.log(1.01) + 1e-9)) + 1
        geo = geometric_grid(100.0, 1.01, n)
        geo = geo[geo <= x_max]
    else:
        geo = np.zeros(0)
    decades = 10.0 ** np.arange(3, int(math.log10(max(x_max, 1))) + 1)
    grid = np.union1d(np.union1d(ints, geo), decades[decades <= x_max])
    if grid.size == 0 or grid[-1] < x_max:
        grid = np.append(grid, float(x_max))
    return grid


@njit(cache=True)
def _accumulate(norms, dpi, dPi, dpsi, dlms, drec, checkpoints, j, state, out):
    # state: pi, then (sum, comp) pairs for Pi, psi, lms, rec
    n_cp = checkpoints.shape[0]
    for i in range(norms.shape[0]):
        nv = norms[i]
        while j < n_cp and checkpoints[j] < nv:
            out[j, 0] = state[0]
            for k in range(4):
                out[j, k + 1] = state[1 + 2 * k] + state[2 + 2 * k]
            j += 1
        state[0] += dpi[i]
        for k in range(4):
            if k == 0:
                v = dPi[i]
            elif k == 1:
                v = dpsi[i]
            elif k == 2:
                v = dlms[i]
            else:
                v = drec[i]
            s = state[1 + 2 * k]
            t = s + v
            if abs(s) >= abs(v):
                state[2 + 2 * k] += (s - t) + v
            else:
                state[2 + 2 * k] += (v - t) + s
            state[1 + 2 * k] = t
    return j


@dataclass(frozen=True)
class SieveResult:
    field: object
    x_max: int
    checkpoints: np.ndarray
    pi_K: np.ndarray
    Pi_K: np.ndarray
    psi_K: np.ndarray
    log_mertens_sum: np.ndarray
    recip_sum: np.ndarray  # sum over ideal powers N^m <= x of 1/(m N^m)
    event_norms: Optional[np.ndarray] = dc_field(default=None, repr=False)
    event_psi: Optional[np.ndarray] = dc_field(default=None, repr=False)

    def index(self, x: float) -> int:
        i = int(np.searchsorted(self.checkpoints, x))
        if i >= self.checkpoints.size or self.checkpoints[i] != x:
            raise OffGridError(f"x={x} is not a checkpoint of this sieve")
        return i

    def mertens_product(self, x: float) -> float:
        return mertens_product(self, x)

    def psi(self, x: float) -> float:
        """psi_K at any x <= x_max; needs stored events when x is off-grid."""
        if self.event_norms is None:
            return float(self.psi_K[self.index(x)])
        k = int(np.searchsorted(self.event_norms, x, side="right"))
        return float(self._psi_cumulative()[k])

    def _psi_cumulative(self) -> np.ndarray:
        cache = self.__dict__.get("_psi_cum")
        if cache is None:
            vals = np.empty(self.event_psi.size + 1)
            vals[0] = 0.0
            vals[1:] = _prefix_neumaier(self.event_psi)
            object.__setattr__(self, "_psi_cum", vals)
            cache = vals
        return cache

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "pi_K", "Pi_K", "psi_K", "log_mertens_sum"])
            for row in zip(self.checkpoints, self.pi_K, self.Pi_K, self.psi_K,
                           self.log_mertens_sum):
                w.writerow([repr(float(row[0])), int(row[1])] + [repr(float(v)) for v in row[2:]])


@njit(cache=True)
def _prefix_neumaier(values):
    out = np.empty(values.shape[0])
    s = 0.0
    c = 0.0
    for i in range(values.shape[0]):
        v = values[i]
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
        out[i] = s + c
    return out


def _small_events(field, x_max: int):
    """Events whose norm is not a rational prime: inert p^2 and all powers m >= 2."""
    base = primes_upto(math.isqrt(x_max))
    mult = _ideal_multiplicity(field, base)
    rows = []
    for p, k in zip(base.tolist(), mult.tolist()):
        N, m0 = (p, 2) if k else (p * p, 1)
        k = k or 1
        v, m = N ** m0, m0
        while v <= x_max:
            rows.append((v, m, N, k))
            v *= N
            m += 1
    return rows


def _events_from_rows(rows):
    if not rows:
        z = np.zeros(0)
        return np.zeros(0, dtype=np.int64), z, z, z, z, z
    arr = np.array(rows, dtype=np.int64)
    norms, m, N, k = arr[:, 0], arr[:, 1], arr[:, 2].astype(float), arr[:, 3].astype(float)
    first = m == 1
    dpi = np.where(first, k, 0.0)
    dPi = k / m
    dpsi = k * np.log(N)
    dlms = np.where(first, -k * np.log1p(-1.0 / N), 0.0)
    drec = k / (m * N.astype(float) ** m)
    return norms, dpi, dPi, dpsi, dlms, drec


def _prime_events(field, primes: np.ndarray):
    mult = _ideal_multiplicity(field, primes)
    keep = mult > 0
    p = primes[keep]
    k = mult[keep].astype(float)
    pf = p.astype(float)
    return p, k, k.copy(), k * np.log(pf), -k * np.log1p(-1.0 / pf), k / pf


def sieve(field, x_max: int, grid: Optional[Sequence[float]] = None, *,
          segment_size: int = DEFAULT_SEGMENT, threads: int = 1,
          keep_events: bool = False, max_x: int = MAX_X) -> SieveResult:
    """Sieve prime-ideal norms up to x_max and record the counting functions on a grid."""
    x_max = int(x_max)
    if x_max > max_x:
        segs = -(-x_max // segment_size)
        raise SieveBudgetError(
            f"x_max={x_max} exceeds the budget {max_x}; would need {segs} segments")
    checkpoints = default_grid(max(x_max, 2)) if grid is None else np.asarray(grid, dtype=float)
    if checkpoints.size and (np.any(np.diff(checkpoints) <= 0)):
        raise ValueError("checkpoint grid must be strictly increasing")
    if checkpoints.size and checkpoints[-1] > max(x_max, 1):
        raise ValueError("checkpoint beyond x_max")

    out = np.zeros((checkpoints.size, 5))
    state = np.zeros(9)
    j = 0
    kept_norms, kept_psi = [], []

    if x_max >= 2:
        base = primes_upto(math.isqrt(x_max) + 1)
        small = _events_from_rows(_small_events(field, x_max))
        bounds = list(range(0, x_max + 1, segment_size)) + [x_max + 1]
        bounds = sorted(set(bounds))
        segments = list(zip(bounds[:-1], bounds[1:]))

        def build(seg):
            lo, hi = seg
            pe = _prime_events(field, segment_primes(lo, hi, base))
            sel = (small[0] >= lo) & (small[0] < hi)
            parts = [np.concatenate([pe[i], small[i][sel]]) for i in range(6)]
            order = np.argsort(parts[0], kind="stable")
            return [a[order] for a in parts]

        if threads == 1:
            built = map(build, segments)
        else:
            pool = ThreadPoolExecutor(max_workers=threads or None)
            built = pool.map(build, segments)
        for ev in built:
            norms = ev[0]
            j = _accumulate(norms, *[np.ascontiguousarray(a, dtype=float) for a in ev[1:]],
                            checkpoints, j, state, out)
            if keep_events:
                kept_norms.append(norms)
                kept_psi.append(ev[3])
        if threads != 1:
            pool.shutdown()
    final = [state[0]] + [state[1 + 2 * k] + state[2 + 2 * k] for k in range(4)]
    out[j:] = final

    ev_n = ev_p = None
    if keep_events:
        ev_n = np.concatenate(kept_norms) if kept_norms else np.zeros(0, dtype=np.int64)
        ev_p = np.concatenate(kept_psi) if kept_psi else np.zeros(0)
    return SieveResult(
        field=field, x_max=x_max, checkpoints=checkpoints,
        pi_K=out[:, 0].astype(np.int64), Pi_K=out[:, 1], psi_K=out[:, 2],
        log_mertens_sum=out[:, 3], recip_sum=out[:, 4],
        event_norms=ev_n, event_psi=ev_p,
    )


def mertens_product(result: SieveResult, x: float) -> float:
    """prod_{N(p) <= x} (1 - 1/N(p))^(-1), taken from the log-space accumulator."""
    return math.exp(float(result.log_mertens_sum[result.index(x)]))


@dataclass(frozen=True)
class ChebyshevReport:
    checkpoints: np.ndarray
    pi_Q: np.ndarray
    pi_K: np.ndarray
    pi_K_over: np.ndarray  # prime ideals lying over rational primes p <= x
    lower_margin: np.ndarray  # pi_K - pi_Q
    upper_margin: np.ndarray  # n_K pi_Q - pi_K
    bound_margin: np.ndarray  # 1.25506 n_K x / log x - pi_K
    sandwich_holds: bool
    lying_over_holds: bool
    bound_holds: bool

    @property
    def first_lower_violation(self) -> Optional[float]:
        bad = np.flatnonzero(self.lower_margin < 0)
        return float(self.checkpoints[bad[0]]) if bad.size else None


def count_ideals_over(field, x_max: int, checkpoints: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(pi_Q, number of prime ideals above rational primes p <= x) at each checkpoint."""
    primes = primes_upto(x_max)
    mult = _ideal_multiplicity(field, primes)
    over = np.where(mult == 0, 1, mult)
    idx = np.searchsorted(primes, checkpoints, side="right")
    cum = np.concatenate([[0], np.cumsum(over)])
    return idx.astype(np.int64), cum[idx].astype(np.int64)


def chebyshev_check(result: SieveResult, strict: bool = True) -> ChebyshevReport:
    """Compare pi_K with pi_Q and with the explicit Chebyshev-type bound.

    The literal sandwich pi_Q(x) <= pi_K(x) is reported but not enforced: an
    inert prime p <= x only produces an ideal of norm p^2, so pi_K can fall
    below pi_Q.  Enforced (strict=True) are the upper bounds and the sandwich
    for ideals counted by the rational prime they lie over.
    """
    cp = result.checkpoints
    n = result.field.degree
    pi_Q, over = count_ideals_over(result.field, result.x_max, cp)
    pi_K = result.pi_K
    with np.errstate(divide="ignore", invalid="ignore"):
        bound = np.where(cp > 1, 1.25506 * n * cp / np.log(cp), np.inf)
    lower = pi_K - pi_Q
    upper = n * pi_Q - pi_K
    bmargin = bound - pi_K
    over_ok = bool(np.all((pi_Q <= over) & (over <= n * pi_Q)))
    rep = ChebyshevReport(cp, pi_Q, pi_K, over, lower, upper, bmargin,
                          bool(np.all(lower >= 0) and np.all(upper >= 0)),
                          over_ok, bool(np.all(upper >= 0) and np.all(bmargin > 0)))
    if strict and not (rep.bound_holds and rep.lying_over_holds):
        raise AssertionError("Chebyshev-type bound violated: sieve inconsistency")
    return rep
