"""Zero ordinates of zeta(s) and L(s, chi_Delta): loading, merging, validation.

Zero files are plain text, one positive ordinate per line, '#' comments.  A
comment of the form ``# precision: N`` states the number of reliable decimals;
otherwise the smallest number of printed decimals is used.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import mpmath
import numpy as np
from scipy import integrate, special

from .fields import EULER_GAMMA, kronecker

DEDUP_TOL = 1e-9
_PRECISION_RE = re.compile(r"#\s*precision\s*[:=]\s*(\d+)", re.I)


class ZeroFileError(ValueError):
    pass


@dataclass(frozen=True)
class ZeroSet:
    """Sorted positive ordinates of one L-function, or of a product of two.

    component is "zeta", "lchi" or "merged"; disc is the character modulus for
    the last two.
    """

    component: str
    ordinates: np.ndarray
    stated_precision: int
    disc: Optional[int] = None

    def __post_init__(self):
        if self.component not in ("zeta", "lchi", "merged"):
            raise ValueError(f"unknown component {self.component!r}")
        if self.component != "zeta" and self.disc is None:
            raise ValueError(f"component {self.component} needs a discriminant")
        arr = np.asarray(self.ordinates, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "ordinates", arr)

    def __len__(self) -> int:
        return self.ordinates.size

    def truncate(self, height: float) -> "ZeroSet":
        k = int(np.searchsorted(self.ordinates, height, side="right"))
        return ZeroSet(self.component, self.ordinates[:k], self.stated_precision, self.disc)

    def count(self, T: float) -> int:
        return int(np.searchsorted(self.ordinates, T, side="right"))

    @property
    def max_ordinate(self) -> float:
        return float(self.ordinates[-1]) if self.ordinates.size else 0.0


def load_zeros(path, component: str, disc: Optional[int] = None) -> ZeroSet:
    path = Path(path)
    values = []
    precision = None
    min_decimals = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                m = _PRECISION_RE.match(line)
                if m:
                    precision = int(m.group(1))
                continue
            try:
                v = float(line)
            except ValueError:
                raise ZeroFileError(f"{path}:{lineno}: not a number: {line!r}") from None
            if not math.isfinite(v) or v <= 0:
                raise ZeroFileError(f"{path}:{lineno}: ordinate must be positive, got {line!r}")
            dec = len(line.split(".", 1)[1]) if "." in line and "e" not in line.lower() else 0
            min_decimals = dec if min_decimals is None else min(min_decimals, dec)
            values.append(v)
    if not values:
        raise ZeroFileError(f"{path}: no ordinates found")
    arr = np.sort(np.array(values))
    keep = np.concatenate([[True], np.diff(arr) > DEDUP_TOL])
    arr = arr[keep]
    if precision is None:
        precision = min_decimals or 0
    return ZeroSet(component, arr, precision, disc)


def save_zeros(zeros: ZeroSet, path) -> None:
    digits = max(zeros.stated_precision, 1)
    with open(path, "w") as fh:
        fh.write(f"# {zeros.component} ordinates"
                 + (f" for discriminant {zeros.disc}" if zeros.disc else "") + "\n")
        fh.write(f"# precision: {zeros.stated_precision}\n")
        for g in zeros.ordinates:
            fh.write(f"{g:.{digits}f}\n")


def merge(zeta: ZeroSet, lchi: ZeroSet) -> ZeroSet:
    """Multiset union of the zeta and L(s, chi) ordinates (zeros of zeta_K)."""
    if zeta.component != "zeta" or lchi.component != "lchi":
        raise ValueError(f"cannot merge {zeta.component!r} with {lchi.component!r}")
    arr = np.sort(np.concatenate([zeta.ordinates, lchi.ordinates]), kind="stable")
    return ZeroSet("merged", arr, min(zeta.stated_precision, lchi.stated_precision), lchi.disc)


def merge_any(a: ZeroSet, b: ZeroSet) -> ZeroSet:
    """merge() accepting its arguments in either order."""
    return merge(a, b) if a.component == "zeta" else merge(b, a)


# ---------------------------------------------------------------- counting

def _components(zeros: ZeroSet):
    if zeros.component == "zeta":
        return [None]
    if zeros.component == "lchi":
        return [zeros.disc]
    return [None, zeros.disc]


def smooth_count(zeros: ZeroSet, t) -> np.ndarray:
    """theta(t)/pi (+1 for zeta) summed over components: count minus S(t)."""
    t = np.asarray(t, dtype=float)
    lg = special.loggamma(0.25 + 0.5j * t).imag
    total = np.zeros_like(t)
    for d in _components(zeros):
        if d is None:
            total += (lg - 0.5 * t * math.log(math.pi)) / math.pi + 1.0
        else:
            total += (lg + 0.5 * t * math.log(d / math.pi)) / math.pi
    return total


def smooth_density(zeros: ZeroSet, t: float) -> float:
    """Derivative of smooth_count."""
    re_psi = special.psi(0.25 + 0.5j * t).real
    total = 0.0
    for d in _components(zeros):
        q = 1.0 if d is None else float(d)
        total += (0.5 * re_psi + 0.5 * math.log(q / math.pi)) / math.pi
    return total


@dataclass(frozen=True)
class ZeroCountReport:
    T: float
    observed: int
    main_term: float
    deviation: float
    slack: float
    worst_window: float
    worst_window_excess: float
    passed: bool


def validate_counts(zeros: ZeroSet, field, T: float, slack_factor: float = 3.0) -> ZeroCountReport:
    """Check N_K(T) (zeros with |gamma| <= T) against the main term of the zero count.

    Also checks every unit window N_K(t+1) - N_K(t) <= slack_factor log(t+1)
    for integer t in [1, T-1].
    """
    if T > zeros.max_ordinate:
        raise ValueError(f"T={T} exceeds the data range {zeros.max_ordinate}")
    D, n = abs(field.discriminant), field.degree
    observed = 2 * zeros.count(T)
    main = (T / math.pi) * math.log(D * (T / (2 * math.pi * math.e)) ** n)
    slack = slack_factor * math.log(D * T ** n)
    dev = observed - main
    ts = np.arange(1, int(math.floor(T)), dtype=float)
    if ts.size:
        counts = 2 * np.searchsorted(zeros.ordinates, np.append(ts, ts[-1] + 1), side="right")
        inc = counts[1:] - counts[:-1]
        excess = inc - slack_factor * np.log(ts + 1)
        k = int(np.argmax(excess))
        worst_t, worst_ex = float(ts[k]), float(excess[k])
    else:
        worst_t, worst_ex = 0.0, -math.inf
    ok = abs(dev) <= slack and worst_ex <= 0
    return ZeroCountReport(T, observed, main, dev, slack, worst_t, worst_ex, ok)


# ---------------------------------------------------------------- sums

def tail_sum(zeros: ZeroSet, weight, cutoff: float) -> float:
    """Sum of weight(gamma) over gamma > cutoff, from the smooth zero density.

    The boundary term fixes the offset between the smooth and actual counts
    at the cutoff, leaving only the oscillating part of S(t) unaccounted for.
    """
    boundary = (float(smooth_count(zeros, cutoff)) - zeros.count(cutoff)) * weight(cutoff)
    val, _ = integrate.quad(lambda u: smooth_density(zeros, cutoff / u) * weight(cutoff / u) * cutoff / u**2,
                            0.0, 1.0, epsabs=1e-15, epsrel=1e-12, limit=200)
    return val + boundary


@dataclass(frozen=True)
class OrdinateSum:
    partial: float
    tail: float

    @property
    def full(self) -> float:
        return self.partial + self.tail


def _compensated(values: np.ndarray) -> float:
    return math.fsum(values.tolist())


def gamma_square_sum(zeros: ZeroSet) -> OrdinateSum:
    """sum 1/gamma^2 over the stored ordinates and the tail beyond them."""
    if not len(zeros):
        raise ValueError("empty zero set")
    g = zeros.ordinates
    return OrdinateSum(_compensated(1.0 / g**2), tail_sum(zeros, lambda t: 1.0 / t**2, zeros.max_ordinate))


def quarter_shift_sum(zeros: ZeroSet, cutoff: Optional[float] = None) -> OrdinateSum:
    """sum 1/(1/4 + gamma^2) over ordinates <= cutoff plus the tail estimate beyond."""
    if not len(zeros):
        raise ValueError("empty zero set")
    cutoff = zeros.max_ordinate if cutoff is None else min(cutoff, zeros.max_ordinate)
    g = zeros.ordinates[zeros.ordinates <= cutoff]
    return OrdinateSum(_compensated(1.0 / (0.25 + g**2)),
                       tail_sum(zeros, lambda t: 1.0 / (0.25 + t**2), cutoff))


def quarter_shift_closed_form(zeros: ZeroSet) -> float:
    """sum over all gamma > 0 of 1/(1/4 + gamma^2) from logarithmic derivatives at s = 1.

    For zeta this is 1 + gamma/2 - log(4 pi)/2; for an even primitive real
    character of conductor k it is log(k/pi)/2 - gamma/2 - log 2 + L'/L(1, chi).
    Both assume every zero lies on the critical line away from s = 1/2.
    """
    total = 0.0
    for d in _components(zeros):
        if d is None:
            total += 1.0 + EULER_GAMMA / 2 - math.log(4 * math.pi) / 2
        else:
            total += (0.5 * math.log(d / math.pi) - EULER_GAMMA / 2 - math.log(2.0)
                      + log_derivative_L1(d))
    return total


def log_derivative_L1(disc: int) -> float:
    """L'/L(1, chi_disc) from the Laurent data of the Hurwitz zeta function.

    L(s) = disc^-s sum chi(a) zeta(s, a/disc); the poles cancel because
    sum chi(a) = 0, and zeta(s, a) = 1/(s-1) - psi(a) - gamma_1(a)(s-1) + ...
    """
    chi = [(a, kronecker(disc, a)) for a in range(1, disc)]
    chi = [(a, c) for a, c in chi if c]
    with mpmath.workdps(30):
        L = -mpmath.fsum(c * mpmath.digamma(mpmath.mpf(a) / disc) for a, c in chi) / disc
        dL = (-mpmath.log(disc) * L
              - mpmath.fsum(c * mpmath.stieltjes(1, mpmath.mpf(a) / disc) for a, c in chi) / disc)
        return float(dL / L)


# ---------------------------------------------------------------- bundled data

DATA_ENV = "MERTENS_NF_DATA"


def data_dir(override=None) -> Path:
    """Zero-file directory: explicit override, then $MERTENS_NF_DATA, then the bundled copy."""
    import os

    if override:
        return Path(override)
    env = os.environ.get(DATA_ENV)
    if env:
        return Path(env)
    return Path(__file__).resolve().parent / "data"


def zero_file(component: str, disc: Optional[int] = None, directory=None) -> Path:
    name = "zeros_zeta.txt" if component == "zeta" else f"zeros_L{disc}.txt"
    return data_dir(directory) / name


def load_field_zeros(disc: int, directory=None):
    """(zeta, L(s, chi_disc), merged) zero sets for the field of discriminant disc."""
    zeta = load_zeros(zero_file("zeta", directory=directory), "zeta")
    lchi = load_zeros(zero_file("lchi", disc, directory), "lchi", disc)
    return zeta, lchi, merge(zeta, lchi)
