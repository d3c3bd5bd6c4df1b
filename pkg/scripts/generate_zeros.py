#!/usr/bin/env python3
"""Generate zero-ordinate tables for zeta(s) and L(s, chi_D) with python-flint.

Zeta ordinates come from flint's rigorous zeta_zeros.  For a real even primitive
character the ordinates are located as sign changes of the Hardy Z-function,
refined with Brent's method, and each block is checked against the exact count
theta(T)/pi + S(T) obtained from the argument principle.  A block whose count
disagrees is resampled on a finer grid.

Usage:
    python scripts/generate_zeros.py zeta --height 10050 -o data/zeros_zeta.txt
    python scripts/generate_zeros.py lchi --disc 5 --height 10050 -o data/zeros_L5.txt
"""
from __future__ import annotations

import argparse
import math
import sys
import time

from flint import acb, arb, ctx, dirichlet_char
from scipy.optimize import brentq

ctx.prec = 80
BLOCK = 25.0


def kronecker(d: int, n: int) -> int:
    # Kronecker symbol (d/n) for n >= 1
    if n == 1:
        return 1
    result = 1
    while n % 2 == 0:
        n //= 2
        if d % 2 == 0:
            return 0
        if d % 8 in (3, 5):
            result = -result
    a, m = d % n, n
    while a:
        while a % 2 == 0:
            a //= 2
            if m % 8 in (3, 5):
                result = -result
        a, m = m, a
        if a % 4 == 3 and m % 4 == 3:
            result = -result
        a %= m
    return result if m == 1 else 0


def quadratic_character(disc: int) -> dirichlet_char:
    for idx in range(1, disc):
        if math.gcd(idx, disc) != 1:
            continue
        c = dirichlet_char(disc, idx)
        if c.order() != 2 or not c.is_primitive():
            continue
        if all(round(float(c(k).real.mid())) == kronecker(disc, k)
               for k in range(1, 4 * disc) if math.gcd(k, disc) == 1):
            return c
    raise ValueError(f"no primitive real character of conductor {disc}")


def theta(disc: int, t: float) -> float:
    s = acb(0.25, t / 2)
    return float((t / 2 * arb(disc / math.pi).log() + s.lgamma().imag).mid())


def arg_L_on_line(chi, t: float) -> float:
    """Continuous arg of L(s) along 3+it -> 1/2+it."""
    def val(sig):
        z = chi.l(acb(sig, t))
        return complex(float(z.real.mid()), float(z.imag.mid()))

    sig, z = 3.0, val(3.0)
    arg = math.atan2(z.imag, z.real)
    step = 0.25
    while sig > 0.5:
        new_sig = max(0.5, sig - step)
        w = val(new_sig)
        d = math.atan2((w / z).imag, (w / z).real)
        if abs(d) > math.pi / 8 and step > 1e-4:
            step /= 2
            continue
        arg += d
        sig, z = new_sig, w
        step = min(step * 1.5, 0.25)
    return arg


def exact_count(chi, disc: int, t: float) -> int:
    val = theta(disc, t) / math.pi + arg_L_on_line(chi, t) / math.pi
    n = round(val)
    if abs(val - n) > 0.05:
        raise RuntimeError(f"non-integral count {val} at t={t}")
    return n


def find_block(z, disc: int, a: float, b: float, refine: int) -> list[float]:
    spacing = 2 * math.pi / math.log(max(disc * b / (2 * math.pi), 3.0))
    n = max(8, int(math.ceil((b - a) / (spacing / (4 * refine)))))
    ts = [a + (b - a) * i / n for i in range(n + 1)]
    vs = [z(t) for t in ts]
    roots = []
    for i in range(n):
        if vs[i] == 0.0:
            roots.append(ts[i])
        elif vs[i] * vs[i + 1] < 0:
            roots.append(brentq(z, ts[i], ts[i + 1], xtol=1e-13, rtol=1e-15))
    return roots


def lchi_zeros(disc: int, height: float) -> list[float]:
    chi = quadratic_character(disc)

    def z(t):
        return float(chi.hardy_z(acb(t)).real.mid())

    out: list[float] = []
    a, prev = 0.0, 0
    t0 = time.time()
    while a < height:
        b = min(a + BLOCK, height)
        # shift the block end off any nearby zero so the count is well defined
        while abs(z(b)) < 1e-6:
            b += 1e-3
        target = exact_count(chi, disc, b) - prev
        for refine in (1, 4, 16, 64):
            roots = find_block(z, disc, a, b, refine)
            if len(roots) == target:
                break
        else:
            raise RuntimeError(f"block [{a}, {b}] count {len(roots)} != {target}")
        out.extend(roots)
        prev += target
        a = b
        print(f"  t={b:9.2f} zeros={len(out):6d} elapsed={time.time() - t0:7.1f}s",
              file=sys.stderr, flush=True)
    return out


def zeta_zeros(height: float) -> list[float]:
    out: list[float] = []
    n = 1
    while True:
        batch = acb.zeta_zeros(n, 500)
        for zz in batch:
            g = float(zz.imag.mid())
            if g > height:
                return out
            out.append(g)
        n += 500


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("kind", choices=["zeta", "lchi"])
    ap.add_argument("--disc", type=int, default=5)
    ap.add_argument("--height", type=float, default=10050.0)
    ap.add_argument("-o", "--output", required=True)
    args = ap.parse_args(argv)

    if args.kind == "zeta":
        zeros = zeta_zeros(args.height)
        header = "zeta(s)"
    else:
        zeros = lchi_zeros(args.disc, args.height)
        header = f"L(s, chi_{args.disc}) (Kronecker symbol ({args.disc}/.))"
    with open(args.output, "w") as fh:
        fh.write(f"# positive zero ordinates of {header}\n")
        fh.write(f"# height <= {args.height:g}; count {len(zeros)}; generated with python-flint\n")
        fh.write("# precision: 12\n")
        for g in zeros:
            fh.write(f"{g:.12f}\n")
    print(f"wrote {len(zeros)} ordinates to {args.output}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
