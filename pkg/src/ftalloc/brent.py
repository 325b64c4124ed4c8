"""Derivative-free bounded minimization of a scalar function.

Brent's method: golden-section steps safeguarded by successive parabolic
interpolation, in the bounded form (the interior search never touches the
endpoints; they are compared once at the end).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

GOLD = 0.5 * (3.0 - math.sqrt(5.0))
SQRT_EPS = math.sqrt(2.220446049250313e-16)
STAGNATION_LIMIT = 3


@dataclass(frozen=True)
class BracketResult:
    x_star: float
    f_star: float
    evaluations: int
    converged: bool


def _counted(f: Callable[[float], float]):
    calls = [0]

    def g(x: float) -> float:
        calls[0] += 1
        y = float(f(x))
        # NaN would poison every comparison below
        return math.inf if math.isnan(y) else y

    return g, calls


def brent_minimize(
    f: Callable[[float], float],
    a: float,
    b: float,
    xtol: float = 1e-6,
    max_eval: int = 100,
) -> BracketResult:
    """Minimize ``f`` over ``[a, b]``.

    ``f`` may return ``inf`` to mark infeasible points; parabolic steps are
    skipped whenever one of the interpolation nodes is infinite.  After three
    consecutive parabolic steps that shrink the bracket more slowly than a
    golden step would, only golden steps are taken.

    The endpoints are evaluated last, so ``f_star <= min(f(a), f(b))``.  If
    ``max_eval`` runs out first the best point seen is returned with
    ``converged=False``.
    """
    if not a < b:
        raise ValueError(f"empty interval [{a}, {b}]")
    if xtol <= 0 or max_eval < 3:
        raise ValueError("need xtol > 0 and max_eval >= 3")
    F, calls = _counted(f)
    lo, hi = a, b
    tol3 = xtol / 3.0

    x = w = v = a + GOLD * (b - a)
    fx = fw = fv = F(x)
    d = e = 0.0
    stagnant = 0
    golden_only = False
    converged = False

    while calls[0] < max_eval - 2:
        xm = 0.5 * (a + b)
        tol1 = SQRT_EPS * abs(x) + tol3
        tol2 = 2.0 * tol1
        if abs(x - xm) <= tol2 - 0.5 * (b - a):
            converged = True
            break

        parabolic = False
        if not golden_only and abs(e) > tol1 and math.isfinite(fx + fw + fv):
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                p = -p
            else:
                q = -q
            e_prev, e = e, d
            if abs(p) < abs(0.5 * q * e_prev) and q * (a - x) < p < q * (b - x):
                d = p / q
                u = x + d
                if u - a < tol2 or b - u < tol2:
                    d = math.copysign(tol1, xm - x)
                parabolic = True
        if not parabolic:
            e = (b - x) if x < xm else (a - x)
            d = GOLD * e

        u = x + d if abs(d) >= tol1 else x + math.copysign(tol1, d)
        fu = F(u)
        width = b - a

        if fu <= fx:
            if u < x:
                b = x
            else:
                a = x
            v, fv, w, fw = w, fw, x, fx
            x, fx = u, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, fv, w, fw = w, fw, u, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu

        if parabolic:
            stagnant = stagnant + 1 if (b - a) > (1.0 - GOLD) * width else 0
            if stagnant >= STAGNATION_LIMIT:
                golden_only = True

    for end in (lo, hi):
        fe = F(end)
        if fe < fx:
            x, fx = end, fe
    return BracketResult(x, fx, calls[0], converged)


def golden_section_minimize(
    f: Callable[[float], float],
    a: float,
    b: float,
    xtol: float = 1e-6,
    max_eval: int = 10_000,
) -> BracketResult:
    """Plain golden-section search, kept as a baseline for Brent."""
    if not a < b:
        raise ValueError(f"empty interval [{a}, {b}]")
    F, calls = _counted(f)
    inv_phi = 1.0 - GOLD
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = F(c), F(d)
    while b - a > xtol and calls[0] < max_eval:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = F(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = F(d)
    x, fx = (c, fc) if fc <= fd else (d, fd)
    return BracketResult(x, fx, calls[0], b - a <= xtol)
