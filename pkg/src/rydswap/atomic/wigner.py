"""Wigner 3j and 6j symbols and Clebsch-Gordan coefficients.

Racah's single-sum formulas. The alternating sums are accumulated exactly
as rationals and combined with the square-root prefactor in log space, so
large arguments neither overflow nor lose digits to cancellation.
Arguments may be integers or half-integers; symbols that violate a
selection rule are exactly 0.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from rydswap.errors import InputError


def _twice(x: float) -> int:
    t = 2 * x
    r = round(t)
    if abs(t - r) > 1e-9:
        raise InputError(f"angular momentum {x} is not a multiple of 1/2")
    return int(r)


def _lf(n2: int) -> float:
    """log((n2 / 2)!) for an even doubled argument."""
    return math.lgamma(n2 // 2 + 1)


def _f(n2: int) -> int:
    return math.factorial(n2 // 2)


def _combine(total: Fraction, log_pre: float) -> float:
    if total == 0:
        return 0.0
    mag = math.log(abs(total.numerator)) - math.log(total.denominator) + log_pre
    return math.copysign(math.exp(mag), total)


def _triangle(a: int, b: int, c: int) -> bool:
    """Triangle rule on doubled values, including integer perimeter."""
    return c <= a + b and c >= abs(a - b) and (a + b + c) % 2 == 0


def _log_delta(a: int, b: int, c: int) -> float:
    return 0.5 * (_lf(a + b - c) + _lf(a - b + c) + _lf(-a + b + c) - _lf(a + b + c + 2))


@lru_cache(maxsize=65536)
def _w3j(j1, j2, j3, m1, m2, m3) -> float:
    if m1 + m2 + m3 != 0:
        return 0.0
    if not _triangle(j1, j2, j3):
        return 0.0
    for j, m in ((j1, m1), (j2, m2), (j3, m3)):
        if abs(m) > j or (j + m) % 2:
            return 0.0
    if m1 == m2 == m3 == 0 and ((j1 + j2 + j3) // 2) % 2:
        return 0.0
    pre = _log_delta(j1, j2, j3) + 0.5 * (
        _lf(j1 + m1) + _lf(j1 - m1) + _lf(j2 + m2) + _lf(j2 - m2) + _lf(j3 + m3) + _lf(j3 - m3)
    )
    # doubled summation bounds
    k_min = max(0, j2 - j3 - m1, j1 - j3 + m2)
    k_max = min(j1 + j2 - j3, j1 - m1, j2 + m2)
    total = Fraction(0)
    for k in range(k_min, k_max + 1, 2):
        den = (
            _f(k)
            * _f(j1 + j2 - j3 - k)
            * _f(j1 - m1 - k)
            * _f(j2 + m2 - k)
            * _f(j3 - j2 + m1 + k)
            * _f(j3 - j1 - m2 + k)
        )
        total += Fraction(-1 if (k // 2) % 2 else 1, den)
    value = _combine(total, pre)
    phase = (j1 - j2 - m3) // 2
    return -value if phase % 2 else value


def wigner_3j(j1, j2, j3, m1, m2, m3) -> float:
    return _w3j(*(_twice(x) for x in (j1, j2, j3, m1, m2, m3)))


@lru_cache(maxsize=65536)
def _w6j(j1, j2, j3, j4, j5, j6) -> float:
    triads = ((j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3))
    if not all(_triangle(*t) for t in triads):
        return 0.0
    pre = sum(_log_delta(*t) for t in triads)
    sums = [sum(t) for t in triads]
    quads = (j1 + j2 + j4 + j5, j2 + j3 + j5 + j6, j3 + j1 + j6 + j4)
    t_min = max(sums)
    t_max = min(quads)
    total = Fraction(0)
    for t in range(t_min, t_max + 1, 2):
        den = math.prod(_f(t - s) for s in sums) * math.prod(_f(q - t) for q in quads)
        total += Fraction((-1 if (t // 2) % 2 else 1) * _f(t + 2), den)
    return _combine(total, pre)


def wigner_6j(j1, j2, j3, j4, j5, j6) -> float:
    """{j1 j2 j3; j4 j5 j6}."""
    return _w6j(*(_twice(x) for x in (j1, j2, j3, j4, j5, j6)))


def clebsch_gordan(j1, m1, j2, m2, j, m) -> float:
    """<j1 m1; j2 m2 | j m>."""
    w = wigner_3j(j1, j2, j, m1, m2, -m)
    if w == 0.0:
        return 0.0
    phase = _twice(j1 - j2 + m) // 2
    sign = -1.0 if phase % 2 else 1.0
    return sign * math.sqrt(2 * j + 1) * w
