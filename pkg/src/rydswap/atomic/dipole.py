"""Quantum-defect radial wavefunctions and dipole matrix elements (atomic units).

The radial functions are hydrogen-like with effective quantum numbers
n* = n - delta and l* = l - delta + I(l):

    R(r) = N x^l* exp(-x/2) L_k^(2l*+1)(x),   x = 2 r / n*,   k = n - l - 1 - I(l)

with N^2 = 4 k! / (n*^4 Gamma(n* + l* + 1)), which normalises R exactly
because n* = k + l* + 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from rydswap.atomic.qd import QdModel, Series, default_model, quantum_defect
from rydswap.atomic.wigner import wigner_3j, wigner_6j
from rydswap.errors import DomainError


ANGULAR_CONVENTIONS = ("sum_rule", "upper_weight")


@dataclass(frozen=True)
class RadialParameters:
    n: int
    l: int
    n_star: float
    l_star: float
    degree: int
    log_norm: float


def radial_parameters(series: Series, n: int, model: QdModel | None = None, delta: float | None = None,
                      index: int | None = None) -> RadialParameters:
    series = Series(series)
    l = series.l
    if delta is None:
        delta = quantum_defect(series, n, model)
    if index is None:
        index = series.wavefunction_index(n)
    return _parameters(int(n), l, float(delta), int(index))


def _parameters(n: int, l: int, delta: float, index: int) -> RadialParameters:
    degree = n - l - 1 - index
    if degree < 0:
        raise DomainError(f"negative Laguerre degree for n={n}, l={l}, I={index}")
    n_star = n - delta
    l_star = l - delta + index
    if not l_star + 0.5 > 0:
        raise DomainError(f"effective orbital number {l_star:.3f} violates l* > -1/2")
    log_norm = 0.5 * (math.log(4.0) + math.lgamma(degree + 1) - 4 * math.log(n_star)
                      - math.lgamma(n_star + l_star + 1))
    return RadialParameters(n, l, n_star, l_star, degree, log_norm)


def _evaluate(p: RadialParameters, r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    x = 2.0 * r / p.n_star
    lag = special.eval_genlaguerre(p.degree, 2 * p.l_star + 1, x)
    safe = np.where(x > 0, x, 1.0)
    out = lag * np.exp(p.log_norm + p.l_star * np.log(safe) - 0.5 * x)
    if p.l_star > 0:
        out = np.where(x > 0, out, 0.0)
    elif p.l_star < 0:
        out = np.where(x > 0, out, np.inf)
    return out


def radial_wavefunction(series: Series, n: int, r: np.ndarray, model: QdModel | None = None) -> np.ndarray:
    """R_nl(r) on a grid of radii in Bohr."""
    return _evaluate(radial_parameters(series, n, model), r)


def hydrogen_parameters(n: int, l: int) -> RadialParameters:
    """Zero defect and I = 0: the exact hydrogen radial function."""
    return _parameters(n, l, 0.0, 0)


def overlap_integral(p1: RadialParameters, p2: RadialParameters, power: int = 3,
                     rtol: float = 1e-10) -> float:
    """int_0^inf R1 R2 r^power dr by adaptive Gauss-Kronrod on r = s^2.

    The domain is truncated at 4 n*^2 of the larger orbit (well past the
    classical turning point; at least 40 n* so compact low-n orbitals keep
    their exponential tails) and split into panels finer than the node
    spacing.
    """
    n_big = max(p1.n_star, p2.n_star)
    r_max = max(4.0 * n_big**2, 40.0 * n_big)
    s_max = math.sqrt(r_max)

    lag = special.eval_genlaguerre
    a1, a2 = 2 * p1.l_star + 1, 2 * p2.l_star + 1
    c0 = p1.log_norm + p2.log_norm + math.log(2.0)

    def integrand(s):
        # scalar fast path for quad; the grid estimate below passes arrays
        if s <= 0:
            return 0.0
        r = s * s
        x1 = 2.0 * r / p1.n_star
        x2 = 2.0 * r / p2.n_star
        env = c0 + p1.l_star * math.log(x1) + p2.l_star * math.log(x2) - 0.5 * (x1 + x2)
        return lag(p1.degree, a1, x1) * lag(p2.degree, a2, x2) * math.exp(env) * r**power * s

    def on_grid(s):
        pos = np.where(s > 0, s, 1.0)
        r = pos * pos
        val = _evaluate(p1, r) * _evaluate(p2, r) * r**power * 2 * pos
        # r^(power + l1* + l2*) * s -> 0 at the origin for l* > -1/2
        return np.where(s > 0, val, 0.0)

    nodes = max(p1.degree, p2.degree) + 1
    edges = np.linspace(0.0, s_max, 2 * nodes + 2)
    # absolute floor from a coarse estimate of int |f|, so panels in the
    # exponential tail do not chase relative accuracy on values near zero
    grid = np.linspace(0.0, s_max, 64 * nodes + 1)
    scale = float(np.trapezoid(np.abs(on_grid(grid)), grid))
    epsabs = rtol * scale / len(edges)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(integrand, a, b, epsabs=epsabs, epsrel=rtol, limit=200)
        total += val
    return total


@lru_cache(maxsize=4096)
def _radial_integral_cached(key1, key2, provenance) -> float:
    return overlap_integral(_parameters(*key1), _parameters(*key2))


def radial_integral(series_a: Series, n_a: int, series_b: Series, n_b: int, model: QdModel | None = None) -> float:
    """<n_a l_a | r | n_b l_b> in Bohr."""
    model = model or default_model()
    pa = radial_parameters(series_a, n_a, model)
    pb = radial_parameters(series_b, n_b, model)
    key_a = (pa.n, pa.l, pa.n - pa.n_star, Series(series_a).wavefunction_index(n_a))
    key_b = (pb.n, pb.l, pb.n - pb.n_star, Series(series_b).wavefunction_index(n_b))
    if key_b < key_a:
        key_a, key_b = key_b, key_a
    return _radial_integral_cached(key_a, key_b, model.provenance)


def reduced_dipole(series_p: Series, n_p: int, series: Series, n: int, model: QdModel | None = None) -> float:
    """Single-electron <n'l'||d||nl> = (-1)^l' sqrt(2l+1) (l' 1 l; 0 0 0) <r>, atomic units."""
    lp, l = Series(series_p).l, Series(series).l
    if abs(lp - l) != 1:
        return 0.0
    ang = (-1) ** lp * math.sqrt(2 * l + 1) * wigner_3j(lp, 1, l, 0, 0, 0)
    return ang * radial_integral(series_p, n_p, series, n, model)


def pair_strength(upper: Series, lower: Series, convention: str = "sum_rule") -> float:
    """M-summed angular weight sum_{M,q} |<J'M'|D_q|JM>|^2 / |<r>|^2 for one
    active electron on top of a 5s core (l1 = 0, S = 1 for both terms).

    ``sum_rule`` follows from the Wigner-Eckart theorem and gives branching
    ratios that sum to the single-electron line strength. ``upper_weight``
    keeps the statistical weight [J'] of the decaying level in place of [J].
    """
    up, lo = Series(upper), Series(lower)
    if up.spin != lo.spin:
        return 0.0
    l1 = 0
    lp, l = up.l, lo.l
    big_lp, big_l = lp, l  # 5s core: L equals the valence l
    jp, j = up.j, lo.j
    s = up.spin
    six_a = wigner_6j(big_l, s, j, jp, 1, big_lp)
    six_b = wigner_6j(l, l1, big_l, big_lp, 1, lp)
    single = (2 * l + 1) * wigner_3j(lp, 1, l, 0, 0, 0) ** 2
    if convention not in ANGULAR_CONVENTIONS:
        raise DomainError(f"unknown angular convention {convention!r}")
    weight = (2 * j + 1) if convention == "sum_rule" else (2 * jp + 1)
    return (2 * big_l + 1) * (2 * lp + 1) * weight * (2 * big_lp + 1) * six_a**2 * six_b**2 * single
