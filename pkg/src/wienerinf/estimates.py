"""Comparison estimates between capacities, and the constants they use.

Ring capacities for ``p = n`` are conformal invariants of two-ball
configurations; the closed forms below are evaluated in log space so that
radii like ``2^(-8^j)`` stay representable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.special import gammaincc, gamma as gamma_fn

from .capacity import grid_capacity, normalized_grid_capacity, auto_grid
from .geometry import (Annulus, Ball, ClosedBall, Complement, Condenser, DomainError,
                       EmptySet, Exponents, Intersection, SetDescriptor,
                       Weight, sphere_area)
from .inversion import invert_ball
from .radial import shell_capacity
from .solver import EnergyProblem, Grid, NotConverged

__all__ = [
    "arccosh_log", "ring_modulus", "ring_modulus_log", "ring_capacity",
    "annulus_split_bound", "SplitBound", "corollary63_f", "integrability_integral",
    "duality_check", "DualityResult", "poincare_constant_estimate",
    "lemma73_constant", "shell_cut_sandwich", "power_sum_holds",
]


# --------------------------------------------------------- ring capacities

def arccosh_log(log_x: float) -> float:
    """``arccosh(X)`` given ``log X``; exact for huge ``X``."""
    if log_x < 0:
        raise DomainError("arccosh needs X >= 1")
    if log_x > 20:
        return log_x + math.log1p(math.sqrt(-math.expm1(-2 * log_x)))
    return math.acosh(math.exp(log_x))


def _log_sub(la: float, lb: float) -> float:
    """``log(e^la - e^lb)`` for ``la > lb``."""
    if lb >= la:
        raise DomainError("difference is not positive")
    return la + math.log1p(-math.exp(lb - la))


def ring_modulus_log(log_a: float, log_b: float, log_d: float, nested: bool,
                     log_gap: Optional[float] = None) -> float:
    """Conformal modulus of a two-ball ring from the logs of its lengths.

    Disjoint: the region between ``closed B(c1, a)`` and ``closed B(c2, b)``
    with ``d = |c1 - c2| > a + b``, where ``cosh mu = (d^2 - a^2 - b^2)/(2ab)``.
    Nested: ``closed B(c1, a)`` inside ``B(c2, b)`` with ``d + a < b``, where
    ``cosh mu = (a^2 + b^2 - d^2)/(2ab)``.  ``log_d = -inf`` means ``d = 0``.

    ``log_gap`` is the log of the gap between the spheres (``d - a - b`` or
    ``b - d - a``).  When it is known accurately, ``cosh mu = 1 + g(2d -+ g)/(2ab)``
    avoids the cancellation of nearly touching balls.
    """
    if log_gap is not None:
        if nested:
            lsum = float(np.logaddexp(log_d, _log_sub(log_b, log_a)))  # 2d + g
        else:
            lsum = float(np.logaddexp(log_d, np.logaddexp(log_a, log_b)))  # 2d - g
        log_x1 = log_gap + lsum - math.log(2) - log_a - log_b
        if log_x1 > 700:
            return arccosh_log(log_x1)
        x = math.exp(log_x1)
        return math.log1p(x + math.sqrt(x * (x + 2)))
    if nested:
        # a^2 + b^2 - d^2 = a^2 + (b - d)(b + d)
        if log_d == -math.inf:
            lbm = lbp = log_b
        else:
            lbm = _log_sub(log_b, log_d)
            lbp = float(np.logaddexp(log_b, log_d))
        if not lbm > log_a:
            raise DomainError("inner ball is not inside the outer ball")
        num = float(np.logaddexp(2 * log_a, lbm + lbp))
    else:
        num = _log_sub(2 * log_d, float(np.logaddexp(2 * log_a, 2 * log_b)))
    log_x = float(num) - math.log(2) - log_a - log_b
    if log_x < 0:
        raise DomainError("balls overlap")
    return arccosh_log(log_x)


def ring_modulus(a: float, b: float, d: float, nested: bool) -> float:
    if not (a > 0 and b > 0 and d >= 0):
        raise DomainError("radii must be positive and distance non-negative")
    if nested and not d + a < b:
        raise DomainError("inner ball is not inside the outer ball")
    if not nested and not d > a + b:
        raise DomainError("balls are not disjoint")
    ld = math.log(d) if d > 0 else -math.inf
    return ring_modulus_log(math.log(a), math.log(b), ld, nested)


def ring_capacity(n: int, mu: float) -> float:
    """``n``-capacity of a ring of modulus ``mu``: ``omega * mu^(1-n)``."""
    if not mu > 0:
        return math.inf
    return sphere_area(n) * mu ** (1 - n)


# ------------------------------------------------------ splitting bound

@dataclass
class SplitBound:
    lhs: float
    rhs: float
    holds: bool
    terms: tuple = ()


def _grid_or_exact(K, G, exp, w, h_rel, **kw) -> float:
    if isinstance(K, EmptySet):
        return 0.0
    return normalized_grid_capacity(Condenser(K, G, w), exp, h_rel, **kw).value


def annulus_split_bound(K: SetDescriptor, s: float, t: float, r: float, exp: Exponents,
                        w: Optional[Weight] = None, h_rel: float = 1 / 128,
                        tol_num: float = 0.02, **kw) -> SplitBound:
    """``cap(K, B_2r minus closed B_s) <= cap(K, B_2r) + cap(closed B_s, B_t)``.

    The first two capacities are computed on the grid, the last in closed form.
    """
    if not (0 < s < t < r):
        raise DomainError("need 0 < s < t < r")
    w = w or Weight.constant()
    n = exp.n
    o = (0.0,) * n
    G_cut = Intersection((Ball(o, 2 * r), Complement(ClosedBall(o, s))))
    lhs = _grid_or_exact(K, G_cut, exp, w, h_rel, **kw)
    first = _grid_or_exact(K, Ball(o, 2 * r), exp, w, h_rel, **kw)
    second = shell_capacity(s, t, n, exp.p, 0.0 if w.is_trivial else w.delta)
    rhs = first + second
    return SplitBound(lhs, rhs, lhs <= rhs * (1 + tol_num), (first, second))


# ----------------------------------------------------- integrability test

def corollary63_f(r: float, exp: Exponents) -> float:
    """``r^(n-1)`` when ``p = n`` and ``2^((n-p)/r)`` when ``p > n``."""
    if not (0 < r <= 1):
        raise DomainError("need 0 < r <= 1")
    exp.require_p_ge_n()
    if exp.p == exp.n:
        return r ** (exp.n - 1)
    return 2.0 ** ((exp.n - exp.p) / r)


def integrability_integral(exp: Exponents, r_min: float = 1e-8, nodes: int = 4001) -> tuple[float, float]:
    """``int_0^1 (f(r)/r^(p-n))^(1/(p-1)) dr/r`` as (quadrature, tail bound).

    Quadrature runs over ``[r_min, 1]`` in ``log r`` (Simpson); the piece on
    ``(0, r_min]`` is evaluated in closed form.
    """
    from scipy.integrate import simpson
    n, p = exp.n, exp.p
    s = np.linspace(math.log(r_min), 0.0, nodes)
    r = np.exp(s)
    if p == n:
        g = r  # (r^(n-1))^(1/(n-1))
        tail = r_min
    else:
        c = (p - n) / (p - 1)
        with np.errstate(over="ignore", under="ignore"):
            g = np.exp(-c * math.log(2) / r - c * np.log(r))
        # substitute u = 1/r: int_{1/r_min}^inf u^(c-1) 2^(-c u) du
        lam = c * math.log(2)
        tail = float(gammaincc(c, lam / r_min) * gamma_fn(c) / lam ** c)
    return float(simpson(g, x=s)), tail


# --------------------------------------------------------------- duality

@dataclass
class DualityResult:
    side_a: float
    side_b: float
    ratio: float
    estimates: tuple = ()


def duality_check(K, G, exp: Exponents, h_rel: float = 1 / 128, **kw) -> DualityResult:
    """Unweighted capacity of ``(K, G)`` against the weighted capacity of the inverted pair.

    ``K`` and ``G`` are balls not containing the origin in their closures.
    """
    wdual = Weight.for_exponents(exp)
    if isinstance(K, EmptySet):
        return DualityResult(0.0, 0.0, 1.0)
    TK, TG = invert_ball(K), invert_ball(G)
    a = normalized_grid_capacity(Condenser(K, G, Weight.constant()), exp, h_rel, **kw)
    b = normalized_grid_capacity(Condenser(TK, TG, wdual), exp, h_rel, **kw)
    ratio = b.value / a.value if a.value > 0 else math.nan
    return DualityResult(a.value, b.value, ratio, (a, b))


# ------------------------------------------------------------- Poincare

def poincare_constant_estimate(exp: Exponents, w: Weight, grid: Grid, tol: float = 1e-8,
                               max_iter: int = 200) -> float:
    """Best constant ``c`` in ``int |u|^p w <= c r^p int |grad u|^p w`` on a ball.

    The ball is the one inscribed in the (cubic) grid box.  For ``p = 2`` the
    smallest eigenvalue of the discrete generalised problem is computed
    directly; otherwise inverse power iteration for the p-Laplacian is run
    until the Rayleigh quotient settles.
    """
    lo, hi = np.asarray(grid.lo), np.asarray(grid.hi)
    centre = (lo + hi) / 2
    # recentre so the weight singularity sits at the ball centre
    grid = Grid(tuple(lo - centre), tuple(hi - centre), grid.h, grid.max_nodes)
    rad = float(np.min(hi - lo)) / 2
    X = grid.nodes()
    inside = np.linalg.norm(X, axis=-1) < rad
    fixed = ~inside
    p = exp.p
    wn = w(X)
    mass = wn * grid.h ** grid.n
    prob = EnergyProblem(grid, p, w, fixed, np.zeros(grid.shape))
    free = prob.free
    m_free = mass.ravel()[free]

    def quotient(u):
        den = float(np.sum(mass * np.abs(u) ** p))
        return prob.energy(u) / den

    if p == 2:
        H = prob.hessian(np.zeros(grid.shape)) / 2.0  # Hessian of E is 2*stiffness
        M = sp.diags(m_free)
        vals, vecs = spla.eigsh(H.tocsc(), k=1, M=M.tocsc(), sigma=0, which="LM")
        lam = float(vals[0])
    else:
        u = np.zeros(grid.shape)
        u.ravel()[free] = 1.0
        lam_prev = math.inf
        lam = quotient(u)
        for it in range(max_iter):
            f = np.zeros(grid.shape)
            f.ravel()[free] = (wn.ravel()[free] * np.abs(u.ravel()[free]) ** (p - 2)
                               * u.ravel()[free])
            sub = EnergyProblem(grid, p, w, fixed, np.zeros(grid.shape), source=f)
            v = sub.minimize(tol=1e-10, max_iter=100, u0=u).u
            v /= np.sum(mass * np.abs(v) ** p) ** (1 / p)
            u = v
            lam_prev, lam = lam, quotient(u)
            if abs(lam_prev - lam) <= tol * lam:
                break
        else:
            raise NotConverged(max_iter, abs(lam_prev - lam) / lam)
    return 1.0 / (lam * rad ** p)


# -------------------------------------------------------- cut-off lemma

def lemma73_constant(a: float, b: float, exp: Exponents, c_pw: float) -> float:
    """``2^p + 4^p c_pw / (b - a)^p``."""
    if not (0 < a < b <= 1):
        raise DomainError("need 0 < a < b <= 1")
    if not c_pw > 0:
        raise DomainError("Poincare constant must be positive")
    p = exp.p
    return 2.0 ** p + 4.0 ** p * c_pw / (b - a) ** p


def shell_cut_sandwich(E: SetDescriptor, r: float, a: float, b: float, exp: Exponents,
                     c_pw: float, w: Optional[Weight] = None, h_rel: float = 1 / 128,
                     slack: float = 0.02, **kw) -> dict:
    """Check ``cap(K, B_2r) <= cap(K, B_2r minus closed B_ar) <= c cap(K, B_2r)``.

    ``K = E`` restricted to the closed shell ``b r <= |x| <= r``.
    """
    w = w or Weight.constant()
    n = exp.n
    o = (0.0,) * n
    K = Intersection((E, Annulus(b * r, r, closed=True)))
    c = lemma73_constant(a, b, exp, c_pw)
    G_full = Ball(o, 2 * r)
    G_cut = Intersection((G_full, Complement(ClosedBall(o, a * r))))
    # both condensers on one grid so that the lower inequality is exact
    cond_full = Condenser(K, G_full, w)
    grid, _ = auto_grid(cond_full, n, h_rel)
    full = grid_capacity(cond_full, grid, exp, **kw).value
    cut = grid_capacity(Condenser(K, G_cut, w), grid, exp, **kw).value
    return {
        "constant": c,
        "cap_full": full,
        "cap_cut": cut,
        "lower_holds": full <= cut * (1 + slack),
        "upper_holds": cut <= c * full * (1 + slack),
    }


def power_sum_holds(values, c: float) -> bool:
    """``(sum a_j)^c <= sum a_j^c`` for non-negative ``a_j`` and ``0 < c <= 1``."""
    if not (0 < c <= 1):
        raise DomainError("need 0 < c <= 1")
    a = np.asarray(values, dtype=float)
    if np.any(a < 0):
        raise DomainError("values must be non-negative")
    lhs = float(np.sum(a)) ** c
    rhs = float(np.sum(a ** c))
    return lhs <= rhs * (1 + 1e-12)
