"""Exact capacities of origin-centred (radial) condensers.

For a radial condenser the minimiser depends on ``|x|`` only, and the problem
reduces to minimising ``int |u'(t)|^p t^m dt`` with ``m = n - 1 + delta``.
Writing ``beta = (p - n - delta)/(p - 1)`` the shell ``a < |x| < b`` has

    cap = omega * |beta|^{p-1} * |b^beta - a^beta|^{1-p}     (beta != 0)
    cap = omega * log(b/a)^{1-p}                              (beta == 0)

with the limits ``a -> 0`` and ``b -> inf`` taken where they exist.

Radial sets are recognised by reducing a descriptor tree to a finite union of
radius intervals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import (Annulus, Ball, ClosedBall, Complement, DomainError, EmptySet,
                       Exponents, Intersection, Inverted, Origin, Scaled, SetDescriptor,
                       Union, Weight, WholeSpace, sphere_area)

__all__ = [
    "radial_beta", "shell_capacity", "radial_capacity_exact", "radial_profile",
    "radial_capacity_1d_oracle", "Interval", "radial_intervals",
    "radial_condenser_capacity", "GeometryError", "shell_capacity_log",
    "invert_intervals",
]


class GeometryError(ValueError):
    """The compact set of a condenser is not contained in the open set."""


def radial_beta(n: int, p: float, delta: float = 0.0) -> float:
    return (p - n - delta) / (p - 1.0)


def _delta(w: Optional[Weight]) -> float:
    return 0.0 if w is None or w.is_trivial else w.delta


def shell_capacity(a: float, b: float, n: int, p: float, delta: float = 0.0) -> float:
    """Capacity of the shell ``a < |x| < b``; ``a = 0`` and ``b = inf`` allowed."""
    if not (0 <= a < b):
        raise DomainError(f"need 0 <= inner < outer, got {a}, {b}")
    om = sphere_area(n)
    beta = radial_beta(n, p, delta)
    if beta == 0.0:
        if a == 0 or math.isinf(b):
            return 0.0
        return om * math.log(b / a) ** (1.0 - p)
    if a == 0:
        if beta < 0:
            return 0.0
        if math.isinf(b):
            return 0.0
        return om * beta ** (p - 1) * b ** (beta * (1 - p))
    if math.isinf(b):
        if beta > 0:
            return 0.0
        return om * (-beta) ** (p - 1) * a ** (beta * (1 - p))
    # |b^beta - a^beta| = a^beta |(b/a)^beta - 1|, kept stable via expm1
    diff = abs(math.expm1(beta * math.log(b / a))) * a ** beta
    return om * abs(beta) ** (p - 1) * diff ** (1 - p)


def shell_capacity_log(log_a: float, log_b: float, n: int, p: float,
                       delta: float = 0.0) -> float:
    """:func:`shell_capacity` with the radii given by their logarithms.

    ``log_a = -inf`` and ``log_b = inf`` stand for ``a = 0`` and ``b = inf``.
    Radii such as ``2^(4^j)`` that overflow binary64 are handled exactly.
    """
    if not log_a < log_b:
        raise DomainError("need inner < outer")
    om = sphere_area(n)
    beta = radial_beta(n, p, delta)
    if beta == 0.0:
        if math.isinf(log_a) or math.isinf(log_b):
            return 0.0
        return om * (log_b - log_a) ** (1.0 - p)
    if math.isinf(log_a):
        if beta < 0 or math.isinf(log_b):
            return 0.0
        return om * math.exp((p - 1) * math.log(beta) + beta * (1 - p) * log_b)
    if math.isinf(log_b):
        if beta > 0:
            return 0.0
        return om * math.exp((p - 1) * math.log(-beta) + beta * (1 - p) * log_a)
    x = beta * (log_b - log_a)
    # log |b^beta - a^beta|
    if beta > 0:
        log_diff = beta * log_b + math.log(-math.expm1(-x))
    else:
        log_diff = beta * log_a + math.log(-math.expm1(x))
    e = (p - 1) * math.log(abs(beta)) + (1 - p) * log_diff
    return om * math.exp(min(e, 700.0))


def radial_capacity_exact(r: float, R: float, exp: Exponents, w: Optional[Weight] = None) -> float:
    """``cap(closed B_r, B_R)`` for the origin-centred condenser."""
    if not r > 0:
        raise DomainError("inner radius must be positive")
    if not r < R:
        raise DomainError(f"need r < R, got r={r}, R={R}")
    return shell_capacity(r, R, exp.n, exp.p, _delta(w))


def radial_profile(t, r: float, R: float, n: int, p: float, delta: float = 0.0) -> np.ndarray:
    """Extremal function of the shell condenser: 1 at ``|x| = r``, 0 at ``|x| = R``."""
    t = np.asarray(t, dtype=float)
    beta = radial_beta(n, p, delta)
    tc = np.clip(t, r, R)
    if beta == 0.0:
        return np.log(R / tc) / math.log(R / r)
    return (R ** beta - tc ** beta) / (R ** beta - r ** beta)


def radial_capacity_1d_oracle(r: float, R: float, n: int, p: float, delta: float = 0.0,
                              nodes: int = 10_000) -> float:
    """Minimum of the 1-D energy over piecewise-linear profiles.

    Nodes are log-spaced; each element carries the exact integral of ``t^m``.
    For fixed nodes the constrained minimum is available in closed form (the
    elements act like resistors in series), so no iteration is needed.
    """
    t = np.geomspace(r, R, nodes + 1)
    m = n - 1 + delta
    if m == -1:
        c = np.log(t[1:] / t[:-1])
    else:
        c = (t[1:] ** (m + 1) - t[:-1] ** (m + 1)) / (m + 1)
    h = np.diff(t)
    a = c / h ** p
    s = np.sum(a ** (-1.0 / (p - 1)))
    return sphere_area(n) * s ** (1 - p)


# ------------------------------------------------------- interval algebra

@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_closed: bool
    hi_closed: bool

    def empty(self) -> bool:
        if self.lo > self.hi:
            return True
        return self.lo == self.hi and not (self.lo_closed and self.hi_closed)


def _normalise(iv: list[Interval]) -> list[Interval]:
    iv = sorted((i for i in iv if not i.empty()), key=lambda i: (i.lo, not i.lo_closed))
    out: list[Interval] = []
    for i in iv:
        if out:
            last = out[-1]
            touches = i.lo < last.hi or (i.lo == last.hi and (i.lo_closed or last.hi_closed))
            if touches:
                if i.hi > last.hi or (i.hi == last.hi and i.hi_closed):
                    out[-1] = Interval(last.lo, i.hi, last.lo_closed, i.hi_closed)
                continue
        out.append(i)
    return out


def _complement(iv: list[Interval]) -> list[Interval]:
    out = []
    lo, lo_closed = 0.0, True
    for i in iv:
        out.append(Interval(lo, i.lo, lo_closed, not i.lo_closed))
        lo, lo_closed = i.hi, not i.hi_closed
    if not math.isinf(lo):
        out.append(Interval(lo, math.inf, lo_closed, False))
    return _normalise(out)


def _intersect(a: list[Interval], b: list[Interval]) -> list[Interval]:
    out = []
    for x in a:
        for y in b:
            if x.lo > y.lo or (x.lo == y.lo and not x.lo_closed):
                lo, lc = x.lo, x.lo_closed
            else:
                lo, lc = y.lo, y.lo_closed
            if x.hi < y.hi or (x.hi == y.hi and not x.hi_closed):
                hi, hc = x.hi, x.hi_closed
            else:
                hi, hc = y.hi, y.hi_closed
            out.append(Interval(lo, hi, lc, hc))
    return _normalise(out)


def _origin_centred(c) -> bool:
    return all(v == 0 for v in c)


def radial_intervals(S: SetDescriptor) -> Optional[list[Interval]]:
    """Radius intervals ``I`` with ``S = {x : |x| in I}``, or None if not radial."""
    if isinstance(S, Ball):
        return [Interval(0.0, S.radius, True, False)] if _origin_centred(S.center) else None
    if isinstance(S, ClosedBall):
        return [Interval(0.0, S.radius, True, True)] if _origin_centred(S.center) else None
    if isinstance(S, Annulus):
        return _normalise([Interval(S.inner, S.outer, S.closed, S.closed)])
    if isinstance(S, WholeSpace):
        return [Interval(0.0, math.inf, True, False)]
    if isinstance(S, EmptySet):
        return []
    if isinstance(S, Origin):
        return [Interval(0.0, 0.0, True, True)]
    if isinstance(S, Complement):
        c = radial_intervals(S.child)
        return None if c is None else _complement(c)
    if isinstance(S, Union):
        parts = [radial_intervals(c) for c in S.children]
        if any(p is None for p in parts):
            return None
        return _normalise([i for p in parts for i in p])
    if isinstance(S, Intersection):
        acc = [Interval(0.0, math.inf, True, False)]
        for c in S.children:
            p = radial_intervals(c)
            if p is None:
                return None
            acc = _intersect(acc, p)
        return acc
    if isinstance(S, Scaled):
        c = radial_intervals(S.child)
        if c is None:
            return None
        f = S.factor
        return [Interval(i.lo * f, i.hi * f, i.lo_closed, i.hi_closed) for i in c]
    if isinstance(S, Inverted):
        c = radial_intervals(S.child)
        return None if c is None else invert_intervals(c)
    return None


def invert_intervals(iv: list[Interval]) -> list[Interval]:
    """Radius intervals of the image under ``t -> 1/t``; radius 0 is dropped."""
    out = []
    for i in iv:
        lo = 0.0 if math.isinf(i.hi) else (math.inf if i.hi == 0 else 1.0 / i.hi)
        hi = math.inf if i.lo == 0 else 1.0 / i.lo
        # 0 is never in an inverted set; infinity is never a radius
        lo_closed = i.hi_closed and not math.isinf(i.hi)
        out.append(Interval(lo, hi, lo_closed and lo > 0, i.lo_closed and i.lo > 0))
    return _normalise(out)


def _inside(iv: list[Interval], lo: float, hi: float) -> Optional[Interval]:
    """Component of ``iv`` containing the closed range [lo, hi], if any."""
    for i in iv:
        lo_ok = i.lo < lo or (i.lo == lo and i.lo_closed)
        hi_ok = hi < i.hi or (hi == i.hi and i.hi_closed)
        if lo_ok and hi_ok:
            return i
    return None


def radial_condenser_capacity(K: SetDescriptor, G: SetDescriptor, n: int, p: float,
                              delta: float = 0.0) -> Optional[float]:
    """Exact capacity when both sets are radial; None otherwise.

    Within each component of ``G`` the minimiser equals 1 on the radial hull of
    the part of ``K`` it contains; the energy splits into an inner shell and an
    outer shell.
    """
    ki = radial_intervals(K)
    gi = radial_intervals(G)
    if ki is None or gi is None:
        return None
    if not ki:
        return 0.0
    for i in ki:
        if math.isinf(i.hi) or not (i.lo_closed and i.hi_closed):
            raise GeometryError("compact set is not closed and bounded")
    hulls: dict[Interval, list[float]] = {}
    for i in ki:
        comp = _inside(gi, i.lo, i.hi)
        if comp is None:
            raise GeometryError(f"compact part [{i.lo}, {i.hi}] is not inside the open set")
        h = hulls.setdefault(comp, [i.lo, i.hi])
        h[0], h[1] = min(h[0], i.lo), max(h[1], i.hi)
    total = 0.0
    for comp, (klo, khi) in hulls.items():
        if not (comp.lo == 0 and comp.lo_closed):
            total += shell_capacity(comp.lo, klo, n, p, delta) if klo > comp.lo else math.inf
        if khi < comp.hi:
            total += shell_capacity(khi, comp.hi, n, p, delta)
        else:
            total = math.inf
    return total
