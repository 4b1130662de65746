"""Capacities of the condensers sampled by the Wiener-type integrals.

The complement of a domain is split into *atoms*: origin-centred radial sets,
closed balls, ball sequences, closed half-spaces, and anything else (generic).
For a radial window ``a <= |x| <= b`` inside ``G = {g1 < |x| < g2}`` every
atom contributes a piece whose capacity is bounded in closed form:

* radial pieces are exact;
* ball pieces for ``p = n`` use the conformal two-ball ring capacities, and
  otherwise radial capacities around the ball centre;
* half-space pieces use an inscribed ball from below and the radial hull from
  above, or a cached grid solve when the window is a ball centred on the
  boundary hyperplane (the problem is then scale invariant).

Pieces combine by monotonicity (lower bound = largest piece) and
subadditivity (upper bound = sum of pieces, capped by the radial hull).  The
reported value is the lower bound for ``p = n`` (a conformal invariant, hence
unchanged under inversion) and the upper bound otherwise.

All radii are carried as logarithms, so windows such as ``[r, 2^r]`` for
``r = 10^6`` and balls of radius ``2^(-8^j)`` are handled without overflow.
Generic atoms fall back to the grid solver when the condenser is bounded and
of moderate aspect ratio.
"""
from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .capacity import CapacityEstimate, normalized_grid_capacity
from .estimates import ring_capacity, ring_modulus_log
from .expr import BinOp, ExpressionEvalError, Num
from .geometry import (PREFIX_CHECK, Ball, BallSequence, ClosedBall, Complement,
                       Condenser, Exponents, HalfSpace, Intersection, Inverted,
                       SequenceUnion, SetDescriptor, Union, ValidationError, Weight,
                       WholeSpace)
from .inversion import OriginInsideBall, invert_ball
from .radial import Interval, invert_intervals, radial_intervals, shell_capacity_log
from .solver import GridBudgetError, NotConverged

log = logging.getLogger(__name__)

__all__ = [
    "Unsupported", "RadialAtom", "BallAtom", "SeqAtom", "HalfSpaceAtom", "GenericAtom",
    "complement_atoms", "invert_atoms", "translate_atoms", "ShellWindow", "DualWindow",
    "window_capacity", "dual_capacity", "cone_ball_capacity",
]

LN2 = math.log(2.0)
MAX_CANDIDATES = 2000
MAX_TAIL_TERMS = 400
SEQ_SEARCH = 1 << 20


class Unsupported(RuntimeError):
    """No closed-form estimate applies and the grid fallback is not feasible."""


# ------------------------------------------------------------------ atoms

@dataclass(frozen=True)
class RadialAtom:
    intervals: tuple


@dataclass(frozen=True)
class BallAtom:
    center: tuple
    radius: float


@dataclass(frozen=True)
class SeqAtom:
    seq: BallSequence
    direction: Optional[tuple] = None


@dataclass(frozen=True)
class HalfSpaceAtom:
    """Closed half-space ``x . normal <= offset`` (unit normal)."""
    normal: tuple
    offset: float


@dataclass(frozen=True)
class GenericAtom:
    closed: Optional[SetDescriptor] = None


def _ray_direction(seq: BallSequence) -> Optional[tuple]:
    if not seq.on_ray():
        return None
    out = []
    for c in seq.center:
        if isinstance(c, Num) and c.value == 0:
            out.append(0.0)
        else:
            out.append(-1.0 if type(c).__name__ == "Neg" else 1.0)
    return tuple(out)


def closed_atoms(S: SetDescriptor) -> list:
    """Atoms whose union is the closed set ``S``."""
    iv = radial_intervals(S)
    if iv is not None:
        return [RadialAtom(tuple(iv))] if iv else []
    if isinstance(S, ClosedBall):
        return [BallAtom(S.center, S.radius)]
    if isinstance(S, SequenceUnion) and S.closed:
        return [SeqAtom(S.seq, _ray_direction(S.seq))]
    if isinstance(S, Union):
        return [a for c in S.children for a in closed_atoms(c)]
    if isinstance(S, Complement):
        return _open_complement_atoms(S.child)
    if isinstance(S, Inverted):
        return invert_atoms(closed_atoms(S.child))
    return [GenericAtom(S)]


def _open_complement_atoms(O: SetDescriptor) -> list:
    """Atoms of ``R^n minus O``."""
    if isinstance(O, HalfSpace):
        return [HalfSpaceAtom(O.normal, O.offset)]
    if isinstance(O, Intersection):
        return [a for c in O.children for a in _open_complement_atoms(c)]
    if isinstance(O, Complement):
        return closed_atoms(O.child)
    if isinstance(O, Inverted):
        # outside the image: the origin plus the image of the outside
        origin = RadialAtom((Interval(0.0, 0.0, True, True),))
        return [origin] + invert_atoms(_open_complement_atoms(O.child))
    if isinstance(O, WholeSpace):
        return []
    iv = radial_intervals(Complement(O))
    if iv is not None:
        return [RadialAtom(tuple(iv))] if iv else []
    return [GenericAtom(Complement(O))]


def complement_atoms(dom: SetDescriptor) -> list:
    return _open_complement_atoms(dom)


def _invert_seq(atom: SeqAtom):
    seq = atom.seq
    if atom.direction is None or not seq.radius_below_center():
        return GenericAtom(Inverted(SequenceUnion(seq)))
    k = next(i for i, d in enumerate(atom.direction) if d != 0)
    e = seq.center[k]
    if atom.direction[k] < 0:
        e = e.arg
    rho = seq.radius
    den = BinOp("-", BinOp("*", e, e), BinOp("*", rho, rho))
    ce = BinOp("/", e, den)
    if atom.direction[k] < 0:
        from .expr import Neg
        ce = Neg(ce)
    center = tuple(ce if i == k else Num(0.0) for i in range(seq.dim))
    new = BallSequence(center, BinOp("/", rho, den), seq.start)
    return SeqAtom(new, atom.direction)


def invert_atoms(atoms: list) -> list:
    out = []
    for a in atoms:
        if isinstance(a, RadialAtom):
            iv = invert_intervals(list(a.intervals))
            if iv:
                out.append(RadialAtom(tuple(iv)))
        elif isinstance(a, BallAtom):
            try:
                b = invert_ball(ClosedBall(a.center, a.radius))
                out.append(BallAtom(b.center, b.radius))
            except OriginInsideBall:
                out.append(GenericAtom(Inverted(ClosedBall(a.center, a.radius))))
        elif isinstance(a, SeqAtom):
            out.append(_invert_seq(a))
        elif isinstance(a, HalfSpaceAtom) and a.offset == 0:
            out.append(a)
        elif isinstance(a, HalfSpaceAtom) and a.offset < 0:
            # a closed ball whose boundary passes through the origin
            c = np.asarray(a.normal) / (2 * a.offset)
            out.append(BallAtom(tuple(float(v) for v in c), 1 / (2 * abs(a.offset))))
        elif isinstance(a, HalfSpaceAtom):
            out.append(GenericAtom(Inverted(Complement(HalfSpace(a.normal, a.offset)))))
        else:
            out.append(GenericAtom(None if a.closed is None else Inverted(a.closed)))
    return out


def translate_atoms(atoms: list, x0) -> list:
    """Atoms of ``S - x0``; non-ball atoms off the origin become generic."""
    x0 = np.asarray(x0, dtype=float)
    if not np.any(x0):
        return list(atoms)
    out = []
    for a in atoms:
        if isinstance(a, BallAtom):
            out.append(BallAtom(tuple(np.asarray(a.center) - x0), a.radius))
        elif isinstance(a, HalfSpaceAtom):
            out.append(HalfSpaceAtom(a.normal, a.offset - float(np.dot(a.normal, x0))))
        else:
            out.append(GenericAtom(None))
    return out


# ---------------------------------------------------------------- windows

@dataclass(frozen=True)
class ShellWindow:
    """``K = atoms ∩ {a <= |x| <= b}`` in ``G = {g1 < |x| < g2}``, radii as logs.

    ``log_a = -inf`` means a ball window; ``log_g1 = -inf`` means ``G``
    contains the origin; ``log_g2 = inf`` means ``G`` is unbounded.
    """
    log_a: float
    log_b: float
    log_g1: float
    log_g2: float

    def __post_init__(self):
        if not self.log_a <= self.log_b:
            raise ValidationError("window needs a <= b")
        if not (self.log_g1 < self.log_a or (self.log_g1 == -math.inf and self.log_a == -math.inf)):
            raise ValidationError("inner radius of G must lie below the window")
        if not self.log_b < self.log_g2:
            raise ValidationError("outer radius of G must lie above the window")


@dataclass(frozen=True)
class DualWindow:
    """``K = closed B_r`` and ``G = complement of (atoms minus B_2r)``."""
    log_r: float


@dataclass
class _Piece:
    lower: float
    upper: float
    kind: str
    hull: tuple  # (log inner, log outer) radii of the piece

    @property
    def exact(self) -> bool:
        return self.lower == self.upper


def _ladd(x: float, y: float) -> float:
    return float(np.logaddexp(x, y))


def _lsub(x: float, y: float) -> float:
    """``log(e^x - e^y)``; ``-inf`` when ``y >= x``."""
    if y == -math.inf:
        return x
    if y >= x:
        return -math.inf
    return x + math.log1p(-math.exp(y - x))


def _log(v: float) -> float:
    return math.log(v) if v > 0 else -math.inf


class _Ctx:
    def __init__(self, exp: Exponents, weight: Weight):
        self.exp = exp
        self.n = exp.n
        self.p = exp.p
        self.delta = 0.0 if weight.is_trivial else weight.delta
        self.ring = exp.p == exp.n and self.delta == 0.0
        self.notes: list[str] = []

    def shell(self, la: float, lb: float, weighted: bool = True) -> float:
        if la >= lb:
            return math.inf
        return shell_capacity_log(la, lb, self.n, self.p, self.delta if weighted else 0.0)


# ----------------------------------------------------- radial-window pieces

def _hull_upper(ctx: _Ctx, w: ShellWindow, lA: float, lE: float) -> float:
    """Exact capacity of the closed shell ``[A, E]`` in ``G``."""
    total = ctx.shell(w.log_g1, lA) if w.log_g1 > -math.inf else 0.0
    return total + ctx.shell(lE, w.log_g2)


def _mu_in(lr: float, lg1: float, lc: float, l_in: float) -> float:
    """Modulus between ``closed B(c, rho)`` and ``closed B_g1``; ``l_in = log(|c| - rho)``."""
    return ring_modulus_log(lr, lg1, lc, nested=False, log_gap=_lsub(l_in, lg1))


def _mu_out(lr: float, lg2: float, lc: float, l_out: float) -> float:
    """Modulus of ``closed B(c, rho)`` inside ``B_g2``; ``l_out = log(|c| + rho)``."""
    return ring_modulus_log(lr, lg2, lc, nested=True, log_gap=_lsub(lg2, l_out))


def _inscribed_lower(ctx: _Ctx, w: ShellWindow, lc: float, lr: float,
                     l_in: Optional[float] = None, l_out: Optional[float] = None) -> float:
    """Lower bound for a piece containing ``closed B(c, rho)`` with ``|c| > rho``.

    ``l_in``, ``l_out`` are the logs of ``|c| -+ rho`` when known more
    accurately than from ``lc`` and ``lr``.
    """
    l_in = _lsub(lc, lr) if l_in is None else l_in
    l_out = _ladd(lc, lr) if l_out is None else l_out
    if ctx.ring:
        mus = []
        if w.log_g1 > -math.inf:
            mus.append(_mu_in(lr, w.log_g1, lc, l_in))
        if w.log_g2 < math.inf:
            mus.append(_mu_out(lr, w.log_g2, lc, l_out))
        if not mus:
            return 0.0
        return ring_capacity(ctx.n, min(mus))
    if w.log_g2 == math.inf:
        return 0.0
    # G lies in B(c, |c| + g2); the weight is bounded below there
    lD = _ladd(lc, w.log_g2)
    if ctx.delta > 0:
        return 0.0
    wmin = math.exp(ctx.delta * _ladd(lD, lc)) if ctx.delta < 0 else 1.0
    return wmin * ctx.shell(lr, lD, weighted=False)


def _ball_upper(ctx: _Ctx, w: ShellWindow, lc: float, lr: float) -> float:
    """Upper bound for the whole ball ``closed B(c, rho)`` inside ``G``."""
    lds = []
    if w.log_g1 > -math.inf:
        lds.append(_lsub(lc, w.log_g1))
    if w.log_g2 < math.inf:
        lds.append(_lsub(w.log_g2, lc))
    if not lds:
        if ctx.delta != 0:
            return math.inf
        return 0.0
    ld = min(lds)
    if ld <= lr:
        return math.inf
    if ctx.delta > 0:
        wmax = math.exp(ctx.delta * _ladd(lc, ld))
    elif ctx.delta < 0:
        lmin = _lsub(lc, ld)
        wmax = math.inf if lmin == -math.inf else math.exp(ctx.delta * lmin)
    else:
        wmax = 1.0
    radial = wmax * ctx.shell(lr, ld, weighted=False)
    if ctx.ring:
        rings = 0.0
        if w.log_g1 > -math.inf:
            rings += ring_capacity(ctx.n, _mu_in(lr, w.log_g1, lc, _lsub(lc, lr)))
        if w.log_g2 < math.inf:
            rings += ring_capacity(ctx.n, _mu_out(lr, w.log_g2, lc, _ladd(lc, lr)))
        return min(rings, radial)
    return radial


def _ball_piece(ctx: _Ctx, w: ShellWindow, lc: float, lr: float) -> Optional[_Piece]:
    touches = abs(lr - lc) <= 1e-12
    if (lr > lc and not touches) or (touches and w.log_g1 == -math.inf):
        raise Unsupported("a ball of the complement contains the origin")
    l_in, l_out = _lsub(lc, lr), _ladd(lc, lr)
    if l_in > w.log_b or l_out < w.log_a:
        return None
    lA, lE = max(w.log_a, l_in), min(w.log_b, l_out)
    full = l_in >= w.log_a and l_out <= w.log_b
    hull_up = _hull_upper(ctx, w, lA, lE)
    inside_g = l_in > w.log_g1 and l_out < w.log_g2
    if full:
        lower = _inscribed_lower(ctx, w, lc, lr)
        upper = min(_ball_upper(ctx, w, lc, lr), hull_up)
    else:
        if lE > lA:
            lci, lri = _ladd(lA, lE) - LN2, _lsub(lE, lA) - LN2
            lower = _inscribed_lower(ctx, w, lci, lri, lA, lE)
        else:
            lower = 0.0
        upper = hull_up
        if inside_g:
            upper = min(upper, _ball_upper(ctx, w, lc, lr))
    upper = max(upper, lower)
    return _Piece(lower, upper, "ball" if full else "ball-part", (lA, lE))


def _radial_piece(ctx: _Ctx, w: ShellWindow, intervals) -> Optional[_Piece]:
    lo_k, hi_k = None, None
    for iv in intervals:
        l1 = _log(iv.lo) if iv.lo > 0 else -math.inf
        l2 = math.inf if math.isinf(iv.hi) else _log(iv.hi)
        lo, hi = max(l1, w.log_a), min(l2, w.log_b)
        if lo > hi:
            continue
        if lo == hi and not ((lo > l1 or iv.lo_closed) and (hi < l2 or iv.hi_closed)):
            continue
        lo_k = lo if lo_k is None else min(lo_k, lo)
        hi_k = hi if hi_k is None else max(hi_k, hi)
    if lo_k is None:
        return None
    if lo_k == -math.inf and w.log_g1 > -math.inf:
        raise ValidationError("compact set meets the excluded inner ball")
    val = _hull_upper(ctx, w, lo_k, hi_k)
    return _Piece(val, val, "radial", (lo_k, hi_k))


@functools.lru_cache(maxsize=64)
def cone_ball_capacity(n: int, p: float, delta: float, ratio: float, h_rel: float) -> float:
    """Grid capacity of ``{x_1 <= 0} ∩ closed B_1`` in ``B_ratio``.

    By rotation invariance of radial weights this covers every closed
    half-space through the origin.
    """
    e1 = tuple([1.0] + [0.0] * (n - 1))
    K = Intersection((Complement(HalfSpace(e1, 0.0)), ClosedBall((0.0,) * n, 1.0)))
    G = Ball((0.0,) * n, ratio)
    w = Weight.constant() if delta == 0 else Weight.power(delta)
    return normalized_grid_capacity(Condenser(K, G, w), Exponents(n, p), h_rel).value


def _cone_h(n: int) -> float:
    return 1 / 128 if n == 2 else 1 / 24


def _halfspace_piece(ctx: _Ctx, w: ShellWindow, atom: HalfSpaceAtom) -> Optional[_Piece]:
    o = atom.offset
    l_near = _log(-o) if o < 0 else -math.inf
    if l_near > w.log_b:
        return None
    lA = max(w.log_a, l_near)
    hull = (lA, w.log_b)
    upper = _hull_upper(ctx, w, lA, w.log_b)
    if o == 0 and w.log_a == -math.inf and w.log_g1 == -math.inf and w.log_g2 < math.inf:
        ratio = math.exp(w.log_g2 - w.log_b)
        phi = cone_ball_capacity(ctx.n, ctx.p, ctx.delta, round(ratio, 12), _cone_h(ctx.n))
        val = phi * math.exp((ctx.n + ctx.delta - ctx.p) * w.log_b)
        return _Piece(val, val, "cone-grid", hull)
    cands = []
    if o > 0 and w.log_a == -math.inf:
        # the piece contains a ball around the origin
        lr0 = min(math.log(o), w.log_b)
        lower = ctx.shell(lr0, w.log_g2) if w.log_g1 == -math.inf else 0.0
        return _Piece(lower, max(upper, lower), "halfspace", hull)
    if w.log_b > lA:
        # ball on the inward ray spanning the radial extent of the piece
        lt, ls = _ladd(lA, w.log_b) - LN2, _lsub(w.log_b, lA) - LN2
        if lt < 700 and math.exp(ls) > math.exp(lt) + o:
            t, s = math.exp(lt), math.exp(lt) + o
            if s > 0:
                cands.append((lt, math.log(s), None, None))
        else:
            cands.append((lt, ls, lA, w.log_b))
    if w.log_a > -math.inf and w.log_b - w.log_a >= math.log(1.75) and w.log_a < 700:
        a = math.exp(w.log_a)
        t, s = 1.5 * a, min(a / 4, 1.5 * a + o)
        if s > 0 and t - s >= max(a, -o if o < 0 else 0):
            cands.append((math.log(t), math.log(s), None, None))
    lower = max([_inscribed_lower(ctx, w, *c) for c in cands], default=0.0)
    return _Piece(lower, max(upper, lower), "halfspace", hull)


# ---------------------------------------------------- sequence enumeration

def _seq_logs(seq: BallSequence, j: int) -> tuple[float, float]:
    return seq.log_center_norm(j), seq.log_radius(j)


def _seq_monotone(seq: BallSequence) -> tuple[int, float]:
    """Direction of the centre norms (+1/-1) and max radius/centre ratio on a prefix."""
    vals, kappa = [], 0.0
    for j in range(seq.start, seq.start + PREFIX_CHECK):
        try:
            lc, lr = _seq_logs(seq, j)
        except (ExpressionEvalError, OverflowError):
            break
        vals.append(lc)
        kappa = max(kappa, math.exp(min(lr - lc, 0.0)))
    if len(vals) < 2:
        raise Unsupported("ball sequence cannot be evaluated")
    diffs = np.diff(vals)
    if np.all(diffs > 0):
        return 1, kappa
    if np.all(diffs < 0):
        return -1, kappa
    raise Unsupported("ball sequence centres are not monotone")


def _seq_first_at_least(seq: BallSequence, sign: int, target: float) -> int:
    """Smallest index whose log centre norm is ``>= target`` (sign +1) or ``<= target`` (-1)."""

    def key(j: int) -> float:
        try:
            return sign * seq.log_center_norm(j)
        except (ExpressionEvalError, OverflowError):
            return math.inf

    lo, hi = seq.start, seq.start + SEQ_SEARCH
    if key(lo) >= sign * target:
        return lo
    if key(hi) < sign * target:
        return hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if key(mid) >= sign * target:
            hi = mid
        else:
            lo = mid
    return hi


def _seq_candidates(seq: BallSequence, l_lo: float, l_hi: float) -> Iterator[int]:
    """Indices whose balls can meet ``{lo <= |x| <= hi}``, ordered outward from the window.

    The iterator is infinite when the window is unbounded in the direction
    the centres move.
    """
    sign, kappa = _seq_monotone(seq)
    if kappa >= 1:
        raise Unsupported("sequence balls contain the origin")
    lo = l_lo - math.log1p(kappa)
    hi = l_hi - math.log1p(-kappa) if l_hi < math.inf else math.inf
    if sign > 0:
        j0 = _seq_first_at_least(seq, 1, lo) if lo > -math.inf else seq.start
        j = j0
        while True:
            try:
                lc = seq.log_center_norm(j)
            except (ExpressionEvalError, OverflowError):
                return
            if lc > hi:
                return
            yield j
            j += 1
    else:
        j0 = _seq_first_at_least(seq, -1, hi) if hi < math.inf else seq.start
        j = j0
        while True:
            try:
                lc = seq.log_center_norm(j)
            except (ExpressionEvalError, OverflowError):
                return
            if lc < lo:
                return
            yield j
            j += 1


# ------------------------------------------------------------ combination

def _combine(ctx: _Ctx, w: ShellWindow, pieces: list[_Piece], method: str) -> CapacityEstimate:
    if not pieces:
        return CapacityEstimate(0.0, None, 0, True, None, (0.0, 0.0), method, 0, ctx.notes)
    lower = max(pc.lower for pc in pieces)
    lA = min(pc.hull[0] for pc in pieces)
    lE = max(pc.hull[1] for pc in pieces)
    upper = min(sum(pc.upper for pc in pieces), _hull_upper(ctx, w, lA, lE))
    upper = max(upper, lower)
    if len(pieces) == 1 and pieces[0].kind == "cone-grid":
        value = pieces[0].lower
        method = "cone-grid"
    elif ctx.ring and lower > 0:
        value = lower
    else:
        value = upper
    if all(pc.exact for pc in pieces) and len(pieces) == 1:
        method = "exact"
    return CapacityEstimate(value, None, 0, True, None, (lower, upper), method, 0, ctx.notes)


def window_capacity(atoms: list, w: ShellWindow, exp: Exponents,
                    weight: Optional[Weight] = None) -> CapacityEstimate:
    """Capacity estimate of ``(union of atoms ∩ window, G)``.

    Raises :class:`Unsupported` when a generic atom is present.
    """
    ctx = _Ctx(exp, weight or Weight.constant())
    pieces: list[_Piece] = []
    for atom in atoms:
        if isinstance(atom, RadialAtom):
            pc = _radial_piece(ctx, w, atom.intervals)
            if pc is not None:
                pieces.append(pc)
        elif isinstance(atom, BallAtom):
            c = np.asarray(atom.center)
            lc = _log(float(np.linalg.norm(c)))
            lr = _log(atom.radius)
            if atom.radius == 0:
                if lc == -math.inf:
                    pieces.append(_radial_piece(ctx, w, (Interval(0, 0, True, True),)) or
                                  _Piece(0.0, 0.0, "point", (-math.inf, -math.inf)))
                elif w.log_a <= lc <= w.log_b:
                    val = ctx.shell(-math.inf, min(_lsub(lc, w.log_g1) if w.log_g1 > -math.inf
                                                   else math.inf, _lsub(w.log_g2, lc)),
                                    weighted=False) if ctx.delta == 0 else 0.0
                    pieces.append(_Piece(val, val, "point", (lc, lc)))
                continue
            pc = _ball_piece(ctx, w, lc, lr)
            if pc is not None:
                pieces.append(pc)
        elif isinstance(atom, SeqAtom):
            count = 0
            for j in _seq_candidates(atom.seq, w.log_a, w.log_b):
                count += 1
                if count > MAX_CANDIDATES:
                    # the remaining balls only enter through the radial hull
                    ctx.notes.append(f"sequence balls beyond index {j - 1} bounded by the hull")
                    pieces.append(_Piece(0.0, math.inf, "truncated", (w.log_a, w.log_b)))
                    break
                lc, lr = _seq_logs(atom.seq, j)
                pc = _ball_piece(ctx, w, lc, lr)
                if pc is not None:
                    pieces.append(pc)
                elif pieces and count > 8 and w.log_a == -math.inf:
                    break
                # balls accumulating at the origin: stop once negligible
                if (w.log_a == -math.inf and pc is not None and len(pieces) > 1
                        and pc.upper < 1e-16 * max(x.upper for x in pieces)):
                    ctx.notes.append(f"sequence truncated at index {j}")
                    break
        elif isinstance(atom, HalfSpaceAtom):
            pc = _halfspace_piece(ctx, w, atom)
            if pc is not None:
                pieces.append(pc)
        else:
            raise Unsupported("complement has a part without a closed-form estimate")
    return _combine(ctx, w, pieces, "bounds")


# -------------------------------------------------------------- dual window

def dual_capacity(atoms: list, w: DualWindow, exp: Exponents) -> CapacityEstimate:
    """``cap(closed B_r, R^n minus (complement minus B_2r))``, unweighted."""
    ctx = _Ctx(exp, Weight.constant())
    lr0 = w.log_r
    l2r = lr0 + LN2
    lowers: list[float] = []
    uppers: list[float] = []
    l_near = math.inf  # log distance from the origin to the removed set

    def ring_lower(lc: float, ls: float, l_in: Optional[float] = None) -> float:
        if not ctx.ring:
            return 0.0
        l_in = _lsub(lc, ls) if l_in is None else l_in
        return ring_capacity(ctx.n, ring_modulus_log(lr0, ls, lc, nested=False,
                                                     log_gap=_lsub(l_in, lr0)))

    def add_ball(lc: float, lr: float):
        nonlocal l_near
        if lr >= lc:
            raise Unsupported("a ball of the complement contains the origin")
        l_in, l_out = _lsub(lc, lr), _ladd(lc, lr)
        if l_out < l2r:
            return None
        if l_in >= l2r:
            l_near = min(l_near, l_in)
            val = ring_lower(lc, lr, l_in)
            lowers.append(val)
            uppers.append(val if ctx.ring else ctx.shell(lr0, l_in))
            return val
        l_near = min(l_near, l2r)
        lci, lri = _ladd(l2r, l_out) - LN2, _lsub(l_out, l2r) - LN2
        lowers.append(ring_lower(lci, lri, l2r) if l_out > l2r else 0.0)
        uppers.append(ctx.shell(lr0, l2r))
        return lowers[-1]

    for atom in atoms:
        if isinstance(atom, RadialAtom):
            starts = []
            for iv in atom.intervals:
                hi = math.inf if math.isinf(iv.hi) else _log(iv.hi)
                if hi < l2r:
                    continue
                starts.append(max(_log(iv.lo) if iv.lo > 0 else -math.inf, l2r))
            if starts:
                s = min(starts)
                l_near = min(l_near, s)
                val = ctx.shell(lr0, s)
                lowers.append(val)
                uppers.append(val)
        elif isinstance(atom, BallAtom):
            if atom.radius == 0:
                continue  # points are removable for p = n; for p > n see below
            add_ball(_log(float(np.linalg.norm(atom.center))), _log(atom.radius))
        elif isinstance(atom, SeqAtom):
            total = 0.0
            count = 0
            for j in _seq_candidates(atom.seq, l2r, math.inf):
                count += 1
                lc, lr = _seq_logs(atom.seq, j)
                val = add_ball(lc, lr)
                if val is not None:
                    total += val
                    if ctx.ring and val < 1e-16 * total and count > 4:
                        ctx.notes.append(f"tail of the ball sequence dropped after index {j}")
                        break
                    if not ctx.ring and count > 4:
                        uppers.append(math.inf)  # the nearest-ball shell bound remains
                        break
                if count > MAX_TAIL_TERMS:
                    ctx.notes.append("ball-sequence sum truncated")
                    break
        elif isinstance(atom, HalfSpaceAtom):
            o = atom.offset
            dist = max(l2r, _log(-o) if o < 0 else -math.inf)
            l_near = min(l_near, dist)
            if lr0 < 700:
                r = math.exp(lr0)
                s = r / 2
                t = max(3 * r, s - o)
                lowers.append(ring_lower(math.log(t), math.log(s)))
            else:
                lowers.append(ring_lower(lr0 + math.log(3), lr0 - LN2))
            uppers.append(ctx.shell(lr0, dist))
        else:
            raise Unsupported("complement has a part without a closed-form estimate")
    if l_near == math.inf:
        return CapacityEstimate(0.0, None, 0, True, None, (0.0, 0.0), "exact", 0, ctx.notes)
    lower = max(lowers, default=0.0)
    upper = min(sum(uppers), ctx.shell(lr0, l_near))
    upper = max(upper, lower)
    if lower == upper:
        value, method = lower, "exact"
    elif ctx.ring and lower > 0:
        value, method = lower, "bounds"
    else:
        value, method = upper, "bounds"
    return CapacityEstimate(value, None, 0, True, None, (lower, upper), method, 0, ctx.notes)


# --------------------------------------------------------------- fallback

def grid_fallback(K: SetDescriptor, G: SetDescriptor, exp: Exponents, weight: Weight,
                  ratio: float, h_rel: float) -> CapacityEstimate:
    """Grid solve for bounded condensers of moderate aspect ratio."""
    if not (math.isfinite(ratio) and ratio <= 256):
        raise Unsupported(f"condenser aspect ratio {ratio:.3g} is beyond the grid fallback")
    try:
        est = normalized_grid_capacity(Condenser(K, G, weight), exp, h_rel)
    except (GridBudgetError, NotConverged, ValidationError) as exc:
        raise Unsupported(f"grid fallback failed: {exc}") from exc
    est.method = "grid"
    return est
