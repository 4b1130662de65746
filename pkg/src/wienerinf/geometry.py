"""Exponents, weights and a small symbolic geometry for condenser sets.

Sets are immutable trees of :class:`SetDescriptor` nodes.  Every node answers
vectorised membership queries (``contains``) and takes part in a tri-valued
symbolic analysis (bounded / complement bounded / behaviour near the origin)
that decides whether the boundary of a set is unbounded without sampling.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import gamma

from .expr import Expr, Neg, Num, ExpressionEvalError, eval_log, evaluate, limit

log = logging.getLogger(__name__)

__all__ = [
    "Exponents", "Weight", "DomainError", "ValidationError",
    "SetDescriptor", "Ball", "ClosedBall", "Annulus", "HalfSpace", "Complement",
    "Union", "Intersection", "BallSequence", "SequenceUnion", "WholeSpace",
    "Origin", "EmptySet", "Scaled", "Inverted", "BoundaryStatus",
    "membership", "contains", "boundary_unbounded", "weight_ball_mass",
    "sphere_area", "ball_volume", "bounding_box", "scale_set", "Condenser",
    "is_bounded", "is_cobounded",
]

DEFAULT_TRUNC = 64
PREFIX_CHECK = 64


class DomainError(ValueError):
    """A numeric argument lies outside the domain of a formula."""


class ValidationError(ValueError):
    """A configuration or precondition check failed."""


# ------------------------------------------------------------- exponents

@dataclass(frozen=True)
class Exponents:
    n: int
    p: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValidationError(f"dimension n must be an integer >= 2, got {self.n}")
        if not self.p > 1:
            raise ValidationError(f"exponent p must exceed 1, got {self.p}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "p", float(self.p))

    @property
    def delta(self) -> float:
        """Exponent of the weight produced by circular inversion."""
        return 2.0 * (self.p - self.n)

    def require_p_ge_n(self) -> None:
        if self.p < self.n:
            raise ValidationError(f"requires p >= n (got p={self.p}, n={self.n})")


def sphere_area(n: int) -> float:
    """Surface area of the unit sphere in R^n."""
    return 2.0 * math.pi ** (n / 2) / gamma(n / 2)


def ball_volume(n: int, r: float = 1.0) -> float:
    return math.pi ** (n / 2) / gamma(n / 2 + 1) * r ** n


@dataclass(frozen=True)
class Weight:
    kind: str = "constant"  # "constant" or "power"
    delta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "power"):
            raise ValidationError(f"unknown weight kind {self.kind!r}")
        if self.kind == "constant":
            object.__setattr__(self, "delta", 0.0)

    @classmethod
    def constant(cls) -> "Weight":
        return cls("constant", 0.0)

    @classmethod
    def power(cls, delta: float) -> "Weight":
        return cls("power", float(delta))

    @classmethod
    def for_exponents(cls, exp: Exponents) -> "Weight":
        return cls.power(exp.delta)

    @property
    def is_trivial(self) -> bool:
        return self.kind == "constant" or self.delta == 0.0

    @property
    def singular_at_origin(self) -> bool:
        return self.kind == "power" and self.delta < 0

    def __call__(self, x) -> np.ndarray:
        """Evaluate at points ``x`` of shape (..., n).

        At the origin the power weight is 0 for positive exponents; for negative
        exponents the value is ``inf`` (see :attr:`singular_at_origin`).
        """
        x = np.asarray(x, dtype=float)
        if self.is_trivial:
            return np.ones(x.shape[:-1])
        r2 = np.sum(x * x, axis=-1)
        with np.errstate(divide="ignore"):
            out = np.power(r2, self.delta / 2.0)
        if self.delta > 0:
            out = np.where(r2 == 0, 0.0, out)
        return out


def weight_ball_mass(w: Weight, r: float, n: int) -> float:
    """Weighted measure of the origin-centred ball of radius ``r``."""
    if not r > 0:
        raise DomainError("radius must be positive")
    if w.is_trivial:
        return ball_volume(n, r)
    if n + w.delta <= 0:
        raise DomainError(f"weight |x|^{w.delta} is not integrable at the origin in R^{n}")
    return sphere_area(n) * r ** (n + w.delta) / (n + w.delta)


# ------------------------------------------------------------ set nodes

Point = tuple


def _pt(c) -> tuple:
    return tuple(float(v) for v in c)


class BoundaryStatus(enum.Enum):
    UNBOUNDED = "unbounded"
    BOUNDED = "bounded"
    UNKNOWN = "unknown"


class SetDescriptor:
    """Base class for set nodes.  Subclasses are frozen dataclasses."""

    def _contains(self, X: np.ndarray, trunc: int) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    # tri-valued facts: True, False or None (unknown)
    def _bounded(self) -> Optional[bool]:
        return None

    def _cobounded(self) -> Optional[bool]:
        return None

    def _avoids0(self) -> Optional[bool]:
        """Misses some punctured neighbourhood of the origin."""
        return None

    def _contains0(self) -> Optional[bool]:
        """Contains some punctured neighbourhood of the origin."""
        return None

    def _box(self) -> Optional[tuple[np.ndarray, np.ndarray]]:
        return None

    def _gap0(self) -> Optional[float]:
        """Radius of a punctured ball around 0 that this set misses."""
        return None

    def _fill0(self) -> Optional[float]:
        """Radius of a punctured ball around 0 contained in this set."""
        return None

    def _is_cone(self) -> bool:
        return False


@dataclass(frozen=True)
class Ball(SetDescriptor):
    """Open ball."""
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _pt(self.center))
        if not self.radius > 0:
            raise ValidationError("ball radius must be positive")

    def _contains(self, X, trunc):
        return np.linalg.norm(X - np.asarray(self.center), axis=-1) < self.radius

    def _bounded(self):
        return True

    def _cobounded(self):
        return False

    def _avoids0(self):
        return math.hypot(*self.center) >= self.radius

    def _contains0(self):
        return math.hypot(*self.center) < self.radius

    def _box(self):
        c = np.asarray(self.center)
        return c - self.radius, c + self.radius

    def _gap0(self):
        g = math.hypot(*self.center) - self.radius
        return g if g > 0 else None

    def _fill0(self):
        f = self.radius - math.hypot(*self.center)
        return f if f > 0 else None


@dataclass(frozen=True)
class ClosedBall(SetDescriptor):
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _pt(self.center))
        if not self.radius >= 0:
            raise ValidationError("closed-ball radius must be non-negative")

    def _contains(self, X, trunc):
        return np.linalg.norm(X - np.asarray(self.center), axis=-1) <= self.radius

    def _bounded(self):
        return True

    def _cobounded(self):
        return False

    def _avoids0(self):
        return math.hypot(*self.center) > self.radius or self.radius == 0

    def _contains0(self):
        return math.hypot(*self.center) < self.radius

    def _box(self):
        c = np.asarray(self.center)
        return c - self.radius, c + self.radius

    def _gap0(self):
        g = math.hypot(*self.center) - self.radius
        return g if g > 0 else None

    def _fill0(self):
        f = self.radius - math.hypot(*self.center)
        return f if f > 0 else None


@dataclass(frozen=True)
class Annulus(SetDescriptor):
    """Origin-centred shell: ``inner < |x| < outer`` or, if closed, ``<=``."""
    inner: float
    outer: float
    closed: bool = False

    def __post_init__(self):
        if not (0 <= self.inner <= self.outer):
            raise ValidationError("annulus needs 0 <= inner <= outer")

    def _contains(self, X, trunc):
        r = np.linalg.norm(X, axis=-1)
        if self.closed:
            return (r >= self.inner) & (r <= self.outer)
        return (r > self.inner) & (r < self.outer)

    def _bounded(self):
        return True

    def _cobounded(self):
        return False

    def _avoids0(self):
        return self.inner > 0 or self.outer == 0

    def _contains0(self):
        return self.inner == 0 and self.outer > 0

    def _box(self):
        return None  # dimension unknown; see bounding_box

    def _gap0(self):
        return self.inner if self.inner > 0 else None

    def _fill0(self):
        return self.outer if self.inner == 0 and self.outer > 0 else None


@dataclass(frozen=True)
class HalfSpace(SetDescriptor):
    """Open half-space ``x . normal > offset``."""
    normal: tuple
    offset: float = 0.0

    def __post_init__(self):
        nv = np.asarray(_pt(self.normal))
        nrm = float(np.linalg.norm(nv))
        if nrm == 0:
            raise ValidationError("half-space normal must be non-zero")
        if abs(nrm - 1.0) <= 4e-16 * len(nv):
            nrm = 1.0  # already unit length; keep normalisation idempotent
        object.__setattr__(self, "normal", _pt(nv / nrm))
        object.__setattr__(self, "offset", float(self.offset) / nrm)

    def _contains(self, X, trunc):
        return X @ np.asarray(self.normal) > self.offset

    def _bounded(self):
        return False

    def _cobounded(self):
        return False

    def _avoids0(self):
        return self.offset > 0

    def _contains0(self):
        return self.offset < 0

    def _gap0(self):
        return self.offset if self.offset > 0 else None

    def _fill0(self):
        return -self.offset if self.offset < 0 else None

    def _is_cone(self):
        return self.offset == 0


@dataclass(frozen=True)
class WholeSpace(SetDescriptor):
    def _contains(self, X, trunc):
        return np.ones(X.shape[:-1], dtype=bool)

    def _bounded(self):
        return False

    def _cobounded(self):
        return True

    def _avoids0(self):
        return False

    def _contains0(self):
        return True

    def _fill0(self):
        return math.inf

    def _is_cone(self):
        return True


@dataclass(frozen=True)
class EmptySet(SetDescriptor):
    def _contains(self, X, trunc):
        return np.zeros(X.shape[:-1], dtype=bool)

    def _bounded(self):
        return True

    def _cobounded(self):
        return False

    def _avoids0(self):
        return True

    def _contains0(self):
        return False

    def _gap0(self):
        return math.inf

    def _is_cone(self):
        return True


@dataclass(frozen=True)
class Origin(SetDescriptor):
    """The single point {0}."""

    def _contains(self, X, trunc):
        return np.all(X == 0, axis=-1)

    def _bounded(self):
        return True

    def _cobounded(self):
        return False

    def _avoids0(self):
        return True

    def _contains0(self):
        return False

    def _gap0(self):
        return math.inf

    def _is_cone(self):
        return True


@dataclass(frozen=True)
class Complement(SetDescriptor):
    child: SetDescriptor

    def _contains(self, X, trunc):
        return ~self.child._contains(X, trunc)

    def _bounded(self):
        return self.child._cobounded()

    def _cobounded(self):
        return self.child._bounded()

    def _avoids0(self):
        return self.child._contains0()

    def _contains0(self):
        return self.child._avoids0()

    def _gap0(self):
        return self.child._fill0()

    def _fill0(self):
        return self.child._gap0()

    def _is_cone(self):
        return self.child._is_cone()


def _all(vals) -> Optional[bool]:
    vals = list(vals)
    if all(v is True for v in vals):
        return True
    if any(v is False for v in vals):
        return False
    return None


def _any(vals) -> Optional[bool]:
    vals = list(vals)
    if any(v is True for v in vals):
        return True
    if all(v is False for v in vals):
        return False
    return None


@dataclass(frozen=True)
class Union(SetDescriptor):
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))

    def _contains(self, X, trunc):
        out = np.zeros(X.shape[:-1], dtype=bool)
        for c in self.children:
            out |= c._contains(X, trunc)
        return out

    def _bounded(self):
        return _all(c._bounded() for c in self.children)

    def _cobounded(self):
        if any(c._cobounded() is True for c in self.children):
            return True
        # complement = (complement of one child) minus bounded sets
        rest = [c for c in self.children if c._bounded() is not True]
        if len(rest) == 0:
            return False
        if len(rest) == 1 and rest[0]._cobounded() is False:
            return False
        return None

    def _avoids0(self):
        return _all(c._avoids0() for c in self.children)

    def _contains0(self):
        if any(c._contains0() is True for c in self.children):
            return True
        rest = [c for c in self.children if c._avoids0() is not True]
        if len(rest) == 0:
            return False
        if len(rest) == 1 and rest[0]._contains0() is False:
            return False
        return None

    def _box(self):
        boxes = [c._box() for c in self.children]
        if any(b is None for b in boxes) or not boxes:
            return None
        return (np.min([b[0] for b in boxes], axis=0), np.max([b[1] for b in boxes], axis=0))

    def _gap0(self):
        gaps = [c._gap0() for c in self.children]
        return None if any(g is None for g in gaps) else min(gaps)

    def _fill0(self):
        fills = [f for f in (c._fill0() for c in self.children) if f is not None]
        return max(fills) if fills else None

    def _is_cone(self):
        return all(c._is_cone() for c in self.children)


@dataclass(frozen=True)
class Intersection(SetDescriptor):
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))

    def _dual(self) -> Complement:
        return Complement(Union(tuple(Complement(c) for c in self.children)))

    def _contains(self, X, trunc):
        out = np.ones(X.shape[:-1], dtype=bool)
        for c in self.children:
            out &= c._contains(X, trunc)
        return out

    def _bounded(self):
        return self._dual()._bounded()

    def _cobounded(self):
        return self._dual()._cobounded()

    def _avoids0(self):
        return self._dual()._avoids0()

    def _contains0(self):
        return self._dual()._contains0()

    def _box(self):
        boxes = [b for b in (c._box() for c in self.children) if b is not None]
        if not boxes:
            return None
        lo = np.max([b[0] for b in boxes], axis=0)
        hi = np.min([b[1] for b in boxes], axis=0)
        return lo, np.maximum(hi, lo)

    def _gap0(self):
        gaps = [g for g in (c._gap0() for c in self.children) if g is not None]
        return max(gaps) if gaps else None

    def _fill0(self):
        fills = [c._fill0() for c in self.children]
        return None if any(f is None for f in fills) else min(fills)

    def _is_cone(self):
        return all(c._is_cone() for c in self.children)


@dataclass(frozen=True)
class Scaled(SetDescriptor):
    """``factor * child``."""
    child: SetDescriptor
    factor: float

    def __post_init__(self):
        if not self.factor > 0:
            raise ValidationError("scale factor must be positive")

    def _contains(self, X, trunc):
        return self.child._contains(X / self.factor, trunc)

    def _bounded(self):
        return self.child._bounded()

    def _cobounded(self):
        return self.child._cobounded()

    def _avoids0(self):
        return self.child._avoids0()

    def _contains0(self):
        return self.child._contains0()

    def _box(self):
        b = self.child._box()
        return None if b is None else (b[0] * self.factor, b[1] * self.factor)

    def _gap0(self):
        g = self.child._gap0()
        return None if g is None else g * self.factor

    def _fill0(self):
        f = self.child._fill0()
        return None if f is None else f * self.factor

    def _is_cone(self):
        return self.child._is_cone()


@dataclass(frozen=True)
class Inverted(SetDescriptor):
    """Image ``{xi != 0 : xi/|xi|^2 in child}`` under circular inversion."""
    child: SetDescriptor

    def _contains(self, X, trunc):
        r2 = np.sum(X * X, axis=-1)
        nz = r2 > 0
        out = np.zeros(X.shape[:-1], dtype=bool)
        if np.any(nz):
            Y = X[nz] / r2[nz][:, None]
            out[nz] = self.child._contains(Y, trunc)
        return out

    def _bounded(self):
        return self.child._avoids0()

    def _cobounded(self):
        return self.child._contains0()

    def _avoids0(self):
        return self.child._bounded()

    def _contains0(self):
        return self.child._cobounded()

    def _gap0(self):
        return None

    def _fill0(self):
        return None

    def _box(self):
        g = self.child._gap0()
        if g is None or g == 0:
            return None
        if math.isinf(g):
            return None
        return None if g is None else ("radius", 1.0 / g)  # resolved in bounding_box

    def _is_cone(self):
        return self.child._is_cone()


# ------------------------------------------------------- ball sequences

def _log_abs(e: Expr, j: float) -> float:
    if isinstance(e, Neg):
        return _log_abs(e.arg, j)
    if isinstance(e, Num):
        return math.log(abs(e.value)) if e.value != 0 else -math.inf
    try:
        return eval_log(e, j)
    except ExpressionEvalError:
        v = evaluate(e, j)
        return math.log(abs(v)) if v != 0 else -math.inf


@dataclass(frozen=True)
class BallSequence:
    """Balls ``B(center(j), radius(j))`` for ``j = start, start+1, ...``."""
    center: tuple  # one Expr per coordinate
    radius: Expr
    start: int = 1

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(self.center))

    @property
    def dim(self) -> int:
        return len(self.center)

    def center_at(self, j: int) -> np.ndarray:
        return np.array([evaluate(c, j) for c in self.center])

    def radius_at(self, j: int) -> float:
        r = evaluate(self.radius, j)
        if r < 0:
            raise ExpressionEvalError(f"negative radius at j={j}")
        return r

    def log_center_norm(self, j: int) -> float:
        logs = [_log_abs(c, j) for c in self.center]
        hi = max(logs)
        if hi == -math.inf:
            return hi
        return hi + 0.5 * math.log(sum(math.exp(2 * (v - hi)) for v in logs))

    def log_radius(self, j: int) -> float:
        return _log_abs(self.radius, j)

    def centers_increasing(self, count: int = PREFIX_CHECK) -> bool:
        try:
            vals = [self.log_center_norm(j) for j in range(self.start, self.start + count)]
        except ExpressionEvalError:
            return False
        return all(b > a for a, b in zip(vals, vals[1:]))

    def on_ray(self) -> bool:
        """All but one coordinate are the literal zero and the other has fixed sign."""
        nz = [c for c in self.center if not (isinstance(c, Num) and c.value == 0)]
        if len(nz) != 1:
            return False
        from .expr import _positive
        c = nz[0]
        return _positive(c) or (isinstance(c, Neg) and _positive(c.arg))

    def radius_below_center(self, count: int = PREFIX_CHECK) -> Optional[bool]:
        try:
            for j in range(self.start, self.start + count):
                if not self.log_radius(j) < self.log_center_norm(j):
                    return False
        except ExpressionEvalError:
            return None
        return True

    def center_limit(self) -> Optional[float]:
        lims = [limit(c) for c in self.center]
        if any(v is not None and math.isinf(v) for v in lims):
            return math.inf
        if any(v is None for v in lims):
            return None
        return math.sqrt(sum(v * v for v in lims))

    def index_bound(self, query_radius: float, trunc: int) -> int:
        """One past the last index that can meet the ball ``B(0, query_radius)``.

        Requires strictly increasing centre norms, checked on a prefix; the
        relevant indices then form a prefix located by bisection.
        """
        lo, hi = self.start, self.start + trunc
        if not self.centers_increasing(min(trunc, PREFIX_CHECK)):
            return hi

        def reaches(j: int) -> bool:
            try:
                lc = self.log_center_norm(j)
                lr = self.log_radius(j)
            except ExpressionEvalError:
                return True
            if lr > lc - 1e-12:
                return True
            # |c| - rho <= R  <=>  log|c| <= log(R + rho)
            return lc <= math.log(query_radius + math.exp(min(lr, 700.0))) if query_radius > 0 else lc <= lr

        if not reaches(lo):
            # nothing reachable only if the first ball is already too far
            return lo
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if reaches(mid):
                lo = mid
            else:
                hi = mid
        log.debug("sequence index bound for |x|<=%g: %d", query_radius, hi)
        return hi


@dataclass(frozen=True)
class SequenceUnion(SetDescriptor):
    seq: BallSequence
    closed: bool = True

    def _contains(self, X, trunc):
        out = np.zeros(X.shape[:-1], dtype=bool)
        if X.size == 0:
            return out
        rq = float(np.max(np.linalg.norm(X, axis=-1)))
        stop = self.seq.index_bound(rq, trunc)
        for j in range(self.seq.start, stop):
            try:
                c = self.seq.center_at(j)
            except ExpressionEvalError:
                if self.seq.log_center_norm(j) > math.log(rq + 1.0) + 700:
                    continue
                raise
            rad = self.seq.radius_at(j)
            d = np.linalg.norm(X - c, axis=-1)
            out |= (d <= rad) if self.closed else (d < rad)
        return out

    def _bounded(self):
        lc = self.seq.center_limit()
        if lc == math.inf:
            return False
        lr = limit(self.seq.radius)
        if lc is not None and lr is not None and math.isfinite(lr):
            return True
        return None

    def _cobounded(self):
        if self.seq.on_ray() and self.seq.radius_below_center():
            return False
        return None

    def _avoids0(self):
        lc = self.seq.center_limit()
        if lc == 0:
            return False
        if lc is None:
            return None
        try:
            for j in range(self.seq.start, self.seq.start + PREFIX_CHECK):
                lcn, lr = self.seq.log_center_norm(j), self.seq.log_radius(j)
                if not lr < lcn:
                    return False
        except ExpressionEvalError:
            return None
        return True

    def _contains0(self):
        if self.seq.on_ray() and self.seq.radius_below_center():
            return False
        return None


# ---------------------------------------------------------- public API

def contains(S: SetDescriptor, X, trunc: int = DEFAULT_TRUNC) -> np.ndarray:
    """Vectorised membership for points ``X`` of shape (m, n)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return S._contains(X, trunc)


def membership(x, S: SetDescriptor, trunc: int = DEFAULT_TRUNC) -> bool:
    if trunc < 1:
        raise ValidationError("truncation must be >= 1")
    return bool(contains(S, np.asarray(x, dtype=float)[None, :], trunc)[0])


def is_bounded(S: SetDescriptor) -> Optional[bool]:
    return S._bounded()


def is_cobounded(S: SetDescriptor) -> Optional[bool]:
    return S._cobounded()


def boundary_unbounded(S: SetDescriptor) -> BoundaryStatus:
    b, cb = S._bounded(), S._cobounded()
    if b is True or cb is True:
        return BoundaryStatus.BOUNDED
    if b is False and cb is False:
        return BoundaryStatus.UNBOUNDED
    return BoundaryStatus.UNKNOWN


def is_cone(S: SetDescriptor) -> bool:
    """True when ``t*S == S`` for all ``t > 0`` (decided structurally)."""
    return S._is_cone()


def bounding_box(S: SetDescriptor, n: int) -> Optional[tuple[np.ndarray, np.ndarray]]:
    def box(node):
        if isinstance(node, Annulus):
            return -np.full(n, node.outer), np.full(n, node.outer)
        if isinstance(node, Origin):
            return np.zeros(n), np.zeros(n)
        if isinstance(node, Inverted):
            g = node.child._gap0()
            if g is None or g <= 0 or math.isinf(g):
                return None
            return -np.full(n, 1.0 / g), np.full(n, 1.0 / g)
        if isinstance(node, Union):
            boxes = [box(c) for c in node.children]
            if not boxes or any(b is None for b in boxes):
                return None
            return np.min([b[0] for b in boxes], axis=0), np.max([b[1] for b in boxes], axis=0)
        if isinstance(node, Intersection):
            boxes = [b for b in (box(c) for c in node.children) if b is not None]
            if not boxes:
                return None
            lo = np.max([b[0] for b in boxes], axis=0)
            hi = np.min([b[1] for b in boxes], axis=0)
            return lo, np.maximum(hi, lo)
        if isinstance(node, Scaled):
            b = box(node.child)
            return None if b is None else (b[0] * node.factor, b[1] * node.factor)
        if isinstance(node, SequenceUnion):
            return None
        return node._box()

    return box(S)


def scale_set(S: SetDescriptor, factor: float) -> SetDescriptor:
    """``factor * S`` with closed-form images for the elementary nodes."""
    if factor == 1:
        return S
    if isinstance(S, Ball):
        return Ball(tuple(factor * c for c in S.center), factor * S.radius)
    if isinstance(S, ClosedBall):
        return ClosedBall(tuple(factor * c for c in S.center), factor * S.radius)
    if isinstance(S, Annulus):
        return Annulus(factor * S.inner, factor * S.outer, S.closed)
    if isinstance(S, HalfSpace):
        return HalfSpace(S.normal, S.offset * factor)
    if isinstance(S, (WholeSpace, EmptySet, Origin)):
        return S
    if isinstance(S, Complement):
        return Complement(scale_set(S.child, factor))
    if isinstance(S, Union):
        return Union(tuple(scale_set(c, factor) for c in S.children))
    if isinstance(S, Intersection):
        return Intersection(tuple(scale_set(c, factor) for c in S.children))
    if isinstance(S, Scaled):
        f = S.factor * factor
        return S.child if f == 1 else Scaled(S.child, f)
    if S._is_cone():
        return S
    return Scaled(S, factor)


@dataclass(frozen=True)
class Condenser:
    """A compact set ``K`` inside an open set ``G`` with a weight."""
    K: SetDescriptor
    G: SetDescriptor
    weight: Weight = field(default_factory=Weight.constant)

    def bounding_radius(self, n: int) -> Optional[float]:
        b = bounding_box(self.K, n)
        if b is None:
            return None
        return float(np.max(np.maximum(np.abs(b[0]), np.abs(b[1]))) * math.sqrt(n))
