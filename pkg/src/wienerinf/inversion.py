"""Circular inversion ``T(x) = x/|x|^2`` and the pushforward of operator maps.

The inversion swaps the origin and the point at infinity.  Under ``T`` an
operator ``A(x, q)`` of p-Laplace type turns into the weighted operator

    B(xi, q) = |J_T(x)|^{-1} dT(x) A(x, dT(x) q),   x = T(xi),

with weight ``|xi|^{2(p-n)}``; for ``A = |q|^{p-2} q`` this collapses to
``|xi|^{2(p-n)} |q|^{p-2} q``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .geometry import (Annulus, Ball, ClosedBall, Complement, EmptySet, Exponents, HalfSpace,
                       Intersection, Inverted, Origin, SetDescriptor, Union, ValidationError,
                       Weight, WholeSpace)

__all__ = [
    "INFINITY", "ORIGIN", "ExtendedPoint", "SingularPoint", "OriginInsideBall",
    "EllipticityViolation", "invert_point", "invert_points", "invert_ball",
    "dT_apply", "jacobian_det_abs", "OperatorMap", "PushforwardMap",
    "pushforward_eval", "verify_ellipticity", "EllipticityReport", "invert_set",
]


class SingularPoint(ValueError):
    """The inversion differential is undefined at the origin."""


class OriginInsideBall(ValueError):
    pass


class EllipticityViolation(AssertionError):
    def __init__(self, check: str, sample: dict):
        self.check = check
        self.sample = sample
        super().__init__(f"{check} violated at {sample}")


@dataclass(frozen=True)
class ExtendedPoint:
    """Tag for the point at infinity; finite points stay plain tuples."""
    name: str = "infinity"

    def __repr__(self):
        return self.name.upper()


INFINITY = ExtendedPoint("infinity")
ORIGIN = ExtendedPoint("origin")


def invert_point(x, n: Optional[int] = None):
    """``x/|x|^2``; the origin and ``INFINITY`` are swapped.

    ``INFINITY`` maps to the zero tuple when the dimension ``n`` is given and
    to the ``ORIGIN`` tag otherwise.
    """
    if isinstance(x, ExtendedPoint):
        if x.name == "origin":
            return INFINITY
        return tuple([0.0] * n) if n is not None else ORIGIN
    x = np.asarray(x, dtype=float)
    r2 = float(x @ x)
    if r2 == 0.0:
        return INFINITY
    return tuple(float(v) for v in x / r2)


def invert_points(X: np.ndarray) -> np.ndarray:
    """Vectorised inversion of non-zero points, shape (m, n)."""
    X = np.asarray(X, dtype=float)
    r2 = np.sum(X * X, axis=-1, keepdims=True)
    if np.any(r2 == 0):
        raise SingularPoint("cannot invert the origin in a finite array")
    return X / r2


def invert_ball(b):
    a = np.asarray(b.center, dtype=float)
    rho = float(b.radius)
    d = float(a @ a) - rho * rho
    if not d > 0:
        raise OriginInsideBall(f"origin lies in the closure of {b}")
    cls = ClosedBall if isinstance(b, ClosedBall) else Ball
    return cls(tuple(a / d), rho / d)


def _invert_any_ball(b) -> SetDescriptor:
    """Image of a ball in any position; the origin is never part of the image."""
    closed = isinstance(b, ClosedBall)
    a = np.asarray(b.center, dtype=float)
    rho = float(b.radius)
    a2 = float(a @ a)
    if a2 == 0.0:
        if rho == 0.0:
            return EmptySet()
        o = b.center
        return Complement(Ball(o, 1 / rho)) if closed else Complement(ClosedBall(o, 1 / rho))
    d = a2 - rho * rho
    if d > 0:
        return invert_ball(b)
    if d == 0:
        # the sphere passes through the origin and becomes the plane xi.a = 1/2
        if closed:
            return Complement(HalfSpace(tuple(-a), -0.5))
        return HalfSpace(tuple(a), 0.5)
    c = tuple(a / d)
    r = rho / -d
    return Complement(Ball(c, r)) if closed else Complement(ClosedBall(c, r))


def invert_set(S: SetDescriptor) -> SetDescriptor:
    """Closed-form descriptor of ``{xi != 0 : T(xi) in S}`` where one is known.

    Balls, origin-centred annuli and half-spaces have explicit images and the
    set operations commute with ``T`` on ``R^n minus {0}``; anything else is
    wrapped in :class:`Inverted`.
    """
    if isinstance(S, (Ball, ClosedBall)):
        return _invert_any_ball(S)
    if isinstance(S, Annulus):
        if S.outer == 0 or S.inner == S.outer and not S.closed:
            return EmptySet()
        if S.inner == 0:
            # the punctured ball 0 < |x| < b (or <= b) maps onto |xi| > 1/b (or >= 1/b)
            if S.closed:
                return Complement(Union((Annulus(0.0, 1 / S.outer), Origin())))
            return Complement(Annulus(0.0, 1 / S.outer, True))
        return Annulus(1 / S.outer, 1 / S.inner, S.closed)
    if isinstance(S, HalfSpace):
        nu = np.asarray(S.normal)
        o = S.offset
        if o == 0:
            return S
        c = tuple(nu / (2 * o))
        if o > 0:
            return Ball(c, 1 / (2 * o))
        return Complement(ClosedBall(c, 1 / (2 * -o)))
    if isinstance(S, (Origin, EmptySet)):
        return EmptySet()
    if isinstance(S, WholeSpace):
        return Complement(Origin())
    if isinstance(S, Complement):
        return Complement(Union((invert_set(S.child), Origin())))
    if isinstance(S, Union):
        return Union(tuple(invert_set(c) for c in S.children))
    if isinstance(S, Intersection):
        return Intersection(tuple(invert_set(c) for c in S.children))
    if isinstance(S, Inverted):
        return S.child if S.child._avoids0() is True else Intersection((S.child, Complement(Origin())))
    return Inverted(S)


def dT_apply(x, q) -> np.ndarray:
    """Differential of the inversion at ``x`` applied to ``q``.

    Broadcasts over leading axes: ``x`` and ``q`` of shape (..., n).
    """
    x = np.asarray(x, dtype=float)
    q = np.asarray(q, dtype=float)
    r2 = np.sum(x * x, axis=-1, keepdims=True)
    if np.any(r2 == 0):
        raise SingularPoint("dT is undefined at the origin")
    xq = np.sum(x * q, axis=-1, keepdims=True)
    return (q - 2.0 * xq * x / r2) / r2


def jacobian_det_abs(x, n: Optional[int] = None):
    x = np.asarray(x, dtype=float)
    if n is not None and x.shape[-1] != n:
        raise ValidationError(f"point has dimension {x.shape[-1]}, expected {n}")
    r2 = np.sum(x * x, axis=-1)
    if np.any(r2 == 0):
        raise SingularPoint("Jacobian is undefined at the origin")
    return np.power(r2, -x.shape[-1])


# -------------------------------------------------------- operator maps

@dataclass(frozen=True)
class OperatorMap:
    """``A(x, q) = a(x) |q|^{p-2} q``; ``coefficient=None`` means ``a = 1``."""
    exponents: Exponents
    coefficient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    alpha1: float = 1.0
    alpha2: float = 1.0

    def __post_init__(self):
        if not (self.alpha1 > 0 and self.alpha2 >= self.alpha1):
            raise ValidationError("need alpha2 >= alpha1 > 0")

    @classmethod
    def p_laplace(cls, exp: Exponents) -> "OperatorMap":
        return cls(exp)

    @classmethod
    def scalar(cls, exp: Exponents, coefficient, alpha1: float, alpha2: float) -> "OperatorMap":
        if not callable(coefficient):
            c = float(coefficient)
            coefficient = lambda x, c=c: np.full(np.shape(x)[:-1], c)
        return cls(exp, coefficient, alpha1, alpha2)

    @property
    def kind(self) -> str:
        return "p-laplace" if self.coefficient is None else "scalar"

    def __call__(self, x, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        nq = np.linalg.norm(q, axis=-1, keepdims=True)
        out = np.power(nq, self.exponents.p - 2) * q
        out = np.where(nq == 0, 0.0, out)
        if self.coefficient is not None:
            out = np.asarray(self.coefficient(np.asarray(x, dtype=float)))[..., None] * out
        return out


@dataclass(frozen=True)
class PushforwardMap:
    source: OperatorMap

    @property
    def weight(self) -> Weight:
        return Weight.for_exponents(self.source.exponents)

    def __call__(self, xi, q) -> np.ndarray:
        return pushforward_eval(self, xi, q)


def pushforward_eval(B: PushforwardMap, xi, q) -> np.ndarray:
    """Evaluate ``B(xi, q)``; rows with ``xi = 0`` give the zero vector."""
    xi = np.asarray(xi, dtype=float)
    q = np.asarray(q, dtype=float)
    xi, q = np.broadcast_arrays(xi, q)
    r2 = np.sum(xi * xi, axis=-1)
    out = np.zeros_like(q)
    nz = r2 > 0
    if np.any(nz):
        x = xi[nz] / r2[nz][..., None]
        dq = dT_apply(x, q[nz])
        a = B.source(x, dq)
        out[nz] = dT_apply(x, a) / jacobian_det_abs(x)[..., None]
    return out


@dataclass
class EllipticityReport:
    samples: int
    coercivity_margin: float  # min of B.q / (alpha1 w |q|^p) - 1
    growth_margin: float  # min of 1 - |B| / (alpha2 w |q|^{p-1})
    homogeneity_error: float  # max relative error
    monotonicity_min: float  # min of (B(q)-B(q')).(q-q') normalised
    passed: bool = True


def verify_ellipticity(B: PushforwardMap, samples: int, seed: int,
                       slack: float = 1e-10, mono_floor: float = 1e-14) -> EllipticityReport:
    """Check the four structure conditions of ``B`` at random draws."""
    if samples < 1:
        raise ValidationError("samples must be >= 1")
    exp = B.source.exponents
    n, p = exp.n, exp.p
    a1, a2 = B.source.alpha1, B.source.alpha2
    rng = np.random.default_rng(seed)
    xi = rng.normal(size=(samples, n)) * np.exp(rng.uniform(-2, 2, size=(samples, 1)))
    q = rng.normal(size=(samples, n)) * np.exp(rng.uniform(-2, 2, size=(samples, 1)))
    q2 = rng.normal(size=(samples, n)) * np.exp(rng.uniform(-2, 2, size=(samples, 1)))
    lam = rng.uniform(-3, 3, size=(samples, 1))
    lam[lam == 0] = 1.0

    w = B.weight(xi)
    bq = B(xi, q)
    nq = np.linalg.norm(q, axis=-1)
    coer = np.sum(bq * q, axis=-1) / (a1 * w * nq ** p) - 1.0
    grow = 1.0 - np.linalg.norm(bq, axis=-1) / (a2 * w * nq ** (p - 1))

    lhs = B(xi, lam * q)
    rhs = lam * np.abs(lam) ** (p - 2) * bq
    hom = np.linalg.norm(lhs - rhs, axis=-1) / np.maximum(np.linalg.norm(rhs, axis=-1), 1e-300)

    bq2 = B(xi, q2)
    dq = q - q2
    mono_raw = np.sum((bq - bq2) * dq, axis=-1)
    scale = w * (nq + np.linalg.norm(q2, axis=-1)) ** (p - 2) * np.sum(dq * dq, axis=-1)
    mono = mono_raw / scale

    checks = [
        ("coercivity", coer, lambda v: v >= -slack),
        ("growth", grow, lambda v: v >= -slack),
        ("homogeneity", hom, lambda v: v <= slack),
        ("monotonicity", mono, lambda v: v > mono_floor),
    ]
    for name, vals, ok in checks:
        bad = ~ok(vals)
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            raise EllipticityViolation(name, {"xi": xi[i].tolist(), "q": q[i].tolist(),
                                              "q2": q2[i].tolist(), "lambda": float(lam[i, 0]),
                                              "value": float(vals[i])})
    return EllipticityReport(samples, float(coer.min()), float(grow.min()),
                             float(hom.max()), float(mono.min()))
