"""Registered domain families with closed-form bounds on their Wiener integrals.

* ``Example71``: complement of the balls ``B(x_j, r_j)`` with
  ``|x_j| = (3/4) 2^(4^j)`` and ``r_j = 2^(-8^j)`` on the positive first axis.
  For ``p = n`` the point at infinity is irregular although the boundary is
  unbounded.
* ``Example72F``: complement of ``F = {0} ∪ closed B(x_j, alpha_(j+1))`` with
  ``alpha_j = e^(-2^j)`` and ``x_j = alpha_j e_1``; a point family at the
  origin, regular for ``p = n`` although the half-shell integral converges.
* ``Example72``: the inversion of ``Example72F``, a family at infinity.
* ``ExcludedBall``, ``HalfSpace`` and ``BallChain`` (balls ``B(c lambda^j e_1,
  rho lambda^j)``) as simple regular/irregular references.

All series are evaluated from exponents, so indices far beyond the binary64
range of ``2^(4^j)`` are fine.  Per-term values use the ``p = n`` capacity of
concentric balls, ``omega (log(R/r))^(1-n)``; the ``Example71`` series are
reported after dividing the capacity by ``omega`` (so they do not depend on
``n``), the ``Example72`` series without that division.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .estimates import ring_modulus_log
from .expr import parse_expr
from .geometry import (BallSequence, ClosedBall, Complement, Exponents, HalfSpace as HalfSpaceSet,
                       Inverted, Origin, SequenceUnion, SetDescriptor, Union, ValidationError,
                       sphere_area)
from .variants import VariantKind as V

__all__ = [
    "Certificate", "Example71", "Example72", "Example72F", "ExcludedBall", "HalfSpace",
    "BallChain", "match_family", "example71_upper_series", "example71_terms",
    "example72_I1_terms", "example72_I1_bound", "example72_I2_terms", "example72_I2_lower",
    "verify_example_verdicts",
]

LN2 = math.log(2.0)
SHELL_KINDS = (V.SQUARE_SHELL, V.SQUARE_SHELL_RN_OUTER)
EXP_KINDS = (V.EXP_SHELL, V.EXP_SHELL_RN_OUTER)


@dataclass(frozen=True)
class Certificate:
    kind: str  # "divergent" or "convergent"
    reason: str

    def __post_init__(self):
        if self.kind not in ("divergent", "convergent"):
            raise ValueError(f"unknown certificate kind {self.kind!r}")


def _axis(n: int, v: str) -> tuple:
    return (parse_expr(v),) + tuple(parse_expr("0") for _ in range(n - 1))


# ---------------------------------------------------------------- Example71

def example71_upper_series(J: int, n: int = 2) -> Fraction:
    """``sum_(j<=J) (3/4) 4^j / 8^j = (3/4)(1 - 2^-J)``, exactly.

    Each term bounds the square-shell integral over ``2^(4^(j-1)) < r <
    2^(4^j)`` by the capacity of ``closed B(x_j, r_j)`` in ``B(x_j, 1)``,
    divided by ``omega`` before taking the ``1/(n-1)`` power, which gives
    ``1/log(1/r_j)`` for every ``n``.
    """
    if J < 0 or n < 2:
        raise ValidationError("need J >= 0 and n >= 2")
    return sum((Fraction(3, 4) * Fraction(4 ** j, 8 ** j) for j in range(1, J + 1)), Fraction(0))


def _ex71_logs(j: int) -> tuple[float, float]:
    """``log |x_j|`` and ``log r_j``."""
    return math.log(0.75) + 4.0 ** j * LN2, -(8.0 ** j) * LN2


def example71_terms(kind: V, J: int) -> list[float]:
    """Per-index upper bounds (``omega``-normalised) for the ``p = n`` integral.

    ``SQUARE_SHELL``: ``(3/4) 4^j / 8^j``.
    ``EXP_SHELL``: ball ``j`` meets ``[r, 2^r]`` only for
    ``log2(|x_j| - r_j) <= r <= |x_j| + r_j``, giving
    ``log((|x_j| + r_j) / log2(|x_j| - r_j)) / log(1/r_j) <= 2^-j``.
    ``BALL_IN_UNION``: ball ``j`` is outside ``B_2r`` only for
    ``r <= (|x_j| + r_j)/2``; the ring modulus between ``closed B_r`` and the
    ball is smallest at that endpoint.  Subadditivity over the removed balls
    and ``(sum a_j)^c <= sum a_j^c`` for ``c <= 1`` give the bound
    ``log((|x_j| + r_j)/2) / mu_j``.
    """
    out = []
    for j in range(1, J + 1):
        lm, lr = _ex71_logs(j)
        if kind in SHELL_KINDS:
            out.append(float(Fraction(3, 4) * Fraction(4 ** j, 8 ** j)))
        elif kind in EXP_KINDS:
            l_plus = float(np.logaddexp(lm, lr))
            l_minus = lm + math.log1p(-math.exp(lr - lm))
            out.append((l_plus - math.log(l_minus / LN2)) / (-lr))
        elif kind is V.BALL_IN_UNION:
            la = float(np.logaddexp(lm, lr)) - LN2
            mu = ring_modulus_log(la, lr, lm, nested=False)
            out.append(max(la, 0.0) / mu)
        else:
            raise ValidationError(f"no series for {kind}")
    return out


@dataclass(frozen=True)
class Example71:
    n: int = 2

    @property
    def sequence(self) -> BallSequence:
        return BallSequence(_axis(self.n, "0.75*pow2(4^j)"), parse_expr("pow2(-(8^j))"))

    def descriptor(self) -> SetDescriptor:
        return Complement(SequenceUnion(self.sequence, closed=True))

    def member(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        inside = np.ones(len(X), dtype=bool)
        for j in range(1, 5):
            c = np.zeros(self.n)
            c[0] = 0.75 * 2.0 ** (4 ** j)
            rj = 2.0 ** -(8 ** j)
            inside &= ~(np.linalg.norm(X - c, axis=1) <= rj)
        return inside

    def certificate(self, kind: V, exp: Exponents, point=None) -> Optional[Certificate]:
        if exp.p != exp.n:
            return None
        if kind in SHELL_KINDS:
            return Certificate("convergent",
                               "per-annulus upper bounds (3/4)4^j/8^j sum to 3/4")
        if kind in EXP_KINDS:
            return Certificate("convergent",
                               "per-ball upper bounds log(|x_j|/log2|x_j|)/log(1/r_j) <= 2^-j")
        if kind is V.BALL_IN_UNION:
            return Certificate("convergent",
                               "per-ball ring-capacity bounds log(|x_j|/2)/mu_j ~ 2^-j are summable")
        return None


# ----------------------------------------------------------- Example72 / F

def _ex72_sequence(n: int) -> BallSequence:
    return BallSequence(_axis(n, "exp(-(2^j))"), parse_expr("exp(-(2^(j+1)))"))


def example72_F(n: int = 2) -> SetDescriptor:
    return Union((Origin(), SequenceUnion(_ex72_sequence(n), closed=True)))


def example72_I1_terms(J: int, n: int = 2) -> list[float]:
    """Upper bounds for the half-shell integral of ``F`` over ``[3 alpha_j/4, 5 alpha_j/2]``.

    There ``F ∩ [r/2, r] ⊂ closed B(x_j, alpha_(j+1))`` and
    ``B_2r ⊃ B(x_j, alpha_j/2)``, so the integrand is at most
    ``omega^(1/(n-1)) / log(alpha_j / (2 alpha_(j+1)))`` with
    ``log(alpha_j/alpha_(j+1)) = 2^j``; the interval has log-length
    ``log(10/3)``.
    """
    c = sphere_area(n) ** (1.0 / (n - 1))
    return [c * math.log(10 / 3) / (2.0 ** j - LN2) for j in range(1, J + 1)]


def example72_I1_bound(J: int, n: int = 2) -> float:
    return math.fsum(example72_I1_terms(J, n))


def example72_I2_terms(J: int, n: int = 2) -> list[float]:
    """Lower bounds for the ball integral of ``F`` over ``[2 alpha_j, 2 alpha_(j-1)]``, ``j >= 2``.

    There ``F ∩ closed B_r ⊃ closed B(x_j, alpha_(j+1))`` and
    ``B_2r ⊂ B(x_j, 5 alpha_(j-1))``; with ``log(5 alpha_(j-1)/alpha_(j+1))
    = log 5 + 3 2^(j-1)`` and log-length ``2^(j-1)`` each term is
    ``omega^(1/(n-1)) 2^(j-1) / (log 5 + 3 2^(j-1))``.
    """
    c = sphere_area(n) ** (1.0 / (n - 1))
    return [c * 2.0 ** (j - 1) / (math.log(5) + 3 * 2.0 ** (j - 1)) for j in range(2, J + 1)]


def example72_I2_lower(J: int, n: int = 2) -> float:
    if J < 2:
        raise ValidationError("the lower-bound series starts at j = 2")
    return math.fsum(example72_I2_terms(J, n))


def _F_member(X: np.ndarray, n: int) -> np.ndarray:
    inF = np.all(X == 0, axis=1)
    for j in range(1, 12):
        c = np.zeros(n)
        c[0] = math.exp(-(2.0 ** j))
        inF |= np.linalg.norm(X - c, axis=1) <= math.exp(-(2.0 ** (j + 1)))
    return inF


I1_REASON = "half-shell upper bounds 2pi log(10/3)/(2^j - log 2) are summable"
I2_REASON = "per-interval lower bounds 2pi 2^(j-1)/(log 5 + 3 2^(j-1)) tend to 2pi/3 and do not sum"


@dataclass(frozen=True)
class Example72F:
    """Point family at the origin: ``R^n minus F``."""
    n: int = 2

    def descriptor(self) -> SetDescriptor:
        return Complement(example72_F(self.n))

    def member(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return ~_F_member(X, self.n)

    def certificate(self, kind: V, exp: Exponents, point=None) -> Optional[Certificate]:
        if exp.p != exp.n:
            return None
        if kind is V.ORIGIN_HALF_SHELL:
            return Certificate("convergent", I1_REASON)
        if kind is V.ORIGIN_BALL or (kind is V.CLASSIC_AT_POINT and point is not None
                                     and not np.any(point)):
            return Certificate("divergent", I2_REASON)
        return None


@dataclass(frozen=True)
class Example72:
    """Inversion of ``Example72F``: a family at infinity."""
    n: int = 2

    def descriptor(self) -> SetDescriptor:
        return Inverted(Complement(example72_F(self.n)))

    def member(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        r2 = np.sum(X * X, axis=1)
        out = np.zeros(len(X), dtype=bool)
        nz = r2 > 0
        out[nz] = ~_F_member(X[nz] / r2[nz, None], self.n)
        return out

    def certificate(self, kind: V, exp: Exponents, point=None) -> Optional[Certificate]:
        if exp.p != exp.n:
            return None
        if kind is V.BALL_IN_UNION:
            # (closed B_r, R^n minus (Omega^c minus B_2r)) is the inversion of
            # (F ∩ closed B_(1/2r), B_(1/r)); the n-capacity is invariant
            return Certificate("divergent", "equals the origin-ball integral of F: " + I2_REASON)
        if kind is V.LINEAR_SHELL:
            return Certificate("convergent", "equals the half-shell integral of F up to "
                               "comparison constants: " + I1_REASON)
        return None


# ------------------------------------------------------ reference families

@dataclass(frozen=True)
class ExcludedBall:
    center: tuple
    radius: float

    def descriptor(self) -> SetDescriptor:
        return Complement(ClosedBall(self.center, self.radius))

    def member(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.linalg.norm(X - np.asarray(self.center), axis=1) > self.radius

    def certificate(self, kind: V, exp: Exponents, point=None) -> Optional[Certificate]:
        return None  # bounded boundary is decided structurally


@dataclass(frozen=True)
class HalfSpace:
    normal: tuple
    offset: float = 0.0

    def descriptor(self) -> SetDescriptor:
        return HalfSpaceSet(self.normal, self.offset)

    def member(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        nv = np.asarray(self.normal, dtype=float)
        nrm = np.linalg.norm(nv)
        return X @ (nv / nrm) > self.offset / nrm

    def certificate(self, kind: V, exp: Exponents, point=None) -> Optional[Certificate]:
        if kind is V.CLASSIC_AT_POINT and point is not None:
            hs = self.descriptor()
            if abs(float(np.dot(hs.normal, point)) - hs.offset) <= 1e-12 * (1 + abs(hs.offset)):
                return Certificate("divergent", "the half-ball capacity ratio is constant "
                                   "in rho by scaling")
            return None
        if exp.p != exp.n:
            return None
        if kind in SHELL_KINDS + EXP_KINDS + (V.BALL_IN_UNION,):
            return Certificate("divergent", "a ball of radius r/4 at distance 3r/2 from the "
                               "origin lies in the complement for large r; its ring "
                               "capacity is a positive constant")
        return None


@dataclass(frozen=True)
class BallChain:
    """Complement of the closed balls ``B(c lambda^j e_1, rho lambda^j)``, ``j >= 1``."""
    c: float
    lam: float
    rho: float
    n: int = 2

    def __post_init__(self):
        if not (self.lam > 1 and 0 < self.rho < self.c):
            raise ValidationError("ball chain needs lambda > 1 and 0 < rho < c")

    def descriptor(self) -> SetDescriptor:
        seq = BallSequence(_axis(self.n, f"{self.c!r}*{self.lam!r}^j"),
                           parse_expr(f"{self.rho!r}*{self.lam!r}^j"))
        return Complement(SequenceUnion(seq, closed=True))

    def member(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        rmax = float(np.max(np.linalg.norm(X, axis=1), initial=0.0))
        inside = np.ones(len(X), dtype=bool)
        j = 1
        while (self.c - self.rho) * self.lam ** j <= rmax:
            ctr = np.zeros(self.n)
            ctr[0] = self.c * self.lam ** j
            inside &= np.linalg.norm(X - ctr, axis=1) > self.rho * self.lam ** j
            j += 1
        return inside

    def certificate(self, kind: V, exp: Exponents, point=None) -> Optional[Certificate]:
        if exp.p != exp.n:
            return None
        if kind is V.BALL_IN_UNION:
            return Certificate("divergent", "ring capacity between closed B_r and ball j is "
                               "bounded below for r in [(c-rho)lambda^j/4, (c-rho)lambda^j/2]; "
                               "these intervals have infinite logarithmic length")
        return None


FAMILY_TYPES = (Example71, Example72, Example72F, ExcludedBall, HalfSpace, BallChain)


def match_family(dom: SetDescriptor, n: int):
    """Registered family whose descriptor equals ``dom``, or None."""
    if isinstance(dom, HalfSpaceSet):
        return HalfSpace(dom.normal, dom.offset)
    if isinstance(dom, Complement) and isinstance(dom.child, ClosedBall):
        return ExcludedBall(dom.child.center, dom.child.radius)
    for fam in (Example71(n), Example72(n), Example72F(n)):
        if fam.descriptor() == dom:
            return fam
    return _match_chain(dom, n)


def _match_chain(dom: SetDescriptor, n: int):
    from .expr import BinOp, Num, Var
    if not (isinstance(dom, Complement) and isinstance(dom.child, SequenceUnion)
            and dom.child.closed and dom.child.seq.start == 1):
        return None
    seq = dom.child.seq

    def scaled_power(e):
        if (isinstance(e, BinOp) and e.op == "*" and isinstance(e.left, Num)
                and isinstance(e.right, BinOp) and e.right.op == "^"
                and isinstance(e.right.left, Num) and isinstance(e.right.right, Var)):
            return e.left.value, e.right.left.value
        return None

    first = scaled_power(seq.center[0])
    rad = scaled_power(seq.radius)
    rest_zero = all(isinstance(c, Num) and c.value == 0 for c in seq.center[1:])
    if first is None or rad is None or not rest_zero or first[1] != rad[1]:
        return None
    try:
        return BallChain(first[0], first[1], rad[0], len(seq.center))
    except ValidationError:
        return None


def verify_example_verdicts() -> dict:
    """Classifier and series checks on the registered examples; raises on mismatch."""
    from .wiener import CriterionVariant, classify_infinity, divergence_verdict_for

    out = {}
    e2 = Exponents(2, 2)
    res = classify_infinity(Example71(2).descriptor(), e2)
    out["example71"] = res.status
    res = classify_infinity(ExcludedBall((0.0, 0.0), 1.0).descriptor(), Exponents(2, 3))
    out["excluded_ball"] = res.status
    res = classify_infinity(HalfSpace((1.0, 0.0), 0.0).descriptor(), Exponents(2, 3))
    out["half_space"] = res.status
    F = Example72F(2).descriptor()
    i1 = divergence_verdict_for(CriterionVariant(V.ORIGIN_HALF_SHELL), F, e2)
    i2 = divergence_verdict_for(CriterionVariant(V.ORIGIN_BALL), F, e2)
    out["example72_I1"] = i1.kind
    out["example72_I2"] = i2.kind
    expected = {"example71": "Irregular", "excluded_ball": "Irregular", "half_space": "Regular",
                "example72_I1": "convergent", "example72_I2": "divergent"}
    bad = {k: (out[k], v) for k, v in expected.items() if out[k] != v}
    if bad:
        series = {"example71": [float(example71_upper_series(J)) for J in range(1, 6)],
                  "I1": example72_I1_terms(5), "I2": example72_I2_terms(6)}
        raise AssertionError(f"verdict mismatch {bad}; series prefixes {series}")
    return out
