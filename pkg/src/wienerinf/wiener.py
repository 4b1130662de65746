"""Sampling and summation of Wiener-type integrals and the classifier at infinity.

Samples are log-uniform in ``r`` (``rho`` for point variants) and the
integral is accumulated by the trapezoid rule in ``log r``.  A finite sample
cannot decide divergence, so every report carries a three-valued verdict:
divergent or convergent only when an analytic certificate applies, and
otherwise the least-squares slope of the partial sums over the last decade.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .capacity import CapacityEstimate
from .condensers import (BallAtom, DualWindow, RadialAtom, Unsupported, complement_atoms,
                         dual_capacity, grid_fallback, invert_atoms, translate_atoms, window_capacity)
from .families import Certificate, match_family
from .geometry import (Annulus, Ball, BoundaryStatus, ClosedBall, Complement, EmptySet,
                       Exponents, Intersection, Inverted, SetDescriptor, ValidationError,
                       Weight, WholeSpace, ball_volume, boundary_unbounded, contains,
                       is_bounded, is_cobounded, weight_ball_mass)
from .variants import CriterionVariant, VariantKind

log = logging.getLogger(__name__)

__all__ = [
    "CriterionVariant", "VariantKind", "Verdict", "Sample", "WienerReport", "Classification",
    "WholeSpaceRefused", "integrand_at", "wiener_partial_sum", "divergence_verdict",
    "divergence_verdict_for", "classify_infinity", "classic_wiener_at", "DEFAULT_VARIANT",
]

DEFAULT_VARIANT = CriterionVariant(VariantKind.SQUARE_SHELL)
SAMPLES_PER_DECADE = 16
R_MAX = 1e6
RHO_MIN = 1e-6
FALLBACK_H = 1 / 64

INFINITY_CRITERIA = (
    VariantKind.BALL_IN_UNION, VariantKind.SQUARE_SHELL, VariantKind.EXP_SHELL,
    VariantKind.SQUARE_SHELL_RN_OUTER, VariantKind.EXP_SHELL_RN_OUTER,
    VariantKind.TRANSFORMED_ORIGIN,
)


class WholeSpaceRefused(ValueError):
    """Regularity at infinity is not characterised for the whole space."""


@dataclass(frozen=True)
class Verdict:
    kind: str  # "divergent", "convergent" or "trend"
    reason: str
    slope: Optional[float] = None

    @property
    def provable(self) -> bool:
        return self.kind != "trend"

    def __str__(self):
        if self.kind == "trend":
            s = "n/a" if self.slope is None else f"{self.slope:.6g}"
            return f"numeric trend (slope {s})"
        return f"provably {self.kind}: {self.reason}"


@dataclass(frozen=True)
class Sample:
    r: float
    capacity: float
    integrand: float
    partial_sum: float
    method: str
    lower: Optional[float] = None
    upper: Optional[float] = None


@dataclass
class WienerReport:
    variant: CriterionVariant
    exp: Exponents
    samples: list
    trend: float
    verdict: Verdict
    notes: list = field(default_factory=list)

    @property
    def partial_sums(self) -> np.ndarray:
        return np.array([s.partial_sum for s in self.samples])

    @property
    def radii(self) -> np.ndarray:
        return np.array([s.r for s in self.samples])

    @property
    def total(self) -> float:
        return self.samples[-1].partial_sum if self.samples else 0.0


@dataclass(frozen=True)
class Classification:
    status: str  # "Regular", "Irregular" or "Inconclusive"
    certificate: str
    verdict: Verdict
    report: Optional[WienerReport] = None


# ---------------------------------------------------------------- sampling

def _closed_complement(dom: SetDescriptor) -> SetDescriptor:
    return dom.child if isinstance(dom, Complement) else Complement(dom)


def _fallback(variant: CriterionVariant, dom: SetDescriptor, exp: Exponents, weight: Weight,
              w, h_rel: float) -> CapacityEstimate:
    if isinstance(w, DualWindow) or w.log_g2 == math.inf or w.log_g2 > 700:
        raise Unsupported("no closed form and the condenser is unbounded or too large for a grid")
    n = exp.n
    x0 = tuple(variant.point) if variant.kind is VariantKind.CLASSIC_AT_POINT else (0.0,) * n
    a, b, g2 = math.exp(w.log_a), math.exp(w.log_b), math.exp(w.log_g2)
    g1 = math.exp(w.log_g1)
    closed = _closed_complement(Inverted(dom) if variant.weighted else dom)
    kwin = ClosedBall(x0, b) if a == 0 else Annulus(a, b, closed=True)
    G = Ball(x0, g2) if g1 == 0 else Annulus(g1, g2, closed=False)
    ratio = g2 / (g1 if g1 > 0 else b)
    return grid_fallback(Intersection((closed, kwin)), G, exp, weight, ratio, h_rel)


def _check_scale(variant: CriterionVariant, t: float) -> None:
    if variant.at_infinity and not t >= 1:
        raise ValidationError(f"infinity variants need r >= 1, got {t}")
    if not variant.at_infinity and not 0 < t <= 1:
        raise ValidationError(f"point variants need 0 < rho <= 1, got {t}")


def _sample_weight(variant: CriterionVariant, exp: Exponents, weight: Optional[Weight]) -> Weight:
    if variant.weighted:
        return Weight.for_exponents(exp)
    if variant.at_infinity:
        return Weight.constant()
    return weight or Weight.constant()


def integrand_at(t: float, variant: CriterionVariant, dom: SetDescriptor, exp: Exponents,
                 weight: Optional[Weight] = None, h_rel: float = FALLBACK_H,
                 atoms: Optional[list] = None) -> tuple[CapacityEstimate, float]:
    """Capacity of the variant's condenser at scale ``t`` and the integrand density.

    The density is taken per unit of ``log t``: ``(cap / r^(n-p))^(1/(p-1))``
    at infinity, ``(cap / rho^(p-n))^(1/(p-1))`` for the origin and inverted
    forms, and ``(cap / (rho^-p w(B(x0, rho))))^(1/(p-1))`` for the classic
    form.
    """
    _check_scale(variant, t)
    w8 = _sample_weight(variant, exp, weight)
    if atoms is None:
        atoms = _variant_atoms(variant, dom)
    win = variant.window(t)
    try:
        if isinstance(win, DualWindow):
            est = dual_capacity(atoms, win, exp)
        else:
            est = window_capacity(atoms, win, exp, w8)
    except Unsupported as exc:
        log.debug("closed forms do not apply at %g: %s", t, exc)
        est = _fallback(variant, dom, exp, w8, win, h_rel)
    if est.value == 0:
        return est, 0.0
    n, p = exp.n, exp.p
    lt = math.log(t)
    if variant.kind is VariantKind.CLASSIC_AT_POINT:
        if variant.point is not None and np.any(variant.point) and not w8.is_trivial:
            raise Unsupported("off-origin classic form needs a constant weight")
        mass = weight_ball_mass(w8, t, n) if not w8.is_trivial else ball_volume(n, t)
        log_den = -p * lt + math.log(mass)
    elif variant.at_infinity and not variant.weighted:
        log_den = (n - p) * lt
    else:
        log_den = (p - n) * lt
    return est, math.exp((math.log(est.value) - log_den) / (p - 1))


def _variant_atoms(variant: CriterionVariant, dom: SetDescriptor) -> list:
    atoms = complement_atoms(dom)
    if variant.weighted:
        return invert_atoms(atoms)
    if variant.kind is VariantKind.CLASSIC_AT_POINT:
        return translate_atoms(atoms, variant.point)
    return atoms


def _nodes(lo: float, hi: float, spd: int) -> np.ndarray:
    decades = math.log10(hi / lo)
    count = max(2, int(math.ceil(decades * spd)) + 1)
    return np.geomspace(lo, hi, count)


def _trend(x: np.ndarray, s: np.ndarray) -> float:
    """Least-squares slope of partial sums against log scale over the last decade."""
    if len(x) < 2:
        return 0.0
    keep = x >= x[-1] - math.log(10)
    if keep.sum() < 2:
        keep[-2:] = True
    xs, ys = x[keep], s[keep]
    if np.ptp(ys) == 0:
        return 0.0
    return float(np.polyfit(xs, ys, 1)[0])


def wiener_partial_sum(variant: CriterionVariant, dom: SetDescriptor, exp: Exponents,
                       r_min: Optional[float] = None, r_max: Optional[float] = None,
                       samples_per_decade: int = SAMPLES_PER_DECADE,
                       weight: Optional[Weight] = None, h_rel: float = FALLBACK_H,
                       certify: bool = True) -> WienerReport:
    """Trapezoid partial sums of the variant's integral on log-uniform nodes.

    At infinity the nodes run from ``r_min`` (default 1) to ``r_max``
    (default 1e6); for point variants ``r_min``/``r_max`` bound ``rho``
    (defaults 1e-6 and 1) and the sum runs from ``rho = r_max`` downwards.
    """
    if samples_per_decade < 4:
        raise ValidationError("samples_per_decade must be at least 4")
    if variant.at_infinity:
        lo = 1.0 if r_min is None else r_min
        hi = R_MAX if r_max is None else r_max
    else:
        lo = RHO_MIN if r_min is None else r_min
        hi = 1.0 if r_max is None else r_max
    if not 0 < lo < hi:
        raise ValidationError("need 0 < r_min < r_max")
    ts = _nodes(lo, hi, samples_per_decade)
    if not variant.at_infinity:
        ts = ts[::-1]
    atoms = _variant_atoms(variant, dom)
    samples, notes = [], []
    total, prev = 0.0, None
    for t in ts:
        est, f = integrand_at(float(t), variant, dom, exp, weight, h_rel, atoms)
        if prev is not None:
            total += 0.5 * (f + prev[1]) * abs(math.log(t / prev[0]))
        prev = (t, f)
        lo_b, hi_b = est.analytic_bounds if est.analytic_bounds is not None else (None, None)
        samples.append(Sample(float(t), est.value, f, total, est.method,
                              None if lo_b is None else float(lo_b),
                              None if hi_b is None else float(hi_b)))
        notes.extend(f"r={t:.6g}: {m}" for m in est.notes if "scale" not in m)
    x = np.abs(np.log(np.array([s.r for s in samples])))
    slope = _trend(x, np.array([s.partial_sum for s in samples]))
    verdict = Verdict("trend", "no analytic certificate", slope)
    if certify:
        verdict = divergence_verdict_for(variant, dom, exp, slope, weight)
    return WienerReport(variant, exp, samples, slope, verdict, notes)


# ---------------------------------------------------------------- verdicts

def _family_certificate(kind: VariantKind, dom: SetDescriptor, exp: Exponents,
                        point=None) -> Optional[Certificate]:
    fam = match_family(dom, exp.n)
    if fam is None:
        return None
    return fam.certificate(kind, exp, point)


def _point_certificate(variant: CriterionVariant, dom: SetDescriptor, exp: Exponents,
                       weight: Optional[Weight] = None) -> Optional[Verdict]:
    """Point criteria decided by the capacity of a single point.

    With the weight ``|x|^delta`` centred at the point, a point has positive
    capacity iff ``p > n + delta``.
    """
    if variant.kind not in (VariantKind.CLASSIC_AT_POINT, VariantKind.ORIGIN_BALL):
        return None
    x0 = np.zeros(exp.n) if variant.point is None else np.asarray(variant.point, dtype=float)
    if bool(contains(dom, x0)[0]):
        return None
    delta = 0.0 if weight is None or weight.is_trivial or np.any(x0) else weight.delta
    if exp.p > exp.n + delta:
        return Verdict("divergent", "a point has positive capacity for p > n + delta, so "
                       "the integrand is bounded below near every boundary point")
    try:
        atoms = _variant_atoms(variant, dom)
    except Exception:  # pragma: no cover - defensive
        return None
    def at_origin(a) -> bool:
        if isinstance(a, RadialAtom):
            return all(iv.lo == 0 and iv.hi == 0 for iv in a.intervals)
        if isinstance(a, BallAtom):
            return a.radius == 0 and not np.any(a.center)
        return False
    if atoms and all(at_origin(a) for a in atoms):
        return Verdict("convergent", "isolated boundary point: a point has zero capacity "
                       "for p <= n + delta, so the integrand vanishes")
    return None


def divergence_verdict_for(variant: CriterionVariant, dom: SetDescriptor, exp: Exponents,
                           slope: Optional[float] = None,
                           weight: Optional[Weight] = None) -> Verdict:
    """Analytic verdict for the variant's integral on ``dom``, or a numeric trend."""
    if variant.about_infinity and variant.is_criterion:
        status = boundary_unbounded(dom)
        if exp.p > exp.n and status is BoundaryStatus.UNBOUNDED:
            return Verdict("divergent", "unbounded boundary with p > n")
        if exp.p >= exp.n and is_cobounded(dom) is True:
            return Verdict("convergent", "bounded boundary: the sampled complement is empty "
                           "for large r")
    elif variant.about_infinity and is_cobounded(dom) is True:
        return Verdict("convergent", "bounded boundary: the sampled complement is empty "
                       "for large r")
    cert = _family_certificate(variant.kind, dom, exp, variant.point)
    if cert is not None:
        return Verdict(cert.kind, cert.reason)
    point = _point_certificate(variant, dom, exp, weight)
    if point is not None:
        return point
    if variant.is_criterion:
        if variant.about_infinity:
            others = [CriterionVariant(k) for k in INFINITY_CRITERIA if k is not variant.kind]
        elif variant.kind is VariantKind.ORIGIN_BALL or not np.any(variant.point):
            others = [CriterionVariant(VariantKind.ORIGIN_BALL),
                      CriterionVariant(VariantKind.CLASSIC_AT_POINT, point=(0.0,) * exp.n)]
        else:
            others = []
        for other in others:
            if other.kind is variant.kind:
                continue
            cert = _family_certificate(other.kind, dom, exp, other.point)
            if cert is not None:
                return Verdict(cert.kind, f"equivalent {other.label} integral: {cert.reason}")
    return Verdict("trend", "no analytic certificate", slope)


def divergence_verdict(report: WienerReport, dom: SetDescriptor, exp: Exponents) -> Verdict:
    return divergence_verdict_for(report.variant, dom, exp, report.trend)


def _is_whole_space(dom: SetDescriptor) -> bool:
    if isinstance(dom, WholeSpace) or (isinstance(dom, Complement)
                                       and isinstance(dom.child, EmptySet)):
        return True
    try:
        return complement_atoms(dom) == []
    except Exception:  # pragma: no cover - defensive
        return False


def classify_infinity(dom: SetDescriptor, exp: Exponents,
                      variant: CriterionVariant = DEFAULT_VARIANT,
                      sample_if_needed: bool = True, **sampling) -> Classification:
    """Regular / Irregular / Inconclusive for the point at infinity of ``dom``.

    Regular iff the variant's integral is certified divergent, Irregular iff
    certified convergent.  Otherwise the sampled report is attached and the
    status is Inconclusive.
    """
    if _is_whole_space(dom):
        raise WholeSpaceRefused("the whole space has no boundary point at infinity")
    exp.require_p_ge_n()
    if not (variant.about_infinity and variant.is_criterion):
        raise ValidationError(f"{variant.label} does not characterise regularity at infinity")
    if is_bounded(dom) is True:
        raise ValidationError("infinity is not a boundary point of a bounded domain")
    verdict = divergence_verdict_for(variant, dom, exp)
    report = None
    if not verdict.provable and sample_if_needed:
        report = wiener_partial_sum(variant, dom, exp, **sampling)
        verdict = report.verdict
    status = {"divergent": "Regular", "convergent": "Irregular"}.get(verdict.kind, "Inconclusive")
    cert = f"{variant.label}: {verdict}"
    return Classification(status, cert, verdict, report)


def classic_wiener_at(x0, dom: SetDescriptor, exp: Exponents, w: Optional[Weight] = None,
                      rho_min: float = RHO_MIN, samples_per_decade: int = SAMPLES_PER_DECADE,
                      **kw) -> WienerReport:
    """Classic integral ``(cap(Omega^c ∩ closed B(x0,rho), B(x0,2rho)) / (rho^-p w(B(x0,rho))))^(1/(p-1))``."""
    x0 = tuple(float(v) for v in x0)
    if len(x0) != exp.n:
        raise ValidationError("point dimension differs from n")
    if bool(contains(dom, np.array(x0))[0]):
        raise ValidationError("x0 lies inside the open set, not on its boundary")
    v = CriterionVariant(VariantKind.CLASSIC_AT_POINT, point=x0)
    return wiener_partial_sum(v, dom, exp, rho_min, 1.0, samples_per_decade, weight=w, **kw)
