"""Grid Dirichlet problems for the weighted p-Laplacian and boundary probes.

The solver minimises the discrete energy of :mod:`.solver` with the nodes
outside the open set clamped to the boundary data.  Probes record how far the
solution strays from the datum at a boundary point on shrinking neighbourhoods;
they suggest, never decide, regularity, so every verdict reads "consistent
with regular" or "consistent with irregular".

Only planar grids are solved; radial problems in any dimension reduce to a
one-dimensional shooting problem (:func:`radial_dirichlet_1d`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import ndimage
from scipy.integrate import solve_ivp
from scipy.interpolate import RegularGridInterpolator
from scipy.optimize import brentq

from .geometry import (Annulus, Ball, Exponents, Inverted, SetDescriptor, ValidationError,
                       Weight, contains)
from .solver import EnergyProblem, Grid, NotConverged

__all__ = [
    "DirichletProblem", "DirichletSolution", "solve_dirichlet", "RegularityProbe",
    "probe_regularity", "refinement_verdict", "radial_dirichlet_1d", "annulus_problem",
    "inverted_problem", "pull_back", "inversion_roundtrip", "PROBE_THRESHOLD",
]

PROBE_THRESHOLD = 0.02  # fraction of the data range
REGULAR = "consistent with regular"
IRREGULAR = "consistent with irregular"
INCONCLUSIVE = "inconclusive"

Data = Callable[[np.ndarray], np.ndarray]


@dataclass
class DirichletProblem:
    """Minimise ``sum w |grad u|^p`` over grid functions equal to the data off ``inside``."""
    grid: Grid
    inside: np.ndarray
    boundary_data: np.ndarray
    exp: Exponents
    weight: Weight = field(default_factory=Weight.constant)

    def __post_init__(self):
        if self.grid.n != 2:
            raise ValidationError("grid Dirichlet problems are planar; use radial_dirichlet_1d")
        if self.exp.n != 2:
            raise ValidationError("exponents must have n = 2 on planar grids")
        self.inside = np.asarray(self.inside, dtype=bool)
        self.boundary_data = np.asarray(self.boundary_data, dtype=float)
        if self.inside.shape != self.grid.shape or self.boundary_data.shape != self.grid.shape:
            raise ValidationError("mask and data must have the grid shape")
        if not np.all(np.isfinite(self.boundary_data[~self.inside])):
            raise ValidationError("boundary data must be finite")
        rim = np.ones(self.grid.shape, dtype=bool)
        rim[1:-1, 1:-1] = False
        if np.any(self.inside & rim):
            raise ValidationError("the open set reaches the grid edge")

    @classmethod
    def from_set(cls, grid: Grid, domain: SetDescriptor, data: Data, exp: Exponents,
                 weight: Optional[Weight] = None) -> "DirichletProblem":
        X = grid.nodes().reshape(-1, grid.n)
        inside = contains(domain, X).reshape(grid.shape)
        values = np.zeros(X.shape[0])
        out = ~inside.ravel()
        values[out] = data(X[out])
        return cls(grid, inside, values.reshape(grid.shape), exp,
                   weight if weight is not None else Weight.constant())

    @property
    def data_range(self) -> tuple[float, float]:
        v = self.boundary_data[~self.inside]
        return float(v.min()), float(v.max())

    def components(self) -> int:
        return int(ndimage.label(self.inside)[1])

    def energy_problem(self) -> EnergyProblem:
        return EnergyProblem(self.grid, self.exp.p, self.weight, ~self.inside,
                             np.where(self.inside, 0.0, self.boundary_data))


@dataclass
class DirichletSolution:
    problem: DirichletProblem
    u: np.ndarray
    energy: float
    iterations: int
    converged: bool
    history: list

    def at(self, X) -> np.ndarray:
        """Bilinear interpolation of the nodal solution."""
        interp = RegularGridInterpolator(self.problem.grid.axes(), self.u)
        return interp(np.atleast_2d(X))


def solve_dirichlet(prob: DirichletProblem, tol: float = 1e-12, max_iter: int = 100,
                    seed: Optional[int] = None, require_connected: bool = True) -> DirichletSolution:
    """Discrete minimiser; the energy history is non-increasing."""
    if prob.exp.p < 2:
        raise ValidationError("the Dirichlet solver needs p >= 2")
    if require_connected and prob.components() > 1:
        raise ValidationError("the open set is not connected on the grid")
    ep = prob.energy_problem()
    res = ep.minimize(tol=tol, max_iter=max_iter, seed=seed)
    return DirichletSolution(prob, res.u, res.energy, res.iterations, res.converged, res.history)


# ------------------------------------------------------------ probes

@dataclass
class RegularityProbe:
    point: tuple
    radii: list
    oscillations: list   # sup - inf of u over open-set nodes within each radius
    deviations: list     # sup |u - f(x0)| over the same nodes
    data_value: float
    data_range: float
    h: float
    threshold: float = PROBE_THRESHOLD

    def __post_init__(self):
        if any(b >= a for a, b in zip(self.radii, self.radii[1:])):
            raise ValidationError("probe radii must be strictly decreasing")

    @property
    def vanishing(self) -> bool:
        """Deviation shrinks with the radius and ends below the threshold."""
        d = self.deviations
        return bool(d) and d[-1] <= d[0] and d[-1] <= self.threshold * self.data_range

    @property
    def assessment(self) -> str:
        return REGULAR if self.vanishing else IRREGULAR

    def metadata(self) -> dict:
        return {"threshold": self.threshold, "h": self.h, "data_range": self.data_range,
                "refinement_factor": 2}


def probe_regularity(sol: DirichletSolution, x0, radii, data_value: Optional[float] = None,
                     threshold: float = PROBE_THRESHOLD) -> RegularityProbe:
    """Oscillation of the solution around the boundary point ``x0``.

    Radii below two grid spacings carry no information and are rejected.
    """
    prob = sol.problem
    x0 = np.asarray(x0, dtype=float)
    radii = [float(r) for r in radii]
    if min(radii) < 2 * prob.grid.h:
        raise ValidationError("probe radii must be at least two grid spacings")
    X = prob.grid.nodes().reshape(-1, prob.grid.n)
    dist = np.linalg.norm(X - x0, axis=-1)
    inside = prob.inside.ravel()
    u = sol.u.ravel()
    if data_value is None:
        data_value = float(u[np.argmin(np.where(inside, np.inf, dist))])
    lo, hi = prob.data_range
    osc, dev = [], []
    for r in radii:
        sel = inside & (dist <= r)
        if not np.any(sel):
            osc.append(0.0)
            dev.append(0.0)
            continue
        v = u[sel]
        osc.append(float(v.max() - v.min()))
        dev.append(float(np.max(np.abs(v - data_value))))
    return RegularityProbe(tuple(float(c) for c in x0), radii, osc, dev, float(data_value),
                           max(hi - lo, 1e-300), prob.grid.h, threshold)


def refinement_verdict(probes: list[RegularityProbe]) -> str:
    """Combine probes of the same point on successively halved grids.

    Deviation vanishing on every grid without growing under refinement is
    consistent with regularity; a smallest-radius deviation that stays above
    the threshold and does not drop under refinement is consistent with
    irregularity.  Anything else is inconclusive.
    """
    if len(probes) < 2:
        raise ValidationError("need probes on at least two grids")
    hs = [pr.h for pr in probes]
    if any(b >= a for a, b in zip(hs, hs[1:])):
        raise ValidationError("probes must be ordered from coarse to fine")
    tail = [pr.deviations[-1] / pr.data_range for pr in probes]
    thr = probes[-1].threshold
    if all(pr.vanishing for pr in probes) and all(b <= a + thr for a, b in zip(tail, tail[1:])):
        return REGULAR
    if all(t > thr for t in tail) and all(b >= a - thr for a, b in zip(tail, tail[1:])):
        return IRREGULAR
    return INCONCLUSIVE


# ------------------------------------------------------------ radial oracle

def radial_dirichlet_1d(a: float, b: float, n: int, p: float, delta: float = 0.0,
                        ua: float = 1.0, ub: float = 0.0) -> Callable[[np.ndarray], np.ndarray]:
    """Radial solution on ``a < |x| < b`` found by shooting.

    Radial solutions satisfy ``t^(n-1+delta) |u'|^(p-2) u' = -C``; the flux
    ``C`` is tuned until the integrated profile hits ``ub`` at ``t = b``.
    """
    if not 0 < a < b:
        raise ValidationError("need 0 < a < b")
    m = n - 1 + delta
    sgn = 1.0 if ua >= ub else -1.0
    jump = abs(ua - ub)
    if jump == 0:
        return lambda t: np.full(np.shape(t), float(ua))

    def rhs(s, y, C):
        t = math.exp(s)
        return [-sgn * t * (C / t ** m) ** (1.0 / (p - 1))]

    def miss(C):
        sol = solve_ivp(rhs, (math.log(a), math.log(b)), [ua], args=(C,),
                        rtol=1e-11, atol=1e-13)
        return sol.y[0, -1] - ub

    lo, hi = 1e-12, 1.0
    while sgn * miss(hi) > 0:
        hi *= 4
    C = brentq(lambda c: sgn * miss(c), lo, hi, xtol=1e-15, rtol=1e-13)
    sol = solve_ivp(rhs, (math.log(a), math.log(b)), [ua], args=(C,), dense_output=True,
                    rtol=1e-11, atol=1e-13)

    def profile(t):
        t = np.clip(np.asarray(t, dtype=float), a, b)
        return sol.sol(np.log(t))[0]

    return profile


# ------------------------------------------------------------ fixtures

def annulus_problem(a: float, b: float, h: float, exp: Exponents, weight: Optional[Weight] = None,
                    data: Optional[Data] = None, pad: int = 2) -> DirichletProblem:
    """Open annulus ``a < |x| < b``; default data 1 inside, 0 outside."""
    if data is None:
        def data(X):
            return (np.linalg.norm(X, axis=-1) <= a).astype(float)
    half = b + pad * h
    grid = Grid((-half, -half), (half, half), h)
    return DirichletProblem.from_set(grid, Annulus(a, b), data, exp, weight)


def _far(X: np.ndarray) -> np.ndarray:
    """Inversion with the origin sent to a point far out on the first axis."""
    r2 = np.sum(X * X, axis=-1, keepdims=True)
    far = np.zeros_like(X)
    far[:, 0] = 1e150
    return np.where(r2 > 0, X / np.where(r2 > 0, r2, 1.0), far)


def inverted_problem(domain: SetDescriptor, data: Data, grid: Grid, exp: Exponents) -> DirichletProblem:
    """Problem for the inverted set with data ``f o T`` and the inversion weight."""
    def pulled(X):
        return data(_far(X))

    return DirichletProblem.from_set(grid, Inverted(domain), pulled, exp,
                                     Weight.for_exponents(exp))


def pull_back(sol: DirichletSolution, X: np.ndarray) -> np.ndarray:
    """Evaluate ``u~(T(x))`` for a solution ``u~`` in inverted coordinates."""
    return sol.at(_far(np.atleast_2d(X)))


@dataclass
class RoundTrip:
    sup_error: float
    data_range: float
    original: DirichletSolution
    inverted: DirichletSolution

    @property
    def relative(self) -> float:
        return self.sup_error / self.data_range


def inversion_roundtrip(a: float, b: float, h: float, exp: Exponents, data: Data,
                        **kw) -> RoundTrip:
    """Solve on ``a < |x| < b`` and on its image, then compare after pulling back.

    The original problem is unweighted; the inverted one carries the weight
    ``|xi|^(2(p-n))``.  Both grids use spacing ``h`` relative to their outer
    radius, so the resolution is matched.
    """
    orig = annulus_problem(a, b, h * b, exp, Weight.constant(), data)
    s1 = solve_dirichlet(orig, **kw)
    B = 1.0 / a
    half = B + 2 * h * B
    grid = Grid((-half, -half), (half, half), h * B)
    inv = inverted_problem(Annulus(a, b), data, grid, exp)
    s2 = solve_dirichlet(inv, **kw)
    X = orig.grid.nodes().reshape(-1, 2)[orig.inside.ravel()]
    err = float(np.max(np.abs(s1.u.ravel()[orig.inside.ravel()] - pull_back(s2, X))))
    lo, hi = orig.data_range
    return RoundTrip(err, max(hi - lo, 1e-300), s1, s2)


def punctured_disk(h: float, exp: Exponents, data: Data, radius: float = 1.0,
                   puncture=(0.0, 0.0)) -> DirichletProblem:
    """Disk of the given radius with the grid node nearest ``puncture`` removed."""
    half = radius + 2 * h
    grid = Grid((-half, -half), (half, half), h)
    prob = DirichletProblem.from_set(grid, Ball((0.0, 0.0), radius), data, exp)
    X = grid.nodes().reshape(-1, 2)
    k = int(np.argmin(np.linalg.norm(X - np.asarray(puncture, dtype=float), axis=-1)))
    inside = prob.inside.ravel().copy()
    inside[k] = False
    values = prob.boundary_data.ravel().copy()
    values[k] = float(data(X[k:k + 1])[0])
    return DirichletProblem(grid, inside.reshape(grid.shape), values.reshape(grid.shape), exp)


__all__ += ["punctured_disk", "RoundTrip", "NotConverged", "REGULAR", "IRREGULAR", "INCONCLUSIVE"]
