"""Condenser capacities: exact radial values and the grid solver."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geometry import (Condenser, Exponents, SetDescriptor, ValidationError, Weight,
                       bounding_box, contains, scale_set)
from .radial import (GeometryError, radial_capacity_exact, radial_condenser_capacity,
                     shell_capacity)
from .solver import EnergyProblem, Grid, GridBudgetError, NotConverged

__all__ = [
    "CapacityEstimate", "grid_capacity", "normalized_grid_capacity", "auto_grid",
    "radial_capacity_exact", "shell_capacity", "exact_capacity", "GeometryError",
    "Grid", "NotConverged", "GridBudgetError", "truncated_capacity",
]


@dataclass
class CapacityEstimate:
    value: float
    grid: Optional[dict] = None
    iterations: int = 0
    converged: bool = True
    refinement_ratio: Optional[float] = None
    analytic_bounds: Optional[tuple] = None
    method: str = "grid"
    k_nodes: int = 0
    notes: list = field(default_factory=list)

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("capacity must be non-negative")
        if self.analytic_bounds is not None:
            lo, hi = self.analytic_bounds
            if lo > hi:
                raise ValueError("lower bound exceeds upper bound")


def _delta(w: Weight) -> float:
    return 0.0 if w.is_trivial else w.delta


def exact_capacity(c: Condenser, exp: Exponents) -> Optional[float]:
    """Closed-form value when both sets are origin-centred radial sets."""
    return radial_condenser_capacity(c.K, c.G, exp.n, exp.p, _delta(c.weight))


def _masks(c: Condenser, grid: Grid):
    X = grid.nodes().reshape(-1, grid.n)
    k = contains(c.K, X).reshape(grid.shape)
    g = contains(c.G, X).reshape(grid.shape)
    return k, g


def grid_capacity(c: Condenser, grid: Grid, exp: Exponents, tol: float = 1e-10,
                  max_iter: int = 100, seed: Optional[int] = None,
                  refine_check: bool = False) -> CapacityEstimate:
    """Minimise the discrete energy over grid functions equal to 1 on ``K``.

    Nodes of ``K`` are clamped to 1 and nodes outside ``G`` (and the grid's
    outer layer) to 0.  With ``refine_check`` the value on the grid with twice
    the spacing is also computed and the ratio reported.
    """
    if tol <= 0:
        raise ValidationError("tol must be positive")
    if grid.n != exp.n:
        raise ValidationError("grid dimension differs from n")
    kmask, gmask = _masks(c, grid)
    bad = kmask & ~gmask
    if np.any(bad):
        raise GeometryError(f"{int(bad.sum())} grid nodes of K lie outside G")
    nk = int(kmask.sum())
    notes = []
    edge_open = False
    for k in range(grid.n):
        for side in (0, -1):
            idx = [slice(None)] * grid.n
            idx[k] = side
            edge_open |= bool(np.any(gmask[tuple(idx)] & ~kmask[tuple(idx)]))
    if edge_open:
        notes.append("G reaches the grid box; G is truncated to the box")
    exact = None
    try:
        exact = exact_capacity(c, exp)
    except GeometryError:
        pass
    bounds = None if exact is None else (exact, exact)
    if nk == 0:
        return CapacityEstimate(0.0, grid.describe(), 0, True, None, bounds, "grid", 0,
                                notes + ["no grid node lies in K"])
    fixed = kmask | ~gmask
    prob = EnergyProblem(grid, exp.p, c.weight, fixed, kmask.astype(float))
    res = prob.minimize(tol=tol, max_iter=max_iter, seed=seed)
    ratio = None
    if refine_check:
        coarse = grid_capacity(c, grid.coarsen(), exp, tol, max_iter, seed)
        ratio = res.energy / coarse.value if coarse.value > 0 else None
    return CapacityEstimate(max(res.energy, 0.0), grid.describe(), res.iterations,
                            res.converged, ratio, bounds, "grid", nk, notes)


def auto_grid(c: Condenser, n: int, h_rel: float, margin: float = 0.05,
              max_nodes: Optional[int] = None) -> tuple[Grid, float]:
    """Grid over the bounding box of ``G`` with spacing ``h_rel * half-width``.

    Returns the grid and the half-width used as length unit.
    """
    box = bounding_box(c.G, n)
    if box is None:
        raise ValidationError("open set is unbounded; use truncated_capacity")
    lo, hi = box
    half = float(np.max(hi - lo)) / 2
    h = h_rel * half
    pad = margin * half + 2 * h
    kw = {} if max_nodes is None else {"max_nodes": max_nodes}
    return Grid(tuple(lo - pad), tuple(hi + pad), h, **kw), half


def normalized_grid_capacity(c: Condenser, exp: Exponents, h_rel: float = 1 / 64,
                             **kw) -> CapacityEstimate:
    """Grid capacity after scaling ``G`` to unit half-width.

    Capacity scales like ``t^(n + delta - p)`` under ``x -> t x``, so the value
    on the rescaled condenser converts back exactly.
    """
    box = bounding_box(c.G, exp.n)
    if box is None:
        raise ValidationError("open set is unbounded")
    half = float(np.max(box[1] - box[0])) / 2
    t = 1.0 / half
    scaled = Condenser(scale_set(c.K, t), scale_set(c.G, t), c.weight)
    grid, _ = auto_grid(scaled, exp.n, h_rel)
    est = grid_capacity(scaled, grid, exp, **kw)
    factor = t ** -(exp.n + _delta(c.weight) - exp.p)
    est.value *= factor
    if est.analytic_bounds is not None:
        est.analytic_bounds = tuple(b * factor for b in est.analytic_bounds)
    est.notes.append(f"computed at scale {t:.6g}")
    return est


def truncated_capacity(K: SetDescriptor, G: SetDescriptor, exp: Exponents, weight: Weight,
                       radius: float, h_rel: float = 1 / 64, max_doublings: int = 5,
                       rel_change: float = 0.01, **kw) -> CapacityEstimate:
    """Capacity for unbounded ``G`` via ``G ∩ B_R`` with ``R`` doubled until stable.

    The absolute grid spacing ``h_rel * radius`` is kept across doublings so
    that only the truncation changes.  Stops when consecutive values differ by
    less than ``rel_change``; the estimate is flagged as not converged if the
    doubling budget or the grid budget runs out first.
    """
    from .geometry import Ball, Intersection
    prev = None
    R = radius
    est = None
    for k in range(max_doublings + 1):
        cond = Condenser(K, Intersection((G, Ball(tuple([0.0] * exp.n), R))), weight)
        try:
            cur = normalized_grid_capacity(cond, exp, h_rel / 2 ** k, **kw)
        except GridBudgetError:
            if est is None:
                raise
            est.converged = False
            est.notes.append(f"grid budget exhausted at truncation radius {R:g}")
            return est
        est = cur
        if est.k_nodes == 0:
            est.converged = False
            est.notes.append(f"K is not resolved by the grid at truncation radius {R:g}")
            return est
        if prev is not None and abs(est.value - prev) <= rel_change * max(est.value, 1e-300):
            est.notes.append(f"truncation radius {R:g}")
            return est
        prev = est.value
        R *= 2
    est.converged = False
    est.notes.append(f"truncation not stable up to radius {R / 2:g}")
    return est
