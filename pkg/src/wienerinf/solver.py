"""Discrete weighted p-energy on a uniform node grid and its minimiser.

Each grid cell carries the average of ``|g|^p`` over its ``2^n`` corners, where
``g`` is the one-sided difference gradient along the cell edges meeting at that
corner, multiplied by the weight at the cell centre and by the cell volume.
For ``p = 2`` this reproduces the five-point (seven-point in 3-D) Laplacian.

The energy is convex and twice differentiable for ``p >= 2``.  It is minimised
by damped Newton steps with an Armijo backtracking line search, so the energy
never increases.  Linear systems are solved directly for small problems and
by smoothed-aggregation multigrid preconditioned CG otherwise.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .geometry import ValidationError, Weight

log = logging.getLogger(__name__)

__all__ = ["Grid", "GridBudgetError", "NotConverged", "EnergyProblem", "MinimizeResult"]

DEFAULT_MAX_NODES = 6_000_000
DIRECT_LIMIT = 150_000


class GridBudgetError(MemoryError):
    """The requested grid exceeds the node budget."""


class NotConverged(RuntimeError):
    def __init__(self, iterations: int, last_decrease: float, result=None):
        self.iterations = iterations
        self.last_decrease = last_decrease
        self.result = result
        super().__init__(f"not converged after {iterations} iterations "
                         f"(last relative decrease {last_decrease:.3g})")


@dataclass(frozen=True)
class Grid:
    """Uniform node grid ``lo + h*i`` covering the box ``[lo, hi]``."""
    lo: tuple
    hi: tuple
    h: float
    max_nodes: int = DEFAULT_MAX_NODES

    def __post_init__(self):
        if not self.h > 0:
            raise ValidationError("grid spacing must be positive")
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or any(b <= a for a, b in zip(lo, hi)):
            raise ValidationError("grid box must have hi > lo in every axis")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if self.size > self.max_nodes:
            raise GridBudgetError(f"grid with {self.size} nodes exceeds budget {self.max_nodes}")

    @classmethod
    def cube(cls, half_width: float, h: float, n: int, center=None, **kw) -> "Grid":
        c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
        return cls(tuple(c - half_width), tuple(c + half_width), h, **kw)

    @property
    def n(self) -> int:
        return len(self.lo)

    @property
    def shape(self) -> tuple:
        return tuple(int(math.ceil((b - a) / self.h - 1e-9)) + 1 for a, b in zip(self.lo, self.hi))

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def axes(self) -> list[np.ndarray]:
        return [a + self.h * np.arange(m) for a, m in zip(self.lo, self.shape)]

    def nodes(self) -> np.ndarray:
        """Node coordinates, shape ``shape + (n,)``."""
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    def cell_centers(self) -> np.ndarray:
        ax = [x[:-1] + self.h / 2 for x in self.axes()]
        return np.stack(np.meshgrid(*ax, indexing="ij"), axis=-1)

    def coarsen(self) -> "Grid":
        return Grid(self.lo, self.hi, 2 * self.h, self.max_nodes)

    def refine(self) -> "Grid":
        return Grid(self.lo, self.hi, self.h / 2, self.max_nodes)

    def describe(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "h": self.h, "shape": self.shape}


@dataclass
class MinimizeResult:
    u: np.ndarray
    energy: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list)


def _sl(offsets, shape_minus):
    return tuple(slice(o, o + m) for o, m in zip(offsets, shape_minus))


class EnergyProblem:
    """``E(u) = sum_cells w h^n mean_corners |grad u|^p - h^n sum_i f_i u_i``.

    ``fixed`` marks nodes whose value is prescribed by ``values``; the grid
    boundary layer is always fixed.
    """

    def __init__(self, grid: Grid, p: float, weight: Weight, fixed: np.ndarray,
                 values: np.ndarray, source: Optional[np.ndarray] = None):
        if not p > 1:
            raise ValidationError("p must exceed 1")
        self.grid = grid
        self.p = float(p)
        self.n = grid.n
        self.shape = grid.shape
        fixed = np.array(fixed, dtype=bool)
        edge = np.zeros(self.shape, dtype=bool)
        for k in range(self.n):
            idx = [slice(None)] * self.n
            idx[k] = 0
            edge[tuple(idx)] = True
            idx[k] = -1
            edge[tuple(idx)] = True
        fixed |= edge
        self.fixed = fixed
        self.values = np.where(fixed, values, 0.0).astype(float)
        self.source = None if source is None else np.asarray(source, dtype=float)
        self.cw = weight(grid.cell_centers())
        self.scale = grid.h ** (self.n - self.p) / 2 ** self.n
        self.corners = list(itertools.product((0, 1), repeat=self.n))
        self.cshape = tuple(m - 1 for m in self.shape)
        flat = np.flatnonzero(~fixed.ravel())
        self.free = flat
        self.index = np.full(fixed.size, -1, dtype=np.int64)
        self.index[flat] = np.arange(flat.size)
        self._ml = None

    # ------------------------------------------------------------ pieces
    def _diffs(self, u):
        return [np.diff(u, axis=k) for k in range(self.n)]

    def _corner_grads(self, D, s):
        return [D[k][_sl(tuple(0 if j == k else s[j] for j in range(self.n)), self.cshape)]
                for k in range(self.n)]

    def energy(self, u: np.ndarray) -> float:
        D = self._diffs(u)
        tot = 0.0
        for s in self.corners:
            g = self._corner_grads(D, s)
            g2 = sum(x * x for x in g)
            tot += float(np.sum(self.cw * g2 ** (self.p / 2)))
        e = self.scale * tot
        if self.source is not None:
            e -= self.grid.h ** self.n * float(np.sum(self.source * u))
        return e

    def gradient(self, u: np.ndarray) -> np.ndarray:
        D = self._diffs(u)
        dD = [np.zeros_like(d) for d in D]
        for s in self.corners:
            g = self._corner_grads(D, s)
            g2 = sum(x * x for x in g)
            if self.p == 2:
                c = self.cw * 2.0
            else:
                # |g|^p has zero gradient at g = 0 for every p > 1
                with np.errstate(divide="ignore"):
                    c = np.where(g2 > 0, self.cw * self.p * g2 ** (self.p / 2 - 1), 0.0)
            for k in range(self.n):
                dD[k][_sl(tuple(0 if j == k else s[j] for j in range(self.n)), self.cshape)] += c * g[k]
        gu = np.zeros(self.shape)
        for k in range(self.n):
            a = [slice(None)] * self.n
            b = [slice(None)] * self.n
            a[k] = slice(1, None)
            b[k] = slice(None, -1)
            gu[tuple(a)] += dD[k]
            gu[tuple(b)] -= dD[k]
        gu *= self.scale
        if self.source is not None:
            gu -= self.grid.h ** self.n * self.source
        return gu

    def hessian(self, u: np.ndarray, p_override: Optional[float] = None) -> sp.csr_matrix:
        """Free-node Hessian (regularised where the gradient vanishes)."""
        p = self.p if p_override is None else p_override
        D = self._diffs(u)
        n = self.n
        offsets = list(itertools.product((-1, 0, 1), repeat=n))
        stencil = {o: np.zeros(self.shape) for o in offsets}
        gmax = max(float(np.max(np.abs(d))) if d.size else 0.0 for d in D)
        eps2 = (1e-6 * gmax) ** 2 + 1e-300
        for s in self.corners:
            if p == 2:
                g = None
                base = 2.0 * self.cw
            else:
                g = self._corner_grads(D, s)
                a2 = sum(x * x for x in g) + eps2
                base = self.cw * p * a2 ** (p / 2 - 1)
            for k in range(n):
                for l in range(n):
                    if p == 2:
                        if k != l:
                            continue
                        coef = base
                    else:
                        coef = base * ((1.0 if k == l else 0.0) + (p - 2) * g[k] * g[l] / a2)
                    for pk, sk in ((1, 1.0), (0, -1.0)):
                        P = list(s)
                        P[k] = pk
                        for pl, sl_ in ((1, 1.0), (0, -1.0)):
                            Q = list(s)
                            Q[l] = pl
                            off = tuple(q - r for q, r in zip(Q, P))
                            stencil[off][_sl(P, self.cshape)] += sk * sl_ * coef
        strides = np.cumprod((1,) + self.shape[::-1])[:-1][::-1]
        nf = self.free.size
        order = sorted(offsets, key=lambda o: int(np.dot(o, strides)))
        data = np.empty((nf, len(order)))
        cols = np.empty((nf, len(order)), dtype=np.int64)
        for i, o in enumerate(order):
            nbr = self.free + int(np.dot(o, strides))
            data[:, i] = stencil[o].ravel()[self.free]
            cols[:, i] = self.index[nbr]
        del stencil
        keep = (cols >= 0) & (data != 0)
        indptr = np.concatenate(([0], np.cumsum(keep.sum(axis=1))))
        scale = self.grid.h ** (n - p) / 2 ** n
        H = sp.csr_matrix((data[keep] * scale, cols[keep], indptr), shape=(nf, nf))
        return H

    # ------------------------------------------------------------ solver
    def _solve(self, H: sp.csr_matrix, b: np.ndarray) -> np.ndarray:
        if H.shape[0] <= DIRECT_LIMIT:
            return spla.spsolve(H.tocsc(), b)
        import pyamg
        for attempt in range(2):
            if self._ml is None:
                self._ml = pyamg.smoothed_aggregation_solver(H, symmetry="symmetric", max_coarse=500)
            count = [0]

            def cb(_):
                count[0] += 1

            x, info = spla.cg(H, b, rtol=1e-9, atol=0.0, maxiter=300,
                              M=self._ml.aspreconditioner(cycle="V"), callback=cb)
            if info == 0 and count[0] <= 60:
                return x
            # stale hierarchy from an earlier Newton step; rebuild once
            self._ml = None
            if info == 0:
                return x
        return x

    def initial(self, seed: Optional[int] = None) -> np.ndarray:
        u = self.values.copy()
        if self.free.size == 0:
            return u
        if seed is not None:
            rng = np.random.default_rng(seed)
            u.ravel()[self.free] = rng.uniform(0.0, 1.0, self.free.size)
            return u
        if self.p == 2:
            return u
        # quadratic (p = 2) problem as warm start; one linear solve
        g = self.gradient_p2(u)
        H = self.hessian(u, p_override=2.0)
        u.ravel()[self.free] -= self._solve(H, g.ravel()[self.free])
        return u

    def gradient_p2(self, u):
        saved = self.p, self.scale
        self.p = 2.0
        self.scale = self.grid.h ** (self.n - 2) / 2 ** self.n
        try:
            g = self.gradient(u)
        finally:
            self.p, self.scale = saved
        return g

    def minimize(self, tol: float = 1e-10, max_iter: int = 100, seed: Optional[int] = None,
                 u0: Optional[np.ndarray] = None, raise_on_fail: bool = True) -> MinimizeResult:
        u = self.initial(seed) if u0 is None else np.where(self.fixed, self.values, u0)
        E = self.energy(u)
        history = [E]
        if self.free.size == 0:
            return MinimizeResult(u, E, 0, True, history)
        last_dec = math.inf
        for it in range(1, max_iter + 1):
            g = self.gradient(u).ravel()[self.free]
            H = self.hessian(u)
            d = -self._solve(H, g)
            slope = float(g @ d)
            if slope >= 0:  # inexact solve; fall back to steepest descent
                d = -g
                slope = float(g @ d)
            decrement = -slope
            t = 1.0
            while True:
                v = u.copy()
                v.ravel()[self.free] += t * d
                Ev = self.energy(v)
                if Ev <= E + 1e-4 * t * slope or t < 1e-12:
                    break
                t *= 0.5
            if Ev > E:  # no descent possible at machine precision
                history.append(E)
                return MinimizeResult(u, E, it, True, history)
            last_dec = (E - Ev) / max(abs(Ev), 1e-300)
            u, E = v, Ev
            history.append(E)
            if self.p == 2 and t == 1.0:
                # quadratic energy: a full Newton step is the exact minimiser
                return MinimizeResult(u, E, it, True, history)
            if decrement / 2 <= tol * max(abs(E), 1e-300) or last_dec <= tol * 1e-2:
                return MinimizeResult(u, E, it, True, history)
        res = MinimizeResult(u, E, max_iter, False, history)
        if raise_on_fail:
            raise NotConverged(max_iter, last_dec, res)
        return res
