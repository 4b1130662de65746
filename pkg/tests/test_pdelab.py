import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wienerinf.families import Example71
from wienerinf.geometry import Ball, Exponents, Intersection, Inverted, ValidationError, Weight
from wienerinf.pdelab import (INCONCLUSIVE, IRREGULAR, REGULAR, DirichletProblem,
                              annulus_problem, inversion_roundtrip, probe_regularity,
                              punctured_disk, radial_dirichlet_1d, refinement_verdict,
                              solve_dirichlet)
from wienerinf.radial import radial_profile
from wienerinf.solver import Grid

E22, E23 = Exponents(2, 2), Exponents(2, 3)


def disk_problem(h, data, exp=E22):
    g = Grid((-1 - 2 * h,) * 2, (1 + 2 * h,) * 2, h)
    return DirichletProblem.from_set(g, Ball((0, 0), 1), data, exp)


def smooth_data(X):
    return np.sin(2 * X[:, 0]) + X[:, 1] ** 2


def inside_values(sol):
    return sol.u[sol.problem.inside]


@pytest.mark.parametrize("exp", [E22, E23])
def test_constant_data_gives_constant_solution(exp):
    sol = solve_dirichlet(disk_problem(1 / 32, lambda X: np.full(len(X), 0.7), exp))
    np.testing.assert_allclose(inside_values(sol), 0.7, atol=1e-10)


def test_annulus_matches_log_profile():
    prob = annulus_problem(0.25, 1, 1 / 128, E22)
    sol = solve_dirichlet(prob)
    X = prob.grid.nodes()[prob.inside]
    r = np.linalg.norm(X, axis=-1)
    assert np.max(np.abs(sol.u[prob.inside] - np.log(1 / r) / np.log(4))) < 0.02


def test_radial_oracle_matches_closed_form():
    t = np.linspace(0.25, 1, 50)
    for p, delta in ((2.0, 0.0), (3.0, 2.0), (2.5, 1.0)):
        f = radial_dirichlet_1d(0.25, 1, 2, p, delta)
        np.testing.assert_allclose(f(t), radial_profile(t, 0.25, 1, 2, p, delta), atol=1e-8)


def test_weighted_annulus_monotone_energy():
    prob = annulus_problem(0.25, 1, 1 / 64, E23, Weight.power(2.0))
    sol = solve_dirichlet(prob)
    assert np.all(np.diff(sol.history) <= 0)
    X = prob.grid.nodes()[prob.inside]
    f = radial_dirichlet_1d(0.25, 1, 2, 3.0, 2.0)
    assert np.max(np.abs(sol.u[prob.inside] - f(np.linalg.norm(X, axis=-1)))) < 0.05


@settings(max_examples=10)
@given(st.floats(-1, 1), st.floats(0, 1), st.sampled_from([2.0, 3.0]))
def test_comparison_and_maximum_principles(shift, bump, p):
    e = Exponents(2, p)
    f = smooth_data

    def g(X):
        return f(X) + shift ** 2 + bump * (X[:, 0] > 0)

    sf = solve_dirichlet(disk_problem(1 / 32, f, e))
    sg = solve_dirichlet(disk_problem(1 / 32, g, e))
    assert np.all(sf.u <= sg.u + 1e-9)
    for s in (sf, sg):
        lo, hi = s.problem.data_range
        v = inside_values(s)
        assert v.min() >= lo - 1e-9 and v.max() <= hi + 1e-9


@settings(max_examples=10)
@given(st.integers(0, 2 ** 16), st.sampled_from([2.0, 3.0]))
def test_energy_optimality(seed, p):
    prob = disk_problem(1 / 32, smooth_data, Exponents(2, p))
    sol = solve_dirichlet(prob)
    ep = prob.energy_problem()
    E0 = ep.energy(sol.u)
    idx = np.flatnonzero(prob.inside.ravel())
    k = np.random.default_rng(seed).choice(idx)
    for d in (1e-3, -1e-3):
        v = sol.u.copy().ravel()
        v[k] += d
        assert ep.energy(v.reshape(sol.u.shape)) > E0


def test_inversion_roundtrip():
    def data(X):
        r = np.linalg.norm(X, axis=-1)
        c, s = X[:, 0] / np.maximum(r, 1e-300), X[:, 1] / np.maximum(r, 1e-300)
        return np.where(r < 1, c, 0.5 * s + 0.5)
    rt = inversion_roundtrip(0.5, 2, 1 / 64, E22, data)
    assert rt.relative < 0.03


def test_regular_disk_point():
    radii = [0.25, 0.125, 0.0625, 0.03125]
    probes = []
    for h in (1 / 128, 1 / 256):
        sol = solve_dirichlet(disk_problem(h, lambda X: X[:, 0]))
        probes.append(probe_regularity(sol, (1, 0), radii, 1.0))
    # linear data: the deviation in B_r is about r
    assert probes[-1].deviations[-1] <= 1.1 * radii[-1]
    assert all(np.diff(probes[-1].deviations) <= 0)
    assert refinement_verdict(probes) == REGULAR
    assert probes[-1].metadata()["threshold"] == pytest.approx(0.02)


def chi(X):
    return (np.linalg.norm(X, axis=-1) < 0.5).astype(float)


def test_puncture_is_ignored():
    radii = [0.25, 0.125, 0.0625]
    probes = [probe_regularity(solve_dirichlet(punctured_disk(h, E22, chi)), (0, 0), radii, 1.0)
              for h in (1 / 32, 1 / 64, 1 / 128)]
    assert refinement_verdict(probes) == IRREGULAR


def test_inverted_sparse_balls_at_origin():
    dom = Intersection((Inverted(Example71(2).descriptor()), Ball((0, 0), 1)))
    probes = []
    for h in (1 / 32, 1 / 64):
        g = Grid((-1 - 2 * h,) * 2, (1 + 2 * h,) * 2, h)
        sol = solve_dirichlet(DirichletProblem.from_set(g, dom, chi, E22))
        probes.append(probe_regularity(sol, (0, 0), [0.25, 0.125, 0.0625], 1.0))
    assert refinement_verdict(probes) == IRREGULAR
    assert probes[1].deviations[-1] >= probes[0].deviations[-1]


def test_verdict_needs_refinement():
    sol = solve_dirichlet(disk_problem(1 / 32, lambda X: X[:, 0]))
    pr = probe_regularity(sol, (1, 0), [0.25, 0.125], 1.0)
    with pytest.raises(ValidationError):
        refinement_verdict([pr])
    with pytest.raises(ValidationError):
        probe_regularity(sol, (1, 0), [0.25, 1 / 64])
    assert INCONCLUSIVE not in (REGULAR, IRREGULAR)


def test_problem_validation():
    g = Grid((-1, -1), (1, 1), 0.25)
    with pytest.raises(ValidationError):
        DirichletProblem.from_set(g, Ball((0, 0), 2), lambda X: X[:, 0], E22)
    with pytest.raises(ValidationError):
        solve_dirichlet(disk_problem(1 / 16, lambda X: X[:, 0], Exponents(2, 1.5)))
