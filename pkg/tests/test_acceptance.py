"""Acceptance criteria, one test per criterion (or per criterion part).

Each test records a PASS/FAIL line that is printed in the terminal summary.
"""

import itertools
import time

import numpy as np
import pytest

from hpz.core import from_box, from_cpz, from_hybrid_zonotope, singleton
from hpz.fixtures import GB1, cpz1, hpz1, hpz2, pwna_model
from hpz.leaf import leaf_list
from hpz.nonlinear import QuadraticAffineMap, nonlinear_step
from hpz.ops import linear_map, minkowski_sum
from hpz.opscheck import OPERATIONS, SOUND_TOL, run_suite
from hpz.oracle import compare, enumerate_hz, enumerate_set, oracle_op_cloud, random_instance
from hpz.reach import check_containment, reach
from hpz.sampling import sample

GRID, MAXP = 5, 10**6


def test_criterion_1_hybrid_zonotope_reduction(record):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst = 0.0
    ok = True
    for _ in range(50):
        Z, _ = random_instance(rng, linear=True)
        H = from_hybrid_zonotope(Z.c, Z.G_c, Z.G_b, Z.A_c, Z.A_b, Z.b)
        ref = enumerate_hz(Z.c, Z.G_c, Z.G_b, Z.A_c, Z.A_b, Z.b, grid_res=GRID, max_points=MAXP)
        m = compare(sample(H, GRID, MAXP), ref)
        ok &= m.agree(1e-9)
        if not (m.empty_a or m.empty_b):
            worst = max(worst, m.hausdorff)
    for _ in range(50):
        Z, piv = random_instance(rng, n_b=0)
        C = from_cpz(Z.c, Z.G_c, Z.E, Z.A_c, Z.b, Z.R)
        ref = enumerate_set(C, piv, grid_res=GRID, max_points=MAXP).points
        m = compare(sample(C, GRID, MAXP), ref)
        ok &= m.agree(1e-9)
        if not (m.empty_a or m.empty_b):
            worst = max(worst, m.hausdorff)
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60
    record("1 special-case reductions", ok, f"worst dH {worst:.1e}, {elapsed:.1f} s")
    assert ok


@pytest.fixture(scope="module")
def suite():
    t0 = time.perf_counter()
    reports = run_suite(trials=50, seed=0, grid_res=3)
    return reports, time.perf_counter() - t0


def test_criterion_2_operation_identities(record, suite):
    reports, elapsed = suite
    assert [r.op for r in reports] == list(OPERATIONS)
    ok = all(r.trials == 50 and r.cloud_ok == 50 and r.sound_ok == 50 for r in reports) and elapsed < 600
    worst = max(r.worst for r in reports)
    detail = ", ".join(f"{r.op} {r.cloud_ok}/{r.sound_ok}" for r in reports)
    record("2 operation identities", ok, f"worst dH {worst:.1e}, sound tol {SOUND_TOL:g}, {elapsed:.0f} s; {detail}")
    assert ok, detail


def test_criterion_6_size_accounting(record, suite):
    reports, _ = suite
    ok = all(r.sizes_ok == r.trials == 50 for r in reports)
    record("6 size accounting", ok, ", ".join(f"{r.op} {r.sizes_ok}/{r.trials}" for r in reports))
    assert ok


def test_criterion_3a_eight_translates(record):
    t0 = time.perf_counter()
    base = sample(cpz1()).points
    shifts = [GB1 @ np.array(bits) for bits in itertools.product((-1.0, 1.0), repeat=3)]
    ref = np.vstack([base + s for s in shifts])
    m = compare(sample(hpz1()), ref)
    elapsed = time.perf_counter() - t0
    ok = m.agree(1e-9) and elapsed < 60
    record("3a HPZ1 = 8 translates of CPZ1", ok, f"dH {m.hausdorff:.1e}, {elapsed:.1f} s")
    assert ok


def test_criterion_3b_six_nonempty_leaves(record):
    cloud = sample(hpz2())
    n_nonempty = len(set(cloud.leaf.tolist()))
    ok = n_nonempty == 6
    record("3b HPZ2 has exactly 6 non-empty leaves", ok, f"found {n_nonempty}")
    assert ok, f"{n_nonempty} binary leaves of HPZ2 have non-empty clouds"


def test_hpz2_leaf_structure():
    # Companion to 3b: the leaf-by-leaf structure actually found.
    cloud = sample(hpz2())
    ids, counts = np.unique(cloud.leaf, return_counts=True)
    assert ids.tolist() == [1, 2, 3, 4, 5, 6, 7]
    assert counts[-1] == 1
    assert len(leaf_list(hpz2())) == 7


@pytest.fixture(scope="module")
def pwna():
    model = pwna_model()
    t0 = time.perf_counter()
    result = reach(model)
    return model, result, time.perf_counter() - t0


def test_criterion_4a_containment(record, pwna):
    model, result, _ = pwna
    rep = check_containment(model, result, n_traj=1000, seed=0, tol=1e-6)
    record("4a PWNA containment", rep.passed, f"{rep.trajectories} trajectories, misses {len(rep.misses)}, "
           f"worst residual {rep.worst_residual:.1e}")
    assert rep.passed


def test_criterion_4b_guards(record, pwna):
    model, result, _ = pwna
    worst = 0.0
    checked = 0
    for pieces in result.partitions:
        for mode, P in zip(model.modes, pieces):
            if P is None:
                continue
            pts = sample(P).points
            if len(pts):
                worst = max(worst, float(np.max(pts @ mode.guard.L.T - mode.guard.rho)))
                checked += 1
    ok = checked >= len(result.partitions) and worst <= 1e-9
    record("4b PWNA guard handling", ok, f"{checked} pieces, worst violation {worst:.1e}")
    assert ok


def test_criterion_4c_runtime(record, pwna):
    _, result, elapsed = pwna
    ok = elapsed <= 60 and len(result.sets) == 6
    record("4c PWNA runtime", ok, f"{elapsed:.1f} s for 5 steps")
    assert ok


def test_criterion_5_nonlinear_exactness(record):
    f = QuadraticAffineMap([[[1.0]]], [[0.0]], [0.0])
    X = from_box([-1.0], [1.0])
    pts = sample(nonlinear_step(f, X)).points[:, 0]
    grid = sample(X).points
    m_sq = compare(pts[:, None], oracle_op_cloud("nonlinear", [grid], f=f))
    ok_sq = m_sq.agree(1e-9) and abs(pts.min()) <= 1e-9 and abs(pts.max() - 1.0) <= 1e-9

    rng = np.random.default_rng(5)
    worst = 0.0
    ok_aff = True
    for _ in range(50):
        Z, _ = random_instance(rng)
        m = int(rng.integers(1, 4))
        A = rng.uniform(-1.0, 1.0, size=(m, Z.n))
        d = rng.uniform(-1.0, 1.0, size=m)
        g = QuadraticAffineMap.affine(A, d)
        ref = minkowski_sum(linear_map(A, Z), singleton(d))
        mm = compare(sample(nonlinear_step(g, Z), 3, MAXP), sample(ref, 3, MAXP))
        ok_aff &= mm.agree(1e-12)
        if not (mm.empty_a or mm.empty_b):
            worst = max(worst, mm.hausdorff)
    ok = ok_sq and ok_aff
    record("5 nonlinear-map exactness", ok, f"x^2 dH {m_sq.hausdorff:.1e}, affine worst dH {worst:.1e}")
    assert ok
