import numpy as np
import pytest

from hpz.core import from_box, from_zonotope
from hpz.errors import AllModesEmpty, BudgetExceeded, DimensionMismatch
from hpz.feasibility import is_provably_empty
from hpz.fixtures import PWNA_A1, PWNA_D, PWNA_M1, pwna_model
from hpz.nonlinear import QuadraticAffineMap
from hpz.oracle import compare, simulate
from hpz.reach import Mode, Polyhedron, PwnaModel, check_containment, partition, reach, step
from hpz.sampling import sample

BOX = from_box([-1.0, -1.0], [1.0, 1.0])
EVERYWHERE = Polyhedron([[1.0, 0.0]], [100.0])


def affine_model(A, d, X0=BOX, horizon=3, guard=EVERYWHERE):
    return PwnaModel(2, [Mode(guard, QuadraticAffineMap.affine(A, d))], X0, horizon=horizon)


def test_polyhedron_contains():
    P = Polyhedron([[1.0, 0.0], [0.0, 1.0]], [0.0, 1.0])
    assert P.contains([-1.0, 1.0]) and not P.contains([0.1, 0.0])
    assert P.contains(np.array([[-1.0, 0.0], [1.0, 0.0]])).tolist() == [True, False]
    with pytest.raises(DimensionMismatch):
        Polyhedron([[1.0, 0.0]], [0.0, 1.0])


def test_model_validation():
    f = QuadraticAffineMap.affine(np.eye(3), np.zeros(3))
    with pytest.raises(DimensionMismatch):
        PwnaModel(2, [Mode(EVERYWHERE, f)], BOX)
    with pytest.raises(DimensionMismatch):
        PwnaModel(2, [], BOX)


def test_mode_of_lowest_index():
    model = pwna_model()
    assert model.mode_of([0.0, 0.0]) == 0
    assert model.mode_of([0.5, 0.0]) == 1


def test_partition_covering_guard():
    P = partition(BOX, Polyhedron([[1.0, 0.0]], [2.0]))
    assert compare(sample(P), sample(BOX)).hausdorff == 0.0


def test_partition_excluding_guard():
    P = partition(BOX, Polyhedron([[1.0, 0.0]], [-2.0]))
    assert is_provably_empty(P) or sample(P).is_empty


def test_partition_of_pwna_step_one():
    model = pwna_model()
    R1, _, _ = step(model.initial_set, model, 0)
    guard = Polyhedron([[1.0, 0.0]], [0.6])
    P = partition(R1, guard)
    cloud = sample(R1, 41).points
    ref = cloud[cloud[:, 0] <= 0.6 + 1e-9]
    got = sample(P, 41).points
    assert np.all(got[:, 0] <= 0.6 + 1e-9)
    assert compare(got, ref).directed_hausdorff_ba <= 1e-9


def test_affine_single_mode_step():
    A = np.array([[0.5, 0.2], [-0.1, 0.9]])
    d = np.array([1.0, -1.0])
    R1, pieces, info = step(BOX, affine_model(A, d), 0)
    assert info["active_modes"] == [0]
    ref = sample(BOX).points @ A.T + d
    assert compare(sample(R1), ref).hausdorff <= 1e-12


def test_reach_zero_steps():
    res = reach(pwna_model(), steps=0)
    assert len(res.sets) == 1 and res.sets[0].structurally_equal(pwna_model().initial_set)
    assert res.diagnostics[0]["step"] == 0


def test_affine_three_steps_closed_form():
    A = np.array([[0.8, -0.3], [0.3, 0.8]])
    d = np.array([0.1, 0.2])
    res = reach(affine_model(A, d), steps=3)
    X = sample(BOX).points
    for _ in range(3):
        X = X @ A.T + d
    assert compare(res.clouds[3], X).hausdorff <= 1e-12


def test_pwna_step_zero_pushforward():
    model = pwna_model()
    R1, pieces, info = step(model.initial_set, model, 0)
    assert info["active_modes"] == [0] and pieces[1] is None
    X0 = sample(model.initial_set, 101, 20000).points
    assert len(X0) >= 10**4
    ref = np.array([model.modes[model.mode_of(x)].dynamics(x) for x in X0])
    assert compare(sample(R1, 101, 20000), ref).hausdorff <= 1e-12


def test_strictly_inside_one_guard():
    model = pwna_model()
    R1, _, _ = step(model.initial_set, model, 0)
    f = model.modes[0].dynamics
    ref = f(sample(model.initial_set).points)
    assert compare(sample(R1), ref).hausdorff <= 1e-12
    assert R1.n_b == 0


def test_all_modes_empty():
    model = affine_model(np.eye(2), np.zeros(2), guard=Polyhedron([[1.0, 0.0]], [-5.0]))
    with pytest.raises(AllModesEmpty):
        reach(model, steps=1)


def test_budget_exceeded_keeps_partial_result():
    model = pwna_model()
    model.max_generators = 20
    with pytest.raises(BudgetExceeded) as err:
        reach(model)
    assert len(err.value.partial.sets) >= 2


def test_pwna_diagnostics():
    res = reach(pwna_model())
    assert len(res.sets) == 6 and len(res.clouds) == 6
    d = res.diagnostics
    assert [x["step"] for x in d] == list(range(6))
    assert all(x["feasible_leaves"] >= 1 and x["cloud_points"] > 0 for x in d)
    assert {"n_g", "n_b", "n_e", "n_c", "n_q", "step_time", "active_modes"} <= set(d[1])
    assert [x["active_modes"] for x in d[1:]] == [[0], [1], [1], [1], [1]]


def test_pwna_clouds_contain_simulations():
    model = pwna_model()
    res = reach(model)
    rep = check_containment(model, res, n_traj=40, seed=1)
    assert rep.passed and rep.steps == 5


def test_step_one_image_matches_fixture_map():
    model = pwna_model()
    R1, _, _ = step(model.initial_set, model, 0)
    f = QuadraticAffineMap([PWNA_M1, PWNA_M1], PWNA_A1, PWNA_D)
    x = np.array([-0.3, 1.0])
    traj = simulate(model, x, 1)
    assert np.allclose(traj[1], f(x))
    assert compare(sample(R1), f(sample(model.initial_set).points)).hausdorff <= 1e-12
