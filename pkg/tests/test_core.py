import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hpz.core import (
    FactorAssignment,
    HybridPolynomialZonotope,
    binary_assignments,
    compact,
    constraint_residual,
    empty_set,
    evaluate,
    fix_binaries,
    fold_constants,
    from_box,
    from_constrained_zonotope,
    from_cpz,
    from_hybrid_zonotope,
    from_zonotope,
    is_feasible,
    leaf_cap,
    singleton,
)
from hpz.errors import BudgetExceeded, DimensionMismatch, NegativeExponent, NonIntegerExponent
from hpz.fixtures import CPZ1_G, cpz1, hpz1, hpz2
from hpz.oracle import compare, evaluate_point, random_instance, residual_point
from hpz.sampling import sample


def test_exponent_width_mismatch():
    with pytest.raises(DimensionMismatch):
        HybridPolynomialZonotope([0.0, 0.0], np.ones((2, 3)), E=np.ones((2, 2)))


def test_non_integer_exponent():
    with pytest.raises(NonIntegerExponent):
        HybridPolynomialZonotope([0.0], [[1.0]], E=[[1.5]])


def test_negative_exponent():
    with pytest.raises(NegativeExponent):
        HybridPolynomialZonotope([0.0], [[1.0]], E=[[-1]])


def test_constraint_row_mismatch():
    with pytest.raises(DimensionMismatch):
        HybridPolynomialZonotope([0.0], [[1.0]], A_c=[[1.0]], b=[1.0, 2.0])


def test_singleton_valid():
    Z = singleton([0.0, 0.0])
    assert Z.counts() == {"n": 2, "n_g": 0, "n_b": 0, "n_e": 0, "n_c": 0, "n_q": 0}


def test_example1_sets_valid():
    Z = hpz1()
    assert (Z.n, Z.n_g, Z.n_b, Z.n_e, Z.n_c, Z.n_q) == (2, 4, 3, 3, 1, 3)
    assert hpz2().n_b == 3


def test_immutable():
    Z = cpz1()
    with pytest.raises(AttributeError):
        Z.c = np.ones(2)
    with pytest.raises(ValueError):
        Z.G_c[0, 0] = 5.0


def test_evaluate_singleton():
    Z = singleton([1.0, -2.0])
    assert np.array_equal(evaluate(Z, FactorAssignment([], [])), [1.0, -2.0])


def test_evaluate_square_monomial():
    Z = HybridPolynomialZonotope([1.0, 1.0], [[1.0], [0.0]], E=[[2]])
    assert np.allclose(evaluate(Z, FactorAssignment([0.5], [])), [1.25, 1.0])


def test_zero_power_is_one():
    Z = HybridPolynomialZonotope([0.0], [[1.0, 2.0]], E=[[0, 1]])
    assert evaluate(Z, FactorAssignment([0.0], []))[0] == 1.0


def test_residual_without_constraints():
    r = constraint_residual(from_box([0.0], [1.0]), FactorAssignment([0.3], []))
    assert r.shape == (0,)


def test_assignment_bounds():
    with pytest.raises(ValueError):
        FactorAssignment([1.5], [])
    with pytest.raises(ValueError):
        FactorAssignment([], [0.5])


def test_assignment_size_checked():
    with pytest.raises(DimensionMismatch):
        evaluate(cpz1(), FactorAssignment([0.0], []))


def test_evaluate_matches_scalar_oracle():
    rng = np.random.default_rng(0)
    for _ in range(30):
        Z, _ = random_instance(rng)
        xi_c = rng.uniform(-1, 1, Z.n_e)
        xi_b = rng.choice([-1.0, 1.0], Z.n_b)
        a = FactorAssignment(xi_c, xi_b)
        assert np.allclose(evaluate(Z, a), evaluate_point(Z, xi_c, xi_b), atol=1e-13)
        assert np.allclose(constraint_residual(Z, a), residual_point(Z, xi_c, xi_b), atol=1e-13)


def test_cpz1_feasible_point():
    Z = cpz1()
    # xi = (1, 0, 0) satisfies xi_1 + 2 xi_2 + 0.5 xi_3^3 = 1
    a = FactorAssignment([1.0, 0.0, 0.0], [])
    assert is_feasible(Z, a)
    assert np.allclose(evaluate(Z, a), CPZ1_G[:, 0])


def test_binary_assignments_canonical_order():
    leaves = [tuple(x) for x in binary_assignments(2)]
    assert leaves == [(-1, -1), (-1, 1), (1, -1), (1, 1)]


def test_binary_assignments_cap():
    with pytest.raises(BudgetExceeded):
        list(binary_assignments(5, cap=16))


def test_leaf_cap_env(monkeypatch):
    monkeypatch.setenv("HPZ_LEAF_CAP", "64")
    assert leaf_cap() == 64


def test_fix_binaries_translates():
    Z = hpz1()
    L = fix_binaries(Z, [1.0, -1.0, 1.0])
    assert L.n_b == 0
    assert np.allclose(L.c, Z.G_b @ [1.0, -1.0, 1.0])


def test_compact_merges_equal_exponents():
    Z = HybridPolynomialZonotope([0.0, 0.0], [[2.0, 3.0], [0.0, 0.0]], E=[[1, 1]])
    C = compact(Z)
    assert C.G_c.tolist() == [[5.0], [0.0]]
    assert C.E.tolist() == [[1]]


def test_compact_folds_constants_and_drops_factors():
    Z = HybridPolynomialZonotope([0.0], [[1.0, 2.0, 0.0]], E=[[0, 1, 0], [0, 0, 1]])
    C = compact(Z)
    assert C.c.tolist() == [1.0]
    assert C.n_e == 1 and C.n_g == 1


def test_fold_constants_moves_constraint_constants():
    Z = HybridPolynomialZonotope([0.0], [[1.0]], E=[[1]], A_c=[[1.0, 2.0]], b=[3.0], R=[[1, 0]])
    F = fold_constants(Z)
    assert F.b.tolist() == [1.0] and F.n_q == 1


def test_compact_preserves_set():
    rng = np.random.default_rng(3)
    for _ in range(20):
        Z, _ = random_instance(rng)
        assert compare(sample(Z, 5, 10**5), sample(compact(Z), 5, 10**5)).agree(1e-9)


def test_compact_idempotent():
    rng = np.random.default_rng(4)
    for _ in range(20):
        Z, _ = random_instance(rng)
        C = compact(Z)
        assert compact(C).structurally_equal(C)


def test_zonotope_cloud_is_unit_square():
    pts = sample(from_zonotope([0.0, 0.0], np.eye(2))).points
    assert np.allclose(pts.min(axis=0), -1.0) and np.allclose(pts.max(axis=0), 1.0)
    assert len(pts) == 21**2


def test_hybrid_zonotope_without_binaries_matches_constrained_zonotope():
    G = np.array([[1.0, 0.5, 0.0], [0.0, 1.0, 1.0]])
    A = np.array([[1.0, 1.0, 1.0]])
    H = from_hybrid_zonotope([0.0, 0.0], G, np.zeros((2, 0)), A, np.zeros((1, 0)), [0.5])
    C = from_constrained_zonotope([0.0, 0.0], G, A, [0.5])
    assert H.structurally_equal(C)


def test_cpz1_embedding_has_no_binary_blocks():
    Z = cpz1()
    assert Z.n_b == 0 and Z.A_b.shape == (1, 0)
    assert from_cpz(Z.c, Z.G_c, Z.E, Z.A_c, Z.b, Z.R).structurally_equal(Z)


def test_empty_set():
    Z = empty_set(2)
    assert Z.n == 2 and not is_feasible(Z, FactorAssignment([], []))


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.floats(-1, 1), min_size=2, max_size=2),
    st.lists(st.sampled_from([-1.0, 1.0]), min_size=3, max_size=3),
)
def test_hpz1_point_is_cpz1_point_plus_shift(xi, xi_b):
    # Solve the cubic constraint for xi_1, the other factors given.
    xi2, xi3 = xi
    xi1 = 1.0 - 2.0 * xi2 - 0.5 * xi3**3
    if abs(xi1) > 1.0:
        return
    a = FactorAssignment([xi1, xi2, xi3], xi_b)
    p1 = evaluate(hpz1(), a)
    p0 = evaluate(cpz1(), FactorAssignment([xi1, xi2, xi3], []))
    assert is_feasible(hpz1(), a)
    assert np.allclose(p1 - p0, hpz1().G_b @ np.array(xi_b))
