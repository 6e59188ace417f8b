"""Randomized oracle-equivalence suite for the set operations.

Every trial draws random operands, builds the result with :mod:`hpz.ops`
(or :mod:`hpz.nonlinear`) and checks three things:

* the sampled cloud of the result against the oracle's set semantics applied
  to directly enumerated operand clouds (directed Hausdorff both ways),
* the block dimensions of the result against the closed-form counts,
* constructive soundness: feasible operand assignments mapped by the
  explicit lifting of each construction stay feasible and evaluate to the
  expected point.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from hpz.core import FactorAssignment, compact, constraint_residual, evaluate
from hpz.nonlinear import QuadraticAffineMap, nonlinear_step
from hpz.ops import (
    Halfspace,
    cartesian_product,
    generalized_intersection,
    halfspace_intersection,
    linear_map,
    minkowski_sum,
    support_lower,
    union,
)
from hpz.oracle import compare, enumerate_set, evaluate_point, oracle_op_cloud, random_instance
from hpz.sampling import sample

OPERATIONS = ("linear_map", "minkowski_sum", "cartesian_product", "generalized_intersection",
              "halfspace_intersection", "union", "compact", "nonlinear_step")
TOLERANCE = {"compact": 1e-9}
SOUND_TOL = 1e-12
MAX_LIFTS = 5


@dataclass
class OpReport:
    """Aggregated outcome of one operation over all trials."""

    op: str
    trials: int = 0
    cloud_ok: int = 0
    sizes_ok: int = 0
    sound_ok: int = 0
    empty_both: int = 0
    worst: float = 0.0
    seconds: float = 0.0
    failures: list = field(default_factory=list)

    @property
    def passed(self):
        return self.trials > 0 and self.cloud_ok == self.sizes_ok == self.sound_ok == self.trials


def _counts(Z):
    return (Z.n, Z.n_g, Z.n_b, Z.n_e, Z.n_c, Z.n_q)


def expected_counts(op, Z1, Z2=None, m=None):
    """Closed-form block dimensions ``(n, n_g, n_b, n_e, n_c, n_q)`` of a result."""
    if op == "linear_map":
        return (m, Z1.n_g, Z1.n_b, Z1.n_e, Z1.n_c, Z1.n_q)
    if op in ("minkowski_sum", "cartesian_product"):
        n = Z1.n if op == "minkowski_sum" else Z1.n + Z2.n
        return (n, Z1.n_g + Z2.n_g, Z1.n_b + Z2.n_b, Z1.n_e + Z2.n_e, Z1.n_c + Z2.n_c, Z1.n_q + Z2.n_q)
    if op == "generalized_intersection":
        return (Z1.n, Z1.n_g + Z2.n_e, Z1.n_b + Z2.n_b, Z1.n_e + Z2.n_e,
                Z1.n_c + Z2.n_c + Z1.n, Z1.n_q + Z2.n_q + Z1.n_g + Z2.n_g)
    if op == "halfspace_intersection":
        return (Z1.n, Z1.n_g + 1, Z1.n_b, Z1.n_e + 1, Z1.n_c + 1, Z1.n_q + Z1.n_g + 1)
    if op == "union":
        nr = 2 * (Z1.n_e + Z2.n_e + Z1.n_b + Z2.n_b)
        return (Z1.n, Z1.n_g + Z2.n_g + nr, Z1.n_b + Z2.n_b + 1, Z1.n_e + Z2.n_e + nr,
                Z1.n_c + Z2.n_c + nr, Z1.n_q + Z2.n_q + Z1.n_e + Z2.n_e + nr)
    raise ValueError(op)


def _lifts(enum, rng):
    k = enum.points.shape[0]
    idx = rng.choice(k, size=min(k, MAX_LIFTS), replace=False) if k else []
    return [(enum.xi_c[i], enum.xi_b[i], enum.points[i]) for i in idx]


def _check(Z, xi_c, xi_b, expected):
    a = FactorAssignment(np.clip(xi_c, -1.0, 1.0), xi_b)
    res = constraint_residual(Z, a)
    ok = (res.size == 0 or np.max(np.abs(res)) <= SOUND_TOL) and np.max(np.abs(evaluate(Z, a) - expected)) <= SOUND_TOL
    return bool(ok) and np.all(np.abs(xi_c) <= 1.0 + SOUND_TOL)


def _union_lift(U, xi_c, xi_b, expected):
    """Complete the coupling slacks of a union assignment and check it."""
    nr = U.n_c
    xi_c = np.asarray(xi_c, dtype=float)
    full = np.concatenate([xi_c, np.zeros(U.n_e - xi_c.size)])
    r = constraint_residual(U, FactorAssignment(full, xi_b))
    n_slack = U.n_e - xi_c.size
    full[xi_c.size:] = -r[nr - n_slack:]
    if np.any(np.abs(full) > 1.0 + SOUND_TOL):
        return False
    return _check(U, full, xi_b, expected)


def _sound(op, R, lifts1, lifts2, Z1, Z2=None, extra=None):
    ok = True
    if op == "linear_map":
        for xc, xb, p in lifts1:
            ok &= _check(R, xc, xb, extra @ p)
    elif op in ("minkowski_sum", "cartesian_product"):
        for (xc1, xb1, p1), (xc2, xb2, p2) in zip(lifts1, lifts2):
            expected = p1 + p2 if op == "minkowski_sum" else np.concatenate([p1, p2])
            ok &= _check(R, np.concatenate([xc1, xc2]), np.concatenate([xb1, xb2]), expected)
    elif op == "generalized_intersection":
        for xc, xb, p in lifts1:
            ok &= _check(R, np.concatenate([xc, xc]), np.concatenate([xb, xb]), p)
    elif op == "halfspace_intersection":
        h, rho = extra
        l_m = support_lower(Z1, h)
        for xc, xb, p in lifts1:
            if h @ p > rho:
                continue
            xf = (2 * (h @ p) - rho - l_m) / (rho - l_m) if rho > l_m else 0.0
            ok &= _check(R, np.concatenate([xc, [xf]]), xb, p)
    elif op == "union":
        for xc, xb, p in lifts1:
            ok &= _union_lift(R, np.concatenate([xc, np.zeros(Z2.n_e)]),
                              np.concatenate([xb, -np.ones(Z2.n_b), [1.0]]), p)
        for xc, xb, p in lifts2:
            ok &= _union_lift(R, np.concatenate([np.zeros(Z1.n_e), xc]),
                              np.concatenate([-np.ones(Z1.n_b), xb, [-1.0]]), p)
    return bool(ok)


def _intersection_operand(rng, n, P1):
    """A full-dimensional hybrid zonotope placed on a point of ``P1``."""
    n_c = int(rng.integers(0, 2)) if n < 3 else 0
    n_g = min(4, n + n_c + int(rng.integers(0, 2)))
    W, _ = random_instance(rng, n=n, n_g=n_g, n_b=int(rng.integers(0, 2)), n_c=n_c, linear=True)
    if len(P1):
        anchor = evaluate_point(W, np.zeros(W.n_e), -np.ones(W.n_b))
        W = W.replace(c=W.c + P1[rng.integers(len(P1))] - anchor)
    return W


def run_trial(op, rng, grid_res=3, max_points=10**6):
    """One randomized trial; returns ``(cloud_ok, sizes_ok, sound_ok, distance, both_empty)``."""
    n = int(rng.integers(1, 4))
    Z1, piv1 = random_instance(rng, n=n)
    Z2, piv2 = random_instance(rng, n=n)
    e1 = enumerate_set(Z1, piv1, grid_res, max_points)
    e2 = enumerate_set(Z2, piv2, grid_res, max_points)
    P1, P2 = e1.points, e2.points
    lifts1, lifts2 = _lifts(e1, rng), _lifts(e2, rng)
    sizes_ok, sound_ok = True, True

    if op == "linear_map":
        m = int(rng.integers(1, 4))
        M = rng.uniform(-1.0, 1.0, size=(m, n))
        R = linear_map(M, Z1)
        oracle = oracle_op_cloud("linear_map", [P1], M=M)
        sizes_ok = _counts(R) == expected_counts(op, Z1, m=m)
        sound_ok = _sound(op, R, lifts1, lifts2, Z1, extra=M)
    elif op in ("minkowski_sum", "cartesian_product"):
        if op == "cartesian_product":
            Z2, piv2 = random_instance(rng, n=int(rng.integers(1, 3)))
            e2 = enumerate_set(Z2, piv2, grid_res, max_points)
            P2, lifts2 = e2.points, _lifts(e2, rng)
        R = minkowski_sum(Z1, Z2) if op == "minkowski_sum" else cartesian_product(Z1, Z2)
        oracle = oracle_op_cloud("sum" if op == "minkowski_sum" else "product", [P1, P2])
        sizes_ok = _counts(R) == expected_counts(op, Z1, Z2)
        sound_ok = _sound(op, R, lifts1, lifts2, Z1, Z2)
    elif op == "generalized_intersection":
        W = _intersection_operand(rng, n, P1)
        R = generalized_intersection(Z1, W)
        oracle = oracle_op_cloud("intersection", [P1, W])
        sizes_ok = _counts(R) == expected_counts(op, Z1, W)
        sound_ok = _sound(op, generalized_intersection(Z1, Z1), lifts1, lifts2, Z1)
    elif op == "halfspace_intersection":
        l = rng.normal(size=n)
        rho = float(l @ (P1[rng.integers(len(P1))] if len(P1) else Z1.c))
        R = halfspace_intersection(Z1, Halfspace(l, rho))
        oracle = oracle_op_cloud("halfspace", [P1], l=l, rho=rho)
        sizes_ok = _counts(R) == expected_counts(op, Z1)
        sound_ok = _sound(op, R, lifts1, lifts2, Z1, extra=(l, rho))
    elif op == "union":
        R = union(Z1, Z2)
        oracle = oracle_op_cloud("union", [P1, P2])
        sizes_ok = _counts(R) == expected_counts(op, Z1, Z2)
        sound_ok = _sound(op, R, lifts1, lifts2, Z1, Z2)
    elif op == "compact":
        R = compact(Z1)
        oracle = P1
        sizes_ok = R.n_g <= Z1.n_g and R.n_e <= Z1.n_e and R.n_q <= Z1.n_q
        sound_ok = compact(R).structurally_equal(R)
    elif op == "nonlinear_step":
        Q = [rng.uniform(-0.5, 0.5, size=(n, n)) for _ in range(n)]
        f = QuadraticAffineMap(Q, rng.uniform(-1.0, 1.0, size=(n, n)), rng.uniform(-1.0, 1.0, size=n))
        R = nonlinear_step(f, Z1)
        oracle = oracle_op_cloud("nonlinear", [P1], f=f)
    else:
        raise ValueError(f"unknown operation {op!r}")

    cloud = sample(R, grid_res=grid_res, max_points=max_points).points
    metrics = compare(cloud, oracle)
    tol = TOLERANCE.get(op, 1e-6)
    both_empty = metrics.empty_a and metrics.empty_b
    dist = 0.0 if (metrics.empty_a or metrics.empty_b) else metrics.hausdorff
    return metrics.agree(tol), bool(sizes_ok), bool(sound_ok), dist, both_empty


def run_suite(trials=50, seed=0, grid_res=3, ops=OPERATIONS):
    """Run ``trials`` randomized trials per operation; returns a list of :class:`OpReport`."""
    reports = []
    for k, op in enumerate(ops):
        rng = np.random.default_rng([seed, k])
        rep = OpReport(op)
        t0 = time.perf_counter()
        for t in range(trials):
            cloud_ok, sizes_ok, sound_ok, dist, both_empty = run_trial(op, rng, grid_res)
            rep.trials += 1
            rep.cloud_ok += cloud_ok
            rep.sizes_ok += sizes_ok
            rep.sound_ok += sound_ok
            rep.empty_both += both_empty
            rep.worst = max(rep.worst, dist)
            if not (cloud_ok and sizes_ok and sound_ok):
                rep.failures.append(t)
        rep.seconds = time.perf_counter() - t0
        reports.append(rep)
    return reports


def format_table(reports):
    head = f"{'operation':<26}{'trials':>7}{'cloud':>7}{'sizes':>7}{'sound':>7}{'worst dH':>12}{'time s':>8}  result"
    rows = [head, "-" * len(head)]
    for r in reports:
        rows.append(
            f"{r.op:<26}{r.trials:>7}{r.cloud_ok:>7}{r.sizes_ok:>7}{r.sound_ok:>7}"
            f"{r.worst:>12.2e}{r.seconds:>8.2f}  {'PASS' if r.passed else 'FAIL'}"
        )
    return "\n".join(rows)
