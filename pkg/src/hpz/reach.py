"""Forward reachability for discrete-time piecewise quadratic systems.

Each step intersects the current set with every mode's guard, pushes the
non-empty pieces through the mode dynamics and unites the images.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from hpz.core import HybridPolynomialZonotope, compact, leaf_cap
from hpz.errors import AllModesEmpty, BudgetExceeded, DimensionMismatch, HPZError
from hpz.feasibility import is_provably_empty
from hpz.leaf import leaf_list
from hpz.nonlinear import QuadraticAffineMap, nonlinear_step
from hpz.ops import Halfspace, cartesian_product, halfspace_intersection, support_upper, union_all
from hpz.sampling import DEFAULT_GRID_RES, DEFAULT_MAX_POINTS, sample


@dataclass(frozen=True)
class Polyhedron:
    """Closed polyhedron ``{x : L x <= rho}``."""

    L: np.ndarray
    rho: np.ndarray

    def __post_init__(self):
        L = np.atleast_2d(np.asarray(self.L, dtype=float))
        rho = np.asarray(self.rho, dtype=float).reshape(-1)
        if L.shape[0] != rho.size:
            raise DimensionMismatch(f"L has {L.shape[0]} rows, rho has length {rho.size}")
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "rho", rho)

    def contains(self, x, tol=0.0):
        """Row-wise membership test for points ``x`` of shape ``(n,)`` or ``(P, n)``."""
        x = np.asarray(x, dtype=float)
        ok = np.all(np.atleast_2d(x) @ self.L.T <= self.rho + tol, axis=1)
        return bool(ok[0]) if x.ndim == 1 else ok


@dataclass(frozen=True)
class Mode:
    guard: Polyhedron
    dynamics: QuadraticAffineMap


@dataclass
class PwnaModel:
    """Piecewise quadratic-affine model with polyhedral guards.

    ``input_set``, when given, is the same set ``U`` at every step; the
    dynamics of each mode then act on ``(x, u)``.
    """

    state_dim: int
    modes: list
    initial_set: HybridPolynomialZonotope
    input_set: HybridPolynomialZonotope = None
    horizon: int = 5
    sampling: dict = field(default_factory=dict)
    max_generators: int = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        n = self.state_dim
        if not self.modes:
            raise DimensionMismatch("model has no modes")
        if self.initial_set.n != n:
            raise DimensionMismatch(f"initial set has dimension {self.initial_set.n}, state_dim is {n}")
        n_u = 0 if self.input_set is None else self.input_set.n
        for i, mode in enumerate(self.modes):
            if mode.guard.L.shape[1] != n:
                raise DimensionMismatch(f"mode {i}: guard has {mode.guard.L.shape[1]} columns, expected {n}")
            f = mode.dynamics
            if f.n_out != n or f.n_in != n + n_u:
                raise DimensionMismatch(
                    f"mode {i}: dynamics map R^{f.n_in} -> R^{f.n_out}, expected R^{n + n_u} -> R^{n}"
                )

    def mode_of(self, x, tol=0.0):
        """Index of the first mode whose guard contains ``x``, or ``None``."""
        for i, mode in enumerate(self.modes):
            if mode.guard.contains(x, tol):
                return i
        return None


@dataclass
class ReachResult:
    """Reachable sets ``R_0 .. R_N`` with their clouds and per-step diagnostics.

    ``partitions[k]`` lists, per mode, the guard-intersected piece of
    ``R_k`` (``None`` when the piece was proven empty).
    """

    sets: list
    clouds: list
    diagnostics: list
    partitions: list = field(default_factory=list)


def partition(Z, guard):
    """Intersect ``Z`` with ``guard`` row by row.

    Rows whose upper support bound already satisfies the inequality cannot
    cut the set and are skipped.
    """
    for l, r in zip(guard.L, guard.rho):
        if support_upper(Z, l) <= r:
            continue
        Z = halfspace_intersection(Z, Halfspace(l, r))
    return Z


def _feasible_leaves(Z, cap=None):
    return len(leaf_list(Z, reduce=True, cap=cap))


def step(Z, model, k=0, cap=None):
    """One reachability step; returns ``(R_next, pieces, info)``.

    Raises
    ------
    AllModesEmpty
        When every mode's guard piece is proven empty.
    """
    t0 = time.perf_counter()
    pieces, images, active = [], [], []
    for i, mode in enumerate(model.modes):
        P = partition(Z, mode.guard)
        if is_provably_empty(P, cap):
            pieces.append(None)
            continue
        pieces.append(P)
        X = P if model.input_set is None else cartesian_product(P, model.input_set)
        Y = nonlinear_step(mode.dynamics, X, cap)
        if is_provably_empty(Y, cap):
            continue
        images.append(Y)
        active.append(i)
    if not images:
        raise AllModesEmpty(f"step {k}: every mode's partition is empty")
    R_next = compact(union_all(images))
    if model.max_generators is not None and R_next.n_g > model.max_generators:
        raise BudgetExceeded(f"step {k}: {R_next.n_g} generators exceed the cap of {model.max_generators}")
    info = {"active_modes": active, "step_time": time.perf_counter() - t0}
    return R_next, pieces, info


def _diag(k, Z, cloud, extra, cap):
    d = {"step": k, **Z.counts(), "feasible_leaves": _feasible_leaves(Z, cap)}
    if cloud is not None:
        d["cloud_points"] = len(cloud)
    d.update(extra)
    return d


def reach(model, steps=None, grid_res=None, max_points=None, seed=None, clouds=True, cap=None):
    """Run ``steps`` (default: the model horizon) reachability steps.

    Parameters
    ----------
    model : PwnaModel
    steps : int, optional
    grid_res, max_points, seed : optional
        Sampling settings; default to ``model.sampling`` and then to the
        library defaults.
    clouds : bool
        Sample a point cloud of every reachable set.

    Raises
    ------
    HPZError
        Any error of a step; the results up to the failing step are attached
        to the exception as ``partial``.
    """
    s = model.sampling or {}
    grid_res = grid_res or s.get("grid_res", DEFAULT_GRID_RES)
    max_points = max_points or s.get("max_points", DEFAULT_MAX_POINTS)
    seed = s.get("seed", 0) if seed is None else seed
    steps = model.horizon if steps is None else steps
    cap = leaf_cap() if cap is None else cap

    def cloud_of(Z):
        return sample(Z, grid_res, max_points, seed, cap=cap) if clouds else None

    Z = model.initial_set
    c0 = cloud_of(Z)
    result = ReachResult([Z], [c0], [_diag(0, Z, c0, {"step_time": 0.0, "active_modes": []}, cap)])
    for k in range(steps):
        try:
            Z, pieces, info = step(Z, model, k, cap)
            cloud = cloud_of(Z)
        except HPZError as err:
            err.partial = result
            raise
        result.sets.append(Z)
        result.clouds.append(cloud)
        result.partitions.append(pieces)
        result.diagnostics.append(_diag(k + 1, Z, cloud, info, cap))
    return result


@dataclass
class ContainmentReport:
    """Outcome of :func:`check_containment`; ``misses`` lists ``(trajectory, step)``."""

    trajectories: int
    steps: int
    misses: list
    worst_residual: float

    @property
    def passed(self):
        return not self.misses


def check_containment(model, result, n_traj=1000, seed=0, tol=1e-6):
    """Simulate trajectories from points of ``cloud(X_0)`` and test membership in every ``R_k``.

    Start points are drawn (seeded) from a cloud of the initial set that
    includes ``n_traj`` random interior points.
    """
    from hpz.feasibility import approx_member
    from hpz.oracle import simulate

    if model.input_set is not None:
        raise ValueError("containment checks need a model without inputs")
    rng = np.random.default_rng(seed)
    X0 = sample(model.initial_set, DEFAULT_GRID_RES, DEFAULT_MAX_POINTS, seed, n_random=n_traj).points
    starts = X0[rng.choice(X0.shape[0], size=n_traj, replace=X0.shape[0] < n_traj)]
    N = len(result.sets) - 1
    misses, worst = [], 0.0
    for t, x0 in enumerate(starts):
        traj = simulate(model, x0, N)
        for k, x in enumerate(traj):
            m = approx_member(result.sets[k], x, tol)
            worst = max(worst, m.residual)
            if not m.found:
                misses.append((t, k))
    return ContainmentReport(n_traj, N, misses, worst)
