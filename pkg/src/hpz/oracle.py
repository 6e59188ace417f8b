"""Brute-force ground truth for differential testing.

Nothing here calls the operation, presolve or sampling code of the
library. Sets are enumerated directly from their blocks (a factor grid
with dedicated linear *pivot* factors solved exactly), operations are
applied to point clouds by their set semantics, and clouds are compared by
directed Hausdorff distance.
"""

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import cKDTree

from hpz.core import HybridPolynomialZonotope, leaf_cap
from hpz.errors import BudgetExceeded, DimensionMismatch, EmptyCloud, NoModeContains

ORACLE_TOL = 1e-9


def evaluate_point(Z, xi_c, xi_b=()):
    """Scalar-loop evaluation of the HPZ parameterisation."""
    x = [float(v) for v in Z.c]
    for i in range(Z.G_c.shape[1]):
        m = 1.0
        for k in range(Z.E.shape[0]):
            if Z.E[k, i]:
                m *= float(xi_c[k]) ** int(Z.E[k, i])
        for r in range(len(x)):
            x[r] += m * Z.G_c[r, i]
    for j in range(Z.G_b.shape[1]):
        for r in range(len(x)):
            x[r] += Z.G_b[r, j] * float(xi_b[j])
    return np.array(x)


def residual_point(Z, xi_c, xi_b=()):
    """Scalar-loop constraint residual."""
    res = [-float(v) for v in Z.b]
    for j in range(Z.A_c.shape[1]):
        m = 1.0
        for k in range(Z.R.shape[0]):
            if Z.R[k, j]:
                m *= float(xi_c[k]) ** int(Z.R[k, j])
        for r in range(len(res)):
            res[r] += m * Z.A_c[r, j]
    for j in range(Z.A_b.shape[1]):
        for r in range(len(res)):
            res[r] += Z.A_b[r, j] * float(xi_b[j])
    return np.array(res)


def grid_resolution(d, grid_res, max_points):
    """Largest odd resolution not above ``grid_res`` whose ``d``-dim grid fits."""
    r = grid_res
    while d and r > 2 and r**d > max_points:
        r -= 1
    if r < grid_res and r > 2 and r % 2 == 0:
        r -= 1
    return r


@dataclass
class Enumeration:
    """Points of a set with the factor values that produced them."""

    points: np.ndarray
    xi_c: np.ndarray
    xi_b: np.ndarray


def _powers(X, E):
    out = np.ones((X.shape[0], E.shape[1]))
    for k in range(E.shape[0]):
        for i in range(E.shape[1]):
            if E[k, i]:
                out[:, i] *= X[:, k] ** int(E[k, i])
    return out


def enumerate_set(Z, pivots=(), grid_res=5, max_points=10**6, cap=None):
    """Enumerate a set whose constraints are solvable for dedicated pivots.

    Parameters
    ----------
    Z : HybridPolynomialZonotope
    pivots : sequence of int
        One continuous factor per constraint row. Each must occur in the
        constraints only through a pure linear column, and the square matrix
        of pivot coefficients must be nonsingular.
    grid_res, max_points : int
        The remaining factors are scanned on a product grid whose resolution
        is lowered (kept odd) until it has at most ``max_points`` points.
    """
    pivots = list(pivots)
    if len(pivots) != Z.n_c:
        raise DimensionMismatch(f"{len(pivots)} pivots for {Z.n_c} constraint rows")
    cap = leaf_cap() if cap is None else cap
    if 2**Z.n_b > cap:
        raise BudgetExceeded(f"2^{Z.n_b} binary leaves exceed the cap of {cap}")
    free = [k for k in range(Z.n_e) if k not in pivots]
    used = Z.E.any(axis=1)
    grid_f = [k for k in free if used[k]]
    r = grid_resolution(len(grid_f), grid_res, max_points)
    axis = np.linspace(-1.0, 1.0, r)
    grid = np.array(list(itertools.product(axis, repeat=len(grid_f)))).reshape(-1, len(grid_f))

    piv_cols = []
    for k in pivots:
        cols = [j for j in range(Z.R.shape[1]) if Z.R[k, j] == 1 and Z.R[:, j].sum() == 1]
        piv_cols.append(cols[0])
    other = [j for j in range(Z.R.shape[1]) if j not in piv_cols]
    P = Z.A_c[:, piv_cols]

    pts, xs, bs = [], [], []
    for bits in itertools.product((-1.0, 1.0), repeat=Z.n_b):
        xi_b = np.array(bits)
        X = np.zeros((grid.shape[0], Z.n_e))
        X[:, grid_f] = grid
        if pivots:
            rhs = Z.b - Z.A_b @ xi_b - _powers(X, Z.R[:, other]) @ Z.A_c[:, other].T
            sol = np.linalg.solve(P, rhs.T).T
            ok = np.all(np.abs(sol) <= 1.0 + ORACLE_TOL, axis=1)
            X[:, pivots] = np.clip(sol, -1.0, 1.0)
            X = X[ok]
        pts.append(Z.c + Z.G_b @ xi_b + _powers(X, Z.E) @ Z.G_c.T)
        xs.append(X)
        bs.append(np.tile(xi_b, (X.shape[0], 1)))
    return Enumeration(np.vstack(pts), np.vstack(xs), np.vstack(bs))


def enumerate_hz(c, G_c, G_b, A_c=None, A_b=None, b=None, grid_res=5, max_points=10**6):
    """Points of a hybrid zonotope: grid the leading factors, solve the last ``n_c``."""
    c = np.asarray(c, dtype=float).reshape(-1)
    G_c = np.asarray(G_c, dtype=float).reshape(c.size, -1)
    G_b = np.asarray(G_b, dtype=float).reshape(c.size, -1)
    n_g, n_b = G_c.shape[1], G_b.shape[1]
    if b is None or np.asarray(b).size == 0:
        A_c, A_b, b = np.zeros((0, n_g)), np.zeros((0, n_b)), np.zeros(0)
    b = np.asarray(b, dtype=float).reshape(-1)
    A_c = np.asarray(A_c, dtype=float).reshape(b.size, n_g)
    A_b = np.zeros((b.size, n_b)) if A_b is None else np.asarray(A_b, dtype=float).reshape(b.size, n_b)
    n_c = b.size
    r = grid_resolution(n_g - n_c, grid_res, max_points)
    axis = np.linspace(-1.0, 1.0, r)
    grid = np.array(list(itertools.product(axis, repeat=n_g - n_c))).reshape(-1, n_g - n_c)
    pts = []
    for bits in itertools.product((-1.0, 1.0), repeat=n_b):
        xi_b = np.array(bits)
        X = np.zeros((grid.shape[0], n_g))
        X[:, : n_g - n_c] = grid
        if n_c:
            rhs = b - A_b @ xi_b - grid @ A_c[:, : n_g - n_c].T
            sol = np.linalg.solve(A_c[:, n_g - n_c :], rhs.T).T
            ok = np.all(np.abs(sol) <= 1.0 + ORACLE_TOL, axis=1)
            X[:, n_g - n_c :] = np.clip(sol, -1.0, 1.0)
            X = X[ok]
        pts.append(c + G_b @ xi_b + X @ G_c.T)
    return np.vstack(pts)


def lp_member(Z, p, tol=ORACLE_TOL):
    """Exact membership of ``p`` in a set with linear factors (``E = R = I``) by LP."""
    if not (np.array_equal(Z.E, np.eye(Z.n_e)) and (Z.n_c == 0 or np.array_equal(Z.R, np.eye(Z.n_e)))):
        raise ValueError("lp_member needs identity exponent matrices")
    A_c = Z.A_c if Z.n_c else np.zeros((0, Z.n_e))
    for bits in itertools.product((-1.0, 1.0), repeat=Z.n_b):
        xi_b = np.array(bits)
        A_eq = np.vstack([Z.G_c, A_c])
        b_eq = np.concatenate([p - Z.c - Z.G_b @ xi_b, Z.b - Z.A_b @ xi_b])
        if Z.n_e == 0:
            if np.all(np.abs(b_eq) <= tol):
                return True
            continue
        res = linprog(np.zeros(Z.n_e), A_eq=A_eq, b_eq=b_eq, bounds=(-1.0, 1.0), method="highs")
        if res.status == 0:
            return True
    return False


def oracle_op_cloud(op, operands, **params):
    """Apply the set semantics of ``op`` to operand point arrays.

    ``operands`` are point arrays, except for ``"intersection"`` whose second
    operand is a set tested point-by-point with :func:`lp_member`.
    Supported tags: ``linear_map`` (``M``), ``sum``, ``product``, ``union``,
    ``intersection``, ``halfspace`` (``l``, ``rho``, optional ``M``),
    ``nonlinear`` (``f``).
    """
    if op == "linear_map":
        (P,) = operands
        return P @ np.atleast_2d(params["M"]).T
    if op == "sum":
        P, Q = operands
        return (P[:, None, :] + Q[None, :, :]).reshape(-1, P.shape[1])
    if op == "product":
        P, Q = operands
        return np.hstack([np.repeat(P, Q.shape[0], axis=0), np.tile(Q, (P.shape[0], 1))])
    if op == "union":
        return np.vstack(operands)
    if op == "intersection":
        P, Z2 = operands
        keep = [i for i, p in enumerate(P) if lp_member(Z2, p)]
        return P[keep]
    if op == "halfspace":
        (P,) = operands
        M = params.get("M")
        h = np.asarray(params["l"], dtype=float)
        if M is not None:
            h = np.atleast_2d(M).T @ h
        return P[P @ h <= params["rho"] + ORACLE_TOL]
    if op == "nonlinear":
        (P,) = operands
        f = params["f"]
        return np.array([f(p) for p in P]).reshape(P.shape[0], -1)
    raise ValueError(f"unknown operation tag {op!r}")


@dataclass(frozen=True)
class CloudMetrics:
    """Directed Hausdorff distances and coverage between clouds ``a`` and ``b``.

    When either cloud is empty the distances are NaN and only the emptiness
    flags are meaningful.
    """

    directed_hausdorff_ab: float
    directed_hausdorff_ba: float
    coverage_fraction: float
    empty_a: bool = False
    empty_b: bool = False

    @property
    def hausdorff(self):
        if self.empty_a or self.empty_b:
            raise EmptyCloud("Hausdorff distance is undefined for an empty cloud")
        return max(self.directed_hausdorff_ab, self.directed_hausdorff_ba)

    def agree(self, tol):
        """Both empty, or both non-empty with Hausdorff distance at most ``tol``."""
        if self.empty_a or self.empty_b:
            return self.empty_a and self.empty_b
        return self.hausdorff <= tol


def _points(x):
    return np.asarray(getattr(x, "points", x), dtype=float)


def compare(a, b, eps=1e-6):
    """Exact directed Hausdorff distances between two clouds (nearest-neighbour trees).

    ``coverage_fraction`` is the fraction of ``b`` within ``eps`` of ``a``.
    """
    A, B = _points(a), _points(b)
    if A.ndim == 2 and B.ndim == 2 and A.shape[0] and B.shape[0] and A.shape[1] != B.shape[1]:
        raise DimensionMismatch(f"clouds have dimensions {A.shape[1]} and {B.shape[1]}")
    if A.shape[0] == 0 or B.shape[0] == 0:
        return CloudMetrics(np.nan, np.nan, np.nan, A.shape[0] == 0, B.shape[0] == 0)
    d_ab = cKDTree(B).query(A)[0]
    d_ba = cKDTree(A).query(B)[0]
    return CloudMetrics(float(d_ab.max()), float(d_ba.max()), float(np.mean(d_ba <= eps)))


def simulate(model, x0, N, inputs=None, tol=0.0):
    """Iterate the piecewise dynamics from ``x0`` for ``N`` steps.

    The mode is the lowest-index mode whose guard contains the state.

    Raises
    ------
    NoModeContains
        When a state lies in no guard.
    """
    x = np.asarray(x0, dtype=float).reshape(-1)
    traj = [x]
    for k in range(N):
        i = model.mode_of(x, tol)
        if i is None:
            raise NoModeContains(f"state {x} at step {k} lies in no guard")
        arg = x if inputs is None else np.concatenate([x, np.asarray(inputs[k], dtype=float)])
        x = model.modes[i].dynamics(arg)
        traj.append(x)
    return np.array(traj)


def random_instance(rng, n=None, n_e=None, n_g=None, n_b=None, n_c=None, max_degree=3, linear=False):
    """A random HPZ together with its dedicated pivot factors.

    The last ``n_c`` factors are pivots: each appears in exactly one
    constraint row through a pure linear column and in one pure linear
    generator column. The other factors appear in their own generator
    column (random degree) and in random monomials of the generators and
    constraints. ``b`` is chosen so that at least one leaf is feasible.
    With ``linear`` the set is a hybrid zonotope (``E = R = I``).
    """
    n = int(rng.integers(1, 4)) if n is None else n
    n_g = int(rng.integers(1, 5)) if n_g is None else n_g
    n_b = int(rng.integers(0, 4)) if n_b is None else n_b
    n_e = (n_g if linear else int(rng.integers(1, n_g + 1))) if n_e is None else n_e
    if n_c is None:
        n_c = int(rng.integers(0, min(2, n_e - 1) + 1)) if n_e > 1 else 0
    free = n_e - n_c

    E = np.zeros((n_e, n_g), dtype=np.int64)
    for k in range(n_e):
        E[k, k] = 1 if (linear or k >= free) else rng.integers(1, max_degree + 1)
    for i in range(n_e, n_g):
        while not E[:free, i].any():
            E[:free, i] = rng.integers(0, max_degree + 1, size=free)
    G_c = rng.uniform(-1.0, 1.0, size=(n, n_g))
    G_c[:, np.abs(G_c).sum(axis=0) < 0.1] += 0.5
    G_b = rng.uniform(-2.0, 2.0, size=(n, n_b))
    c = rng.uniform(-1.0, 1.0, size=n)

    if n_c == 0:
        return HybridPolynomialZonotope(c, G_c, G_b, E), []
    pivots = list(range(free, n_e))
    if linear:
        R = np.eye(n_e, dtype=np.int64)
        A_c = rng.uniform(-1.0, 1.0, size=(n_c, n_e))
        A_c[:, free:] = 0.0
        A_c[np.arange(n_c), free + np.arange(n_c)] = rng.choice([-1.0, 1.0], size=n_c) * rng.uniform(1.0, 2.0, n_c)
    else:
        extra = int(rng.integers(1, 3))
        R_free = np.zeros((n_e, extra), dtype=np.int64)
        for j in range(extra):
            while not R_free[:free, j].any():
                R_free[:free, j] = rng.integers(0, max_degree + 1, size=free)
        R = np.hstack([R_free, np.vstack([np.zeros((free, n_c), dtype=np.int64), np.eye(n_c, dtype=np.int64)])])
        A_c = np.hstack([
            rng.uniform(-1.0, 1.0, size=(n_c, extra)),
            np.diag(rng.choice([-1.0, 1.0], size=n_c) * rng.uniform(1.0, 2.0, n_c)),
        ])
    A_b = rng.uniform(-0.5, 0.5, size=(n_c, n_b))
    xi = rng.uniform(-1.0, 1.0, size=n_e)
    xi[free:] = rng.uniform(-0.5, 0.5, size=n_c)
    xi_b = rng.choice([-1.0, 1.0], size=n_b)
    Z0 = HybridPolynomialZonotope(c, G_c, G_b, E, A_c, A_b, np.zeros(n_c), R)
    b = residual_point(Z0, xi, xi_b)
    return HybridPolynomialZonotope(c, G_c, G_b, E, A_c, A_b, b, R), pivots
