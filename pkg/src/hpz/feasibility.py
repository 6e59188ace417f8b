"""Support bounds, a one-sided emptiness test and approximate membership."""

from dataclasses import dataclass

import numpy as np

from hpz._poly import box_gauss_newton, linear_range, monomial_jacobian, monomial_ranges, monomials
from hpz.core import FEAS_TOL, FactorAssignment, binary_assignments, fix_binaries
from hpz.errors import DimensionMismatch
from hpz.leaf import reduce_leaf
from hpz.ops import support_lower, support_upper

N_STARTS = 8
GN_MAX_ITER = 100
COARSE_POINTS = 4096
JITTER = 0.05


@dataclass(frozen=True)
class SupportBounds:
    """Guaranteed interval ``[lower, upper]`` of a linear functional over a set."""

    lower: float
    upper: float

    def contains(self, v, tol=0.0):
        return self.lower - tol <= v <= self.upper + tol


def functional_bounds(Z, l, M=None):
    """Bounds of ``l^T M x`` over ``Z`` from ``|monomial| <= 1`` and ``|xi_b| = 1``."""
    l = np.asarray(l, dtype=float).reshape(-1)
    M = np.eye(Z.n) if M is None else np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape != (l.size, Z.n):
        raise DimensionMismatch(f"M has shape {M.shape}, expected ({l.size}, {Z.n})")
    h = M.T @ l
    return SupportBounds(support_lower(Z, h), support_upper(Z, h))


def leaf_interval_empty(leaf):
    """True if interval evaluation of the leaf's constraints excludes 0 in some row."""
    if leaf.n_c == 0:
        return False
    lo_m, hi_m = monomial_ranges(leaf.R)
    lo, hi = linear_range(leaf.A_c, lo_m, hi_m)
    return bool(np.any((lo > leaf.b + FEAS_TOL) | (hi < leaf.b - FEAS_TOL)))


def leaf_provably_empty(leaf):
    """One-sided emptiness test for a single leaf (``n_b == 0``).

    The leaf is empty if plain interval evaluation of its constraints
    excludes 0, or if the exact presolve of slack rows finds a violated row.
    """
    return leaf_interval_empty(leaf) or reduce_leaf(leaf) is None


def is_provably_empty(Z, cap=None):
    """True only if every binary leaf of ``Z`` is provably empty.

    ``False`` means "not proven empty", never "non-empty".
    """
    for xi_b in binary_assignments(Z.n_b, cap):
        if not leaf_provably_empty(fix_binaries(Z, xi_b)):
            return False
    return True


@dataclass(frozen=True)
class Membership:
    """Outcome of :func:`approx_member`.

    ``witness`` is the assignment with the smallest stacked residual seen,
    ``residual`` its 2-norm.
    """

    found: bool
    witness: FactorAssignment = None
    residual: float = np.inf

    def __bool__(self):
        return self.found


def _stacked(leaf, p):
    G, E, A, b, R = leaf.G, leaf.E, leaf.A, leaf.b, leaf.R

    def fun(xi):
        F = np.concatenate([leaf.c + G @ monomials(xi, E) - p, A @ monomials(xi, R) - b])
        J = np.vstack([G @ monomial_jacobian(xi, E), A @ monomial_jacobian(xi, R)])
        return F, J

    return fun


def _starts(leaf, p, n_starts):
    """Best points of a jittered coarse grid (or a pseudo-random design) by residual.

    The jitter keeps starts off ``xi = 0``, where the Jacobian of every
    monomial of degree two or more vanishes.
    """
    d = leaf.n_e
    rng = np.random.default_rng(d)
    r = 7
    while r > 3 and r**d > COARSE_POINTS:
        r -= 2
    if r**d <= COARSE_POINTS:
        axis = np.linspace(-1.0, 1.0, r)
        X = np.stack([m.reshape(-1) for m in np.meshgrid(*([axis] * d), indexing="ij")], axis=1)
        X = np.clip(X + rng.uniform(-JITTER, JITTER, size=X.shape), -1.0, 1.0)
    else:
        X = rng.uniform(-1.0, 1.0, size=(COARSE_POINTS, d))
    F = np.hstack([leaf.c + monomials(X, leaf.E) @ leaf.G.T - p, monomials(X, leaf.R) @ leaf.A.T - leaf.b])
    order = np.argsort(np.einsum("ij,ij->i", F, F), kind="stable")
    return X[order[:n_starts]]


def approx_member(Z, p, tol=1e-6, cap=None, n_starts=N_STARTS, max_iter=GN_MAX_ITER):
    """Search for a feasible assignment of ``Z`` that evaluates to ``p``.

    Each presolved leaf is searched by damped Gauss-Newton from the
    ``n_starts`` best points of a coarse grid, on the stacked residual
    ``[x(xi) - p; constraint residual]``. A candidate is accepted only if the
    stacked residual of the recovered full assignment on ``Z`` itself has
    2-norm at most ``tol``.

    Returns
    -------
    Membership
        ``found`` is one-sided: ``False`` means no witness was found.
    """
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.size != Z.n:
        raise DimensionMismatch(f"point has length {p.size}, set has dimension {Z.n}")
    best = Membership(False)
    for xi_b in binary_assignments(Z.n_b, cap):
        raw = fix_binaries(Z, xi_b)
        leaf = reduce_leaf(raw)
        if leaf is None:
            continue
        reach = np.abs(leaf.G).sum(axis=1)
        if np.any(np.abs(p - leaf.c) > reach + tol):
            continue
        fun = _stacked(leaf, p)
        for x0 in _starts(leaf, p, n_starts):
            xi, _ = box_gauss_newton(fun, x0, max_iter, tol=1e-13)
            full = leaf.recover(xi)
            x = Z.c + Z.G_b @ xi_b + Z.G_c @ monomials(full, Z.E)
            res = Z.A_b @ xi_b + Z.A_c @ monomials(full, Z.R) - Z.b
            r = float(np.linalg.norm(np.concatenate([x - p, res])))
            if r < best.residual:
                best = Membership(r <= tol, FactorAssignment(full, xi_b), r)
            if best.found:
                return best
    return best
