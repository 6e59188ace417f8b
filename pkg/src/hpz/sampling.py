"""Deterministic point clouds of hybrid polynomial zonotopes.

Every binary leaf is presolved and split into independent factor
components (factors that never share a generator monomial or a constraint
row). Each component is scanned on a uniform grid over its *free visible*
factors, i.e. factors that move the point and are not pinned by a
constraint. The remaining factors are solved for:

``direct``  constraints solved exactly for linear pivot factors,
``lp``      hidden factors that enter linearly are found by an LP feasibility
            problem,
``gn``      otherwise by box-constrained Gauss-Newton with the grid fixed,
``polish``  when the constraints cut out a measure-zero manifold of the grid
            space, each grid point is polished onto it by Gauss-Newton over
            all factors.

The leaf cloud is the Minkowski combination of its component clouds.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from hpz._poly import box_gauss_newton, monomial_jacobian, monomials
from hpz.core import FEAS_TOL
from hpz.leaf import leaf_list

DEFAULT_GRID_RES = 21
DEFAULT_MAX_POINTS = 20000
GN_ITERATIONS = 50


@dataclass(frozen=True)
class PointCloud:
    """Sampled points of a set together with the leaf each point came from."""

    points: np.ndarray
    leaf: np.ndarray
    seed: int = 0
    grid_res: int = DEFAULT_GRID_RES
    feasible_leaves: int = 0
    leaves_visited: int = 0
    truncated: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def dim(self):
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    @property
    def is_empty(self):
        return self.points.shape[0] == 0

    def leaf_ids(self):
        return sorted(set(int(i) for i in self.leaf))


class _Component:
    """One independent block of factors of a presolved leaf (local indexing)."""

    def __init__(self, G, E, A, b, R):
        self.G, self.E, self.A, self.b, self.R = G, E, A, b, R
        self._analyse()

    def _analyse(self):
        E, A, R = self.E, self.A, self.R
        n_f = E.shape[0]
        m = A.shape[0]
        visible = E.any(axis=1)
        nz = A != 0
        pure = (R.sum(axis=0) == 1) & (R.max(axis=0, initial=0) == 1)
        pure_factor = np.where(pure, R.argmax(axis=0), -1)
        occ = R > 0
        occurrences = occ.sum(axis=1)

        slack = {}
        taken = set()
        for r in range(m):
            for j in np.flatnonzero(nz[r]):
                k = pure_factor[j]
                if k >= 0 and not visible[k] and occurrences[k] == 1 and nz[:, j].sum() == 1 and k not in taken:
                    slack[r] = (int(k), int(j))
                    taken.add(int(k))
                    break
        eq_rows = np.array([r for r in range(m) if r not in slack], dtype=int)
        eq_cols = nz[eq_rows].any(axis=0) if eq_rows.size else np.zeros(A.shape[1], dtype=bool)

        candidates = []
        for k in range(n_f):
            if k in taken:
                continue
            cols = np.flatnonzero(occ[k] & eq_cols)
            if cols.size and np.all(pure[cols]):
                candidates.append((k, int(cols[0])))
        candidates.sort(key=lambda kc: (visible[kc[0]], -kc[0] if visible[kc[0]] else kc[0]))

        pivots = []
        basis = np.zeros((eq_rows.size, 0))
        for k, j in candidates:
            trial = np.column_stack([basis, A[eq_rows, j]])
            if np.linalg.matrix_rank(trial) > basis.shape[1]:
                basis = trial
                pivots.append((k, j))
            if basis.shape[1] == eq_rows.size:
                break

        pivot_factors = {k for k, _ in pivots}
        self.visible = visible
        self.slack = slack
        self.eq_rows = eq_rows
        self.pivots = pivots
        self.exist = [k for k in range(n_f) if not visible[k] and k not in taken and k not in pivot_factors]
        self.grid = [k for k in range(n_f) if visible[k] and k not in pivot_factors]
        self.unknown = sorted(pivot_factors | set(self.exist) | taken)

        if len(pivots) < eq_rows.size:
            self.mode = "polish"
        elif not self.exist:
            self.mode = "direct"
        else:
            deg = R[self.unknown].sum(axis=0) if self.unknown else np.zeros(R.shape[1])
            self.mode = "lp" if np.all(deg <= 1) else "gn"

    @property
    def n_f(self):
        return self.E.shape[0]

    def residual(self, X):
        return monomials(X, self.R) @ self.A.T - self.b

    def _residual_jac(self, full, idx):
        def fun(u):
            x = full.copy()
            x[idx] = u
            F = self.A @ monomials(x, self.R) - self.b
            J = self.A @ monomial_jacobian(x, self.R)[:, idx]
            return F, J

        return fun

    def solve(self, X):
        """Complete the grid values in ``X`` (rows are points); return feasible rows."""
        if X.shape[0] == 0:
            return X
        if self.mode == "direct":
            return self._direct(X)
        keep = []
        for x in X:
            sol = getattr(self, "_" + self.mode)(x)
            if sol is not None:
                keep.append(sol)
        return np.array(keep).reshape(-1, self.n_f)

    def _check_slacks(self, X, ok, tol=FEAS_TOL):
        for r, (k, j) in self.slack.items():
            others = np.arange(self.A.shape[1]) != j
            rest = monomials(X, self.R[:, others]) @ self.A[r, others]
            s = (self.b[r] - rest) / self.A[r, j]
            ok &= np.abs(s) <= 1.0 + tol
            X[:, k] = np.clip(s, -1.0, 1.0)
        return ok

    def _direct(self, X, tol=FEAS_TOL):
        X = X.copy()
        ok = np.ones(X.shape[0], dtype=bool)
        if self.pivots:
            piv_cols = [j for _, j in self.pivots]
            A_eq = self.A[self.eq_rows]
            other = np.ones(self.A.shape[1], dtype=bool)
            other[piv_cols] = False
            rest = monomials(X, self.R[:, other]) @ A_eq[:, other].T
            vals = np.linalg.solve(A_eq[:, piv_cols], (self.b[self.eq_rows] - rest).T).T
            ok &= np.all(np.abs(vals) <= 1.0 + tol, axis=1)
            X[:, [k for k, _ in self.pivots]] = np.clip(vals, -1.0, 1.0)
        ok = self._check_slacks(X, ok, tol)
        return X[ok]

    def _gn(self, x, tol=FEAS_TOL):
        idx = np.array(self.unknown, dtype=int)
        u, F = box_gauss_newton(self._residual_jac(x, idx), np.zeros(idx.size), GN_ITERATIONS, tol)
        if F.size and np.max(np.abs(F)) > tol:
            return None
        x = x.copy()
        x[idx] = u
        return x

    def _lp(self, x, tol=FEAS_TOL):
        idx = np.array(self.unknown, dtype=int)
        base = x.copy()
        base[idx] = 1.0
        R_known = self.R.copy()
        R_known[idx] = 0
        mono = monomials(base, R_known)
        owner = np.full(self.R.shape[1], -1)
        for pos, k in enumerate(idx):
            owner[self.R[k] > 0] = pos
        A_eq = np.zeros((self.A.shape[0], idx.size))
        rhs = self.b.copy()
        for j in range(self.R.shape[1]):
            if owner[j] >= 0:
                A_eq[:, owner[j]] += self.A[:, j] * mono[j]
            else:
                rhs -= self.A[:, j] * mono[j]
        res = linprog(np.zeros(idx.size), A_eq=A_eq, b_eq=rhs, bounds=(-1.0, 1.0), method="highs")
        if res.status != 0:
            return None
        u, F = box_gauss_newton(self._residual_jac(x, idx), res.x, 5, tol)
        if F.size and np.max(np.abs(F)) > tol:
            return None
        x = x.copy()
        x[idx] = u
        return x

    def _polish(self, x, tol=FEAS_TOL):
        idx = np.arange(self.n_f)
        u, F = box_gauss_newton(self._residual_jac(x, idx), x, GN_ITERATIONS, tol)
        if F.size and np.max(np.abs(F)) > tol:
            return None
        return u

    def contributions(self, X):
        return monomials(X, self.E) @ self.G.T


def _components(leaf):
    n_e = leaf.n_e
    parent = list(range(n_e))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def join(factors):
        factors = list(factors)
        for f in factors[1:]:
            ra, rb = find(factors[0]), find(f)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

    for i in range(leaf.E.shape[1]):
        join(np.flatnonzero(leaf.E[:, i]))
    nz = leaf.A != 0
    for r in range(leaf.A.shape[0]):
        join(np.flatnonzero((leaf.R[:, nz[r]] > 0).any(axis=1)))

    groups = {}
    for k in range(n_e):
        groups.setdefault(find(k), []).append(k)
    comps = []
    for factors in groups.values():
        f = np.array(factors)
        mask = np.zeros(n_e, dtype=bool)
        mask[f] = True
        gcols = leaf.E[mask].any(axis=0)
        qcols = leaf.R[mask].any(axis=0)
        rows = nz[:, qcols].any(axis=1)
        comps.append(
            _Component(
                leaf.G[:, gcols],
                leaf.E[np.ix_(mask, gcols)],
                leaf.A[np.ix_(rows, qcols)],
                leaf.b[rows],
                leaf.R[np.ix_(mask, qcols)],
            )
        )
    return comps


def resolution(d, grid_res, max_points):
    """Per-axis resolution so that a ``d``-dimensional grid fits in ``max_points``.

    The resolution is lowered from ``grid_res`` when needed and kept odd so
    that 0 stays on the grid.
    """
    r = grid_res
    if d and r**d > max_points:
        r = max(2, int(np.floor(max_points ** (1.0 / d) + 1e-9)))
        if r > 2 and r % 2 == 0:
            r -= 1
    return r


def grid_points(d, r):
    """Uniform grid on ``[-1, 1]^d`` with ``r`` points per axis (first axis slowest)."""
    if d == 0:
        return np.zeros((1, 0))
    axis = np.linspace(-1.0, 1.0, r)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def _sample_component(comp, r, n_random, rng):
    d = len(comp.grid)
    pts = grid_points(d, r)
    if n_random and d:
        pts = np.vstack([pts, rng.uniform(-1.0, 1.0, size=(n_random, d))])
    X = np.zeros((pts.shape[0], comp.n_f))
    X[:, comp.grid] = pts
    X = comp.solve(X)
    return comp.contributions(X)


def sample_leaf(leaf, grid_res=DEFAULT_GRID_RES, max_points=DEFAULT_MAX_POINTS, n_random=0, seed=0, leaf_index=0):
    """Point cloud of one presolved leaf; returns ``(points, truncated)``."""
    n = leaf.c.shape[0]
    pts = leaf.c.reshape(1, n)
    truncated = False
    rng = np.random.default_rng([seed, leaf_index])
    comps = _components(leaf)
    r = resolution(sum(len(c.grid) for c in comps), grid_res, max_points)
    for comp in comps:
        contrib = _sample_component(comp, r, n_random, rng)
        if contrib.shape[0] == 0:
            return np.zeros((0, n)), False
        pts = (pts[:, None, :] + contrib[None, :, :]).reshape(-1, n)
        if pts.shape[0] > max_points:
            pick = np.sort(rng.choice(pts.shape[0], size=max_points, replace=False))
            pts = pts[pick]
            truncated = True
    return pts, truncated


def sample(Z, grid_res=DEFAULT_GRID_RES, max_points=DEFAULT_MAX_POINTS, seed=0, n_random=0, cap=None):
    """Deterministic point cloud of ``Z``.

    Parameters
    ----------
    Z : HybridPolynomialZonotope
    grid_res : int
        Grid points per free factor axis (odd values keep 0 on the grid).
    max_points : int
        Point budget per leaf. The grid resolution is lowered until the grid
        over all free factors of a leaf fits; leaf clouds that still exceed
        the budget (only possible with ``n_random``) are subsampled and
        ``truncated`` is set.
    seed : int
        Seed for the optional random interior points and for subsampling.
    n_random : int
        Extra uniformly random free-factor values per component.
    cap : int, optional
        Binary-leaf cap; defaults to :func:`hpz.core.leaf_cap`.

    Raises
    ------
    BudgetExceeded
        If ``2 ** Z.n_b`` exceeds the leaf cap.
    """
    chunks, leaf_ids = [], []
    truncated = False
    leaves = leaf_list(Z, reduce=True, cap=cap)
    feasible = 0
    for idx, _, leaf in leaves:
        pts, trunc = sample_leaf(leaf, grid_res, max_points, n_random, seed, idx)
        truncated |= trunc
        if pts.shape[0]:
            feasible += 1
            chunks.append(pts)
            leaf_ids.append(np.full(pts.shape[0], idx))
    points = np.vstack(chunks) if chunks else np.zeros((0, Z.n))
    leaf = np.concatenate(leaf_ids) if leaf_ids else np.zeros(0, dtype=int)
    return PointCloud(points, leaf, seed, grid_res, feasible, 2**Z.n_b, truncated)
