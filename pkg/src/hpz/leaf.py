"""Exact presolve of binary leaves.

Fixing the binary factors of an HPZ leaves a constrained polynomial
zonotope. Sets built by union and halfspace intersection carry many slack
factors that occur in exactly one constraint and in no generator; such a
row is really an inequality on the remaining factors. The presolve here
uses that structure to

* drop slack rows that hold everywhere on the unit box,
* detect rows that can never hold, by interval evaluation of every row and
  of every slack row without its slack (the leaf is then empty),
* fix factors whose slack-implied bounds collapse to a point,

and repeats until nothing changes. The reduced leaf describes the same set
and remembers how to map its factors back to the original ones.
"""

from dataclasses import dataclass, field

import numpy as np

from hpz._poly import linear_range, monomial_ranges, monomials
from hpz.core import FEAS_TOL, HybridPolynomialZonotope, binary_assignments, fix_binaries, merge_columns


@dataclass
class ReducedLeaf:
    """A presolved leaf ``<c, G, E, A, b, R>`` over a subset of the original factors."""

    c: np.ndarray
    G: np.ndarray
    E: np.ndarray
    A: np.ndarray
    b: np.ndarray
    R: np.ndarray
    keep: np.ndarray
    n_e_full: int
    fixed: dict = field(default_factory=dict)
    slack_rows: list = field(default_factory=list)

    @property
    def n_e(self):
        return self.E.shape[0]

    def as_hpz(self):
        return HybridPolynomialZonotope(self.c, self.G, None, self.E, self.A, None, self.b, self.R)

    def recover(self, xi):
        """Map reduced factors back to a full factor vector of the source leaf.

        Fixed factors take their fixed value, dropped slacks are solved from
        their own row and factors that no longer occur are set to 0.
        """
        full = np.zeros(self.n_e_full)
        full[self.keep] = xi
        for k, v in self.fixed.items():
            full[k] = v
        for coef, exps, rhs, k, j in self.slack_rows:
            others = np.arange(coef.size) != j
            rest = coef[others] @ monomials(full, exps[:, others])
            full[k] = np.clip((rhs - rest) / coef[j], -1.0, 1.0)
        return full


def _substitute(G, E, k, v):
    G = G * (v ** E[k])
    E = E.copy()
    E[k] = 0
    return G, E


def reduce_leaf(leaf, tol=FEAS_TOL):
    """Presolve a leaf HPZ (``n_b == 0``).

    Returns a :class:`ReducedLeaf`, or ``None`` when the presolve proves the
    leaf empty.
    """
    c = leaf.c.copy()
    G, E = leaf.G_c.copy(), leaf.E.copy()
    A, b, R = leaf.A_c.copy(), leaf.b.copy(), leaf.R.copy()
    n_e = E.shape[0]
    fixed = {}
    pending = []
    slack_rows = []

    if A.size:
        row_lo, row_hi = linear_range(A, *monomial_ranges(R))
        if np.any((row_lo > b + tol) | (row_hi < b - tol)):
            return None

    dirty = True
    while True:
        for k, v in pending:
            G, E = _substitute(G, E, k, v)
            A, R = _substitute(A, R, k, v)
        pending = []

        if dirty:
            const = ~E.any(axis=0)
            c = c + G[:, const].sum(axis=1)
            G, E = merge_columns(G[:, ~const], E[:, ~const])
            const = ~R.any(axis=0)
            b = b - A[:, const].sum(axis=1)
            A, R = merge_columns(A[:, ~const], R[:, ~const])
            dirty = False

        empty_rows = ~np.any(A != 0, axis=1)
        if np.any(np.abs(b[empty_rows]) > tol):
            return None
        A, b = A[~empty_rows], b[~empty_rows]
        live_cols = np.any(A != 0, axis=0)
        A, R = A[:, live_cols], R[:, live_cols]

        ranges = monomial_ranges(R)
        row_lo, row_hi = linear_range(A, *ranges)
        if np.any((row_lo > b + tol) | (row_hi < b - tol)):
            return None

        visible = E.any(axis=1)
        nz = A != 0
        pure = (R.sum(axis=0) == 1) & (R.max(axis=0, initial=0) == 1)
        owner = np.argmax(R, axis=0) if R.shape[0] else np.zeros(R.shape[1], dtype=int)
        occurrences = (R > 0).sum(axis=1)
        cand = pure & (nz.sum(axis=0) == 1)
        cand[cand] &= ~visible[owner[cand]] & (occurrences[owner[cand]] == 1)
        rows_s = np.flatnonzero((nz & cand).any(axis=1))

        changed = False
        drop_rows = []
        bounds = {}
        if rows_s.size:
            js = np.argmax(nz[rows_s] & cand, axis=1)
            a = A[rows_s, js]
            rest = A[rows_s].copy()
            rest[np.arange(rows_s.size), js] = 0.0
            rlo, rhi = linear_range(rest, *ranges)
            s1, s2 = (b[rows_s] - rhi) / a, (b[rows_s] - rlo) / a
            s_lo, s_hi = np.minimum(s1, s2), np.maximum(s1, s2)
            if np.any((s_hi < -1.0 - tol) | (s_lo > 1.0 + tol)):
                return None
            redundant = (s_lo >= -1.0 - tol) & (s_hi <= 1.0 + tol)
            drop_rows = [(int(r), int(j)) for r, j in zip(rows_s[redundant], js[redundant])]
            single = ~redundant & ((rest != 0).sum(axis=1) == 1)
            for i in np.flatnonzero(single):
                jr = int(np.flatnonzero(rest[i])[0])
                if not pure[jr]:
                    continue
                v = int(owner[jr])
                beta = rest[i, jr]
                lo, hi = sorted(((b[rows_s[i]] - abs(a[i])) / beta, (b[rows_s[i]] + abs(a[i])) / beta))
                cur = bounds.get(v, (-1.0, 1.0))
                bounds[v] = (max(cur[0], lo), min(cur[1], hi))

        for v, (lo, hi) in bounds.items():
            if lo > hi + tol:
                return None
            if hi - lo <= tol:
                val = float(np.clip((lo + hi) / 2, -1.0, 1.0))
                fixed[v] = val
                pending.append((v, val))
                changed = dirty = True

        if drop_rows:
            for r, j in drop_rows:
                k = int(np.argmax(R[:, j]))
                cols = np.flatnonzero(nz[r])
                slack_rows.append((A[r, cols], R[:, cols], b[r], k, int(np.searchsorted(cols, j))))
            rows = np.ones(A.shape[0], dtype=bool)
            rows[[r for r, _ in drop_rows]] = False
            A, b = A[rows], b[rows]
            live_cols = np.any(A != 0, axis=0)
            A, R = A[:, live_cols], R[:, live_cols]
            changed = True
        if not changed:
            break

    used = E.any(axis=1) | R.any(axis=1)
    keep = np.flatnonzero(used)
    return ReducedLeaf(c, G, E[keep], A, b, R[keep], keep, n_e, fixed, slack_rows)


def leaf_list(Z, reduce=True, cap=None):
    """All non-empty leaves of ``Z`` as ``(index, xi_b, leaf)`` triples.

    With ``reduce`` the leaves are presolved :class:`ReducedLeaf` objects and
    leaves the presolve proves empty are skipped; otherwise they are plain
    leaf HPZs.
    """
    out = []
    for idx, xi_b in enumerate(binary_assignments(Z.n_b, cap)):
        leaf = fix_binaries(Z, xi_b)
        if reduce:
            leaf = reduce_leaf(leaf)
            if leaf is None:
                continue
        out.append((idx, xi_b, leaf))
    return out
