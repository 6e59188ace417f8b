"""Exact images of hybrid polynomial zonotopes under quadratic-affine maps.

Binary factors are removed by enumerating leaves, so every leaf is a
constrained polynomial zonotope whose image under a quadratic map is again
one, obtained by expanding the map monomial by monomial. The leaf images
are re-united with :func:`hpz.ops.union`.
"""

from dataclasses import dataclass

import numpy as np

from hpz.core import HybridPolynomialZonotope, binary_assignments, compact, empty_set, fix_binaries
from hpz.errors import DimensionMismatch
from hpz.feasibility import leaf_interval_empty
from hpz.leaf import ReducedLeaf, leaf_list
from hpz.ops import union_all


@dataclass(frozen=True)
class QuadraticAffineMap:
    """``f(x)_r = x^T Q[r] x + (A x)_r + d_r`` for ``r = 1..n_out``."""

    Q: tuple
    A: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        n_out, n = A.shape
        d = np.asarray(self.d, dtype=float).reshape(-1)
        if d.size != n_out:
            raise DimensionMismatch(f"d has length {d.size}, A has {n_out} rows")
        Q = tuple(np.atleast_2d(np.asarray(q, dtype=float)) for q in self.Q)
        if len(Q) != n_out:
            raise DimensionMismatch(f"{len(Q)} quadratic forms given for {n_out} outputs")
        for r, q in enumerate(Q):
            if q.shape != (n, n):
                raise DimensionMismatch(f"Q[{r}] has shape {q.shape}, expected ({n}, {n})")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "d", d)

    @property
    def n_in(self):
        return self.A.shape[1]

    @property
    def n_out(self):
        return self.A.shape[0]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        X = np.atleast_2d(x)
        quad = np.stack([np.einsum("pi,ij,pj->p", X, q, X) for q in self.Q], axis=1)
        out = quad + X @ self.A.T + self.d
        return out[0] if x.ndim == 1 else out

    @classmethod
    def affine(cls, A, d):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        n_out, n = A.shape
        return cls([np.zeros((n, n))] * n_out, A, d)


def leaves(Z, cap=None):
    """All ``2**n_b`` leaves of ``Z`` as ``(xi_b, leaf)`` pairs in canonical order."""
    return [(xi_b, fix_binaries(Z, xi_b)) for xi_b in binary_assignments(Z.n_b, cap)]


def quadratic_map_leaf(f, L):
    """Exact image of a leaf (no binary factors) under ``f``.

    With ``x(xi) = c + sum_i m_i(xi) G[:, i]`` the image is expanded into a
    constant, one term per generator and one term per generator pair; the
    constraints are carried over unchanged and the result is compacted.
    """
    if isinstance(L, ReducedLeaf):
        L = L.as_hpz()
    if L.n_b:
        raise ValueError("quadratic_map_leaf expects a leaf without binary factors")
    if f.n_in != L.n:
        raise DimensionMismatch(f"map expects dimension {f.n_in}, set has dimension {L.n}")
    c, G, E = L.c, L.G_c, L.E
    g = G.shape[1]
    const = f(c)
    lin = np.stack([c @ (q + q.T) @ G for q in f.Q]) + f.A @ G
    i, j = np.triu_indices(g)
    pair = []
    for q in f.Q:
        P = G.T @ q @ G
        S = P + P.T
        pair.append(np.where(i == j, P[i, j], S[i, j]))
    pair = np.stack(pair) if g else np.zeros((f.n_out, 0))
    G_new = np.hstack([lin, pair])
    E_new = np.hstack([E, E[:, i] + E[:, j]])
    return compact(HybridPolynomialZonotope(const, G_new, None, E_new, L.A_c, None, L.b, L.R))


def nonlinear_step(f, Z, cap=None):
    """Image ``f(Z)``: map every leaf not proven empty, then unite in leaf order.

    Returns a canonical empty set when every leaf is proven empty.
    """
    images = []
    for _, _, leaf in leaf_list(Z, reduce=True, cap=cap):
        L = leaf.as_hpz()
        if leaf_interval_empty(L):
            continue
        images.append(quadratic_map_leaf(f, L))
    if not images:
        return empty_set(f.n_out)
    return compact(union_all(images))
