"""Closed-form set operations on hybrid polynomial zonotopes.

Every function assembles the blocks of the result directly; none of them
samples or solves anything. Operands are never mutated.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from hpz.core import HybridPolynomialZonotope, fold_constants
from hpz.errors import DimensionMismatch

ROUNDOFF = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class Halfspace:
    """The halfspace ``{x : l^T M x <= rho}``; ``M`` defaults to the identity."""

    l: np.ndarray
    rho: float
    M: np.ndarray = None

    def __post_init__(self):
        l = np.asarray(self.l, dtype=float).reshape(-1)
        if not np.any(l != 0):
            raise ValueError("halfspace normal must be nonzero")
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "rho", float(self.rho))
        M = np.eye(l.size) if self.M is None else np.atleast_2d(np.asarray(self.M, dtype=float))
        if M.shape[0] != l.size:
            raise DimensionMismatch(f"M has {M.shape[0]} rows, l has length {l.size}")
        object.__setattr__(self, "M", M)

    def normal(self):
        """The normal ``M^T l`` in the coordinates of the set."""
        return self.M.T @ self.l


def _same_dim(Z1, Z2, what):
    if Z1.n != Z2.n:
        raise DimensionMismatch(f"{what}: operands live in R^{Z1.n} and R^{Z2.n}")


def _idiag(*blocks):
    return block_diag(*blocks).astype(np.int64)


def linear_map(M, Z):
    """Image ``M Z``; factors and constraints are untouched."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[1] != Z.n:
        raise DimensionMismatch(f"M has {M.shape[1]} columns, set has dimension {Z.n}")
    return HybridPolynomialZonotope(M @ Z.c, M @ Z.G_c, M @ Z.G_b, Z.E, Z.A_c, Z.A_b, Z.b, Z.R)


def _independent_constraints(Z1, Z2):
    """Block-diagonal factor and constraint bookkeeping for two independent sets."""
    return dict(
        E=_idiag(Z1.E, Z2.E),
        A_c=block_diag(Z1.A_c, Z2.A_c),
        A_b=block_diag(Z1.A_b, Z2.A_b),
        b=np.concatenate([Z1.b, Z2.b]),
        R=_idiag(Z1.R, Z2.R),
    )


def minkowski_sum(Z1, Z2):
    """Minkowski sum ``Z1 + Z2`` over the concatenated factor spaces."""
    _same_dim(Z1, Z2, "minkowski_sum")
    return HybridPolynomialZonotope(
        Z1.c + Z2.c,
        np.hstack([Z1.G_c, Z2.G_c]),
        np.hstack([Z1.G_b, Z2.G_b]),
        **_independent_constraints(Z1, Z2),
    )


def cartesian_product(Z1, Z2):
    """Cartesian product ``Z1 x Z2`` in ``R^(n1 + n2)``."""
    return HybridPolynomialZonotope(
        np.concatenate([Z1.c, Z2.c]),
        block_diag(Z1.G_c, Z2.G_c),
        block_diag(Z1.G_b, Z2.G_b),
        **_independent_constraints(Z1, Z2),
    )


def generalized_intersection(Z1, Z2):
    """Intersection ``Z1 ∩ Z2``.

    The result keeps the generators of ``Z1``; both constraint systems are
    kept and a coupling row block forces the two parameterised points to
    coincide.
    """
    _same_dim(Z1, Z2, "generalized_intersection")
    n, ne1, ne2 = Z1.n, Z1.n_e, Z2.n_e
    nc1, nc2 = Z1.n_c, Z2.n_c
    q1, q2, g1, g2 = Z1.n_q, Z2.n_q, Z1.n_g, Z2.n_g

    G_c = np.hstack([Z1.G_c, np.zeros((n, ne2))])
    E = _idiag(Z1.E, np.eye(ne2))
    A_c = np.block([
        [Z1.A_c, np.zeros((nc1, q2 + g1 + g2))],
        [np.zeros((nc2, q1)), Z2.A_c, np.zeros((nc2, g1 + g2))],
        [np.zeros((n, q1 + q2)), Z1.G_c, -Z2.G_c],
    ])
    A_b = np.block([
        [Z1.A_b, np.zeros((nc1, Z2.n_b))],
        [np.zeros((nc2, Z1.n_b)), Z2.A_b],
        [Z1.G_b, -Z2.G_b],
    ])
    b = np.concatenate([Z1.b, Z2.b, Z2.c - Z1.c])
    R = np.block([
        [Z1.R, np.zeros((ne1, q2)), Z1.E, np.zeros((ne1, g2))],
        [np.zeros((ne2, q1)), Z2.R, np.zeros((ne2, g1)), Z2.E],
    ]).astype(np.int64)
    G_b = np.hstack([Z1.G_b, np.zeros((n, Z2.n_b))])
    return HybridPolynomialZonotope(Z1.c, G_c, G_b, E, A_c, A_b, b, R)


def support_lower(Z, h):
    """Constant lower bound of ``h^T x`` over ``Z``, using ``|monomial| <= 1``."""
    return float(h @ Z.c - np.abs(h @ Z.G_c).sum() - np.abs(h @ Z.G_b).sum())


def support_upper(Z, h):
    return float(h @ Z.c + np.abs(h @ Z.G_c).sum() + np.abs(h @ Z.G_b).sum())


def halfspace_intersection(Z, H):
    """Intersection of ``Z`` with the halfspace ``H``.

    One slack factor ``xi_f`` and one constraint row encode
    ``h^T x = xi_f (rho - l_m) / 2 + (rho + l_m) / 2`` with ``h = M^T l`` and
    ``l_m`` a constant lower bound of ``h^T x`` over ``Z``. When
    ``rho < l_m`` no point of ``Z`` satisfies ``H``; the new row is then the
    infeasible ``0 = 1`` so that block sizes stay the same. A ``rho`` below
    ``l_m`` by no more than rounding error is read as a touching halfspace
    (``l_m = rho``, the row becomes ``h^T x = rho``).
    """
    if H.M.shape[1] != Z.n:
        raise DimensionMismatch(f"halfspace map has {H.M.shape[1]} columns, set has dimension {Z.n}")
    h = H.normal()
    l_m = support_lower(Z, h)
    scale = np.abs(h) @ (np.abs(Z.c) + np.abs(Z.G_c).sum(axis=1) + np.abs(Z.G_b).sum(axis=1))
    if l_m - ROUNDOFF * (1.0 + scale) <= H.rho < l_m:
        l_m = H.rho
    n, n_e, n_g, n_q, n_c = Z.n, Z.n_e, Z.n_g, Z.n_q, Z.n_c

    G_c = np.hstack([Z.G_c, np.zeros((n, 1))])
    E = _idiag(Z.E, np.ones((1, 1)))
    R = np.block([
        [Z.R, Z.E, np.zeros((n_e, 1))],
        [np.zeros((1, n_q + n_g)), np.ones((1, 1))],
    ]).astype(np.int64)
    if H.rho < l_m:
        row_c = np.zeros(n_g + 1)
        row_b = np.zeros(Z.n_b)
        rhs = 1.0
    else:
        row_c = np.concatenate([h @ Z.G_c, [-0.5 * (H.rho - l_m)]])
        row_b = h @ Z.G_b
        rhs = 0.5 * (H.rho + l_m) - h @ Z.c
    A_c = np.block([
        [Z.A_c, np.zeros((n_c, n_g + 1))],
        [np.zeros((1, n_q)), row_c[None, :]],
    ])
    A_b = np.vstack([Z.A_b, row_b[None, :]])
    b = np.concatenate([Z.b, [rhs]])
    return HybridPolynomialZonotope(Z.c, G_c, Z.G_b, E, A_c, A_b, b, R)


def multi_halfspace(Z, L, rho, M=None):
    """Intersection with the polyhedron ``{x : L M x <= rho}``, one row at a time."""
    L = np.atleast_2d(np.asarray(L, dtype=float))
    rho = np.asarray(rho, dtype=float).reshape(-1)
    if L.shape[0] != rho.size:
        raise DimensionMismatch(f"L has {L.shape[0]} rows, rho has length {rho.size}")
    for l, r in zip(L, rho):
        Z = halfspace_intersection(Z, Halfspace(l, r, M))
    return Z


def union(Z1, Z2):
    """Union ``Z1 ∪ Z2``.

    A fresh binary factor selects the operand. Coupling rows with one slack
    factor each force the factors of the inactive operand to their neutral
    values (continuous factors to 0, binary factors to -1). This requires
    every monomial to vanish at 0, so constant columns of the operands are
    folded into their centers and offsets first.
    """
    _same_dim(Z1, Z2, "union")
    Z1, Z2 = fold_constants(Z1), fold_constants(Z2)
    n = Z1.n
    ne1, ne2, nb1, nb2 = Z1.n_e, Z2.n_e, Z1.n_b, Z2.n_b
    nc1, nc2, q1, q2 = Z1.n_c, Z2.n_c, Z1.n_q, Z2.n_q
    nr = 2 * (ne1 + ne2 + nb1 + nb2)
    one1, one2 = np.ones(nb1), np.ones(nb2)

    gb1, gb2 = Z1.G_b @ one1, Z2.G_b @ one2
    c_hat = 0.5 * (gb2 + Z1.c + gb1 + Z2.c)
    Gb_hat = 0.5 * (gb2 + Z1.c - gb1 - Z2.c)
    ab1, ab2 = Z1.A_b @ one1, Z2.A_b @ one2
    b1_hat, Ab1_hat = 0.5 * (Z1.b - ab1), -0.5 * (ab1 + Z1.b)
    b2_hat, Ab2_hat = 0.5 * (Z2.b - ab2), 0.5 * (Z2.b + ab2)

    I1, I2 = np.eye(ne1), np.eye(ne2)
    Z12, Z21 = np.zeros((ne1, ne2)), np.zeros((ne2, ne1))
    A3c = np.vstack([
        np.hstack([I1, Z12]),
        np.hstack([-I1, Z12]),
        np.hstack([Z21, I2]),
        np.hstack([Z21, -I2]),
        np.zeros((2 * (nb1 + nb2), ne1 + ne2)),
    ])
    J1, J2 = 0.5 * np.eye(nb1), 0.5 * np.eye(nb2)
    O12, O21 = np.zeros((nb1, nb2)), np.zeros((nb2, nb1))

    def col(v, k):
        return np.full((k, 1), v)

    A3b = np.vstack([
        np.hstack([np.zeros((ne1, nb1 + nb2)), col(0.5, ne1)]),
        np.hstack([np.zeros((ne1, nb1 + nb2)), col(0.5, ne1)]),
        np.hstack([np.zeros((ne2, nb1 + nb2)), col(-0.5, ne2)]),
        np.hstack([np.zeros((ne2, nb1 + nb2)), col(-0.5, ne2)]),
        np.hstack([J1, O12, col(0.5, nb1)]),
        np.hstack([-J1, O12, col(0.5, nb1)]),
        np.hstack([O21, J2, col(-0.5, nb2)]),
        np.hstack([O21, -J2, col(-0.5, nb2)]),
    ])
    b3 = np.concatenate([
        np.full(2 * ne1 + 2 * ne2, 0.5),
        np.zeros(nb1), np.ones(nb1),
        np.zeros(nb2), np.ones(nb2),
    ])

    G_c = np.hstack([Z1.G_c, Z2.G_c, np.zeros((n, nr))])
    G_b = np.hstack([Z1.G_b, Z2.G_b, Gb_hat[:, None]])
    E = _idiag(Z1.E, Z2.E, np.eye(nr))
    A_c = np.block([
        [Z1.A_c, np.zeros((nc1, q2 + ne1 + ne2 + nr))],
        [np.zeros((nc2, q1)), Z2.A_c, np.zeros((nc2, ne1 + ne2 + nr))],
        [np.zeros((nr, q1 + q2)), A3c, np.eye(nr)],
    ])
    A_b = np.vstack([
        np.hstack([Z1.A_b, np.zeros((nc1, nb2)), Ab1_hat[:, None]]),
        np.hstack([np.zeros((nc2, nb1)), Z2.A_b, Ab2_hat[:, None]]),
        A3b,
    ])
    b = np.concatenate([b1_hat, b2_hat, b3])
    R = np.block([
        [Z1.R, np.zeros((ne1, q2)), I1, Z12, np.zeros((ne1, nr))],
        [np.zeros((ne2, q1)), Z2.R, Z21, I2, np.zeros((ne2, nr))],
        [np.zeros((nr, q1 + q2 + ne1 + ne2)), np.eye(nr)],
    ]).astype(np.int64)
    return HybridPolynomialZonotope(c_hat, G_c, G_b, E, A_c, A_b, b, R)


def union_all(sets):
    """Union of a non-empty list of sets, folded as a balanced binary tree in list order."""
    sets = list(sets)
    if not sets:
        raise ValueError("union_all needs at least one set")
    while len(sets) > 1:
        nxt = [union(sets[i], sets[i + 1]) for i in range(0, len(sets) - 1, 2)]
        if len(sets) % 2:
            nxt.append(sets[-1])
        sets = nxt
    return sets[0]
