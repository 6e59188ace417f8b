"""Hybrid polynomial zonotope data type, evaluation and exact compaction.

A hybrid polynomial zonotope (HPZ) in ``R^n`` is the set

    { c + G_b xi_b + sum_i (prod_k xi_c[k] ** E[k, i]) G_c[:, i]
      :  A_b xi_b + sum_j (prod_k xi_c[k] ** R[k, j]) A_c[:, j] = b,
         xi_c in [-1, 1]^n_e,  xi_b in {-1, 1}^n_b }.

Instances are immutable; every operation returns a new object.
"""

import itertools
import os
from dataclasses import dataclass

import numpy as np

from hpz._poly import monomials
from hpz.errors import BudgetExceeded, DimensionMismatch, NegativeExponent, NonIntegerExponent

FEAS_TOL = 1e-9
DEFAULT_LEAF_CAP = 2**20


def leaf_cap():
    """Maximum number of binary leaves any enumeration may visit.

    ``HPZ_LEAF_CAP`` in the environment overrides the default of 2**20.
    """
    env = os.environ.get("HPZ_LEAF_CAP")
    return int(env) if env else DEFAULT_LEAF_CAP


def _as_matrix(M, rows, name):
    if M is None:
        return None
    M = np.asarray(M, dtype=float)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    elif M.ndim == 1:
        if rows is not None and M.size == rows and rows != 1:
            M = M.reshape(rows, 1)
        elif M.size == 0:
            M = M.reshape(rows or 0, 0)
        else:
            M = M.reshape(1, -1)
    if M.ndim != 2:
        raise DimensionMismatch(f"{name} must be a matrix, got {M.ndim}-d array")
    return M


def _as_exponents(M, name):
    M = np.asarray(M)
    if M.ndim == 1:
        M = M.reshape(-1, 1) if M.size else M.reshape(0, 0)
    if M.ndim != 2:
        raise DimensionMismatch(f"{name} must be a matrix, got {M.ndim}-d array")
    if M.size and not np.issubdtype(M.dtype, np.integer):
        Mf = M.astype(float)
        if not np.all(np.isfinite(Mf)) or np.any(Mf != np.round(Mf)):
            raise NonIntegerExponent(f"{name} has non-integer entries")
        M = np.round(Mf)
    M = M.astype(np.int64)
    if np.any(M < 0):
        raise NegativeExponent(f"{name} has negative entries")
    return M


def _frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


class HybridPolynomialZonotope:
    """Immutable eight-block HPZ ``<c, G_c, G_b, E, A_c, A_b, b, R>``.

    Missing blocks may be passed as ``None``: generators default to empty,
    ``E`` defaults to the identity (one fresh factor per generator) and the
    constraint blocks default to "no constraints". ``R`` defaults to the
    identity only when ``A_c`` has exactly ``n_e`` columns.

    Raises
    ------
    DimensionMismatch, NonIntegerExponent, NegativeExponent
        If the blocks do not describe a valid HPZ (see :func:`validate`).
    """

    __slots__ = ("c", "G_c", "G_b", "E", "A_c", "A_b", "b", "R")

    def __init__(self, c, G_c=None, G_b=None, E=None, A_c=None, A_b=None, b=None, R=None):
        c = np.asarray(c, dtype=float).reshape(-1)
        n = c.size
        G_c = _as_matrix(G_c, n, "G_c")
        G_c = np.zeros((n, 0)) if G_c is None else G_c
        G_b = _as_matrix(G_b, n, "G_b")
        G_b = np.zeros((n, 0)) if G_b is None else G_b
        E = np.eye(G_c.shape[1], dtype=np.int64) if E is None else _as_exponents(E, "E")

        n_c = None
        for blk in (A_c, A_b):
            if blk is not None and np.asarray(blk).size:
                n_c = np.atleast_2d(np.asarray(blk)).shape[0]
                break
        if n_c is None and b is not None:
            n_c = np.asarray(b).size
        n_c = n_c or 0
        b = np.zeros(n_c) if b is None else np.asarray(b, dtype=float).reshape(-1)
        A_c = _as_matrix(A_c, None, "A_c")
        if A_c is None or A_c.size == 0:
            A_c = np.zeros((n_c, 0)) if A_c is None or A_c.shape[0] != n_c else A_c
        A_b = _as_matrix(A_b, None, "A_b")
        if A_b is None or (A_b.size == 0 and A_b.shape[0] != n_c):
            A_b = np.zeros((n_c, G_b.shape[1]))
        if R is None:
            if A_c.shape[1] == 0:
                R = np.zeros((E.shape[0], 0), dtype=np.int64)
            elif A_c.shape[1] == E.shape[0]:
                R = np.eye(E.shape[0], dtype=np.int64)
            else:
                raise DimensionMismatch("R must be given when A_c is not square in the factor count")
        else:
            R = _as_exponents(R, "R")
            if R.size == 0 and A_c.shape[1] == 0:
                R = np.zeros((E.shape[0], 0), dtype=np.int64)
        for name, val in zip(self.__slots__, (c, G_c, G_b, E, A_c, A_b, b, R)):
            object.__setattr__(self, name, _frozen(val))
        validate(self)

    def __setattr__(self, name, value):
        raise AttributeError("HybridPolynomialZonotope is immutable")

    n = property(lambda self: self.c.shape[0], doc="Ambient dimension.")
    n_g = property(lambda self: self.G_c.shape[1], doc="Number of continuous generators.")
    n_b = property(lambda self: self.G_b.shape[1], doc="Number of binary factors.")
    n_e = property(lambda self: self.E.shape[0], doc="Number of continuous factors.")
    n_c = property(lambda self: self.b.shape[0], doc="Number of constraints.")
    n_q = property(lambda self: self.A_c.shape[1], doc="Number of constraint generators.")

    def blocks(self):
        return tuple(getattr(self, name) for name in self.__slots__)

    def replace(self, **kw):
        """Copy with some blocks replaced."""
        args = {name: getattr(self, name) for name in self.__slots__}
        args.update(kw)
        return HybridPolynomialZonotope(**args)

    def counts(self):
        return {"n": self.n, "n_g": self.n_g, "n_b": self.n_b, "n_e": self.n_e, "n_c": self.n_c, "n_q": self.n_q}

    def structurally_equal(self, other, atol=0.0):
        if not isinstance(other, HybridPolynomialZonotope):
            return False
        for x, y in zip(self.blocks(), other.blocks()):
            if x.shape != y.shape or not np.allclose(x, y, rtol=0.0, atol=atol):
                return False
        return True

    def __repr__(self):
        dims = ", ".join(f"{k}={v}" for k, v in self.counts().items())
        return f"HybridPolynomialZonotope({dims})"


def validate(Z):
    """Check every block-shape and exponent invariant of ``Z``.

    Raises
    ------
    DimensionMismatch
        Naming the first pair of blocks whose sizes disagree.
    NonIntegerExponent, NegativeExponent
        If ``E`` or ``R`` are not nonnegative integers.
    """
    c, G_c, G_b, E, A_c, A_b, b, R = Z.blocks()
    for name, M in (("E", E), ("R", R)):
        if M.size and not np.issubdtype(M.dtype, np.integer):
            if np.any(M != np.round(M)):
                raise NonIntegerExponent(f"{name} has non-integer entries")
        if np.any(M < 0):
            raise NegativeExponent(f"{name} has negative entries")
    checks = [
        ("c", c.shape[0], "G_c rows", G_c.shape[0]),
        ("c", c.shape[0], "G_b rows", G_b.shape[0]),
        ("G_c columns", G_c.shape[1], "E columns", E.shape[1]),
        ("A_c columns", A_c.shape[1], "R columns", R.shape[1]),
        ("E rows", E.shape[0], "R rows", R.shape[0]),
        ("b", b.shape[0], "A_c rows", A_c.shape[0]),
        ("b", b.shape[0], "A_b rows", A_b.shape[0]),
        ("G_b columns", G_b.shape[1], "A_b columns", A_b.shape[1]),
    ]
    for left, lv, right, rv in checks:
        if lv != rv:
            raise DimensionMismatch(f"{left} ({lv}) does not match {right} ({rv})")


@dataclass(frozen=True)
class FactorAssignment:
    """One point of the factor domain: ``xi_c`` in the unit box, ``xi_b`` in {-1, 1}."""

    xi_c: np.ndarray
    xi_b: np.ndarray

    def __post_init__(self):
        xi_c = np.asarray(self.xi_c, dtype=float).reshape(-1)
        xi_b = np.asarray(self.xi_b, dtype=float).reshape(-1)
        if np.any(np.abs(xi_c) > 1.0 + 1e-12):
            raise ValueError("continuous factors must lie in [-1, 1]")
        if np.any(np.abs(np.abs(xi_b) - 1.0) > 0):
            raise ValueError("binary factors must be -1 or +1")
        object.__setattr__(self, "xi_c", xi_c)
        object.__setattr__(self, "xi_b", xi_b)


def _check_assignment(Z, a):
    if a.xi_c.shape[0] != Z.n_e or a.xi_b.shape[0] != Z.n_b:
        raise DimensionMismatch(
            f"assignment has ({a.xi_c.shape[0]}, {a.xi_b.shape[0]}) factors, set has ({Z.n_e}, {Z.n_b})"
        )


def evaluate(Z, a):
    """Point of ``Z`` generated by the factor assignment ``a``."""
    _check_assignment(Z, a)
    return Z.c + Z.G_b @ a.xi_b + Z.G_c @ monomials(a.xi_c, Z.E)


def constraint_residual(Z, a):
    """Constraint residual ``A_b xi_b + A_c m(xi_c) - b`` (length ``n_c``)."""
    _check_assignment(Z, a)
    return Z.A_b @ a.xi_b + Z.A_c @ monomials(a.xi_c, Z.R) - Z.b


def is_feasible(Z, a, tol=FEAS_TOL):
    return bool(np.all(np.abs(constraint_residual(Z, a)) <= tol))


def binary_assignments(n_b, cap=None):
    """All of ``{-1, 1}^n_b`` in canonical order (first factor varies slowest)."""
    cap = leaf_cap() if cap is None else cap
    if 2**n_b > cap:
        raise BudgetExceeded(f"2^{n_b} binary leaves exceed the cap of {cap}")
    for bits in itertools.product((-1.0, 1.0), repeat=n_b):
        yield np.array(bits)


def fix_binaries(Z, xi_b):
    """The leaf of ``Z`` obtained by fixing its binary factors."""
    xi_b = np.asarray(xi_b, dtype=float)
    return HybridPolynomialZonotope(
        Z.c + Z.G_b @ xi_b, Z.G_c, None, Z.E, Z.A_c, np.zeros((Z.n_c, 0)), Z.b - Z.A_b @ xi_b, Z.R
    )


def _unique_columns(E):
    """``np.unique(E.T, axis=0)`` via a 1-D hash of each column, verified exactly."""
    w = np.arange(1, E.shape[0] + 1, dtype=np.uint64) * np.uint64(0x9E3779B97F4A7C15)
    keys = E.T.astype(np.uint64) @ w
    _, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    if not np.array_equal(E[:, first[inverse]], E):
        _, first, inverse = np.unique(E.T, axis=0, return_index=True, return_inverse=True)
        inverse = inverse.reshape(-1)
    return None, first, inverse


def merge_columns(G, E, drop_zero=True):
    """Sum columns of ``G`` that share an exponent column in ``E``.

    Columns keep the order of their first occurrence. Returns ``(G, E)``.
    """
    if E.shape[1] == 0:
        return G, E
    _, first, inverse = _unique_columns(E)
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    slot = rank[inverse]
    G_new = np.zeros((G.shape[0], order.size))
    np.add.at(G_new.T, slot, G.T)
    E_new = E[:, first[order]]
    if drop_zero:
        keep = np.any(G_new != 0, axis=0)
        G_new, E_new = G_new[:, keep], E_new[:, keep]
    return G_new, E_new


def fold_constants(Z):
    """Move zero-exponent generator columns into ``c`` (and constraint ones into ``b``).

    Afterwards every monomial of ``Z`` vanishes when all continuous factors are 0.
    """
    const_g = ~Z.E.any(axis=0)
    const_q = ~Z.R.any(axis=0)
    if not const_g.any() and not const_q.any():
        return Z
    return HybridPolynomialZonotope(
        Z.c + Z.G_c[:, const_g].sum(axis=1),
        Z.G_c[:, ~const_g],
        Z.G_b,
        Z.E[:, ~const_g],
        Z.A_c[:, ~const_q],
        Z.A_b,
        Z.b - Z.A_c[:, const_q].sum(axis=1),
        Z.R[:, ~const_q],
    )


def compact(Z):
    """Exact simplification of ``Z``.

    Constant monomials are folded into ``c`` and ``b``, generator and
    constraint columns with equal exponents are merged, zero columns are
    removed and factors that no longer occur anywhere are dropped. The
    represented set is unchanged.
    """
    Z = fold_constants(Z)
    G, E = merge_columns(Z.G_c, Z.E)
    A, R = merge_columns(Z.A_c, Z.R)
    used = E.any(axis=1) | R.any(axis=1)
    return HybridPolynomialZonotope(Z.c, G, Z.G_b, E[used], A, Z.A_b, Z.b, R[used])


def singleton(p):
    return HybridPolynomialZonotope(np.asarray(p, dtype=float))


def empty_set(n):
    """A canonical empty set in ``R^n``: a single constant constraint ``0 = 1``."""
    return HybridPolynomialZonotope(np.zeros(n), A_c=np.zeros((1, 0)), A_b=np.zeros((1, 0)), b=[1.0])


def from_zonotope(c, G):
    """Zonotope ``<c, G>`` with one fresh linear factor per generator."""
    c = np.asarray(c, dtype=float).reshape(-1)
    G = _as_matrix(G, c.size, "G")
    if G.shape[0] != c.size:
        raise DimensionMismatch(f"G has {G.shape[0]} rows, center has length {c.size}")
    return HybridPolynomialZonotope(c, G)


def from_box(lo, hi):
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    return from_zonotope((lo + hi) / 2, np.diag((hi - lo) / 2))


def from_constrained_zonotope(c, G, A, b):
    """Constrained zonotope ``<c, G, A, b>`` with ``E = R = I``."""
    c = np.asarray(c, dtype=float).reshape(-1)
    G = _as_matrix(G, c.size, "G")
    b = np.asarray(b, dtype=float).reshape(-1)
    A = _as_matrix(A, b.size, "A").reshape(b.size, -1)
    if A.shape[1] != G.shape[1]:
        raise DimensionMismatch(f"A has {A.shape[1]} columns, G has {G.shape[1]}")
    eye = np.eye(G.shape[1], dtype=np.int64)
    return HybridPolynomialZonotope(c, G, None, eye, A, None, b, eye)


def from_hybrid_zonotope(c, G_c, G_b, A_c=None, A_b=None, b=None):
    """Hybrid zonotope ``<G_c, G_b, c, A_c, A_b, b>`` with ``E = R = I``."""
    c = np.asarray(c, dtype=float).reshape(-1)
    G_c = _as_matrix(G_c, c.size, "G_c")
    G_b = _as_matrix(G_b, c.size, "G_b")
    n_g = G_c.shape[1]
    eye = np.eye(n_g, dtype=np.int64)
    if b is None or np.asarray(b).size == 0:
        return HybridPolynomialZonotope(c, G_c, G_b, eye)
    b = np.asarray(b, dtype=float).reshape(-1)
    A_c = np.asarray(A_c, dtype=float).reshape(b.size, -1)
    A_b = np.asarray(A_b, dtype=float).reshape(b.size, -1) if A_b is not None else np.zeros((b.size, G_b.shape[1]))
    if A_c.shape[1] != n_g:
        raise DimensionMismatch(f"A_c has {A_c.shape[1]} columns, G_c has {n_g}")
    return HybridPolynomialZonotope(c, G_c, G_b, eye, A_c, A_b, b, eye)


def from_cpz(c, G, E, A=None, b=None, R=None):
    """Constrained polynomial zonotope ``<c, G, E, A, b, R>`` (no binary factors)."""
    E = _as_exponents(E, "E")
    if b is None or np.asarray(b).size == 0:
        return HybridPolynomialZonotope(c, G, None, E)
    return HybridPolynomialZonotope(c, G, None, E, A, None, b, R)
