"""Monomial arithmetic and a box-constrained Gauss-Newton solver.

Everything here works on raw arrays so that the sampler, the membership
search and the emptiness test can share one numerical kernel.
"""

import numpy as np


def monomials(xi, E):
    """Evaluate the monomials ``prod_k xi_k ** E[k, i]`` for every column ``i``.

    Parameters
    ----------
    xi : ndarray
        Factor values, shape ``(n_e,)`` or ``(P, n_e)``.
    E : ndarray
        Integer exponent matrix, shape ``(n_e, m)``.

    Returns
    -------
    ndarray
        Shape ``(m,)`` or ``(P, m)``. ``0 ** 0`` evaluates to 1.
    """
    X = np.asarray(xi, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    out = np.ones((X.shape[0], E.shape[1]))
    for k in np.flatnonzero(E.any(axis=1)):
        out *= X[:, [k]] ** E[k]
    return out[0] if single else out


def monomial_jacobian(xi, E):
    """Derivatives of the monomials at a single point, shape ``(m, n_e)``."""
    xi = np.asarray(xi, dtype=float)
    n_e, m = E.shape
    if n_e == 0 or m == 0:
        return np.zeros((m, n_e))
    pw = xi[:, None] ** E
    ones = np.ones((1, m))
    prefix = np.cumprod(np.vstack([ones, pw[:-1]]), axis=0)
    suffix = np.cumprod(np.vstack([ones, pw[:0:-1]]), axis=0)[::-1]
    dpw = E * xi[:, None] ** np.maximum(E - 1, 0)
    return (prefix * suffix * dpw).T


def monomial_ranges(E):
    """Exact range of each monomial over the unit box.

    A monomial with only even exponents lies in [0, 1], a constant is 1 and
    anything with an odd exponent spans [-1, 1].
    """
    E = np.asarray(E)
    lo = -np.ones(E.shape[1])
    hi = np.ones(E.shape[1])
    if E.shape[1] == 0:
        return lo, hi
    const = ~E.any(axis=0)
    even = ~(E % 2).any(axis=0)
    lo[even] = 0.0
    lo[const] = 1.0
    return lo, hi


def linear_range(coef, lo, hi):
    """Interval of ``coef @ v`` for ``v`` in the box ``[lo, hi]`` (row-wise)."""
    coef = np.atleast_2d(coef)
    pos = np.clip(coef, 0, None)
    neg = np.clip(coef, None, 0)
    return pos @ lo + neg @ hi, pos @ hi + neg @ lo


def box_gauss_newton(fun, x0, max_iter=50, tol=1e-9, lower=-1.0, upper=1.0):
    """Minimise ``||F(x)||`` over a box with damped, projected Gauss-Newton.

    ``fun(x)`` returns ``(F, J)``. Variables sitting on a bound whose step
    points outward are frozen for that iteration; step length is chosen by
    backtracking on the squared residual (Armijo constant 1e-4).

    Returns the final point and its residual vector.
    """
    x = np.clip(np.asarray(x0, dtype=float), lower, upper)
    F, J = fun(x)
    if x.size == 0:
        return x, F
    for _ in range(max_iter):
        if F.size == 0 or np.max(np.abs(F)) <= tol:
            break
        step = np.linalg.lstsq(J, -F, rcond=None)[0]
        blocked = ((x >= upper) & (step > 0)) | ((x <= lower) & (step < 0))
        if blocked.any():
            Jf = J.copy()
            Jf[:, blocked] = 0.0
            step = np.linalg.lstsq(Jf, -F, rcond=None)[0]
            step[blocked] = 0.0
        f0 = F @ F
        t = 1.0
        while t >= 1e-8:
            xn = np.clip(x + t * step, lower, upper)
            Fn, Jn = fun(xn)
            if Fn @ Fn < (1.0 - 1e-4 * t) * f0:
                break
            t *= 0.5
        else:
            break
        x, F, J = xn, Fn, Jn
    return x, F
