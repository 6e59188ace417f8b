"""Reference sets and the two-mode quadratic benchmark system."""

import numpy as np

from hpz.core import HybridPolynomialZonotope, from_cpz, from_hybrid_zonotope

CPZ1_C = np.zeros(2)
CPZ1_G = np.array([[1.0, 0.0, 1.5, 0.5], [0.0, 1.0, 2.0, -2.0]])
CPZ1_E = np.array([[1, 0, 0, 0], [0, 1, 0, 2], [0, 0, 1, 1]])
CPZ1_A = np.array([[1.0, 2.0, 0.5]])
CPZ1_B = np.array([1.0])
CPZ1_R = np.diag([1, 1, 3])
GB1 = np.array([[3.0, 1.0, 4.0], [1.0, 3.0, -4.0]])
AB2 = np.array([[1.5, 1.5, 1.5]])


def cpz1():
    """Constrained polynomial zonotope with three factors and one cubic constraint."""
    return from_cpz(CPZ1_C, CPZ1_G, CPZ1_E, CPZ1_A, CPZ1_B, CPZ1_R)


def hz1():
    """Unconstrained hybrid zonotope with CPZ1's generators used linearly."""
    return from_hybrid_zonotope(CPZ1_C, CPZ1_G, GB1)


def hpz1():
    """CPZ1 shifted by three binary generators (eight translated copies)."""
    return HybridPolynomialZonotope(
        CPZ1_C, CPZ1_G, GB1, CPZ1_E, CPZ1_A, np.zeros((1, 3)), CPZ1_B, CPZ1_R
    )


def hpz2():
    """Like :func:`hpz1` but the binaries also enter the constraint."""
    return HybridPolynomialZonotope(CPZ1_C, CPZ1_G, GB1, CPZ1_E, CPZ1_A, AB2, CPZ1_B, CPZ1_R)


def example1():
    return {"cpz1": cpz1(), "hz": hz1(), "hpz1": hpz1(), "hpz2": hpz2()}


PWNA_M1 = np.array([[0.017, -0.0028], [0.0, 0.017]])
PWNA_M2 = np.array([[-0.1, 0.0], [0.0, -0.1]])
PWNA_A1 = np.array([[0.75, 0.25], [-0.25, 0.75]])
PWNA_A2 = np.array([[0.75, -0.25], [0.25, 0.75]])
PWNA_D = np.array([0.25, -0.5])
PWNA_C0 = np.array([-0.201, 0.96])
PWNA_G0 = 0.2 * np.eye(2)
PWNA_HORIZON = 5


def pwna_model(horizon=PWNA_HORIZON):
    """Two-mode quadratic system switching on the sign of ``x1``.

    Each output coordinate uses the same quadratic form (the scalar
    ``x^T M x`` is added to both coordinates). The open region ``x1 > 0`` is
    closed to ``-x1 <= 0``.
    """
    from hpz.nonlinear import QuadraticAffineMap
    from hpz.reach import Mode, Polyhedron, PwnaModel
    from hpz.core import from_zonotope

    modes = [
        Mode(Polyhedron([[1.0, 0.0]], [0.0]), QuadraticAffineMap([PWNA_M1, PWNA_M1], PWNA_A1, PWNA_D)),
        Mode(Polyhedron([[-1.0, 0.0]], [0.0]), QuadraticAffineMap([PWNA_M2, PWNA_M2], PWNA_A2, PWNA_D)),
    ]
    return PwnaModel(2, modes, from_zonotope(PWNA_C0, PWNA_G0), horizon=horizon)
