"""Reparametrization group: matrix entries, composition, homomorphism law."""

import random

import pytest

from jetres.exactalg import MultiPoly, Q
from jetres.jetgroup import (
    JetReparam,
    alpha_context,
    reparam_compose,
    reparam_matrix,
    reparam_matrix_symbolic,
)


def test_identity_matrix():
    for k in (1, 2, 4):
        phi = JetReparam.identity(k)
        mat = reparam_matrix(phi)
        for i in range(k):
            for j in range(k):
                assert mat[i][j] == (1 if i == j else 0)


def test_k2_symbolic_matrix():
    ctx = alpha_context(2)
    a1 = MultiPoly.variable(ctx, "a1")
    a2 = MultiPoly.variable(ctx, "a2")
    mat = reparam_matrix_symbolic(2)
    assert mat[0][0] == a1
    assert mat[0][1] == a2
    assert mat[1][0].is_zero
    assert mat[1][1] == a1**2


def test_k3_entry_two_compositions():
    # entry (2, 3) collects the compositions 3 = 1+2 = 2+1
    ctx = alpha_context(3)
    a1 = MultiPoly.variable(ctx, "a1")
    a2 = MultiPoly.variable(ctx, "a2")
    mat = reparam_matrix_symbolic(3)
    assert mat[1][2] == 2 * a1 * a2


def test_upper_triangular_with_power_diagonal():
    rng = random.Random(5)
    for k in (2, 3, 5):
        alpha = tuple(Q(rng.randint(1, 9), rng.randint(1, 4)) for _ in range(k))
        mat = reparam_matrix(JetReparam(alpha))
        for i in range(k):
            assert mat[i][i] == alpha[0] ** (i + 1)
            for j in range(i):
                assert mat[i][j] == 0


def test_scaling_action_is_weighted_diagonal():
    lam = Q(7, 3)
    k = 5
    phi = JetReparam((lam,) + (Q(0),) * (k - 1))
    mat = reparam_matrix(phi)
    for i in range(k):
        for j in range(k):
            assert mat[i][j] == (lam ** (i + 1) if i == j else 0)


def test_compose_with_identity():
    phi = JetReparam((Q(2), Q(1, 3), Q(-1)))
    assert reparam_compose(phi, JetReparam.identity(3)) == phi
    assert reparam_compose(JetReparam.identity(3), phi) == phi


def test_compose_k2_hand_formula():
    a1, a2, b1, b2 = Q(2), Q(3), Q(5), Q(-1)
    phi = JetReparam((a1, a2))
    psi = JetReparam((b1, b2))
    composed = reparam_compose(phi, psi)
    assert composed.alpha == (a1 * b1, a1 * b2 + a2 * b1**2)


def _matmul(A, B):
    k = len(A)
    return [[sum(A[i][m] * B[m][j] for m in range(k)) for j in range(k)] for i in range(k)]


def test_matrix_homomorphism_random():
    # matrix(compose(phi, psi)) == matrix(phi) * matrix(psi), row-vector action
    rng = random.Random(17)
    for k in range(2, 7):
        for _ in range(8):
            phi = JetReparam(tuple(Q(rng.randint(1, 6), rng.randint(1, 3)) for _ in range(k)))
            psi = JetReparam(tuple(Q(rng.randint(1, 6), rng.randint(1, 3)) for _ in range(k)))
            lhs = reparam_matrix(reparam_compose(phi, psi))
            rhs = _matmul(reparam_matrix(phi), reparam_matrix(psi))
            assert lhs == rhs


def test_invalid_arguments():
    with pytest.raises(ValueError):
        JetReparam(())
    with pytest.raises(ValueError):
        JetReparam((Q(0), Q(1)))
    with pytest.raises(ValueError):
        reparam_compose(JetReparam.identity(2), JetReparam.identity(3))
    with pytest.raises(ValueError):
        reparam_matrix_symbolic(0)


def test_unipotent_flag():
    assert JetReparam((Q(1), Q(5))).is_unipotent
    assert not JetReparam((Q(2), Q(5))).is_unipotent
