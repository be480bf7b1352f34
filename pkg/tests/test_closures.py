from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import legendre as npleg

from swme import blocks
from swme.closures import (
    BlockLinearForm,
    beta_factored_sequence,
    build_general_closure,
    closure_from_target,
    degree,
    exact_sequence,
    hswme_a22_sequence,
    legendre_derivative_series,
    legendre_unit,
    match_last_row,
    numeric_last_row,
    partner_block,
    partner_of_callable,
    spec_from_json,
    spec_to_json,
    table_exact_matrix,
    validate_block_invariance,
    xi_times,
)
from swme.errors import DegreeMismatch, SingularMatch
from swme.models import coefficient_matrices
from swme.spectral import Classification, invariance_residual, report_from_matrix
from swme.state import PrimitiveState


def as_float(series):
    return np.array([float(x) for x in series])


# -- block forms -------------------------------------------------------------------

def test_basis_terms():
    a = BlockLinearForm((1, 0, 0, 0, 0, 0))
    assert np.array_equal(a(2.0, 3.0), [[2, 0], [3, 0]])
    a = BlockLinearForm((0, 0, 0, 0, 0, 1))
    assert np.array_equal(a(2.0, 3.0), [[0, 3], [0, -2]])


def test_partner_examples():
    a = BlockLinearForm((1, 2, 3, 4, 5, 6))
    assert partner_block(a).c == (-5.0, -6.0, -4.0, 3.0, 1.0, 2.0)
    # uniform velocity block u I maps to v I
    u_block = BlockLinearForm((0, 0, 1, 0, 0, 0))
    assert np.array_equal(partner_block(u_block)(0.3, 0.7), 0.7 * np.eye(2))


def test_partner_squared_is_negation():
    rng = np.random.default_rng(0)
    for _ in range(10):
        a = BlockLinearForm(tuple(rng.normal(size=6)))
        assert np.allclose(partner_block(partner_block(a)).c, [-x for x in a.c])


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=6, max_size=6))
def test_partner_satisfies_invariance(c):
    a = BlockLinearForm(tuple(c))
    assert validate_block_invariance(a, partner_block(a), samples=16) <= 1e-12 * (1 + max(map(abs, c)))


def test_partner_rule_on_callable_agrees():
    a = BlockLinearForm((0.5, -1.0, 2.0, 0.25, -0.75, 1.5))
    b1, b2 = partner_block(a), partner_of_callable(a)
    for p, q in [(0.3, -0.4), (1.0, 2.0)]:
        assert np.allclose(b1(p, q), b2(p, q))


def test_wrong_partner_detected():
    a = BlockLinearForm((1, 0, 1, 0, 0.5, 0))
    wrong = BlockLinearForm(partner_block(a).c[:5] + (3.0,))
    assert validate_block_invariance(a, wrong) > 0.1
    assert validate_block_invariance(a, a) > 0.1


# -- exact polynomial helpers ----------------------------------------------------------

def test_xi_times_matches_numpy():
    c = [Fr(1), Fr(-2, 3), Fr(0), Fr(5, 7)]
    assert np.allclose(as_float(xi_times(c)), npleg.legmulx(as_float(c)))


@pytest.mark.parametrize("m", range(0, 9))
def test_derivative_series_matches_numpy(m):
    ref = npleg.legder(as_float(legendre_unit(m)))
    got = as_float(legendre_derivative_series(m))
    n = max(ref.size, got.size)
    assert np.allclose(np.pad(got, (0, n - got.size)), np.pad(ref, (0, n - ref.size)))


def test_degree():
    assert degree([Fr(0)]) == -1
    assert degree([Fr(1), Fr(0), Fr(2), Fr(0)]) == 2


def last_polynomial(M, N):
    """q_{N+1} of an exact (N+1)x(N+1) table matrix, whose last row has no superdiagonal."""
    qs = exact_sequence(M, N)
    acc = xi_times(qs[N])
    for j in range(N + 1):
        acc = [a - Fr(M[N][j]) * (qs[j][m] if m < len(qs[j]) else 0) for m, a in enumerate(acc)]
    return acc


def example_row(N):
    row = blocks.example_last_row(N)
    return tuple(row.get(J, (Fr(0), Fr(0))) for J in range(N + 1))


@pytest.mark.parametrize("N", [1, 2, 4, 7])
def test_hswme_second_block_sequence(N):
    """q_i of the hyperbolic second block are multiples of P_i."""
    _, K22 = blocks.hswme_tables(N)
    M = table_exact_matrix(K22, N)
    qs = exact_sequence(M, N) + [last_polynomial(M, N)]
    for i, q in enumerate(qs):
        assert degree(q) == i and all(x == 0 for x in q[:i])


@pytest.mark.parametrize("N", range(2, 11))
def test_match_reproduces_example_row(N):
    _, K22 = blocks.hswme_tables(N)
    target = legendre_derivative_series(N + 2)
    res = match_last_row(table_exact_matrix(K22, N), target)
    assert res.as_row() == example_row(N)
    q = last_polynomial(table_exact_matrix(blocks.example_tables(N)[1], N), N)
    pad = max(len(q), len(target))
    q, target = q + [Fr(0)] * (pad - len(q)), target + [Fr(0)] * (pad - len(target))
    assert all(x == res.kappa * t for x, t in zip(q, target))


@pytest.mark.parametrize("N", range(3, 9))
def test_match_beta_factored_sequence(N):
    """Matching the factored first-block polynomials recovers the beta sub-diagonal entry."""
    res = match_last_row(beta_factored_sequence(N), legendre_unit(N), free=[N + 1, N + 2])
    K11, _ = blocks.beta_tables(N)
    assert res.entries[N + 1] == K11[N, N - 1]
    assert res.entries[N + 2] == (Fr(1), Fr(0))


def test_match_fixed_point_returns_hyperbolic_row():
    N = 3
    res = match_last_row(hswme_a22_sequence(N), legendre_unit(N + 1))
    row = res.as_row()
    assert row[-1] == (Fr(1), Fr(0)) and row[-2] == (Fr(0), Fr(3, 5))
    assert all(e == (0, 0) for e in row[:-2])


def test_match_shifted_target():
    # (xi - 1/2) P_2: the hyperbolic second-block spectrum shifted by -1/2 in its last node
    t = [Fr(0), Fr(2, 5), Fr(-1, 2), Fr(3, 5)]
    row = closure_from_target(2, t).spec.last_row_A22
    assert row == ((Fr(0), Fr(0)), (Fr(0), Fr(0)), (Fr(1), Fr(1, 2)))


def test_match_errors():
    with pytest.raises(DegreeMismatch):
        match_last_row(hswme_a22_sequence(2), legendre_unit(5))
    with pytest.raises(SingularMatch):
        match_last_row(hswme_a22_sequence(2), legendre_unit(3), free=[1, 2])
    with pytest.raises(SingularMatch):
        # only the diagonal is free; P_3 + P_1 needs the sub-diagonal too
        match_last_row(hswme_a22_sequence(2), [Fr(0), Fr(1), Fr(0), Fr(1)], free=[3])


# -- closures ------------------------------------------------------------------------------

@pytest.mark.parametrize("N", [1, 2, 3, 5])
def test_general_closure_equals_example(N):
    clo = build_general_closure(N)
    rng = np.random.default_rng(N)
    V = PrimitiveState(1.2, 0.3, -0.1, rng.uniform(-1, 1, N), rng.uniform(-1, 1, N))
    A, B = clo.matrices(V)
    Ae, Be = coefficient_matrices(V, "example")
    assert np.allclose(A, Ae, atol=1e-14) and np.allclose(B, Be, atol=1e-14)
    assert invariance_residual(V, clo.variant, 0.9) < 1e-12


@pytest.mark.parametrize("N", range(2, 11))
def test_general_closure_certification(N):
    clo = build_general_closure(N)
    assert clo.spec.certification == ((0.0, "Hyperbolic"), (0.5, "WeaklyHyperbolic"))
    V = PrimitiveState(1.0, 0.0, 0.0, [1.0] + [0.0] * (N - 1), [0.0] * N)
    rep = report_from_matrix(clo.matrices(V)[0])
    assert rep.classification is Classification.HYPERBOLIC and rep.distinct


def test_lobatto_closure_changes_row():
    N = 3
    clo = closure_from_target(N, legendre_derivative_series(N + 2))
    hyp = blocks.hswme_tables(N)[1]
    row_h = tuple(hyp.get((N, J), (Fr(0), Fr(0))) for J in range(N + 1))
    assert clo.spec.last_row_A22 != row_h
    assert numeric_last_row(clo.spec, 0.0, 1.0)[-2] == pytest.approx(float(clo.spec.last_row_A22[-2][1]))


@pytest.mark.parametrize("N", [1, 2, 4])
def test_json_round_trip(N):
    spec = build_general_closure(N).spec
    back = spec_from_json(spec_to_json(spec))
    assert back == spec
