import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fockmodel.errors import NotMultiAnalyticError
from fockmodel.fock import TruncatedFock, build_Lambda, build_W, grading_projection
from fockmodel.multiplier import (
    MultiplierSymbol,
    apply_left_multiplier,
    apply_right_multiplier,
    build_L,
    build_R,
    gram_matrix,
    hatX_conjugate,
    intertwining_residual,
    left_multiplier_matrix,
    right_multiplier_matrix,
    symbol_from_commutant,
    u_g,
    u_g_adjoint,
    unitarity_residual,
)
from fockmodel.series import FreeSeries
from fockmodel.weights import WeightFamily, bergman_weights, dirichlet_weights, psi_weights, ratio_sups
from fockmodel.words import words_up_to


def rand_symbol(rng, n, degree, e1, e2):
    terms = {w: rng.normal(size=(e2, e1)) + 1j * rng.normal(size=(e2, e1)) for w in words_up_to(n, degree)}
    return MultiplierSymbol.from_terms(n, degree, terms, e1, e2)


def test_u_g_examples():
    flat = WeightFamily(FreeSeries.from_radial(2, [1.0] * 4), "table")
    assert np.allclose(u_g(flat), np.eye(15))
    U = u_g(bergman_weights(2, 2.0, 2))
    assert U[1, 1] == pytest.approx(np.sqrt(2)) and U[0, 0] == 1
    for wf in (bergman_weights(2, 2.5, 3), dirichlet_weights(2, 1.0, 3)):
        assert unitarity_residual(wf) < 1e-14


def test_u_g_conjugates_W_to_L():
    wf = bergman_weights(2, 2.5, 3)
    U, Us = u_g(wf), u_g_adjoint(wf)
    for Wi, Li in zip(build_W(wf).mats, build_L(wf, basis="Z")):
        assert np.abs(U @ Wi @ Us - Li).max() < 1e-14
    for Li, Wi in zip(build_L(wf), build_W(wf).mats):
        assert np.array_equal(Li, Wi)


def test_L_norm_and_adjoint_in_weighted_product():
    wf = bergman_weights(2, 2.0, 4)
    L = build_L(wf, basis="Z")
    G = gram_matrix(wf)
    for Li in L:
        # operator norm in the weighted inner product
        H = np.sqrt(G)
        nrm = np.linalg.norm(H @ Li @ np.linalg.inv(H), 2)
        assert nrm**2 == pytest.approx(ratio_sups(wf)[0].max(), rel=1e-12)


def test_left_equals_right_for_one_letter():
    wf = bergman_weights(1, 2.0, 6)
    assert np.array_equal(build_L(wf)[0], build_R(wf)[0])


def test_apply_examples():
    n, N = 2, 2
    phi = MultiplierSymbol.from_terms(n, 1, {(1,): np.eye(1)}, 1, 1)
    zeta = np.zeros((7, 1), dtype=complex)
    zeta[TruncatedFock(n, N).index((2,))] = 1
    out = apply_right_multiplier(phi, zeta)
    assert out[TruncatedFock(n, N).index((2, 1)), 0] == 1 and np.count_nonzero(out) == 1
    out = apply_left_multiplier(phi, zeta)
    assert out[TruncatedFock(n, N).index((1, 2)), 0] == 1 and np.count_nonzero(out) == 1
    with pytest.raises(ValueError):
        apply_right_multiplier(phi, np.zeros((7, 2)))


def test_apply_matches_bruteforce_product(rng):
    n, N = 2, 3
    phi = rand_symbol(rng, n, 2, 2, 3)
    zeta = rng.normal(size=(15, 2)) + 1j * rng.normal(size=(15, 2))
    fock = TruncatedFock(n, N)
    right = np.zeros((15, 3), dtype=complex)
    left = np.zeros((15, 3), dtype=complex)
    for a in words_up_to(n, N):
        for b in words_up_to(n, 2):
            if len(a) + len(b) <= N:
                right[fock.index(a + b)] += phi[b] @ zeta[fock.index(a)]
                left[fock.index(b + a)] += phi[b] @ zeta[fock.index(a)]
    assert np.abs(apply_right_multiplier(phi, zeta) - right).max() < 1e-12
    assert np.abs(apply_left_multiplier(phi, zeta) - left).max() < 1e-12


@given(st.integers(0, 2**32 - 1))
def test_round_trip(seed):
    rng = np.random.default_rng(seed)
    g, f = bergman_weights(2, 2.5, 3), dirichlet_weights(2, 1.0, 3)
    phi = rand_symbol(rng, 2, 3, 2, 2)
    X = right_multiplier_matrix(phi, g, f)
    rec, res = symbol_from_commutant(X, g, f, 2, 2)
    assert res <= 1e-10 and rec.max_abs_diff(phi) <= 1e-10


def test_right_multiplier_of_generator():
    wf = bergman_weights(2, 2.0, 3)
    phi = MultiplierSymbol.from_terms(2, 1, {(1,): np.eye(1)}, 1, 1)
    R = right_multiplier_matrix(phi, wf, wf)
    assert np.abs(R - build_R(wf)[0]).max() < 1e-15
    rec, res = symbol_from_commutant(R, wf, wf, 1, 1)
    assert res < 1e-15 and rec.max_abs_diff(phi) < 1e-14


def test_left_generator_is_rejected_for_two_letters():
    wf = bergman_weights(2, 2.0, 3)
    with pytest.raises(NotMultiAnalyticError):
        symbol_from_commutant(build_L(wf)[0], wf, wf, 1, 1)
    one = bergman_weights(1, 2.0, 5)
    rec, _ = symbol_from_commutant(build_L(one)[0], one, one, 1, 1)
    assert rec[(1,)][0, 0] == pytest.approx(1)


def test_projection_is_rejected():
    wf = bergman_weights(2, 2.0, 3)
    with pytest.raises(NotMultiAnalyticError):
        symbol_from_commutant(grading_projection(TruncatedFock(2, 3), 1), wf, wf, 1, 1)
    with pytest.raises(ValueError):
        symbol_from_commutant(np.eye(5), wf, wf, 1, 1)


def test_hatX_examples(rng):
    wf = bergman_weights(2, 2.5, 3)
    one = MultiplierSymbol.identity(2, 0, 1)
    X = right_multiplier_matrix(one, wf, wf, N=3)
    assert np.allclose(hatX_conjugate(X, wf, wf, 1, 1), np.eye(15))
    g, f = bergman_weights(2, 1.0, 3), bergman_weights(2, 2.0, 3)
    X = right_multiplier_matrix(one, g, f, N=3)
    expected = np.sqrt(np.concatenate(g.bb) / np.concatenate(f.bb))
    assert np.allclose(hatX_conjugate(X, g, f, 1, 1), np.diag(expected))


def test_hatX_intertwines_right_creations(rng):
    g, f = bergman_weights(2, 2.5, 3), psi_weights(FreeSeries.from_terms(2, 1, {(1,): 1.0, (2,): 0.5}), 1.5, 3)
    phi = rand_symbol(rng, 2, 2, 2, 1)
    X = right_multiplier_matrix(phi, g, f)
    H = hatX_conjugate(X, g, f, 2, 1)
    assert intertwining_residual(H, g, f, 3, 2, 1, side="left") <= 1e-12


def test_left_multiplier_commutes_with_right_multiplications(rng):
    wf = bergman_weights(2, 2.5, 3)
    phi = rand_symbol(rng, 2, 2, 1, 1)
    X = left_multiplier_matrix(phi, wf, wf)
    assert intertwining_residual(X, wf, wf, 3, 1, 1, side="right") <= 1e-12
    assert intertwining_residual(right_multiplier_matrix(phi, wf, wf), wf, wf, 3, 1, 1, side="left") <= 1e-12
    L = build_Lambda(wf)
    assert np.array_equal(build_R(wf)[1], L[2])


def test_symbol_json(rng):
    phi = rand_symbol(rng, 2, 2, 2, 3)
    data = json.loads(json.dumps(phi.to_json()))
    assert set(data) == {"n", "degree", "e1", "e2", "terms"}
    assert MultiplierSymbol.from_json(data).max_abs_diff(phi) == 0
