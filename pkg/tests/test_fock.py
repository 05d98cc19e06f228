import json

import numpy as np
import pytest
import scipy.sparse as sp

from fockmodel.fock import (
    OperatorTuple,
    TruncatedFock,
    build_Lambda,
    build_Lambda_sparse,
    build_W,
    build_W_sparse,
    diag_compactness_matrix,
    direct_sum,
    grading_projection,
    model_completeness,
    model_defect,
    polynomial_in,
    vacuum_projection,
)
from fockmodel.series import FreeSeries
from fockmodel.weights import bergman_weights, dirichlet_weights, diagonal_decay_probe, psi_weights
from fockmodel.words import words_up_to

PHI = FreeSeries.from_terms(2, 1, {(1,): 2.0, (2,): 1.0})
FAMILIES = [
    bergman_weights(2, 0.5, 5),
    bergman_weights(2, 1.0, 5),
    bergman_weights(2, 2.5, 5),
    dirichlet_weights(2, -1.0, 5),
    dirichlet_weights(2, 0.0, 5),
    dirichlet_weights(2, 1.0, 5),
    psi_weights(PHI, 1.5, 5),
]


def test_truncated_fock_blocks():
    F = TruncatedFock(2, 3)
    assert F.dim == 15
    sizes = [F.block(k).stop - F.block(k).start for k in range(4)]
    assert sizes == [1, 2, 4, 8]
    assert F.index((2, 1)) == 5
    assert F.interior().sum() == 7 and F.interior(3).sum() == 21
    with pytest.raises(ValueError):
        F.block(4)
    with pytest.raises(IndexError):
        F.index((1, 1, 1, 1))


def test_W_entries_exhaustive():
    wf = bergman_weights(2, 2.0, 4)
    W = build_W(wf)
    F = TruncatedFock(2, 4)
    for beta in words_up_to(2, 4):
        for gamma in words_up_to(2, 4 - len(beta)):
            col = W.word(beta)[:, F.index(gamma)]
            expect = np.sqrt(wf.weight(gamma) / wf.weight(beta + gamma))
            assert col[F.index(beta + gamma)] == pytest.approx(expect, abs=1e-14)
            assert np.count_nonzero(np.abs(col) > 1e-15) == 1
    assert W[1][F.index((1,)), 0] == pytest.approx(1 / np.sqrt(2))


def test_W_top_degree_drop_and_orthogonal_ranges():
    W = build_W(bergman_weights(2, 2.5, 3))
    top = TruncatedFock(2, 3).block(3)
    assert np.all(W.mats[:, :, top] == 0)
    assert np.abs(W[1].conj().T @ W[2]).max() == 0


def test_unweighted_shifts():
    W = build_W(bergman_weights(2, 1.0, 3))
    assert set(np.unique(W.mats.real)) == {0.0, 1.0}


def test_lambda_and_commutation():
    for wf in FAMILIES:
        W, L = build_W(wf), build_Lambda(wf)
        for i in range(2):
            for j in range(2):
                assert np.abs(W.mats[i] @ L.mats[j] - L.mats[j] @ W.mats[i]).max() == pytest.approx(0, abs=1e-15)
    wf1 = bergman_weights(1, 2.5, 6)
    assert np.array_equal(build_W(wf1).mats, build_Lambda(wf1).mats)


def test_lambda_is_right_concatenation():
    wf = dirichlet_weights(2, 1.0, 3)
    L = build_Lambda(wf)
    F = TruncatedFock(2, 3)
    v = L[2][:, F.index((1,))]
    assert np.argmax(np.abs(v)) == F.index((1, 2))
    assert v[F.index((1, 2))] == pytest.approx(np.sqrt(2 / 3))


def test_sparse_matches_dense():
    wf = bergman_weights(3, 1.5, 3)
    for Ws, Wd in zip(build_W_sparse(wf), build_W(wf).mats):
        assert sp.issparse(Ws) and np.array_equal(Ws.toarray(), Wd)
        assert np.all(np.diff(Ws.tocsc().indptr) <= 1)
    for Ls, Ld in zip(build_Lambda_sparse(wf), build_Lambda(wf).mats):
        assert np.array_equal(Ls.toarray(), Ld)


def test_insufficient_degree():
    with pytest.raises(ValueError):
        build_W(bergman_weights(2, 1.0, 2), 3)


def test_grading_projections():
    F = TruncatedFock(2, 3)
    Qs = [grading_projection(F, p) for p in range(4)]
    assert np.array_equal(sum(Qs), np.eye(F.dim))
    assert [int(np.trace(Q)) for Q in Qs] == [1, 2, 4, 8]
    assert np.abs(Qs[1] @ Qs[2]).max() == 0
    assert vacuum_projection(F)[0, 0] == 1 and np.trace(vacuum_projection(F)) == 1


@pytest.mark.parametrize("wf", FAMILIES, ids=lambda w: f"{w.kind}-{w.params.get('s')}")
def test_model_identities(wf):
    P = np.zeros((wf.b_flat.size,) * 2)
    P[0, 0] = 1
    assert np.abs(model_defect(wf) - P).max() <= 1e-12
    assert np.abs(model_completeness(wf) - np.eye(P.shape[0])).max() <= 1e-12


def test_ball_defect_is_row_defect():
    W = build_W(bergman_weights(2, 1.0, 4))
    assert np.allclose(np.eye(W.dim) - W.row_sum(), model_defect(bergman_weights(2, 1.0, 4)))


def test_completeness_single_term():
    wf = bergman_weights(2, 2.5, 3)
    W = build_W(wf)
    F = TruncatedFock(2, 3)
    a = (2, 1)
    Wa = W.word(a)
    term = wf.weight(a) * Wa[:, [0]] @ Wa[:, [0]].conj().T
    E = np.zeros((F.dim, F.dim))
    E[F.index(a), F.index(a)] = 1
    assert np.allclose(term, E)


def test_diag_compactness():
    wf = bergman_weights(2, 2.0, 6)
    D = diag_compactness_matrix(wf, 6, 1)
    assert np.abs(D - np.diag(np.diag(D))).max() == 0
    d = np.diag(D).real
    F = TruncatedFock(2, 6)
    assert d[0] == pytest.approx(wf.weight(()) / wf.weight((1,)))
    probe = diagonal_decay_probe(wf, 1)
    for k in range(4):  # entries g_p gamma with |gamma| = k, interior degrees
        vals = d[F.block(k + 1)]
        assert np.abs(vals).max() == pytest.approx(probe.per_degree[k], abs=1e-14)
    ball = diag_compactness_matrix(bergman_weights(2, 1.0, 4), 4, 2)
    assert np.diag(ball)[0] == 1 and np.allclose(np.diag(ball)[1:7], 0)


def test_nested_truncations_agree():
    """Words evaluated inside low degrees do not see the truncation."""
    small, big = build_W(bergman_weights(2, 2.5, 3)), build_W(bergman_weights(2, 2.5, 5))
    d = TruncatedFock(2, 2).dim
    for a in words_up_to(2, 2):
        for b in words_up_to(2, 2):
            M1 = small.word(a) @ small.word(b).conj().T
            M2 = big.word(a) @ big.word(b).conj().T
            assert np.allclose(M1[:d, :d], M2[:d, :d], atol=1e-14)


def test_operator_tuple_utilities(rng):
    T = OperatorTuple(rng.normal(size=(2, 3, 3)))
    assert T.n == 2 and T.dim == 3 and np.array_equal(T[2], T.mats[1])
    assert np.allclose(T.word((1, 2)), T[1] @ T[2])
    assert np.allclose(T.row_sum(), T[1] @ T[1].T + T[2] @ T[2].T)
    S = direct_sum(T, T.scaled(2))
    assert S.dim == 6 and np.allclose(S[1][3:, 3:], 2 * T[1])
    assert T.tensor_identity(2).dim == 6
    Q, _ = np.linalg.qr(rng.normal(size=(3, 2)))
    assert T.compress(Q).dim == 2
    back = OperatorTuple.from_json(json.loads(json.dumps(T.to_json())))
    assert np.array_equal(back.mats, T.mats)
    assert np.allclose(polynomial_in(T, {(): 2, (1, 2): 3}), 2 * np.eye(3) + 3 * T[1] @ T[2])
    with pytest.raises(ValueError):
        OperatorTuple(np.zeros((2, 3, 4)))
    with pytest.raises(ValueError):
        direct_sum(T, OperatorTuple(np.zeros((3, 2, 2))))
    bad = T.to_json()
    bad["dim"] = 5
    with pytest.raises(ValueError):
        OperatorTuple.from_json(bad)
