import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import binom

from fockmodel.series import FreeSeries, psi_coefficient_oracle
from fockmodel.weights import (
    PROBE_STATUS,
    WeightFamily,
    abb_sup,
    admissibility_report,
    bergman_weights,
    diagonal_decay_probe,
    dirichlet_weights,
    ex_summability,
    psi_weights,
    radius_probe,
    ratio_sups,
    regularity_check,
    sign_pattern_check,
    subcn_check,
    table_weights,
    tail_sup,
)
from fockmodel.words import words_up_to


def test_bergman_values():
    assert np.allclose(bergman_weights(2, 1.0, 4).b_flat, 1)
    assert bergman_weights(2, 2.0, 3).weight((1, 2, 1)) == pytest.approx(4)
    assert bergman_weights(2, 0.5, 2).weight((2, 2)) == pytest.approx(0.375)
    with pytest.raises(ValueError):
        bergman_weights(2, 0.0, 3)


def test_dirichlet_values():
    assert np.allclose(dirichlet_weights(2, 0.0, 3).b_flat, 1)
    assert dirichlet_weights(2, -1.0, 3).weight((1, 1, 2)) == pytest.approx(0.25)
    assert dirichlet_weights(2, 2.0, 2).weight((2, 1)) == pytest.approx(9)


def test_overflow_is_loud():
    with pytest.raises(OverflowError):
        dirichlet_weights(2, 1000.0, 3)


def test_family_validation():
    with pytest.raises(ValueError):
        table_weights(FreeSeries.from_radial(2, [2.0, 1.0]))
    with pytest.raises(ValueError):
        table_weights(FreeSeries.from_radial(2, [1.0, -1.0]))
    with pytest.raises(ValueError):
        table_weights(FreeSeries.from_radial(2, [1.0, 1j]))


@pytest.mark.parametrize("s", [0.5, 1.0, 2.0, 2.5, 3.7])
def test_bergman_inverse_is_binomial(s):
    wf = bergman_weights(2, s, 6)
    for w in words_up_to(2, 6):
        k = len(w)
        assert wf.inverse_coefficient(w) == pytest.approx((-1) ** k * binom(s, k), abs=1e-12)


@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(1, 4))
def test_inverse_residuals_random_tables(seed, n, N):
    rng = np.random.default_rng(seed)
    blocks = [np.ones(1)] + [rng.uniform(0.2, 3.0, size=n**k) for k in range(1, N + 1)]
    wf = table_weights(FreeSeries.from_blocks(n, blocks))
    s1, s2 = wf.inverse_residuals()
    assert s1 <= 1e-12 * 10 ** N and s2 <= 1e-12 * 10 ** N


def test_psi_weights():
    phi = FreeSeries.from_terms(2, 1, {(1,): 2.0, (2,): 1.0})
    wf = psi_weights(phi, 1.5, 5)
    for w in words_up_to(2, 4):
        assert wf.weight(w) == pytest.approx(psi_coefficient_oracle(phi.pad(5), 1.5, w).real, rel=1e-12)
    assert wf.weight((1,)) == pytest.approx(1.5 * 2.0)
    assert wf.weight((2,)) == pytest.approx(1.5 * 1.0)
    L, R = ratio_sups(wf)
    assert L[0] <= 0.5 + 1e-12 and L[1] <= 1 + 1e-12 and R[0] <= 0.5 + 1e-12


def test_psi_reduces_to_bergman():
    phi = FreeSeries.from_terms(2, 1, {(1,): 1.0, (2,): 1.0})
    assert np.allclose(psi_weights(phi, 2.0, 4).b_flat, bergman_weights(2, 2.0, 4).b_flat)


def test_psi_errors():
    with pytest.raises(ValueError):
        psi_weights(FreeSeries.from_terms(2, 1, {(1,): 1.0, (2,): -1.0}), 1.5, 3)
    with pytest.raises(ValueError):
        psi_weights(FreeSeries.from_terms(2, 1, {(1,): 1.0}), 1.5, 3)
    with pytest.raises(ValueError):
        psi_weights(FreeSeries.from_terms(2, 1, {(1,): 1.0, (2,): 1.0}), 0.5, 3)


def test_ratio_sups():
    s = 2.5
    L, R = ratio_sups(bergman_weights(2, s, 6))
    # (k+1)/(s+k) increases for s > 1, so the sup sits at the top ratio k = N-1
    assert np.allclose(L, 6 / (s + 5)) and np.allclose(R, 6 / (s + 5))
    L, _ = ratio_sups(bergman_weights(2, 0.5, 6))
    assert np.allclose(L, 2.0)  # decreasing for s < 1: attained at k = 0
    L, _ = ratio_sups(dirichlet_weights(2, 0.0, 4))
    assert np.allclose(L, 1)


def test_radius_probe():
    r = radius_probe(bergman_weights(2, 1.0, 5))
    assert np.allclose(r.terms, np.sqrt(2))
    d = radius_probe(dirichlet_weights(2, 2.0, 6))
    k = np.arange(1, 7)
    assert np.allclose(d.terms, np.sqrt(2) * (k + 1.0) ** (2.0 / k))
    assert d.monotone == "nonincreasing"


def test_abb_and_tail_tables():
    wf = bergman_weights(2, 2.5, 6)
    table = abb_sup(wf, 2, 6)
    assert set(table) == {0, 1, 2}
    assert abb_sup(wf, 6, 6)[6] == pytest.approx(1.0)
    assert np.all(np.isfinite(list(table.values())))
    ball = bergman_weights(2, 1.0, 5)
    assert abb_sup(ball, 1, 5)[1] == pytest.approx(1.0)
    assert tail_sup(ball, 2, 5) == 0.0
    half = bergman_weights(2, 0.5, 6)
    tails = [tail_sup(half, q, 6) for q in range(1, 7)]
    assert all(x >= y - 1e-15 for x, y in zip(tails, tails[1:]))
    with pytest.raises(ValueError):
        abb_sup(wf, 7, 6)
    with pytest.raises(ValueError):
        tail_sup(wf, 4, 3)


def test_ex_summability():
    s = 2.5
    ex = ex_summability(bergman_weights(2, s, 8))
    assert np.allclose(ex.max_terms, [abs(binom(s, k)) for k in range(1, 9)])
    assert ex.status == PROBE_STATUS
    ball = ex_summability(bergman_weights(2, 1.0, 5))
    assert np.allclose(ball.partial_sums, 1.0)


@pytest.mark.parametrize("s,ok", [(1.0, True), (0.5, True), (2.0, False)])
def test_regularity_bergman(s, ok):
    v = regularity_check(bergman_weights(2, s, 5))
    assert v.passed is ok
    if ok:
        assert v.detail["submultiplicative"]
    else:
        assert v.witness["a"] > 0


def test_regularity_dirichlet():
    assert regularity_check(dirichlet_weights(2, -1.0, 5)).passed


def oracle_log_convex(profile):
    """Radial form of the ratio condition b_{k+1}/b_{k+2} <= b_k/b_{k+1}, i.e. log-convexity."""
    b = np.asarray(profile)
    return bool(np.all(b[1:-1] ** 2 - b[:-2] * b[2:] <= 1e-12 * b[1:-1] ** 2))


@pytest.mark.parametrize("s", [0.25, 0.5, 1.0, 1.5, 2.0, 3.0])
def test_subcn_bergman_matches_oracle(s):
    wf = bergman_weights(2, s, 6)
    v = subcn_check(wf)
    prof = [binom(s + k - 1, k) for k in range(7)]
    assert v.passed == (s <= 1) == oracle_log_convex(prof)
    if not v.passed:
        assert set(v.witness) == {"beta", "i", "j", "excess"} and v.witness["excess"] > 0


@pytest.mark.parametrize("s", [-2.0, -1.0, 0.0, 0.5, 1.0])
def test_subcn_dirichlet(s):
    wf = dirichlet_weights(2, s, 6)
    assert subcn_check(wf).passed == (s <= 0)


@pytest.mark.parametrize("wf", [bergman_weights(2, 0.5, 5), dirichlet_weights(2, -2.0, 5), bergman_weights(3, 1.0, 3)])
def test_subcn_implies_regular(wf):
    if subcn_check(wf).passed:
        assert regularity_check(wf).passed


def test_sign_patterns():
    p = sign_pattern_check(bergman_weights(2, 2.5, 6))
    assert (p.n0, p.sign) == (3, "nonpositive")
    p = sign_pattern_check(bergman_weights(2, 2.0, 5))
    assert (p.n0, p.sign) == (2, "nonnegative")


def test_sign_pattern_none_handcrafted():
    # a_k alternates in sign by construction; b is its inverse
    from fockmodel.series import invert

    a = FreeSeries.from_radial(1, [1.0, -0.5, 0.1, -0.05, 0.02, -0.01, 0.005])
    b = invert(a)
    wf = table_weights(FreeSeries.from_blocks(1, [blk.real for blk in b.blocks]))
    assert np.allclose(wf.a.flat, a.flat)
    assert sign_pattern_check(wf).n0 is None


def test_diagonal_decay():
    assert np.allclose(diagonal_decay_probe(bergman_weights(2, 1.0, 5), 1).per_degree, 0)
    s = 2.0
    pr = diagonal_decay_probe(bergman_weights(2, s, 8), 1)
    k = np.arange(7)
    assert np.allclose(pr.per_degree, np.abs((k + 2) / (s + k + 1) - (k + 1) / (s + k)))
    assert pr.trend == "nonincreasing"
    d = diagonal_decay_probe(dirichlet_weights(2, 1.0, 8), 2)
    assert d.per_degree[-1] < d.per_degree[0]
    with pytest.raises(ValueError):
        diagonal_decay_probe(bergman_weights(2, 1.0, 3), 3)


def test_json_round_trips():
    phi = FreeSeries.from_terms(2, 1, {(1,): 2.0, (2,): 1.0})
    fams = [bergman_weights(2, 2.5, 4), dirichlet_weights(2, -1.0, 3), psi_weights(phi, 1.5, 3),
            table_weights(FreeSeries.from_blocks(2, [np.ones(1), [2.0, 3.0], [4.0, 5.0, 6.0, 7.0]]))]
    for wf in fams:
        data = json.loads(json.dumps(wf.to_json()))
        back = WeightFamily.from_json(data)
        assert back.kind == wf.kind and np.allclose(back.b_flat, wf.b_flat)
    with pytest.raises(ValueError):
        WeightFamily.from_json({"kind": "mystery", "n": 2, "degree": 2})


def test_at_degree():
    wf = bergman_weights(2, 2.5, 3)
    assert wf.at_degree(5).degree == 5 and wf.at_degree(2).degree == 2
    t = table_weights(FreeSeries.from_radial(2, [1.0, 2.0]))
    with pytest.raises(ValueError):
        t.at_degree(3)


def test_admissibility_report_json():
    rep = admissibility_report(bergman_weights(2, 2.5, 6)).to_json()
    assert rep["status"] == PROBE_STATUS
    assert rep["sign_pattern"] == {"N0": 3, "sign": "nonpositive"}
    assert not rep["regularity"]["passed"] and not rep["subcn"]["passed"]
    json.dumps(rep)
