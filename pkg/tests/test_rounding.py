import math

import numpy as np
import pytest

from krivine.errors import InvalidArgument
from krivine.kernel import LOG1P2, h_fg
from krivine.partitions import OddGraph
from krivine.rounding import (BLOCK, PreprocessedVectors, _series_gram, preprocess,
                              project_and_round, round_matrix, sample_rounding)
from krivine.sdp import BilinearProblem, GramSolution, random_problem, solve_sdp
from krivine.series import krivine_scheme

KRIVINE_C = 2 / math.pi * LOG1P2
H2 = [[1.0, 1.0], [1.0, -1.0]]


@pytest.fixture(scope="module")
def kriv():
    return krivine_scheme()


def pair(cos):
    x = np.array([[1.0, 0.0]])
    y = np.array([[cos, math.sqrt(1 - cos * cos)]])
    return GramSolution(x, y, 0.0)


def test_preprocess_orthogonal_stays_orthogonal(kriv, shipped):
    for s in (kriv, shipped):
        pre = preprocess(pair(0.0), s)
        assert abs((pre.U @ pre.V.T)[0, 0]) < 1e-12


def test_preprocess_krivine_parallel(kriv):
    pre = preprocess(pair(1.0), kriv)
    assert (pre.U @ pre.V.T)[0, 0] == pytest.approx(math.sin(LOG1P2), abs=1e-8)
    assert (pre.U @ pre.V.T)[0, 0] == pytest.approx(0.7716, abs=1e-4)


@pytest.mark.parametrize("seed", range(5))
def test_preprocess_gram_and_cross_products(seed, kriv, shipped):
    prob = random_problem(6, 6, seed)
    sol = solve_sdp(prob, seed=seed)
    for s in (kriv, shipped):
        pre = preprocess(sol, s)
        assert pre.diagnostics["min_eigenvalue"] >= -1e-8
        assert np.allclose(np.linalg.norm(pre.U, axis=1), 1, atol=1e-8)
        want = _series_gram(s.inverse, s.gamma, np.clip(sol.X @ sol.Y.T, -1, 1), False)
        assert np.max(np.abs(pre.U @ pre.V.T - want)) < 1e-8 + pre.clip
        assert np.all(np.abs(pre.U @ pre.V.T) < 1)


def test_preprocess_rejects_invalid(kriv):
    import dataclasses
    bad = dataclasses.replace(kriv, valid=False)
    with pytest.raises(InvalidArgument):
        preprocess(pair(0.5), bad)


def test_k1_is_hyperplane(kriv):
    rng = np.random.default_rng(0)
    U = rng.standard_normal((3, 4))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    V = U[:2].copy()
    pre = PreprocessedVectors(U, V, 0.0)
    for seed in range(20):
        e, d = project_and_round(pre, kriv, 0.0, seed)
        g = np.random.default_rng(np.random.SeedSequence([seed])).standard_normal(4)
        assert np.array_equal(e, np.where(U @ g >= 0, 1, -1))
        assert np.array_equal(d, e[:2])


def test_identical_vectors_identical_signs(shipped):
    U = np.eye(3)
    pre = PreprocessedVectors(U, U.copy(), 0.0)
    for seed in range(50):
        e, d = project_and_round(pre, shipped, 1.0, seed)
        assert np.array_equal(e, d)


def test_empirical_correlation_matches_transfer(shipped):
    # two unit vectors with <u, v> = 0.5, always the quintic-curve rule
    u = np.array([[1.0, 0.0]])
    v = np.array([[0.5, math.sqrt(0.75)]])
    pre = PreprocessedVectors(u, v, 0.0)
    A = np.array([[1.0]])
    _, _, _, mean, se = sample_rounding(A, pre, shipped, 1.0, 10**6, seed=5)
    f = OddGraph(shipped.eta)
    assert abs(mean - h_fg(f, f, 0.5)) < 4 * se


def test_curve_constant(shipped):
    assert shipped.curve_constant == pytest.approx(shipped.eta / (2 * math.pi**0.25 * math.sqrt(15)))


def test_one_by_one(kriv):
    res = round_matrix(BilinearProblem([[1.0]]), kriv, trials=10**5, seed=1)
    assert res.best_value == 1.0
    assert abs(res.mean - KRIVINE_C) < 4 * res.stderr


def test_two_by_two(kriv, shipped):
    prob = BilinearProblem(H2)
    for s in (kriv, shipped, None):
        res = round_matrix(prob, s, trials=10**4, seed=2)
        assert res.best_value == 2.0 == res.opt
        if s is not None:
            assert res.mean >= KRIVINE_C * 2 * math.sqrt(2) - 4 * res.stderr
        assert res.best_value >= res.mean


def test_p_zero_mixed_equals_krivine(kriv, shipped):
    prob = random_problem(4, 5, 3)
    sol = solve_sdp(prob)
    pre = preprocess(sol, kriv)
    a = sample_rounding(prob.A, pre, kriv, 0.0, 3 * BLOCK + 17, seed=8)
    b = sample_rounding(prob.A, pre, shipped, 0.0, 3 * BLOCK + 17, seed=8)
    assert a[2:] == b[2:]
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_threads_do_not_change_results(shipped):
    prob = random_problem(5, 5, 4)
    r1 = round_matrix(prob, shipped, trials=3 * BLOCK + 5, seed=3, workers=1)
    r4 = round_matrix(prob, shipped, trials=3 * BLOCK + 5, seed=3, workers=4)
    assert r1.to_json() == r4.to_json()


def test_sign_symmetry(shipped):
    prob = random_problem(4, 4, 6)
    sol = solve_sdp(prob)
    pre = preprocess(sol, shipped)
    flipped = PreprocessedVectors(pre.U, -pre.V, pre.clip)
    a = sample_rounding(prob.A, pre, shipped, shipped.p, 20000, seed=1)
    b = sample_rounding(-prob.A, flipped, shipped, shipped.p, 20000, seed=1)
    assert a[3] == pytest.approx(b[3], abs=1e-12)
    assert a[2] == pytest.approx(b[2], abs=1e-12)


def test_argument_checks(shipped):
    pre = PreprocessedVectors(np.eye(2), np.eye(2), 0.0)
    with pytest.raises(InvalidArgument):
        project_and_round(pre, shipped, 1.5, 0)
    with pytest.raises(InvalidArgument):
        sample_rounding(np.eye(2), pre, shipped, 0.1, 0, 0)


def test_result_json(kriv):
    res = round_matrix(BilinearProblem(H2), kriv, trials=100, seed=0)
    doc = res.to_json()
    assert doc["best_value"] == BilinearProblem(H2).value(doc["eps"], doc["delta"])
    assert doc["opt"] == 2.0
