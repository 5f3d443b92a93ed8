import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from krivine.errors import InvalidArgument, NumericError
from krivine.quad import (box_rule, gauss_hermite_rule, gaussian_moment, integrate,
                          legendre_panel, scaled_hermite_rule, QuadratureRule)


def test_gauss_hermite_total_weight():
    assert gauss_hermite_rule(40).total_weight() == pytest.approx(math.sqrt(math.pi), rel=1e-14)


def test_gauss_hermite_symmetric():
    r = gauss_hermite_rule(33)
    assert np.array_equal(r.nodes, -r.nodes[::-1])
    assert np.array_equal(r.weights, r.weights[::-1])


@given(st.integers(1, 60), st.integers(0, 40))
def test_gauss_hermite_exact_for_low_degree(n, j):
    if j > 2 * n - 1:
        return
    r = gauss_hermite_rule(n)
    got = integrate(lambda x: x**j, r)
    scale = float(np.sum(r.weights * np.abs(r.nodes) ** j))
    assert abs(got - gaussian_moment(j)) <= 1e-13 * scale


def test_large_order_drops_underflowed_nodes():
    r = gauss_hermite_rule(512)
    assert np.all(r.weights > 0)
    assert r.total_weight() == pytest.approx(math.sqrt(math.pi), rel=1e-12)


def test_scaled_rule_gaussian_mass():
    r = scaled_hermite_rule(50)
    assert r.total_weight() == pytest.approx(math.sqrt(2 * math.pi), rel=1e-13)


def test_box_rule_integrates_linear_exactly():
    r = box_rule(3.0, 7)
    assert integrate(lambda x: 2 * x + 1, r) == pytest.approx(6.0, abs=1e-13)


def test_legendre_panel_array_endpoints():
    x, w = legendre_panel(np.array([0.0, 1.0]), np.array([1.0, 3.0]), 8)
    assert x.shape == (2, 8)
    assert np.sum(w * x**3) == pytest.approx(0.25 + (81 - 1) / 4, rel=1e-13)


def test_integrate_2d_gaussian():
    r = gauss_hermite_rule(20)
    assert integrate(lambda x, y: x * x * y * y, r, 2) == pytest.approx(math.pi / 4, rel=1e-12)


def test_integrate_rejects_nonfinite():
    with pytest.raises(NumericError):
        integrate(lambda x: 1 / x, QuadratureRule(
            np.array([0.0, 1.0]), np.array([1.0, 1.0]), "box", 2))


@pytest.mark.parametrize("n", [0, 513, 2.5])
def test_invalid_order(n):
    with pytest.raises(InvalidArgument):
        gauss_hermite_rule(n)


def test_rule_validation():
    with pytest.raises(InvalidArgument):
        QuadratureRule(np.array([1.0, 0.0]), np.array([1.0, 1.0]), "box", 2)
    with pytest.raises(InvalidArgument):
        QuadratureRule(np.array([0.0, 1.0]), np.array([1.0, -1.0]), "box", 2)


def test_integration_bit_stable():
    r = gauss_hermite_rule(64)
    f = lambda x, y: np.cos(x * y) * np.exp(x)
    assert integrate(f, r, 2) == integrate(f, r, 2)


def test_order_one_and_two():
    r1 = gauss_hermite_rule(1)
    assert r1.nodes.tolist() == [0.0]
    assert r1.weights[0] == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    r2 = gauss_hermite_rule(2)
    assert r2.nodes == pytest.approx([-1 / math.sqrt(2), 1 / math.sqrt(2)], rel=1e-14)
    assert r2.weights == pytest.approx([math.sqrt(math.pi) / 2] * 2, rel=1e-14)
    assert integrate(lambda x: x * x, r2) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-14)


def test_closed_form_examples():
    r = gauss_hermite_rule(8)
    assert abs(integrate(lambda x: np.ones_like(x), r) - math.sqrt(math.pi)) < 1e-12
    assert abs(integrate(lambda x: x**4, r) - 3 * math.sqrt(math.pi) / 4) < 1e-12
    assert abs(integrate(lambda x, y: np.ones(np.broadcast(x, y).shape), r, 2) - math.pi) < 1e-12


@given(st.integers(1, 200), st.sampled_from([1, 3, 5, 7]))
def test_odd_integrand_vanishes(n, j):
    r = gauss_hermite_rule(n)
    assert abs(integrate(lambda x: x**j * np.exp(np.cos(x)), r)) < 1e-12 * r.total_weight() * max(
        1.0, float(np.max(np.abs(r.nodes))) ** j)


def test_refinement_monotone_on_smooth_set():
    ref = {j: integrate(lambda x: x**j * np.exp(np.cos(x)), gauss_hermite_rule(400)) for j in range(7)}
    for j in range(7):
        errs = [abs(integrate(lambda x: x**j * np.exp(np.cos(x)), gauss_hermite_rule(n)) - ref[j])
                for n in (8, 16, 32, 64)]
        for a, b in zip(errs, errs[1:]):
            assert b <= a + 1e-9
