import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anisocap.geometry import (ConvexBody, GeometryError, MomentBody, Polygon, anisotropic_perimeter,
                               body_volume, minkowski_gauge, moment_support_mc, polar_body, regular_polygon,
                               stock_body, support_function, tau_n)


def test_support_examples():
    sq, dm = stock_body("square"), stock_body("diamond")
    assert support_function(sq, [1, 0]) == pytest.approx(1.0)
    assert support_function(sq, [1, 1]) == pytest.approx(2.0)
    # brute-force max over the four vertices
    assert support_function(dm, [0.6, 0.8]) == pytest.approx(max(abs(0.6), abs(0.8)))


def test_gauge_examples():
    sq, dm = stock_body("square"), stock_body("diamond")
    assert minkowski_gauge(sq, [2, 1]) == pytest.approx(2.0)
    assert minkowski_gauge(dm, [0.5, 0.5]) == pytest.approx(1.0)
    for K in (sq, dm, stock_body("hexagon")):
        assert minkowski_gauge(K, [0.0, 0.0]) == 0.0


def test_support_rejects_zero_direction():
    with pytest.raises(GeometryError, match="degenerate direction"):
        support_function(stock_body("square"), [0.0, 0.0])


def _same_body(A, B):
    a = A.vertices[np.lexsort(A.vertices.T)]
    b = B.vertices[np.lexsort(B.vertices.T)]
    return a.shape == b.shape and np.allclose(a, b, atol=1e-12)


def test_polar_duality_pairs():
    sq, dm = stock_body("square"), stock_body("diamond")
    assert _same_body(polar_body(sq), dm)
    assert _same_body(polar_body(dm), sq)


def test_hexagon_polar_gauge_support(rng):
    K = ConvexBody([[1, 0], [0.5, math.sqrt(3) / 2], [-0.5, math.sqrt(3) / 2],
                    [-1, 0], [-0.5, -math.sqrt(3) / 2], [0.5, -math.sqrt(3) / 2]])
    Ks = polar_body(K)
    x = rng.normal(size=(100, 2))
    assert np.max(np.abs(minkowski_gauge(K, x) - support_function(Ks, x))) < 1e-12


def test_volumes():
    assert body_volume(stock_body("square")) == pytest.approx(4.0, abs=1e-14)
    assert body_volume(stock_body("diamond")) == pytest.approx(2.0, abs=1e-14)
    assert body_volume(stock_body("cube")) == pytest.approx(8.0, abs=1e-12)


def test_octahedron_monte_carlo_within_three_sigma():
    est = stock_body("octahedron").volume_estimate(mc_samples=10**6, seed=3)
    exact = 2**3 / math.factorial(3)
    assert abs(est.value - exact) <= 3 * est.stderr
    assert est.samples == 10**6


def test_monte_carlo_is_seeded():
    K = stock_body("octahedron")
    assert body_volume(K, mc_samples=5000, seed=1) == body_volume(K, mc_samples=5000, seed=1)


def test_moment_support_examples():
    Z = MomentBody(stock_body("square"))
    assert Z.support(np.array([1.0, 0.0])) == pytest.approx(3.0, abs=1e-12)
    assert Z.support(np.array([2.0, 0.0])) == pytest.approx(6.0, abs=1e-12)
    Zd = MomentBody(stock_body("disk256"))
    for t in np.linspace(0, np.pi, 7):
        assert Zd.support(np.array([np.cos(t), np.sin(t)])) == pytest.approx(2.0, abs=1e-3)


def test_moment_support_dense_quadrature_oracle():
    # (3/2) * int_square |y1| dy by a tensor midpoint rule
    m = 2000
    y = -1 + (np.arange(m) + 0.5) * 2 / m
    quad = 1.5 * np.abs(y).sum() * (2 / m) * 2.0
    assert MomentBody(stock_body("square")).support(np.array([1.0, 0.0])) == pytest.approx(quad, rel=1e-6)


def test_moment_support_mc_3d_brackets():
    est = moment_support_mc(stock_body("cube"), [0, 0, 1], samples=200_000, seed=0)
    # (4/2) * int_cube |y3| = 2 * 4 = 8
    assert abs(est.value - 8.0) <= 4 * est.stderr


def test_anisotropic_perimeter_examples():
    E = Polygon.from_body(stock_body("square"))
    assert anisotropic_perimeter(E, stock_body("disk256")) == pytest.approx(8.0, abs=1e-3)
    assert anisotropic_perimeter(E, stock_body("square")) == pytest.approx(8.0, abs=1e-14)
    assert anisotropic_perimeter(E, MomentBody(stock_body("square"))) == pytest.approx(24.0, abs=1e-12)


def test_tau():
    assert tau_n(2) == pytest.approx(4.0)
    assert tau_n(3) == pytest.approx(2 * math.pi)


def test_body_validation():
    with pytest.raises(GeometryError, match="not symmetric"):
        ConvexBody([[1, 0], [0, 1], [-1, 0]])
    with pytest.raises(GeometryError):
        Polygon([[0, 0], [1, 1], [1, 0], [0, 1]])  # bow tie


def test_body_round_trip():
    K = regular_polygon(8, 1.3)
    K2 = ConvexBody.from_dict(K.to_dict())
    assert _same_body(K, K2)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=4, max_size=4), st.floats(0.1, 10),
       st.sampled_from(["square", "diamond", "hexagon", "disk256"]))
def test_gauge_is_a_norm(xy, lam, name):
    K = stock_body(name)
    x, y = np.array(xy[:2]), np.array(xy[2:])
    g = lambda z: minkowski_gauge(K, z)
    assert g(lam * x) == pytest.approx(lam * g(x), rel=1e-12, abs=1e-12)
    assert g(x + y) <= g(x) + g(y) + 1e-12
    assert g(-x) == pytest.approx(g(x), rel=1e-12, abs=1e-15)
