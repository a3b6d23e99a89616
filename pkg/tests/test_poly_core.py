import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polydisc_carleson import PolydiscError
from polydisc_carleson import poly_core as pc

small_coefs = st.complex_numbers(max_magnitude=2., allow_nan=False, allow_infinity=False)


@st.composite
def polys(draw, dimension=2):
    terms = draw(st.dictionaries(st.tuples(*[st.integers(0, 3)] * dimension), small_coefs, max_size=5))
    return pc.MultiPoly(dimension, terms)


def z(d, k):
    return pc.MultiPoly.variable(d, k)


def test_arithmetic_and_degrees():
    p = (z(2, 0) + 1) ** 2 * z(2, 1)
    assert dict(p.terms) == {(0, 1): 1., (1, 1): 2., (2, 1): 1.}
    assert p.degrees() == (2, 1)
    assert p.total_degree() == 3
    assert (p - p).is_zero()
    assert dict((2 * z(2, 0) / 4).terms) == {(1, 0): 0.5}
    with pytest.raises(pc.DimensionError):
        z(2, 0) + z(3, 0)
    with pytest.raises(PolydiscError):
        z(2, 0) ** -1


def test_derivatives_and_substitution():
    p = z(3, 0) ** 2 * z(3, 1) + 3j * z(3, 2)
    assert p.partial(0) == 2 * z(3, 0) * z(3, 1)
    assert dict(p.derivative((2, 1, 0)).terms) == {(0, 0, 0): 2.}
    q = p.substitute(0, 1j)
    assert q.dimension == 3
    assert q.allclose(-z(3, 1) + 3j * z(3, 2))
    assert p.variable_support() == frozenset({0, 1, 2})
    assert q.variable_support() == frozenset({1, 2})


def test_embed_and_rotate():
    f = pc.MultiPoly.univariate([1., 2., 3.])
    g = f.embed(3, [2])
    assert dict(g.terms) == {(0, 0, 0): 1., (0, 0, 1): 2., (0, 0, 2): 3.}
    r = (z(2, 0) * z(2, 1)).rotate([1j, 1j], eta=-1.)
    assert r.allclose(z(2, 0) * z(2, 1))


@given(polys(), polys(), st.tuples(small_coefs, small_coefs))
@settings(max_examples=50, deadline=None)
def test_evaluation_is_a_ring_homomorphism(p, q, point):
    point = np.array(point)
    assert np.isclose((p * q).eval(point), p.eval(point) * q.eval(point), atol=1e-9)
    assert np.isclose((p + q).eval(point), p.eval(point) + q.eval(point), atol=1e-9)


@given(polys())
@settings(max_examples=30, deadline=None)
def test_grid_evaluation_matches_pointwise(p):
    axis = np.exp(1j * pc.torus_grid(8))
    grid = p.eval_grid([axis, axis])
    points = np.stack(np.meshgrid(axis, axis, indexing='ij'), axis=-1)
    assert np.allclose(grid, p.eval(points), atol=1e-9)


def test_grid_modulus_chunks(monkeypatch):
    p = (z(3, 0) + z(3, 1) + z(3, 2)) / 3
    full = pc.grid_modulus(p, 16)
    monkeypatch.setattr(pc, 'grid_chunk_points', 16)
    assert np.allclose(pc.grid_modulus(p, 16), full)
    assert np.isclose(full.max(), 1.)


def test_symbol_validation_and_json():
    sym = pc.Symbol([z(2, 0) * z(2, 1), (z(2, 0) + z(2, 1)) / 2], name='demo')
    text = sym.dumps()
    again = pc.Symbol.loads(text)
    assert again == sym
    assert again.dumps() == text
    assert json.loads(text)['dimension'] == 2
    with pytest.raises(pc.DimensionError):
        pc.Symbol([z(2, 0)])
    with pytest.raises(PolydiscError):
        pc.Symbol([pc.MultiPoly.constant(2, 1j), z(2, 1)])
    assert pc.Symbol([pc.MultiPoly.constant(2, 1j), z(2, 1)], degenerate=True).degenerate
    with pytest.raises(PolydiscError):
        pc.Symbol.from_json({'components': []})


def test_jacobian_and_permute():
    sym = pc.Symbol([z(3, 0) * z(3, 1), z(3, 2), pc.MultiPoly(3)])
    jac = sym.jacobian(np.array([1., 2., 3.]))
    assert np.allclose(jac, [[2., 1., 0.], [0., 0., 1.], [0., 0., 0.]])
    perm = sym.permute([1, 2, 0])
    # phi_1 = z_1 z_2 moves to component 2 in variables z_2 z_3
    assert perm[1] == z(3, 1) * z(3, 2)
    assert perm[2] == z(3, 0)
    assert perm[0].is_zero()


def test_torus_taylor_of_monomial():
    taylor = pc.torus_taylor(z(2, 0) * z(2, 1), None, np.zeros(2))
    assert np.isclose(taylor.value('re'), 1.)
    assert np.allclose(taylor.linear('im'), [1., 1.])
    assert np.allclose(taylor.quadratic('re'), -0.5 * np.ones((2, 2)))
    assert np.allclose(taylor.quadratic('im'), 0.)
    with pytest.raises(PolydiscError):
        pc.torus_taylor(z(2, 0), None, np.zeros(2), order=4)


def test_torus_taylor_matches_finite_differences():
    p = (z(2, 0) + 1) ** 3 * z(2, 1) / 8 + 0.1j * (z(2, 1) - 1) ** 2
    theta0 = np.array([0.3, -0.2])
    taylor = pc.torus_taylor(p, None, theta0, order=3)
    h = 1e-4
    f = lambda t: p.eval(np.exp(1j * (theta0 + t)))
    e0 = np.array([h, 0.])
    grad = (f(e0) - f(-e0)) / (2 * h)
    assert np.isclose(taylor.linear('re')[0], grad.real, atol=1e-6)
    assert np.isclose(taylor.linear('im')[0], grad.imag, atol=1e-6)
    second = (f(e0) - 2 * f(np.zeros(2)) + f(-e0)) / h ** 2
    assert np.isclose(2 * taylor.quadratic('re')[0, 0], second.real, atol=1e-4)


def test_refine_max_and_local_maxima():
    p = (z(2, 0) + z(2, 1)) / 2
    theta = pc.refine_max([p], np.array([0.4, -0.3]))
    assert abs(abs(p.eval(np.exp(1j * theta))) - 1.) < 1e-8
    values = np.zeros((8, 8))
    values[2, 3] = 2.
    values[6, 6] = 1.
    assert pc.grid_local_maxima(values, 2).tolist() == [2 * 8 + 3, 6 * 8 + 6]


def test_selfmap_check():
    good = pc.Symbol([z(2, 0) * z(2, 1), (z(2, 0) + z(2, 1)) / 2])
    report = pc.selfmap_check(good, grid_per_axis=32)
    assert report['passed'] and report['heuristic']
    assert max(report['max_modulus']) <= 1 + 1e-9
    bad = pc.Symbol([1.01 * z(2, 0), z(2, 1) / 2])
    assert not pc.selfmap_check(bad, grid_per_axis=32)['passed']
    with pytest.raises(PolydiscError):
        pc.selfmap_check(good, grid_per_axis=4)


def test_wrap_angles():
    assert np.allclose(pc.wrap_angles([np.pi, -np.pi, 3 * np.pi / 2]), [-np.pi, -np.pi, -np.pi / 2])


def test_univariate_factors():
    poly = (1 + z(3, 0)) * (z(3, 1) - 2j) * z(3, 2) ** 2 / 4
    c, factors = pc.univariate_factors(poly)
    assert sorted(factors) == [0, 1, 2]
    rebuilt = pc.MultiPoly.constant(3, c)
    for k, f in factors.items():
        rebuilt = rebuilt * f.embed(3, [k])
    assert rebuilt.allclose(poly)
    assert len(factors[2].terms) == 1


def test_univariate_factors_rejects_sums():
    assert pc.univariate_factors((z(3, 0) + z(3, 1)) / 2) is None
    assert pc.univariate_factors(z(2, 0) * z(2, 1) + 1) is None
    assert pc.univariate_factors(pc.MultiPoly(3)) is None
    c, factors = pc.univariate_factors(pc.MultiPoly.constant(2, 0.5))
    assert c == 0.5 and factors == {}
