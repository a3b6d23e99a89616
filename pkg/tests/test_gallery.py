import json
from fractions import Fraction

import numpy as np
import pytest

from polydisc_carleson import gallery
from polydisc_carleson import poly_core as pc
from polydisc_carleson.beta_set import BetaSet


def circle(n=2001):
    t = np.linspace(-np.pi, np.pi, n)
    return t, np.exp(1j * t)[:, None]


def test_listing():
    table = gallery.listing()
    assert len(table) >= 20
    assert list(table.columns) == ['name', 'dimension', 'parameters', 'note']
    assert set(table['dimension']) >= {2, 3}
    assert table.set_index('name').loc['nth_pair_general', 'dimension'] == 13


@pytest.mark.parametrize('n', [1, 2, 3, 4])
def test_g_modulus_on_circle(n):
    t, z = circle()
    g = gallery.g_poly(n).eval(z)
    assert np.all(np.abs(g) <= 1 + 1e-12)
    assert np.allclose(np.abs(g), 1 - np.sin(t / 2) ** (2 * n), atol=1e-12)
    far = np.abs(t) > 0.5
    assert np.all(np.abs(g[far]) < 1 - 1e-6)
    assert np.abs(gallery.h_poly(n).eval(z)) == pytest.approx(np.abs(g), abs=1e-12)


@pytest.mark.parametrize('n', [1, 2, 3])
def test_h_and_g_derivatives_agree_at_one(n):
    one = np.array([1.])
    h, g = gallery.h_poly(n), gallery.g_poly(2 * n)
    for k in range(n + 1):
        # dyadic coefficients, so the comparison is exact
        assert complex(h.derivative((k,)).eval(one)) == complex(g.derivative((k,)).eval(one))
    assert complex(h.derivative((2 * n,)).eval(one)) != complex(g.derivative((2 * n,)).eval(one))


def test_low_order_closed_forms():
    z = pc.MultiPoly.univariate([0., 1.])
    assert gallery.g_poly(1) == (z + 1) ** 2 / 4
    assert gallery.h_poly(1) == z / 4 + z ** 2 / 2 + z ** 3 / 4
    assert gallery.g_poly(2).allclose(pc.MultiPoly.univariate([-1 / 16, 1 / 4, 10 / 16, 1 / 4, -1 / 16]))


def test_psi_modulus_identity():
    t, z = circle()
    lhs = np.abs(gallery.psi_poly().eval(z)) ** 2
    assert np.allclose(lhs, 1 + (1080 / 16384) * (np.cos(t) - 1) ** 3, atol=1e-12)


def test_f_eps_is_a_selfmap():
    t, z = circle()
    for eps in (0., 0.01, 0.04):
        f = gallery.f_eps_poly(eps)
        assert np.all(np.abs(f.eval(z)) <= 1 + 1e-12)
        assert f.eval(np.array([1.])) == 1


def test_build_is_cached_and_named():
    sym = gallery.build('case2')
    assert sym is gallery.build('case2', b=0.01)
    assert sym.name == 'case2(b=0.01, c=0.01)'
    assert sym.dimension == 3
    assert sym[2].is_zero()
    assert gallery.build('case4_ex1').name == 'case4_ex1'


def test_product_family_shape():
    comps = gallery.product_family(4, 2, 1, gallery.h_poly(1))
    assert len(comps) == 4
    assert comps[0] == comps[1]
    assert comps[2].is_zero() and comps[3].is_zero()
    assert comps[0].variable_support() == frozenset(range(4))


def test_parameter_errors():
    with pytest.raises(gallery.ParameterError):
        gallery.build('case2', z=1)
    with pytest.raises(gallery.ParameterError):
        gallery.build('case7', a=0)
    with pytest.raises(gallery.ParameterError):
        gallery.build('case2', b=0.2)
    with pytest.raises(gallery.ParameterError):
        gallery.build('h_family', n=0)
    with pytest.raises(gallery.ParameterError):
        gallery.build('nth_pair', which='chi')
    with pytest.raises(gallery.UnknownEntryError):
        gallery.build('no_such_entry')
    with pytest.raises(gallery.UnknownEntryError):
        gallery.expected('no_such_entry')


def test_nth_pair_general_shape_errors():
    with pytest.raises(gallery.ParameterError):
        gallery.expected('nth_pair_general', a=4, n=1)
    with pytest.raises(gallery.ParameterError):
        gallery.expected('nth_pair_general', a=5, b=-6)
    with pytest.raises(gallery.ParameterError):
        gallery.expected('H_pair', d=3, q=3)


def test_selfmap_gate(monkeypatch):
    z = pc.MultiPoly.variable(2, 0)
    entry = gallery.GalleryEntry('too_big', {}, lambda: [1.01 * z, z / 2], lambda: {'dimension': 2}, 'not a self-map')
    monkeypatch.setitem(gallery.entries, 'too_big', entry)
    with pytest.raises(gallery.SelfMapError):
        gallery.build('too_big')
    assert gallery.build('too_big', check=False).dimension == 2


def test_high_dimension_is_gated_through_the_factor():
    sym = gallery.build('nth_pair_general')
    assert sym.dimension == 13
    assert sum(not c.is_zero() for c in sym.components) == 8


def test_build_pair():
    phi, psi = gallery.build_pair('nth_pair', n=2)
    assert phi.name == 'nth_pair(n=2, which=phi)'
    assert psi.name == 'nth_pair(n=2, which=psi)'
    assert phi[0] != psi[0]
    with pytest.raises(gallery.ParameterError):
        gallery.build_pair('case2')


def test_expected_thresholds():
    assert gallery.expected('h_family', n=1)['bounded'] == BetaSet.closed_from(Fraction(-1, 2))
    assert gallery.expected('g_family', n=1)['bounded'] == BetaSet.closed_from(Fraction(-1, 4))
    assert gallery.expected('psi_family')['bounded'] == BetaSet.closed_from(Fraction(-1, 6))
    assert gallery.expected('full_product', d=4)['bounded'] == BetaSet.closed_from(1)
    assert gallery.expected('full_product', d=3)['case'] == 'alpha'
    assert gallery.expected('nth_pair_general')['bounded'] == BetaSet.closed_from(0)
    assert gallery.expected('nth_pair_general', which='psi')['bounded'] == BetaSet.closed_from(Fraction(1, 5))
    assert gallery.expected('H_pair')['bounded'] == BetaSet.closed_from(-1)
    assert gallery.expected('H_pair', which='psi')['bounded'] == BetaSet.closed_from(Fraction(-1, 2))
    assert gallery.expected('case6_printed')['bounded'] is None


def test_expected_json():
    out = gallery.expected_json('case2')
    assert out['case'] == 'beta'
    assert out['r'] == [1, 0]
    assert out['bounded_text'] == '[-3/4, inf)'
    assert out['J_discont_text'] == '[-1, -5/6)'
    assert out['note'].startswith('(F0 Fb F0')
    bidisc = gallery.expected_json('bidisc_product', n=2)
    assert bidisc['min_target'] == {'slope': '1', 'offset': '3/8'}
    assert bidisc['quarter_gain'] is False
    json.dumps(out)
    json.dumps(bidisc)
