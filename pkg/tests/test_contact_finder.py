from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from polydisc_carleson import PolydiscError
from polydisc_carleson import contact_finder as cf
from polydisc_carleson import gallery
from polydisc_carleson import poly_core as pc


def z(d, k):
    return pc.MultiPoly.variable(d, k)


def test_snapped_unit_is_exact():
    xi = cf.snapped_unit(np.array([0., np.pi / 2, -np.pi, -np.pi / 2 + 1e-10, 0.3]))
    assert xi[0] == 1 and xi[1] == 1j and xi[2] == -1 and xi[3] == -1j
    assert np.isclose(xi[4], np.exp(0.3j))


def test_no_contact():
    sym = pc.Symbol([z(3, 0) / 2, z(3, 1) / 2, z(3, 2) / 2])
    assert cf.find_contacts(sym) == []


def test_isolated_contact_is_exact():
    records = cf.find_contacts(gallery.build('case2'))
    assert len(records) == 1
    rec = records[0]
    assert rec.index_set == (0, 1)
    assert rec.p_union == frozenset({0, 1, 2})
    assert np.all(rec.theta == 0.)
    assert not rec.is_continuum
    assert np.allclose(rec.eta, [1., 1.])
    assert np.allclose(rec.gradient, 0.5)
    assert rec.julia_caratheodory_ok()


def test_continuum_contact():
    records = cf.find_contacts(gallery.build('triple_product'))
    assert len(records) == 1
    rec = records[0]
    assert rec.index_set == (0, 1)
    assert rec.free_axes == frozenset()
    assert rec.is_continuum
    for theta in rec.samples:
        assert np.allclose(np.abs(gallery.build('triple_product')(np.exp(1j * theta)))[:2], 1.)


def test_contact_along_a_line():
    # (z1 z2 + (1 + z3)/2)/2 touches the circle exactly on z1 z2 = 1, z3 = 1
    records = cf.find_contacts(gallery.build('case4_ex1'))
    assert [r.index_set for r in records] == [(0, 1)]
    for theta in records[0].samples:
        assert abs(pc.wrap_angles(theta[0] + theta[1])) < 1e-4
        assert abs(theta[2]) < 1e-6


def test_flat_valley_is_polished():
    # 1 - |g_2| vanishes to fourth order at 1
    records = cf.find_contacts(gallery.build('g_family', n=1))
    assert [r.index_set for r in records] == [(0, 1)]
    assert all(theta[0] == 0. for theta in records[0].samples)


def test_full_contact_of_identity():
    records = cf.find_contacts(gallery.build('identity', d=2), grid_per_axis=16)
    assert [r.index_set for r in records] == [(0, 1)]
    rec = records[0]
    assert rec.to_json()['I'] == [1, 2]
    assert rec.to_json()['P'] == {'1': [1], '2': [2]}


def test_single_component_contacts():
    sym = pc.Symbol([z(2, 0), z(2, 1) / 2])
    records = cf.find_contacts(sym, grid_per_axis=16)
    assert [r.index_set for r in records] == [(0,)]
    assert records[0].free_axes == frozenset({1})


def _record(supports):
    index_set = tuple(range(len(supports)))
    d = 1 + max(max(s) for s in supports)
    return cf.ContactRecord(np.zeros(d), index_set, dict(enumerate(supports)), d)


def test_omega_and_product_bound():
    rec = _record([{0}, {1, 2}])
    delta = cf.DeltaVector((0, 1), (0.1, 0.5))
    assert cf.omega(rec, 0, delta) == 0.1
    assert cf.omega(rec, 2, delta) == 0.5
    out = cf.omega_product_bound(rec, delta)
    assert np.isclose(out['lhs'], 0.025)
    assert np.isclose(out['rhs'], 0.05 ** 1.5)
    assert not out['holds']


def test_omega_off_support():
    rec = cf.ContactRecord(np.zeros(3), (0, 1), {0: {0}, 1: {0, 1}}, 3)
    assert cf.omega(rec, 2, [0.2, 0.3]) == 1.
    assert cf.omega(rec, 0, [0.2, 0.3]) == 0.2


supports = st.lists(st.frozensets(st.integers(0, 3), min_size=1), min_size=1, max_size=3)


@given(supports, st.floats(min_value=1e-3, max_value=0.99))
def test_product_bound_holds_for_equal_radii(supp, delta):
    rec = _record(supp)
    assert cf.omega_product_bound(rec, cf.DeltaVector.equal(rec.index_set, delta))['holds']


@given(supports, st.lists(st.floats(min_value=1e-3, max_value=0.99), min_size=3, max_size=3))
def test_product_bound_holds_when_smallest_radius_sees_everything(supp, radii):
    rec = _record(supp)
    radii = radii[:len(supp)]
    smallest = int(np.argmin(radii))
    full = [set(s) for s in supp]
    full[smallest] = set(rec.p_union)
    rec = _record(full)
    assert cf.omega_product_bound(rec, radii)['holds']


def test_necessary_condition_and_prediction():
    spread = _record([{0, 1, 2}, {0, 1, 2}])
    assert cf.necessary_condition(spread, 0, 0)
    squeezed = _record([{0}, {0}])
    assert not cf.necessary_condition(squeezed, 0, 0)
    assert cf.necessary_condition(squeezed, Fraction(-1), Fraction(0))
    assert np.isclose(cf.predicted_bound(squeezed, [0.1, 0.1], 0., 0.), 0.1 ** 4 / 0.1)
    with pytest.raises(PolydiscError):
        cf.predicted_bound(squeezed, [0.1, 0.1], -2., 0.)


def test_delta_vector_validation():
    with pytest.raises(PolydiscError):
        cf.DeltaVector((0, 1), (0.1,))
    with pytest.raises(PolydiscError):
        cf.DeltaVector((0,), (1.5,))
    assert cf.DeltaVector.equal((0, 2), 0.3)[2] == 0.3


@pytest.mark.parametrize('name', ['case2', 'h_family', 'triple_product'])
def test_factor_search_agrees_with_grid(monkeypatch, name):
    sym = gallery.build(name)
    grid = cf.find_contacts(sym)
    monkeypatch.setattr(cf, 'max_grid_points', 1)
    factored = cf.find_contacts(sym)
    assert [r.index_set for r in factored] == [r.index_set for r in grid]
    for got, want in zip(factored, grid):
        assert got.p_union == want.p_union
        assert got.is_continuum == want.is_continuum
        assert np.allclose(np.abs(got.eta), 1.)


def test_high_dimension_contact():
    # h_1(z_1)...h_1(z_4) z_5...z_13 eight times, then zeros
    records = cf.find_contacts(gallery.build('nth_pair_general'))
    assert [r.index_set for r in records] == [tuple(range(8))]
    rec = records[0]
    assert rec.p_union == frozenset(range(13))
    assert rec.is_continuum
    assert all(np.all(theta[:4] == 0.) for theta in rec.samples)
    assert np.allclose(np.abs(rec.eta), 1.)


def test_grid_budget_needs_factors(monkeypatch):
    monkeypatch.setattr(cf, 'max_grid_points', 1)
    with pytest.raises(cf.GridBudgetError):
        cf.find_contacts(gallery.build('case4_ex1'))
