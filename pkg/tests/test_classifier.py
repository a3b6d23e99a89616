import itertools
import json
from fractions import Fraction

import numpy as np
import pytest

from polydisc_carleson import PolydiscError
from polydisc_carleson import classifier as cl
from polydisc_carleson import contact_finder as cf
from polydisc_carleson import gallery
from polydisc_carleson import poly_core as pc
from polydisc_carleson.beta_set import BetaSet

tridisc_names = ['triple_product', 'case1_ex2', 'case2', 'case3', 'case4_ex1', 'case4_ex2', 'case5', 'case6',
                 'case6_printed', 'case7', 'h_family', 'g_family', 'psi_family']


def z(d, k):
    return pc.MultiPoly.variable(d, k)


@pytest.mark.parametrize('name', tridisc_names)
def test_tridisc_gallery(name):
    want = gallery.expected(name)
    verdict = cl.classify_tridisc(gallery.build(name))
    assert verdict.case_tags == [cl.CaseTag(want['case'])]
    row = verdict.contacts[0]
    assert row['s'] == want['s']
    assert sorted(row['r']) == sorted(want['r'])
    assert verdict.j_cont == want['J_cont']
    assert verdict.j_discont == want['J_discont']
    if want['bounded'] is not None:
        # the table is sharp on J_cont and J_discont; the true threshold lies in the gap
        assert (verdict.j_cont - want['bounded']).is_empty()
        assert want['bounded'].isdisjoint(verdict.j_discont)


def test_identity_is_full_invertible():
    verdict = cl.classify_tridisc(gallery.build('identity'))
    assert verdict.case_tags == [cl.CaseTag.full_invertible]
    assert verdict.j_cont == BetaSet.universe()
    assert verdict.gap == BetaSet.empty()


def test_no_contact():
    sym = pc.Symbol([z(3, 0) / 2, z(3, 1) / 2, z(3, 2) / 2])
    verdict = cl.classify_tridisc(sym)
    assert verdict.contacts == []
    assert verdict.extras['no_contact']
    assert verdict.decide(-1) == 'bounded'


def test_low_support_contact():
    verdict = cl.classify_tridisc(pc.Symbol([z(3, 0), z(3, 0), pc.MultiPoly(3)]))
    assert verdict.case_tags == [cl.CaseTag.low_support]
    assert verdict.j_discont == BetaSet.universe()


def test_decide_on_alpha():
    verdict = cl.classify_tridisc(gallery.build('triple_product'))
    assert verdict.decide(-0.7) == 'unbounded'
    assert verdict.decide('-2/3') == 'gap'
    assert verdict.decide(-0.65) == 'gap'
    assert verdict.decide(0) == 'bounded'
    assert cl.classify_tridisc(gallery.build('case5')).decide(-1) == 'bounded'


def test_verdict_json():
    verdict = cl.classify_tridisc(gallery.build('case2'))
    out = json.loads(json.dumps(verdict.to_json()))
    assert out['J_cont_text'] == '[-1/2, inf)'
    assert out['gap_text'] == '[-5/6, -1/2)'
    assert out['contacts'][0]['case'] == 'beta'
    assert out['contacts'][0]['record']['I'] == [1, 2]


def test_overlapping_sets_are_rejected():
    with pytest.raises(PolydiscError):
        cl.Verdict(BetaSet.universe(), BetaSet.point(-1))


def _tags(verdict):
    return sorted(tag.value for tag in verdict.case_tags)


def _sr_rows(verdict):
    return sorted((row['case'].value, row.get('s'), tuple(sorted(row.get('r') or ()))) for row in verdict.contacts)


@pytest.mark.parametrize('name', tridisc_names)
def test_invariant_under_permutation(name):
    sym = gallery.build(name)
    base = cl.classify_tridisc(sym)
    for perm in itertools.permutations(range(3)):
        moved = cl.classify_tridisc(sym.permute(perm))
        assert _tags(moved) == _tags(base), perm
        assert _sr_rows(moved) == _sr_rows(base), perm
        assert moved.j_cont == base.j_cont
        assert moved.j_discont == base.j_discont


@pytest.mark.parametrize('name', tridisc_names)
def test_r_ignores_kernel_basis(name):
    sym = gallery.build(name)
    contacts = cf.find_contacts(sym)
    base = cl.classify_tridisc(sym, contacts)
    for seed in range(20):
        rotated = cl.classify_tridisc(sym, contacts, random_state=seed)
        assert _sr_rows(rotated) == _sr_rows(base), seed
        assert rotated.j_cont == base.j_cont


@pytest.mark.parametrize('name', tridisc_names)
def test_invariant_under_contact_resampling(name):
    sym = gallery.build(name)
    contacts = cf.find_contacts(sym)
    base = cl.classify_tridisc(sym, contacts)
    for k, rec in enumerate(contacts):
        for i in range(len(rec.samples)):
            moved = list(contacts)
            moved[k] = rec.at_sample(sym, i)
            verdict = cl.classify_tridisc(sym, moved)
            assert _sr_rows(verdict) == _sr_rows(base), (k, i)
            assert verdict.j_cont == base.j_cont
            assert verdict.j_discont == base.j_discont


def test_sr_needs_dependent_pair():
    sym = gallery.build('identity')
    record = cf.find_contacts(sym)[0]
    with pytest.raises(PolydiscError):
        cl.sr_invariants(sym, record)
    bidisc = gallery.build('bidisc_invertible')
    record = cf.find_contacts(bidisc)[0]
    assert not cl.gradient_dependence(record)['dependent']
    with pytest.raises(PolydiscError):
        cl.sr_invariants(bidisc, record)


def test_outside_table():
    sr = cl.SRClassification((1., 1.), [1., 0., 0.], (np.eye(3), np.eye(3)), 2, np.eye(2), (1, 1), (0, 1, 2))
    with pytest.raises(cl.OutsideTableError):
        cl.tridisc_case(sr, 4, True)
    assert cl.tridisc_case(None, 3, False)[2] == cl.CaseTag.independent


@pytest.mark.parametrize('name, half, quarter', [
    ('avg2', True, True),
    ('bidisc_z1z1', False, False),
    ('bidisc_z1z2', True, False),
    ('bidisc_invertible', True, True),
])
def test_bidisc_gains(name, half, quarter):
    verdict = cl.classify_bidisc(gallery.build(name))
    want = gallery.expected(name)
    assert verdict.extras['half_gain'] is half == want['half_gain']
    assert verdict.extras['quarter_gain'] is quarter == want['quarter_gain']
    assert verdict.j_cont == want['bounded']


@pytest.mark.parametrize('a1, a2, quarter', [(0.01, 0.01, False), (0.01, 0.02, True)])
def test_bidisc_F_quarter_gain(a1, a2, quarter):
    verdict = cl.classify_bidisc(gallery.build('bidisc_F', a1=a1, a2=a2))
    assert verdict.extras['quarter_gain'] is quarter
    assert verdict.extras['half_gain']
    assert verdict.contacts[0]['s'] == 1


@pytest.mark.parametrize('n, quarter', [(1, True), (2, False)])
def test_bidisc_product_quarter_gain(n, quarter):
    verdict = cl.classify_bidisc(gallery.build('bidisc_product', n=n))
    assert verdict.extras['quarter_gain'] is quarter
    assert verdict.decide(0) == 'unbounded'


def test_bidisc_determinants():
    j_det, d_det = cl.bidisc_JD(gallery.build('bidisc_invertible'), np.zeros(2))
    assert np.isclose(j_det, 1 / 6)
    assert np.isclose(d_det, 1 / 2)
    j_det, d_det = cl.bidisc_JD(gallery.build('avg2'), np.zeros(2))
    assert j_det == 0 and d_det == 0.5
    with pytest.raises(pc.DimensionError):
        cl.bidisc_JD(gallery.build('case5'), np.zeros(3))


def test_dispatch():
    assert 'half_gain' in cl.classify_symbol(gallery.build('avg2')).extras
    assert cl.classify_symbol(gallery.build('case5')).dimension == 3
    single = pc.Symbol([z(1, 0)])
    verdict = cl.classify_symbol(single)
    assert verdict.extras['d_phi'] == 1
    assert verdict.j_cont == BetaSet.universe()


def test_generic_dimension_four():
    sym = gallery.build('full_product', d=4)
    contacts = cf.find_contacts(sym, grid_per_axis=16)
    verdict = cl.classify_generic(sym, contacts)
    assert verdict.extras['d_phi'] == 3
    assert verdict.gap == BetaSet.universe()
    assert verdict.case_tags == [cl.CaseTag.undecided]
    squeezed = pc.Symbol([z(4, 0), z(4, 0), pc.MultiPoly(4), pc.MultiPoly(4)])
    verdict = cl.classify_generic(squeezed, cf.find_contacts(squeezed, grid_per_axis=16))
    assert verdict.j_discont == BetaSet.universe()
    assert verdict.case_tags == [cl.CaseTag.low_support]


def test_stability_map():
    assert cl.stability_map(0, 1, 1) == Fraction(5, 2)
    for beta, beta_new in [('-1', '0'), ('-1/2', '3'), ('0', '0')]:
        assert cl.stability_map(beta, beta, beta_new) == Fraction(beta_new)
    with pytest.raises(PolydiscError):
        cl.stability_map(0, 0, -1)


def test_automatic_target():
    assert cl.automatic_target(0, 2) == 2
    assert cl.automatic_target(-1, 3) == 1
    assert cl.automatic_target('1/2', 0) == -1
    with pytest.raises(PolydiscError):
        cl.automatic_target(-2, 2)
    assert cl.d_phi(gallery.build('case5')) == 2
    assert cl.d_phi(gallery.build('identity')) == 3


def test_product_family_thresholds():
    for kappa in (2, 4, 6):
        assert cl.product_family_diagonal_threshold(3, 2, 1, kappa) == Fraction(-1, kappa)
    assert cl.product_family_diagonal_threshold(3, 2, 0, None) == 0
    assert cl.product_family_diagonal_threshold(2, 2, 0, None) == float('inf')
    assert cl.product_family_diagonal_threshold(1, 1, 1, 2) == -1
    for n in (1, 2, 3):
        for beta1 in (Fraction(-1), Fraction(0), Fraction(1, 3)):
            want = beta1 + Fraction(1, 2) - Fraction(1, 4 * n)
            assert cl.product_family_threshold(2, 2, 1, 2 * n, beta1) == want
    with pytest.raises(PolydiscError):
        cl.product_family_threshold(3, 2, 1, 1, 0)


def test_lambda_set_and_witness():
    assert cl.lambda_set(0) == BetaSet.interval(0, Fraction(1, 2)) | BetaSet.point(2)
    assert cl.lambda_witness(0, 0) == gallery.build('bidisc_invertible')
    assert cl.lambda_witness(0, '1/2') == gallery.build('bidisc_z1z2')
    assert cl.lambda_witness(0, 2) == gallery.build('bidisc_z1z1')
    assert cl.lambda_witness(0, '1/4') == gallery.build('bidisc_product', n=1)
    assert cl.lambda_witness(0, '3/8') == gallery.build('bidisc_product', n=2)
    assert cl.lambda_witness(0, '3/10') is None
    with pytest.raises(cl.NotAttainableError):
        cl.lambda_witness(0, '0.6')
    with pytest.raises(PolydiscError):
        cl.lambda_set(-2)


def test_derivative_agreement():
    phi, psi = gallery.build_pair('nth_pair', n=1)
    assert cl.derivative_agreement(phi, psi, 1)
    assert not cl.derivative_agreement(phi, psi, 2)
    phi, psi = gallery.build_pair('nth_pair', n=2)
    assert cl.derivative_agreement(phi, psi, 2)
    with pytest.raises(pc.DimensionError):
        cl.derivative_agreement(phi, gallery.build('avg2'), 1)


def test_derivative_agreement_needs_matching_contacts():
    assert not cl.derivative_agreement(gallery.build('case5'), gallery.build('triple_product'), 0)


def test_weight_stable():
    assert cl.weight_stable_tridisc(gallery.build('identity'))
    assert cl.weight_stable_tridisc(gallery.build('triple_product'))
    assert not cl.weight_stable_tridisc(pc.Symbol([z(3, 0), z(3, 0), pc.MultiPoly(3)]))


def test_local_upper_exponent():
    sym = gallery.build('case2')
    record = cf.find_contacts(sym)[0]
    sr = cl.sr_invariants(sym, record)
    assert cl.local_upper_exponent(sr, 3) == Fraction(3, 4)
    sym = gallery.build('case3')
    sr = cl.sr_invariants(sym, cf.find_contacts(sym)[0])
    assert cl.local_upper_exponent(sr, 3) is None
    with pytest.raises(cl.OutsideTableError):
        cl.local_upper_exponent(sr, 2)
    sym = gallery.build('case5')
    sr = cl.sr_invariants(sym, cf.find_contacts(sym)[0])
    with pytest.raises(cl.OutsideTableError):
        cl.local_upper_exponent(sr, 3)


def test_high_dimension_gallery_entry():
    sym = gallery.build('nth_pair_general')
    verdict = cl.classify_symbol(sym)
    assert verdict.dimension == 13
    assert verdict.extras['d_phi'] == 8
    assert verdict.case_tags == [cl.CaseTag.undecided]
    assert (verdict.j_cont - gallery.expected('nth_pair_general')['bounded']).is_empty()
    assert verdict.decide(0) == 'gap'
    assert cl.automatic_target(0, verdict.extras['d_phi']) == 14
