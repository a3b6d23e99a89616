"""
    polydisc-carleson: boundedness of composition operators on weighted Bergman spaces of the polydisc
    Copyright (C) 2026 the polydisc-carleson authors

    This program is free software: you can redistribute it and/or modify
    it under the terms of the GNU Affero General Public License as
    published by the Free Software Foundation, either version 3 of the
    License, or any later version.

    This program is distributed in the hope that it will be useful,
    but WITHOUT ANY WARRANTY; without even the implied warranty of
    MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
    GNU Affero General Public License for more details.

    You should have received a copy of the GNU Affero General Public License
    along with this program.  If not, see <https://www.gnu.org/licenses/>.
"""

import functools
from fractions import Fraction

import pandas as pd

from polydisc_carleson import PolydiscError, get_logger
from polydisc_carleson import poly_core as pc
from polydisc_carleson.beta_set import BetaSet

logger = get_logger(__name__)

# globals
default_eps = 0.01            # perturbation size for the F_eps building block
max_eps = 0.05                # largest perturbation accepted without an explicit check
build_check_grid = 64         # self-map gate resolution at build time
build_check_starts = 8        # grid maxima refined by the gate
max_check_dimension = 3       # larger symbols are gated through their univariate factors


class ParameterError(PolydiscError):
    pass


class SelfMapError(PolydiscError):
    pass


class UnknownEntryError(PolydiscError):
    pass


Z = pc.MultiPoly.univariate([0., 1.])
ONE = pc.MultiPoly.univariate([1.])


def g_poly(n):
    """ g_n(z) = z^n - (-1)^n (z - 1)^(2n) / 4^n, unimodular on the circle only at z = 1. """
    return Z ** n - ((-1) ** n / 4 ** n) * (Z - 1) ** (2 * n)


def h_poly(n):
    """ h_n(z) = z^n g_n(z); same modulus as g_n, same first n derivatives at 1 as g_(2n). """
    return Z ** n * g_poly(n)


def big_h_poly(n, p):
    """ H_n(z) = z^(pn) g_n(z); first n derivatives at 1 agree with g_((p+1)n). """
    return Z ** (p * n) * g_poly(n)


def psi_poly():
    """ 1 + (z-1)/2 - (z-1)^2/8 + 3 (z-1)^3/128, with 1 - |psi(e^it)|^2 ~ 135 t^6 / 16384. """
    w = Z - 1
    return ONE + w / 2 - w ** 2 / 8 + (3. / 128.) * w ** 3


def f_eps_poly(eps):
    """ F_eps(z) = (3 + 6z - z^2)/8 + 2 i eps (z-1)^2 - i eps (z-1)^3. """
    w = Z - 1
    return (3 + 6 * Z - Z ** 2) / 8 + (2j * eps) * w ** 2 - (1j * eps) * w ** 3


def _on(f, d, axis):
    return f.embed(d, [axis])


def _z(d, axis):
    return pc.MultiPoly.variable(d, axis)


def _zero(d):
    return pc.MultiPoly(d)


def product_family(d, q, k, factor):
    """
    (f(z_1)...f(z_k) z_(k+1)...z_d repeated q times, 0, ..., 0).

    Parameters
    ----------
    d, q, k : int
        dimension, number of identical components, number of factor variables
    factor : poly_core.MultiPoly
        univariate polynomial f
    """
    prod = pc.MultiPoly.constant(d, 1.)
    for axis in range(d):
        prod = prod * (_on(factor, d, axis) if axis < k else _z(d, axis))
    return [prod] * q + [_zero(d)] * (d - q)


def _check_eps(*values):
    for v in values:
        if not 0 <= v < max_eps:
            raise ParameterError(f'perturbation must lie in [0, {max_eps}), got {v}')


def _check_n(n):
    if int(n) != n or n < 1:
        raise ParameterError(f'n must be a positive integer, got {n}')


def _check_which(which):
    if which not in ('phi', 'psi'):
        raise ParameterError(f"which must be 'phi' or 'psi', got {which!r}")


def _from_threshold(value):
    """ [value, inf) clipped to the admissible range, empty for +inf. """
    if value == float('inf'):
        return BetaSet.empty()
    return BetaSet.closed_from(max(Fraction(value), Fraction(-1)))


class GalleryEntry(object):
    def __init__(self, name, defaults, builder, expected, note, factor=None):
        """
        A named symbol family with its known classification.

        Parameters
        ----------
        name : str
        defaults : dict
            parameter names and default values
        builder : function
            builder(**params) -> list of component MultiPoly
        expected : function
            expected(**params) -> dict of known results
        note : str
            where the expected values come from
        factor : function
            factor(**params) -> univariate polynomial whose self-map property implies that of the symbol
        """
        self.name = name
        self.defaults = dict(defaults)
        self.builder = builder
        self.expected = expected
        self.note = note
        self.factor = factor

    def params(self, **params):
        unknown = set(params) - set(self.defaults)
        if unknown:
            raise ParameterError(f'{self.name} takes parameters {sorted(self.defaults)}, got unknown {sorted(unknown)}')
        merged = dict(self.defaults)
        merged.update(params)
        return merged


def _identity(d=3):
    if int(d) != d or d < 1:
        raise ParameterError(f'dimension must be a positive integer, got {d}')
    return [_z(d, k) for k in range(d)]


def _full_product(d=3):
    if int(d) != d or d < 2:
        raise ParameterError(f'full_product needs d >= 2, got {d}')
    return product_family(d, d - 1, 0, Z)


def _case1_ex2():
    f0 = f_eps_poly(0.)
    prod = _on(f0, 3, 0) * _on(f0, 3, 1) * _on(f0, 3, 2)
    return [prod, prod, _zero(3)]


def _case2(b=default_eps, c=default_eps):
    _check_eps(b, c)
    f0, fb, fc = f_eps_poly(0.), f_eps_poly(b), f_eps_poly(c)
    return [_on(f0, 3, 0) * _on(fb, 3, 1) * _on(f0, 3, 2), _on(f0, 3, 0) * _on(fb, 3, 1) * _on(fc, 3, 2), _zero(3)]


def _case3(b=default_eps, c=default_eps):
    _check_eps(b, c)
    f0, fb, fc = f_eps_poly(0.), f_eps_poly(b), f_eps_poly(c)
    return [_on(f0, 3, 0) * _on(fb, 3, 1) * _on(f0, 3, 2), _on(f0, 3, 0) * _on(f0, 3, 1) * _on(fc, 3, 2), _zero(3)]


def _case4_ex1():
    comp = (_z(3, 0) * _z(3, 1) + (1 + _z(3, 2)) / 2) / 2
    return [comp, comp, _zero(3)]


def _case4_ex2():
    comp = _z(3, 0) * _z(3, 1) * _on(psi_poly(), 3, 2)
    return [comp, comp, _zero(3)]


def _case5():
    comp = (_z(3, 0) + _z(3, 1) + _z(3, 2)) / 3
    return [comp, comp, _zero(3)]


def _case6(b=default_eps):
    _check_eps(b)
    f0, fb = f_eps_poly(0.), f_eps_poly(b)
    tail = (1 + _z(3, 2)) / 2
    return [(_on(fb, 3, 0) * _on(f0, 3, 1) + tail) / 2, (_on(f0, 3, 0) * _on(f0, 3, 1) + tail) / 2, _zero(3)]


def _case6_printed(eps=default_eps):
    _check_eps(eps)
    base = _z(3, 0) * _z(3, 1) + (1 + _z(3, 2)) / 2
    return [(base + (1j * eps) * (_z(3, 2) - 1) ** 3) / 2, base / 2, _zero(3)]


def _case7(a=default_eps):
    _check_eps(a)
    if a == 0:
        raise ParameterError('case7 needs a != 0')
    f0, fa = f_eps_poly(0.), f_eps_poly(a)
    return [_on(f0, 3, 0) * _on(fa, 3, 1) * _on(fa, 3, 2), _on(f0, 3, 0) * _on(f0, 3, 1) * _on(f0, 3, 2), _zero(3)]


def _h_family(n=1):
    _check_n(n)
    return product_family(3, 2, 1, h_poly(n))


def _g_family(n=1):
    _check_n(n)
    return product_family(3, 2, 1, g_poly(2 * n))


def _psi_family():
    return product_family(3, 2, 1, psi_poly())


def _nth_pair(n=1, which='phi'):
    _check_n(n)
    _check_which(which)
    return product_family(3, 2, 1, h_poly(n) if which == 'phi' else g_poly(2 * n))


def _nth_pair_general_shape(a, b, n):
    _check_n(n)
    if int(a) != a or int(b) != b:
        raise ParameterError(f'a and b must be integers, got {a}, {b}')
    if a <= 4 * n:
        raise ParameterError(f'a must exceed 4n = {4 * n}, got {a}')
    if b < -a:
        raise ParameterError(f'b must be >= -a, got b={b}, a={a}')
    return 2 * a + b + 3, a + b + 3, 4 * n


def _nth_pair_general(a=5, b=0, n=1, which='phi'):
    _check_which(which)
    d, q, k = _nth_pair_general_shape(a, b, n)
    return product_family(d, q, k, h_poly(n) if which == 'phi' else g_poly(2 * n))


def _h_pair_shape(d, q):
    if int(d) != d or d < 2 or int(q) != q or not 1 <= q <= d - 1:
        raise ParameterError(f'need d >= 2 and 1 <= q <= d - 1, got d={d}, q={q}')


def _h_pair(p=1, n=1, d=3, q=2, which='phi'):
    _check_n(n)
    _check_which(which)
    _h_pair_shape(d, q)
    if int(p) != p or p < 1:
        raise ParameterError(f'p must be a positive integer, got {p}')
    return product_family(d, q, d - 1, big_h_poly(n, p) if which == 'phi' else g_poly((p + 1) * n))


def _avg2():
    comp = (_z(2, 0) + _z(2, 1)) / 2
    return [comp, comp]


def _bidisc_F(a1=default_eps, a2=default_eps):
    _check_eps(a1, a2)
    fa1, fa2 = f_eps_poly(a1), f_eps_poly(a2)
    return [_on(fa1, 2, 0) * _on(fa1, 2, 1), _on(fa2, 2, 0) * _on(fa2, 2, 1)]


def _bidisc_z1z1():
    return [_z(2, 0), _z(2, 0)]


def _bidisc_z1z2():
    comp = _z(2, 0) * _z(2, 1)
    return [comp, comp]


def _bidisc_invertible():
    return [(_z(2, 0) + _z(2, 1)) / 2, (_z(2, 0) + 2 * _z(2, 1)) / 3]


def _bidisc_product(n=1):
    _check_n(n)
    comp = _z(2, 0) * _on(h_poly(n), 2, 1)
    return [comp, comp]


def _tridisc(case, s, r, bounded, j_cont=None, j_discont=None):
    return {'dimension': 3, 'case': case, 's': s, 'r': r, 'bounded': bounded, 'J_cont': j_cont,
            'J_discont': j_discont}


def _table(case):
    from polydisc_carleson.classifier import tridisc_table
    for (s, r), (tag, j_c, j_d) in tridisc_table.items():
        if tag.value == case:
            return j_c, j_d
    raise KeyError(case)


def _tabled(case, s, r, bounded):
    j_c, j_d = _table(case)
    return _tridisc(case, s, r, bounded, j_c, j_d)


def _family_bounded(d, q, k, kappa):
    from polydisc_carleson.classifier import product_family_diagonal_threshold
    return _from_threshold(product_family_diagonal_threshold(d, q, k, kappa))


def _bidisc(bounded, half_gain, quarter_gain, target):
    """ target: (slope, offset) with minimal target index slope * beta1 + offset. """
    return {'dimension': 2, 'bounded': BetaSet.universe() if bounded else BetaSet.empty(), 'half_gain': half_gain,
            'quarter_gain': quarter_gain, 'min_target': target}


def _identity_expected(d=3):
    return {'dimension': d, 'case': 'full_invertible', 'bounded': BetaSet.universe()}


def _full_product_expected(d=3):
    out = {'dimension': d, 'bounded': _family_bounded(d, d - 1, 0, None)}
    if d == 3:
        out.update(_tabled('alpha', 1, (0, 0), out['bounded']))
    return out


def _h_expected(n=1):
    if n == 1:
        return _tabled('delta', 2, (0, 0), _family_bounded(3, 2, 1, 2))
    return _tabled('alpha', 1, (0, 0), _family_bounded(3, 2, 1, 2 * n))


def _nth_pair_expected(n=1, which='phi'):
    if which == 'phi':
        return _h_expected(n)
    return _tabled('alpha', 1, (0, 0), _family_bounded(3, 2, 1, 4 * n))


def _nth_pair_general_expected(a=5, b=0, n=1, which='phi'):
    d, q, k = _nth_pair_general_shape(a, b, n)
    kappa = 2 * n if which == 'phi' else 4 * n
    return {'dimension': d, 'bounded': _family_bounded(d, q, k, kappa)}


def _h_pair_expected(p=1, n=1, d=3, q=2, which='phi'):
    _h_pair_shape(d, q)
    kappa = 2 * n if which == 'phi' else 2 * n * (p + 1)
    return {'dimension': d, 'bounded': _family_bounded(d, q, d - 1, kappa)}


half = Fraction(1, 2)

entries = {e.name: e for e in [
    GalleryEntry('identity', {'d': 3}, _identity, _identity_expected,
                 'identity map, every contact has invertible derivative'),
    GalleryEntry('triple_product', {}, lambda: _full_product(3),
                 lambda: _tabled('alpha', 1, (0, 0), BetaSet.closed_from(0)),
                 '(z1 z2 z3, z1 z2 z3, 0): s=1, r=(0,0), bounded iff beta >= 0'),
    GalleryEntry('full_product', {'d': 3}, _full_product, _full_product_expected,
                 '(z1...zd repeated d-1 times, 0): bounded iff beta >= d - 3'),
    GalleryEntry('case1_ex2', {}, _case1_ex2,
                 lambda: _tabled('alpha', 1, (0, 0), BetaSet.closed_from(-half)),
                 '(F0 F0 F0, F0 F0 F0, 0): s=1, r=(0,0), bounded iff beta >= -1/2'),
    GalleryEntry('case2', {'b': default_eps, 'c': default_eps}, _case2,
                 lambda b=default_eps, c=default_eps: _tabled('beta', 1, (1, 0), BetaSet.closed_from(Fraction(-3, 4))),
                 '(F0 Fb F0, F0 Fb Fc, 0): s=1, r=(1,0), bounded iff beta >= -3/4'),
    GalleryEntry('case3', {'b': default_eps, 'c': default_eps}, _case3,
                 lambda b=default_eps, c=default_eps: _tabled('gamma', 1, (1, 1), BetaSet.open_from(-1)),
                 '(F0 Fb F0, F0 F0 Fc, 0): s=1, r=(1,1), bounded iff beta > -1'),
    GalleryEntry('case4_ex1', {}, _case4_ex1,
                 lambda: _tabled('delta', 2, (0, 0), BetaSet.closed_from(-half)),
                 '((z1 z2 + (1+z3)/2)/2 twice, 0): s=2, r=(0,0), bounded iff beta >= -1/2'),
    GalleryEntry('case4_ex2', {}, _case4_ex2,
                 lambda: _tabled('alpha', 1, (0, 0), BetaSet.closed_from(Fraction(-1, 6))),
                 '(z1 z2 psi(z3) twice, 0): the expansion gives s=1, r=(0,0); bounded iff beta >= -1/6'),
    GalleryEntry('case5', {}, _case5,
                 lambda: _tabled('epsilon', 3, (0, 0), BetaSet.universe()),
                 '((z1+z2+z3)/3 twice, 0): s=3, bounded for every beta'),
    GalleryEntry('case6', {'b': default_eps}, _case6,
                 lambda b=default_eps: _tabled('epsilon', 2, (0, 1), BetaSet.universe()),
                 '((Fb(z1) F0(z2) + (1+z3)/2)/2, (F0(z1) F0(z2) + (1+z3)/2)/2, 0): s=2, r=(0,1), bounded for every beta'),
    GalleryEntry('case6_printed', {'eps': default_eps}, _case6_printed,
                 lambda eps=default_eps: _tabled('delta', 2, (0, 0), None),
                 'cubic perturbation in z3 only: no imaginary quadratic term on the kernel, s=2, r=(0,0)'),
    GalleryEntry('case7', {'a': default_eps}, _case7,
                 lambda a=default_eps: _tabled('epsilon', 1, (0, 2), BetaSet.universe()),
                 '(F0 Fa Fa, F0 F0 F0, 0): s=1, r=(0,2), bounded for every beta'),
    GalleryEntry('h_family', {'n': 1}, _h_family, _h_expected,
                 '(h_n(z1) z2 z3 twice, 0): contact order 2n, bounded iff beta >= -1/(2n)', factor=lambda n=1: h_poly(n)),
    GalleryEntry('g_family', {'n': 1}, _g_family,
                 lambda n=1: _tabled('alpha', 1, (0, 0), _family_bounded(3, 2, 1, 4 * n)),
                 '(g_2n(z1) z2 z3 twice, 0): contact order 4n, bounded iff beta >= -1/(4n)',
                 factor=lambda n=1: g_poly(2 * n)),
    GalleryEntry('psi_family', {}, _psi_family,
                 lambda: _tabled('alpha', 1, (0, 0), _family_bounded(3, 2, 1, 6)),
                 '(psi(z1) z2 z3 twice, 0): contact order 6, bounded iff beta >= -1/6', factor=lambda: psi_poly()),
    GalleryEntry('nth_pair', {'n': 1, 'which': 'phi'}, _nth_pair, _nth_pair_expected,
                 'h_n against g_2n in the tridisc product family: same derivatives up to order n on the contact set, '
                 'thresholds -1/(2n) and -1/(4n)',
                 factor=lambda n=1, which='phi': h_poly(n) if which == 'phi' else g_poly(2 * n)),
    GalleryEntry('nth_pair_general', {'a': 5, 'b': 0, 'n': 1, 'which': 'phi'}, _nth_pair_general,
                 _nth_pair_general_expected,
                 'h_n against g_2n with d = 2a+b+3, q = a+b+3, k = 4n: thresholds b/a and (b+1)/a',
                 factor=lambda a=5, b=0, n=1, which='phi': h_poly(n) if which == 'phi' else g_poly(2 * n)),
    GalleryEntry('H_pair', {'p': 1, 'n': 1, 'd': 3, 'q': 2, 'which': 'phi'}, _h_pair, _h_pair_expected,
                 'H_n = z^(pn) g_n against g_((p+1)n) on d-1 factor variables',
                 factor=lambda p=1, n=1, d=3, q=2, which='phi':
                 big_h_poly(n, p) if which == 'phi' else g_poly((p + 1) * n)),
    GalleryEntry('avg2', {}, _avg2, lambda: _bidisc(False, True, True, (1, Fraction(1, 4))),
                 '((z1+z2)/2 twice): s=2, maps A_beta into A_(beta+1/4)'),
    GalleryEntry('bidisc_F', {'a1': default_eps, 'a2': default_eps}, _bidisc_F,
                 lambda a1=default_eps, a2=default_eps: _bidisc(False, True, a1 != a2, None),
                 '(F_a1(z1) F_a1(z2), F_a2(z1) F_a2(z2)): s=1, gain 1/4 iff a1 != a2'),
    GalleryEntry('bidisc_z1z1', {}, _bidisc_z1z1, lambda: _bidisc(False, False, False, (2, Fraction(2))),
                 '(z1, z1): minimal target 2 beta + 2'),
    GalleryEntry('bidisc_z1z2', {}, _bidisc_z1z2, lambda: _bidisc(False, True, False, (1, half)),
                 '(z1 z2, z1 z2): minimal target beta + 1/2'),
    GalleryEntry('bidisc_invertible', {}, _bidisc_invertible, lambda: _bidisc(True, True, True, (1, Fraction(0))),
                 '((z1+z2)/2, (z1+2 z2)/3): invertible derivative on the contact set, minimal target beta'),
    GalleryEntry('bidisc_product', {'n': 1}, _bidisc_product,
                 lambda n=1: _bidisc(False, True, n == 1, (1, half - Fraction(1, 4 * n))),
                 '(z1 h_n(z2) twice): minimal target beta + 1/2 - 1/(4n)', factor=lambda n=1: h_poly(n)),
]}


def get_entry(name):
    try:
        return entries[name]
    except KeyError:
        raise UnknownEntryError(f'unknown gallery entry {name!r}; known: {sorted(entries)}')


def _gate(entry, symbol, params):
    if symbol.dimension <= max_check_dimension:
        report = pc.selfmap_check(symbol, grid_per_axis=build_check_grid, max_starts=build_check_starts)
    elif entry.factor is not None:
        factor = pc.Symbol([entry.factor(**params)], name=f'{entry.name} factor')
        report = pc.selfmap_check(factor, grid_per_axis=4 * build_check_grid, max_starts=build_check_starts)
    else:
        logger.warning(f'{entry.name}: dimension {symbol.dimension}, self-map gate skipped')
        return
    if not report['passed']:
        raise SelfMapError(f'{entry.name} {params}: max modulus {max(report["max_modulus"]):.12f} exceeds 1')


@functools.lru_cache(maxsize=256)
def _build_cached(name, frozen_params, check):
    entry = get_entry(name)
    params = dict(frozen_params)
    components = entry.builder(**params)
    label = name if not params else '{0}({1})'.format(name, ', '.join(f'{k}={v}' for k, v in sorted(params.items())))
    symbol = pc.Symbol(components, name=label)
    if check:
        _gate(entry, symbol, params)
    return symbol


def build(name, check=True, **params):
    """
    Build a gallery symbol with exact expanded coefficients.

    Parameters
    ----------
    name : str
        entry name (see listing())
    check : bool
        run the self-map gate (raises SelfMapError on failure)
    params :
        entry parameters, defaults filled in

    Returns
    -------
    poly_core.Symbol
    """
    entry = get_entry(name)
    merged = entry.params(**params)
    return _build_cached(name, tuple(sorted(merged.items())), check)


def build_pair(name, **params):
    """ (phi, psi) for the derivative matching pairs. """
    if 'which' not in get_entry(name).defaults:
        raise ParameterError(f'{name} is not a pair entry')
    params.pop('which', None)
    return build(name, which='phi', **params), build(name, which='psi', **params)


def expected(name, **params):
    """
    Known classification of a gallery entry.

    Returns
    -------
    dict
        'dimension', 'bounded' (BetaSet of beta with C_phi bounded on A_beta, None when unknown) and, where they
        apply, 'case', 's', 'r', 'J_cont', 'J_discont' (tridisc) or 'half_gain', 'quarter_gain', 'min_target' (bidisc)
    """
    entry = get_entry(name)
    out = dict(entry.expected(**entry.params(**params)))
    out['note'] = entry.note
    return out


def expected_json(name, **params):
    out = {}
    for key, value in expected(name, **params).items():
        if isinstance(value, BetaSet):
            out[key] = value.to_json()
            out[key + '_text'] = str(value)
        elif key == 'min_target' and value is not None:
            out[key] = {'slope': str(value[0]), 'offset': str(value[1])}
        elif isinstance(value, tuple):
            out[key] = list(value)
        else:
            out[key] = value
    return out


def listing():
    """ pandas.DataFrame of entries: name, dimension, parameters, note. """
    rows = []
    for entry in entries.values():
        rows.append({'name': entry.name, 'dimension': entry.expected(**entry.defaults)['dimension'],
                     'parameters': ', '.join(f'{k}={v}' for k, v in entry.defaults.items()), 'note': entry.note})
    return pd.DataFrame(rows)
