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

import itertools
import json
import math
from types import MappingProxyType

import numpy as np
from scipy import ndimage, optimize

from polydisc_carleson import PolydiscError, get_logger

logger = get_logger(__name__)

# globals
dedup_rel_tol = 1e-14         # coefficients below this fraction of the largest modulus are dropped
selfmap_grid = 256            # default grid points per axis for selfmap_check
selfmap_tol = 1e-9            # allowed excess of |phi_j| over 1
refine_maxiter = 50           # iteration cap for local ascent on |phi_j|^2
refine_max_starts = 64        # number of grid maxima refined per component
grid_chunk_points = 2 ** 20   # max grid points evaluated per slab
factor_rel_tol = 1e-9         # coefficient mismatch allowed when splitting into one-variable factors


class DimensionError(PolydiscError):
    pass


class MultiPoly(object):
    def __init__(self, dimension, terms=None):
        """
        Multivariate polynomial over C with coefficients stored per exponent multi-index.

        Parameters
        ----------
        dimension : int
            number of variables d
        terms : dict
            {exponent tuple of length d: complex coefficient}; repeated keys are not possible, numerically zero
            coefficients are dropped
        """
        if int(dimension) < 1:
            raise DimensionError('dimension must be positive, got {0}'.format(dimension))
        self.dimension = int(dimension)
        clean = {}
        for exps, coef in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.dimension:
                raise DimensionError(f'exponent {exps} does not have {self.dimension} entries')
            if any(e < 0 for e in exps):
                raise DimensionError(f'negative exponent in {exps}')
            clean[exps] = clean.get(exps, 0j) + complex(coef)
        if len(clean) > 0:
            scale = max(abs(c) for c in clean.values())
            clean = {k: c for k, c in clean.items() if c != 0 and abs(c) >= dedup_rel_tol * scale}
        self._terms = MappingProxyType(dict(sorted(clean.items())))
        self._horner_tree = None
        self._partials = {}

    @property
    def terms(self):
        return self._terms

    @classmethod
    def constant(cls, dimension, value):
        return cls(dimension, {(0,) * dimension: value})

    @classmethod
    def variable(cls, dimension, axis):
        """ The coordinate function z_axis (0-based axis). """
        if not 0 <= axis < dimension:
            raise DimensionError(f'axis {axis} out of range for dimension {dimension}')
        exps = [0] * dimension
        exps[axis] = 1
        return cls(dimension, {tuple(exps): 1.})

    @classmethod
    def univariate(cls, coefs):
        """ One variable polynomial from ascending coefficients [c_0, c_1, ...]. """
        return cls(1, {(e,): c for e, c in enumerate(coefs)})

    def is_zero(self):
        return len(self._terms) == 0

    def degrees(self):
        """ Per-axis maximal exponent. """
        if self.is_zero():
            return (0,) * self.dimension
        return tuple(int(v) for v in np.max(np.array(list(self._terms.keys())), axis=0))

    def total_degree(self):
        return max((sum(k) for k in self._terms), default=0)

    def embed(self, dimension, axes):
        """
        Re-express this polynomial in a larger set of variables.

        Parameters
        ----------
        dimension : int
            dimension of the result
        axes : sequence of int
            axes[i] is the target axis of this polynomial's variable i
        """
        if len(axes) != self.dimension:
            raise DimensionError(f'need {self.dimension} target axes, got {len(axes)}')
        terms = {}
        for exps, coef in self._terms.items():
            new_exps = [0] * dimension
            for src, dst in enumerate(axes):
                new_exps[dst] += exps[src]
            terms[tuple(new_exps)] = terms.get(tuple(new_exps), 0j) + coef
        return MultiPoly(dimension, terms)

    def _coerce(self, other):
        if isinstance(other, MultiPoly):
            if other.dimension != self.dimension:
                raise DimensionError(f'dimension mismatch: {self.dimension} vs {other.dimension}')
            return other
        return MultiPoly.constant(self.dimension, complex(other))

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self._terms)
        for exps, coef in other.terms.items():
            terms[exps] = terms.get(exps, 0j) + coef
        return MultiPoly(self.dimension, terms)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.dimension, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            other = complex(other)
            return MultiPoly(self.dimension, {k: c * other for k, c in self._terms.items()})
        other = self._coerce(other)
        terms = {}
        for (e1, c1), (e2, c2) in itertools.product(self._terms.items(), other.terms.items()):
            exps = tuple(a + b for a, b in zip(e1, e2))
            terms[exps] = terms.get(exps, 0j) + c1 * c2
        return MultiPoly(self.dimension, terms)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1. / complex(scalar))

    def __pow__(self, n):
        if int(n) != n or n < 0:
            raise PolydiscError(f'only nonnegative integer powers are supported, got {n}')
        result = MultiPoly.constant(self.dimension, 1.)
        base = self
        n = int(n)
        while n:     # square and multiply
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.dimension == other.dimension and dict(self._terms) == dict(other.terms)

    def __hash__(self):
        return hash((self.dimension, tuple(self._terms.items())))

    def __repr__(self):
        return f'MultiPoly({self.dimension}, {dict(self._terms)})'

    def allclose(self, other, atol=1e-12):
        """ Coefficientwise comparison up to atol. """
        diff = self - other
        return all(abs(c) <= atol for c in diff.terms.values())

    def partial(self, axis):
        """ Formal derivative with respect to z_axis (0-based). """
        if not 0 <= axis < self.dimension:
            raise DimensionError(f'axis {axis} out of range for dimension {self.dimension}')
        if axis not in self._partials:
            terms = {}
            for exps, coef in self._terms.items():
                if exps[axis] == 0:
                    continue
                new_exps = list(exps)
                new_exps[axis] -= 1
                terms[tuple(new_exps)] = coef * exps[axis]
            self._partials[axis] = MultiPoly(self.dimension, terms)
        return self._partials[axis]

    def derivative(self, multi_index):
        """ The mixed partial derivative d^alpha for alpha = multi_index. """
        result = self
        for axis, count in enumerate(multi_index):
            for _ in range(int(count)):
                result = result.partial(axis)
        return result

    def substitute(self, axis, value):
        """ Substitute z_axis := value at coefficient level (the variable disappears, dimension is kept). """
        terms = {}
        for exps, coef in self._terms.items():
            new_exps = list(exps)
            new_exps[axis] = 0
            key = tuple(new_exps)
            terms[key] = terms.get(key, 0j) + coef * complex(value) ** exps[axis]
        return MultiPoly(self.dimension, terms)

    def rotate(self, xi, eta=1.):
        """ conj(eta) * p(xi_1 z_1, ..., xi_d z_d), computed on coefficients. """
        xi = np.asarray(xi, dtype=complex)
        scale = np.conj(complex(eta))
        terms = {exps: coef * scale * np.prod(xi ** np.array(exps)) for exps, coef in self._terms.items()}
        return MultiPoly(self.dimension, terms)

    def variable_support(self):
        """ Set of axes the polynomial genuinely depends on. """
        return frozenset(k for k in range(self.dimension) if any(e[k] > 0 for e in self._terms))

    def _build_horner_tree(self, terms, axis):
        if axis == self.dimension:
            return sum(terms.values(), 0j)
        groups = {}
        for exps, coef in terms.items():
            groups.setdefault(exps[axis], {})[exps] = coef
        return [(e, self._build_horner_tree(groups[e], axis + 1)) for e in sorted(groups, reverse=True)]

    def _eval_tree(self, tree, z, axis):
        if not isinstance(tree, list):
            return tree
        zk = z[..., axis]
        acc = self._eval_tree(tree[0][1], z, axis + 1)
        for (e_prev, _), (e, sub) in zip(tree, tree[1:]):
            acc = acc * zk ** (e_prev - e) + self._eval_tree(sub, z, axis + 1)
        return acc * zk ** tree[-1][0]

    def eval(self, z):
        """
        Evaluate at one or many points.

        Parameters
        ----------
        z : numpy.array_like
            complex array of shape (..., d)

        Returns
        -------
        numpy.ndarray
            complex array of shape (...)
        """
        z = np.asarray(z, dtype=complex)
        if z.shape[-1] != self.dimension:
            raise DimensionError(f'point has {z.shape[-1]} coordinates, polynomial has {self.dimension} variables')
        if self.is_zero():
            return np.zeros(z.shape[:-1], dtype=complex)
        if self._horner_tree is None:
            self._horner_tree = self._build_horner_tree(dict(self._terms), 0)
        return np.broadcast_to(self._eval_tree(self._horner_tree, z, 0), z.shape[:-1]).astype(complex)

    def coefficient_tensor(self):
        """ Dense coefficient array C[e_1, ..., e_d]. """
        tensor = np.zeros(tuple(d + 1 for d in self.degrees()), dtype=complex)
        for exps, coef in self._terms.items():
            tensor[exps] = coef
        return tensor

    def eval_grid(self, axis_values):
        """
        Evaluate on the tensor grid axis_values[0] x ... x axis_values[d-1] by contracting the dense coefficient
        tensor with per-axis power tables.

        Parameters
        ----------
        axis_values : list
            d one dimensional complex arrays

        Returns
        -------
        numpy.ndarray
            complex array with shape (len(axis_values[0]), ..., len(axis_values[d-1]))
        """
        if len(axis_values) != self.dimension:
            raise DimensionError(f'{len(axis_values)} grid axes for {self.dimension} variables')
        tensor = self.coefficient_tensor()
        operands = [tensor, list(range(self.dimension))]
        for k, values in enumerate(axis_values):
            values = np.asarray(values, dtype=complex)
            powers = values[:, None] ** np.arange(tensor.shape[k])[None, :]
            operands += [powers, [self.dimension + k, k]]
        return np.einsum(*operands, list(range(self.dimension, 2 * self.dimension)), optimize=True)

    def to_json(self):
        """ List of {"exponents", "re", "im"} dicts sorted by exponent. """
        return [{'exponents': list(exps), 're': float(c.real), 'im': float(c.imag)} for exps, c in self._terms.items()]

    @classmethod
    def from_json(cls, dimension, term_list):
        terms = {}
        for term in term_list:
            exps = tuple(term['exponents'])
            terms[exps] = terms.get(exps, 0j) + complex(term.get('re', 0.), term.get('im', 0.))
        return cls(dimension, terms)


class Symbol(object):
    def __init__(self, components, name=None, degenerate=False):
        """
        Holomorphic polynomial self-map phi = (phi_1, ..., phi_d) of the closed polydisc.

        Parameters
        ----------
        components : list of MultiPoly
            d polynomials, each in d variables
        name : str
            optional label (gallery name or file stem)
        degenerate : bool
            allow constant components of modulus 1
        """
        components = tuple(components)
        if len(components) == 0:
            raise DimensionError('a symbol needs at least one component')
        dimension = components[0].dimension
        if len(components) != dimension or any(p.dimension != dimension for p in components):
            raise DimensionError('a symbol on the {0}-disc needs {0} components in {0} variables, got {1}'.format(
                dimension, [p.dimension for p in components]))
        self.dimension = dimension
        self.components = components
        self.name = name
        self.degenerate = degenerate
        if not degenerate:
            for j, p in enumerate(components):
                if len(p.variable_support()) == 0 and abs(abs(p.terms.get((0,) * dimension, 0j)) - 1.) < 1e-12:
                    raise PolydiscError(f'component {j} is a unimodular constant; pass degenerate=True to allow it')

    def __len__(self):
        return self.dimension

    def __getitem__(self, j):
        return self.components[j]

    def __call__(self, z):
        return evaluate(self, z)

    def __eq__(self, other):
        if not isinstance(other, Symbol):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __repr__(self):
        return f'Symbol(name={self.name!r}, dimension={self.dimension})'

    def jacobian(self, z):
        """ d x d complex matrix [d phi_j / d z_k](z) at a single point. """
        z = np.asarray(z, dtype=complex)
        return np.array([[p.partial(k).eval(z) for k in range(self.dimension)] for p in self.components])

    def permute(self, perm):
        """
        Conjugate by the coordinate permutation P: returns P o phi o P^-1, i.e. new axis perm[k] plays the role of
        old axis k in both the source and target polydisc.
        """
        perm = list(perm)
        new_components = [None] * self.dimension
        for j, p in enumerate(self.components):
            new_components[perm[j]] = p.embed(self.dimension, perm)
        return Symbol(new_components, name=self.name, degenerate=self.degenerate)

    def to_json(self):
        return {'dimension': self.dimension, 'name': self.name or '',
                'components': [p.to_json() for p in self.components]}

    def dumps(self):
        """ Normalised JSON text (stable under load/dump). """
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, obj):
        try:
            dimension = int(obj['dimension'])
            components = [MultiPoly.from_json(dimension, c) for c in obj['components']]
        except (KeyError, TypeError, ValueError) as ex:
            raise PolydiscError(f'malformed symbol JSON: {ex}')
        return cls(components, name=obj.get('name') or None, degenerate=bool(obj.get('degenerate', False)))

    @classmethod
    def loads(cls, text):
        return cls.from_json(json.loads(text))


class TorusTaylor(object):
    def __init__(self, base_point, order, re_coefs, im_coefs):
        """
        Taylor data of t -> phi_j(exp(i(theta_0 + t))) split into real and imaginary parts.

        Parameters
        ----------
        base_point : numpy.array_like
            theta_0 in [-pi, pi)^d
        order : int
            expansion order (<= 3)
        re_coefs, im_coefs : dict
            {multi-index: real coefficient} for |multi-index| <= order
        """
        self.base_point = np.asarray(base_point, dtype=float)
        self.order = order
        self.re = MappingProxyType(dict(re_coefs))
        self.im = MappingProxyType(dict(im_coefs))

    @property
    def dimension(self):
        return len(self.base_point)

    def _part(self, part):
        return self.re if part == 're' else self.im

    def value(self, part='re'):
        return self._part(part)[(0,) * self.dimension]

    def linear(self, part='im'):
        """ Gradient vector of the linear part. """
        coefs = self._part(part)
        return np.array([coefs[tuple(int(i == k) for i in range(self.dimension))] for k in range(self.dimension)])

    def quadratic(self, part='re'):
        """ Symmetric matrix M with quadratic part = t^T M t. """
        coefs = self._part(part)
        d = self.dimension
        mat = np.zeros((d, d))
        for k in range(d):
            for l in range(k, d):
                idx = [0] * d
                idx[k] += 1
                idx[l] += 1
                if k == l:
                    mat[k, k] = coefs[tuple(idx)]
                else:
                    mat[k, l] = mat[l, k] = coefs[tuple(idx)] / 2.
        return mat


def multi_indices(dimension, order):
    """ All multi-indices of total degree <= order, graded. """
    for total in range(order + 1):
        for combo in itertools.combinations_with_replacement(range(dimension), total):
            idx = [0] * dimension
            for k in combo:
                idx[k] += 1
            yield tuple(idx)


def evaluate(symbol, z):
    """
    Componentwise evaluation phi(z).

    Parameters
    ----------
    symbol : Symbol
    z : numpy.array_like
        complex array of shape (..., d)

    Returns
    -------
    numpy.ndarray
        complex array of shape (..., d)
    """
    z = np.asarray(z, dtype=complex)
    if z.shape[-1] != symbol.dimension:
        raise DimensionError(f'point has {z.shape[-1]} coordinates, symbol has dimension {symbol.dimension}')
    return np.stack([p.eval(z) for p in symbol.components], axis=-1)


def partial(poly, k):
    return poly.partial(k)


def variable_support(poly):
    return poly.variable_support()


def torus_taylor(symbol, j, theta0, order=2):
    """
    Exact Taylor coefficients of Re/Im phi_j(theta_0 + t) in t.

    Each monomial c z^alpha becomes c xi^alpha exp(i alpha.t), whose t^gamma coefficient is
    c xi^alpha i^|gamma| alpha^gamma / gamma!.

    Parameters
    ----------
    symbol : Symbol
    j : int
        component index (0-based)
    theta0 : numpy.array_like
        base angles
    order : int
        1, 2 or 3

    Returns
    -------
    TorusTaylor
    """
    if order not in (1, 2, 3):
        raise PolydiscError(f'torus_taylor order must be 1, 2 or 3, got {order}')
    poly = symbol[j] if isinstance(symbol, Symbol) else symbol
    theta0 = np.asarray(theta0, dtype=float)
    xi = np.exp(1j * theta0)
    d = poly.dimension
    if poly.is_zero():
        zeros = {idx: 0. for idx in multi_indices(d, order)}
        return TorusTaylor(theta0, order, zeros, zeros)
    exps = np.array(list(poly.terms.keys()), dtype=float)
    weights = np.array(list(poly.terms.values())) * np.prod(xi[None, :] ** exps, axis=1)
    re_coefs, im_coefs = {}, {}
    for idx in multi_indices(d, order):
        factor = np.prod(exps ** np.array(idx)[None, :], axis=1) / np.prod([math.factorial(g) for g in idx])
        coef = (1j ** sum(idx)) * np.sum(weights * factor)
        re_coefs[idx] = float(coef.real)
        im_coefs[idx] = float(coef.imag)
    return TorusTaylor(theta0, order, re_coefs, im_coefs)


def torus_grid(grid_per_axis):
    """ Periodic angle grid -pi + 2 pi k / n, k = 0..n-1 (contains 0 when n is even). """
    return -np.pi + 2 * np.pi * np.arange(grid_per_axis) / grid_per_axis


def wrap_angles(theta):
    """ Map angles into [-pi, pi). """
    return (np.asarray(theta) + np.pi) % (2 * np.pi) - np.pi


def grid_modulus(poly, grid_per_axis):
    """ |poly| on the periodic torus grid, evaluated in slabs along the first axis. """
    angles = torus_grid(grid_per_axis)
    unit = np.exp(1j * angles)
    d = poly.dimension
    rows = max(1, grid_chunk_points // grid_per_axis ** max(d - 1, 0))
    out = np.empty((grid_per_axis,) * d)
    for start in range(0, grid_per_axis, rows):
        axes = [unit[start:start + rows]] + [unit] * (d - 1)
        out[start:start + rows] = np.abs(poly.eval_grid(axes))
    return out


def modulus_sq_and_grad(polys, theta):
    """
    Sum over polys of |p(e^{i theta})|^2 and its theta gradient.

    d|p|^2/d theta_k = 2 Re(conj(p) i z_k dp/dz_k)
    """
    z = np.exp(1j * np.asarray(theta, dtype=float))
    value = 0.
    grad = np.zeros(len(z))
    for p in polys:
        pz = complex(p.eval(z))
        value += abs(pz) ** 2
        for k in range(len(z)):
            grad[k] += 2 * (np.conj(pz) * 1j * z[k] * complex(p.partial(k).eval(z))).real
    return value, grad


def refine_max(polys, theta_start, maxiter=refine_maxiter):
    """
    Local ascent of sum |p|^2 over the torus from theta_start.

    Returns
    -------
    numpy.ndarray
        refined angles wrapped into [-pi, pi)
    """
    def neg(theta):
        value, grad = modulus_sq_and_grad(polys, theta)
        return -value, -grad

    theta_start = np.asarray(theta_start, dtype=float)
    res = optimize.minimize(neg, theta_start, jac=True, method='L-BFGS-B',
                            options={'maxiter': maxiter, 'ftol': 1e-16, 'gtol': 1e-13})
    if res.fun > neg(theta_start)[0]:
        return wrap_angles(theta_start)
    return wrap_angles(res.x)


def grid_local_maxima(values, max_count):
    """ Flat indices of periodic local maxima of a grid, largest first, at most max_count. """
    filtered = ndimage.maximum_filter(values, size=3, mode='wrap')
    idx = np.flatnonzero(values >= filtered)
    order = np.argsort(-values.ravel()[idx], kind='stable')
    return idx[order][:max_count]


def selfmap_check(symbol, grid_per_axis=selfmap_grid, tol=selfmap_tol, max_starts=refine_max_starts):
    """
    Heuristic certificate that phi maps the closed polydisc into itself.

    By the maximum modulus principle it is enough to look at the torus. Each component is scanned on a periodic grid
    and its largest grid maxima are refined by local ascent on |phi_j|^2.

    Parameters
    ----------
    symbol : Symbol
    grid_per_axis : int
        grid points per axis (>= 8)
    tol : float
        allowed excess over 1
    max_starts : int
        grid maxima refined per component

    Returns
    -------
    dict
        {'max_modulus': [...], 'argmax': [[...], ...], 'passed': bool, 'heuristic': True}
    """
    if grid_per_axis < 8:
        raise PolydiscError(f'grid_per_axis must be >= 8, got {grid_per_axis}')
    angles = torus_grid(grid_per_axis)
    max_modulus, argmax = [], []
    for j, poly in enumerate(symbol.components):
        if len(poly.variable_support()) == 0:
            max_modulus.append(float(abs(poly.terms.get((0,) * symbol.dimension, 0j))))
            argmax.append([0.] * symbol.dimension)
            continue
        values = grid_modulus(poly, grid_per_axis)
        best_val, best_theta = -np.inf, None
        for flat in grid_local_maxima(values, max_starts):
            theta = angles[np.array(np.unravel_index(flat, values.shape))]
            theta = refine_max([poly], theta)
            val = float(abs(poly.eval(np.exp(1j * theta))))
            val = max(val, float(values.ravel()[flat]))
            if val > best_val:
                best_val, best_theta = val, theta
        max_modulus.append(best_val)
        argmax.append([float(t) for t in best_theta])
    passed = bool(max(max_modulus) <= 1. + tol)
    if not passed:
        logger.warning(f'{symbol.name}: max modulus {max(max_modulus):.12f} exceeds 1 + {tol:g}')
    return {'max_modulus': max_modulus, 'argmax': argmax, 'passed': passed, 'heuristic': True}


def univariate_factors(poly, rtol=factor_rel_tol):
    """
    Split poly into c * prod_k f_k(z_k), one factor per variable it depends on.

    Each f_k is read off the row of the coefficient array through the largest coefficient and scaled to 1 there; the
    split is accepted only if the product reproduces every coefficient.

    Returns
    -------
    tuple or None
        (c, {axis: one variable MultiPoly}), or None when poly is zero or not such a product
    """
    if poly.is_zero():
        return None
    terms = poly.terms
    pivot = max(terms, key=lambda e: abs(terms[e]))
    c = terms[pivot]
    factors = {}
    for k in sorted(poly.variable_support()):
        row = {(exps[k],): coef / c for exps, coef in terms.items()
               if all(e == p for i, (e, p) in enumerate(zip(exps, pivot)) if i != k)}
        factors[k] = MultiPoly(1, row)
    if math.prod(len(f.terms) for f in factors.values()) != len(terms):
        return None
    for exps, coef in terms.items():
        want = c
        for k, f in factors.items():
            want = want * f.terms.get((exps[k],), 0j)
        if abs(want - coef) > rtol * abs(c):
            return None
    return c, factors
