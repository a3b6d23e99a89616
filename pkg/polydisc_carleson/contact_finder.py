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
from fractions import Fraction

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from polydisc_carleson import PolydiscError, get_logger
from polydisc_carleson import poly_core as pc

logger = get_logger(__name__)

# globals
contact_grid = 64             # default grid points per axis for the contact scan
tol_contact = 1e-9            # |phi_j| >= 1 - tol_contact counts as touching the circle
tol_rank_rel = 1e-8           # relative gradient threshold
candidate_band = 0.05         # grid cells with min_j |phi_j| >= 1 - band seed the refinement
samples_per_component = 8     # representative points kept per contact component
dedupe_radius = 1e-3          # angular radius under which refined points are merged
snap_tol = 1e-8               # refined angles this close to a multiple of pi/2 are snapped
polish_radius = 1e-1          # farther snapping, kept only when the point touches the circle at least as well
max_components = 64           # components refined per index set
max_grid_points = 2 ** 22     # larger contact grids switch to the factor by factor search
circle_grid = 4096            # grid points for one-variable factors on the circle


class GridBudgetError(PolydiscError):
    pass


class DeltaVector(object):
    def __init__(self, index_set, values):
        """
        Carleson window radii delta_j, one per index j in the contact's index set.

        Parameters
        ----------
        index_set : sequence of int
            component indices (0-based)
        values : sequence of float
            delta_j in (0, 1), aligned with index_set
        """
        index_set = tuple(index_set)
        values = tuple(values)
        if len(index_set) != len(values):
            raise PolydiscError(f'{len(values)} radii for index set {index_set}')
        for v in values:
            if not 0 < v < 1:
                raise PolydiscError(f'window radii must lie in (0, 1), got {v}')
        self.index_set = index_set
        self.values = values
        self._by_index = dict(zip(index_set, values))

    @classmethod
    def equal(cls, index_set, delta):
        return cls(index_set, [delta] * len(tuple(index_set)))

    def __getitem__(self, j):
        return self._by_index[j]

    def __iter__(self):
        return iter(self.values)

    def __repr__(self):
        return f'DeltaVector({self._by_index})'


class ContactRecord(object):
    def __init__(self, theta, index_set, supports, dimension=None, eta=None, gradient=None, samples=None):
        """
        A boundary contact: torus point xi = exp(i theta) where phi_j(xi) is unimodular for every j in index_set,
        together with the first order data the classification needs.

        Parameters
        ----------
        theta : numpy.array_like
            angles in [-pi, pi)
        index_set : iterable of int
            maximal set I of touching components (0-based)
        supports : dict
            {j: frozenset of axes phi_j depends on} for j in I
        dimension : int
            d (defaults to len(theta))
        eta : numpy.array_like
            phi_j(xi) for j in I
        gradient : numpy.array_like
            |I| x d complex matrix of d phi_j / d z_k (xi)
        samples : list
            further angle vectors on the same contact component (the first is theta itself)
        """
        self.theta = np.asarray(theta, dtype=float)
        self.dimension = int(dimension or len(self.theta))
        self.index_set = tuple(sorted(index_set))
        self.supports = {j: frozenset(supports[j]) for j in self.index_set}
        self.p_union = frozenset().union(*self.supports.values()) if self.supports else frozenset()
        self.free_axes = frozenset(range(self.dimension)) - self.p_union
        self.eta = None if eta is None else np.asarray(eta, dtype=complex)
        self.gradient = None if gradient is None else np.asarray(gradient, dtype=complex)
        self.samples = [self.theta] if samples is None else [np.asarray(s, dtype=float) for s in samples]

    @property
    def xi(self):
        return np.exp(1j * self.theta)

    @property
    def is_continuum(self):
        return len(self.samples) > 1

    def at_sample(self, symbol, i):
        """ The record re-evaluated at the i-th representative sample. """
        rec = contact_record(symbol, self.samples[i], self.index_set)
        rec.samples = list(self.samples)
        return rec

    def julia_caratheodory_ok(self, tol_rank=None):
        """ Rotated derivatives conj(eta_j) xi_k d_k phi_j have nonnegative real part and do not vanish on P_j. """
        if self.gradient is None:
            return True
        scale = np.max(np.abs(self.gradient)) if self.gradient.size else 0.
        tol_rank = tol_rank_rel * scale if tol_rank is None else tol_rank
        for row, j in enumerate(self.index_set):
            eta = self.eta[row] / abs(self.eta[row])
            for k in self.supports[j]:
                rotated = np.conj(eta) * self.xi[k] * self.gradient[row, k]
                if rotated.real < -1e-8 or abs(self.gradient[row, k]) <= tol_rank:
                    return False
        return True

    def to_json(self):
        out = {'theta': [float(t) for t in self.theta], 'I': [j + 1 for j in self.index_set],
               'P': {str(j + 1): sorted(k + 1 for k in self.supports[j]) for j in self.index_set},
               'P_I': sorted(k + 1 for k in self.p_union), 'free_axes': sorted(k + 1 for k in self.free_axes),
               'samples': len(self.samples), 'sampled_continuum': self.is_continuum}
        if self.eta is not None:
            out['modulus'] = [float(abs(e)) for e in self.eta]
            out['eta'] = [{'re': float(e.real), 'im': float(e.imag)} for e in self.eta]
        if self.gradient is not None:
            out['gradient'] = {'re': self.gradient.real.tolist(), 'im': self.gradient.imag.tolist()}
        return out

    def __repr__(self):
        return 'ContactRecord(I={0}, theta={1}, P_I={2})'.format(
            [j + 1 for j in self.index_set], np.round(self.theta, 6).tolist(), sorted(k + 1 for k in self.p_union))


def snap_angles(theta, tol=snap_tol):
    """ Snap angles within tol of a multiple of pi/2 onto it exactly. """
    theta = pc.wrap_angles(theta)
    quarter = np.round(theta / (np.pi / 2))
    snapped = np.where(np.abs(theta - quarter * np.pi / 2) < tol, quarter * np.pi / 2, theta)
    return pc.wrap_angles(snapped)


def snapped_unit(theta):
    """ exp(i theta) with exact values at multiples of pi/2. """
    theta = snap_angles(theta)
    xi = np.exp(1j * theta)
    quarter = theta / (np.pi / 2)
    exact = np.isclose(quarter, np.round(quarter), rtol=0, atol=1e-12)
    lookup = {0: 1. + 0j, 1: 1j, 2: -1. + 0j, 3: -1j}
    for k in np.flatnonzero(exact):
        xi[k] = lookup[int(np.round(quarter[k])) % 4]
    return xi


def _joint_modulus(symbol, index_set, theta):
    z = snapped_unit(theta)
    return min(abs(complex(symbol[j].eval(z))) for j in index_set)


def polish(symbol, index_set, theta, radius=polish_radius):
    """ Snap each angle within radius of a multiple of pi/2 onto it when min_{j in I} |phi_j| does not drop. """
    theta = snap_angles(theta)
    best = _joint_modulus(symbol, index_set, theta)
    for k in range(len(theta)):
        target = np.round(theta[k] / (np.pi / 2)) * np.pi / 2
        if theta[k] == target or abs(theta[k] - target) > radius:
            continue
        trial = theta.copy()
        trial[k] = target
        value = _joint_modulus(symbol, index_set, trial)
        if value >= best - 1e-15:
            theta, best = pc.wrap_angles(trial), max(best, value)
    return theta


def contact_record(symbol, theta, index_set):
    """ Build the first order contact data of symbol at angles theta for the touching components index_set. """
    theta = snap_angles(theta)
    z = snapped_unit(theta)
    index_set = tuple(sorted(index_set))
    eta = np.array([complex(symbol[j].eval(z)) for j in index_set])
    gradient = np.array([[complex(symbol[j].partial(k).eval(z)) for k in range(symbol.dimension)]
                         for j in index_set]).reshape(len(index_set), symbol.dimension)
    supports = {j: symbol[j].variable_support() for j in index_set}
    return ContactRecord(theta, index_set, supports, symbol.dimension, eta, gradient)


def _periodic_components(mask):
    """ Connected components of a boolean grid with wrap-around neighbours along every axis. """
    cell_idx = -np.ones(mask.shape, dtype=int)
    cell_idx[mask] = np.arange(np.count_nonzero(mask))
    rows, cols = [], []
    for axis in range(mask.ndim):
        neighbour = np.roll(cell_idx, -1, axis=axis)
        both = mask & (neighbour >= 0)
        rows.append(cell_idx[both])
        cols.append(neighbour[both])
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    n = np.count_nonzero(mask)
    graph = sparse.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    n_comp, labels = csgraph.connected_components(graph, directed=False)
    return n_comp, labels, np.flatnonzero(mask)


def _component_seeds(flat_cells, values, n_seeds):
    """ The top-valued cell followed by evenly spaced cells of one component. """
    top = flat_cells[np.argmax(values)]
    spaced = flat_cells[np.unique(np.linspace(0, len(flat_cells) - 1, n_seeds).astype(int))]
    seeds = [top] + [c for c in spaced if c != top]
    return seeds[:n_seeds]


def _angular_distance(a, b):
    return float(np.max(np.abs(pc.wrap_angles(np.asarray(a) - np.asarray(b)))))


def find_contacts(symbol, grid_per_axis=contact_grid, tol_contact=tol_contact, n_samples=samples_per_component,
                  band=candidate_band):
    """
    Locate the boundary contacts of a polynomial self-map on the torus.

    For each index set I (largest first) the grid of min_{j in I} |phi_j| is thresholded, split into periodic
    connected components and a handful of cells per component are refined by local ascent. Refined points keep the
    index set only if it is exactly their maximal touching set. When grid_per_axis^d exceeds max_grid_points the
    search runs factor by factor instead, which needs every component to be a product of one-variable factors.

    Parameters
    ----------
    symbol : poly_core.Symbol
    grid_per_axis : int
        grid resolution
    tol_contact : float
        contact tolerance on 1 - |phi_j|
    n_samples : int
        representative samples kept per component
    band : float
        candidate threshold below 1 for grid cells

    Returns
    -------
    list of ContactRecord
        sorted by (-|I|, I, theta); empty when nothing touches the boundary
    """
    if grid_per_axis ** symbol.dimension > max_grid_points:
        logger.info(f'{symbol.name}: {grid_per_axis}^{symbol.dimension} grid exceeds {max_grid_points} points, '
                    f'searching factor by factor')
        records = _factor_contacts(symbol, tol_contact, n_samples)
    else:
        records = _grid_contacts(symbol, grid_per_axis, tol_contact, n_samples, band)

    records.sort(key=lambda r: (-len(r.index_set), r.index_set, tuple(np.round(r.theta, 9))))
    for rec in records:
        if not rec.julia_caratheodory_ok():
            logger.warning(f'{symbol.name}: contact {rec} fails the boundary derivative sign check')
        if rec.is_continuum:
            logger.debug(f'{symbol.name}: contact {rec} is a continuum, {len(rec.samples)} samples kept')
    logger.info(f'{symbol.name}: {len(records)} contact component(s)')
    return records


def _maximal_set(symbol, theta, tol_contact):
    z = snapped_unit(theta)
    mods = np.abs([complex(p.eval(z)) for p in symbol.components])
    return tuple(j for j in range(symbol.dimension) if mods[j] >= 1 - tol_contact)


def _grid_contacts(symbol, grid_per_axis, tol_contact, n_samples, band):
    d = symbol.dimension
    angles = pc.torus_grid(grid_per_axis)
    moduli = [pc.grid_modulus(p, grid_per_axis) for p in symbol.components]
    overall = max(float(np.max(m)) for m in moduli)
    if overall < 1 - band:
        logger.info(f'{symbol.name}: no contact, max modulus {overall:.6f}')
        return []

    records = []
    for size in range(d, 0, -1):
        for index_set in itertools.combinations(range(d), size):
            joint = np.min([moduli[j] for j in index_set], axis=0)
            if np.max(joint) < 1 - band:
                continue
            free = frozenset(range(d)) - frozenset().union(*(symbol[j].variable_support() for j in index_set))
            n_comp, labels, cells = _periodic_components(joint >= 1 - band)
            if n_comp > max_components:
                logger.warning(f'{symbol.name}: {n_comp} candidate components for I={index_set}, '
                               f'refining the first {max_components}')
            for comp in range(min(n_comp, max_components)):
                comp_cells = cells[labels == comp]
                accepted = []
                for cell in _component_seeds(comp_cells, joint.ravel()[comp_cells], n_samples):
                    theta = angles[np.array(np.unravel_index(cell, joint.shape))]
                    theta[list(free)] = 0.
                    theta = pc.refine_max([symbol[j] for j in index_set], theta)
                    theta = polish(symbol, index_set, theta)
                    if _maximal_set(symbol, theta, tol_contact) != index_set:
                        continue
                    if any(_angular_distance(theta, prev) < dedupe_radius for prev in accepted):
                        continue
                    accepted.append(theta)
                if len(accepted) == 0:
                    continue
                _merge_or_append(symbol, records, index_set, accepted)
    return records


def _circle_maxima(factor, grid_per_axis=circle_grid):
    """ Largest modulus of a one-variable polynomial on the circle and the polished angles attaining it. """
    unit = pc.Symbol([factor])
    values = pc.grid_modulus(factor, grid_per_axis)
    angles = pc.torus_grid(grid_per_axis)
    found = []
    for flat in pc.grid_local_maxima(values, pc.refine_max_starts):
        theta = polish(unit, (0,), pc.refine_max([factor], angles[[flat]]))
        found.append((_joint_modulus(unit, (0,), theta), float(theta[0])))
    peak = max(v for v, _ in found)
    where = []
    for value, t in sorted(found, key=lambda item: item[1]):
        if value >= peak - tol_contact and all(_angular_distance(t, s) >= dedupe_radius for s in where):
            where.append(t)
    return peak, np.array(where)


def _intersect_axes(constraints):
    """ Per-axis intersection of angle sets, None standing for the whole circle; None overall if one is empty. """
    out = {}
    for axes in constraints:
        for k, angles in axes.items():
            if angles is None:
                out.setdefault(k, None)
            elif out.get(k) is None:
                out[k] = angles
            else:
                keep = [a for a in out[k] if np.min(np.abs(pc.wrap_angles(angles - a))) < dedupe_radius]
                if len(keep) == 0:
                    return None
                out[k] = np.array(keep)
    return out


def _factor_contacts(symbol, tol_contact, n_samples):
    """
    Contacts of a symbol whose components are products of one-variable factors.

    c prod_k f_k(z_k) is unimodular exactly where every f_k attains its largest modulus on the circle, so the contact
    set of an index set is a product of finite angle sets and whole circles (monomial factors).
    """
    d = symbol.dimension
    where, maxima = {}, {}
    for j, poly in enumerate(symbol.components):
        if poly.is_zero():
            continue
        split = pc.univariate_factors(poly)
        if split is None:
            raise GridBudgetError(f'{symbol.name}: component {j + 1} is not a product of one-variable factors and a '
                                  f'{d}-dimensional contact grid exceeds {max_grid_points} points')
        const, factors = split
        peak, axes = abs(const), {}
        for k, factor in factors.items():
            if len(factor.terms) == 1:
                peak *= abs(next(iter(factor.terms.values())))
                axes[k] = None
            else:
                if factor not in maxima:
                    maxima[factor] = _circle_maxima(factor)
                value, angles = maxima[factor]
                peak *= value
                axes[k] = angles
        if peak >= 1 - tol_contact:
            where[j] = axes

    records = []
    touching = sorted(where)
    for size in range(len(touching), 0, -1):
        for index_set in itertools.combinations(touching, size):
            # equal components touch together
            if any(symbol[i] == symbol[j] for i in index_set for j in touching if j not in index_set):
                continue
            axes = _intersect_axes([where[j] for j in index_set])
            if axes is None:
                continue
            circle = [k for k, a in axes.items() if a is None]
            finite = [k for k, a in axes.items() if a is not None]
            for point in itertools.islice(itertools.product(*(axes[k] for k in finite)), max_components):
                accepted = []
                for s in range(n_samples if circle else 1):
                    theta = np.zeros(d)
                    theta[finite] = list(point)
                    theta[circle] = 2 * np.pi * s / n_samples
                    theta = snap_angles(theta)
                    if _maximal_set(symbol, theta, tol_contact) == index_set:
                        accepted.append(theta)
                if len(accepted) > 0:
                    _merge_or_append(symbol, records, index_set, accepted)
    return records


def _merge_or_append(symbol, records, index_set, accepted):
    for rec in records:
        if rec.index_set != index_set:
            continue
        if any(_angular_distance(a, s) < dedupe_radius for a in accepted for s in rec.samples):
            rec.samples += [a for a in accepted if all(_angular_distance(a, s) >= dedupe_radius for s in rec.samples)]
            return
    rec = contact_record(symbol, accepted[0], index_set)
    rec.samples = accepted
    records.append(rec)


def _as_delta(record, delta):
    if isinstance(delta, DeltaVector):
        return delta
    return DeltaVector(record.index_set, delta)


def omega(record, k, delta):
    """
    Per-axis window width min{delta_j : j in I, k in P_j}, or 1 off P_I.

    Parameters
    ----------
    record : ContactRecord
    k : int
        axis (0-based)
    delta : DeltaVector or sequence aligned with record.index_set
    """
    delta = _as_delta(record, delta)
    widths = [delta[j] for j in record.index_set if k in record.supports[j]]
    return min(widths) if widths else 1.


def omega_product_bound(record, delta):
    """
    Compare prod_k omega_k with prod_j delta_j^(|P_I|/|I|).

    The inequality holds whenever all radii are equal, and whenever the smallest radius belongs to a component
    depending on every variable of P_I. It can fail for disjoint supports with unequal radii, e.g. P = ({1}, {2, 3})
    with radii (0.1, 0.5).
    """
    delta = _as_delta(record, delta)
    lhs = float(np.prod([omega(record, k, delta) for k in range(record.dimension)]))
    rhs = float(np.prod([delta[j] ** (len(record.p_union) / len(record.index_set)) for j in record.index_set]))
    holds = lhs <= rhs * (1 + 1e-12)
    if not holds:
        logger.warning(f'omega product {lhs:.6g} exceeds {rhs:.6g} for supports {record.supports} and {delta}')
    return {'lhs': lhs, 'rhs': rhs, 'holds': holds}


def predicted_bound(record, delta, beta1, beta2):
    """ prod_{j in I} delta_j^(2+beta1) / prod_k omega_k^(1+beta2), without the symbol dependent constant. """
    if beta1 < -1 or beta2 < -1:
        raise PolydiscError(f'weight indices must be >= -1, got {beta1}, {beta2}')
    delta = _as_delta(record, delta)
    numerator = np.prod([delta[j] ** (2 + beta1) for j in record.index_set])
    denominator = np.prod([omega(record, k, delta) ** (1 + beta2) for k in range(record.dimension)])
    return float(numerator / denominator)


def necessary_condition(record, beta1, beta2):
    """
    Equal radius necessary condition |P_I| (2 + beta2) >= |I| (2 + beta1) for boundedness from A_beta1 to A_beta2.
    The preimage of a window contains a polydisc box of side omega_k along every axis.
    """
    beta1, beta2 = Fraction(beta1), Fraction(beta2)
    return len(record.p_union) * (2 + beta2) >= len(record.index_set) * (2 + beta1)
