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

from enum import Enum
from fractions import Fraction

import numpy as np
from scipy import linalg
from scipy.stats import ortho_group

from polydisc_carleson import PolydiscError, get_logger
from polydisc_carleson import contact_finder as cf
from polydisc_carleson import gallery
from polydisc_carleson import poly_core as pc
from polydisc_carleson.beta_set import BetaSet, as_exact

logger = get_logger(__name__)

# globals
tol_rank_rel = 1e-6           # second singular value below this fraction of the first means rank one
tol_psd_rel = 1e-6            # eigenvalue threshold as a fraction of trace(Q_1 + Q_2)
tol_span = 1e-6               # allowed component of L outside the positive eigenspace
taylor_order = 3              # order kept for diagnostics; the invariants use the quadratic part


class OutsideTableError(PolydiscError):
    pass


class DegenerateContactError(PolydiscError):
    pass


class ContactAmbiguityError(PolydiscError):
    pass


class NotAttainableError(PolydiscError):
    pass


class CaseTag(Enum):
    no_contact = 'no_contact'
    full_invertible = 'full_invertible'         # |I| = d, d phi invertible
    full_singular = 'full_singular'             # |I| = d, d phi singular
    independent = 'independent'                 # |I| = 2, gradients independent
    alpha = 'alpha'                             # s = 1, r = (0, 0)
    beta = 'beta'                               # s = 1, r = (1, 0) or (0, 1)
    gamma = 'gamma'                             # s = 1, r = (1, 1)
    delta = 'delta'                             # s = 2, r = (0, 0)
    epsilon = 'epsilon'                         # no obstruction left
    low_support = 'low_support'                 # dependent gradients, |P_I| <= 2
    single = 'single'                           # |I| = 1
    undecided = 'undecided'                     # no table for this dimension


# (s, r) -> (tag, J_c, J_d) for dependent gradients and |P_I| = 3
half = Fraction(1, 2)
tridisc_table = {
    (1, (0, 0)): (CaseTag.alpha, BetaSet.closed_from(0), BetaSet.interval(-1, Fraction(-2, 3), hi_closed=False)),
    (1, (1, 0)): (CaseTag.beta, BetaSet.closed_from(-half), BetaSet.interval(-1, Fraction(-5, 6), hi_closed=False)),
    (1, (0, 1)): (CaseTag.beta, BetaSet.closed_from(-half), BetaSet.interval(-1, Fraction(-5, 6), hi_closed=False)),
    (1, (1, 1)): (CaseTag.gamma, BetaSet.open_from(-1), BetaSet.point(-1)),
    (2, (0, 0)): (CaseTag.delta, BetaSet.closed_from(-half), BetaSet.point(-1)),
    (3, (0, 0)): (CaseTag.epsilon, BetaSet.universe(), BetaSet.empty()),
    (2, (1, 0)): (CaseTag.epsilon, BetaSet.universe(), BetaSet.empty()),
    (2, (0, 1)): (CaseTag.epsilon, BetaSet.universe(), BetaSet.empty()),
    (1, (2, 0)): (CaseTag.epsilon, BetaSet.universe(), BetaSet.empty()),
    (1, (0, 2)): (CaseTag.epsilon, BetaSet.universe(), BetaSet.empty()),
}

# exponent alpha with lambda_3(window preimage) <= C (delta_1 delta_2)^alpha near the contact
upper_exponent_table = {
    (1, (0, 0)): Fraction(1, 2),
    (1, (1, 0)): Fraction(3, 4),
    (1, (0, 1)): Fraction(3, 4),
    (2, (0, 0)): Fraction(3, 4),
}


class SRClassification(object):
    def __init__(self, kappa, L, Q, s, R, r, axes, taylor=None, tol_psd=None):
        """
        Second order boundary data at a degenerate two-component contact, after rotating to xi = e and
        phi_I(e) = (1, 1).

        Parameters
        ----------
        kappa : tuple of float
            (kappa_1, kappa_2), Im phi_j has linear part kappa_j L
        L : numpy.ndarray
            unit linear form on the P_I coordinates, first nonzero entry positive
        Q : tuple of numpy.ndarray
            Q_j = -(quadratic part of Re phi_j) on the P_I coordinates
        s : int
            rank of Q_1 + Q_2
        R : numpy.ndarray
            residual imaginary quadratic form on ker(Q_1 + Q_2)
        r : tuple of int
            (positive, negative) eigenvalue counts of R
        axes : tuple of int
            the P_I coordinates (0-based) the matrices are indexed by
        taylor : tuple of poly_core.TorusTaylor
            rotated expansions kept for diagnostics
        tol_psd : float
            eigenvalue threshold used
        """
        self.kappa = tuple(float(k) for k in kappa)
        self.L = np.asarray(L, dtype=float)
        self.Q = tuple(np.asarray(q, dtype=float) for q in Q)
        self.s = int(s)
        self.R = np.asarray(R, dtype=float)
        self.r = tuple(int(v) for v in r)
        self.axes = tuple(axes)
        self.taylor = taylor
        self.tol_psd = tol_psd

    @property
    def r_rank(self):
        """ Bidisc convention: r in {0, 1} is the rank of R. """
        return self.r[0] + self.r[1]

    @property
    def tag(self):
        return self.s, self.r

    def to_json(self):
        return {'kappa': list(self.kappa), 'L': self.L.tolist(), 'Q': [q.tolist() for q in self.Q], 's': self.s,
                'R': self.R.tolist(), 'r': list(self.r), 'axes': [k + 1 for k in self.axes]}

    def __repr__(self):
        return f'SRClassification(s={self.s}, r={self.r}, kappa={np.round(self.kappa, 9).tolist()})'


class Verdict(object):
    def __init__(self, j_cont, j_discont, contacts=(), name=None, dimension=None, extras=None):
        """
        Aggregated boundedness verdict on the diagonal A_beta -> A_beta.

        Parameters
        ----------
        j_cont : BetaSet
            beta values where C_phi is bounded
        j_discont : BetaSet
            beta values where C_phi is unbounded
        contacts : list of dict
            per-contact classification rows
        extras : dict
            dimension specific fields (bidisc gains, notices)
        """
        if not j_cont.isdisjoint(j_discont):
            raise PolydiscError(f'{name}: bounded set {j_cont} meets unbounded set {j_discont}')
        self.j_cont = j_cont
        self.j_discont = j_discont
        self.gap = ~(j_cont | j_discont)
        self.contacts = list(contacts)
        self.name = name
        self.dimension = dimension
        self.extras = dict(extras or {})

    def decide(self, beta):
        """ 'bounded', 'unbounded' or 'gap' for A_beta -> A_beta. """
        if beta in self.j_cont:
            return 'bounded'
        if beta in self.j_discont:
            return 'unbounded'
        return 'gap'

    @property
    def case_tags(self):
        return [c['case'] for c in self.contacts]

    def to_json(self):
        out = {'name': self.name, 'dimension': self.dimension, 'J_cont': self.j_cont.to_json(),
               'J_discont': self.j_discont.to_json(), 'gap': self.gap.to_json(),
               'J_cont_text': str(self.j_cont), 'J_discont_text': str(self.j_discont), 'gap_text': str(self.gap),
               'contacts': [_contact_row_json(c) for c in self.contacts]}
        out.update(self.extras)
        return out


def _contact_row_json(row):
    out = {'case': row['case'].value, 'record': row['record'].to_json()}
    for key in ('s', 'r'):
        if row.get(key) is not None:
            out[key] = list(row[key]) if isinstance(row[key], tuple) else row[key]
    for key in ('J_c', 'J_d'):
        if row.get(key) is not None:
            out[key] = row[key].to_json()
    for key in ('J', 'D'):
        if row.get(key) is not None:
            out[key] = {'re': float(row[key].real), 'im': float(row[key].imag)}
    return out


def gradient_dependence(record, tol_rank=tol_rank_rel):
    """
    Numerical rank of the 2 x d gradient matrix of a two-component contact.

    Returns
    -------
    dict
        {'dependent': bool, 'rank': int, 'singular_values': [...]}
    """
    if len(record.index_set) != 2:
        raise PolydiscError(f'gradient dependence needs a two-component contact, got I={record.index_set}')
    sv = linalg.svdvals(record.gradient)
    if sv[0] == 0:
        raise DegenerateContactError(f'zero gradient at contact {record}')
    dependent = bool(len(sv) < 2 or sv[1] < tol_rank * sv[0])
    return {'dependent': dependent, 'rank': 1 if dependent else 2, 'singular_values': sv.tolist()}


def jacobian_invertible(symbol, theta, tol_rank=tol_rank_rel):
    """ |det d phi(xi)| above tol_rank times the product of row norms. """
    z = cf.snapped_unit(theta)
    if not np.all(np.abs(pc.evaluate(symbol, z)) >= 1 - cf.tol_contact):
        logger.warning(f'{symbol.name}: phi(xi) is not on the torus at theta={np.round(theta, 6).tolist()}')
    jac = symbol.jacobian(z)
    scale = np.prod(np.linalg.norm(jac, axis=1))
    if scale == 0:
        return False
    return bool(abs(np.linalg.det(jac)) > tol_rank * scale)


def _normalise_sign(vec):
    nz = np.flatnonzero(np.abs(vec) > 1e-12 * np.max(np.abs(vec)))
    return vec if vec[nz[0]] > 0 else -vec


def _random_orthogonal(dim, random_state):
    if dim == 1:
        return np.array([[np.random.default_rng(random_state).choice([-1., 1.])]])
    return ortho_group.rvs(dim, random_state=random_state)


def sr_invariants(symbol, record, tol_psd=tol_psd_rel, random_state=None):
    """
    The s and r invariants at a two-component contact with dependent gradients.

    phi_j is rotated to conj(eta_j) phi_j(xi_1 z_1, ..., xi_d z_d) so the contact sits at e with value (1, 1), and
    the exact torus expansion gives Im phi_j = kappa_j L + ..., Re phi_j = 1 - Q_j + ... on the P_I coordinates.

    Parameters
    ----------
    symbol : poly_core.Symbol
    record : contact_finder.ContactRecord
    tol_psd : float
        relative eigenvalue threshold
    random_state : int, numpy.random.Generator
        when given, the kernel basis of Q_1 + Q_2 is rotated by a random orthogonal matrix before R is formed

    Returns
    -------
    SRClassification
    """
    if len(record.index_set) != 2:
        raise PolydiscError(f's/r invariants need a two-component contact, got I={record.index_set}')
    if not gradient_dependence(record)['dependent']:
        raise PolydiscError(f'{symbol.name}: gradients are independent at {record}, s/r are not defined')
    xi = cf.snapped_unit(record.theta)
    axes = tuple(sorted(record.p_union))
    taylor = []
    for row, j in enumerate(record.index_set):
        eta = record.eta[row] / abs(record.eta[row])
        rotated = symbol[j].rotate(xi, eta)
        taylor.append(pc.torus_taylor(rotated, None, np.zeros(symbol.dimension), order=taylor_order))

    sub = np.ix_(axes, axes)
    linear = [t.linear('im')[list(axes)] for t in taylor]
    norm = np.linalg.norm(linear[0])
    if norm < tol_rank_rel:
        raise DegenerateContactError(f'{symbol.name}: vanishing boundary derivative at {record}')
    L = _normalise_sign(linear[0] / norm)
    kappa = [float(lin @ L) for lin in linear]
    for lin, k in zip(linear, kappa):
        if abs(k) < tol_rank_rel or np.linalg.norm(lin - k * L) > 1e-6 * max(1., abs(k)):
            raise DegenerateContactError(f'{symbol.name}: linear parts {linear} are not proportional at {record}')

    Q = [-t.quadratic('re')[sub] for t in taylor]
    total = Q[0] + Q[1]
    trace = float(np.trace(total))
    if trace <= 0:
        raise DegenerateContactError(f'{symbol.name}: Q_1 + Q_2 vanishes at {record}')
    tol = tol_psd * trace
    evals, evecs = linalg.eigh(total)
    if evals[0] < -tol:
        logger.warning(f'{symbol.name}: Q_1 + Q_2 has eigenvalue {evals[0]:.3g} < 0 at {record}')
    positive = evals > tol
    s = int(np.count_nonzero(positive))
    kernel = evecs[:, ~positive]
    if kernel.shape[1] > 0 and np.linalg.norm(kernel.T @ L) > tol_span:
        raise DegenerateContactError(f'{symbol.name}: L is not in the positive eigenspace of Q_1 + Q_2 at {record}')

    if kernel.shape[1] == 0:
        R = np.zeros((0, 0))
        r = (0, 0)
    else:
        if random_state is not None:
            kernel = kernel @ _random_orthogonal(kernel.shape[1], random_state)
        im_quad = [t.quadratic('im')[sub] for t in taylor]
        R = kernel.T @ (kappa[1] * im_quad[0] - kappa[0] * im_quad[1]) @ kernel
        r_evals = linalg.eigvalsh(R)
        r = (int(np.count_nonzero(r_evals > tol)), int(np.count_nonzero(r_evals < -tol)))
    sr = SRClassification(kappa, L, Q, s, R, r, axes, tuple(taylor), tol)
    logger.debug(f'{symbol.name}: {sr} at {record}')
    return sr


def tridisc_case(sr, pI_size, dependent):
    """
    Per-contact bounded / unbounded weight sets for a two-component contact on the tridisc.

    Parameters
    ----------
    sr : SRClassification
        may be None when the gradients are independent
    pI_size : int
        |P_I|
    dependent : bool
        gradients linearly dependent

    Returns
    -------
    (J_c, J_d, case_tag)
    """
    if not dependent:
        return BetaSet.universe(), BetaSet.empty(), CaseTag.independent
    if pI_size <= 2:
        return BetaSet.empty(), BetaSet.universe(), CaseTag.low_support
    try:
        tag, j_c, j_d = tridisc_table[(sr.s, sr.r)]
    except KeyError:
        raise OutsideTableError(f'(s, r) = ({sr.s}, {sr.r}) with |P_I| = {pI_size} is not covered by the table')
    return j_c, j_d, tag


def _agreeing(values, what, record, symbol):
    first = values[0]
    for v in values[1:]:
        if v != first:
            raise ContactAmbiguityError(f'{symbol.name}: {what} differs across samples of {record}: {values}')
    return first


def _classify_pair_contact(symbol, record, random_state=None):
    """ (dependent, sr) agreed over every representative sample of a contact component. """
    dependence, srs = [], []
    for i in range(len(record.samples)):
        rec = record.at_sample(symbol, i) if i > 0 else record
        dep = gradient_dependence(rec)['dependent']
        dependence.append(dep)
        srs.append(sr_invariants(symbol, rec, random_state=random_state) if dep else None)
    dependent = _agreeing(dependence, 'gradient dependence', record, symbol)
    if dependent:
        _agreeing([sr.tag for sr in srs], '(s, r)', record, symbol)
    return dependent, srs[0]


def classify_tridisc(symbol, contacts=None, random_state=None):
    """
    Bounded and unbounded weight sets of C_phi on A_beta(D^3) by intersecting / uniting the per-contact table.

    Parameters
    ----------
    symbol : poly_core.Symbol
        d = 3
    contacts : list of ContactRecord
        precomputed contacts (find_contacts is called otherwise)
    random_state : int
        randomise the kernel basis used for R

    Returns
    -------
    Verdict
    """
    if symbol.dimension != 3:
        raise pc.DimensionError(f'classify_tridisc needs d = 3, got {symbol.dimension}')
    contacts = cf.find_contacts(symbol) if contacts is None else contacts
    j_cont, j_discont = BetaSet.universe(), BetaSet.empty()
    rows = []
    for record in contacts:
        row = {'record': record}
        if len(record.index_set) == 3:
            inv = _agreeing([jacobian_invertible(symbol, t) for t in record.samples], 'invertibility', record, symbol)
            row.update(case=CaseTag.full_invertible if inv else CaseTag.full_singular,
                       J_c=BetaSet.universe() if inv else BetaSet.empty(),
                       J_d=BetaSet.empty() if inv else BetaSet.universe())
        elif len(record.index_set) == 2:
            dependent, sr = _classify_pair_contact(symbol, record, random_state)
            j_c, j_d, tag = tridisc_case(sr, len(record.p_union), dependent)
            row.update(case=tag, J_c=j_c, J_d=j_d, s=None if sr is None else sr.s, r=None if sr is None else sr.r,
                       sr=sr)
        else:
            row.update(case=CaseTag.single, J_c=BetaSet.universe(), J_d=BetaSet.empty())
        logger.debug(f'{symbol.name}: {record} -> {row["case"].value}')
        j_cont = j_cont & row['J_c']
        j_discont = j_discont | row['J_d']
        rows.append(row)
    extras = {'no_contact': True} if len(contacts) == 0 else {}
    return Verdict(j_cont, j_discont, rows, symbol.name, 3, extras)


def bidisc_JD(symbol, theta):
    """
    The boundary determinants J = det[[d1 phi1, d2 phi1], [d1 phi2, d2 phi2]] and
    D = det[[d1 phi1, d2 phi1], [-d1 phi2, d2 phi2]] at xi = exp(i theta).
    """
    if symbol.dimension != 2:
        raise pc.DimensionError(f'bidisc_JD needs d = 2, got {symbol.dimension}')
    jac = symbol.jacobian(cf.snapped_unit(theta))
    j_det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
    d_det = jac[0, 0] * jac[1, 1] + jac[0, 1] * jac[1, 0]
    return complex(j_det), complex(d_det)


def _full_contacts(symbol, contacts):
    return [c for c in contacts if len(c.index_set) == symbol.dimension]


def classify_bidisc_halfgain(symbol, contacts=None):
    """
    Whether C_phi maps A_beta(D^2) into A_(beta+1/2)(D^2). Fails only when both components depend on one common
    variable and phi touches the torus T^2.
    """
    if symbol.dimension != 2:
        raise pc.DimensionError(f'bidisc gains need d = 2, got {symbol.dimension}')
    support = symbol[0].variable_support() | symbol[1].variable_support()
    if len(support) > 1:
        return True
    contacts = cf.find_contacts(symbol) if contacts is None else contacts
    return len(_full_contacts(symbol, contacts)) == 0


def classify_bidisc_quartergain(symbol, contacts=None, random_state=None, tol_rank=tol_rank_rel):
    """
    Whether C_phi maps A_beta(D^2) into A_(beta+1/4)(D^2), beta > -1: at every xi with phi(xi) in T^2 either
    J(phi)(xi) != 0, or s = 2, or s = r = 1.
    """
    if symbol.dimension != 2:
        raise pc.DimensionError(f'bidisc gains need d = 2, got {symbol.dimension}')
    contacts = cf.find_contacts(symbol) if contacts is None else contacts
    for record in _full_contacts(symbol, contacts):
        for i in range(len(record.samples)):
            rec = record.at_sample(symbol, i) if i > 0 else record
            j_det, _ = bidisc_JD(symbol, rec.theta)
            scale = np.prod(np.linalg.norm(rec.gradient, axis=1))
            if abs(j_det) > tol_rank * scale:
                continue
            if len(rec.p_union) < 2:
                return False
            sr = sr_invariants(symbol, rec, random_state=random_state)
            if not (sr.s == 2 or (sr.s == 1 and sr.r_rank == 1)):
                return False
    return True


def stability_map(beta1, beta2, beta1_new):
    """
    Target index beta2' with C_phi: A_beta1' -> A_beta2' bounded whenever C_phi: A_beta1 -> A_beta2 is, for
    beta1' >= beta1.

    beta2' = (beta1' (beta2 + 2) + 2 (beta2 - beta1)) / (beta1 + 2)
    """
    beta1, beta2, beta1_new = as_exact(beta1), as_exact(beta2), as_exact(beta1_new)
    if not beta1_new >= beta1 >= -1 or beta2 < -1:
        raise PolydiscError(f'need beta1\' >= beta1 >= -1 and beta2 >= -1, got {beta1_new}, {beta1}, {beta2}')
    return (beta1_new * (beta2 + 2) + 2 * (beta2 - beta1)) / (beta1 + 2)


def d_phi(symbol, contacts=None):
    """ Largest |I| with phi_I touching T^|I| (0 when phi never reaches the boundary). """
    contacts = cf.find_contacts(symbol) if contacts is None else contacts
    return max((len(c.index_set) for c in contacts), default=0)


def automatic_target(beta, dphi):
    """
    Target index d_phi (beta + 2) - 2 that every symbol reaches from A_beta.

    With d_phi = 0 (no contact) the formula gives -2; the result is clamped to -1, the Hardy space index.
    """
    beta = as_exact(beta)
    if beta < -1:
        raise PolydiscError(f'beta must be >= -1, got {beta}')
    target = dphi * (beta + 2) - 2
    if dphi == 0:
        logger.warning('no boundary contact, C_phi is bounded into every A_beta; target clamped to -1')
        return Fraction(-1)
    return target


def product_family_threshold(d, q, k, kappa, beta1):
    """
    Smallest beta2 with C_phi: A_beta1 -> A_beta2 bounded for the product family
    (f(z_1)...f(z_k) z_(k+1)...z_d repeated q times, 0, ..., 0), where 1 - |f(e^(it))| ~ |t|^kappa.

    d beta2 >= (2q - d - 1 - k/kappa) + q beta1, the boundary included.
    """
    if not (0 <= k <= d and 1 <= q <= d):
        raise PolydiscError(f'need 0 <= k <= d and 1 <= q <= d, got d={d}, q={q}, k={k}')
    if k > 0 and not kappa > 1:
        raise PolydiscError(f'contact order kappa must exceed 1, got {kappa}')
    ratio = Fraction(0) if k == 0 else Fraction(k) / as_exact(kappa)
    return ((2 * q - d - 1 - ratio) + q * as_exact(beta1)) / d


def product_family_diagonal_threshold(d, q, k, kappa):
    """
    Smallest beta with C_phi bounded on A_beta(D^d) for the product family: (2q - d - 1 - k/kappa) / (d - q) for
    q < d. For q = d the answer is every beta (-1) or none (math.inf).
    """
    ratio = Fraction(0) if k == 0 else Fraction(k) / as_exact(kappa)
    numerator = 2 * q - d - 1 - ratio
    if q == d:
        return Fraction(-1) if numerator <= 0 else float('inf')
    return max(numerator / (d - q), Fraction(-1))


def local_upper_exponent(sr, pI_size):
    """
    Exponent alpha in lambda_3(preimage of a window) <= C (delta_1 delta_2)^alpha near a dependent contact
    with |P_I| = 3. None for s = 1, r = (1, 1), where every alpha < 1 works but not 1.
    """
    if pI_size != 3:
        raise OutsideTableError(f'upper exponents are tabulated for |P_I| = 3, got {pI_size}')
    if sr.tag == (1, (1, 1)):
        return None
    try:
        return upper_exponent_table[sr.tag]
    except KeyError:
        raise OutsideTableError(f'no upper exponent for (s, r) = {sr.tag}')


def weight_stable_tridisc(symbol, contacts=None, tol_rank=tol_rank_rel):
    """
    Boundedness on A_beta(D^3) for every beta >= 0: d phi invertible at every full contact and, at every
    two-component contact, independent gradients or all six partial derivatives nonzero.
    """
    if symbol.dimension != 3:
        raise pc.DimensionError(f'weight_stable_tridisc needs d = 3, got {symbol.dimension}')
    contacts = cf.find_contacts(symbol) if contacts is None else contacts
    for record in contacts:
        for i in range(len(record.samples)):
            rec = record.at_sample(symbol, i) if i > 0 else record
            if len(rec.index_set) == 3 and not jacobian_invertible(symbol, rec.theta):
                return False
            if len(rec.index_set) == 2 and gradient_dependence(rec)['dependent']:
                scale = np.max(np.abs(rec.gradient))
                if np.any(np.abs(rec.gradient) <= tol_rank * scale):
                    return False
    return True


def _fixed_axes(record):
    """ Axes on which every sample of the contact component sits at the same angle. """
    fixed = {}
    for k in range(record.dimension):
        values = [s[k] for s in record.samples]
        if all(abs(pc.wrap_angles(v - values[0])) < cf.dedupe_radius for v in values):
            fixed[k] = values[0]
    return fixed


def derivative_agreement(phi, psi, order, contacts=None):
    """
    Whether all partial derivatives of order <= order of phi and psi coincide on every contact component of phi.

    On each component the coordinates that stay fixed across samples are substituted exactly (snapped to
    1, i, -1, -i when possible) and the difference of derivatives must vanish as a polynomial in the remaining
    coordinates. The contact structures of phi and psi must match.
    """
    if phi.dimension != psi.dimension:
        raise pc.DimensionError(f'dimension mismatch {phi.dimension} vs {psi.dimension}')
    contacts = cf.find_contacts(phi) if contacts is None else contacts
    other = cf.find_contacts(psi)

    def structure(records):
        return sorted((r.index_set, tuple(sorted((k, round(float(v), 6)) for k, v in _fixed_axes(r).items())))
                      for r in records)

    if structure(contacts) != structure(other):
        logger.warning(f'{phi.name} and {psi.name} have different contact sets')
        return False
    for record in contacts:
        fixed = _fixed_axes(record)
        values = cf.snapped_unit(np.array([fixed.get(k, 0.) for k in range(phi.dimension)]))
        for j in range(phi.dimension):
            diff = phi[j] - psi[j]
            for idx in pc.multi_indices(phi.dimension, order):
                deriv = diff.derivative(idx)
                for k in fixed:
                    deriv = deriv.substitute(k, values[k])
                if not deriv.is_zero():
                    logger.debug(f'derivative {idx} of component {j} differs on {record}: {deriv}')
                    return False
    return True


def lambda_set(beta1):
    """ Attainable minimal targets from A_beta1 on the bidisc: [beta1, beta1 + 1/2] U {2 beta1 + 2}. """
    beta1 = as_exact(beta1)
    if beta1 < -1:
        raise PolydiscError(f'beta1 must be >= -1, got {beta1}')
    return BetaSet.interval(beta1, beta1 + half) | BetaSet.point(2 * beta1 + 2)


def lambda_witness(beta1, beta2):
    """
    A polynomial bidisc symbol whose minimal target from A_beta1 is exactly beta2, or None when the only known
    witness is not polynomial.
    """
    beta1, beta2 = as_exact(beta1), as_exact(beta2)
    if beta2 not in lambda_set(beta1):
        raise NotAttainableError(f'{beta2} is not an attainable target from A_{beta1}: {lambda_set(beta1)}')
    if beta2 == beta1:
        return gallery.build('bidisc_invertible')
    if beta2 == beta1 + half:
        return gallery.build('bidisc_z1z2')
    if beta2 == 2 * beta1 + 2:
        return gallery.build('bidisc_z1z1')
    n = 1 / (4 * (beta1 + half - beta2))
    if n.denominator == 1:
        return gallery.build('bidisc_product', n=int(n))
    logger.warning(f'target {beta2} from A_{beta1} needs a non-polynomial witness')
    return None


def classify_bidisc(symbol, contacts=None, random_state=None):
    """
    Bidisc verdict: C_phi is bounded on A_beta(D^2) (beta > -1, and on the Hardy space) iff d phi(xi) is
    invertible wherever phi(xi) lies in T^2. Gains to beta + 1/2 and beta + 1/4 are attached.
    """
    contacts = cf.find_contacts(symbol) if contacts is None else contacts
    rows = []
    bounded = True
    for record in contacts:
        row = {'record': record}
        if len(record.index_set) == 2:
            inv = _agreeing([jacobian_invertible(symbol, t) for t in record.samples], 'invertibility', record, symbol)
            j_det, d_det = bidisc_JD(symbol, record.theta)
            row.update(case=CaseTag.full_invertible if inv else CaseTag.full_singular, J=j_det, D=d_det)
            if not inv and len(record.p_union) == 2:
                sr = sr_invariants(symbol, record, random_state=random_state)
                row.update(s=sr.s, r=sr.r_rank, sr=sr)
            bounded = bounded and inv
        else:
            row.update(case=CaseTag.single)
        rows.append(row)
    extras = {'half_gain': classify_bidisc_halfgain(symbol, contacts),
              'quarter_gain': classify_bidisc_quartergain(symbol, contacts, random_state)}
    j_cont = BetaSet.universe() if bounded else BetaSet.empty()
    return Verdict(j_cont, ~j_cont, rows, symbol.name, 2, extras)


def classify_generic(symbol, contacts=None):
    """
    Verdict from dimension free tools: automatic continuity settles d_phi <= 1, the equal-radius necessary
    condition settles |P_I| < |I|; everything else is left as gap.
    """
    contacts = cf.find_contacts(symbol) if contacts is None else contacts
    dphi = d_phi(symbol, contacts)
    rows = []
    for record in contacts:
        if len(record.index_set) == 1:
            case = CaseTag.single
        elif len(record.p_union) < len(record.index_set):
            case = CaseTag.low_support
        else:
            case = CaseTag.undecided
        rows.append({'record': record, 'case': case})
    extras = {'d_phi': dphi, 'notice': f'no case table for d = {symbol.dimension}; generic tools only'}
    if dphi <= 1:
        return Verdict(BetaSet.universe(), BetaSet.empty(), rows, symbol.name, symbol.dimension, extras)
    if any(len(c.p_union) < len(c.index_set) for c in contacts):
        return Verdict(BetaSet.empty(), BetaSet.universe(), rows, symbol.name, symbol.dimension, extras)
    logger.warning(f'{symbol.name}: dimension {symbol.dimension} is only partially decidable')
    return Verdict(BetaSet.empty(), BetaSet.empty(), rows, symbol.name, symbol.dimension, extras)


def classify_symbol(symbol, contacts=None, random_state=None):
    """ Dispatch on dimension: d = 3 table, d = 2 bidisc criteria, other d generic tools. """
    contacts = cf.find_contacts(symbol) if contacts is None else contacts
    if symbol.dimension == 3:
        return classify_tridisc(symbol, contacts, random_state)
    if symbol.dimension == 2:
        return classify_bidisc(symbol, contacts, random_state)
    return classify_generic(symbol, contacts)
