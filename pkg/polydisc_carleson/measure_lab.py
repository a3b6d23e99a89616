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

import json
import os

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from sklearn import linear_model, metrics

from polydisc_carleson import PolydiscError, get_logger

logger = get_logger(__name__)

# globals
default_samples = 10 ** 5                               # Monte Carlo samples per window
chunk_samples = 2 ** 18                                 # samples per RNG stream; fixed so results ignore thread count
default_deltas = tuple(2. ** -k for k in range(3, 13))  # geometric window schedule
min_hits = 100                                          # fewer hits than this drops a point from the fit
signal_ratio = 3.                                       # fit points need estimate > signal_ratio * stderr
min_fit_points = 4
default_slack = 0.05                                    # exponent slack for verify_scaling
scan_slope_tol = 0.05                                   # scan trend slope below -tol reads as divergent
scan_deltas = tuple(2. ** -k for k in range(2, 7))


class FitError(PolydiscError):
    pass


def n_threads(threads=None):
    """ Worker count: explicit value, else the THREADS environment variable, else 1. """
    if threads is None:
        threads = int(os.environ.get('THREADS', '1'))
    if threads < 1:
        raise PolydiscError(f'thread count must be positive, got {threads}')
    return threads


def _as_seed_sequence(seed):
    return seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)


def _run_chunks(sample_fn, seed, n_samples, threads=None):
    """
    Run sample_fn(rng, size) -> (sum_w, sum_w2, hits) over fixed size chunks, each on its own Philox stream spawned
    from seed, and add the chunk sums in chunk order.
    """
    sizes = [chunk_samples] * (n_samples // chunk_samples)
    if n_samples % chunk_samples:
        sizes.append(n_samples % chunk_samples)
    children = _as_seed_sequence(seed).spawn(len(sizes))
    parts = Parallel(n_jobs=n_threads(threads), prefer='threads')(
        delayed(sample_fn)(np.random.Generator(np.random.Philox(child)), size) for child, size in zip(children, sizes))
    sum_w = sum(p[0] for p in parts)
    sum_w2 = sum(p[1] for p in parts)
    hits = int(sum(p[2] for p in parts))
    return sum_w, sum_w2, hits


def _estimate(sum_w, sum_w2, hits, n_samples, scale):
    """ Mean of the weighted indicator and its standard error, both scaled; rule of three for zero hits. """
    mean = sum_w / n_samples
    if hits == 0:
        return {'estimate': 0., 'stderr': 3. * scale / n_samples, 'n': n_samples, 'hits': 0}
    var = max(sum_w2 / n_samples - mean ** 2, 0.)
    return {'estimate': float(scale * mean), 'stderr': float(scale * np.sqrt(var / n_samples)), 'n': n_samples,
            'hits': hits}


def _window(symbol, index_set, eta, delta):
    index_set = tuple(index_set)
    if len(index_set) == 0:
        raise PolydiscError('window index set is empty')
    eta = np.ones(len(index_set), dtype=complex) if eta is None else np.asarray(eta, dtype=complex).ravel()
    delta = np.broadcast_to(np.asarray(delta, dtype=float), (len(index_set),)).copy()
    if len(eta) != len(index_set):
        raise PolydiscError(f'{len(eta)} window centres for index set {index_set}')
    if np.any(delta <= 0):
        raise PolydiscError(f'window radii must be positive, got {delta.tolist()}')
    polys = [symbol[j] for j in index_set]
    return polys, eta, delta


def _hits(polys, eta, delta, z):
    inside = np.ones(z.shape[0], dtype=bool)
    for p, e, dl in zip(polys, eta, delta):
        inside &= np.abs(p.eval(z) - e) < dl
    return inside


def torus_measure(symbol, index_set, eta=None, delta=0.1, n_samples=default_samples, seed=0, threads=None):
    """
    Monte Carlo estimate of lambda_d({theta in [-pi, pi)^d : |phi_j(e^(i theta)) - eta_j| < delta_j, j in I}).

    lambda_d is unnormalised Lebesgue measure, total mass (2 pi)^d.

    Parameters
    ----------
    symbol : poly_core.Symbol
    index_set : sequence of int
        components I (0-based)
    eta : sequence of complex
        window centres on the circle (default 1 for each j)
    delta : float or sequence of float
        window radii, one per j in I
    n_samples : int
    seed : int or numpy.random.SeedSequence
    threads : int
        joblib workers (default THREADS env or 1)

    Returns
    -------
    dict
        {'estimate', 'stderr', 'n', 'hits'}
    """
    polys, eta, delta = _window(symbol, index_set, eta, delta)
    d = symbol.dimension

    def sample(rng, size):
        theta = rng.uniform(-np.pi, np.pi, size=(size, d))
        inside = _hits(polys, eta, delta, np.exp(1j * theta))
        hits = np.count_nonzero(inside)
        return float(hits), float(hits), hits

    return _estimate(*_run_chunks(sample, seed, n_samples, threads), n_samples, (2 * np.pi) ** d)


def _bergman_points(rng, size, d, proposal_beta, beta):
    """
    Points of D^d with per-coordinate density (b+1)(1-r^2)^b 2r dr dtheta/2pi, b = proposal_beta, and the density
    ratio to the beta weight.
    """
    t = (1. - rng.uniform(size=(size, d))) ** (1. / (proposal_beta + 1.))   # t = 1 - r^2
    theta = rng.uniform(-np.pi, np.pi, size=(size, d))
    z = np.sqrt(1. - t) * np.exp(1j * theta)
    if proposal_beta == beta:
        return z, np.ones(size)
    ratio = ((beta + 1.) / (proposal_beta + 1.)) ** d * np.prod(t ** (beta - proposal_beta), axis=1)
    return z, ratio


def bergman_mass(symbol, index_set, eta=None, delta=0.1, beta=0., n_samples=default_samples, seed=0, threads=None,
                 proposal_beta=None):
    """
    Monte Carlo estimate of V_beta(phi_I^(-1)(S_I(eta, delta))), where dV_beta is the product of the normalised
    weights (beta+1)(1-|z_k|^2)^beta dA(z_k) (total mass 1).

    beta = -1 is the Hardy space case, handled by the normalised torus measure.

    Parameters
    ----------
    beta : float
        weight index >= -1
    proposal_beta : float
        radial proposal index in (-1, beta]; smaller values push samples to the boundary, exact density ratios keep
        the estimate unbiased

    Returns
    -------
    dict
        {'estimate', 'stderr', 'n', 'hits'}
    """
    if beta < -1:
        raise PolydiscError(f'weight index must be >= -1, got {beta}')
    if beta == -1:
        logger.debug('beta = -1: using the normalised torus measure')
        out = torus_measure(symbol, index_set, eta, delta, n_samples, seed, threads)
        scale = (2 * np.pi) ** symbol.dimension
        return {**out, 'estimate': out['estimate'] / scale, 'stderr': out['stderr'] / scale}
    proposal_beta = beta if proposal_beta is None else proposal_beta
    if not -1 < proposal_beta <= beta:
        raise PolydiscError(f'proposal index must lie in (-1, {beta}], got {proposal_beta}')
    polys, eta, delta = _window(symbol, index_set, eta, delta)
    d = symbol.dimension

    def sample(rng, size):
        z, weight = _bergman_points(rng, size, d, proposal_beta, beta)
        w = weight * _hits(polys, eta, delta, z)
        return float(np.sum(w)), float(np.sum(w ** 2)), np.count_nonzero(w)

    return _estimate(*_run_chunks(sample, seed, n_samples, threads), n_samples, 1.)


def radial_mass(beta, delta, n_samples=default_samples, seed=0, threads=None):
    """ Monte Carlo mass of the annulus {1 - delta < |z| <= 1} under the normalised beta weight on the disc. """
    if not -1 < beta:
        raise PolydiscError(f'radial mass needs beta > -1, got {beta}')

    def sample(rng, size):
        z, _ = _bergman_points(rng, size, 1, beta, beta)
        hits = np.count_nonzero(np.abs(z[:, 0]) > 1 - delta)
        return float(hits), float(hits), hits

    return _estimate(*_run_chunks(sample, seed, n_samples, threads), n_samples, 1.)


def radial_mass_exact(beta, delta):
    """ (2 delta - delta^2)^(beta + 1) """
    return float((2 * delta - delta ** 2) ** (beta + 1))


def hyperbola_measure(a, delta, M=2., n_samples=default_samples, seed=0, threads=None):
    """
    Monte Carlo estimate of lambda_2({(x, y) in [-M/2, M/2]^2 : |x^2 - y^2 - a| < delta}); bounded by
    C delta log(1/delta) uniformly in a.
    """
    if M < 1:
        raise PolydiscError(f'box size M must be >= 1, got {M}')
    if not 0 < delta < np.exp(-1):
        raise PolydiscError(f'delta must lie in (0, 1/e), got {delta}')
    if abs(a) > M ** 2 / 2 + delta:
        return {'estimate': 0., 'stderr': 0., 'n': 0, 'hits': 0}

    def sample(rng, size):
        xy = rng.uniform(-M / 2, M / 2, size=(size, 2))
        hits = np.count_nonzero(np.abs(xy[:, 0] ** 2 - xy[:, 1] ** 2 - a) < delta)
        return float(hits), float(hits), hits

    return _estimate(*_run_chunks(sample, seed, n_samples, threads), n_samples, M ** 2)


class MeasureSeries(object):
    def __init__(self, table, meta=None, fit=None):
        """
        Window measures along a delta schedule.

        Parameters
        ----------
        table : pandas.DataFrame
            columns delta, estimate, stderr, n, hits, seed, stream
        meta : dict
            window description (symbol name, I, eta, beta, measure convention)
        fit : dict
            result of fit_exponent, when computed
        """
        self.table = table
        self.meta = dict(meta or {})
        self.fit = fit

    def __len__(self):
        return len(self.table)

    def check_monotone(self, n_sigma=3.):
        """ Estimates must not decrease with delta beyond n_sigma combined standard errors. """
        tab = self.table.sort_values('delta')
        est, err = tab['estimate'].to_numpy(), tab['stderr'].to_numpy()
        drops = est[:-1] - est[1:] > n_sigma * np.sqrt(err[:-1] ** 2 + err[1:] ** 2)
        if np.any(drops):
            logger.warning(f'{self.meta.get("symbol")}: window measure decreases with delta at '
                           f'{tab["delta"].to_numpy()[1:][drops].tolist()}')
        return not bool(np.any(drops))

    def to_csv(self, file_name):
        self.table.to_csv(file_name, index=False)

    def to_json(self):
        return {'meta': self.meta, 'series': self.table.to_dict(orient='records'), 'fit': self.fit}

    def dumps(self):
        return json.dumps(self.to_json(), indent=2)


def measure_series(symbol, index_set, eta=None, deltas=default_deltas, beta=None, n_samples=default_samples, seed=0,
                   threads=None, proposal_beta=None, delta_ratio=None, fit=True, log_term=False):
    """
    Window measures for each delta in a schedule, one independent RNG stream per point.

    Parameters
    ----------
    beta : float
        None for the torus measure, else the Bergman weight index
    delta_ratio : sequence of float
        per-component multipliers of delta (anisotropic windows), default all 1
    fit : bool
        append fit_exponent to the series (skipped with a warning when too few points are significant)

    Returns
    -------
    MeasureSeries
    """
    index_set = tuple(index_set)
    deltas = sorted(float(dl) for dl in deltas)
    ratio = np.ones(len(index_set)) if delta_ratio is None else np.asarray(delta_ratio, dtype=float)
    if not np.allclose(ratio, ratio[0]):
        logger.warning(f'anisotropic windows {ratio.tolist()}: exponents are recorded, not asserted')
    streams = _as_seed_sequence(seed).spawn(len(deltas))
    rows = []
    for stream, (dl, ss) in enumerate(zip(deltas, streams)):
        if beta is None:
            out = torus_measure(symbol, index_set, eta, dl * ratio, n_samples, ss, threads)
        else:
            out = bergman_mass(symbol, index_set, eta, dl * ratio, beta, n_samples, ss, threads, proposal_beta)
        rows.append({'delta': dl, **out, 'seed': seed if isinstance(seed, int) else None, 'stream': stream})
        logger.debug(f'{symbol.name}: delta={dl:.3g} estimate={out["estimate"]:.4g} +- {out["stderr"]:.2g}')
    meta = {'symbol': symbol.name, 'I': [j + 1 for j in index_set],
            'eta': None if eta is None else [{'re': float(np.real(e)), 'im': float(np.imag(e))} for e in eta],
            'beta': beta, 'delta_ratio': ratio.tolist(),
            'measure': 'lambda_d on [-pi, pi)^d' if beta is None else 'V_beta, total mass 1'}
    series = MeasureSeries(pd.DataFrame(rows), meta)
    if fit:
        try:
            series.fit = fit_exponent(series, log_term=log_term)
        except FitError as ex:
            logger.warning(f'{symbol.name}: {ex}')
    return series


def fit_exponent(series, log_term=False):
    """
    Least squares fit of log(measure) = c + a log(delta) [+ b log log(1/delta)].

    Points with fewer than min_hits hits, or an estimate below signal_ratio standard errors, are dropped.

    Parameters
    ----------
    series : MeasureSeries or pandas.DataFrame
        needs columns delta, estimate, stderr (hits optional)
    log_term : bool
        include the log log(1/delta) regressor

    Returns
    -------
    dict
        {'a', 'a_stderr', 'b', 'intercept', 'r2', 'n_points', 'dropped'}
    """
    tab = series.table if isinstance(series, MeasureSeries) else series
    keep = (tab['estimate'] > signal_ratio * tab['stderr']) & (tab['estimate'] > 0)
    if 'hits' in tab:
        keep &= tab['hits'] >= min_hits
    if log_term:
        keep &= tab['delta'] < 1
    used, dropped = tab[keep], tab[~keep]
    if len(dropped) > 0:
        logger.warning(f'dropping {len(dropped)} weak point(s) at delta={dropped["delta"].tolist()}')
    if len(used) < min_fit_points:
        raise FitError(f'{len(used)} significant points, need {min_fit_points}; increase n_samples')

    log_d = np.log(used['delta'].to_numpy())
    x = log_d[:, None] if not log_term else np.column_stack([log_d, np.log(-log_d)])
    y = np.log(used['estimate'].to_numpy())
    model = linear_model.LinearRegression().fit(x, y)
    predicted = model.predict(x)
    r2 = metrics.r2_score(y, predicted) if np.ptp(y) > 0 else 1.

    dof = len(y) - x.shape[1] - 1
    if dof > 0:
        xc = x - x.mean(axis=0)
        sigma2 = np.sum((y - predicted) ** 2) / dof
        a_stderr = float(np.sqrt(sigma2 * np.linalg.inv(xc.T @ xc)[0, 0]))
    else:
        a_stderr = float('nan')
    return {'a': float(model.coef_[0]), 'a_stderr': a_stderr, 'b': float(model.coef_[1]) if log_term else None,
            'intercept': float(model.intercept_), 'r2': float(r2), 'n_points': int(len(y)),
            'dropped': dropped['delta'].tolist()}


def required_exponent(record, beta1, beta2):
    """ a_min = |I| (2 + beta1) - |P_I| (1 + beta2) """
    return len(record.index_set) * (2 + beta1) - len(record.p_union) * (1 + beta2)


def verify_scaling(symbol, record, beta1, beta2, deltas=default_deltas, n_samples=default_samples, seed=0,
                   threads=None, slack=default_slack, series=None):
    """
    Compare the fitted torus measure exponent near a contact with the exponent boundedness from A_beta1 into
    A_beta2 requires. Empirical evidence, not a proof.

    Parameters
    ----------
    record : contact_finder.ContactRecord
        windows are centred at phi_I(xi) of this contact
    series : MeasureSeries
        reuse a fitted series instead of sampling

    Returns
    -------
    dict
        {'a', 'a_stderr', 'a_min', 'consistent', 'slack', 'evidence', 'series'}
    """
    if beta1 < -1 or beta2 < -1:
        raise PolydiscError(f'weight indices must be >= -1, got {beta1}, {beta2}')
    if series is None:
        eta = record.eta / np.abs(record.eta)
        series = measure_series(symbol, record.index_set, eta, deltas, None, n_samples, seed, threads)
    if series.fit is None:
        series.fit = fit_exponent(series)
    a = series.fit['a']
    a_min = required_exponent(record, beta1, beta2)
    consistent = bool(a >= a_min - slack)
    logger.info(f'{symbol.name}: fitted a={a:.3f}, required {a_min:.3f} at beta1={beta1}, beta2={beta2} '
                f'-> {"consistent" if consistent else "inconsistent"}')
    return {'a': a, 'a_stderr': series.fit['a_stderr'], 'a_min': float(a_min), 'consistent': consistent,
            'slack': slack, 'evidence': True, 'series': series}


def carleson_scan(symbol, index_set, beta1, beta2, etas=None, deltas=scan_deltas, n_samples=default_samples, seed=0,
                  threads=None, proposal_beta=None):
    """
    Ratios V_beta2(phi_I^(-1)(S_I(eta, delta))) / prod_j delta^(2 + beta1) over a grid of window centres and radii,
    with the trend of the worst ratio as delta shrinks. Empirical evidence, not a proof.

    Parameters
    ----------
    etas : list of sequence of complex
        window centres (default the single centre (1, ..., 1))
    proposal_beta : float
        radial proposal index (default a quarter of the way from -1 to beta2)

    Returns
    -------
    dict
        {'table': pandas.DataFrame, 'worst': pandas.DataFrame, 'trend_slope', 'trend', 'evidence'}
    """
    index_set = tuple(index_set)
    etas = [np.ones(len(index_set), dtype=complex)] if etas is None else [np.asarray(e, dtype=complex) for e in etas]
    if proposal_beta is None:
        proposal_beta = beta2 if beta2 <= -1 else -1 + (beta2 + 1) / 4
    deltas = sorted(float(dl) for dl in deltas)
    streams = _as_seed_sequence(seed).spawn(len(deltas) * len(etas))
    rows = []
    for i, dl in enumerate(deltas):
        window = dl ** (len(index_set) * (2 + beta1))
        for k, eta in enumerate(etas):
            ss = streams[i * len(etas) + k]
            out = bergman_mass(symbol, index_set, eta, dl, beta2, n_samples, ss, threads, proposal_beta)
            rows.append({'delta': dl, 'eta': k, **out, 'ratio': out['estimate'] / window,
                         'ratio_stderr': out['stderr'] / window})
    table = pd.DataFrame(rows)
    worst = table.loc[table.groupby('delta')['ratio'].idxmax()].reset_index(drop=True)
    significant = worst[worst['hits'] > 0]
    if len(significant) >= 2:
        slope = float(np.polyfit(np.log(significant['delta']), np.log(significant['ratio']), 1)[0])
        trend = 'divergent' if slope < -scan_slope_tol else 'bounded'
    else:
        logger.warning(f'{symbol.name}: too few windows with hits for a trend')
        slope, trend = float('nan'), 'undetermined'
    logger.info(f'{symbol.name}: scan beta1={beta1}, beta2={beta2}, worst ratio slope {slope:.3f} -> {trend}')
    return {'table': table, 'worst': worst, 'trend_slope': slope, 'trend': trend, 'evidence': True}
