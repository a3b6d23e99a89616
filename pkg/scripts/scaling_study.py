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
##
import numpy as np
import pandas as pd

from polydisc_carleson import root_path
from polydisc_carleson import contact_finder as cf
from polydisc_carleson import gallery
from polydisc_carleson import measure_lab as ml
from polydisc_carleson import get_logger

out_path = root_path.joinpath('data/outputs/scaling')
out_path.mkdir(parents=True, exist_ok=True)

n_samples = 4 * 10 ** 6
threads = ml.n_threads()

logger = get_logger(__name__)
logger.info(f'Starting with {threads} thread(s)...')

## torus window exponents near the contact of each tridisc family, against 1 + 1/kappa
studies = [('h_family', {'n': 1}, 2), ('h_family', {'n': 2}, 4), ('g_family', {'n': 1}, 4), ('psi_family', {}, 6),
           ('triple_product', {}, None), ('case2', {}, None), ('case4_ex1', {}, None)]
rows = []
for name, params, kappa in studies:
    symbol = gallery.build(name, **params)
    record = cf.find_contacts(symbol)[0]
    eta = record.eta / np.abs(record.eta)
    series = ml.measure_series(symbol, record.index_set, eta, n_samples=n_samples, seed=0, threads=threads)
    series.to_csv(out_path.joinpath(f'{symbol.name}.csv'))
    series.check_monotone()
    fit = series.fit or {}
    rows.append({'symbol': symbol.name, 'I': [j + 1 for j in record.index_set], 'a': fit.get('a'),
                 'a_stderr': fit.get('a_stderr'), 'r2': fit.get('r2'),
                 'predicted': None if kappa is None else 1 + 1 / kappa})
    logger.info(f'{symbol.name}: {rows[-1]}')

exponent_df = pd.DataFrame(rows)
exponent_df.to_csv(out_path.joinpath('torus_exponents.csv'), index=False)

## hyperbola neighbourhoods: delta log(1/delta) scaling, uniform in the offset
deltas = ml.default_deltas[2:]
hyperbola_rows = []
for a in (0., 0.1, 0.5):
    for delta in deltas:
        out = ml.hyperbola_measure(a, delta, n_samples=n_samples, seed=1, threads=threads)
        hyperbola_rows.append({'offset': a, 'delta': delta, **out})
hyperbola_df = pd.DataFrame(hyperbola_rows)
hyperbola_df.to_csv(out_path.joinpath('hyperbola.csv'), index=False)
for a, tab in hyperbola_df.groupby('offset'):
    try:
        fit = ml.fit_exponent(tab, log_term=(a == 0.))
        logger.info(f'hyperbola offset {a}: a={fit["a"]:.3f}, b={fit["b"]}')
    except ml.FitError as ex:
        logger.warning(f'hyperbola offset {a}: {ex}')

## Carleson ratio scans at the contact for weights either side of the threshold of h_1
symbol = gallery.build('h_family', n=1)
record = cf.find_contacts(symbol)[0]
scan_rows = []
for beta in (-0.75, -0.5, -0.25, 0.):
    res = ml.carleson_scan(symbol, record.index_set, beta, beta, etas=[record.eta / np.abs(record.eta)],
                           n_samples=n_samples, seed=2, threads=threads)
    scan_rows.append({'beta': beta, 'trend': res['trend'], 'trend_slope': res['trend_slope']})
    res['table'].to_csv(out_path.joinpath(f'scan_h1_beta{beta}.csv'), index=False)
scan_df = pd.DataFrame(scan_rows)
scan_df.to_csv(out_path.joinpath('scan_h1.csv'), index=False)
logger.info(f'\n{scan_df}')
