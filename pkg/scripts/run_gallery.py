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
import json

import pandas as pd

from polydisc_carleson import root_path
from polydisc_carleson import classifier as cl
from polydisc_carleson import contact_finder as cf
from polydisc_carleson import gallery
from polydisc_carleson import get_logger

out_path = root_path.joinpath('data/outputs')
out_path.mkdir(parents=True, exist_ok=True)

logger = get_logger(__name__)
logger.info('Starting...')

## classify every low dimensional gallery entry at its default parameters and compare with the known answer
rows = []
verdicts = {}
for name in gallery.listing()['name']:
    want = gallery.expected(name)
    if want['dimension'] not in (2, 3):
        continue
    symbol = gallery.build(name)
    contacts = cf.find_contacts(symbol)
    verdict = cl.classify_symbol(symbol, contacts)
    verdicts[name] = verdict.to_json()
    row = {'name': name, 'dimension': want['dimension'], 'contacts': len(contacts),
           'J_cont': str(verdict.j_cont), 'J_discont': str(verdict.j_discont), 'gap': str(verdict.gap)}
    if want['dimension'] == 3:
        found = [c.value for c in verdict.case_tags]
        if 'case' in want:
            match = found == [want['case']]
        else:
            match = (verdict.j_cont - want['bounded']).is_empty() and want['bounded'].isdisjoint(verdict.j_discont)
        if 'J_cont' in want:
            match = match and verdict.j_cont == want['J_cont'] and verdict.j_discont == want['J_discont']
        row.update(case=want.get('case'), found=', '.join(found), match=match)
    else:
        row.update(half_gain=verdict.extras['half_gain'], quarter_gain=verdict.extras['quarter_gain'],
                   match=verdict.extras['half_gain'] == want['half_gain'] and
                   verdict.extras['quarter_gain'] == want['quarter_gain'] and verdict.j_cont == want['bounded'])
    if not row['match']:
        logger.warning(f'{name}: classification differs from the known answer')
    rows.append(row)
    logger.info(f'{name}: {row}')

verdict_df = pd.DataFrame(rows)
verdict_df.to_csv(out_path.joinpath('gallery_verdicts.csv'), index=False)
with open(out_path.joinpath('gallery_verdicts.json'), 'w') as f:
    json.dump(verdicts, f, indent=2, default=str)
logger.info(f'{verdict_df["match"].sum()} of {len(verdict_df)} entries match')

## derivative matching pairs: same derivatives up to order n on the contact set, different thresholds
pair_rows = []
for n in (1, 2):
    phi, psi = gallery.build_pair('nth_pair', n=n)
    for order in range(1, 2 * n + 1):
        pair_rows.append({'n': n, 'order': order, 'agree': cl.derivative_agreement(phi, psi, order),
                          'phi_bounded': str(gallery.expected('nth_pair', n=n, which='phi')['bounded']),
                          'psi_bounded': str(gallery.expected('nth_pair', n=n, which='psi')['bounded'])})
pair_df = pd.DataFrame(pair_rows)
pair_df.to_csv(out_path.joinpath('derivative_pairs.csv'), index=False)
logger.info(f'\n{pair_df}')
