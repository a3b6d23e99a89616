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

import argparse
import hashlib
import json
import logging
import pathlib
import sys
import time
from fractions import Fraction

import numpy as np

from polydisc_carleson import PolydiscError, __version__, get_logger
from polydisc_carleson import classifier as cl
from polydisc_carleson import contact_finder as cf
from polydisc_carleson import gallery
from polydisc_carleson import measure_lab as ml
from polydisc_carleson import poly_core as pc
from polydisc_carleson.beta_set import BetaSet, as_exact

logger = get_logger(__name__)

# exit codes
exit_decided = 0
exit_error = 1
exit_gap = 3

file_check_grid = 64          # self-map gate for symbols read from file (d <= 3)


def _json_default(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, BetaSet):
        return obj.to_json()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return {'re': obj.real, 'im': obj.imag}
    if isinstance(obj, (set, frozenset, tuple)):
        return list(obj)
    raise TypeError(f'{type(obj).__name__} is not JSON serialisable')


def _emit(doc, args):
    indent = None if getattr(args, 'json', False) else 2
    print(json.dumps(doc, indent=indent, default=_json_default))


def _parse_value(text):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _gallery_params(args):
    params = {}
    for item in getattr(args, 'param', None) or []:
        if '=' not in item:
            raise PolydiscError(f'--param expects key=value, got {item!r}')
        key, value = item.split('=', 1)
        params[key.strip()] = _parse_value(value.strip())
    if getattr(args, 'n', None) is not None:
        params['n'] = args.n
    return params


def _load_symbol(args):
    """ Symbol from --gallery NAME [--param k=v] or a JSON file, gated by the self-map check. """
    if args.gallery:
        return gallery.build(args.gallery, **_gallery_params(args))
    if not args.symbol:
        raise PolydiscError('give a symbol file or --gallery NAME')
    path = pathlib.Path(args.symbol)
    symbol = pc.Symbol.loads(path.read_text())
    if symbol.name is None:
        symbol.name = path.stem
    if symbol.dimension <= 3:
        report = pc.selfmap_check(symbol, grid_per_axis=file_check_grid)
        if not report['passed']:
            raise gallery.SelfMapError(f'{symbol.name} is not a self-map of the polydisc: max modulus '
                                       f'{max(report["max_modulus"]):.12f}')
    else:
        logger.warning(f'{symbol.name}: self-map check skipped in dimension {symbol.dimension}')
    return symbol


def _report(args, command, symbol, output, start):
    """ Self-contained run report. """
    params = {k: v for k, v in vars(args).items() if k not in ('func', 'verbose', 'quiet', 'json')}
    doc = {'tool': 'polydisc-carleson', 'version': __version__, 'subcommand': command, 'parameters': params,
           'output': output, 'wall_time': round(time.time() - start, 3), 'seed': getattr(args, 'seed', None)}
    if symbol is not None:
        doc['symbol'] = symbol.to_json()
        doc['symbol_digest'] = hashlib.sha256(symbol.dumps().encode()).hexdigest()
    return doc


def _deltas(text):
    return [float(as_exact(v)) for v in text.split(',')] if text else None


def _index_set(text):
    return tuple(int(v) - 1 for v in text.split(',')) if text else None


def _pick_contact(symbol, contacts, args):
    if len(contacts) == 0:
        raise PolydiscError(f'{symbol.name} does not touch the boundary; nothing to verify')
    wanted = _index_set(getattr(args, 'I', None))
    if wanted is not None:
        matches = [c for c in contacts if c.index_set == tuple(sorted(wanted))]
        if len(matches) == 0:
            raise PolydiscError(f'no contact with I={[j + 1 for j in wanted]}; found '
                                f'{[[j + 1 for j in c.index_set] for c in contacts]}')
        return matches[0]
    if not 0 <= args.contact < len(contacts):
        raise PolydiscError(f'contact index {args.contact} out of range, {len(contacts)} contact(s) found')
    return contacts[args.contact]


def cmd_classify(args):
    start = time.time()
    symbol = _load_symbol(args)
    contacts = cf.find_contacts(symbol, grid_per_axis=args.grid)
    verdict = cl.classify_symbol(symbol, contacts, random_state=args.random_state)
    output = {'verdict': verdict.to_json()}
    code = exit_decided
    if args.beta is not None:
        beta = as_exact(args.beta)
        decision = verdict.decide(beta)
        output['beta'] = str(beta)
        output['decision'] = decision
        code = exit_gap if decision == 'gap' else exit_decided
    if symbol.dimension not in (2, 3):
        output['automatic_target'] = {'d_phi': verdict.extras.get('d_phi')}
        if args.beta is not None:
            output['automatic_target']['target'] = str(cl.automatic_target(as_exact(args.beta),
                                                                           verdict.extras.get('d_phi', 0)))
    _emit(_report(args, 'classify', symbol, output, start), args)
    return code


def cmd_verify(args):
    start = time.time()
    symbol = _load_symbol(args)
    contacts = cf.find_contacts(symbol, grid_per_axis=args.grid)
    record = _pick_contact(symbol, contacts, args)
    res = ml.verify_scaling(symbol, record, float(as_exact(args.beta1)), float(as_exact(args.beta2)),
                            deltas=_deltas(args.deltas) or ml.default_deltas, n_samples=args.samples, seed=args.seed,
                            threads=args.threads, slack=args.slack)
    series = res.pop('series')
    if args.csv:
        series.to_csv(args.csv)
    output = {'contact': record.to_json(), 'verdict': res, 'series': series.to_json()}
    _emit(_report(args, 'verify', symbol, output, start), args)
    return exit_decided


def cmd_scan(args):
    start = time.time()
    symbol = _load_symbol(args)
    contacts = cf.find_contacts(symbol, grid_per_axis=args.grid)
    record = _pick_contact(symbol, contacts, args)
    etas = [record.eta / np.abs(record.eta)]
    res = ml.carleson_scan(symbol, record.index_set, float(as_exact(args.beta1)), float(as_exact(args.beta2)),
                           etas=etas, deltas=_deltas(args.deltas) or ml.scan_deltas, n_samples=args.samples,
                           seed=args.seed, threads=args.threads)
    if args.csv:
        res['table'].to_csv(args.csv, index=False)
    output = {'contact': record.to_json(), 'trend': res['trend'], 'trend_slope': res['trend_slope'],
              'evidence': True, 'worst': res['worst'].to_dict(orient='records'),
              'table': res['table'].to_dict(orient='records')}
    _emit(_report(args, 'scan', symbol, output, start), args)
    return exit_decided


def cmd_gallery(args):
    start = time.time()
    if args.action == 'list':
        output = gallery.listing().to_dict(orient='records')
        _emit(_report(args, 'gallery', None, output, start), args)
        return exit_decided
    if not args.name:
        raise PolydiscError(f'gallery {args.action} needs an entry name')
    params = _gallery_params(args)
    if args.action == 'build':
        symbol = gallery.build(args.name, **params)
        _emit(_report(args, 'gallery', symbol, symbol.to_json(), start), args)
    else:
        _emit(_report(args, 'gallery', None, gallery.expected_json(args.name, **params), start), args)
    return exit_decided


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise PolydiscError(f'formula {args.kind} needs ' + ', '.join('--' + n.replace('_', '-') for n in missing))
    return [as_exact(getattr(args, n)) for n in names]


def cmd_formula(args):
    start = time.time()
    if args.kind == 'stability':
        beta1, beta2, beta1_new = _need(args, 'beta1', 'beta2', 'beta1_new')
        output = {'beta2_new': cl.stability_map(beta1, beta2, beta1_new)}
    elif args.kind == 'automatic':
        beta, = _need(args, 'beta')
        if args.d_phi is None:
            raise PolydiscError('formula automatic needs --d-phi')
        output = {'target': cl.automatic_target(beta, args.d_phi)}
    elif args.kind == 'product':
        if None in (args.d, args.q, args.k):
            raise PolydiscError('formula product needs --d, --q and --k')
        kappa = as_exact(args.kappa) if args.kappa is not None else None
        output = {'diagonal_threshold': cl.product_family_diagonal_threshold(args.d, args.q, args.k, kappa)}
        if args.beta1 is not None:
            output['beta2_min'] = cl.product_family_threshold(args.d, args.q, args.k, kappa, as_exact(args.beta1))
    else:
        beta1, = _need(args, 'beta1')
        lam = cl.lambda_set(beta1)
        output = {'lambda': lam.to_json(), 'lambda_text': str(lam)}
        if args.beta2 is not None:
            witness = cl.lambda_witness(beta1, as_exact(args.beta2))
            output['witness'] = 'unavailable' if witness is None else witness.to_json()
    output = {k: str(v) if isinstance(v, (Fraction, float)) else v for k, v in output.items()}
    _emit(_report(args, 'formula', None, output, start), args)
    return exit_decided


def _common_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--json', action='store_true', help='compact single line JSON')
    common.add_argument('--seed', type=int, default=0, help='random seed (default: 0)')
    common.add_argument('--threads', type=int, default=None, help='worker threads (default: THREADS env or 1)')
    common.add_argument('--verbose', '-v', action='store_true', help='debug logging on stderr')
    common.add_argument('--quiet', '-q', action='store_true', help='warnings and errors only')
    return common


def _symbol_args(parser):
    parser.add_argument('symbol', nargs='?', help='symbol JSON file')
    parser.add_argument('--gallery', '-g', help='gallery entry name instead of a file')
    parser.add_argument('--param', '-p', action='append', help='gallery parameter key=value (repeatable)')
    parser.add_argument('--n', type=int, default=None, help='shorthand for --param n=N')
    parser.add_argument('--grid', type=int, default=cf.contact_grid, help='contact scan grid points per axis')


def _measure_args(parser, samples, deltas_help):
    parser.add_argument('--beta1', required=True, help='source weight index, e.g. -1/2')
    parser.add_argument('--beta2', required=True, help='target weight index')
    parser.add_argument('--samples', type=int, default=samples, help='Monte Carlo samples per window')
    parser.add_argument('--deltas', help=deltas_help)
    parser.add_argument('--I', help='contact index set, 1-based and comma separated, e.g. 1,2')
    parser.add_argument('--contact', type=int, default=0, help='contact number when --I is not given')
    parser.add_argument('--csv', help='also write the series table to this CSV file')


def build_parser():
    common = _common_parser()
    parser = argparse.ArgumentParser(prog='polydisc-carleson',
                                     description='Boundedness of composition operators on weighted Bergman spaces of '
                                                 'the polydisc')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    subparsers = parser.add_subparsers(dest='command')

    classify_parser = subparsers.add_parser('classify', parents=[common], help='classify a symbol')
    _symbol_args(classify_parser)
    classify_parser.add_argument('--beta', help='weight index to decide, e.g. -2/3')
    classify_parser.add_argument('--random-state', type=int, default=None,
                                 help='randomise the kernel basis used for the residual form')
    classify_parser.set_defaults(func=cmd_classify)

    verify_parser = subparsers.add_parser('verify', parents=[common], help='fit a window measure exponent at a contact')
    _symbol_args(verify_parser)
    _measure_args(verify_parser, ml.default_samples, 'comma separated window radii (default 2^-3 .. 2^-12)')
    verify_parser.add_argument('--slack', type=float, default=ml.default_slack, help='exponent slack')
    verify_parser.set_defaults(func=cmd_verify)

    scan_parser = subparsers.add_parser('scan', parents=[common], help='Carleson ratio scan at a contact')
    _symbol_args(scan_parser)
    _measure_args(scan_parser, 10 * ml.default_samples, 'comma separated window radii (default 2^-2 .. 2^-6)')
    scan_parser.set_defaults(func=cmd_scan)

    gallery_parser = subparsers.add_parser('gallery', parents=[common], help='list, build or describe gallery symbols')
    gallery_parser.add_argument('action', choices=['list', 'build', 'expected'])
    gallery_parser.add_argument('name', nargs='?')
    gallery_parser.add_argument('--param', '-p', action='append', help='parameter key=value (repeatable)')
    gallery_parser.add_argument('--n', type=int, default=None, help='shorthand for --param n=N')
    gallery_parser.set_defaults(func=cmd_gallery)

    formula_parser = subparsers.add_parser('formula', parents=[common], help='exact weight index formulas')
    formula_parser.add_argument('kind', choices=['stability', 'automatic', 'product', 'lambda'])
    for flag in ('--beta', '--beta1', '--beta2', '--beta1-new', '--kappa'):
        formula_parser.add_argument(flag, help='exact value, e.g. -1/2')
    for flag in ('--d-phi', '--d', '--q', '--k'):
        formula_parser.add_argument(flag, type=int)
    formula_parser.set_defaults(func=cmd_formula)
    return parser


def _set_verbosity(args):
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    for handler in logging.getLogger().handlers:
        handler.setLevel(level)


def main(argv=None):
    """ Run the command line; returns 0 (decided), 3 (queried beta in the gap) or 1 (error). """
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return exit_error
    _set_verbosity(args)
    try:
        return args.func(args)
    except (PolydiscError, json.JSONDecodeError, OSError) as ex:
        logger.error(str(ex))
        print(json.dumps({'error': str(ex), 'type': type(ex).__name__}))
        return exit_error


if __name__ == '__main__':
    sys.exit(main())
