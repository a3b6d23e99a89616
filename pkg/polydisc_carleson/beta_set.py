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

import math
from fractions import Fraction

from polydisc_carleson import PolydiscError

# globals
beta_floor = Fraction(-1)     # smallest admissible weight index (Hardy space)
inf = math.inf


class ParseError(PolydiscError, ValueError):
    pass


def as_exact(value):
    """ Fraction for finite values (strings like '-1/2' accepted), math.inf kept as is. """
    if isinstance(value, str):
        value = value.strip()
        if value in ('inf', '+inf', 'oo'):
            return inf
    elif isinstance(value, float) and math.isinf(value):
        if value < 0:
            raise PolydiscError('weight index sets live in [-1, inf), got -inf')
        return inf
    try:
        return Fraction(value)
    except (TypeError, ValueError):
        raise ParseError(f'not a weight index: {value!r} (use e.g. -1/2, 0.25 or inf)')


def _fmt(value):
    return 'inf' if value == inf else str(value)


class BetaSet(object):
    def __init__(self, intervals=()):
        """
        Finite union of intervals of weight indices inside [-1, inf), with open or closed endpoints.

        Each endpoint is kept as (location, epsilon): epsilon 0 is a closed endpoint, 1 an open start and -1 an
        open end, so comparing endpoints is plain tuple comparison.

        Parameters
        ----------
        intervals : iterable
            (lo, lo_closed, hi, hi_closed) tuples; empty pieces are dropped and overlapping or touching pieces merged
        """
        pieces = []
        for lo, lo_closed, hi, hi_closed in intervals:
            lo, hi = as_exact(lo), as_exact(hi)
            if hi == inf:
                hi_closed = False
            start = (lo, 0 if lo_closed else 1)
            end = (hi, 0 if hi_closed else -1)
            if start > end or (lo == hi and not (lo_closed and hi_closed)):
                continue
            pieces.append((start, end))
        self._pieces = tuple(self._merge(pieces))
        if len(self._pieces) > 0 and self._pieces[0][0] < (beta_floor, 0):
            raise PolydiscError(f'weight index sets live in [-1, inf), got lower end {_fmt(self._pieces[0][0][0])}')

    @staticmethod
    def _merge(pieces):
        merged = []
        for start, end in sorted(pieces):
            # touching pieces merge unless both sides are open at the shared point
            if merged and start <= (merged[-1][1][0], merged[-1][1][1] + 1):
                if end > merged[-1][1]:
                    merged[-1] = (merged[-1][0], end)
            else:
                merged.append((start, end))
        return merged

    @classmethod
    def empty(cls):
        return cls()

    @classmethod
    def universe(cls):
        return cls([(beta_floor, True, inf, False)])

    @classmethod
    def interval(cls, lo, hi, lo_closed=True, hi_closed=True):
        return cls([(lo, lo_closed, hi, hi_closed)])

    @classmethod
    def closed_from(cls, lo):
        """ [lo, inf) """
        return cls([(lo, True, inf, False)])

    @classmethod
    def open_from(cls, lo):
        """ (lo, inf) """
        return cls([(lo, False, inf, False)])

    @classmethod
    def point(cls, value):
        return cls([(value, True, value, True)])

    @property
    def intervals(self):
        """ Tuple of (lo, lo_closed, hi, hi_closed). """
        return tuple((s[0], s[1] == 0, e[0], e[1] == 0) for s, e in self._pieces)

    def is_empty(self):
        return len(self._pieces) == 0

    def __bool__(self):
        return not self.is_empty()

    def __contains__(self, beta):
        beta = as_exact(beta)
        return any(s <= (beta, 0) <= e for s, e in self._pieces)

    def __or__(self, other):
        return BetaSet(self.intervals + other.intervals)

    def complement(self):
        """ [-1, inf) minus this set. """
        out = []
        cursor = (beta_floor, 0)
        for start, end in self._pieces:
            gap_end = (start[0], -1 if start[1] == 0 else 0)
            if cursor <= gap_end:
                out.append((cursor[0], cursor[1] == 0, gap_end[0], gap_end[1] == 0))
            cursor = (end[0], 1 if end[1] == 0 else 0)
        if cursor[0] != inf:
            out.append((cursor[0], cursor[1] == 0, inf, False))
        return BetaSet(out)

    __invert__ = complement

    def __and__(self, other):
        return ~(~self | ~other)

    def __sub__(self, other):
        return self & ~other

    def isdisjoint(self, other):
        return (self & other).is_empty()

    def __eq__(self, other):
        if not isinstance(other, BetaSet):
            return NotImplemented
        return self._pieces == other._pieces

    def __hash__(self):
        return hash(self._pieces)

    def infimum(self):
        """ (smallest value, attained) or (None, False) for the empty set. """
        if self.is_empty():
            return None, False
        start = self._pieces[0][0]
        return start[0], start[1] == 0

    def __str__(self):
        if self.is_empty():
            return '{}'
        parts = []
        for lo, lo_closed, hi, hi_closed in self.intervals:
            if lo == hi:
                parts.append('{' + _fmt(lo) + '}')
            else:
                parts.append('{0}{1}, {2}{3}'.format('[' if lo_closed else '(', _fmt(lo), _fmt(hi),
                                                     ']' if hi_closed else ')'))
        return ' U '.join(parts)

    def __repr__(self):
        return f'BetaSet({self})'

    def to_json(self):
        """ List of {lo, lo_closed, hi, hi_closed}; exact values as strings, +inf as 'inf'. """
        return [{'lo': _fmt(lo), 'lo_closed': lo_closed, 'hi': _fmt(hi), 'hi_closed': hi_closed}
                for lo, lo_closed, hi, hi_closed in self.intervals]

    @classmethod
    def from_json(cls, items):
        return cls([(it['lo'], it['lo_closed'], it['hi'], it['hi_closed']) for it in items])
