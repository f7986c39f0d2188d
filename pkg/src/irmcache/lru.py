"""Exact LRU miss rates under the independent reference model.

Three exact forms are provided, all evaluated from one :class:`ITable`:

* King:       ``MR[j] = sum_{|J| = j} (1 - q_J)**2 I_J``
* Flajolet:   ``MR[j] = 1 - sum_{|K| < j} I_K sum_{i not in K} p_i**2``
* complement: ``MR[j] = sum_{j <= |K| < m} I_K sum_{i not in K} p_i**2``

plus the original King sum over ordered ``j``-tuples as a brute-force check.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from irmcache.popularity import Popularity
from irmcache.subsets import (
    ITable,
    _complement_sum,
    i_table_build,
    permutation_prefix_sums,
)

__all__ = [
    "MissRateEntry",
    "MissRateCurve",
    "IdentityError",
    "king_miss_rate",
    "king_miss_rate_bruteforce",
    "flajolet_miss_rate",
    "miss_rate_complement_form",
    "uniform_miss_rate",
    "miss_rate_curve",
    "verify_identity",
    "BRUTEFORCE_CAP",
]

BRUTEFORCE_CAP = 8


class IdentityError(AssertionError):
    """King and Flajolet miss rates disagree beyond tolerance."""

    def __init__(self, message: str, curve: "MissRateCurve"):
        super().__init__(message)
        self.curve = curve


@dataclass(frozen=True)
class MissRateEntry:
    j: int
    mr_king: float | None
    mr_flajolet: float
    discrepancy: float | None


@dataclass
class MissRateCurve:
    m: int
    entries: list[MissRateEntry] = field(default_factory=list)

    @property
    def max_discrepancy(self) -> float:
        ds = [e.discrepancy for e in self.entries if e.discrepancy is not None]
        return max(ds, default=0.0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["j", "mr_king", "mr_flajolet", "discrepancy"])
        for e in self.entries:
            writer.writerow([e.j, _fmt(e.mr_king), _fmt(e.mr_flajolet), _fmt(e.discrepancy)])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {"m": self.m, "max_discrepancy": self.max_discrepancy,
             "entries": [asdict(e) for e in self.entries]},
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "MissRateCurve":
        data = json.loads(text)
        return cls(data["m"], [MissRateEntry(**e) for e in data["entries"]])


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def _table_for(pop: Popularity, table: ITable | None, need: int) -> ITable:
    if table is None:
        return i_table_build(pop, need)
    if table.pop is not pop and table.pop != pop:
        raise ValueError("table was built from a different popularity law")
    if table.max_size < need:
        raise ValueError(f"table holds sizes up to {table.max_size}, need {need}")
    return table


def _one(table: ITable):
    return Fraction(1) if table.exact else 1.0


def _hit_weights(table: ITable, k: int):
    """``sum_{i not in K} p_i**2`` for every K of size k."""
    layer = table.layer(k)
    squares = [p * p for p in table.probs]
    if k == 0 and not table.exact:
        # the j = 1 hit rate must equal sum_squares(pop) bit for bit
        return np.array([math.fsum(squares)])
    return _complement_sum(layer.masks, squares, table.m, layer.values.dtype)


def king_miss_rate(pop: Popularity, j: int, table: ITable | None = None):
    """Miss rate of a size-``j`` LRU cache from King's subset sum.

    >>> from irmcache.popularity import make_parametric
    >>> king_miss_rate(make_parametric("uniform", 4), 2)
    0.5
    """
    if not 1 <= j <= pop.m - 1:
        raise ValueError(f"capacity must be in [1, {pop.m - 1}], got {j}")
    table = _table_for(pop, table, j)
    rest = table.layer(j).rest
    return table.layer_sum(j, rest * rest)


def king_miss_rate_bruteforce(pop: Popularity, j: int) -> float:
    """King's formula summed directly over every ordered ``j``-tuple of items.

    Each tuple ``(i_1..i_j)`` contributes::

        p_i1 ... p_ij (1 - S_j) / ((1 - S_1) ... (1 - S_{j-1}))

    with ``S_t`` the mass of the first ``t`` items.  Capped at ``j <= 8``.
    """
    if not 1 <= j <= pop.m - 1:
        raise ValueError(f"capacity must be in [1, {pop.m - 1}], got {j}")
    if j > BRUTEFORCE_CAP:
        raise ValueError(f"capacity {j} exceeds brute-force cap {BRUTEFORCE_CAP}")
    return permutation_prefix_sums(pop.probs, range(pop.m), j, tail=lambda r: r)[j]


def flajolet_miss_rate(pop: Popularity, j: int, table: ITable | None = None):
    """Miss rate as one minus the hit sum over subsets smaller than ``j``."""
    if not 1 <= j <= pop.m:
        raise ValueError(f"capacity must be in [1, {pop.m}], got {j}")
    table = _table_for(pop, table, j - 1)
    hits = [table.layer_sum(k, _hit_weights(table, k)) for k in range(j)]
    if table.exact:
        return 1 - sum(hits, Fraction(0))
    return 1.0 - _fsum(hits)


def miss_rate_complement_form(pop: Popularity, j: int, table: ITable | None = None):
    """Miss rate as the hit sum over subsets of sizes ``j..m-1``."""
    if not 1 <= j <= pop.m - 1:
        raise ValueError(f"capacity must be in [1, {pop.m - 1}], got {j}")
    table = _table_for(pop, table, pop.m - 1)
    terms = [table.layer_sum(k, _hit_weights(table, k)) for k in range(j, pop.m)]
    return sum(terms, Fraction(0)) if table.exact else _fsum(terms)


def _fsum(xs) -> float:
    return math.fsum(float(x) for x in xs)


def uniform_miss_rate(m: int, j: int) -> float:
    """``1 - j/m``, the miss rate under a uniform law."""
    if not 0 <= j <= m:
        raise ValueError(f"capacity must be in [0, {m}], got {j}")
    return float(Fraction(m - j, m))


def miss_rate_curve(pop: Popularity, js, exact: bool = False) -> MissRateCurve:
    """King and Flajolet miss rates for each capacity in ``js``.

    ``j = 0`` is reported as 1 and King's value at ``j = m`` as 0 (both by
    convention); all other entries are computed.
    """
    js = sorted(set(js))
    m = pop.m
    if any(not 0 <= j <= m for j in js):
        raise ValueError(f"capacities must lie in [0, {m}]")
    need = min(max(js, default=0), m - 1)
    table = i_table_build(pop, need, exact=exact)
    one = _one(table)
    curve = MissRateCurve(m)
    for j in js:
        if j == 0:
            king, flaj = one, one
        elif j == m:
            king, flaj = 0 * one, flajolet_miss_rate(pop, j, table)
        else:
            king = king_miss_rate(pop, j, table)
            flaj = flajolet_miss_rate(pop, j, table)
        curve.entries.append(
            MissRateEntry(j, float(king), float(flaj), float(abs(king - flaj)))
        )
    return curve


def verify_identity(pop: Popularity, j_max: int, tol: float, exact: bool = False) -> MissRateCurve:
    """Check King against Flajolet for every capacity ``1..j_max``.

    Both sides come from one shared table.  Raises :class:`IdentityError`
    (carrying the curve) if any discrepancy exceeds ``tol``.
    """
    if not 1 <= j_max <= pop.m - 1:
        raise ValueError(f"j_max must be in [1, {pop.m - 1}], got {j_max}")
    table = i_table_build(pop, j_max, exact=exact)
    curve = MissRateCurve(pop.m)
    for j in range(1, j_max + 1):
        king = king_miss_rate(pop, j, table)
        flaj = flajolet_miss_rate(pop, j, table)
        curve.entries.append(
            MissRateEntry(j, float(king), float(flaj), float(abs(king - flaj)))
        )
    if curve.max_discrepancy > tol:
        raise IdentityError(
            f"King/Flajolet discrepancy {curve.max_discrepancy:.3g} exceeds {tol:.3g}",
            curve,
        )
    return curve
