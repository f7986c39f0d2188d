"""Expected time of a partial coupon collection with unequal probabilities.

``E{C_j}`` is the expected number of independent draws from the popularity
law until ``j`` distinct items have been seen.  Four exact routes:

* layer sums of the ``I_J`` table: ``E{C_j} = sum_{|J| < j} I_J``
* the alternating sum of reciprocal subset masses (exact rationals)
* Ferrante's conditional-probability form, by ordered-tuple enumeration
* ``m (H_m - H_{m-j})`` when the law is uniform
"""
from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from irmcache.popularity import Popularity
from irmcache.subsets import TUPLE_CAP, ITable, i_table_build, permutation_prefix_sums

__all__ = [
    "CcpEntry",
    "CcpCurve",
    "expected_partial_time",
    "delta_e",
    "symmetric_function_form",
    "ferrante_terms",
    "ferrante_form",
    "uniform_expected_time",
    "inclusion_exclusion_full",
    "ccp_curve",
    "SYMMETRIC_MAX_M",
    "FERRANTE_CAP",
]

SYMMETRIC_MAX_M = 20
FERRANTE_CAP = 8


@dataclass(frozen=True)
class CcpEntry:
    j: int
    e_layers: float
    e_symmetric: float | None
    e_ferrante: float | None
    delta_e: float | None


@dataclass
class CcpCurve:
    m: int
    entries: list[CcpEntry] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["j", "e_layers", "e_symmetric", "e_ferrante", "delta_e"])
        for e in self.entries:
            writer.writerow([e.j] + [
                "" if x is None else repr(float(x))
                for x in (e.e_layers, e.e_symmetric, e.e_ferrante, e.delta_e)
            ])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"m": self.m, "entries": [asdict(e) for e in self.entries]}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "CcpCurve":
        data = json.loads(text)
        return cls(data["m"], [CcpEntry(**e) for e in data["entries"]])


def _checked_table(pop, table, need):
    if table is None:
        return i_table_build(pop, need)
    if table.pop is not pop and table.pop != pop:
        raise ValueError("table was built from a different popularity law")
    if table.max_size < need:
        raise ValueError(f"table holds sizes up to {table.max_size}, need {need}")
    return table


def expected_partial_time(pop: Popularity, j: int, table: ITable | None = None):
    """``E{C_j}``, summing ``I_J`` over all subsets of size below ``j``."""
    if not 0 <= j <= pop.m:
        raise ValueError(f"collection size must be in [0, {pop.m}], got {j}")
    if j == 0:
        return Fraction(0) if table is not None and table.exact else 0.0
    table = _checked_table(pop, table, j - 1)
    sums = [table.layer_sum(k) for k in range(j)]
    if table.exact:
        return sum(sums, Fraction(0))
    return math.fsum(sums)


def delta_e(pop: Popularity, j: int, table: ITable | None = None):
    """``E{C_{j+1}} - E{C_j}``: the sum of ``I_J`` over subsets of size ``j``."""
    if not 0 <= j <= pop.m - 1:
        raise ValueError(f"j must be in [0, {pop.m - 1}], got {j}")
    table = _checked_table(pop, table, j)
    return table.layer_sum(j)


def _reciprocal_mass_by_size(pop: Popularity, exact: bool):
    """``sum_{|J| = k} 1 / P_J`` for k = 0..m (k = 0 entry unused)."""
    m = pop.m
    masks = np.arange(1 << m, dtype=np.int64)
    sizes = np.zeros(1 << m, dtype=np.int64)
    for i in range(m):
        sizes += (masks >> i) & 1
    if exact:
        probs = pop.exact_probs
        mass = [Fraction(0)] * (1 << m)
        for mask in range(1, 1 << m):
            low = (mask & -mask).bit_length() - 1
            mass[mask] = mass[mask & (mask - 1)] + probs[low]
        out = [Fraction(0)] * (m + 1)
        for mask in range(1, 1 << m):
            out[int(sizes[mask])] += 1 / mass[mask]
        return out
    mass = np.zeros(1 << m)
    for i in range(m):
        mass[(masks >> i) & 1 == 1] += pop.probs[i]
    recip = np.zeros(1 << m)
    recip[1:] = 1.0 / mass[1:]
    return [0.0] + [math.fsum(recip[sizes == k].tolist()) for k in range(1, m + 1)]


def _alternating_terms(by_size, m: int, j: int) -> list:
    return [
        (-1) ** (j + k - m - 1) * math.comb(k - 1, m - j) * by_size[k]
        for k in range(m - j + 1, m + 1)
    ]


def symmetric_function_form(pop: Popularity, j: int, exact: bool = True):
    """``E{C_j}`` from the alternating sum over subset masses::

        sum_{k=m-j+1}^{m} (-1)**(j+k-m-1) C(k-1, m-j) sum_{|J|=k} 1/P_J

    Evaluated in exact rational arithmetic by default (returns a
    :class:`~fractions.Fraction`).  The float path loses digits to
    cancellation and warns.  Enumerates all ``2**m`` subsets; ``m <= 20``.
    """
    m = pop.m
    if not 1 <= j <= m:
        raise ValueError(f"collection size must be in [1, {m}], got {j}")
    if m > SYMMETRIC_MAX_M:
        raise ValueError(f"symmetric form enumerates 2**m subsets; m={m} > {SYMMETRIC_MAX_M}")
    terms = _alternating_terms(_reciprocal_mass_by_size(pop, exact), m, j)
    if exact:
        return sum(terms, Fraction(0))
    if j > 2:
        warnings.warn(
            "floating-point alternating sum is subject to cancellation; "
            "use exact=True for a reliable value",
            RuntimeWarning,
            stacklevel=2,
        )
    return math.fsum(terms)


def ferrante_terms(pop: Popularity, k: int) -> list[float]:
    """``[E[X_1], ..., E[X_k]]``, each by enumeration of ordered tuples."""
    if not 1 <= k <= pop.m:
        raise ValueError(f"collection size must be in [1, {pop.m}], got {k}")
    if k - 1 > FERRANTE_CAP:
        raise ValueError(f"k - 1 = {k - 1} exceeds the tuple-length cap {FERRANTE_CAP}")
    return permutation_prefix_sums(pop.probs, range(pop.m), k - 1)


def ferrante_form(pop: Popularity, k: int) -> float:
    """``E[X_m(k)] = E[X_1] + ... + E[X_k]``, without using the ``I_J`` table."""
    return math.fsum(ferrante_terms(pop, k))


def uniform_expected_time(m: int, j: int) -> float:
    """``m (H_m - H_{m-j})``, the uniform-law expected collection time."""
    if not 0 <= j <= m:
        raise ValueError(f"collection size must be in [0, {m}], got {j}")
    return float(sum((Fraction(m, m - s) for s in range(j)), Fraction(0)))


def inclusion_exclusion_full(pop: Popularity, exact: bool = True):
    """Full-collection time ``sum_{J nonempty} (-1)**(|J|+1) / P_J``."""
    probs = pop.exact_probs if exact else pop.probs
    total = []
    for size in range(1, pop.m + 1):
        sign = 1 if size % 2 else -1
        for combo in combinations(probs, size):
            mass = sum(combo, Fraction(0)) if exact else math.fsum(combo)
            total.append(sign / mass)
    return sum(total, Fraction(0)) if exact else math.fsum(total)


def ccp_curve(pop: Popularity, js, exact: bool = False) -> CcpCurve:
    """Expected collection times for each size in ``js`` by every applicable route.

    ``e_symmetric`` is given for ``m <= 16`` (exact arithmetic), ``e_ferrante``
    while the tuple enumeration stays within its caps; ``delta_e`` is absent
    at ``j = m``.
    """
    js = sorted(set(js))
    m = pop.m
    if any(not 0 <= j <= m for j in js):
        raise ValueError(f"collection sizes must lie in [0, {m}]")
    table = i_table_build(pop, min(max(js, default=0), m - 1), exact=exact)
    by_size = _reciprocal_mass_by_size(pop, exact=True) if m <= 16 else None
    reachable = [
        j for j in js
        if 1 <= j and j - 1 <= FERRANTE_CAP and math.perm(m, j - 1) <= TUPLE_CAP
    ]
    fer = ferrante_terms(pop, max(reachable)) if reachable else []
    curve = CcpCurve(m)
    for j in js:
        e_sym = None
        if by_size is not None:
            e_sym = float(sum(_alternating_terms(by_size, m, j), Fraction(0)))
        e_fer = math.fsum(fer[:j]) if j <= len(fer) else None
        curve.entries.append(CcpEntry(
            j,
            float(expected_partial_time(pop, j, table)),
            e_sym,
            e_fer,
            float(delta_e(pop, j, table)) if j < m else None,
        ))
    return curve
