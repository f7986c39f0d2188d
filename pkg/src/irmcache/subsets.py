"""Subsets of the item set and the permutation-sum table ``I_J``.

Subsets are bitmasks: bit ``i`` is set iff the item stored at position ``i``
of the :class:`~irmcache.popularity.Popularity` belongs to the subset.

``I_J`` is the sum, over all orderings ``(i_1, ..., i_k)`` of ``J``, of::

    p_i1 * ... * p_ik / ((1 - p_i1) (1 - p_i1 - p_i2) ... (1 - q_J))

with ``q_J`` the probability mass of ``J`` and ``I_{}`` = 1.  Grouping the
orderings by their last element gives the recurrence used to fill the table
one subset size at a time::

    (1 - q_J) I_J = sum_{i in J} p_i I_{J - {i}}
"""
from __future__ import annotations

import csv
import math
from fractions import Fraction
from itertools import permutations
from math import comb
from typing import Iterator, NamedTuple

import numpy as np

from irmcache.popularity import Popularity

__all__ = [
    "SubsetIndex",
    "Layer",
    "ITable",
    "TableTooLarge",
    "subset_prob_mass",
    "subsets_of_size",
    "i_table_build",
    "i_permutation_oracle",
    "lemma2_check",
    "permutation_prefix_sums",
    "DEFAULT_ENTRY_CAP",
    "EXACT_MAX_M",
    "PERMUTATION_CAP",
    "TUPLE_CAP",
]

DEFAULT_ENTRY_CAP = 2**27
EXACT_MAX_M = 12
PERMUTATION_CAP = 9
TUPLE_CAP = 4_000_000


class TableTooLarge(ValueError):
    """Raised when an ``I_J`` table would exceed the entry cap."""


class SubsetIndex(NamedTuple):
    mask: int
    size: int

    @classmethod
    def from_mask(cls, mask: int) -> "SubsetIndex":
        if mask < 0:
            raise ValueError("mask must be nonnegative")
        return cls(int(mask), int(mask).bit_count())

    @classmethod
    def from_items(cls, items) -> "SubsetIndex":
        mask = 0
        for i in items:
            mask |= 1 << int(i)
        return cls.from_mask(mask)

    def items(self) -> list[int]:
        return [i for i in range(self.mask.bit_length()) if self.mask >> i & 1]


def _mask_of(s) -> int:
    return s.mask if isinstance(s, SubsetIndex) else int(s)


def _total(values):
    """Compensated float sum, or exact sum for object (Fraction) arrays."""
    if isinstance(values, np.ndarray) and values.dtype != object:
        return math.fsum(values.tolist())
    return sum(values, Fraction(0))


def subset_prob_mass(pop: Popularity, s, exact: bool = False):
    """Return ``q_J``, the probability mass of subset ``s``."""
    mask = _mask_of(s)
    if mask < 0 or mask >> pop.m:
        raise ValueError(f"mask {mask:#b} has bits outside the {pop.m} items")
    probs = pop.exact_probs if exact else pop.probs
    terms = [probs[i] for i in range(pop.m) if mask >> i & 1]
    if exact:
        return sum(terms, Fraction(0))
    return math.fsum(terms)


def subsets_of_size(m: int, k: int) -> Iterator[SubsetIndex]:
    """Yield the ``C(m, k)`` subsets of size ``k`` in increasing mask order."""
    if not 0 <= k <= m:
        raise ValueError(f"subset size {k} out of range for m={m}")
    if k == 0:
        yield SubsetIndex(0, 0)
        return
    mask = (1 << k) - 1
    limit = 1 << m
    while mask < limit:
        yield SubsetIndex(mask, k)
        # Gosper's hack: next integer with the same popcount
        low = mask & -mask
        ripple = mask + low
        mask = (((ripple ^ mask) >> 2) // low) | ripple


class Layer(NamedTuple):
    """All subsets of one size: sorted masks, their ``I_J`` and ``1 - q_J``."""

    masks: np.ndarray
    values: np.ndarray
    rest: np.ndarray


def _complement_sum(masks: np.ndarray, weights, m: int, dtype) -> np.ndarray:
    """``sum(weights[i] for i not in J)`` for every mask, summed in item order."""
    out = np.zeros(len(masks), dtype=dtype)
    if dtype == object:
        out[:] = Fraction(0)
    for i in range(m):
        absent = (masks >> i) & 1 == 0
        out[absent] += weights[i]
    return out


class ITable:
    """``I_J`` for every subset with ``|J| <= max_size``.

    Built by :func:`i_table_build`; do not construct directly.  Lookups
    accept a :class:`SubsetIndex` or a raw mask.
    """

    def __init__(self, pop: Popularity, layers: list[Layer], exact: bool):
        self.pop = pop
        self.exact = exact
        self._layers = layers
        self.probs = list(pop.exact_probs) if exact else pop.probs

    @property
    def max_size(self) -> int:
        return len(self._layers) - 1

    @property
    def m(self) -> int:
        return self.pop.m

    def layer(self, k: int) -> Layer:
        if not 0 <= k <= self.max_size:
            raise ValueError(f"layer {k} not in table (max_size={self.max_size})")
        return self._layers[k]

    def __getitem__(self, s):
        mask = _mask_of(s)
        k = mask.bit_count()
        if k > self.max_size or mask >> self.m:
            raise KeyError(mask)
        layer = self._layers[k]
        pos = int(np.searchsorted(layer.masks, mask))
        return layer.values[pos]

    def __len__(self) -> int:
        return sum(len(layer.masks) for layer in self._layers)

    def items(self):
        for layer in self._layers:
            for mask, value in zip(layer.masks.tolist(), layer.values):
                yield SubsetIndex.from_mask(mask), value

    def layer_sum(self, k: int, weights=None):
        """Sum of ``w_J * I_J`` over the subsets of size ``k`` (``w = 1`` if omitted)."""
        layer = self.layer(k)
        terms = layer.values if weights is None else weights * layer.values
        return _total(terms)

    def recurrence_residual(self) -> float:
        """Largest relative residual of ``(1 - q_J) I_J = sum p_i I_{J-{i}}``."""
        worst = 0.0
        for k in range(1, self.max_size + 1):
            prev, cur = self._layers[k - 1], self._layers[k]
            for mask, value, rest in zip(cur.masks.tolist(), cur.values, cur.rest):
                rhs = []
                for i in range(self.m):
                    if mask >> i & 1:
                        pos = int(np.searchsorted(prev.masks, mask ^ (1 << i)))
                        rhs.append(self.probs[i] * prev.values[pos])
                rhs = sum(rhs, Fraction(0)) if self.exact else math.fsum(rhs)
                lhs = rest * value
                worst = max(worst, float(abs(lhs - rhs) / abs(rhs)))
        return worst

    def write_csv(self, k: int, fp) -> None:
        """Write layer ``k`` as CSV with columns mask, size, q_J, I_J."""
        layer = self.layer(k)
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(["mask", "size", "q_J", "I_J"])
        for mask, value in zip(layer.masks.tolist(), layer.values):
            q = subset_prob_mass(self.pop, mask)
            writer.writerow([mask, k, f"{q:.17g}", f"{float(value):.17g}"])


def i_table_build(
    pop: Popularity,
    j_max: int,
    exact: bool = False,
    entry_cap: int = DEFAULT_ENTRY_CAP,
) -> ITable:
    """Compute ``I_J`` for all subsets of size ``0..j_max``.

    Parameters
    ----------
    pop : Popularity
    j_max : int
        Largest subset size, at most ``m - 1`` (the full set has ``q_J = 1``
        and no finite ``I_J``).
    exact : bool
        Use :class:`fractions.Fraction` arithmetic on :attr:`Popularity.exact_probs`.
        Only allowed for ``m <= EXACT_MAX_M``.
    entry_cap : int
        Refuse to build tables with more entries than this.
    """
    m = pop.m
    if not 0 <= j_max <= m - 1:
        raise ValueError(f"j_max must be in [0, {m - 1}] for m={m}, got {j_max}")
    if exact and m > EXACT_MAX_M:
        raise ValueError(f"exact tables are limited to m <= {EXACT_MAX_M}")
    entries = sum(comb(m, k) for k in range(j_max + 1))
    if entries > entry_cap:
        raise TableTooLarge(
            f"table for m={m}, j_max={j_max} needs {entries} entries (cap {entry_cap})"
        )

    dtype = object if exact else np.float64
    probs = list(pop.exact_probs) if exact else pop.probs
    one = Fraction(1) if exact else 1.0

    masks = np.zeros(1, dtype=np.int64)
    values = np.array([one], dtype=dtype)
    rest = np.array([one], dtype=dtype)
    layers = [Layer(masks, values, rest)]

    for k in range(1, j_max + 1):
        prev = layers[-1]
        grown = [prev.masks[(prev.masks >> i) & 1 == 0] | (1 << i) for i in range(m)]
        masks = np.unique(np.concatenate(grown))
        numer = np.zeros(len(masks), dtype=dtype)
        if exact:
            numer[:] = Fraction(0)
        for i in range(m):
            has = (masks >> i) & 1 == 1
            pos = np.searchsorted(prev.masks, masks[has] ^ (1 << i))
            numer[has] += probs[i] * prev.values[pos]
        rest = _complement_sum(masks, probs, m, dtype)
        layers.append(Layer(masks, numer / rest, rest))

    return ITable(pop, layers, exact)


def permutation_prefix_sums(probs, items, depth: int, tail=None):
    """Sum of ordered-tuple terms over all arrangements drawn from ``items``.

    Walks every ordered tuple of distinct elements of ``items`` up to length
    ``depth``.  A tuple ``(i_1, ..., i_t)`` carries the term::

        p_i1 ... p_it / ((1 - p_i1) (1 - p_i1 - p_i2) ... (1 - p_i1 - ... - p_it))

    Returns a list ``s`` with ``s[t]`` the total over tuples of length ``t``
    (``s[0] = 1``).  If ``tail`` is given, the last factor ``1 / (1 - S_t)``
    of each term is replaced by ``tail(1 - S_t)``.
    No subset memoization is used; this is the brute-force reference path.
    """
    items = np.asarray(list(items), dtype=np.int64)
    n = len(items)
    if depth > n:
        raise ValueError("depth exceeds the number of items")
    if math.perm(n, depth) > TUPLE_CAP:
        raise ValueError(
            f"{math.perm(n, depth)} ordered {depth}-tuples of {n} items exceeds "
            f"the enumeration cap {TUPLE_CAP}"
        )
    p = np.asarray(probs, dtype=np.float64)[items]
    used = np.zeros(1, dtype=np.int64)
    rest = np.ones(1)
    head = np.ones(1)  # product over all but the last denominator
    sums = [1.0]
    for _ in range(depth):
        free = ((used[:, None] >> np.arange(n)) & 1) == 0
        row, col = np.nonzero(free)
        new_rest = rest[row] - p[col]
        head_p = head[row] * p[col]
        if tail is None:
            sums.append(math.fsum((head_p / new_rest).tolist()))
        else:
            sums.append(math.fsum((head_p * tail(new_rest)).tolist()))
        used = used[row] | (1 << col)
        head = head_p / new_rest
        rest = new_rest
    return sums


def i_permutation_oracle(pop: Popularity, s) -> float:
    """``I_J`` by explicit enumeration of all ``|J|!`` orderings of ``J``."""
    sub = s if isinstance(s, SubsetIndex) else SubsetIndex.from_mask(s)
    if sub.mask >> pop.m:
        raise ValueError(f"mask {sub.mask:#b} has bits outside the {pop.m} items")
    if sub.size > PERMUTATION_CAP:
        raise ValueError(f"|J| = {sub.size} exceeds the permutation cap {PERMUTATION_CAP}")
    if sub.size == pop.m:
        raise ValueError("I_J is undefined for the full item set (q_J = 1)")
    items = sub.items()
    if not items:
        return 1.0
    p = pop.probs
    terms = []
    for perm in permutations(items):
        num = 1.0
        den = 1.0
        left = 1.0
        for i in perm:
            num *= p[i]
            left -= p[i]
            den *= left
        terms.append(num / den)
    return math.fsum(terms)


def lemma2_check(m: int, j: int, f) -> tuple[float, float]:
    """Evaluate both sides of the subset/element exchange identity.

    ``f`` maps ``(item, mask)`` pairs to numbers and must cover every subset
    ``J`` of size ``j`` and every item ``i`` outside it.  Returns::

        lhs = sum_{|J| = j}     sum_{i not in J} f[i, J]
        rhs = sum_{|K| = j + 1} sum_{i in K}     f[i, K - {i}]
    """
    if not 1 <= j <= m - 1:
        raise ValueError(f"j must be in [1, {m - 1}], got {j}")

    def get(i, mask):
        try:
            return f[i, mask]
        except KeyError:
            raise ValueError(f"f has no entry for item {i}, mask {mask:#b}") from None

    lhs = []
    for sub in subsets_of_size(m, j):
        lhs.extend(get(i, sub.mask) for i in range(m) if not sub.mask >> i & 1)
    rhs = []
    for sub in subsets_of_size(m, j + 1):
        rhs.extend(get(i, sub.mask ^ (1 << i)) for i in range(m) if sub.mask >> i & 1)
    return math.fsum(lhs), math.fsum(rhs)
