"""Popularity laws for the independent reference model.

A :class:`Popularity` is an immutable, normalized probability vector over
``m`` items.  Items are stored in descending order of probability; the
mapping back to the caller's labels is kept in ``order``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path

import numpy as np

__all__ = [
    "Popularity",
    "make_explicit",
    "make_parametric",
    "make_dirichlet",
    "from_spec",
    "sum_squares",
]

# p_i this close to 1 leaves 1 - p_i with too few significant digits
_MAX_PROB = 1.0 - 1e-9


@dataclass(frozen=True, eq=False)
class Popularity:
    """Normalized access probabilities ``p_1 >= p_2 >= ... >= p_m > 0``.

    Parameters
    ----------
    probs : ndarray
        Probabilities in descending order, summing to one.
    order : tuple of int
        ``order[k]`` is the caller's index of the item stored at position k.
    weights : tuple
        The (sorted, unnormalized) weights the probabilities came from.  Kept
        so that :attr:`exact_probs` can normalize without rounding.
    """

    probs: np.ndarray
    order: tuple[int, ...]
    weights: tuple = field(repr=False)

    @property
    def m(self) -> int:
        return len(self.probs)

    @cached_property
    def exact_probs(self) -> tuple[Fraction, ...]:
        """Probabilities as exact rationals (weights normalized without rounding)."""
        ws = [Fraction(w) for w in self.weights]
        total = sum(ws)
        return tuple(w / total for w in ws)

    def __eq__(self, other):
        if not isinstance(other, Popularity):
            return NotImplemented
        return np.array_equal(self.probs, other.probs) and self.order == other.order

    def __hash__(self):
        return hash((self.probs.tobytes(), self.order))

    def __len__(self):
        return self.m


def _check_weight(w) -> None:
    if isinstance(w, (bool, np.bool_)):
        raise TypeError("weights must be numbers, not booleans")
    x = float(w)
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"weight {w!r} is not finite")
    if x < 0:
        raise ValueError(f"weight {w!r} is negative")


def make_explicit(weights) -> Popularity:
    """Build a popularity law from nonnegative weights.

    Zero weights are dropped (the item count shrinks accordingly), the rest
    are normalized to sum to one.  Weights may be ints, floats or
    :class:`fractions.Fraction`; the exact values are retained for rational
    computations.

    >>> make_explicit([5, 3, 2]).probs
    array([0.5, 0.3, 0.2])
    """
    weights = list(weights)
    if not weights:
        raise ValueError("weights must be nonempty")
    for w in weights:
        _check_weight(w)
    kept = [(w, i) for i, w in enumerate(weights) if w > 0]
    if not kept:
        raise ValueError("at least one weight must be strictly positive")
    # stable descending sort keeps ties in caller order
    kept.sort(key=lambda t: (-Fraction(t[0]), t[1]))
    # fsum is correctly rounded, so the result does not depend on input order
    total = math.fsum(float(w) for w, _ in kept)
    # weights too small to survive normalization count as zero
    kept = [(w, i) for w, i in kept if float(w) / total > 0]
    ws = tuple(w for w, _ in kept)
    order = tuple(i for _, i in kept)
    probs = np.array([float(w) / total for w in ws])
    probs.setflags(write=False)
    if len(probs) >= 2 and probs[0] >= _MAX_PROB:
        raise ValueError(
            f"largest probability {probs[0]!r} is too close to 1 for a "
            f"{len(probs)}-item law"
        )
    return Popularity(probs=probs, order=order, weights=ws)


def make_parametric(kind: str, m: int, param: float | None = None) -> Popularity:
    """Build one of the standard popularity families.

    Parameters
    ----------
    kind : {'uniform', 'zipf', 'geometric'}
        ``uniform`` gives ``p_i = 1/m``; ``zipf`` gives ``p_i ~ i**-alpha``
        with ``alpha = param >= 0``; ``geometric`` gives ``p_i ~ r**(i-1)``
        with ``r = param`` in (0, 1).
    m : int
        Number of items, at least 1.
    """
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    m = int(m)
    if kind == "uniform":
        return make_explicit([1] * m)
    if kind == "zipf":
        if param is None or not (float(param) >= 0) or math.isinf(float(param)):
            raise ValueError(f"zipf needs a finite alpha >= 0, got {param!r}")
        alpha = float(param)
        if alpha == 0:
            return make_explicit([1] * m)
        if alpha.is_integer():
            return make_explicit([Fraction(1, i ** int(alpha)) for i in range(1, m + 1)])
        return make_explicit([i ** -alpha for i in range(1, m + 1)])
    if kind == "geometric":
        if param is None or not (0 < float(param) < 1):
            raise ValueError(f"geometric needs a ratio in (0, 1), got {param!r}")
        r = Fraction(float(param))
        return make_explicit([r ** k for k in range(m)])
    raise ValueError(f"unknown distribution kind {kind!r}")


def make_dirichlet(m: int, rng: np.random.Generator) -> Popularity:
    """Draw a popularity law uniformly from the (m-1)-simplex."""
    return make_explicit(rng.dirichlet(np.ones(m)))


def from_spec(spec) -> Popularity:
    """Build a popularity law from a JSON distribution spec.

    ``spec`` may be a dict, a JSON string, or a path to a JSON file::

        {"type": "explicit", "weights": [5, 3, 2]}
        {"type": "zipf", "m": 16, "alpha": 1.0}
        {"type": "uniform", "m": 8}
        {"type": "geometric", "m": 8, "ratio": 0.5}
    """
    if isinstance(spec, (str, Path)):
        text = str(spec).strip()
        if not text.startswith("{"):
            text = Path(text).read_text()
        spec = json.loads(text)
    if not isinstance(spec, dict) or "type" not in spec:
        raise ValueError("distribution spec must be an object with a 'type' key")
    kind = spec["type"]
    try:
        if kind == "explicit":
            return make_explicit(spec["weights"])
        if kind == "uniform":
            return make_parametric("uniform", spec["m"])
        if kind == "zipf":
            return make_parametric("zipf", spec["m"], spec["alpha"])
        if kind == "geometric":
            return make_parametric("geometric", spec["m"], spec["ratio"])
    except KeyError as exc:
        raise ValueError(f"{kind!r} spec is missing {exc.args[0]!r}") from None
    raise ValueError(f"unknown distribution type {kind!r}")


def sum_squares(pop: Popularity) -> float:
    """Return ``sum(p_i**2)``, the hit probability of a one-slot cache."""
    return math.fsum(p * p for p in pop.probs)
