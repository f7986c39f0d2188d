"""Reference implementations used only by the tests.

Everything here is deliberately naive: plain loops over permutations and
subsets in exact rational arithmetic, sharing no code with the package.
"""
from fractions import Fraction
from itertools import combinations, permutations


def exact(probs):
    probs = [Fraction(p) for p in probs]
    total = sum(probs)
    return [p / total for p in probs]


def perm_sum(probs, items):
    """Sum over orderings of ``items`` of prod p / prod (1 - partial sums)."""
    total = Fraction(0)
    for order in permutations(items):
        term, left = Fraction(1), Fraction(1)
        for i in order:
            left -= probs[i]
            term *= probs[i] / left
        total += term
    return total


def king_tuples(probs, j):
    """King's miss rate summed over ordered j-tuples."""
    total = Fraction(0)
    for order in permutations(range(len(probs)), j):
        term, left = Fraction(1), Fraction(1)
        for t, i in enumerate(order):
            left -= probs[i]
            term *= probs[i]
            if t < j - 1:
                term /= left
        total += term * left
    return total


def collect_all(probs):
    """Full-collection time by inclusion-exclusion."""
    total = Fraction(0)
    for k in range(1, len(probs) + 1):
        for combo in combinations(probs, k):
            total += (-1) ** (k + 1) / sum(combo)
    return total


def partial_collection_markov(probs, j):
    """E{C_j} by first-step analysis over the set of items already seen."""
    m = len(probs)
    memo = {}

    def expect(seen):
        # expected further draws until len(seen) reaches j
        if len(seen) >= j:
            return Fraction(0)
        if seen in memo:
            return memo[seen]
        stay = sum((probs[i] for i in seen), Fraction(0))
        value = 1 / (1 - stay) * (1 + sum(
            probs[i] * expect(seen | {i}) for i in range(m) if i not in seen
        ))
        memo[seen] = value
        return value

    return expect(frozenset())
