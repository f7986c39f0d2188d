import json
import math
from fractions import Fraction
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from irmcache.lru import (
    IdentityError,
    MissRateCurve,
    flajolet_miss_rate,
    king_miss_rate,
    king_miss_rate_bruteforce,
    miss_rate_complement_form,
    miss_rate_curve,
    uniform_miss_rate,
    verify_identity,
)
from irmcache.popularity import make_dirichlet, make_explicit, make_parametric, sum_squares
from irmcache.subsets import i_table_build

P532 = make_explicit([5, 3, 2])
# King[2] for (0.5, 0.3, 0.2), from the exact tuple oracle
KING2_P532 = Fraction(393, 1400)


def test_king_examples():
    assert king_miss_rate(make_parametric("uniform", 4), 2) == pytest.approx(0.5, rel=1e-15)
    assert king_miss_rate(P532, 1) == pytest.approx(0.62, rel=1e-15)
    assert king_miss_rate(P532, 2) == pytest.approx(float(KING2_P532), rel=1e-14)


def test_oracle_value_is_frozen():
    assert oracles.king_tuples(oracles.exact([5, 3, 2]), 2) == KING2_P532


def test_bruteforce_examples():
    assert king_miss_rate_bruteforce(make_explicit([0.7, 0.3]), 1) == pytest.approx(0.42, rel=1e-15)
    assert king_miss_rate_bruteforce(make_parametric("uniform", 5), 3) == pytest.approx(0.4, rel=1e-14)
    assert king_miss_rate_bruteforce(P532, 2) == pytest.approx(float(KING2_P532), rel=1e-14)
    with pytest.raises(ValueError):
        king_miss_rate_bruteforce(make_parametric("uniform", 10), 9)


def test_flajolet_examples():
    for pop in (P532, make_dirichlet(7, np.random.default_rng(3))):
        assert flajolet_miss_rate(pop, 1) == 1 - sum_squares(pop)
    assert flajolet_miss_rate(make_parametric("uniform", 4), 3) == pytest.approx(0.25, rel=1e-14)
    assert flajolet_miss_rate(P532, 2) == pytest.approx(float(KING2_P532), rel=1e-14)
    assert abs(flajolet_miss_rate(P532, 3)) <= 1e-10


def test_complement_examples():
    u4 = make_parametric("uniform", 4)
    assert miss_rate_complement_form(u4, 2) == pytest.approx(0.5, rel=1e-14)
    assert miss_rate_complement_form(P532, 2) == pytest.approx(float(KING2_P532), rel=1e-14)
    # j = m - 1: a single layer, each subset weighted by its missing item's p**2
    t = i_table_build(P532, 2)
    layer = t.layer(2)
    by_hand = math.fsum(
        v * P532.probs[(~mask & 0b111).bit_length() - 1] ** 2
        for mask, v in zip(layer.masks.tolist(), layer.values)
    )
    assert miss_rate_complement_form(P532, 2, t) == pytest.approx(by_hand, rel=1e-15)


def test_table_requirements():
    shallow = i_table_build(P532, 1)
    with pytest.raises(ValueError):
        king_miss_rate(P532, 2, shallow)
    with pytest.raises(ValueError):
        miss_rate_complement_form(P532, 1, shallow)
    with pytest.raises(ValueError):
        king_miss_rate(make_explicit([1, 2, 3]), 1, shallow)
    for j in (0, 3):
        with pytest.raises(ValueError):
            king_miss_rate(P532, j)


def test_uniform_miss_rate():
    assert uniform_miss_rate(4, 2) == 0.5
    assert uniform_miss_rate(7, 0) == 1.0
    assert uniform_miss_rate(7, 7) == 0.0
    with pytest.raises(ValueError):
        uniform_miss_rate(3, 4)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_three_way_agreement(m, seed):
    pop = make_dirichlet(m, np.random.default_rng(seed))
    t = i_table_build(pop, m - 1)
    for j in range(1, m):
        king = king_miss_rate(pop, j, t)
        assert flajolet_miss_rate(pop, j, t) == pytest.approx(king, rel=1e-10, abs=1e-15)
        assert miss_rate_complement_form(pop, j, t) == pytest.approx(king, rel=1e-10, abs=1e-15)
        assert 0 <= king <= 1


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_bruteforce_agreement(m, seed):
    pop = make_dirichlet(m, np.random.default_rng(seed))
    for j in range(1, min(m - 1, 6) + 1):
        assert king_miss_rate_bruteforce(pop, j) == pytest.approx(king_miss_rate(pop, j), rel=1e-10)


def test_exact_referee(rng):
    pop = make_explicit(rng.integers(1, 100, size=7).tolist())
    t = i_table_build(pop, 6, exact=True)
    probs = list(pop.exact_probs)
    for j in range(1, 7):
        king = king_miss_rate(pop, j, t)
        assert isinstance(king, Fraction)
        assert king == flajolet_miss_rate(pop, j, t) == miss_rate_complement_form(pop, j, t)
        if j <= 3:
            assert king == oracles.king_tuples(probs, j)
    assert flajolet_miss_rate(pop, 7, t) == 0


def test_label_invariance():
    weights = [0.31, 0.07, 0.22, 0.15, 0.25]
    reference = [king_miss_rate(make_explicit(weights), j) for j in range(1, 5)]
    for perm in permutations(weights):
        pop = make_explicit(perm)
        assert [king_miss_rate(pop, j) for j in range(1, 5)] == reference


@pytest.mark.parametrize("seed", range(10))
def test_monotone_in_capacity(seed):
    # observed, not a stated law
    pop = make_dirichlet(9, np.random.default_rng(seed))
    curve = miss_rate_curve(pop, range(10))
    rates = [e.mr_flajolet for e in curve.entries]
    assert all(a >= b - 1e-15 for a, b in zip(rates, rates[1:]))


def test_curve_conventions_and_serialization():
    curve = miss_rate_curve(P532, range(4))
    assert [e.j for e in curve.entries] == [0, 1, 2, 3]
    assert curve.entries[0].mr_king == curve.entries[0].mr_flajolet == 1.0
    assert curve.entries[-1].mr_king == 0.0
    assert abs(curve.entries[-1].mr_flajolet) <= 1e-10
    assert MissRateCurve.from_json(curve.to_json()) == curve
    lines = curve.to_csv().splitlines()
    assert lines[0] == "j,mr_king,mr_flajolet,discrepancy"
    assert float(lines[3].split(",")[1]) == curve.entries[2].mr_king
    data = json.loads(curve.to_json())
    assert data["max_discrepancy"] == curve.max_discrepancy


def test_verify_identity():
    curve = verify_identity(P532, 2, 1e-10)
    assert curve.entries[0].mr_king == pytest.approx(0.62)
    u6 = verify_identity(make_parametric("uniform", 6), 5, 1e-12)
    for e in u6.entries:
        assert e.mr_king == pytest.approx(1 - e.j / 6, rel=1e-12)
        assert e.mr_flajolet == pytest.approx(1 - e.j / 6, rel=1e-12)
    exact = verify_identity(make_explicit([4, 3, 2, 1]), 3, 0.0, exact=True)
    assert exact.max_discrepancy == 0.0


def test_verify_identity_reports_failure():
    pop = make_parametric("zipf", 8, 0.8)
    with pytest.raises(IdentityError) as info:
        verify_identity(pop, 7, 1e-300)
    assert info.value.curve.max_discrepancy > 1e-300
    with pytest.raises(ValueError):
        verify_identity(pop, 8, 1e-10)


def test_dirichlet_batch_m8():
    rng = np.random.default_rng(8)
    worst = max(verify_identity(make_dirichlet(8, rng), 7, 1e-10).max_discrepancy for _ in range(100))
    assert worst <= 1e-10
