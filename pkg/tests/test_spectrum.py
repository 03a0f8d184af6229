import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import ndtr

import oracles
from conftest import corpus, joint_sources
from equivocation.dist import CANON, load_joint, tensor_power, uniform_source
from equivocation.errors import DomainError, GrowthCapWarning, SizeOverflow
from equivocation.measures import shannon_cond_entropy, varentropies
from equivocation.oneshot import direct_rhs
from equivocation.spectrum import (
    SPECTRUM_COLUMNS,
    _blocks,
    collision_constant,
    collision_sum_by_types,
    collision_sum_exact,
    cramer_exponent,
    exact_tail,
    iter_types,
    log_exact_tail,
    spectrum_csv,
    spectrum_rows,
    type_count,
)


@pytest.mark.parametrize("n, k", [(1, 1), (4, 1), (5, 2), (4, 3), (3, 4), (6, 5), (2, 7)])
def test_blocks_enumerate_every_composition_once(n, k):
    rows = np.concatenate(list(_blocks(n, k)))
    assert rows.shape == (type_count(n, k), k)
    assert np.all(rows.sum(axis=1) == n) and np.all(rows >= 0)
    assert len({tuple(r) for r in rows.tolist()}) == len(rows)


def test_type_masses_sum_to_one():
    atoms = list(iter_types(CANON, 6))
    assert len(atoms) == type_count(6, 4)
    assert sum(math.exp(a.log_prob) for a in atoms) == pytest.approx(1, abs=1e-12)


def test_exact_tail_examples():
    assert exact_tail(CANON, 1, 1) == pytest.approx(0.1, abs=1e-15)
    assert exact_tail(CANON, 2, 1) == pytest.approx(0.19, abs=1e-15)
    assert exact_tail(CANON, 3, 0) == pytest.approx(1, abs=1e-14)
    assert log_exact_tail(CANON, 3, 5) == -math.inf


def test_uniform_tie_counts_as_inside():
    src = uniform_source(2, 2)
    assert exact_tail(src, 5, math.log(2)) == pytest.approx(1, abs=1e-14)


@pytest.mark.parametrize("src", [CANON] + corpus(6, 3, 2, seed0=900), ids=lambda s: f"{s.a_size}x{s.e_size}")
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_tail_matches_sequence_enumeration(src, n):
    p = np.array(src.p)
    for r in (0.1, 0.4, 0.7, 1.0, 1.5):
        assert exact_tail(src, n, r) == pytest.approx(oracles.tail_bruteforce(p, n, r), abs=1e-13)


def test_size_guard():
    with pytest.raises(SizeOverflow):
        exact_tail(load_joint(np.full((5, 5), 1 / 25)), 200, 1.0)
    with pytest.raises(DomainError):
        exact_tail(CANON, 0, 1.0)


# --------------------------------------------------------------- Chernoff


def test_cramer_zero_below_mean():
    assert cramer_exponent(CANON, 0.3) == 0.0
    assert cramer_exponent(CANON, shannon_cond_entropy(CANON)) == pytest.approx(0, abs=1e-12)
    with pytest.raises(DomainError):
        cramer_exponent(CANON, -0.1)


def test_cramer_growth_cap():
    with pytest.warns(GrowthCapWarning):
        cramer_exponent(CANON, 3.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        cramer_exponent(CANON, 1.0)


@pytest.mark.parametrize("n", [10, 25, 50])
@pytest.mark.parametrize("r", [0.5, 0.6, 0.8, 1.0, 1.5])
def test_chernoff_bound_holds(n, r):
    assert log_exact_tail(CANON, n, r) <= -n * cramer_exponent(CANON, r) + 1e-12


@given(joint_sources(max_a=3, max_e=2), st.floats(0.0, 2.5))
@settings(max_examples=30, deadline=None)
def test_chernoff_bound_random(src, r):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GrowthCapWarning)
        e = cramer_exponent(src, r)
    assert log_exact_tail(src, 12, r) <= -12 * e + 1e-9


def test_rate_converges_to_cramer():
    for r in (0.6, 0.8, 1.0):
        gaps = [-log_exact_tail(CANON, n, r) / n - cramer_exponent(CANON, r) for n in (25, 100, 200)]
        assert all(g >= -1e-12 for g in gaps)
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 0.05


def test_central_limit_regime():
    n = 400
    h, v = shannon_cond_entropy(CANON), varentropies(CANON).v
    for z in (-1.5, 0.0, 1.5):
        clt = float(ndtr(-z))
        assert exact_tail(CANON, n, h + z * math.sqrt(v / n)) == pytest.approx(clt, abs=0.01)


# -------------------------------------------------------------- collisions


def test_collision_examples():
    assert collision_constant(CANON) == pytest.approx(0.725)
    assert collision_sum_exact(CANON, 1, 2) == pytest.approx(0.8625, abs=1e-15)
    with pytest.raises(DomainError):
        collision_sum_exact(CANON, 0, 2)


@pytest.mark.parametrize("n", [1, 2])
def test_collision_matches_binning_enumeration(n):
    brute = oracles.collision_bruteforce(np.array(tensor_power(CANON, n).p), 2)
    assert collision_sum_exact(CANON, n, 2) == pytest.approx(brute, abs=1e-14)


@pytest.mark.parametrize("src", corpus(8, 3, 3, seed0=950), ids=lambda s: f"{s.a_size}x{s.e_size}")
def test_collision_by_types_agrees(src):
    for n, m in ((1, 2), (3, 3), (7, 5)):
        assert collision_sum_by_types(src, n, m) == pytest.approx(collision_sum_exact(src, n, m), abs=1e-13)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_collision_meets_direct_bound(n):
    # e^{C_2} averaged over binning is M times the collision sum
    lhs = 2 * collision_sum_exact(CANON, n, 2)
    rhs = direct_rhs(tensor_power(CANON, n), 1.0, 2, 1.0, None, "L1_plus")
    assert rhs == pytest.approx(1 + 2 * 0.725**n)
    assert rhs - lhs >= 0


# ----------------------------------------------------------------- export


def test_spectrum_rows_and_csv():
    rows = spectrum_rows(CANON, [5, 10], [0.6, 1.0])
    assert len(rows) == 4 and all(r["gap"] >= 0 for r in rows)
    lines = spectrum_csv(rows).splitlines()
    assert lines[0] == ",".join(SPECTRUM_COLUMNS)
    assert len(lines) == 5
