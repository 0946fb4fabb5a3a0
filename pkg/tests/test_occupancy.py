import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sieve_lab.laws import parse_law
from sieve_lab.occupancy import (
    allocate,
    box_index,
    brute_force_K_distribution,
    checkpoint_sizes,
    ewens_pmf,
    expected_occupied,
    fourth_power_terms,
    occupancy_sandwich,
    occupied_count,
    simulate_trace,
    theta_delta,
)
from sieve_lab.parallel import replicate_seeds
from sieve_lab.seeding import BALLS, seed_derive, stream
from sieve_lab.walks import GenericSource, WalkModeError, WalkPath
from sieve_lab.laws import parse_step_law


def dyadic(seed=1):
    return WalkPath("det:0.5", seed)


# -- box_index / allocate ----------------------------------------------------------------


def test_box_index_dyadic():
    p = dyadic()
    assert box_index(p, math.exp(-1)) == 2
    assert box_index(p, 1.0) == 1
    assert box_index(p, 0.5) == 2  # box 1 is (1/2, 1]; 1/2 is the right end of box 2
    assert box_index(p, 0.2) == 3
    with pytest.raises(ValueError):
        box_index(p, 0.0)


def test_box_index_generic_rejected():
    with pytest.raises(WalkModeError):
        box_index(WalkPath(GenericSource(parse_step_law("exp:1")), 1), 0.5)


def test_dyadic_box_frequencies():
    n = 100_000
    hist = allocate(dyadic(), n, stream(5, BALLS))
    assert hist.n == n
    for k in range(1, 12):
        p = 2.0**-k
        se = math.sqrt(p * (1 - p) / n)
        assert abs(hist.counts[k] / n - p) < 3 * se, k


def test_counts_representation_matches_per_ball_boxes():
    # K = #{k : Z_k >= 1} with Z_k counted ball by ball via box_index
    for seed in range(20):
        path = WalkPath("uniform", seed)
        n = 300
        hist = allocate(path, n, stream(seed, BALLS))
        e = stream(seed, BALLS).standard_exponential(n)
        boxes = [box_index(path, math.exp(-v)) for v in e]
        z = np.bincount(boxes, minlength=hist.counts.shape[0])
        assert np.array_equal(z[: hist.counts.shape[0]], hist.counts)
        assert hist.occupied == len(set(boxes))


def test_one_ball_one_box():
    for s in range(10):
        assert occupied_count("uniform", s, 1) == 1
        assert occupied_count("uniform", s, 1, method="binomial") == 1


def test_expected_k2_dyadic():
    reps = 100_000
    rng = stream(8, BALLS)
    path = dyadic()
    k = np.array([allocate(path, 2, rng).occupied for _ in range(reps)], dtype=float)
    se = k.std(ddof=1) / math.sqrt(reps)
    assert abs(k.mean() - 5 / 3) < 3 * se
    assert expected_occupied([2.0**-i for i in range(1, 60)], 2) == pytest.approx(5 / 3)


# -- traces ------------------------------------------------------------------------------


def test_checkpoint_sizes():
    assert checkpoint_sizes(3) == [2, 7, 20]


def test_trace_invariants():
    tr = simulate_trace("uniform", 12, 10)
    k = tr.column("k_star")
    n = tr.column("n")
    assert list(n) == checkpoint_sizes(10)
    assert np.all(np.diff(k) >= 0)
    assert np.all(k <= n)
    assert np.all(k <= tr.max_box)
    path = WalkPath("uniform", 12).extend(10.0)
    assert list(tr.column("rho_star")) == [path.rho_star(math.exp(j)) for j in range(1, 11)]


def test_trace_reproducible_and_chunk_independent():
    a = simulate_trace("beta:2,3", 99, 9)
    b = simulate_trace("beta:2,3", 99, 9, chunk=1000)
    assert a.checkpoints == b.checkpoints


def test_trace_budget_truncates():
    tr = simulate_trace("uniform", 1, 10, ball_budget=1000)
    assert tr.truncated
    assert [c.j for c in tr.checkpoints] == [1, 2, 3, 4, 5, 6]


def test_trace_dump_dyadic_by_hand():
    # ball with exponential e lands in box floor(e / log 2) + 1 on the dyadic path
    seed = seed_derive(5, 0)
    tr = simulate_trace("det:0.5", seed, 3)
    e = stream(seed, BALLS).standard_exponential(20)
    boxes = np.floor(e / math.log(2)).astype(int) + 1
    assert list(tr.column("k_star")) == [len(set(boxes[:n])) for n in (2, 7, 20)]


@pytest.mark.parametrize("method", ["balls", "binomial"])
def test_ewens_law_mean(method):
    # W ~ U(0,1): K*_n is a sum of Bernoulli(1/i); mean is the harmonic number
    n, reps = 148, 20_000
    k = np.array([occupied_count("uniform", s, n, method) for s in replicate_seeds(21, reps)], dtype=float)
    mean = sum(1.0 / i for i in range(1, n + 1))
    var = sum((1.0 / i) * (1 - 1.0 / i) for i in range(1, n + 1))
    assert abs(k.mean() - mean) < 4 * math.sqrt(var / reps)


def test_ewens_beta_theta_mean():
    theta, n, reps = 2.0, 54, 20_000
    k = np.array([occupied_count("beta:2,1", s, n, "binomial") for s in replicate_seeds(4, reps)], dtype=float)
    mean = sum(theta / (theta + i) for i in range(n))
    pmf = ewens_pmf(theta, n)
    assert float(np.dot(np.arange(pmf.size), pmf)) == pytest.approx(mean, rel=1e-12)
    assert abs(k.mean() - mean) < 4 * k.std(ddof=1) / math.sqrt(reps)


def test_ewens_pmf_vs_stirling():
    # P{K = k} = theta^k |s(n, k)| / theta^(n rising), exact in rationals
    theta, n = Fraction(3, 2), 12
    s = [[0] * (n + 1) for _ in range(n + 1)]
    s[0][0] = 1
    for i in range(1, n + 1):
        for k in range(1, i + 1):
            s[i][k] = s[i - 1][k - 1] + (i - 1) * s[i - 1][k]
    rising = math.prod(theta + i for i in range(n))
    pmf = ewens_pmf(1.5, n, k_max=n)
    for k in range(n + 1):
        assert pmf[k] == pytest.approx(float(theta**k * s[n][k] / rising), abs=1e-15)


# -- theta / delta and the sandwich ---------------------------------------------------------


def test_theta_delta_dyadic():
    td = theta_delta(dyadic(), 4)
    assert td.delta == pytest.approx(1.0, rel=1e-12)
    assert td.theta == pytest.approx(math.exp(-2) + math.exp(-1), rel=1e-12)
    assert td.tail_bound < 1e-11


def test_theta_one_ball_zero():
    for s in range(5):
        assert theta_delta(WalkPath("uniform", s), 1).theta == 0.0


def test_theta_delta_direct_sum():
    path = WalkPath("beta:0.6,1.4", 3)
    n = 5000
    td = theta_delta(path, n)
    p = np.exp(path.log_frequencies())
    big = n * p >= 1
    assert td.theta == pytest.approx(np.sum(np.exp(-n * p[big])), rel=1e-12)
    assert td.delta == pytest.approx(n * (p[~big].sum() + math.exp(-path.positions[-1])), rel=1e-9)


def test_sandwich_identity():
    for seed in range(10):
        path = WalkPath("uniform", seed)
        hist = allocate(path, 3000, stream(seed, BALLS))
        sw = occupancy_sandwich(path, hist)
        assert sw.occupied == hist.occupied
        assert sw.occupied == sw.large - sw.missed_large + sw.occupied_small


# -- exact oracles ----------------------------------------------------------------------------


def test_brute_force_examples():
    assert brute_force_K_distribution([Fraction(1)], 5) == {1: 1}
    half = Fraction(1, 2)
    assert brute_force_K_distribution([half, half], 2) == {1: half, 2: half}


def test_brute_force_27_terms():
    p = [Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)]
    dist = brute_force_K_distribution(p, 3)
    # independent enumeration of all 27 ordered allocations
    ref = {}
    for alloc in itertools.product(range(3), repeat=3):
        w = math.prod(p[i] for i in alloc)
        k = len(set(alloc))
        ref[k] = ref.get(k, 0) + w
    assert dist == ref
    assert sum(k * v for k, v in dist.items()) == sum(1 - (1 - q) ** 3 for q in p)


def test_brute_force_guards():
    with pytest.raises(ValueError):
        brute_force_K_distribution([0.5, 0.5], 9)
    with pytest.raises(ValueError):
        brute_force_K_distribution([0.1] * 10, 2)
    with pytest.raises(ValueError):
        brute_force_K_distribution([0.5, 0.4], 2)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(1, 20), min_size=1, max_size=6), st.integers(1, 6))
def test_brute_force_mean_matches_expected(weights, n):
    total = sum(weights)
    p = [Fraction(w, total) for w in weights]
    dist = brute_force_K_distribution(p, n)
    assert sum(dist.values()) == 1
    assert float(sum(k * v for k, v in dist.items())) == pytest.approx(expected_occupied([float(q) for q in p], n))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 1), max_size=14))
def test_fourth_power_terms(a):
    e1, e2, e3, e4 = fourth_power_terms(a)
    idx = range(len(a))
    assert e2 == sum(a[i] * a[j] for i, j in itertools.combinations(idx, 2))
    assert e3 == sum(a[i] * a[j] * a[k] for i, j, k in itertools.combinations(idx, 3))
    assert sum(a) ** 4 == e1 + 14 * e2 + 36 * e3 + 24 * e4


def test_fourth_power_rejects_non_indicator():
    with pytest.raises(ValueError):
        fourth_power_terms([0, 2])
