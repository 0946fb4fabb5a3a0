import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sieve_lab.laws import parse_law, parse_step_law
from sieve_lab.parallel import replicate_seeds
from sieve_lab.walks import (
    GenericSource,
    HorizonError,
    SieveSource,
    WalkError,
    WalkModeError,
    WalkPath,
    make_source,
)


def unit_walk(eta="zero", seed=1):
    return WalkPath(GenericSource(parse_step_law("const:1"), parse_step_law(eta)), seed)


def test_unit_steps_positions():
    p = unit_walk().extend(5)
    assert list(p.positions[:7]) == [0, 1, 2, 3, 4, 5, 6]
    assert p.positions[-1] > 5


def test_extend_idempotent():
    p = WalkPath("uniform", 3).extend(7.5)
    before = p.positions.copy()
    p.extend(7.5)
    assert np.array_equal(before, p.positions)


def test_extend_consistency():
    a = WalkPath("uniform", 11, block=64).extend(10).extend(20)
    b = WalkPath("uniform", 11, block=64).extend(20)
    k = min(len(a.positions), len(b.positions))
    assert np.array_equal(a.positions[:k], b.positions[:k])
    assert np.array_equal(a.perturbed[: k - 1], b.perturbed[: k - 1])


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(0, 3000), min_size=1, max_size=6), st.integers(0, 2**32))
def test_extension_never_rewrites(horizons, seed):
    p = WalkPath("beta:2,3", seed, block=32)
    seen = np.array([])
    for h in horizons:
        p.extend(h)
        assert np.array_equal(p.positions[: seen.size], seen)
        seen = p.positions.copy()


def test_path_invariants():
    p = WalkPath("uniform", 5).extend(500)
    pos = p.positions
    assert pos[0] == 0.0
    assert np.all(np.diff(pos) > 0)
    assert np.all(p.perturbed > pos[:-1])


def test_positions_read_only():
    p = WalkPath("uniform", 5)
    with pytest.raises(ValueError):
        p.positions[0] = 1.0


def test_nu_unit_steps():
    p = unit_walk().extend(10)
    assert p.nu(3.5) == 4
    assert p.nu(3.0) == 4  # ties count
    assert list(p.nu(np.array([0.0, 2.5]))) == [1, 3]


def test_nu_zero_is_one():
    assert WalkPath("uniform", 9).extend(1).nu(0.0) == 1


def test_horizon_exceeded():
    p = WalkPath("uniform", 9).extend(2)
    with pytest.raises(HorizonError):
        p.nu(2.5)
    with pytest.raises(HorizonError):
        p.n_count(np.array([1.0, 3.0]))
    with pytest.raises(ValueError):
        p.nu(-1.0)


def test_nu_mean_exponential():
    # Poisson process: E nu(x) = x + 1
    src = GenericSource(parse_step_law("exp:1"))
    v = np.array([WalkPath(src, s).extend(10).nu(10.0) for s in replicate_seeds(17, 10_000)])
    se = v.std(ddof=1) / math.sqrt(v.size)
    assert abs(v.mean() - 11.0) < 3 * se


def test_n_count_deterministic():
    p = unit_walk("const:0.5").extend(10)
    assert p.n_count(3.2) == 3
    assert p.n_count(0.4) == 0
    assert p.n_count(0.5) == 1


def test_n_count_below_nu_sieve():
    p = WalkPath("uniform", 4).extend(50)
    x = np.linspace(0, 50, 301)
    assert np.all(p.n_count(x) <= p.nu(x))


def test_monotone_counts():
    p = WalkPath("beta:0.5,0.5", 8).extend(40)
    x = np.linspace(0, 40, 500)
    assert np.all(np.diff(p.nu(x)) >= 0)
    assert np.all(np.diff(p.n_count(x)) >= 0)


def test_rho_star_dyadic():
    p = WalkPath("det:0.5", 1)
    p.extend(math.log(8))
    assert p.rho_star(8.0) == 3
    assert p.rho_star(1.0) == 0
    for j in range(1, 20):
        p.extend(j)
        assert p.rho_star(math.exp(j)) == math.floor(j / math.log(2))


def test_rho_star_mode_and_domain():
    g = WalkPath(GenericSource(parse_step_law("exp:1")), 1).extend(5)
    with pytest.raises(WalkModeError):
        g.rho_star(2.0)
    with pytest.raises(WalkModeError):
        g.log_frequencies()
    with pytest.raises(ValueError):
        WalkPath("uniform", 1).extend(3).rho_star(0.5)


def test_increment_window():
    p = unit_walk("const:0.5").extend(10)
    assert p.increment_window(5.2, 1.0) == 1
    assert p.increment_window(5.2, 0.1) == 0
    assert p.increment_window(5.2, 1.0, renewal=True) == 1
    with pytest.raises(ValueError):
        p.increment_window(1.0, 2.0)


def test_increment_window_rate():
    # renewal rate 1/mu = 1 for the uniform sieve: E(N(n) - N(n-1)) -> 1,
    # so the mean of (N(100) - N(99)) / sqrt(100) is close to 0.1
    v = np.array(
        [WalkPath("uniform", s).extend(100.0).increment_window(100.0, 1.0) for s in replicate_seeds(3, 5000)]
    ) / 10.0
    se = v.std(ddof=1) / math.sqrt(v.size)
    assert abs(v.mean() - 0.1) < 3 * se
    # and the normalized increment vanishes as n grows
    w = np.array(
        [WalkPath("uniform", s).extend(1e4).increment_window(1e4, 1.0) for s in replicate_seeds(4, 2000)]
    ) / 100.0
    assert w.mean() < 0.02


def test_log_frequencies_sum_to_one():
    p = WalkPath("uniform", 2).extend(60)
    pk = np.exp(p.log_frequencies())
    tail = math.exp(-p.positions[-1])
    assert math.fsum(pk) + tail == pytest.approx(1.0, abs=1e-12)


def test_step_cap():
    src = GenericSource(parse_step_law("const:1e-3"))
    with pytest.raises(WalkError, match="step cap"):
        WalkPath(src, 1, block=16, max_steps=100).extend(1.0)


def test_nonpositive_step_rejected():
    with pytest.raises(WalkError):
        WalkPath(GenericSource(parse_step_law("zero")), 1).extend(1.0)


def test_make_source():
    assert isinstance(make_source("uniform"), SieveSource)
    assert isinstance(make_source(parse_law("beta:2,2")), SieveSource)
    assert isinstance(make_source(parse_step_law("exp:1")), GenericSource)
    g = make_source(("exp:1", "const:0.5"))
    assert g.eta.name == parse_step_law("const:0.5").name


def test_sieve_steps_match_perturbations():
    # xi and eta come from the same W: e^-xi + e^-eta = 1
    p = WalkPath("beta:2,3", 6).extend(30)
    w = np.exp(-p.steps)
    assert np.allclose(w + np.exp(-p.perturbations), 1.0, atol=1e-12)
