"""Ball allocation for the Bernoulli sieve.

Box ``b`` is ``(R_b, R_{b-1}]`` with ``R_k = exp(-S_k)``.  A uniform ball
``u`` lands in box ``#{k >= 0 : S_k <= -log u}``, so balls are thrown as
standard exponentials against the additive walk and nothing is ever
computed in probability space (``R_k`` underflows long before ``S_k`` is
large).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np
from scipy import special

from . import kernels
from .laws import WLaw, parse_law
from .seeding import BALLS, stream
from .walks import SieveSource, WalkModeError, WalkPath, tie

DEFAULT_BALL_BUDGET = 10**8
CHUNK = 1 << 20
# materialize boxes until the remaining mass R_K is below THETA_DELTA_TAIL / n
THETA_DELTA_TAIL = 1e-12


def _require_sieve(path: WalkPath) -> None:
    if not path.source.sieve:
        raise WalkModeError("occupancy needs a sieve-mode path")


def box_index(path: WalkPath, u: float) -> int:
    """Box hit by the ball at ``u``: the ``b`` with ``R_b < u <= R_{b-1}``."""
    _require_sieve(path)
    if not 0 < u <= 1:
        raise ValueError("ball position must lie in (0, 1]")
    e = -math.log(u)
    path.extend(e)
    return int(np.searchsorted(path.positions, e, side="right"))


def checkpoint_sizes(j_max: int) -> list[int]:
    """``[e^j]`` for ``j = 1 .. j_max``."""
    return [math.floor(math.exp(j)) for j in range(1, j_max + 1)]


@dataclass
class BoxHistogram:
    """Ball counts per box; ``counts[k]`` is ``Z_{n,k}`` (index 0 unused)."""

    counts: np.ndarray
    n: int

    @property
    def occupied(self) -> int:
        return int(np.count_nonzero(self.counts))

    @property
    def max_box(self) -> int:
        nz = np.flatnonzero(self.counts)
        return int(nz[-1]) if nz.size else 0


def allocate(path: WalkPath, n: int, rng: np.random.Generator, chunk: int = CHUNK) -> BoxHistogram:
    """Throw ``n`` balls on a fixed path; the path is extended as needed."""
    _require_sieve(path)
    counts = np.zeros(path.positions.shape[0], dtype=np.int64)
    return _throw(path, n, rng, counts, chunk)


def _throw(path, n, rng, counts, chunk) -> BoxHistogram:
    left = n
    while left > 0:
        m = min(left, chunk)
        e = rng.standard_exponential(m)
        path.extend(float(e.max()))
        pos = path.positions
        if counts.shape[0] < pos.shape[0]:
            counts = np.concatenate((counts, np.zeros(pos.shape[0] - counts.shape[0], np.int64)))
        kernels.accumulate_boxes(pos, e, counts)
        left -= m
    return BoxHistogram(counts, int(counts.sum()))


def _throw_binomial(path, n, rng, counts) -> BoxHistogram:
    # multinomial by sequential stick-breaking: given not in boxes < k,
    # a ball lands in box k with probability 1 - W_k
    left = n
    k = 1
    while left > 0:
        while path.steps_materialized < k:
            path.extend(path.positions[-1])
        q = -math.expm1(-float(path.steps[k - 1]))
        z = int(rng.binomial(left, q)) if q < 1.0 else left
        if z:
            if counts.shape[0] <= k:
                counts = np.concatenate((counts, np.zeros(k + 1 - counts.shape[0], np.int64)))
            counts[k] += z
            left -= z
        k += 1
    return BoxHistogram(counts, int(counts.sum()))


class ThetaDelta(NamedTuple):
    theta: float
    delta: float
    tail_bound: float  # n * R_K, the unmaterialized part already included in delta


def theta_delta(path: WalkPath, n: int) -> ThetaDelta:
    """``Theta_n = sum e^{-n p_k} 1{n p_k >= 1}`` and ``Delta_n = n sum p_k 1{n p_k < 1}``.

    Evaluated in log space.  Boxes beyond the materialized ``K`` all have
    ``n p_k < 1`` and total mass exactly ``R_K``, so ``n R_K`` is added to
    ``Delta_n`` and also reported as ``tail_bound``.
    """
    _require_sieve(path)
    if n < 1:
        raise ValueError("theta_delta needs n >= 1")
    logn = math.log(n)
    path.extend(logn - math.log(THETA_DELTA_TAIL))
    pts = path.perturbed  # -log p*_k for k = 1 .. K
    big = pts <= tie(logn)
    theta = float(np.sum(np.exp(-np.exp(logn - pts[big]))))
    tail = math.exp(logn - float(path.positions[-1]))
    delta = float(np.sum(np.exp(logn - pts[~big]))) + tail
    return ThetaDelta(theta, delta, tail)


class Checkpoint(NamedTuple):
    j: int
    n: int
    k_star: int
    rho_star: int
    theta: float
    delta: float


@dataclass
class OccupancyTrace:
    law: WLaw
    seed: int
    checkpoints: list[Checkpoint] = field(default_factory=list)
    max_box: int = 0
    truncated: bool = False
    method: str = "balls"

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(c, name) for c in self.checkpoints])


def simulate_trace(
    law: WLaw | str,
    seed: int,
    j_max: int,
    ball_budget: int = DEFAULT_BALL_BUDGET,
    method: str = "balls",
    diagnostics: bool = True,
    chunk: int = CHUNK,
) -> OccupancyTrace:
    """Occupancy along one path at ``n_j = [e^j]``, ``j = 1 .. j_max``.

    Balls accumulate across checkpoints on one realization of ``(W_k)``.
    ``method="balls"`` throws every ball; ``method="binomial"`` draws the
    box counts of each checkpoint increment as a stick-breaking multinomial
    (same joint law, cost independent of ``n``).  Checkpoints above
    ``ball_budget`` are dropped and the trace is flagged ``truncated``.
    """
    law = parse_law(law)
    if j_max < 1:
        raise ValueError("j_max must be at least 1")
    if method not in ("balls", "binomial"):
        raise ValueError(f"unknown allocation method {method!r}")
    path = WalkPath(SieveSource(law), seed)
    rng = stream(seed, BALLS)
    trace = OccupancyTrace(law, seed, method=method)
    counts = np.zeros(path.positions.shape[0], dtype=np.int64)
    done = 0
    for j, n_j in enumerate(checkpoint_sizes(j_max), start=1):
        if n_j > ball_budget:
            trace.truncated = True
            break
        if method == "balls":
            hist = _throw(path, n_j - done, rng, counts, chunk)
        else:
            hist = _throw_binomial(path, n_j - done, rng, counts)
        counts = hist.counts
        done = n_j
        if diagnostics:
            path.extend(float(j))
            rho = path.n_count(float(j))  # rho*(e^j) = N*(j)
            td = theta_delta(path, n_j)
            theta, delta = td.theta, td.delta
        else:
            rho, theta, delta = -1, math.nan, math.nan
        trace.checkpoints.append(Checkpoint(j, n_j, hist.occupied, rho, theta, delta))
    trace.max_box = BoxHistogram(counts, done).max_box
    return trace


def occupied_count(law: WLaw | str, seed: int, n: int, method: str = "balls") -> int:
    """``K*_n`` for a single fresh path and ``n`` balls."""
    law = parse_law(law)
    path = WalkPath(SieveSource(law), seed)
    rng = stream(seed, BALLS)
    counts = np.zeros(path.positions.shape[0], dtype=np.int64)
    if method == "balls":
        return _throw(path, n, rng, counts, CHUNK).occupied
    return _throw_binomial(path, n, rng, counts).occupied


class Sandwich(NamedTuple):
    occupied: int
    large: int
    missed_large: int
    occupied_small: int


def occupancy_sandwich(path: WalkPath, hist: BoxHistogram) -> Sandwich:
    """Split ``K_n - #{k : n p_k >= 1}`` into missed large and occupied small boxes."""
    _require_sieve(path)
    logn = math.log(hist.n)
    path.extend(logn)
    pts = path.perturbed
    nbox = max(pts.shape[0], hist.counts.shape[0] - 1)
    large = np.zeros(nbox + 1, dtype=bool)
    large[1 : pts.shape[0] + 1] = pts <= tie(logn)
    hit = np.zeros(nbox + 1, dtype=bool)
    hit[: hist.counts.shape[0]] = hist.counts > 0
    return Sandwich(
        int(hit.sum()),
        int(large.sum()),
        int(np.sum(large & ~hit)),
        int(np.sum(hit & ~large)),
    )


# ---------------------------------------------------------------------------
# exact oracles


def fourth_power_terms(indicators: Sequence[int]) -> tuple[int, int, int, int]:
    """Sums over 1-, 2-, 3- and 4-element index sets of products of 0/1 indicators.

    For indicators ``a`` these satisfy ``(sum a)**4 = e1 + 14 e2 + 36 e3 + 24 e4``,
    the expansion behind the fourth-moment bounds on counting increments.
    Computed by the elementary-symmetric recursion, exactly in integers.
    """
    e = [1, 0, 0, 0, 0]
    for a in indicators:
        a = int(a)
        if a not in (0, 1):
            raise ValueError("indicators must be 0 or 1")
        if a:
            for r in range(4, 0, -1):
                e[r] += e[r - 1]
    return e[1], e[2], e[3], e[4]


def expected_occupied(p: Sequence[float], n: int) -> float:
    """``E K_n = sum_k (1 - (1 - p_k)^n)`` for fixed frequencies."""
    p = np.minimum(np.asarray(p, dtype=np.float64), 1.0)
    with np.errstate(divide="ignore"):  # p = 1 gives log1p(-1) = -inf, term 1
        return float(np.sum(-np.expm1(n * np.log1p(-p))))


def _compositions(n: int, parts: int):
    """All tuples of ``parts`` nonnegative integers summing to ``n``."""
    for cuts in itertools.combinations(range(n + parts - 1), parts - 1):
        prev = -1
        out = []
        for c in cuts:
            out.append(c - prev - 1)
            prev = c
        out.append(n + parts - 1 - prev - 1)
        yield tuple(out)


def brute_force_K_distribution(p: Sequence, n: int) -> dict[int, object]:
    """Exact law of the number of occupied boxes for ``n`` balls and frequencies ``p``.

    Sums multinomial weights over every count vector, which covers all
    ``len(p)**n`` allocations.  Rational inputs (``Fraction``) give exact
    rational probabilities.
    """
    p = list(p)
    if not 1 <= len(p) <= 8 or not 1 <= n <= 8:
        raise ValueError("brute force is limited to n <= 8 balls and at most 8 boxes")
    if any(v < 0 for v in p):
        raise ValueError("negative probability")
    total = sum(p)
    exact = all(isinstance(v, (int, Fraction)) for v in p)
    if (total != 1) if exact else abs(total - 1) > 1e-12:
        raise ValueError("probabilities must sum to 1")
    out: dict[int, object] = {}
    for z in _compositions(n, len(p)):
        coef = math.factorial(n)
        w = 1
        for zk, pk in zip(z, p):
            coef //= math.factorial(zk)
            w = w * pk**zk
        k = sum(1 for zk in z if zk)
        out[k] = out.get(k, 0) + coef * w
    return {k: v for k, v in sorted(out.items()) if v}


def ewens_pmf(theta: float, n: int, k_max: int | None = None) -> np.ndarray:
    """Exact law of ``K*_n`` when ``W ~ Beta(theta, 1)``.

    The sieve frequencies are then GEM(theta) and ``K*_n`` is a sum of
    independent Bernoulli(``theta / (theta + i - 1)``), ``i = 1 .. n``.
    Mass above ``k_max`` is dropped (``k_max`` defaults to a bound far in
    the tail).
    """
    if k_max is None:
        mean = theta * (special.digamma(theta + n) - special.digamma(theta))
        k_max = int(mean + 12 * math.sqrt(mean + 1) + 20)
    pmf = np.zeros(k_max + 1)
    pmf[0] = 1.0
    for i in range(1, n + 1):
        q = theta / (theta + i - 1)
        shifted = pmf[:-1] * q
        pmf *= 1.0 - q
        pmf[1:] += shifted
    return pmf
