"""Statistical checks of the limit theorems on simulated paths.

Almost-sure limit statements cannot be falsified at finite ``n``; every
check here compares finite-sample statistics with configured bands and
records the bands it used in its :class:`CheckReport`.

Standardization (all modes): with ``t`` the time argument,

    z = (raw - centering(t)) / sqrt(s2 m^-3 t)
    ell = (raw - centering(t)) / sqrt(2 s2 m^-3 t log log t)

where ``m, s2`` are mean and variance of the walk step.  Entries with
``t < 3`` are kept with ``z = ell = nan`` and never enter statistics.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import partial
from typing import Iterable, Sequence

import numpy as np
from scipy import special

from . import kernels
from .laws import (
    IneligibleLawError,
    MomentProfile,
    StepLaw,
    WLaw,
    centering,
    moment_profile,
    parse_law,
    parse_step_law,
    scales,
    step_profile,
)
from .occupancy import OccupancyTrace, ewens_pmf, occupied_count, simulate_trace
from .parallel import map_ordered, replicate_seeds
from .walks import GenericSource, SieveSource, WalkPath, make_source

MODES = ("sieve-K", "sieve-rho", "generic-N", "renewal-nu")


class CheckError(ValueError):
    """A check was called outside its preconditions."""


@dataclass
class CheckReport:
    name: str
    stats: dict[str, float]
    thresholds: dict[str, float]
    passed: bool
    meta: dict = field(default_factory=dict)
    runtime: float = 0.0
    detail: dict = field(default_factory=dict)

    def summary(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        st = ", ".join(f"{k}={_fmt(v)}" for k, v in self.stats.items())
        th = ", ".join(f"{k}={_fmt(v)}" for k, v in self.thresholds.items())
        return f"[{flag}] {self.name}: {st} | thresholds: {th}"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


# ---------------------------------------------------------------------------
# standardized series


@dataclass
class StandardizedSeries:
    mode: str
    source: str
    profile: MomentProfile
    checkpoint: np.ndarray  # j for e-grid checkpoints, else t
    t: np.ndarray  # argument of centering and scales
    n: np.ndarray  # balls thrown (sieve-K) or t
    raw: np.ndarray
    centering: np.ndarray
    z: np.ndarray
    ell: np.ndarray
    replicate: int = 0

    def __len__(self) -> int:
        return len(self.raw)

    def select(self, lo: float, hi: float) -> np.ndarray:
        """Mask of entries with ``lo <= checkpoint <= hi`` and a defined ``ell``."""
        return (self.checkpoint >= lo) & (self.checkpoint <= hi) & np.isfinite(self.ell)


def scale_arrays(profile: MomentProfile, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    clt = np.full(t.shape, np.nan)
    lil = np.full(t.shape, np.nan)
    for i, ti in enumerate(t):
        if ti >= 3:
            clt[i], lil[i] = scales(profile, float(ti))
    return clt, lil


def standardize(
    mode: str,
    source: str,
    profile: MomentProfile,
    t: Sequence[float],
    raw: Sequence[float],
    cent: Sequence[float],
    checkpoint: Sequence[float] | None = None,
    n: Sequence[float] | None = None,
    replicate: int = 0,
) -> StandardizedSeries:
    if mode not in MODES:
        raise CheckError(f"unknown series mode {mode!r}")
    t = np.asarray(t, dtype=np.float64)
    raw = np.asarray(raw, dtype=np.float64)
    cent = np.asarray(cent, dtype=np.float64)
    clt, lil = scale_arrays(profile, t)
    dev = raw - cent
    return StandardizedSeries(
        mode,
        source,
        profile,
        np.asarray(t if checkpoint is None else checkpoint, dtype=np.float64),
        t,
        np.asarray(t if n is None else n, dtype=np.float64),
        raw,
        cent,
        dev / clt,
        dev / lil,
        replicate,
    )


def sieve_series(trace: OccupancyTrace, which: str = "K", replicate: int = 0) -> StandardizedSeries:
    """K* (``which="K"``) or rho*(e^j) (``which="rho"``) against ``mu^-1 int_0^j F``."""
    law = trace.law
    if not law.lil_eligible:
        raise IneligibleLawError(f"{law.name} has Var|log W| = 0; no LIL series")
    prof = moment_profile(law)
    j = trace.column("j").astype(np.float64)
    raw = trace.column("k_star" if which == "K" else "rho_star")
    cent = [centering(law, float(v)) for v in j]
    mode = "sieve-K" if which == "K" else "sieve-rho"
    return standardize(mode, law.name, prof, j, raw, cent, j, trace.column("n"), replicate)


def generic_series(path: WalkPath, times: Sequence[float], replicate: int = 0) -> StandardizedSeries:
    """``N(t)`` against ``m^-1 int_0^t F_eta`` with ``m = E xi`` on a generic path."""
    src = path.source
    if not isinstance(src, GenericSource):
        raise CheckError("generic_series needs a GenericSource path")
    prof = step_profile(src.xi, src.eta)
    times = np.asarray(times, dtype=np.float64)
    path.extend(float(times.max()))
    raw = path.n_count(times)
    cent = [src.eta.integrated_cdf(float(x)) / prof.mu for x in times]
    return standardize("generic-N", src.name, prof, times, raw, cent, replicate=replicate)


def renewal_series(
    path: WalkPath, times: Sequence[float], checkpoint=None, replicate: int = 0
) -> StandardizedSeries:
    """``nu(t)`` against ``t / m``."""
    src = path.source
    if isinstance(src, SieveSource):
        prof = moment_profile(src.law)
    else:
        prof = step_profile(src.xi)
    times = np.asarray(times, dtype=np.float64)
    path.extend(float(times.max()))
    raw = path.nu(times)
    return standardize(
        "renewal-nu", src.name, prof, times, raw, times / prof.mu, checkpoint, replicate=replicate
    )


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov


def normal_cdf(x):
    return special.ndtr(x)


def ks_distance(sample: Sequence[float], cdf, cdf_left=None) -> float:
    """``sup_x |F_m(x) - F(x)|`` for the empirical CDF ``F_m`` of ``sample``.

    ``cdf`` must be right-continuous; pass its left limit as ``cdf_left`` when
    ``F`` has atoms.  Between consecutive distinct sample values ``F_m`` is
    flat and ``F`` monotone, so comparing both one-sided limits at the sample
    values gives the exact supremum.
    """
    x = np.sort(np.asarray(sample, dtype=np.float64))
    m = x.shape[0]
    if m == 0:
        raise CheckError("empty sample")
    u, first = np.unique(x, return_index=True)
    below = first / m  # F_m(u-)
    upto = np.append(first[1:], m) / m  # F_m(u)
    f = np.asarray(cdf(u), dtype=np.float64)
    fl = f if cdf_left is None else np.asarray(cdf_left(u), dtype=np.float64)
    return float(max(np.max(np.abs(upto - f)), np.max(np.abs(below - fl))))


def ks_normal(sample: Sequence[float]) -> float:
    """KS distance of ``sample`` to the standard normal."""
    return ks_distance(sample, normal_cdf)


def ks_lattice(pmf: np.ndarray, support: np.ndarray) -> float:
    """KS distance from a lattice law (``pmf`` on increasing ``support``) to ``Phi``."""
    upper = np.cumsum(pmf)
    lower = upper - pmf
    cdf = normal_cdf(support)
    return float(max(np.max(np.abs(upper - cdf)), np.max(np.abs(lower - cdf))))


def _clt_replicate(law: WLaw, n: int, method: str, seed: int) -> int:
    return occupied_count(law, seed, n, method)


def clt_check(
    law: WLaw | str,
    n_exp: int = 12,
    replicates: int = 2000,
    seed: int = 42,
    ks_bound: float = 0.05,
    workers: int | None = None,
    method: str = "balls",
) -> tuple[CheckReport, StandardizedSeries]:
    """KS distance of standardized ``K*_{[e^n_exp]}`` to the standard normal."""
    law = parse_law(law)
    if not law.lil_eligible:
        raise IneligibleLawError(f"{law.name} is not eligible for the CLT check")
    if replicates < 500:
        raise CheckError("clt_check needs at least 500 replicates")
    t0 = time.perf_counter()
    n = math.floor(math.exp(n_exp))
    ks = map_ordered(partial(_clt_replicate, law, n, method), replicate_seeds(seed, replicates), workers)
    prof = moment_profile(law)
    cent = centering(law, float(n_exp))
    series = standardize(
        "sieve-K", law.name, prof, np.full(replicates, float(n_exp)), ks,
        np.full(replicates, cent), n=np.full(replicates, float(n)),
    )
    d = ks_normal(series.z)
    stats = {
        "ks": d,
        "z_mean": float(np.mean(series.z)),
        "z_sd": float(np.std(series.z, ddof=1)),
    }
    if law.kind == "uniform" or (law.kind == "beta" and law.params[1] == 1.0):
        # exact finite-n law available: the KS distance an infinite sample would show
        theta = 1.0 if law.kind == "uniform" else law.params[0]
        pmf = ewens_pmf(theta, n)
        clt_scale = scales(prof, float(n_exp))[0]
        stats["ks_exact_law"] = ks_lattice(pmf, (np.arange(pmf.shape[0]) - cent) / clt_scale)
    rep = CheckReport(
        "clt",
        stats,
        {"ks_bound": ks_bound},
        d < ks_bound,
        {"law": law.name, "seed": seed, "replicates": replicates, "n": n},
        time.perf_counter() - t0,
    )
    return rep, series


# ---------------------------------------------------------------------------
# LIL statistics


def lil_trace(series: StandardizedSeries, eps: float = 0.2, j_range=(3, math.inf)) -> CheckReport:
    """Extremes, ``|ell| <= 1 + eps`` band violations and running records of one series."""
    if j_range[0] < 3:
        raise CheckError("LIL statistics need checkpoints j >= 3")
    mask = series.select(*j_range)
    if not mask.any():
        raise CheckError("no checkpoints in range")
    ell = series.ell[mask]
    cps = series.checkpoint[mask]
    viol = int(np.sum(np.abs(ell) > 1.0 + eps))
    records = []
    best = -math.inf
    for c, v in zip(cps, ell):
        if v > best:
            best = v
            records.append((float(c), float(v)))
    return CheckReport(
        "lil_trace",
        {"max": float(ell.max()), "min": float(ell.min()), "violations": viol},
        {"eps": eps},
        viol == 0,
        {"source": series.source, "mode": series.mode, "replicate": series.replicate},
        detail={"records": records},
    )


def lil_band_check(
    series_set: Sequence[StandardizedSeries],
    j_range=(5, 18),
    band=(0.4, 1.3),
    band_frac: float = 0.9,
    pooled_min: float = 0.8,
    abs_bound: float = 1.5,
    abs_frac: float = 0.95,
) -> CheckReport:
    """Band checks on per-path maxima of ``ell`` across a set of paths.

    (a) fraction of paths with ``max ell`` in ``band`` is at least ``band_frac``;
    (b) the pooled maximum over all paths is at least ``pooled_min``;
    (c) fraction of paths with ``|ell| <= abs_bound`` at every checkpoint is at
    least ``abs_frac``.
    """
    if not series_set:
        raise CheckError("no series")
    maxima, within = [], []
    for s in series_set:
        mask = s.select(*j_range)
        if not mask.any():
            raise CheckError("series does not cover the checkpoint range")
        ell = s.ell[mask]
        maxima.append(float(ell.max()))
        within.append(bool(np.all(np.abs(ell) <= abs_bound)))
    maxima = np.array(maxima)
    frac_band = float(np.mean((maxima >= band[0]) & (maxima <= band[1])))
    pooled = float(maxima.max())
    frac_abs = float(np.mean(within))
    a, b, c = frac_band >= band_frac, pooled >= pooled_min, frac_abs >= abs_frac
    return CheckReport(
        "lil_band",
        {
            "frac_max_in_band": frac_band,
            "pooled_max": pooled,
            "frac_within_abs": frac_abs,
            "median_max": float(np.median(maxima)),
            "a_pass": a,
            "b_pass": b,
            "c_pass": c,
        },
        {
            "band_lo": band[0],
            "band_hi": band[1],
            "band_frac": band_frac,
            "pooled_min": pooled_min,
            "abs_bound": abs_bound,
            "abs_frac": abs_frac,
        },
        a and b and c,
        {"paths": len(series_set), "j_range": tuple(j_range)},
        detail={"maxima": maxima.tolist()},
    )


def limit_point_coverage(
    series_set: Sequence[StandardizedSeries],
    grid_step: float = 0.25,
    delta: float = 0.15,
    j_range=(3, math.inf),
    interior_min: float = 0.8,
    path_frac: float = 0.8,
) -> CheckReport:
    """Which points of ``[-1, 1]`` each ``ell``-sequence comes within ``delta`` of.

    ``coverage`` is the fraction of grid points visited by at least one path.
    Passes when at least ``path_frac`` of the paths visit at least
    ``interior_min`` of the interior grid points (``|g| < 1``).
    """
    if not series_set:
        raise CheckError("no series")
    k = int(round(2.0 / grid_step))
    grid = np.linspace(-1.0, 1.0, k + 1)
    interior = np.abs(grid) < 1.0 - 1e-12
    visits = np.zeros((len(series_set), grid.shape[0]), dtype=bool)
    for i, s in enumerate(series_set):
        ell = s.ell[s.select(*j_range)]
        if ell.size:
            visits[i] = np.any(np.abs(ell[:, None] - grid[None, :]) <= delta, axis=0)
    per_point = visits.mean(axis=0)
    per_path_interior = visits[:, interior].mean(axis=1) if interior.any() else np.zeros(len(series_set))
    frac_paths = float(np.mean(per_path_interior >= interior_min))
    return CheckReport(
        "coverage",
        {
            "coverage": float(np.mean(visits.any(axis=0))),
            "frac_paths_interior_covered": frac_paths,
            "mean_path_coverage": float(visits.mean()),
        },
        {"grid_step": grid_step, "delta": delta, "interior_min": interior_min, "path_frac": path_frac},
        frac_paths >= path_frac,
        {"paths": len(series_set)},
        detail={"grid": grid.tolist(), "per_point": per_point.tolist()},
    )


def approx_distances(trace: OccupancyTrace) -> tuple[np.ndarray, np.ndarray]:
    """``(j, |K*_{n_j} - rho*(e^j)| / sqrt(j))`` along one trace."""
    j = trace.column("j").astype(np.float64)
    d = np.abs(trace.column("k_star") - trace.column("rho_star")) / np.sqrt(j)
    return j, d


def _loglog_slope(j: np.ndarray, d: np.ndarray) -> float:
    ok = d > 0
    if ok.sum() < 2:
        return math.nan
    x, y = np.log(j[ok]), np.log(d[ok])
    if np.ptp(x) == 0:
        return math.nan
    return float(np.polyfit(x, y, 1)[0])


def approx_check(traces: Sequence[OccupancyTrace], j_lo: int = 5, j_hi: int = 18) -> CheckReport:
    """Decay of ``|K* - rho*| / sqrt(j)``: median at ``j_hi`` below median at ``j_lo``
    and negative median log-log slope (fitted over ``j`` with ``d_j > 0``)."""
    if not traces:
        raise CheckError("no traces")
    d_lo, d_hi, slopes = [], [], []
    for tr in traces:
        j, d = approx_distances(tr)
        sel = (j >= j_lo) & (j <= j_hi)
        if not np.any(j == j_lo) or not np.any(j == j_hi):
            raise CheckError(f"trace does not reach checkpoints {j_lo} and {j_hi}")
        d_lo.append(float(d[j == j_lo][0]))
        d_hi.append(float(d[j == j_hi][0]))
        slopes.append(_loglog_slope(j[sel], d[sel]))
    slopes = np.array(slopes)
    finite = slopes[np.isfinite(slopes)]
    med_lo, med_hi = float(np.median(d_lo)), float(np.median(d_hi))
    med_slope = float(np.median(finite)) if finite.size else math.nan
    passed = med_hi < med_lo and med_slope < 0
    return CheckReport(
        "approx",
        {
            "median_d_lo": med_lo,
            "median_d_hi": med_hi,
            "median_slope": med_slope,
            "paths_with_slope": int(finite.size),
            "max_d_hi": float(np.max(d_hi)),
        },
        {"j_lo": j_lo, "j_hi": j_hi},
        passed,
        {"paths": len(traces)},
    )


# ---------------------------------------------------------------------------
# moment bounds


def _moment_replicate(source, xs: np.ndarray, ys: np.ndarray, seed: int) -> np.ndarray:
    path = WalkPath(source, seed)
    path.extend(float(xs.max()))
    return path.n_count(xs) - path.n_count(ys)


def moment_ratio(
    source,
    pairs: Sequence[tuple[float, float]],
    replicates: int = 10_000,
    seed: int = 7,
    mode: str = "N",
    bound: float = 3.0,
    workers: int | None = None,
) -> CheckReport:
    """Monte Carlo ``E (N(x) - N(y))^4 / (x - y)^4`` over a grid of pairs.

    ``mode="rho"`` (sieve only) uses ``rho*(x) - rho*(y) = N(log x) - N(log y)``
    with denominator ``(log(x/y))^4``; pairs must then satisfy ``x/y > e``.
    Passes when max/min of the ratio across the grid is below ``bound``.
    """
    source = make_source(source)
    pairs = [(float(x), float(y)) for x, y in pairs]
    if not pairs:
        raise CheckError("no pairs")
    if mode == "N":
        for x, y in pairs:
            if not (0 <= y < x and x - y > 1):
                raise CheckError(f"pair (x={x}, y={y}) violates 0 <= y < x with x - y > 1")
        xs = np.array([p[0] for p in pairs])
        ys = np.array([p[1] for p in pairs])
    elif mode == "rho":
        if not source.sieve:
            raise CheckError("rho mode needs a sieve source")
        for x, y in pairs:
            if not (1 <= y and x / y > math.e):
                raise CheckError(f"pair (x={x}, y={y}) violates x/y > e")
        xs = np.log([p[0] for p in pairs])
        ys = np.log([p[1] for p in pairs])
    else:
        raise CheckError(f"unknown moment mode {mode!r}")
    t0 = time.perf_counter()
    incs = np.array(
        map_ordered(partial(_moment_replicate, source, xs, ys), replicate_seeds(seed, replicates), workers)
    ).astype(np.float64)
    gaps = xs - ys
    fourth = incs**4
    ratios = fourth.mean(axis=0) / gaps**4
    ses = fourth.std(axis=0, ddof=1) / math.sqrt(replicates) / gaps**4
    order = np.argsort(gaps)
    arg = int(np.argmax(ratios))
    at_edge = arg in (int(order[0]), int(order[-1]))
    spread = float(ratios.max() / ratios.min()) if ratios.min() > 0 else math.inf
    return CheckReport(
        f"moments-{mode}",
        {
            "max_ratio": float(ratios.max()),
            "min_ratio": float(ratios.min()),
            "max_over_min": spread,
            "argmax_at_edge": at_edge,
        },
        {"max_over_min_bound": bound},
        spread < bound,
        {"source": source.name, "seed": seed, "replicates": replicates},
        time.perf_counter() - t0,
        detail={"pairs": pairs, "ratios": ratios.tolist(), "se": ses.tolist()},
    )


# ---------------------------------------------------------------------------
# renewal process: LIL, sup-LIL, Strassen envelope


def _renewal_source(xi) -> GenericSource | SieveSource:
    if isinstance(xi, (StepLaw, WLaw, GenericSource, SieveSource)):
        src = make_source(xi)
    else:
        try:
            src = GenericSource(parse_step_law(xi))
        except ValueError:
            src = SieveSource(parse_law(xi))
    prof = moment_profile(src.law) if src.sieve else step_profile(src.xi)
    if not prof.sigma2 > 0:
        raise IneligibleLawError(f"degenerate step law {src.name}: Var xi = 0")
    return src


def _renewal_replicate(source, times: np.ndarray, checkpoint: np.ndarray, item) -> StandardizedSeries:
    i, seed = item
    path = WalkPath(source, seed)
    return renewal_series(path, times, checkpoint, replicate=i)


def renewal_lil(
    xi="exp:1",
    j_max: int = 16,
    paths: int = 50,
    seed: int = 7,
    band=(0.3, 1.3),
    band_frac: float = 0.9,
    workers: int | None = None,
) -> tuple[CheckReport, list[StandardizedSeries]]:
    """Standardized ``nu(e^j)`` for ``j = 1 .. j_max``; per-path maxima over ``j >= 3``
    must fall in ``band`` on at least ``band_frac`` of the paths."""
    src = _renewal_source(xi)
    t0 = time.perf_counter()
    j = np.arange(1, j_max + 1, dtype=np.float64)
    series = map_ordered(
        partial(_renewal_replicate, src, np.exp(j), j),
        enumerate(replicate_seeds(seed, paths)),
        workers,
    )
    maxima = np.array([float(s.ell[s.select(3, j_max)].max()) for s in series])
    frac = float(np.mean((maxima >= band[0]) & (maxima <= band[1])))
    rep = CheckReport(
        "renewal-lil",
        {
            "frac_max_in_band": frac,
            "median_max": float(np.median(maxima)),
            "pooled_max": float(maxima.max()),
            "pooled_min": float(min(float(s.ell[s.select(3, j_max)].min()) for s in series)),
        },
        {"band_lo": band[0], "band_hi": band[1], "band_frac": band_frac},
        frac >= band_frac,
        {"source": src.name, "seed": seed, "paths": paths},
        time.perf_counter() - t0,
        detail={"maxima": maxima.tolist()},
    )
    return rep, series


@dataclass
class SupRow:
    replicate: int
    j: float
    n: float
    sup_dev: float
    sup_stat: float  # sup / sqrt(2 n log log n), compared with s m^-3/2
    sup_norm: float  # sup_stat / (s m^-3/2)
    end_ell: float  # (nu(n) - n/m) / sqrt(2 s2 m^-3 n log log n)


def sup_statistic(path: WalkPath, n: float, prof: MomentProfile) -> tuple[float, float, float]:
    """``(sup_{y<=n} |nu(y) - y/m|, that / sqrt(2 n log log n), endpoint ell)``.

    The supremum is exact: ``nu`` is a step function and ``y/m`` is monotone,
    so it is attained at a jump (either side) or at ``y = n``.
    """
    path.extend(n)
    m = prof.mu
    sup = kernels.sup_deviation(path.positions, m, n)
    end_dev = path.nu(n) - n / m
    sup = max(sup, abs(end_dev))  # endpoint under the path's tie rule
    stat = sup / math.sqrt(2.0 * n * math.log(math.log(n)))
    return sup, stat, end_dev / scales(prof, n)[1]


def _sup_replicate(source, js: np.ndarray, item) -> list[SupRow]:
    i, seed = item
    path = WalkPath(source, seed)
    prof = moment_profile(source.law) if source.sieve else step_profile(source.xi)
    target = math.sqrt(prof.sigma2) * prof.mu**-1.5
    rows = []
    for j in js:
        n = math.exp(j)
        sup, stat, end = sup_statistic(path, n, prof)
        rows.append(SupRow(i, float(j), n, sup, stat, stat / target, end))
    return rows


def sup_lil(
    xi="exp:1",
    n_exp: int = 16,
    paths: int = 50,
    seed: int = 7,
    band=(0.5, 1.2),
    j_min: int = 3,
    workers: int | None = None,
) -> tuple[CheckReport, list[list[SupRow]]]:
    """Running-sup statistic at ``n = e^j``: mean terminal value in ``band`` and
    sup dominating the endpoint statistic on every path."""
    src = _renewal_source(xi)
    t0 = time.perf_counter()
    js = np.arange(j_min, n_exp + 1, dtype=np.float64)
    rows = map_ordered(partial(_sup_replicate, src, js), enumerate(replicate_seeds(seed, paths)), workers)
    term = np.array([r[-1].sup_norm for r in rows])
    dominated = all(r.sup_norm >= abs(r.end_ell) for path_rows in rows for r in path_rows)
    mean = float(term.mean())
    prof = moment_profile(src.law) if src.sieve else step_profile(src.xi)
    rep = CheckReport(
        "sup-lil",
        {
            "terminal_mean": mean,
            "terminal_max": float(term.max()),
            "target_constant": math.sqrt(prof.sigma2) * prof.mu**-1.5,
            "sup_dominates_endpoint": dominated,
        },
        {"band_lo": band[0], "band_hi": band[1]},
        band[0] <= mean <= band[1] and dominated,
        {"source": src.name, "seed": seed, "paths": paths, "n": math.exp(n_exp)},
        time.perf_counter() - t0,
    )
    return rep, rows


def strassen_path(path: WalkPath, n: float, prof: MomentProfile, t_grid: np.ndarray) -> np.ndarray:
    """``X_n(t) = (nu(n t) - n t / m) / sqrt(2 s2 m^-3 n log log n)`` on ``t_grid``."""
    path.extend(n * float(t_grid.max()))
    nt = n * t_grid
    return (path.nu(nt) - nt / prof.mu) / scales(prof, n)[1]


def _strassen_replicate(source, n: float, t_grid: np.ndarray, eps: float, item):
    i, seed = item
    path = WalkPath(source, seed)
    prof = moment_profile(source.law) if source.sieve else step_profile(source.xi)
    x = strassen_path(path, n, prof, t_grid)
    excess = np.abs(x) - (np.sqrt(t_grid) + eps)
    return i, x, float(excess.max())


def strassen_envelope(
    xi="exp:1",
    n_exp: float = 14,
    paths: int = 50,
    seed: int = 7,
    grid_step: float = 0.01,
    eps: float = 0.25,
    max_frac: float = 0.02,
    workers: int | None = None,
) -> tuple[CheckReport, list]:
    """Fraction of paths on which ``|X_n(t)| > sqrt(t) + eps`` somewhere on the grid."""
    src = _renewal_source(xi)
    t0 = time.perf_counter()
    k = int(round(1.0 / grid_step))
    t_grid = np.linspace(0.0, 1.0, k + 1)
    n = math.exp(n_exp)
    out = map_ordered(
        partial(_strassen_replicate, src, n, t_grid, eps), enumerate(replicate_seeds(seed, paths)), workers
    )
    excess = np.array([o[2] for o in out])
    frac = float(np.mean(excess > 0))
    rep = CheckReport(
        "strassen",
        {"violation_frac": frac, "max_excess": float(excess.max()), "violations": int(np.sum(excess > 0))},
        {"eps": eps, "max_frac": max_frac, "grid_step": grid_step},
        frac < max_frac,
        {"source": src.name, "seed": seed, "paths": paths, "n": n},
        time.perf_counter() - t0,
        detail={"t_grid": t_grid},
    )
    return rep, out


# ---------------------------------------------------------------------------
# trace fan-out


def _trace_replicate(law: WLaw, j_max: int, method: str, budget: int, seed: int) -> OccupancyTrace:
    return simulate_trace(law, seed, j_max, ball_budget=budget, method=method)


def run_traces(
    law: WLaw | str,
    seed: int,
    paths: int,
    j_max: int,
    method: str = "balls",
    ball_budget: int = 10**8,
    workers: int | None = None,
) -> list[OccupancyTrace]:
    """``paths`` independent traces, replicate ``i`` seeded by ``seed_derive(seed, i)``."""
    law = parse_law(law)
    fn = partial(_trace_replicate, law, j_max, method, ball_budget)
    return map_ordered(fn, replicate_seeds(seed, paths), workers)


def trace_series(traces: Iterable[OccupancyTrace], which: str = "K") -> list[StandardizedSeries]:
    return [sieve_series(tr, which, replicate=i) for i, tr in enumerate(traces)]
