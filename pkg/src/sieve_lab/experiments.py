"""Experiment runners: config in, CSV rows and check reports out."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import verify
from .config import ExperimentConfig
from .laws import parse_law, parse_step_law
from .occupancy import checkpoint_sizes
from .walks import GenericSource, WalkPath

HEADER = (
    "experiment",
    "law",
    "seed",
    "replicate",
    "checkpoint",
    "n",
    "raw",
    "centering",
    "z",
    "ell",
    "aux1",
    "aux2",
    "aux3",
    "pass",
)

NAN = math.nan


def _row(cfg, law, rep, cp, n, raw, cent=NAN, z=NAN, ell=NAN, a1=NAN, a2=NAN, a3=NAN, ok=True):
    return (cfg.experiment, law, cfg.seed, rep, cp, n, raw, cent, z, ell, a1, a2, a3, bool(ok))


def _ints(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _check_budget(cfg: ExperimentConfig) -> None:
    top = checkpoint_sizes(cfg.j_max)[-1]
    if top > cfg.ball_budget:
        raise BudgetError(
            f"j_max={cfg.j_max} needs {top} balls per path, over the budget of {cfg.ball_budget}"
        )


class BudgetError(ValueError):
    pass


def _trace_rows(cfg, traces, series, passed) -> list[tuple]:
    rows = []
    for i, tr in enumerate(traces):
        s = series[i] if series is not None else None
        for k, c in enumerate(tr.checkpoints):
            z = s.z[k] if s is not None else NAN
            ell = s.ell[k] if s is not None else NAN
            cent = s.centering[k] if s is not None else NAN
            rows.append(_row(cfg, tr.law.name, i, c.j, c.n, c.k_star, cent, z, ell, c.rho_star, c.theta, c.delta, passed))
    return rows


def _traces(cfg):
    _check_budget(cfg)
    return verify.run_traces(cfg.law, cfg.seed, cfg.replicates, cfg.j_max, cfg.method, cfg.ball_budget, cfg.workers)


def run_clt(cfg):
    rep, series = verify.clt_check(cfg.law, cfg.n_exp, cfg.replicates, cfg.seed, cfg.ks_bound, cfg.workers, cfg.method)
    rows = [
        _row(cfg, series.source, i, cfg.n_exp, series.n[i], series.raw[i], series.centering[i],
             series.z[i], series.ell[i], ok=rep.passed)
        for i in range(len(series))
    ]
    return rows, [rep]


def _generic_lil(cfg):
    src = GenericSource(parse_step_law(cfg.xi), parse_step_law(cfg.eta))
    times = np.arange(1, cfg.j_max + 1, dtype=np.float64)
    series = []
    for i, seed in enumerate(verify.replicate_seeds(cfg.seed, cfg.replicates)):
        series.append(verify.generic_series(WalkPath(src, seed), times, replicate=i))
    rep = verify.lil_band_check(
        series, (cfg.j_min, cfg.j_max), (cfg.band_lo, cfg.band_hi), cfg.band_frac,
        cfg.pooled_min, cfg.abs_bound, cfg.abs_frac,
    )
    rows = [
        _row(cfg, s.source, s.replicate, s.checkpoint[k], s.n[k], s.raw[k], s.centering[k], s.z[k], s.ell[k], ok=rep.passed)
        for s in series
        for k in range(len(s))
    ]
    return rows, [rep]


def run_lil(cfg):
    if cfg.eta:
        return _generic_lil(cfg)
    traces = _traces(cfg)
    series = verify.trace_series(traces)
    band = verify.lil_band_check(
        series, (cfg.j_min, cfg.j_max), (cfg.band_lo, cfg.band_hi), cfg.band_frac,
        cfg.pooled_min, cfg.abs_bound, cfg.abs_frac,
    )
    approx = verify.approx_check(traces, cfg.j_min, cfg.j_max)
    return _trace_rows(cfg, traces, series, band.passed), [band, approx]


def run_coverage(cfg):
    traces = _traces(cfg)
    series = verify.trace_series(traces)
    rep = verify.limit_point_coverage(series, cfg.grid_step, cfg.delta, (max(3, cfg.j_min), cfg.j_max))
    return _trace_rows(cfg, traces, series, rep.passed), [rep]


def run_approx(cfg):
    traces = _traces(cfg)
    rep = verify.approx_check(traces, cfg.j_min, cfg.j_max)
    law = parse_law(cfg.law)
    series = verify.trace_series(traces) if law.lil_eligible else None
    return _trace_rows(cfg, traces, series, rep.passed), [rep]


def run_trace_dump(cfg):
    traces = _traces(cfg)
    law = parse_law(cfg.law)
    series = verify.trace_series(traces) if law.lil_eligible else None
    return _trace_rows(cfg, traces, series, True), []


def run_moments(cfg):
    law = parse_law(cfg.law)
    pairs = [(cfg.y0 + g, cfg.y0) for g in _ints(cfg.gaps)]
    rep_n = verify.moment_ratio(law, pairs, cfg.replicates, cfg.seed, "N", cfg.ratio_bound, cfg.workers)
    lpairs = [(math.exp(cfg.log_y0 + g), math.exp(cfg.log_y0)) for g in _ints(cfg.log_gaps)]
    rep_r = verify.moment_ratio(law, lpairs, cfg.replicates, cfg.seed, "rho", cfg.ratio_bound, cfg.workers)
    rows = []
    for k, (x, y) in enumerate(pairs):
        rows.append(_row(cfg, law.name, -1, k, NAN, rep_n.detail["ratios"][k], a1=x, a2=y, a3=rep_n.detail["se"][k], ok=rep_n.passed))
    for k, (x, y) in enumerate(lpairs):
        rows.append(_row(cfg, law.name, -1, len(pairs) + k, NAN, rep_r.detail["ratios"][k], a1=x, a2=y, a3=rep_r.detail["se"][k], ok=rep_r.passed))
    return rows, [rep_n, rep_r]


def run_renewal_lil(cfg):
    rep, series = verify.renewal_lil(
        cfg.xi, cfg.n_exp, cfg.replicates, cfg.seed, (cfg.band_lo, cfg.band_hi), cfg.band_frac, cfg.workers
    )
    rows = [
        _row(cfg, s.source, s.replicate, s.checkpoint[k], s.n[k], s.raw[k], s.centering[k], s.z[k], s.ell[k], ok=rep.passed)
        for s in series
        for k in range(len(s))
    ]
    return rows, [rep]


def run_sup_lil(cfg):
    rep, rows_by_path = verify.sup_lil(
        cfg.xi, cfg.n_exp, cfg.replicates, cfg.seed, (cfg.band_lo, cfg.band_hi), workers=cfg.workers
    )
    src = rep.meta["source"]
    rows = [
        _row(cfg, src, r.replicate, r.j, r.n, r.sup_dev, ell=r.end_ell, a1=r.sup_stat, a2=r.sup_norm,
             ok=r.sup_norm >= abs(r.end_ell))
        for path_rows in rows_by_path
        for r in path_rows
    ]
    return rows, [rep]


def run_strassen(cfg):
    rep, out = verify.strassen_envelope(
        cfg.xi, cfg.n_exp, cfg.replicates, cfg.seed, cfg.grid_step, cfg.eps, cfg.max_frac, cfg.workers
    )
    t_grid = rep.detail["t_grid"]
    n = rep.meta["n"]
    rows = []
    for i, x, _ in out:
        for t, xt in zip(t_grid, x):
            env = math.sqrt(t) + cfg.eps
            rows.append(_row(cfg, rep.meta["source"], i, t, n * t, NAN, ell=xt, a1=env, a2=abs(xt) - env, ok=abs(xt) <= env))
    return rows, [rep]


RUNNERS: dict[str, Callable] = {
    "clt": run_clt,
    "lil": run_lil,
    "coverage": run_coverage,
    "approx": run_approx,
    "moments": run_moments,
    "renewal-lil": run_renewal_lil,
    "sup-lil": run_sup_lil,
    "strassen": run_strassen,
    "trace-dump": run_trace_dump,
}
