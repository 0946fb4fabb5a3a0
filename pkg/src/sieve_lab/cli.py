"""Command line entry point: ``sieve-lab <experiment> [flags]``.

Settings resolve as experiment defaults < ``--config FILE`` < explicit flags.
Exit status: 0 when every check passes, 1 when any check fails, 2 on a
configuration or budget error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import math
import sys
from dataclasses import fields

from . import __version__
from .config import EXPERIMENTS, FIELD_TYPES, ConfigError, ExperimentConfig, convert, emit, load, resolved
from .experiments import HEADER, RUNNERS, BudgetError
from .kernels import BACKEND
from .laws import IneligibleLawError, LawSpecError
from .seeding import entropy_seed

_HELP = {
    "law": "W law: uniform | beta:a,b | twopoint:w1,w2,p | det:w",
    "xi": "step law for renewal experiments (exp:1, gamma:k,s, unif:a,b, const:c) or a W law",
    "eta": "perturbation law; when set, lil runs on a generic perturbed walk",
    "seed": "master seed (0 = draw from OS entropy and record it)",
    "replicates": "replicates (alias --paths)",
    "workers": "worker processes (0 = $SIEVE_LAB_WORKERS or 1)",
    "out": "CSV output path (default <experiment>.csv)",
    "method": "ball allocation: balls | binomial",
}


_RENEWAL = ("renewal-lil", "sup-lil", "strassen")


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return "nan" if math.isnan(v) else format(v, ".17g")
    if hasattr(v, "dtype"):  # numpy scalar
        return _fmt(v.item())
    return str(v)


def write_csv(rows, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(HEADER)
    for r in rows:
        w.writerow([_fmt(v) for v in r])


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sieve-lab", description="Bernoulli sieve simulation and limit-theorem checks")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernels)")
    sub = p.add_subparsers(dest="experiment", required=True, metavar="EXPERIMENT")
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, argument_default=argparse.SUPPRESS)
        sp.add_argument("--config", metavar="FILE", help="key=value config file")
        sp.add_argument("--print-config", action="store_true", help="print the resolved config and exit")
        for f in fields(ExperimentConfig):
            if f.name == "experiment":
                continue
            flags = ["--" + f.name.replace("_", "-")]
            if f.name == "replicates":
                flags.append("--paths")
            sp.add_argument(*flags, dest=f.name, metavar=FIELD_TYPES[f.name].__name__.upper(), help=_HELP.get(f.name))
    return p


def make_config(argv) -> ExperimentConfig:
    args = vars(build_parser().parse_args(argv))
    experiment = args.pop("experiment")
    values = load(args.pop("config")) if "config" in args else {}
    values.pop("experiment", None)
    args.pop("print_config", None)
    for key, text in args.items():
        values[key] = convert(key, text)
    return resolved(ExperimentConfig(experiment=experiment, **values))


def execute(cfg: ExperimentConfig):
    """``(cfg, rows, reports)``; a zero seed is replaced by the entropy seed actually used."""
    if cfg.seed == 0:
        cfg = dataclasses.replace(cfg, seed=entropy_seed())
    rows, reports = RUNNERS[cfg.experiment](cfg)
    return cfg, rows, reports


def run(cfg: ExperimentConfig, stdout=None) -> int:
    """Execute ``cfg``, write its CSV, print the summary; return the exit status."""
    stdout = stdout or sys.stdout
    cfg, rows, reports = execute(cfg)
    out = cfg.out or f"{cfg.experiment}.csv"
    buf = io.StringIO()
    write_csv(rows, buf)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())
    what = f"xi={cfg.xi}" if cfg.experiment in _RENEWAL else f"law={cfg.law}"
    print(f"# sieve-lab {cfg.experiment} {what} seed={cfg.seed} backend={BACKEND}", file=stdout)
    for rep in reports:
        print(rep.summary(), file=stdout)
    ok = all(rep.passed for rep in reports)
    print(f"# {len(rows)} rows -> {out}; overall {'PASS' if ok else 'FAIL'}", file=stdout)
    return 0 if ok else 1


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = make_config(argv)
        if "--print-config" in argv:
            sys.stdout.write(emit(cfg))
            return 0
        return run(cfg)
    except (ConfigError, BudgetError, LawSpecError, IneligibleLawError, OSError) as exc:
        print(f"sieve-lab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
