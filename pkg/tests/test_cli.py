import csv
import dataclasses
import math
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sieve_lab import cli, experiments
from sieve_lab.config import EXPERIMENTS, ConfigError, ExperimentConfig, emit, load, parse, resolved
from sieve_lab.parallel import WORKERS_ENV, map_ordered, resolve_workers
from sieve_lab.seeding import BALLS, seed_derive, stream
from sieve_lab.verify import CheckReport


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# -- config file ---------------------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(
    st.sampled_from(EXPERIMENTS),
    st.integers(0, 2**64 - 1),
    st.one_of(st.none(), st.integers(1, 10**6)),
    st.floats(allow_nan=False, allow_infinity=False),
    st.one_of(st.none(), st.floats(-10, 10)),
    st.text(alphabet="abc:,.0123456789", max_size=12),
)
def test_config_roundtrip(exp, seed, reps, ks, lo, law):
    cfg = ExperimentConfig(experiment=exp, seed=seed, replicates=reps, ks_bound=ks, band_lo=lo, law=law)
    assert parse(emit(cfg)) == cfg


def test_every_field_has_default():
    cfg = ExperimentConfig()
    assert parse(emit(cfg)) == cfg
    for exp in EXPERIMENTS:
        r = resolved(ExperimentConfig(experiment=exp))
        assert r.replicates is not None


def test_config_errors_carry_line_numbers(tmp_path):
    f = tmp_path / "c.cfg"
    f.write_text("# comment\nlaw=uniform\nseed=abc\n")
    with pytest.raises(ConfigError, match=r"c.cfg:3"):
        load(str(f))
    f.write_text("law uniform\n")
    with pytest.raises(ConfigError, match=r":1: expected key=value"):
        load(str(f))
    with pytest.raises(ConfigError):
        ExperimentConfig(experiment="nope")
    with pytest.raises(ConfigError):
        ExperimentConfig(seed=-1)


def test_precedence(tmp_path):
    f = tmp_path / "c.cfg"
    f.write_text("replicates=7\nseed=3\nband_lo=0.2\n")
    cfg = cli.make_config(["lil", "--config", str(f), "--paths", "9"])
    assert cfg.replicates == 9  # flag beats file
    assert cfg.seed == 3  # file beats default
    assert cfg.band_lo == 0.2
    assert cfg.band_hi == 1.3  # experiment default
    assert cfg.j_max == 18


def test_workers_env(monkeypatch):
    monkeypatch.setenv(WORKERS_ENV, "3")
    assert resolve_workers(0) == 3
    assert resolve_workers(2) == 2
    monkeypatch.delenv(WORKERS_ENV)
    assert resolve_workers(None) == 1


def test_map_ordered_worker_independent():
    items = list(range(23))
    assert map_ordered(math.factorial, items, 1) == map_ordered(math.factorial, items, 3)


# -- running -----------------------------------------------------------------------------------


def test_trace_dump_dyadic_csv(tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert cli.main(["trace-dump", "--law", "det:0.5", "--j-max", "3", "--seed", "5", "--out", str(out)]) == 0
    rows = read_rows(out)
    assert [r["n"] for r in rows] == ["2", "7", "20"]
    e = stream(seed_derive(5, 0), BALLS).standard_exponential(20)
    boxes = np.floor(e / math.log(2)).astype(int) + 1
    assert [int(r["raw"]) for r in rows] == [len(set(boxes[:n])) for n in (2, 7, 20)]
    assert "overall PASS" in capsys.readouterr().out


def test_csv_header_and_float_format(tmp_path):
    out = tmp_path / "m.csv"
    cli.main(["moments", "--replicates", "50", "--seed", "2", "--out", str(out)])
    text = out.read_text()
    assert text.splitlines()[0] == ",".join(experiments.HEADER)
    row = read_rows(out)[0]
    v = float(row["raw"])
    assert row["raw"] == format(v, ".17g")
    assert row["pass"] in ("0", "1")


def test_clt_byte_identical_and_worker_independent(tmp_path):
    args = ["clt", "--law", "uniform", "--n-exp", "6", "--replicates", "600", "--seed", "42"]
    outs = []
    for w in ("1", "1", "2"):
        f = tmp_path / f"c{len(outs)}.csv"
        cli.main(args + ["--workers", w, "--out", str(f)])
        outs.append(f.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_entropy_seed_recorded(tmp_path, capsys):
    out = tmp_path / "e.csv"
    cli.main(["trace-dump", "--j-max", "2", "--out", str(out)])
    seeds = {r["seed"] for r in read_rows(out)}
    assert len(seeds) == 1
    seed = int(seeds.pop())
    assert seed != 0
    assert f"seed={seed}" in capsys.readouterr().out


def test_exit_status_reflects_checks(monkeypatch, tmp_path):
    def fake(passed):
        return lambda cfg: ([], [CheckReport("x", {}, {}, p) for p in passed])

    out = str(tmp_path / "x.csv")
    monkeypatch.setitem(experiments.RUNNERS, "approx", fake([True, True]))
    assert cli.main(["approx", "--seed", "1", "--out", out]) == 0
    monkeypatch.setitem(experiments.RUNNERS, "approx", fake([True, False]))
    assert cli.main(["approx", "--seed", "1", "--out", out]) == 1


def test_error_exits(tmp_path, capsys):
    bad = tmp_path / "b.cfg"
    bad.write_text("seed=1\nbogus=2\n")
    assert cli.main(["lil", "--config", str(bad)]) == 2
    assert "b.cfg:2" in capsys.readouterr().err
    assert cli.main(["lil", "--j-max", "30", "--paths", "1", "--seed", "1"]) == 2
    assert "budget" in capsys.readouterr().err
    assert cli.main(["clt", "--law", "det:0.5", "--seed", "1"]) == 2
    assert cli.main(["clt", "--law", "gauss", "--seed", "1"]) == 2


def test_print_config(capsys):
    assert cli.main(["strassen", "--seed", "4", "--print-config"]) == 0
    cfg = parse(capsys.readouterr().out)
    assert cfg.experiment == "strassen" and cfg.seed == 4 and cfg.grid_step == 0.01


def test_module_entry_point(tmp_path):
    out = tmp_path / "t.csv"
    r = subprocess.run(
        [sys.executable, "-m", "sieve_lab", "trace-dump", "--j-max", "2", "--seed", "3", "--out", str(out)],
        capture_output=True, text=True,
    )
    assert r.returncode == 0 and out.exists()


@pytest.mark.parametrize(
    "argv",
    [
        ["renewal-lil", "--n-exp", "8", "--paths", "4"],
        ["sup-lil", "--n-exp", "8", "--paths", "4"],
        ["strassen", "--n-exp", "8", "--paths", "4"],
        ["coverage", "--j-max", "8", "--paths", "3"],
        ["approx", "--j-max", "8", "--paths", "3", "--j-min", "3"],
        ["lil", "--eta", "exp:1", "--j-max", "8", "--paths", "3"],
        ["lil", "--j-max", "8", "--paths", "3", "--method", "binomial"],
    ],
)
def test_every_experiment_runs(tmp_path, argv):
    out = tmp_path / "o.csv"
    status = cli.main(argv + ["--seed", "11", "--out", str(out)])
    assert status in (0, 1)
    rows = read_rows(out)
    assert rows and all(r["experiment"] == argv[0] for r in rows)
    keys = [(int(r["replicate"]), float(r["checkpoint"])) for r in rows]
    assert keys == sorted(keys)
