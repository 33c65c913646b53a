import csv
import io
import json
import math
import os
import random
import subprocess
import sys

import numpy as np
import pytest

from e2ev import constants
from e2ev.sim import (
    CHANNEL_CHALLENGE,
    CHANNEL_RECEIPT,
    CHANNEL_VERIFIER,
    CSV_COLUMNS,
    HAVE_NUMBA,
    SimConfig,
    SweepConfig,
    defamation_pipeline,
    estimate_defamation,
    estimate_detection,
    run_election,
    sweep,
    to_csv,
    wilson_interval,
)
from e2ev.sim import kernels
from e2ev.sim.__main__ import main as sim_main

from conftest import build_election

BACKENDS = ["numpy"] + (["numba"] if HAVE_NUMBA else [])


def small(**kw):
    base = dict(n_voters=12, n_trustees=1, trials=100)
    base.update(kw)
    return SimConfig(**base)


# --- config ---


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(q=1.5)
    with pytest.raises(ValueError):
        SimConfig(n_voters=0)
    with pytest.raises(ValueError):
        SimConfig(trials=0)
    with pytest.raises(ValueError):
        SimConfig(method="magic")
    with pytest.raises(ValueError):
        SimConfig.from_dict({"n_voters": 5, "bogus": 1})


def test_analytic_values():
    assert SimConfig(n_voters=100, q=0.2, f=0.1).analytic_challenge() == pytest.approx(0.867, abs=5e-4)
    assert SimConfig(n_voters=1000, q=0.05, f=0.05).analytic_challenge() == pytest.approx(0.918, abs=5e-4)
    assert SimConfig(n_voters=100, rho=0.5, d=0.02).analytic_receipt() == pytest.approx(1 - 0.99**100)
    assert SimConfig(n_voters=1000, q=0.0, f=1.0).analytic_challenge() == 0.0


# --- single pipeline trials ---


def test_honest_run():
    out = run_election(small(q=0.5, rho=0.5), seed=1)
    assert not out.detected and out.verdict == "PASS" and out.tally_error == 0
    assert out.counts == out.truth


def test_full_cheat_caught_by_challenge():
    out = run_election(small(q=1.0, f=1.0), seed=2)
    assert out.detected and CHANNEL_CHALLENGE in out.channels
    assert out.caught == out.challenged == 12
    assert CHANNEL_VERIFIER in out.channels and out.verdict == "FAIL"


def test_full_drop_caught_by_receipt():
    out = run_election(small(rho=1.0, d=1.0), seed=3)
    assert out.channels == (CHANNEL_RECEIPT,)
    assert out.receipt_alarms == out.dropped == 12
    assert out.counts == (0, 0, 0) and out.tally_error == 12


def test_reproducible_bytes():
    cfg = small(q=0.3, rho=0.3, f=0.2, d=0.1)
    assert run_election(cfg, 44).to_bytes() == run_election(cfg, 44).to_bytes()
    assert run_election(cfg, 44).to_bytes() != run_election(cfg, 45).to_bytes()


def test_honest_soundness_many_trials():
    cfg = small(n_voters=6, q=0.3, rho=0.5)
    for seed in range(40):
        out = run_election(cfg, seed)
        assert out.verdict == "PASS" and out.tally_error == 0 and not out.detected


def test_undetected_cheat_conservation():
    """With no drops, an undetected run's tally error is exactly the flipped count."""
    cfg = small(q=0.1, f=0.3)
    seen = 0
    for seed in range(40):
        out = run_election(cfg, seed)
        if not out.detected:
            assert out.tally_error == out.flipped == out.votes_shifted
            seen += out.flipped > 0
        # detected implies a named channel
        assert out.detected == bool(out.channels)
        assert sum(out.counts) == sum(out.truth) - out.dropped
    assert seen > 0


# --- kernels and estimates ---


@pytest.mark.parametrize("backend", BACKENDS)
def test_detection_target(backend):
    est = estimate_detection(SimConfig(n_voters=100, q=0.2, f=0.1, trials=10_000, seed=1), backend)
    assert est.analytic == pytest.approx(0.8674, abs=1e-4)
    assert est.deviation <= 0.03
    assert est.ci[0] <= est.empirical <= est.ci[1]
    assert est.backend == backend


@pytest.mark.parametrize("backend", BACKENDS)
def test_no_false_positives(backend):
    for kw in (dict(q=0.0, f=1.0), dict(q=1.0, f=0.0), dict(rho=0.0, d=1.0)):
        est = estimate_detection(SimConfig(n_voters=200, trials=500, **kw), backend)
        assert est.empirical == 0.0 and est.empirical_receipt == 0.0


@pytest.mark.parametrize("backend", BACKENDS)
def test_kernel_reproducible(backend):
    a = kernels.detection_trials(50, 0.3, 0.2, 0.1, 0.05, 300, 9, backend)
    b = kernels.detection_trials(50, 0.3, 0.2, 0.1, 0.05, 300, 9, backend)
    assert a.shape == (300, kernels.N_COLUMNS) and np.array_equal(a, b)
    # structural invariants per trial
    assert np.all(a[:, kernels.CAUGHT] <= a[:, kernels.CHALLENGED])
    assert np.all(a[:, kernels.RECEIPT_ALARMS] <= a[:, kernels.DROPPED])
    assert np.all(a[:, kernels.DROPPED] + a[:, kernels.FLIPPED] <= 50)


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba unavailable")
def test_backends_agree_in_distribution():
    cfg = dict(n_voters=60, q=0.1, rho=0.3, f=0.2, d=0.05, trials=20_000, seed=5)
    a = kernels.detection_trials(backend="numba", **cfg).mean(axis=0)
    b = kernels.detection_trials(backend="numpy", **cfg).mean(axis=0)
    # expected per-trial column means
    expect = np.array([60 * 0.1 * 0.2, 60 * 0.05 * 0.3, 60 * 0.1, 60 * 0.05, 60 * 0.95 * 0.2])
    for col in range(kernels.N_COLUMNS):
        sd = math.sqrt(expect[col]) / math.sqrt(cfg["trials"])
        assert abs(a[col] - expect[col]) < 5 * sd + 1e-9
        assert abs(b[col] - expect[col]) < 5 * sd + 1e-9


def test_kernel_rejects_unknown_backend():
    with pytest.raises(ValueError):
        kernels.detection_trials(5, 0.1, 0, 0.1, 0, 10, 0, "fortran")


def test_pipeline_method_matches_model():
    cfg = SimConfig(n_voters=10, q=0.3, f=0.3, trials=100, seed=3, n_trustees=1, method="pipeline")
    est = estimate_detection(cfg)
    assert est.method == "pipeline" and est.backend == "pipeline"
    p = est.analytic
    assert abs(est.empirical - p) <= 3 * math.sqrt(p * (1 - p) / cfg.trials)
    with pytest.raises(ValueError):
        estimate_detection(SimConfig(trials=99))


def test_wilson_interval():
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi and hi - lo == pytest.approx(0.19, abs=0.01)
    assert wilson_interval(0, 100)[0] == 0.0


# --- sweep ---


def test_sweep_rows_and_fit():
    grid = SweepConfig(N=(50, 200, 1000), q=(0.0, 0.02, 0.05), f=(0.0, 0.05, 0.2), trials=2000, seed=4)
    rows = sweep(grid)
    assert len(rows) == 27
    for row in rows:
        p = float(row["analytic_challenge"])
        emp = float(row["empirical_challenge"])
        if row["q"] * row["f"] == 0:
            assert p == 0.0 and emp == 0.0
        assert abs(emp - p) <= 3 * math.sqrt(p * (1 - p) / row["trials"]) + 1e-12
    cell = next(r for r in rows if (r["N"], r["q"], r["f"]) == (1000, 0.05, 0.05))
    assert float(cell["analytic_challenge"]) == pytest.approx(0.918, abs=5e-4)
    assert sweep(grid) == rows


def test_sweep_analytic_monotone():
    grid = SweepConfig(N=(10, 100, 1000), q=(0.01, 0.1, 0.5), f=(0.01, 0.1, 0.5), trials=100)
    table = {(c.n_voters, c.q, c.f): c.analytic_challenge() for c in grid.cells()}
    for (n, q, f), v in table.items():
        for key in ((n * 10, q, f), (n, q * 10, f), (n, q, f * 10), (n, q * 5, f), (n, q, f * 5)):
            if key in table:
                assert table[key] >= v


def test_csv_columns():
    rows = sweep(SweepConfig(N=(10,), q=(0.1,), f=(0.1,), trials=100))
    text = to_csv(rows)
    assert text.splitlines()[0] == ",".join(CSV_COLUMNS)
    parsed = list(csv.DictReader(io.StringIO(text)))
    assert parsed[0]["N"] == "10" and len(parsed) == 1


def test_sweep_config_validation():
    with pytest.raises(ValueError):
        SweepConfig.from_dict({"grid": {"N": [1], "zeta": [1]}})
    with pytest.raises(ValueError):
        SweepConfig.from_dict({"grid": {"N": [1]}, "oops": 1})
    with pytest.raises(ValueError):
        SweepConfig(N=(), q=(0.1,), f=(0.1,)).cells()


# --- defamation ---


@pytest.mark.parametrize("backend", BACKENDS)
def test_defamation_kernel(backend):
    est = estimate_defamation(1000, 10_000, 2, backend)
    assert est.expected == pytest.approx(1000 / 676)
    assert abs(est.mean - est.expected) <= 0.3
    # rate within 3 sigma of 1/676 over 10^7 guesses
    n = 1000 * 10_000
    p = 1 / 676
    assert abs(est.per_claim_rate - p) <= 3 * math.sqrt(p * (1 - p) / n)


def test_defamation_pipeline(toy):
    el, _ = build_election(toy, [0, 1, 2], seed=8, receipt_mode=constants.RECEIPT_CODE_ONLY)
    r = random.Random(1)
    hits = [defamation_pipeline(el, 1000, r) for _ in range(12)]
    assert abs(np.mean(hits) - 1000 / 676) < 1.5


# --- CLI ---


def test_sim_cli_run_and_sweep(tmp_path):
    cfg = tmp_path / "sim.json"
    cfg.write_text(json.dumps({"n_voters": 100, "q": 0.2, "f": 0.1, "trials": 1000, "seed": 1}))
    out = tmp_path / "run.csv"
    assert sim_main(["run", "--config", str(cfg), "--out", str(out), "--backend", "numpy"]) == 0
    row = next(csv.DictReader(out.open()))
    assert row["analytic_challenge"] == "0.867380"
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({"grid": {"N": [100, 1000], "q": [0.05], "f": [0.05]}, "trials": 200, "seed": 2}))
    assert sim_main(["sweep", "--config", str(grid), "--out", str(tmp_path / "s.csv")]) == 0
    assert len((tmp_path / "s.csv").read_text().splitlines()) == 3
    cfg.write_text(json.dumps({"q": 2}))
    assert sim_main(["run", "--config", str(cfg)]) == 2


def test_numba_can_be_disabled(tmp_path):
    env = dict(os.environ, E2EV_NO_NUMBA="1")
    code = "from e2ev.sim import BACKEND, HAVE_NUMBA; print(BACKEND, HAVE_NUMBA)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["numpy", "False"]
