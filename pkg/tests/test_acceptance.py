"""Acceptance suite: one test (or a few sub-tests) per criterion.

Run ``pytest tests/test_acceptance.py -v``; the terminal summary ends with one
PASS/FAIL line per criterion.
"""

import json
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from synthetic import speaker_corpus
from termselect.axioms import (
    Property,
    check_property,
    random_vector,
    run_curve_checks,
    run_axiom_suite,
    transfer,
    trial_rng,
)
from termselect.cutoff import CutoffSpec, cutoff_at, cutoff_rc, cutoff_vt, similarity_curve
from termselect.retrieval import EvalConfig, holdout_evaluate

criterion = pytest.mark.criterion

L1 = [10, 7, 5, 3, 2, 1]
L2 = [1.0, 0.7, 0.5, 0.3, 0.2, 0.1]
L3 = [2.0, 1.7, 1.5, 1.3, 1.2, 1.1]


# --- 1 ------------------------------------------------------------------------


@criterion("1", "worked examples: AT/VT cutoffs on L1-L4, exact, < 1 s")
def test_worked_examples():
    start = time.perf_counter()
    L4, _ = transfer(L2, 3, 4, 0.1)
    assert np.allclose(L4, [1.0, 0.7, 0.5, 0.4, 0.1, 0.1])
    got = (
        cutoff_at(L1, 4),
        cutoff_at(L2, 4),
        cutoff_vt(L1, 40),
        cutoff_vt(L2, 40),
        cutoff_vt(L3, 40),
        cutoff_vt(L4, 40),
    )
    elapsed = time.perf_counter() - start
    assert got == (3, 0, 3, 3, 6, 4)
    assert elapsed < 1.0


# --- 2 ------------------------------------------------------------------------

SUITES = {"SC": CutoffSpec("sc", 95), "VT": CutoffSpec("vt", 40), "RC": CutoffSpec("rc", 40), "FP": CutoffSpec("fp", 50)}


@pytest.fixture(scope="module")
def pattern_reports():
    start = time.perf_counter()
    reports = {name: run_axiom_suite(spec, 1000, rng_seed=42) for name, spec in SUITES.items()}
    return reports, time.perf_counter() - start


def _failures(report, *props):
    return {p: report.properties[Property.parse(p)].failures for p in props}


@criterion("2", "expected pattern / SC: P1-P5, P7, wP6 hold; strict P6 has a counterexample")
def test_pattern_sc(pattern_reports):
    sc = pattern_reports[0]["SC"]
    assert _failures(sc, "P1", "P2", "P3", "P4", "P5", "P7", "wP6") == dict.fromkeys(
        ["P1", "P2", "P3", "P4", "P5", "P7", "wP6"], 0
    )
    assert sc.properties[Property.P6].failures >= 1


@criterion("2", "expected pattern / VT: P1-P5, P7 hold; P6 fails")
def test_pattern_vt(pattern_reports):
    vt = pattern_reports[0]["VT"]
    assert _failures(vt, "P1", "P2", "P3", "P4", "P5", "P7") == dict.fromkeys(["P1", "P2", "P3", "P4", "P5", "P7"], 0)
    assert vt.properties[Property.P6].failures >= 1


@criterion("2", "expected pattern / RC: P3 fails; P1, P4, P5, P7 hold")
def test_pattern_rc(pattern_reports):
    rc = pattern_reports[0]["RC"]
    assert rc.properties[Property.P3].failures >= 1
    assert _failures(rc, "P1", "P4", "P5", "P7") == dict.fromkeys(["P1", "P4", "P5", "P7"], 0)


@criterion("2", "expected pattern / RC: P2 holds")
def test_pattern_rc_p2(pattern_reports):
    # Strict '>' makes a flat vector select nothing, so the flat vector can never
    # give the largest cutoff. Left failing on purpose; see the decisions notes.
    rc = pattern_reports[0]["RC"]
    assert rc.properties[Property.P2].failures == 0, rc.properties[Property.P2].counterexample


@criterion("2", "expected pattern / FP: P3 fails on the {5,4,3}+zeros witness")
def test_pattern_fp(pattern_reports):
    fp = pattern_reports[0]["FP"]
    assert fp.properties[Property.P3].failures >= 1
    verdict = check_property(SUITES["FP"], "P3", [5, 4, 3], {"k": 2})
    assert not verdict.holds
    assert (verdict.witness["before"], verdict.witness["after"]) == (2, 3)


@criterion("2", "expected pattern: four suites x 1000 trials in < 30 s")
def test_pattern_runtime(pattern_reports):
    assert pattern_reports[1] < 30


# --- 3 ------------------------------------------------------------------------


@criterion("3", "cosine-curve lemmas (shift, weak transfer, enrich top): zero violations in 1000 trials")
def test_curve_lemmas():
    report = run_curve_checks(1000, rng_seed=42)
    assert report.violations["shift"] == 0, report.first_violation
    assert report.violations["weak-transfer"] == 0, report.first_violation
    assert report.violations["enrich-top"] == 0, report.first_violation


# --- 4 ------------------------------------------------------------------------


def _full_cosine_prefixes(w):
    """Cosine of each zero-padded prefix with the whole vector, built explicitly."""
    n = w.size
    prefixes = np.tril(np.ones((n, n))) * w  # row i keeps w_1..w_{i+1}, zeros after
    dots = prefixes @ w
    return dots / (np.linalg.norm(prefixes, axis=1) * np.linalg.norm(w))


@criterion("4", "SC similarity equals the full cosine of the padded prefix (1e-12, 10k vectors)")
def test_sc_oracle():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(10_000):
        n = int(rng.integers(1, 501))
        kind = rng.integers(4)
        if kind == 0:
            w = rng.uniform(1e-3, 1.0, n)
        elif kind == 1:
            w = rng.exponential(size=n) + 1e-9
        elif kind == 2:
            w = np.minimum(rng.zipf(1.1, n), 1e9).astype(float)
        else:
            w = rng.integers(1, 20, n).astype(float)
        w = np.sort(w)[::-1]
        worst = max(worst, float(np.max(np.abs(similarity_curve(w) - _full_cosine_prefixes(w)))))
    assert worst <= 1e-12, worst


# --- 5 ------------------------------------------------------------------------


@criterion("5", "RC equals VT when the minimum weight is 0 (1000 vectors, off ties)")
def test_rc_equals_vt():
    mismatches = 0
    for t in range(1000):
        rng = trial_rng(5, t)
        v = random_vector(rng)
        v[-1] = 0.0
        per = float(rng.uniform(1, 99))
        # nudge the threshold until no weight sits within 1e-9 (relative) of it
        while np.any(np.abs(v - v[0] * per / 100) <= 1e-9 * v[0]):
            per = float(rng.uniform(1, 99))
        if cutoff_rc(v, per) != cutoff_vt(v, per):
            mismatches += 1
    assert mismatches == 0


# --- 6 ------------------------------------------------------------------------


@pytest.fixture(scope="module")
def retrieval_runs():
    start = time.perf_counter()
    cfg = dict(cutoff=CutoffSpec("sc", 95), seed=0)
    disjoint = holdout_evaluate(speaker_corpus(0.0, seed=0), EvalConfig(measure="diff", **cfg))
    overlap = speaker_corpus(0.5, seed=0)
    diff = holdout_evaluate(overlap, EvalConfig(measure="diff", **cfg))
    ppmi = holdout_evaluate(overlap, EvalConfig(measure="ppmi", **cfg))
    return {"disjoint": disjoint, "diff": diff, "ppmi": ppmi}, time.perf_counter() - start


@criterion("6", "retrieval: disjoint vocabularies, Diff + SC(95) NDCG@10 >= 0.95")
def test_retrieval_disjoint(retrieval_runs):
    runs = retrieval_runs[0]
    print(f"disjoint Diff+SC95 NDCG@10 = {runs['disjoint'].grand_mean:.4f}")
    assert runs["disjoint"].grand_mean >= 0.95


@criterion("6", "retrieval: 50% overlap, NDCG@10 Diff >= PPMI")
def test_retrieval_overlap_direction(retrieval_runs):
    runs = retrieval_runs[0]
    d, p = runs["diff"].grand_mean, runs["ppmi"].grand_mean
    print(f"overlap 50% SC95 NDCG@10: diff = {d:.4f}, ppmi = {p:.4f}")
    assert d >= p, f"Diff {d:.4f} < PPMI {p:.4f}"


@criterion("6", "retrieval: runtime < 60 s")
def test_retrieval_runtime(retrieval_runs):
    assert retrieval_runs[1] < 60


# --- 7 ------------------------------------------------------------------------


@criterion("7", "absolute NDCG / size values of the parliamentary dataset")
def test_non_reproducible():
    pytest.skip("depends on a dataset and preprocessing that are not available; replaced by criteria 1-6")


# --- 8 ------------------------------------------------------------------------


def _run_cli(args, hashseed):
    env = {**os.environ, "PYTHONHASHSEED": str(hashseed)}
    return subprocess.run([sys.executable, "-m", "termselect.cli", *args], env=env, capture_output=True, text=True)


@criterion("8", "determinism: every subcommand rerun gives byte-identical files")
def test_cli_determinism(tmp_path):
    records = tmp_path / "records.jsonl"
    with open(records, "w", encoding="utf-8") as fh:
        for r in speaker_corpus(0.5, n_initiatives=40):
            fh.write(json.dumps(r.__dict__) + "\n")
    config = tmp_path / "eval.json"
    config.write_text(json.dumps({
        "records": str(records), "measure": "diff", "cutoff": {"kind": "sc", "param": 95},
        "seed": 7, "min_initiatives": 0, "repetitions": 2,
    }))

    def pipeline(out, hashseed):
        coll = str(out / "collection.json")
        steps = [
            ["ingest", str(records), "--out", str(out)],
            ["profile", coll, "--measure", "ppmi", "--cutoff", "sc", "--param", "90", "--out", str(out)],
            ["analyze", coll, "--measure", "diff", "--out", str(out)],
            ["axioms", "--cutoff", "sc", "--param", "90", "--trials", "200", "--seed", "3", "--out", str(out)],
            ["evaluate", str(config), "--out", str(out)],
        ]
        for step in steps:
            proc = _run_cli(step, hashseed)
            assert proc.returncode == 0, proc.stderr
        return {p.name: p.read_bytes() for p in sorted(out.iterdir())}

    first = pipeline(tmp_path / "a", 1)
    second = pipeline(tmp_path / "b", 2)
    assert len(first) == 9
    assert first == second
