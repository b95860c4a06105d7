"""Acceptance suite: one recorded PASS/FAIL line per primary criterion."""

import json
import math
import os
import time

import numpy as np
import pytest

import depcost.evaluation.cv as cvmod
from conftest import SR, record_acceptance, sine
from depcost.audio import AudioClip, EnhancementConfig, logmmse_enhance
from depcost.cli.main import EXIT_OK, main
from depcost.errors import LeakageError
from depcost.evaluation import ccc, evaluate_cv, mae, rmse, ttest_two_sample, wilcoxon_signed_rank
from depcost.evaluation.folds import plan_subject_folds, subject_folds
from depcost.features import extract_conventional, f0_track, jitter_shimmer, load_manifest, zcr_track
from depcost.models import fit_family, forest_fit, grid_search, predict, svr_fit
from depcost.models.fnn import HIDDEN, init_params, param_count
from depcost.models.search import GridSearchPlan
from depcost.models.svr import svr_objectives
from depcost.preprocess import fit_standardizer, mrmr_select, selection_size, transform
from depcost.special import exp1
from depcost.synthesis import synth_vowel
from helpers import fnn_gradient_error, held_out_rmse, linear_task, svr_toy
from test_audio import noisy_sine, snr_db
from test_evaluation import (FIXED_VECTORS, WILCOXON_EXACT_CASES, fast_config,
                             py_ccc, py_mae, py_rmse, py_ttest, py_wilcoxon_exact, synthetic_table)
from test_preprocess import brute_force_order, duplicate_construction
from test_special import e1_quadrature

# wall-clock limit for one synthesize / extract / cross-validate pass
PIPELINE_LIMIT_S = 600.0


def clip_of(x):
    return AudioClip(np.asarray(x, dtype=float), SR)


def check(criterion, checks):
    """Record one line for ``criterion``; ``checks`` maps a label to a bool."""
    failed = [k for k, ok in checks.items() if not ok]
    record_acceptance(criterion, not failed, "failed: " + ", ".join(failed) if failed else
                      f"{len(checks)} checks")
    assert not failed, failed


def test_dsp_oracles():
    t0 = time.perf_counter()
    manifest = load_manifest()
    fv = extract_conventional(clip_of(synth_vowel(220, 2.0)), manifest)
    f0_mean = fv.values[manifest.index("F0_mean")]

    c = clip_of(synth_vowel(220, 2.0, vowel=None))
    periodic = jitter_shimmer(c, f0_track(c))
    jit = []
    for seed in range(3):
        c = clip_of(synth_vowel(220, 2.0, jitter=0.02, vowel=None, rng=np.random.default_rng(seed)))
        jit.append(jitter_shimmer(c, f0_track(c)).jitter_local)
    zcr_ok = all(abs(zcr_track(clip_of(sine(f, 1.0, phase=0.3))).values.mean() - 2 * f / SR)
                 <= 0.1 * 2 * f / SR for f in (150.0, 440.0, 1000.0, 2500.0))
    elapsed = time.perf_counter() - t0
    check("DSP oracles", {
        "F0_mean in [219, 221]": 219 <= f0_mean <= 221,
        "periodic jitter < 0.002": periodic.jitter_local < 0.002,
        "periodic shimmer < 0.002": periodic.shimmer_local < 0.002,
        "2% jitter in [0.01, 0.03]": all(0.01 <= j <= 0.03 for j in jit),
        "ZCR within 10% of 2f/sr": zcr_ok,
        "runtime < 10 s": elapsed < 10.0,
    })


def test_enhancement_and_e1():
    rng = np.random.default_rng(12345)
    cfg = EnhancementConfig()
    clean, noisy = noisy_sine(rng)
    out, gains = logmmse_enhance(AudioClip(noisy, SR), cfg, return_gains=True)
    gain_db = snr_db(clean, out.samples) - snr_db(clean, noisy)
    xs = [1e-8, 1e-3, 0.1, 0.5, 1.0, 2.5, 10.0, 40.0, 150.0]
    e1_ok = all(abs(exp1(x) - e1_quadrature(x)) <= 1e-8 * e1_quadrature(x) for x in xs)
    check("Enhancement and E1", {
        "SNR gain >= 3 dB": gain_db >= 3.0,
        "gains within [floor, 1]": gains.min() >= cfg.gain_floor - 1e-15 and gains.max() <= 1.0,
        "E1 within 1e-8 of quadrature": e1_ok,
    })


def test_standardization():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(60, 8)) * rng.uniform(1e-3, 1e3, 8) + rng.uniform(-1e4, 1e4, 8)
    X[:, 5] = 3.25
    Z = transform(fit_standardizer(X), X)
    live = np.arange(8) != 5
    check("Standardization", {
        "|mean| < 1e-9": np.all(np.abs(Z[:, live].mean(axis=0)) < 1e-9),
        "|std - 1| < 1e-9": np.all(np.abs(Z[:, live].std(axis=0) - 1) < 1e-9),
        "constant column maps to 0": np.all(Z[:, 5] == 0.0),
    })


def test_mrmr():
    dup_ok = True
    for seed in range(10):
        X, y = duplicate_construction(seed)
        sel = mrmr_select(X, y, 2 / 3)
        dup_ok &= sel.indices[0] in (0, 1) and sel.indices[1] == 2
    order_ok = True
    for seed in range(4):
        rng = np.random.default_rng(seed)
        y = rng.normal(size=40)
        X = rng.normal(size=(40, 5)) + np.outer(y, rng.uniform(-1, 1, 5))
        X[:, 3] = X[:, 1] + 0.3 * rng.normal(size=40)
        for scheme in ("difference", "quotient"):
            order_ok &= brute_force_order(X, y, 5, scheme) == [mrmr_select(X, y, 1.0, scheme=scheme).indices]
    rng = np.random.default_rng(0)
    size_ok = all(selection_size(p, 0.10) == math.ceil(0.10 * p) for p in (9, 10, 11, 158, 220, 8192))
    size_ok &= len(mrmr_select(rng.normal(size=(40, 158)), rng.normal(size=40), 0.10)) == 16
    check("mRMR", {
        "duplicate never second": dup_ok,
        "order matches brute force": order_ok,
        "|selected| = ceil(0.1 p)": size_ok,
    })


def test_models():
    rng = np.random.default_rng(12345)
    W, _ = init_params(4, (6, 5, 4, 3), rng)
    B = [rng.normal(0, 0.1, size=w.shape[1]) for w in W]
    grad_small = fnn_gradient_error(W, B, rng.normal(size=(5, 4)), rng.normal(size=5))
    W, _ = init_params(16, HIDDEN, rng)
    B = [rng.normal(0, 0.1, size=w.shape[1]) for w in W]
    grad_full = fnn_gradient_error(W, B, rng.normal(size=(5, 16)), rng.normal(size=5),
                                   per_tensor=40, rng=rng)

    X, y = svr_toy(0)
    m = svr_fit(X, y, C=1.0, gamma=0.5, epsilon=0.1)
    primal, dual = svr_objectives(m, X, y)

    X, y, Xt, yt = linear_task(0)
    forest = forest_fit(X, y, n_trees=3, seed=1)
    trees = [t.predict(Xt) for t in forest.trees]
    linear = {}
    for fam in ("svr", "forest", "fnn"):
        if fam == "svr":
            params = grid_search("svr", X, y, GridSearchPlan(), np.arange(len(y))).best_params
        else:
            params = {"n_trees": 300} if fam == "forest" else {}
        linear[fam] = held_out_rmse(predict(fit_family(fam, X, y, params, seed=0), Xt), yt)
    p = 16
    closed = sum(a * b + b for a, b in zip((p,) + HIDDEN, HIDDEN + (1,)))
    W, B = init_params(p)
    check("Models", {
        "FNN gradient error < 1e-4": max(grad_small, grad_full) < 1e-4,
        "SVR dual within [-C, C]": bool(np.all(np.abs(m.dual_coef) <= m.C + 1e-9)),
        "SVR primal-dual gap < 1e-2": 0 <= primal - dual + 1e-9 and primal - dual < 1e-2,
        "forest = mean of trees": np.array_equal(forest.predict(Xt), (trees[0] + trees[1] + trees[2]) / 3),
        "linear task RMSE <= 1.5 sigma": all(v <= 1.5 for v in linear.values()),
        "FNN parameter count": param_count(p) == closed == sum(w.size + b.size for w, b in zip(W, B)),
    })


def test_cv_protocol(monkeypatch):
    rng = np.random.default_rng(4)
    subjects = [f"s{i:02d}" for i in range(37) for _ in range(rng.integers(1, 6))]
    folds = subject_folds(subjects, [rng.integers(0, 25) for _ in subjects], k=5, seed=0)
    disjoint = all({s for s, g in zip(subjects, folds) if g != f}.isdisjoint(
        {s for s, g in zip(subjects, folds) if g == f}) for f in range(5))

    table, meta, _ = synthetic_table(0, n_subjects=20)
    res = evaluate_cv(table, meta, "forest", fast_config("separate"))
    once = (sum(r["n_test"] for r in res.fold_rows) == len(meta)
            and res.sample_ids == [m.sample_id for m in meta] and bool(np.all(res.fold >= 0)))

    scores = [2] * 50 + [7] * 30 + [12] * 15 + [20] * 5
    plan = plan_subject_folds([f"s{i:03d}" for i in range(100)], scores, k=5, seed=11)
    glob = np.array([50, 30, 15, 5]) / 100
    props = plan.bin_counts / plan.bin_counts.sum(axis=1, keepdims=True)

    real = cvmod.split_indices

    def leaky(fold_of, f):
        train, test = real(fold_of, f)
        return np.r_[train, test[:1]], test

    monkeypatch.setattr(cvmod, "split_indices", leaky)
    try:
        evaluate_cv(table, meta, "forest", fast_config())
        tripped = False
    except LeakageError:
        tripped = True
    check("CV protocol", {
        "folds subject-disjoint": disjoint,
        "each sample predicted once": once,
        "bin proportions within 10%": bool(np.all(np.abs(props - glob) <= 0.10 * glob + 1e-12)),
        "leakage guard trips": tripped,
    })


def test_statistics():
    a = np.array([0.5, -1.0, 2.0, 3.5, -0.25])
    ok_metrics = all(abs(rmse(x, y) - py_rmse(x, y)) <= 1e-9 and abs(mae(x, y) - py_mae(x, y)) <= 1e-9
                     and abs(ccc(x, y) - py_ccc(x, y)) <= 1e-9 for x, y in FIXED_VECTORS)
    ok_t = True
    for x, y in FIXED_VECTORS:
        r = ttest_two_sample(x, y)
        t, df, p = py_ttest(x, y)
        ok_t &= r.df == df and abs(r.t - t) <= 1e-9 and abs(r.p - p) <= 1e-6
    ok_w = True
    for x, y in WILCOXON_EXACT_CASES:
        r = wilcoxon_signed_rank(x, y)
        W, p = py_wilcoxon_exact(x, y)
        ok_w &= abs(r.W - W) <= 1e-9 and abs(r.p - p) <= 1e-6
    check("Statistics", {
        "CCC(a, a) = 1": abs(ccc(a, a) - 1.0) <= 1e-12,
        "RMSE/MAE/CCC match definitions": ok_metrics,
        "t-test matches definition": ok_t,
        "Wilcoxon matches enumeration": ok_w,
    })


# ---------------------------------------------------------------- end to end

def pipeline(root, coupling, deep):
    """Synthesize, extract and cross-validate one shipped-size corpus; returns (seconds, run dir)."""
    corpus, run = os.path.join(root, f"corpus{coupling}"), os.path.join(root, f"run{coupling}")
    t0 = time.perf_counter()
    argv = ["synth", "--coupling", str(coupling), "--out", corpus] + ([] if deep else ["--no-deep"])
    assert main(argv) == EXIT_OK
    cfg = os.path.join(corpus, "pipeline.yaml")
    assert main(["extract", "--config", cfg, "--out", run]) == EXIT_OK
    assert main(["run", "--config", cfg, "--out", run]) == EXIT_OK
    return time.perf_counter() - t0, corpus, run


@pytest.fixture(scope="module")
def shipped_runs(tmp_path_factory):
    root = str(tmp_path_factory.mktemp("e2e"))
    return {1: pipeline(root, 1, deep=True), 0: pipeline(root, 0, deep=False)}


def _report(run):
    with open(os.path.join(run, "report.json"), "rb") as fh:
        raw = fh.read()
    return raw, json.loads(raw)


@pytest.mark.slow
def test_end_to_end(shipped_runs, tmp_path):
    secs1, corpus1, run1 = shipped_runs[1]
    secs0, _, run0 = shipped_runs[0]
    raw1, rep1 = _report(run1)
    _, rep0 = _report(run0)
    ratio1 = {f: s["overall"]["rmse"] / rep1["label_std"] for f, s in rep1["families"].items()}
    ratio0 = {f: s["overall"]["rmse"] / rep0["label_std"] for f, s in rep0["families"].items()}

    rerun = str(tmp_path / "rerun")
    cfg = os.path.join(corpus1, "pipeline.yaml")
    os.makedirs(rerun)
    os.link(os.path.join(run1, "features_conventional.csv"), os.path.join(rerun, "features_conventional.csv"))
    assert main(["run", "--config", cfg, "--out", rerun]) == EXIT_OK
    raw_again, _ = _report(rerun)
    detail = {f"coupling-1 {f}": round(v, 3) for f, v in ratio1.items()}
    detail.update({f"coupling-0 {f}": round(v, 3) for f, v in ratio0.items()})
    print("RMSE / label std:", detail, "pipeline seconds:", round(secs1, 1), round(secs0, 1))
    check("End-to-end", {
        "300 recordings each": rep1["n_samples"] == rep0["n_samples"] == 300,
        "pipeline < 10 min": max(secs1, secs0) < PIPELINE_LIMIT_S,
        "coupling 1: some family RMSE < 0.5 std": min(ratio1.values()) < 0.5,
        "coupling 0: all families within 15% of std": all(abs(v - 1) <= 0.15 for v in ratio0.values()),
        "same seed gives byte-identical report": raw_again == raw1,
    })


@pytest.mark.slow
def test_cost_report(shipped_runs):
    _, corpus1, run1 = shipped_runs[1]
    cfg = os.path.join(corpus1, "pipeline.yaml")
    assert main(["benchmark", "--config", cfg, "--out", run1]) == EXIT_OK
    with open(os.path.join(run1, "benchmark.json")) as fh:
        bench = json.load(fh)
    with open(os.path.join(run1, "benchmark.md")) as fh:
        lines = fh.read().splitlines()
    start = lines.index("| Processing step | Algorithm | Conventional | Deep |")
    steps = [ln.split(" | ")[:2] for ln in lines[start + 2:start + 13]]
    expected = [["| Data loading", "-"], ["| Preprocessing", "-"]] + [
        [f"| {stage}", alg] for stage in ("Model training", "Prediction", "Total")
        for alg in ("SVM", "RF", "FNN")]
    stage_sums = all(
        abs(t["total"] - (t["data_loading"] + t["preprocessing"] + t["model_training"] + t["prediction"]))
        <= 0.01 * t["total"] for src in bench["timings"].values() for t in src.values())
    print("feature bytes ratio:", round(bench["ratios"]["feature_bytes"], 1))
    check("Cost report", {
        "both sources benchmarked": bench["sources"] == ["conventional", "deep"],
        "stage table rows match": steps == expected,
        "stages sum to total": stage_sums,
        "deep bytes > 10x conventional": bench["ratios"]["feature_bytes"] > 10,
    })
