"""Implementations of the CLI subcommands.

Each ``cmd_*`` takes the merged config dict and the parsed arguments and
returns True when the run completed only partially.
"""

from __future__ import annotations

import csv
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict

import numpy as np
import yaml

from ..audio import EnhancementConfig, load_wav, preprocess_clip, write_wav
from ..errors import ConfigError, DataError
from ..evaluation.cv import FeatureTable, evaluate_cv, summarize
from ..evaluation.folds import subject_folds
from ..evaluation.meta import load_meta
from ..evaluation.render import FAMILY_LABEL, bytes_table, cost_table, error_table, ratio_table, stats_table
from ..evaluation.stats import ttest_two_sample, wilcoxon_signed_rank
from ..evaluation.timing import StageTimings, peak_allocation, time_call
from ..features.conventional import extract_conventional
from ..features.deep import aggregate_deep, deep_feature_names, ingest_deep_features
from ..features.io import read_feature_csv, read_flags, write_feature_csv, write_flags
from ..features.manifest import load_manifest
from ..models.search import fit_family, predict
from ..preprocess import fit_standardizer, mrmr_select, save_selection, save_standardizer, transform
from ..synthcorpus import SyntheticCorpusSpec, generate_corpus
from .config import config_hash, cv_config, enhancement_config

SIGNIFICANCE_ALPHA = 0.005
_MANIFESTS: dict = {}


def _manifest(version: str):
    if version not in _MANIFESTS:
        _MANIFESTS[version] = load_manifest(version)
    return _MANIFESTS[version]


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _write_json(path, obj) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def _write_text(path, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_csv(path, header, rows) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    os.replace(tmp, path)


def _out_dir(cfg) -> str:
    out = cfg["out"]
    os.makedirs(out, exist_ok=True)
    return out


def _source(cfg, args) -> str:
    return getattr(args, "source", None) or cfg["feature_source"]


def features_path(cfg, source: str) -> str:
    if cfg["data"]["features"] and source == cfg["feature_source"]:
        return cfg["data"]["features"]
    return os.path.join(cfg["out"], f"features_{source}.csv")


def _load_meta(cfg):
    path = cfg["data"]["metadata"]
    if not os.path.isfile(path):
        raise ConfigError(f"metadata file not found: {path}")
    return load_meta(path)


def _wav_path(cfg, sample_id: str) -> str:
    return os.path.join(cfg["data"]["audio_dir"], f"{sample_id}.wav")


def _deep_path(cfg, sample_id: str) -> str | None:
    for ext in (".csv", ".txt"):
        p = os.path.join(cfg["data"]["deep_dir"], sample_id + ext)
        if os.path.isfile(p):
            return p
    return None


# --------------------------------------------------------------------- synth

def cmd_synth(cfg, args) -> bool:
    s = dict(cfg["synth"])
    if args.coupling is not None:
        s["coupling"] = args.coupling
    if args.subjects is not None:
        s["n_subjects"] = args.subjects
    if args.noise_level is not None:
        s["noise_level"] = args.noise_level
    if args.no_deep:
        s["deep"] = False
    try:
        spec = SyntheticCorpusSpec(seed=int(cfg["seed"]), **s)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"synth: {exc}") from exc
    out = _out_dir(cfg)
    meta = generate_corpus(spec, out)
    # a config pointing at this corpus, usable with --config
    pipeline = {"seed": int(cfg["seed"]),
                "data": {"metadata": "metadata.csv", "audio_dir": "audio", "deep_dir": "deep"}}
    _write_text(os.path.join(out, "pipeline.yaml"), yaml.safe_dump(pipeline, sort_keys=True))
    _write_json(os.path.join(out, "synth_spec.json"), asdict(spec))
    print(f"wrote {len(meta)} recordings to {out}")
    return False


# ------------------------------------------------------------------- extract

def _extract_task(task):
    sample_id, wav_path, audio, manifest_version = task
    try:
        clip = load_wav(wav_path, sample_id)
        clip = preprocess_clip(clip, audio["target_dbfs"], audio["enhance"],
                               EnhancementConfig(**audio["enhancement"]), audio["order"])
        fv = extract_conventional(clip, _manifest(manifest_version))
        return sample_id, fv.values, fv.flags, None
    except (OSError, DataError) as exc:
        return sample_id, None, (), f"{type(exc).__name__}: {exc}"


def _map(fn, tasks, jobs: int):
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return [fn(t) for t in tasks]


def extract_conventional_table(cfg, meta, audio: dict | None = None, jobs: int = 1):
    """Features for every sample; returns (ids, names, matrix, flags, errors)."""
    audio = audio or cfg["audio"]
    version = cfg["features"]["manifest"]
    tasks = [(m.sample_id, _wav_path(cfg, m.sample_id), audio, version) for m in meta]
    results = _map(_extract_task, tasks, jobs)
    ids, rows, flags, errors = [], [], {}, []
    for sid, values, fl, err in results:
        if err is not None:
            errors.append((sid, err))
            continue
        ids.append(sid)
        rows.append(values)
        flags[sid] = fl
    names = list(_manifest(version).entries)
    return ids, names, np.array(rows).reshape(len(rows), len(names)), flags, errors


def _extract_deep_rows(cfg, meta):
    ids, rows, errors = [], [], []
    for m in meta:
        path = _deep_path(cfg, m.sample_id)
        if path is None:
            errors.append((m.sample_id, "FileNotFoundError: no deep-feature matrix"))
            continue
        try:
            rows.append(aggregate_deep(ingest_deep_features(path)).values)
            ids.append(m.sample_id)
        except DataError as exc:
            errors.append((m.sample_id, f"{type(exc).__name__}: {exc}"))
    return ids, rows, errors


def cmd_extract(cfg, args) -> bool:
    source = _source(cfg, args)
    meta = _load_meta(cfg)
    out = _out_dir(cfg)
    path = features_path(cfg, source)
    flags_path = path[:-4] + ".flags.csv" if path.endswith(".csv") else path + ".flags"
    errors_path = os.path.join(out, f"extract_errors_{source}.csv")

    done_ids, done_rows, done_flags, names = [], {}, {}, None
    if os.path.isfile(path):
        done_ids, names, mat = read_feature_csv(path)
        done_rows = dict(zip(done_ids, mat))
        if os.path.isfile(flags_path):
            done_flags = read_flags(flags_path)
    todo = [m for m in meta if m.sample_id not in done_rows]

    if source == "conventional":
        expected = list(_manifest(cfg["features"]["manifest"]).entries)
        ids, _, mat, flags, errors = extract_conventional_table(cfg, todo, jobs=int(cfg["jobs"]))
        new_rows = dict(zip(ids, mat))
    else:
        ids, rows, errors = _extract_deep_rows(cfg, todo)
        expected = deep_feature_names(len(rows[0]) // 2) if rows else names
        new_rows = dict(zip(ids, rows))
        flags = {}
    if names is not None and expected is not None and list(names) != list(expected):
        raise DataError(f"{path} was written with a different feature set; remove it to re-extract")
    names = expected

    if new_rows or not os.path.isfile(path):
        all_rows = {**done_rows, **new_rows}
        order = [m.sample_id for m in meta if m.sample_id in all_rows]
        if not order:
            raise DataError("no sample could be processed")
        write_feature_csv(path, names, order, np.array([all_rows[s] for s in order]))
        if source == "conventional":
            write_flags(flags_path, {**done_flags, **flags}, order)
    _write_csv(errors_path, ["sample_id", "error"], errors)
    print(f"{source}: {len(new_rows)} extracted, {len(done_rows)} reused, {len(errors)} failed -> {path}")
    return bool(errors)


# ------------------------------------------------------------------- enhance

def cmd_enhance(cfg, args) -> bool:
    meta = _load_meta(cfg)
    out = _out_dir(cfg)
    enh_dir = os.path.join(out, "enhanced")
    os.makedirs(enh_dir, exist_ok=True)
    ecfg = enhancement_config(cfg)
    a = cfg["audio"]
    errors = []
    for m in meta:
        try:
            clip = preprocess_clip(load_wav(_wav_path(cfg, m.sample_id), m.sample_id),
                                   a["target_dbfs"], True, ecfg, a["order"])
            write_wav(os.path.join(enh_dir, f"{m.sample_id}.wav"), clip)
        except (OSError, DataError) as exc:
            errors.append((m.sample_id, f"{type(exc).__name__}: {exc}"))
    _write_csv(os.path.join(out, "enhance_errors.csv"), ["sample_id", "error"], errors)
    if args.significance:
        enhancement_significance(cfg, meta, out)
    print(f"enhanced {len(meta) - len(errors)} recordings into {enh_dir}")
    return bool(errors)


def enhancement_significance(cfg, meta, out) -> dict:
    """Per-feature Wilcoxon test of features without vs with enhancement."""
    plain = dict(cfg["audio"], enhance=False)
    enh = dict(cfg["audio"], enhance=True)
    jobs = int(cfg["jobs"])
    ids0, names, m0, _, _ = extract_conventional_table(cfg, meta, plain, jobs)
    ids1, _, m1, _, _ = extract_conventional_table(cfg, meta, enh, jobs)
    common = [s for s in ids0 if s in set(ids1)]
    pos0 = {s: i for i, s in enumerate(ids0)}
    pos1 = {s: i for i, s in enumerate(ids1)}
    A = m0[[pos0[s] for s in common]]
    B = m1[[pos1[s] for s in common]]
    results = []
    testable = [j for j in range(len(names)) if np.any(A[:, j] != B[:, j])]
    for j in testable:
        r = wilcoxon_signed_rank(A[:, j], B[:, j], m_tests=len(testable))
        results.append((names[j], r.W, r.p, r.bonferroni_p, r.n))
    _write_csv(os.path.join(out, "enhancement_significance.csv"),
               ["feature", "W", "p", "bonferroni_p", "n"],
               [(n, repr(w), repr(p), repr(bp), k) for n, w, p, bp, k in results])
    n_sig = sum(1 for r in results if r[3] <= SIGNIFICANCE_ALPHA)
    summary = {"n_features": len(names), "n_tested": len(results), "alpha": SIGNIFICANCE_ALPHA,
               "n_significant": n_sig,
               "fraction_significant": n_sig / len(names) if names else 0.0}
    _write_json(os.path.join(out, "enhancement_significance.json"), summary)
    return summary


# -------------------------------------------------------------------- select

def _feature_table(cfg, source) -> FeatureTable:
    path = features_path(cfg, source)
    if not os.path.isfile(path):
        raise DataError(f"feature table not found: {path} (run 'depcost extract' first)")
    ids, names, mat = read_feature_csv(path)
    return FeatureTable(ids, names, mat)


def _filtered_meta(cfg, meta):
    tasks = cfg["cv"]["task_filter"]
    if tasks:
        meta = [m for m in meta if m.task in set(tasks)]
        if not meta:
            raise DataError("task filter removed every sample")
    return meta


def cmd_select(cfg, args) -> bool:
    source = _source(cfg, args)
    meta = _filtered_meta(cfg, _load_meta(cfg))
    table = _feature_table(cfg, source)
    X = table.rows_for([m.sample_id for m in meta])
    y = np.array([m.phq8 for m in meta], dtype=float)
    std = fit_standardizer(X, table.names)
    sel = mrmr_select(transform(std, X), y, float(cfg["selection"]["fraction"]), table.names,
                      cfg["selection"]["scheme"])
    out = _out_dir(cfg)
    save_selection(os.path.join(out, f"selection_{source}.txt"), sel)
    save_standardizer(os.path.join(out, f"standardizer_{source}.csv"), std)
    print(f"selected {len(sel)} of {len(table.names)} {source} features")
    return False


# ----------------------------------------------------------------------- run

def _pairwise_tests(abs_errors: dict) -> list[dict]:
    fams = list(abs_errors)
    tests = []
    for i in range(len(fams)):
        for j in range(i + 1, len(fams)):
            r = ttest_two_sample(abs_errors[fams[i]], abs_errors[fams[j]])
            tests.append({"a": fams[i], "b": fams[j], "t": r.t, "df": r.df, "p": r.p,
                          "degenerate": r.degenerate})
    return tests


def _render_run(report: dict) -> str:
    src = report["feature_source"]
    fams = report["families"]
    parts = [f"# Cross-validation report ({src} features)\n",
             f"config hash `{report['config_hash']}`, manifest {report['manifest_version']}, "
             f"{report['n_samples']} samples, label std {report['label_std']:.3f}\n",
             "\n## Error by gender\n\n", error_table({src: fams}, "gender"),
             "\n## Error by speech task\n\n", error_table({src: fams}, "task"),
             "\n## Absolute-error concordance\n\n",
             "| Algorithm | CCC vs duration | CCC vs PHQ-8 |\n|---|---|---|\n"]
    for fam, s in fams.items():
        parts.append(f"| {FAMILY_LABEL[fam]} | {s['ccc']['abs_error_vs_duration']:.3f} | {s['ccc']['abs_error_vs_phq8']:.3f} |\n")
    if report["tests"]:
        parts += ["\n## Two-sample t-tests on absolute errors\n\n", stats_table(report["tests"])]
    return "".join(parts)


def cmd_run(cfg, args) -> bool:
    source = _source(cfg, args)
    meta = _filtered_meta(cfg, _load_meta(cfg))
    table = _feature_table(cfg, source)
    cvc = cv_config(cfg)
    out = _out_dir(cfg)
    fold_dir = os.path.join(out, "folds")
    families = {}
    timings = {}
    abs_errors = {}
    pred_rows = []
    by_id = {m.sample_id: m for m in meta}
    for fam in cfg["models"]["families"]:
        t0 = time.perf_counter()
        res = evaluate_cv(table, meta, fam, cvc)
        summ = summarize(res, meta)
        if not all(np.isfinite([summ["overall"]["rmse"], summ["overall"]["mae"]])):
            raise DataError(f"non-finite metrics for {fam}")
        families[fam] = summ
        timings[fam] = {**res.timings, "wall": time.perf_counter() - t0}
        abs_errors[fam] = res.abs_error
        os.makedirs(os.path.join(fold_dir, fam), exist_ok=True)
        for group, f, pipe in res.pipelines:
            stem = os.path.join(fold_dir, fam, f"{group}_fold{f}")
            save_selection(stem + ".selected.txt", pipe.selection)
            save_standardizer(stem + ".standardizer.csv", pipe.standardizer)
        for sid, truth, pred, fold in zip(res.sample_ids, res.truth, res.prediction, res.fold):
            m = by_id[sid]
            pred_rows.append([fam, sid, repr(float(truth)), repr(float(pred)),
                              repr(float(abs(pred - truth))), repr(float(m.duration_s)),
                              m.gender, m.task, int(fold)])
    y = np.array([m.phq8 for m in meta], dtype=float)
    report = {
        "config_hash": config_hash(cfg),
        "manifest_version": cfg["features"]["manifest"] if source == "conventional" else "deep-meanstd",
        "feature_source": source,
        "n_samples": len(meta),
        "label_std": float(y.std()),
        "gender_mode": cvc.gender_mode,
        "task_filter": cfg["cv"]["task_filter"],
        "families": families,
        "tests": _pairwise_tests(abs_errors),
    }
    _write_json(os.path.join(out, "report.json"), report)
    _write_text(os.path.join(out, "report.md"), _render_run(report))
    _write_json(os.path.join(out, "timings.json"), timings)
    _write_csv(os.path.join(out, "predictions.csv"),
               ["family", "sample_id", "truth", "prediction", "abs_error", "duration_s", "gender",
                "task", "fold"], pred_rows)
    for fam, s in families.items():
        print(f"{fam}: RMSE {s['overall']['rmse']:.3f}  MAE {s['overall']['mae']:.3f}")
    return False


# ----------------------------------------------------------------- benchmark

def _benchmark_source(cfg, load_fn, meta, train, test, feature_bytes) -> tuple[dict, float]:
    bcfg = cfg["benchmark"]
    reps, warm = int(bcfg["repeats"]), int(bcfg["warmup"])
    seed = int(cfg["seed"])
    frac = float(cfg["selection"]["fraction"])
    scheme = cfg["selection"]["scheme"]
    ids = [m.sample_id for m in meta]
    y = np.array([m.phq8 for m in meta], dtype=float)
    wall0 = time.perf_counter()
    spent = 0.0

    t_load, table, s = time_call(load_fn, reps, warm)
    spent += s
    X = table.rows_for(ids)
    Xtr, Xte, ytr = X[train], X[test], y[train]

    def prep():
        std = fit_standardizer(Xtr, table.names)
        sel = mrmr_select(transform(std, Xtr), ytr, frac, table.names, scheme)
        return std, sel

    t_prep, (std, sel), s = time_call(prep, reps, warm)
    spent += s
    cols = list(sel.indices)
    Ztr = transform(std, Xtr)[:, cols]
    Zte = transform(std, Xte)[:, cols]

    def whole_path():
        tab = load_fn()
        Xa = tab.rows_for(ids)
        st = fit_standardizer(Xa[train], tab.names)
        se = mrmr_select(transform(st, Xa[train]), ytr, frac, tab.names, scheme)
        ztr = transform(st, Xa[train])[:, list(se.indices)]
        zte = transform(st, Xa[test])[:, list(se.indices)]
        for fam in cfg["models"]["families"]:
            predict(fit_family(fam, ztr, ytr, bcfg["params"].get(fam, {}), seed), zte)

    out = {}
    for fam in cfg["models"]["families"]:
        params = bcfg["params"].get(fam, {})
        t_train, model, s = time_call(lambda: fit_family(fam, Ztr, ytr, params, seed), reps, warm)
        spent += s
        t_pred, _, s = time_call(lambda: predict(model, Zte), reps, warm)
        spent += s
        out[fam] = StageTimings(t_load, t_prep, t_train, t_pred, feature_bytes=feature_bytes)
    unattributed = time.perf_counter() - wall0 - spent
    peak, _ = peak_allocation(whole_path)
    out = {fam: StageTimings(**{**asdict(t), "peak_memory_bytes": peak}).as_dict()
           for fam, t in out.items()}
    return out, unattributed


def cmd_benchmark(cfg, args) -> bool:
    meta = _load_meta(cfg)
    out = _out_dir(cfg)
    sources = {}
    conv_path = features_path(cfg, "conventional")
    if os.path.isfile(conv_path):
        def load_conv():
            ids, names, mat = read_feature_csv(conv_path)
            return FeatureTable(ids, names, mat)
        sources["conventional"] = (load_conv, os.path.getsize(conv_path))
    deep_paths = [_deep_path(cfg, m.sample_id) for m in meta]
    if all(deep_paths):
        def load_deep():
            rows = [aggregate_deep(ingest_deep_features(p)).values for p in deep_paths]
            return FeatureTable([m.sample_id for m in meta], deep_feature_names(len(rows[0]) // 2),
                                np.array(rows))
        sources["deep"] = (load_deep, sum(os.path.getsize(p) for p in deep_paths))
    if not sources:
        raise DataError("no feature source available: extract conventional features or provide deep matrices")
    warnings = []
    if len(sources) == 1:
        only = next(iter(sources))
        warnings.append(f"only the {only} feature source is available; single-path report")
        _warn(warnings[-1])

    fold_of = subject_folds([m.subject_id for m in meta], [m.phq8 for m in meta],
                            int(cfg["cv"]["k"]), int(cfg["seed"]))
    train = np.flatnonzero(fold_of != 0)
    test = np.flatnonzero(fold_of == 0)
    timings, unattributed, sizes = {}, {}, {}
    for src, (load_fn, nbytes) in sources.items():
        timings[src], unattributed[src] = _benchmark_source(cfg, load_fn, meta, train, test, nbytes)
        first = next(iter(timings[src].values()))
        sizes[src] = {"feature_bytes": first["feature_bytes"],
                      "peak_memory_bytes": first["peak_memory_bytes"]}
    ratios = {}
    if len(sources) == 2:
        c, d = sizes["conventional"], sizes["deep"]
        ratios["feature_bytes"] = d["feature_bytes"] / c["feature_bytes"]
        ratios["peak_memory"] = d["peak_memory_bytes"] / max(c["peak_memory_bytes"], 1)
        for fam in cfg["models"]["families"]:
            ratios[f"total_time_{fam}"] = timings["deep"][fam]["total"] / timings["conventional"][fam]["total"]
    result = {"sources": list(sources), "timings": timings, "unattributed_s": unattributed,
              "sizes": sizes, "ratios": ratios, "warnings": warnings,
              "n_train": int(len(train)), "n_test": int(len(test)),
              "repeats": int(cfg["benchmark"]["repeats"]), "warmup": int(cfg["benchmark"]["warmup"])}
    _write_json(os.path.join(out, "benchmark.json"), result)
    md = ["# Cost benchmark\n",
          f"median of {result['repeats']} runs after {result['warmup']} warm-up; seconds\n\n",
          cost_table(timings), "\n", bytes_table(sizes)]
    if ratios:
        md += ["\n", ratio_table(ratios)]
    md.append("\nUnattributed overhead (s): "
              + ", ".join(f"{s} {v:.3f}" for s, v in unattributed.items()) + "\n")
    for w in warnings:
        md.append(f"\nWarning: {w}\n")
    _write_text(os.path.join(out, "benchmark.md"), "".join(md))
    print(cost_table(timings))
    return False


# -------------------------------------------------------------------- report

def _read_predictions(path) -> dict:
    out: dict = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            out.setdefault(rec["family"], {})[rec["sample_id"]] = float(rec["abs_error"])
    return out


def cmd_report(cfg, args) -> bool:
    reports, preds = {}, {}
    bench = []
    for run in args.runs:
        path = os.path.join(run, "report.json")
        if not os.path.isfile(path):
            raise DataError(f"no report.json in {run}")
        with open(path, encoding="utf-8") as fh:
            rep = json.load(fh)
        src = rep["feature_source"]
        if src in reports:
            raise DataError(f"two runs share feature source {src!r}")
        reports[src] = rep["families"]
        pp = os.path.join(run, "predictions.csv")
        if os.path.isfile(pp):
            preds[src] = _read_predictions(pp)
        bp = os.path.join(run, "benchmark.md")
        if os.path.isfile(bp):
            with open(bp, encoding="utf-8") as fh:
                bench.append(fh.read())
    tests = []
    if {"conventional", "deep"} <= set(preds):
        for fam in sorted(set(preds["conventional"]) & set(preds["deep"])):
            a, b = preds["conventional"][fam], preds["deep"][fam]
            common = sorted(set(a) & set(b))
            r = ttest_two_sample([a[s] for s in common], [b[s] for s in common])
            tests.append({"a": f"{fam} conventional", "b": f"{fam} deep", "t": r.t, "df": r.df,
                          "p": r.p, "degenerate": r.degenerate})
    md = ["# Combined report\n\n## Error by gender\n\n", error_table(reports, "gender"),
          "\n## Error by speech task\n\n", error_table(reports, "task")]
    if tests:
        md += ["\n## Conventional vs deep absolute errors\n\n", stats_table(tests)]
    for b in bench:
        md += ["\n", b]
    out = _out_dir(cfg)
    _write_text(os.path.join(out, "report_combined.md"), "".join(md))
    _write_json(os.path.join(out, "report_combined.json"), {"families": reports, "tests": tests})
    print("".join(md))
    return False
