"""Markdown renderings of error and cost tables."""

from __future__ import annotations

FAMILY_LABEL = {"svr": "SVM", "forest": "RF", "fnn": "FNN"}
SOURCE_LABEL = {"conventional": "Conventional", "deep": "Deep"}
STAGE_LABEL = {
    "data_loading": "Data loading",
    "preprocessing": "Preprocessing",
    "model_training": "Model training",
    "prediction": "Prediction",
    "total": "Total",
}
GENDER_ORDER = ("male", "female", "other")


def _table(header, rows) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(str(c) for c in r) + " |" for r in rows]
    return "\n".join(lines) + "\n"


def _src_header(sources):
    return [SOURCE_LABEL.get(s, s) for s in sources]


def error_table(reports: dict, by: str = "gender") -> str:
    """Rows per family and group, RMSE then MAE columns for each feature source.

    ``reports`` maps source name -> {family: summary}. ``by`` is "gender"
    (male / female / overall rows) or "task".
    """
    sources = list(reports)
    families = [f for f in FAMILY_LABEL if any(f in reports[s] for s in sources)]
    first = "Gender" if by == "gender" else "Speech task"
    header = ["Algorithm", first] + [f"RMSE {h}" for h in _src_header(sources)] \
        + [f"MAE {h}" for h in _src_header(sources)]
    rows = []
    for fam in families:
        groups = []
        for s in sources:
            for g in reports[s].get(fam, {}).get(by, {}):
                if g not in groups:
                    groups.append(g)
        if by == "gender":
            groups = [g for g in GENDER_ORDER if g in groups] + ["overall"]
        for g in groups:
            cells_r, cells_m = [], []
            for s in sources:
                summ = reports[s].get(fam)
                if summ is None:
                    cells_r.append("-")
                    cells_m.append("-")
                    continue
                entry = summ["overall"] if g == "overall" else summ[by].get(g)
                cells_r.append(f"{entry['rmse']:.2f}" if entry else "-")
                cells_m.append(f"{entry['mae']:.2f}" if entry else "-")
            label = "Overall" if g == "overall" else g.replace("_", " ").capitalize()
            rows.append([FAMILY_LABEL[fam], label] + cells_r + cells_m)
    return _table(header, rows)


def cost_table(timings: dict) -> str:
    """Processing step x algorithm rows, one seconds column per feature source.

    ``timings`` maps source -> {family: StageTimings.as_dict()}.
    """
    sources = list(timings)
    families = [f for f in FAMILY_LABEL if any(f in timings[s] for s in sources)]
    header = ["Processing step", "Algorithm"] + _src_header(sources)
    rows = []

    def cell(s, fam, stage):
        t = timings[s].get(fam)
        return f"{t[stage]:.3f}" if t else "-"

    for stage in ("data_loading", "preprocessing"):
        fam0 = families[0]
        rows.append([STAGE_LABEL[stage], "-"] + [cell(s, fam0, stage) for s in sources])
    for stage in ("model_training", "prediction", "total"):
        for fam in families:
            rows.append([STAGE_LABEL[stage], FAMILY_LABEL[fam]] + [cell(s, fam, stage) for s in sources])
    return _table(header, rows)


def bytes_table(sizes: dict) -> str:
    """Feature bytes and peak memory per source, plus deep/conventional ratios when both exist."""
    sources = list(sizes)
    rows = [["Feature file bytes"] + [str(sizes[s]["feature_bytes"]) for s in sources],
            ["Peak traced memory (bytes)"] + [str(sizes[s]["peak_memory_bytes"]) for s in sources]]
    header = ["Quantity"] + _src_header(sources)
    return _table(header, rows)


def ratio_table(ratios: dict) -> str:
    rows = [[k.replace("_", " "), f"{v:.1f}"] for k, v in ratios.items()]
    return _table(["Deep / conventional", "Ratio"], rows)


def stats_table(tests: list[dict]) -> str:
    rows = [[t["a"], t["b"], f"{t['t']:.2f}", str(t["df"]), f"{t['p']:.3g}"] for t in tests]
    return _table(["A", "B", "t", "df", "p"], rows)
