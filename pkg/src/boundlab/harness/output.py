"""CSV, SVG and config-echo writers.

Floats are written with 17 significant digits so every value round-trips
exactly; files use ``\\n`` line endings regardless of platform.
"""

import csv
import json
from collections import defaultdict
from pathlib import Path

import numpy as np

from .. import __version__

SUMMARY_SCHEMA = ("metric", "count", "q1", "median", "q3")


def fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path, schema, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(schema)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def summarize(table):
    """Quartiles of each metric per group, ignoring ``nan`` (degenerate) rows.

    Groups are emitted in sorted order of their key.
    """
    idx = [table.schema.index(g) for g in table.group_by]
    groups = defaultdict(list)
    for r in table.rows:
        groups[tuple(r[i] for i in idx)].append(r)
    out = []
    for key in sorted(groups):
        for metric in table.metrics:
            j = table.schema.index(metric)
            v = np.array([r[j] for r in groups[key]], dtype=float)
            v = v[~np.isnan(v)]
            if v.size:
                q1, med, q3 = (float(q) for q in np.percentile(v, [25, 50, 75]))
            else:
                q1 = med = q3 = float("nan")
            out.append((*key, metric, int(v.size), q1, med, q3))
    return (*table.group_by, *SUMMARY_SCHEMA), out


def _box_groups(table, fig):
    idx = [table.schema.index(b) for b in fig.by]
    if fig.metric == "steps":
        cols = [table.schema.index(s) for s in table.schema if s.startswith("step")]
        labels, data = [], []
        arm_i = table.schema.index("arm")
        for arm in dict.fromkeys(r[arm_i] for r in table.rows):
            for c in cols:
                v = np.array([r[c] for r in table.rows if r[arm_i] == arm], dtype=float)
                labels.append(f"{arm}:{table.schema[c][4:]}")
                data.append(v[np.isfinite(v)])
        return labels, data
    j = table.schema.index(fig.metric)
    groups = defaultdict(list)
    for r in table.rows:
        groups[tuple(r[i] for i in idx)].append(r[j])
    labels = [" ".join(fmt(k) for k in key) for key in sorted(groups)]
    data = []
    for key in sorted(groups):
        v = np.array(groups[key], dtype=float)
        data.append(v[np.isfinite(v)])
    return labels, data


def write_figure(path, table, fig):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "boundlab"
    labels, data = _box_groups(table, fig)
    if fig.log:
        data = [d[d > 0] for d in data]
    f, ax = plt.subplots(figsize=(max(6, 0.45 * len(labels)), 4))
    ax.boxplot([d if d.size else [np.nan] for d in data])
    ax.set_xticks(range(1, len(labels) + 1), labels, rotation=60, ha="right", fontsize=7)
    if fig.log:
        ax.set_yscale("log")
    ax.set_ylabel(fig.metric)
    ax.set_title(fig.title + ("  [scaled]" if table.metadata.get("scaled") else ""))
    f.tight_layout()
    f.savefig(path, format="svg", metadata={"Date": None})
    plt.close(f)


def write_outputs(table, cfg, out_dir, plots=True):
    """Write results.csv, summary.csv, config-echo.json and the figures into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "results.csv", table.schema, table.rows)
    schema, rows = summarize(table)
    write_csv(out / "summary.csv", schema, rows)
    echo = {"config": cfg.to_dict(), "metadata": table.metadata, "version": __version__}
    (out / "config-echo.json").write_text(json.dumps(echo, indent=2, sort_keys=True, default=fmt) + "\n")
    written = [out / "results.csv", out / "summary.csv", out / "config-echo.json"]
    if plots:
        for fig in table.figures:
            p = out / f"{fig.name}.svg"
            write_figure(p, table, fig)
            written.append(p)
    return written
