"""CSV results, tradeoff series and summary tables."""

import csv
import os
import re
from collections import OrderedDict

import numpy as np

from .grid import CSV_COLUMNS, summarize


def format_number(value):
    """Shortest round-trip decimal, never in exponent notation; blanks for missing values."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if not np.isfinite(value):
            return str(float(value))
        return np.format_float_positional(float(value), unique=True, trim="-")
    return str(value)


def write_csv(table, path):
    """Write one row per cell x seed x replicate, sorted by cell key then seed.

    A ``reward_norm`` that could not be normalised carries a trailing ``*``.
    """
    if len(table) == 0:
        raise ValueError("refusing to write an empty result table")
    path = os.fspath(path)
    lines = []
    for row in table.sorted_rows():
        cells = [format_number(row.record[c]) for c in CSV_COLUMNS]
        if row.reward_norm_flagged:
            cells[CSV_COLUMNS.index("reward_norm")] += "*"
        lines.append(cells)
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            writer.writerows(lines)
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc.strerror or exc}") from exc
    return path


def _field(row, name):
    if name in row.record:
        return row.record[name]
    if name in row.params:
        return row.params[name]
    raise KeyError(name)


def _slug(text):
    return re.sub(r"[^A-Za-z0-9_.=+-]+", "_", text).strip("_") or "series"


def tradeoff_series(table, x_field, y_field, group_by=()):
    """Per-method (x, y) series, averaged over seeds and replicates per cell, sorted by x."""
    if len(table) == 0:
        raise ValueError("empty result table")
    sample = table.rows[0]
    for name in (x_field, y_field, *group_by):
        try:
            _field(sample, name)
        except KeyError:
            known = sorted(set(sample.record) | set(sample.params))
            raise ValueError(f"unknown field {name!r}; available: {', '.join(known)}") from None

    cells = OrderedDict()
    for row in table.sorted_rows():
        x, y = _field(row, x_field), _field(row, y_field)
        if x is None or y is None:
            continue
        cells.setdefault(row.key, {"row": row, "x": [], "y": []})
        cells[row.key]["x"].append(float(x))
        cells[row.key]["y"].append(float(y))

    series = OrderedDict()
    for cell in cells.values():
        row = cell["row"]
        parts = [row.record["method"]] + [f"{g}={format_number(_field(row, g))}" for g in group_by]
        name = "_".join(parts)
        series.setdefault(name, []).append((float(np.mean(cell["x"])), float(np.mean(cell["y"]))))
    return OrderedDict((name, sorted(points)) for name, points in sorted(series.items()))


def emit_tradeoff_data(table, x_field, y_field, path, group_by=()):
    """Write each tradeoff series as a two-column decimal text file under ``path``."""
    series = tradeoff_series(table, x_field, y_field, group_by)
    os.makedirs(path, exist_ok=True)
    for name, points in series.items():
        with open(os.path.join(path, _slug(name) + ".tsv"), "w", encoding="utf-8") as fh:
            for x, y in points:
                fh.write(f"{format_number(x)}\t{format_number(y)}\n")
    return series


# parameters already visible through a CSV column or the method label
_SHOWN = frozenset({
    "sampler", "selection", "grad_mode", "rescale_mode", "n_particles", "block_sample",
    "block_grad", "temperature", "guidance_scale", "particle_schedule", "cluster_k",
})


def format_summary(table):
    """Aligned text table of per-cell means; ``reward_norm`` is relative to the unguided baseline.

    Swept parameters without a CSV column (``reward.gamma2``, ``zoo_probes``...)
    get an extra leading column.
    """
    summary = summarize(table)
    firsts = {}
    for row in table.sorted_rows():
        firsts.setdefault(row.key, row)
    extra = sorted(
        name for name in {k for r in firsts.values() for k in r.params}
        if name not in _SHOWN and len({repr(r.params.get(name)) for r in firsts.values()}) > 1
    )
    cols = ("method", "N", "B_s", "B_g", "tau", "gamma", "schedule", "cluster_k",
            "reward_mean", "reward_norm", "mmd2", "nfe_denoiser", "nfe_reward", "nfe_grad", "runs")
    rows = [
        [_short(row.params.get(name)) for name in extra] + [_short(entry[c]) for c in cols]
        for row, entry in zip(firsts.values(), summary)
    ]
    cols = tuple(extra) + cols
    widths = [max(len(c), *(len(r[i]) for r in rows)) for i, c in enumerate(cols)]
    out = ["  ".join(c.rjust(w) for c, w in zip(cols, widths))]
    out += ["  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in rows]
    return "\n".join(out)


def _short(value):
    if value is None:
        return "-"
    if isinstance(value, float):
        return "nan" if value != value else f"{value:.4g}"
    return str(value)
