"""Result rendering: CSV, aligned text tables, and summary figures.

CSV is the machine-readable contract (one row per (variant, parameter)
with mean, rmse, and the per-run accuracies); the text table mirrors the
familiar "99.67 +/- 0.09" percent cells; figures are a convenience
rendering of the same numbers.
"""

import csv
import os

import numpy as np

from .errors import InvalidParameterError

__all__ = ["format_cell", "emit_results"]


def format_cell(mean, rmse_value):
    """Percent rendering with two decimals: 0.99666, 0.0009 -> '99.67 ± 0.09'."""
    return f"{100.0 * mean:.2f} ± {100.0 * rmse_value:.2f}"


def _write_csv(table, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["variant", "parameter", "mean", "rmse", "per_run"])
        for row in table.rows:
            writer.writerow([
                row.variant,
                row.parameter,
                f"{row.mean:.12f}",
                f"{row.rmse:.12f}",
                ";".join(f"{a:.12f}" for a in row.per_run),
            ])


def _write_text(table, path):
    headers = ["variant", "parameter", "accuracy (%)"]
    cells = [
        [r.variant, r.parameter, format_cell(r.mean, r.rmse)] for r in table.rows
    ]
    widths = [max(len(h), *(len(c[i]) for c in cells)) for i, h in enumerate(headers)]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(headers, widths)),
        "  ".join("-" * w for w in widths),
    ]
    for c in cells:
        lines.append("  ".join(v.ljust(w) for v, w in zip(c, widths)))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_figure(table, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    variants = sorted({r.variant for r in table.rows})
    params = list(dict.fromkeys(r.parameter for r in table.rows))
    fig, ax = plt.subplots(figsize=(1.2 + 1.4 * len(params), 4.0))
    width = 0.8 / len(variants)
    xs = np.arange(len(params))
    for i, variant in enumerate(variants):
        means, errs, pos = [], [], []
        for j, param in enumerate(params):
            match = [r for r in table.rows
                     if r.variant == variant and r.parameter == param]
            if match:
                means.append(100.0 * match[0].mean)
                errs.append(100.0 * match[0].rmse)
                pos.append(xs[j] + (i - (len(variants) - 1) / 2) * width)
        ax.bar(pos, means, width=width, yerr=errs, capsize=3, label=variant)
    ax.set_xticks(xs)
    ax.set_xticklabels(params, rotation=20, ha="right")
    ax.set_ylabel("accuracy (%)")
    ax.set_ylim(0, 105)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def emit_results(table, out_dir, basename="results", figures=True):
    """Write results.csv / results.txt (and results.png) under out_dir.

    Returns the list of paths written.
    """
    if not table.rows:
        raise InvalidParameterError("cannot emit an empty result table")
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    csv_path = os.path.join(out_dir, basename + ".csv")
    _write_csv(table, csv_path)
    paths.append(csv_path)
    txt_path = os.path.join(out_dir, basename + ".txt")
    _write_text(table, txt_path)
    paths.append(txt_path)
    if figures:
        png_path = os.path.join(out_dir, basename + ".png")
        _write_figure(table, png_path)
        paths.append(png_path)
    return paths
