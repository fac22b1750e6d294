"""Human and machine readable reports of a fitted blockmodel."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .criterion import FitResult
from .io import format_value
from .network import Partition, ValuedNetwork
from .search import SearchResult, multistart_report


def _csv(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def partition_csv(net: ValuedNetwork, partition: Partition) -> str:
    """One line per unit, clusters numbered from 1."""
    rows = [("label", "cluster")]
    rows += [(lab, c + 1) for lab, c in zip(net.unit_labels, partition.assignment)]
    return _csv(rows)


def image_csv(fit: FitResult) -> str:
    k = fit.partition.k
    rows = [[""] + [str(j + 1) for j in range(k)]]
    rows += [[str(i + 1)] + tags for i, tags in enumerate(fit.image_tags())]
    return _csv(rows)


def inconsistencies_csv(fit: FitResult) -> str:
    rows = [("row_cluster", "col_cluster", "block_type", "inconsistency")]
    for i, tags in enumerate(fit.image_tags()):
        for j, tag in enumerate(tags):
            rows.append((i + 1, j + 1, tag, repr(float(fit.block_inconsistencies[i, j]))))
    return _csv(rows)


def reordered_matrix_text(net: ValuedNetwork, partition: Partition, zero: str = ".") -> str:
    """Matrix with rows and columns grouped by cluster, clusters split by rules."""
    order = [u for members in partition.clusters() for u in members]
    bounds = set(np.cumsum(partition.sizes())[:-1].tolist())
    cells = [[format_value(net.values[a, b]) if net.values[a, b] != 0 else zero for b in order]
             for a in order]
    width = max(max(len(c) for row in cells for c in row), max(len(net.unit_labels[u]) for u in order))
    lab_w = max(len(net.unit_labels[u]) for u in order)

    def line(label, items):
        parts = []
        for idx, item in enumerate(items):
            if idx in bounds:
                parts.append("|")
            parts.append(item.rjust(width))
        return label.rjust(lab_w) + " " + " ".join(parts)

    out = [line("", [net.unit_labels[u] for u in order])]
    rule = "-" * len(out[0])
    for idx, u in enumerate(order):
        if idx in bounds:
            out.append(rule)
        out.append(line(net.unit_labels[u], cells[idx]))
    return "\n".join(out) + "\n"


def _canonical(partition: Partition, label_free: bool) -> Partition:
    return partition.canonical() if label_free else partition


def summary_dict(net: ValuedNetwork, result: SearchResult, config: dict,
                 label_free: bool = True) -> dict:
    """Everything needed to reproduce and compare a run; no wall-clock data."""
    fit = result.best
    part = _canonical(fit.partition, label_free)
    out = {
        "config": config,
        "n": net.n,
        "k": part.k,
        "total": fit.total,
        "partition": list(part.assignment),
        "clusters": [[net.unit_labels[u] for u in c] for c in part.clusters()],
        "image": fit.image_tags(),
        "block_inconsistencies": fit.block_inconsistencies.tolist(),
        "optima_count": len(result.optima),
        "optima": [list(_canonical(p, label_free).assignment) for p in result.optima],
        "search": multistart_report(result),
        "exhaustive": result.exhaustive,
    }
    out["search"].pop("basins", None)
    return out


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def report_files(net: ValuedNetwork, result: SearchResult, config: dict,
                 label_free: bool = True) -> dict[str, str]:
    """File name -> content for a single fitted model."""
    fit = result.best
    return {
        "partition.csv": partition_csv(net, fit.partition),
        "image.csv": image_csv(fit),
        "inconsistencies.csv": inconsistencies_csv(fit),
        "matrix.txt": reordered_matrix_text(net, fit.partition),
        "summary.json": dumps(summary_dict(net, result, config, label_free)),
    }


def write_files(outdir, files: dict[str, str]) -> list[Path]:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in sorted(files):
        path = out / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(files[name])
        written.append(path)
    return written
