"""Reading and writing networks: dense CSV/TSV matrices and edge lists."""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .network import ValuedNetwork, load_network


class FormatError(ValueError):
    """Malformed input; the message names the offending line."""


def _number(cell: str) -> float | None:
    cell = cell.strip()
    if cell == "":
        return 0.0
    try:
        return float(cell)
    except ValueError:
        return None


def _sniff_delimiter(text: str) -> str:
    first = next((ln for ln in text.splitlines() if ln.strip()), "")
    return "\t" if "\t" in first else ","


def _detect_layout(rows: list[list[str]]) -> tuple[bool, bool]:
    first = rows[0]
    rest = rows[1:]
    if any(_number(c) is None for c in first[1:]):
        header = True
    else:
        # an empty corner with fully labelled first row and column reads as a header
        header = (first[0].strip() == "" and all(c.strip() for c in first[1:])
                  and bool(rest) and all(r[0].strip() for r in rest))
    data = rest if header else rows
    label_col = any(_number(r[0]) is None for r in data) or (
        header and first[0].strip() == "" and len(first) == len(data) + 1
    )
    return header, label_col


def parse_dense(text: str, source: str = "<input>", diagonal_relevant: bool = False,
                header: bool | None = None, label_column: bool | None = None) -> ValuedNetwork:
    """Square matrix with an optional header row and label column; empty cells are 0.

    Header and label column are detected unless given explicitly.
    """
    delim = _sniff_delimiter(text)
    numbered = [(ln, r) for ln, r in enumerate(csv.reader(io.StringIO(text), delimiter=delim), 1)
                if any(c.strip() for c in r)]
    if not numbered:
        raise FormatError(f"{source}: no data")
    auto_header, auto_labels = _detect_layout([r for _, r in numbered])
    header = auto_header if header is None else header
    label_column = auto_labels if label_column is None else label_column

    head = numbered[0] if header else None
    data = numbered[1:] if header else numbered
    n = len(data)
    if n == 0:
        raise FormatError(f"{source}: header but no matrix rows")
    values = np.zeros((n, n))
    labels = []
    for i, (ln, r) in enumerate(data):
        cells = r[1:] if label_column else r
        if any(c.strip() for c in cells[n:]):
            raise FormatError(f"{source}:{ln}: expected {n} values, found {len(cells)}")
        if len(cells) < n:
            raise FormatError(f"{source}:{ln}: expected {n} values, found {len(cells)}")
        for j, c in enumerate(cells[:n]):
            v = _number(c)
            if v is None:
                raise FormatError(f"{source}:{ln}: cannot read {c.strip()!r} as a number")
            values[i, j] = v
        if label_column:
            labels.append(r[0].strip())

    if head is not None:
        ln, r = head
        col_labels = [c.strip() for c in (r[1:] if label_column else r)][:n]
        while len(col_labels) < n:
            col_labels.append("")
        if label_column:
            if any(col_labels) and col_labels != labels:
                raise FormatError(f"{source}:{ln}: column labels do not match row labels")
        else:
            if not all(col_labels):
                raise FormatError(f"{source}:{ln}: header has empty labels")
            labels = col_labels
    if labels and len(set(labels)) != n:
        raise FormatError(f"{source}: duplicate unit labels")
    try:
        return load_network(values, labels or None, diagonal_relevant)
    except ValueError as e:
        raise FormatError(f"{source}: {e}") from None


def parse_edges(text: str, source: str = "<input>", diagonal_relevant: bool = False) -> ValuedNetwork:
    """Lines "source,target,value"; a missing value means 1. Units in order of first mention."""
    delim = _sniff_delimiter(text)
    edges = []
    index: dict[str, int] = {}
    for ln, r in enumerate(csv.reader(io.StringIO(text), delimiter=delim), 1):
        r = [c.strip() for c in r]
        if not any(r) or r[0].startswith("#"):
            continue
        if len(r) not in (2, 3):
            raise FormatError(f"{source}:{ln}: expected source,target[,value], got {len(r)} fields")
        value = _number(r[2]) if len(r) == 3 else 1.0
        if value is None:
            if not index:
                continue  # header line
            raise FormatError(f"{source}:{ln}: cannot read {r[2]!r} as a number")
        for lab in r[:2]:
            if not lab:
                raise FormatError(f"{source}:{ln}: empty unit label")
            index.setdefault(lab, len(index))
        edges.append((ln, index[r[0]], index[r[1]], value))
    if not index:
        raise FormatError(f"{source}: no edges")
    values = np.zeros((len(index), len(index)))
    seen: dict[tuple[int, int], int] = {}
    for ln, a, b, v in edges:
        if (a, b) in seen:
            raise FormatError(f"{source}:{ln}: duplicate tie (first given on line {seen[a, b]})")
        seen[a, b] = ln
        values[a, b] = v
    try:
        return load_network(values, list(index), diagonal_relevant)
    except ValueError as e:
        raise FormatError(f"{source}: {e}") from None


def read_network(path, fmt: str = "dense", diagonal_relevant: bool = False) -> ValuedNetwork:
    path = Path(path)
    text = path.read_text()
    if fmt == "dense":
        return parse_dense(text, str(path), diagonal_relevant)
    if fmt == "edges":
        return parse_edges(text, str(path), diagonal_relevant)
    raise ValueError(f"unknown input format {fmt!r}")


def format_value(v: float) -> str:
    """Shortest text that reads back to the same float."""
    v = float(v)
    if v.is_integer() and abs(v) < 2 ** 53:
        return str(int(v))
    return repr(v)


def dense_text(net: ValuedNetwork, delimiter: str = ",") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    w.writerow([""] + list(net.unit_labels))
    for lab, row in zip(net.unit_labels, net.values):
        w.writerow([lab] + [format_value(v) for v in row])
    return buf.getvalue()


def write_network(net: ValuedNetwork, path, delimiter: str = ",") -> None:
    Path(path).write_text(dense_text(net, delimiter))
