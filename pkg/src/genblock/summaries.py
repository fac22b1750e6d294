"""Per-block row/column summaries and diagnostics for choosing the valued threshold m."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .inconsistency import RowColFunction, cells_of, line_values
from .network import DiagonalPolicy, Partition, ValuedNetwork, effective_policy, extract_block


@dataclass(frozen=True, eq=False)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray

    def rows(self) -> list[tuple[float, float, int]]:
        return [(float(self.edges[i]), float(self.edges[i + 1]), int(self.counts[i]))
                for i in range(len(self.counts))]

    def to_csv(self) -> str:
        lines = ["lower,upper,count"]
        lines += [f"{lo:g},{hi:g},{c}" for lo, hi, c in self.rows()]
        return "\n".join(lines) + "\n"


def histogram(values, bins: int = 10) -> Histogram:
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        return Histogram(np.array([0.0, 1.0]), np.zeros(1, dtype=int))
    counts, edges = np.histogram(v, bins=bins)
    return Histogram(edges, counts)


@dataclass(frozen=True, eq=False)
class BlockSummaryTable:
    """Mean row and column f-values of every block of a partition.

    ``row_values[i][j]`` holds f of each row of block (i, j), likewise columns.
    """

    f: RowColFunction
    mean_row: np.ndarray
    mean_col: np.ndarray
    row_values: tuple
    col_values: tuple

    @property
    def k(self) -> int:
        return self.mean_row.shape[0]

    def pooled(self) -> np.ndarray:
        """All row and column f-values of all blocks."""
        parts = [v for row in self.row_values for v in row]
        parts += [v for row in self.col_values for v in row]
        return np.concatenate(parts) if parts else np.zeros(0)

    def histogram(self, bins: int = 10) -> Histogram:
        return histogram(self.pooled(), bins)

    def to_dict(self) -> dict:
        return {
            "f": self.f.value,
            "mean_row": self.mean_row.tolist(),
            "mean_col": self.mean_col.tolist(),
        }


def block_summaries(net: ValuedNetwork, partition: Partition,
                    f: RowColFunction | str = RowColFunction.SUM,
                    diagonal: DiagonalPolicy | str = DiagonalPolicy.ORDINARY) -> BlockSummaryTable:
    """Row and column f-values per block, averaged over the rows (columns) of the block.

    Loops are left out unless the network marks them relevant; ``sum`` over a
    diagonal-block line then extrapolates from the cells present.
    """
    f = RowColFunction(f)
    policy = effective_policy(net, diagonal)
    if policy is DiagonalPolicy.VARIANT:
        policy = DiagonalPolicy.ORDINARY
    k = partition.k
    mean_row = np.zeros((k, k))
    mean_col = np.zeros((k, k))
    rows_out, cols_out = [], []
    for i in range(k):
        r_row, c_row = [], []
        for j in range(k):
            cells = cells_of(extract_block(net, partition, i, j, policy))
            rv = line_values(f, cells, -1)
            cv = line_values(f, cells, -2)
            mean_row[i, j] = rv.mean()
            mean_col[i, j] = cv.mean()
            r_row.append(rv)
            c_row.append(cv)
        rows_out.append(tuple(r_row))
        cols_out.append(tuple(c_row))
    return BlockSummaryTable(f, mean_row, mean_col, tuple(rows_out), tuple(cols_out))


# -- choosing m ----------------------------------------------------------------

@dataclass(frozen=True)
class TwoMeans:
    """Optimal split of sorted values into a lower and upper group."""

    threshold: float
    low_mean: float
    high_mean: float
    low_sd: float
    high_sd: float
    n_low: int
    n_high: int

    @property
    def ashman_d(self) -> float:
        spread = math.sqrt(self.low_sd ** 2 + self.high_sd ** 2)
        if spread == 0:
            return math.inf
        return math.sqrt(2) * abs(self.high_mean - self.low_mean) / spread


def two_means(values) -> TwoMeans | None:
    """Exact 1-D two-means: try every split point of the sorted values."""
    v = np.sort(np.asarray(values, dtype=float).ravel())
    n = v.size
    if n < 2 or v[0] == v[-1]:
        return None
    c1 = np.cumsum(v)
    c2 = np.cumsum(v * v)
    s = np.arange(1, n)
    lo_sum, lo_sq = c1[:-1], c2[:-1]
    hi_sum, hi_sq = c1[-1] - lo_sum, c2[-1] - lo_sq
    within = (lo_sq - lo_sum ** 2 / s) + (hi_sq - hi_sum ** 2 / (n - s))
    # only split between distinct values
    within = np.where(v[1:] > v[:-1], within, np.inf)
    cut = int(np.argmin(within)) + 1
    low, high = v[:cut], v[cut:]
    return TwoMeans(
        threshold=float((low[-1] + high[0]) / 2),
        low_mean=float(low.mean()),
        high_mean=float(high.mean()),
        low_sd=float(low.std()),
        high_sd=float(high.std()),
        n_low=int(low.size),
        n_high=int(high.size),
    )


@dataclass(frozen=True, eq=False)
class MSuggestion:
    values: np.ndarray
    bimodal: bool
    interval: tuple[float, float] | None
    point: float | None
    slice_interval: tuple[float, float] | None = None
    split: TwoMeans | None = None
    histogram: Histogram | None = field(default=None)

    def candidates(self) -> list[float]:
        """Round numbers (1, 2, 5 times a power of ten) inside the suggested interval."""
        lo, hi = self.interval if self.interval else (self.point, self.point)
        if lo is None:
            return []
        out = []
        for e in range(math.floor(math.log10(lo)) - 1, math.ceil(math.log10(hi)) + 1):
            for mant in (1, 2, 5):
                c = mant * 10.0 ** e
                if lo <= c <= hi:
                    out.append(float(round(c, 12)))
        if not out and self.point is not None:
            out.append(round_125(self.point))
        return sorted(set(out))

    def to_dict(self) -> dict:
        out = {
            "bimodal": self.bimodal,
            "interval": list(self.interval) if self.interval else None,
            "point": self.point,
            "slice_interval": list(self.slice_interval) if self.slice_interval else None,
            "candidates": self.candidates(),
            "n_values": int(self.values.size),
        }
        if self.split is not None:
            out["ashman_d"] = self.split.ashman_d
        return out


def round_125(x: float) -> float:
    """Nearest number of the form 1, 2 or 5 times a power of ten (on a log scale)."""
    e = math.floor(math.log10(x))
    choices = [mant * 10.0 ** p for p in (e, e + 1) for mant in (1, 2, 5)]
    return float(min(choices, key=lambda c: abs(math.log(c / x))))


BIMODAL_D = 2.0


def suggest_m(net: ValuedNetwork, partition: Partition | None = None,
              f: RowColFunction | str = RowColFunction.SUM, blocks_regular: bool = True,
              slice_threshold: float | None = None, bins: int = 10) -> MSuggestion:
    """Look for two modes (no tie vs. a real tie) in the values m is compared with.

    Regular models compare m with row/column f-values of blocks, other models
    with single cells. Modes are found by a two-means split of the log nonzero
    values; when the split is clean, m should fall between the two group
    centers and the geometric midpoint is offered as a point estimate. With a
    slicing threshold t, the range [t, 2t] is reported as well.
    """
    f = RowColFunction(f)
    if blocks_regular:
        part = partition if partition is not None else Partition((0,) * net.n, 1)
        values = block_summaries(net, part, f).pooled()
    else:
        mask = np.ones((net.n, net.n), dtype=bool)
        if not net.diagonal_relevant:
            np.fill_diagonal(mask, False)
        values = net.values[mask]
    values = np.sort(values[values > 0])
    hist = histogram(values, bins)
    slice_interval = None
    if slice_threshold is not None:
        if not slice_threshold > 0:
            raise ValueError("slicing threshold must be positive")
        slice_interval = (float(slice_threshold), 2.0 * slice_threshold)
    if values.size == 0:
        return MSuggestion(values, False, None, None, slice_interval, None, hist)

    logs = np.log(values)
    split = two_means(logs)
    bimodal = (split is not None and split.n_low >= 2 and split.n_high >= 2
               and split.ashman_d >= BIMODAL_D)
    if bimodal:
        interval = (math.exp(split.low_mean), math.exp(split.high_mean))
        point = math.exp((split.low_mean + split.high_mean) / 2)
    else:
        interval = None
        point = float(np.median(values))
    return MSuggestion(values, bimodal, interval, point, slice_interval, split, hist)
