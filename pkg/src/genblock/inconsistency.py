"""Ideal block types and block inconsistencies.

Every formula here is written against a masked cell layout (:class:`Cells`)
whose arrays may carry arbitrary leading batch dimensions. A single block is
the unbatched case; the partition search scores whole batches of partitions
through the same code.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .network import BlockView


class BlockType(str, Enum):
    NULL = "null"
    COM = "com"
    RDO = "rdo"
    CDO = "cdo"
    RRE = "rre"
    CRE = "cre"
    REG = "reg"
    RFN = "rfn"
    CFN = "cfn"

    @property
    def precedence(self) -> int:
        return _PRECEDENCE[self]

    def __str__(self):
        return self.value


_PRECEDENCE = {t: i for i, t in enumerate(BlockType)}

ALL_TYPES = frozenset(BlockType)
HOMOGENEITY_TYPES = frozenset(
    {BlockType.NULL, BlockType.COM, BlockType.RRE, BlockType.CRE, BlockType.REG}
)
F_TYPES = frozenset({BlockType.RRE, BlockType.CRE, BlockType.REG})


class RowColFunction(str, Enum):
    MAX = "max"
    SUM = "sum"
    MEAN = "mean"

    @property
    def dominates_max(self) -> bool:
        """True iff f(a) >= max(a) for every nonnegative vector a."""
        return self is not RowColFunction.MEAN

    def __call__(self, values, nominal_length: int | None = None) -> float:
        """Apply to a plain vector; empty vectors give 0.

        ``nominal_length`` is the full line length when some cells (loops) were
        left out; ``sum`` is then extrapolated from the mean of the cells kept.
        """
        v = np.asarray(values, dtype=float).ravel()
        if v.size == 0:
            return 0.0
        if self is RowColFunction.MAX:
            return float(v.max())
        if self is RowColFunction.MEAN:
            return float(v.mean())
        if nominal_length is None or nominal_length == v.size:
            return float(v.sum())
        return float(v.sum() * nominal_length / v.size)

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class CenterSpec:
    """Center that homogeneity deviations are measured from.

    ``value=None`` fits the center (mean for ss, median for ad).
    """

    value: float | None = None

    def __post_init__(self):
        if self.value is not None and not np.isfinite(self.value):
            raise ValueError("a pre-specified center must be finite")

    @classmethod
    def prespecified(cls, value: float) -> "CenterSpec":
        return cls(float(value))

    @property
    def fitted(self) -> bool:
        return self.value is None


FITTED = CenterSpec()


def pos_part(x):
    return np.maximum(x, 0.0)


def neg_part(x):
    return np.minimum(x, 0.0)


# -- masked cell layout -------------------------------------------------------

@dataclass(frozen=True)
class Cells:
    """Block cells in masked form.

    x    : (..., R, C) values (may be a broadcastable view)
    w    : (..., R, C) bool, cells that are scored at all
    d    : (..., R, C) bool or None, diagonal cells scored as a separate group
    rows : (..., R) bool, rows belonging to the block
    cols : (..., C) bool
    """

    x: np.ndarray
    w: np.ndarray
    d: np.ndarray | None
    rows: np.ndarray
    cols: np.ndarray

    @property
    def off(self) -> np.ndarray:
        if self.d is None:
            return self.w
        return self.w & ~self.d


def cells_of(block: BlockView) -> Cells:
    sep = block.separate_diagonal_mask()
    r, c = block.shape
    return Cells(
        x=block.values,
        w=block.scored_mask(),
        d=sep if sep.any() else None,
        rows=np.ones(r, dtype=bool),
        cols=np.ones(c, dtype=bool),
    )


def _flat(x: np.ndarray, mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.broadcast_to(x, mask.shape)
    shape = mask.shape[:-2] + (-1,)
    return x.reshape(shape), mask.reshape(shape)


def _masked_median(values: np.ndarray, mask: np.ndarray, cnt: np.ndarray) -> np.ndarray:
    # even counts: midpoint of the two central order statistics
    s = np.sort(np.where(mask, values, np.inf), axis=-1)
    lo = np.take_along_axis(s, np.maximum((cnt - 1) // 2, 0)[..., None], -1)[..., 0]
    hi = np.take_along_axis(s, np.minimum(cnt // 2, s.shape[-1] - 1)[..., None], -1)[..., 0]
    with np.errstate(invalid="ignore"):
        med = (lo + hi) / 2
    return np.where(cnt > 0, med, 0.0)


def _deviation(values, mask, variant: str, center: float | None = None) -> np.ndarray:
    """ss or ad of the masked entries along the last axis."""
    values, mask = np.broadcast_arrays(values, mask)
    cnt = mask.sum(-1)
    if center is None:
        if variant == "ss":
            c = (values * mask).sum(-1) / np.maximum(cnt, 1)
        else:
            c = _masked_median(values, mask, cnt)
        c = c[..., None]
    else:
        c = center
    dev = values - c
    if variant == "ss":
        return (dev * dev * mask).sum(-1)
    return (np.abs(dev) * mask).sum(-1)


def line_values(f: RowColFunction, cells: Cells, axis: int) -> np.ndarray:
    """f over each row (axis=-1) or column (axis=-2) of the scored cells."""
    f = RowColFunction(f)
    x, w = cells.x, cells.w
    cnt = w.sum(axis)
    if f is RowColFunction.MAX:
        v = np.where(w, x, -np.inf).max(axis)
        return np.where(cnt > 0, v, 0.0)
    s = (x * w).sum(axis)
    if f is RowColFunction.MEAN:
        return np.where(cnt > 0, s / np.maximum(cnt, 1), 0.0)
    other = cells.cols if axis == -1 else cells.rows
    nominal = other.sum(-1)[..., None]
    scaled = np.where(cnt > 0, s * nominal / np.maximum(cnt, 1), 0.0)
    return np.where(cnt == nominal, s, scaled)


def _line_length(w: np.ndarray, axis: int) -> np.ndarray:
    # scored cells per row (column); uniform within a block
    return w.sum(axis).max(-1)


# -- kernels ------------------------------------------------------------------

def binary_kernel(cells: Cells, t: BlockType) -> np.ndarray:
    x, w, off, d = cells.x, cells.w, cells.off, cells.d
    xw = x * w
    s_t = xw.sum((-2, -1))
    if d is not None:
        s_d = (x * d).sum((-2, -1))
        n_d = d.sum((-2, -1))
    else:
        s_d = n_d = 0
    n_r = cells.rows.sum(-1)
    n_c = cells.cols.sum(-1)

    if t is BlockType.NULL:
        return s_t + np.minimum(0, n_d - 2 * s_d)
    if t is BlockType.COM:
        return w.sum((-2, -1)) - s_t + np.minimum(2 * s_d - n_d, 0)
    if t is BlockType.RDO:
        xo = x * off
        m_r = np.where(cells.rows, xo.sum(-1), -np.inf).max(-1)
        return (_line_length(off, -1) - m_r) * n_r
    if t is BlockType.CDO:
        xo = x * off
        m_c = np.where(cells.cols, xo.sum(-2), -np.inf).max(-1)
        return (_line_length(off, -2) - m_c) * n_c

    row_nonnull = xw.sum(-1) > 0
    col_nonnull = xw.sum(-2) > 0
    p_r = (row_nonnull & cells.rows).sum(-1)
    p_c = (col_nonnull & cells.cols).sum(-1)
    L_r = _line_length(w, -1)
    L_c = _line_length(w, -2)

    if t is BlockType.RRE:
        return (n_r - p_r) * L_r
    if t is BlockType.CRE:
        return (n_c - p_c) * L_c
    if t is BlockType.REG:
        # cells in a null row or a null column, overlap counted once
        both = (w & ~row_nonnull[..., :, None] & ~col_nonnull[..., None, :]).sum((-2, -1))
        return (n_r - p_r) * L_r + (n_c - p_c) * L_c - both
    if t is BlockType.RFN:
        return s_t - p_r + (n_r - p_r) * L_r
    if t is BlockType.CFN:
        return s_t - p_c + (n_c - p_c) * L_c
    raise ValueError(f"unknown block type {t!r}")


def valued_kernel(cells: Cells, t: BlockType, m: float, f: RowColFunction) -> np.ndarray:
    x, w, off, d = cells.x, cells.w, cells.off, cells.d
    short = pos_part(m - x)

    if t in (BlockType.NULL, BlockType.COM):
        base = (x if t is BlockType.NULL else short) * off
        total = base.sum((-2, -1))
        if d is not None:
            # whole diagonal either all 0 or all at least m, whichever is cheaper
            total = total + np.minimum((x * d).sum((-2, -1)), (short * d).sum((-2, -1)))
        return total
    if t in (BlockType.RDO, BlockType.CDO):
        axis = -1 if t is BlockType.RDO else -2
        present = cells.rows if t is BlockType.RDO else cells.cols
        cost = (short * off).sum(axis)
        if d is not None:
            cost = cost + (np.minimum(short, x) * d).sum(axis)
        best = np.where(present, cost, np.inf).min(-1)
        return best * present.sum(-1)
    if t is BlockType.RRE:
        rv = line_values(f, cells, -1)
        return (pos_part(m - rv) * w.sum(-1) * cells.rows).sum(-1)
    if t is BlockType.CRE:
        cv = line_values(f, cells, -2)
        return (pos_part(m - cv) * w.sum(-2) * cells.cols).sum(-1)
    if t is BlockType.REG:
        rd = pos_part(m - line_values(f, cells, -1))
        cd = pos_part(m - line_values(f, cells, -2))
        return (np.maximum(rd[..., :, None], cd[..., None, :]) * w).sum((-2, -1))
    if t in (BlockType.RFN, BlockType.CFN):
        axis = -1 if t is BlockType.RFN else -2
        present = cells.rows if t is BlockType.RFN else cells.cols
        top = line_values(RowColFunction.MAX, cells, axis)
        line_sum = (x * w).sum(axis)
        cnt = w.sum(axis)
        # the maximal cell of each line is exempt once; ties are equal anyway
        return ((pos_part(m - top) * cnt + line_sum - top) * present).sum(-1)
    raise ValueError(f"unknown block type {t!r}")


def homogeneity_kernel(cells: Cells, t: BlockType, variant: str,
                       f: RowColFunction, center: CenterSpec = FITTED) -> np.ndarray:
    if t in (BlockType.NULL, BlockType.COM):
        c = 0.0 if t is BlockType.NULL else center.value
        xf, mf = _flat(cells.x, cells.off)
        total = _deviation(xf, mf, variant, c)
        if cells.d is not None:
            xd, md = _flat(cells.x, cells.d)
            total = total + _deviation(xd, md, variant, None)
        return total
    if t not in F_TYPES:
        raise ValueError(f"block type {t.value!r} is not defined for homogeneity blockmodeling")
    row_part = col_part = None
    if t in (BlockType.RRE, BlockType.REG):
        rv = line_values(f, cells, -1)
        row_part = _deviation(rv, cells.rows, variant) * _line_length(cells.w, -1)
    if t in (BlockType.CRE, BlockType.REG):
        cv = line_values(f, cells, -2)
        col_part = _deviation(cv, cells.cols, variant) * _line_length(cells.w, -2)
    if t is BlockType.RRE:
        return row_part
    if t is BlockType.CRE:
        return col_part
    return np.maximum(row_part, col_part)


# -- public single-block API --------------------------------------------------

def _as_type(t) -> BlockType:
    return t if isinstance(t, BlockType) else BlockType(t)


def _vector(values) -> np.ndarray:
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("ss/ad of an empty vector")
    return v


def _center_value(center) -> float | None:
    if isinstance(center, CenterSpec):
        return center.value
    return None if center is None else float(center)


def ss(values, center: CenterSpec | float | None = FITTED) -> float:
    """Sum of squared deviations from the mean (or a given center)."""
    v = _vector(values)
    c = _center_value(center)
    c = v.mean() if c is None else c
    return float(((v - c) ** 2).sum())


def ad(values, center: CenterSpec | float | None = FITTED) -> float:
    """Sum of absolute deviations from the median (or a given center)."""
    v = _vector(values)
    c = _center_value(center)
    c = np.median(v) if c is None else c
    return float(np.abs(v - c).sum())


def binary_block_inconsistency(block: BlockView, type) -> float:
    v = block.values
    if not np.all((v == 0) | (v == 1)):
        raise ValueError("binary blockmodeling needs a block of 0/1 values")
    return float(binary_kernel(cells_of(block), _as_type(type)))


def valued_block_inconsistency(block: BlockView, type, m: float,
                               f: RowColFunction | str = RowColFunction.MAX) -> float:
    t = _as_type(type)
    f = RowColFunction(f)
    if not m > 0:
        raise ValueError(f"parameter m must be positive, got {m}")
    if np.any(block.values < 0):
        raise ValueError("valued blockmodeling cannot handle negative tie values")
    if t in F_TYPES and not f.dominates_max:
        warnings.warn(
            f"f={f.value} does not dominate max: f-regular and complete blocks are "
            "no longer compatible and binary blockmodeling is not a special case",
            stacklevel=2,
        )
    return float(valued_kernel(cells_of(block), t, float(m), f))


def homogeneity_block_inconsistency(block: BlockView, type, variant: str = "ss",
                                    f: RowColFunction | str = RowColFunction.MEAN,
                                    center: CenterSpec = FITTED) -> float:
    t = _as_type(type)
    if variant not in ("ss", "ad"):
        raise ValueError(f"variant must be 'ss' or 'ad', got {variant!r}")
    if t not in HOMOGENEITY_TYPES:
        raise ValueError(f"block type {t.value!r} is not defined for homogeneity blockmodeling")
    return float(homogeneity_kernel(cells_of(block), t, variant, RowColFunction(f), center))


def normalize(delta: float, block: BlockView) -> float:
    """Divide by the number of scored cells."""
    n = block.cell_count()
    return float(delta) / n if n else 0.0
