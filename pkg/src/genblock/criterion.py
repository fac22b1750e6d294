"""Total inconsistency of a partition, image matrices, and exact equivalence checks."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .inconsistency import (
    ALL_TYPES,
    F_TYPES,
    FITTED,
    HOMOGENEITY_TYPES,
    BlockType,
    CenterSpec,
    Cells,
    RowColFunction,
    binary_kernel,
    cells_of,
    homogeneity_kernel,
    valued_kernel,
)
from .network import (
    BlockView,
    DiagonalPolicy,
    Partition,
    ValuedNetwork,
    effective_policy,
    extract_block,
)


class Approach(str, Enum):
    BINARY = "binary"
    VALUED = "valued"
    SS = "ss"
    AD = "ad"

    @property
    def is_homogeneity(self) -> bool:
        return self in (Approach.SS, Approach.AD)

    def __str__(self):
        return self.value


def parse_type_set(spec) -> frozenset[BlockType]:
    """Accept "null|reg", "null,reg", a BlockType, or an iterable of either."""
    if isinstance(spec, BlockType):
        return frozenset({spec})
    if isinstance(spec, str):
        parts = [p.strip() for p in spec.replace("|", ",").split(",") if p.strip()]
        return frozenset(BlockType(p) for p in parts)
    return frozenset(BlockType(p) for p in spec)


def _is_flat(allowed) -> bool:
    if isinstance(allowed, (str, BlockType, frozenset, set)):
        return True
    items = list(allowed)
    return all(isinstance(a, (str, BlockType)) for a in items)


@dataclass(frozen=True)
class ModelSpec:
    """Blockmodel to fit.

    ``allowed`` is either one set of block types used for every position, or a
    k x k nested sequence of sets (a pre-specified model). By default every
    type the approach defines is allowed. ``centers`` gives
    pre-specified central values for homogeneity complete blocks.
    """

    approach: Approach
    allowed: frozenset | tuple | None = None
    f: RowColFunction = RowColFunction.MAX
    m: float | None = None
    centers: tuple | None = None
    normalize: bool = False
    diagonal: DiagonalPolicy = DiagonalPolicy.VARIANT

    def __post_init__(self):
        approach = Approach(self.approach)
        object.__setattr__(self, "approach", approach)
        object.__setattr__(self, "f", RowColFunction(self.f))
        object.__setattr__(self, "diagonal", DiagonalPolicy(self.diagonal))

        if self.allowed is None:
            allowed = HOMOGENEITY_TYPES if approach.is_homogeneity else ALL_TYPES
            sets = [allowed]
        elif _is_flat(self.allowed):
            allowed = parse_type_set(self.allowed)
            sets = [allowed]
        else:
            allowed = tuple(tuple(parse_type_set(c) for c in row) for row in self.allowed)
            k = len(allowed)
            if k == 0 or any(len(row) != k for row in allowed):
                raise ValueError("a pre-specified model must be a square k x k matrix")
            sets = [c for row in allowed for c in row]
        object.__setattr__(self, "allowed", allowed)

        for s in sets:
            if not s:
                raise ValueError("every position needs at least one allowed block type")
            if approach.is_homogeneity and not s <= HOMOGENEITY_TYPES:
                bad = sorted(t.value for t in s - HOMOGENEITY_TYPES)
                raise ValueError(f"block types {bad} are not defined for homogeneity blockmodeling")

        if approach is Approach.VALUED:
            if self.m is None or not self.m > 0:
                raise ValueError("valued blockmodeling needs a positive parameter m")
            object.__setattr__(self, "m", float(self.m))
            if not self.f.dominates_max and any(s & F_TYPES for s in sets):
                warnings.warn(
                    f"f={self.f.value} does not dominate max: f-regular and complete "
                    "blocks are not compatible in valued blockmodeling",
                    stacklevel=2,
                )
        elif self.m is not None:
            raise ValueError("parameter m only applies to valued blockmodeling")

        if self.centers is not None:
            if not approach.is_homogeneity:
                raise ValueError("pre-specified centers only apply to homogeneity blockmodeling")
            centers = tuple(
                tuple(c if isinstance(c, CenterSpec) else CenterSpec(None if c is None else float(c))
                      for c in row)
                for row in self.centers
            )
            k = len(centers)
            if any(len(row) != k for row in centers):
                raise ValueError("centers must be a square k x k matrix")
            if self.prespecified and k != len(self.allowed):
                raise ValueError("centers and allowed block matrix differ in size")
            object.__setattr__(self, "centers", centers)

    @property
    def prespecified(self) -> bool:
        return isinstance(self.allowed, tuple)

    @property
    def label_free(self) -> bool:
        """Whether cluster labels carry no meaning (total invariant to relabeling)."""
        return not self.prespecified and self.centers is None

    def check_k(self, k: int) -> None:
        if self.prespecified and len(self.allowed) != k:
            raise ValueError(
                f"pre-specified model is {len(self.allowed)}x{len(self.allowed)} but k={k}"
            )
        if self.centers is not None and len(self.centers) != k:
            raise ValueError(f"centers matrix is {len(self.centers)}x{len(self.centers)} but k={k}")

    def check_network(self, net: ValuedNetwork) -> None:
        if self.approach is Approach.BINARY and not net.is_binary():
            raise ValueError("binary blockmodeling needs a 0/1 network; slice it first")
        if self.approach is Approach.VALUED and not net.is_nonnegative():
            raise ValueError("valued blockmodeling cannot handle negative tie values")

    def allowed_at(self, i: int, j: int) -> tuple[BlockType, ...]:
        s = self.allowed[i][j] if self.prespecified else self.allowed
        return tuple(sorted(s, key=lambda t: t.precedence))

    def center_at(self, i: int, j: int) -> CenterSpec:
        if self.centers is None:
            return FITTED
        return self.centers[i][j]

    def kernel(self, cells: Cells, t: BlockType, center: CenterSpec = FITTED) -> np.ndarray:
        if self.approach is Approach.BINARY:
            return binary_kernel(cells, t)
        if self.approach is Approach.VALUED:
            return valued_kernel(cells, t, self.m, self.f)
        return homogeneity_kernel(cells, t, self.approach.value, self.f, center)

    def describe(self) -> dict:
        if self.prespecified:
            allowed = [[sorted(t.value for t in c) for c in row] for row in self.allowed]
        else:
            allowed = [t.value for t in self.allowed_at(0, 0)]
        out = {
            "approach": self.approach.value,
            "allowed": allowed,
            "f": self.f.value,
            "m": self.m,
            "normalize": self.normalize,
            "diagonal": self.diagonal.value,
        }
        if self.centers is not None:
            out["centers"] = [[c.value for c in row] for row in self.centers]
        return out


@dataclass(frozen=True, eq=False)
class FitResult:
    partition: Partition
    total: float
    image: tuple[tuple[BlockType, ...], ...]
    block_inconsistencies: np.ndarray
    ties: tuple[tuple[frozenset, ...], ...] = field(default=())

    def image_tags(self) -> list[list[str]]:
        return [[t.value for t in row] for row in self.image]

    def to_dict(self, net: ValuedNetwork | None = None) -> dict:
        out = {
            "partition": list(self.partition.assignment),
            "k": self.partition.k,
            "total": self.total,
            "image": self.image_tags(),
            "block_inconsistencies": self.block_inconsistencies.tolist(),
            "ties": [[sorted((t.value for t in s), key=lambda v: BlockType(v).precedence)
                      for s in row] for row in self.ties],
        }
        if net is not None:
            out["clusters"] = {
                net.unit_labels[u]: c for u, c in enumerate(self.partition.assignment)
            }
        return out


def block_fit(block: BlockView, allowed: Iterable, spec: ModelSpec,
              center: CenterSpec = FITTED) -> tuple[float, BlockType, frozenset]:
    """Minimal inconsistency over the allowed types, the winning type, and all minimizers."""
    types = sorted(parse_type_set(allowed), key=lambda t: t.precedence)
    if not types:
        raise ValueError("no allowed block types")
    cells = cells_of(block)
    n_cells = block.cell_count()
    values = []
    for t in types:
        if spec.approach.is_homogeneity and t not in HOMOGENEITY_TYPES:
            raise ValueError(f"block type {t.value!r} is not defined for homogeneity blockmodeling")
        v = float(spec.kernel(cells, t, center))
        if spec.normalize:
            v = v / n_cells if n_cells else 0.0
        values.append(v)
    best = min(values)
    ties = frozenset(t for t, v in zip(types, values) if v == best)
    winner = types[values.index(best)]
    return best, winner, ties


def total_inconsistency(net: ValuedNetwork, partition: Partition, spec: ModelSpec) -> FitResult:
    if partition.n != net.n:
        raise ValueError(f"partition covers {partition.n} units, network has {net.n}")
    spec.check_k(partition.k)
    spec.check_network(net)
    k = partition.k
    policy = effective_policy(net, spec.diagonal)
    deltas = np.zeros((k, k))
    image, ties = [], []
    total = 0.0
    for i in range(k):
        img_row, tie_row = [], []
        for j in range(k):
            block = extract_block(net, partition, i, j, policy)
            v, winner, tie = block_fit(block, spec.allowed_at(i, j), spec, spec.center_at(i, j))
            deltas[i, j] = v
            total += v
            img_row.append(winner)
            tie_row.append(tie)
        image.append(tuple(img_row))
        ties.append(tuple(tie_row))
    return FitResult(partition, total, tuple(image), deltas, tuple(ties))


class BatchEvaluator:
    """Scores many partitions of one network at once.

    Partitions arrive as an (P, n) integer array of cluster labels. Blocks are
    laid out as masks over the full n x n matrix so the same kernels apply.
    """

    def __init__(self, net: ValuedNetwork, spec: ModelSpec, k: int, chunk: int = 4096):
        spec.check_k(k)
        spec.check_network(net)
        self.net = net
        self.spec = spec
        self.k = k
        self.chunk = chunk
        self.policy = effective_policy(net, spec.diagonal)
        self._x = net.values
        self._eye = np.eye(net.n, dtype=bool)
        self._types = [[spec.allowed_at(i, j) for j in range(k)] for i in range(k)]
        self.evaluations = 0

    def _cells(self, a: np.ndarray, i: int, j: int) -> Cells:
        rows = a == i
        cols = a == j
        w = rows[:, :, None] & cols[:, None, :]
        d = None
        if i == j:
            if self.policy is DiagonalPolicy.IGNORE:
                w &= ~self._eye
            elif self.policy is DiagonalPolicy.VARIANT:
                d = w & self._eye
        return Cells(self._x, w, d, rows, cols)

    def _chunk_totals(self, a: np.ndarray, with_blocks: bool):
        P = a.shape[0]
        total = np.zeros(P)
        blocks = np.zeros((P, self.k, self.k)) if with_blocks else None
        for i in range(self.k):
            for j in range(self.k):
                cells = self._cells(a, i, j)
                best = None
                for t in self._types[i][j]:
                    v = self.spec.kernel(cells, t, self.spec.center_at(i, j))
                    if self.spec.normalize:
                        n_cells = cells.w.sum((-2, -1))
                        v = np.where(n_cells > 0, v / np.maximum(n_cells, 1), 0.0)
                    best = v if best is None else np.minimum(best, v)
                total += best
                if with_blocks:
                    blocks[:, i, j] = best
        return total, blocks

    def totals(self, assignments, with_blocks: bool = False):
        a = np.asarray(assignments, dtype=np.intp)
        if a.ndim == 1:
            a = a[None, :]
        if a.shape[1] != self.net.n:
            raise ValueError(f"assignments cover {a.shape[1]} units, network has {self.net.n}")
        self.evaluations += a.shape[0]
        parts, block_parts = [], []
        for start in range(0, a.shape[0], self.chunk):
            t, b = self._chunk_totals(a[start:start + self.chunk], with_blocks)
            parts.append(t)
            block_parts.append(b)
        totals = np.concatenate(parts) if parts else np.zeros(0)
        if with_blocks:
            return totals, np.concatenate(block_parts)
        return totals


# -- exact equivalence checks ---------------------------------------------------

def _close(a: float, b: float, epsilon: float) -> bool:
    return a == b if epsilon == 0 else abs(a - b) <= epsilon


def check_structural_equivalence(net: ValuedNetwork, a: int, b: int, epsilon: float = 0.0) -> bool:
    if a == b:
        raise ValueError("structural equivalence query on a single unit")
    r = net.values
    others = [i for i in range(net.n) if i not in (a, b)]
    for i in others:
        if not _close(r[b, i], r[a, i], epsilon) or not _close(r[i, b], r[i, a], epsilon):
            return False
    if net.diagonal_relevant and not _close(r[b, b], r[a, a], epsilon):
        return False
    return _close(r[a, b], r[b, a], epsilon)


def induces_structural_equivalence(net: ValuedNetwork, partition: Partition,
                                   epsilon: float = 0.0) -> bool:
    for members in partition.clusters():
        first = members[0]
        for other in members[1:]:
            if not check_structural_equivalence(net, first, other, epsilon):
                return False
    return True


def _f_profile(net: ValuedNetwork, unit: int, target: Sequence[int],
               f: RowColFunction, outgoing: bool) -> float:
    line = net.values[unit] if outgoing else net.values[:, unit]
    cells = [v for v in target if net.diagonal_relevant or v != unit]
    return f(line[cells], nominal_length=len(target))


def check_f_regular_equivalence(net: ValuedNetwork, partition: Partition,
                                f: RowColFunction | str, epsilon: float = 0.0) -> bool:
    """Co-clustered units must have equal f of their ties to and from every cluster."""
    f = RowColFunction(f)
    clusters = partition.clusters()
    for members in clusters:
        for target in clusters:
            for outgoing in (True, False):
                ref = _f_profile(net, members[0], target, f, outgoing)
                for u in members[1:]:
                    if not _close(_f_profile(net, u, target, f, outgoing), ref, epsilon):
                        return False
    return True
