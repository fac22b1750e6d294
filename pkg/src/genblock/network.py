"""Valued one-mode networks, partitions of their units, and block views."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np


class DiagonalPolicy(str, Enum):
    """How cells on the diagonal of a diagonal block are scored.

    ``IGNORE`` drops them everywhere (loop-free data), ``VARIANT`` scores them
    as a separate group for the block types that have diagonal variants, and
    ``ORDINARY`` treats them as any other cell.
    """

    IGNORE = "ignore"
    VARIANT = "variant"
    ORDINARY = "ordinary"


@dataclass(frozen=True, eq=False)
class ValuedNetwork:
    values: np.ndarray
    unit_labels: tuple[str, ...]
    diagonal_relevant: bool = False

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError(f"network matrix must be square, got shape {values.shape}")
        if values.shape[0] == 0:
            raise ValueError("network must have at least one unit")
        if not np.all(np.isfinite(values)):
            raise ValueError("network matrix contains non-finite values")
        if len(self.unit_labels) != values.shape[0]:
            raise ValueError(
                f"{len(self.unit_labels)} labels given for {values.shape[0]} units"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "unit_labels", tuple(str(s) for s in self.unit_labels))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def __eq__(self, other):
        if not isinstance(other, ValuedNetwork):
            return NotImplemented
        return (
            self.unit_labels == other.unit_labels
            and self.diagonal_relevant == other.diagonal_relevant
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.unit_labels, self.diagonal_relevant, self.values.tobytes()))

    def is_binary(self) -> bool:
        return bool(np.all((self.values == 0) | (self.values == 1)))

    def is_nonnegative(self) -> bool:
        return bool(np.all(self.values >= 0))

    def with_values(self, values: np.ndarray) -> "ValuedNetwork":
        return ValuedNetwork(values, self.unit_labels, self.diagonal_relevant)

    def with_diagonal(self, relevant: bool) -> "ValuedNetwork":
        return ValuedNetwork(self.values, self.unit_labels, relevant)

    def sliced(self, threshold: float) -> "ValuedNetwork":
        return slice_network(self, threshold)

    def censored(self, ceiling: float) -> "ValuedNetwork":
        return censor(self, ceiling)

    def index_of(self, label: str) -> int:
        try:
            return self.unit_labels.index(str(label))
        except ValueError:
            raise KeyError(f"no unit labelled {label!r}") from None


def load_network(
    matrix,
    labels: Sequence[str] | None = None,
    diagonal_relevant: bool = False,
) -> ValuedNetwork:
    """Validate ``matrix`` and wrap it as a network.

    Empty ``labels`` auto-generate "1".."n".
    """
    values = np.asarray(matrix, dtype=float)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise ValueError(f"network matrix must be square, got shape {values.shape}")
    if not labels:
        labels = [str(i + 1) for i in range(values.shape[0])]
    return ValuedNetwork(values, tuple(labels), diagonal_relevant)


def slice_network(net: ValuedNetwork, threshold: float) -> ValuedNetwork:
    """Binarize: cells at or above ``threshold`` become 1, the rest 0."""
    if not threshold > 0:
        raise ValueError(f"slicing threshold must be positive, got {threshold}")
    return net.with_values((net.values >= threshold).astype(float))


def censor(net: ValuedNetwork, ceiling: float) -> ValuedNetwork:
    """Cap every cell at ``ceiling``."""
    if not ceiling > 0:
        raise ValueError(f"censoring ceiling must be positive, got {ceiling}")
    return net.with_values(np.minimum(net.values, ceiling))


@dataclass(frozen=True)
class Partition:
    """Assignment of ``n`` units to ``k`` nonempty clusters numbered 0..k-1."""

    assignment: tuple[int, ...]
    k: int = field(default=-1)

    def __post_init__(self):
        assignment = tuple(int(a) for a in self.assignment)
        if not assignment:
            raise ValueError("partition of zero units")
        k = self.k if self.k >= 0 else max(assignment) + 1
        if min(assignment) < 0 or max(assignment) >= k:
            raise ValueError(f"cluster indices must lie in 0..{k - 1}")
        present = set(assignment)
        if len(present) != k:
            missing = sorted(set(range(k)) - present)
            raise ValueError(f"empty clusters {missing} in partition with k={k}")
        object.__setattr__(self, "assignment", assignment)
        object.__setattr__(self, "k", k)

    @classmethod
    def from_clusters(cls, clusters: Iterable[Iterable[int]], n: int | None = None) -> "Partition":
        clusters = [list(c) for c in clusters]
        size = n if n is not None else sum(len(c) for c in clusters)
        assignment = [-1] * size
        for ci, members in enumerate(clusters):
            for u in members:
                if assignment[u] != -1:
                    raise ValueError(f"unit {u} appears in more than one cluster")
                assignment[u] = ci
        if -1 in assignment:
            raise ValueError(f"unit {assignment.index(-1)} is not assigned")
        return cls(tuple(assignment), len(clusters))

    @classmethod
    def from_labels(cls, net: ValuedNetwork, clusters: Iterable[Iterable[str]]) -> "Partition":
        return cls.from_clusters(
            [[net.index_of(lab) for lab in c] for c in clusters], net.n
        )

    @property
    def n(self) -> int:
        return len(self.assignment)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.assignment, dtype=np.intp)

    def clusters(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.k)]
        for u, c in enumerate(self.assignment):
            out[c].append(u)
        return out

    def sizes(self) -> list[int]:
        return [len(c) for c in self.clusters()]

    def canonical(self) -> "Partition":
        """Relabel clusters in order of their smallest member."""
        mapping: dict[int, int] = {}
        for c in self.assignment:
            if c not in mapping:
                mapping[c] = len(mapping)
        return Partition(tuple(mapping[c] for c in self.assignment), self.k)

    @property
    def is_canonical(self) -> bool:
        return self.canonical().assignment == self.assignment

    def relabeled(self, perm: Sequence[int]) -> "Partition":
        """Cluster ``c`` becomes ``perm[c]``."""
        return Partition(tuple(perm[c] for c in self.assignment), self.k)

    def __str__(self):
        return " | ".join(",".join(str(u + 1) for u in c) for c in self.clusters())


@dataclass(frozen=True, eq=False)
class BlockView:
    rows: tuple[int, ...]
    cols: tuple[int, ...]
    values: np.ndarray
    is_diagonal: bool
    diagonal_policy: DiagonalPolicy = DiagonalPolicy.ORDINARY

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (len(self.rows), len(self.cols)):
            raise ValueError("block values do not match its row and column units")
        if self.is_diagonal != (set(self.rows) == set(self.cols)):
            raise ValueError("is_diagonal must be true exactly when rows and cols coincide")
        if self.is_diagonal and tuple(self.rows) != tuple(self.cols):
            raise ValueError("a diagonal block must list rows and cols in the same order")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "diagonal_policy", DiagonalPolicy(self.diagonal_policy))

    @classmethod
    def from_array(cls, values, diagonal: bool = False,
                   policy: DiagonalPolicy | str = DiagonalPolicy.ORDINARY) -> "BlockView":
        """Standalone block, mostly for experiments and tests."""
        values = np.asarray(values, dtype=float)
        r, c = values.shape
        rows = tuple(range(r))
        if diagonal:
            if r != c:
                raise ValueError("a diagonal block must be square")
            cols = rows
        else:
            # disjoint unit ids keep is_diagonal consistent
            cols = tuple(range(r, r + c))
        return cls(rows, cols, values, diagonal, DiagonalPolicy(policy))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def scored_mask(self) -> np.ndarray:
        """Cells that enter inconsistency sums."""
        mask = np.ones(self.values.shape, dtype=bool)
        if self.is_diagonal and self.diagonal_policy is DiagonalPolicy.IGNORE:
            np.fill_diagonal(mask, False)
        return mask

    def separate_diagonal_mask(self) -> np.ndarray:
        """Diagonal cells scored as their own group (variant policy only)."""
        mask = np.zeros(self.values.shape, dtype=bool)
        if self.is_diagonal and self.diagonal_policy is DiagonalPolicy.VARIANT:
            np.fill_diagonal(mask, True)
        return mask

    def cell_count(self) -> int:
        return int(self.scored_mask().sum())


def effective_policy(net: ValuedNetwork, policy: DiagonalPolicy | str) -> DiagonalPolicy:
    """Loops carry no information unless the network says so."""
    if not net.diagonal_relevant:
        return DiagonalPolicy.IGNORE
    return DiagonalPolicy(policy)


def extract_block(
    net: ValuedNetwork,
    partition: Partition,
    i: int,
    j: int,
    policy: DiagonalPolicy | str = DiagonalPolicy.VARIANT,
) -> BlockView:
    if partition.n != net.n:
        raise ValueError(f"partition covers {partition.n} units, network has {net.n}")
    if not (0 <= i < partition.k and 0 <= j < partition.k):
        raise IndexError(f"cluster pair ({i}, {j}) out of range for k={partition.k}")
    clusters = partition.clusters()
    rows, cols = tuple(clusters[i]), tuple(clusters[j])
    values = net.values[np.ix_(rows, cols)]
    return BlockView(rows, cols, values, i == j, effective_policy(net, policy))
