"""Optimization of the criterion over partitions.

Exhaustive enumeration serves as an oracle on small networks; the workhorse
is a multistart steepest-descent local search over move and swap neighborhoods.
"""

from __future__ import annotations

import itertools
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .criterion import BatchEvaluator, FitResult, ModelSpec, total_inconsistency
from .network import Partition, ValuedNetwork

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 5_000_000


def stirling2(n: int, k: int) -> int:
    """Number of partitions of n items into exactly k nonempty blocks."""
    if n < 0 or k < 0:
        raise ValueError("negative arguments")
    row = [1] + [0] * k  # S(0, j)
    for i in range(1, n + 1):
        new = [0] * (k + 1)
        for j in range(1, min(i, k) + 1):
            new[j] = j * row[j] + row[j - 1]
        row = new
    return row[k]


def enumerate_partitions(n: int, k: int) -> np.ndarray:
    """All canonical assignments (restricted growth strings) with exactly k clusters.

    Rows come out in lexicographic order.
    """
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    a = np.zeros((1, 1), dtype=np.int8)
    top = np.zeros(1, dtype=np.int8)
    for pos in range(1, n):
        remaining = n - pos - 1
        blocks_a, blocks_top = [], []
        for c in range(min(pos + 1, k)):
            ok = c <= top + 1
            new_top = np.maximum(top, c)
            ok &= (k - 1 - new_top) <= remaining
            if ok.any():
                idx = np.nonzero(ok)[0]
                blocks_a.append(np.column_stack([a[idx], np.full(idx.size, c, np.int8)]))
                blocks_top.append(new_top[idx])
        a = np.concatenate(blocks_a)
        top = np.concatenate(blocks_top)
        order = np.lexsort(a.T[::-1])
        a, top = a[order], top[order]
    return a


def iter_partitions(n: int, k: int) -> Iterator[Partition]:
    for row in enumerate_partitions(n, k):
        yield Partition(tuple(int(v) for v in row), k)


@dataclass(frozen=True)
class SearchConfig:
    k: int
    restarts: int = 100
    seed: int = 0
    neighborhood: str = "moves+swaps"
    max_iterations: int = 10_000
    collect_all_optima: bool = False
    optimum_epsilon: float = 1e-9
    plateau_limit: int = 10_000

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.neighborhood not in ("moves", "moves+swaps"):
            raise ValueError(f"unknown neighborhood {self.neighborhood!r}")
        if self.optimum_epsilon < 0:
            raise ValueError("optimum_epsilon must be nonnegative")


@dataclass(frozen=True)
class RestartRecord:
    start: Partition
    optimum: Partition
    total: float
    steps: int
    trajectory: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class SearchResult:
    best: FitResult
    optima: tuple[Partition, ...]
    restarts_reaching_best: int | None
    evaluations: int
    restarts: tuple[RestartRecord, ...] = field(default=())
    exhaustive: bool = False

    def to_dict(self) -> dict:
        return {
            "best_total": self.best.total,
            "optima": [list(p.assignment) for p in self.optima],
            "optima_count": len(self.optima),
            "restarts_reaching_best": self.restarts_reaching_best,
            "evaluations": self.evaluations,
            "exhaustive": self.exhaustive,
        }


def _tolerance(best: float, eps: float) -> float:
    return eps * max(abs(best), 1.0)


def _key(spec: ModelSpec, a: np.ndarray) -> tuple[int, ...]:
    p = Partition(tuple(int(v) for v in a))
    return (p.canonical() if spec.label_free else p).assignment


def exhaustive_search(net: ValuedNetwork, spec: ModelSpec, k: int,
                      budget: int = DEFAULT_BUDGET, epsilon: float = 1e-9) -> SearchResult:
    """Score every partition into exactly k clusters and keep all co-optimal ones.

    For pre-specified models each partition is also tried under every cluster
    relabeling, since positions are not interchangeable there.
    """
    if not 1 <= k <= net.n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={net.n}")
    perms = [tuple(range(k))] if spec.label_free else list(itertools.permutations(range(k)))
    count = stirling2(net.n, k) * len(perms)
    if count > budget:
        raise ValueError(f"{count} partitions exceed the enumeration budget of {budget}")
    evaluator = BatchEvaluator(net, spec, k)
    base = enumerate_partitions(net.n, k).astype(np.intp)
    candidates, totals = [], []
    for perm in perms:
        relabeled = np.asarray(perm, dtype=np.intp)[base]
        candidates.append(relabeled)
        totals.append(evaluator.totals(relabeled))
    candidates = np.concatenate(candidates)
    totals = np.concatenate(totals)
    best = float(totals.min())
    hits = np.nonzero(totals <= best + _tolerance(best, epsilon))[0]
    optima = sorted({Partition(tuple(int(v) for v in candidates[i]), k) for i in hits},
                    key=lambda p: p.assignment)
    winner = candidates[hits[np.argmin(totals[hits])]]
    fit = total_inconsistency(net, Partition(tuple(int(v) for v in winner), k), spec)
    log.info("exhaustive: %d partitions, best %.6g, %d optima", count, best, len(optima))
    return SearchResult(fit, tuple(optima), None, evaluator.evaluations, exhaustive=True)


def random_start(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Shuffle units, seed each cluster with one of the first k, deal the rest uniformly."""
    order = rng.permutation(n)
    a = np.empty(n, dtype=np.intp)
    a[order[:k]] = np.arange(k)
    a[order[k:]] = rng.integers(0, k, size=n - k)
    return a


def neighbors(a: np.ndarray, k: int, swaps: bool = True) -> np.ndarray:
    """Moves of one unit to another cluster (never emptying one), then swaps."""
    n = a.size
    sizes = np.bincount(a, minlength=k)
    out = []
    for u in range(n):
        if sizes[a[u]] == 1:
            continue
        for c in range(k):
            if c != a[u]:
                b = a.copy()
                b[u] = c
                out.append(b)
    if swaps:
        for u in range(n):
            for v in range(u + 1, n):
                if a[u] != a[v]:
                    b = a.copy()
                    b[u], b[v] = a[v], a[u]
                    out.append(b)
    if not out:
        return np.empty((0, n), dtype=np.intp)
    return np.array(out, dtype=np.intp)


def _descend(evaluator: BatchEvaluator, a: np.ndarray, total: float,
             config: SearchConfig) -> tuple[np.ndarray, float, list[float]]:
    swaps = config.neighborhood == "moves+swaps"
    trajectory = [total]
    for _ in range(config.max_iterations):
        cand = neighbors(a, config.k, swaps)
        if len(cand) == 0:
            break
        totals = evaluator.totals(cand)
        i = int(np.argmin(totals))
        if not totals[i] < total:
            break
        a, total = cand[i], float(totals[i])
        trajectory.append(total)
    return a, total, trajectory


def _plateau(evaluator: BatchEvaluator, spec: ModelSpec, seeds: list[np.ndarray],
             best: float, tol: float, config: SearchConfig) -> set[tuple[int, ...]]:
    """All partitions reachable from ``seeds`` through neighbors within tol of best."""
    swaps = config.neighborhood == "moves+swaps"
    seen = {_key(spec, a) for a in seeds}
    queue = list(seeds)
    while queue and len(seen) < config.plateau_limit:
        a = queue.pop()
        cand = neighbors(a, config.k, swaps)
        if len(cand) == 0:
            continue
        totals = evaluator.totals(cand)
        for b in cand[totals <= best + tol]:
            key = _key(spec, b)
            if key not in seen:
                seen.add(key)
                queue.append(np.array(key, dtype=np.intp))
    return seen


def local_search(net: ValuedNetwork, spec: ModelSpec, config: SearchConfig,
                 start: Partition | None = None) -> SearchResult:
    """Multistart steepest descent.

    Restart r draws its start from its own generator spawned from ``config.seed``;
    a given ``start`` replaces the random start of restart 0.
    """
    k = config.k
    if k > net.n:
        raise ValueError(f"k={k} exceeds the {net.n} units")
    if start is not None and (start.k != k or start.n != net.n):
        raise ValueError("start partition does not match k or the network size")
    evaluator = BatchEvaluator(net, spec, k)
    seeds = np.random.SeedSequence(config.seed).spawn(config.restarts)
    records: list[RestartRecord] = []
    for r, ss in enumerate(seeds):
        rng = np.random.default_rng(ss)
        if r == 0 and start is not None:
            a0 = start.array
        else:
            a0 = random_start(net.n, k, rng)
        t0 = float(evaluator.totals(a0)[0])
        a, total, trajectory = _descend(evaluator, a0, t0, config)
        opt = Partition(tuple(int(v) for v in a), k)
        if spec.label_free:
            opt = opt.canonical()
        records.append(RestartRecord(Partition(tuple(int(v) for v in a0), k), opt, total,
                                     len(trajectory) - 1, tuple(trajectory)))

    # best-of reduction keyed by (total, partition) is order independent
    best_rec = min(records, key=lambda rec: (rec.total, rec.optimum.assignment))
    tol = _tolerance(best_rec.total, config.optimum_epsilon)
    reaching = [rec for rec in records if rec.total <= best_rec.total + tol]
    keys = {rec.optimum.assignment for rec in reaching}
    if config.collect_all_optima:
        keys |= _plateau(evaluator, spec, [rec.optimum.array for rec in reaching],
                         best_rec.total, tol, config)
    optima = tuple(sorted((Partition(key, k) for key in keys), key=lambda p: p.assignment))
    fit = total_inconsistency(net, best_rec.optimum, spec)
    return SearchResult(fit, optima, len(reaching), evaluator.evaluations, tuple(records))


def multistart_report(result: SearchResult) -> dict:
    """Distinct local optima, their basin sizes, and the multiplicity of the best total."""
    out = {
        "best_total": result.best.total,
        "optima_count": len(result.optima),
        "restarts_reaching_best": result.restarts_reaching_best,
        "evaluations": result.evaluations,
    }
    if result.restarts:
        basins = Counter(rec.optimum.assignment for rec in result.restarts)
        totals = {rec.optimum.assignment: rec.total for rec in result.restarts}
        out["restarts"] = len(result.restarts)
        out["distinct_local_optima"] = len(basins)
        out["basins"] = [
            {"partition": list(p), "total": totals[p], "restarts": cnt}
            for p, cnt in sorted(basins.items(), key=lambda kv: (totals[kv[0]], kv[0]))
        ]
    return out


def optimize(net: ValuedNetwork, spec: ModelSpec, config: SearchConfig,
             exhaustive: bool = False, budget: int = DEFAULT_BUDGET) -> SearchResult:
    """Exhaustive or local search; a single cluster needs neither."""
    if config.k > net.n:
        raise ValueError(f"k={config.k} exceeds the {net.n} units")
    if config.k == 1:
        fit = total_inconsistency(net, Partition((0,) * net.n, 1), spec)
        return SearchResult(fit, (fit.partition,), None, 1, exhaustive=True)
    if exhaustive:
        return exhaustive_search(net, spec, config.k, budget, config.optimum_epsilon)
    return local_search(net, spec, config)
