"""Acceptance checks, one printed PASS/FAIL line per criterion.

Each test records its line in ``conftest.ACCEPTANCE_LINES`` before asserting,
so the summary at the end of the run lists every criterion even when some fail.
"""

import time
from functools import lru_cache

import numpy as np
import pytest

import conftest
from genblock.criterion import BatchEvaluator, ModelSpec
from genblock.data import STUDENTS_HOMOGENEITY_PARTITION, students
from genblock.inconsistency import (
    BlockType,
    Cells,
    binary_kernel,
    homogeneity_block_inconsistency,
    homogeneity_kernel,
    normalize,
    valued_kernel,
)
from genblock.network import BlockView, Partition
from genblock.report import dumps, summary_dict
from genblock.search import SearchConfig, exhaustive_search, local_search, stirling2
from genblock.summaries import block_summaries

TYPES = list(BlockType)
HOM3 = Partition(STUDENTS_HOMOGENEITY_PARTITION).canonical()
HOM3_TEXT = "1,5,7,10,11 | 2,3,6,12,13 | 4,8,9"
IMAGE = [["null", "null", "reg"], ["null", "reg", "reg"], ["null", "null", "reg"]]

MODELS = {
    "hom_ss reg(mean)": ModelSpec("ss", "reg", f="mean"),
    "hom_ad reg(mean)": ModelSpec("ad", "reg", f="mean"),
    "hom_ss reg(max)": ModelSpec("ss", "reg", f="max"),
    "hom_ad reg(max)": ModelSpec("ad", "reg", f="max"),
    "valued null+reg(sum) m=10": ModelSpec("valued", "null|reg", f="sum", m=10),
    "valued null+reg(max) m=5": ModelSpec("valued", "null|reg", f="max", m=5),
}
SEARCH = SearchConfig(3, restarts=100, seed=0)


def record(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


# -- shared, expensive results ----------------------------------------------------

@lru_cache(maxsize=None)
def exhaustive(name):
    t = time.perf_counter()
    res = exhaustive_search(students(), MODELS[name], 3)
    return res, time.perf_counter() - t


@lru_cache(maxsize=None)
def multistart(name):
    t = time.perf_counter()
    res = local_search(students(), MODELS[name], SEARCH)
    return res, time.perf_counter() - t


# -- batched block generation -------------------------------------------------------

def random_blocks(rng, count, values, max_side=8):
    """Yield (cells, blocks) groups of equal layout; every block also as a BlockView."""
    groups = {}
    for _ in range(count):
        diagonal = bool(rng.integers(2))
        r = int(rng.integers(1, max_side + 1))
        c = r if diagonal else int(rng.integers(1, max_side + 1))
        policy = str(rng.choice(["ignore", "variant", "ordinary"])) if diagonal else "ordinary"
        groups.setdefault((r, c, diagonal, policy), []).append(values(rng, (r, c)))
    for (r, c, diagonal, policy), mats in groups.items():
        template = BlockView.from_array(np.zeros((r, c)), diagonal, policy)
        x = np.stack(mats)
        P = len(mats)
        w = np.broadcast_to(template.scored_mask(), x.shape)
        sep = template.separate_diagonal_mask()
        d = np.broadcast_to(sep, x.shape) if sep.any() else None
        cells = Cells(x, w, d, np.ones((P, r), bool), np.ones((P, c), bool))
        yield cells, [BlockView.from_array(m, diagonal, policy) for m in mats]


def binary_values(rng, shape):
    return rng.integers(0, 2, shape).astype(float)


def valued_values(rng, shape):
    # sparse, skewed, with exact ties
    v = rng.integers(0, 10, shape).astype(float)
    return np.where(rng.random(shape) < 0.4, 0.0, v)


# -- criteria -------------------------------------------------------------------

def test_criterion_01_binary_specialization():
    rng = np.random.default_rng(1)
    t = time.perf_counter()
    mismatches, count = 0, 0
    for cells, blocks in random_blocks(rng, 1500, binary_values):
        count += len(blocks)
        for ty in TYPES:
            mismatches += int(np.sum(valued_kernel(cells, ty, 1.0, "max") != binary_kernel(cells, ty)))
    elapsed = time.perf_counter() - t
    ok = mismatches == 0 and count >= 1000 and elapsed < 1.0
    record(1, ok, f"{count} blocks x 9 types, {mismatches} mismatches, {elapsed:.2f}s (< 1s)")
    assert ok


def _chain_violations(reg, rre, cre, com):
    tol = 1e-9 * np.maximum(1.0, np.abs(com))
    literal = ~((reg <= cre + tol) & (cre <= com + tol) & (reg <= rre + tol) & (rre <= com + tol))
    corrected = ~((rre <= reg + tol) & (cre <= reg + tol) & (reg <= com + tol))
    return int(literal.sum()), int(corrected.sum())


def test_criterion_02_inequality_chains():
    rng = np.random.default_rng(2)
    t = time.perf_counter()
    literal, count = {}, 0
    corrected = {"other": 0, "variant": 0}
    R, C, G, M = BlockType.REG, BlockType.RRE, BlockType.CRE, BlockType.COM
    for cells, blocks in random_blocks(rng, 1200, valued_values):
        count += len(blocks)
        sliced = Cells((cells.x >= 3).astype(float), cells.w, cells.d, cells.rows, cells.cols)
        runs = {"binary (sliced at 3)": lambda ty: binary_kernel(sliced, ty)}
        for m in (1.0, 3.0, 6.0):
            for f in ("max", "sum"):
                runs[f"valued {f} m={m:g}"] = (
                    lambda ty, m=m, f=f: valued_kernel(cells, ty, m, f))
        for variant in ("ss", "ad"):
            runs[f"hom_{variant} mean"] = (
                lambda ty, v=variant: homogeneity_kernel(cells, ty, v, "mean"))
        for name, fn in runs.items():
            a, b = _chain_violations(fn(R), fn(C), fn(G), fn(M))
            literal[name] = literal.get(name, 0) + a
            corrected["variant" if cells.d is not None else "other"] += b
    elapsed = time.perf_counter() - t
    bad = {k: v for k, v in literal.items() if v}
    ok = not bad and count >= 1000 and elapsed < 5.0
    detail = (f"{count} blocks, {elapsed:.2f}s; reg<=cre<=com and reg<=rre<=com violated in "
              f"{sum(bad.values())} block/approach cases ({', '.join(f'{k}: {v}' for k, v in bad.items())}); "
              f"rre,cre<=reg<=com violated in {corrected['other']} (loops ignored or ordinary), "
              f"{corrected['variant']} (loops scored separately)")
    record(2, ok, detail)
    assert ok


def planted_network(rng, kind):
    """Network with a planted partition; values generic so no other partition fits."""
    k = int(rng.integers(2, 5))
    sizes = rng.integers(2, 5, k)
    a = np.repeat(np.arange(k), sizes)
    rng.shuffle(a)
    clusters = [np.flatnonzero(a == c) for c in range(k)]
    n = len(a)
    M = np.zeros((n, n))
    for i, ri in enumerate(clusters):
        for j, cj in enumerate(clusters):
            r, c = len(ri), len(cj)
            if kind == "structural":
                B = np.full((r, c), rng.uniform(0, 10))
            elif i == j:
                # circulant: every row and column holds the same off-diagonal values
                w = rng.uniform(0, 10, r)
                B = w[(np.arange(r)[None, :] - np.arange(r)[:, None]) % r]
            else:
                g = int(np.gcd(r, c))
                w = rng.uniform(0, 10, g)
                B = w[(np.arange(r)[:, None] + np.arange(c)[None, :]) % g]
            M[np.ix_(ri, cj)] = B
    np.fill_diagonal(M, rng.uniform(0, 10, n))  # loops carry no information here
    return M, a, k


def perturbations(a, k):
    out = []
    sizes = np.bincount(a, minlength=k)
    for u in range(len(a)):
        if sizes[a[u]] == 1:
            continue
        for c in range(k):
            if c != a[u]:
                b = a.copy()
                b[u] = c
                out.append(b)
    return np.array(out)


def test_criterion_03_equivalence_compatibility():
    from genblock.network import load_network
    rng = np.random.default_rng(3)
    t = time.perf_counter()
    kinds = {"structural": "null|com", "max": "reg", "sum": "reg", "mean": "reg"}
    worst_zero, worst_move, failures, networks = 0.0, np.inf, 0, 0
    for kind, blocks in kinds.items():
        f = "mean" if kind == "structural" else kind
        for _ in range(100):
            M, a, k = planted_network(rng, kind)
            net = load_network(M)
            networks += 1
            moved = perturbations(a, k)
            for variant in ("ss", "ad"):
                ev = BatchEvaluator(net, ModelSpec(variant, blocks, f=f), k)
                zero = float(ev.totals(a)[0])
                rest = ev.totals(moved)
                worst_zero = max(worst_zero, abs(zero))
                worst_move = min(worst_move, float(rest.min()))
                failures += int(abs(zero) > 1e-12) + int(np.sum(rest <= 0))
    elapsed = time.perf_counter() - t
    ok = failures == 0 and elapsed < 10.0
    record(3, ok, f"{networks} planted networks (structural, max, sum, mean) x (ss, ad): "
                  f"max planted total {worst_zero:.1e}, min perturbed total {worst_move:.3g}, "
                  f"{failures} failures, {elapsed:.2f}s (< 10s)")
    assert ok


@pytest.mark.slow
def test_criterion_04_exhaustive_agreement():
    lines, ok, elapsed = [], True, 0.0
    for name in MODELS:
        ex, t_ex = exhaustive(name)
        ls, t_ls = multistart(name)
        elapsed += t_ex + t_ls
        same = abs(ls.best.total - ex.best.total) <= 1e-9 * max(1.0, abs(ex.best.total))
        complete = ex.evaluations == stirling2(13, 3) == 261_625
        ok &= same and complete
        lines.append(f"{name}: oracle {ex.best.total:.6g}, search {ls.best.total:.6g}")
    ok &= elapsed < 300
    record(4, ok, "; ".join(lines) + f"; {elapsed:.0f}s (< 300s)")
    assert ok


@pytest.mark.slow
def test_criterion_05_homogeneity_partition():
    found = {}
    for name in ("hom_ss reg(mean)", "hom_ad reg(mean)"):
        ex, _ = exhaustive(name)
        found[name] = [str(p) for p in ex.optima]
    ok = all(v == [HOM3_TEXT] for v in found.values())
    record(5, ok, "; ".join(f"{k}: {' / '.join(v)}" for k, v in found.items()))
    assert ok


@pytest.mark.slow
def test_criterion_06_valued_image():
    a, _ = exhaustive("valued null+reg(sum) m=10")
    b, _ = exhaustive("valued null+reg(max) m=5")
    images_ok = a.best.image_tags() == IMAGE and b.best.image_tags() == IMAGE
    # the partition is only required to be oracle-optimal; both come from the oracle
    shared = set(a.optima) & set(b.optima)
    ok = images_ok and bool(shared)
    record(6, ok, f"image sum/m=10 {'ok' if a.best.image_tags() == IMAGE else a.best.image_tags()}, "
                  f"max/m=5 {'ok' if b.best.image_tags() == IMAGE else b.best.image_tags()}; "
                  f"optima sum/m=10 {' / '.join(map(str, a.optima))}; "
                  f"max/m=5 {' / '.join(map(str, b.optima))}; "
                  f"{'coincide' if shared else 'do not coincide'}")
    assert ok


REFERENCE_ROW_SUMS = [[2.0, 8.8, 31.2], [10.8, 5.5, 14.6], [1.3, 2.0, 25.5]]
REFERENCE_COL_SUMS = [[2.0, 8.8, 52.0], [10.8, 5.5, 24.3], [0.8, 1.2, 25.5]]


def test_criterion_07_block_summaries():
    t = block_summaries(students(), HOM3, "sum")
    binding = abs(t.mean_row[0, 2] - 31.2) <= 0.05 and abs(t.mean_row[1, 2] - 14.6) <= 0.05
    others = []
    for name, got, pub in (("row", t.mean_row, REFERENCE_ROW_SUMS), ("col", t.mean_col, REFERENCE_COL_SUMS)):
        for i in range(3):
            for j in range(3):
                if abs(got[i, j] - pub[i][j]) > 0.05:
                    others.append(f"{name}({i + 1},{j + 1}) {got[i, j]:.3g} vs {pub[i][j]}")
    record(7, binding, f"mean row sums (1,3)={t.mean_row[0, 2]:.4g}, (2,3)={t.mean_row[1, 2]:.4g}; "
                       f"other reference entries off by > 0.05: {', '.join(others) or 'none'}")
    assert binding


@pytest.mark.slow
def test_criterion_08_tie_multiplicity():
    net = students().sliced(5)
    binary = exhaustive_search(net, ModelSpec("binary", "null|reg"), 3)
    hom, _ = exhaustive("hom_ss reg(mean)")
    ok = len(binary.optima) >= 10 and len(hom.optima) == 1
    record(8, ok, f"binary sliced at 5: {len(binary.optima)} co-optimal partitions "
                  f"(total {binary.best.total:g}); hom_ss reg(mean): {len(hom.optima)}")
    assert ok


def test_criterion_09_normalized_variance():
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(100):
        diagonal = bool(rng.integers(2))
        r = int(rng.integers(2, 9))
        c = r if diagonal else int(rng.integers(1, 9))
        b = BlockView.from_array(rng.uniform(0, 10, (r, c)), diagonal, "ignore" if diagonal else "ordinary")
        got = normalize(homogeneity_block_inconsistency(b, "com", "ss"), b)
        worst = max(worst, abs(got - np.var(b.values[b.scored_mask()])))
    ok = worst <= 1e-12
    record(9, ok, f"100 blocks, max |normalized ss - variance| = {worst:.1e} (<= 1e-12)")
    assert ok


@pytest.mark.slow
def test_criterion_10_determinism():
    net = students()
    same = []
    for name, spec in MODELS.items():
        first, _ = multistart(name)
        again = local_search(net, spec, SEARCH)
        cfg = {"model": name, "restarts": SEARCH.restarts, "seed": SEARCH.seed}
        same.append(dumps(summary_dict(net, first, cfg, spec.label_free))
                    == dumps(summary_dict(net, again, cfg, spec.label_free)))
    ok = all(same)
    record(10, ok, f"{sum(same)}/{len(same)} models give byte-identical summaries across two seeded runs")
    assert ok


@pytest.mark.slow
@pytest.mark.parametrize("f,name", [("max", "hom_ad reg(max)")])
def test_max_tables_on_absolute_deviation_partition(f, name):
    # not a numbered criterion: the reference maximum tables belong to this optimum
    ex, _ = exhaustive(name)
    t = block_summaries(students(), ex.best.partition, f)
    assert str(ex.best.partition) == "1,3,5,10,11 | 2,6,7,12,13 | 4,8,9"
    np.testing.assert_allclose(np.round(t.mean_row, 1), [[1.8, 5.2, 16.0], [8.4, 2.0, 9.0], [2.0, 0.0, 14.7]])
    # column (1,2) is 5.4 in the reference table; the matrix gives 26/5
    np.testing.assert_allclose(np.round(t.mean_col, 1), [[1.8, 5.2, 17.0], [7.8, 2.6, 12.7], [2.0, 0.0, 13.0]])
