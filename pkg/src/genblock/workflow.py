"""Homogeneity first, then valued blockmodeling at data-driven values of m."""

from __future__ import annotations

from dataclasses import dataclass, field

from .criterion import Approach, ModelSpec
from .inconsistency import BlockType, RowColFunction
from .network import DiagonalPolicy, ValuedNetwork
from .search import SearchConfig, SearchResult, optimize
from .summaries import BlockSummaryTable, MSuggestion, block_summaries, suggest_m

# f used for the homogeneity stage given the f of the valued stage, and back
HOMOGENEITY_F = {RowColFunction.SUM: RowColFunction.MEAN,
                 RowColFunction.MAX: RowColFunction.MAX,
                 RowColFunction.MEAN: RowColFunction.MEAN}
VALUED_F = {RowColFunction.SUM: RowColFunction.SUM,
            RowColFunction.MAX: RowColFunction.MAX,
            RowColFunction.MEAN: RowColFunction.SUM}


@dataclass(eq=False)
class WorkflowReport:
    k: int
    f: RowColFunction
    homogeneity: dict[str, SearchResult] = field(default_factory=dict)
    summaries: BlockSummaryTable | None = None
    suggestion: MSuggestion | None = None
    candidates: list[float] = field(default_factory=list)
    valued: dict[float, SearchResult] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def to_dict(self, net: ValuedNetwork) -> dict:
        def brief(res: SearchResult) -> dict:
            part = res.best.partition.canonical()
            return {
                "total": res.best.total,
                "partition": list(part.assignment),
                "clusters": [[net.unit_labels[u] for u in c] for c in part.clusters()],
                "image": res.best.image_tags(),
                "optima_count": len(res.optima),
            }

        out = {
            "k": self.k,
            "f": self.f.value,
            "homogeneity": {name: brief(res) for name, res in self.homogeneity.items()},
            "m_candidates": self.candidates,
            "valued": [{"m": m, **brief(res)} for m, res in sorted(self.valued.items())],
            "notes": self.notes,
        }
        if self.summaries is not None:
            out["block_summaries"] = self.summaries.to_dict()
        if self.suggestion is not None:
            out["m_suggestion"] = self.suggestion.to_dict()
        parts = {name: tuple(r["partition"]) for name, r in out["homogeneity"].items()}
        out["homogeneity_agree"] = len(set(parts.values())) <= 1
        return out


def workflow_preset(net: ValuedNetwork, k: int, f: RowColFunction | str = RowColFunction.SUM,
                    restarts: int = 100, seed: int = 0, exhaustive: bool = False,
                    homogeneity_blocks=frozenset({BlockType.REG}),
                    valued_blocks=frozenset({BlockType.NULL, BlockType.REG}),
                    candidates: list[float] | None = None,
                    diagonal: DiagonalPolicy | str = DiagonalPolicy.VARIANT) -> WorkflowReport:
    """Fit sum-of-squares and absolute-deviations homogeneity models, read m off
    the block summaries of the former, and fit valued models at each candidate m.

    Networks with negative ties stop after the homogeneity stage.
    """
    f = RowColFunction(f)
    hom_f, val_f = HOMOGENEITY_F[f], VALUED_F[f]
    report = WorkflowReport(k, f)
    cfg = SearchConfig(k, restarts=restarts, seed=seed)
    for approach in (Approach.SS, Approach.AD):
        spec = ModelSpec(approach, homogeneity_blocks, f=hom_f, diagonal=diagonal)
        report.homogeneity[approach.value] = optimize(net, spec, cfg, exhaustive)

    if not net.is_nonnegative():
        report.notes.append("negative tie values: valued blockmodeling skipped, "
                            "only homogeneity blockmodeling applies")
        return report

    base = report.homogeneity[Approach.SS.value].best.partition
    report.summaries = block_summaries(net, base, val_f)
    regular = bool(frozenset(valued_blocks) & {BlockType.RRE, BlockType.CRE, BlockType.REG})
    report.suggestion = suggest_m(net, base, val_f, blocks_regular=regular)
    report.candidates = list(candidates) if candidates is not None else report.suggestion.candidates()
    if not report.candidates:
        report.notes.append("no positive values to derive m from: valued stage skipped")
    if not report.suggestion.bimodal and report.suggestion.point is not None:
        report.notes.append("f-values show no clear two-mode structure; m candidates are rough")
    for m in report.candidates:
        spec = ModelSpec(Approach.VALUED, valued_blocks, f=val_f, m=m, diagonal=diagonal)
        report.valued[m] = optimize(net, spec, cfg, exhaustive)
    return report
