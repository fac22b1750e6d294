"""Generalized blockmodeling of valued networks."""

from .criterion import (
    Approach,
    BatchEvaluator,
    FitResult,
    ModelSpec,
    check_f_regular_equivalence,
    check_structural_equivalence,
    total_inconsistency,
)
from .data import students
from .inconsistency import (
    BlockType,
    CenterSpec,
    RowColFunction,
    ad,
    binary_block_inconsistency,
    homogeneity_block_inconsistency,
    normalize,
    ss,
    valued_block_inconsistency,
)
from .io import parse_dense, parse_edges, read_network, write_network
from .network import (
    BlockView,
    DiagonalPolicy,
    Partition,
    ValuedNetwork,
    censor,
    extract_block,
    load_network,
    slice_network,
)
from .search import (
    SearchConfig,
    SearchResult,
    exhaustive_search,
    local_search,
    multistart_report,
    optimize,
)
from .summaries import BlockSummaryTable, block_summaries, suggest_m
from .workflow import workflow_preset

__version__ = "0.1.0"
