"""Canonical labeling and automorphism groups via individualization-refinement."""

from .graph import (
    ColoredGraph,
    OrderedPartition,
    Permutation,
    apply_permutation,
    is_automorphism,
    is_finer,
)
from .refine import (
    QuotientGraph,
    TraceComparison,
    compare_traces,
    encode_quotient,
    is_equitable,
    quotient,
    refine,
    refine_with_budget,
)
from .multirefine import (
    MultiRefineResult,
    multi_refine,
    respects_individualizations,
    select_target_cell,
)
from .permgroup import PermutationGroup, group_new
from .search import (
    CanonicalCandidate,
    CapacityError,
    SearchStats,
    are_isomorphic,
    automorphism_group,
    brute_force_canonical,
    canonical_certificate,
    canonical_form,
)
from .families import generate
from .dimacs import ParseError, parse_graph, write_graph

__version__ = "0.1.0"

__all__ = [
    "ColoredGraph",
    "OrderedPartition",
    "Permutation",
    "apply_permutation",
    "is_automorphism",
    "is_finer",
    "QuotientGraph",
    "TraceComparison",
    "compare_traces",
    "encode_quotient",
    "is_equitable",
    "quotient",
    "refine",
    "refine_with_budget",
    "MultiRefineResult",
    "multi_refine",
    "respects_individualizations",
    "select_target_cell",
    "PermutationGroup",
    "group_new",
    "CanonicalCandidate",
    "CapacityError",
    "SearchStats",
    "are_isomorphic",
    "automorphism_group",
    "brute_force_canonical",
    "canonical_certificate",
    "canonical_form",
    "generate",
    "ParseError",
    "parse_graph",
    "write_graph",
]
