"""Symbolic computation in graph C*-algebras of finite graphs."""

__version__ = "0.1.0"

from .algebra import Element, P, S, SS, membership  # noqa: E402
from .endo import BlockUnitary, QuasiFree, hypothesis_by_conjugation, hypothesis_check, lambda_apply  # noqa: E402
from .errors import CKError, ParseError, UnsupportedGraphError, UsageError  # noqa: E402
from .graph import Graph, Path, parse_graph_text, validate_standing_assumption  # noqa: E402
from .matrix_rep import compute_delta, operator_norm, represent  # noqa: E402
from .moves import GeneratorMap, OutSplitPartition, induced_images, out_split, verify_homomorphism  # noqa: E402
from .scalars import EXACT, FLOAT  # noqa: E402
from .structure import expect_core, expect_core_level, expect_diagonal, gauge, shift  # noqa: E402

__all__ = [
    "BlockUnitary", "CKError", "EXACT", "Element", "FLOAT", "GeneratorMap", "Graph", "OutSplitPartition", "P",
    "ParseError", "Path", "QuasiFree", "S", "SS", "UnsupportedGraphError", "UsageError", "compute_delta",
    "expect_core", "expect_core_level", "expect_diagonal", "gauge", "hypothesis_by_conjugation",
    "hypothesis_check", "induced_images", "lambda_apply", "membership", "operator_norm", "out_split",
    "parse_graph_text", "represent", "shift", "validate_standing_assumption", "verify_homomorphism",
]
