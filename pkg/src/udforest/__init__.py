"""Code-mixed Universal Dependency forests from parallel trees and word alignments."""

from .alignment import AlignedPair, AlignmentMatrix, Side, align_search, read_alignments
from .codemix import (CodeMixedForest, ForestNode, Origin, ProjectionError, RelationInstance, TextToken,
                      assemble_codemixed_text, construct_forest, merge_annotations, project_relation)
from .treebank import (ConlluParseError, Token, TreeValidationError, UDForestError, UDTree, children,
                       parse_conllu, serialize_conllu)

__version__ = "0.1.0"

__all__ = [
    "AlignedPair", "AlignmentMatrix", "Side", "align_search", "read_alignments",
    "CodeMixedForest", "ForestNode", "Origin", "ProjectionError", "RelationInstance", "TextToken",
    "assemble_codemixed_text", "construct_forest", "merge_annotations", "project_relation",
    "ConlluParseError", "Token", "TreeValidationError", "UDForestError", "UDTree", "children",
    "parse_conllu", "serialize_conllu",
]
