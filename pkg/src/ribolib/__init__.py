"""Variable-length RNA candidate library design and riboswitch screening."""

__version__ = "0.1.0"

from .core import (
    Sequence,
    Structure,
    constrained_hamming,
    gc_content,
    parse_dot_bracket,
)
from .fold import (
    CotranscriptionalTrace,
    ExternalEngine,
    FoldingEngine,
    InternalEngine,
    brute_force_fold,
    cotranscriptional_fold,
    make_engine,
)

__all__ = [
    "Sequence",
    "Structure",
    "parse_dot_bracket",
    "gc_content",
    "constrained_hamming",
    "FoldingEngine",
    "InternalEngine",
    "ExternalEngine",
    "make_engine",
    "cotranscriptional_fold",
    "CotranscriptionalTrace",
    "brute_force_fold",
]
