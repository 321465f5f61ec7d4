"""Targeted claim analysis: attention saliency fused with ordered-pair NLI.

Pick a target sentence in a document; the pipeline scores every other
sentence by sentence-level attention, keeps the salient ones, and labels
each as a premise or contradiction of the target via two ordered NLI
checks. See fusion.analyze for the end-to-end entry point.
"""

from .docmodel import Document, SentenceSpan, TokenAlignment, find_sentence, segment
from .errors import ClaimLensError
from .fusion import AnalysisResult, Annotation, analyze, prepare, refilter
from .nli import NLIConfig, NLIEngine, NLIVerdict, RelationshipMatrix, build_backend
from .render import render
from .saliency import SaliencyMatrix, SaliencyStats, ThresholdPolicy, aggregate

__version__ = "0.1.0"

__all__ = [
    "AnalysisResult",
    "Annotation",
    "ClaimLensError",
    "Document",
    "NLIConfig",
    "NLIEngine",
    "NLIVerdict",
    "RelationshipMatrix",
    "SaliencyMatrix",
    "SaliencyStats",
    "SentenceSpan",
    "ThresholdPolicy",
    "TokenAlignment",
    "aggregate",
    "analyze",
    "build_backend",
    "find_sentence",
    "prepare",
    "refilter",
    "render",
    "segment",
    "__version__",
]
