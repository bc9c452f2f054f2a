"""COSMIC: summarizer evaluation by mutual information between source-text
and summary embeddings, with decision-theoretic bounds tying the score to
the error rate of downstream concept extraction."""

__version__ = "0.1.0"

from .core import EmbeddingMatrix, PairedDataset, validate_pairing
from .knife import KnifeConfig, estimate_mi

__all__ = [
    "__version__",
    "EmbeddingMatrix",
    "PairedDataset",
    "validate_pairing",
    "KnifeConfig",
    "estimate_mi",
]
