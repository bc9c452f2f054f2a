"""embed-client: JSONL text corpora to CEMB embedding files.

The scoring engine reads embeddings; this package produces them. The two
share nothing but file formats.
"""

__version__ = "0.1.0"

from .corpus import Record, read_corpus
from .embedders import DEFAULT_MODEL, HASHED_MODEL, load_embedder
from .pipeline import EmbedResult, embed_corpus

__all__ = [
    "__version__",
    "Record",
    "read_corpus",
    "DEFAULT_MODEL",
    "HASHED_MODEL",
    "load_embedder",
    "EmbedResult",
    "embed_corpus",
]
