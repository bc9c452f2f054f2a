"""embed-corpus: JSONL corpus in, CEMB + ids + manifest out."""

from __future__ import annotations

import argparse
import os
import sys

from .corpus import read_corpus
from .embedders import DEFAULT_MODEL, HASHED_MODEL, load_embedder
from .errors import InputError, NumericError
from .pipeline import embed_corpus


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embed-corpus",
        description="Embed a JSONL corpus of {id, text} records into a CEMB file.",
    )
    parser.add_argument("corpus", help="JSONL file, one {\"id\", \"text\"} object per line")
    parser.add_argument("--out", required=True, help="output CEMB path")
    parser.add_argument("--model", default=DEFAULT_MODEL,
                        help=f"sentence-transformers model id, or {HASHED_MODEL!r} "
                             f"for the offline embedder (default {DEFAULT_MODEL})")
    parser.add_argument("--batch-size", type=int, default=32, help="rows per model call")
    parser.add_argument("--max-tokens", type=int, default=None,
                        help="head-truncate each text to this many whitespace tokens "
                             "before embedding (default: no pre-truncation)")
    parser.add_argument("--dataset-name", default=None,
                        help="dataset label for the manifest (default: corpus file stem)")
    parser.add_argument("--summarizer-name", default="",
                        help="summarizer label for the manifest, when embedding summaries")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.batch_size < 1:
            raise InputError(f"--batch-size must be >= 1, got {args.batch_size}")
        if args.max_tokens is not None and args.max_tokens < 1:
            raise InputError(f"--max-tokens must be >= 1, got {args.max_tokens}")
        records = read_corpus(args.corpus)
        embedder = load_embedder(args.model)
        dataset = args.dataset_name
        if dataset is None:
            dataset = os.path.splitext(os.path.basename(args.corpus))[0]
        result = embed_corpus(
            records,
            embedder,
            args.out,
            batch_size=args.batch_size,
            max_tokens=args.max_tokens,
            dataset_name=dataset,
            summarizer_name=args.summarizer_name,
        )
    except InputError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    print(
        f"wrote {result.n_rows}x{result.dim} embeddings to {result.cemb_path} "
        f"(+ {os.path.basename(result.ids_path)}, {os.path.basename(result.manifest_path)})"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
