"""Command-line front end: `nlp-prep export` and `nlp-prep adapter`."""

from __future__ import annotations

import argparse
import sys

from . import adapter
from .export import MissingModelError, PrepJob, export_conllu


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="nlp-prep")
    sub = parser.add_subparsers(dest="command", required=True)

    export = sub.add_parser("export", help="annotate raw parallel text as CoNLL-U")
    export.add_argument("--source-text", required=True)
    export.add_argument("--target-text", required=True)
    export.add_argument("--source-lang", default="en")
    export.add_argument("--target-lang", default="fr")
    export.add_argument("--source-out", required=True)
    export.add_argument("--target-out", required=True)
    export.add_argument("--backend", default="naive", choices=["naive", "spacy"])

    child = sub.add_parser("adapter", help="run the line-JSON translator child")
    group = child.add_mutually_exclusive_group(required=True)
    group.add_argument("--echo", action="store_true")
    group.add_argument("--model")

    args = parser.parse_args(argv)
    if args.command == "adapter":
        forwarded = ["--echo"] if args.echo else ["--model", args.model]
        return adapter.main(forwarded)

    job = PrepJob(source_text=args.source_text, target_text=args.target_text,
                  source_lang=args.source_lang, target_lang=args.target_lang,
                  source_out=args.source_out, target_out=args.target_out)
    try:
        export_conllu(job, backend=args.backend)
    except (MissingModelError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
