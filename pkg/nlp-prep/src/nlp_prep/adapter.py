"""Long-running translator child speaking the line-JSON protocol.

Reads ``{"id", "text"}`` objects one per stdin line and answers
``{"id", "translation"}`` one per stdout line, flushing after every line.
``--echo`` answers with the input text and needs no model; ``--model`` loads
a pretrained translation model (e.g. the Helsinki-NLP/opus-mt-* family).

A malformed input line produces an ``{"id", "error"}`` object (id null when
unrecoverable) and the loop continues; the harness on the other side treats
any response without a translation as fatal, by design.
"""

from __future__ import annotations

import argparse
import json
import sys


class ModelTranslator:
    def __init__(self, model_id: str):
        try:
            from transformers import AutoModelForSeq2SeqLM, AutoTokenizer
        except ImportError as exc:
            raise SystemExit(f"transformers is not installed: {exc}")
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(model_id)
            self.model = AutoModelForSeq2SeqLM.from_pretrained(model_id)
        except Exception as exc:
            raise SystemExit(f"cannot load model {model_id!r}: {exc}")

    def __call__(self, text: str) -> str:
        batch = self.tokenizer([text], return_tensors="pt", truncation=True)
        generated = self.model.generate(**batch, max_new_tokens=256)
        return self.tokenizer.batch_decode(generated, skip_special_tokens=True)[0]


def serve(translate, stdin=None, stdout=None) -> None:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout

    def emit(obj):
        stdout.write(json.dumps(obj, ensure_ascii=False) + "\n")
        stdout.flush()

    for line in stdin:
        if not line.strip():
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError as exc:
            emit({"id": None, "error": f"malformed request line: {exc}"})
            continue
        rid = request.get("id") if isinstance(request, dict) else None
        if not isinstance(request, dict) or "id" not in request or "text" not in request:
            emit({"id": rid, "error": "request must carry 'id' and 'text'"})
            continue
        try:
            emit({"id": request["id"], "translation": translate(request["text"])})
        except Exception as exc:
            emit({"id": request["id"], "error": f"translation failed: {exc}"})


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="nlp-prep adapter")
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--echo", action="store_true",
                       help="answer every request with its own text (test double)")
    group.add_argument("--model", help="pretrained translation model id")
    args = parser.parse_args(argv)
    translate = (lambda text: text) if args.echo else ModelTranslator(args.model)
    serve(translate)
    return 0


if __name__ == "__main__":
    sys.exit(main())
