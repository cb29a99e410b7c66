"""Command-line front end: perturb | score | report | selftest.

Exit codes: 0 success, 2 input error, 3 translator error, 4 report-stage
error.  All artifacts are byte-stable for a fixed (config, inputs, seed),
independent of worker count.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from importlib.resources import files as resource_files

from .corpus import ConlluError, load_parallel, parse_conllu_file
from .evaluate import (ScoreRecord, aggregate, correlations, find_flips,
                       gap_distribution, length_buckets,
                       perturbation_similarity_matrix, quartiles, score_corpus)
from .perturb import PerturbationId, apply, derive_seed
from .translate import TranslationError, TranslatorConfig, translate_batch

CONFIG_ENV_VAR = "PERMUTEVAL_CONFIG"

SCORES_HEADER = ["example_id", "perturbation", "lang_pair", "alpha_B", "alpha_L",
                 "beta", "beta1_B", "beta1_L", "beta2_B", "beta2_L", "src_len", "delta"]

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_TRANSLATOR = 3
EXIT_REPORT = 4


@dataclass
class RunConfig:
    global_seed: int = 0
    source_conllu: str | None = None
    target_conllu: str | None = None
    lang_pair: str = "src-tgt"
    perturbations: list[PerturbationId] = field(
        default_factory=lambda: list(PerturbationId))
    translator: TranslatorConfig = field(
        default_factory=lambda: TranslatorConfig(mode="identity"))
    flip_margin: float = 0.0
    length_bucket_width: int = 5
    output_dir: str = "."
    workers: int = 1


def _f6(value) -> str:
    return "nan" if value is None else f"{value:.6f}"


def _write_atomic(path, data: str):
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def load_config(path=None, overrides=None) -> RunConfig:
    """Build the run configuration from an optional JSON file plus overrides.

    Flag overrides win over file values; the file path itself defaults to the
    PERMUTEVAL_CONFIG environment variable.
    """
    raw = {}
    path = path or os.environ.get(CONFIG_ENV_VAR)
    if path:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    if overrides:
        for key, value in overrides.items():
            if value is None:
                continue
            if key == "translator" and isinstance(raw.get(key), dict) and isinstance(value, dict):
                raw[key] = {**raw[key], **value}
            else:
                raw[key] = value

    tr = raw.get("translator", {})
    if isinstance(tr, str):
        tr = {"mode": tr}
    translator = TranslatorConfig(
        mode=tr.get("mode", "identity"),
        system_id=tr.get("system_id", "identity"),
        cache_path=tr.get("cache_path"),
        command=tr.get("command"),
        batch_size=int(tr.get("batch_size", 32)),
        timeout=float(tr.get("timeout", 120.0)),
    )
    names = raw.get("perturbations")
    if names:
        chosen = {PerturbationId.from_name(n) for n in names}
        perturbations = [p for p in PerturbationId if p in chosen]
    else:
        perturbations = list(PerturbationId)
    if not perturbations:
        raise ValueError("perturbation selection is empty")
    return RunConfig(
        global_seed=int(raw.get("global_seed", 0)),
        source_conllu=raw.get("source_conllu"),
        target_conllu=raw.get("target_conllu"),
        lang_pair=raw.get("lang_pair", "src-tgt"),
        perturbations=perturbations,
        translator=translator,
        flip_margin=float(raw.get("flip_margin", 0.0)),
        length_bucket_width=int(raw.get("length_bucket_width", 5)),
        output_dir=raw.get("output_dir", "."),
        workers=int(raw.get("workers", 1)),
    )


def cmd_perturb(config: RunConfig) -> int:
    try:
        sentences = parse_conllu_file(config.source_conllu)
    except (ConlluError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    os.makedirs(config.output_dir, exist_ok=True)
    lines = []
    for sent in sentences:
        for pert in config.perturbations:
            seed = derive_seed(config.global_seed, sent.id, pert)
            outcome = apply(pert, sent, seed)
            row = {"id": sent.id, "perturbation": pert.value, "status": outcome.status}
            if outcome.applied:
                row["tokens"] = [t.form for t in outcome.tokens]
                row["text"] = outcome.text()
            else:
                row["reason"] = outcome.reason
            if outcome.seed_used is not None:
                row["seed"] = outcome.seed_used
            lines.append(json.dumps(row, ensure_ascii=False))
    _write_atomic(os.path.join(config.output_dir, "perturbations.jsonl"),
                  "".join(line + "\n" for line in lines))
    return EXIT_OK


def _record_row(rec: ScoreRecord):
    return [rec.example_id, rec.perturbation.value, rec.lang_pair,
            _f6(rec.alpha_B), _f6(rec.alpha_L), _f6(rec.beta),
            _f6(rec.beta1_B), _f6(rec.beta1_L), _f6(rec.beta2_B), _f6(rec.beta2_L),
            str(rec.src_len), _f6(rec.delta)]


def cmd_score(config: RunConfig) -> int:
    try:
        examples = load_parallel(config.source_conllu, config.target_conllu,
                                 lang_pair=config.lang_pair)
    except (ConlluError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        records, _ = score_corpus(examples, config.perturbations, config.global_seed,
                                  config.translator, workers=config.workers)
    except TranslationError as exc:
        print(f"translator error: {exc}", file=sys.stderr)
        return EXIT_TRANSLATOR
    os.makedirs(config.output_dir, exist_ok=True)
    _write_atomic(os.path.join(config.output_dir, "scores.csv"),
                  _csv_text(SCORES_HEADER, [_record_row(r) for r in records]))
    return EXIT_OK


def read_scores(path) -> list[ScoreRecord]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if not rows or rows[0] != SCORES_HEADER:
        raise ValueError(f"{path}: missing or wrong header")
    records = []
    for no, row in enumerate(rows[1:], start=2):
        if len(row) != len(SCORES_HEADER):
            raise ValueError(f"{path}: row {no} has {len(row)} fields")
        try:
            records.append(ScoreRecord(
                example_id=row[0],
                perturbation=PerturbationId.from_name(row[1]),
                lang_pair=row[2],
                alpha_B=float(row[3]), alpha_L=float(row[4]), beta=float(row[5]),
                beta1_B=float(row[6]), beta1_L=float(row[7]),
                beta2_B=float(row[8]), beta2_L=float(row[9]),
                src_len=int(row[10]), delta=float(row[11])))
        except ValueError as exc:
            raise ValueError(f"{path}: row {no}: {exc}") from exc
    return records


def _flip_texts(config: RunConfig, flips):
    """Recompute the texts behind flip records (perturbations and translations)."""
    examples = {ex.id: ex for ex in load_parallel(
        config.source_conllu, config.target_conllu, lang_pair=config.lang_pair)}
    needed = {}
    side = {}
    for rec in flips:
        ex = examples[rec.example_id]
        seed = derive_seed(config.global_seed, ex.id, rec.perturbation)
        src_out = apply(rec.perturbation, ex.source, seed)
        tgt_out = apply(rec.perturbation, ex.target, seed)
        side[(rec.example_id, rec.perturbation)] = (ex, src_out, tgt_out)
        needed.setdefault(f"c:{ex.id}", ex.source.text())
        needed[f"p:{ex.id}:{rec.perturbation.value}"] = src_out.text()
    requests = [{"id": rid, "text": text} for rid, text in sorted(needed.items())]
    translations = {r["id"]: r["translation"]
                    for r in translate_batch(config.translator, requests)}
    out = []
    for rec in flips:
        ex, src_out, tgt_out = side[(rec.example_id, rec.perturbation)]
        out.append({
            "example_id": rec.example_id,
            "perturbation": rec.perturbation.value,
            "lang_pair": rec.lang_pair,
            "alpha_B": rec.alpha_B, "alpha_L": rec.alpha_L, "beta": rec.beta,
            "beta1_B": rec.beta1_B, "beta1_L": rec.beta1_L,
            "beta2_B": rec.beta2_B, "beta2_L": rec.beta2_L,
            "src_len": rec.src_len, "delta": rec.delta,
            "src_text": ex.source.text(),
            "src_perturbed": src_out.text(),
            "tgt_text": ex.target.text(),
            "tgt_perturbed": tgt_out.text(),
            "translation_clean": translations[f"c:{ex.id}"],
            "translation_perturbed": translations[f"p:{ex.id}:{rec.perturbation.value}"],
        })
    return out


def cmd_report(config: RunConfig) -> int:
    scores_path = os.path.join(config.output_dir, "scores.csv")
    try:
        records = read_scores(scores_path)
    except (OSError, ValueError) as exc:
        print(f"report error: {exc}", file=sys.stderr)
        return EXIT_REPORT

    out_dir = config.output_dir
    rows = [[a.lang_pair, a.perturbation.value, str(a.n), _f6(a.mean_alpha_B),
             _f6(a.mean_alpha_L), _f6(a.mean_beta), _f6(a.mean_beta1_B),
             _f6(a.mean_beta2_B), _f6(a.mean_delta)] for a in aggregate(records)]
    _write_atomic(os.path.join(out_dir, "aggregate.csv"),
                  _csv_text(["lang_pair", "perturbation", "N", "mean_alpha_B",
                             "mean_alpha_L", "mean_beta", "mean_beta1_B",
                             "mean_beta2_B", "mean_delta"], rows))

    by_lang, by_pert = gap_distribution(records)
    gap_rows = []
    for group_type, table in (("lang_pair", by_lang), ("perturbation", by_pert)):
        for name in sorted(table):
            mn, q1, med, q3, mx = quartiles(table[name])
            gap_rows.append([group_type, name, str(len(table[name])),
                             _f6(mn), _f6(q1), _f6(med), _f6(q3), _f6(mx)])
    _write_atomic(os.path.join(out_dir, "gaps.csv"),
                  _csv_text(["group_type", "group", "N", "min", "q1", "median",
                             "q3", "max"], gap_rows))

    try:
        sentences = parse_conllu_file(config.source_conllu)
    except (ConlluError, OSError, TypeError) as exc:
        print(f"report error: cannot load source corpus for heatmap: {exc}",
              file=sys.stderr)
        return EXIT_REPORT
    labels, matrix = perturbation_similarity_matrix(sentences, config.global_seed)
    heat_rows = [[labels[i]] + ["" if cell is None else _f6(cell) for cell in matrix[i]]
                 for i in range(len(labels))]
    _write_atomic(os.path.join(out_dir, "heatmap.csv"),
                  _csv_text(["perturbation"] + labels, heat_rows))

    corr_rows, notes = correlations(records)
    for note in notes:
        print(f"note: {note}", file=sys.stderr)
    _write_atomic(os.path.join(out_dir, "correlations.csv"),
                  _csv_text(["lang_pair", "pair", "rho", "n"],
                            [[r["lang_pair"], r["pair"], _f6(r["rho"]), str(r["n"])]
                             for r in corr_rows]))

    flips = find_flips(records, margin=config.flip_margin)
    try:
        flip_objs = _flip_texts(config, flips) if flips else []
    except TranslationError as exc:
        print(f"translator error: {exc}", file=sys.stderr)
        return EXIT_TRANSLATOR
    _write_atomic(os.path.join(out_dir, "flips.jsonl"),
                  "".join(json.dumps(obj, ensure_ascii=False) + "\n"
                          for obj in flip_objs))

    bucket_rows = [[str(b["bucket_lo"]), str(b["bucket_hi"]), str(b["n"]),
                    _f6(b["mean_beta1_B"]), _f6(b["mean_beta2_B"]),
                    _f6(b["mean_alpha_L"])]
                   for b in length_buckets(records, config.length_bucket_width)]
    _write_atomic(os.path.join(out_dir, "buckets.csv"),
                  _csv_text(["bucket_lo", "bucket_hi", "N", "mean_beta1_B",
                             "mean_beta2_B", "mean_alpha_L"], bucket_rows))
    return EXIT_OK


# The deterministic perturbations and their reference outputs on the bundled
# fixtures; `selftest` re-derives each one.
SELFTEST_CASES = [
    ("ref-tom", PerturbationId.TREE_MIRROR_POST,
     "to live a decent place he could n't find Tom said ."),
    ("ref-tom", PerturbationId.TREE_MIRROR_PRE,
     "said find place live to a decent he could n't Tom ."),
    ("ref-tom", PerturbationId.TREE_MIRROR_IN,
     "live to place a decent find he could n't said Tom ."),
    ("ref-tom", PerturbationId.ROTATE_AROUND_ROOT,
     "live find said Tom he could n't a decent place to ."),
    ("ref-tom", PerturbationId.REVERSED,
     "live to place decent a find n't could he said Tom ."),
    ("ref-tom", PerturbationId.NOUN_VERB_SWAPS,
     "said Tom could he n't a decent place find to live ."),
    ("ref-tom", PerturbationId.NOUN_VERB_MISMATCHED,
     "live a decent place find could n't he said to Tom ."),
    ("flips-lost", PerturbationId.VERB_ADVERB_SWAPS,
     "He has lost completely all sense of duty ."),
    ("flips-cat", PerturbationId.NOUN_ADJ_SWAPS,
     "We have a cat white ."),
]


def fixture_path(name: str) -> str:
    return str(resource_files("permuteval") / "fixtures" / name)


def cmd_selftest() -> int:
    from .corpus import parse_conllu
    sentences = {}
    for name in ("tom.conllu", "flips.conllu"):
        text = (resource_files("permuteval") / "fixtures" / name).read_text(encoding="utf-8")
        for sent in parse_conllu(text):
            sentences[sent.id] = sent
    failures = 0
    for sent_id, pert, expected in SELFTEST_CASES:
        outcome = apply(pert, sentences[sent_id], seed=0)
        got = outcome.text() if outcome.applied else f"<{outcome.status}: {outcome.reason}>"
        ok = got == expected
        failures += 0 if ok else 1
        print(f"{'PASS' if ok else 'FAIL'} {sent_id} {pert.value}"
              + ("" if ok else f"\n  expected: {expected}\n  got:      {got}"))
    print(f"selftest: {len(SELFTEST_CASES) - failures}/{len(SELFTEST_CASES)} passed")
    return EXIT_OK if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="permuteval",
        description="Word-order perturbation harness for MT robustness/faithfulness")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("perturb", "score", "report"):
        p = sub.add_parser(name)
        p.add_argument("--config", help=f"JSON config file (default ${CONFIG_ENV_VAR})")
        p.add_argument("--seed", type=int, dest="global_seed")
        p.add_argument("--source", dest="source_conllu")
        p.add_argument("--target", dest="target_conllu")
        p.add_argument("--lang-pair", dest="lang_pair")
        p.add_argument("--perturbations",
                       help="comma-separated perturbation names (default: all 16)")
        p.add_argument("--translator", dest="translator_mode",
                       choices=["identity", "cache", "subprocess"])
        p.add_argument("--system-id")
        p.add_argument("--cache", dest="cache_path")
        p.add_argument("--command", dest="translator_command")
        p.add_argument("--batch-size", type=int)
        p.add_argument("--timeout", type=float)
        p.add_argument("--flip-margin", type=float, dest="flip_margin")
        p.add_argument("--bucket-width", type=int, dest="length_bucket_width")
        p.add_argument("--output-dir", dest="output_dir")
        p.add_argument("--workers", type=int)
    sub.add_parser("selftest")
    return parser


def _overrides(args) -> dict:
    out = {}
    for key in ("global_seed", "source_conllu", "target_conllu", "lang_pair",
                "flip_margin", "length_bucket_width", "output_dir", "workers"):
        value = getattr(args, key, None)
        if value is not None:
            out[key] = value
    if args.perturbations is not None:
        out["perturbations"] = [n.strip() for n in args.perturbations.split(",") if n.strip()]
    translator = {}
    for flag, key in (("translator_mode", "mode"), ("system_id", "system_id"),
                      ("cache_path", "cache_path"), ("translator_command", "command"),
                      ("batch_size", "batch_size"), ("timeout", "timeout")):
        value = getattr(args, flag, None)
        if value is not None:
            translator[key] = value
    if translator:
        out["translator"] = translator
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "selftest":
        return cmd_selftest()
    try:
        config = load_config(args.config, _overrides(args))
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    # A translator config built from flag overrides alone may merge with file
    # values; re-validate the pieces the command actually needs.
    if args.command == "perturb":
        if not config.source_conllu:
            print("config error: source_conllu is required", file=sys.stderr)
            return EXIT_INPUT
        return cmd_perturb(config)
    if not config.source_conllu or not config.target_conllu:
        print("config error: source_conllu and target_conllu are required",
              file=sys.stderr)
        return EXIT_INPUT
    if args.command == "score":
        return cmd_score(config)
    return cmd_report(config)


if __name__ == "__main__":
    sys.exit(main())
