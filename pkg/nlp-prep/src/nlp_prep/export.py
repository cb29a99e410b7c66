"""Produce aligned CoNLL-U files from raw parallel text.

Two annotation backends: "spacy" runs a real dependency parser (models must
be installed), "naive" is a deterministic heuristic annotator that needs no
models and still emits well-formed trees -- the hermetic stand-in for tests
and offline runs, in the same spirit as the adapter's echo mode.
"""

from __future__ import annotations

from dataclasses import dataclass


class MissingModelError(RuntimeError):
    """A parser backend or its language model is not installed."""


@dataclass(frozen=True)
class PrepJob:
    source_text: str
    target_text: str
    source_lang: str
    target_lang: str
    source_out: str
    target_out: str


# Minimal closed-class lexicons for the naive backend (English + French).
_LEX = {
    "DET": {"the", "a", "an", "this", "that", "these", "those", "every", "some",
            "le", "la", "les", "un", "une", "des", "ce", "cette", "ces"},
    "ADP": {"in", "on", "at", "near", "under", "behind", "with", "of", "for",
            "dans", "sur", "sous", "pres", "derriere", "avec", "de", "du", "pour"},
    "AUX": {"is", "are", "was", "were", "be", "been", "can", "will", "must", "may",
            "est", "sont", "etait", "peut", "va", "doit"},
    "PRON": {"i", "you", "he", "she", "it", "we", "they", "me", "him", "her",
             "je", "tu", "il", "elle", "nous", "vous", "ils", "elles", "on"},
    "CCONJ": {"and", "or", "but", "et", "ou", "mais"},
    "SCONJ": {"because", "while", "que", "si", "quand"},
    "VERB": {"sees", "see", "finds", "find", "reads", "read", "runs", "run",
             "likes", "like", "follows", "follow", "paints", "paint", "watches",
             "watch", "visits", "visit", "walks", "walk", "said", "says",
             "voit", "trouve", "lit", "suit", "peint", "regarde", "visite",
             "aime", "marche", "dit"},
    "ADV": {"very", "tres", "vite", "souvent", "often", "too"},
    "ADJ": {"old", "small", "bright", "quiet", "happy", "decent", "white",
            "vieux", "vieille", "petit", "calme", "joli", "brillant"},
}
_PUNCT = set(".,;:!?\"'()[]")


def _guess_upos(word: str, position: int) -> str:
    if all(ch in _PUNCT for ch in word):
        return "PUNCT"
    if word.replace(",", "").replace(".", "").isdigit():
        return "NUM"
    lower = word.lower()
    for upos, words in _LEX.items():
        if lower in words:
            return upos
    if word[0].isupper() and position > 0:
        return "PROPN"
    if lower.endswith("ly") or lower.endswith("ment"):
        return "ADV"
    if lower.endswith(("eux", "ish", "ive", "ful")):
        return "ADJ"
    return "NOUN"


def naive_annotate(line: str) -> list[tuple[str, str, int, str]]:
    """Whitespace-tokenize and attach a shallow but well-formed tree.

    Returns (form, upos, head, deprel) rows; exactly one root, no cycles.
    """
    forms = line.split()
    if not forms:
        raise ValueError("cannot annotate an empty line")
    upos = [_guess_upos(w, i) for i, w in enumerate(forms)]
    n = len(forms)

    def first_of(*classes):
        for i, u in enumerate(upos):
            if u in classes:
                return i
        return None

    root = first_of("VERB")
    if root is None:
        root = first_of("AUX")
    if root is None:
        root = first_of("NOUN", "PROPN")
    if root is None:
        root = 0

    def next_noun(after):
        for j in range(after + 1, n):
            if upos[j] in ("NOUN", "PROPN"):
                return j
        return None

    rows = []
    for i, (form, tag) in enumerate(zip(forms, upos)):
        if i == root:
            rows.append((form, tag, 0, "root"))
            continue
        if tag == "PUNCT":
            rows.append((form, tag, root + 1, "punct"))
            continue
        if tag in ("DET", "ADJ", "NUM", "ADP"):
            noun = next_noun(i)
            if noun is not None:
                deprel = {"DET": "det", "ADJ": "amod", "NUM": "nummod",
                          "ADP": "case"}[tag]
                rows.append((form, tag, noun + 1, deprel))
                continue
        if tag in ("NOUN", "PROPN", "PRON"):
            rows.append((form, tag, root + 1, "nsubj" if i < root else "obj"))
        elif tag == "AUX":
            rows.append((form, tag, root + 1, "aux"))
        elif tag == "ADV":
            rows.append((form, tag, root + 1, "advmod"))
        elif tag in ("CCONJ", "SCONJ"):
            rows.append((form, tag, root + 1, "mark"))
        else:
            rows.append((form, tag, root + 1, "dep"))
    return rows


class NaiveBackend:
    def __init__(self, lang: str):
        self.lang = lang

    def annotate(self, line: str):
        return naive_annotate(line)


class SpacyBackend:
    """Wraps a spacy pipeline; raises MissingModelError when unavailable."""

    def __init__(self, model: str):
        try:
            import spacy
        except ImportError as exc:
            raise MissingModelError("spacy is not installed") from exc
        try:
            self.nlp = spacy.load(model)
        except OSError as exc:
            raise MissingModelError(f"spacy model {model!r} is not installed") from exc

    def annotate(self, line: str):
        doc = self.nlp(line)
        sent = next(doc.sents, None)
        tokens = list(sent) if sent is not None else list(doc)
        base = tokens[0].i if tokens else 0
        rows = []
        for tok in tokens:
            head = 0 if tok.head == tok else tok.head.i - base + 1
            rows.append((tok.text, tok.pos_, head, tok.dep_.lower()))
        return rows


_BACKENDS = {"naive": lambda lang: NaiveBackend(lang),
             "spacy": lambda lang: SpacyBackend(lang)}


def make_backend(name: str, lang: str):
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}")
    return _BACKENDS[name](lang)


def render_block(sent_id: str, rows) -> str:
    lines = [f"# sent_id = {sent_id}",
             "# text = " + " ".join(r[0] for r in rows)]
    for i, (form, upos, head, deprel) in enumerate(rows, start=1):
        lines.append(f"{i}\t{form}\t_\t{upos}\t_\t_\t{head}\t{deprel}\t_\t_")
    return "\n".join(lines) + "\n"


def export_conllu(job: PrepJob, backend: str = "naive") -> tuple[str, str]:
    """Annotate both sides of a raw parallel text pair into CoNLL-U files.

    sent_id comments align the pair.  The line counts are checked, and both
    backends are constructed, before anything is written.
    """
    with open(job.source_text, encoding="utf-8") as fh:
        src_lines = [line.strip() for line in fh if line.strip()]
    with open(job.target_text, encoding="utf-8") as fh:
        tgt_lines = [line.strip() for line in fh if line.strip()]
    if len(src_lines) != len(tgt_lines):
        raise ValueError(
            f"line-count mismatch: {len(src_lines)} source vs {len(tgt_lines)} target")
    src_backend = make_backend(backend, job.source_lang)
    tgt_backend = make_backend(backend, job.target_lang)

    def render(lines, annotator):
        blocks = []
        for i, line in enumerate(lines):
            blocks.append(render_block(f"s{i:04d}", annotator.annotate(line)))
        return "\n".join(blocks)

    src_text = render(src_lines, src_backend)
    tgt_text = render(tgt_lines, tgt_backend)
    with open(job.source_out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(src_text)
    with open(job.target_out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(tgt_text)
    return job.source_out, job.target_out
