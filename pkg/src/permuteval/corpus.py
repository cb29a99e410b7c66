"""CoNLL-U ingestion and the sentence/token model shared by the whole harness."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class ConlluError(ValueError):
    """Malformed CoNLL-U input, reported with sentence id and line number."""

    def __init__(self, message, sent_id=None, line_no=None):
        self.sent_id = sent_id
        self.line_no = line_no
        prefix = ""
        if sent_id is not None:
            prefix += f"sentence {sent_id!r}"
        if line_no is not None:
            prefix += f"{' ' if prefix else ''}(line {line_no})"
        super().__init__(f"{prefix}: {message}" if prefix else message)


class PosClass(enum.Enum):
    NOUN = "Noun"
    VERB = "Verb"
    ADJECTIVE = "Adjective"
    ADVERB = "Adverb"
    FUNCTIONAL = "Functional"
    PUNCT = "Punct"
    OTHER = "Other"


# Verb covers AUX and Noun covers PRON/PROPN: the reference VerbSwaps output
# relocates "could" and the NounVerbSwaps example moves "he", neither of which
# is reachable with the bare VERB/NOUN tags.
_UPOS_CLASS = {
    "NOUN": PosClass.NOUN,
    "PROPN": PosClass.NOUN,
    "PRON": PosClass.NOUN,
    "VERB": PosClass.VERB,
    "AUX": PosClass.VERB,
    "ADJ": PosClass.ADJECTIVE,
    "ADV": PosClass.ADVERB,
    "ADP": PosClass.FUNCTIONAL,
    "DET": PosClass.FUNCTIONAL,
    "CCONJ": PosClass.FUNCTIONAL,
    "SCONJ": PosClass.FUNCTIONAL,
    "PUNCT": PosClass.PUNCT,
}


@dataclass(frozen=True)
class Token:
    index: int
    form: str
    upos: str
    head: int
    deprel: str

    def __post_init__(self):
        if self.index < 1:
            raise ValueError(f"token index must be >= 1, got {self.index}")
        if self.head < 0:
            raise ValueError(f"token head must be >= 0, got {self.head}")
        if self.head == self.index:
            raise ValueError(f"token {self.index} is its own head")
        if not self.form:
            raise ValueError(f"token {self.index} has an empty form")


@dataclass(frozen=True)
class Sentence:
    id: str
    tokens: tuple[Token, ...]
    pinned_punct: Token | None = field(default=None)

    def __len__(self):
        return len(self.tokens)

    @property
    def body(self) -> tuple[Token, ...]:
        """Tokens that participate in perturbation (pinned punct excluded)."""
        if self.pinned_punct is None:
            return self.tokens
        return self.tokens[:-1]

    def text(self) -> str:
        return detokenize(self.tokens)


@dataclass(frozen=True)
class ParallelExample:
    id: str
    source: Sentence
    target: Sentence
    lang_pair: str


def pos_class(token: Token) -> PosClass:
    return _UPOS_CLASS.get(token.upos, PosClass.OTHER)


def detokenize(tokens) -> str:
    """Join surface forms with single spaces; the exact text handed to a translator."""
    return " ".join(t.form for t in tokens)


def make_sentence(sent_id: str, tokens: list[Token], line_no=None) -> Sentence:
    """Validate the token list and pin the terminal punctuation mark."""
    n = len(tokens)
    if n == 0:
        raise ConlluError("sentence has no tokens", sent_id, line_no)
    for pos, tok in enumerate(tokens, start=1):
        if tok.index != pos:
            raise ConlluError(
                f"token ids must be 1..{n} with no gaps; found {tok.index} at position {pos}",
                sent_id, line_no)
    roots = [t for t in tokens if t.head == 0]
    if len(roots) == 0:
        raise ConlluError("no root token (HEAD=0)", sent_id, line_no)
    if len(roots) > 1:
        ids = ", ".join(str(t.index) for t in roots)
        raise ConlluError(f"multiple roots at token ids {ids}", sent_id, line_no)
    for tok in tokens:
        if tok.head > n:
            raise ConlluError(
                f"token {tok.index} has head {tok.head} out of range 1..{n}",
                sent_id, line_no)
    # Cycle check: follow head links upward from every token.
    for tok in tokens:
        seen = set()
        cur = tok.index
        while cur != 0:
            if cur in seen:
                raise ConlluError(f"head cycle involving token {tok.index}", sent_id, line_no)
            seen.add(cur)
            cur = tokens[cur - 1].head

    pinned = None
    last = tokens[-1]
    # Pin the terminal mark only when removing it leaves a well-formed tree:
    # it must not be the root and nothing may depend on it.
    if (last.upos == "PUNCT" and n >= 2 and last.head != 0
            and not any(t.head == last.index for t in tokens)):
        pinned = last
    return Sentence(id=sent_id, tokens=tuple(tokens), pinned_punct=pinned)


def _iter_blocks(text: str):
    """Yield (first_line_no, [(line_no, line), ...]) per blank-line-separated block."""
    block = []
    first = None
    for no, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if line.strip() == "":
            if block:
                yield first, block
            block, first = [], None
        else:
            if first is None:
                first = no
            block.append((no, line))
    if block:
        yield first, block


def parse_conllu(text: str) -> list[Sentence]:
    """Parse CoNLL-U text into validated sentences.

    Only the ID, FORM, UPOS, HEAD and DEPREL columns are consumed.  Multiword
    token ranges ("3-4") and empty nodes ("3.1") are skipped.  A
    '# sent_id = ...' comment names the sentence; otherwise a running ordinal
    is assigned.
    """
    sentences = []
    ordinal = 0
    for first_no, lines in _iter_blocks(text):
        ordinal += 1
        sent_id = None
        tokens = []
        for no, line in lines:
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("sent_id") and "=" in body:
                    sent_id = body.split("=", 1)[1].strip()
                continue
            cols = line.split("\t")
            if len(cols) != 10:
                raise ConlluError(
                    f"expected 10 tab-separated columns, got {len(cols)}",
                    sent_id or str(ordinal), no)
            tid = cols[0]
            if "-" in tid or "." in tid:
                continue
            try:
                index = int(tid)
            except ValueError:
                raise ConlluError(f"non-integer token id {tid!r}", sent_id or str(ordinal), no)
            try:
                head = int(cols[6])
            except ValueError:
                raise ConlluError(
                    f"non-integer head {cols[6]!r} for token {index}",
                    sent_id or str(ordinal), no)
            try:
                tokens.append(Token(index=index, form=cols[1], upos=cols[3],
                                    head=head, deprel=cols[7]))
            except ValueError as exc:
                raise ConlluError(str(exc), sent_id or str(ordinal), no)
        sentences.append(make_sentence(sent_id or str(ordinal), tokens, first_no))
    return sentences


def parse_conllu_file(path) -> list[Sentence]:
    with open(path, encoding="utf-8") as fh:
        return parse_conllu(fh.read())


def load_parallel(source_file, target_file, lang_pair="") -> list[ParallelExample]:
    """Load two CoNLL-U files and pair sentences by sent_id, else by position."""
    src = parse_conllu_file(source_file)
    tgt = parse_conllu_file(target_file)
    if len(src) != len(tgt):
        raise ConlluError(
            f"sentence count mismatch: {len(src)} in {source_file} vs {len(tgt)} in {target_file}")

    def check_unique(sents, path):
        seen = set()
        for s in sents:
            if s.id in seen:
                raise ConlluError(f"duplicate sent_id {s.id!r} in {path}")
            seen.add(s.id)

    check_unique(src, source_file)
    check_unique(tgt, target_file)

    # Explicit ids win over positional pairing, but only when both sides carry
    # sent_id comments throughout (ids are never the bare running ordinal).
    def has_explicit_ids(sents):
        return all(not s.id.isdigit() for s in sents)

    examples = []
    if has_explicit_ids(src) and has_explicit_ids(tgt):
        by_id = {s.id: s for s in tgt}
        for s in src:
            if s.id not in by_id:
                raise ConlluError(f"unmatched sent_id {s.id!r}: present in source only")
            t = by_id.pop(s.id)
            examples.append(ParallelExample(id=s.id, source=s, target=t, lang_pair=lang_pair))
        if by_id:
            missing = sorted(by_id)[0]
            raise ConlluError(f"unmatched sent_id {missing!r}: present in target only")
    else:
        for s, t in zip(src, tgt):
            sid = s.id
            examples.append(
                ParallelExample(id=sid,
                                source=s,
                                target=Sentence(id=sid, tokens=t.tokens,
                                                pinned_punct=t.pinned_punct),
                                lang_pair=lang_pair))
    return examples
