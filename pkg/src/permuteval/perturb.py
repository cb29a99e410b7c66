"""The 16 word-order perturbation functions.

Every perturbation permutes the tokens of a sentence without inserting or
deleting anything, keeps the pinned terminal punctuation in place, and either
Applies (producing a new order that differs from the input) or reports itself
NotApplicable with a reason.  Randomized perturbations draw exclusively from a
generator seeded per (sentence, perturbation), so results are independent of
processing order.
"""

from __future__ import annotations

import enum
import hashlib
import random
from dataclasses import dataclass

from .corpus import PosClass, Sentence, Token, detokenize, pos_class
from .deptree import DepTree, Traversal, build_tree, mirror, rightmost_spine, traverse

MAX_RESAMPLES = 10

# Deprels whose bearer heads a subordinate clause; RotateAroundRoot reverses
# the chain of these along the rightmost spine.
CLAUSAL_DEPRELS = {"ccomp", "xcomp", "advcl", "acl", "relcl", "csubj", "parataxis"}

# Deprels allowed inside a noun span (the modifiers that travel with the noun).
SPAN_DEPRELS = {"det", "amod", "nummod", "compound", "poss"}


class PerturbationId(enum.Enum):
    WORD_SHUFFLE = "WordShuffle"
    SHUFFLE_HALVES_FIRST = "ShuffleHalvesFirst"
    SHUFFLE_HALVES_LAST = "ShuffleHalvesLast"
    REVERSED = "Reversed"
    VERB_SWAPS = "VerbSwaps"
    NOUN_SWAPS = "NounSwaps"
    NOUN_VERB_SWAPS = "NounVerbSwaps"
    NOUN_VERB_MISMATCHED = "NounVerbMismatched"
    VERB_ADVERB_SWAPS = "VerbAdverbSwaps"
    NOUN_ADJ_SWAPS = "NounAdjSwaps"
    FUNCTIONAL_SHUFFLE = "FunctionalShuffle"
    VERB_AT_BEGINNING = "VerbAtBeginning"
    TREE_MIRROR_PRE = "TreeMirrorPre"
    TREE_MIRROR_IN = "TreeMirrorIn"
    TREE_MIRROR_POST = "TreeMirrorPost"
    ROTATE_AROUND_ROOT = "RotateAroundRoot"

    @classmethod
    def from_name(cls, name: str) -> "PerturbationId":
        for member in cls:
            if member.value == name:
                return member
        raise ValueError(f"unknown perturbation {name!r}")


RANDOM_PERTURBATIONS = frozenset({
    PerturbationId.WORD_SHUFFLE,
    PerturbationId.SHUFFLE_HALVES_FIRST,
    PerturbationId.SHUFFLE_HALVES_LAST,
    PerturbationId.VERB_SWAPS,
    PerturbationId.NOUN_SWAPS,
    PerturbationId.FUNCTIONAL_SHUFFLE,
})

DETERMINISTIC_PERTURBATIONS = frozenset(PerturbationId) - RANDOM_PERTURBATIONS


@dataclass(frozen=True)
class PerturbationOutcome:
    perturbation: PerturbationId
    status: str                       # "applied" | "not_applicable"
    reason: str | None = None
    tokens: tuple[Token, ...] | None = None
    seed_used: int | None = None

    @property
    def applied(self) -> bool:
        return self.status == "applied"

    def text(self) -> str:
        if not self.applied:
            raise ValueError("no text for a not-applicable outcome")
        return detokenize(self.tokens)


def derive_seed(global_seed: int, sentence_id: str, perturbation: PerturbationId) -> int:
    """Stable 64-bit seed: blake2b over the three inputs, order-independent."""
    material = f"{global_seed}\x1f{sentence_id}\x1f{perturbation.value}".encode("utf-8")
    return int.from_bytes(hashlib.blake2b(material, digest_size=8).digest(), "big")


def _forms(tokens) -> list[str]:
    return [t.form for t in tokens]


def _not_applicable(perturbation, reason) -> PerturbationOutcome:
    return PerturbationOutcome(perturbation=perturbation, status="not_applicable",
                               reason=reason)


def _applied(perturbation, sentence, body_order, seed_used=None) -> PerturbationOutcome:
    tokens = tuple(body_order) + ((sentence.pinned_punct,) if sentence.pinned_punct else ())
    return PerturbationOutcome(perturbation=perturbation, status="applied",
                               tokens=tokens, seed_used=seed_used)


def noun_spans(body, exclude_class: PosClass | None = None) -> list[list[Token]]:
    """Noun units: each Noun-class head plus the contiguous run of its own
    whitelisted modifiers immediately to its left.

    Tokens of ``exclude_class`` never join a span (a token about to be swapped
    as the partner class cannot also travel inside a unit), and punctuation
    never rides inside one.  Nouns already consumed by a span to their right
    do not start a unit of their own.
    """
    spans = []
    consumed = set()
    for pos in range(len(body) - 1, -1, -1):
        head = body[pos]
        if pos_class(head) is not PosClass.NOUN or head.index in consumed:
            continue
        start = pos
        while start - 1 >= 0:
            cand = body[start - 1]
            if (cand.head == head.index
                    and cand.deprel.split(":")[0] in SPAN_DEPRELS
                    and pos_class(cand) is not PosClass.PUNCT
                    and (exclude_class is None or pos_class(cand) is not exclude_class)
                    and cand.index not in consumed):
                start -= 1
            else:
                break
        span = list(body[start:pos + 1])
        for t in span:
            consumed.add(t.index)
        spans.append(span)
    spans.reverse()
    return spans


def _rebuild(body, replacements: dict[int, tuple[int, list[Token]]]) -> list[Token]:
    """Re-emit the body with unit slots replaced.

    ``replacements`` maps a unit's start position (1-based surface index) to
    (original unit length, new content).  Non-unit tokens keep their order;
    slots may change length.
    """
    out = []
    i = 0
    while i < len(body):
        idx = body[i].index
        if idx in replacements:
            length, content = replacements[idx]
            out.extend(content)
            i += length
        else:
            out.append(body[i])
            i += 1
    return out


def _resample(sample_fn, body, rng):
    """Draw up to MAX_RESAMPLES candidate orders, returning the first that
    differs from the input; None when every draw degenerates to the input."""
    original = _forms(body)
    for _ in range(MAX_RESAMPLES):
        candidate = sample_fn(rng)
        if _forms(candidate) != original:
            return candidate
    return None


def random_family(which: PerturbationId, body, rng):
    m = len(body)
    if which is PerturbationId.REVERSED:
        candidate = list(reversed(body))
        if _forms(candidate) == _forms(body):
            return None, "reversal equals input"
        return candidate, None

    if which is PerturbationId.WORD_SHUFFLE:
        lo, hi = 0, m
    elif which is PerturbationId.SHUFFLE_HALVES_FIRST:
        lo, hi = 0, (m + 1) // 2
    else:
        lo, hi = (m + 1) // 2, m
    if hi - lo < 2:
        return None, "shuffled region has fewer than 2 tokens"

    def sample(r):
        region = list(body[lo:hi])
        r.shuffle(region)
        return list(body[:lo]) + region + list(body[hi:])

    candidate = _resample(sample, body, rng)
    if candidate is None:
        return None, "degenerate"
    return candidate, None


def class_shuffle(cls: PosClass, body, rng):
    if cls is PosClass.NOUN:
        units = noun_spans(body)
    else:
        units = [[t] for t in body if pos_class(t) is cls]
    if len(units) < 2:
        return None, "needs >= 2 class members"

    def sample(r):
        perm = list(range(len(units)))
        r.shuffle(perm)
        repl = {units[k][0].index: (len(units[k]), units[perm[k]]) for k in range(len(units))}
        return _rebuild(body, repl)

    candidate = _resample(sample, body, rng)
    if candidate is None:
        return None, "degenerate"
    return candidate, None


def pair_swap(x_class: PosClass, y_class: PosClass, mode: str, body):
    """Swap units of x_class with tokens of y_class, matched greedily by
    extremal linear distance (mode "nearest" or "farthest")."""
    if x_class is PosClass.NOUN:
        x_units = noun_spans(body, exclude_class=y_class)
    else:
        x_units = [[t] for t in body if pos_class(t) is x_class]
    y_tokens = [t for t in body if pos_class(t) is y_class]
    if not x_units or not y_tokens:
        return None, "needs at least one unit of each class"

    def distance(unit, y):
        return min(abs(t.index - y.index) for t in unit)

    remaining_x = list(range(len(x_units)))
    remaining_y = list(range(len(y_tokens)))
    matches = []
    while remaining_x and remaining_y:
        if mode == "nearest":
            # ties: leftmost unit first, then the rightmost partner
            key = lambda pair: (distance(x_units[pair[0]], y_tokens[pair[1]]),
                                x_units[pair[0]][0].index,
                                -y_tokens[pair[1]].index)
        else:
            key = lambda pair: (-distance(x_units[pair[0]], y_tokens[pair[1]]),
                                x_units[pair[0]][0].index,
                                y_tokens[pair[1]].index)
        xi, yi = min(((x, y) for x in remaining_x for y in remaining_y), key=key)
        matches.append((xi, yi))
        remaining_x.remove(xi)
        remaining_y.remove(yi)

    repl = {}
    for xi, yi in matches:
        unit, y = x_units[xi], y_tokens[yi]
        repl[unit[0].index] = (len(unit), [y])
        repl[y.index] = (1, list(unit))
    candidate = _rebuild(body, repl)
    if _forms(candidate) == _forms(body):
        return None, "swaps equal input"
    return candidate, None


def verb_at_beginning(body):
    """Front the main verb: the root when tagged VERB, else the leftmost VERB,
    falling back to the leftmost Verb-class (auxiliary) token."""
    verb = None
    root = next((t for t in body if t.head == 0), None)
    if root is not None and root.upos == "VERB":
        verb = root
    if verb is None:
        verb = next((t for t in body if t.upos == "VERB"), None)
    if verb is None:
        verb = next((t for t in body if pos_class(t) is PosClass.VERB), None)
    if verb is None:
        return None, "no verb"
    if verb.index == body[0].index:
        return None, "verb already sentence-initial"
    return [verb] + [t for t in body if t.index != verb.index], None


def clause_spine(tree: DepTree):
    """Clause heads along the rightmost spine: the root plus every spine node
    attached by a clause-introducing relation."""
    spine = rightmost_spine(tree)
    out = [spine[0]]
    for node in spine[1:]:
        if node.token.deprel.split(":")[0] in CLAUSAL_DEPRELS:
            out.append(node)
    return out


def tree_family(which: PerturbationId, body, tree: DepTree):
    if which is PerturbationId.ROTATE_AROUND_ROOT:
        spine_tokens = [n.token for n in clause_spine(tree)]
        spine_ids = {t.index for t in spine_tokens}
        candidate = list(reversed(spine_tokens)) + [t for t in body if t.index not in spine_ids]
    else:
        order = {PerturbationId.TREE_MIRROR_PRE: Traversal.PRE,
                 PerturbationId.TREE_MIRROR_IN: Traversal.IN,
                 PerturbationId.TREE_MIRROR_POST: Traversal.POST}[which]
        candidate = traverse(mirror(tree), order)
    if _forms(candidate) == _forms(body):
        return None, "traversal equals input"
    return candidate, None


_CLASS_SHUFFLES = {
    PerturbationId.VERB_SWAPS: PosClass.VERB,
    PerturbationId.NOUN_SWAPS: PosClass.NOUN,
    PerturbationId.FUNCTIONAL_SHUFFLE: PosClass.FUNCTIONAL,
}

_PAIR_SWAPS = {
    PerturbationId.NOUN_VERB_SWAPS: (PosClass.NOUN, PosClass.VERB, "nearest"),
    PerturbationId.NOUN_VERB_MISMATCHED: (PosClass.NOUN, PosClass.VERB, "farthest"),
    PerturbationId.VERB_ADVERB_SWAPS: (PosClass.ADVERB, PosClass.VERB, "nearest"),
    PerturbationId.NOUN_ADJ_SWAPS: (PosClass.NOUN, PosClass.ADJECTIVE, "nearest"),
}

_RANDOM_FAMILY = {
    PerturbationId.WORD_SHUFFLE,
    PerturbationId.SHUFFLE_HALVES_FIRST,
    PerturbationId.SHUFFLE_HALVES_LAST,
    PerturbationId.REVERSED,
}

_TREE_FAMILY = {
    PerturbationId.TREE_MIRROR_PRE,
    PerturbationId.TREE_MIRROR_IN,
    PerturbationId.TREE_MIRROR_POST,
    PerturbationId.ROTATE_AROUND_ROOT,
}


def apply(perturbation: PerturbationId, sentence: Sentence, seed: int) -> PerturbationOutcome:
    body = sentence.body
    if len(body) < 2:
        return _not_applicable(perturbation, "fewer than 2 perturbable tokens")

    seed_used = None
    if perturbation in _RANDOM_FAMILY:
        rng = None
        if perturbation is not PerturbationId.REVERSED:
            rng = random.Random(seed)
            seed_used = seed
        candidate, reason = random_family(perturbation, body, rng)
    elif perturbation in _CLASS_SHUFFLES:
        rng = random.Random(seed)
        seed_used = seed
        candidate, reason = class_shuffle(_CLASS_SHUFFLES[perturbation], body, rng)
    elif perturbation in _PAIR_SWAPS:
        x_cls, y_cls, mode = _PAIR_SWAPS[perturbation]
        candidate, reason = pair_swap(x_cls, y_cls, mode, body)
    elif perturbation is PerturbationId.VERB_AT_BEGINNING:
        candidate, reason = verb_at_beginning(body)
    elif perturbation in _TREE_FAMILY:
        candidate, reason = tree_family(perturbation, body, build_tree(sentence))
    else:  # pragma: no cover
        raise ValueError(f"unhandled perturbation {perturbation}")

    if candidate is None:
        return _not_applicable(perturbation, reason)
    # Safety net for duplicate surface forms: moving tokens around may still
    # reproduce the exact input text, which is not a perturbation.
    if _forms(candidate) == _forms(body):
        return _not_applicable(perturbation, "output equals input")
    return _applied(perturbation, sentence, candidate, seed_used=seed_used)


def apply_derived(perturbation: PerturbationId, sentence: Sentence,
                  global_seed: int) -> PerturbationOutcome:
    return apply(perturbation, sentence, derive_seed(global_seed, sentence.id, perturbation))
