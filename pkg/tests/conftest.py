import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from permuteval.cli import fixture_path
from permuteval.corpus import Sentence, Token, make_sentence, parse_conllu_file

UPOS_POOL = ["NOUN", "VERB", "AUX", "ADJ", "ADV", "ADP", "DET", "PRON", "PROPN",
             "PART", "CCONJ", "SCONJ", "NUM", "X", "INTJ"]
DEPREL_POOL = ["nsubj", "obj", "det", "amod", "advmod", "case", "mark", "ccomp",
               "acl", "nmod", "aux", "compound", "nummod", "poss", "obl", "dep"]
WORD_POOL = ["alpha", "beta", "gamma", "delta", "omega", "stone", "river", "walks",
             "sees", "green", "slow", "under", "the", "a", "it", "they", "runs",
             "bright", "cloud", "sings"]


def random_sentence(rng: random.Random, sent_id: str) -> Sentence:
    """A random well-formed dependency-annotated sentence."""
    n = rng.randint(1, 12)
    with_punct = rng.random() < 0.7
    root = rng.randint(1, n)
    attached = [root]
    heads = {root: 0}
    for i in rng.sample([j for j in range(1, n + 1) if j != root], n - 1):
        heads[i] = rng.choice(attached)
        attached.append(i)
    tokens = []
    for i in range(1, n + 1):
        tokens.append(Token(index=i, form=rng.choice(WORD_POOL),
                            upos=rng.choice(UPOS_POOL), head=heads[i],
                            deprel="root" if heads[i] == 0 else rng.choice(DEPREL_POOL)))
    if with_punct:
        tokens.append(Token(index=n + 1, form=rng.choice([".", "?", "!"]),
                            upos="PUNCT", head=root, deprel="punct"))
    return make_sentence(sent_id, tokens)


@pytest.fixture(scope="session")
def tom_sentence():
    return parse_conllu_file(fixture_path("tom.conllu"))[0]


@pytest.fixture(scope="session")
def flips_sentences():
    return {s.id: s for s in parse_conllu_file(fixture_path("flips.conllu"))}


ECHO_CHILD = str(Path(__file__).parent / "echo_child.py")
