#!/usr/bin/env python3
"""Regenerate the bundled 50-pair corpus fixtures and their translation cache.

The corpus is synthetic but well-formed: every sentence carries a valid
dependency annotation, ids align across the two files, and the cache holds a
deterministic toy translation for every text the scoring pipeline requests at
global seed 42.  Output is committed; rerunning this script must be a no-op.
"""

import hashlib
import os
import random
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from permuteval.corpus import load_parallel, parse_conllu
from permuteval.perturb import PerturbationId, apply, derive_seed
from permuteval.translate import cache_key

GLOBAL_SEED = 42
SYSTEM_ID = "toy-enfr-v1"
N_PAIRS = 50
OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "src", "permuteval", "fixtures")

EN = {
    "det": ["the", "a", "this", "that", "every"],
    "adj": ["old", "small", "bright", "quiet", "strange", "happy"],
    "noun": ["fox", "dog", "garden", "house", "teacher", "river", "story",
             "child", "market", "letter"],
    "propn": ["Tom", "Mary", "John", "Anna"],
    "verb": ["sees", "finds", "reads", "follows", "paints", "watches", "visits"],
    "aux": ["can", "will", "must", "may"],
    "adv": ["quickly", "slowly", "softly", "often"],
    "adp": ["in", "near", "behind", "under"],
    "sconj": ["that"],
}

FR = {
    "det": ["le", "la", "un", "une", "ce"],
    "adj": ["vieux", "petit", "brillant", "calme", "joli", "gai"],
    "noun": ["renard", "chien", "jardin", "maison", "fleuve", "histoire",
             "enfant", "marche", "lettre", "pont"],
    "propn": ["Tom", "Marie", "Jean", "Anne"],
    "verb": ["voit", "trouve", "lit", "suit", "peint", "regarde", "visite"],
    "aux": ["peut", "va", "doit"],
    "adv": ["vite", "lentement", "souvent"],
    "adp": ["dans", "devant", "derriere", "sous"],
    "sconj": ["que"],
}


def tok(form, upos, head, deprel):
    return (form, upos, head, deprel)


def pattern_simple(rng, v):
    """det [adj] noun verb det [adj] noun [adp det noun] [adv] punct"""
    toks = []
    subj_adj = rng.random() < 0.5
    obj_adj = rng.random() < 0.5
    with_pp = rng.random() < 0.6
    with_adv = rng.random() < 0.4

    subj_head = 2 + (1 if subj_adj else 0)
    verb_pos = subj_head + 1
    toks.append(tok(rng.choice(v["det"]), "DET", subj_head, "det"))
    if subj_adj:
        toks.append(tok(rng.choice(v["adj"]), "ADJ", subj_head, "amod"))
    toks.append(tok(rng.choice(v["noun"]), "NOUN", verb_pos, "nsubj"))
    toks.append(tok(rng.choice(v["verb"]), "VERB", 0, "root"))
    obj_head = verb_pos + 2 + (1 if obj_adj else 0)
    toks.append(tok(rng.choice(v["det"]), "DET", obj_head, "det"))
    if obj_adj:
        toks.append(tok(rng.choice(v["adj"]), "ADJ", obj_head, "amod"))
    toks.append(tok(rng.choice(v["noun"]), "NOUN", verb_pos, "obj"))
    if with_pp:
        adp_pos = obj_head + 1
        toks.append(tok(rng.choice(v["adp"]), "ADP", adp_pos + 2, "case"))
        toks.append(tok(rng.choice(v["det"]), "DET", adp_pos + 2, "det"))
        toks.append(tok(rng.choice(v["noun"]), "NOUN", verb_pos, "obl"))
    if with_adv:
        toks.append(tok(rng.choice(v["adv"]), "ADV", verb_pos, "advmod"))
    toks.append(tok(".", "PUNCT", verb_pos, "punct"))
    return toks


def pattern_clause(rng, v):
    """propn verb sconj propn verb det noun punct  (embedded clause)"""
    return [
        tok(rng.choice(v["propn"]), "PROPN", 2, "nsubj"),
        tok(rng.choice(v["verb"]), "VERB", 0, "root"),
        tok(rng.choice(v["sconj"]), "SCONJ", 5, "mark"),
        tok(rng.choice(v["propn"]), "PROPN", 5, "nsubj"),
        tok(rng.choice(v["verb"]), "VERB", 2, "ccomp"),
        tok(rng.choice(v["det"]), "DET", 7, "det"),
        tok(rng.choice(v["noun"]), "NOUN", 5, "obj"),
        tok(".", "PUNCT", 2, "punct"),
    ]


def pattern_aux(rng, v):
    """det noun aux verb det adj noun adv punct"""
    return [
        tok(rng.choice(v["det"]), "DET", 2, "det"),
        tok(rng.choice(v["noun"]), "NOUN", 4, "nsubj"),
        tok(rng.choice(v["aux"]), "AUX", 4, "aux"),
        tok(rng.choice(v["verb"]), "VERB", 0, "root"),
        tok(rng.choice(v["det"]), "DET", 7, "det"),
        tok(rng.choice(v["adj"]), "ADJ", 7, "amod"),
        tok(rng.choice(v["noun"]), "NOUN", 4, "obj"),
        tok(rng.choice(v["adv"]), "ADV", 4, "advmod"),
        tok(".", "PUNCT", 4, "punct"),
    ]


def pattern_question(rng, v):
    """aux propn verb det noun punct"""
    return [
        tok(rng.choice(v["aux"]), "AUX", 3, "aux"),
        tok(rng.choice(v["propn"]), "PROPN", 3, "nsubj"),
        tok(rng.choice(v["verb"]), "VERB", 0, "root"),
        tok(rng.choice(v["det"]), "DET", 5, "det"),
        tok(rng.choice(v["noun"]), "NOUN", 3, "obj"),
        tok("?", "PUNCT", 3, "punct"),
    ]


def pattern_verbless_fr(rng, v):
    """det adj noun punct  (no verb: forces target-side inapplicability)"""
    return [
        tok(rng.choice(v["det"]), "DET", 3, "det"),
        tok(rng.choice(v["adj"]), "ADJ", 3, "amod"),
        tok(rng.choice(v["noun"]), "NOUN", 0, "root"),
        tok(".", "PUNCT", 3, "punct"),
    ]


PATTERNS = [pattern_simple, pattern_clause, pattern_aux, pattern_question]


def render_block(sent_id, toks):
    lines = [f"# sent_id = {sent_id}",
             "# text = " + " ".join(t[0] for t in toks)]
    for i, (form, upos, head, deprel) in enumerate(toks, start=1):
        lines.append(f"{i}\t{form}\t_\t{upos}\t_\t_\t{head}\t{deprel}\t_\t_")
    return "\n".join(lines) + "\n"


def build_corpus():
    rng = random.Random(20240810)
    en_blocks, fr_blocks = [], []
    seen_texts = set()
    for i in range(N_PAIRS):
        sent_id = f"ex{i:03d}"
        pat = PATTERNS[i % len(PATTERNS)]
        while True:
            en = pat(rng, EN)
            fr = pattern_verbless_fr(rng, FR) if i % 9 == 8 else pat(rng, FR)
            texts = (" ".join(t[0] for t in en), " ".join(t[0] for t in fr))
            if texts[0] not in seen_texts and texts[1] not in seen_texts:
                seen_texts.update(texts)
                break
        en_blocks.append(render_block(sent_id, en))
        fr_blocks.append(render_block(sent_id, fr))
    return "\n".join(en_blocks), "\n".join(fr_blocks)


def _text_hash(text):
    return int.from_bytes(hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest(), "big")


def toy_translate_clean(fr_forms, text):
    """Near-reference output: the gold target, occasionally with one swap."""
    toks = list(fr_forms)
    if _text_hash(text) % 4 == 0 and len(toks) > 3:
        toks[1], toks[2] = toks[2], toks[1]
    return " ".join(toks)


def toy_translate_perturbed(fr_forms, text):
    """Deterministic stand-in for translating a perturbed source: the gold
    target rotated (and sometimes swapped) as a pure function of the text."""
    h = _text_hash(text)
    toks = list(fr_forms)
    k = h % len(toks)
    toks = toks[k:] + toks[:k]
    if h % 4 == 0 and len(toks) > 3:
        toks[1], toks[2] = toks[2], toks[1]
    return " ".join(toks)


def build_cache(en_path, fr_path):
    examples = load_parallel(en_path, fr_path, lang_pair="en-fr")
    entries = {}
    text_owner = {}
    for ex in examples:
        fr_forms = [t.form for t in ex.target.tokens]
        clean = ex.source.text()
        assert clean not in text_owner, f"duplicate text across examples: {clean!r}"
        text_owner[clean] = ex.id
        entries[clean] = toy_translate_clean(fr_forms, clean)
        for pert in PerturbationId:
            seed = derive_seed(GLOBAL_SEED, ex.id, pert)
            src_out = apply(pert, ex.source, seed)
            tgt_out = apply(pert, ex.target, seed)
            if not (src_out.applied and tgt_out.applied):
                continue
            text = src_out.text()
            owner = text_owner.setdefault(text, ex.id)
            assert owner == ex.id, f"perturbed text collides across examples: {text!r}"
            entries[text] = toy_translate_perturbed(fr_forms, text)
    lines = []
    for text in sorted(entries):
        key = cache_key(SYSTEM_ID, text)
        lines.append(
            '{"key": %s, "text": %s, "translation": %s}' % tuple(
                _json(s) for s in (key, text, entries[text])))
    return "\n".join(lines) + "\n"


def _json(s):
    import json
    return json.dumps(s, ensure_ascii=False)


def main():
    en_text, fr_text = build_corpus()
    # validate before writing anything
    for text in (en_text, fr_text):
        parse_conllu(text)
    en_path = os.path.join(OUT_DIR, "pairs_en.conllu")
    fr_path = os.path.join(OUT_DIR, "pairs_fr.conllu")
    with open(en_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(en_text)
    with open(fr_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(fr_text)
    cache_text = build_cache(en_path, fr_path)
    with open(os.path.join(OUT_DIR, "cache_enfr.jsonl"), "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write(cache_text)
    print(f"wrote {N_PAIRS} pairs and {cache_text.count(chr(10))} cache entries to {OUT_DIR}")


if __name__ == "__main__":
    main()
