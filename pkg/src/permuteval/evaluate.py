"""Per-example scores and the corpus-level analyses built on them.

A record exists for a (example, perturbation) pair only when the perturbation
applies on BOTH the source and the target side; everything else is excluded
and does not count toward a perturbation's sample size.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .corpus import ParallelExample, detokenize
from .metrics import bleu4, levenshtein_sim, spearman
from .perturb import PerturbationId, PerturbationOutcome, apply, derive_seed
from .translate import (SubprocessTranslator, TranslationError, TranslatorConfig,
                        translate_batch)

CORRELATION_PAIRS = (
    ("beta1_B", "beta"),
    ("beta2_B", "beta"),
    ("beta1_B", "beta2_B"),
    ("beta1_B", "src_len"),
    ("beta2_B", "src_len"),
    ("alpha_L", "src_len"),
)


@dataclass(frozen=True)
class ScoreRecord:
    example_id: str
    perturbation: PerturbationId
    lang_pair: str
    alpha_B: float
    alpha_L: float
    beta: float
    beta1_B: float
    beta1_L: float
    beta2_B: float
    beta2_L: float
    src_len: int
    delta: float
    # Texts are carried when the record was computed in-process; records
    # re-read from scores.csv leave them as None.
    src_text: str | None = field(default=None, compare=False)
    src_perturbed: str | None = field(default=None, compare=False)
    tgt_text: str | None = field(default=None, compare=False)
    tgt_perturbed: str | None = field(default=None, compare=False)
    translation_clean: str | None = field(default=None, compare=False)
    translation_perturbed: str | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Excluded:
    example_id: str
    perturbation: PerturbationId
    reason: str


@dataclass(frozen=True)
class AggregateRow:
    lang_pair: str
    perturbation: PerturbationId
    n: int
    mean_alpha_B: float
    mean_alpha_L: float
    mean_beta: float
    mean_beta1_B: float
    mean_beta2_B: float
    mean_delta: float


def build_record(example: ParallelExample, src_out: PerturbationOutcome,
                 tgt_out: PerturbationOutcome, phi_clean: str,
                 phi_perturbed: str) -> ScoreRecord:
    src_forms = [t.form for t in example.source.tokens]
    tgt_forms = [t.form for t in example.target.tokens]
    src_pert_forms = [t.form for t in src_out.tokens]
    tgt_pert_forms = [t.form for t in tgt_out.tokens]
    g_e = detokenize(example.source.tokens)
    g_o = detokenize(example.target.tokens)
    g_e_pert = src_out.text()
    g_o_pert = tgt_out.text()

    alpha_b = bleu4(src_pert_forms, src_forms)
    alpha_l = levenshtein_sim(g_e, g_e_pert)
    beta = bleu4(phi_clean.split(), tgt_forms)
    beta1_b = bleu4(phi_perturbed.split(), tgt_forms)
    beta1_l = levenshtein_sim(g_o, phi_perturbed)
    beta2_b = bleu4(phi_perturbed.split(), tgt_pert_forms)
    beta2_l = levenshtein_sim(g_o_pert, phi_perturbed)

    return ScoreRecord(
        example_id=example.id,
        perturbation=src_out.perturbation,
        lang_pair=example.lang_pair,
        alpha_B=alpha_b,
        alpha_L=alpha_l,
        beta=beta,
        beta1_B=beta1_b,
        beta1_L=beta1_l,
        beta2_B=beta2_b,
        beta2_L=beta2_l,
        src_len=len(example.source.tokens),
        delta=beta2_b - beta1_b,
        src_text=g_e,
        src_perturbed=g_e_pert,
        tgt_text=g_o,
        tgt_perturbed=g_o_pert,
        translation_clean=phi_clean,
        translation_perturbed=phi_perturbed,
    )


def score_example(example: ParallelExample, perturbation: PerturbationId, seed: int,
                  translator: TranslatorConfig):
    """Score one (example, perturbation) pair; the same perturbation and seed
    are applied to the source and to the target sentence."""
    src_out = apply(perturbation, example.source, seed)
    if not src_out.applied:
        return Excluded(example.id, perturbation, f"source not applicable: {src_out.reason}")
    tgt_out = apply(perturbation, example.target, seed)
    if not tgt_out.applied:
        return Excluded(example.id, perturbation, f"target not applicable: {tgt_out.reason}")

    g_e = detokenize(example.source.tokens)
    try:
        results = translate_batch(translator, [
            {"id": "clean", "text": g_e},
            {"id": "perturbed", "text": src_out.text()},
        ])
    except TranslationError as exc:
        raise TranslationError(f"example {example.id}: {exc}") from exc
    by_id = {r["id"]: r["translation"] for r in results}
    return build_record(example, src_out, tgt_out, by_id["clean"], by_id["perturbed"])


def _chunk(seq, parts):
    size, extra = divmod(len(seq), parts)
    out = []
    start = 0
    for k in range(parts):
        end = start + size + (1 if k < extra else 0)
        if end > start:
            out.append(seq[start:end])
        start = end
    return out


def score_corpus(examples, perturbations, global_seed: int,
                 translator: TranslatorConfig, workers: int = 1):
    """Score every (example, perturbation) pair.

    Returns (records, excluded) with records sorted by (example_id,
    perturbation name).  Results are independent of the worker count: seeds
    are derived per pair and the output ordering is a stable sort.
    """
    perturbations = list(perturbations)
    tasks = [(ex, p) for ex in examples for p in perturbations]

    def perturb_pair(task):
        ex, p = task
        seed = derive_seed(global_seed, ex.id, p)
        src_out = apply(p, ex.source, seed)
        if not src_out.applied:
            return ex, p, None, None, f"source not applicable: {src_out.reason}"
        tgt_out = apply(p, ex.target, seed)
        if not tgt_out.applied:
            return ex, p, None, None, f"target not applicable: {tgt_out.reason}"
        return ex, p, src_out, tgt_out, None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(perturb_pair, tasks))
    else:
        outcomes = [perturb_pair(t) for t in tasks]

    excluded = [Excluded(ex.id, p, reason)
                for ex, p, _, _, reason in outcomes if reason is not None]
    included = [(ex, p, s, t) for ex, p, s, t, reason in outcomes if reason is None]

    requests = {}
    for ex, p, src_out, _ in included:
        requests.setdefault(f"c:{ex.id}", detokenize(ex.source.tokens))
        requests[f"p:{ex.id}:{p.value}"] = src_out.text()
    request_list = [{"id": rid, "text": text} for rid, text in sorted(requests.items())]

    if translator.mode == "subprocess" and workers > 1 and len(request_list) > 1:
        chunks = _chunk(request_list, workers)

        def run_chunk(chunk):
            with SubprocessTranslator(translator) as child:
                return child.translate(chunk)

        translations = {}
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            for part in pool.map(run_chunk, chunks):
                translations.update(part)
    else:
        translations = {r["id"]: r["translation"]
                        for r in translate_batch(translator, request_list)}

    def make_record(item):
        ex, p, src_out, tgt_out = item
        return build_record(ex, src_out, tgt_out,
                            translations[f"c:{ex.id}"],
                            translations[f"p:{ex.id}:{p.value}"])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(make_record, included))
    else:
        records = [make_record(item) for item in included]

    records.sort(key=lambda r: (r.example_id, r.perturbation.value))
    return records, excluded


def aggregate(records) -> list[AggregateRow]:
    groups: dict[tuple[str, str], list[ScoreRecord]] = {}
    for rec in records:
        groups.setdefault((rec.lang_pair, rec.perturbation.value), []).append(rec)

    def mean(values):
        return sum(values) / len(values)

    rows = []
    for (lang, _), members in sorted(groups.items()):
        rows.append(AggregateRow(
            lang_pair=lang,
            perturbation=members[0].perturbation,
            n=len(members),
            mean_alpha_B=mean([r.alpha_B for r in members]),
            mean_alpha_L=mean([r.alpha_L for r in members]),
            mean_beta=mean([r.beta for r in members]),
            mean_beta1_B=mean([r.beta1_B for r in members]),
            mean_beta2_B=mean([r.beta2_B for r in members]),
            mean_delta=mean([r.delta for r in members]),
        ))
    return rows


def quartiles(values):
    """(min, q1, median, q3, max) with linear interpolation between ranks."""
    xs = sorted(values)
    if not xs:
        raise ValueError("quartiles of an empty list")

    def at(p):
        pos = (len(xs) - 1) * p
        lo = int(pos)
        hi = min(lo + 1, len(xs) - 1)
        frac = pos - lo
        return xs[lo] * (1 - frac) + xs[hi] * frac

    return xs[0], at(0.25), at(0.5), at(0.75), xs[-1]


def gap_distribution(records):
    """Per-language and per-perturbation lists of delta = beta2_B - beta1_B."""
    by_lang: dict[str, list[float]] = {}
    by_pert: dict[str, list[float]] = {}
    for rec in records:
        by_lang.setdefault(rec.lang_pair, []).append(rec.delta)
        by_pert.setdefault(rec.perturbation.value, []).append(rec.delta)
    return by_lang, by_pert


def perturbation_similarity_matrix(sentences, global_seed: int,
                                   perturbations=None):
    """Mean pairwise Levenshtein similarity of perturbation outputs.

    Cell (i, j) averages the similarity of the two perturbed texts over every
    sentence where both perturbations applied; cells with no co-applicable
    sentence are None.  Returns (labels, matrix).
    """
    perturbations = list(perturbations) if perturbations is not None else list(PerturbationId)
    k = len(perturbations)
    sums = [[0.0] * k for _ in range(k)]
    counts = [[0] * k for _ in range(k)]
    # accumulation order is pinned so the cells do not depend on corpus order
    for sent in sorted(sentences, key=lambda s: s.id):
        texts = []
        for p in perturbations:
            out = apply(p, sent, derive_seed(global_seed, sent.id, p))
            texts.append(out.text() if out.applied else None)
        for i in range(k):
            if texts[i] is None:
                continue
            for j in range(i, k):
                if texts[j] is None:
                    continue
                sim = 1.0 if i == j else levenshtein_sim(texts[i], texts[j])
                sums[i][j] += sim
                counts[i][j] += 1
    matrix = [[None] * k for _ in range(k)]
    for i in range(k):
        for j in range(i, k):
            if counts[i][j]:
                matrix[i][j] = matrix[j][i] = sums[i][j] / counts[i][j]
    labels = [p.value for p in perturbations]
    return labels, matrix


def correlations(records, min_group=3):
    """Spearman correlations of the standard score pairs, per language pair.

    Returns (rows, notes); groups smaller than ``min_group`` are skipped with
    a note.  rho is None when a side is constant.
    """
    groups: dict[str, list[ScoreRecord]] = {}
    for rec in records:
        groups.setdefault(rec.lang_pair, []).append(rec)
    rows = []
    notes = []
    for lang in sorted(groups):
        members = groups[lang]
        if len(members) < min_group:
            notes.append(f"skipping {lang}: only {len(members)} records (< {min_group})")
            continue
        for x_name, y_name in CORRELATION_PAIRS:
            xs = [getattr(r, x_name) for r in members]
            ys = [getattr(r, y_name) for r in members]
            rows.append({"lang_pair": lang, "pair": f"{x_name}~{y_name}",
                         "rho": spearman(xs, ys), "n": len(members)})
    return rows, notes


def find_flips(records, margin: float = 0.0) -> list[ScoreRecord]:
    """Records where the perturbed source translated better than the clean one."""
    if margin < 0:
        raise ValueError("margin must be >= 0")
    flips = [r for r in records if r.beta1_B > r.beta + margin]
    flips.sort(key=lambda r: (-(r.beta1_B - r.beta), r.example_id, r.perturbation.value))
    return flips


def length_buckets(records, bucket_width: int = 5):
    """Bucket records by source length into [k*w, (k+1)*w) bins.

    Returns rows of (lo, hi, n, mean_beta1_B, mean_beta2_B, mean_alpha_L).
    """
    if bucket_width < 1:
        raise ValueError("bucket width must be >= 1")
    buckets: dict[int, list[ScoreRecord]] = {}
    for rec in records:
        buckets.setdefault(rec.src_len // bucket_width, []).append(rec)
    rows = []
    for k in sorted(buckets):
        members = buckets[k]
        rows.append({
            "bucket_lo": k * bucket_width,
            "bucket_hi": (k + 1) * bucket_width,
            "n": len(members),
            "mean_beta1_B": sum(r.beta1_B for r in members) / len(members),
            "mean_beta2_B": sum(r.beta2_B for r in members) / len(members),
            "mean_alpha_L": sum(r.alpha_L for r in members) / len(members),
        })
    return rows
