"""Sentence similarity kernels and the rank statistic used by the analyses."""

from __future__ import annotations

import math
from collections import Counter

# Additive smoothing constant for sentence-level BLEU.  The n-gram order is
# also truncated to min(4, len(candidate), len(reference)) so that very short
# pairs are scored over the orders they can actually realize.
BLEU_EPS = 0.1


def bleu4(candidate, reference) -> float:
    """Smoothed sentence-level BLEU-4 over token sequences, in [0, 1].

    Identical non-empty sequences score exactly 1.0; an empty candidate
    scores 0.0.
    """
    candidate = list(candidate)
    reference = list(reference)
    if not reference:
        raise ValueError("bleu4 requires a non-empty reference")
    if not candidate:
        return 0.0
    n_max = min(4, len(candidate), len(reference))
    log_sum = 0.0
    for n in range(1, n_max + 1):
        cand_counts = Counter(tuple(candidate[i:i + n]) for i in range(len(candidate) - n + 1))
        ref_counts = Counter(tuple(reference[i:i + n]) for i in range(len(reference) - n + 1))
        matches = sum(min(c, ref_counts[g]) for g, c in cand_counts.items())
        total = len(candidate) - n + 1
        log_sum += math.log((matches + BLEU_EPS) / (total + BLEU_EPS))
    brevity = min(1.0, math.exp(1.0 - len(reference) / len(candidate)))
    return brevity * math.exp(log_sum / n_max)


def levenshtein_distance(a: str, b: str) -> int:
    """Unit-cost character edit distance (two-row dynamic program)."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1,
                           cur[j - 1] + 1,
                           prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[len(b)]


def levenshtein_sim(a: str, b: str) -> float:
    """1 - d/max(len); two empty strings are perfectly similar."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein_distance(a, b) / longest


def average_ranks(xs) -> list[float]:
    """1-based ranks; tied values share the mean of their rank run."""
    order = sorted(range(len(xs)), key=lambda i: xs[i])
    ranks = [0.0] * len(xs)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and xs[order[j + 1]] == xs[order[i]]:
            j += 1
        mean_rank = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def spearman(xs, ys) -> float | None:
    """Spearman rank correlation; None when either side is constant."""
    xs = list(xs)
    ys = list(ys)
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 3:
        raise ValueError(f"need at least 3 points, got {len(xs)}")
    rx = average_ranks(xs)
    ry = average_ranks(ys)
    mx = sum(rx) / len(rx)
    my = sum(ry) / len(ry)
    cov = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    vx = sum((a - mx) ** 2 for a in rx)
    vy = sum((b - my) ** 2 for b in ry)
    if vx == 0.0 or vy == 0.0:
        return None
    return cov / math.sqrt(vx * vy)
