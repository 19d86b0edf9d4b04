"""A small synthetic segmentation language for end-to-end tests.

The alphabet is thirty CJK-range characters.  Ten of them are reserved as
single-character words; multi-character words draw from the remaining
twenty, so boundaries are learnable but word-internal positions still
depend on context (the same character appears at different positions in
different words).  Sentences are drawn word by word, five to ten words
each, from a seeded generator so every corpus is reproducible.
"""

from __future__ import annotations

import random
from typing import List, Sequence, Tuple

ALPHABET = [chr(0x4E00 + i) for i in range(30)]
SINGLES = ALPHABET[:10]
MULTI_POOL = ALPHABET[10:]

# word-type counts per length: 10 one-char, 28 two-char, 16 three-char,
# 6 four-char (60 total)
LENGTH_PLAN = {1: 10, 2: 28, 3: 16, 4: 6}


def build_vocabulary(seed: int = 0) -> List[str]:
    rng = random.Random(seed)
    words = list(SINGLES[: LENGTH_PLAN[1]])
    seen = set(words)
    for length in (2, 3, 4):
        added = 0
        while added < LENGTH_PLAN[length]:
            w = "".join(rng.choice(MULTI_POOL) for _ in range(length))
            if w not in seen:
                seen.add(w)
                words.append(w)
                added += 1
    return words


def sibling_vocabulary(base: Sequence[str], seed: int = 1) -> List[str]:
    """A related domain: keeps 70 percent of the base vocabulary and
    replaces the rest with fresh words of the same lengths."""
    rng = random.Random(seed)
    keep_n = int(round(len(base) * 0.7))
    kept = rng.sample(list(base), keep_n)
    seen = set(base)
    out = list(kept)
    need = {}
    for w in base:
        if w not in kept:
            need[len(w)] = need.get(len(w), 0) + 1
    for length, count in sorted(need.items()):
        added = 0
        while added < count:
            if length == 1:
                w = rng.choice(SINGLES)
                if w in seen:
                    # the single-char pool may be exhausted; reuse is fine
                    if all(s in seen for s in SINGLES):
                        w = rng.choice(MULTI_POOL)
            else:
                w = "".join(rng.choice(MULTI_POOL) for _ in range(length))
            if w not in seen:
                seen.add(w)
                out.append(w)
                added += 1
    return out


def sample_sentences(
    vocabulary: Sequence[str],
    n_sentences: int,
    seed: int,
    min_words: int = 5,
    max_words: int = 10,
) -> List[str]:
    """Gold corpus lines: words joined by single spaces."""
    rng = random.Random(seed)
    vocab = list(vocabulary)
    lines = []
    for _ in range(n_sentences):
        k = rng.randint(min_words, max_words)
        lines.append(" ".join(rng.choice(vocab) for _ in range(k)))
    return lines


def split_corpus(lines: Sequence[str], n_train: int) -> Tuple[List[str], List[str]]:
    return list(lines[:n_train]), list(lines[n_train:])
