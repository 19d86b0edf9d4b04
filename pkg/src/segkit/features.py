"""Per-character feature templates and the feature-string → ID index.

Templates are the classic character-window family for segmentation:
unigrams in a +/-2 window, three adjacent bigrams, and lexicon match
features (longest match beginning/ending at the position, bucketed, plus an
inside-word flag).  Every feature string carries a template prefix so
families can never collide.  Tags are NOT baked into the strings: the CRF
stores one weight per (feature ID, tag), keeping the string table small.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .corpus import NormalizationConfig
from .errors import ContractViolation

# Boundary sentinels, one per distance past the edge (window is <= 2).
_BOS = ("<BOS1>", "<BOS2>")
_EOS = ("<EOS1>", "<EOS2>")


@dataclass(frozen=True)
class TemplateConfig:
    """Switches and window sizes for the template families.

    l_max caps the lexicon match-length buckets so the feature space stays
    bounded; words longer than six characters are rare enough that the top
    bucket absorbs them.
    """

    unigram_window: int = 2
    bigrams: bool = True
    lexicon_feats: bool = True
    l_max: int = 6
    normalization: NormalizationConfig = field(default_factory=NormalizationConfig)

    def __post_init__(self):
        if not 0 <= self.unigram_window <= 2:
            raise ContractViolation("unigram window must be within [0, 2]")
        if self.l_max < 1:
            raise ContractViolation("l_max must be >= 1")


class FeatureIndex:
    """Dense string → ID table with first-seen ordering.

    While growing it also counts observations (used by pruning).  Once
    frozen, unknown strings map to nothing: they contribute no feature.
    """

    def __init__(self):
        self._table: dict = {}
        self._strings: list = []
        self._counts: list = []
        self.frozen = False

    @property
    def count(self) -> int:
        return len(self._strings)

    def observe(self, feature: str) -> Optional[int]:
        """Record one occurrence, assigning a new ID if needed.

        On a frozen index this degrades to a plain lookup (no new IDs, no
        counting); absent strings return None.
        """
        fid = self._table.get(feature)
        if self.frozen:
            return fid
        if fid is None:
            fid = len(self._strings)
            self._table[feature] = fid
            self._strings.append(feature)
            self._counts.append(0)
        self._counts[fid] += 1
        return fid

    def get(self, feature: str) -> Optional[int]:
        return self._table.get(feature)

    def string(self, fid: int) -> str:
        return self._strings[fid]

    def support(self, fid: int) -> int:
        return self._counts[fid]

    def strings(self) -> list:
        return list(self._strings)

    def freeze(self) -> "FeatureIndex":
        self.frozen = True
        return self

    def thaw(self) -> "FeatureIndex":
        self.frozen = False
        return self

    def copy(self, reset_counts: bool = False) -> "FeatureIndex":
        out = FeatureIndex()
        out._table = dict(self._table)
        out._strings = list(self._strings)
        out._counts = [0] * len(self._counts) if reset_counts else list(self._counts)
        out.frozen = self.frozen
        return out

    @classmethod
    def from_strings(cls, strings, frozen: bool = True) -> "FeatureIndex":
        out = cls()
        for s in strings:
            if s in out._table:
                raise ContractViolation(f"duplicate feature string {s!r}")
            out._table[s] = len(out._strings)
            out._strings.append(s)
            out._counts.append(0)
        out.frozen = frozen
        return out


def prune(index: FeatureIndex, weights: np.ndarray, min_support: int):
    """Drop features observed fewer than *min_support* times during training.

    Returns a new frozen index with re-densified IDs and the weight rows
    that survive, in the same order, so weights stay aligned.
    """
    if min_support < 1:
        raise ContractViolation("min_support must be >= 1")
    kept = [fid for fid in range(index.count) if index._counts[fid] >= min_support]
    out = FeatureIndex()
    for fid in kept:
        out._table[index._strings[fid]] = len(out._strings)
        out._strings.append(index._strings[fid])
        out._counts.append(index._counts[fid])
    out.freeze()
    return out, np.asarray(weights)[np.asarray(kept, dtype=np.intp)]


def _char_at(chars: Sequence[str], i: int, n: int) -> str:
    if i < 0:
        return _BOS[-i - 1]
    if i >= n:
        return _EOS[i - n]
    return chars[i]


def extract(
    chars: Sequence[str],
    lexicon,
    cfg: TemplateConfig,
    index: FeatureIndex,
) -> List[np.ndarray]:
    """Extract per-position feature IDs from a sentence view.

    *chars* is the (possibly normalized) feature view.  With an unfrozen
    index this grows the table and counts observations; with a frozen index
    unknown strings are dropped.  Returns one sorted unique ID array per
    position.
    """
    n = len(chars)
    use_lex = cfg.lexicon_feats and lexicon is not None and len(lexicon) > 0
    if use_lex:
        begins = [0] * n
        ends = [0] * n
        inside = [False] * n
        for j in range(n):
            for length in lexicon.match_lengths_begin(chars, j):
                begins[j] = length  # ascending, so the last write is the max
                last = j + length - 1
                if length > ends[last]:
                    ends[last] = length
                for k in range(j + 1, last):
                    inside[k] = True

    observe = index.observe
    out = []
    for i in range(n):
        strings = []
        for k in range(-cfg.unigram_window, cfg.unigram_window + 1):
            label = "U0" if k == 0 else f"U{k:+d}"
            strings.append(f"{label}={_char_at(chars, i + k, n)}")
        if cfg.bigrams:
            prev = _char_at(chars, i - 1, n)
            cur = _char_at(chars, i, n)
            nxt = _char_at(chars, i + 1, n)
            strings.append(f"B-1,0={prev}{cur}")
            strings.append(f"B0,+1={cur}{nxt}")
            strings.append(f"B-1,+1={prev}{nxt}")
        if use_lex:
            if begins[i]:
                strings.append(f"Lb={min(begins[i], cfg.l_max)}")
            if ends[i]:
                strings.append(f"Le={min(ends[i], cfg.l_max)}")
            if inside[i]:
                strings.append("INW")
        ids = [fid for fid in map(observe, strings) if fid is not None]
        out.append(np.unique(np.asarray(ids, dtype=np.intp)))
    return out
