"""Prefix-trie word lists with longest-match queries.

One Lexicon backs both the built-in vocabulary and user dictionaries: both
are plain word-list files (UTF-8, one word per line) and both are consulted
through the same match queries.  Queries cost O(max_len) trie steps no
matter how many words are stored, which is what keeps per-character
featurization flat as the vocabulary grows.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field
from typing import Dict, Iterable, Sequence


class _Node:
    __slots__ = ("children", "terminal")

    def __init__(self):
        self.children: Dict[str, "_Node"] = {}
        self.terminal = False


class Lexicon:
    """A word set over Unicode characters with forward and backward tries.

    The backward trie (reversed words) serves longest-match-ending queries
    in the same O(max_len) bound as the forward ones.  Immutable by
    convention after construction: build, then share across readers.
    """

    def __init__(self, words: Iterable[str] = ()):
        self._root = _Node()
        self._rroot = _Node()
        self.size = 0
        self.max_len = 0
        for w in words:
            self.add(w)

    def add(self, word: str) -> bool:
        """Insert one word; returns False if it was already present."""
        if not word:
            return False
        node = self._root
        for ch in word:
            node = node.children.setdefault(ch, _Node())
        if node.terminal:
            return False
        node.terminal = True
        rnode = self._rroot
        for ch in reversed(word):
            rnode = rnode.children.setdefault(ch, _Node())
        rnode.terminal = True
        self.size += 1
        self.max_len = max(self.max_len, len(word))
        return True

    def __contains__(self, word: str) -> bool:
        node = self._root
        for ch in word:
            node = node.children.get(ch)
            if node is None:
                return False
        return node.terminal if word else False

    def __len__(self) -> int:
        return self.size

    def __iter__(self) -> Iterable[str]:
        stack = [(self._root, [])]
        while stack:
            node, prefix = stack.pop()
            if node.terminal:
                yield "".join(prefix)
            for ch in sorted(node.children, reverse=True):
                stack.append((node.children[ch], prefix + [ch]))

    def longest_match_begin(self, chars: Sequence[str], i: int) -> int:
        """Length of the longest word starting at position *i*; 0 if none."""
        node = self._root
        best = 0
        j = i
        n = len(chars)
        while j < n:
            node = node.children.get(chars[j])
            if node is None:
                break
            j += 1
            if node.terminal:
                best = j - i
        return best

    def longest_match_end(self, chars: Sequence[str], i: int) -> int:
        """Length of the longest word ending at position *i* (inclusive)."""
        node = self._rroot
        best = 0
        j = i
        while j >= 0:
            node = node.children.get(chars[j])
            if node is None:
                break
            j -= 1
            if node.terminal:
                best = i - j
        return best

    def match_lengths_begin(self, chars: Sequence[str], i: int) -> list:
        """All word lengths matching at position *i*, ascending."""
        node = self._root
        out = []
        j = i
        n = len(chars)
        while j < n:
            node = node.children.get(chars[j])
            if node is None:
                break
            j += 1
            if node.terminal:
                out.append(j - i)
        return out


@dataclass(frozen=True)
class LexiconStats:
    """Per-source raw word counts from a merge, plus the deduplicated total."""

    per_source: tuple
    total: int

    @property
    def raw_total(self) -> int:
        return sum(n for _, n in self.per_source)


def load_wordlist(path) -> Lexicon:
    """Load a word-list file: one word per line, UTF-8, blanks skipped."""
    lex = Lexicon()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.strip()
            if word:
                lex.add(word)
    return lex


def merge(lexicons: Sequence, names: Sequence[str] = None):
    """Union a list of lexicons; returns ``(Lexicon, LexiconStats)``.

    Stats carry each source's raw size and the deduplicated total, which is
    at most the raw sum.
    """
    if names is None:
        names = [f"source{i}" for i in range(len(lexicons))]
    merged = Lexicon()
    for lex in lexicons:
        for word in lex:
            merged.add(word)
    per_source = tuple((name, lex.size) for name, lex in zip(names, lexicons))
    return merged, LexiconStats(per_source=per_source, total=merged.size)


def bundled_sample() -> Lexicon:
    """The small vocabulary sample shipped for tests and smoke runs."""
    text = (
        importlib.resources.files("segkit")
        .joinpath("data/sample_vocab.txt")
        .read_text(encoding="utf-8")
    )
    return Lexicon(w.strip() for w in text.splitlines() if w.strip())
