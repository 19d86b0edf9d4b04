"""Sentence/segmentation value types, corpus parsing, and the BMES tag codec.

All types here are immutable values; every function is pure.  Whitespace
handling, the position-tag encoding, and the repair rule for externally
supplied tag sequences are defined once here and used everywhere else.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .errors import ContractViolation, CorpusFormatError

# Position tags.  Values are fixed: they index transition matrices and are
# serialized in model files.
B, M, E, S = 0, 1, 2, 3
POSITION_NAMES = ("B", "M", "E", "S")

# Single-character placeholders used by the normalized feature view
# (private-use codepoints so they can never collide with real text).
DIGIT_CLASS_CHAR = ""
LATIN_CLASS_CHAR = ""


@dataclass(frozen=True)
class Sentence:
    """A unit of text: characters plus byte offsets into the original string."""

    chars: tuple
    raw: str
    offsets: tuple

    @classmethod
    def from_text(cls, text: str) -> "Sentence":
        chars = tuple(text)
        offsets = []
        pos = 0
        for ch in chars:
            offsets.append(pos)
            pos += len(ch.encode("utf-8"))
        return cls(chars=chars, raw=text, offsets=tuple(offsets))

    def __len__(self) -> int:
        return len(self.chars)


@dataclass(frozen=True)
class Segmentation:
    """Half-open character spans partitioning ``[0, n_chars)`` of a sentence."""

    spans: tuple

    def __post_init__(self):
        prev_end = 0
        for start, end in self.spans:
            if start != prev_end or end <= start:
                raise ContractViolation(
                    f"spans must be contiguous non-empty intervals, got {self.spans}"
                )
            prev_end = end

    @classmethod
    def from_lengths(cls, lengths: Iterable[int]) -> "Segmentation":
        spans = []
        pos = 0
        for n in lengths:
            spans.append((pos, pos + n))
            pos += n
        return cls(spans=tuple(spans))

    @property
    def n_chars(self) -> int:
        return self.spans[-1][1] if self.spans else 0

    def words(self, sentence) -> list:
        """Materialize the word strings over *sentence* (a Sentence or str)."""
        chars = sentence.chars if isinstance(sentence, Sentence) else sentence
        return ["".join(chars[a:b]) for a, b in self.spans]

    def __len__(self) -> int:
        return len(self.spans)


class TagScheme:
    """The tag inventory plus the structural transition/start/end masks.

    In plain mode there are four tags (B, M, E, S).  In joint mode each tag
    pairs a position with a POS label; within-word transitions are legal only
    between tags that share a label, so one word carries one label.
    """

    def __init__(self, pos_labels: Optional[Sequence[str]] = None):
        self.joint = pos_labels is not None
        self.pos_labels = tuple(pos_labels) if pos_labels else ()
        n_groups = len(self.pos_labels) if self.joint else 1
        self.size = 4 * n_groups
        self.mask = np.zeros((self.size, self.size), dtype=bool)
        self.start_mask = np.zeros(self.size, dtype=bool)
        self.end_mask = np.zeros(self.size, dtype=bool)
        for g in range(n_groups):
            base = 4 * g
            self.start_mask[[base + B, base + S]] = True
            self.end_mask[[base + E, base + S]] = True
            # Within-word transitions stay inside one label group.
            self.mask[base + B, base + M] = True
            self.mask[base + B, base + E] = True
            self.mask[base + M, base + M] = True
            self.mask[base + M, base + E] = True
            # Word boundaries may switch groups freely.
            for h in range(n_groups):
                other = 4 * h
                self.mask[base + E, other + B] = True
                self.mask[base + E, other + S] = True
                self.mask[base + S, other + B] = True
                self.mask[base + S, other + S] = True

    @classmethod
    def bmes(cls) -> "TagScheme":
        return cls()

    @classmethod
    def joint_pos(cls, labels: Sequence[str]) -> "TagScheme":
        if not labels:
            raise ContractViolation("joint scheme needs at least one POS label")
        return cls(pos_labels=labels)

    def tag_id(self, position: int, label: Optional[str] = None) -> int:
        if not self.joint:
            return position
        return 4 * self.pos_labels.index(label) + position

    def position_of(self, tag: int) -> int:
        return tag % 4

    def label_of(self, tag: int) -> Optional[str]:
        return self.pos_labels[tag // 4] if self.joint else None

    def tag_name(self, tag: int) -> str:
        name = POSITION_NAMES[tag % 4]
        return f"{name}-{self.pos_labels[tag // 4]}" if self.joint else name

    def is_valid_sequence(self, tags: Sequence[int]) -> bool:
        if len(tags) == 0:
            return False
        if not (self.start_mask[tags[0]] and self.end_mask[tags[-1]]):
            return False
        return all(self.mask[a, b] for a, b in zip(tags, tags[1:]))

    def __eq__(self, other):
        return (
            isinstance(other, TagScheme)
            and self.joint == other.joint
            and self.pos_labels == other.pos_labels
        )

    def __hash__(self):
        return hash((self.joint, self.pos_labels))


@dataclass(frozen=True)
class NormalizationConfig:
    """Feature-view rewriting rules; each switchable on its own.

    The rules never touch the original text, only the character sequence fed
    to feature extraction.
    """

    fold_fullwidth: bool = False
    digit_class: bool = False
    latin_class: bool = False

    @classmethod
    def all_on(cls) -> "NormalizationConfig":
        return cls(fold_fullwidth=True, digit_class=True, latin_class=True)

    @property
    def any(self) -> bool:
        return self.fold_fullwidth or self.digit_class or self.latin_class


def _fold_char(ch: str) -> str:
    code = ord(ch)
    if 0xFF01 <= code <= 0xFF5E:
        return chr(code - 0xFEE0)
    if code == 0x3000:
        return " "
    return ch


def normalize(sentence: Sentence, rules: NormalizationConfig) -> tuple:
    """Return the feature view of *sentence* as a character tuple.

    Classification (digit/latin) always looks at the width-folded character,
    so fullwidth digits and letters are classed even when folding itself is
    off; the emitted character is only folded when fold_fullwidth is on.
    """
    if not rules.any:
        return sentence.chars
    out = []
    for ch in sentence.chars:
        folded = _fold_char(ch)
        if rules.digit_class and unicodedata.category(folded) == "Nd":
            out.append(DIGIT_CLASS_CHAR)
        elif rules.latin_class and ("a" <= folded <= "z" or "A" <= folded <= "Z"):
            out.append(LATIN_CLASS_CHAR)
        else:
            out.append(folded if rules.fold_fullwidth else ch)
    return tuple(out)


def parse_segmented_line(line: str):
    """Parse a whitespace-segmented corpus line.

    Returns ``(Sentence, Segmentation)`` or ``None`` for blank lines (the
    skip signal: the caller drops the line and counts it).
    """
    tokens = line.split()
    if not tokens:
        return None
    sentence = Sentence.from_text("".join(tokens))
    seg = Segmentation.from_lengths(len(t) for t in tokens)
    return sentence, seg


def parse_pos_line(line: str, lineno: Optional[int] = None):
    """Parse a ``word/POS`` corpus line; the label follows the last slash.

    Returns ``(Sentence, Segmentation, labels)`` or ``None`` for blank lines.
    """
    tokens = line.split()
    if not tokens:
        return None
    words, labels = [], []
    for tok in tokens:
        sep = tok.rfind("/")
        if sep < 0:
            raise CorpusFormatError(
                f"token {tok!r} has no word/POS separator", lineno=lineno
            )
        if sep == 0 or sep == len(tok) - 1:
            raise CorpusFormatError(
                f"token {tok!r} has an empty word or POS label", lineno=lineno
            )
        words.append(tok[:sep])
        labels.append(tok[sep + 1 :])
    sentence = Sentence.from_text("".join(words))
    seg = Segmentation.from_lengths(len(w) for w in words)
    return sentence, seg, tuple(labels)


def seg_to_tags(
    seg: Segmentation,
    scheme: TagScheme,
    labels: Optional[Sequence[str]] = None,
) -> list:
    """Encode a segmentation as per-character tag IDs (B/M/E/S per word)."""
    if scheme.joint and (labels is None or len(labels) != len(seg)):
        raise ContractViolation("joint scheme requires one label per word")
    tags = []
    for w, (start, end) in enumerate(seg.spans):
        label = labels[w] if scheme.joint else None
        n = end - start
        if n == 1:
            tags.append(scheme.tag_id(S, label))
        else:
            tags.append(scheme.tag_id(B, label))
            tags.extend(scheme.tag_id(M, label) for _ in range(n - 2))
            tags.append(scheme.tag_id(E, label))
    return tags


def tags_to_seg(sentence: Sentence, tags: Sequence[int], scheme: TagScheme):
    """Decode tags back to a segmentation (plus labels in joint mode).

    Exact inverse of :func:`seg_to_tags` on mask-valid sequences.  Invalid
    sequences are repaired deterministically: a word closes at every E or S,
    a new B or S closes whatever is pending, and a dangling B/M run at the
    end closes as a word.  No character is ever dropped.
    """
    if len(tags) != len(sentence):
        raise ContractViolation(
            f"{len(tags)} tags for {len(sentence)} characters"
        )
    lengths, labels = [], []
    pending = 0
    pending_label = None
    for tag in tags:
        pos = scheme.position_of(tag)
        if pos in (B, S) and pending:
            lengths.append(pending)
            labels.append(pending_label)
            pending = 0
        if pending == 0:
            pending_label = scheme.label_of(tag)
        pending += 1
        if pos in (E, S):
            lengths.append(pending)
            labels.append(pending_label)
            pending = 0
    if pending:
        lengths.append(pending)
        labels.append(pending_label)
    seg = Segmentation.from_lengths(lengths)
    return (seg, tuple(labels)) if scheme.joint else (seg, None)


@dataclass(frozen=True)
class ParsedSentence:
    """One training example: sentence, gold segmentation, optional labels."""

    sentence: Sentence
    seg: Segmentation
    labels: Optional[tuple] = None


def read_segmented_file(path, pos: bool = False):
    """Load a segmented corpus file.

    Returns ``(examples, skipped)`` where *skipped* counts blank lines.
    Lines may end in LF or CRLF; the file must be valid UTF-8.
    """
    examples = []
    skipped = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if pos:
                parsed = parse_pos_line(line, lineno=lineno)
                if parsed is None:
                    skipped += 1
                    continue
                sentence, seg, labels = parsed
                examples.append(ParsedSentence(sentence, seg, labels))
            else:
                parsed = parse_segmented_line(line)
                if parsed is None:
                    skipped += 1
                    continue
                sentence, seg = parsed
                examples.append(ParsedSentence(sentence, seg))
    return examples, skipped


def render_words(words: Sequence[str], labels: Optional[Sequence[str]] = None) -> str:
    """Render one output line: space-joined words, ``word/label`` in POS mode."""
    if labels is None:
        return " ".join(words)
    return " ".join(f"{w}/{t}" for w, t in zip(words, labels))
