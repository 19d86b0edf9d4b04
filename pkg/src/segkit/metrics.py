"""Word-level evaluation: span-exact precision, recall, and F1.

A predicted word counts as correct only when its exact character span
appears in the gold segmentation of the same sentence.  F1 is computed as
2*correct / (gold + pred), which equals the harmonic mean of precision and
recall without intermediate rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .corpus import Segmentation, parse_pos_line, parse_segmented_line
from .errors import AlignmentError, ContractViolation


@dataclass(frozen=True)
class EvalResult:
    n_gold: int
    n_pred: int
    n_correct: int

    @property
    def precision(self) -> float:
        return self.n_correct / self.n_pred if self.n_pred else 0.0

    @property
    def recall(self) -> float:
        return self.n_correct / self.n_gold if self.n_gold else 0.0

    @property
    def f1(self) -> float:
        total = self.n_gold + self.n_pred
        return 2.0 * self.n_correct / total if total else 0.0

    def format_line(self) -> str:
        return (
            f"P={self.precision:.4f} R={self.recall:.4f} F1={self.f1:.4f} "
            f"(gold={self.n_gold} pred={self.n_pred} correct={self.n_correct})"
        )


class _Accumulator:
    def __init__(self):
        self.n_gold = 0
        self.n_pred = 0
        self.n_correct = 0

    def update(self, gold: Iterable[tuple], pred: Iterable[tuple]):
        gold = set(gold)
        pred = set(pred)
        self.n_gold += len(gold)
        self.n_pred += len(pred)
        self.n_correct += len(gold & pred)

    def result(self) -> EvalResult:
        return EvalResult(self.n_gold, self.n_pred, self.n_correct)


def score_segmentations(
    gold: Sequence[Segmentation],
    pred: Sequence[Segmentation],
) -> EvalResult:
    """Score aligned segmentations of the same sentences."""
    if len(gold) != len(pred):
        raise AlignmentError(
            f"gold has {len(gold)} sentences but prediction has {len(pred)}"
        )
    acc = _Accumulator()
    for i, (g, p) in enumerate(zip(gold, pred)):
        if g.n_chars != p.n_chars:
            raise AlignmentError(
                f"sentence {i + 1}: gold covers {g.n_chars} characters "
                f"but prediction covers {p.n_chars}"
            )
        acc.update(g.spans, p.spans)
    return acc.result()


def _iter_aligned_lines(gold_path, pred_path):
    with open(gold_path, encoding="utf-8") as gf, open(pred_path, encoding="utf-8") as pf:
        gold_lines = gf.read().splitlines()
        pred_lines = pf.read().splitlines()
    if len(gold_lines) != len(pred_lines):
        raise AlignmentError(
            f"gold file has {len(gold_lines)} lines but prediction has {len(pred_lines)}"
        )
    return enumerate(zip(gold_lines, pred_lines), start=1)


def score_files(gold_path, pred_path) -> EvalResult:
    """Score two whitespace-segmented files line by line.

    Lines must pair up: same count, same underlying characters.  Blank
    lines are allowed only when blank on both sides.
    """
    acc = _Accumulator()
    for lineno, (gline, pline) in _iter_aligned_lines(gold_path, pred_path):
        g = parse_segmented_line(gline)
        p = parse_segmented_line(pline)
        if (g is None) != (p is None):
            raise AlignmentError(f"line {lineno}: blank on one side only")
        if g is None:
            continue
        if g[0].chars != p[0].chars:
            raise AlignmentError(
                f"line {lineno}: text differs between gold and prediction"
            )
        acc.update(g[1].spans, p[1].spans)
    return acc.result()


def score_pos_files(gold_path, pred_path) -> Tuple[EvalResult, EvalResult]:
    """Score word/POS files: returns (span-only result, joint result).

    The joint result counts a word as correct only when both its span and
    its POS label match the gold side.
    """
    span_acc = _Accumulator()
    joint_acc = _Accumulator()
    for lineno, (gline, pline) in _iter_aligned_lines(gold_path, pred_path):
        g = parse_pos_line(gline, lineno=lineno) if gline.strip() else None
        p = parse_pos_line(pline, lineno=lineno) if pline.strip() else None
        if (g is None) != (p is None):
            raise AlignmentError(f"line {lineno}: blank on one side only")
        if g is None:
            continue
        gsent, gseg, glabels = g
        psent, pseg, plabels = p
        if gsent.chars != psent.chars:
            raise AlignmentError(
                f"line {lineno}: text differs between gold and prediction"
            )
        span_acc.update(gseg.spans, pseg.spans)
        joint_acc.update(zip(gseg.spans, glabels), zip(pseg.spans, plabels))
    return span_acc.result(), joint_acc.result()


def aggregate_f1(
    named: Dict[str, float],
    exclude: Iterable[str] = (),
) -> float:
    """Unweighted mean F1 across named test sets, minus excluded names.

    Used to summarize multi-domain evaluations where some sets are held
    out of the average (for example the domains a model was tuned on).
    """
    skip = set(exclude)
    kept = [v for k, v in named.items() if k not in skip]
    if not kept:
        raise ContractViolation("no test sets left after exclusion")
    return sum(kept) / len(kept)
