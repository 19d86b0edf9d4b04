"""Linear-chain CRF core: lattice construction, inference, and gradients.

The model keeps one weight per (feature ID, tag) plus a square tag-to-tag
transition matrix.  Structural constraints (which tag may follow which, and
which tags may open or close a sequence) are applied as -inf entries at
lattice-build time, so every algorithm below works on an already-masked
trellis.  All computations run in log space with max-subtracted
log-sum-exp.
"""

from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

import numpy as np

from .corpus import (
    NormalizationConfig,
    Segmentation,
    Sentence,
    TagScheme,
    normalize,
    tags_to_seg,
)
from .errors import ContractViolation, DegenerateLatticeError
from .features import FeatureIndex, TemplateConfig, extract

NEG_INF = -np.inf


class CrfModel:
    """Trained parameters plus everything needed to reproduce features.

    Treated as immutable after training or loading; the trainer mutates the
    arrays in place while it owns them.
    """

    def __init__(
        self,
        weights: np.ndarray,
        transitions: np.ndarray,
        scheme: TagScheme,
        index: FeatureIndex,
        template_cfg: TemplateConfig,
    ):
        self.weights = weights
        self.transitions = transitions
        self.scheme = scheme
        self.index = index
        self.template_cfg = template_cfg
        self.validate()

    def validate(self):
        t = self.scheme.size
        if self.weights.shape != (self.index.count, t):
            raise ContractViolation(
                f"weight matrix {self.weights.shape} does not match "
                f"{self.index.count} features x {t} tags"
            )
        if self.transitions.shape != (t, t):
            raise ContractViolation("transition matrix shape mismatch")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.transitions))):
            raise ContractViolation("model parameters must be finite")

    @property
    def n_features(self) -> int:
        return self.index.count

    def masked_transitions(self) -> np.ndarray:
        return np.where(self.scheme.mask, self.transitions, NEG_INF)

    def emissions(self, features: Sequence[np.ndarray]) -> np.ndarray:
        """Sum active feature weights into an (n, tags) score matrix."""
        n = len(features)
        scores = np.zeros((n, self.scheme.size), dtype=np.float64)
        w = self.weights
        for i, ids in enumerate(features):
            if len(ids):
                scores[i] = w[ids].sum(axis=0)
        return scores

    def lattice(self, features: Sequence[np.ndarray]) -> "Lattice":
        return Lattice(self.emissions(features), self.masked_transitions(), self.scheme)


class Lattice:
    """A masked trellis: per-position tag scores plus pairwise scores.

    *trans* already carries -inf at structurally forbidden transitions; the
    scheme supplies the start/end constraints and validity checks.
    """

    def __init__(self, scores: np.ndarray, trans: np.ndarray, scheme):
        scores = np.asarray(scores, dtype=np.float64)
        trans = np.asarray(trans, dtype=np.float64)
        if scores.ndim != 2 or scores.shape[0] == 0:
            raise ContractViolation("lattice needs at least one position")
        if trans.shape != (scores.shape[1], scores.shape[1]):
            raise ContractViolation("transition matrix does not match tag count")
        self.scores = scores
        self.trans = trans
        self.scheme = scheme
        self.n = scores.shape[0]
        self.n_tags = scores.shape[1]

    def start_add(self) -> np.ndarray:
        return np.where(self.scheme.start_mask, 0.0, NEG_INF)

    def end_add(self) -> np.ndarray:
        return np.where(self.scheme.end_mask, 0.0, NEG_INF)


def _lse(a: np.ndarray, axis: int) -> np.ndarray:
    """log-sum-exp with max subtraction; all -inf rows stay -inf."""
    m = np.max(a, axis=axis, keepdims=True)
    safe = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.exp(a - safe).sum(axis=axis, keepdims=True)) + safe
    return np.squeeze(out, axis=axis)


def forward_scores(lattice: Lattice) -> np.ndarray:
    """alpha[i][t]: log-sum over paths ending at position i in tag t."""
    alpha = np.empty_like(lattice.scores)
    alpha[0] = lattice.scores[0] + lattice.start_add()
    for i in range(1, lattice.n):
        alpha[i] = _lse(alpha[i - 1][:, None] + lattice.trans, axis=0) + lattice.scores[i]
    return alpha


def backward_scores(lattice: Lattice) -> np.ndarray:
    """beta[i][t]: log-sum over path suffixes leaving position i in tag t."""
    beta = np.empty_like(lattice.scores)
    beta[-1] = lattice.end_add()
    for i in range(lattice.n - 2, -1, -1):
        beta[i] = _lse(lattice.trans + (lattice.scores[i + 1] + beta[i + 1])[None, :], axis=1)
    return beta


def log_partition(lattice: Lattice) -> float:
    z = float(_lse(forward_scores(lattice)[-1] + lattice.end_add(), axis=0))
    if not np.isfinite(z):
        raise DegenerateLatticeError("no legal tag path through the lattice")
    return z


def marginals(lattice: Lattice) -> np.ndarray:
    """Per-position tag posteriors; each row sums to one."""
    alpha = forward_scores(lattice)
    beta = backward_scores(lattice)
    z = float(_lse(alpha[-1] + lattice.end_add(), axis=0))
    if not np.isfinite(z):
        raise DegenerateLatticeError("no legal tag path through the lattice")
    return np.exp(alpha + beta - z)


def score_path(lattice: Lattice, tags: Sequence[int]) -> float:
    """Unnormalized log score of one path, accumulated left to right.

    The accumulation order (transition added before the arriving emission)
    mirrors the Viterbi recursion exactly so scores compare bit for bit.
    """
    if len(tags) != lattice.n:
        raise ContractViolation("tag sequence length does not match lattice")
    start = lattice.start_add()
    end = lattice.end_add()
    acc = lattice.scores[0][tags[0]] + start[tags[0]]
    for i in range(1, lattice.n):
        acc = acc + lattice.trans[tags[i - 1], tags[i]]
        acc = acc + lattice.scores[i][tags[i]]
    return float(acc + end[tags[-1]])


def log_likelihood(lattice: Lattice, tags: Sequence[int]) -> float:
    if not lattice.scheme.is_valid_sequence(tags):
        raise ContractViolation("gold tags violate the tag scheme")
    return score_path(lattice, tags) - log_partition(lattice)


def viterbi(lattice: Lattice) -> List[int]:
    """Highest-scoring legal path; ties resolve to the lowest tag ID at the
    latest position where candidates differ (argmax keeps the first max)."""
    n, t = lattice.n, lattice.n_tags
    delta = lattice.scores[0] + lattice.start_add()
    back = np.empty((n, t), dtype=np.intp)
    for i in range(1, n):
        cand = delta[:, None] + lattice.trans
        back[i] = np.argmax(cand, axis=0)
        delta = cand[back[i], np.arange(t)] + lattice.scores[i]
    final = delta + lattice.end_add()
    if not np.isfinite(final.max()):
        raise DegenerateLatticeError("no legal tag path through the lattice")
    tag = int(np.argmax(final))
    path = [0] * n
    path[-1] = tag
    for i in range(n - 1, 0, -1):
        tag = int(back[i][tag])
        path[i - 1] = tag
    return path


def gradient(
    lattice: Lattice,
    features: Sequence[np.ndarray],
    tags: Sequence[int],
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Log-likelihood gradient for one sentence.

    Returns (active feature IDs, per-ID emission gradient rows, transition
    gradient, log-likelihood).  Emission gradients are aggregated over
    duplicate IDs so callers can scatter-add them directly.
    """
    if not lattice.scheme.is_valid_sequence(tags):
        raise ContractViolation("gold tags violate the tag scheme")
    n, t = lattice.n, lattice.n_tags
    alpha = forward_scores(lattice)
    beta = backward_scores(lattice)
    z = float(_lse(alpha[-1] + lattice.end_add(), axis=0))
    if not np.isfinite(z):
        raise DegenerateLatticeError("no legal tag path through the lattice")

    delta = -np.exp(alpha + beta - z)
    for i, g in enumerate(tags):
        delta[i, g] += 1.0

    trans_grad = np.zeros((t, t), dtype=np.float64)
    for i in range(n - 1):
        edge = alpha[i][:, None] + lattice.trans + (lattice.scores[i + 1] + beta[i + 1])[None, :]
        trans_grad -= np.exp(edge - z)
        trans_grad[tags[i], tags[i + 1]] += 1.0

    nonempty = [np.asarray(ids, dtype=np.intp) for ids in features if len(ids)]
    all_ids = np.concatenate(nonempty) if nonempty else np.empty(0, dtype=np.intp)
    if all_ids.size == 0:
        ll = score_path(lattice, tags) - z
        return all_ids, np.zeros((0, t)), trans_grad, ll
    uniq = np.unique(all_ids)
    emis = np.zeros((len(uniq), t), dtype=np.float64)
    for i, ids in enumerate(features):
        if len(ids):
            np.add.at(emis, np.searchsorted(uniq, ids), delta[i])
    ll = score_path(lattice, tags) - z
    return uniq, emis, trans_grad, ll


def segment(
    model: CrfModel,
    lexicon,
    text: str,
) -> Tuple[Segmentation, Optional[Tuple[str, ...]]]:
    """Segment one piece of text with a trained model.

    Returns the span segmentation plus per-word POS labels when the model
    is a joint one (None otherwise).  Empty input yields an empty
    segmentation.
    """
    if text == "":
        return Segmentation(()), (() if model.scheme.joint else None)
    sentence = Sentence.from_text(text)
    view = normalize(sentence, model.template_cfg.normalization)
    feats = extract(view, lexicon, model.template_cfg, model.index)
    tags = viterbi(model.lattice(feats))
    return tags_to_seg(sentence, tags, model.scheme)


def segment_words(model: CrfModel, lexicon, text: str):
    """Convenience wrapper returning surface words instead of spans."""
    seg, labels = segment(model, lexicon, text)
    words = tuple(text[a:b] for a, b in seg.spans)
    return words, labels
