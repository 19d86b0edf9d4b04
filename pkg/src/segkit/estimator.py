"""Scikit-learn style wrapper around the segmentation pipeline.

CrfSegmenter follows the estimator contract: constructor arguments are
stored verbatim as hyperparameters (so get_params/set_params and cloning
work), fit() learns state into trailing-underscore attributes, and
predict/transform/score operate on lists of raw sentence strings.

Input conventions follow sklearn, so malformed X/y raise ValueError here
even though the underlying library uses its own error types.
"""

from __future__ import annotations

from typing import List, Optional, Sequence, Tuple, Union

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import crf, metrics
from .corpus import (
    NormalizationConfig,
    ParsedSentence,
    Segmentation,
    Sentence,
    parse_pos_line,
    parse_segmented_line,
    render_words,
)
from .errors import SegkitError
from .features import TemplateConfig
from .lexicon import Lexicon
from .trainer import TrainConfig, train


def _as_lexicon(dictionary) -> Optional[Lexicon]:
    if dictionary is None:
        return None
    if isinstance(dictionary, Lexicon):
        return dictionary
    lex = Lexicon()
    for word in dictionary:
        lex.add(word)
    return lex


def _texts(X) -> List[str]:
    if isinstance(X, str):
        raise ValueError("X must be a sequence of strings, not a single string")
    out = list(X)
    for i, item in enumerate(out):
        if not isinstance(item, str):
            raise ValueError(f"X[{i}] is {type(item).__name__}, expected str")
    return out


class CrfSegmenter(BaseEstimator):
    """Word segmenter (optionally with POS tags) as an sklearn estimator.

    fit accepts either pre-segmented lines as X with y=None ("word word"
    per line, or "word/pos" pairs in joint mode) or raw texts as X with
    per-sentence word lists in y (tuples of (word, label) in joint mode).
    """

    def __init__(
        self,
        epochs: int = 20,
        batch_size: int = 32,
        eta0: float = 0.05,
        rho: float = 0.02,
        l2: float = 1e-6,
        seed: int = 1,
        optimizer: str = "adf",
        min_support: Optional[int] = None,
        unigram_window: int = 2,
        bigrams: bool = True,
        lexicon_feats: bool = True,
        l_max: int = 6,
        fold_fullwidth: bool = False,
        digit_class: bool = False,
        latin_class: bool = False,
        joint: bool = False,
        dictionary=None,
    ):
        self.epochs = epochs
        self.batch_size = batch_size
        self.eta0 = eta0
        self.rho = rho
        self.l2 = l2
        self.seed = seed
        self.optimizer = optimizer
        self.min_support = min_support
        self.unigram_window = unigram_window
        self.bigrams = bigrams
        self.lexicon_feats = lexicon_feats
        self.l_max = l_max
        self.fold_fullwidth = fold_fullwidth
        self.digit_class = digit_class
        self.latin_class = latin_class
        self.joint = joint
        self.dictionary = dictionary

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_model(cls, model, dictionary=None) -> "CrfSegmenter":
        """Wrap an already-trained model in a fitted estimator."""
        est = cls(joint=model.scheme.joint, dictionary=dictionary)
        est.model_ = model
        est.lexicon_ = _as_lexicon(dictionary)
        est.report_ = None
        return est

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            eta0=self.eta0,
            rho=self.rho,
            l2=self.l2,
            seed=self.seed,
            optimizer=self.optimizer,
            min_support=self.min_support,
        )

    def _template_config(self) -> TemplateConfig:
        return TemplateConfig(
            unigram_window=self.unigram_window,
            bigrams=self.bigrams,
            lexicon_feats=self.lexicon_feats,
            l_max=self.l_max,
            normalization=NormalizationConfig(
                fold_fullwidth=self.fold_fullwidth,
                digit_class=self.digit_class,
                latin_class=self.latin_class,
            ),
        )

    def _parse_training_pairs(self, X, y) -> List[ParsedSentence]:
        examples: List[ParsedSentence] = []
        if y is None:
            for i, line in enumerate(_texts(X)):
                try:
                    parsed = (
                        parse_pos_line(line, lineno=i + 1)
                        if self.joint
                        else parse_segmented_line(line)
                    )
                except SegkitError as exc:
                    raise ValueError(str(exc)) from exc
                if parsed is None:
                    continue
                if self.joint:
                    sent, seg, labels = parsed
                else:
                    sent, seg = parsed
                    labels = None
                examples.append(ParsedSentence(sent, seg, labels))
            return examples

        texts = _texts(X)
        if len(texts) != len(y):
            raise ValueError(f"X has {len(texts)} sentences but y has {len(y)}")
        for i, (text, words) in enumerate(zip(texts, y)):
            if self.joint:
                try:
                    surface = [w for w, _ in words]
                    labels = tuple(str(p) for _, p in words)
                except (TypeError, ValueError) as exc:
                    raise ValueError(
                        f"y[{i}] must contain (word, label) pairs in joint mode"
                    ) from exc
            else:
                surface = list(words)
                labels = None
            if "".join(surface) != text:
                raise ValueError(f"y[{i}] does not concatenate to X[{i}]")
            if any(not w for w in surface):
                raise ValueError(f"y[{i}] contains an empty word")
            sent = Sentence.from_text(text)
            seg = Segmentation.from_lengths([len(w) for w in surface])
            examples.append(ParsedSentence(sent, seg, labels))
        return examples

    # -- estimator API --------------------------------------------------------

    def fit(self, X, y=None):
        examples = self._parse_training_pairs(X, y)
        if not examples:
            raise ValueError("no training sentences after parsing X")
        self.lexicon_ = _as_lexicon(self.dictionary)
        try:
            self.model_, self.report_ = train(
                examples,
                self._train_config(),
                template_cfg=self._template_config(),
                lexicon=self.lexicon_,
                joint=self.joint,
            )
        except SegkitError as exc:
            raise ValueError(str(exc)) from exc
        return self

    def predict(self, X) -> list:
        """Per-sentence word lists; (word, label) tuples in joint mode."""
        check_is_fitted(self, "model_")
        out = []
        for text in _texts(X):
            words, labels = crf.segment_words(self.model_, self.lexicon_, text)
            if self.model_.scheme.joint:
                out.append(list(zip(words, labels)))
            else:
                out.append(list(words))
        return out

    def transform(self, X) -> List[str]:
        """Segmented lines: words joined by spaces, word/label in joint mode."""
        check_is_fitted(self, "model_")
        lines = []
        for text in _texts(X):
            words, labels = crf.segment_words(self.model_, self.lexicon_, text)
            lines.append(render_words(words, labels))
        return lines

    def fit_transform(self, X, y=None) -> List[str]:
        return self.fit(X, y).transform(X)

    def score(self, X, y=None) -> float:
        """Word-level F1 against gold segmentations (span-exact)."""
        check_is_fitted(self, "model_")
        gold = self._parse_training_pairs(X, y)
        pred = []
        for ex in gold:
            seg, _ = crf.segment(self.model_, self.lexicon_, ex.sentence.raw)
            pred.append(seg)
        return metrics.score_segmentations([ex.seg for ex in gold], pred).f1
