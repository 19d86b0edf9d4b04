"""Minibatch training with a frequency-adaptive per-parameter learning rate.

Each parameter p keeps a counter u[p] of minibatches where its gradient was
nonzero; its rate is eta0 / (1 + rho * u[p]).  Rarely-firing features keep
a high rate while frequent ones anneal.  Setting the optimizer to "sgd"
pins every rate at eta0 instead.

L2 is handled lazily but exactly: conceptually every parameter decays by
its own factor (1 - rate * l2 * batch_size / n_train) on every minibatch,
and we apply the accumulated product only when a parameter is next touched
(or at the end).  The rate is constant between touches because u[p] only
moves on a touch, so the deferred product is a closed-form power per batch
size seen.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import crf, metrics
from .corpus import ParsedSentence, TagScheme, normalize, seg_to_tags
from .crf import CrfModel
from .errors import (
    ConfigError,
    CorpusFormatError,
    TrainingDivergenceError,
)
from .features import FeatureIndex, TemplateConfig, extract, prune


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    batch_size: int = 32
    eta0: float = 0.05
    rho: float = 0.02
    l2: float = 1e-6
    seed: int = 1
    optimizer: str = "adf"
    min_support: Optional[int] = None

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if not self.eta0 > 0:
            raise ConfigError("eta0 must be positive")
        if self.rho < 0:
            raise ConfigError("rho must be >= 0")
        if self.l2 < 0:
            raise ConfigError("l2 must be >= 0")
        if self.optimizer not in ("adf", "sgd"):
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")
        if self.min_support is not None and self.min_support < 1:
            raise ConfigError("min_support must be >= 1")

    def as_dict(self) -> dict:
        return {
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "eta0": self.eta0,
            "rho": self.rho,
            "l2": self.l2,
            "seed": self.seed,
            "optimizer": self.optimizer,
            "min_support": self.min_support,
        }


@dataclass
class TrainReport:
    """Per-epoch progress plus the config that produced it."""

    config: dict
    epochs: List[dict] = field(default_factory=list)

    @property
    def final_dev_f1(self) -> Optional[float]:
        for rec in reversed(self.epochs):
            if rec.get("dev_f1") is not None:
                return rec["dev_f1"]
        return None

    def write_jsonl(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self.epochs:
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")

    def write_text(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("# training report\n")
            for key, value in self.config.items():
                fh.write(f"# {key} = {value}\n")
            for rec in self.epochs:
                dev = "-" if rec.get("dev_f1") is None else f"{rec['dev_f1']:.4f}"
                fh.write(
                    f"epoch {rec['epoch']:3d}  mean_ll {rec['mean_log_likelihood']:+.6f}"
                    f"  dev_f1 {dev}  seconds {rec['seconds']:.2f}\n"
                )


class _ParamBlock:
    """One parameter matrix with per-cell rate counters and lazy decay.

    Snapshots record, per batch size, how many batches of that size had
    been completed when each cell last settled its decay.
    """

    def __init__(self, values: np.ndarray, cfg: TrainConfig, n_train: int):
        self.v = values
        self.u = np.zeros(values.shape, dtype=np.int64)
        self.snaps: Dict[int, np.ndarray] = {}
        self.adf = cfg.optimizer == "adf"
        self.eta0 = cfg.eta0
        self.rho = cfg.rho
        self.lam = cfg.l2
        self.n_train = n_train

    def _rate(self, u):
        if self.adf:
            return self.eta0 / (1.0 + self.rho * u)
        return np.full(u.shape, self.eta0)

    def _snap(self, size: int) -> np.ndarray:
        arr = self.snaps.get(size)
        if arr is None:
            arr = np.zeros(self.v.shape, dtype=np.int64)
            self.snaps[size] = arr
        return arr

    def _catch_up(self, ids, counters: Dict[int, int]):
        """Apply deferred decay through all already-completed batches."""
        rows = self.v[ids]
        eta = self._rate(self.u[ids])
        for size, total in counters.items():
            snap = self._snap(size)
            owed = total - snap[ids]
            if np.any(owed):
                base = 1.0 - eta * (self.lam * size / self.n_train)
                rows = rows * np.power(base, owed)
            snap[ids] = total
        self.v[ids] = rows

    def apply_batch(self, ids, grad: np.ndarray, size: int, counters: Dict[int, int]):
        """Settle decay, then update every cell whose batch gradient is nonzero.

        *counters* must not yet include the current batch; the caller bumps
        it afterwards.
        """
        if self.lam:
            self._catch_up(ids, counters)
        rows = self.v[ids]
        rows_u = self.u[ids]
        touched = grad != 0.0
        eta = self._rate(rows_u)
        step = eta * (grad - self.lam * rows * (size / self.n_train))
        self.v[ids] = np.where(touched, rows + step, rows)
        self.u[ids] = np.where(touched, rows_u + 1, rows_u)
        if self.lam:
            # Touched cells have now absorbed the current batch's decay.
            snap = self._snap(size)
            marked = snap[ids]
            marked[touched] = counters.get(size, 0) + 1
            snap[ids] = marked

    def finalize(self, counters: Dict[int, int]):
        if self.lam:
            self._catch_up(slice(None), counters)


def _chunks(order: Sequence[int], size: int):
    for i in range(0, len(order), size):
        yield order[i : i + size]


def _combine_sentence_grads(parts: List[Tuple[np.ndarray, np.ndarray]], n_tags: int):
    """Merge per-sentence sparse emission gradients into one sorted block."""
    nonempty = [p for p in parts if p[0].size]
    if not nonempty:
        return np.empty(0, dtype=np.intp), np.zeros((0, n_tags))
    ids = np.unique(np.concatenate([p[0] for p in nonempty]))
    grad = np.zeros((ids.size, n_tags), dtype=np.float64)
    for part_ids, part_grad in nonempty:
        np.add.at(grad, np.searchsorted(ids, part_ids), part_grad)
    return ids, grad


def train(
    data: Sequence[ParsedSentence],
    cfg: TrainConfig,
    template_cfg: Optional[TemplateConfig] = None,
    lexicon=None,
    dev_data: Optional[Sequence[ParsedSentence]] = None,
    init_model: Optional[CrfModel] = None,
    joint: bool = False,
) -> Tuple[CrfModel, TrainReport]:
    """Train a model from scratch or fine-tune an existing one.

    Warm starts reuse the given model's feature table and templates; new
    feature strings from this corpus get fresh zero-weight rows, and in
    joint mode unseen POS labels extend the tag set with zero columns.
    Feature observation counts always reflect this corpus only.
    """
    data = list(data)
    if not data:
        raise CorpusFormatError("training corpus is empty")

    if init_model is not None:
        tcfg = init_model.template_cfg
        scheme = init_model.scheme
        joint = scheme.joint
        index = init_model.index.copy(reset_counts=True).thaw()
    else:
        tcfg = template_cfg if template_cfg is not None else TemplateConfig()
        scheme = None
        index = FeatureIndex()

    if joint:
        labels = set()
        for ex in data:
            if ex.labels is None:
                raise CorpusFormatError("joint training needs word/POS annotations")
            labels.update(ex.labels)
        if scheme is not None:
            new = sorted(labels.difference(scheme.pos_labels))
            if new:
                scheme = TagScheme.joint_pos(list(scheme.pos_labels) + new)
        else:
            scheme = TagScheme.joint_pos(sorted(labels))
    elif scheme is None:
        scheme = TagScheme.bmes()

    # Growth pass: build the feature table and cache per-sentence inputs.
    feats = []
    gold = []
    for ex in data:
        view = normalize(ex.sentence, tcfg.normalization)
        feats.append(extract(view, lexicon, tcfg, index))
        gold.append(seg_to_tags(ex.seg, scheme, ex.labels))
    index.freeze()

    n_tags = scheme.size
    weights = np.zeros((index.count, n_tags), dtype=np.float64)
    trans = np.zeros((n_tags, n_tags), dtype=np.float64)
    if init_model is not None:
        old_w = init_model.weights
        old_t = init_model.scheme.size
        # Old feature IDs and old tag IDs are stable prefixes of the new ones.
        weights[: old_w.shape[0], :old_t] = old_w
        trans[:old_t, :old_t] = init_model.transitions

    n_train = len(data)
    emission = _ParamBlock(weights, cfg, n_train)
    transition = _ParamBlock(trans, cfg, n_train)
    counters: Dict[int, int] = {}

    report = TrainReport(config=cfg.as_dict())
    model = CrfModel(weights, trans, scheme, index, tcfg)

    for epoch in range(cfg.epochs):
        started = time.perf_counter()
        order = list(range(n_train))
        random.Random(cfg.seed + epoch).shuffle(order)
        total_ll = 0.0
        for batch in _chunks(order, cfg.batch_size):
            parts = []
            trans_grad = np.zeros((n_tags, n_tags), dtype=np.float64)
            for si in batch:
                lattice = model.lattice(feats[si])
                ids, emis, tg, ll = crf.gradient(lattice, feats[si], gold[si])
                if not np.isfinite(ll):
                    raise TrainingDivergenceError(
                        f"log-likelihood became non-finite at epoch {epoch + 1} "
                        f"on sentence {si}: {data[si].sentence.raw[:60]!r}"
                    )
                total_ll += ll
                parts.append((ids, emis))
                trans_grad += tg
            ids, emis_grad = _combine_sentence_grads(parts, n_tags)
            size = len(batch)
            if ids.size:
                emission.apply_batch(ids, emis_grad, size, counters)
            transition.apply_batch(slice(None), trans_grad, size, counters)
            counters[size] = counters.get(size, 0) + 1

        record = {
            "epoch": epoch + 1,
            "mean_log_likelihood": total_ll / n_train,
            "dev_f1": None,
            "seconds": 0.0,
        }
        if dev_data:
            emission.finalize(counters)
            transition.finalize(counters)
            record["dev_f1"] = _dev_f1(model, lexicon, dev_data)
        record["seconds"] = time.perf_counter() - started
        report.epochs.append(record)

    emission.finalize(counters)
    transition.finalize(counters)

    if cfg.min_support is not None:
        new_index, new_weights = prune(index, weights, cfg.min_support)
        model = CrfModel(np.ascontiguousarray(new_weights), trans, scheme, new_index, tcfg)
    model.validate()
    return model, report


def _dev_f1(model: CrfModel, lexicon, dev_data: Sequence[ParsedSentence]) -> float:
    gold_segs = []
    pred_segs = []
    for ex in dev_data:
        seg, _labels = crf.segment(model, lexicon, ex.sentence.raw)
        gold_segs.append(ex.seg)
        pred_segs.append(seg)
    return metrics.score_segmentations(gold_segs, pred_segs).f1
