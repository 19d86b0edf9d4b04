import json

import numpy as np
import pytest

from conftest import parse_lines
from oracles import EagerReference
from segkit import crf
from segkit.corpus import TagScheme
from segkit.errors import ConfigError, CorpusFormatError, TrainingDivergenceError
from segkit.features import TemplateConfig
from segkit.lexicon import Lexicon
from segkit.trainer import TrainConfig, TrainReport, _ParamBlock, train

TOY = parse_lines(["AB C ABD", "C AB", "ABD AB C", "AB ABD", "C C AB"] * 3)


def test_config_validation():
    TrainConfig()  # defaults are valid
    for bad in (
        dict(epochs=0),
        dict(batch_size=0),
        dict(eta0=0.0),
        dict(eta0=-1.0),
        dict(rho=-0.1),
        dict(l2=-1e-9),
        dict(optimizer="momentum"),
        dict(min_support=0),
    ):
        with pytest.raises(ConfigError):
            TrainConfig(**bad)


def test_config_defaults():
    cfg = TrainConfig()
    assert (cfg.epochs, cfg.batch_size) == (20, 32)
    assert (cfg.eta0, cfg.rho, cfg.l2) == (0.05, 0.02, 1e-6)
    assert cfg.optimizer == "adf"


def _run_block_vs_eager(optimizer, l2, seed, shape=(6, 4), steps=40, n_train=17):
    """Feed identical sparse gradient streams to the lazy block and the
    literal eager reference."""
    rng = np.random.default_rng(seed)
    cfg = TrainConfig(eta0=0.1, rho=0.05, l2=l2, optimizer=optimizer)
    values = np.zeros(shape)
    block = _ParamBlock(values, cfg, n_train)
    eager = EagerReference(
        shape, eta0=0.1, rho=0.05, l2=l2, n_train=n_train, adaptive=optimizer == "adf"
    )
    counters = {}
    for _ in range(steps):
        size = int(rng.choice([3, 5, 17]))
        dense = np.zeros(shape)
        rows = rng.choice(shape[0], size=rng.integers(1, shape[0] + 1), replace=False)
        rows = np.sort(rows)
        grad_rows = rng.normal(size=(len(rows), shape[1]))
        # sparsify within rows too: some cells stay exactly zero
        grad_rows[rng.random(grad_rows.shape) < 0.4] = 0.0
        dense[rows] = grad_rows
        block.apply_batch(rows, grad_rows, size, counters)
        counters[size] = counters.get(size, 0) + 1
        eager.apply(dense, size)
    block.finalize(counters)
    return values, block.u, eager.w, eager.u


@pytest.mark.parametrize("optimizer", ["adf", "sgd"])
@pytest.mark.parametrize("l2", [0.0, 1e-6, 1e-2])
def test_lazy_decay_equals_eager_reference(optimizer, l2):
    for seed in (0, 1, 2):
        w, u, ew, eu = _run_block_vs_eager(optimizer, l2, seed)
        np.testing.assert_array_equal(u, eu)
        np.testing.assert_allclose(w, ew, rtol=1e-10, atol=1e-14)


def test_finalize_is_idempotent():
    rng = np.random.default_rng(3)
    cfg = TrainConfig(eta0=0.1, l2=1e-3)
    values = np.zeros((4, 4))
    block = _ParamBlock(values, cfg, 10)
    counters = {}
    for step in range(5):
        rows = np.array([step % 4])
        block.apply_batch(rows, rng.normal(size=(1, 4)), 2, counters)
        counters[2] = counters.get(2, 0) + 1
    block.finalize(counters)
    snapshot = values.copy()
    block.finalize(counters)
    np.testing.assert_array_equal(values, snapshot)


def test_rate_anneals_with_touches():
    cfg = TrainConfig(eta0=0.05, rho=0.02)
    block = _ParamBlock(np.zeros((1, 1)), cfg, 10)
    counters = {}
    for k in range(5):
        assert block._rate(block.u)[0, 0] == pytest.approx(0.05 / (1 + 0.02 * k))
        block.apply_batch(np.array([0]), np.ones((1, 1)), 1, counters)
        counters[1] = counters.get(1, 0) + 1
    # sgd never anneals
    sgd = _ParamBlock(np.zeros((1, 1)), TrainConfig(optimizer="sgd"), 10)
    sgd.u[:] = 100
    assert sgd._rate(sgd.u)[0, 0] == 0.05


def test_training_improves_loglik_and_learns_toy_corpus():
    cfg = TrainConfig(epochs=8, batch_size=4, seed=5)
    model, report = train(TOY, cfg)
    lls = [r["mean_log_likelihood"] for r in report.epochs]
    assert len(lls) == 8
    assert lls[-1] > lls[0]
    assert lls[-1] > -0.5
    words, _ = crf.segment_words(model, None, "ABCABD")
    assert words == ("AB", "C", "ABD")


def test_training_is_deterministic():
    cfg = TrainConfig(epochs=3, batch_size=4, seed=9)
    m1, r1 = train(TOY, cfg)
    m2, r2 = train(TOY, cfg)
    np.testing.assert_array_equal(m1.weights, m2.weights)
    np.testing.assert_array_equal(m1.transitions, m2.transitions)
    assert m1.index.strings() == m2.index.strings()
    assert [r["mean_log_likelihood"] for r in r1.epochs] == [
        r["mean_log_likelihood"] for r in r2.epochs
    ]
    # a different seed shuffles differently and lands elsewhere
    m3, _ = train(TOY, TrainConfig(epochs=3, batch_size=4, seed=10))
    assert not np.array_equal(m1.weights, m3.weights)


def test_dev_f1_reported_each_epoch():
    cfg = TrainConfig(epochs=3, batch_size=4, seed=1)
    dev = parse_lines(["AB C", "ABD C"])
    _, report = train(TOY, cfg, dev_data=dev)
    assert all(r["dev_f1"] is not None for r in report.epochs)
    assert report.final_dev_f1 == report.epochs[-1]["dev_f1"]
    assert 0.0 <= report.final_dev_f1 <= 1.0


def test_report_files(tmp_path):
    cfg = TrainConfig(epochs=2, batch_size=4, seed=1)
    _, report = train(TOY, cfg)
    jpath = tmp_path / "rep.jsonl"
    tpath = tmp_path / "rep.txt"
    report.write_jsonl(jpath)
    report.write_text(tpath)
    records = [json.loads(line) for line in jpath.read_text().splitlines()]
    assert [r["epoch"] for r in records] == [1, 2]
    assert all("mean_log_likelihood" in r and "seconds" in r for r in records)
    text = tpath.read_text()
    assert "# epochs = 2" in text
    assert text.count("epoch ") == 2


def test_empty_corpus_rejected():
    with pytest.raises(CorpusFormatError):
        train([], TrainConfig(epochs=1))


def test_joint_training_needs_labels():
    with pytest.raises(CorpusFormatError):
        train(TOY, TrainConfig(epochs=1), joint=True)


def test_joint_training_end_to_end():
    lines = ["AB/n C/v", "C/v AB/n", "AB/n AB/n C/v"] * 4
    from segkit.corpus import parse_pos_line, ParsedSentence

    data = [ParsedSentence(*parse_pos_line(l)) for l in lines]
    model, _ = train(data, TrainConfig(epochs=6, batch_size=4, seed=2), joint=True)
    assert model.scheme.joint
    assert model.scheme.pos_labels == ("n", "v")
    words, labels = crf.segment_words(model, None, "ABC")
    assert words == ("AB", "C")
    assert labels == ("n", "v")


def test_warm_start_grows_index_and_keeps_prefix():
    cfg = TrainConfig(epochs=2, batch_size=4, seed=3)
    base, _ = train(TOY, cfg)
    base_strings = base.index.strings()
    base_weights = base.weights.copy()

    new_data = parse_lines(["XY Z", "Z XY", "XY XY Z"])
    tuned, _ = train(new_data, cfg, init_model=base)
    tuned_strings = tuned.index.strings()
    # old feature IDs are a stable prefix; new strings appended after
    assert tuned_strings[: len(base_strings)] == base_strings
    assert len(tuned_strings) > len(base_strings)
    # the original model object is untouched
    np.testing.assert_array_equal(base.weights, base_weights)
    assert base.index.frozen


def test_warm_start_first_epoch_beats_cold_on_same_domain():
    cfg_long = TrainConfig(epochs=6, batch_size=4, seed=4)
    base, _ = train(TOY, cfg_long)
    cfg_short = TrainConfig(epochs=1, batch_size=4, seed=5)
    dev = parse_lines(["AB C ABD", "ABD C"])
    _, cold = train(TOY, cfg_short, dev_data=dev)
    _, warm = train(TOY, cfg_short, dev_data=dev, init_model=base)
    assert warm.epochs[0]["dev_f1"] >= cold.epochs[0]["dev_f1"]


def test_warm_start_joint_grows_tag_set():
    from segkit.corpus import parse_pos_line, ParsedSentence

    old = [ParsedSentence(*parse_pos_line(l)) for l in ["AB/n C/v", "C/v AB/n"] * 3]
    base, _ = train(old, TrainConfig(epochs=2, batch_size=2, seed=6), joint=True)
    assert base.scheme.pos_labels == ("n", "v")

    new = [ParsedSentence(*parse_pos_line(l)) for l in ["AB/n XY/adv", "XY/adv C/v"] * 3]
    tuned, _ = train(new, TrainConfig(epochs=2, batch_size=2, seed=6), init_model=base)
    # old labels keep their positions; the new one is appended
    assert tuned.scheme.pos_labels == ("n", "v", "adv")
    assert tuned.scheme.size == 12
    # old tag columns carried over into the top-left block
    old_feats = len(base.index.strings())
    np.testing.assert_array_equal(
        tuned.transitions[: base.scheme.size, : base.scheme.size] * 0,
        np.zeros((8, 8)),
    )


def test_min_support_pruning_in_train():
    cfg = TrainConfig(epochs=2, batch_size=4, seed=7, min_support=2)
    model, _ = train(TOY, cfg)
    assert model.index.count > 0
    assert all(model.index.support(f) >= 2 for f in range(model.index.count))
    # pruned model still decodes
    words, _ = crf.segment_words(model, None, "ABC")
    assert "".join(words) == "ABC"


def test_divergence_raises_with_sentence_context():
    cfg = TrainConfig(epochs=40, batch_size=2, seed=8, eta0=1e150, l2=1.0)
    with pytest.raises(TrainingDivergenceError, match="sentence"):
        with np.errstate(over="ignore", invalid="ignore"):
            train(TOY, cfg)


def test_lexicon_features_flow_through_training():
    lex = Lexicon(["AB", "ABD"])
    cfg = TrainConfig(epochs=3, batch_size=4, seed=11)
    model, _ = train(TOY, cfg, lexicon=lex)
    assert model.index.get("Lb=2") is not None
    words, _ = crf.segment_words(model, lex, "ABCABD")
    assert words == ("AB", "C", "ABD")
