import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from conftest import parse_lines
from segkit.estimator import CrfSegmenter
from segkit.trainer import TrainConfig, train

LINES = ["AB C ABD", "C AB", "ABD AB C", "AB ABD", "C C AB"] * 3


def test_params_roundtrip_and_clone():
    est = CrfSegmenter(epochs=3, eta0=0.1, joint=True, dictionary=["AB"])
    params = est.get_params()
    assert params["epochs"] == 3
    assert params["eta0"] == 0.1
    assert params["joint"] is True
    dup = clone(est)
    assert dup.get_params() == params
    est.set_params(epochs=5)
    assert est.get_params()["epochs"] == 5


def test_not_fitted_errors():
    est = CrfSegmenter()
    with pytest.raises(NotFittedError):
        est.predict(["ab"])
    with pytest.raises(NotFittedError):
        est.transform(["ab"])


def test_fit_on_presegmented_lines():
    est = CrfSegmenter(epochs=6, batch_size=4, seed=3)
    est.fit(LINES)
    assert est.predict(["ABCABD"]) == [["AB", "C", "ABD"]]
    assert est.transform(["ABCABD"]) == ["AB C ABD"]
    assert est.score(LINES) == 1.0


def test_fit_with_word_lists():
    X = ["ABCABD", "CAB"]
    y = [["AB", "C", "ABD"], ["C", "AB"]]
    est = CrfSegmenter(epochs=6, batch_size=2, seed=1).fit(X * 4, y * 4)
    assert est.predict(["ABC"]) == [["AB", "C"]]
    assert est.score(X, y) == 1.0


def test_input_validation():
    est = CrfSegmenter(epochs=1)
    with pytest.raises(ValueError):
        est.fit("AB C")  # a bare string is almost surely a mistake
    with pytest.raises(ValueError):
        est.fit(["ABC"], [["AB"]])  # words do not cover the text
    with pytest.raises(ValueError):
        est.fit(["ABC"], [["ABC", ""]])  # empty word
    with pytest.raises(ValueError):
        est.fit(["AB", "C"], [["AB"]])  # length mismatch
    with pytest.raises(ValueError):
        est.fit([])  # nothing to learn from
    with pytest.raises(ValueError):
        CrfSegmenter(epochs=0).fit(["AB C"])  # bad config surfaces as ValueError
    fitted = CrfSegmenter(epochs=1).fit(["AB C"])
    with pytest.raises(ValueError):
        fitted.predict([42])  # non-string input


def test_joint_mode():
    lines = ["AB/n C/v", "C/v AB/n", "AB/n AB/n C/v"] * 4
    est = CrfSegmenter(epochs=6, batch_size=4, seed=2, joint=True).fit(lines)
    assert est.predict(["ABC"]) == [[("AB", "n"), ("C", "v")]]
    assert est.transform(["ABC"]) == ["AB/n C/v"]
    # y as (word, label) pairs
    est2 = CrfSegmenter(epochs=4, batch_size=2, seed=2, joint=True)
    est2.fit(["ABC"] * 4, [[("AB", "n"), ("C", "v")]] * 4)
    assert est2.predict(["ABC"]) == [[("AB", "n"), ("C", "v")]]


def test_dictionary_param_forms():
    est = CrfSegmenter(epochs=4, batch_size=4, seed=5, dictionary=["AB", "ABD"])
    est.fit(LINES)
    assert est.lexicon_ is not None and len(est.lexicon_) == 2
    assert est.model_.index.get("Lb=2") is not None


def test_from_model_wrapper():
    data = parse_lines(LINES)
    model, _ = train(data, TrainConfig(epochs=6, batch_size=4, seed=3))
    est = CrfSegmenter.from_model(model)
    assert est.predict(["ABCABD"]) == [["AB", "C", "ABD"]]
    assert est.transform(["CAB"]) == ["C AB"]


def test_fit_transform():
    est = CrfSegmenter(epochs=6, batch_size=4, seed=3)
    out = est.fit_transform(LINES)
    assert out[0] == "AB C ABD"
