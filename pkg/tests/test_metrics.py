import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_f1
from segkit.corpus import Segmentation
from segkit.errors import AlignmentError, ContractViolation
from segkit.metrics import (
    EvalResult,
    aggregate_f1,
    score_files,
    score_pos_files,
    score_segmentations,
)


def _seg_of(words):
    return Segmentation.from_lengths([len(w) for w in words])


def test_hand_example_is_exact():
    # gold "ab cd" vs pred "a b cd": one of three predictions is correct
    res = score_segmentations([_seg_of(["ab", "cd"])], [_seg_of(["a", "b", "cd"])])
    assert res.n_gold == 2 and res.n_pred == 3 and res.n_correct == 1
    assert res.precision == pytest.approx(1 / 3)
    assert res.recall == 0.5
    assert res.f1 == 0.4  # exact: 2*1/(2+3)
    assert res.format_line() == "P=0.3333 R=0.5000 F1=0.4000 (gold=2 pred=3 correct=1)"


def test_perfect_and_disjoint():
    g = [_seg_of(["ab", "c"])]
    assert score_segmentations(g, g).f1 == 1.0
    res = score_segmentations([_seg_of(["abc"])], [_seg_of(["a", "b", "c"])])
    assert res.n_correct == 0
    assert res.f1 == 0.0
    empty = score_segmentations([], [])
    assert empty.f1 == 0.0 and empty.precision == 0.0 and empty.recall == 0.0


@st.composite
def _two_partitions(draw):
    n = draw(st.integers(min_value=1, max_value=12))
    text = "x" * n

    def cut(seed_list):
        words, pos = [], 0
        for step in seed_list:
            if pos >= n:
                break
            k = min(step, n - pos)
            words.append(text[pos : pos + k])
            pos += k
        if pos < n:
            words.append(text[pos:])
        return words

    steps = st.lists(st.integers(min_value=1, max_value=4), min_size=1, max_size=12)
    return cut(draw(steps)), cut(draw(steps))


@given(_two_partitions())
@settings(max_examples=200, deadline=None)
def test_counts_match_cursor_oracle(pair):
    gold_words, pred_words = pair
    res = score_segmentations([_seg_of(gold_words)], [_seg_of(pred_words)])
    g, p, c = brute_f1(gold_words, pred_words)
    assert (res.n_gold, res.n_pred, res.n_correct) == (g, p, c)
    if c:
        # the three-count form of F1 equals the harmonic mean of P and R
        pr = 2 * res.precision * res.recall / (res.precision + res.recall)
        assert res.f1 == pytest.approx(pr, rel=1e-12)


def test_alignment_errors():
    with pytest.raises(AlignmentError, match="2 sentences"):
        score_segmentations([_seg_of(["ab"]), _seg_of(["c"])], [_seg_of(["ab"])])
    with pytest.raises(AlignmentError, match="sentence 1"):
        score_segmentations([_seg_of(["ab"])], [_seg_of(["abc"])])


def test_score_files(tmp_path):
    gold = tmp_path / "gold.txt"
    pred = tmp_path / "pred.txt"
    gold.write_text("ab cd\n\nxyz\n", encoding="utf-8")
    pred.write_text("a b cd\n\nxyz\n", encoding="utf-8")
    res = score_files(gold, pred)
    assert (res.n_gold, res.n_pred, res.n_correct) == (3, 4, 2)

    pred.write_text("a b cd\nextra\nxyz\n", encoding="utf-8")
    with pytest.raises(AlignmentError, match="line 2"):
        score_files(gold, pred)

    pred.write_text("a b cd\n\nxyw\n", encoding="utf-8")
    with pytest.raises(AlignmentError, match="line 3"):
        score_files(gold, pred)

    pred.write_text("a b cd\n\n", encoding="utf-8")
    with pytest.raises(AlignmentError, match="lines"):
        score_files(gold, pred)


def test_score_pos_files(tmp_path):
    gold = tmp_path / "gold.txt"
    pred = tmp_path / "pred.txt"
    gold.write_text("ab/n cd/v\n", encoding="utf-8")
    pred.write_text("ab/n cd/n\n", encoding="utf-8")
    span, joint = score_pos_files(gold, pred)
    assert span.n_correct == 2  # both spans right
    assert joint.n_correct == 1  # one label wrong
    assert span.f1 == 1.0
    assert joint.f1 == 0.5


def test_aggregate_f1():
    named = {"news": 0.9569, "msra": 0.8367, "pku": 0.8967, "web": 0.9119}
    assert aggregate_f1(named) == pytest.approx(0.90055, abs=1e-9)
    assert aggregate_f1(named, exclude=("news",)) == pytest.approx(
        (0.8367 + 0.8967 + 0.9119) / 3, abs=1e-12
    )
    with pytest.raises(ContractViolation):
        aggregate_f1(named, exclude=tuple(named))


def test_format_line_rounding():
    # four decimals, counts verbatim
    res = EvalResult(n_gold=3, n_pred=3, n_correct=2)
    assert res.format_line() == "P=0.6667 R=0.6667 F1=0.6667 (gold=3 pred=3 correct=2)"
