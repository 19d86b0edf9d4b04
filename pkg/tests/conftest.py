import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from segkit.corpus import ParsedSentence, parse_segmented_line  # noqa: E402


def parse_lines(lines):
    """Gold corpus lines -> ParsedSentence list (blank lines dropped)."""
    out = []
    for line in lines:
        parsed = parse_segmented_line(line)
        if parsed is not None:
            out.append(ParsedSentence(parsed[0], parsed[1]))
    return out


def random_open_lattice(rng: np.random.Generator, n: int, t: int, scale: float = 1.0):
    """Random scores/transitions over an unconstrained tag scheme."""
    from oracles import OpenScheme
    from segkit.crf import Lattice

    scores = rng.normal(scale=scale, size=(n, t))
    trans = rng.normal(scale=scale, size=(t, t))
    return Lattice(scores, trans, OpenScheme(t)), scores, trans


@pytest.fixture(scope="session")
def synth_vocab():
    from synthlang import build_vocabulary

    return build_vocabulary(seed=0)


@pytest.fixture(scope="session")
def synth_corpus(synth_vocab):
    from synthlang import sample_sentences

    return sample_sentences(synth_vocab, 250, seed=11)
