import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from spanparser import lexicon as lex
from spanparser.model import Model, ModelConfig

import synth


def tiny_config(mode="catsa", **overrides):
    base = dict(mode=mode, d_model=16, layers=2, heads=2, d_ff=32,
                d_hidden=20, max_len=24, seed=11)
    base.update(overrides)
    return ModelConfig(**base)


@pytest.fixture(scope="session")
def tiny_bank():
    return synth.grammar_bank(12, seed=5)


@pytest.fixture(scope="session")
def tiny_lexicon(tiny_bank):
    return lex.build_lexicon(synth.corpus_of(tiny_bank), n_max=3, min_freq=1)


@pytest.fixture()
def tiny_model(tiny_bank, tiny_lexicon):
    return Model.from_data(tiny_config(), tiny_bank, tiny_lexicon)
