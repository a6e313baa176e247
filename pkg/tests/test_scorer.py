import numpy as np
import pytest

from spanparser import autograd as ag
from spanparser import encoder as enc
from spanparser import lexicon as lex
from spanparser import scorer
from spanparser.model import Model

from conftest import tiny_config


def head_with(w1, b1, w2, b2, d_hidden):
    params = ag.ParamRegistry()
    params.add("head.w1", w1)
    params.add("head.b1", b1)
    params.add("head.ln.g", np.ones(d_hidden))
    params.add("head.ln.b", np.zeros(d_hidden))
    params.add("head.w2", w2)
    params.add("head.b2", b2)
    return scorer.ScoringHead.from_registry(params)


def test_zero_output_layer_gives_zero_scores():
    head = head_with(np.eye(2), np.zeros(2), np.zeros((3, 2)), np.zeros(3), 2)
    out = scorer.score_span(ag.Tensor([1.0, -2.0]), None, head)
    assert np.array_equal(out.data, np.zeros(3))


def test_output_bias_passes_through():
    head = head_with(np.eye(2), np.zeros(2), np.zeros((3, 2)), np.full(3, 2.5), 2)
    out = scorer.score_span(ag.Tensor([0.3, 0.9]), None, head)
    assert np.allclose(out.data, 2.5)


def test_hand_evaluated_forward_pass():
    w2 = np.array([[2.0, 1.0], [0.0, -1.0]])
    head = head_with(np.eye(2), np.zeros(2), w2, np.array([0.5, 0.0]), 2)
    out = scorer.score_span(ag.Tensor([1.0, 3.0]), None, head)
    # LN([1,3]) = [-1,1]/sqrt(1 + eps); relu keeps only the second entry
    xhat = 1.0 / np.sqrt(1.0 + ag.LN_EPS)
    assert np.allclose(out.data, [xhat + 0.5, -xhat], atol=1e-12)


def test_attention_vector_concatenates_before_head():
    w1 = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0]])
    head = head_with(w1, np.zeros(2), np.eye(2), np.zeros(2), 2)
    r = ag.Tensor([4.0, 0.0])
    a = ag.Tensor([0.0, -6.0])
    out = scorer.score_span(r, a, head)
    # W1 picks r[0]=4 and a[1]=-6; LN of [4,-6] = [1,-1]/sqrt(1+eps/25)
    xhat = 5.0 / np.sqrt(25.0 + ag.LN_EPS)
    assert np.allclose(out.data, [xhat, 0.0], atol=1e-12)


def test_width_mismatch_is_an_error():
    head = head_with(np.eye(2), np.zeros(2), np.eye(2), np.zeros(2), 2)
    with pytest.raises(ValueError):
        scorer.score_span(ag.Tensor([1.0, 2.0, 3.0]), None, head)
    with pytest.raises(ValueError):
        scorer.score_rows(ag.Tensor(np.zeros((4, 3))), head)


def test_head_input_dim_per_mode():
    assert scorer.head_input_dim("baseline", 16, 5) == 16
    assert scorer.head_input_dim("sa", 16, 5) == 32
    assert scorer.head_input_dim("catsa", 16, 5) == 96
    with pytest.raises(ValueError):
        scorer.head_input_dim("other", 16, 5)


def test_chart_has_one_vector_per_span(tiny_model):
    tokens = ["the", "cat", "sat", "dog"]
    chart = tiny_model.score_chart(tokens)
    assert chart.tensor.data.shape == (10, len(tiny_model.labels))
    single = tiny_model.score_chart(["cat"])
    assert single.tensor.data.shape == (1, len(tiny_model.labels))
    assert single.spans == [(0, 1)]


@pytest.mark.parametrize("q", [1, 2, 3, 5, 8])
def test_chart_size_is_q_choose_2_plus_q(tiny_model, q):
    chart = tiny_model.score_chart(["cat"] * q)
    assert len(chart.spans) == q * (q + 1) // 2


def test_chart_is_deterministic(tiny_model):
    tokens = ["the", "dog", "ran"]
    a = tiny_model.score_chart(tokens).tensor.data
    b = tiny_model.score_chart(tokens).tensor.data
    assert np.array_equal(a, b)


def test_chart_as_array_round_trip(tiny_model):
    tokens = ["the", "cat", "sat"]
    chart = tiny_model.score_chart(tokens)
    arr = chart.as_array()
    for (i, j), row in zip(chart.spans, chart.tensor.data):
        assert np.array_equal(arr[i, j], row)
    assert np.array_equal(arr[1, 0], np.zeros(chart.d_l))


def test_empty_lexicon_attention_equals_zero_padded_baseline(tiny_bank):
    empty = lex.NGramLexicon({}, n_max=2, min_freq=2)
    for mode in ("sa", "catsa"):
        model = Model.from_data(tiny_config(mode=mode), tiny_bank, empty)
        tokens = ["the", "cat", "sat"]
        chart = model.score_chart(tokens)
        h = model.encode(tokens)
        head = scorer.ScoringHead.from_registry(model.params)
        zero = ag.zeros(head.d_in - model.d_r)
        for (i, j), row in zip(chart.spans, chart.tensor.data):
            direct = scorer.score_span(enc.span_repr(h, i, j), zero, head)
            assert np.allclose(row, direct.data, atol=1e-12)


def test_chart_dump_round_trips_scores(tiny_model, tmp_path):
    chart = tiny_model.score_chart(["the", "cat"])
    path = tmp_path / "chart.tsv"
    chart.dump_tsv(path, labels=tiny_model.labels)
    lines = path.read_text().strip().split("\n")[1:]
    assert len(lines) == 3 * len(tiny_model.labels)
    rows = {(int(i), int(j), label): float(score)
            for i, j, label, score in (line.split("\t") for line in lines)}
    empty = tiny_model.labels.label_of(0)
    assert rows[(0, 2, empty)] == chart.scores_for(0, 2)[0]


def test_chart_gradients_reach_ngram_embeddings(tiny_model, tiny_bank):
    tokens = [t.surface for t in tiny_bank[0][1]]  # its segments are in the lexicon
    chart = tiny_model.score_chart(tokens)
    ag.total(chart.tensor).backward()
    grad = tiny_model.params["ngram.embed"].grad
    assert grad is not None and np.any(grad != 0)
