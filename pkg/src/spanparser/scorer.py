"""Two-layer scoring head mapping span vectors to label scores.

The head input is the span representation alone (baseline), or the span
representation concatenated with the span-attention vector, so its width is
d_r, 2*d_r (plain attention) or d_r*(n+1) (categorical attention over n
length categories).  Scores are raw margins over the label set, empty label
included at index 0.
"""

import numpy as np

from . import autograd as ag
from .errors import DataError

MODES = ("baseline", "sa", "catsa")


def head_input_dim(mode, d_r, n_max):
    if mode == "baseline":
        return d_r
    if mode == "sa":
        return 2 * d_r
    if mode == "catsa":
        return d_r * (n_max + 1)
    raise ValueError("unknown mode %r" % mode)


def init_head_params(params, d_in, d_hidden, d_l, rng):
    from .encoder import glorot

    params.add("head.w1", glorot(rng, d_hidden, d_in, shape=(d_hidden, d_in)))
    params.add("head.b1", np.zeros(d_hidden))
    params.add("head.ln.g", np.ones(d_hidden))
    params.add("head.ln.b", np.zeros(d_hidden))
    params.add("head.w2", glorot(rng, d_l, d_hidden, shape=(d_l, d_hidden)))
    params.add("head.b2", np.zeros(d_l))


class ScoringHead:
    """View over the head parameters in a registry."""

    def __init__(self, w1, b1, ln_g, ln_b, w2, b2):
        self.w1, self.b1 = w1, b1
        self.ln_g, self.ln_b = ln_g, ln_b
        self.w2, self.b2 = w2, b2

    @classmethod
    def from_registry(cls, params):
        return cls(params["head.w1"], params["head.b1"], params["head.ln.g"],
                   params["head.ln.b"], params["head.w2"], params["head.b2"])

    @property
    def d_in(self):
        return self.w1.data.shape[1]


def score_span(r, a, head):
    """Label scores W2 . relu(LN(W1 . (r ++ a) + b1)) + b2 for one span."""
    rp = r if a is None else ag.concat([r, a], axis=0)
    if rp.data.shape != (head.d_in,):
        raise ValueError("head expects input width %d, got shape %s"
                         % (head.d_in, rp.data.shape))
    o = ag.relu(ag.layer_norm(ag.matmul(head.w1, rp) + head.b1, head.ln_g, head.ln_b))
    return ag.matmul(head.w2, o) + head.b2


def score_rows(rp, head):
    """Batched head application; rows of rp are per-span inputs."""
    if rp.data.shape[1] != head.d_in:
        raise ValueError("head expects input width %d, got shape %s"
                         % (head.d_in, rp.data.shape))
    pre = ag.matmul(rp, ag.transpose(head.w1)) + head.b1
    o = ag.relu(ag.layer_norm(pre, head.ln_g, head.ln_b))
    return ag.matmul(o, ag.transpose(head.w2)) + head.b2


def span_order(q):
    return [(i, j) for i in range(q) for j in range(i + 1, q + 1)]


class ScoreChart:
    """Per-span label scores for one sentence, in fixed span order."""

    def __init__(self, q, d_l, tensor):
        self.q = q
        self.d_l = d_l
        self.spans = span_order(q)
        if tensor.data.shape != (len(self.spans), d_l):
            raise ValueError("chart tensor shape %s != (%d, %d)"
                             % (tensor.data.shape, len(self.spans), d_l))
        self.tensor = tensor
        self._row = {span: idx for idx, span in enumerate(self.spans)}

    def row_index(self, i, j):
        try:
            return self._row[(i, j)]
        except KeyError:
            raise DataError("span (%d, %d) outside chart for length %d" % (i, j, self.q)) from None

    def scores_for(self, i, j):
        return self.tensor.data[self.row_index(i, j)]

    def as_array(self):
        arr = np.zeros((self.q + 1, self.q + 1, self.d_l))
        for (i, j), row in zip(self.spans, self.tensor.data):
            arr[i, j] = row
        return arr

    def dump_tsv(self, path, labels=None):
        """Debug dump: one (i, j, label, score) line per chart entry."""
        with open(path, "w", encoding="utf-8") as handle:
            handle.write("i\tj\tlabel\tscore\n")
            for (i, j), row in zip(self.spans, self.tensor.data):
                for label_id, score in enumerate(row):
                    name = labels.label_of(label_id) if labels else str(label_id)
                    handle.write("%d\t%d\t%s\t%.17g\n" % (i, j, name, score))
