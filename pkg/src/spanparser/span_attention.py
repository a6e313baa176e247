"""Span attention over lexicon n-grams found inside a span.

Plain span attention softmaxes r . e_v over all candidates of the span and
returns the weighted average of their embeddings.  Categorical span
attention does the same per n-gram length u, scales each category vector by
a positive learned factor, and concatenates the categories, so frequent
short n-grams cannot crowd out rare long ones.
"""

from . import autograd as ag


class AttentionOutput:
    """Attention vector plus the per-candidate weights kept for analysis."""

    def __init__(self, vector, groups, mode):
        self.vector = vector
        self.groups = groups  # list of (candidates, weight Tensor)
        self.mode = mode

    def pairs(self):
        for cands, weights in self.groups:
            for cand, w in zip(cands, weights.data):
                yield cand, float(w)

    @property
    def weight_values(self):
        return [w for _, w in self.pairs()]


def _attend(r, cands, emb):
    e = ag.rows(emb, [c.ngram_id for c in cands])
    weights = ag.softmax(ag.matmul(e, r))
    return ag.matmul(weights, e), weights


def span_attention(r, cands, emb):
    """Weighted n-gram average keyed by the span vector; zero when no candidates."""
    d_r = r.data.shape[-1]
    if emb.data.shape[-1] != d_r:
        raise ValueError("n-gram embedding width %d != span width %d"
                         % (emb.data.shape[-1], d_r))
    if not cands:
        return AttentionOutput(ag.zeros(d_r), [], "sa")
    vector, weights = _attend(r, cands, emb)
    return AttentionOutput(vector, [(list(cands), weights)], "sa")


def categorical_span_attention(r, cands, emb, scale_raw, n):
    """Per-length attention blocks, scaled by softplus(scale_raw) and concatenated."""
    d_r = r.data.shape[-1]
    if emb.data.shape[-1] != d_r:
        raise ValueError("n-gram embedding width %d != span width %d"
                         % (emb.data.shape[-1], d_r))
    if scale_raw.data.shape != (n,):
        raise ValueError("expected %d category scales, got shape %s" % (n, scale_raw.data.shape))
    scales = ag.softplus(scale_raw)
    by_length = {}
    for c in cands:
        by_length.setdefault(c.length, []).append(c)
    parts = []
    groups = []
    for u in range(1, n + 1):
        group = by_length.get(u)
        if not group:
            parts.append(ag.zeros(d_r))
            continue
        vector, weights = _attend(r, group, emb)
        parts.append(ag.mul(vector, ag.rows(scales, [u - 1])))
        groups.append((group, weights))
    return AttentionOutput(ag.concat(parts, axis=0), groups, "catsa")


class AttentionStats:
    """Running attention-weight totals per n-gram id and per n-gram length."""

    def __init__(self):
        self.ngram_totals = {}
        self.length_totals = {}

    def update(self, out):
        for cand, w in out.pairs():
            bucket = self.ngram_totals.setdefault(cand.ngram_id, [0.0, 0])
            bucket[0] += w
            bucket[1] += 1
            bucket = self.length_totals.setdefault(cand.length, [0.0, 0])
            bucket[0] += w
            bucket[1] += 1

    def merge(self, other):
        for key, (w, c) in other.ngram_totals.items():
            bucket = self.ngram_totals.setdefault(key, [0.0, 0])
            bucket[0] += w
            bucket[1] += c
        for key, (w, c) in other.length_totals.items():
            bucket = self.length_totals.setdefault(key, [0.0, 0])
            bucket[0] += w
            bucket[1] += c

    def ngram_average(self, ngram_id):
        total, count = self.ngram_totals[ngram_id]
        return total / count

    def length_average(self, length):
        total, count = self.length_totals[length]
        return total / count

    def ranked_rows(self, lexicon, top_k=None):
        """(ngram, length, avg_weight, count) rows, grouped by length,
        best-weighted first within each group."""
        by_length = {}
        for ngram_id, (total, count) in self.ngram_totals.items():
            ngram = lexicon.ngram_of(ngram_id)
            by_length.setdefault(len(ngram), []).append(
                (" ".join(ngram), len(ngram), total / count, count))
        rows = []
        for length in sorted(by_length):
            group = sorted(by_length[length], key=lambda row: (-row[2], row[0]))
            rows.extend(group if top_k is None else group[:top_k])
        return rows

    def length_rows(self):
        return [(length, self.length_average(length), self.length_totals[length][1])
                for length in sorted(self.length_totals)]
