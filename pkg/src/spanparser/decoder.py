"""Exact CKY decoding over a span score chart.

best(i,j) = max_l s(i,j,l) + max_k [best(i,k) + best(k,j)], with the label
and split maxima independent, so each cell stores its best label and split.
The empty label is allowed everywhere except the sentence-level root.  Ties
break to the lowest label index, then the smallest split point, which makes
decoding a pure function of the chart.
"""

import dataclasses

import numpy as np

from .errors import DataError
from .treebank import LabeledSpan


@dataclasses.dataclass
class Chart:
    best: np.ndarray        # s*(i, j)
    best_label: np.ndarray  # argmax_l s(i, j, l)
    best_split: np.ndarray  # argmax_k, -1 on width-1 spans
    label_best: np.ndarray  # max_l s(i, j, l)


def _scores_array(scores):
    if hasattr(scores, "as_array"):
        return scores.as_array()
    arr = np.asarray(scores, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[0] != arr.shape[1]:
        raise DataError("score chart must have shape (q+1, q+1, d_l), got %s" % (arr.shape,))
    return arr


def build_chart(scores):
    arr = _scores_array(scores)
    q = arr.shape[0] - 1
    label_best = arr.max(axis=2)
    best_label = arr.argmax(axis=2)
    best = np.zeros((q + 1, q + 1))
    best_split = np.full((q + 1, q + 1), -1, dtype=np.intp)
    for width in range(1, q + 1):
        for i in range(q - width + 1):
            j = i + width
            if width == 1:
                best[i, j] = label_best[i, j]
            else:
                vals = best[i, i + 1:j] + best[i + 1:j, j]
                k = int(np.argmax(vals))
                best_split[i, j] = i + 1 + k
                best[i, j] = label_best[i, j] + vals[k]
    return Chart(best, best_label, best_split, label_best)


def _collect(spans, chart, i, j):
    spans.append(LabeledSpan(i, j, int(chart.best_label[i, j])))
    if j > i + 1:
        k = int(chart.best_split[i, j])
        _collect(spans, chart, i, k)
        _collect(spans, chart, k, j)


def decode(scores, q=None):
    """Best binary span tree and its total score; root label is never empty."""
    arr = _scores_array(scores)
    if q is None:
        q = arr.shape[0] - 1
    if q < 1:
        raise DataError("cannot decode an empty sentence")
    if arr.shape[2] < 2:
        raise DataError("need at least one non-empty label")
    chart = build_chart(arr)
    root_label = 1 + int(np.argmax(arr[0, q, 1:]))
    total = float(arr[0, q, root_label] + chart.best[0, q] - chart.label_best[0, q])
    spans = [LabeledSpan(0, q, root_label)]
    if q > 1:
        k = int(chart.best_split[0, q])
        _collect(spans, chart, 0, k)
        _collect(spans, chart, k, q)
    return set(spans), total


def decode_augmented(scores, gold, q=None):
    """Decode with +1 added to the score of every non-gold (i, j, label)."""
    arr = _scores_array(scores).copy()
    if q is None:
        q = arr.shape[0] - 1
    d_l = arr.shape[2]
    arr += 1.0
    for span in gold:
        if not (0 <= span.i < span.j <= q):
            raise DataError("gold span (%d, %d) invalid for length %d" % (span.i, span.j, q))
        if not (0 <= span.label < d_l):
            raise DataError("gold label id %d out of range" % span.label)
        arr[span.i, span.j, span.label] -= 1.0
    return decode(arr, q)
