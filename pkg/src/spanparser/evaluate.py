"""Bracket scoring with EVALB conventions, plus length-bucket, n-gram-length
ablation, and attention-weight analyses.

Brackets are (i, j, label) multisets over uncollapsed trees: the root counts,
preterminals never do, punctuation stays in the leaf indexing, and there are
no label equivalences or length cutoffs.  Precision, recall, F1 and the
complete-match rate are percentages.
"""

import collections
import dataclasses

from . import autograd as ag
from . import lexicon as lex
from . import span_attention as sa
from .errors import DataError

SentenceRecord = dataclasses.make_dataclass(
    "SentenceRecord", ["index", "length", "matched", "predicted", "gold", "exact"])


@dataclasses.dataclass
class EvalReport:
    matched: int
    predicted: int
    gold: int
    precision: float
    recall: float
    f1: float
    complete_match: float
    sentences: list

    @property
    def match_rate(self):
        return self.complete_match / 100.0


def brackets(tree):
    """Multiset of (i, j, label) over the internal nodes of an uncollapsed tree."""
    found = collections.Counter()
    _brackets(tree, found)
    return found


def _brackets(tree, found):
    if tree.is_leaf:
        return
    found[(tree.start, tree.end, tree.label)] += 1
    for child in tree.children:
        _brackets(child, found)


def _report(per_sentence):
    matched = sum(r.matched for r in per_sentence)
    predicted = sum(r.predicted for r in per_sentence)
    gold = sum(r.gold for r in per_sentence)
    precision = 100.0 * matched / predicted if predicted else 0.0
    recall = 100.0 * matched / gold if gold else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    exact = 100.0 * sum(1 for r in per_sentence if r.exact) / len(per_sentence)
    return EvalReport(matched, predicted, gold, precision, recall, f1, exact,
                      list(per_sentence))


def score_trees(gold_trees, pred_trees):
    """Labeled bracket precision/recall/F1 and complete match over tree pairs."""
    if len(gold_trees) != len(pred_trees):
        raise DataError("gold has %d trees, prediction has %d"
                        % (len(gold_trees), len(pred_trees)))
    if not gold_trees:
        raise DataError("nothing to evaluate")
    per_sentence = []
    for index, (gold, pred) in enumerate(zip(gold_trees, pred_trees)):
        if gold.end != pred.end:
            raise DataError("sentence %d: gold has %d tokens, prediction has %d"
                            % (index, gold.end, pred.end))
        gb = brackets(gold)
        pb = brackets(pred)
        matched = sum(min(count, pb[key]) for key, count in gb.items())
        record = SentenceRecord(index, gold.end, matched,
                                sum(pb.values()), sum(gb.values()), gb == pb)
        per_sentence.append(record)
    return _report(per_sentence)


def bucketed_f1(gold_trees, pred_trees, thresholds):
    """One EvalReport per minimum sentence length; empty buckets map to None."""
    if list(thresholds) != sorted(thresholds):
        raise DataError("thresholds must be ascending")
    full = score_trees(gold_trees, pred_trees)
    buckets = []
    for threshold in thresholds:
        subset = [r for r in full.sentences if r.length >= threshold]
        buckets.append((threshold, _report(subset) if subset else None))
    return buckets


def bucket_rows(buckets):
    """TSV-ready rows: threshold, sentence count, P, R, F1, match (blank if empty)."""
    rows = []
    for threshold, report in buckets:
        if report is None:
            rows.append((threshold, 0, "", "", "", ""))
        else:
            rows.append((threshold, len(report.sentences),
                         "%.2f" % report.precision, "%.2f" % report.recall,
                         "%.2f" % report.f1, "%.2f" % report.complete_match))
    return rows


def attention_report(model, sentences, top_k=50):
    """Average attention weight per n-gram and per length over all spans.

    Returns (ranked_rows, length_rows): ranked_rows are (ngram, length,
    avg_weight, count) grouped by length and sorted by weight; length_rows
    are (length, avg_weight, count).
    """
    if model.mode == "baseline":
        raise DataError("attention analysis needs a span-attention model")
    stats = sa.AttentionStats()
    for tokens, pos_tags in sentences:
        with ag.no_grad():
            model.score_chart(tokens, pos_tags, stats=stats)
    return stats.ranked_rows(model.lexicon, top_k=top_k), stats.length_rows()


def ablation_run(parsed_train, parsed_dev, parsed_test, lexicon,
                 model_config, train_config, caps=None, log=None):
    """Retrain per n-gram length cap and report test F1 per cap plus baseline.

    Returns rows (cap_label, test_f1) where cap_label is "1".."n" or
    "baseline"; the baseline row uses the same data without span attention.
    """
    from . import trainer

    rows = []
    for cap in caps if caps is not None else range(1, lexicon.n_max + 1):
        capped = lex.max_len_filter(lexicon, cap)
        state = trainer.train(parsed_train, parsed_dev, capped, model_config, train_config)
        report = trainer.evaluate_model(state.model, parsed_test)
        rows.append((str(cap), report.f1))
        if log is not None:
            log("cap %s: test F1 %.2f" % rows[-1])
    base_config = dataclasses.replace(model_config, mode="baseline")
    state = trainer.train(parsed_train, parsed_dev, lexicon, base_config, train_config)
    report = trainer.evaluate_model(state.model, parsed_test)
    rows.append(("baseline", report.f1))
    if log is not None:
        log("baseline: test F1 %.2f" % report.f1)
    return rows
