"""Max-margin training: augmented decode, hinge loss, Adam updates.

The per-sentence loss is max(0, s_aug(best rival) - s(gold spans)) where the
rival comes from decoding with +1 added to every non-gold (i, j, label).
Only spans in the symmetric difference of the rival and gold span sets enter
the loss tensor, so gradients touch exactly those chart cells.
"""

import dataclasses
import os

import numpy as np

from . import autograd as ag
from . import decoder
from . import evaluate
from . import treebank
from .errors import NumericError
from .model import Model
from .vocab import UNK

EpochRecord = dataclasses.make_dataclass(
    "EpochRecord", ["epoch", "loss", "dev_p", "dev_r", "dev_f1", "dev_match"])


@dataclasses.dataclass
class TrainConfig:
    learning_rates: tuple = (5e-5, 1e-5, 5e-6)
    batch_size: int = 8
    max_epochs: int = 50
    patience: int = 10
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    clip_norm: float = 5.0
    stop_f1: float = None  # stop early once dev F1 reaches this

    def __post_init__(self):
        if not self.learning_rates or any(lr < 0 for lr in self.learning_rates):
            raise ValueError("learning rates must be non-negative")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")


@dataclasses.dataclass
class TrainState:
    learning_rate: float
    best_dev_f1: float
    best_epoch: int
    records: list
    checkpoint: str = None
    model: Model = None
    log_lines: list = dataclasses.field(default_factory=list)


class Adam:
    def __init__(self, config):
        self.beta1 = config.beta1
        self.beta2 = config.beta2
        self.eps = config.adam_eps
        self.step_count = 0
        self.m = {}
        self.v = {}

    def step(self, params, lr):
        self.step_count += 1
        b1, b2 = self.beta1, self.beta2
        correction1 = 1.0 - b1 ** self.step_count
        correction2 = 1.0 - b2 ** self.step_count
        for name, t in params.items():
            if t.grad is None:
                continue
            m = self.m.setdefault(name, np.zeros_like(t.data))
            v = self.v.setdefault(name, np.zeros_like(t.data))
            m *= b1
            m += (1.0 - b1) * t.grad
            v *= b2
            v += (1.0 - b2) * t.grad * t.grad
            t.data -= lr * (m / correction1) / (np.sqrt(v / correction2) + self.eps)


def clip_gradients(params, max_norm):
    total = 0.0
    for t in params.tensors():
        if t.grad is not None:
            total += float((t.grad * t.grad).sum())
    norm = np.sqrt(total)
    if norm > max_norm > 0:
        scale = max_norm / norm
        for t in params.tensors():
            if t.grad is not None:
                t.grad *= scale
    return norm


def hinge_loss(chart, gold):
    """Structured hinge with a +1 cost on every predicted non-gold span.

    Returns a scalar tensor; its value includes the constant cost term, but
    gradients flow only through chart cells for spans in exactly one of the
    gold and rival sets.
    """
    gold = set(gold)
    arr = chart.as_array()
    pred, aug_total = decoder.decode_augmented(arr, gold, chart.q)
    gold_total = sum(arr[s.i, s.j, s.label] for s in gold)
    if aug_total - gold_total <= 0.0:
        return ag.Tensor(0.0)
    pred_only = sorted(pred - gold)
    gold_only = sorted(gold - pred)
    cost = sum(1 for s in pred if s not in gold)
    loss = ag.Tensor(float(cost))
    if pred_only:
        rows = [chart.row_index(s.i, s.j) for s in pred_only]
        labels = [s.label for s in pred_only]
        loss = loss + ag.total(ag.select(chart.tensor, rows, labels))
    if gold_only:
        rows = [chart.row_index(s.i, s.j) for s in gold_only]
        labels = [s.label for s in gold_only]
        loss = loss - ag.total(ag.select(chart.tensor, rows, labels))
    return loss


def pos_tags(tokens, use_pos):
    if not use_pos:
        return None
    return [t.pos if t.pos is not None else UNK for t in tokens]


def _prepare(parsed, labels):
    items = []
    for tree, tokens in parsed:
        items.append((tokens, treebank.binarized_spans(tree, labels)))
    return items


def evaluate_model(model, parsed):
    """Parse every sentence and score against gold; returns an EvalReport."""
    use_pos = model.enc_config.use_pos
    pred = [model.parse(tokens, pos_tags(tokens, use_pos)) for _, tokens in parsed]
    return evaluate.score_trees([tree for tree, _ in parsed], pred)


def train(parsed_train, parsed_dev, lexicon, model_config, config,
          learning_rate=None, out_dir=None, log=None):
    """One training run; keeps the best-dev-F1 parameters.

    The returned state's model has the best parameters restored; when
    out_dir is given the best checkpoint and a train.log are written there.
    """
    if not parsed_train or not parsed_dev:
        raise ValueError("training and development sets must be non-empty")
    lr = config.learning_rates[0] if learning_rate is None else learning_rate
    rng = np.random.default_rng(config.seed)
    model = Model.from_data(model_config, parsed_train, lexicon)
    items = _prepare(parsed_train, model.labels)
    use_pos = model.enc_config.use_pos
    adam = Adam(config)

    best_f1 = -1.0
    best_epoch = -1
    best_snapshot = None
    records = []
    log_lines = []
    stale = 0

    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(len(items))
        model.params.zero_grads()
        pending = 0
        losses = []
        for idx in order:
            tokens, gold = items[idx]
            chart = model.score_chart(tokens, pos_tags(tokens, use_pos))
            loss = hinge_loss(chart, gold)
            value = loss.item()
            if not np.isfinite(value):
                raise NumericError("non-finite loss at epoch %d" % epoch)
            losses.append(value)
            if loss.requires_grad:
                ag.mul(loss, 1.0 / config.batch_size).backward()
            pending += 1
            if pending == config.batch_size:
                clip_gradients(model.params, config.clip_norm)
                adam.step(model.params, lr)
                model.params.zero_grads()
                pending = 0
        if pending:
            clip_gradients(model.params, config.clip_norm)
            adam.step(model.params, lr)
            model.params.zero_grads()
        model.params.check_finite()

        report = evaluate_model(model, parsed_dev)
        mean_loss = float(np.mean(losses))
        records.append(EpochRecord(epoch, mean_loss, report.precision, report.recall,
                                   report.f1, report.complete_match))
        log_lines.append("%d\t%.6f\t%.2f\t%.2f\t%.2f\t%.2f"
                         % (epoch, mean_loss, report.precision, report.recall,
                            report.f1, report.complete_match))
        if log is not None:
            log(log_lines[-1])
        if report.f1 > best_f1:
            best_f1 = report.f1
            best_epoch = epoch
            best_snapshot = {name: t.data.copy() for name, t in model.params.items()}
            stale = 0
        else:
            stale += 1
        if stale >= config.patience:
            break
        if config.stop_f1 is not None and best_f1 >= config.stop_f1:
            break

    if best_snapshot is not None:
        for name, t in model.params.items():
            t.data = best_snapshot[name]
    state = TrainState(lr, best_f1, best_epoch, records, model=model,
                       log_lines=log_lines)
    if out_dir is not None:
        _save_run(state, out_dir)
    return state


def _save_run(state, out_dir):
    state.model.save(out_dir)
    with open(os.path.join(out_dir, "train.log"), "w", encoding="utf-8") as handle:
        handle.write("\n".join(state.log_lines) + "\n")
    state.checkpoint = out_dir


def sweep(parsed_train, parsed_dev, lexicon, model_config, config, out_dir=None, log=None):
    """Run train() once per configured learning rate and keep the best run."""
    best = None
    for lr in config.learning_rates:
        if log is not None:
            log("# learning rate %g" % lr)
        state = train(parsed_train, parsed_dev, lexicon, model_config, config,
                      learning_rate=lr, log=log)
        if best is None or state.best_dev_f1 > best.best_dev_f1:
            best = state
    if out_dir is not None and best is not None:
        _save_run(best, out_dir)
    return best
