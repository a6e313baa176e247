"""Chart-based neural constituency parsing with n-gram span attention."""

from .decoder import decode, decode_augmented
from .errors import DataError, NumericError
from .lexicon import NGramLexicon, build_lexicon, candidates_for_span
from .model import Model, ModelConfig
from .trainer import TrainConfig, hinge_loss, sweep, train
from .treebank import (LabeledSpan, LabelSet, collapse_unaries, read_treebank,
                       read_trees, spans_to_tree, tree_to_spans, write_tree)

__version__ = "0.1.0"

__all__ = [
    "DataError", "NumericError",
    "LabeledSpan", "LabelSet", "read_trees", "read_treebank", "write_tree",
    "collapse_unaries", "tree_to_spans", "spans_to_tree",
    "NGramLexicon", "build_lexicon", "candidates_for_span",
    "decode", "decode_augmented",
    "Model", "ModelConfig", "TrainConfig", "train", "sweep", "hinge_loss",
    "__version__",
]
