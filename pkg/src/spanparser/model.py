"""Full parser model: parameters, vocabularies, labels, and lexicon.

A checkpoint is a directory holding params.npz (versioned key-value tensor
container), config.json, vocab.tsv, pos_vocab.tsv, labels.tsv and
lexicon.tsv; loading it reproduces the model bit-exactly.
"""

import dataclasses
import json
import os

import numpy as np

from . import autograd as ag
from . import decoder
from . import encoder as enc
from . import lexicon as lex
from . import scorer
from . import span_attention as sa
from . import treebank
from .errors import DataError
from .vocab import UNK, Vocab

CONFIG_VERSION = 1


@dataclasses.dataclass
class ModelConfig:
    mode: str = "catsa"
    d_model: int = 64
    layers: int = 3
    heads: int = 4
    d_ff: int = 128
    max_len: int = 64
    use_pos: bool = False
    d_pos: int = 16
    d_hidden: int = 250
    seed: int = 0

    def __post_init__(self):
        if self.mode not in scorer.MODES:
            raise ValueError("mode must be one of %s, got %r" % (scorer.MODES, self.mode))

    def encoder_config(self):
        return enc.EncoderConfig(d_model=self.d_model, layers=self.layers,
                                 heads=self.heads, d_ff=self.d_ff,
                                 max_len=self.max_len, use_pos=self.use_pos,
                                 d_pos=self.d_pos)


class Model:
    def __init__(self, config, token_vocab, pos_vocab, labels, lexicon, params):
        self.config = config
        self.token_vocab = token_vocab
        self.pos_vocab = pos_vocab
        self.labels = labels
        self.lexicon = lexicon
        self.params = params
        self.enc_config = config.encoder_config()

    @classmethod
    def build(cls, config, token_vocab, pos_vocab, labels, lexicon):
        """Fresh model with seeded initialization."""
        rng = np.random.default_rng(config.seed)
        params = ag.ParamRegistry()
        enc_config = config.encoder_config()
        enc.init_encoder_params(params, enc_config, len(token_vocab), len(pos_vocab), rng)
        d_r = enc_config.d_r
        if config.mode != "baseline":
            params.add("ngram.embed", enc.embedding_init(rng, len(lexicon), d_r))
        if config.mode == "catsa":
            # softplus(raw) == 1 at initialization
            params.add("catsa.scale_raw", np.full(lexicon.n_max, np.log(np.e - 1.0)))
        d_in = scorer.head_input_dim(config.mode, d_r, lexicon.n_max)
        scorer.init_head_params(params, d_in, config.d_hidden, len(labels), rng)
        return cls(config, token_vocab, pos_vocab, labels, lexicon, params)

    @classmethod
    def from_data(cls, config, parsed_train, lexicon):
        """Vocabularies and label set from training trees, then build."""
        tokens = [t.surface for _, sent in parsed_train for t in sent]
        tags = [t.pos for _, sent in parsed_train for t in sent if t.pos is not None]
        labels = treebank.LabelSet.from_trees(
            [treebank.collapse_unaries(tree) for tree, _ in parsed_train])
        return cls.build(config, Vocab.from_items(tokens), Vocab.from_items(tags),
                         labels, lexicon)

    @property
    def mode(self):
        return self.config.mode

    @property
    def d_r(self):
        return self.enc_config.d_r

    def encode(self, tokens, pos_tags=None):
        return enc.encode(tokens, pos_tags, self.token_vocab, self.pos_vocab,
                          self.params, self.enc_config)

    def attention_for_span(self, r, cands):
        if self.mode == "sa":
            return sa.span_attention(r, cands, self.params["ngram.embed"])
        if self.mode == "catsa":
            return sa.categorical_span_attention(r, cands, self.params["ngram.embed"],
                                                 self.params["catsa.scale_raw"],
                                                 self.lexicon.n_max)
        raise ValueError("baseline mode has no span attention")

    def score_chart(self, tokens, pos_tags=None, stats=None):
        """Score every span of the sentence; optionally feed attention stats."""
        surfaces = [t.surface if isinstance(t, treebank.Token) else t for t in tokens]
        if pos_tags is None and self.enc_config.use_pos:
            pos_tags = [t.pos if isinstance(t, treebank.Token) and t.pos is not None
                        else UNK for t in tokens]
        q = len(surfaces)
        h = self.encode(surfaces, pos_tags)
        spans = scorer.span_order(q)
        reprs = enc.span_reprs(h, spans)
        if self.mode == "baseline":
            inputs = reprs
        else:
            vectors = []
            for idx, (i, j) in enumerate(spans):
                cands = lex.candidates_for_span(surfaces, i, j, self.lexicon)
                out = self.attention_for_span(ag.rowvec(reprs, idx), cands)
                vectors.append(out.vector)
                if stats is not None:
                    stats.update(out)
            inputs = ag.concat([reprs, ag.stack_rows(vectors)], axis=1)
        head = scorer.ScoringHead.from_registry(self.params)
        tensor = scorer.score_rows(inputs, head)
        if not np.all(np.isfinite(tensor.data)):
            raise DataError("non-finite span scores")
        return scorer.ScoreChart(q, len(self.labels), tensor)

    def parse(self, tokens, pos_tags=None):
        """Decode one sentence into an (uncollapsed) tree."""
        with ag.no_grad():
            chart = self.score_chart(tokens, pos_tags)
        spans, _ = decoder.decode(chart.as_array(), chart.q)
        return treebank.spans_to_tree(spans, chart.q, self.labels)

    def save(self, path):
        os.makedirs(path, exist_ok=True)
        config = dataclasses.asdict(self.config)
        config["config_version"] = CONFIG_VERSION
        config["n_max"] = self.lexicon.n_max
        config["min_freq"] = self.lexicon.min_freq
        with open(os.path.join(path, "config.json"), "w", encoding="utf-8") as handle:
            json.dump(config, handle, indent=2, sort_keys=True)
        self.params.save(os.path.join(path, "params.npz"))
        self.token_vocab.save(os.path.join(path, "vocab.tsv"))
        self.pos_vocab.save(os.path.join(path, "pos_vocab.tsv"))
        self.labels.save(os.path.join(path, "labels.tsv"))
        self.lexicon.save(os.path.join(path, "lexicon.tsv"))

    @classmethod
    def load(cls, path):
        config_path = os.path.join(path, "config.json")
        if not os.path.exists(config_path):
            raise DataError("no checkpoint at %s" % path)
        with open(config_path, encoding="utf-8") as handle:
            stored = json.load(handle)
        if stored.get("config_version") != CONFIG_VERSION:
            raise DataError("unsupported checkpoint config version")
        fields = {f.name for f in dataclasses.fields(ModelConfig)}
        config = ModelConfig(**{k: v for k, v in stored.items() if k in fields})
        lexicon = lex.NGramLexicon.load(os.path.join(path, "lexicon.tsv"),
                                        n_max=stored["n_max"], min_freq=stored["min_freq"])
        return cls(config,
                   Vocab.load(os.path.join(path, "vocab.tsv")),
                   Vocab.load(os.path.join(path, "pos_vocab.tsv")),
                   treebank.LabelSet.load(os.path.join(path, "labels.tsv")),
                   lexicon,
                   ag.ParamRegistry.load(os.path.join(path, "params.npz")))
