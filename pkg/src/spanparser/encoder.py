"""Token-level self-attention encoder producing fencepost hidden vectors.

A sentence of q tokens runs through the encoder padded with <s>/</s>
sentinels, giving q+2 positions; fencepost vector h_t is the output at
position t for t in [0, q] (the trailing sentinel is dropped).  The span
representation for (i, j) is h_j - h_i, so representations telescope:
r(i,k) + r(k,j) = r(i,j).  POS tag embeddings, when enabled, concatenate
onto the encoder output and widen the fencepost vectors by d_pos.
"""

import dataclasses
import math

import numpy as np

from . import autograd as ag
from . import vocab as V
from .errors import DataError


@dataclasses.dataclass
class EncoderConfig:
    d_model: int = 64
    layers: int = 3
    heads: int = 4
    d_ff: int = 128
    max_len: int = 64
    use_pos: bool = False
    d_pos: int = 16

    def __post_init__(self):
        if self.d_model % self.heads != 0:
            raise ValueError("d_model %d not divisible by %d heads" % (self.d_model, self.heads))

    @property
    def d_r(self):
        return self.d_model + (self.d_pos if self.use_pos else 0)


def glorot(rng, fan_in, fan_out, shape=None):
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out) if shape is None else shape)


def embedding_init(rng, rows_, dim):
    return rng.uniform(-0.01, 0.01, size=(rows_, dim))


def init_encoder_params(params, config, vocab_size, pos_vocab_size, rng):
    d = config.d_model
    params.add("embed.token", embedding_init(rng, vocab_size, d))
    params.add("embed.position", embedding_init(rng, config.max_len + 2, d))
    if config.use_pos:
        params.add("embed.pos_tag", embedding_init(rng, pos_vocab_size, config.d_pos))
    for layer in range(config.layers):
        p = "enc%d." % layer
        for name in ("wq", "wk", "wv", "wo"):
            params.add(p + "attn." + name, glorot(rng, d, d))
            params.add(p + "attn.b" + name[1], np.zeros(d))
        params.add(p + "attn.ln.g", np.ones(d))
        params.add(p + "attn.ln.b", np.zeros(d))
        params.add(p + "ffn.w1", glorot(rng, d, config.d_ff))
        params.add(p + "ffn.b1", np.zeros(config.d_ff))
        params.add(p + "ffn.w2", glorot(rng, config.d_ff, d))
        params.add(p + "ffn.b2", np.zeros(d))
        params.add(p + "ffn.ln.g", np.ones(d))
        params.add(p + "ffn.ln.b", np.zeros(d))


def _attention_block(x, params, prefix, config):
    d = config.d_model
    dk = d // config.heads
    scale = 1.0 / math.sqrt(dk)
    q = ag.matmul(x, params[prefix + "attn.wq"]) + params[prefix + "attn.bq"]
    k = ag.matmul(x, params[prefix + "attn.wk"]) + params[prefix + "attn.bk"]
    v = ag.matmul(x, params[prefix + "attn.wv"]) + params[prefix + "attn.bv"]
    ctx = []
    for h in range(config.heads):
        lo, hi = h * dk, (h + 1) * dk
        qh, kh, vh = ag.cols(q, lo, hi), ag.cols(k, lo, hi), ag.cols(v, lo, hi)
        weights = ag.softmax(ag.matmul(qh, ag.transpose(kh)) * scale)
        ctx.append(ag.matmul(weights, vh))
    attended = ag.matmul(ag.concat(ctx, axis=1), params[prefix + "attn.wo"]) + params[prefix + "attn.bo"]
    x = ag.layer_norm(x + attended, params[prefix + "attn.ln.g"], params[prefix + "attn.ln.b"])
    hidden = ag.relu(ag.matmul(x, params[prefix + "ffn.w1"]) + params[prefix + "ffn.b1"])
    fed = ag.matmul(hidden, params[prefix + "ffn.w2"]) + params[prefix + "ffn.b2"]
    return ag.layer_norm(x + fed, params[prefix + "ffn.ln.g"], params[prefix + "ffn.ln.b"])


def encode(tokens, pos_tags, token_vocab, pos_vocab, params, config):
    """Hidden fencepost matrix of shape (q+1, d_r) for a q-token sentence."""
    q = len(tokens)
    if q == 0:
        raise DataError("cannot encode an empty sentence")
    if q > config.max_len:
        raise DataError("sentence length %d exceeds maximum %d" % (q, config.max_len))
    if config.use_pos and pos_tags is None:
        raise DataError("encoder configured with POS embeddings but no tags given")
    ids = [token_vocab.id_of(V.BOS)]
    ids += [token_vocab.id_of(t) for t in tokens]
    ids.append(token_vocab.id_of(V.EOS))
    x = ag.rows(params["embed.token"], ids) + ag.rows(params["embed.position"], np.arange(q + 2))
    for layer in range(config.layers):
        x = _attention_block(x, params, "enc%d." % layer, config)
    h = ag.rows(x, np.arange(q + 1))
    if config.use_pos:
        if len(pos_tags) != q:
            raise DataError("got %d POS tags for %d tokens" % (len(pos_tags), q))
        tag_ids = [pos_vocab.id_of(V.BOS)] + [pos_vocab.id_of(t) for t in pos_tags]
        h = ag.concat([h, ag.rows(params["embed.pos_tag"], tag_ids)], axis=1)
    return h


def span_repr(h, i, j):
    """r_{i,j} = h_j - h_i as a vector tensor."""
    if not i < j:
        raise ValueError("invalid span (%d, %d)" % (i, j))
    pair = ag.rows(h, [j, i])
    return ag.matmul(np.array([1.0, -1.0]), pair)


def span_reprs(h, spans):
    """Stacked h_j - h_i rows for a list of (i, j) pairs."""
    i_idx = [i for i, _ in spans]
    j_idx = [j for _, j in spans]
    return ag.rows(h, j_idx) - ag.rows(h, i_idx)
