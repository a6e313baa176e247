"""Synthetic treebanks and random structures shared across tests."""

import numpy as np

from spanparser import treebank as tb

DETS = ["the", "a"]
NOUNS = ["cat", "dog", "man", "park", "ball", "bird", "girl", "boy", "car"]
VERBS = ["sat", "ran", "saw", "liked", "found", "chased", "heard", "took", "lost"]

PADS = ["p%d" % k for k in range(8)]
CUE_A = ["ca", "cb", "cc"]
CUE_B = ["cb", "ca", "cc"]


def grammar_tree(rng):
    """Tiny regular grammar: S -> P V [P], P -> D N.  Two labels, 20 words."""
    def phrase():
        return "(P (D %s) (N %s))" % (DETS[rng.integers(0, 2)],
                                      NOUNS[rng.integers(0, 9)])
    verb = "(V %s)" % VERBS[rng.integers(0, 9)]
    if rng.integers(0, 2):
        return "(S %s %s)" % (phrase(), verb)
    return "(S %s %s %s)" % (phrase(), verb, phrase())


def grammar_bank(n, seed):
    rng = np.random.default_rng(seed)
    return tb.read_trees("\n".join(grammar_tree(rng) for _ in range(n)))


def cue_tree(rng):
    """Pad tokens around a planted 3-token cue whose ORDER decides the label.

    Both cue variants share the same token bag and the same final token, so
    boundary hidden states alone cannot tell them apart; the trigram can.
    """
    nl = int(rng.integers(1, 7))
    nr = int(rng.integers(1, 7))
    cue, label = (CUE_A, "A") if rng.integers(0, 2) == 0 else (CUE_B, "B")
    left = " ".join("(P %s)" % PADS[int(rng.integers(0, 8))] for _ in range(nl))
    right = " ".join("(P %s)" % PADS[int(rng.integers(0, 8))] for _ in range(nr))
    mid = "(%s %s)" % (label, " ".join("(K %s)" % c for c in cue))
    return "(S %s %s %s)" % (left, mid, right)


def cue_bank(n, seed):
    rng = np.random.default_rng(seed)
    return tb.read_trees("\n".join(cue_tree(rng) for _ in range(n)))


def corpus_of(parsed):
    return [[t.surface for t in tokens] for _, tokens in parsed]


def random_tree(rng, q, labels):
    """Random n-ary tree over q tokens with labels drawn from `labels`."""
    def build(lo, hi):
        label = labels[rng.integers(0, len(labels))]
        if hi - lo == 1:
            return tb.Internal(label, [tb.Leaf(lo)])
        arity = int(rng.integers(2, min(4, hi - lo) + 1))
        cuts = sorted(rng.choice(np.arange(lo + 1, hi), size=arity - 1, replace=False))
        bounds = [lo] + [int(c) for c in cuts] + [hi]
        children = []
        for a, b in zip(bounds, bounds[1:]):
            if b - a == 1 and rng.integers(0, 2):
                children.append(tb.Leaf(a))
            else:
                children.append(build(a, b))
        return tb.Internal(label, children)

    return build(0, q)


def random_tokens(rng, q, vocab=None):
    vocab = vocab or NOUNS
    return [tb.Token(vocab[rng.integers(0, len(vocab))], pos="T") for _ in range(q)]


def enumerate_binary_structures(q):
    """All binary bracketings over q leaves as span lists with split points.

    Each structure is a list of (i, j, k) covering every chart cell of the
    tree: k is the split for width > 1 and -1 for width-1 cells.  The list is
    in top-down pre-order, so comparing lists lexicographically matches a
    smallest-split-first tie-break.
    """
    def build(i, j):
        if j == i + 1:
            return [[(i, j, -1)]]
        out = []
        for k in range(i + 1, j):
            for left in build(i, k):
                for right in build(k, j):
                    out.append([(i, j, k)] + left + right)
        return out

    return build(0, q)
