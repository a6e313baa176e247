"""Bracketed constituency trees and their labeled-span form.

Span convention: fenceposts are 0-based and spans are half-open, so span
(i, j) covers tokens i..j-1 and the whole sentence is (0, q).  Preterminal
(POS) nodes are not constituents; they live as `pos` on Token.  Unary chains
collapse into composite labels joined by UNARY_SEP, and the empty label
(index 0 of every LabelSet) marks spans introduced by binarization.
"""

import collections

from .errors import DataError

EMPTY_LABEL = ""
UNARY_SEP = "::"

LabeledSpan = collections.namedtuple("LabeledSpan", ["i", "j", "label"])

_ESCAPES = {"(": "-LRB-", ")": "-RRB-", "{": "-LCB-", "}": "-RCB-"}
_UNESCAPES = {v: k for k, v in _ESCAPES.items()}


class Token:
    __slots__ = ("surface", "pos")

    def __init__(self, surface, pos=None):
        if not surface or any(c.isspace() for c in surface):
            raise DataError("token surface must be non-empty and whitespace-free: %r" % surface)
        self.surface = surface
        self.pos = pos

    def __eq__(self, other):
        return (self.surface, self.pos) == (other.surface, other.pos)

    def __repr__(self):
        return "Token(%r, %r)" % (self.surface, self.pos)


class Leaf:
    """A tree position holding the token at `index`."""

    __slots__ = ("index",)

    is_leaf = True

    def __init__(self, index):
        self.index = index

    @property
    def start(self):
        return self.index

    @property
    def end(self):
        return self.index + 1

    def __eq__(self, other):
        return getattr(other, "is_leaf", False) and self.index == other.index


class Internal:
    """A labeled constituent over a contiguous token range."""

    __slots__ = ("label", "children")

    is_leaf = False

    def __init__(self, label, children):
        if not children:
            raise DataError("internal node %r has no children" % label)
        for a, b in zip(children, children[1:]):
            if a.end != b.start:
                raise DataError("children of %r are not contiguous" % label)
        self.label = label
        self.children = list(children)

    @property
    def start(self):
        return self.children[0].start

    @property
    def end(self):
        return self.children[-1].end

    def __eq__(self, other):
        return (not getattr(other, "is_leaf", True)
                and self.label == other.label
                and self.children == other.children)


def escape_token(surface):
    return _ESCAPES.get(surface, surface)


def unescape_token(surface):
    return _UNESCAPES.get(surface, surface)


def read_trees(text):
    """Parse one bracketed tree per non-blank line.

    Returns a list of (tree, tokens) pairs.  POS tags stay on tokens;
    -NONE- elements are pruned; raises DataError with the 1-based line
    number on malformed input.
    """
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            out.append(_read_tree(line))
        except DataError as exc:
            raise DataError("line %d: %s" % (lineno, exc)) from None
    return out


def read_treebank(path):
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    try:
        return read_trees(text)
    except DataError as exc:
        raise DataError("%s: %s" % (path, exc)) from None


def _read_tree(line):
    parts = line.replace("(", " ( ").replace(")", " ) ").split()
    tokens = []
    node, pos = _parse_node(parts, 0, tokens)
    if pos != len(parts):
        raise DataError("trailing material after tree")
    if node is None:
        raise DataError("tree is empty after removing -NONE- elements")
    if getattr(node, "is_leaf", False):
        raise DataError("tree has no constituent node")
    return node, tokens


def _parse_node(parts, pos, tokens):
    if pos >= len(parts) or parts[pos] != "(":
        raise DataError("expected '('")
    pos += 1
    if pos >= len(parts) or parts[pos] in "()":
        raise DataError("missing label")
    label = parts[pos]
    pos += 1
    if pos >= len(parts):
        raise DataError("unbalanced brackets")

    if parts[pos] == "(":
        children = []
        while pos < len(parts) and parts[pos] == "(":
            child, pos = _parse_node(parts, pos, tokens)
            if child is not None:
                children.append(child)
        if pos >= len(parts) or parts[pos] != ")":
            raise DataError("unbalanced brackets")
        pos += 1
        if not children:
            return None, pos  # all children were traces
        return Internal(label, children), pos

    # preterminal: (POS word)
    word = parts[pos]
    pos += 1
    if pos >= len(parts) or parts[pos] != ")":
        raise DataError("unbalanced brackets")
    pos += 1
    if label == "-NONE-":
        return None, pos
    tokens.append(Token(unescape_token(word), pos=label))
    return Leaf(len(tokens) - 1), pos


def write_tree(tree, tokens, fallback_pos="XX"):
    """Serialize back to one-line bracketed form, re-escaping token surfaces."""
    if tree.is_leaf:
        token = tokens[tree.index]
        tag = token.pos if token.pos is not None else fallback_pos
        return "(%s %s)" % (tag, escape_token(token.surface))
    inner = " ".join(write_tree(c, tokens, fallback_pos) for c in tree.children)
    return "(%s %s)" % (tree.label, inner)


def write_treebank(path, parsed):
    with open(path, "w", encoding="utf-8") as handle:
        for tree, tokens in parsed:
            handle.write(write_tree(tree, tokens) + "\n")


def read_pos_sidecar(path):
    """Predicted-POS file: one line per sentence of whitespace-separated tags."""
    with open(path, encoding="utf-8") as handle:
        return [line.split() for line in handle if line.strip()]


def apply_pos_sidecar(parsed, tag_lines):
    """Replace token POS tags in place from sidecar lines, validating alignment."""
    if len(tag_lines) != len(parsed):
        raise DataError("sidecar has %d lines for %d sentences" % (len(tag_lines), len(parsed)))
    for index, ((_, tokens), tags) in enumerate(zip(parsed, tag_lines)):
        if len(tags) != len(tokens):
            raise DataError("sentence %d: %d tags for %d tokens" % (index, len(tags), len(tokens)))
        for token, tag in zip(tokens, tags):
            token.pos = tag


def collapse_unaries(tree, sep=UNARY_SEP):
    """Merge single-child constituent chains into one composite-label node."""
    if tree.is_leaf:
        return tree
    label = tree.label
    node = tree
    while len(node.children) == 1 and not node.children[0].is_leaf:
        node = node.children[0]
        label = label + sep + node.label
    return Internal(label, [collapse_unaries(c, sep) for c in node.children])


def expand_unaries(tree, sep=UNARY_SEP):
    """Inverse of collapse_unaries: split composite labels back into chains."""
    if tree.is_leaf:
        return tree
    children = [expand_unaries(c, sep) for c in tree.children]
    node = None
    for label in reversed(tree.label.split(sep)):
        node = Internal(label, children if node is None else [node])
    return node


def binarize(tree):
    """Right-branching binarization; introduced nodes carry the empty label.

    The output is the tree the chart decoder actually searches over, so
    its span set (empty-label fillers included) is the training target.
    """
    if tree.is_leaf:
        return tree
    children = [binarize(c) for c in tree.children]
    while len(children) > 2:
        children = children[:-2] + [Internal(EMPTY_LABEL, children[-2:])]
    return Internal(tree.label, children)


class LabelSet:
    """Ordered constituent labels; index 0 is always the empty label."""

    def __init__(self, labels):
        if not labels or labels[0] != EMPTY_LABEL:
            labels = [EMPTY_LABEL] + [l for l in labels if l != EMPTY_LABEL]
        if len(set(labels)) != len(labels):
            raise DataError("duplicate labels")
        self.labels = list(labels)
        self.index = {label: i for i, label in enumerate(self.labels)}

    @classmethod
    def from_trees(cls, trees):
        """Collect labels of collapsed trees, sorted for deterministic ids."""
        seen = set()
        for tree in trees:
            _collect_labels(tree, seen)
        return cls([EMPTY_LABEL] + sorted(seen))

    def __len__(self):
        return len(self.labels)

    def __contains__(self, label):
        return label in self.index

    def id_of(self, label):
        try:
            return self.index[label]
        except KeyError:
            raise DataError("label %r not in label set" % label) from None

    def label_of(self, label_id):
        return self.labels[label_id]

    def save(self, path):
        with open(path, "w", encoding="utf-8") as handle:
            for i, label in enumerate(self.labels):
                handle.write("%d\t%s\n" % (i, label))

    @classmethod
    def load(cls, path):
        labels = []
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                if line.endswith("\n"):
                    line = line[:-1]
                if not line:
                    continue
                _, _, label = line.partition("\t")
                labels.append(label)
        return cls(labels)


def _collect_labels(tree, seen):
    if tree.is_leaf:
        return
    seen.add(tree.label)
    for child in tree.children:
        _collect_labels(child, seen)


def tree_to_spans(tree, labels):
    """One LabeledSpan per internal node of a collapsed tree."""
    spans = set()
    _spans_helper(tree, labels, spans)
    return spans


def _spans_helper(tree, labels, spans):
    if tree.is_leaf:
        return
    spans.add(LabeledSpan(tree.start, tree.end, labels.id_of(tree.label)))
    for child in tree.children:
        _spans_helper(child, labels, spans)


def binarized_spans(tree, labels, sep=UNARY_SEP):
    """Complete binary span labeling of a gold tree, the training target.

    Collapses unary chains, binarizes, takes one span per node, and pads
    every uncovered width-1 cell with the empty label, so the result is
    exactly the labeling of one tree the chart decoder can return.
    """
    binary = binarize(collapse_unaries(tree, sep))
    spans = tree_to_spans(binary, labels)
    covered = {(s.i, s.j) for s in spans}
    for i in range(binary.start, binary.end):
        if (i, i + 1) not in covered:
            spans.add(LabeledSpan(i, i + 1, 0))
    return spans


def spans_to_tree(spans, q, labels):
    """Assemble a tree from a laminar span set.

    Empty-label spans (binarization padding) are dropped and composite
    labels are re-expanded, so the result is an uncollapsed tree.
    """
    kept = [s for s in spans if s.label != 0]
    if not any(s.i == 0 and s.j == q for s in kept):
        raise DataError("no labeled root span (0, %d)" % q)
    seen = set()
    for s in kept:
        if not (0 <= s.i < s.j <= q):
            raise DataError("span (%d, %d) out of range for length %d" % (s.i, s.j, q))
        if (s.i, s.j) in seen:
            raise DataError("duplicate span (%d, %d)" % (s.i, s.j))
        seen.add((s.i, s.j))
    for a in kept:
        for b in kept:
            if a.i < b.i < a.j < b.j:
                raise DataError("crossing spans (%d,%d) and (%d,%d)" % (a.i, a.j, b.i, b.j))

    # outermost first; ties cannot happen (duplicates rejected above)
    order = sorted(kept, key=lambda s: (s.i, -s.j))
    root, _ = _build_node(order, 0, labels)
    return expand_unaries(root)


def _build_node(order, pos, labels):
    span = order[pos]
    pos += 1
    children = []
    cursor = span.i
    while cursor < span.j:
        if pos < len(order) and order[pos].i == cursor:
            child, pos = _build_node(order, pos, labels)
            children.append(child)
            cursor = child.end
        else:
            children.append(Leaf(cursor))
            cursor += 1
    return Internal(labels.label_of(span.label), children), pos
