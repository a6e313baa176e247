"""N-gram lexicon built by PMI-driven unsupervised segmentation.

Adjacent-word PMI is estimated over a corpus; a delimiter goes between two
adjacent tokens whenever their PMI falls below a threshold, the resulting
delimiter-free runs become candidate n-grams, and runs that are too long are
chopped greedily left to right.  Candidates kept often enough form the
lexicon used for span attention.
"""

import collections
import math

from .errors import DataError

Candidate = collections.namedtuple("Candidate", ["ngram_id", "start", "length"])


class PmiTable:
    """Unigram and adjacent-bigram statistics over a tokenized corpus.

    Bigrams never cross sentence boundaries.  Probabilities are maximum
    likelihood: count over total tokens (unigrams) or total adjacent-pair
    positions (bigrams).
    """

    def __init__(self, unigrams, bigrams, total_tokens, total_bigrams):
        self.unigrams = unigrams
        self.bigrams = bigrams
        self.total_tokens = total_tokens
        self.total_bigrams = total_bigrams

    def p_unigram(self, x):
        return self.unigrams.get(x, 0) / self.total_tokens

    def p_bigram(self, x, y):
        if self.total_bigrams == 0:
            return 0.0
        return self.bigrams.get((x, y), 0) / self.total_bigrams

    def pmi(self, x, y):
        """log p(xy) / (p(x) p(y)); -inf when the pair is never adjacent."""
        p_xy = self.p_bigram(x, y)
        if p_xy == 0.0:
            return float("-inf")
        return math.log(p_xy / (self.p_unigram(x) * self.p_unigram(y)))


def compute_pmi(corpus):
    """Count unigrams and ordered adjacent bigrams over a list of sentences."""
    if not corpus:
        raise DataError("empty corpus")
    unigrams = collections.Counter()
    bigrams = collections.Counter()
    total_bigrams = 0
    for sentence in corpus:
        unigrams.update(sentence)
        for a, b in zip(sentence, sentence[1:]):
            bigrams[(a, b)] += 1
            total_bigrams += 1
    total_tokens = sum(unigrams.values())
    if total_tokens == 0:
        raise DataError("corpus has no tokens")
    return PmiTable(dict(unigrams), dict(bigrams), total_tokens, total_bigrams)


def segment(sentence, pmi, threshold=0.0, max_len=None):
    """Split a sentence into n-gram segments.

    A delimiter is inserted between adjacent tokens exactly when their PMI is
    below `threshold` (equality keeps them joined).  Runs longer than
    `max_len` are chopped greedily left to right.
    """
    if not sentence:
        return []
    runs = []
    current = [sentence[0]]
    for prev, tok in zip(sentence, sentence[1:]):
        if pmi.pmi(prev, tok) < threshold:
            runs.append(current)
            current = [tok]
        else:
            current.append(tok)
    runs.append(current)
    if max_len is not None:
        chopped = []
        for run in runs:
            for k in range(0, len(run), max_len):
                chopped.append(run[k:k + max_len])
        runs = chopped
    return [tuple(run) for run in runs]


class NGramLexicon:
    """N-grams with frequencies and dense ids, ordered by (length, tokens)."""

    def __init__(self, counts, n_max, min_freq):
        entries = {}
        for ngram in sorted(counts, key=lambda g: (len(g), g)):
            entries[ngram] = (len(entries), counts[ngram])
        self.entries = entries
        self.n_max = n_max
        self.min_freq = min_freq
        self._by_id = list(entries)

    def __len__(self):
        return len(self.entries)

    def __contains__(self, ngram):
        return tuple(ngram) in self.entries

    def id_of(self, ngram):
        return self.entries[tuple(ngram)][0]

    def freq_of(self, ngram):
        return self.entries[tuple(ngram)][1]

    def ngram_of(self, ngram_id):
        return self._by_id[ngram_id]

    def items(self):
        """(ngram, id, freq) triples in id order."""
        for ngram, (ngram_id, freq) in self.entries.items():
            yield ngram, ngram_id, freq

    def save(self, path):
        with open(path, "w", encoding="utf-8") as handle:
            for ngram, _, freq in self.items():
                handle.write("%s\t%d\n" % (" ".join(ngram), freq))

    @classmethod
    def load(cls, path, n_max=None, min_freq=None):
        counts = {}
        with open(path, encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                try:
                    ngram_text, freq_text = line.split("\t")
                    counts[tuple(ngram_text.split(" "))] = int(freq_text)
                except ValueError:
                    raise DataError("%s: bad lexicon line %d" % (path, lineno)) from None
        if n_max is None:
            n_max = max((len(g) for g in counts), default=1)
        if min_freq is None:
            min_freq = min((f for f in counts.values()), default=1)
        return cls(counts, n_max, min_freq)


def build_lexicon(corpus, n_max=5, min_freq=2, threshold=0.0):
    """Segment the corpus by PMI and keep segments seen at least min_freq times."""
    pmi = compute_pmi(corpus)
    counts = collections.Counter()
    for sentence in corpus:
        counts.update(segment(sentence, pmi, threshold, max_len=n_max))
    kept = {g: c for g, c in counts.items() if c >= min_freq}
    return NGramLexicon(kept, n_max, min_freq)


def candidates_for_span(tokens, i, j, lexicon):
    """Every lexicon n-gram occurring inside [i, j), one candidate per position."""
    found = []
    for start in range(i, j):
        limit = min(lexicon.n_max, j - start)
        for length in range(1, limit + 1):
            ngram = tuple(tokens[start:start + length])
            if ngram in lexicon.entries:
                found.append(Candidate(lexicon.entries[ngram][0], start, length))
    return found


def max_len_filter(lexicon, cap):
    """Restrict to entries of length <= cap, re-densifying ids."""
    if not 1 <= cap <= lexicon.n_max:
        raise DataError("cap %d outside [1, %d]" % (cap, lexicon.n_max))
    kept = {g: freq for g, (_, freq) in lexicon.entries.items() if len(g) <= cap}
    return NGramLexicon(kept, cap, lexicon.min_freq)
