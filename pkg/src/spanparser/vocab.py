"""Token/tag vocabularies with reserved specials, stored as TSV."""

UNK = "<unk>"
BOS = "<s>"
EOS = "</s>"

SPECIALS = (UNK, BOS, EOS)


class Vocab:
    def __init__(self, entries):
        self.entries = list(entries)
        self.index = {e: i for i, e in enumerate(self.entries)}
        if len(self.index) != len(self.entries):
            raise ValueError("duplicate vocabulary entries")
        for s in SPECIALS:
            if s not in self.index:
                raise ValueError("vocabulary is missing %r" % s)

    @classmethod
    def from_items(cls, items):
        seen = sorted(set(items) - set(SPECIALS))
        return cls(list(SPECIALS) + seen)

    def __len__(self):
        return len(self.entries)

    def id_of(self, item):
        return self.index.get(item, self.index[UNK])

    def save(self, path):
        with open(path, "w", encoding="utf-8") as handle:
            for i, e in enumerate(self.entries):
                handle.write("%d\t%s\n" % (i, e))

    @classmethod
    def load(cls, path):
        entries = []
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                line = line.rstrip("\n")
                if not line:
                    continue
                _, _, entry = line.partition("\t")
                entries.append(entry)
        return cls(entries)
