"""Command-line entry points: build-lexicon, train, parse, eval, analyze.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
Flag values override config-file values, which override defaults; the config
file is flat "key = value" lines with '#' comments.
"""

import argparse
import concurrent.futures
import sys

from . import evaluate
from . import lexicon as lex
from . import trainer
from . import treebank
from .errors import DataError, NumericError
from .model import Model, ModelConfig

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def read_config_file(path):
    values = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError("%s:%d: expected 'key = value'" % (path, lineno))
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def apply_config_file(args, argv):
    if not getattr(args, "config", None):
        return args
    values = read_config_file(args.config)
    # flags explicitly given on the command line win over the file
    given = {a.split("=", 1)[0].lstrip("-").replace("-", "_")
             for a in argv if a.startswith("--")}
    for key, raw in values.items():
        if not hasattr(args, key):
            raise UsageError("unknown config key %r" % key)
        if key in given:
            continue
        current = getattr(args, key)
        if isinstance(current, bool):
            setattr(args, key, raw.lower() in ("1", "true", "yes"))
        elif isinstance(current, int):
            setattr(args, key, int(raw))
        elif isinstance(current, float):
            setattr(args, key, float(raw))
        elif isinstance(current, list):
            setattr(args, key, [type(current[0])(v) for v in raw.split(",")])
        else:
            setattr(args, key, raw)
    return args


def _load_treebanks(paths):
    parsed = []
    for path in paths:
        parsed.extend(treebank.read_treebank(path))
    return parsed


def _corpus(parsed):
    return [[t.surface for t in tokens] for _, tokens in parsed]


def cmd_build_lexicon(args):
    parsed = _load_treebanks(args.input)
    lexicon = lex.build_lexicon(_corpus(parsed), n_max=args.nmax,
                                min_freq=args.min_freq, threshold=args.threshold)
    lexicon.save(args.output)
    print("wrote %d n-grams (n <= %d, freq >= %d) to %s"
          % (len(lexicon), lexicon.n_max, lexicon.min_freq, args.output))
    return 0


def _model_config(args):
    return ModelConfig(mode=args.mode, d_model=args.d_model, layers=args.layers,
                       heads=args.heads, d_ff=args.d_ff, max_len=args.max_len,
                       use_pos=args.use_pos, d_pos=args.d_pos,
                       d_hidden=args.d_hidden, seed=args.seed)


def cmd_train(args):
    train_set = _load_treebanks(args.train)
    dev_set = _load_treebanks(args.dev)
    if args.pos_file:
        treebank.apply_pos_sidecar(train_set + dev_set, treebank.read_pos_sidecar(args.pos_file))
    if args.lexicon:
        lexicon = lex.NGramLexicon.load(args.lexicon)
    else:
        lexicon = lex.build_lexicon(_corpus(train_set) + _corpus(dev_set),
                                    n_max=args.nmax, min_freq=args.min_freq,
                                    threshold=args.threshold)
    config = trainer.TrainConfig(learning_rates=tuple(args.learning_rate),
                                 batch_size=args.batch_size, max_epochs=args.epochs,
                                 patience=args.patience, seed=args.seed,
                                 stop_f1=args.stop_f1)
    state = trainer.sweep(train_set, dev_set, lexicon, _model_config(args), config,
                          out_dir=args.out, log=print)
    print("best dev F1 %.2f (epoch %d, lr %g); checkpoint at %s"
          % (state.best_dev_f1, state.best_epoch, state.learning_rate, args.out))
    return 0


def _parse_inputs(args, model):
    """Yield (tokens, pos_tags) for parsing, from a treebank or raw text."""
    if args.raw:
        sentences = []
        with open(args.input, encoding="utf-8") as handle:
            for line in handle:
                if line.strip():
                    sentences.append([treebank.Token(t) for t in line.split()])
    else:
        sentences = [tokens for _, tokens in treebank.read_treebank(args.input)]
    if args.pos_file:
        tag_lines = treebank.read_pos_sidecar(args.pos_file)
        parsed = [(None, tokens) for tokens in sentences]
        treebank.apply_pos_sidecar(parsed, tag_lines)
    use_pos = model.enc_config.use_pos
    return [(tokens, trainer.pos_tags(tokens, use_pos)) for tokens in sentences]


def cmd_parse(args):
    model = Model.load(args.model)
    jobs = _parse_inputs(args, model)
    if args.threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=args.threads) as pool:
            trees = list(pool.map(lambda job: model.parse(*job), jobs))
    else:
        trees = [model.parse(tokens, tags) for tokens, tags in jobs]
    out = open(args.output, "w", encoding="utf-8") if args.output else sys.stdout
    try:
        for tree, (tokens, _) in zip(trees, jobs):
            out.write(treebank.write_tree(tree, tokens) + "\n")
    finally:
        if args.output:
            out.close()
    return 0


def cmd_eval(args):
    gold = _load_treebanks([args.gold])
    pred = _load_treebanks([args.pred])
    report = evaluate.score_trees([t for t, _ in gold], [t for t, _ in pred])
    print("brackets: matched %d / predicted %d / gold %d"
          % (report.matched, report.predicted, report.gold))
    print("precision %.2f\trecall %.2f\tF1 %.2f\tcomplete match %.2f"
          % (report.precision, report.recall, report.f1, report.complete_match))
    if args.tsv:
        with open(args.tsv, "w", encoding="utf-8") as handle:
            handle.write("matched\tpredicted\tgold\tP\tR\tF1\tmatch\n")
            handle.write("%d\t%d\t%d\t%.2f\t%.2f\t%.2f\t%.2f\n"
                         % (report.matched, report.predicted, report.gold,
                            report.precision, report.recall, report.f1,
                            report.complete_match))
    return 0


def cmd_analyze(args):
    model = Model.load(args.model)
    parsed = _load_treebanks([args.input])
    if args.pos_file:
        treebank.apply_pos_sidecar(parsed, treebank.read_pos_sidecar(args.pos_file))
    use_pos = model.enc_config.use_pos

    if args.buckets:
        thresholds = list(range(args.min_length, args.max_length + 1, args.length_step))
        jobs = [(tokens, trainer.pos_tags(tokens, use_pos)) for _, tokens in parsed]
        if args.threads > 1:
            with concurrent.futures.ThreadPoolExecutor(max_workers=args.threads) as pool:
                pred = list(pool.map(lambda job: model.parse(*job), jobs))
        else:
            pred = [model.parse(tokens, tags) for tokens, tags in jobs]
        buckets = evaluate.bucketed_f1([t for t, _ in parsed], pred, thresholds)
        with open(args.buckets, "w", encoding="utf-8") as handle:
            handle.write("min_length\tsentences\tP\tR\tF1\tmatch\n")
            for row in evaluate.bucket_rows(buckets):
                handle.write("\t".join(str(v) for v in row) + "\n")
        print("wrote length buckets to %s" % args.buckets)

    if args.attention:
        sentences = [(tokens, trainer.pos_tags(tokens, use_pos)) for _, tokens in parsed]
        ranked, lengths = evaluate.attention_report(model, sentences, top_k=args.top_k)
        with open(args.attention, "w", encoding="utf-8") as handle:
            handle.write("ngram\tlength\tavg_weight\tcount\n")
            for ngram, length, weight, count in ranked:
                handle.write("%s\t%d\t%.6f\t%d\n" % (ngram, length, weight, count))
        with open(args.attention + ".lengths", "w", encoding="utf-8") as handle:
            handle.write("length\tavg_weight\tcount\n")
            for length, weight, count in lengths:
                handle.write("%d\t%.6f\t%d\n" % (length, weight, count))
        print("wrote attention report to %s" % args.attention)

    if not args.buckets and not args.attention:
        raise UsageError("analyze needs --buckets and/or --attention")
    return 0


def _add_common(sub):
    sub.add_argument("--config", help="flat key=value config file")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--threads", type=int, default=1,
                     help="sentence-level parallelism (default 1, reproducible)")


def _add_lexicon_flags(sub):
    sub.add_argument("--nmax", type=int, default=5, help="max n-gram length")
    sub.add_argument("--min-freq", type=int, default=2, help="min segment frequency")
    sub.add_argument("--threshold", type=float, default=0.0,
                     help="PMI below this splits adjacent tokens")


def _add_model_flags(sub):
    sub.add_argument("--mode", choices=("baseline", "sa", "catsa"), default="catsa")
    sub.add_argument("--d-model", type=int, default=64)
    sub.add_argument("--layers", type=int, default=3)
    sub.add_argument("--heads", type=int, default=4)
    sub.add_argument("--d-ff", type=int, default=128)
    sub.add_argument("--max-len", type=int, default=64)
    sub.add_argument("--use-pos", action="store_true", help="concatenate POS embeddings")
    sub.add_argument("--d-pos", type=int, default=16)
    sub.add_argument("--d-hidden", type=int, default=250)


def build_parser():
    parser = _Parser(prog="spanparser",
                     description="Chart parser with n-gram span attention")
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("build-lexicon", help="PMI-segment a corpus into an n-gram lexicon")
    sub.add_argument("--input", nargs="+", required=True, help="treebank file(s)")
    sub.add_argument("--output", required=True, help="lexicon TSV path")
    _add_lexicon_flags(sub)
    _add_common(sub)
    sub.set_defaults(func=cmd_build_lexicon)

    sub = commands.add_parser("train", help="train a parser")
    sub.add_argument("--train", nargs="+", required=True)
    sub.add_argument("--dev", nargs="+", required=True)
    sub.add_argument("--lexicon", help="prebuilt lexicon TSV (else built from train+dev)")
    sub.add_argument("--out", required=True, help="checkpoint directory")
    sub.add_argument("--pos-file", help="predicted-POS sidecar for train+dev")
    sub.add_argument("--learning-rate", type=float, nargs="+",
                     default=[5e-5, 1e-5, 5e-6],
                     help="one or more rates; best dev F1 wins")
    sub.add_argument("--batch-size", type=int, default=8)
    sub.add_argument("--epochs", type=int, default=50)
    sub.add_argument("--patience", type=int, default=10)
    sub.add_argument("--stop-f1", type=float, default=None,
                     help="stop once dev F1 reaches this value")
    _add_lexicon_flags(sub)
    _add_model_flags(sub)
    _add_common(sub)
    sub.set_defaults(func=cmd_train)

    sub = commands.add_parser("parse", help="parse sentences with a checkpoint")
    sub.add_argument("--model", required=True, help="checkpoint directory")
    sub.add_argument("--input", required=True, help="treebank or raw text file")
    sub.add_argument("--raw", action="store_true", help="input is whitespace-tokenized text")
    sub.add_argument("--pos-file", help="predicted-POS sidecar")
    sub.add_argument("--output", help="write trees here instead of stdout")
    _add_common(sub)
    sub.set_defaults(func=cmd_parse)

    sub = commands.add_parser("eval", help="score predicted trees against gold")
    sub.add_argument("--gold", required=True)
    sub.add_argument("--pred", required=True)
    sub.add_argument("--tsv", help="also write a TSV report")
    _add_common(sub)
    sub.set_defaults(func=cmd_eval)

    sub = commands.add_parser("analyze", help="length buckets and attention reports")
    sub.add_argument("--model", required=True)
    sub.add_argument("--input", required=True, help="gold treebank to analyze on")
    sub.add_argument("--pos-file")
    sub.add_argument("--buckets", help="write F1-by-minimum-length TSV here")
    sub.add_argument("--min-length", type=int, default=5)
    sub.add_argument("--max-length", type=int, default=50)
    sub.add_argument("--length-step", type=int, default=5)
    sub.add_argument("--attention", help="write ranked attention-weight TSV here")
    sub.add_argument("--top-k", type=int, default=50, help="n-grams per length group")
    _add_common(sub)
    sub.set_defaults(func=cmd_analyze)

    return parser


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args = apply_config_file(args, argv)
        return args.func(args)
    except UsageError as exc:
        print("usage error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print("missing file: %s" % exc, file=sys.stderr)
        return EXIT_DATA
    except DataError as exc:
        print("data error: %s" % exc, file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print("numeric failure: %s" % exc, file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
