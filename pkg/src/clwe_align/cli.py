"""Command line entry point: align, finetune, evaluate, sweep, heatmap, replay.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
Outputs are computed in full before anything is written, so a failing run
leaves no partial files. Each run writes ``<out>.manifest.json``, which
``replay`` can re-execute.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time

from . import __version__
from .aligner import Alignment, align_corpus, align_matrix, format_alignments, read_alignments, similarity_matrix
from .corpus import CorpusError, read_gold_alignments, read_parallel_corpus, validate_gold
from .embeddings import EmbeddingError, embeddings_text, load_bilingual
from .evaluation import PairCountMismatch, evaluate
from .heatmap import labels_text, ppm_bytes, render
from .objective import ObjectiveConfig
from .trainer import NonFiniteLoss, TrainConfig, finetune

log = logging.getLogger("clwe_align")

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 1, 2, 3


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --- helpers -----------------------------------------------------------------

def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_all(outputs: dict[str, bytes]) -> None:
    for path, data in outputs.items():
        parent = os.path.dirname(os.path.abspath(path))
        os.makedirs(parent, exist_ok=True)
        tmp = path + ".tmp"
        with open(tmp, "wb") as f:
            f.write(data)
        os.replace(tmp, path)


def _manifest(args, inputs: list[str]) -> bytes:
    config = {k: v for k, v in vars(args).items() if k not in ("func", "verbose")}
    doc = {
        "tool": "clwe-align",
        "version": __version__,
        "command": args.command,
        "seed": getattr(args, "seed", None),
        "config": config,
        "inputs": {p: sha256_file(p) for p in inputs if p},
    }
    return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8")


def _load_store(args):
    return load_bilingual(args.src_emb, args.tgt_emb, limit=args.limit, oov_seed=args.oov_seed)


def _objective(args) -> ObjectiveConfig:
    return ObjectiveConfig(tau=args.tau, alpha=args.alpha, position_scale=args.position_scale,
                           use_positions=args.positions == "on")


def _train_config(args) -> TrainConfig:
    return TrainConfig(iterations=args.iterations, learning_rate=args.lr, dropout_rate=args.dropout,
                       seed=args.seed, objective=_objective(args))


def _check_pred_ranges(corpus, predicted: list[Alignment]) -> None:
    for a, pair in zip(predicted, corpus):
        for i, j in a.links:
            if i >= len(pair.source) or j >= len(pair.target):
                raise DataError(f"predicted link {i}-{j} out of range for pair {pair.pair_id}")


# --- commands ----------------------------------------------------------------

def cmd_align(args) -> dict[str, bytes]:
    corpus = read_parallel_corpus(args.corpus)
    store = _load_store(args)
    alignments = align_corpus(store, corpus, args.sym)
    return {
        args.out: format_alignments(alignments).encode("utf-8"),
        args.out + ".manifest.json": _manifest(args, [args.src_emb, args.tgt_emb, args.corpus]),
    }


def cmd_finetune(args) -> dict[str, bytes]:
    corpus = read_parallel_corpus(args.corpus)
    store = _load_store(args)
    config = _train_config(args)
    store, trace = finetune(store, corpus, config)
    alignments = align_corpus(store, corpus, args.sym)
    trace_path = args.trace or args.out + ".trace.tsv"
    outputs = {
        args.out: format_alignments(alignments).encode("utf-8"),
        trace_path: trace.to_tsv(timing=args.timing).encode("utf-8"),
    }
    if args.save_emb:
        for lang in ("src", "tgt"):
            outputs[f"{args.save_emb}.{lang}.vec"] = embeddings_text(store, lang).encode("utf-8")
    outputs[args.out + ".manifest.json"] = _manifest(args, [args.src_emb, args.tgt_emb, args.corpus])
    return outputs


def cmd_evaluate(args) -> dict[str, bytes]:
    corpus = read_parallel_corpus(args.corpus)
    gold = read_gold_alignments(args.gold)
    predicted = read_alignments(args.pred)
    findings = validate_gold(corpus, gold)
    if findings:
        raise DataError("gold does not fit corpus: " + "; ".join(findings))
    if len(predicted) != len(corpus):
        raise DataError(f"{args.pred}: {len(predicted)} lines, corpus has {len(corpus)} pairs")
    _check_pred_ranges(corpus, predicted)
    report = evaluate(predicted, gold).report()
    sys.stdout.write(report)
    outputs = {}
    if args.out:
        outputs[args.out] = report.encode("utf-8")
    manifest_path = args.manifest or (args.out + ".manifest.json" if args.out else None)
    if manifest_path:
        outputs[manifest_path] = _manifest(args, [args.pred, args.gold, args.corpus])
    return outputs


def cmd_sweep(args) -> dict[str, bytes]:
    corpus = read_parallel_corpus(args.corpus)
    gold = read_gold_alignments(args.gold)
    store = _load_store(args)
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"--sizes must be a comma-separated list of integers, got {args.sizes!r}") from None
    if not sizes:
        raise UsageError("--sizes is empty")
    for size in sizes:
        if size < 1 or size > len(corpus):
            raise DataError(f"size {size} outside 1..{len(corpus)} (corpus length)")
        if size > len(gold):
            raise DataError(f"size {size} exceeds gold length {len(gold)}")
    config = _train_config(args)
    rows = ["size\tmethod\tprecision\trecall\tf1\taer"]
    for size in sizes:
        sub = corpus.prefix(size)
        sub_gold = gold[:size]
        base = evaluate(align_corpus(store, sub, args.sym), sub_gold)
        tuned_store, _ = finetune(store.copy(), sub, config)
        tuned = evaluate(align_corpus(tuned_store, sub, args.sym), sub_gold)
        for name, r in (("baseline", base), ("finetuned", tuned)):
            rows.append(f"{size}\t{name}\t{r.precision:.6f}\t{r.recall:.6f}\t{r.f1:.6f}\t{r.aer:.6f}")
    table = "".join(row + "\n" for row in rows)
    sys.stdout.write(table)
    outputs = {}
    if args.out:
        outputs[args.out] = table.encode("utf-8")
    manifest_path = args.manifest or (args.out + ".manifest.json" if args.out else None)
    if manifest_path:
        outputs[manifest_path] = _manifest(args, [args.src_emb, args.tgt_emb, args.corpus, args.gold])
    return outputs


def cmd_heatmap(args) -> dict[str, bytes]:
    if not args.before_emb and not args.after_emb:
        raise UsageError("give --before-emb and/or --after-emb")
    corpus = read_parallel_corpus(args.corpus)
    if not 0 <= args.pair_index < len(corpus):
        raise DataError(f"--pair-index {args.pair_index} out of range 0..{len(corpus) - 1}")
    pair = corpus[args.pair_index]
    sure, possible = set(), set()
    inputs = [args.corpus]
    if args.gold:
        gold = read_gold_alignments(args.gold)
        if args.pair_index >= len(gold):
            raise DataError(f"gold has no line for pair {args.pair_index}")
        sure, possible = gold[args.pair_index].sure, gold[args.pair_index].possible
        inputs.append(args.gold)
    outputs = {}
    for tag, paths in (("before", args.before_emb), ("after", args.after_emb)):
        if not paths:
            continue
        store = load_bilingual(paths[0], paths[1], limit=args.limit, oov_seed=args.oov_seed)
        sim = similarity_matrix(store, pair)
        predicted = align_matrix(sim, "intersection").links
        image = render(sim.values, predicted, sure, possible, args.cell)
        outputs[f"{args.out}.{tag}.ppm"] = ppm_bytes(image)
        inputs.extend(paths)
    outputs[f"{args.out}.labels.txt"] = labels_text(pair.source, pair.target).encode("utf-8")
    outputs[f"{args.out}.manifest.json"] = _manifest(args, inputs)
    return outputs


def cmd_replay(args) -> dict[str, bytes]:
    with open(args.manifest_file, encoding="utf-8") as f:
        doc = json.load(f)
    for path, digest in doc.get("inputs", {}).items():
        if not os.path.exists(path) or sha256_file(path) != digest:
            raise DataError(f"input {path} is missing or changed since the manifest was written")
    config = dict(doc["config"])
    command = config.pop("command", doc["command"])
    replayed = argparse.Namespace(command=command, verbose=False, **config)
    return COMMANDS[command](replayed)


COMMANDS = {
    "align": cmd_align,
    "finetune": cmd_finetune,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
    "heatmap": cmd_heatmap,
    "replay": cmd_replay,
}


# --- argument parsing --------------------------------------------------------

def _add_embedding_flags(p):
    p.add_argument("--limit", type=int, default=None, help="read at most this many vectors per language")
    p.add_argument("--oov-seed", type=int, default=0, help="seed for out-of-vocabulary vectors")


def _add_align_flags(p):
    p.add_argument("--src-emb", required=True)
    p.add_argument("--tgt-emb", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--sym", choices=("intersection", "gdfa"), default="intersection")
    _add_embedding_flags(p)


def _add_train_flags(p):
    p.add_argument("--iterations", type=int, default=500)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--tau", type=float, default=0.001)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--dropout", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--positions", choices=("on", "off"), default="on")
    p.add_argument("--position-scale", type=float, default=1.0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="clwe-align", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("align", help="baseline alignment from the given embeddings")
    _add_align_flags(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("finetune", help="fine-tune embeddings on the corpus, then align")
    _add_align_flags(p)
    _add_train_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--trace", default=None, help="trace path (default: <out>.trace.tsv)")
    p.add_argument("--timing", action="store_true", help="record wall-clock seconds in the trace")
    p.add_argument("--save-emb", default=None, metavar="PREFIX",
                   help="write fine-tuned vectors to PREFIX.src.vec and PREFIX.tgt.vec")

    p = sub.add_parser("evaluate", help="score predicted alignments against gold")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--manifest", default=None)

    p = sub.add_parser("sweep", help="baseline vs fine-tuned scores on corpus prefixes")
    _add_align_flags(p)
    _add_train_flags(p)
    p.add_argument("--gold", required=True)
    p.add_argument("--sizes", default="25,50,100,250,500")
    p.add_argument("--out", default=None)
    p.add_argument("--manifest", default=None)

    p = sub.add_parser("heatmap", help="similarity matrix images for one sentence pair")
    p.add_argument("--corpus", required=True)
    p.add_argument("--pair-index", type=int, required=True)
    p.add_argument("--before-emb", nargs=2, metavar=("SRC", "TGT"), default=None)
    p.add_argument("--after-emb", nargs=2, metavar=("SRC", "TGT"), default=None)
    p.add_argument("--gold", default=None)
    p.add_argument("--cell", type=int, default=24)
    p.add_argument("--out", required=True, help="output prefix")
    _add_embedding_flags(p)

    p = sub.add_parser("replay", help="re-run a command from its manifest")
    p.add_argument("manifest_file")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    started = time.perf_counter()
    try:
        outputs = COMMANDS[args.command](args)
    except UsageError as e:
        print(f"clwe-align: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NonFiniteLoss as e:
        print(f"clwe-align: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, CorpusError, EmbeddingError, PairCountMismatch, OSError, ValueError, KeyError) as e:
        print(f"clwe-align: error: {e}", file=sys.stderr)
        return EXIT_DATA
    _write_all(outputs)
    log.info("%s finished in %.2fs", args.command, time.perf_counter() - started)
    return 0


if __name__ == "__main__":
    sys.exit(main())
