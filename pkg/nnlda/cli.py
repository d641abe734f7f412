"""
Command-line surface: synth, train, eval {perplexity, grouping, classify,
gencomment, compare} and topwords.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from pydantic import ValidationError

from nnlda.config import configs
from nnlda.errors import ConfigurationError, NnldaError
from nnlda.models.reports import EvalReport, GeneratedComment
from nnlda.models.settings import default_synthetic_config, default_train_config
from nnlda.models.topic_model import PRIOR_KINDS, SIDE_CONDITIONED, TopicModel
from nnlda.services import evaluation
from nnlda.services.corpus_io import encode_side, ingest_csv, parse_side, write_csv
from nnlda.services.inference import train
from nnlda.services.model_store import load_model, save_model
from nnlda.services.synthetic import generate_synthetic
from nnlda.utils.export_utils import SWEEP_COLUMNS, format_report, report_rows, write_rows

logger = logging.getLogger(__name__)


def parse_topics(text: str) -> List[int]:
    """"4" -> [4]; "4..6" -> [4, 5, 6] (inclusive)."""
    try:
        if ".." in text:
            low, high = (int(part) for part in text.split("..", 1))
            if low > high:
                raise ValueError
            return list(range(low, high + 1))
        return [int(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' is not a topic count or an A..B range") from None


def parse_seeds(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' is not a comma-separated list of seeds") from None


def _columns(text: Optional[str]) -> List[str]:
    return [c.strip() for c in (text or "").split(",") if c.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nnlda", description="LDA, DMR and neural-prior LDA toolkit")
    commands = parser.add_subparsers(dest="command", required=True)

    synth = commands.add_parser("synth", help="write the synthetic review corpus as CSV")
    synth.add_argument("--docs", type=int, default=None, help="number of documents")
    synth.add_argument("--min-len", type=int, default=None)
    synth.add_argument("--max-len", type=int, default=None)
    synth.add_argument("--seed", type=int, required=True)
    synth.add_argument("--out", required=True)

    tr = commands.add_parser("train", help="train one model or a sweep over K and seeds")
    tr.add_argument("--corpus", required=True)
    tr.add_argument("--model", choices=PRIOR_KINDS, required=True)
    tr.add_argument("--topics", type=parse_topics, required=True, help="K or an inclusive range A..B")
    seeds = tr.add_mutually_exclusive_group(required=True)
    seeds.add_argument("--seed", type=int)
    seeds.add_argument("--seeds", type=parse_seeds, help="comma-separated seeds")
    tr.add_argument("--out", required=True)
    tr.add_argument("--text-col", default="text")
    tr.add_argument("--side-cols", default=None, help="comma-separated side-data columns")
    tr.add_argument("--label-col", default=None)
    tr.add_argument("--group-col", default=None)
    tr.add_argument("--tol", type=float, default=None, help="relative ELBO change that stops EM")
    tr.add_argument("--max-rounds", type=int, default=None)
    tr.add_argument("--batch-size", type=int, default=None)
    tr.add_argument("--restarts", type=int, default=None, help="random starting points; the best ELBO is kept")

    ev = commands.add_parser("eval", help="evaluate a trained model")
    tasks = ev.add_subparsers(dest="task", required=True)

    def corpus_task(name: str, help_text: str) -> argparse.ArgumentParser:
        task = tasks.add_parser(name, help=help_text)
        task.add_argument("--model", required=True)
        task.add_argument("--corpus", required=True)
        task.add_argument("--text-col", default="text")
        task.add_argument("--out", default=None, help="CSV file for the report rows")
        return task

    perplexity = corpus_task("perplexity", "held-out log-perplexity")
    perplexity.add_argument("--method", choices=evaluation.PERPLEXITY_METHODS, default="elbo")
    grouping = corpus_task("grouping", "topic grouping against ground-truth groups")
    grouping.add_argument("--group-col", default="group")
    classify = corpus_task("classify", "k-fold rating classification on topic features")
    classify.add_argument("--label-col", default="label")
    classify.add_argument("--folds", type=int, default=None)
    classify.add_argument("--cv-seed", type=int, default=0)
    classify.add_argument("--no-retrain", action="store_true", help="featurize every fold with the given model")

    gencomment = tasks.add_parser("gencomment", help="generate a comment from side data")
    gencomment.add_argument("--model", required=True)
    gencomment.add_argument("--side", default=None, help="feature=level pairs, e.g. product=TV,description=price")
    gencomment.add_argument("--len", dest="length", type=int, default=5)
    gencomment.add_argument("--out", default=None)

    compare = tasks.add_parser("compare", help="mean per-word ELBO difference of two models")
    compare.add_argument("--a", required=True)
    compare.add_argument("--b", required=True)
    compare.add_argument("--corpus", required=True)
    compare.add_argument("--text-col", default="text")
    compare.add_argument("--out", default=None)

    topwords = commands.add_parser("topwords", help="print the top words of every topic")
    topwords.add_argument("--model", required=True)
    topwords.add_argument("--n", type=int, default=configs.get("evaluation", {}).get("top_words", 5))
    topwords.add_argument("--out", default=None)
    return parser


def cmd_synth(args) -> int:
    cfg = default_synthetic_config(num_docs=args.docs, min_len=args.min_len, max_len=args.max_len, seed=args.seed)
    corpus = generate_synthetic(cfg)
    write_csv(corpus, args.out)
    print(f"documents: {corpus.num_docs}")
    print(f"mean length: {corpus.num_words / corpus.num_docs:.4f}")
    print(f"vocabulary size: {corpus.vocabulary.size}")
    return 0


def _sweep_path(out: Path, K: int, seed: int) -> Path:
    return out.with_name(f"{out.stem}_K{K}_s{seed}.model")


def cmd_train(args, parser: argparse.ArgumentParser) -> int:
    side_cols = _columns(args.side_cols)
    if args.model in SIDE_CONDITIONED and not side_cols:
        parser.error(f"--model {args.model} needs --side-cols")
    config = default_train_config(em_tol=args.tol, max_rounds=args.max_rounds, batch_size=args.batch_size,
                                  restarts=args.restarts)
    corpus = ingest_csv(args.corpus, args.text_col, side_cols, args.label_col, args.group_col)
    seeds = args.seeds if args.seeds is not None else [args.seed]
    if not seeds:
        parser.error("--seeds needs at least one seed")
    out = Path(args.out)
    sweep = len(args.topics) > 1 or len(seeds) > 1

    summary = []
    for K in args.topics:
        for seed in seeds:
            model = train(corpus, K, args.model, seed, config)
            path = save_model(model, _sweep_path(out, K, seed) if sweep else out)
            rounds = len(model.training_log)
            logger.info(f"K={K} seed={seed}: stopped after {rounds} round(s), ELBO {model.final_elbo:.6f}")
            print(f"{args.model} K={K} seed={seed} rounds={rounds} elbo={model.final_elbo:.6f} -> {path}")
            summary.append({"model": args.model, "K": K, "seed": seed, "final_elbo": model.final_elbo,
                            "rounds": rounds, "path": str(path)})
    if sweep:
        write_rows(summary, out.with_name(f"{out.stem}_sweep.csv"), SWEEP_COLUMNS)
    return 0


def _model_corpus(model: TopicModel, path: str, text_col: str, label_col: Optional[str] = None,
                  group_col: Optional[str] = None):
    return ingest_csv(path, text_col, model.side_schema.names, label_col, group_col,
                      vocabulary=model.vocabulary, side_schema=model.side_schema)


def _emit(report: EvalReport, out: Optional[str]) -> int:
    print(format_report(report))
    if out:
        write_rows(report_rows(report), out)
    return 0


def cmd_eval(args) -> int:
    if args.task == "compare":
        model_a, model_b = load_model(args.a), load_model(args.b)
        corpus = _model_corpus(model_a, args.corpus, args.text_col)
        ratio = evaluation.elbo_ratio_report(model_a, model_b, corpus)
        report = EvalReport(model=f"{model_a.prior_kind}-vs-{model_b.prior_kind}", K=model_a.K,
                            seed=model_a.seed, elbo_ratio=ratio)
        return _emit(report, args.out)

    model = load_model(args.model)
    report = EvalReport(model=model.prior_kind, K=model.K, seed=model.seed)
    if args.task == "perplexity":
        corpus = _model_corpus(model, args.corpus, args.text_col)
        report.log_perplexity = evaluation.log_perplexity(model, corpus, method=args.method)
    elif args.task == "grouping":
        corpus = _model_corpus(model, args.corpus, args.text_col, group_col=args.group_col)
        report.grouping = evaluation.grouping_metrics(model, corpus)
    elif args.task == "classify":
        corpus = _model_corpus(model, args.corpus, args.text_col, label_col=args.label_col)
        folds = args.folds or configs.get("evaluation", {}).get("num_folds", 10)
        report.classification = evaluation.classify_ratings(model, corpus, folds, args.cv_seed,
                                                            retrain=not args.no_retrain)
    elif args.task == "gencomment":
        if args.side:
            side = encode_side(model.side_schema, parse_side(args.side))
        elif model.q:
            raise ConfigurationError(f"model expects side features {', '.join(model.side_schema.names)}; pass --side")
        else:
            side = None
        words = evaluation.generate_comment(model, side, args.length)
        report.comments = [GeneratedComment(side=args.side or "none", words=words)]
    return _emit(report, args.out)


def cmd_topwords(args) -> int:
    model = load_model(args.model)
    words = evaluation.top_words(model, args.n)
    for i, topic in enumerate(words):
        print(f"topic {i}: {' '.join(topic)}")
    if args.out:
        write_rows(report_rows(EvalReport(model=model.prior_kind, K=model.K, seed=model.seed, top_words=words)),
                   args.out)
    return 0


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv`` and run one command; 0 on success, 1 on a domain or I/O failure."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "synth":
            return cmd_synth(args)
        if args.command == "train":
            return cmd_train(args, parser)
        if args.command == "eval":
            return cmd_eval(args)
        return cmd_topwords(args)
    except (NnldaError, ValidationError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 1
