import logging
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple

import pandas as pd

from nnlda.models.reports import EvalReport

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["model", "K", "seed", "task", "metric", "value"]
SWEEP_COLUMNS = ["model", "K", "seed", "final_elbo", "rounds", "path"]


def report_rows(report: EvalReport) -> List[Dict[str, object]]:
    """
    Flatten a report into one row per metric, keyed by (model, K, seed).
    Generated comments and top words are written as space-joined strings.
    """
    key = {"model": report.model, "K": report.K, "seed": report.seed}
    rows: List[Tuple[str, str, object]] = []
    if report.log_perplexity is not None:
        rows.append(("perplexity", "log_perplexity", report.log_perplexity))
    if report.grouping is not None:
        g = report.grouping
        rows += [("grouping", "macro_precision", g.macro_precision),
                 ("grouping", "macro_recall", g.macro_recall),
                 ("grouping", "macro_f1", g.macro_f1),
                 ("grouping", "micro_f1", g.micro_f1)]
    if report.classification is not None:
        c = report.classification
        rows += [("classify", f"fold_{i}_macro_f1", score) for i, score in enumerate(c.fold_scores)]
        rows.append(("classify", "mean_macro_f1", c.mean_macro_f1))
    for comment in report.comments or []:
        rows.append(("gencomment", comment.side, " ".join(comment.words)))
    if report.elbo_ratio is not None:
        rows.append(("compare", "mean_per_word_elbo_difference", report.elbo_ratio))
    for i, words in enumerate(report.top_words or []):
        rows.append(("topwords", f"topic_{i}", " ".join(words)))
    return [{**key, "task": task, "metric": metric, "value": value} for task, metric, value in rows]


def write_rows(rows: Iterable[Dict[str, object]], path, columns: Sequence[str] = REPORT_COLUMNS) -> Path:
    """Write rows as CSV with a stable column order, replacing any existing file."""
    path = Path(path)
    frame = pd.DataFrame.from_records(list(rows), columns=list(columns))
    frame.to_csv(path, index=False, encoding="utf-8")
    logger.info(f"Wrote {len(frame)} row(s) to {path}")
    return path


def format_report(report: EvalReport) -> str:
    """Human-readable summary of a report."""
    title = f"{report.model} (K={report.K}, seed={report.seed})"
    lines = [f"# {title}", "-" * (len(title) + 2)]
    if report.log_perplexity is not None:
        lines.append(f"**Log-perplexity:** {report.log_perplexity:.6f}")
    if report.grouping is not None:
        g = report.grouping
        lines.append(f"**Grouping:** macro-P {g.macro_precision:.4f}  macro-R {g.macro_recall:.4f}  "
                     f"macro-F1 {g.macro_f1:.4f}  micro-F1 {g.micro_f1:.4f}")
        for group, topic, counts in zip(g.groups, g.topic_for_group, g.confusion):
            lines.append(f"  {group} -> topic {topic}: {counts}")
    if report.classification is not None:
        c = report.classification
        folds = ", ".join(f"{s:.4f}" for s in c.fold_scores)
        lines.append(f"**Classification:** mean macro-F1 {c.mean_macro_f1:.4f} (folds: {folds})")
    for comment in report.comments or []:
        lines.append(f"**Comment [{comment.side}]:** {' '.join(comment.words)}")
    if report.elbo_ratio is not None:
        lines.append(f"**Per-word ELBO difference:** {report.elbo_ratio:+.6f}")
    for i, words in enumerate(report.top_words or []):
        lines.append(f"Topic {i}: {' '.join(words)}")
    return "\n".join(lines)
