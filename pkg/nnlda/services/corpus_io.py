import logging
import string
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from nnlda.errors import ConfigurationError, EmptyCorpusError, RangeError, SchemaError
from nnlda.models.corpus import Corpus, Document, SideFeature, SideSchema, Vocabulary

logger = logging.getLogger(__name__)

_EDGE_PUNCTUATION = string.punctuation


def tokenize(text: str) -> List[str]:
    """Lowercase, split on whitespace and strip punctuation at token edges."""
    tokens = []
    for raw in str(text).lower().split():
        token = raw.strip(_EDGE_PUNCTUATION)
        if token:
            tokens.append(token)
    return tokens


def _cell_to_optional_str(value) -> Optional[str]:
    # only blank cells are missing; "NA", "null" or "None" are ordinary values
    if value is None or (isinstance(value, float) and np.isnan(value)):
        return None
    value = str(value)
    return value if value.strip() else None


def _infer_side_schema(frame: pd.DataFrame, side_cols: Sequence[str]) -> SideSchema:
    features = []
    for col in side_cols:
        series = frame[col]
        if pd.api.types.is_numeric_dtype(series) and not pd.api.types.is_bool_dtype(series):
            features.append(SideFeature(name=col))
        else:
            levels = sorted({str(v) for v in series if _cell_to_optional_str(v) is not None})
            features.append(SideFeature(name=col, levels=levels))
    return SideSchema(features=features)


def ingest_csv(path, text_col: str, side_cols: Sequence[str] = (), label_col: Optional[str] = None,
               group_col: Optional[str] = None, vocabulary: Optional[Vocabulary] = None,
               side_schema: Optional[SideSchema] = None) -> Corpus:
    """
    Read a CSV file with one document per row into a Corpus.

    Parameters:
        path (str | Path): CSV file (UTF-8, header row)
        text_col (str): Column holding the document text
        side_cols (Sequence[str]): Side-data columns; text columns are one-hot encoded, numeric ones passed through
        label_col (str | None): Optional label (rating) column
        group_col (str | None): Optional ground-truth group column
        vocabulary (Vocabulary | None): Encode against this vocabulary instead of building one; unseen words raise
        side_schema (SideSchema | None): Encode against this schema instead of inferring one; unseen levels raise

    Returns:
        Corpus: Rows with blank text are skipped; their number is kept in ``skipped_rows``
    """
    side_cols = list(side_cols or [])
    string_cols = {text_col: str}
    for col in (label_col, group_col):
        if col:
            string_cols[col] = str
    frame = pd.read_csv(path, dtype=string_cols, keep_default_na=False, na_values=[""], encoding="utf-8")

    required = [text_col, *side_cols] + [c for c in (label_col, group_col) if c]
    for col in required:
        if col not in frame.columns:
            raise SchemaError(f"column '{col}' is missing from {path}")

    token_lists: List[List[str]] = []
    rows: List[int] = []
    skipped = 0
    for row_number, text in enumerate(frame[text_col].tolist()):
        tokens = tokenize(text) if _cell_to_optional_str(text) is not None else []
        if not tokens:
            skipped += 1
            continue
        token_lists.append(tokens)
        rows.append(row_number)

    if skipped:
        logger.info(f"Skipped {skipped} row(s) with empty text in {path}")
    if not rows:
        raise EmptyCorpusError(f"no usable rows in {path}")

    frame = frame.iloc[rows].reset_index(drop=True)
    if vocabulary is None:
        vocabulary = Vocabulary(terms=sorted({t for tokens in token_lists for t in tokens}))
    if side_schema is None:
        side_schema = _infer_side_schema(frame, side_cols)
    elif side_schema.names != side_cols:
        raise SchemaError(f"side columns {side_cols} do not match the schema {side_schema.names}")

    documents = []
    for i, tokens in enumerate(token_lists):
        values: Dict[str, object] = {}
        for col in side_cols:
            cell = frame.at[i, col]
            if _cell_to_optional_str(cell) is None:
                raise SchemaError(f"column '{col}' is empty in data row {rows[i] + 1}")
            values[col] = cell
        documents.append(Document.from_tokens(
            [vocabulary.id_of(t) for t in tokens],
            side=side_schema.encode(values),
            label=_cell_to_optional_str(frame.at[i, label_col]) if label_col else None,
            group=_cell_to_optional_str(frame.at[i, group_col]) if group_col else None,
        ))

    corpus = Corpus(vocabulary=vocabulary, documents=documents, side_schema=side_schema)
    corpus.skipped_rows = skipped
    logger.info(f"Loaded {corpus.num_docs} documents, V={vocabulary.size}, q={side_schema.dimension} from {path}")
    return corpus


def corpus_to_frame(corpus: Corpus, text_col: str = "text", label_col: str = "label",
                    group_col: str = "group") -> pd.DataFrame:
    """One row per document; side features decoded back to their level names."""
    terms = corpus.vocabulary.terms
    records = []
    for doc in corpus.documents:
        record = {text_col: " ".join(terms[w] for w, c in zip(doc.word_ids, doc.counts) for _ in range(int(c)))}
        record.update(corpus.side_schema.decode(doc.side))
        if doc.label is not None:
            record[label_col] = doc.label
        if doc.group is not None:
            record[group_col] = doc.group
        records.append(record)
    columns = [text_col, *corpus.side_schema.names]
    columns += [c for c, present in ((label_col, corpus.has_labels), (group_col, corpus.has_groups)) if present]
    return pd.DataFrame.from_records(records, columns=columns)


def write_csv(corpus: Corpus, path, text_col: str = "text", label_col: str = "label",
              group_col: str = "group") -> Path:
    """Write a corpus as CSV so that ingest_csv reads it back unchanged."""
    path = Path(path)
    corpus_to_frame(corpus, text_col, label_col, group_col).to_csv(path, index=False, encoding="utf-8")
    logger.info(f"Wrote {corpus.num_docs} documents to {path}")
    return path


def parse_side(text: str) -> Dict[str, str]:
    """Parse "product=TV,description=price" into a feature -> level mapping."""
    values: Dict[str, str] = {}
    for part in filter(None, (p.strip() for p in str(text).split(","))):
        name, sep, level = part.partition("=")
        if not sep or not name.strip():
            raise SchemaError(f"side assignment '{part}' is not of the form feature=level")
        values[name.strip()] = level.strip()
    return values


def encode_side(schema: SideSchema, values: Dict[str, object]) -> np.ndarray:
    """Side vector for a feature -> level mapping; unknown features or levels raise SchemaError."""
    return schema.encode(values)


def kfold_indices(num_docs: int, num_folds: int, seed: int) -> List[np.ndarray]:
    """Shuffle 0..num_docs-1 and cut it into num_folds parts whose sizes differ by at most one."""
    if num_folds < 2:
        raise ConfigurationError(f"num_folds must be at least 2, got {num_folds}")
    if num_docs < num_folds:
        raise ConfigurationError(f"{num_docs} documents cannot fill {num_folds} folds")
    permutation = np.random.default_rng(seed).permutation(num_docs)
    return [np.sort(part) for part in np.array_split(permutation, num_folds)]


def split(corpus: Corpus, held_out_frac: Optional[float] = None, fold: Optional[int] = None,
          num_folds: Optional[int] = None, seed: int = 0) -> Tuple[Corpus, Corpus]:
    """
    Partition a corpus into (train, test).

    Either give ``fold`` and ``num_folds`` for k-fold cross validation, or
    ``held_out_frac`` for a single random hold-out. Both halves keep the
    corpus vocabulary and side schema.
    """
    if num_folds is not None:
        if fold is None or not 0 <= fold < num_folds:
            raise RangeError(f"fold {fold} is outside [0, {num_folds})")
        folds = kfold_indices(corpus.num_docs, num_folds, seed)
        test_idx = folds[fold]
    elif held_out_frac is not None:
        if not 0.0 < held_out_frac < 1.0:
            raise RangeError(f"held_out_frac must be in (0, 1), got {held_out_frac}")
        if corpus.num_docs < 2:
            raise ConfigurationError("a hold-out split needs at least two documents")
        n_test = int(round(held_out_frac * corpus.num_docs))
        n_test = min(max(n_test, 1), corpus.num_docs - 1)
        permutation = np.random.default_rng(seed).permutation(corpus.num_docs)
        test_idx = np.sort(permutation[:n_test])
    else:
        raise ConfigurationError("split needs either held_out_frac or (fold, num_folds)")

    in_test = np.zeros(corpus.num_docs, dtype=bool)
    in_test[test_idx] = True
    train_idx = np.flatnonzero(~in_test)
    return corpus.subset(train_idx), corpus.subset(test_idx)
