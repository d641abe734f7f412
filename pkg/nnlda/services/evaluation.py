"""
Evaluation tasks: held-out log-perplexity, topic grouping, rating
classification, comment generation and per-word bound comparison.

Rating classification uses a built-in multinomial logistic regression on
normalized topic proportions; the comparison of interest is between feature
sets, so one fixed classifier serves every model.
"""
import logging
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from nnlda.errors import ConfigurationError, RangeError, ShapeError, VocabularyError
from nnlda.models.corpus import Corpus
from nnlda.models.reports import ClassificationReport, GroupingReport
from nnlda.models.settings import ClassifierConfig
from nnlda.models.topic_model import FixedPrior, TopicModel
from nnlda.services.classifier import cross_validate_features, score_fold
from nnlda.services.corpus_io import kfold_indices
from nnlda.services.inference import infer, train
from nnlda.services.priors import prior_alphas

logger = logging.getLogger(__name__)

PERPLEXITY_METHODS = ("elbo", "plugin")


def log_perplexity(model: TopicModel, test: Corpus, method: str = "elbo") -> float:
    """
    Per-word negative log-likelihood of ``test`` under ``model``.

    ``elbo`` (default) divides the summed per-document ELBO of a fresh E-step
    by the word count; ``plugin`` scores each word with the posterior-mean
    mixture (eta / sum eta) @ beta. Lower is better.
    """
    if method not in PERPLEXITY_METHODS:
        raise ConfigurationError(f"unknown perplexity method '{method}'")
    state, elbos = infer(model, test)
    num_words = float(test.num_words)
    if method == "elbo":
        return float(-elbos.sum() / num_words)
    doc_index, word_ids, counts = test.tokens()
    theta = state.eta / state.eta.sum(axis=1, keepdims=True)
    word_probs = np.einsum("nk,kn->n", theta[doc_index], model.beta[:, word_ids])
    return float(-(counts * np.log(word_probs)).sum() / num_words)


def topic_assignments(model: TopicModel, corpus: Corpus) -> np.ndarray:
    """Most probable topic of each document under its variational posterior."""
    state, _ = infer(model, corpus)
    return np.argmax(state.eta, axis=1)


def grouping_from_assignments(groups: Sequence[str], topics: Sequence[int], K: int) -> GroupingReport:
    """
    Score topic assignments against groups after matching each group to one
    topic so that the matched diagonal of the confusion matrix is maximal.
    Documents in topics matched to no group count as errors.
    """
    group_names = sorted(set(groups))
    if len(group_names) > K:
        raise ConfigurationError(f"{len(group_names)} groups cannot be matched to {K} topics")
    topics = np.asarray(topics, dtype=np.int64)
    if topics.size != len(groups):
        raise ShapeError(f"{topics.size} topic assignments for {len(groups)} documents")
    if topics.size and (topics.min() < 0 or topics.max() >= K):
        raise RangeError(f"topic assignments must lie in [0, {K})")

    row = {g: i for i, g in enumerate(group_names)}
    confusion = np.zeros((len(group_names), K), dtype=np.int64)
    np.add.at(confusion, ([row[g] for g in groups], topics), 1)
    group_idx, topic_idx = linear_sum_assignment(-confusion)
    topic_for_group = np.empty(len(group_names), dtype=np.int64)
    topic_for_group[group_idx] = topic_idx

    tp = confusion[np.arange(len(group_names)), topic_for_group].astype(np.float64)
    predicted = confusion.sum(axis=0)[topic_for_group].astype(np.float64)
    support = confusion.sum(axis=1).astype(np.float64)
    precision = np.divide(tp, predicted, out=np.zeros_like(tp), where=predicted > 0)
    recall = np.divide(tp, support, out=np.zeros_like(tp), where=support > 0)
    denom = precision + recall
    f1 = np.divide(2 * precision * recall, denom, out=np.zeros_like(tp), where=denom > 0)
    return GroupingReport(
        groups=group_names,
        topic_for_group=topic_for_group.tolist(),
        confusion=confusion.tolist(),
        macro_precision=float(precision.mean()),
        macro_recall=float(recall.mean()),
        macro_f1=float(f1.mean()),
        micro_f1=float(tp.sum() / max(len(groups), 1)),
    )


def grouping_metrics(model: TopicModel, corpus: Corpus) -> GroupingReport:
    """Macro precision/recall/F1 and micro-F1 of argmax-topic grouping."""
    if not corpus.has_groups:
        raise ConfigurationError("grouping needs a group label on every document")
    groups = [doc.group for doc in corpus.documents]
    report = grouping_from_assignments(groups, topic_assignments(model, corpus), model.K)
    logger.info(f"Grouping macro-F1 {report.macro_f1:.4f}, micro-F1 {report.micro_f1:.4f}")
    return report


def topic_features(model: TopicModel, corpus: Corpus) -> np.ndarray:
    """Posterior-mean topic proportions eta / sum(eta), one row per document."""
    state, _ = infer(model, corpus)
    return state.eta / state.eta.sum(axis=1, keepdims=True)


def classify_ratings(model: TopicModel, corpus: Corpus, num_folds: int = 10, seed: int = 0,
                     classifier_config: Optional[ClassifierConfig] = None, retrain: bool = True) -> ClassificationReport:
    """
    k-fold rating classification on topic features.

    With ``retrain`` (default) a topic model of the same kind, K, seed and
    config is fitted on each fold's training part, and both parts are
    featurized with it; otherwise ``model`` featurizes every fold.
    """
    if not corpus.has_labels:
        raise ConfigurationError("classification needs a label on every document")
    labels = np.asarray([doc.label for doc in corpus.documents])
    if not retrain:
        scores = cross_validate_features(topic_features(model, corpus), labels, num_folds, seed, classifier_config)
        return ClassificationReport(fold_scores=scores, mean_macro_f1=float(np.mean(scores)))

    all_classes = sorted(set(labels.tolist()))
    scores: List[float] = []
    for fold, test_idx in enumerate(kfold_indices(corpus.num_docs, num_folds, seed)):
        train_mask = np.ones(corpus.num_docs, dtype=bool)
        train_mask[test_idx] = False
        train_idx = np.flatnonzero(train_mask)
        train_part, test_part = corpus.subset(train_idx), corpus.subset(test_idx)
        fold_model = train(train_part, model.K, model.prior_kind, model.seed, model.config)
        scores.append(score_fold(topic_features(fold_model, train_part), labels[train_idx].tolist(),
                                 topic_features(fold_model, test_part), labels[test_idx].tolist(),
                                 all_classes, classifier_config, fold))
    return ClassificationReport(fold_scores=scores, mean_macro_f1=float(np.mean(scores)))


def _capped(n: int, V: int, what: str) -> int:
    if n < 1:
        raise RangeError(f"{what} must be at least 1, got {n}")
    if n > V:
        logger.warning(f"{what} {n} exceeds the vocabulary size {V}; using {V}")
        return V
    return n


def _top_ids(scores: np.ndarray, n: int) -> np.ndarray:
    # descending score, ties by ascending word id
    return np.lexsort((np.arange(scores.size), -scores))[:n]


def generate_comment(model: TopicModel, side: Optional[np.ndarray], length: int) -> List[str]:
    """
    The ``length`` highest-scoring words for a side vector, where
    score_j = sum_i (alpha_i / sum alpha) beta_ij and alpha is the prior's
    output for ``side``. Fixed priors ignore ``side``.
    """
    length = _capped(length, model.V, "comment length")
    if side is None:
        if not isinstance(model.prior, FixedPrior):
            raise ConfigurationError(f"a '{model.prior_kind}' model needs a side vector to generate a comment")
        side = np.zeros(model.q)
    side = np.asarray(side, dtype=np.float64).reshape(-1)
    if side.size != model.q:
        raise ShapeError(f"side vector has dimension {side.size}, model expects {model.q}")
    alpha = prior_alphas(model.prior, side.reshape(1, -1))[0]
    scores = (alpha / alpha.sum()) @ model.beta
    return [model.vocabulary.terms[j] for j in _top_ids(scores, length)]


def top_words(model: TopicModel, n: int = 5) -> List[List[str]]:
    """The ``n`` most probable words of every topic."""
    n = _capped(n, model.V, "top-word count")
    return [[model.vocabulary.terms[j] for j in _top_ids(row, n)] for row in model.beta]


def elbo_ratio_report(model_a: TopicModel, model_b: TopicModel, corpus: Corpus) -> float:
    """
    Mean over documents of (ELBO_a - ELBO_b) / N_d. Positive means model_a
    bounds the likelihood of the corpus higher per word.
    """
    if model_a.vocabulary.terms != model_b.vocabulary.terms:
        raise VocabularyError("the two models were trained on different vocabularies")
    if model_a.K != model_b.K:
        raise ShapeError(f"models have different numbers of topics ({model_a.K} vs {model_b.K})")
    _, elbo_a = infer(model_a, corpus)
    _, elbo_b = infer(model_b, corpus)
    return float(np.mean((elbo_a - elbo_b) / corpus.doc_lengths))


def assign_ratings_by_group(corpus: Corpus, ratings: Dict[str, str]) -> Corpus:
    """A copy of ``corpus`` whose labels are looked up from each document's group."""
    if not corpus.has_groups:
        raise ConfigurationError("rating assignment needs a group label on every document")
    unknown = sorted({doc.group for doc in corpus.documents} - set(ratings))
    if unknown:
        raise ConfigurationError(f"no rating given for group(s): {', '.join(unknown)}")
    documents = [doc.model_copy(update={"label": str(ratings[doc.group])}) for doc in corpus.documents]
    return Corpus(vocabulary=corpus.vocabulary, documents=documents, side_schema=corpus.side_schema)
