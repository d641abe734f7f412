"""
Multinomial logistic regression and the k-fold harness used for rating
classification from topic features.
"""
import logging
from typing import List, Optional, Sequence

import numpy as np

from nnlda.errors import ConfigurationError, ShapeError
from nnlda.models.settings import ClassifierConfig, default_classifier_config
from nnlda.services.corpus_io import kfold_indices

logger = logging.getLogger(__name__)


class MultinomialLogisticRegression:
    """
    Softmax regression with an intercept, fitted by full-batch gradient descent
    on the mean cross-entropy plus (l2 / 2) * ||W||^2 (intercepts unpenalized).
    """

    def __init__(self, config: Optional[ClassifierConfig] = None):
        self.config = config or default_classifier_config()
        self.classes_: List[str] = []
        self.weights: Optional[np.ndarray] = None
        self.n_iter_ = 0

    @staticmethod
    def _design(X: np.ndarray) -> np.ndarray:
        return np.hstack([X, np.ones((X.shape[0], 1))])

    @staticmethod
    def _softmax(logits: np.ndarray) -> np.ndarray:
        logits = logits - logits.max(axis=1, keepdims=True)
        p = np.exp(logits)
        return p / p.sum(axis=1, keepdims=True)

    def fit(self, X: np.ndarray, y: Sequence[str]) -> "MultinomialLogisticRegression":
        X = np.asarray(X, dtype=np.float64)
        y = [str(label) for label in y]
        if X.ndim != 2 or X.shape[0] != len(y):
            raise ShapeError(f"features of shape {X.shape} do not match {len(y)} labels")
        self.classes_ = sorted(set(y))
        if len(self.classes_) < 2:
            raise ConfigurationError("classification needs at least two label classes")

        index = {c: i for i, c in enumerate(self.classes_)}
        targets = np.zeros((len(y), len(self.classes_)))
        targets[np.arange(len(y)), [index[label] for label in y]] = 1.0
        design = self._design(X)
        weights = np.zeros((design.shape[1], len(self.classes_)))
        penalty = np.ones_like(weights)
        penalty[-1] = 0.0

        cfg = self.config
        for self.n_iter_ in range(1, cfg.max_iter + 1):
            probs = self._softmax(design @ weights)
            grad = design.T @ (probs - targets) / len(y) + cfg.l2 * penalty * weights
            weights -= cfg.learning_rate * grad
            if np.max(np.abs(grad)) < cfg.tol:
                break
        else:
            logger.debug(f"Logistic regression stopped at max_iter={cfg.max_iter}")
        self.weights = weights
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if self.weights is None:
            raise ConfigurationError("classifier is not fitted")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] + 1 != self.weights.shape[0]:
            raise ShapeError(f"features of shape {X.shape} do not match the fitted width {self.weights.shape[0] - 1}")
        return self._softmax(self._design(X) @ self.weights)

    def predict(self, X: np.ndarray) -> List[str]:
        return [self.classes_[i] for i in np.argmax(self.predict_proba(X), axis=1)]


def macro_f1(y_true: Sequence[str], y_pred: Sequence[str], classes: Sequence[str]) -> float:
    """Unweighted mean over ``classes`` of per-class F1 (0 where precision and recall are both 0)."""
    y_true = np.asarray([str(v) for v in y_true])
    y_pred = np.asarray([str(v) for v in y_pred])
    if not len(classes):
        raise ConfigurationError("macro_f1 needs at least one class")
    scores = []
    for c in classes:
        tp = float(np.sum((y_true == c) & (y_pred == c)))
        predicted = float(np.sum(y_pred == c))
        actual = float(np.sum(y_true == c))
        precision = tp / predicted if predicted else 0.0
        recall = tp / actual if actual else 0.0
        scores.append(2 * precision * recall / (precision + recall) if precision + recall else 0.0)
    return float(np.mean(scores))


def score_fold(train_X: np.ndarray, train_y: Sequence[str], test_X: np.ndarray, test_y: Sequence[str],
               all_classes: Sequence[str], config: Optional[ClassifierConfig] = None, fold: int = 0) -> float:
    """
    Fit on the train part and return the macro-F1 on the test part. Classes
    absent from the test labels are left out of the average.
    """
    present = sorted(set(str(v) for v in test_y))
    missing = sorted(set(all_classes) - set(present))
    if missing:
        logger.warning(f"Fold {fold}: class(es) {', '.join(missing)} absent from the test labels, excluded from macro-F1")
    clf = MultinomialLogisticRegression(config).fit(train_X, train_y)
    score = macro_f1(test_y, clf.predict(test_X), present)
    logger.info(f"Fold {fold}: macro-F1 {score:.4f}")
    return score


def cross_validate_features(features: np.ndarray, labels: Sequence[str], num_folds: int, seed: int,
                            config: Optional[ClassifierConfig] = None) -> List[float]:
    """Per-fold macro-F1 of the classifier on fixed features."""
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray([str(v) for v in labels])
    if features.shape[0] != labels.size:
        raise ShapeError(f"{features.shape[0]} feature rows for {labels.size} labels")
    all_classes = sorted(set(labels.tolist()))
    scores = []
    for fold, test_idx in enumerate(kfold_indices(labels.size, num_folds, seed)):
        train_mask = np.ones(labels.size, dtype=bool)
        train_mask[test_idx] = False
        scores.append(score_fold(features[train_mask], labels[train_mask].tolist(), features[test_idx],
                                 labels[test_idx].tolist(), all_classes, config, fold))
    return scores
