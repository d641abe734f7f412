"""
Prior side of the EM engine: per-document Dirichlet parameters for each prior
kind, the ELBO prior term with its gradient, and the prior M-steps.
"""
import logging
from typing import Tuple

import numpy as np

from nnlda.errors import NonFiniteError, ShapeError
from nnlda.models.settings import TrainConfig
from nnlda.models.topic_model import AdamState, FixedPrior, LogLinearPrior, NeuralPrior, PriorSpec
from nnlda.services.neural_prior import adam_step, backward, forward, init_kaiming
from nnlda.utils.numerics import digamma, dirichlet_expectation, lgamma

logger = logging.getLogger(__name__)

LOG_ALPHA_CLIP = 30.0
MAX_BACKTRACKS = 30


def initial_prior(prior_kind: str, K: int, q: int, seed: int, config: TrainConfig) -> PriorSpec:
    """Starting prior of each kind; dmr starts at the plain LDA value."""
    if prior_kind == "lda":
        return FixedPrior(alpha=np.full(K, config.lda_alpha))
    if prior_kind == "lda-opt":
        return FixedPrior(alpha=np.full(K, config.lda_alpha), optimize=True)
    if prior_kind == "dmr":
        lam = np.zeros((K, q + 1))
        lam[:, -1] = np.log(config.lda_alpha)
        return LogLinearPrior(lam=lam)
    net = init_kaiming(q, config.hidden_dim, K, seed, config.alpha_floor)
    opt = AdamState.for_net(net, learning_rate=config.learning_rate, weight_decay=config.weight_decay,
                            beta1=config.beta1, beta2=config.beta2, epsilon=config.epsilon)
    return NeuralPrior(net=net, opt=opt)


def _augment(side_matrix: np.ndarray) -> np.ndarray:
    return np.hstack([side_matrix, np.ones((side_matrix.shape[0], 1))])


def _loglinear_alphas(lam: np.ndarray, side_matrix: np.ndarray) -> np.ndarray:
    return np.exp(np.clip(_augment(side_matrix) @ lam.T, -LOG_ALPHA_CLIP, LOG_ALPHA_CLIP))


def prior_alphas(prior: PriorSpec, side_matrix: np.ndarray) -> np.ndarray:
    """M x K matrix whose row d is alpha_d."""
    side_matrix = np.asarray(side_matrix, dtype=np.float64)
    num_docs = side_matrix.shape[0]
    if isinstance(prior, FixedPrior):
        return np.tile(prior.alpha, (num_docs, 1))
    if isinstance(prior, LogLinearPrior):
        if prior.lam.shape[1] != side_matrix.shape[1] + 1:
            raise ShapeError(f"log-linear prior expects q={prior.lam.shape[1] - 1}, got {side_matrix.shape[1]}")
        return _loglinear_alphas(prior.lam, side_matrix)
    alpha, _ = forward(prior.net, side_matrix)
    return alpha


def prior_term(alpha: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """Per-document E_q[log p(theta | alpha_d)]."""
    elog = dirichlet_expectation(eta)
    return lgamma(alpha.sum(axis=1)) - lgamma(alpha).sum(axis=1) + ((alpha - 1.0) * elog).sum(axis=1)


def prior_gradient(alpha: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """d prior_term / d alpha_d = digamma(sum alpha) - digamma(alpha) + digamma(eta) - digamma(sum eta)."""
    return digamma(alpha.sum(axis=1))[:, np.newaxis] - digamma(alpha) + dirichlet_expectation(eta)


def _ascend_log_params(params: np.ndarray, step: float, objective, gradient) -> np.ndarray:
    """
    One gradient-ascent step from ``params``, halving the step until the
    objective does not decrease.
    """
    base_value = objective(params)
    grad = gradient(params)
    if not np.all(np.isfinite(grad)):
        raise NonFiniteError("non-finite prior gradient")
    for _ in range(MAX_BACKTRACKS):
        candidate = params + step * grad
        value = objective(candidate)
        if np.isfinite(value) and value >= base_value:
            return candidate
        step *= 0.5
    logger.debug("Prior step found no ascent; keeping current parameters")
    return params


def _step_shared_alpha(prior: FixedPrior, eta: np.ndarray, config: TrainConfig) -> FixedPrior:
    num_docs = eta.shape[0]

    def objective(log_alpha):
        return float(prior_term(np.tile(np.exp(log_alpha), (num_docs, 1)), eta).sum())

    def gradient(log_alpha):
        alpha = np.tile(np.exp(log_alpha), (num_docs, 1))
        return prior_gradient(alpha, eta).sum(axis=0) * np.exp(log_alpha)

    log_alpha = _ascend_log_params(np.log(prior.alpha), config.prior_step, objective, gradient)
    return prior.model_copy(update={"alpha": np.exp(log_alpha)})


def _step_loglinear(prior: LogLinearPrior, side_matrix: np.ndarray, eta: np.ndarray,
                    config: TrainConfig) -> LogLinearPrior:
    features = _augment(side_matrix)
    variance = config.dmr_prior_variance

    def objective(lam):
        alpha = _loglinear_alphas(lam, side_matrix)
        return float(prior_term(alpha, eta).sum() - 0.5 * np.sum(lam * lam) / variance)

    def gradient(lam):
        alpha = _loglinear_alphas(lam, side_matrix)
        return (prior_gradient(alpha, eta) * alpha).T @ features - lam / variance

    lam = _ascend_log_params(prior.lam, config.dmr_step, objective, gradient)
    return prior.model_copy(update={"lam": lam})


def _epoch_neural(prior: NeuralPrior, side_matrix: np.ndarray, eta: np.ndarray, batch_size: int,
                  rng: np.random.Generator) -> Tuple[NeuralPrior, int]:
    net, opt = prior.net, prior.opt
    order = rng.permutation(eta.shape[0])
    skipped = 0
    for start in range(0, order.size, batch_size):
        batch = order[start:start + batch_size]
        alpha, cache = forward(net, side_matrix[batch])
        grad_alpha = prior_gradient(alpha, eta[batch])
        if not np.all(np.isfinite(grad_alpha)):
            skipped += 1
            logger.warning(f"Skipping minibatch at offset {start}: non-finite prior gradient")
            continue
        # ADAM minimizes, the ELBO is maximized
        grads = backward(net, cache, -grad_alpha)
        try:
            net, opt = adam_step(net, grads, opt)
        except NonFiniteError as e:
            skipped += 1
            logger.warning(f"Skipping minibatch at offset {start}: {e}")
    return NeuralPrior(net=net, opt=opt), skipped


def m_step_prior(prior: PriorSpec, side_matrix: np.ndarray, eta: np.ndarray, batch_size: int,
                 config: TrainConfig, rng: np.random.Generator) -> PriorSpec:
    """
    Update the prior given converged variational parameters ``eta``.

    Fixed priors are returned unchanged unless ``optimize`` is set; the
    log-linear prior takes one full-batch ascent step; the neural prior runs
    ``config.prior_epochs`` epochs of ADAM minibatches of ``batch_size`` documents.
    """
    if isinstance(prior, FixedPrior):
        if not prior.optimize:
            return prior
        try:
            return _step_shared_alpha(prior, eta, config)
        except NonFiniteError as e:
            logger.warning(f"Shared alpha update skipped: {e}")
            return prior
    if isinstance(prior, LogLinearPrior):
        try:
            return _step_loglinear(prior, np.asarray(side_matrix, dtype=np.float64), eta, config)
        except NonFiniteError as e:
            logger.warning(f"Log-linear prior update skipped: {e}")
            return prior
    for _ in range(config.prior_epochs):
        prior, skipped = _epoch_neural(prior, np.asarray(side_matrix, dtype=np.float64), eta, batch_size, rng)
        if skipped:
            logger.warning(f"{skipped} minibatch(es) skipped in neural prior epoch")
    return prior
