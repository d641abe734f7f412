"""
Variational EM shared by lda, lda-opt, dmr and nnlda.

The E-step runs on every document at once: token-level responsibilities are
rows of a (num_tokens x K) matrix and a sparse (M x num_tokens) incidence
matrix sums them back per document. Each document stops iterating on its own
convergence test, so the result equals running e_step_document document by
document.
"""
import logging
from typing import List, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.special import xlogy

from nnlda.errors import ConfigurationError, NonFiniteError, ShapeError, VocabularyError
from nnlda.models.corpus import Corpus, Document
from nnlda.models.settings import TrainConfig, default_train_config
from nnlda.models.topic_model import (
    PRIOR_KINDS,
    SIDE_CONDITIONED,
    AdamState,
    FixedPrior,
    NeuralPrior,
    PriorSpec,
    TopicModel,
    VariationalState,
)
from nnlda.services.neural_prior import constant_net
from nnlda.services.priors import initial_prior, m_step_prior, prior_alphas, prior_term
from nnlda.utils.numerics import dirichlet_expectation, lgamma

logger = logging.getLogger(__name__)

MIN_TOPICS = 2
MAX_TOPICS = 200


class TokenIndex:
    """Flat token arrays of a corpus plus the document incidence matrix."""

    def __init__(self, doc_index: np.ndarray, word_ids: np.ndarray, counts: np.ndarray, num_docs: int):
        self.doc_index = doc_index
        self.word_ids = word_ids
        self.counts = counts
        self.num_docs = num_docs
        self.lengths = np.bincount(doc_index, weights=counts, minlength=num_docs)
        self.incidence = sparse.csr_matrix(
            (counts, (doc_index, np.arange(doc_index.size))), shape=(num_docs, doc_index.size))

    @classmethod
    def from_corpus(cls, corpus: Corpus) -> "TokenIndex":
        doc_index, word_ids, counts = corpus.tokens()
        return cls(doc_index, word_ids, counts, corpus.num_docs)

    @classmethod
    def from_document(cls, doc: Document) -> "TokenIndex":
        return cls(np.zeros(doc.word_ids.size, dtype=np.int64), doc.word_ids,
                   doc.counts.astype(np.float64), 1)


def _responsibilities(log_beta_tokens: np.ndarray, elog_theta: np.ndarray, doc_index: np.ndarray) -> np.ndarray:
    logits = log_beta_tokens + elog_theta[doc_index]
    logits -= logits.max(axis=1, keepdims=True)
    phi = np.exp(logits)
    phi /= phi.sum(axis=1, keepdims=True)
    return phi


def _check_shapes(alpha: np.ndarray, beta: np.ndarray, tokens: TokenIndex) -> None:
    if alpha.shape != (tokens.num_docs, beta.shape[0]):
        raise ShapeError(f"alpha has shape {alpha.shape}, expected {(tokens.num_docs, beta.shape[0])}")
    if tokens.word_ids.size and tokens.word_ids.max() >= beta.shape[1]:
        raise VocabularyError(f"word id {tokens.word_ids.max()} is outside a vocabulary of size {beta.shape[1]}")


def run_e_step(alpha: np.ndarray, beta: np.ndarray, tokens: TokenIndex, tol: float, max_iter: int,
               eta_init: Optional[np.ndarray] = None) -> VariationalState:
    """
    Coordinate ascent on (phi, eta) for every document.

    phi_{n,i} is proportional to beta_{i,w_n} exp(E[log theta_i]) and
    eta = alpha + sum_n count_n phi_n. A document stops once the mean absolute
    change of its eta falls below ``tol``. Without ``eta_init`` every document
    starts from alpha + N/K.
    """
    _check_shapes(alpha, beta, tokens)
    K = beta.shape[0]
    log_beta_tokens = np.log(beta[:, tokens.word_ids]).T
    if eta_init is None:
        eta = alpha + (tokens.lengths / K)[:, np.newaxis]
    else:
        eta = np.array(eta_init, dtype=np.float64, copy=True)
        if eta.shape != alpha.shape:
            raise ShapeError(f"initial eta has shape {eta.shape}, expected {alpha.shape}")

    active = np.ones(tokens.num_docs, dtype=bool)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        phi = _responsibilities(log_beta_tokens, dirichlet_expectation(eta), tokens.doc_index)
        new_eta = alpha + tokens.incidence @ phi
        bad = ~np.all(np.isfinite(new_eta), axis=1) & active
        if np.any(bad):
            d = int(np.flatnonzero(bad)[0])
            raise NonFiniteError(f"non-finite variational parameter in document {d} at iteration {iterations}")
        change = np.mean(np.abs(new_eta - eta), axis=1)
        eta[active] = new_eta[active]
        active &= change >= tol
        if not active.any():
            break
    logger.debug(f"E-step finished after {iterations} iteration(s), {int(active.sum())} document(s) unconverged")

    phi = _responsibilities(log_beta_tokens, dirichlet_expectation(eta), tokens.doc_index)
    return VariationalState(eta=eta, phi=phi)


def document_elbos(alpha: np.ndarray, beta: np.ndarray, tokens: TokenIndex, state: VariationalState) -> np.ndarray:
    """
    Per-document ELBO:
    E[log p(theta|alpha)] + E[log p(z|theta)] + E[log p(w|z,beta)] - E[log q(theta)] - E[log q(z)].
    """
    _check_shapes(alpha, beta, tokens)
    eta, phi = state.eta, state.phi
    if eta.shape != alpha.shape or phi.shape != (tokens.doc_index.size, beta.shape[0]):
        raise ShapeError("variational state does not match the corpus and model")
    elog = dirichlet_expectation(eta)
    entropy_theta = lgamma(eta.sum(axis=1)) - lgamma(eta).sum(axis=1) + ((eta - 1.0) * elog).sum(axis=1)
    log_beta_tokens = np.log(beta[:, tokens.word_ids]).T
    token_terms = (phi * (elog[tokens.doc_index] + log_beta_tokens)).sum(axis=1) - xlogy(phi, phi).sum(axis=1)
    words = tokens.incidence @ token_terms
    return prior_term(alpha, eta) - entropy_theta + words


def e_step_document(doc: Document, alpha: np.ndarray, beta: np.ndarray, tol: float = 1e-6,
                    max_iter: int = 100) -> Tuple[VariationalState, float]:
    """E-step for a single document; returns its state slice and ELBO contribution."""
    alpha = np.asarray(alpha, dtype=np.float64).reshape(1, -1)
    tokens = TokenIndex.from_document(doc)
    state = run_e_step(alpha, beta, tokens, tol, max_iter)
    return VariationalState(eta=state.eta[0], phi=state.phi), float(document_elbos(alpha, beta, tokens, state)[0])


def _check_corpus(model: TopicModel, corpus: Corpus) -> None:
    if corpus.vocabulary.terms != model.vocabulary.terms:
        raise VocabularyError("corpus vocabulary differs from the model vocabulary")
    if corpus.side_schema.dimension != model.q:
        raise ShapeError(f"corpus side dimension {corpus.side_schema.dimension} does not match model q={model.q}")


def compute_elbo(corpus: Corpus, model: TopicModel, state: VariationalState) -> float:
    """Corpus ELBO of ``state`` under ``model``."""
    _check_corpus(model, corpus)
    alpha = prior_alphas(model.prior, corpus.side_matrix)
    return float(document_elbos(alpha, model.beta, TokenIndex.from_corpus(corpus), state).sum())


def infer(model: TopicModel, corpus: Corpus) -> Tuple[VariationalState, np.ndarray]:
    """Fresh E-step on ``corpus`` with the model's parameters; returns (state, per-document ELBO)."""
    _check_corpus(model, corpus)
    config = model.config
    alpha = prior_alphas(model.prior, corpus.side_matrix)
    tokens = TokenIndex.from_corpus(corpus)
    state = run_e_step(alpha, model.beta, tokens, config.e_step_tol, config.e_step_max_iter)
    return state, document_elbos(alpha, model.beta, tokens, state)


def _beta_from_statistics(stats: np.ndarray, beta_floor: float) -> np.ndarray:
    K, V = stats.shape
    totals = stats.sum(axis=1)
    beta = np.full((K, V), 1.0 / V)
    live = totals > 0
    for i in np.flatnonzero(~live):
        logger.warning(f"Topic {i} has zero responsibility; resetting its word distribution to uniform")
    beta[live] = stats[live] / totals[live, np.newaxis]
    # entries stay >= beta_floor and rows still sum to one
    return beta_floor + (1.0 - V * beta_floor) * beta


def m_step_beta(corpus: Corpus, state: VariationalState, K: int, beta_floor: float = 1e-12) -> np.ndarray:
    """beta_{i,j} proportional to the expected count of word j under topic i."""
    return _m_step_beta(TokenIndex.from_corpus(corpus), state, K, corpus.vocabulary.size, beta_floor)


def _m_step_beta(tokens: TokenIndex, state: VariationalState, K: int, V: int, beta_floor: float) -> np.ndarray:
    if state.phi.shape != (tokens.doc_index.size, K):
        raise ShapeError(f"phi has shape {state.phi.shape}, expected {(tokens.doc_index.size, K)}")
    weighted = state.phi * tokens.counts[:, np.newaxis]
    stats = np.vstack([np.bincount(tokens.word_ids, weights=weighted[:, i], minlength=V) for i in range(K)])
    return _beta_from_statistics(stats, beta_floor)


def _initial_beta(K: int, V: int, rng: np.random.Generator) -> np.ndarray:
    beta = rng.gamma(100.0, 1.0 / 100.0, size=(K, V))
    return beta / beta.sum(axis=1, keepdims=True)


def _restart_seeds(seed: int, restarts: int) -> List[int]:
    # restart 0 uses the training seed itself
    children = np.random.SeedSequence(seed).spawn(restarts - 1)
    return [seed] + [int(child.generate_state(1)[0]) for child in children]


def _run_em(tokens: TokenIndex, side: np.ndarray, beta: np.ndarray, prior: PriorSpec, K: int,
            config: TrainConfig, rng: np.random.Generator):
    """EM rounds from one starting point; returns (beta, prior, elbo, log)."""
    V = beta.shape[1]
    log: List[Tuple[int, float]] = []
    best = None
    current = None
    eta = None
    previous = None
    for round_number in range(1, config.max_rounds + 1):
        alpha = prior_alphas(prior, side)
        state = run_e_step(alpha, beta, tokens, config.e_step_tol, config.e_step_max_iter, eta_init=eta)
        eta = state.eta
        elbo = float(document_elbos(alpha, beta, tokens, state).sum())
        if not np.isfinite(elbo):
            raise NonFiniteError(f"corpus ELBO is not finite at round {round_number}")
        log.append((round_number, elbo))
        logger.info(f"Round {round_number}: ELBO {elbo:.6f}")

        current = (beta, prior, elbo)
        if best is None or elbo > best[2]:
            best = current
        if previous is not None and abs(elbo - previous) / abs(elbo) < config.em_tol:
            logger.info(f"Converged after {round_number} round(s)")
            break
        previous = elbo

        beta = _m_step_beta(tokens, state, K, V, config.beta_floor)
        prior = m_step_prior(prior, side, eta, config.batch_size, config, rng)
    else:
        logger.info(f"Stopped at max_rounds={config.max_rounds} without meeting em_tol={config.em_tol}")

    beta, prior, elbo = best if config.keep_best else current
    return beta, prior, elbo, log


def train(corpus: Corpus, K: int, prior_kind: str, seed: int, config: Optional[TrainConfig] = None,
          init: Optional[TopicModel] = None) -> TopicModel:
    """
    Fit a topic model by variational EM.

    Each round runs a full E-step (eta warm-started from the previous round),
    records the corpus ELBO, then updates beta and the prior. Training stops
    when the relative ELBO change between consecutive rounds drops below
    ``config.em_tol`` or after ``config.max_rounds`` rounds. Without ``init``
    the loop is repeated from ``config.restarts`` random starting points and
    the run with the highest ELBO is returned, its training log included.

    Parameters:
        corpus (Corpus): Training documents
        K (int): Number of topics, 2..200
        prior_kind (str): One of lda, lda-opt, dmr, nnlda
        seed (int): Seeds the beta initialization, the network draw and minibatch order
        config (TrainConfig): Stopping rules and optimizer settings; defaults from training.json
        init (TopicModel): Start from this model's beta and prior instead of a random draw

    Returns:
        TopicModel: With keep_best, the parameters of the best-ELBO round
    """
    config = config or default_train_config()
    if prior_kind not in PRIOR_KINDS:
        raise ConfigurationError(f"unknown prior kind '{prior_kind}', expected one of {', '.join(PRIOR_KINDS)}")
    if not MIN_TOPICS <= K <= MAX_TOPICS:
        raise ConfigurationError(f"K must be in [{MIN_TOPICS}, {MAX_TOPICS}], got {K}")
    if prior_kind in SIDE_CONDITIONED and not corpus.has_side_data:
        raise ConfigurationError(f"prior '{prior_kind}' needs side data but the corpus has no side columns")

    V = corpus.vocabulary.size
    q = corpus.side_schema.dimension
    side = corpus.side_matrix
    tokens = TokenIndex.from_corpus(corpus)
    logger.info(f"Training {prior_kind} with K={K} on {corpus.num_docs} documents (V={V}, q={q}, seed={seed})")

    if init is not None:
        if init.K != K or init.V != V:
            raise ShapeError(f"initial model has K={init.K}, V={init.V}; expected K={K}, V={V}")
        best = _run_em(tokens, side, init.beta.copy(), init.prior, K, config, np.random.default_rng(seed))
    else:
        best = None
        for restart, start_seed in enumerate(_restart_seeds(seed, config.restarts)):
            rng = np.random.default_rng(start_seed)
            beta = _initial_beta(K, V, rng)
            prior = initial_prior(prior_kind, K, q, start_seed, config)
            run = _run_em(tokens, side, beta, prior, K, config, rng)
            if config.restarts > 1:
                logger.info(f"Restart {restart + 1}/{config.restarts}: ELBO {run[2]:.6f}")
            if best is None or run[2] > best[2]:
                best = run

    beta, prior, elbo, log = best
    return TopicModel(K=K, beta=beta, prior=prior, prior_kind=prior_kind, vocabulary=corpus.vocabulary,
                      side_schema=corpus.side_schema, training_log=log, final_elbo=elbo, seed=seed,
                      config=config)


def warm_start_nnlda(lda_model: TopicModel, seed: int, config: Optional[TrainConfig] = None) -> TopicModel:
    """
    An nnlda model that reproduces a fixed-prior model exactly: LDA's beta and
    a network emitting LDA's alpha for every side vector.
    """
    if not isinstance(lda_model.prior, FixedPrior):
        raise ConfigurationError(f"warm start needs a fixed-prior model, got '{lda_model.prior_kind}'")
    if lda_model.q < 1:
        raise ConfigurationError("warm start needs a model trained with side data")
    config = config or lda_model.config
    net = constant_net(lda_model.prior.alpha, lda_model.q, config.hidden_dim, seed, config.alpha_floor)
    opt = AdamState.for_net(net, learning_rate=config.learning_rate, weight_decay=config.weight_decay,
                            beta1=config.beta1, beta2=config.beta2, epsilon=config.epsilon)
    return lda_model.model_copy(update={
        "beta": lda_model.beta.copy(),
        "prior": NeuralPrior(net=net, opt=opt),
        "prior_kind": "nnlda",
        "training_log": [],
        "final_elbo": None,
        "seed": seed,
        "config": config,
    })
