import logging

import numpy as np
import pytest

from nnlda.errors import ShapeError
from nnlda.models.settings import TrainConfig
from nnlda.models.topic_model import PARAMETER_NAMES, AdamState, FixedPrior, LogLinearPrior, NeuralPrior
from nnlda.services.neural_prior import forward, init_kaiming
from nnlda.services.priors import (
    LOG_ALPHA_CLIP,
    initial_prior,
    m_step_prior,
    prior_alphas,
    prior_gradient,
    prior_term,
)


def neural_prior(seed, q=3, hidden=5, K=3, weight_decay=0.0, learning_rate=1e-3):
    net = init_kaiming(q, hidden, K, seed)
    return NeuralPrior(net=net, opt=AdamState.for_net(net, weight_decay=weight_decay, learning_rate=learning_rate))


class TestPriorAlphas:
    """Per-document Dirichlet parameters of each prior kind."""

    def test_fixed_prior_is_tiled(self):
        alpha = prior_alphas(FixedPrior(alpha=np.array([0.5, 2.0])), np.zeros((3, 4)))
        np.testing.assert_array_equal(alpha, [[0.5, 2.0]] * 3)

    def test_loglinear_uses_bias_column(self):
        """exp(lam @ [s; 1])."""
        lam = np.array([[1.0, 0.0, np.log(2.0)], [0.0, -1.0, 0.0]])
        side = np.array([[1.0, 0.0], [0.0, 1.0]])
        expected = np.exp(np.array([[1.0 + np.log(2.0), 0.0], [np.log(2.0), -1.0]]))
        np.testing.assert_allclose(prior_alphas(LogLinearPrior(lam=lam), side), expected, rtol=1e-14)

    def test_loglinear_exponent_is_clipped(self):
        alpha = prior_alphas(LogLinearPrior(lam=np.array([[1e4, 0.0]])), np.array([[1.0]]))
        assert np.isfinite(alpha).all()
        assert alpha[0, 0] == pytest.approx(np.exp(LOG_ALPHA_CLIP))

    def test_loglinear_dimension_mismatch(self):
        with pytest.raises(ShapeError):
            prior_alphas(LogLinearPrior(lam=np.zeros((2, 3))), np.zeros((1, 4)))

    def test_neural_matches_forward(self):
        prior = neural_prior(1)
        side = np.random.default_rng(0).normal(size=(4, 3))
        np.testing.assert_array_equal(prior_alphas(prior, side), forward(prior.net, side)[0])

    def test_initial_priors(self):
        config = TrainConfig()
        assert isinstance(initial_prior("lda", 4, 2, 0, config), FixedPrior)
        assert initial_prior("lda-opt", 4, 2, 0, config).optimize
        dmr = initial_prior("dmr", 4, 2, 0, config)
        np.testing.assert_allclose(prior_alphas(dmr, np.ones((1, 2))), np.full((1, 4), config.lda_alpha))
        assert isinstance(initial_prior("nnlda", 4, 2, 0, config), NeuralPrior)


class TestPriorGradient:
    """Gradient of the ELBO prior term with respect to alpha."""

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(4)
        alpha = rng.uniform(0.2, 3.0, size=(2, 3))
        eta = alpha + rng.uniform(0.0, 4.0, size=(2, 3))
        grad = prior_gradient(alpha, eta)
        h = 1e-6
        for d in range(2):
            for k in range(3):
                plus, minus = alpha.copy(), alpha.copy()
                plus[d, k] += h
                minus[d, k] -= h
                numeric = (prior_term(plus, eta)[d] - prior_term(minus, eta)[d]) / (2 * h)
                assert numeric == pytest.approx(grad[d, k], rel=1e-5, abs=1e-7)


class TestMStepPrior:
    """Prior updates of each kind."""

    def test_fixed_prior_unchanged(self):
        prior = FixedPrior(alpha=np.ones(3))
        out = m_step_prior(prior, np.zeros((2, 0)), np.ones((2, 3)), 64, TrainConfig(), np.random.default_rng(0))
        assert out is prior

    def test_neural_zero_gradient_is_fixed_point(self):
        """With eta equal to alpha the gradient vanishes and, without decay, nothing moves."""
        prior = neural_prior(2)
        side = np.random.default_rng(1).normal(size=(1, 3))
        eta = forward(prior.net, side)[0]
        config = TrainConfig(weight_decay=0.0)
        out = m_step_prior(prior, side, eta, 64, config, np.random.default_rng(0))
        for name in PARAMETER_NAMES:
            np.testing.assert_array_equal(getattr(out.net, name), getattr(prior.net, name))

    def test_neural_step_increases_prior_term(self):
        """One minibatch step raises the prior term in at least 18 of 20 random instances."""
        successes = 0
        for seed in range(20):
            rng = np.random.default_rng(seed)
            prior = neural_prior(seed)
            side = rng.normal(size=(16, 3))
            eta = rng.gamma(2.0, 1.0, size=(16, 3)) + 0.1
            before = prior_term(prior_alphas(prior, side), eta).sum()
            out = m_step_prior(prior, side, eta, 64, TrainConfig(weight_decay=0.0), rng)
            after = prior_term(prior_alphas(out, side), eta).sum()
            successes += after > before
        assert successes >= 18

    def test_neural_minibatch_count(self):
        """Each minibatch is one ADAM step."""
        prior = neural_prior(0)
        side = np.random.default_rng(0).normal(size=(130, 3))
        eta = np.full((130, 3), 2.0)
        out = m_step_prior(prior, side, eta, 64, TrainConfig(), np.random.default_rng(0))
        assert out.opt.step == 3

    def test_non_finite_minibatch_is_skipped(self, caplog):
        prior = neural_prior(0)
        side = np.zeros((2, 3))
        eta = np.array([[1.0, np.inf, 1.0], [1.0, 1.0, 1.0]])
        with caplog.at_level(logging.WARNING, logger="nnlda.services.priors"):
            out = m_step_prior(prior, side, eta, 64, TrainConfig(), np.random.default_rng(0))
        assert out.opt.step == 0
        assert "non-finite" in caplog.text

    def test_loglinear_step_does_not_decrease_objective(self):
        rng = np.random.default_rng(3)
        side = rng.integers(0, 2, size=(40, 2)).astype(float)
        eta = rng.gamma(2.0, 1.0, size=(40, 3)) + 0.1
        prior = initial_prior("dmr", 3, 2, 0, TrainConfig())
        config = TrainConfig()

        def objective(p):
            return prior_term(prior_alphas(p, side), eta).sum() - 0.5 * np.sum(p.lam ** 2) / config.dmr_prior_variance

        out = m_step_prior(prior, side, eta, 64, config, rng)
        assert objective(out) >= objective(prior)
        assert not np.array_equal(out.lam, prior.lam)

    def test_shared_alpha_moves_towards_sparse_documents(self):
        """Documents concentrated on one topic pull a shared alpha of 1 downwards."""
        eta = np.tile([20.0, 0.05, 0.05], (50, 1))
        prior = FixedPrior(alpha=np.ones(3), optimize=True)
        out = m_step_prior(prior, np.zeros((50, 0)), eta, 64, TrainConfig(), np.random.default_rng(0))
        before = prior_term(np.tile(prior.alpha, (50, 1)), eta).sum()
        after = prior_term(np.tile(out.alpha, (50, 1)), eta).sum()
        assert after >= before
        assert out.alpha[1] < 1.0
