"""
The side-data network g(s) that turns a document's side vector into its
Dirichlet parameter, with hand-written backpropagation and ADAM.

forward/backward accept one side vector (q,) or a batch (B, q); batch
gradients are summed over rows.
"""
import logging
from typing import Dict, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from nnlda.errors import ContractError, NonFiniteError, ShapeError
from nnlda.models.topic_model import PARAMETER_NAMES, AdamState, PriorNet
from nnlda.utils.numerics import sigmoid, softplus, softplus_inverse

logger = logging.getLogger(__name__)


class ForwardCache(BaseModel):
    """Activations kept by forward for the matching backward call."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    net_id: int
    single: bool
    s: np.ndarray
    z1: np.ndarray
    h1: np.ndarray
    z2: np.ndarray


def init_kaiming(q: int, hidden_dim: int, K: int, seed: int, alpha_floor: float = 1e-3) -> PriorNet:
    """Weights ~ N(0, 2 / fan_in), biases zero."""
    if min(q, hidden_dim, K) < 1:
        raise ShapeError(f"network dimensions must be positive, got q={q}, hidden={hidden_dim}, K={K}")
    rng = np.random.default_rng(seed)
    return PriorNet(
        W1=rng.normal(0.0, np.sqrt(2.0 / q), size=(hidden_dim, q)),
        b1=np.zeros(hidden_dim),
        W2=rng.normal(0.0, np.sqrt(2.0 / hidden_dim), size=(K, hidden_dim)),
        b2=np.zeros(K),
        alpha_floor=alpha_floor,
    )


def constant_net(alpha: np.ndarray, q: int, hidden_dim: int, seed: int, alpha_floor: float = 1e-3) -> PriorNet:
    """
    A network whose output is ``alpha`` for every side vector: W2 = 0 and
    b2 = softplus^-1(alpha - floor). W1 keeps a Kaiming draw so W2 receives
    gradient once training continues.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    base = init_kaiming(q, hidden_dim, alpha.size, seed, alpha_floor)
    return PriorNet(
        W1=base.W1,
        b1=base.b1,
        W2=np.zeros((alpha.size, hidden_dim)),
        b2=np.asarray(softplus_inverse(alpha - alpha_floor), dtype=np.float64).reshape(-1),
        alpha_floor=alpha_floor,
    )


def forward(net: PriorNet, s: np.ndarray) -> Tuple[np.ndarray, ForwardCache]:
    """alpha = softplus(W2 relu(W1 s + b1) + b2) + alpha_floor."""
    s = np.asarray(s, dtype=np.float64)
    single = s.ndim == 1
    batch = s.reshape(1, -1) if single else s
    if batch.ndim != 2 or batch.shape[1] != net.q:
        raise ShapeError(f"side input of shape {s.shape} does not match network input dimension {net.q}")
    z1 = batch @ net.W1.T + net.b1
    h1 = np.maximum(z1, 0.0)
    z2 = h1 @ net.W2.T + net.b2
    alpha = softplus(z2) + net.alpha_floor
    cache = ForwardCache(net_id=id(net), single=single, s=batch, z1=z1, h1=h1, z2=z2)
    return (alpha[0] if single else alpha), cache


def backward(net: PriorNet, cache: ForwardCache, grad_alpha: np.ndarray) -> Dict[str, np.ndarray]:
    """Gradients of sum_k grad_alpha_k * alpha_k with respect to W1, b1, W2, b2."""
    if cache.net_id != id(net) or cache.z2.shape[1] != net.K or cache.z1.shape[1] != net.hidden_dim:
        raise ContractError("forward cache does not belong to this network")
    grad_alpha = np.asarray(grad_alpha, dtype=np.float64)
    grad_alpha = grad_alpha.reshape(1, -1) if cache.single else grad_alpha
    if grad_alpha.shape != cache.z2.shape:
        raise ShapeError(f"grad_alpha shape {grad_alpha.shape} does not match output shape {cache.z2.shape}")

    dz2 = grad_alpha * sigmoid(cache.z2)
    dh1 = dz2 @ net.W2
    # relu gate
    dz1 = dh1 * (cache.z1 > 0.0)
    return {
        "W1": dz1.T @ cache.s,
        "b1": dz1.sum(axis=0),
        "W2": dz2.T @ cache.h1,
        "b2": dz2.sum(axis=0),
    }


def adam_step(net: PriorNet, grads: Dict[str, np.ndarray], state: AdamState) -> Tuple[PriorNet, AdamState]:
    """
    One ADAM step on a loss gradient with decoupled weight decay: every
    parameter first shrinks by lr * wd, then moves by the bias-corrected ADAM update.
    """
    params = net.parameters()
    for name in PARAMETER_NAMES:
        if grads[name].shape != params[name].shape:
            raise ShapeError(f"gradient for {name} has shape {grads[name].shape}, expected {params[name].shape}")
        if not np.all(np.isfinite(grads[name])):
            raise NonFiniteError(f"non-finite gradient in parameter block {name}")

    t = state.step + 1
    lr = state.learning_rate
    new_params, new_m, new_v = {}, {}, {}
    for name in PARAMETER_NAMES:
        g = grads[name]
        p = params[name] * (1.0 - lr * state.weight_decay)
        m = state.beta1 * state.m[name] + (1.0 - state.beta1) * g
        v = state.beta2 * state.v[name] + (1.0 - state.beta2) * g * g
        m_hat = m / (1.0 - state.beta1 ** t)
        v_hat = v / (1.0 - state.beta2 ** t)
        new_params[name] = p - lr * m_hat / (np.sqrt(v_hat) + state.epsilon)
        new_m[name] = m
        new_v[name] = v

    new_state = state.model_copy(update={"m": new_m, "v": new_v, "step": t})
    return net.with_parameters(new_params), new_state
