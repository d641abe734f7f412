from typing import Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from nnlda.models.corpus import SideSchema, Vocabulary
from nnlda.models.settings import TrainConfig

PriorKind = Literal["lda", "lda-opt", "dmr", "nnlda"]
PRIOR_KINDS = ("lda", "lda-opt", "dmr", "nnlda")
SIDE_CONDITIONED = ("dmr", "nnlda")

PARAMETER_NAMES = ("W1", "b1", "W2", "b2")


class PriorNet(BaseModel):
    """
    Two-layer network g(s) = softplus(W2 relu(W1 s + b1) + b2) + alpha_floor.
    Parameters:
        W1 (np.ndarray): hidden_dim x q
        b1 (np.ndarray): hidden_dim
        W2 (np.ndarray): K x hidden_dim
        b2 (np.ndarray): K
        alpha_floor (float): Lower bound added to every output
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    alpha_floor: float = 1e-3

    @property
    def q(self) -> int:
        return self.W1.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.W1.shape[0]

    @property
    def K(self) -> int:
        return self.W2.shape[0]

    def parameters(self) -> Dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PARAMETER_NAMES}

    def with_parameters(self, params: Dict[str, np.ndarray]) -> "PriorNet":
        return PriorNet(alpha_floor=self.alpha_floor, **{name: params[name] for name in PARAMETER_NAMES})


class AdamState(BaseModel):
    """First/second moment buffers of ADAM with decoupled weight decay."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    m: Dict[str, np.ndarray]
    v: Dict[str, np.ndarray]
    step: int = Field(0, ge=0)
    learning_rate: float = 1e-3
    weight_decay: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def for_net(cls, net: PriorNet, **hyper) -> "AdamState":
        params = net.parameters()
        return cls(m={k: np.zeros_like(p) for k, p in params.items()},
                   v={k: np.zeros_like(p) for k, p in params.items()}, **hyper)


class FixedPrior(BaseModel):
    """Shared Dirichlet parameter; optimize=True re-estimates it (lda-opt)."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    kind: Literal["fixed"] = "fixed"
    alpha: np.ndarray
    optimize: bool = False


class LogLinearPrior(BaseModel):
    """DMR prior alpha_d = exp(lam @ [s; 1]); lam is K x (q + 1)."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    kind: Literal["loglinear"] = "loglinear"
    lam: np.ndarray


class NeuralPrior(BaseModel):
    kind: Literal["neural"] = "neural"
    net: PriorNet
    opt: AdamState


PriorSpec = Union[FixedPrior, LogLinearPrior, NeuralPrior]


class VariationalState(BaseModel):
    """
    Mean-field parameters for a corpus.
    Parameters:
        eta (np.ndarray): M x K variational Dirichlet parameters
        phi (np.ndarray): one K-simplex row per distinct (document, word) token,
            aligned with Corpus.tokens()
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    eta: np.ndarray
    phi: np.ndarray


class TopicModel(BaseModel):
    """
    A trained topic model: topic-word matrix, prior and provenance.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    K: int = Field(..., ge=1)
    beta: np.ndarray
    prior: PriorSpec = Field(..., discriminator="kind")
    prior_kind: PriorKind
    vocabulary: Vocabulary
    side_schema: SideSchema = Field(default_factory=SideSchema)
    training_log: List[Tuple[int, float]] = Field(default_factory=list)
    final_elbo: Optional[float] = None
    seed: int = 0
    config: TrainConfig = Field(default_factory=TrainConfig)

    @property
    def V(self) -> int:
        return self.vocabulary.size

    @property
    def q(self) -> int:
        return self.side_schema.dimension
