"""
Versioned JSON model files.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from nnlda.errors import ModelFileError, ModelVersionError, ShapeError
from nnlda.models.corpus import SideSchema, Vocabulary
from nnlda.models.settings import TrainConfig
from nnlda.models.topic_model import (
    PARAMETER_NAMES,
    AdamState,
    FixedPrior,
    LogLinearPrior,
    NeuralPrior,
    PriorKind,
    PriorNet,
    PriorSpec,
    TopicModel,
)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class ArrayPayload(BaseModel):
    """A dense array as nested lists with its shape recorded."""
    shape: List[int]
    data: Any

    @classmethod
    def of(cls, array: np.ndarray) -> "ArrayPayload":
        array = np.asarray(array, dtype=np.float64)
        return cls(shape=list(array.shape), data=array.tolist())

    def to_array(self, name: str) -> np.ndarray:
        try:
            array = np.asarray(self.data, dtype=np.float64)
        except (TypeError, ValueError) as e:
            raise ModelFileError(f"{name}: stored data is not a dense numeric array") from e
        if list(array.shape) != self.shape:
            raise ShapeError(f"{name}: stored shape {self.shape} does not match data shape {list(array.shape)}")
        return array


class FixedPriorFile(BaseModel):
    kind: Literal["fixed"] = "fixed"
    alpha: ArrayPayload
    optimize: bool = False


class LogLinearPriorFile(BaseModel):
    kind: Literal["loglinear"] = "loglinear"
    lam: ArrayPayload


class NeuralPriorFile(BaseModel):
    kind: Literal["neural"] = "neural"
    params: Dict[str, ArrayPayload]
    alpha_floor: float
    adam_m: Dict[str, ArrayPayload]
    adam_v: Dict[str, ArrayPayload]
    adam_step: int
    learning_rate: float
    weight_decay: float
    beta1: float
    beta2: float
    epsilon: float


class ModelFile(BaseModel):
    """On-disk layout of a TopicModel."""
    schema_version: int
    prior_kind: PriorKind
    K: int
    V: int
    q: int
    beta: ArrayPayload
    prior: Union[FixedPriorFile, LogLinearPriorFile, NeuralPriorFile] = Field(..., discriminator="kind")
    vocabulary: List[str]
    side_schema: SideSchema
    training_log: List[Tuple[int, float]] = Field(default_factory=list)
    final_elbo: Optional[float] = None
    seed: int
    config: TrainConfig


def _prior_to_file(prior: PriorSpec):
    if isinstance(prior, FixedPrior):
        return FixedPriorFile(alpha=ArrayPayload.of(prior.alpha), optimize=prior.optimize)
    if isinstance(prior, LogLinearPrior):
        return LogLinearPriorFile(lam=ArrayPayload.of(prior.lam))
    opt = prior.opt
    return NeuralPriorFile(
        params={name: ArrayPayload.of(p) for name, p in prior.net.parameters().items()},
        alpha_floor=prior.net.alpha_floor,
        adam_m={name: ArrayPayload.of(opt.m[name]) for name in PARAMETER_NAMES},
        adam_v={name: ArrayPayload.of(opt.v[name]) for name in PARAMETER_NAMES},
        adam_step=opt.step,
        learning_rate=opt.learning_rate,
        weight_decay=opt.weight_decay,
        beta1=opt.beta1,
        beta2=opt.beta2,
        epsilon=opt.epsilon,
    )


def _prior_from_file(payload, K: int, q: int) -> PriorSpec:
    if isinstance(payload, FixedPriorFile):
        alpha = payload.alpha.to_array("alpha")
        if alpha.shape != (K,):
            raise ShapeError(f"alpha has shape {alpha.shape}, expected ({K},)")
        return FixedPrior(alpha=alpha, optimize=payload.optimize)
    if isinstance(payload, LogLinearPriorFile):
        lam = payload.lam.to_array("lam")
        if lam.shape != (K, q + 1):
            raise ShapeError(f"lam has shape {lam.shape}, expected ({K}, {q + 1})")
        return LogLinearPrior(lam=lam)

    missing = set(PARAMETER_NAMES) - set(payload.params)
    if missing:
        raise ModelFileError(f"network parameters missing: {', '.join(sorted(missing))}")
    params = {name: payload.params[name].to_array(name) for name in PARAMETER_NAMES}
    net = PriorNet(alpha_floor=payload.alpha_floor, **params)
    hidden = net.hidden_dim
    expected = {"W1": (hidden, q), "b1": (hidden,), "W2": (K, hidden), "b2": (K,)}
    for name, shape in expected.items():
        if params[name].shape != shape:
            raise ShapeError(f"{name} has shape {params[name].shape}, expected {shape}")
    m = {name: payload.adam_m[name].to_array(f"adam m {name}") for name in PARAMETER_NAMES}
    v = {name: payload.adam_v[name].to_array(f"adam v {name}") for name in PARAMETER_NAMES}
    for name in PARAMETER_NAMES:
        if m[name].shape != params[name].shape or v[name].shape != params[name].shape:
            raise ShapeError(f"ADAM buffers for {name} do not match the parameter shape")
    opt = AdamState(m=m, v=v, step=payload.adam_step, learning_rate=payload.learning_rate,
                    weight_decay=payload.weight_decay, beta1=payload.beta1, beta2=payload.beta2,
                    epsilon=payload.epsilon)
    return NeuralPrior(net=net, opt=opt)


def save_model(model: TopicModel, path) -> Path:
    """Write ``model`` as JSON; floats are written in shortest round-trip form."""
    path = Path(path)
    record = ModelFile(
        schema_version=SCHEMA_VERSION,
        prior_kind=model.prior_kind,
        K=model.K,
        V=model.V,
        q=model.q,
        beta=ArrayPayload.of(model.beta),
        prior=_prior_to_file(model.prior),
        vocabulary=list(model.vocabulary.terms),
        side_schema=model.side_schema,
        training_log=list(model.training_log),
        final_elbo=model.final_elbo,
        seed=model.seed,
        config=model.config,
    )
    path.write_text(record.model_dump_json(indent=1), encoding="utf-8")
    logger.info(f"Saved {model.prior_kind} model (K={model.K}, V={model.V}) to {path}")
    return path


def load_model(path) -> TopicModel:
    """
    Read a model file written by save_model.

    Raises:
        ModelVersionError: schema_version differs from this release.
        ModelFileError: the file is not valid JSON or not a model file.
        ShapeError: stored arrays disagree with K, V or q.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ModelFileError(f"{path} is not a readable model file: {e}") from e
    if not isinstance(raw, dict):
        raise ModelFileError(f"{path} is not a model file")
    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ModelVersionError(f"{path} has schema version {version}, this release reads version {SCHEMA_VERSION}")
    try:
        record = ModelFile.model_validate(raw)
    except ValidationError as e:
        raise ModelFileError(f"{path} is malformed: {e.error_count()} validation error(s)") from e

    beta = record.beta.to_array("beta")
    if beta.shape != (record.K, record.V):
        raise ShapeError(f"beta has shape {beta.shape}, expected ({record.K}, {record.V})")
    if len(record.vocabulary) != record.V:
        raise ShapeError(f"vocabulary has {len(record.vocabulary)} terms, expected V={record.V}")
    if record.side_schema.dimension != record.q:
        raise ShapeError(f"side schema has dimension {record.side_schema.dimension}, expected q={record.q}")

    prior = _prior_from_file(record.prior, record.K, record.q)
    try:
        model = TopicModel(
            K=record.K,
            beta=beta,
            prior=prior,
            prior_kind=record.prior_kind,
            vocabulary=Vocabulary(terms=record.vocabulary),
            side_schema=record.side_schema,
            training_log=[(int(i), float(e)) for i, e in record.training_log],
            final_elbo=record.final_elbo,
            seed=record.seed,
            config=record.config,
        )
    except ValidationError as e:
        raise ModelFileError(f"{path} holds an invalid model: {e.error_count()} validation error(s)") from e
    logger.info(f"Loaded {model.prior_kind} model (K={model.K}, V={model.V}, q={model.q}) from {path}")
    return model
