from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

from nnlda.config import configs

# One bag of words per (product, description) combination.
# Multi-word entries become single underscore-joined tokens at generation time.
DEFAULT_BAGS: Dict[Tuple[str, str], List[str]] = {
    ("burger", "price"): ["value", "pricey", "ouch", "steep", "cheap", "value",
                          "reason", "accept", "unreason", "unacceptable"],
    ("burger", "quality"): ["nasty", "fantastic", "delicious", "tasty", "juicy",
                            "unreason", "unacceptable", "reason", "accept", "fresh"],
    ("TV", "price"): ["promotion", "affordable", "value", "increase", "expensive",
                      "tasty", "economical", "fancy", "okay"],
    ("TV", "quality"): ["fabulous", "fantastic", "promising", "sharp", "large",
                        "clear", "eco friendly", "fresh", "pixilated"],
}


class TrainConfig(BaseModel):
    """
    Stopping rules, tolerances and optimizer settings for variational EM.
    """
    e_step_tol: float = Field(1e-6, gt=0)
    e_step_max_iter: int = Field(100, ge=1)
    em_tol: float = Field(1e-4, gt=0)
    max_rounds: int = Field(200, ge=1)
    batch_size: int = Field(64, ge=1)
    prior_epochs: int = Field(1, ge=1)
    hidden_dim: int = Field(20, ge=1)
    alpha_floor: float = Field(1e-3, gt=0)
    learning_rate: float = Field(1e-3, gt=0)
    weight_decay: float = Field(0.1, ge=0)
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    lda_alpha: float = Field(1.0, gt=0)
    prior_step: float = Field(1e-3, gt=0)
    dmr_step: float = Field(1e-3, gt=0)
    dmr_prior_variance: float = Field(10.0, gt=0)
    beta_floor: float = Field(1e-12, gt=0)
    keep_best: bool = True
    restarts: int = Field(1, ge=1)


class ClassifierConfig(BaseModel):
    """Full-batch gradient descent settings for the multinomial logistic regression."""
    learning_rate: float = Field(1.0, gt=0)
    tol: float = Field(1e-6, gt=0)
    max_iter: int = Field(5000, ge=1)
    l2: float = Field(1e-4, ge=0)


class SyntheticConfig(BaseModel):
    """
    Settings of the synthetic review corpus.
    Parameters:
        num_docs (int): Number of documents to draw
        min_len, max_len (int): Inclusive bounds of the uniform document length
        seed (int): Seed of the random generator
        bags (dict): (product, description) -> word list
        gaussian_mu, gaussian_sigma (float): Generative side-data prior, recorded only
        poisson_xi (float): Poisson length rate, recorded only
    """
    num_docs: int = Field(2000, ge=1)
    min_len: int = Field(1, ge=1)
    max_len: int = Field(5, ge=1)
    seed: int = 0
    bags: Dict[Tuple[str, str], List[str]] = Field(default_factory=lambda: {k: list(v) for k, v in DEFAULT_BAGS.items()})
    gaussian_mu: float = 0.0
    gaussian_sigma: float = 1.0
    poisson_xi: Optional[float] = None

    @model_validator(mode="after")
    def _check(self) -> "SyntheticConfig":
        if self.min_len > self.max_len:
            raise ValueError(f"min_len {self.min_len} exceeds max_len {self.max_len}")
        if not self.bags or any(not words for words in self.bags.values()):
            raise ValueError("every category combination needs a non-empty bag of words")
        return self


def _settings_from(section: str, known: Any) -> Dict[str, Any]:
    loaded = configs.get(section, {}) or {}
    return {k: v for k, v in loaded.items() if k in known.model_fields}


def default_train_config(**overrides) -> TrainConfig:
    """TrainConfig from training.json, with keyword overrides applied last."""
    values = _settings_from("training", TrainConfig)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return TrainConfig(**values)


def default_classifier_config() -> ClassifierConfig:
    loaded = (configs.get("evaluation", {}) or {}).get("classifier", {})
    return ClassifierConfig(**{k: v for k, v in loaded.items() if k in ClassifierConfig.model_fields})


def default_synthetic_config(**overrides) -> SyntheticConfig:
    values = _settings_from("synthetic", SyntheticConfig)
    if "bags" in values:
        values["bags"] = {(b["product"], b["description"]): b["words"] for b in values["bags"]}
    values.update({k: v for k, v in overrides.items() if v is not None})
    return SyntheticConfig(**values)
