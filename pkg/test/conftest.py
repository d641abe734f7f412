"""
Pytest configuration and shared fixtures for nnlda tests.
"""
import sys
from pathlib import Path

import numpy as np
import pytest

# Add the project root to Python path so imports work correctly
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from nnlda.models.corpus import Corpus, Document, SideFeature, SideSchema, Vocabulary  # noqa: E402
from nnlda.models.settings import TrainConfig, default_synthetic_config  # noqa: E402
from nnlda.models.topic_model import FixedPrior, TopicModel  # noqa: E402
from nnlda.services.synthetic import generate_synthetic  # noqa: E402


@pytest.fixture
def tiny_corpus():
    """Three words, four documents, one categorical side feature with two levels."""
    vocabulary = Vocabulary(terms=["cheap", "sharp", "value"])
    schema = SideSchema(features=[SideFeature(name="product", levels=["TV", "burger"])])
    docs = [
        Document.from_tokens([0, 2, 2], side=schema.encode({"product": "burger"}), label="1", group="burger:price"),
        Document.from_tokens([1], side=schema.encode({"product": "TV"}), label="2", group="TV:quality"),
        Document.from_tokens([0, 0], side=schema.encode({"product": "burger"}), label="1", group="burger:price"),
        Document.from_tokens([1, 2], side=schema.encode({"product": "TV"}), label="2", group="TV:quality"),
    ]
    return Corpus(vocabulary=vocabulary, documents=docs, side_schema=schema)


@pytest.fixture
def small_synthetic():
    """A 300-document synthetic corpus, fast enough for unit-level training tests."""
    return generate_synthetic(default_synthetic_config(num_docs=300, seed=7))


@pytest.fixture
def fast_config():
    """Loose stopping rules for quick training runs."""
    return TrainConfig(max_rounds=30, em_tol=1e-5)


def make_fixed_model(beta, alpha, terms=None, schema=None):
    """A fixed-prior TopicModel built from explicit parameters."""
    beta = np.asarray(beta, dtype=np.float64)
    terms = terms or [f"w{j}" for j in range(beta.shape[1])]
    return TopicModel(K=beta.shape[0], beta=beta, prior=FixedPrior(alpha=np.asarray(alpha, dtype=np.float64)),
                      prior_kind="lda", vocabulary=Vocabulary(terms=terms), side_schema=schema or SideSchema())


@pytest.fixture
def fixed_model_factory():
    return make_fixed_model
