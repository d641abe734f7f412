import logging
from typing import Dict, List, Set, Tuple

import numpy as np

from nnlda.models.corpus import Corpus, Document, SideFeature, SideSchema, Vocabulary
from nnlda.models.settings import SyntheticConfig

logger = logging.getLogger(__name__)

PRODUCT = "product"
DESCRIPTION = "description"


def normalize_term(word: str) -> str:
    """Multi-word bag entries ("eco friendly") become one token ("eco_friendly")."""
    return "_".join(word.lower().split())


def group_name(product: str, description: str) -> str:
    return f"{product}:{description}"


def bag_terms(cfg: SyntheticConfig) -> Dict[str, Set[str]]:
    """Normalized bag of each category combination, keyed by group name."""
    return {group_name(p, d): {normalize_term(w) for w in words} for (p, d), words in cfg.bags.items()}


def generate_synthetic(cfg: SyntheticConfig) -> Corpus:
    """
    Draw the synthetic review corpus.

    Each document picks one category combination uniformly, a length uniformly
    in [min_len, max_len], and that many words uniformly with replacement from
    the combination's bag. Side data is the one-hot (product, description)
    pair; the group is the pair itself. The Gaussian side prior and the Poisson
    length rate in the config are descriptive only and never sampled.
    """
    rng = np.random.default_rng(cfg.seed)
    combos: List[Tuple[str, str]] = list(cfg.bags.keys())
    bags = [[normalize_term(w) for w in cfg.bags[combo]] for combo in combos]

    drawn = []
    for _ in range(cfg.num_docs):
        c = int(rng.integers(len(combos)))
        length = int(rng.integers(cfg.min_len, cfg.max_len + 1))
        picks = rng.integers(len(bags[c]), size=length)
        drawn.append((combos[c], [bags[c][i] for i in picks]))

    vocabulary = Vocabulary(terms=sorted({w for _, words in drawn for w in words}))
    schema = SideSchema(features=[
        SideFeature(name=PRODUCT, levels=sorted({combo[0] for combo, _ in drawn})),
        SideFeature(name=DESCRIPTION, levels=sorted({combo[1] for combo, _ in drawn})),
    ])
    documents = [
        Document.from_tokens(
            [vocabulary.id_of(w) for w in words],
            side=schema.encode({PRODUCT: combo[0], DESCRIPTION: combo[1]}),
            group=group_name(*combo),
        )
        for combo, words in drawn
    ]
    corpus = Corpus(vocabulary=vocabulary, documents=documents, side_schema=schema)
    logger.info(f"Generated {corpus.num_docs} synthetic documents, mean length "
                f"{corpus.num_words / corpus.num_docs:.3f}, V={vocabulary.size}")
    return corpus
