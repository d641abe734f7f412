from collections import Counter

import numpy as np
import pytest
from pydantic import ValidationError

from nnlda.models.settings import DEFAULT_BAGS, SyntheticConfig, default_synthetic_config
from nnlda.services.synthetic import bag_terms, generate_synthetic, group_name, normalize_term


@pytest.fixture(scope="module")
def full_corpus():
    return generate_synthetic(default_synthetic_config(num_docs=2000, seed=11))


class TestGenerateSynthetic:
    """The synthetic review corpus."""

    def test_mean_length_near_three(self, full_corpus):
        """Uniform lengths on 1..5 average about 3 words."""
        assert 2.8 <= full_corpus.num_words / full_corpus.num_docs <= 3.2

    def test_single_one_word_document(self):
        """The minimal corpus has one word from its group's bag."""
        cfg = SyntheticConfig(num_docs=1, min_len=1, max_len=1, seed=0)
        corpus = generate_synthetic(cfg)
        doc = corpus.documents[0]
        assert doc.length == 1
        word = corpus.vocabulary.terms[doc.word_ids[0]]
        assert word in bag_terms(cfg)[doc.group]

    def test_category_pairs_roughly_uniform(self, full_corpus):
        """Each of the four pairs takes 22%..28% of the documents."""
        counts = Counter(doc.group for doc in full_corpus.documents)
        assert len(counts) == 4
        for count in counts.values():
            assert 0.22 <= count / full_corpus.num_docs <= 0.28

    def test_every_word_belongs_to_its_bag(self, full_corpus):
        bags = bag_terms(default_synthetic_config())
        terms = full_corpus.vocabulary.terms
        for doc in full_corpus.documents:
            assert {terms[w] for w in doc.word_ids} <= bags[doc.group]

    def test_side_vector_matches_group(self, full_corpus):
        """The side vector decodes back to the document's category pair."""
        schema = full_corpus.side_schema
        for doc in full_corpus.documents[:50]:
            values = schema.decode(doc.side)
            assert group_name(values["product"], values["description"]) == doc.group
            assert doc.side.sum() == 2.0

    def test_vocabulary_is_distinct_bag_words(self, full_corpus):
        """With enough documents every distinct bag word shows up once in the vocabulary."""
        distinct = {normalize_term(w) for words in DEFAULT_BAGS.values() for w in words}
        assert set(full_corpus.vocabulary.terms) == distinct
        assert len(distinct) == 29

    def test_same_seed_identical(self):
        cfg = default_synthetic_config(num_docs=100, seed=4)
        assert generate_synthetic(cfg) == generate_synthetic(cfg)

    def test_different_seeds_differ(self):
        a = generate_synthetic(default_synthetic_config(num_docs=100, seed=4))
        b = generate_synthetic(default_synthetic_config(num_docs=100, seed=5))
        assert a != b

    def test_multi_word_entry_is_one_token(self):
        assert normalize_term("eco friendly") == "eco_friendly"


class TestSyntheticConfig:
    """Validation of generator settings."""

    def test_min_above_max_rejected(self):
        with pytest.raises(ValidationError):
            SyntheticConfig(min_len=4, max_len=2)

    def test_empty_bag_rejected(self):
        with pytest.raises(ValidationError):
            SyntheticConfig(bags={("TV", "price"): []})

    def test_default_bags_are_the_four_pairs(self):
        assert set(SyntheticConfig().bags) == {("burger", "price"), ("burger", "quality"),
                                              ("TV", "price"), ("TV", "quality")}

    def test_side_prior_is_recorded_only(self):
        """Changing the Gaussian side prior does not change the corpus."""
        a = generate_synthetic(SyntheticConfig(num_docs=50, seed=1, gaussian_mu=0.0))
        b = generate_synthetic(SyntheticConfig(num_docs=50, seed=1, gaussian_mu=5.0, gaussian_sigma=3.0))
        assert a == b
        assert np.all(np.isin(a.side_matrix, [0.0, 1.0]))
