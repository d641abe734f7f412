from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator

from nnlda.errors import EmptyCorpusError, SchemaError, ShapeError, VocabularyError


class Vocabulary(BaseModel):
    """
    Ordered list of unique terms; a term's position is its word id.
    Parameters:
        terms (List[str]): Unique, non-empty word strings
    """
    terms: List[str]
    _index: Dict[str, int] = PrivateAttr(default_factory=dict)

    @field_validator("terms")
    @classmethod
    def _check_terms(cls, terms: List[str]) -> List[str]:
        if not terms:
            raise ValueError("vocabulary must contain at least one term")
        if any(term == "" for term in terms):
            raise ValueError("vocabulary terms must be non-empty strings")
        if len(set(terms)) != len(terms):
            raise ValueError("vocabulary terms must be unique")
        return terms

    def model_post_init(self, __context) -> None:
        self._index = {term: i for i, term in enumerate(self.terms)}

    @property
    def size(self) -> int:
        return len(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def id_of(self, term: str) -> int:
        try:
            return self._index[term]
        except KeyError:
            raise VocabularyError(f"word '{term}' is not in the vocabulary") from None

    def __contains__(self, term: str) -> bool:
        return term in self._index


class SideFeature(BaseModel):
    """One side-data column; levels is None for a continuous feature."""
    name: str
    levels: Optional[List[str]] = None

    @property
    def width(self) -> int:
        return 1 if self.levels is None else len(self.levels)


class SideSchema(BaseModel):
    """Ordered side-data features and the layout of the encoded side vector."""
    features: List[SideFeature] = Field(default_factory=list)

    @property
    def dimension(self) -> int:
        return sum(feature.width for feature in self.features)

    @property
    def names(self) -> List[str]:
        return [feature.name for feature in self.features]

    def encode(self, values: Dict[str, object]) -> np.ndarray:
        """
        Encode a mapping feature name -> level (or number) into a side vector.
        Categorical features are one-hot encoded in level order.
        """
        unknown = set(values) - set(self.names)
        if unknown:
            raise SchemaError(f"unknown side feature(s): {', '.join(sorted(unknown))}")
        vector = np.zeros(self.dimension)
        position = 0
        for feature in self.features:
            if feature.name not in values:
                raise SchemaError(f"side feature '{feature.name}' has no value")
            value = values[feature.name]
            if feature.levels is None:
                vector[position] = float(value)
            else:
                level = str(value)
                if level not in feature.levels:
                    raise SchemaError(f"side feature '{feature.name}' has no level '{level}'")
                vector[position + feature.levels.index(level)] = 1.0
            position += feature.width
        return vector

    def decode(self, vector: np.ndarray) -> Dict[str, object]:
        """Inverse of encode for one-hot categorical blocks."""
        values: Dict[str, object] = {}
        position = 0
        for feature in self.features:
            block = vector[position:position + feature.width]
            if feature.levels is None:
                values[feature.name] = float(block[0])
            else:
                values[feature.name] = feature.levels[int(np.argmax(block))]
            position += feature.width
        return values


class Document(BaseModel):
    """
    A bag-of-words document with its side vector.
    Parameters:
        word_ids (np.ndarray): Sorted distinct word ids
        counts (np.ndarray): Positive count of each word id
        side (np.ndarray): Encoded side vector (length q, may be 0)
        label (str | None): Optional rating / class label
        group (str | None): Optional ground-truth topic group
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    word_ids: np.ndarray
    counts: np.ndarray
    side: np.ndarray
    label: Optional[str] = None
    group: Optional[str] = None

    @field_validator("word_ids", "counts", mode="before")
    @classmethod
    def _as_int_array(cls, value) -> np.ndarray:
        return np.asarray(value, dtype=np.int64).reshape(-1)

    @field_validator("side", mode="before")
    @classmethod
    def _as_float_array(cls, value) -> np.ndarray:
        return np.asarray(value, dtype=np.float64).reshape(-1)

    @model_validator(mode="after")
    def _check_counts(self) -> "Document":
        if self.word_ids.shape != self.counts.shape:
            raise ShapeError("word_ids and counts must have the same length")
        if self.counts.size == 0:
            raise EmptyCorpusError("a document must contain at least one word")
        if np.any(self.counts < 1):
            raise ValueError("word counts must be at least 1")
        if np.any(np.diff(self.word_ids) <= 0):
            raise ValueError("word ids must be sorted and distinct")
        return self

    @classmethod
    def from_tokens(cls, token_ids: List[int], side: np.ndarray, label: Optional[str] = None,
                    group: Optional[str] = None) -> "Document":
        ids, counts = np.unique(np.asarray(token_ids, dtype=np.int64), return_counts=True)
        return cls(word_ids=ids, counts=counts, side=side, label=label, group=group)

    @property
    def length(self) -> int:
        return int(self.counts.sum())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Document):
            return NotImplemented
        return (np.array_equal(self.word_ids, other.word_ids)
                and np.array_equal(self.counts, other.counts)
                and np.array_equal(self.side, other.side)
                and self.label == other.label
                and self.group == other.group)


class Corpus(BaseModel):
    """
    Documents sharing one vocabulary and one side schema.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    vocabulary: Vocabulary
    documents: List[Document]
    side_schema: SideSchema = Field(default_factory=SideSchema)
    skipped_rows: int = 0

    @model_validator(mode="after")
    def _check_documents(self) -> "Corpus":
        if not self.documents:
            raise EmptyCorpusError("a corpus must contain at least one document")
        size = self.vocabulary.size
        q = self.side_schema.dimension
        for d, doc in enumerate(self.documents):
            if doc.word_ids.size and doc.word_ids[-1] >= size:
                raise VocabularyError(f"document {d} uses word id {doc.word_ids[-1]} outside vocabulary of size {size}")
            if doc.side.shape[0] != q:
                raise ShapeError(f"document {d} side vector has dimension {doc.side.shape[0]}, schema expects {q}")
        return self

    @property
    def num_docs(self) -> int:
        return len(self.documents)

    @property
    def num_words(self) -> int:
        return int(sum(doc.length for doc in self.documents))

    @property
    def doc_lengths(self) -> np.ndarray:
        return np.array([doc.length for doc in self.documents], dtype=np.float64)

    @property
    def side_matrix(self) -> np.ndarray:
        return np.vstack([doc.side for doc in self.documents]).reshape(self.num_docs, self.side_schema.dimension)

    @property
    def has_side_data(self) -> bool:
        return self.side_schema.dimension > 0

    @property
    def has_labels(self) -> bool:
        return all(doc.label is not None for doc in self.documents)

    @property
    def has_groups(self) -> bool:
        return all(doc.group is not None for doc in self.documents)

    def tokens(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Flat (doc index, word id, count) arrays over every distinct word of every document."""
        doc_index = np.concatenate([np.full(doc.word_ids.size, d, dtype=np.int64)
                                    for d, doc in enumerate(self.documents)])
        word_ids = np.concatenate([doc.word_ids for doc in self.documents])
        counts = np.concatenate([doc.counts for doc in self.documents]).astype(np.float64)
        return doc_index, word_ids, counts

    def subset(self, indices) -> "Corpus":
        """A corpus of the selected documents with the same vocabulary and schema."""
        return Corpus(vocabulary=self.vocabulary,
                      documents=[self.documents[i] for i in indices],
                      side_schema=self.side_schema)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Corpus):
            return NotImplemented
        return (self.vocabulary == other.vocabulary
                and self.side_schema == other.side_schema
                and len(self.documents) == len(other.documents)
                and all(a == b for a, b in zip(self.documents, other.documents)))
