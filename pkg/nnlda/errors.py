"""
Exceptions raised by the nnlda package.

Every error is a ``ValueError`` so callers that only guard against bad input
keep working; the CLI catches ``NnldaError`` and turns it into exit code 1.
"""


class NnldaError(ValueError):
    """Base class for all nnlda errors."""


class SchemaError(NnldaError):
    """A CSV column or side-feature level is missing or unknown."""


class EmptyCorpusError(NnldaError):
    """No usable documents were found."""


class DomainError(NnldaError):
    """A numerical kernel was called outside its domain."""


class ShapeError(NnldaError):
    """Array dimensions disagree."""


class ContractError(NnldaError):
    """A cached value does not belong to the object it is used with."""


class NonFiniteError(NnldaError):
    """A NaN or infinity showed up in an intermediate result."""


class ConfigurationError(NnldaError):
    """The requested task cannot run with the given data or settings."""


class RangeError(NnldaError):
    """An index is out of its valid range."""


class VocabularyError(NnldaError):
    """A word is unknown to the vocabulary, or two vocabularies disagree."""


class ModelFileError(NnldaError):
    """A model file could not be parsed."""


class ModelVersionError(ModelFileError):
    """A model file was written with an unsupported schema version."""
