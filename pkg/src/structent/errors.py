"""Exception types shared across the package.

Two broad families matter to callers: ``ParseError`` for malformed input
files and ``ValidationError`` (with its subclasses) for structurally valid
input that violates a mathematical precondition.
"""

from __future__ import annotations


class StructentError(Exception):
    """Base class for all package-specific errors."""


class ParseError(StructentError):
    """Input text could not be parsed (FASTA, Stockholm, Newick, CSV, JSON)."""


class ValidationError(StructentError):
    """Input parsed fine but violates a documented precondition."""


class AlphabetMismatch(ValidationError):
    """Two objects that must share an alphabet do not."""


class PartitionMismatch(ValidationError):
    """A partition does not partition the alphabet it is used with."""


class EmptySubset(ValidationError):
    """A subset argument that must be non-empty is empty."""


class ZeroMassSubset(ValidationError):
    """Conditioning on a subset of probability zero."""


class ZeroMassSide(ValidationError):
    """A two-block split has a side of probability zero."""


class NotNormalized(ValidationError):
    """A partition structure whose total measure must be 1 is not."""


class NotUltrametric(ValidationError):
    """A distance matrix fails the ultrametric inequality."""


class DegenerateSplit(ValidationError):
    """A binary split carries no entropy, so a ratio against it is undefined."""


class TooFewLetters(ValidationError):
    """An alphabet is smaller than the operation requires."""


class TooFewPoints(ValidationError):
    """A point set on the real line is smaller than the operation requires."""


class DuplicateValues(ValidationError):
    """Real-line points that must be distinct are not."""


class NonMonotoneCdf(ValidationError):
    """A callable presented as a cdf decreases somewhere on the grid."""


class UnsupportedRegime(ValidationError):
    """Inputs are outside the regime where the requested check is exact."""


class SpaceTooLarge(ValidationError):
    """Exhaustive sequence enumeration would exceed the configured cap."""
