"""Exception types shared across the package."""


class FpAutError(Exception):
    """Base class for all errors raised by this package."""


class IndexOutOfRange(FpAutError):
    """A syllable or generator references a nonexistent factor or letter."""


class PresentationMismatch(FpAutError):
    """Two operands live over different presentations."""


class EmptyWord(FpAutError):
    """Operation requires a nonempty word."""


class NotAnAutomorphism(FpAutError):
    """The image/inverse-image tables fail the two-sided inverse check."""


class NotFactorPreserving(FpAutError):
    """Some factor image is not a conjugate of an abelian factor."""


class FactorsPermuted(FpAutError):
    """Operation requires the factor permutation to be the identity."""


class ZeroMatrix(FpAutError):
    """Spectral data of the zero matrix was requested."""


class UnknownDirection(FpAutError):
    """A turn involves a direction outside the encountered set of a gate
    structure; recompute the gates at a larger depth."""


class DifferentVertices(FpAutError):
    """Angle requested between directions not based at the same non-free
    vertex."""


class TooShort(FpAutError):
    """Growth classification needs a longer orbit sequence."""


class DimensionMismatch(FpAutError):
    """Vectors or matrices have inconsistent dimensions."""


class ParseError(FpAutError):
    """Malformed word or automorphism text.

    Carries the character position of the offending token.
    """

    def __init__(self, position, message):
        super().__init__(f"at position {position}: {message}")
        self.position = position
        self.message = message
