"""Exception hierarchy shared by all nbspectra modules."""


class NbspectraError(Exception):
    """Base class for every error raised by this package."""


# graph construction / validation

class SelfLoopError(NbspectraError):
    """An edge (u, u) was supplied."""


class DuplicateEdgeError(NbspectraError):
    """The same undirected edge appeared more than once."""


class NodeOutOfRangeError(NbspectraError):
    """An edge endpoint lies outside [0, n)."""


class GraphFormatError(NbspectraError):
    """An edge-list or labels file could not be parsed."""


# operator construction / linear algebra

class LengthMismatchError(NbspectraError):
    """A vector has the wrong length for the operation."""


class ShapeMismatchError(NbspectraError):
    """Operands have incompatible shapes."""


class DegreeTooSmallError(NbspectraError):
    """A node of degree < 2 makes the requested operator undefined."""


class NoConvergenceError(NbspectraError):
    """An iterative routine hit its iteration cap before converging."""


class DimensionCapError(NbspectraError):
    """The matrix exceeds the configured dense-decomposition cap."""


class InsufficientRealRitzError(NbspectraError):
    """Fewer real Ritz values stabilized than were requested.

    The partial result (values found so far and their vectors) is attached
    as the ``found`` attribute when available.
    """

    def __init__(self, message, found=None):
        super().__init__(message)
        self.found = found


class NotEnoughPositiveRealsError(NbspectraError):
    """The spectrum does not contain the requested number of positive reals."""


class DegenerateBilinearFormError(NbspectraError):
    """The reversal pairing is singular and the transpose fallback failed."""


class RankDeficientError(NbspectraError):
    """A matrix required to have full column rank does not."""


# parameters and bookkeeping

class BadParameterError(NbspectraError):
    """A numeric parameter violates its documented constraints."""


class EmptyCoreError(NbspectraError):
    """The 2-core of a sampled graph is empty."""


class CountMismatchError(NbspectraError):
    """Two sequences that must have equal length do not."""


class DegenerateInputError(NbspectraError):
    """Clustering input has fewer distinct points than clusters."""


class IsolatedNodeError(NbspectraError):
    """A node without incident edges reached an edge-aggregation step."""
