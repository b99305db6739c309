"""Exception types raised across the package.

Input-side errors (bad files, bad configuration) are distinct from
analysis-side errors (a solver invariant failed); callers that map errors to
process exit codes treat the two branches differently.
"""


class GroverTailsError(Exception):
    """Base class for all package errors."""


# ---------------------------------------------------------------------------
# input / usage errors

class ConfigError(GroverTailsError):
    """A run configuration field is missing, malformed, or inconsistent."""


class IoError(GroverTailsError):
    """An input file could not be read or an output could not be written."""


class GraphFormatError(GroverTailsError):
    """Base class for edge-list parsing and graph validation failures."""


class MalformedLine(GraphFormatError):
    """An edge-list line is not a vertex id or a pair of vertex ids."""


class DuplicateEdge(GraphFormatError):
    """The same undirected edge appears more than once."""


class SelfLoop(GraphFormatError):
    """An edge joins a vertex to itself."""


class Disconnected(GraphFormatError):
    """The described graph is not connected."""


class InvalidVertex(GroverTailsError):
    """A vertex id is outside the graph's vertex range."""


class EmptyAttachment(GroverTailsError):
    """A tail attachment list is empty."""


# ---------------------------------------------------------------------------
# analysis errors: a numerical invariant that must hold for valid inputs
# failed, which indicates a bug or an ill-conditioned case, not bad input.

class AnalysisError(GroverTailsError):
    """Base class for failed solver assertions and verification checks."""


class TruncationTooShort(AnalysisError):
    """Requested steps reach the truncation boundary of the finite tails."""


class NotConverged(AnalysisError):
    """Iteration hit its step budget; carries the last residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class UnstableEigenvalueFound(AnalysisError):
    """An eigenvalue modulus exceeds 1, violating the contraction bound."""


class JordanBlockOnCircle(AnalysisError):
    """A unit-modulus eigenvalue appears with a nontrivial Jordan block."""


class AmbiguousClassification(AnalysisError):
    """An eigenvalue modulus falls in the guard annulus just below 1."""


class ConstructionFailed(AnalysisError):
    """A constructed center-space vector fails its eigen-equation."""


class SpanMismatch(AnalysisError):
    """Computed center eigenspace and constructed basis do not agree."""


class ResidualTooLarge(AnalysisError):
    """A linear-solve or fixed-point residual exceeds its tolerance."""


class CenterLeak(AnalysisError):
    """The stationary state has a component along the center subspace."""


class MatrixMismatch(AnalysisError):
    """The computed scattering matrix differs from the Grover matrix."""

    def __init__(self, message: str, deviation: float, matrix=None):
        super().__init__(message)
        self.deviation = deviation
        self.matrix = matrix


class LawViolated(AnalysisError):
    """A conservation or flow law failed; carries name and magnitude."""

    def __init__(self, name: str, magnitude: float, tolerance: float):
        super().__init__(f"law {name!r} violated: |dev| = {magnitude:.3e} > {tolerance:.1e}")
        self.name = name
        self.magnitude = magnitude
        self.tolerance = tolerance
