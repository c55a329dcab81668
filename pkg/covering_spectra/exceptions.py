"""Exceptions for covering-spectra.

Every domain failure derives from CoveringError so callers can catch one
type. The CLI maps the hierarchy onto exit codes at the process boundary
(see helpers.cli_command); library code never calls sys.exit.
"""
from __future__ import annotations


class CoveringError(Exception):
    """Base for all covering-spectra errors."""


class UsageError(CoveringError):
    """Malformed command line or input file."""


class InvalidParamsError(CoveringError):
    """Parameters outside the documented range of an operation."""


class TopologyError(CoveringError):
    """A complex or vertex subset does not have the required shape."""


class DisconnectedError(TopologyError):
    """A complex or subset that must be connected is not."""


class NonSurfaceError(TopologyError):
    """A subcomplex is not a surface (edge outside faces or in too many)."""


class BasepointOutsideError(TopologyError):
    """The basepoint does not lie in the given subset."""


class GroupError(CoveringError):
    """Failures of the coset-action layer."""


class InvalidWordError(GroupError):
    """A word uses a letter outside the generator range."""

    def __init__(self, message: str, word: tuple[int, ...] | None = None) -> None:
        super().__init__(message)
        self.word = word


class NotTransitiveError(GroupError):
    """An operation that needs a transitive action got an intransitive one."""


class DegreeTooLargeError(GroupError):
    """Action degree above the configured search bound."""


class BoundExceededError(GroupError):
    """Enumeration index above the configured bound."""


class InfiniteGroupError(GroupError):
    """A finite abelian group was required."""


class CoverError(CoveringError):
    """A cover specification does not define a cover."""


class FaceVoltageError(CoverError):
    """A face boundary has nontrivial total voltage, so the face cannot lift."""

    def __init__(self, message: str, face: int) -> None:
        super().__init__(message)
        self.face = face


class IntertwiningError(CoverError):
    """Transfer operators do not intertwine the Laplacians."""

    def __init__(self, message: str, residual: float) -> None:
        super().__init__(message)
        self.residual = residual


class SpectrumError(CoveringError):
    """Failures of assembly, eigensolvers and spectral queries."""


class MissingCoordinatesError(SpectrumError):
    """Cotangent assembly without vertex coordinates."""


class DegenerateTriangleError(SpectrumError):
    """A triangle area fell below the degeneracy threshold."""

    def __init__(self, message: str, face: int) -> None:
        super().__init__(message)
        self.face = face


class ConvergenceError(SpectrumError):
    """The eigensolver hit its iteration cap above tolerance."""

    def __init__(self, message: str, residuals: list[float]) -> None:
        super().__init__(message)
        self.residuals = residuals


class RangeExceededError(SpectrumError):
    """A query reaches past the certified part of a spectrum."""


class AmbiguousCountError(SpectrumError):
    """An eigenvalue straddles the margin band of a count."""

    def __init__(self, message: str, value: float, eigenvalue: float) -> None:
        super().__init__(message)
        self.value = value
        self.eigenvalue = eigenvalue


class ClusterNotFoundError(SpectrumError):
    """No eigenvalue cluster at the requested value."""


class NodalError(CoveringError):
    """Failures of nodal analysis."""


class AllZeroError(NodalError):
    """The vector vanishes identically."""


class UnreliableDecompositionError(NodalError):
    """The zero set is too large for a meaningful decomposition."""


class SingleDomainError(NodalError):
    """The vector does not change sign."""


class NoCocycleError(NodalError):
    """No intersection cocycle exists for the chosen domain."""


class BoundViolationError(CoveringError):
    """A checked inequality failed on computed data."""

    def __init__(self, message: str, claimed: float | None = None, observed: float | None = None) -> None:
        super().__init__(message)
        self.claimed = claimed
        self.observed = observed


class RankAmbiguousError(CoveringError):
    """A singular value sits too close to the rank tolerance."""


class InvalidSignatureError(CoveringError):
    """Surface signature (g, k, l) outside the admissible range."""
