"""Exception hierarchy.

Two families matter to callers: ValidationError (bad input or bad usage,
CLI exit code 1) and NumericalCheckError (a computation ran but failed an
internal consistency check, CLI exit code 2).
"""


class GraphSpectraError(Exception):
    pass


class ValidationError(GraphSpectraError):
    pass


class NumericalCheckError(GraphSpectraError):
    pass


# -- graph construction / surgery --------------------------------------------

class DisconnectedGraph(ValidationError):
    pass


class NonpositiveLength(ValidationError):
    pass


class DirichletAtInternalVertex(ValidationError):
    pass


class DuplicateId(ValidationError):
    pass


class UnknownId(ValidationError):
    pass


class ParseError(ValidationError):
    pass


class OffsetOutOfRange(ValidationError):
    pass


class PartitionNotCovering(ValidationError):
    pass


class AlphaSumMismatch(ValidationError):
    pass


class DirichletGlue(ValidationError):
    pass


class EpsilonTooLarge(ValidationError):
    pass


# -- secular / torus ----------------------------------------------------------

class NonpositiveK(ValidationError):
    pass


class RobinNotSupportedOnTorus(ValidationError):
    pass


# -- spectral -----------------------------------------------------------------

class WeylCountMismatch(NumericalCheckError):
    pass


class NoConvergence(NumericalCheckError):
    pass


# -- eigenmode ----------------------------------------------------------------

class NullSpaceDimensionMismatch(NumericalCheckError):
    pass


class CoordinateOutOfRange(ValidationError):
    pass


# -- genericity ---------------------------------------------------------------

class CircleExcluded(ValidationError):
    pass


class NoPointFound(NumericalCheckError):
    pass


class PathThroughDegeneracy(NumericalCheckError):
    pass


# -- manifold -----------------------------------------------------------------

class DimensionTooLarge(ValidationError):
    pass


class DimensionNot3(ValidationError):
    pass


class ResolutionTooSmall(ValidationError):
    pass


class MixedSignAtSmoothCell(NumericalCheckError):
    pass
