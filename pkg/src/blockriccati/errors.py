"""Exception hierarchy."""


class BlockRiccatiError(Exception):
    """Base class for all errors raised by this package."""


class NotHermitian(BlockRiccatiError, ValueError):
    pass


class NoConvergence(BlockRiccatiError, RuntimeError):
    pass


class Singular(BlockRiccatiError, ValueError):
    pass


class DimensionMismatch(BlockRiccatiError, ValueError):
    pass


class ClassificationResidual(BlockRiccatiError, RuntimeError):
    """No eigenvalue case equation closed within the residual tolerance."""


class DependentWitnesses(BlockRiccatiError, ValueError):
    pass


class CaseEquationFailed(BlockRiccatiError, ValueError):
    pass


class DegenerateSpectrum(BlockRiccatiError, ValueError):
    pass
