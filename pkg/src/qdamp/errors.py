"""Exception types shared across the package."""


class QdampError(Exception):
    """Base class for all package-specific errors."""


class ZeroNormError(QdampError, ValueError):
    """Radial projection was asked for a zero-length Bloch vector."""


class UndefinedPointError(QdampError, ValueError):
    """The renormalized map was evaluated at its single ill-defined point."""


class IndexOutOfRangeError(QdampError, IndexError):
    """A qubit index does not exist in the register."""


class ControlEqualsTargetError(QdampError, ValueError):
    """CNOT control and target must be distinct qubits."""


class DimensionMismatchError(QdampError, ValueError):
    """Operands describe registers or vectors of different dimension."""


class TooFewQubitsError(QdampError, ValueError):
    """Circuit sampling needs at least two qubits to draw CNOT pairs."""


class NotAProbabilityVectorError(QdampError, ValueError):
    """Input is not a valid probability vector."""


class EmptyEnsembleError(QdampError, ValueError):
    """Ensemble statistics need at least two members."""
