"""Exception hierarchy shared by all headcam modules."""


class HeadcamError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(HeadcamError):
    """Operand dimensions do not match the operation's contract."""


class ValidationError(HeadcamError):
    """Input data violates a structural precondition (manifest, symmetry, labels...)."""


class IntegrityError(HeadcamError):
    """Loaded data is structurally well-formed but breaks a numeric invariant."""


class InsufficientSamplesError(ValidationError):
    """Fewer observations than the estimator requires."""


class DegenerateSpectrumError(HeadcamError):
    """All eigenvalues are zero; normalized contributions are undefined."""


class DegenerateLabelsError(ValidationError):
    """Training data contains a single class."""


class ConvergenceError(HeadcamError):
    """Iterative solver hit its iteration cap before reaching tolerance."""


class UnsupportedKernelError(HeadcamError):
    """Operation is only defined for a different kernel type."""


class LayerPositionError(HeadcamError):
    """Requested layer index is incompatible with the head depth."""


class TraceDepthError(HeadcamError):
    """Forward trace does not contain the requested layer."""


class StateError(HeadcamError):
    """Required intermediate results are missing from a bundle."""


class NumericError(HeadcamError):
    """A numeric evaluation produced non-finite values."""
