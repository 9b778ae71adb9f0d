"""Exception hierarchy shared by every triplekit module."""


class TriplekitError(Exception):
    """Base class for all library errors."""


class ShapeMismatch(TriplekitError, ValueError):
    pass


class BackendMismatch(TriplekitError, TypeError):
    pass


class Singular(TriplekitError, ArithmeticError):
    pass


class GenerationFailed(TriplekitError, RuntimeError):
    pass


class NotIdempotent(TriplekitError, ValueError):
    pass


class NotTripotent(TriplekitError, ValueError):
    pass


class NotTripleMorphism(TriplekitError, ValueError):
    pass


class ClassifyError(TriplekitError):
    """Raised when a map cannot be brought to canonical form.

    ``step`` names the stage of the recovery that failed.
    """

    step = "classify"


class NotUnitalSign(ClassifyError):
    step = "sign"


class UnsupportedScalarAuto(ClassifyError):
    step = "scalar_auto"


class DichotomyViolation(ClassifyError):
    step = "variant"


class RecoveryFailure(ClassifyError):
    step = "recovery"


class InconsistentH(TriplekitError, ValueError):
    pass


class SchemaError(TriplekitError, ValueError):
    """A JSON document does not match the expected encoding."""
