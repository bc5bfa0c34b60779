"""Exception hierarchy shared by every module."""


class LayerCakeError(Exception):
    """Base class for all library errors."""


class InvalidInput(LayerCakeError, ValueError):
    pass


class SpaceMismatch(LayerCakeError, ValueError):
    pass


class UnsupportedCombination(LayerCakeError, TypeError):
    pass


class Diverged(LayerCakeError, ArithmeticError):
    """A weight integral over the requested set is infinite."""


class PreconditionViolation(LayerCakeError, ValueError):
    pass


class NonCancellationViolated(LayerCakeError, ValueError):
    pass


class SizeLimit(LayerCakeError, ValueError):
    pass


class InvalidGrid(LayerCakeError, ValueError):
    pass
