class NumericalError(RuntimeError):
    """A computation could not reach its stated accuracy."""


class QuadratureError(NumericalError):
    pass


class ODEError(NumericalError):
    pass


class ConditioningError(NumericalError):
    pass
