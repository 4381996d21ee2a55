"""Exception types shared across the package."""


class ItoSeriesError(Exception):
    pass


class DomainError(ItoSeriesError, ValueError):
    """An argument violates a documented precondition."""


class QuadratureError(ItoSeriesError, RuntimeError):
    """Quadrature failed to reach its accuracy target."""


class MemoryBudgetError(ItoSeriesError, MemoryError):
    pass
