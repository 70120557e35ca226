"""Exceptions raised by the toolkit."""


class CartanKitError(Exception):
    """Base class for every error raised by cartankit."""
    exit_code = 2


class ShapeError(CartanKitError, ValueError):
    """Matrix dimensions do not fit the operation."""


class ValidationError(CartanKitError, ValueError):
    """An input object violates its type invariants."""


class PreconditionError(CartanKitError, ValueError):
    """An operation was called outside its precondition."""


class ResourceLimitError(CartanKitError):
    """A dimension cap or a node budget was exceeded."""
    exit_code = 3

    def __init__(self, message: str, nodes: int = 0):
        super().__init__(message)
        self.nodes = nodes


class IncompleteScenarioError(CartanKitError):
    """A block scenario lacks l-values or Cartan matrices."""


class InconsistencyError(CartanKitError):
    """Inputs contradict each other, or a self-check failed."""
    exit_code = 1


class FixtureError(CartanKitError):
    """A fixture file is missing or malformed."""
