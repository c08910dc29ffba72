"""Exception types shared across the package."""


class ConvexLabError(Exception):
    pass


class DomainError(ConvexLabError, ValueError):
    """Argument outside the domain of an operation (e.g. det F <= 0)."""


class SeamError(DomainError):
    """Derivative requested on a declared non-smooth seam.

    ``left`` and ``right`` hold the one-sided partial derivatives (as tuples)
    so callers can still inspect the kink.
    """

    def __init__(self, message, left=None, right=None):
        super().__init__(message)
        self.left = left
        self.right = right


class SmoothnessError(ConvexLabError):
    """An energy does not claim enough smoothness for the requested check."""


class SeparationError(DomainError):
    """Point too close to the diagonal lambda1 == lambda2."""


class ParseError(ConvexLabError, ValueError):
    def __init__(self, message, position, token):
        super().__init__(f"{message} at position {position} (token {token!r})")
        self.position = position
        self.token = token


class PreconditionError(ConvexLabError, ValueError):
    """Inputs violate a stated precondition (e.g. an endpoint outside S_c)."""
