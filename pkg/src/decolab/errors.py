"""Exception hierarchy shared by every decolab module."""


class DecolabError(Exception):
    """Base class for domain-level failures (CLI exit code 1)."""


class DomainError(DecolabError, ValueError):
    """Input lies outside the domain of the requested operation."""


class ConvergenceError(DecolabError, ArithmeticError):
    """An iterative solver failed to converge.

    Attributes
    ----------
    last : object
        Last iterate reached before giving up.
    residual : float
        Last residual magnitude.
    """

    def __init__(self, msg, last=None, residual=None):
        super().__init__(msg)
        self.last = last
        self.residual = residual


class DegenerateError(DecolabError, ArithmeticError):
    """Singular Jacobian, period collapse or a mislabeled solution."""
