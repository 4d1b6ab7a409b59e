"""
qubit_channels errors

Exception hierarchy shared by the algebra kernels, the channel oracle and the CLI.
"""
from typing import Any, Dict, Optional


class QubitChannelsError(Exception):
    """Base error for the qubit channel toolkit"""

    exit_code: int = 1

    def __init__(self, message: str):
        """
        Initializes a new instance of the class.

        Args:
            message (str): The error message.
        """
        self.message = message
        super().__init__(message)

    def context(self) -> Dict[str, Any]:
        """
        Structured details for log context; empty unless a subclass carries some.

        Returns:
            Dict[str, Any]: Detail name to value, unset details omitted.
        """
        return {}


class AlgebraContextError(QubitChannelsError):
    """Operands live in different Grassmann algebras, or a generator pair is unknown"""


class DomainError(QubitChannelsError, ValueError):
    """An argument lies outside the domain of the operation"""

    exit_code = 2


class ChannelValidationError(QubitChannelsError):
    """A channel description is not completely positive and trace preserving"""

    exit_code = 2

    def __init__(self, message: str, min_eigenvalue: Optional[float] = None):
        """
        Initializes a new instance of the class.

        Args:
            message (str): The error message.
            min_eigenvalue (Optional[float]): Most negative Choi eigenvalue, when known.
        """
        self.min_eigenvalue = min_eigenvalue
        super().__init__(message)

    def context(self) -> Dict[str, Any]:
        return {} if self.min_eigenvalue is None else {"min_eigenvalue": f"{self.min_eigenvalue:.3e}"}


class ClassificationError(QubitChannelsError):
    """A degradability witness failed its residual gate"""


class CrossCheckError(QubitChannelsError):
    """An oracle cross-check residual exceeded its tolerance"""

    def __init__(self, message: str, check: str, residual: float, tolerance: float):
        """
        Initializes a new instance of the class.

        Args:
            message (str): The error message.
            check (str): Name of the failing cross-check.
            residual (float): Observed residual.
            tolerance (float): Tolerance the residual was tested against.
        """
        self.check = check
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(message)

    def context(self) -> Dict[str, Any]:
        return {"check": self.check, "residual": f"{self.residual:.3e}", "tolerance": self.tolerance}


class SpecParseError(QubitChannelsError):
    """Malformed channel specification or sweep configuration"""

    exit_code = 2

    def __init__(
        self, message: str, field: Optional[str] = None, line: Optional[int] = None
    ):
        """
        Initializes a new instance of the class.

        Args:
            message (str): The error message.
            field (Optional[str]): Offending field, dotted path.
            line (Optional[int]): Line number in the source document, when known.
        """
        self.field = field
        self.line = line
        super().__init__(message)

    def context(self) -> Dict[str, Any]:
        details = {"field": self.field, "line": self.line}
        return {k: v for k, v in details.items() if v is not None}
