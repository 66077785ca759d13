"""Error categories shared by every toolkit module"""

import logging
from typing import Optional

logger = logging.getLogger(__name__)


EXIT_CODES = {
    "usage": 2,
    "config": 3,
    "domain": 4,
    "invariant": 5,
    "convergence": 6,
}


class ToolkitError(Exception):
    """Base class for failures raised by the toolkit"""

    category = "toolkit"

    def __init__(self, message: str, module: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.module = module or "app"

    def describe(self) -> str:
        return f"[{self.category}:{self.module}] {self.message}"

    def to_record(self) -> dict:
        return {
            "category": self.category,
            "module": self.module,
            "message": self.message,
            "exit_code": exit_code_for(self),
        }


class DomainError(ToolkitError, ValueError):
    """An input lies outside the domain of an operation"""

    category = "domain"


class InvariantViolation(ToolkitError):
    """A structural invariant (monotonicity, orientation, |mu| < 1) failed"""

    category = "invariant"


class ConvergenceError(ToolkitError):
    """An iterative limit did not settle within its refinement budget"""

    category = "convergence"


class ConfigError(ToolkitError):
    """Run configuration could not be read or validated"""

    category = "config"


class UsageError(ToolkitError):
    category = "usage"


def exit_code_for(error: BaseException) -> int:
    """
    Map an exception to the CLI exit status.

    Args:
        error: Exception raised while running a command

    Returns:
        Distinct nonzero code per category, 1 for anything unexpected
    """
    if isinstance(error, ToolkitError):
        return EXIT_CODES.get(error.category, 1)
    return 1
