"""
MULTIPOLY Errors
Exception hierarchy shared by the library modules
"""

from typing import Any, Optional


class MultipolyError(Exception):
    """Base class for every library error"""


class MalformedInput(MultipolyError, ValueError):
    """Shapes, indices or files that do not describe a valid object"""


class UnsupportedField(MultipolyError):
    """Operation not available for the polynomial's scalar field"""


class BudgetExceeded(MultipolyError):
    """Work would exceed a configured budget; nothing was computed"""

    def __init__(self, what: str, required: float, budget: float):
        self.what = what
        self.required = required
        self.budget = budget
        super().__init__(f"{what}: requires {required:.6g}, budget is {budget:.6g}")


class RecoveryFailure(MultipolyError):
    """Coefficient recovery from values was inconsistent"""

    def __init__(self, message: str, report: Optional[Any] = None):
        self.report = report
        super().__init__(message)
