"""Verification workbench for the matrix weakly coassociative system, its
componentwise tensor powers, and the failure of quasi-cocommutativity in
their inductive limit."""

from .report import BudgetExceeded, CheckReport
from .tensor_core import IndexPermutation

__all__ = ["BudgetExceeded", "CheckReport", "IndexPermutation"]
__version__ = "0.1.0"
