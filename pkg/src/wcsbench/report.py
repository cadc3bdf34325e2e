"""Check reports and the exhaustive matrix-unit comparison loop."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable

import numpy as np

from .tensor_core import SparseBatch, matrix_unit_rows, sparse_deviation

DEFAULT_TOLERANCE = 1e-12
DEFAULT_MAX_DIM = 64
MAX_RECORDED_FAILURES = 25

# Both sides of every identity checked here are linear in x, so agreement on
# the matrix-unit basis implies agreement on the whole algebra.
LINEARITY_NOTE = "exhaustive over matrix units; both sides linear, so the basis check is complete"


class BudgetExceeded(ValueError):
    """A check was asked to run above its composite-dimension budget."""


def require_budget(name: str, dim: int, max_dim: int) -> None:
    if dim > max_dim:
        raise BudgetExceeded(
            f"{name}: composite dimension {dim} exceeds budget {max_dim}; "
            f"raise max_dim to run it"
        )


@dataclass
class CheckReport:
    name: str
    instances: int = 0
    max_deviation: float = 0.0
    passed: bool = True
    failures: list[dict] = field(default_factory=list)
    failure_count: int = 0
    tolerance: float = DEFAULT_TOLERANCE
    note: str = ""

    def record(self, instance: str, deviation: float) -> None:
        """Account for one compared instance."""
        self.instances += 1
        self._absorb(instance, deviation)

    def _absorb(self, instance: str, deviation: float) -> None:
        deviation = float(deviation)
        self.max_deviation = max(self.max_deviation, deviation)
        if not deviation <= self.tolerance:
            self.failure_count += 1
            self.passed = False
            if len(self.failures) < MAX_RECORDED_FAILURES:
                self.failures.append({"instance": instance, "deviation": deviation})

    def fail(self, instance: str, reason: str) -> None:
        """Record a failure that is not a numerical deviation."""
        self.failure_count += 1
        self.passed = False
        if len(self.failures) < MAX_RECORDED_FAILURES:
            self.failures.append({"instance": instance, "reason": reason})

    def merge(self, other: "CheckReport") -> "CheckReport":
        self.instances += other.instances
        self.max_deviation = max(self.max_deviation, other.max_deviation)
        self.failure_count += other.failure_count
        self.passed = self.passed and other.passed
        room = MAX_RECORDED_FAILURES - len(self.failures)
        if room > 0:
            self.failures.extend(
                dict(f, instance=f"{other.name}: {f['instance']}") for f in other.failures[:room]
            )
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CheckReport":
        d = dict(d)
        d["passed"] = d.pop("pass")
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        line = f"{status}  {self.name}  instances={self.instances}  max_deviation={self.max_deviation:.3g}"
        if self.failure_count:
            line += f"  failures={self.failure_count}"
        return line


def combine(name: str, reports: Iterable[CheckReport], tolerance: float = DEFAULT_TOLERANCE) -> CheckReport:
    out = CheckReport(name=name, tolerance=tolerance)
    for rep in reports:
        out.merge(rep)
    return out


def compare_on_matrix_units(
    report: CheckReport,
    dim: int,
    lhs: Callable,
    rhs: Callable,
    label: str = "",
    dense: bool = False,
) -> CheckReport:
    """Evaluate ``lhs`` and ``rhs`` on every matrix unit of ``M_dim``.

    By default the callables first receive all units at once as a
    :class:`SparseBatch`.  If either side cannot stay sparse (it raises
    ``TypeError`` or returns a dense array) or ``dense`` is set, the units are
    fed as dense stacks, one row of the basis at a time.  Each unit is recorded as one instance;
    failing units are labeled 1-based as ``E[r,c]``.
    """
    if not dense:
        units = SparseBatch.matrix_units(dim)
        try:
            left, right = lhs(units), rhs(units)
        except TypeError:
            left = right = None
        if isinstance(left, SparseBatch) and isinstance(right, SparseBatch):
            if left.dim != right.dim:
                report.instances += dim * dim
                report.fail(label or "all units", f"dimension mismatch {left.dim} vs {right.dim}")
                return report
            devs = sparse_deviation(left, right).reshape(dim, dim)
            for r in range(dim):
                _record_units(report, label, r, devs[r])
            return report
    for r, batch in matrix_unit_rows(dim):
        left = np.asarray(lhs(batch))
        right = np.asarray(rhs(batch))
        if left.shape != right.shape:
            report.fail(f"{label} row {r + 1}", f"shape mismatch {left.shape} vs {right.shape}")
            report.instances += dim
            continue
        axes = tuple(range(1, left.ndim))
        devs = np.max(np.abs(left - right), axis=axes) if left.size else np.zeros(dim)
        _record_units(report, label, r, devs)
    return report


def _record_units(report: CheckReport, label: str, r: int, devs: np.ndarray) -> None:
    """Record the deviations of the units ``E[r, c]`` for all ``c``."""
    report.instances += devs.size
    worst = float(devs.max()) if devs.size else 0.0
    report.max_deviation = max(report.max_deviation, worst)
    if not worst <= report.tolerance:
        for c in np.flatnonzero(~(devs <= report.tolerance)):
            report._absorb(f"{label} E[{r + 1},{c + 1}]".strip(), devs[c])
