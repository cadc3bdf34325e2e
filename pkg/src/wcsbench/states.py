"""Eventually periodic pure product states on ``M_n^{(x)inf}`` and the
non-quasi-cocommutativity certificate.

A product state is described by a unit vector per slot: a finite prefix
followed by a period repeated forever.  Two such states have unitarily
equivalent GNS representations iff ``sum_k (1 - |<xi_k, eta_k>|)`` converges
(the standard product-state criterion, imported here as the decision
procedure).  For eventually periodic data this happens iff every slot of an
aligned period has overlap 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from math import lcm
from typing import Optional, Sequence

import numpy as np

from .graded import BlockRMatrix, check_quasi_cocommutativity
from .power import phi_power
from .report import DEFAULT_MAX_DIM, DEFAULT_TOLERANCE, CheckReport, require_budget
from .tensor_core import DTYPE, DimensionError, matrix_unit_rows

NORM_TOLERANCE = 1e-12


def _slot_vector(v, dim: int) -> np.ndarray:
    arr = np.array(v, dtype=DTYPE).reshape(-1)
    if arr.size != dim:
        raise DimensionError(f"slot vector has dimension {arr.size}, expected {dim}")
    if abs(np.linalg.norm(arr) - 1.0) > NORM_TOLERANCE:
        raise ValueError(f"slot vector is not a unit vector (norm {np.linalg.norm(arr)})")
    arr.flags.writeable = False
    return arr


def _same_vector(u: np.ndarray, v: np.ndarray) -> bool:
    return bool(np.max(np.abs(u - v)) <= NORM_TOLERANCE)


def _primitive_period(period: list) -> list:
    n = len(period)
    for p in range(1, n + 1):
        if n % p == 0 and all(_same_vector(period[k], period[k % p]) for k in range(n)):
            return period[:p]
    return period


@dataclass(frozen=True)
class ProductStateDesc:
    """Slot vectors ``prefix + period + period + ...`` for a product state.

    Instances are kept in canonical form: the period is primitive and the
    prefix does not end with a slot that could be rotated into the period.
    """

    slot_dim: int
    prefix: tuple = ()
    period: tuple = field(default=())

    def __post_init__(self):
        if self.slot_dim < 1:
            raise ValueError("slot_dim must be >= 1")
        if not self.period:
            raise ValueError("period must be nonempty")
        prefix = [_slot_vector(v, self.slot_dim) for v in self.prefix]
        period = _primitive_period([_slot_vector(v, self.slot_dim) for v in self.period])
        while prefix and _same_vector(prefix[-1], period[-1]):
            period = [prefix.pop()] + period[:-1]
        object.__setattr__(self, "prefix", tuple(prefix))
        object.__setattr__(self, "period", tuple(period))

    def slot(self, k: int) -> np.ndarray:
        """Slot vector ``k`` (0-based)."""
        if k < len(self.prefix):
            return self.prefix[k]
        return self.period[(k - len(self.prefix)) % len(self.period)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ProductStateDesc):
            return NotImplemented
        return (
            self.slot_dim == other.slot_dim
            and len(self.prefix) == len(other.prefix)
            and len(self.period) == len(other.period)
            and all(_same_vector(u, v) for u, v in zip(self.prefix + self.period, other.prefix + other.period))
        )

    __hash__ = None

    def to_dict(self) -> dict:
        def enc(v):
            return [[float(z.real), float(z.imag)] for z in v]

        return {
            "slot_dim": self.slot_dim,
            "prefix": [enc(v) for v in self.prefix],
            "period": [enc(v) for v in self.period],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProductStateDesc":
        def dec(v):
            return np.array([complex(re, im) for re, im in v], dtype=DTYPE)

        return cls(d["slot_dim"], tuple(dec(v) for v in d["prefix"]), tuple(dec(v) for v in d["period"]))


def diagonal_pure_state(n: int, i: int) -> ProductStateDesc:
    """The product of the vector state ``x -> x_ii`` in every slot (``i`` 1-based)."""
    if not 1 <= i <= n:
        raise ValueError(f"index {i} out of range for n={n}")
    e = np.zeros(n, dtype=DTYPE)
    e[i - 1] = 1.0
    return ProductStateDesc(n, (), (e,))


def slot_state_value(v: np.ndarray, x: np.ndarray) -> complex:
    """``<v, x v>`` for a single slot."""
    return complex(np.vdot(v, x @ v))


def star(s: ProductStateDesc, t: ProductStateDesc) -> ProductStateDesc:
    """Slotwise Kronecker product; a state on ``M_{nm}^{(x)inf}``.

    At finite level ``k`` this is the state ``(s (x) t) o phi^{(k)}_{n,m}``.
    """
    pre = max(len(s.prefix), len(t.prefix))
    per = lcm(len(s.period), len(t.period))
    slots = [np.kron(s.slot(k), t.slot(k)) for k in range(pre + per)]
    return ProductStateDesc(s.slot_dim * t.slot_dim, tuple(slots[:pre]), tuple(slots[pre:]))


def finite_level_vector(s: ProductStateDesc, k: int) -> np.ndarray:
    out = s.slot(0)
    for j in range(1, k):
        out = np.kron(out, s.slot(j))
    return out


def finite_level_state(s: ProductStateDesc, k: int, max_dim: int = 4096) -> np.ndarray:
    """Density matrix of the restriction to ``M_n^{(x)k}``."""
    if k < 1:
        raise ValueError("level must be >= 1")
    require_budget(f"finite-level state k={k}", s.slot_dim**k, max_dim)
    v = finite_level_vector(s, k)
    return np.outer(v, np.conj(v))


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    eig = np.linalg.eigvalsh(rho - sigma)
    return float(0.5 * np.sum(np.abs(eig)))


@dataclass
class EquivalenceVerdict:
    equivalent: bool
    prefix_deficit_sum: float
    period_deficits: list[float]
    diverges: bool
    prefix_deficits: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "equivalent": self.equivalent,
            "prefix_deficit_sum": self.prefix_deficit_sum,
            "period_deficits": list(self.period_deficits),
            "diverges": self.diverges,
            "prefix_deficits": list(self.prefix_deficits),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EquivalenceVerdict":
        return cls(**d)


def equivalent(
    s: ProductStateDesc, t: ProductStateDesc, tolerance: float = DEFAULT_TOLERANCE
) -> EquivalenceVerdict:
    """Decide unitary equivalence of the GNS representations of ``s`` and ``t``."""
    if s.slot_dim != t.slot_dim:
        raise DimensionError(f"slot dimensions differ: {s.slot_dim} vs {t.slot_dim}")
    pre = max(len(s.prefix), len(t.prefix))
    per = lcm(len(s.period), len(t.period))
    deficits = [1.0 - abs(np.vdot(s.slot(k), t.slot(k))) for k in range(pre + per)]
    # rounding can push |<u,v>| a hair above 1
    deficits = [max(0.0, float(d)) for d in deficits]
    prefix_def, period_def = deficits[:pre], deficits[pre:]
    ok = all(d <= tolerance for d in period_def)
    return EquivalenceVerdict(
        equivalent=ok,
        prefix_deficit_sum=float(sum(prefix_def)),
        period_deficits=period_def,
        diverges=not ok,
        prefix_deficits=prefix_def,
    )


def star_state_oracle(s: ProductStateDesc, t: ProductStateDesc, k: int) -> np.ndarray:
    """Values of ``(s (x) t) o phi^{(k)}_{n,m}`` on every matrix unit, as a matrix.

    Entry ``[r, c]`` is the value on ``E_{r,c}`` of ``M_{nm}^{(x)k}``.
    Goes through the powered structure map rather than the slot rule.
    """
    n, m = s.slot_dim, t.slot_dim
    rho = np.kron(finite_level_state(s, k), finite_level_state(t, k))
    d = (n * m) ** k
    out = np.empty((d, d), dtype=DTYPE)
    for r, units in matrix_unit_rows(d):
        images = phi_power(n, m, k, units)
        out[r] = np.einsum("ij,nji->n", rho, images)
    return out


class Conclusion(str, Enum):
    NOT_QUASI_COCOMMUTATIVE = "NotQuasiCocommutative"


class CertificateRefused(RuntimeError):
    """The pipeline could not justify the conclusion."""

    def __init__(self, message: str, report: Optional[CheckReport] = None):
        super().__init__(message)
        self.report = report


@dataclass
class ObstructionCertificate:
    stage_reports: list[CheckReport]
    state_pair: tuple[ProductStateDesc, ProductStateDesc]
    verdict: EquivalenceVerdict
    conclusion: Conclusion
    diagnostics: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        left, right = self.state_pair
        return {
            "stages": [r.to_dict() for r in self.stage_reports],
            "state_pair": {"left": left.to_dict(), "right": right.to_dict()},
            "verdict": self.verdict.to_dict(),
            "conclusion": self.conclusion.value,
            "diagnostics": self.diagnostics,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "ObstructionCertificate":
        return cls(
            stage_reports=[CheckReport.from_dict(r) for r in d["stages"]],
            state_pair=(
                ProductStateDesc.from_dict(d["state_pair"]["left"]),
                ProductStateDesc.from_dict(d["state_pair"]["right"]),
            ),
            verdict=EquivalenceVerdict.from_dict(d["verdict"]),
            conclusion=Conclusion(d["conclusion"]),
            diagnostics=d.get("diagnostics", []),
        )


def build_obstruction_certificate(
    stage_powers: Sequence[int] = (1, 2),
    cutoff: int = 4,
    level_budget: int = 4,
    r_blocks: Optional[dict[int, BlockRMatrix]] = None,
    max_dim: int = DEFAULT_MAX_DIM,
    tolerance: float = DEFAULT_TOLERANCE,
) -> ObstructionCertificate:
    """Certify that the inductive limit of the stages is not quasi-cocommutative.

    Every finite stage must pass the quasi-cocommutativity check.  The two
    star products of the diagonal states on ``M_2`` are then compared; an
    inequivalent pair gives inequivalent ``(pi_1 (x) pi_2) o Delta`` and
    ``(pi_2 (x) pi_1) o Delta`` on the limit, which no universal R-matrix
    allows.  ``r_blocks`` substitutes R-matrix families per stage and exists
    for negative controls.
    """
    r_blocks = r_blocks or {}
    stages = []
    for i in stage_powers:
        rep = check_quasi_cocommutativity(cutoff, i, r=r_blocks.get(i), max_dim=max_dim, tolerance=tolerance)
        stages.append(rep)
        if not rep.passed:
            raise CertificateRefused(f"stage i={i} failed its quasi-cocommutativity check", rep)

    w1, w2 = diagonal_pure_state(2, 1), diagonal_pure_state(2, 2)
    left, right = star(w1, w2), star(w2, w1)
    verdict = equivalent(left, right, tolerance)
    if verdict.equivalent:
        raise CertificateRefused("star products are equivalent; no obstruction found")

    diagnostics = []
    for k in range(1, level_budget + 1):
        rho, sigma = finite_level_state(left, k), finite_level_state(right, k)
        diagnostics.append(
            {
                "level": k,
                "overlap": float(abs(np.vdot(finite_level_vector(left, k), finite_level_vector(right, k)))),
                "trace_distance": trace_distance(rho, sigma),
            }
        )
    return ObstructionCertificate(
        stage_reports=stages,
        state_pair=(left, right),
        verdict=verdict,
        conclusion=Conclusion.NOT_QUASI_COCOMMUTATIVE,
        diagnostics=diagnostics,
    )
