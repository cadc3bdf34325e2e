"""Truncated direct-sum bialgebras ``M^{(x)i}(*) = (+)_a M_a^{(x)i}``.

Elements are finite block families.  The comultiplication sends block ``a``
to the family ``phi^{(i)}_{b,c}(x_a)`` over divisor pairs ``b*c = a``, so a
cutoff ``N`` on the block index is harmless: every identity checked here
only involves blocks whose indices divide some ``a <= N``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Mapping, Optional

import numpy as np

from .power import phi_power, phi_power_map, psi_embed, rmatrix_power
from .report import (
    DEFAULT_MAX_DIM,
    DEFAULT_TOLERANCE,
    LINEARITY_NOTE,
    CheckReport,
    require_budget,
)
from .tensor_core import (
    DTYPE,
    DimensionError,
    IndexPermutation,
    adjoint,
    conjugate,
    flip,
    identity,
    matrix_unit_rows,
)
from .wcs import divisor_pairs, divisor_triples


def _freeze(blocks: Mapping, expected_dim: Callable) -> dict:
    out = {}
    for key, block in blocks.items():
        arr = np.array(block, dtype=DTYPE)
        d = expected_dim(key)
        if arr.shape != (d, d):
            raise DimensionError(f"block {key} must be {d}x{d}, got {arr.shape}")
        arr.flags.writeable = False
        out[key] = arr
    return out


@dataclass(frozen=True)
class GradedElement:
    """A block family ``(x_a)_{a <= cutoff}`` with ``x_a`` of dimension ``a**power``."""

    cutoff: int
    power: int = 1
    blocks: Mapping[int, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        for a in self.blocks:
            if not 1 <= a <= self.cutoff:
                raise ValueError(f"block index {a} outside 1..{self.cutoff}")
        object.__setattr__(self, "blocks", _freeze(self.blocks, lambda a: a**self.power))

    def block(self, a: int) -> np.ndarray:
        if a in self.blocks:
            return self.blocks[a]
        return np.zeros((a**self.power,) * 2, dtype=DTYPE)

    def _same_shape(self, other: "GradedElement") -> None:
        if (self.cutoff, self.power) != (other.cutoff, other.power):
            raise DimensionError("graded elements live in different algebras")

    def __add__(self, other: "GradedElement") -> "GradedElement":
        self._same_shape(other)
        keys = sorted(set(self.blocks) | set(other.blocks))
        return GradedElement(self.cutoff, self.power, {a: self.block(a) + other.block(a) for a in keys})

    def __matmul__(self, other: "GradedElement") -> "GradedElement":
        self._same_shape(other)
        keys = sorted(set(self.blocks) & set(other.blocks))
        return GradedElement(self.cutoff, self.power, {a: self.blocks[a] @ other.blocks[a] for a in keys})

    def scale(self, s: complex) -> "GradedElement":
        return GradedElement(self.cutoff, self.power, {a: s * x for a, x in self.blocks.items()})

    def adjoint(self) -> "GradedElement":
        return GradedElement(self.cutoff, self.power, {a: adjoint(x) for a, x in self.blocks.items()})

    @classmethod
    def unit_block(cls, cutoff: int, power: int, a: int, i: int, j: int) -> "GradedElement":
        """Matrix unit ``E_{i,j}`` (1-based) placed in block ``a``."""
        x = np.zeros((a**power,) * 2, dtype=DTYPE)
        x[i - 1, j - 1] = 1.0
        return cls(cutoff, power, {a: x})


@dataclass(frozen=True)
class BipartiteGradedElement:
    """A block family indexed by pairs, block ``(b,c)`` in ``M_b^{(x)i} (x) M_c^{(x)i}``."""

    cutoff: int
    power: int = 1
    blocks: Mapping[tuple[int, int], np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(
            self, "blocks", _freeze(self.blocks, lambda k: (k[0] * k[1]) ** self.power)
        )

    def block(self, b: int, c: int) -> np.ndarray:
        if (b, c) in self.blocks:
            return self.blocks[(b, c)]
        return np.zeros(((b * c) ** self.power,) * 2, dtype=DTYPE)

    def radices(self, b: int, c: int) -> tuple[int, int]:
        return (b**self.power, c**self.power)

    def __matmul__(self, other: "BipartiteGradedElement") -> "BipartiteGradedElement":
        keys = sorted(set(self.blocks) & set(other.blocks))
        return BipartiteGradedElement(
            self.cutoff, self.power, {k: self.blocks[k] @ other.blocks[k] for k in keys}
        )

    def adjoint(self) -> "BipartiteGradedElement":
        return BipartiteGradedElement(
            self.cutoff, self.power, {k: adjoint(x) for k, x in self.blocks.items()}
        )

    def max_abs_diff(self, other: "BipartiteGradedElement") -> float:
        keys = set(self.blocks) | set(other.blocks)
        return max(
            (float(np.max(np.abs(self.block(*k) - other.block(*k)))) for k in keys), default=0.0
        )


@dataclass(frozen=True)
class BlockRMatrix:
    """Blockwise universal R-matrix ``(R^{(a,b:i)})_{a,b <= cutoff}``."""

    cutoff: int
    power: int
    blocks: Mapping[tuple[int, int], IndexPermutation]

    def __post_init__(self):
        for (a, b), p in self.blocks.items():
            if p.size != (a * b) ** self.power:
                raise DimensionError(f"R block ({a},{b}) has size {p.size}")

    @classmethod
    def standard(cls, cutoff: int, power: int = 1) -> "BlockRMatrix":
        blocks = {
            (a, b): rmatrix_power(a, b, power)
            for a in range(1, cutoff + 1)
            for b in range(1, cutoff + 1)
        }
        return cls(cutoff, power, blocks)

    def tampered(self, key: tuple[int, int], i: int = 0, j: int = 1) -> "BlockRMatrix":
        """Copy with block ``key`` composed with the transposition ``(i j)``."""
        p = self.blocks[key]
        blocks = dict(self.blocks)
        blocks[key] = p.compose(IndexPermutation.transposition(p.size, i, j))
        return BlockRMatrix(self.cutoff, self.power, blocks)

    def apply(self, y: BipartiteGradedElement) -> BipartiteGradedElement:
        """Blockwise ``R y R*``."""
        return BipartiteGradedElement(
            y.cutoff, y.power, {k: conjugate(self.blocks[k], x) for k, x in y.blocks.items()}
        )


def _delta_block(b: int, c: int, i: int, x: np.ndarray) -> np.ndarray:
    return phi_power(b, c, i, x)


def _delta_op_block(b: int, c: int, i: int, x: np.ndarray) -> np.ndarray:
    """Block ``(b,c)`` of the opposite comultiplication: flip of block ``(c,b)``."""
    return conjugate(flip(c**i, b**i), phi_power(c, b, i, x))


def comultiply(x: GradedElement) -> BipartiteGradedElement:
    blocks = {}
    for a, xa in sorted(x.blocks.items()):
        for b, c in divisor_pairs(a):
            if b <= x.cutoff and c <= x.cutoff:
                blocks[(b, c)] = _delta_block(b, c, x.power, xa)
    return BipartiteGradedElement(x.cutoff, x.power, blocks)


def opposite_comultiply(x: GradedElement) -> BipartiteGradedElement:
    blocks = {}
    for a, xa in sorted(x.blocks.items()):
        for b, c in divisor_pairs(a):
            blocks[(b, c)] = _delta_op_block(b, c, x.power, xa)
    return BipartiteGradedElement(x.cutoff, x.power, blocks)


def counit(x: GradedElement) -> complex:
    """Evaluation at the one-dimensional block ``a = 1``.

    Only the counit law on that block is claimed.
    """
    return complex(x.block(1)[0, 0])


def _phi_left(b: int, c: int, d: int, i: int, y: np.ndarray) -> np.ndarray:
    """``(phi^{(i)}_{b,c} (x) id)(y)`` for ``y`` on ``(bc)^i x d^i``."""
    q = phi_power_map(b, c, i).kron(IndexPermutation.identity(d**i))
    return conjugate(q, y)


def _phi_right(b: int, c: int, d: int, i: int, y: np.ndarray) -> np.ndarray:
    """``(id (x) phi^{(i)}_{c,d})(y)`` for ``y`` on ``b^i x (cd)^i``."""
    q = IndexPermutation.identity(b**i).kron(phi_power_map(c, d, i))
    return conjugate(q, y)


def coproduct_left(y: BipartiteGradedElement) -> dict[tuple[int, int, int], np.ndarray]:
    """``(Delta (x) id)(y)`` as a family of triple blocks."""
    out = {}
    for (p, d), blk in sorted(y.blocks.items()):
        for b, c in divisor_pairs(p):
            out[(b, c, d)] = _phi_left(b, c, d, y.power, blk)
    return out


def coproduct_right(y: BipartiteGradedElement) -> dict[tuple[int, int, int], np.ndarray]:
    """``(id (x) Delta)(y)`` as a family of triple blocks."""
    out = {}
    for (b, q), blk in sorted(y.blocks.items()):
        for c, d in divisor_pairs(q):
            out[(b, c, d)] = _phi_right(b, c, d, y.power, blk)
    return out


def _stage_budget(name: str, cutoff: int, power: int, max_dim: int) -> None:
    if cutoff < 1 or power < 1:
        raise ValueError(f"{name}: cutoff and power must be >= 1")
    require_budget(name, cutoff**power, max_dim)


def check_coassociativity_graded(
    cutoff: int, power: int = 1, max_dim: int = DEFAULT_MAX_DIM, tolerance: float = DEFAULT_TOLERANCE
) -> CheckReport:
    name = f"graded coassociativity (N,i)=({cutoff},{power})"
    _stage_budget(name, cutoff, power, max_dim)
    rep = CheckReport(name=name, tolerance=tolerance, note=LINEARITY_NOTE)
    i = power
    for a in range(1, cutoff + 1):
        triples = divisor_triples(a)
        for r, units in matrix_unit_rows(a**i):
            worst = np.zeros(units.shape[0])
            for b, c, d in triples:
                lhs = _phi_left(b, c, d, i, _delta_block(b * c, d, i, units))
                rhs = _phi_right(b, c, d, i, _delta_block(b, c * d, i, units))
                worst = np.maximum(worst, np.max(np.abs(lhs - rhs), axis=(1, 2)))
            _record_row(rep, f"a={a}", r, worst)
    return rep


def _record_row(rep: CheckReport, label: str, r: int, devs: np.ndarray) -> None:
    rep.instances += devs.size
    if devs.size:
        rep.max_deviation = max(rep.max_deviation, float(devs.max()))
    for col in np.flatnonzero(~(devs <= rep.tolerance)):
        rep._absorb(f"{label} E[{r + 1},{col + 1}]", devs[col])


def check_quasi_cocommutativity(
    cutoff: int,
    power: int = 1,
    r: Optional[BlockRMatrix] = None,
    max_dim: int = DEFAULT_MAX_DIM,
    tolerance: float = DEFAULT_TOLERANCE,
) -> CheckReport:
    """``R Delta(x) R* == Delta^op(x)`` blockwise for every matrix unit ``x``."""
    name = f"stage quasi-cocommutativity (N,i)=({cutoff},{power})"
    _stage_budget(name, cutoff, power, max_dim)
    if r is None:
        r = BlockRMatrix.standard(cutoff, power)
    elif (r.cutoff, r.power) != (cutoff, power):
        raise ValueError("R-matrix family does not match the stage")
    rep = CheckReport(name=name, tolerance=tolerance, note=LINEARITY_NOTE)
    i = power
    for a in range(1, cutoff + 1):
        pairs = divisor_pairs(a)
        for row, units in matrix_unit_rows(a**i):
            for b, c in pairs:
                lhs = conjugate(r.blocks[(b, c)], _delta_block(b, c, i, units))
                rhs = _delta_op_block(b, c, i, units)
                _record_row(rep, f"a={a} block ({b},{c})", row, np.max(np.abs(lhs - rhs), axis=(1, 2)))
    return rep


@dataclass(frozen=True)
class BlockMap:
    """A blockwise linear map between two truncated graded algebras.

    Block ``a`` of the source goes to block ``index_map[a]`` of the target
    through ``maps[a]``, a function on single matrices.
    """

    source_cutoff: int
    source_power: int
    target_cutoff: int
    target_power: int
    index_map: Mapping[int, int]
    maps: Mapping[int, Callable[[np.ndarray], np.ndarray]]
    name: str = "block map"


def identity_map(cutoff: int, power: int = 1) -> BlockMap:
    return BlockMap(
        cutoff, power, cutoff, power,
        {a: a for a in range(1, cutoff + 1)},
        {a: (lambda x: x) for a in range(1, cutoff + 1)},
        name="identity",
    )


def zero_map(cutoff: int, power: int = 1) -> BlockMap:
    return BlockMap(
        cutoff, power, cutoff, power,
        {a: a for a in range(1, cutoff + 1)},
        {a: (lambda x: np.zeros_like(x)) for a in range(1, cutoff + 1)},
        name="zero",
    )


def psi_star(cutoff: int, power: int) -> BlockMap:
    """The stage embedding ``psi_* : M^{(x)n}(*) -> M^{(x)(n+1)}(*)``."""
    return BlockMap(
        cutoff, power, cutoff, power + 1,
        {a: a for a in range(1, cutoff + 1)},
        {a: partial(psi_embed, a, power) for a in range(1, cutoff + 1)},
        name=f"psi_* stage {power}->{power + 1}",
    )


def _superoperator(f: Callable, d: int, target_dim: int) -> np.ndarray:
    """``F[r, c] = f(E_{r,c})`` as an array of shape ``(d, d, D, D)``."""
    out = np.empty((d, d, target_dim, target_dim), dtype=DTYPE)
    for r in range(d):
        for c in range(d):
            unit = np.zeros((d, d), dtype=DTYPE)
            unit[r, c] = 1.0
            img = np.asarray(f(unit), dtype=DTYPE)
            if img.shape != (target_dim, target_dim):
                raise DimensionError(f"map returned shape {img.shape}, expected {(target_dim,) * 2}")
            out[r, c] = img
    return out


def _tensor_superops(fb: np.ndarray, fc: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``(f_b (x) f_c)`` applied to a stack ``y`` of operators on ``b (x) c``."""
    b, c = fb.shape[0], fc.shape[0]
    bb, cc = fb.shape[2], fc.shape[2]
    t = y.reshape(y.shape[0], b, c, b, c)
    z = np.einsum("ikrs,jltu,nijkl->nrtsu", fb, fc, t, optimize=True)
    return z.reshape(y.shape[0], bb * cc, bb * cc)


def _multiplicativity_deviation(fa: np.ndarray) -> float:
    """How far ``f(E_{r,c})`` are from a system of matrix units.

    ``f(E_{i,1}) f(E_{1,j}) = f(E_{i,j})`` and
    ``f(E_{1,i}) f(E_{j,1}) = delta_{ij} f(E_{1,1})`` together force
    ``f(E_{ij}) f(E_{kl}) = delta_{jk} f(E_{il})``, so ``2 d**2`` products
    decide multiplicativity on all of ``M_d``.
    """
    col, row = fa[:, 0], fa[0, :]
    first = col[:, None] @ row[None, :]
    second = row[:, None] @ col[None, :]
    d = fa.shape[0]
    expected = np.eye(d)[:, :, None, None] * fa[0, 0]
    return max(float(np.max(np.abs(first - fa))), float(np.max(np.abs(second - expected))))


def check_bialgebra_morphism(
    f: BlockMap, max_dim: int = DEFAULT_MAX_DIM, tolerance: float = DEFAULT_TOLERANCE
) -> CheckReport:
    """``(f (x) f) o Delta_1 == Delta_2 o f`` on all matrix units of the source.

    Each block map is also checked to be a unital *-homomorphism; unitality
    is the finite-dimensional stand-in for nondegeneracy.
    """
    name = f"bialgebra morphism [{f.name}]"
    n1, i1, n2, i2 = f.source_cutoff, f.source_power, f.target_cutoff, f.target_power
    for a in range(1, n1 + 1):
        if a not in f.maps or a not in f.index_map:
            raise ValueError(f"{name}: no map for source block {a}")
        if not 1 <= f.index_map[a] <= n2:
            raise ValueError(f"{name}: block {a} sent outside target cutoff")
    _stage_budget(name, n1, i1, max_dim)
    _stage_budget(name, n2, i2, max_dim)
    rep = CheckReport(name=name, tolerance=tolerance, note=LINEARITY_NOTE)

    sigma = f.index_map
    supers = {a: _superoperator(f.maps[a], a**i1, sigma[a] ** i2) for a in range(1, n1 + 1)}

    for a, fa in supers.items():
        d = a**i1
        image_of_unit = np.einsum("rrst->st", fa)
        rep.instances += 1
        dev = float(np.max(np.abs(image_of_unit - identity(sigma[a] ** i2))))
        if not dev <= tolerance:
            rep.fail(f"block {a}", f"not unital (deviation {dev:.3g}); map is degenerate")
        adj_dev = float(np.max(np.abs(adjoint(fa) - fa.transpose(1, 0, 2, 3)))) if d else 0.0
        rep.instances += 1
        if not adj_dev <= tolerance:
            rep.fail(f"block {a}", f"does not preserve adjoints (deviation {adj_dev:.3g})")
        mult_dev = _multiplicativity_deviation(fa)
        rep.instances += 1
        if not mult_dev <= tolerance:
            rep.fail(f"block {a}", f"not multiplicative on matrix units (deviation {mult_dev:.3g})")

    for a in range(1, n1 + 1):
        fa = supers[a]
        for row, units in matrix_unit_rows(a**i1):
            lhs: dict = {}
            for b, c in divisor_pairs(a):
                y = _delta_block(b, c, i1, units)
                key = (sigma[b], sigma[c])
                img = _tensor_superops(supers[b], supers[c], y)
                lhs[key] = lhs[key] + img if key in lhs else img
            fx = fa[row]
            rhs: dict = {}
            for b, c in divisor_pairs(sigma[a]):
                if b <= n2 and c <= n2:
                    rhs[(b, c)] = _delta_block(b, c, i2, fx)
            worst = np.zeros(units.shape[0])
            for key in sorted(set(lhs) | set(rhs)):
                left, right = lhs.get(key), rhs.get(key)
                if left is None:
                    left = np.zeros_like(right)
                if right is None:
                    right = np.zeros_like(left)
                worst = np.maximum(worst, np.max(np.abs(left - right), axis=(1, 2)))
            _record_row(rep, f"a={a}", row, worst)
    return rep
