"""Componentwise tensor powers of the matrix WCS and the inductive embeddings.

The n-th power has component algebras ``M_a^{(x)n}`` (Hilbert space
dimension ``a**n``), structure maps ``phi^{(n)}_{a,b} = T o phi^{(x)n}`` and
R-matrices ``R^{(a,b:n)} = T R^{(x)n} T*``, where ``T`` is the interleave
that sorts ``x1 y1 x2 y2 ...`` into ``x1 x2 ... y1 y2 ...``.

The infinite power is never built; it is represented by finite stages joined
by ``psi(x) = x (x) I``.
"""

from __future__ import annotations

from functools import lru_cache, partial
from typing import Optional

import numpy as np

from .report import (
    DEFAULT_MAX_DIM,
    DEFAULT_TOLERANCE,
    LINEARITY_NOTE,
    CheckReport,
    combine,
    compare_on_matrix_units,
    require_budget,
)
from .tensor_core import (
    IndexPermutation,
    compose,
    conjugate,
    factor_permutation,
    flip,
    identity,
    kron,
    kron_power,
)
from .wcs import RLike, _monoid, _require_dim, hexagon_report, phi_index_map, rmatrix, triangularity_report


def _power(n) -> int:
    n = int(n)
    if n < 1:
        raise ValueError(f"tensor power must be >= 1, got {n}")
    return n


@lru_cache(maxsize=None)
def interleave(a: int, b: int, n: int) -> IndexPermutation:
    """``T^{(n)}_{a,b}``: factors ``(x1,y1,...,xn,yn) -> (x1..xn, y1..yn)``."""
    a, b, n = _monoid(a), _monoid(b), _power(n)
    order = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    return factor_permutation((a, b) * n, order)


@lru_cache(maxsize=None)
def phi_tensor_map(a: int, b: int, n: int) -> IndexPermutation:
    """Relabeling realizing ``(phi_{a,b})^{(x)n}``."""
    return kron_power(phi_index_map(a, b), _power(n))


@lru_cache(maxsize=None)
def phi_power_map(a: int, b: int, n: int) -> IndexPermutation:
    """Relabeling realizing ``phi^{(n)}_{a,b}``."""
    return interleave(a, b, n).compose(phi_tensor_map(a, b, n))


def phi_power(a: int, b: int, n: int, x: np.ndarray) -> np.ndarray:
    """``phi^{(n)}_{a,b}(x)`` in ``M_{a^n} (x) M_{b^n}``."""
    a, b, n = _monoid(a), _monoid(b), _power(n)
    x = _require_dim(x, (a * b) ** n, f"phi^({n})({a},{b})")
    return conjugate(interleave(a, b, n), conjugate(phi_tensor_map(a, b, n), x))


@lru_cache(maxsize=None)
def rmatrix_power(a: int, b: int, n: int) -> IndexPermutation:
    """``R^{(a,b:n)} = T R^{(x)n} T*`` as a permutation."""
    t = interleave(a, b, n)
    return compose(t, kron_power(rmatrix(a, b), n), t.inverse())


def tau_power(b: int, a: int, n: int) -> IndexPermutation:
    """The flip ``A_b^{(x)n} (x) A_a^{(x)n} -> A_a^{(x)n} (x) A_b^{(x)n}``."""
    return flip(b**n, a**n)


def check_op_compatibility(
    a: int,
    b: int,
    n: int,
    max_dim: int = DEFAULT_MAX_DIM,
    tolerance: float = DEFAULT_TOLERANCE,
    dense: bool = False,
) -> CheckReport:
    """Opposite of the powered map equals the powered opposite map.

    Checks the interleave/flip permutation identity exactly, then the
    operator identity on every matrix unit of ``M_{(ab)^n}``.
    """
    a, b, n = _monoid(a), _monoid(b), _power(n)
    name = f"op-compatibility (a,b,n)=({a},{b},{n})"
    dim = (a * b) ** n
    require_budget(name, dim, max_dim)
    rep = CheckReport(name=name, tolerance=tolerance, note=LINEARITY_NOTE)

    flip_ba = flip(b, a)
    lhs = interleave(a, b, n).compose(kron_power(flip_ba, n))
    rhs = tau_power(b, a, n).compose(interleave(b, a, n))
    rep.instances += 1
    if lhs != rhs:
        rep.fail("T_{a,b} o tau^{(x)n} = tau^{(n)} o T_{b,a}", "permutations differ")

    op_tensor = kron_power(flip_ba.compose(phi_index_map(b, a)), n)
    return compare_on_matrix_units(
        rep,
        dim,
        lambda x: conjugate(tau_power(b, a, n), phi_power(b, a, n, x)),
        lambda x: conjugate(interleave(a, b, n), conjugate(op_tensor, x)),
        dense=dense,
    )


def check_powered_r_relation(
    a: int,
    b: int,
    n: int,
    r: Optional[RLike] = None,
    max_dim: int = DEFAULT_MAX_DIM,
    tolerance: float = DEFAULT_TOLERANCE,
    dense: bool = False,
) -> CheckReport:
    a, b, n = _monoid(a), _monoid(b), _power(n)
    name = f"powered r-relation (a,b,n)=({a},{b},{n})"
    dim = (a * b) ** n
    require_budget(name, dim, max_dim)
    if r is None:
        r = rmatrix_power(a, b, n)
    rep = CheckReport(name=name, tolerance=tolerance, note=LINEARITY_NOTE)
    return compare_on_matrix_units(
        rep,
        dim,
        lambda x: conjugate(r, phi_power(a, b, n, x)),
        lambda x: conjugate(tau_power(b, a, n), phi_power(b, a, n, x)),
        dense=dense,
    )


def check_powered_triangularity(
    a: int,
    b: int,
    c: int,
    n: int,
    max_dim: int = DEFAULT_MAX_DIM,
    tolerance: float = DEFAULT_TOLERANCE,
) -> CheckReport:
    """Both powered hexagons for ``(a,b,c)`` and triangularity for ``(a,b)``."""
    a, b, c, n = _monoid(a), _monoid(b), _monoid(c), _power(n)
    name = f"powered quasi-triangularity (a,b,c,n)=({a},{b},{c},{n})"
    require_budget(name, (a * b * c) ** n, max_dim)
    phi_map = partial(phi_power_map, n=n)
    r_of = partial(rmatrix_power, n=n)

    def dim(x: int) -> int:
        return x**n

    hexagons = hexagon_report(name + " hexagons", a, b, c, phi_map, r_of, dim, tolerance)
    tri = triangularity_report(name + " triangularity", a, b, r_of, dim, tolerance)
    return combine(name, [hexagons, tri], tolerance)


def psi_embed(a: int, n: int, x: np.ndarray) -> np.ndarray:
    """``psi^{(n)}_a(x) = x (x) I_a``."""
    a, n = _monoid(a), _power(n)
    x = _require_dim(x, a**n, f"psi^({n})_{a}")
    return kron(x, identity(a))


def psi_pair(a: int, b: int, n: int, y: np.ndarray) -> np.ndarray:
    """``(psi_a (x) psi_b)(y)`` for ``y`` in ``M_{a^n} (x) M_{b^n}``."""
    a, b, n = _monoid(a), _monoid(b), _power(n)
    y = _require_dim(y, (a * b) ** n, "psi (x) psi")
    # y (x) I_a (x) I_b lives on (a^n, b^n, a, b); move the new a next to a^n
    reorder = factor_permutation((a**n, b**n, a, b), (0, 2, 1, 3))
    return conjugate(reorder, kron(y, identity(a * b)))


def check_psi_compatibility(
    a: int,
    b: int,
    n: int,
    max_dim: int = DEFAULT_MAX_DIM,
    tolerance: float = DEFAULT_TOLERANCE,
    dense: bool = False,
) -> CheckReport:
    """``(psi_a (x) psi_b) o phi^{(n)}_{a,b} == phi^{(n+1)}_{a,b} o psi_{ab}``.

    Holding for all ``a, b`` is exactly the statement that the blockwise
    embedding ``psi_*`` intertwines the comultiplications of consecutive
    stages, i.e. that it is a bialgebra morphism of the inductive system.
    """
    a, b, n = _monoid(a), _monoid(b), _power(n)
    name = f"psi-compatibility (a,b,n)=({a},{b},{n})"
    require_budget(name, (a * b) ** (n + 1), max_dim)
    rep = CheckReport(
        name=name,
        tolerance=tolerance,
        note=LINEARITY_NOTE + "; square commuting for all (a,b) makes psi_* a bialgebra morphism between stages",
    )
    return compare_on_matrix_units(
        rep,
        (a * b) ** n,
        lambda x: psi_pair(a, b, n, phi_power(a, b, n, x)),
        lambda x: phi_power(a, b, n + 1, psi_embed(a * b, n, x)),
        dense=dense,
    )
