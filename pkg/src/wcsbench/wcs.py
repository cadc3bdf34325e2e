"""The matrix-algebra weakly coassociative system over the monoid (N, x).

Component algebras are ``A_n = M_n``.  The structure maps are

* ``phi(n, m)``: ``M_{nm} -> M_n (x) M_m`` sending ``E_{m(i-1)+j, m(i'-1)+j'}``
  to ``E_{i,i'} (x) E_{j,j'}``;
* ``rmatrix(n, m)``: the permutation unitary on ``C^n (x) C^m`` sending
  ``e_i (x) e_j`` to ``e_{i_} (x) e_{j_}`` where ``m(i-1)+j = n(j_-1)+i_``.

Every map is a relabeling of matrix entries, so all checks here are either
exact permutation comparisons or dense comparisons whose deviation is 0.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable, Optional, Union

import numpy as np

from .report import (
    DEFAULT_MAX_DIM,
    DEFAULT_TOLERANCE,
    LINEARITY_NOTE,
    CheckReport,
    compare_on_matrix_units,
    require_budget,
)
from .tensor_core import (
    DimensionError,
    IndexPermutation,
    SparseBatch,
    compose,
    conjugate,
    flip,
    identity,
    kron,
    leg_embed,
    max_abs_diff,
    permutation_to_matrix,
)

RLike = Union[IndexPermutation, np.ndarray]


def _monoid(a) -> int:
    a = int(a)
    if a < 1:
        raise ValueError(f"monoid elements are positive integers, got {a}")
    return a


def divisor_pairs(a: int) -> list[tuple[int, int]]:
    """All ``(b, c)`` with ``b*c == a``, ordered by ``b``."""
    a = _monoid(a)
    small = [b for b in range(1, int(a**0.5) + 1) if a % b == 0]
    divisors = sorted(set(small) | {a // b for b in small})
    return [(b, a // b) for b in divisors]


def divisor_triples(a: int) -> list[tuple[int, int, int]]:
    return [(b, c, d) for b, rest in divisor_pairs(a) for c, d in divisor_pairs(rest)]


@lru_cache(maxsize=None)
def _kron_position(n: int, m: int) -> np.ndarray:
    """``pos[i, j]`` = index of ``e_i (x) e_j`` in ``C^{nm}`` per :func:`kron`."""
    pos = np.empty((n, m), dtype=np.int64)
    for i in range(n):
        for j in range(m):
            v = kron(np.eye(n)[i][None, :], np.eye(m)[j][None, :])[0]
            pos[i, j] = int(np.flatnonzero(v)[0])
    return pos


@lru_cache(maxsize=None)
def phi_index_map(n: int, m: int) -> IndexPermutation:
    """The basis map of ``phi_{n,m}`` as a relabeling of ``C^{nm}``.

    Source index ``m(i-1)+j`` (1-based) goes to the position of
    ``e_i (x) e_j`` in the Kronecker basis.  Under the row-major convention
    this is the identity; that fact is tested, not assumed.
    """
    n, m = _monoid(n), _monoid(m)
    pos = _kron_position(n, m)
    mapping = np.empty(n * m, dtype=np.int64)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            mapping[m * (i - 1) + j - 1] = pos[i - 1, j - 1]
    return IndexPermutation(mapping)


def _require_dim(x, d: int, what: str):
    if isinstance(x, SparseBatch):
        if x.dim != d:
            raise DimensionError(f"{what} expects dimension {d}, got {x.dim}")
        return x
    x = np.asarray(x)
    if x.ndim < 2 or x.shape[-1] != d or x.shape[-2] != d:
        raise DimensionError(f"{what} expects dimension {d}, got shape {x.shape}")
    return x


def phi(n: int, m: int, x: np.ndarray) -> np.ndarray:
    """``phi_{n,m}(x)`` as an operator on ``C^n (x) C^m``."""
    x = _require_dim(x, _monoid(n) * _monoid(m), f"phi({n},{m})")
    return conjugate(phi_index_map(n, m), x)


def phi_op(n: int, m: int, x: np.ndarray) -> np.ndarray:
    """``tau_{n,m}(phi_{n,m}(x))``, an operator on ``C^m (x) C^n``."""
    return conjugate(flip(n, m), phi(n, m, x))


@lru_cache(maxsize=None)
def rmatrix(n: int, m: int) -> IndexPermutation:
    """The R-matrix ``R^{(n,m)}`` as a permutation of ``C^n (x) C^m``."""
    n, m = _monoid(n), _monoid(m)
    pos = _kron_position(n, m)
    mapping = np.empty(n * m, dtype=np.int64)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            ell = m * (i - 1) + j
            # unique solution of ell = n(j_-1) + i_ with 1 <= i_ <= n
            j_, i_ = divmod(ell - 1, n)
            mapping[pos[i - 1, j - 1]] = pos[i_, j_]
    return IndexPermutation(mapping)


def id_tensor_phi(a: int, b: int, c: int, y: np.ndarray) -> np.ndarray:
    """``(id_a (x) phi_{b,c})(y)`` for ``y`` in ``M_a (x) M_{bc}``."""
    y = _require_dim(y, a * b * c, "id (x) phi")
    return conjugate(IndexPermutation.identity(a).kron(phi_index_map(b, c)), y)


def phi_tensor_id(a: int, b: int, c: int, y: np.ndarray) -> np.ndarray:
    """``(phi_{a,b} (x) id_c)(y)`` for ``y`` in ``M_{ab} (x) M_c``."""
    y = _require_dim(y, a * b * c, "phi (x) id")
    return conjugate(phi_index_map(a, b).kron(IndexPermutation.identity(c)), y)


def check_weak_coassociativity(
    a: int,
    b: int,
    c: int,
    max_dim: int = DEFAULT_MAX_DIM,
    tolerance: float = DEFAULT_TOLERANCE,
    dense: bool = False,
) -> CheckReport:
    a, b, c = _monoid(a), _monoid(b), _monoid(c)
    name = f"weak-coassociativity (a,b,c)=({a},{b},{c})"
    require_budget(name, a * b * c, max_dim)
    rep = CheckReport(name=name, tolerance=tolerance, note=LINEARITY_NOTE)
    return compare_on_matrix_units(
        rep,
        a * b * c,
        lambda x: id_tensor_phi(a, b, c, phi(a, b * c, x)),
        lambda x: phi_tensor_id(a, b, c, phi(a * b, c, x)),
        dense=dense,
    )


def check_unit_conditions(
    a: int,
    max_dim: int = DEFAULT_MAX_DIM,
    tolerance: float = DEFAULT_TOLERANCE,
    dense: bool = False,
) -> CheckReport:
    a = _monoid(a)
    name = f"unit-conditions a={a}"
    require_budget(name, a, max_dim)
    rep = CheckReport(name=name, tolerance=tolerance, note=LINEARITY_NOTE)
    one = identity(1)
    compare_on_matrix_units(rep, a, lambda x: phi(1, a, x), lambda x: kron(one, x), "phi(e,a)", dense)
    compare_on_matrix_units(rep, a, lambda x: phi(a, 1, x), lambda x: kron(x, one), "phi(a,e)", dense)
    return rep


def check_r_relation(
    a: int,
    b: int,
    r: Optional[RLike] = None,
    max_dim: int = DEFAULT_MAX_DIM,
    tolerance: float = DEFAULT_TOLERANCE,
    dense: bool = False,
) -> CheckReport:
    """``R phi_{a,b}(x) R* == phi^op_{b,a}(x)`` on every matrix unit of ``M_{ab}``.

    ``r`` overrides the canonical ``rmatrix(a, b)``; used by negative controls.
    """
    a, b = _monoid(a), _monoid(b)
    name = f"r-relation (a,b)=({a},{b})"
    require_budget(name, a * b, max_dim)
    if r is None:
        r = rmatrix(a, b)
    rep = CheckReport(name=name, tolerance=tolerance, note=LINEARITY_NOTE)
    return compare_on_matrix_units(
        rep,
        a * b,
        lambda x: conjugate(r, phi(a, b, x)),
        lambda x: phi_op(b, a, x),
        dense=dense,
    )


PhiMap = Callable[[int, int], IndexPermutation]
RMap = Callable[[int, int], IndexPermutation]
DimMap = Callable[[int], int]


def _compare_permutations(rep: CheckReport, label: str, lhs, rhs, lhs_dense, rhs_dense) -> None:
    """Record an exact permutation comparison backed by a dense one."""
    rep.instances += 1
    if lhs != rhs:
        moved = int(np.count_nonzero(lhs.map != rhs.map))
        rep.fail(label, f"permutations differ on {moved} basis vectors")
    rep._absorb(label, max_abs_diff(lhs_dense, rhs_dense))


def hexagon_report(
    name: str,
    a: int,
    b: int,
    c: int,
    phi_map: PhiMap,
    r_of: RMap,
    dim: DimMap,
    tolerance: float = DEFAULT_TOLERANCE,
) -> CheckReport:
    """Both quasi-triangularity hexagons for a WCS given by relabelings.

    ``phi_map(a, b)`` is the relabeling realizing the structure map
    ``A_{ab} -> A_a (x) A_b``, ``r_of(a, b)`` the R-matrix block and ``dim``
    the dimension of the Hilbert space of ``A_a``.
    """
    da, db, dc = dim(a), dim(b), dim(c)
    rad = (da, db, dc)
    rep = CheckReport(name=name, tolerance=tolerance, note="exact permutation equality, dense cross-check")

    # (phi_{a,b} (x) id_c)(R^{(ab,c)}) = R^{(a,c)}_13 R^{(b,c)}_23
    q = phi_map(a, b).kron(IndexPermutation.identity(dc))
    r_abc = r_of(a * b, c)
    lhs = compose(q, r_abc, q.inverse())
    r13, r23 = leg_embed(r_of(a, c), rad, 1, 3), leg_embed(r_of(b, c), rad, 2, 3)
    rhs = r13.compose(r23)
    lhs_dense = conjugate(q, permutation_to_matrix(r_abc))
    rhs_dense = leg_embed(permutation_to_matrix(r_of(a, c)), rad, 1, 3) @ leg_embed(
        permutation_to_matrix(r_of(b, c)), rad, 2, 3
    )
    _compare_permutations(rep, "hexagon (phi x id)(R) = R13 R23", lhs, rhs, lhs_dense, rhs_dense)

    # (id_a (x) phi_{b,c})(R^{(a,bc)}) = R^{(a,c)}_13 R^{(a,b)}_12
    q = IndexPermutation.identity(da).kron(phi_map(b, c))
    r_abc = r_of(a, b * c)
    lhs = compose(q, r_abc, q.inverse())
    r12 = leg_embed(r_of(a, b), rad, 1, 2)
    rhs = r13.compose(r12)
    lhs_dense = conjugate(q, permutation_to_matrix(r_abc))
    rhs_dense = leg_embed(permutation_to_matrix(r_of(a, c)), rad, 1, 3) @ leg_embed(
        permutation_to_matrix(r_of(a, b)), rad, 1, 2
    )
    _compare_permutations(rep, "hexagon (id x phi)(R) = R13 R12", lhs, rhs, lhs_dense, rhs_dense)
    return rep


def triangularity_report(
    name: str, a: int, b: int, r_of: RMap, dim: DimMap, tolerance: float = DEFAULT_TOLERANCE
) -> CheckReport:
    """``R^{(a,b)} tau_{b,a}(R^{(b,a)}) == I``; the flip acts by relabeling."""
    da, db = dim(a), dim(b)
    rep = CheckReport(name=name, tolerance=tolerance, note="exact permutation equality, dense cross-check")
    f = flip(db, da)
    r_ab, r_ba = r_of(a, b), r_of(b, a)
    lhs = compose(r_ab, f, r_ba, f.inverse())
    lhs_dense = permutation_to_matrix(r_ab) @ conjugate(f, permutation_to_matrix(r_ba))
    _compare_permutations(
        rep,
        "R tau(R) = I",
        lhs,
        IndexPermutation.identity(da * db),
        lhs_dense,
        identity(da * db),
    )
    return rep


def _base_dim(a: int) -> int:
    return a


def check_quasi_triangularity(
    a: int,
    b: int,
    c: int,
    max_dim: int = DEFAULT_MAX_DIM,
    tolerance: float = DEFAULT_TOLERANCE,
) -> CheckReport:
    a, b, c = _monoid(a), _monoid(b), _monoid(c)
    name = f"quasi-triangularity (a,b,c)=({a},{b},{c})"
    require_budget(name, a * b * c, max_dim)
    return hexagon_report(name, a, b, c, phi_index_map, rmatrix, _base_dim, tolerance)


def check_triangularity(
    a: int, b: int, max_dim: int = DEFAULT_MAX_DIM,
    tolerance: float = DEFAULT_TOLERANCE,
) -> CheckReport:
    a, b = _monoid(a), _monoid(b)
    name = f"triangularity (a,b)=({a},{b})"
    require_budget(name, a * b, max_dim)
    return triangularity_report(name, a, b, rmatrix, _base_dim, tolerance)
