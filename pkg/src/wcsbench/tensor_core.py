"""Kronecker products, matrix units and exact index permutations.

Conventions used throughout the package:

* A composite basis index of ``C^n (x) C^m`` is row-major: the pair
  ``(i, j)`` (0-based) sits at ``i*m + j``.  This is the convention of
  :func:`numpy.kron`.
* An :class:`IndexPermutation` ``p`` stands for the unitary ``U`` with
  ``U e_l = e_{p(l)}``.  Composition is function composition, so
  ``p.compose(q)`` is the permutation of ``U_p U_q``.
* Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Most
  functions also accept a stack of matrices with leading batch axes.
"""

from __future__ import annotations

from functools import reduce
from typing import Iterator, Sequence, Union

import numpy as np

ComplexMatrix = np.ndarray
Radices = Sequence[int]

DTYPE = np.complex128


class DimensionError(ValueError):
    """Raised when operand dimensions do not fit together."""


class IndexPermutation:
    """A bijection of ``{0, ..., size-1}``, i.e. a permutation unitary.

    The map is stored as a read-only integer array.  Instances are
    immutable and hashable.
    """

    __slots__ = ("_map",)

    def __init__(self, mapping: Sequence[int], check: bool = True):
        arr = np.array(mapping, dtype=np.int64).reshape(-1)
        if check:
            if arr.size == 0:
                raise ValueError("permutation must have positive size")
            if not np.array_equal(np.sort(arr), np.arange(arr.size)):
                raise ValueError(f"not a bijection of range({arr.size}): {arr.tolist()}")
        arr.flags.writeable = False
        self._map = arr

    @classmethod
    def identity(cls, size: int) -> "IndexPermutation":
        return cls(np.arange(size), check=False)

    @classmethod
    def transposition(cls, size: int, i: int, j: int) -> "IndexPermutation":
        arr = np.arange(size)
        arr[[i, j]] = arr[[j, i]]
        return cls(arr)

    @property
    def map(self) -> np.ndarray:
        return self._map

    @property
    def size(self) -> int:
        return int(self._map.size)

    def __len__(self) -> int:
        return self.size

    def __call__(self, index: int) -> int:
        return int(self._map[index])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IndexPermutation):
            return NotImplemented
        return np.array_equal(self._map, other._map)

    def __hash__(self) -> int:
        return hash(self._map.tobytes())

    def __repr__(self) -> str:
        if self.size <= 16:
            return f"IndexPermutation({self._map.tolist()})"
        return f"IndexPermutation(<size {self.size}>)"

    def compose(self, other: "IndexPermutation") -> "IndexPermutation":
        """Return ``self o other`` (apply ``other`` first)."""
        if other.size != self.size:
            raise DimensionError(f"cannot compose sizes {self.size} and {other.size}")
        return IndexPermutation(self._map[other._map], check=False)

    def inverse(self) -> "IndexPermutation":
        inv = np.empty_like(self._map)
        inv[self._map] = np.arange(self.size)
        return IndexPermutation(inv, check=False)

    def kron(self, other: "IndexPermutation") -> "IndexPermutation":
        """Permutation of ``U_self (x) U_other`` under the row-major convention."""
        m = other.size
        return IndexPermutation((self._map[:, None] * m + other._map[None, :]).reshape(-1), check=False)

    def is_identity(self) -> bool:
        return bool(np.array_equal(self._map, np.arange(self.size)))


def compose(*perms: IndexPermutation) -> IndexPermutation:
    """Compose right to left: ``compose(p, q, r) = p o q o r``."""
    return reduce(lambda p, q: p.compose(q), perms)


def kron_power(p: IndexPermutation, n: int) -> IndexPermutation:
    if n < 1:
        raise ValueError("tensor power must be >= 1")
    return reduce(lambda x, y: x.kron(y), [p] * n)


def identity(n: int) -> ComplexMatrix:
    return np.eye(n, dtype=DTYPE)


def matrix_unit(n: int, i: int, j: int) -> ComplexMatrix:
    """The matrix unit ``E^{(n)}_{i,j}`` with 1-based ``i, j``."""
    if not (1 <= i <= n and 1 <= j <= n):
        raise ValueError(f"matrix unit index ({i}, {j}) out of range for n={n}")
    out = np.zeros((n, n), dtype=DTYPE)
    out[i - 1, j - 1] = 1.0
    return out


def matrix_unit_rows(n: int) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(r, batch)`` with ``batch[c] = E_{r,c}`` (0-based ``r, c``).

    Iterating over all rows enumerates every matrix unit of ``M_n`` exactly
    once while keeping each batch at ``n**3`` entries.
    """
    for r in range(n):
        batch = np.zeros((n, n, n), dtype=DTYPE)
        batch[np.arange(n), r, np.arange(n)] = 1.0
        yield r, batch


def adjoint(x: ComplexMatrix) -> ComplexMatrix:
    return np.conj(np.swapaxes(x, -1, -2))


def kron(x: ComplexMatrix, y: ComplexMatrix) -> ComplexMatrix:
    """Kronecker product, entry ``(i*m+j, k*m+l) = x[i,k] * y[j,l]``.

    Leading batch axes broadcast.  One operand may be a :class:`SparseBatch`
    when the other is a single dense matrix.
    """
    if isinstance(x, SparseBatch) or isinstance(y, SparseBatch):
        return _sparse_kron(x, y)
    x = np.asarray(x, dtype=DTYPE)
    y = np.asarray(y, dtype=DTYPE)
    if x.ndim == 2 and y.ndim == 2:
        return np.kron(x, y)
    n, m = x.shape[-1], y.shape[-1]
    z = x[..., :, None, :, None] * y[..., None, :, None, :]
    return z.reshape(z.shape[:-4] + (n * m, n * m))


def _sparse_kron(x, y) -> SparseBatch:
    if isinstance(x, SparseBatch) and isinstance(y, SparseBatch):
        raise TypeError("kron of two sparse batches is not supported")
    if isinstance(x, SparseBatch):
        yd = np.asarray(y, dtype=DTYPE)
        m = _dim(yd)
        yr, yc = np.nonzero(yd)
        yv = yd[yr, yc]
        rows = (x.rows[:, :, None] * m + yr).reshape(x.batch, -1)
        cols = (x.cols[:, :, None] * m + yc).reshape(x.batch, -1)
        vals = (x.vals[:, :, None] * yv).reshape(x.batch, -1)
        return SparseBatch(x.dim * m, rows, cols, vals)
    xd = np.asarray(x, dtype=DTYPE)
    n, m = _dim(xd), y.dim
    xr, xc = np.nonzero(xd)
    xv = xd[xr, xc]
    rows = (xr[:, None] * m + y.rows[:, None, :]).reshape(y.batch, -1)
    cols = (xc[:, None] * m + y.cols[:, None, :]).reshape(y.batch, -1)
    vals = (xv[:, None] * y.vals[:, None, :]).reshape(y.batch, -1)
    return SparseBatch(n * m, rows, cols, vals)


def _check_radices(radices: Radices) -> tuple[int, ...]:
    rad = tuple(int(r) for r in radices)
    if not rad or any(r < 1 for r in rad):
        raise ValueError(f"radices must be positive integers, got {radices!r}")
    return rad


def factor_permutation(radices: Radices, order: Sequence[int]) -> IndexPermutation:
    """Index permutation that reorders tensor factors.

    ``order`` follows :func:`numpy.transpose`: the new factor at position
    ``t`` is the old factor ``order[t]`` (positions 0-based).  The result
    sends ``e_{i_0} (x) ... (x) e_{i_{k-1}}`` to
    ``e_{i_order[0]} (x) ... (x) e_{i_order[k-1]}``.
    """
    rad = _check_radices(radices)
    order = tuple(int(s) for s in order)
    if sorted(order) != list(range(len(rad))):
        raise ValueError(f"{order!r} is not a permutation of {len(rad)} factor positions")
    d = int(np.prod(rad))
    # old linear index found at each new digit tuple
    old_at_new = np.arange(d).reshape(rad).transpose(order).reshape(-1)
    p = np.empty(d, dtype=np.int64)
    p[old_at_new] = np.arange(d)
    return IndexPermutation(p, check=False)


def flip(n: int, m: int) -> IndexPermutation:
    """The flip ``C^n (x) C^m -> C^m (x) C^n``."""
    return factor_permutation((n, m), (1, 0))


def permutation_to_matrix(p: IndexPermutation) -> ComplexMatrix:
    u = np.zeros((p.size, p.size), dtype=DTYPE)
    u[p.map, np.arange(p.size)] = 1.0
    return u


class SparseBatch:
    """A stack of sparse square matrices, each with ``k`` stored entries.

    ``rows``, ``cols`` and ``vals`` have shape ``(batch, k)``; repeated
    positions add up.  Relabelings and Kronecker products with dense
    factors act on this form directly, which makes exhaustive checks over
    all ``d**2`` matrix units cost ``O(d**2)`` instead of ``O(d**4)``.
    """

    __slots__ = ("dim", "rows", "cols", "vals")

    def __init__(self, dim: int, rows: np.ndarray, cols: np.ndarray, vals: np.ndarray):
        self.dim = int(dim)
        self.rows = np.asarray(rows, dtype=np.int64)
        self.cols = np.asarray(cols, dtype=np.int64)
        self.vals = np.asarray(vals, dtype=DTYPE)
        if not (self.rows.shape == self.cols.shape == self.vals.shape) or self.rows.ndim != 2:
            raise ValueError("rows, cols and vals must share a (batch, k) shape")

    @classmethod
    def matrix_units(cls, d: int) -> "SparseBatch":
        """All ``d**2`` matrix units; unit ``u`` is ``E_{r,c}`` with ``(r, c) = divmod(u, d)``."""
        r, c = np.divmod(np.arange(d * d), d)
        return cls(d, r[:, None], c[:, None], np.ones((d * d, 1), dtype=DTYPE))

    @classmethod
    def from_dense(cls, x: ComplexMatrix) -> "SparseBatch":
        x = np.asarray(x, dtype=DTYPE)
        d = _dim(x)
        flat = x.reshape(-1, d * d)
        idx = np.broadcast_to(np.arange(d * d), flat.shape)
        r, c = np.divmod(idx, d)
        return cls(d, r, c, flat)

    @property
    def batch(self) -> int:
        return self.rows.shape[0]

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.batch, self.dim, self.dim), dtype=DTYPE)
        b = np.broadcast_to(np.arange(self.batch)[:, None], self.rows.shape)
        np.add.at(out, (b, self.rows, self.cols), self.vals)
        return out

    def adjoint(self) -> "SparseBatch":
        return SparseBatch(self.dim, self.cols, self.rows, np.conj(self.vals))


def sparse_deviation(x: SparseBatch, y: SparseBatch) -> np.ndarray:
    """Per-matrix ``max_abs_diff`` of two sparse batches."""
    if x.dim != y.dim or x.batch != y.batch:
        raise DimensionError(f"cannot compare batches {x.batch}x{x.dim} and {y.batch}x{y.dim}")
    nb = x.batch
    keys = np.concatenate([x.rows * x.dim + x.cols, y.rows * y.dim + y.cols], axis=1)
    vals = np.concatenate([x.vals, -y.vals], axis=1)
    if keys.shape[1] == 0:
        return np.zeros(nb)
    batch_ids = np.broadcast_to(np.arange(nb)[:, None], keys.shape).reshape(-1)
    keys, vals = keys.reshape(-1), vals.reshape(-1)
    order = np.lexsort((keys, batch_ids))
    keys, vals, batch_ids = keys[order], vals[order], batch_ids[order]
    starts = np.flatnonzero(np.r_[True, (np.diff(keys) != 0) | (np.diff(batch_ids) != 0)])
    sums = np.abs(np.add.reduceat(vals, starts))
    out = np.zeros(nb)
    np.maximum.at(out, batch_ids[starts], sums)
    return out


def _dim(x) -> int:
    if isinstance(x, SparseBatch):
        return x.dim
    if x.ndim < 2 or x.shape[-1] != x.shape[-2]:
        raise DimensionError(f"expected square matrices, got shape {x.shape}")
    return x.shape[-1]


def conjugate(u: Union[ComplexMatrix, IndexPermutation], x: ComplexMatrix) -> ComplexMatrix:
    """Return ``U X U*``.

    For an :class:`IndexPermutation` the result is obtained by relabeling
    entries, ``(UXU*)[p(r), p(c)] = X[r, c]``, with no arithmetic at all.
    A :class:`SparseBatch` is relabeled in place of its stored positions.
    """
    if isinstance(x, SparseBatch):
        if not isinstance(u, IndexPermutation):
            raise TypeError("only an IndexPermutation can conjugate a SparseBatch")
        if u.size != x.dim:
            raise DimensionError(f"permutation of size {u.size} cannot act on dimension {x.dim}")
        return SparseBatch(x.dim, u.map[x.rows], u.map[x.cols], x.vals)
    x = np.asarray(x)
    d = _dim(x)
    if isinstance(u, IndexPermutation):
        if u.size != d:
            raise DimensionError(f"permutation of size {u.size} cannot act on dimension {d}")
        inv = u.inverse().map
        gather = (inv[:, None] * d + inv[None, :]).reshape(-1)
        flat = x.reshape(x.shape[:-2] + (d * d,))
        return np.take(flat, gather, axis=-1).reshape(x.shape)
    u = np.asarray(u, dtype=DTYPE)
    if _dim(u) != d:
        raise DimensionError(f"unitary of dimension {u.shape[-1]} cannot act on dimension {d}")
    return u @ x @ adjoint(u)


def leg_embed(r, radices: Radices, p: int, q: int):
    """Leg-numbered embedding ``R_{pq}`` (positions 1-based, ``p < q``).

    ``r`` acts on factors ``p`` and ``q``; the identity acts on the rest.
    Works for dense matrices and for :class:`IndexPermutation`, returning
    the same kind.
    """
    rad = _check_radices(radices)
    k = len(rad)
    if not 1 <= p < q <= k:
        raise ValueError(f"need 1 <= p < q <= {k}, got p={p}, q={q}")
    size = r.size if isinstance(r, IndexPermutation) else _dim(np.asarray(r))
    if size != rad[p - 1] * rad[q - 1]:
        raise DimensionError(
            f"operator of dimension {size} does not fit factors {rad[p - 1]} x {rad[q - 1]}"
        )
    rest = [t for t in range(k) if t not in (p - 1, q - 1)]
    rest_dim = int(np.prod([rad[t] for t in rest])) if rest else 1
    src = [p - 1, q - 1] + rest
    reorder = factor_permutation([rad[t] for t in src], np.argsort(src))
    if isinstance(r, IndexPermutation):
        big = r.kron(IndexPermutation.identity(rest_dim))
        return compose(reorder, big, reorder.inverse())
    return conjugate(reorder, kron(r, identity(rest_dim)))


def max_abs_diff(x: ComplexMatrix, y: ComplexMatrix) -> float:
    """Entrywise sup distance, the package's equality metric."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise DimensionError(f"shape mismatch {x.shape} vs {y.shape}")
    if x.size == 0:
        return 0.0
    return float(np.max(np.abs(x - y)))
