"""Exact integer matrices and Smith normal form.

Matrices are ``numpy`` arrays of dtype ``object`` holding Python ints, so
entries never overflow while row and column operations stay vectorised.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)


def int_matrix(data: Iterable[Iterable[int]] | np.ndarray, rows: int | None = None,
               cols: int | None = None) -> np.ndarray:
    """Build an object-dtype integer matrix.

    ``rows``/``cols`` are needed to give empty matrices their shape.
    """
    if isinstance(data, np.ndarray) and data.ndim == 2:
        rows_list = [[int(v) for v in row] for row in data.tolist()]
        return np.array(rows_list, dtype=object).reshape(data.shape)
    lists = [[int(v) for v in row] for row in data]
    r = len(lists) if lists else (rows or 0)
    c = len(lists[0]) if lists else (cols or 0)
    out = zeros(r, c)
    for i, row in enumerate(lists):
        if len(row) != c:
            raise ValueError(f"Row {i} has {len(row)} entries, expected {c}")
        out[i, :] = row
    return out


def zeros(rows: int, cols: int) -> np.ndarray:
    out = np.empty((rows, cols), dtype=object)
    out.fill(0)
    return out


def identity(n: int) -> np.ndarray:
    out = zeros(n, n)
    for i in range(n):
        out[i, i] = 1
    return out


def int_vector(values: Iterable[int], length: int | None = None) -> np.ndarray:
    vals = [int(v) for v in values]
    if length is not None and len(vals) != length:
        raise ValueError(f"Vector has {len(vals)} entries, expected {length}")
    out = zero_vector(len(vals))
    for i, v in enumerate(vals):
        out[i] = v
    return out


def zero_vector(n: int) -> np.ndarray:
    out = np.empty(n, dtype=object)
    out.fill(0)
    return out


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix (or matrix-vector) product that tolerates empty inner dimensions."""
    if a.shape[-1] == 0:
        if a.ndim == 1:
            return zero_vector(b.shape[1])
        if b.ndim == 1:
            return zero_vector(a.shape[0])
        return zeros(a.shape[0], b.shape[1])
    return np.asarray(a.dot(b), dtype=object)


def block_diag(blocks: Sequence[np.ndarray]) -> np.ndarray:
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = zeros(rows, cols)
    r = c = 0
    for b in blocks:
        out[r:r + b.shape[0], c:c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


def hstack(mats: Sequence[np.ndarray], rows: int) -> np.ndarray:
    mats = [m for m in mats if m.shape[1] > 0]
    if not mats:
        return zeros(rows, 0)
    return np.asarray(np.hstack(mats), dtype=object)


def vstack(mats: Sequence[np.ndarray], cols: int) -> np.ndarray:
    mats = [m for m in mats if m.shape[0] > 0]
    if not mats:
        return zeros(0, cols)
    return np.asarray(np.vstack(mats), dtype=object)


def is_zero(m: np.ndarray) -> bool:
    return m.size == 0 or not np.any(m != 0)


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------


@dataclass
class SmithForm:
    """``U @ A @ V == D`` with U, V unimodular.

    ``diagonal`` holds the nonzero invariant factors d_1 | d_2 | ... (all
    positive); ``rank`` is their count. The inverse transforms are kept so
    callers can move between the original and the diagonal coordinates.
    """

    shape: tuple[int, int]
    diagonal: list[int]
    U: np.ndarray
    V: np.ndarray
    U_inv: np.ndarray
    V_inv: np.ndarray
    rank: int = field(init=False)

    def __post_init__(self) -> None:
        self.rank = len(self.diagonal)

    @property
    def D(self) -> np.ndarray:
        out = zeros(*self.shape)
        for i, d in enumerate(self.diagonal):
            out[i, i] = d
        return out


class _SmithReducer:
    def __init__(self, a: np.ndarray):
        self.A = np.array(a, dtype=object, copy=True)
        m, n = self.A.shape
        self.U = identity(m)
        self.U_inv = identity(m)
        self.V = identity(n)
        self.V_inv = identity(n)

    # row operations act on A and U from the left, on U_inv from the right
    def _swap_rows(self, i: int, j: int) -> None:
        if i == j:
            return
        for mat in (self.A, self.U):
            mat[[i, j], :] = mat[[j, i], :]
        self.U_inv[:, [i, j]] = self.U_inv[:, [j, i]]

    def _negate_row(self, i: int) -> None:
        self.A[i, :] = -self.A[i, :]
        self.U[i, :] = -self.U[i, :]
        self.U_inv[:, i] = -self.U_inv[:, i]

    def _add_row(self, target: int, source: int, k: int) -> None:
        self.A[target, :] += k * self.A[source, :]
        self.U[target, :] += k * self.U[source, :]
        self.U_inv[:, source] -= k * self.U_inv[:, target]

    def _swap_cols(self, i: int, j: int) -> None:
        if i == j:
            return
        for mat in (self.A, self.V):
            mat[:, [i, j]] = mat[:, [j, i]]
        self.V_inv[[i, j], :] = self.V_inv[[j, i], :]

    def _clear_column(self, s: int) -> None:
        q = self.A[s + 1:, s] // self.A[s, s]
        if not np.any(q != 0):
            return
        self.A[s + 1:, :] -= np.outer(q, self.A[s, :])
        self.U[s + 1:, :] -= np.outer(q, self.U[s, :])
        self.U_inv[:, s] += matmul(self.U_inv[:, s + 1:], q)

    def _clear_row(self, s: int) -> None:
        r = self.A[s, s + 1:] // self.A[s, s]
        if not np.any(r != 0):
            return
        self.A[:, s + 1:] -= np.outer(self.A[:, s], r)
        self.V[:, s + 1:] -= np.outer(self.V[:, s], r)
        self.V_inv[s, :] += matmul(r, self.V_inv[s + 1:, :])

    def _pivot(self, s: int) -> Optional[tuple[int, int]]:
        """Smallest nonzero entry of the first nonzero column at or after s."""
        for j in range(s, self.A.shape[1]):
            col = self.A[s:, j]
            nz = np.flatnonzero(col != 0)
            if len(nz):
                i = min(nz, key=lambda k: abs(col[k]))
                return int(i) + s, j
        return None

    def reduce(self) -> SmithForm:
        m, n = self.A.shape
        diagonal: list[int] = []
        for s in range(min(m, n)):
            pos = self._pivot(s)
            if pos is None:
                break
            self._swap_rows(s, pos[0])
            self._swap_cols(s, pos[1])
            while True:
                self._clear_column(s)
                self._clear_row(s)
                # remainders are smaller than the pivot: promote the smallest
                col_rest = np.flatnonzero(self.A[s + 1:, s] != 0)
                if len(col_rest):
                    i = min(col_rest, key=lambda k: abs(self.A[s + 1 + k, s]))
                    self._swap_rows(s, int(i) + s + 1)
                    continue
                row_rest = np.flatnonzero(self.A[s, s + 1:] != 0)
                if len(row_rest):
                    j = min(row_rest, key=lambda k: abs(self.A[s, s + 1 + k]))
                    self._swap_cols(s, int(j) + s + 1)
                    continue
                p = self.A[s, s]
                if abs(p) != 1:
                    bad = np.argwhere(self.A[s + 1:, s + 1:] % p != 0)
                    if len(bad):
                        self._add_row(s, int(bad[0][0]) + s + 1, 1)
                        continue
                break
            if self.A[s, s] < 0:
                self._negate_row(s)
            diagonal.append(int(self.A[s, s]))
        return SmithForm((m, n), diagonal, self.U, self.V, self.U_inv, self.V_inv)


def _monomial_smith(a: np.ndarray) -> Optional[SmithForm]:
    """Signed permutations suffice when every row and column has at most one
    nonzero entry and the sorted magnitudes already form a divisibility chain."""
    m, n = a.shape
    nz = np.argwhere(a != 0)
    rows = [int(i) for i in nz[:, 0]] if len(nz) else []
    cols = [int(j) for j in nz[:, 1]] if len(nz) else []
    if len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
        return None
    entries = sorted((abs(a[i, j]), i, j) for i, j in zip(rows, cols))
    for (d1, _, _), (d2, _, _) in zip(entries, entries[1:]):
        if d2 % d1:
            return None
    used_rows, used_cols = set(rows), set(cols)
    row_order = [i for _, i, _ in entries] + [i for i in range(m) if i not in used_rows]
    col_order = [j for _, _, j in entries] + [j for j in range(n) if j not in used_cols]
    U = zeros(m, m)
    for new, old in enumerate(row_order):
        U[new, old] = -1 if new < len(entries) and a[old, col_order[new]] < 0 else 1
    V = zeros(n, n)
    for new, old in enumerate(col_order):
        V[old, new] = 1
    U_inv = np.array(U.T, dtype=object)
    V_inv = np.array(V.T, dtype=object)
    return SmithForm((m, n), [int(d) for d, _, _ in entries], U, V, U_inv, V_inv)


def smith_normal_form(a: np.ndarray) -> SmithForm:
    """Smith normal form of an integer matrix, with unimodular transforms.

    Empty matrices are accepted and give empty factors.
    """
    a = np.asarray(a, dtype=object)
    if a.ndim != 2:
        raise ValueError("Input array must have two dimensions")
    form = _monomial_smith(a) or _SmithReducer(a).reduce()
    logger.debug("SNF %sx%s -> rank %d", a.shape[0], a.shape[1], form.rank)
    return form


class Lattice:
    """Subgroup of Z^n spanned by the columns of an integer matrix."""

    def __init__(self, spanning: np.ndarray):
        self.spanning = np.asarray(spanning, dtype=object)
        self.ambient = self.spanning.shape[0]
        self.snf = smith_normal_form(self.spanning)
        rho = self.snf.rank
        d = self.snf.diagonal
        basis = zeros(self.ambient, rho)
        for i in range(rho):
            basis[:, i] = self.snf.U_inv[:, i] * d[i]
        self.basis = basis

    @property
    def rank(self) -> int:
        return self.snf.rank

    def _split(self, z: np.ndarray) -> Optional[np.ndarray]:
        w = matmul(self.snf.U, np.asarray(z, dtype=object))
        rho = self.snf.rank
        if np.any(w[rho:] != 0):
            return None
        coeffs = zero_vector(rho)
        for i, d in enumerate(self.snf.diagonal):
            if w[i] % d != 0:
                return None
            coeffs[i] = w[i] // d
        return coeffs

    def coordinates(self, z: np.ndarray) -> Optional[np.ndarray]:
        """Coordinates of ``z`` in ``self.basis``, or None when z is outside."""
        return self._split(z)

    def solve(self, z: np.ndarray) -> Optional[np.ndarray]:
        """Integer x with ``spanning @ x == z``, free coordinates set to zero."""
        coeffs = self._split(z)
        if coeffs is None:
            return None
        return matmul(self.snf.V[:, :self.snf.rank], coeffs)

    def contains(self, z: np.ndarray) -> bool:
        return self._split(z) is not None

    def kernel_basis(self) -> np.ndarray:
        """Z-basis (as columns) of {x : spanning @ x == 0}."""
        return self.snf.V[:, self.snf.rank:]
