"""Dense matrices and subspaces over a finite field.

Entries are integer field encodings stored in int64 numpy arrays.  Row
reduction uses canonical pivoting (leftmost nonzero column, topmost nonzero
row, pivot scaled to 1), so reduced forms are unique and reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .galois import GF, FieldError

_FLOAT_EXACT = 1 << 53


class InconsistentSystemError(ValueError):
    """``A x = b`` has no solution.

    ``certificate`` is a row vector ``y`` with ``y A = 0`` and ``y b != 0``.
    """

    def __init__(self, certificate: MatrixGF):
        super().__init__("linear system is inconsistent")
        self.certificate = certificate


def _int_matmul(A: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    inner = A.shape[1]
    if inner == 0:
        return np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    if inner * (p - 1) ** 2 < _FLOAT_EXACT:
        prod = A.astype(np.float64) @ B.astype(np.float64)
        return prod.astype(np.int64) % p
    out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    step = max(1, (1 << 62) // max((p - 1) ** 2, 1))
    for s in range(0, inner, step):
        out = (out + A[:, s : s + step] @ B[s : s + step]) % p
    return out


def field_matmul(F: GF, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Matrix product over ``F`` of integer-encoded arrays."""
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    if F.base is None:
        return _int_matmul(A, B, F.p)
    if F.degree == 1:
        return field_matmul(F.base, A, B)
    base, N = F.base, F.degree
    DA, DB = F.coeffs(A), F.coeffs(B)
    nz_a = [d for d in range(N) if DA[..., d].any()]
    nz_b = [e for e in range(N) if DB[..., e].any()]
    acc = np.zeros((2 * N - 1, A.shape[0], B.shape[1]), dtype=np.int64)
    for d in nz_a:
        for e in nz_b:
            acc[d + e] = base.add(acc[d + e], field_matmul(base, DA[..., d], DB[..., e]))
    for t in range(2 * N - 2, N - 1, -1):
        if not acc[t].any():
            continue
        for i, c in enumerate(F._neg_low):
            if c:
                acc[t - N + i] = base.add(acc[t - N + i], base.mul(acc[t], int(c)))
    return F.from_coeffs(np.moveaxis(acc[:N], 0, -1))


class MatrixGF:
    """An immutable rows x cols matrix over a finite field."""

    __slots__ = ("field", "data")

    def __init__(self, field: GF, entries, cols: int | None = None):
        data = np.array(entries, dtype=np.int64)
        if data.ndim == 1 and cols is not None:
            data = data.reshape(-1, cols)
        if data.size == 0 and data.ndim != 2:
            data = data.reshape(0, cols or 0)
        if data.ndim != 2:
            raise ValueError("matrix entries must be two-dimensional")
        if data.size and (data.min() < 0 or data.max() >= field.order):
            raise FieldError(f"entries are not elements of {field}")
        data.setflags(write=False)
        self.field = field
        self.data = data

    @classmethod
    def _trusted(cls, field: GF, data: np.ndarray) -> MatrixGF:
        obj = cls.__new__(cls)
        data = np.ascontiguousarray(data, dtype=np.int64)
        data.setflags(write=False)
        obj.field = field
        obj.data = data
        return obj

    @classmethod
    def zeros(cls, field: GF, rows: int, cols: int) -> MatrixGF:
        return cls._trusted(field, np.zeros((rows, cols), dtype=np.int64))

    @classmethod
    def identity(cls, field: GF, n: int) -> MatrixGF:
        return cls._trusted(field, np.eye(n, dtype=np.int64))

    @classmethod
    def column(cls, field: GF, values) -> MatrixGF:
        return cls(field, np.asarray(values, dtype=np.int64).reshape(-1, 1))

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def T(self) -> MatrixGF:
        return MatrixGF._trusted(self.field, self.data.T)

    def __getitem__(self, idx) -> MatrixGF:
        sub = self.data[idx]
        if sub.ndim != 2:
            raise IndexError("matrix indexing must keep two dimensions")
        return MatrixGF._trusted(self.field, sub)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MatrixGF)
            and self.field == other.field
            and self.shape == other.shape
            and np.array_equal(self.data, other.data)
        )

    def __hash__(self):
        return hash((self.field, self.shape, self.data.tobytes()))

    def __repr__(self) -> str:
        return f"MatrixGF({self.field}, {self.data.tolist()})"

    def _coerce(self, other: MatrixGF) -> tuple[GF, np.ndarray, np.ndarray]:
        if other.field == self.field:
            return self.field, self.data, other.data
        if other.field.is_extension_of(self.field):
            return other.field, self.data, other.data
        if self.field.is_extension_of(other.field):
            return self.field, self.data, other.data
        raise FieldError(f"field mismatch: {self.field} vs {other.field}")

    def __matmul__(self, other: MatrixGF) -> MatrixGF:
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        F, a, b = self._coerce(other)
        return MatrixGF._trusted(F, field_matmul(F, a, b))

    def __add__(self, other: MatrixGF) -> MatrixGF:
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        F, a, b = self._coerce(other)
        return MatrixGF._trusted(F, F.add(a, b))

    def __sub__(self, other: MatrixGF) -> MatrixGF:
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        F, a, b = self._coerce(other)
        return MatrixGF._trusted(F, F.sub(a, b))

    def scale(self, c: int) -> MatrixGF:
        return MatrixGF._trusted(self.field, self.field.mul(self.data, int(c)))

    def embed(self, ext: GF) -> MatrixGF:
        """The same matrix viewed over an extension field of its field."""
        if not ext.is_extension_of(self.field):
            raise FieldError(f"{ext} does not contain {self.field}")
        return MatrixGF._trusted(ext, self.data)

    def apply(self, vec, field: GF | None = None) -> np.ndarray:
        """``self @ vec`` for a vector over this field or an extension ``field``."""
        F = field or self.field
        if not F.is_extension_of(self.field):
            raise FieldError(f"{F} does not contain {self.field}")
        vec = np.asarray(vec, dtype=np.int64).reshape(-1, 1)
        if vec.shape[0] != self.cols:
            raise ValueError(f"vector of length {vec.shape[0]} for {self.cols} columns")
        return field_matmul(F, self.data, vec)[:, 0]

    def rank(self) -> int:
        return rank(self)

    def rref(self) -> tuple[MatrixGF, int, tuple[int, ...]]:
        return rref(self)

    def inverse(self) -> MatrixGF:
        return inverse(self)

    def to_dict(self) -> dict:
        return {
            "field": self.field.to_dict(),
            "rows": self.rows,
            "cols": self.cols,
            "entries": [int(x) for x in self.data.ravel()],
        }

    @staticmethod
    def from_dict(d: dict) -> MatrixGF:
        field = GF.from_dict(d["field"])
        data = np.array(d["entries"], dtype=np.int64).reshape(d["rows"], d["cols"])
        return MatrixGF(field, data)


def vstack(parts: Sequence[MatrixGF], cols: int | None = None, field: GF | None = None) -> MatrixGF:
    if not parts:
        if cols is None or field is None:
            raise ValueError("empty vstack needs cols and field")
        return MatrixGF.zeros(field, 0, cols)
    F = _common_field(parts)
    widths = {m.cols for m in parts}
    if len(widths) != 1:
        raise ValueError(f"column mismatch in vstack: {sorted(widths)}")
    return MatrixGF._trusted(F, np.vstack([m.data for m in parts]))


def hstack(parts: Sequence[MatrixGF]) -> MatrixGF:
    F = _common_field(parts)
    heights = {m.rows for m in parts}
    if len(heights) != 1:
        raise ValueError(f"row mismatch in hstack: {sorted(heights)}")
    return MatrixGF._trusted(F, np.hstack([m.data for m in parts]))


def _common_field(parts: Sequence[MatrixGF]) -> GF:
    F = parts[0].field
    for m in parts[1:]:
        if m.field == F or F.is_extension_of(m.field):
            continue
        if m.field.is_extension_of(F):
            F = m.field
        else:
            raise FieldError(f"field mismatch: {F} vs {m.field}")
    return F


def _eliminate(F: GF, R: np.ndarray, pivot_limit: int, reduced: bool) -> list[int]:
    """In-place Gaussian elimination of ``R``; returns pivot columns."""
    rows, cols = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(min(pivot_limit, cols)):
        if r == rows:
            break
        nz = np.flatnonzero(R[r:, c])
        if nz.size == 0:
            continue
        pr = r + int(nz[0])
        if pr != r:
            R[[r, pr]] = R[[pr, r]]
        lead = int(R[r, c])
        if lead != 1:
            R[r, c:] = F.mul(R[r, c:], F.inv(lead))
        col = R[:, c] if reduced else R[r + 1 :, c]
        targets = np.flatnonzero(col)
        if not reduced:
            targets = targets + r + 1
        targets = targets[targets != r]
        if targets.size:
            f = R[targets, c]
            R[targets, c:] = F.sub(R[targets, c:], F.mul(f[:, None], R[r, c:][None, :]))
        pivots.append(c)
        r += 1
    return pivots


def rref(M: MatrixGF, pivot_limit: int | None = None) -> tuple[MatrixGF, int, tuple[int, ...]]:
    """Reduced row-echelon form, rank and pivot columns.

    ``pivot_limit`` restricts pivot search to the first columns while row
    operations still span the full width (for augmented systems).
    """
    R = M.data.copy()
    pivots = _eliminate(M.field, R, M.cols if pivot_limit is None else pivot_limit, True)
    return MatrixGF._trusted(M.field, R), len(pivots), tuple(pivots)


def rank(M: MatrixGF) -> int:
    if M.rows == 0 or M.cols == 0:
        return 0
    R = M.data.copy()
    return len(_eliminate(M.field, R, M.cols, False))


def echelon_pivots(M: MatrixGF) -> tuple[int, ...]:
    """Pivot columns of a row-echelon form; ``len`` is the rank and the
    number of pivots before column c is the rank of the first c columns."""
    R = M.data.copy()
    return tuple(_eliminate(M.field, R, M.cols, False))


def kernel(M: MatrixGF) -> MatrixGF:
    """Basis (as rows) of the right null space {x : M x = 0}."""
    R, r, pivots = rref(M)
    F, n = M.field, M.cols
    free = [c for c in range(n) if c not in set(pivots)]
    out = np.zeros((len(free), n), dtype=np.int64)
    for i, fc in enumerate(free):
        out[i, fc] = 1
        for row, pc in enumerate(pivots):
            out[i, pc] = F.neg(int(R.data[row, fc]))
    return MatrixGF._trusted(F, out)


def left_kernel(M: MatrixGF) -> MatrixGF:
    """Basis (as rows) of {y : y M = 0}."""
    return kernel(M.T)


def solve(A: MatrixGF, b) -> tuple[MatrixGF, MatrixGF]:
    """One solution of ``A X = b`` and a kernel basis of ``A``.

    ``b`` may be a column, a matrix of several right-hand sides, or a plain
    vector; it may live over an extension of ``A``'s field.  Raises
    :class:`InconsistentSystemError` with a left-kernel certificate.
    """
    if not isinstance(b, MatrixGF):
        b = MatrixGF(A.field, np.asarray(b, dtype=np.int64).reshape(-1, 1))
    if b.rows != A.rows:
        raise ValueError(f"dimension mismatch: A is {A.shape}, b has {b.rows} rows")
    F = b.field if b.field.is_extension_of(A.field) else A.field
    if not F.is_extension_of(b.field):
        raise FieldError(f"field mismatch: {A.field} vs {b.field}")
    m, n, k = A.rows, A.cols, b.cols
    aug = np.hstack([A.data, b.data, np.eye(m, dtype=np.int64)])
    pivots = _eliminate(F, aug, n + k, True)
    rhs_piv = [p for p in pivots if p >= n]
    if rhs_piv:
        row = pivots.index(rhs_piv[0])
        cert = MatrixGF._trusted(F, aug[row : row + 1, n + k :])
        raise InconsistentSystemError(cert)
    x = np.zeros((n, k), dtype=np.int64)
    for row, pc in enumerate(pivots):
        x[pc] = aug[row, n : n + k]
    return MatrixGF._trusted(F, x), kernel(A)


def inverse(M: MatrixGF) -> MatrixGF:
    if M.rows != M.cols:
        raise ValueError("only square matrices are invertible")
    n = M.rows
    aug = np.hstack([M.data, np.eye(n, dtype=np.int64)])
    pivots = _eliminate(M.field, aug, n, True)
    if len(pivots) != n:
        raise ValueError("matrix is singular")
    return MatrixGF._trusted(M.field, aug[:, n:])


@dataclass(frozen=True)
class Subspace:
    """Row space of a matrix, stored by its canonical RREF basis."""

    basis: MatrixGF

    @classmethod
    def span(cls, M: MatrixGF) -> Subspace:
        R, r, _ = rref(M)
        return cls(R[:r])

    @property
    def dim(self) -> int:
        return self.basis.rows

    @property
    def ambient_dim(self) -> int:
        return self.basis.cols

    @property
    def field(self) -> GF:
        return self.basis.field

    def __add__(self, other: Subspace) -> Subspace:
        return Subspace.span(vstack([self.basis, other.basis]))

    def __le__(self, other: Subspace) -> bool:
        return rank(vstack([other.basis, self.basis])) == other.dim

    def __and__(self, other: Subspace) -> Subspace:
        return intersection_via_kernel(self.basis, other.basis)

    def __eq__(self, other) -> bool:
        return isinstance(other, Subspace) and self.basis == other.basis

    def __hash__(self):
        return hash(self.basis)


def _check_ambient(parts: Iterable[MatrixGF]) -> list[MatrixGF]:
    parts = list(parts)
    if len({m.cols for m in parts}) > 1:
        raise ValueError("subspaces live in different ambient spaces")
    return parts


def subspace_sum_dim(parts: Sequence[MatrixGF]) -> int:
    """dim of the sum of the row spaces of ``parts``."""
    parts = _check_ambient(parts)
    if not parts:
        return 0
    return rank(vstack(parts))


def subspace_intersection_dim(A: MatrixGF, B: MatrixGF) -> int:
    """dim(A ∩ B) = dim A + dim B - dim(A + B)."""
    _check_ambient([A, B])
    return rank(A) + rank(B) - subspace_sum_dim([A, B])


def intersection_via_kernel(A: MatrixGF, B: MatrixGF) -> Subspace:
    """A ∩ B from the left kernel of [A; B]: pairs (a, b) with aA = -bB."""
    _check_ambient([A, B])
    Y = left_kernel(vstack([A, B]))
    if Y.rows == 0:
        return Subspace(MatrixGF.zeros(A.field, 0, A.cols))
    return Subspace.span(Y[:, : A.rows] @ A)


def same_row_space(A: MatrixGF, B: MatrixGF) -> bool:
    ra, rb = rank(A), rank(B)
    return ra == rb and subspace_sum_dim([A, B]) == ra


def contained_in(A: MatrixGF, B: MatrixGF) -> bool:
    """Row space of A lies inside the row space of B."""
    return subspace_sum_dim([A, B]) == rank(B)
