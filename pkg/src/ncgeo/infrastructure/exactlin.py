"""Exact linear algebra over the Gaussian rationals.

Scalars are elements of sympy's ``QQ_I`` field and matrices are ``DomainMatrix``
objects over it. Vectors are plain tuples of scalars. Every kernel, image and
quotient computed anywhere in the package goes through this module, so equality
tests downstream are exact.

Matrices are kept in sympy's sparse format; the arithmetic helpers below use the
method API (``add``, ``matmul``...) because the operator overloads unify operands
to the dense format.
"""

import logging
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from functools import cached_property

from sympy import I, QQ_I, Rational, sympify
from sympy.polys.matrices import DomainMatrix
from sympy.polys.polyerrors import CoercionFailed

from ncgeo.config import settings

logger = logging.getLogger(__name__)

Scalar = type(QQ_I.one)
Matrix = DomainMatrix
Vector = tuple

ZERO = QQ_I.zero
ONE = QQ_I.one
IMAG = QQ_I(0, 1)


class DimensionMismatchError(Exception):
    pass


class NotInSubspaceError(Exception):
    pass


# ---------------------------------------------------------------------------
# scalars


def parse_scalar(text: str) -> Scalar:
    """Parse ``a/b``, ``c/di``, ``a/b+c/di`` or ``a/b-c/di`` into an exact scalar."""
    raw = text.strip().replace(" ", "")
    if not raw:
        raise ValueError("empty scalar")
    real_part, imag_part = raw, "0"
    if raw.endswith("i"):
        body = raw[:-1]
        split = max(body.rfind("+"), body.rfind("-"))
        if split > 0:
            real_part, imag_part = body[:split], body[split:]
        else:
            real_part, imag_part = "0", body
        if imag_part in ("", "+", "-"):
            imag_part += "1"
    try:
        re_value, im_value = Rational(real_part), Rational(imag_part)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"cannot parse scalar {text!r}") from exc
    return QQ_I.from_sympy(re_value + im_value * I)


def scalar(value) -> Scalar:
    if isinstance(value, Scalar):
        return value
    if isinstance(value, int):
        return QQ_I(value, 0)
    if isinstance(value, str):
        return parse_scalar(value)
    try:
        return QQ_I.convert(value)
    except CoercionFailed:
        return QQ_I.from_sympy(sympify(value))


def conj(z: Scalar) -> Scalar:
    return QQ_I(z.x, -z.y)


def format_scalar(z: Scalar) -> str:
    """Render a scalar in the syntax accepted by :func:`parse_scalar`."""
    re_part, im_part = z.x, z.y
    if not im_part:
        return str(re_part)
    im_text = "" if abs(im_part) == 1 else str(abs(im_part))
    if not re_part:
        return f"{'-' if im_part < 0 else ''}{im_text}i"
    return f"{re_part}{'-' if im_part < 0 else '+'}{im_text}i"


# ---------------------------------------------------------------------------
# vectors


def vector(values: Iterable) -> Vector:
    return tuple(scalar(v) for v in values)


def zero_vector(n: int) -> Vector:
    return (ZERO,) * n


def unit_vector(n: int, index: int) -> Vector:
    return tuple(ONE if i == index else ZERO for i in range(n))


def add_vectors(u: Vector, v: Vector) -> Vector:
    if len(u) != len(v):
        raise DimensionMismatchError(f"cannot add vectors of length {len(u)} and {len(v)}")
    return tuple(a + b for a, b in zip(u, v))


def sub_vectors(u: Vector, v: Vector) -> Vector:
    if len(u) != len(v):
        raise DimensionMismatchError(f"cannot subtract vectors of length {len(u)} and {len(v)}")
    return tuple(a - b for a, b in zip(u, v))


def scale_vector(c: Scalar, v: Vector) -> Vector:
    return tuple(c * a for a in v)


def is_zero_vector(v: Vector) -> bool:
    return not any(v)


def first_nonzero(v: Vector) -> int | None:
    return next((i for i, a in enumerate(v) if a), None)


def kron_vectors(u: Vector, v: Vector) -> Vector:
    return tuple(a * b for a in u for b in v)


# ---------------------------------------------------------------------------
# matrices


def from_entries(entries: Mapping[tuple[int, int], Scalar], rows: int, cols: int) -> Matrix:
    dok = {key: value for key, value in entries.items() if value}
    return DomainMatrix.from_dok(dok, (rows, cols), QQ_I)


def zeros(rows: int, cols: int) -> Matrix:
    return DomainMatrix.zeros((rows, cols), QQ_I)


def identity(n: int) -> Matrix:
    return DomainMatrix.eye(n, QQ_I)


def matrix(rows: Sequence[Sequence]) -> Matrix:
    """Build a matrix from nested rows of anything :func:`scalar` accepts."""
    n_rows = len(rows)
    n_cols = len(rows[0]) if rows else 0
    entries = {}
    for i, row in enumerate(rows):
        if len(row) != n_cols:
            raise DimensionMismatchError("ragged rows")
        for j, value in enumerate(row):
            entries[(i, j)] = scalar(value)
    return from_entries(entries, n_rows, n_cols)


def from_rows(rows: Sequence[Vector], cols: int) -> Matrix:
    entries = {}
    for i, row in enumerate(rows):
        if len(row) != cols:
            raise DimensionMismatchError(f"row {i} has length {len(row)}, expected {cols}")
        for j, value in enumerate(row):
            entries[(i, j)] = value
    return from_entries(entries, len(rows), cols)


def from_columns(columns: Sequence[Vector], rows: int) -> Matrix:
    entries = {}
    for j, col in enumerate(columns):
        if len(col) != rows:
            raise DimensionMismatchError(f"column {j} has length {len(col)}, expected {rows}")
        for i, value in enumerate(col):
            entries[(i, j)] = value
    return from_entries(entries, rows, len(columns))


def column(m: Matrix, j: int) -> Vector:
    rows, _ = m.shape
    out = [ZERO] * rows
    for (i, jj), value in m.to_dok().items():
        if jj == j:
            out[i] = value
    return tuple(out)


def columns(m: Matrix) -> list[Vector]:
    rows, cols = m.shape
    out = [[ZERO] * rows for _ in range(cols)]
    for (i, j), value in m.to_dok().items():
        out[j][i] = value
    return [tuple(c) for c in out]


def to_rows(m: Matrix) -> list[Vector]:
    rows, cols = m.shape
    out = [[ZERO] * cols for _ in range(rows)]
    for (i, j), value in m.to_dok().items():
        out[i][j] = value
    return [tuple(r) for r in out]


def entry(m: Matrix, i: int, j: int) -> Scalar:
    return m.to_dok().get((i, j), ZERO)


def is_zero(m: Matrix) -> bool:
    return m.nnz() == 0


def equal(a: Matrix, b: Matrix) -> bool:
    return a.shape == b.shape and a.to_sparse().to_dok() == b.to_sparse().to_dok()


def first_difference(a: Matrix, b: Matrix) -> tuple[int, int, Scalar, Scalar] | None:
    """Return ``(row, col, a_value, b_value)`` for the first entry where ``a`` and ``b`` differ."""
    da, db = a.to_dok(), b.to_dok()
    for key in sorted(set(da) | set(db)):
        left, right = da.get(key, ZERO), db.get(key, ZERO)
        if left != right:
            return key[0], key[1], left, right
    return None


def _check_shape(a: Matrix, b: Matrix, op: str) -> None:
    if a.shape != b.shape:
        raise DimensionMismatchError(f"cannot {op} {a.shape} and {b.shape} matrices")


def add(a: Matrix, b: Matrix) -> Matrix:
    _check_shape(a, b, "add")
    return a.to_sparse().add(b.to_sparse())


def sub(a: Matrix, b: Matrix) -> Matrix:
    _check_shape(a, b, "subtract")
    return a.to_sparse().sub(b.to_sparse())


def matmul(a: Matrix, *rest: Matrix) -> Matrix:
    out = a.to_sparse()
    for b in rest:
        if out.shape[1] != b.shape[0]:
            raise DimensionMismatchError(f"cannot multiply {out.shape} by {b.shape}")
        out = out.matmul(b.to_sparse())
    return out


def scale(c: Scalar, m: Matrix) -> Matrix:
    if not c:
        return zeros(*m.shape)
    return m.to_sparse().scalarmul(c)


def transpose(m: Matrix) -> Matrix:
    return m.to_sparse().transpose()


def conjugate(m: Matrix) -> Matrix:
    rows, cols = m.shape
    return from_entries({k: conj(v) for k, v in m.to_dok().items()}, rows, cols)


def adjoint(m: Matrix) -> Matrix:
    return transpose(conjugate(m))


def linear_combination(coeffs: Sequence[Scalar], mats: Sequence[Matrix], rows: int, cols: int):
    entries: dict[tuple[int, int], Scalar] = {}
    for c, m in zip(coeffs, mats):
        if not c:
            continue
        for key, value in m.to_dok().items():
            entries[key] = entries.get(key, ZERO) + c * value
    return from_entries(entries, rows, cols)


def kron(a: Matrix, b: Matrix) -> Matrix:
    ra, ca = a.shape
    rb, cb = b.shape
    db = b.to_dok()
    entries = {}
    for (i, j), x in a.to_dok().items():
        for (k, t), y in db.items():
            entries[(i * rb + k, j * cb + t)] = x * y
    return from_entries(entries, ra * rb, ca * cb)


def block_diag(*mats: Matrix) -> Matrix:
    entries = {}
    r0 = c0 = 0
    for m in mats:
        for (i, j), value in m.to_dok().items():
            entries[(r0 + i, c0 + j)] = value
        r0 += m.shape[0]
        c0 += m.shape[1]
    return from_entries(entries, r0, c0)


def vstack(mats: Sequence[Matrix], cols: int) -> Matrix:
    entries = {}
    offset = 0
    for m in mats:
        if m.shape[1] != cols:
            raise DimensionMismatchError(f"cannot stack {m.shape} under {cols} columns")
        for (i, j), value in m.to_dok().items():
            entries[(offset + i, j)] = value
        offset += m.shape[0]
    return from_entries(entries, offset, cols)


def hstack(mats: Sequence[Matrix], rows: int) -> Matrix:
    return transpose(vstack([transpose(m) for m in mats], rows))


def apply(m: Matrix, v: Vector) -> Vector:
    rows, cols = m.shape
    if cols != len(v):
        raise DimensionMismatchError(f"cannot apply {m.shape} matrix to vector of length {len(v)}")
    out = [ZERO] * rows
    for (i, j), value in m.to_dok().items():
        if v[j]:
            out[i] += value * v[j]
    return tuple(out)


# ---------------------------------------------------------------------------
# elimination


def _echelon(m: Matrix) -> tuple[Matrix, tuple[int, ...]]:
    """Nonzero rows of the reduced row echelon form, and their pivot columns."""
    rows, cols = m.shape
    if rows == 0 or cols == 0 or is_zero(m):
        return zeros(0, cols), ()
    reduced, pivots = m.to_sparse().rref(method=settings.rref_method)
    pivots = tuple(pivots)
    rank = len(pivots)
    dok = {key: value for key, value in reduced.to_dok().items() if key[0] < rank}
    return from_entries(dok, rank, cols), pivots


def rref(m: Matrix) -> Matrix:
    rows, cols = m.shape
    basis, _ = _echelon(m)
    return from_entries(basis.to_dok(), rows, cols)


def rank(m: Matrix) -> int:
    return len(_echelon(m)[1])


def kernel(m: Matrix) -> "Subspace":
    """Right null space of ``m``."""
    _, cols = m.shape
    basis, pivots = _echelon(m)
    if not pivots:
        return Subspace.full(cols)
    if len(pivots) == cols:
        return Subspace.zero(cols)
    null = basis.nullspace_from_rref(list(pivots))
    return Subspace.from_matrix(null.to_sparse())


def image(m: Matrix) -> "Subspace":
    """Column space of ``m``."""
    return Subspace.from_matrix(transpose(m))


def solve(m: Matrix, b: Vector) -> Vector | None:
    """Some exact solution of ``m·x = b``, or ``None`` when the system is inconsistent."""
    rows, cols = m.shape
    if len(b) != rows:
        raise DimensionMismatchError(f"right-hand side has length {len(b)}, expected {rows}")
    entries = dict(m.to_dok())
    for i, value in enumerate(b):
        if value:
            entries[(i, cols)] = value
    reduced, pivots = _echelon(from_entries(entries, rows, cols + 1))
    if pivots and pivots[-1] == cols:
        return None
    dok = reduced.to_dok()
    x = [ZERO] * cols
    for i, p in enumerate(pivots):
        x[p] = dok.get((i, cols), ZERO)
    return tuple(x)


def inverse(m: Matrix) -> Matrix:
    rows, cols = m.shape
    if rows != cols:
        raise DimensionMismatchError(f"cannot invert a {m.shape} matrix")
    return m.to_sparse().inv()


# ---------------------------------------------------------------------------
# subspaces and quotients


@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace stored by the nonzero rows of its reduced row echelon basis."""

    ambient_dim: int
    basis: Matrix
    pivots: tuple[int, ...]

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, zeros(0, ambient_dim), ())

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, identity(ambient_dim), tuple(range(ambient_dim)))

    @classmethod
    def from_matrix(cls, rows: Matrix) -> "Subspace":
        """Row space of ``rows``."""
        basis, pivots = _echelon(rows)
        return cls(rows.shape[1], basis, pivots)

    @classmethod
    def span(cls, vectors: Iterable[Vector], ambient_dim: int) -> "Subspace":
        return cls.from_matrix(from_rows(list(vectors), ambient_dim))

    @property
    def dim(self) -> int:
        return len(self.pivots)

    @cached_property
    def _rows(self) -> tuple[dict[int, Scalar], ...]:
        out: list[dict[int, Scalar]] = [{} for _ in self.pivots]
        for (i, j), value in self.basis.to_dok().items():
            out[i][j] = value
        return tuple(out)

    def vectors(self) -> list[Vector]:
        return to_rows(self.basis)

    def reduce(self, v: Vector) -> Vector:
        """Residue of ``v`` after clearing the pivot coordinates; zero iff ``v`` is inside."""
        if len(v) != self.ambient_dim:
            raise DimensionMismatchError(
                f"vector of length {len(v)} in a {self.ambient_dim}-dimensional space"
            )
        out = list(v)
        for p, row in zip(self.pivots, self._rows):
            c = v[p]
            if not c:
                continue
            for j, value in row.items():
                out[j] -= c * value
        return tuple(out)

    def contains(self, v: Vector) -> bool:
        return is_zero_vector(self.reduce(v))

    def coordinates(self, v: Vector) -> Vector:
        if not self.contains(v):
            raise NotInSubspaceError("vector is not in the subspace")
        return tuple(v[p] for p in self.pivots)

    def from_coordinates(self, coords: Vector) -> Vector:
        if len(coords) != self.dim:
            raise DimensionMismatchError(f"expected {self.dim} coordinates, got {len(coords)}")
        out = [ZERO] * self.ambient_dim
        for c, row in zip(coords, self._rows):
            if not c:
                continue
            for j, value in row.items():
                out[j] += c * value
        return tuple(out)

    def embedding(self) -> Matrix:
        """Matrix whose columns are the basis vectors."""
        return transpose(self.basis)

    def is_subspace_of(self, other: "Subspace") -> bool:
        return all(other.contains(v) for v in self.vectors())

    def sum(self, other: "Subspace") -> "Subspace":
        if other.ambient_dim != self.ambient_dim:
            raise DimensionMismatchError("subspaces live in different ambient spaces")
        return Subspace.from_matrix(vstack([self.basis, other.basis], self.ambient_dim))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return (
            self.ambient_dim == other.ambient_dim
            and self.pivots == other.pivots
            and self.basis.to_dok() == other.basis.to_dok()
        )

    def __hash__(self) -> int:
        return hash((self.ambient_dim, self.pivots, frozenset(self.basis.to_dok().items())))

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})"


def restrict(linear: Matrix, source: Subspace, target: Subspace | None = None) -> Matrix:
    """Matrix of ``linear`` restricted to ``source``, in the coordinates of ``target``.

    Raises :class:`NotInSubspaceError` when some image leaves ``target``.
    """
    target = target if target is not None else source
    images = []
    for b in source.vectors():
        w = apply(linear, b)
        if not target.contains(w):
            raise NotInSubspaceError("linear map does not preserve the subspace")
        images.append(target.coordinates(w))
    return from_columns(images, target.dim)


@dataclass(frozen=True, eq=False)
class QuotientMap:
    ambient_dim: int
    kernel: Subspace
    complement: tuple[int, ...]
    projection: Matrix
    section: Matrix

    @property
    def dim(self) -> int:
        return len(self.complement)

    def project(self, v: Vector) -> Vector:
        residue = self.kernel.reduce(v)
        return tuple(residue[c] for c in self.complement)

    def lift(self, w: Vector) -> Vector:
        if len(w) != self.dim:
            raise DimensionMismatchError(f"quotient vector of length {len(w)}, expected {self.dim}")
        out = [ZERO] * self.ambient_dim
        for c, value in zip(self.complement, w):
            out[c] = value
        return tuple(out)

    def induce(self, linear: Matrix, target: "QuotientMap | None" = None) -> Matrix:
        """Map induced on quotients by an ambient map that preserves the kernels."""
        target = target if target is not None else self
        for v in self.kernel.vectors():
            if not target.kernel.contains(apply(linear, v)):
                raise NotInSubspaceError("ambient map does not preserve the quotient kernel")
        return matmul(target.projection, linear, self.section)


def quotient(ambient_dim: int, s: Subspace) -> QuotientMap:
    if s.ambient_dim != ambient_dim:
        raise DimensionMismatchError(
            f"subspace lives in dimension {s.ambient_dim}, expected {ambient_dim}"
        )
    pivot_set = set(s.pivots)
    complement = tuple(j for j in range(ambient_dim) if j not in pivot_set)
    projection: dict[tuple[int, int], Scalar] = {}
    section: dict[tuple[int, int], Scalar] = {}
    rows = to_rows(s.basis)
    for t, c in enumerate(complement):
        projection[(t, c)] = ONE
        section[(c, t)] = ONE
        for p, row in zip(s.pivots, rows):
            if row[c]:
                projection[(t, p)] = -row[c]
    return QuotientMap(
        ambient_dim=ambient_dim,
        kernel=s,
        complement=complement,
        projection=from_entries(projection, len(complement), ambient_dim),
        section=from_entries(section, ambient_dim, len(complement)),
    )


def identity_quotient(ambient_dim: int) -> QuotientMap:
    """Quotient by the zero subspace, used as the target of maps into plain spaces."""
    return quotient(ambient_dim, Subspace.zero(ambient_dim))
