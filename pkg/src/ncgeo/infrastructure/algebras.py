"""Finite-dimensional associative unital algebras presented by structure constants."""

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from functools import cached_property

from ncgeo.infrastructure import exactlin as el
from ncgeo.infrastructure.exactlin import ONE, ZERO, Matrix, Scalar, Subspace, Vector
from ncgeo.infrastructure.memo import shared_cache

logger = logging.getLogger(__name__)

Table = tuple[tuple[Mapping[int, Scalar], ...], ...]


class AlgebraAxiomError(Exception):
    pass


class AlgebraMismatchError(Exception):
    pass


class NoInvolutionError(Exception):
    pass


@dataclass(frozen=True, eq=False)
class FiniteAlgebra:
    """Algebra with basis e_0..e_{m-1} and e_i·e_j = Σ_k table[i][j][k] e_k.

    Instances compare by identity; the constructors below are cached so the same
    parameters give the same object.
    """

    label: str
    dim: int
    table: Table
    unit: Vector
    involution: Matrix | None = None
    basis_names: tuple[str, ...] = ()

    def multiply(self, a: Vector, b: Vector) -> Vector:
        out = [ZERO] * self.dim
        for i, x in enumerate(a):
            if not x:
                continue
            row = self.table[i]
            for j, y in enumerate(b):
                if not y:
                    continue
                xy = x * y
                for k, c in row[j].items():
                    out[k] += xy * c
        return tuple(out)

    def star_vector(self, a: Vector) -> Vector:
        if self.involution is None:
            raise NoInvolutionError(f"algebra {self.label} has no involution")
        return el.apply(self.involution, tuple(el.conj(x) for x in a))

    @cached_property
    def left_matrices(self) -> tuple[Matrix, ...]:
        """L_i with L_i·a = e_i·a."""
        mats = []
        for i in range(self.dim):
            entries = {}
            for j in range(self.dim):
                for k, c in self.table[i][j].items():
                    entries[(k, j)] = c
            mats.append(el.from_entries(entries, self.dim, self.dim))
        return tuple(mats)

    @cached_property
    def right_matrices(self) -> tuple[Matrix, ...]:
        """R_j with R_j·a = a·e_j."""
        mats = []
        for j in range(self.dim):
            entries = {}
            for i in range(self.dim):
                for k, c in self.table[i][j].items():
                    entries[(k, i)] = c
            mats.append(el.from_entries(entries, self.dim, self.dim))
        return tuple(mats)

    def left_matrix(self, a: "AlgebraElement | Vector") -> Matrix:
        return el.linear_combination(_coeffs(a), self.left_matrices, self.dim, self.dim)

    def right_matrix(self, a: "AlgebraElement | Vector") -> Matrix:
        return el.linear_combination(_coeffs(a), self.right_matrices, self.dim, self.dim)

    @cached_property
    def multiplication_matrix(self) -> Matrix:
        """μ: A⊗A → A in the coordinates (i, j) → i*m + j."""
        entries = {}
        for i in range(self.dim):
            for j in range(self.dim):
                for k, c in self.table[i][j].items():
                    entries[(k, i * self.dim + j)] = c
        return el.from_entries(entries, self.dim, self.dim * self.dim)

    @cached_property
    def is_commutative(self) -> bool:
        return all(
            self.table[i][j] == self.table[j][i]
            for i in range(self.dim)
            for j in range(i + 1, self.dim)
        )

    @property
    def has_involution(self) -> bool:
        return self.involution is not None

    def element(self, coeffs: Sequence) -> "AlgebraElement":
        return AlgebraElement(self, el.vector(coeffs))

    def basis_element(self, i: int) -> "AlgebraElement":
        return AlgebraElement(self, el.unit_vector(self.dim, i))

    def basis(self) -> list["AlgebraElement"]:
        return [self.basis_element(i) for i in range(self.dim)]

    @property
    def one(self) -> "AlgebraElement":
        return AlgebraElement(self, self.unit)

    @property
    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, el.zero_vector(self.dim))

    def scalar_element(self, c) -> "AlgebraElement":
        return AlgebraElement(self, el.scale_vector(el.scalar(c), self.unit))

    def axiom_violation(self) -> dict | None:
        """First violated algebra axiom on basis elements, or ``None``."""
        m = self.dim
        basis = [el.unit_vector(m, i) for i in range(m)]
        for i in range(m):
            if self.multiply(self.unit, basis[i]) != basis[i]:
                return {"axiom": "left unit", "basis": i}
            if self.multiply(basis[i], self.unit) != basis[i]:
                return {"axiom": "right unit", "basis": i}
        products = [[self.multiply(basis[i], basis[j]) for j in range(m)] for i in range(m)]
        for i in range(m):
            for j in range(m):
                for k in range(m):
                    left = self.multiply(products[i][j], basis[k])
                    right = self.multiply(basis[i], products[j][k])
                    if left != right:
                        return {"axiom": "associativity", "basis": (i, j, k)}
        if self.involution is not None:
            stars = [self.star_vector(b) for b in basis]
            if self.star_vector(self.unit) != self.unit:
                return {"axiom": "unit is self-adjoint"}
            for i in range(m):
                if self.star_vector(stars[i]) != basis[i]:
                    return {"axiom": "involutive", "basis": i}
                for j in range(m):
                    if self.star_vector(products[i][j]) != self.multiply(stars[j], stars[i]):
                        return {"axiom": "anti-multiplicative", "basis": (i, j)}
        return None

    def validate(self) -> "FiniteAlgebra":
        violation = self.axiom_violation()
        if violation is not None:
            raise AlgebraAxiomError(f"{self.label}: {violation}")
        return self

    def __repr__(self) -> str:
        return f"FiniteAlgebra({self.label}, dim={self.dim})"


@dataclass(frozen=True, eq=False, slots=True)
class AlgebraElement:
    algebra: FiniteAlgebra
    coeffs: Vector

    def __post_init__(self) -> None:
        if len(self.coeffs) != self.algebra.dim:
            raise el.DimensionMismatchError(
                f"{len(self.coeffs)} coefficients for an algebra of dimension {self.algebra.dim}"
            )

    def _same(self, other: "AlgebraElement") -> None:
        if other.algebra is not self.algebra:
            raise AlgebraMismatchError(
                f"elements of {self.algebra.label} and {other.algebra.label} do not combine"
            )

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._same(other)
        return AlgebraElement(self.algebra, el.add_vectors(self.coeffs, other.coeffs))

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._same(other)
        return AlgebraElement(self.algebra, el.sub_vectors(self.coeffs, other.coeffs))

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.algebra, tuple(-x for x in self.coeffs))

    def __mul__(self, other) -> "AlgebraElement":
        if isinstance(other, AlgebraElement):
            self._same(other)
            return AlgebraElement(self.algebra, self.algebra.multiply(self.coeffs, other.coeffs))
        return AlgebraElement(self.algebra, el.scale_vector(el.scalar(other), self.coeffs))

    def __rmul__(self, other) -> "AlgebraElement":
        return AlgebraElement(self.algebra, el.scale_vector(el.scalar(other), self.coeffs))

    def star(self) -> "AlgebraElement":
        return AlgebraElement(self.algebra, self.algebra.star_vector(self.coeffs))

    def commutator(self, other: "AlgebraElement") -> "AlgebraElement":
        return self * other - other * self

    def __bool__(self) -> bool:
        return any(self.coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return other.algebra is self.algebra and other.coeffs == self.coeffs

    def __hash__(self) -> int:
        return hash((id(self.algebra), self.coeffs))

    def __repr__(self) -> str:
        names = self.algebra.basis_names or tuple(f"e{i}" for i in range(self.algebra.dim))
        terms = [f"({el.format_scalar(c)})*{names[i]}" for i, c in enumerate(self.coeffs) if c]
        return " + ".join(terms) if terms else "0"


def _coeffs(a: "AlgebraElement | Vector") -> Vector:
    return a.coeffs if isinstance(a, AlgebraElement) else a


def _table_from_rule(dim: int, rule) -> Table:
    return tuple(tuple(rule(i, j) for j in range(dim)) for i in range(dim))


@shared_cache
def matrix_algebra(n: int) -> FiniteAlgebra:
    """M_n with basis E_jk at index j*n + k and the conjugate-transpose involution."""
    if n < 1:
        raise ValueError("matrix algebra needs n >= 1")
    dim = n * n

    def rule(a: int, b: int) -> dict[int, Scalar]:
        j, k = divmod(a, n)
        k2, t = divmod(b, n)
        return {j * n + t: ONE} if k == k2 else {}

    involution = el.from_entries(
        {(k * n + j, j * n + k): ONE for j in range(n) for k in range(n)}, dim, dim
    )
    unit = tuple(ONE if j == k else ZERO for j in range(n) for k in range(n))
    names = tuple(f"E{j + 1}{k + 1}" for j in range(n) for k in range(n))
    table = _table_from_rule(dim, rule)
    algebra = FiniteAlgebra(f"matrix:{n}", dim, table, unit, involution, names)
    logger.debug("Built %s", algebra)
    return algebra.validate()


@shared_cache
def function_algebra(N: int) -> FiniteAlgebra:
    """Functions on N points: orthogonal idempotents e_i with complex conjugation."""
    if N < 1:
        raise ValueError("function algebra needs N >= 1")
    table = _table_from_rule(N, lambda i, j: {i: ONE} if i == j else {})
    names = tuple(f"e{i + 1}" for i in range(N))
    return FiniteAlgebra(
        f"functions:{N}", N, table, (ONE,) * N, el.identity(N), names
    ).validate()


@shared_cache
def truncated_polynomial_algebra(N: int) -> FiniteAlgebra:
    """K[x]/(x^N) with basis 1, x, ..., x^{N-1}; x is self-adjoint."""
    if N < 1:
        raise ValueError("truncated polynomial algebra needs N >= 1")
    table = _table_from_rule(N, lambda i, j: {i + j: ONE} if i + j < N else {})
    names = tuple("1" if i == 0 else ("x" if i == 1 else f"x^{i}") for i in range(N))
    return FiniteAlgebra(
        f"trunc-poly:{N}", N, table, el.unit_vector(N, 0), el.identity(N), names
    ).validate()


@shared_cache
def direct_sum_algebra(A: FiniteAlgebra, B: FiniteAlgebra) -> FiniteAlgebra:
    m = A.dim

    def rule(i: int, j: int) -> dict[int, Scalar]:
        if i < m and j < m:
            return dict(A.table[i][j])
        if i >= m and j >= m:
            return {m + k: c for k, c in B.table[i - m][j - m].items()}
        return {}

    involution = None
    if A.involution is not None and B.involution is not None:
        involution = el.block_diag(A.involution, B.involution)
    names = tuple(f"{x}⊕0" for x in A.basis_names) + tuple(f"0⊕{y}" for y in B.basis_names)
    return FiniteAlgebra(
        f"{A.label}+{B.label}",
        m + B.dim,
        _table_from_rule(m + B.dim, rule),
        A.unit + B.unit,
        involution,
        names,
    ).validate()


def algebra_from_name(name: str) -> FiniteAlgebra:
    """Resolve ``matrix:n``, ``functions:N`` or ``trunc-poly:N``."""
    kind, _, size = name.partition(":")
    constructors = {
        "matrix": matrix_algebra,
        "functions": function_algebra,
        "trunc-poly": truncated_polynomial_algebra,
    }
    if kind not in constructors or not size.isdigit():
        raise ValueError(
            f"unknown algebra {name!r}; expected matrix:n, functions:N or trunc-poly:N"
        )
    return constructors[kind](int(size))


@shared_cache
def centre_subspace(A: FiniteAlgebra) -> Subspace:
    blocks = [el.sub(A.right_matrices[i], A.left_matrices[i]) for i in range(A.dim)]
    return el.kernel(el.vstack(blocks, A.dim))


def centre_basis(A: FiniteAlgebra) -> list[AlgebraElement]:
    return [AlgebraElement(A, v) for v in centre_subspace(A).vectors()]


def is_central(a: AlgebraElement) -> bool:
    return centre_subspace(a.algebra).contains(a.coeffs)


# --- matrices over an algebra -------------------------------------------------

AlgebraMatrix = tuple[tuple[AlgebraElement, ...], ...]


class NotSquareError(Exception):
    pass


def algebra_matrix(A: FiniteAlgebra, rows: Sequence[Sequence]) -> AlgebraMatrix:
    """Square/rectangular matrix with entries in A; plain scalars become multiples of 1."""
    return tuple(
        tuple(x if isinstance(x, AlgebraElement) else A.scalar_element(x) for x in row)
        for row in rows
    )


def matrix_product(p: AlgebraMatrix, q: AlgebraMatrix) -> AlgebraMatrix:
    if not p or not q or len(p[0]) != len(q):
        raise el.DimensionMismatchError("incompatible algebra matrices")
    A = p[0][0].algebra
    out = []
    for i in range(len(p)):
        row = []
        for j in range(len(q[0])):
            total = A.zero
            for k in range(len(q)):
                total = total + p[i][k] * q[k][j]
            row.append(total)
        out.append(tuple(row))
    return tuple(out)


def square_size(p: AlgebraMatrix) -> int:
    n = len(p)
    if any(len(row) != n for row in p):
        raise NotSquareError(f"matrix with {n} rows is not square")
    return n


def idempotent_check(p: AlgebraMatrix) -> bool:
    square_size(p)
    return matrix_product(p, p) == p


def assemble_blocks(blocks: Sequence[Sequence[AlgebraMatrix]]) -> AlgebraMatrix:
    """Glue a block matrix of algebra matrices into one matrix."""
    rows = []
    for block_row in blocks:
        height = len(block_row[0])
        for r in range(height):
            row: list[AlgebraElement] = []
            for block in block_row:
                row.extend(block[r])
            rows.append(tuple(row))
    return tuple(rows)
