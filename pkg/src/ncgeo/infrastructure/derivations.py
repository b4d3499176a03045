"""Derivations of finite algebras and the integer anti-Hermitian basis of su(n)."""

import logging
from collections import defaultdict
from dataclasses import dataclass

from ncgeo.infrastructure import exactlin as el
from ncgeo.infrastructure.algebras import (
    AlgebraElement,
    AlgebraMismatchError,
    FiniteAlgebra,
    NoInvolutionError,
    matrix_algebra,
)
from ncgeo.infrastructure.exactlin import IMAG, ZERO, Matrix, Scalar, Subspace, Vector
from ncgeo.infrastructure.memo import shared_cache

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Derivation:
    """A linear map u with u(ab) = u(a)b + a u(b); column j of ``action`` is u(e_j)."""

    algebra: FiniteAlgebra
    action: Matrix

    def __call__(self, a: AlgebraElement) -> AlgebraElement:
        if a.algebra is not self.algebra:
            raise AlgebraMismatchError("derivation applied to an element of another algebra")
        return AlgebraElement(self.algebra, el.apply(self.action, a.coeffs))

    def _same(self, other: "Derivation") -> None:
        if other.algebra is not self.algebra:
            raise AlgebraMismatchError("derivations of different algebras")

    def __add__(self, other: "Derivation") -> "Derivation":
        self._same(other)
        return Derivation(self.algebra, el.add(self.action, other.action))

    def __sub__(self, other: "Derivation") -> "Derivation":
        self._same(other)
        return Derivation(self.algebra, el.sub(self.action, other.action))

    def scaled(self, c) -> "Derivation":
        return Derivation(self.algebra, el.scale(el.scalar(c), self.action))

    def times_central(self, z: AlgebraElement) -> "Derivation":
        """The derivation a ↦ z·u(a) for central z."""
        return Derivation(self.algebra, el.matmul(self.algebra.left_matrix(z), self.action))

    def vector(self) -> Vector:
        """Row-major flattening: entry (k, t) at k*m + t."""
        m = self.algebra.dim
        out = [ZERO] * (m * m)
        for (k, t), value in self.action.to_dok().items():
            out[k * m + t] = value
        return tuple(out)

    @classmethod
    def from_vector(cls, algebra: FiniteAlgebra, v: Vector) -> "Derivation":
        m = algebra.dim
        entries = {divmod(idx, m): value for idx, value in enumerate(v) if value}
        return cls(algebra, el.from_entries(entries, m, m))

    def is_zero(self) -> bool:
        return el.is_zero(self.action)

    def leibniz_violation(self) -> tuple[int, int] | None:
        A = self.algebra
        for i in range(A.dim):
            ei = A.basis_element(i)
            for j in range(A.dim):
                ej = A.basis_element(j)
                if self(ei * ej) != self(ei) * ej + ei * self(ej):
                    return i, j
        return None

    def __eq__(self, other) -> bool:
        if not isinstance(other, Derivation):
            return NotImplemented
        return other.algebra is self.algebra and el.equal(self.action, other.action)

    def __hash__(self) -> int:
        return hash((id(self.algebra), self.vector()))


def zero_derivation(A: FiniteAlgebra) -> Derivation:
    return Derivation(A, el.zeros(A.dim, A.dim))


def lie_bracket(u: Derivation, v: Derivation) -> Derivation:
    u._same(v)
    return Derivation(
        u.algebra, el.sub(el.matmul(u.action, v.action), el.matmul(v.action, u.action))
    )


def inner_derivation(b: AlgebraElement) -> Derivation:
    """ad b: a ↦ ba − ab."""
    A = b.algebra
    return Derivation(A, el.sub(A.left_matrix(b), A.right_matrix(b)))


def derivation_involution(u: Derivation) -> Derivation:
    """u*(a) = (u(a*))*."""
    A = u.algebra
    if A.involution is None:
        raise NoInvolutionError(f"algebra {A.label} has no involution")
    S = A.involution
    return Derivation(A, el.matmul(S, el.conjugate(u.action), el.conjugate(S)))


def _leibniz_system(A: FiniteAlgebra) -> Matrix:
    # unknown U[k][t] (coefficient of e_k in u(e_t)) sits at column k*m + t;
    # equation (i, j, k) is the e_k coefficient of u(e_i e_j) − u(e_i)e_j − e_i u(e_j)
    m = A.dim
    entries: dict[tuple[int, int], Scalar] = defaultdict(lambda: ZERO)
    for i in range(m):
        for j in range(m):
            base = (i * m + j) * m
            for t, c in A.table[i][j].items():
                for k in range(m):
                    entries[(base + k, k * m + t)] += c
            for t in range(m):
                for k, c in A.table[t][j].items():
                    entries[(base + k, t * m + i)] -= c
                for k, c in A.table[i][t].items():
                    entries[(base + k, t * m + j)] -= c
    return el.from_entries(entries, m * m * m, m * m)


@shared_cache
def derivation_subspace(A: FiniteAlgebra) -> Subspace:
    space = el.kernel(_leibniz_system(A))
    logger.debug("Derivations of %s: dimension %d", A.label, space.dim)
    return space


def derivation_basis(A: FiniteAlgebra) -> list[Derivation]:
    return [Derivation.from_vector(A, v) for v in derivation_subspace(A).vectors()]


def is_derivation(u: Derivation) -> bool:
    return derivation_subspace(u.algebra).contains(u.vector())


@dataclass(frozen=True)
class SuBasis:
    algebra: FiniteAlgebra
    elements: tuple[AlgebraElement, ...]
    names: tuple[str, ...]
    # structure[r][q] = {s: c^s_rq} with [ε_r, ε_q] = Σ_s c^s_rq ε_s
    structure: tuple[tuple[dict[int, Scalar], ...], ...]

    def constant(self, s: int, r: int, q: int) -> Scalar:
        return self.structure[r][q].get(s, ZERO)

    @property
    def size(self) -> int:
        return len(self.elements)


@shared_cache
def su_basis(n: int) -> SuBasis:
    """F_jk = E_jk − E_kj, G_jk = i(E_jk + E_kj), H_l = i(E_ll − E_{l+1,l+1})."""
    if n < 2:
        raise ValueError("su basis needs n >= 2")
    A = matrix_algebra(n)

    def E(j: int, k: int) -> AlgebraElement:
        return A.basis_element(j * n + k)

    elements: list[AlgebraElement] = []
    names: list[str] = []
    pairs = [(j, k) for j in range(n) for k in range(j + 1, n)]
    for j, k in pairs:
        elements.append(E(j, k) - E(k, j))
        names.append(f"F{j + 1}{k + 1}")
    for j, k in pairs:
        elements.append((E(j, k) + E(k, j)) * IMAG)
        names.append(f"G{j + 1}{k + 1}")
    for t in range(n - 1):
        elements.append((E(t, t) - E(t + 1, t + 1)) * IMAG)
        names.append(f"H{t + 1}")

    columns = el.from_columns([e.coeffs for e in elements], A.dim)
    structure = []
    for r, er in enumerate(elements):
        row = []
        for q, eq in enumerate(elements):
            coords = el.solve(columns, er.commutator(eq).coeffs)
            if coords is None:
                raise ArithmeticError(f"[{names[r]}, {names[q]}] left the su({n}) span")
            row.append({s: c for s, c in enumerate(coords) if c})
        structure.append(tuple(row))
    return SuBasis(A, tuple(elements), tuple(names), tuple(structure))


def unit_scalar(a: AlgebraElement) -> Scalar | None:
    """λ with a = λ·1, or ``None`` when a is not a multiple of the unit."""
    A = a.algebra
    pivot = el.first_nonzero(A.unit)
    lam = a.coeffs[pivot] / A.unit[pivot]
    return lam if el.scale_vector(lam, A.unit) == a.coeffs else None

