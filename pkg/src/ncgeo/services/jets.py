"""Jet modules of modules over commutative algebras, the differentials module O¹
and linear differential operators.

The ambient space of J^k(P) is A⊗P with coordinates (i, v) → i*dim P + v. On it
act the left structure b·(a⊗p) = ba⊗p, the ⋆-structure b⋆(a⊗p) = a⊗bp and their
difference δ^b. J^k(P) is the quotient of A⊗P by μ^{k+1}, the left submodule
generated by δ^{b_0}∘…∘δ^{b_k}(1⊗p).
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations_with_replacement, product

from ncgeo.infrastructure import exactlin as el
from ncgeo.infrastructure.algebras import AlgebraElement, FiniteAlgebra
from ncgeo.infrastructure.exactlin import Matrix, QuotientMap, Subspace, Vector
from ncgeo.infrastructure.memo import shared_cache
from ncgeo.infrastructure.modules import (
    FiniteModule,
    ModuleKind,
    TensorModule,
    algebra_as_module,
    hom_space,
    tensor_modules,
)

logger = logging.getLogger(__name__)


class NonCommutativeAlgebraError(Exception):
    pass


class NotADifferentialOperatorError(Exception):
    pass


def _require_commutative(A: FiniteAlgebra) -> None:
    if not A.is_commutative:
        raise NonCommutativeAlgebraError(
            f"jets are defined for commutative algebras only; {A.label} is not commutative"
        )


def ambient_left(A: FiniteAlgebra, P: FiniteModule, b: AlgebraElement) -> Matrix:
    return el.kron(A.left_matrix(b), el.identity(P.dim))


def ambient_star(A: FiniteAlgebra, P: FiniteModule, b: AlgebraElement) -> Matrix:
    return el.kron(el.identity(A.dim), P.left_matrix(b))


def ambient_delta(A: FiniteAlgebra, P: FiniteModule, b: AlgebraElement) -> Matrix:
    return el.sub(ambient_left(A, P, b), ambient_star(A, P, b))


def mu_submodule(A: FiniteAlgebra, P: FiniteModule, k: int) -> Subspace:
    """μ^{k+1} ⊂ A⊗P.

    δ^b commutes with the left structure, so the left closure of the generators
    δ^{b_0}⋯δ^{b_k}(1⊗p) is the image of δ^{b_0}⋯δ^{b_k}; δ^b is linear in b, so
    basis tuples suffice, and the δ^b commute, so multisets suffice.
    """
    n = A.dim * P.dim
    deltas = [ambient_delta(A, P, b) for b in A.basis()]
    blocks = []
    for tuple_ in combinations_with_replacement(range(A.dim), k + 1):
        D = deltas[tuple_[0]]
        for b in tuple_[1:]:
            D = el.matmul(D, deltas[b])
        blocks.append(D)
    return el.image(el.hstack(blocks, n))


@dataclass(frozen=True, eq=False)
class JetModule:
    algebra: FiniteAlgebra
    base_module: FiniteModule
    order: int
    mu: Subspace
    quotient: QuotientMap
    left_action: tuple[Matrix, ...]
    star_action: tuple[Matrix, ...]

    @property
    def dim(self) -> int:
        return self.quotient.dim

    @property
    def ambient_dim(self) -> int:
        return self.quotient.ambient_dim

    def project(self, v: Vector) -> Vector:
        return self.quotient.project(v)

    def ambient(self, a: Vector, p: Vector) -> Vector:
        return el.kron_vectors(a, p)

    def left_matrix(self, a: AlgebraElement) -> Matrix:
        return el.linear_combination(a.coeffs, self.left_action, self.dim, self.dim)

    def star_matrix(self, a: AlgebraElement) -> Matrix:
        return el.linear_combination(a.coeffs, self.star_action, self.dim, self.dim)

    @cached_property
    def jet_matrix(self) -> Matrix:
        """J^k: P → J^k(P), p ↦ class of 1⊗p."""
        A, P = self.algebra, self.base_module
        cols = [self.project(self.ambient(A.unit, P.basis_vector(v))) for v in range(P.dim)]
        return el.from_columns(cols, self.dim)

    def jet(self, p: Vector) -> Vector:
        return el.apply(self.jet_matrix, p)

    @cached_property
    def to_base(self) -> Matrix:
        """π^k_0: class of a⊗p ↦ ap."""
        A, P = self.algebra, self.base_module
        cols = []
        for i in range(A.dim):
            L = P.left_matrix(A.basis_element(i))
            for v in range(P.dim):
                cols.append(el.column(L, v))
        mult = el.from_columns(cols, P.dim)
        return self.quotient.induce(mult, el.identity_quotient(P.dim))

    def as_module(self) -> FiniteModule:
        """J^k(P) as a bimodule: left structure on the left, ⋆-structure on the right."""
        return FiniteModule(
            self.algebra,
            ModuleKind.BIMODULE,
            self.dim,
            self.left_action,
            self.star_action,
            label=f"J{self.order}({self.base_module.label})",
        )


@shared_cache
def jet_module(A: FiniteAlgebra, P: FiniteModule, k: int) -> JetModule:
    _require_commutative(A)
    if k < 0:
        raise ValueError("jet order must be non-negative")
    mu = mu_submodule(A, P, k)
    quotient = el.quotient(A.dim * P.dim, mu)
    left = tuple(quotient.induce(ambient_left(A, P, b)) for b in A.basis())
    star = tuple(quotient.induce(ambient_star(A, P, b)) for b in A.basis())
    logger.info("J^%d(%s) over %s has dimension %d", k, P.label, A.label, quotient.dim)
    return JetModule(A, P, k, mu, quotient, left, star)


def jet_projection(high: JetModule, low: JetModule) -> Matrix:
    """π^k_s: J^k(P) → J^s(P) for s ≤ k."""
    if high.base_module is not low.base_module or low.order > high.order:
        raise ValueError("jet projection needs the same module and a lower order")
    return high.quotient.induce(el.identity(high.ambient_dim), low.quotient)


# --- the differentials module -------------------------------------------------


@dataclass(frozen=True, eq=False)
class DifferentialsModule:
    """O¹ = (ker μ) mod μ² inside J¹(A)."""

    jet: JetModule
    inclusion: Subspace
    module: FiniteModule

    @property
    def algebra(self) -> FiniteAlgebra:
        return self.jet.algebra

    @property
    def dim(self) -> int:
        return self.module.dim

    def from_jet(self, j: Vector) -> Vector:
        return self.inclusion.coordinates(j)

    def to_jet(self, w: Vector) -> Vector:
        return self.inclusion.from_coordinates(w)

    def d1(self, a: AlgebraElement) -> Vector:
        """d¹a = class of 1⊗a − a⊗1."""
        A = self.algebra
        one_a = el.kron_vectors(A.unit, a.coeffs)
        ambient = el.sub_vectors(one_a, el.kron_vectors(a.coeffs, A.unit))
        return self.from_jet(self.jet.project(ambient))

    @cached_property
    def d1_matrix(self) -> Matrix:
        return el.from_columns([self.d1(a) for a in self.algebra.basis()], self.dim)


@shared_cache
def o1_module(A: FiniteAlgebra) -> DifferentialsModule:
    _require_commutative(A)
    J = jet_module(A, algebra_as_module(A, ModuleKind.LEFT), 1)
    kernel = el.kernel(A.multiplication_matrix)
    inclusion = Subspace.span([J.project(v) for v in kernel.vectors()], J.dim)
    left = tuple(el.restrict(L, inclusion) for L in J.left_action)
    right = tuple(el.restrict(S, inclusion) for S in J.star_action)
    module = FiniteModule(
        A, ModuleKind.BIMODULE, inclusion.dim, left, right, label=f"O1({A.label})"
    )
    logger.info("O1 over %s has dimension %d", A.label, inclusion.dim)
    return DifferentialsModule(J, inclusion, module)


def d1(a: AlgebraElement) -> Vector:
    return o1_module(a.algebra).d1(a)


@dataclass(frozen=True)
class Jet1Splitting:
    jet: JetModule
    o1: DifferentialsModule
    injection: Matrix

    def decompose(self, j: Vector) -> tuple[Vector, Vector]:
        """j ↦ (π¹₀ j, O¹-coordinates of j − i₁π¹₀ j)."""
        a = el.apply(self.jet.to_base, j)
        rest = el.sub_vectors(j, el.apply(self.injection, a))
        return a, self.o1.from_jet(rest)

    def reassemble(self, a: Vector, w: Vector) -> Vector:
        return el.add_vectors(el.apply(self.injection, a), self.o1.to_jet(w))


def jet1_splitting(A: FiniteAlgebra) -> Jet1Splitting:
    o1 = o1_module(A)
    J = o1.jet
    injection = el.from_columns(
        [J.project(el.kron_vectors(A.basis_element(i).coeffs, A.unit)) for i in range(A.dim)],
        J.dim,
    )
    return Jet1Splitting(J, o1, injection)


# --- J¹(P) ≅ J¹ ⊗ P -------------------------------------------------------------


@dataclass(frozen=True)
class JetTensorIsomorphism:
    jet: JetModule
    tensor: TensorModule
    forward: Matrix
    backward: Matrix


def jet1_of_module_iso(A: FiniteAlgebra, P: FiniteModule) -> JetTensorIsomorphism:
    """(a⊗bp) mod μ² ↦ [a⊗b mod μ²]⊗p, realised as an invertible matrix."""
    _require_commutative(A)
    if P.free_rank is None:
        raise ValueError("the jet/tensor isomorphism is built for free modules")
    J1P = jet_module(A, P, 1)
    J1A = jet_module(A, algebra_as_module(A, ModuleKind.LEFT), 1)
    T = tensor_modules(J1A.as_module(), P)
    cols = []
    for i in range(A.dim):
        jet_class = J1A.project(el.kron_vectors(A.basis_element(i).coeffs, A.unit))
        for v in range(P.dim):
            cols.append(T.element(jet_class, P.basis_vector(v)))
    ambient_map = el.from_columns(cols, T.dim)
    forward = J1P.quotient.induce(ambient_map, el.identity_quotient(T.dim))
    if forward.shape[0] != forward.shape[1] or el.rank(forward) != forward.shape[0]:
        raise ArithmeticError("jet/tensor comparison map is not invertible")
    return JetTensorIsomorphism(J1P, T, forward, el.inverse(forward))


# --- differential operators -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DiffOperator:
    source: FiniteModule
    target: FiniteModule
    map: Matrix

    def delta(self, a: AlgebraElement, phi: Matrix) -> Matrix:
        """δ_a φ = a·φ − φ∘a."""
        return el.sub(
            el.matmul(self.target.left_matrix(a), phi), el.matmul(phi, self.source.left_matrix(a))
        )


@dataclass(frozen=True)
class DiffOpCheck:
    ok: bool
    witness: tuple[int, ...] | None = None


def _tuples(A: FiniteAlgebra, length: int):
    if A.is_commutative:
        return combinations_with_replacement(range(A.dim), length)
    return product(range(A.dim), repeat=length)


def is_diffop(op: DiffOperator, s: int) -> DiffOpCheck:
    """Order ≤ s iff every (s+1)-fold δ_{e_{i_0}}⋯δ_{e_{i_s}} of the map vanishes."""
    A = op.source.algebra
    basis = A.basis()
    for tuple_ in _tuples(A, s + 1):
        phi = op.map
        for i in reversed(tuple_):
            phi = op.delta(basis[i], phi)
        if not el.is_zero(phi):
            return DiffOpCheck(False, tuple_)
    return DiffOpCheck(True)


def _ambient_hom(op: DiffOperator) -> Matrix:
    """h(e_i⊗p) = e_i·Δ(p) on A⊗P."""
    A, P, Q = op.source.algebra, op.source, op.target
    cols = []
    for i in range(A.dim):
        L = Q.left_matrix(A.basis_element(i))
        image_ = el.matmul(L, op.map)
        for v in range(P.dim):
            cols.append(el.column(image_, v))
    return el.from_columns(cols, Q.dim)


def diffop_to_hom(op: DiffOperator, s: int) -> Matrix:
    """The left-module map f: J^s(P) → Q with f∘J^s = Δ."""
    A = op.source.algebra
    J = jet_module(A, op.source, s)
    h = _ambient_hom(op)
    for index, generator in enumerate(J.mu.vectors()):
        if not el.is_zero_vector(el.apply(h, generator)):
            raise NotADifferentialOperatorError(
                f"operator does not vanish on generator {index} of μ^{s + 1}; order exceeds {s}"
            )
    return el.matmul(h, J.quotient.section)


def hom_to_diffop(f: Matrix, J: JetModule, target: FiniteModule) -> DiffOperator:
    return DiffOperator(J.base_module, target, el.matmul(f, J.jet_matrix))


def diff_operator_space(P: FiniteModule, Q: FiniteModule, s: int) -> Subspace:
    """Diff_s(P, Q) as a subspace of vec(q×p matrices)."""
    A = P.algebra
    q, p = Q.dim, P.dim
    basis = A.basis()
    deltas = []
    for a in basis:
        left = el.kron(Q.left_matrix(a), el.identity(p))
        right = el.kron(el.identity(q), el.transpose(P.left_matrix(a)))
        deltas.append(el.sub(left, right))
    blocks = []
    for tuple_ in _tuples(A, s + 1):
        D = deltas[tuple_[0]]
        for i in tuple_[1:]:
            D = el.matmul(D, deltas[i])
        blocks.append(D)
    return el.kernel(el.vstack(blocks, q * p))


def jet_hom_space(J: JetModule, Q: FiniteModule) -> Subspace:
    """Hom_A(J^s(P), Q) for the left structure."""
    A = J.algebra
    pairs = [(Q.left_matrix(a), J.left_matrix(a)) for a in A.basis()]
    return hom_space(pairs, Q.dim, J.dim)


def derivation_operator(u_action: Matrix, P: FiniteModule) -> DiffOperator:
    """A derivation applied componentwise to a free module."""
    rank = P.free_rank if P.free_rank is not None else 1
    return DiffOperator(P, P, el.block_diag(*([u_action] * rank)))
