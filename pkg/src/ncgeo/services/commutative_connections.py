"""Connections on modules over commutative algebras.

A connection on a left module P is either a splitting Γ: P → J¹(P) of the exact
sequence 0 → O¹⊗P → J¹(P) → P → 0 or a Leibniz operator ∇: P → O¹⊗P. The two
are related by ∇ = J¹ − Γ through the embedding ψ(w⊗p) = x⊗yp, where w is the
class of x⊗y in J¹(A).
"""

import logging
import random
from dataclasses import dataclass
from functools import cached_property

from ncgeo.config import settings
from ncgeo.infrastructure import exactlin as el
from ncgeo.infrastructure.algebras import AlgebraElement, FiniteAlgebra
from ncgeo.infrastructure.derivations import Derivation, derivation_basis, derivation_subspace
from ncgeo.infrastructure.exactlin import ZERO, Matrix, Subspace, Vector
from ncgeo.infrastructure.memo import shared_cache
from ncgeo.infrastructure.modules import (
    FiniteModule,
    ProjectiveModule,
    TensorModule,
    hom_space,
    idempotent_operator,
    matrix_to_vector,
    tensor_modules,
    vector_to_matrix,
)
from ncgeo.services.jets import (
    DifferentialsModule,
    JetModule,
    NonCommutativeAlgebraError,
    jet_module,
    o1_module,
)

logger = logging.getLogger(__name__)


class NotASplittingError(Exception):
    pass


class ConnectionLeibnizError(Exception):
    pass


class DualityError(Exception):
    pass


class RingConnectionError(Exception):
    pass


# --- the exact sequence ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class JetSequence:
    """0 → O¹⊗P → J¹(P) → P → 0 for a left module P."""

    module: FiniteModule
    o1: DifferentialsModule
    jet: JetModule
    tensor: TensorModule
    embedding: Matrix

    @property
    def algebra(self) -> FiniteAlgebra:
        return self.module.algebra

    def tensor_element(self, w: Vector, p: Vector) -> Vector:
        return self.tensor.element(w, p)

    def pull_back(self, j: Vector) -> Vector:
        """Preimage of j ∈ ker π¹₀ under ψ."""
        x = el.solve(self.embedding, j)
        if x is None:
            raise el.NotInSubspaceError("jet is not in the image of O¹⊗P")
        return x

    def is_exact(self) -> bool:
        injective = el.rank(self.embedding) == self.tensor.dim
        composite = el.matmul(self.jet.to_base, self.embedding)
        surjective = el.rank(self.jet.to_base) == self.module.dim
        middle = self.tensor.dim + self.module.dim == self.jet.dim
        return injective and surjective and middle and el.is_zero(composite)


def _ambient_embedding(o1: DifferentialsModule, J: JetModule, P: FiniteModule) -> Matrix:
    """ψ on the plain tensor O¹ ⊗_K P, columns indexed (w, v) → w*dim P + v."""
    A = o1.algebra
    m = A.dim
    lift = o1.jet.quotient
    cols = []
    for w in range(o1.dim):
        ambient = lift.lift(o1.to_jet(el.unit_vector(o1.dim, w)))
        terms = [(divmod(idx, m), c) for idx, c in enumerate(ambient) if c]
        for v in range(P.dim):
            pv = P.basis_vector(v)
            out = el.zero_vector(m * P.dim)
            for (x, y), c in terms:
                ypv = P.act_left(A.basis_element(y), pv)
                out = el.add_vectors(
                    out, el.scale_vector(c, el.kron_vectors(el.unit_vector(m, x), ypv))
                )
            cols.append(J.project(out))
    return el.from_columns(cols, J.dim)


@shared_cache
def jet_sequence(P: FiniteModule) -> JetSequence:
    A = P.algebra
    if not A.is_commutative:
        raise NonCommutativeAlgebraError(f"{A.label} is not commutative")
    o1 = o1_module(A)
    J = jet_module(A, P, 1)
    T = tensor_modules(o1.module, P)
    embedding = T.quotient.induce(_ambient_embedding(o1, J, P), el.identity_quotient(J.dim))
    logger.debug("O1⊗%s has dimension %d inside J1 of dimension %d", P.label, T.dim, J.dim)
    return JetSequence(P, o1, J, T, embedding)


def o1_tensor_module(P: FiniteModule) -> TensorModule:
    return jet_sequence(P).tensor


# --- splittings and connections --------------------------------------------------


@dataclass(frozen=True)
class LeibnizCheck:
    ok: bool
    witness: dict | None = None


@dataclass(frozen=True, eq=False)
class CommutativeConnection:
    sequence: JetSequence
    covariant: Matrix
    splitting: Matrix | None = None

    @property
    def module(self) -> FiniteModule:
        return self.sequence.module

    def __call__(self, p: Vector) -> Vector:
        return el.apply(self.covariant, p)


def splitting_check(seq: JetSequence, gamma: Matrix) -> LeibnizCheck:
    """Γ is a left-module morphism with π¹₀∘Γ = id."""
    P, J = seq.module, seq.jet
    if not el.equal(el.matmul(J.to_base, gamma), el.identity(P.dim)):
        return LeibnizCheck(False, {"condition": "projection"})
    for i, a in enumerate(seq.algebra.basis()):
        lhs = el.matmul(gamma, P.left_matrix(a))
        rhs = el.matmul(J.left_matrix(a), gamma)
        if not el.equal(lhs, rhs):
            return LeibnizCheck(False, {"condition": "left linearity", "a": i})
    return LeibnizCheck(True)


def leibniz_check(seq: JetSequence, nabla: Matrix) -> LeibnizCheck:
    """∇(ap) = d¹a⊗p + a∇(p) on basis pairs."""
    A, P, T = seq.algebra, seq.module, seq.tensor
    for i, a in enumerate(A.basis()):
        da = seq.o1.d1(a)
        La = T.left_matrix(a)
        for v in range(P.dim):
            pv = P.basis_vector(v)
            lhs = el.apply(nabla, P.act_left(a, pv))
            rhs = el.add_vectors(seq.tensor_element(da, pv), el.apply(La, el.apply(nabla, pv)))
            if lhs != rhs:
                return LeibnizCheck(False, {"a": i, "p": v})
    return LeibnizCheck(True)


def connection_from_splitting(seq: JetSequence, gamma: Matrix) -> CommutativeConnection:
    """∇^Γ = ψ⁻¹∘(J¹ − Γ)."""
    check = splitting_check(seq, gamma)
    if not check.ok:
        raise NotASplittingError(f"not a splitting of the jet sequence: {check.witness}")
    difference = el.sub(seq.jet.jet_matrix, gamma)
    cols = [seq.pull_back(c) for c in el.columns(difference)]
    nabla = el.from_columns(cols, seq.tensor.dim)
    return CommutativeConnection(seq, nabla, gamma)


def splitting_from_connection(seq: JetSequence, nabla: Matrix) -> CommutativeConnection:
    """Γ = J¹ − ψ∘∇."""
    check = leibniz_check(seq, nabla)
    if not check.ok:
        raise ConnectionLeibnizError(f"Leibniz rule fails at {check.witness}")
    gamma = el.sub(seq.jet.jet_matrix, el.matmul(seq.embedding, nabla))
    return CommutativeConnection(seq, nabla, gamma)


def _generator(A: FiniteAlgebra, rank: int, v: int) -> Vector:
    """f_v ∈ A^rank: the unit in component v."""
    m = A.dim
    return tuple(A.unit[i - v * m] if v * m <= i < (v + 1) * m else ZERO for i in range(rank * m))


def canonical_splitting(seq: JetSequence) -> Matrix:
    """Γ(a f_v) = a⊗f_v on a free module with generators f_v."""
    P, J = seq.module, seq.jet
    A = seq.algebra
    m = A.dim
    rank = P.free_rank
    if rank is None or P.dim != rank * m:
        raise ValueError("the canonical splitting is defined for free modules")
    cols = []
    for v in range(rank):
        generator = _generator(A, rank, v)
        for i in range(m):
            cols.append(J.project(el.kron_vectors(el.unit_vector(m, i), generator)))
    return el.from_columns(cols, J.dim)


def grassmann_splitting(seq: JetSequence) -> Matrix:
    """Γ(s) = Σ_v s_v ⊗ f_v·p for a left module P = A^N·p."""
    P = seq.module
    if not isinstance(P, ProjectiveModule):
        raise ValueError("the Grassmann splitting needs a module given by an idempotent")
    A, J = seq.algebra, seq.jet
    m = A.dim
    op = idempotent_operator(P.idempotent, P.kind)
    projected = [P.coordinates(el.apply(op, _generator(A, P.rank, v))) for v in range(P.rank)]
    cols = []
    for b in range(P.dim):
        s = P.ambient(el.unit_vector(P.dim, b))
        total = el.zero_vector(J.ambient_dim)
        for v, fvp in enumerate(projected):
            for i in range(m):
                c = s[v * m + i]
                if c:
                    term = el.kron_vectors(el.unit_vector(m, i), fvp)
                    total = el.add_vectors(total, el.scale_vector(c, term))
        cols.append(J.project(total))
    return el.from_columns(cols, J.dim)


def hom_o1p_space(seq: JetSequence) -> Subspace:
    """Hom_A(P, O¹⊗P) as a subspace of vec(dim O¹⊗P × dim P)."""
    P, T = seq.module, seq.tensor
    pairs = [(T.left_matrix(a), P.left_matrix(a)) for a in seq.algebra.basis()]
    return hom_space(pairs, T.dim, P.dim)


def hom_o1p_basis(seq: JetSequence) -> list[Matrix]:
    rows, cols = seq.tensor.dim, seq.module.dim
    return [vector_to_matrix(v, rows, cols) for v in hom_o1p_space(seq).vectors()]


def random_connection(
    seq: JetSequence, rng: random.Random, spread: int = 3
) -> CommutativeConnection:
    """Canonical connection plus a random integer combination of Hom_A(P, O¹⊗P)."""
    if isinstance(seq.module, ProjectiveModule):
        base = connection_from_splitting(seq, grassmann_splitting(seq))
    else:
        base = connection_from_splitting(seq, canonical_splitting(seq))
    basis = hom_o1p_basis(seq)
    coeffs = [el.scalar(rng.randint(-spread, spread)) for _ in basis]
    shift = el.linear_combination(coeffs, basis, seq.tensor.dim, seq.module.dim)
    return CommutativeConnection(seq, el.add(base.covariant, shift))


def sample_connections(seq: JetSequence, label: str, count: int | None = None):
    rng = random.Random(f"{settings.seed}:{label}")
    count = settings.connection_samples if count is None else count
    for _ in range(count):
        yield random_connection(seq, rng)


# --- derivation laws -------------------------------------------------------------


@dataclass(frozen=True)
class DualityReport:
    """Natural map Der(A) → Hom_A(O¹, A), τ ↦ (d¹a ↦ τ(a))."""

    derivations_dim: int
    hom_dim: int
    rank: int

    @property
    def bijective(self) -> bool:
        return self.derivations_dim == self.hom_dim == self.rank


def _solve_left(W: Matrix, V: Matrix) -> Matrix | None:
    """X with X·W = V, or ``None``."""
    Wt = el.transpose(W)
    rows = []
    for row in el.to_rows(V):
        x = el.solve(Wt, row)
        if x is None:
            return None
        rows.append(x)
    return el.from_rows(rows, W.shape[0])


def pairing_matrix(o1: DifferentialsModule, tau: Derivation) -> Matrix:
    """h_τ: O¹ → A, the A-linear map with h_τ(a·d¹b) = a·τ(b)."""
    A = o1.algebra
    spans, values = [], []
    for a in A.basis():
        La = o1.module.left_matrix(a)
        for b in A.basis():
            spans.append(el.apply(La, o1.d1(b)))
            values.append((a * tau(b)).coeffs)
    W = el.from_columns(spans, o1.dim)
    V = el.from_columns(values, A.dim)
    h = _solve_left(W, V)
    if h is None:
        raise DualityError(f"derivation does not factor through O1 over {A.label}")
    return h


def o1_duality(A: FiniteAlgebra) -> DualityReport:
    o1 = o1_module(A)
    pairs = [(A.left_matrix(a), o1.module.left_matrix(a)) for a in A.basis()]
    hom = hom_space(pairs, A.dim, o1.dim)
    images = []
    for tau in derivation_basis(A):
        images.append(hom.coordinates(matrix_to_vector(pairing_matrix(o1, tau))))
    rank = el.rank(el.from_rows(images, hom.dim)) if images else 0
    return DualityReport(derivation_subspace(A).dim, hom.dim, rank)


@dataclass(frozen=True, eq=False)
class DerivationLaw:
    connection: CommutativeConnection
    derivations: tuple[Derivation, ...]
    operators: tuple[Matrix, ...]

    def rule_violation(self) -> dict | None:
        """∇_τ(fs) = τ(f)s + f∇_τ(s) on basis f, s and every τ."""
        P = self.connection.module
        A = P.algebra
        for t, (tau, op) in enumerate(zip(self.derivations, self.operators)):
            for i, f in enumerate(A.basis()):
                Lf = P.left_matrix(f)
                lhs = el.matmul(op, Lf)
                rhs = el.add(P.left_matrix(tau(f)), el.matmul(Lf, op))
                if not el.equal(lhs, rhs):
                    return {"tau": t, "f": i}
        return None

    def operator_for(self, tau: Derivation) -> Matrix:
        return _law_operator(self.connection, tau)


def _law_operator(connection: CommutativeConnection, tau: Derivation) -> Matrix:
    seq = connection.sequence
    P, T, o1 = seq.module, seq.tensor, seq.o1
    h = pairing_matrix(o1, tau)
    cols = []
    for w in range(o1.dim):
        value = AlgebraElement(P.algebra, el.column(h, w))
        Lw = P.left_matrix(value)
        for v in range(P.dim):
            cols.append(el.column(Lw, v))
    contraction = T.quotient.induce(el.from_columns(cols, P.dim), el.identity_quotient(P.dim))
    return el.matmul(contraction, connection.covariant)


def connection_as_derivation_law(connection: CommutativeConnection) -> DerivationLaw:
    A = connection.module.algebra
    report = o1_duality(A)
    if not report.bijective:
        raise DualityError(
            f"Der({A.label}) → Hom(O1, {A.label}) is not bijective: "
            f"{report.derivations_dim} vs {report.hom_dim} (rank {report.rank})"
        )
    derivations = tuple(derivation_basis(A))
    operators = tuple(_law_operator(connection, tau) for tau in derivations)
    return DerivationLaw(connection, derivations, operators)


# --- connections on commutative rings ---------------------------------------------


@dataclass(frozen=True, eq=False)
class RingConnection:
    """τ ↦ ∇_τ ∈ Der(S) for the derivations τ of a unital subalgebra A ⊂ S."""

    ring: FiniteAlgebra
    base: FiniteAlgebra
    inclusion: Matrix
    derivations: tuple[Derivation, ...]
    operators: tuple[Matrix, ...]

    @cached_property
    def derivation_space(self) -> Subspace:
        return derivation_subspace(self.ring)


def subalgebra_inclusion(S: FiniteAlgebra, A: FiniteAlgebra, images: list[Vector]) -> Matrix:
    """Columns ι(e_i); checked to be a unital algebra morphism."""
    iota = el.from_columns(images, S.dim)
    if el.apply(iota, A.unit) != S.unit:
        raise RingConnectionError("inclusion does not preserve the unit")
    if el.rank(iota) != A.dim:
        raise RingConnectionError("inclusion is not injective")
    for i in range(A.dim):
        for j in range(A.dim):
            lhs = el.apply(iota, A.multiply(el.unit_vector(A.dim, i), el.unit_vector(A.dim, j)))
            rhs = S.multiply(images[i], images[j])
            if lhs != rhs:
                raise RingConnectionError(f"inclusion is not multiplicative on ({i}, {j})")
    return iota


def extend_derivations(S: FiniteAlgebra, A: FiniteAlgebra, inclusion: Matrix) -> RingConnection:
    """For each basis τ of Der(A) pick some derivation of S with ∇_τ∘ι = ι∘τ."""
    if not S.is_commutative:
        raise NonCommutativeAlgebraError(f"{S.label} is not commutative")
    ring_derivations = derivation_basis(S)
    restricted = [matrix_to_vector(el.matmul(u.action, inclusion)) for u in ring_derivations]
    system = el.from_columns(restricted, S.dim * A.dim) if restricted else None
    operators = []
    taus = tuple(derivation_basis(A))
    for t, tau in enumerate(taus):
        target = matrix_to_vector(el.matmul(inclusion, tau.action))
        coeffs = el.solve(system, target) if system is not None else None
        if coeffs is None:
            raise RingConnectionError(f"derivation {t} of {A.label} does not extend to {S.label}")
        operators.append(
            el.linear_combination(coeffs, [u.action for u in ring_derivations], S.dim, S.dim)
        )
    return RingConnection(S, A, inclusion, taus, tuple(operators))


def ring_connection_check(connection: RingConnection) -> LeibnizCheck:
    """Each ∇_τ is a derivation of S with ∇_τ(fs) = τ(f)s + f∇_τ(s) for f ∈ A, s ∈ S."""
    S, A, iota = connection.ring, connection.base, connection.inclusion
    if len(connection.operators) != len(connection.derivations):
        return LeibnizCheck(False, {"condition": "one operator per derivation"})
    for t, (tau, op) in enumerate(zip(connection.derivations, connection.operators)):
        if not connection.derivation_space.contains(Derivation(S, op).vector()):
            return LeibnizCheck(False, {"condition": "derivation of the ring", "tau": t})
        for i in range(A.dim):
            f = el.apply(iota, el.unit_vector(A.dim, i))
            tf = el.apply(iota, el.column(tau.action, i))
            Lf, Ltf = S.left_matrix(f), S.left_matrix(tf)
            if not el.equal(el.matmul(op, Lf), el.add(Ltf, el.matmul(Lf, op))):
                return LeibnizCheck(False, {"condition": "Leibniz", "tau": t, "f": i})
    return LeibnizCheck(True)


def ring_difference_vanishes(first: RingConnection, second: RingConnection) -> bool:
    """∇_τ − ∇'_τ is a derivation of S vanishing on A for every τ."""
    for op1, op2 in zip(first.operators, second.operators):
        diff = el.sub(op1, op2)
        if not el.is_zero(el.matmul(diff, first.inclusion)):
            return False
        if not first.derivation_space.contains(Derivation(first.ring, diff).vector()):
            return False
    return True


def vertical_derivations(S: FiniteAlgebra, inclusion: Matrix) -> list[Derivation]:
    """Derivations of S vanishing on the image of the inclusion."""
    basis = derivation_basis(S)
    if not basis:
        return []
    restricted = [matrix_to_vector(el.matmul(u.action, inclusion)) for u in basis]
    system = el.from_columns(restricted, S.dim * inclusion.shape[1])
    kernel = el.kernel(system)
    out = []
    for coeffs in kernel.vectors():
        action = el.linear_combination(coeffs, [u.action for u in basis], S.dim, S.dim)
        out.append(Derivation(S, action))
    return out


def shifted_ring_connection(connection: RingConnection, shifts: list[Derivation]) -> RingConnection:
    ops = tuple(el.add(op, u.action) for op, u in zip(connection.operators, shifts))
    return RingConnection(
        connection.ring, connection.base, connection.inclusion, connection.derivations, ops
    )


def identity_ring_connection(A: FiniteAlgebra) -> RingConnection:
    taus = tuple(derivation_basis(A))
    return RingConnection(A, A, el.identity(A.dim), taus, tuple(t.action for t in taus))
