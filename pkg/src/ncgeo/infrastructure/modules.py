"""Finite modules over finite algebras: left, right, central bimodules and centre modules.

A module is given by explicit action matrices, one per algebra basis element on
each side where the whole algebra acts. On a side where only the centre acts the
action is the other side's action restricted to the centre (modules are central),
or, for a centre module, an explicit action per centre basis element.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

from ncgeo.infrastructure import exactlin as el
from ncgeo.infrastructure.algebras import (
    AlgebraElement,
    AlgebraMatrix,
    AlgebraMismatchError,
    FiniteAlgebra,
    centre_basis,
    centre_subspace,
    idempotent_check,
    square_size,
)
from ncgeo.infrastructure.exactlin import Matrix, QuotientMap, Subspace, Vector

logger = logging.getLogger(__name__)


class ModuleKindError(Exception):
    pass


class ModuleAxiomError(Exception):
    pass


class NotIdempotentError(Exception):
    pass


class ModuleKind(Enum):
    """Type pair (i, j): i = 1 when the algebra acts on the right, j = 1 on the left."""

    RIGHT = (1, 0)
    LEFT = (0, 1)
    BIMODULE = (1, 1)
    CENTRE = (0, 0)

    @property
    def right_full(self) -> bool:
        return self.value[0] == 1

    @property
    def left_full(self) -> bool:
        return self.value[1] == 1

    @classmethod
    def from_sides(cls, left_full: bool, right_full: bool) -> "ModuleKind":
        return cls((int(right_full), int(left_full)))

    def dual(self) -> "ModuleKind":
        return ModuleKind(((self.value[0] + 1) % 2, (self.value[1] + 1) % 2))


@dataclass(frozen=True, eq=False)
class FiniteModule:
    algebra: FiniteAlgebra
    kind: ModuleKind
    dim: int
    left_action: tuple[Matrix, ...] | None = None
    right_action: tuple[Matrix, ...] | None = None
    centre_action: tuple[Matrix, ...] | None = None
    label: str = ""
    involution: Matrix | None = None
    free_rank: int | None = None
    # False for operator bimodules such as Ω_D¹, where the centre acts differently on each side
    central: bool = True

    def __post_init__(self) -> None:
        kind = self.kind
        if kind.left_full != (self.left_action is not None):
            raise ModuleKindError(
                f"{kind.name} module with left action {self.left_action is not None}"
            )
        if kind.right_full != (self.right_action is not None):
            raise ModuleKindError(
                f"{kind.name} module with right action {self.right_action is not None}"
            )
        if kind is ModuleKind.CENTRE and self.centre_action is None:
            raise ModuleKindError("centre module without a centre action")

    def _centre_matrix(self, a: AlgebraElement) -> Matrix:
        space = centre_subspace(self.algebra)
        if not space.contains(a.coeffs):
            raise ModuleKindError(f"{a!r} is not central; only the centre acts on this side")
        coords = space.coordinates(a.coeffs)
        return el.linear_combination(coords, self.centre_action, self.dim, self.dim)

    def left_matrix(self, a: AlgebraElement) -> Matrix:
        if a.algebra is not self.algebra:
            raise AlgebraMismatchError("element of another algebra")
        if self.kind.left_full:
            return el.linear_combination(a.coeffs, self.left_action, self.dim, self.dim)
        if self.kind.right_full:
            if not centre_subspace(self.algebra).contains(a.coeffs):
                raise ModuleKindError(f"{a!r} is not central; only the centre acts on the left")
            return self.right_matrix(a)
        return self._centre_matrix(a)

    def right_matrix(self, a: AlgebraElement) -> Matrix:
        if a.algebra is not self.algebra:
            raise AlgebraMismatchError("element of another algebra")
        if self.kind.right_full:
            return el.linear_combination(a.coeffs, self.right_action, self.dim, self.dim)
        if self.kind.left_full:
            if not centre_subspace(self.algebra).contains(a.coeffs):
                raise ModuleKindError(f"{a!r} is not central; only the centre acts on the right")
            return self.left_matrix(a)
        return self._centre_matrix(a)

    def act_left(self, a: AlgebraElement, v: Vector) -> Vector:
        return el.apply(self.left_matrix(a), v)

    def act_right(self, v: Vector, a: AlgebraElement) -> Vector:
        return el.apply(self.right_matrix(a), v)

    def side_basis(self, left: bool) -> list[AlgebraElement]:
        """Algebra basis if the algebra acts on that side, centre basis otherwise."""
        full = self.kind.left_full if left else self.kind.right_full
        return self.algebra.basis() if full else centre_basis(self.algebra)

    def basis_vector(self, v: int) -> Vector:
        return el.unit_vector(self.dim, v)

    def as_kind(self, kind: ModuleKind) -> "FiniteModule":
        """Forget a side: view a bimodule as a left or right module."""
        left = self.left_action if kind.left_full else None
        right = self.right_action if kind.right_full else None
        if (kind.left_full and left is None) or (kind.right_full and right is None):
            raise ModuleKindError(f"cannot view a {self.kind.name} module as {kind.name}")
        centre = self.centre_action
        if kind is ModuleKind.CENTRE and centre is None:
            centre = tuple(self.left_matrix(z) for z in centre_basis(self.algebra))
        return FiniteModule(
            self.algebra, kind, self.dim, left, right, centre, self.label, self.involution,
            self.free_rank, self.central,
        )

    def is_endomorphism(self, f: Matrix) -> bool:
        """True iff f commutes with every action present."""
        for a in self.side_basis(left=True):
            L = self.left_matrix(a)
            if not el.equal(el.matmul(f, L), el.matmul(L, f)):
                return False
        for a in self.side_basis(left=False):
            R = self.right_matrix(a)
            if not el.equal(el.matmul(f, R), el.matmul(R, f)):
                return False
        return True

    def axiom_violation(self) -> dict | None:
        A = self.algebra
        identity = el.identity(self.dim)
        basis = A.basis()
        for left in (True, False):
            get = self.left_matrix if left else self.right_matrix
            side = "left" if left else "right"
            if not el.equal(get(A.one), identity):
                return {"axiom": f"{side} unit"}
            full = self.kind.left_full if left else self.kind.right_full
            if not full:
                continue
            for i, a in enumerate(basis):
                for j, b in enumerate(basis):
                    if left:
                        ok = el.equal(get(a * b), el.matmul(get(a), get(b)))
                    else:
                        ok = el.equal(get(a * b), el.matmul(get(b), get(a)))
                    if not ok:
                        return {"axiom": f"{side} associativity", "basis": (i, j)}
        for i, a in enumerate(self.side_basis(left=True)):
            for j, b in enumerate(self.side_basis(left=False)):
                L, R = self.left_matrix(a), self.right_matrix(b)
                if not el.equal(el.matmul(L, R), el.matmul(R, L)):
                    return {"axiom": "actions commute", "basis": (i, j)}
        return self.centrality_violation() if self.central else None

    def centrality_violation(self) -> dict | None:
        """First centre element acting differently on the two sides, if any."""
        for k, z in enumerate(centre_basis(self.algebra)):
            if not el.equal(self.left_matrix(z), self.right_matrix(z)):
                return {"axiom": "centrality", "centre_basis": k}
        return None

    def validate(self) -> "FiniteModule":
        violation = self.axiom_violation()
        if violation is not None:
            raise ModuleAxiomError(f"{self.label or 'module'}: {violation}")
        return self

    def __repr__(self) -> str:
        return f"FiniteModule({self.label or '?'}, {self.kind.name}, dim={self.dim})"


def _blocks(mats: Sequence[Matrix], rank: int) -> tuple[Matrix, ...]:
    return tuple(el.block_diag(*([m] * rank)) for m in mats)


def free_module(A: FiniteAlgebra, rank: int, kind: ModuleKind = ModuleKind.LEFT) -> FiniteModule:
    """A^rank with coordinates (v, i) → v*m + i, component v coefficient of e_i."""
    if rank < 0:
        raise ValueError("rank must be non-negative")
    left = _blocks(A.left_matrices, rank) if kind.left_full else None
    right = _blocks(A.right_matrices, rank) if kind.right_full else None
    centre = None
    if kind is ModuleKind.CENTRE:
        centre = _blocks([A.left_matrix(z) for z in centre_basis(A)], rank)
    involution = None
    if A.involution is not None:
        involution = el.block_diag(*([A.involution] * rank)) if rank else el.zeros(0, 0)
    return FiniteModule(
        A, kind, A.dim * rank, left, right, centre, f"{A.label}^{rank}", involution, rank
    )


def algebra_as_module(A: FiniteAlgebra, kind: ModuleKind = ModuleKind.BIMODULE) -> FiniteModule:
    return free_module(A, 1, kind)


def direct_sum_modules(P: FiniteModule, Q: FiniteModule) -> FiniteModule:
    if P.algebra is not Q.algebra:
        raise AlgebraMismatchError("direct sum of modules over different algebras")
    if P.kind is not Q.kind:
        raise ModuleKindError(f"direct sum of {P.kind.name} and {Q.kind.name} modules")

    def pair(x, y):
        if x is None:
            return None
        return tuple(el.block_diag(a, b) for a, b in zip(x, y))

    involution = None
    if P.involution is not None and Q.involution is not None:
        involution = el.block_diag(P.involution, Q.involution)
    return FiniteModule(
        P.algebra,
        P.kind,
        P.dim + Q.dim,
        pair(P.left_action, Q.left_action),
        pair(P.right_action, Q.right_action),
        pair(P.centre_action, Q.centre_action),
        f"{P.label}+{Q.label}",
        involution,
        central=P.central and Q.central,
    )


# --- duals --------------------------------------------------------------------


def _right_compose_rows(M: Matrix, rows: int, p: int) -> dict[tuple[int, int], el.Scalar]:
    """Constraint entries of X ↦ X·M on vec(X) (X is rows×p, row-major)."""
    _, q = M.shape
    entries: dict[tuple[int, int], el.Scalar] = {}
    for (v, w), value in M.to_dok().items():
        for k in range(rows):
            key = (k * q + w, k * p + v)
            entries[key] = entries.get(key, el.ZERO) + value
    return entries


def _left_compose_rows(N: Matrix, p: int) -> dict[tuple[int, int], el.Scalar]:
    """Constraint entries of X ↦ N·X on vec(X) (X has p columns, row-major)."""
    entries: dict[tuple[int, int], el.Scalar] = {}
    for (k, t), value in N.to_dok().items():
        for w in range(p):
            key = (k * p + w, t * p + w)
            entries[key] = entries.get(key, el.ZERO) + value
    return entries


def commutation_system(pairs: Sequence[tuple[Matrix, Matrix]], rows: int, cols: int) -> Matrix:
    """Stack the linear conditions N·X − X·M = 0 on a rows×cols matrix X, one per (N, M)."""
    blocks = []
    for N, M in pairs:
        entries = _left_compose_rows(N, cols)
        for key, value in _right_compose_rows(M, rows, cols).items():
            entries[key] = entries.get(key, el.ZERO) - value
        blocks.append(el.from_entries(entries, rows * M.shape[1], rows * cols))
    return el.vstack(blocks, rows * cols) if blocks else el.zeros(0, rows * cols)


def matrix_to_vector(X: Matrix) -> Vector:
    rows, cols = X.shape
    out = [el.ZERO] * (rows * cols)
    for (i, j), value in X.to_dok().items():
        out[i * cols + j] = value
    return tuple(out)


def vector_to_matrix(v: Vector, rows: int, cols: int) -> Matrix:
    return el.from_entries({divmod(idx, cols): x for idx, x in enumerate(v) if x}, rows, cols)


def hom_space(pairs: Sequence[tuple[Matrix, Matrix]], rows: int, cols: int) -> Subspace:
    """All rows×cols matrices X with N·X = X·M for every supplied (N, M)."""
    if not pairs:
        return Subspace.full(rows * cols)
    return el.kernel(commutation_system(pairs, rows, cols))


@dataclass(frozen=True, eq=False)
class DualModule(FiniteModule):
    """Hom into the algebra; element b is the map ``maps[b]`` (m × dim source)."""

    source: FiniteModule | None = None
    maps: tuple[Matrix, ...] = ()
    space: Subspace | None = None

    def coordinates_of_map(self, F: Matrix) -> Vector:
        return self.space.coordinates(matrix_to_vector(F))

    def map_of(self, coords: Vector) -> Matrix:
        return el.linear_combination(coords, self.maps, self.algebra.dim, self.source.dim)

    def evaluate(self, coords: Vector, p: Vector) -> AlgebraElement:
        return AlgebraElement(self.algebra, el.apply(self.map_of(coords), p))


def dual_module(P: FiniteModule) -> DualModule:
    """P* = maps P → A linear for whatever acts on each side of P.

    The dual's algebra-side actions come from multiplying values in A: a side of
    P where only the centre acts becomes a side of P* where the algebra acts.
    """
    A = P.algebra
    m, p = A.dim, P.dim
    pairs = []
    for a in P.side_basis(left=True):
        pairs.append((A.left_matrix(a), P.left_matrix(a)))
    for a in P.side_basis(left=False):
        pairs.append((A.right_matrix(a), P.right_matrix(a)))
    space = hom_space(pairs, m, p)
    maps = tuple(vector_to_matrix(v, m, p) for v in space.vectors())
    kind = P.kind.dual()

    def action(mult) -> tuple[Matrix, ...]:
        mats = []
        for a in A.basis():
            L = mult(a)
            cols = [space.coordinates(matrix_to_vector(el.matmul(L, F))) for F in maps]
            mats.append(el.from_columns(cols, space.dim))
        return tuple(mats)

    left = action(A.left_matrix) if kind.left_full else None
    right = action(A.right_matrix) if kind.right_full else None
    centre = None
    if kind is ModuleKind.CENTRE:
        centre = tuple(
            el.from_columns(
                [space.coordinates(matrix_to_vector(el.matmul(A.left_matrix(z), F))) for F in maps],
                space.dim,
            )
            for z in centre_basis(A)
        )
    logger.debug("Dual of %r has dimension %d", P, space.dim)
    return DualModule(
        A, kind, space.dim, left, right, centre, f"({P.label})*",
        source=P, maps=maps, space=space,
    )


def double_dual_map(P: FiniteModule) -> Matrix:
    """Natural map P → P**, p ↦ (f ↦ f(p)), in the coordinates of the double dual."""
    D = dual_module(P)
    DD = dual_module(D)
    m = P.algebra.dim
    cols = []
    for v in range(P.dim):
        pv = P.basis_vector(v)
        evaluation = el.from_columns([el.apply(F, pv) for F in D.maps], m)
        cols.append(DD.coordinates_of_map(evaluation))
    return el.from_columns(cols, DD.dim)


# --- tensor products ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TensorModule(FiniteModule):
    """P ⊗ Q balanced over the middle action; plain coordinates (v, w) → v*dim Q + w."""

    left_factor: FiniteModule | None = None
    right_factor: FiniteModule | None = None
    quotient: QuotientMap | None = None

    def element(self, p: Vector, q: Vector) -> Vector:
        return self.quotient.project(el.kron_vectors(p, q))

    def induce(self, plain: Matrix, target: "TensorModule | None" = None) -> Matrix:
        target_q = target.quotient if target is not None else None
        return self.quotient.induce(plain, target_q)


def tensor_modules(P: FiniteModule, Q: FiniteModule) -> TensorModule:
    if P.algebra is not Q.algebra:
        raise AlgebraMismatchError("tensor product over different algebras")
    if P.kind.right_full != Q.kind.left_full:
        raise ModuleKindError(
            f"cannot balance the right side of a {P.kind.name} module "
            f"against the left side of a {Q.kind.name} module"
        )
    A = P.algebra
    p, q = P.dim, Q.dim
    Ip, Iq = el.identity(p), el.identity(q)
    generators = [
        el.sub(el.kron(P.right_matrix(a), Iq), el.kron(Ip, Q.left_matrix(a)))
        for a in P.side_basis(left=False)
    ]
    balancing = el.image(el.hstack(generators, p * q)) if generators else Subspace.zero(p * q)
    quotient = el.quotient(p * q, balancing)
    kind = ModuleKind.from_sides(P.kind.left_full, Q.kind.right_full)

    left = right = centre = None
    if kind.left_full:
        left = tuple(quotient.induce(el.kron(L, Iq)) for L in P.left_action)
    if kind.right_full:
        right = tuple(quotient.induce(el.kron(Ip, R)) for R in Q.right_action)
    if kind is ModuleKind.CENTRE:
        centre = tuple(
            quotient.induce(el.kron(P.left_matrix(z), Iq)) for z in centre_basis(A)
        )
    logger.debug("Tensor %r ⊗ %r has dimension %d", P, Q, quotient.dim)
    return TensorModule(
        A, kind, quotient.dim, left, right, centre, f"{P.label}⊗{Q.label}",
        left_factor=P, right_factor=Q, quotient=quotient,
    )


# --- idempotents ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ProjectiveModule(FiniteModule):
    """Image of an idempotent acting on A^N; ``embedding`` has the basis as columns."""

    idempotent: AlgebraMatrix = ()
    embedding: Matrix | None = None
    space: Subspace | None = None

    def coordinates(self, s: Vector) -> Vector:
        return self.space.coordinates(s)

    def ambient(self, coords: Vector) -> Vector:
        return self.space.from_coordinates(coords)

    @property
    def rank(self) -> int:
        return len(self.idempotent)


def idempotent_operator(p: AlgebraMatrix, kind: ModuleKind) -> Matrix:
    """Action of p on the coordinates of A^N.

    Right modules are columns acted on from the left (s ↦ p·s); left modules are
    rows acted on from the right (s ↦ s·p).
    """
    N = square_size(p)
    A = p[0][0].algebra
    m = A.dim
    blocks = {}
    for v in range(N):
        for w in range(N):
            if kind is ModuleKind.RIGHT:
                blocks[(v, w)] = A.left_matrix(p[v][w])
            else:
                blocks[(w, v)] = A.right_matrix(p[v][w])
    entries = {}
    for (bv, bw), M in blocks.items():
        for (i, j), value in M.to_dok().items():
            key = (bv * m + i, bw * m + j)
            entries[key] = entries.get(key, el.ZERO) + value
    return el.from_entries(entries, N * m, N * m)


def projective_from_idempotent(
    A: FiniteAlgebra, p: AlgebraMatrix, kind: ModuleKind = ModuleKind.RIGHT
) -> ProjectiveModule:
    if kind not in (ModuleKind.RIGHT, ModuleKind.LEFT):
        raise ModuleKindError("projective modules are built as left or right modules")
    N = square_size(p)
    if any(x.algebra is not A for row in p for x in row):
        raise AlgebraMismatchError("idempotent entries from another algebra")
    if not idempotent_check(p):
        raise NotIdempotentError("p·p differs from p")
    free = free_module(A, N, kind)
    space = el.image(idempotent_operator(p, kind))
    if kind is ModuleKind.RIGHT:
        right = tuple(el.restrict(R, space) for R in free.right_action)
        left = None
    else:
        left = tuple(el.restrict(L, space) for L in free.left_action)
        right = None
    return ProjectiveModule(
        A, kind, space.dim, left, right, None, f"p{A.label}^{N}",
        idempotent=p, embedding=space.embedding(), space=space,
    )

