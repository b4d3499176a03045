"""Connections with values in the universal 1-forms.

For a left module P the space Ω¹⊗_A P is realised inside A⊗P (flat index
i*dim P + v) as the kernel of e_i⊗p ↦ e_i·p: a universal form x⊗y tensored with
p becomes x⊗yp. Higher degrees live in A^{⊗k}⊗P the same way. Right modules use
P⊗A (flat index v*m + i) and P⊗A^{⊗k}, with p⊗x⊗y becoming px⊗y.
"""

import logging
from dataclasses import dataclass
from itertools import product

from ncgeo.config import settings
from ncgeo.infrastructure import exactlin as el
from ncgeo.infrastructure.algebras import AlgebraElement, AlgebraMismatchError, FiniteAlgebra
from ncgeo.infrastructure.derivations import Derivation
from ncgeo.infrastructure.exactlin import ZERO, Matrix, Vector
from ncgeo.infrastructure.modules import (
    FiniteModule,
    ModuleKind,
    ModuleKindError,
    ProjectiveModule,
)
from ncgeo.services.ce_calculus import DerivationFrame, derivation_frame
from ncgeo.services.connections import DVCheck, DVConnection
from ncgeo.services.universal_calculus import DegreeBoundError, _decode, _encode

logger = logging.getLogger(__name__)


class UniversalLeibnizError(Exception):
    pass


def _require_one_sided(P: FiniteModule) -> bool:
    """True for left modules, False for right ones."""
    if P.kind is ModuleKind.LEFT:
        return True
    if P.kind is ModuleKind.RIGHT:
        return False
    raise ModuleKindError(
        f"universal connections act on left or right modules, got {P.kind.name}; "
        "use a derivation-based connection or a left/right pair"
    )


@dataclass(frozen=True, eq=False)
class UniversalConnection:
    module: FiniteModule
    map: Matrix
    label: str = ""

    def __post_init__(self) -> None:
        _require_one_sided(self.module)
        expected = (self.module.algebra.dim * self.module.dim, self.module.dim)
        if self.map.shape != expected:
            raise el.DimensionMismatchError(f"∇ has shape {self.map.shape}, expected {expected}")

    @property
    def algebra(self) -> FiniteAlgebra:
        return self.module.algebra

    @property
    def left(self) -> bool:
        return self.module.kind is ModuleKind.LEFT

    def __call__(self, p: Vector) -> Vector:
        return el.apply(self.map, p)

    def __repr__(self) -> str:
        side = "left" if self.left else "right"
        return f"UniversalConnection({self.label or '?'}, {side}, {self.module!r})"


def _column(a: AlgebraElement) -> Matrix:
    return el.from_columns([a.coeffs], a.algebra.dim)


def action_map(P: FiniteModule) -> Matrix:
    """e_i⊗p ↦ e_i·p on A⊗P for left P, p⊗e_i ↦ p·e_i on P⊗A for right P."""
    A = P.algebra
    m, p = A.dim, P.dim
    if _require_one_sided(P):
        return el.hstack([P.left_matrix(e) for e in A.basis()], p)
    entries = {}
    for i, e in enumerate(A.basis()):
        for (row, v), value in P.right_matrix(e).to_dok().items():
            entries[(row, v * m + i)] = value
    return el.from_entries(entries, p, p * m)


def universal_check(nabla: UniversalConnection) -> DVCheck:
    """Values in Ω¹⊗P and the Leibniz rule on algebra and module bases."""
    P, A = nabla.module, nabla.algebra
    p = P.dim
    residue = el.matmul(action_map(P), nabla.map)
    if not el.is_zero(residue):
        return DVCheck(False, {"rule": "values in the 1-forms", "entry": _entry(residue)})
    Ip = el.identity(p)
    unit = _column(A.one)
    for i, a in enumerate(A.basis()):
        if nabla.left:
            # ∇(ap) = 1⊗ap − a⊗p + a∇(p)
            La = P.left_matrix(a)
            moved = el.matmul(el.kron(A.left_matrix(a), Ip), nabla.map)
            lhs = el.sub(el.matmul(nabla.map, La), moved)
            rhs = el.sub(el.kron(unit, La), el.kron(_column(a), Ip))
        else:
            # ∇(pa) = ∇(p)a + p⊗a − pa⊗1
            Ra = P.right_matrix(a)
            moved = el.matmul(el.kron(Ip, A.right_matrix(a)), nabla.map)
            lhs = el.sub(el.matmul(nabla.map, Ra), moved)
            rhs = el.sub(el.kron(Ip, _column(a)), el.kron(Ra, unit))
        if not el.equal(lhs, rhs):
            return DVCheck(False, {"rule": "Leibniz", "a": i, "entry": _entry(el.sub(lhs, rhs))})
    return DVCheck(True)


def _entry(M: Matrix) -> dict:
    row, col, value, _ = el.first_difference(M, el.zeros(*M.shape))
    return {"row": row, "col": col, "value": el.format_scalar(value)}


def validated(nabla: UniversalConnection) -> UniversalConnection:
    check = universal_check(nabla)
    if not check.ok:
        raise UniversalLeibnizError(f"{nabla!r} violates {check.witness}")
    return nabla


# --- constructors --------------------------------------------------------------------------


def _generator_connection(
    P: FiniteModule, generators: list[Vector], components, label: str
) -> UniversalConnection:
    """Grassmann form built from generators g_w and component maps s ↦ s_w ∈ A.

    Left: ∇(s) = 1⊗s − Σ_w s_w⊗g_w.  Right: ∇(s) = Σ_w g_w⊗s_w − s⊗1.
    """
    A = P.algebra
    unit = A.unit
    columns = []
    for t in range(P.dim):
        s = P.basis_vector(t)
        parts = components(s)
        if P.kind is ModuleKind.LEFT:
            out = el.kron_vectors(unit, s)
            for g, sw in zip(generators, parts):
                out = el.sub_vectors(out, el.kron_vectors(sw, g))
        else:
            out = el.scale_vector(-el.ONE, el.kron_vectors(s, unit))
            for g, sw in zip(generators, parts):
                out = el.add_vectors(out, el.kron_vectors(g, sw))
        columns.append(out)
    return UniversalConnection(P, el.from_columns(columns, A.dim * P.dim), label)


def delta_connection(P: FiniteModule) -> UniversalConnection:
    """∇(Σ a_v f_v) = Σ δa_v⊗f_v on a free left module, Σ f_v⊗δa_v on a free right one."""
    _require_one_sided(P)
    if P.free_rank is None:
        raise ModuleKindError(f"{P!r} is not presented as a free module")
    m, N = P.algebra.dim, P.free_rank
    unit = P.algebra.unit
    generators = [el.kron_vectors(el.unit_vector(N, w), unit) for w in range(N)]

    def components(s: Vector) -> list[Vector]:
        return [s[w * m:(w + 1) * m] for w in range(N)]

    return _generator_connection(P, generators, components, "δ")


def grassmann_universal_connection(P: ProjectiveModule) -> UniversalConnection:
    """p∘δ on pA^N: right modules are columns s = ps, left modules rows s = sp."""
    left = _require_one_sided(P)
    A = P.algebra
    m, N = A.dim, P.rank
    generators = []
    for w in range(N):
        # column w of p for right modules, row w for left ones
        entries = [P.idempotent[w][v] if left else P.idempotent[v][w] for v in range(N)]
        ambient = tuple(x for e in entries for x in e.coeffs)
        generators.append(P.coordinates(ambient))

    def components(s: Vector) -> list[Vector]:
        ambient = P.ambient(s)
        return [ambient[w * m:(w + 1) * m] for w in range(N)]

    return _generator_connection(P, generators, components, f"Grassmann[{P.label}]")


def add_morphism(nabla: UniversalConnection, sigma: Matrix) -> UniversalConnection:
    """∇ + σ for a module morphism σ: P → Ω¹⊗P (left) or P⊗Ω¹ (right)."""
    shifted = UniversalConnection(nabla.module, el.add(nabla.map, sigma), f"{nabla.label}+σ")
    return validated(shifted)


# --- extension and curvature ----------------------------------------------------------------


def _check_degree(k: int) -> None:
    bound = settings.universal_max_degree
    if k < 0 or k + 1 > bound:
        raise DegreeBoundError(f"extension to degree {k + 1} outside the bound 0..{bound}")


def extend(nabla: UniversalConnection, k: int) -> Matrix:
    """The degree-k piece D_k of the graded extension, D_0 = ∇.

    Left: D_k(α⊗p) = δα⊗p + (−1)^k α⊗∇p on A^{⊗k}⊗P.
    Right: D_k(p⊗α) = ∇p⊗α + p⊗δα on P⊗A^{⊗k}.
    """
    _check_degree(k)
    if k == 0:
        return nabla.map
    A = nabla.algebra
    m, p = A.dim, nabla.module.dim
    unit = [(u, c) for u, c in enumerate(A.unit) if c]
    image = [
        [(row, value) for (row, col), value in nabla.map.to_dok().items() if col == v]
        for v in range(p)
    ]
    width = m**k
    entries: dict[tuple[int, int], el.Scalar] = {}

    def put(row: int, col: int, value) -> None:
        entries[(row, col)] = entries.get((row, col), ZERO) + value

    for flat in range(width):
        I = _decode(flat, m, k)
        for v in range(p):
            if nabla.left:
                col = flat * p + v
                for j in range(k):
                    sign = -el.ONE if j % 2 else el.ONE
                    for u, c in unit:
                        put(_encode(I[:j] + (u,) + I[j:], m) * p + v, col, sign * c)
                sign = -el.ONE if k % 2 else el.ONE
                for row, value in image[v]:
                    j, w = divmod(row, p)
                    put((flat * m + j) * p + w, col, sign * value)
            else:
                col = v * width + flat
                for row, value in image[v]:
                    w, j = divmod(row, m)
                    put((w * m + j) * width + flat, col, value)
                for position in range(1, k + 1):
                    sign = el.ONE if position % 2 else -el.ONE
                    for u, c in unit:
                        J = I[:position] + (u,) + I[position:]
                        put(v * width * m + _encode(J, m), col, sign * c)
    return el.from_entries(entries, m * width * p, width * p)


def universal_curvature(nabla: UniversalConnection) -> Matrix:
    """∇² = D_1∘∇: P → Ω²⊗P (left) or P⊗Ω² (right)."""
    return el.matmul(extend(nabla, 1), nabla.map)


def curvature_module_check(nabla: UniversalConnection) -> DVCheck:
    """∇²(ap) = a∇²(p) for left modules, ∇²(pa) = ∇²(p)a for right ones."""
    P, A = nabla.module, nabla.algebra
    R = universal_curvature(nabla)
    identity = el.identity(A.dim * P.dim)
    for i, a in enumerate(A.basis()):
        if nabla.left:
            lhs = el.matmul(R, P.left_matrix(a))
            rhs = el.matmul(el.kron(A.left_matrix(a), identity), R)
        else:
            lhs = el.matmul(R, P.right_matrix(a))
            rhs = el.matmul(el.kron(identity, A.right_matrix(a)), R)
        if not el.equal(lhs, rhs):
            return DVCheck(False, {"a": i, "entry": _entry(el.sub(lhs, rhs))})
    return DVCheck(True)


# --- reduction to derivations ------------------------------------------------------------


def interior_map(P: FiniteModule, u: Derivation) -> Matrix:
    """Pairing of u with the 1-form factor: e_i⊗q ↦ −u(e_i)q (left), q⊗e_i ↦ q·u(e_i) (right)."""
    A = P.algebra
    if u.algebra is not A:
        raise AlgebraMismatchError("derivation of another algebra")
    m, p = A.dim, P.dim
    images = [u(e) for e in A.basis()]
    if _require_one_sided(P):
        return el.scale(-el.ONE, el.hstack([P.left_matrix(x) for x in images], p))
    entries = {}
    for i, x in enumerate(images):
        for (row, v), value in P.right_matrix(x).to_dok().items():
            entries[(row, v * m + i)] = value
    return el.from_entries(entries, p, p * m)


def interior_reduce(nabla: UniversalConnection, u: Derivation) -> Matrix:
    """∇_u = u⌟∇ (left) or ∇⌞u (right)."""
    return el.matmul(interior_map(nabla.module, u), nabla.map)


def reduced_connection(
    nabla: UniversalConnection, frame: DerivationFrame | None = None
) -> DVConnection:
    """The family u_r ↦ ∇_{u_r}; it obeys the one-sided Leibniz rule."""
    frame = frame or derivation_frame(nabla.algebra)
    endos = tuple(interior_reduce(nabla, u) for u in frame.derivations)
    return DVConnection(nabla.module, frame, endos, f"reduced {nabla.label}")


# --- bimodule pairs -------------------------------------------------------------------------


def permutation_flip(P: FiniteModule) -> Matrix:
    """ϱ: Ω¹⊗P → P⊗Ω¹ with ϱ(e_i⊗p) = −p⊗e_i + pe_i⊗1, so ϱ(δa⊗p) = p⊗δa on central P."""
    if P.kind is not ModuleKind.BIMODULE:
        raise ModuleKindError(f"the flip needs a bimodule, got {P.kind.name}")
    A = P.algebra
    m, p = A.dim, P.dim
    columns = []
    for i, v in product(range(m), range(p)):
        pv = P.basis_vector(v)
        out = el.scale_vector(-el.ONE, el.kron_vectors(pv, el.unit_vector(m, i)))
        out = el.add_vectors(out, el.kron_vectors(P.act_right(pv, A.basis_element(i)), A.unit))
        columns.append(out)
    return el.from_columns(columns, p * m)


@dataclass(frozen=True)
class PairReport:
    flip_ok: bool | None
    interior_ok: bool
    witness: dict | None = None

    @property
    def ok(self) -> bool:
        return self.interior_ok and self.flip_ok is not False


def bimodule_pair_check(
    left: UniversalConnection,
    right: UniversalConnection,
    rho: Matrix | None = None,
    frame: DerivationFrame | None = None,
) -> PairReport:
    """Optional ϱ∘∇^L = ∇^R and u⌟∇^L(p) = ∇^R(p)⌞u on frame and module bases."""
    if not left.left or right.left:
        raise ModuleKindError("expected a left connection followed by a right one")
    if left.algebra is not right.algebra or left.module.dim != right.module.dim:
        raise AlgebraMismatchError("the two connections act on different modules")
    witness = None
    flip_ok = None
    if rho is not None:
        composed = el.matmul(rho, left.map)
        flip_ok = el.equal(composed, right.map)
        if not flip_ok:
            witness = {"condition": "flip"} | _entry(el.sub(composed, right.map))
    frame = frame or derivation_frame(left.algebra)
    interior_ok = True
    for r, u in enumerate(frame.derivations):
        lhs, rhs = interior_reduce(left, u), interior_reduce(right, u)
        if not el.equal(lhs, rhs):
            interior_ok = False
            row, col, x, y = el.first_difference(lhs, rhs)
            witness = witness or {
                "condition": "interior",
                "u": r,
                "p": col,
                "row": row,
                "left": el.format_scalar(x),
                "right": el.format_scalar(y),
            }
            break
    if witness is not None:
        logger.warning("Bimodule pair check failed: %s", witness)
    return PairReport(flip_ok, interior_ok, witness)
