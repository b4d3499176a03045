"""Derivation-based connections on modules of every kind.

A connection assigns to each frame derivation u_r an endomorphism ∇_r of the
underlying vector space of P; a general derivation u = Σ x_r u_r acts by
Σ x_r ∇_r. The Leibniz rule is checked on the sides where the algebra (or only
its centre) acts:

    ∇_u(a p b) = u(a) p b + a ∇_u(p) b + a p u(b).
"""

import logging
from dataclasses import dataclass
from itertools import combinations

from ncgeo.infrastructure import exactlin as el
from ncgeo.infrastructure.algebras import (
    AlgebraElement,
    AlgebraMismatchError,
    FiniteAlgebra,
    NoInvolutionError,
    centre_basis,
)
from ncgeo.infrastructure.derivations import Derivation, inner_derivation, lie_bracket
from ncgeo.infrastructure.exactlin import Matrix, Vector
from ncgeo.infrastructure.modules import (
    DualModule,
    FiniteModule,
    ModuleKind,
    ModuleKindError,
    TensorModule,
    algebra_as_module,
    direct_sum_modules,
    dual_module,
    matrix_to_vector,
    tensor_modules,
)
from ncgeo.services.ce_calculus import (
    CEForm,
    DerivationFrame,
    FrameError,
    OneFormsModule,
    ce_d,
    ce_one_forms_module,
    derivation_frame,
    form_from_values,
)

logger = logging.getLogger(__name__)


class ConnectionLeibnizError(Exception):
    pass


class NotInnerDerivationError(Exception):
    pass


class DualConnectionError(Exception):
    pass


class LinearConnectionError(Exception):
    pass


@dataclass(frozen=True)
class DVCheck:
    ok: bool
    witness: dict | None = None


def _difference(lhs: Matrix, rhs: Matrix) -> dict:
    row, col, left, right = el.first_difference(lhs, rhs)
    return {
        "row": row,
        "col": col,
        "lhs": el.format_scalar(left),
        "rhs": el.format_scalar(right),
    }


@dataclass(frozen=True, eq=False)
class DVConnection:
    module: FiniteModule
    frame: DerivationFrame
    endos: tuple[Matrix, ...]
    label: str = ""

    def __post_init__(self) -> None:
        if self.module.algebra is not self.frame.algebra:
            raise AlgebraMismatchError("module and frame over different algebras")
        if len(self.endos) != self.frame.size:
            raise FrameError(
                f"{len(self.endos)} endomorphisms for a frame of size {self.frame.size}"
            )
        p = self.module.dim
        for r, N in enumerate(self.endos):
            if N.shape != (p, p):
                raise el.DimensionMismatchError(f"∇_{r} has shape {N.shape}, expected {(p, p)}")

    @property
    def algebra(self) -> FiniteAlgebra:
        return self.module.algebra

    def endo(self, u: Derivation) -> Matrix:
        p = self.module.dim
        return el.linear_combination(self.frame.coordinates(u), self.endos, p, p)

    def __call__(self, u: Derivation, p: Vector) -> Vector:
        return el.apply(self.endo(u), p)

    def __repr__(self) -> str:
        return f"DVConnection({self.label or '?'} on {self.module!r})"


def dv_check(nabla: DVConnection) -> DVCheck:
    """Centre-linearity in u and the Leibniz rule on every side that acts."""
    P, frame = nabla.module, nabla.frame
    A = nabla.algebra
    p = P.dim
    for k, (z, multiples) in enumerate(zip(centre_basis(A), frame.central_multiples)):
        Lz = P.left_matrix(z)
        for r in range(frame.size):
            lhs = el.linear_combination(multiples[r], nabla.endos, p, p)
            rhs = el.matmul(Lz, nabla.endos[r])
            if not el.equal(lhs, rhs):
                return DVCheck(
                    False, {"rule": "centre-linearity", "centre": k, "u": r} | _difference(lhs, rhs)
                )
    for left in (True, False):
        side = "left" if left else "right"
        action = P.left_matrix if left else P.right_matrix
        for r, (u, N) in enumerate(zip(frame.derivations, nabla.endos)):
            for i, a in enumerate(P.side_basis(left)):
                M = action(a)
                lhs = el.sub(el.matmul(N, M), el.matmul(M, N))
                rhs = action(u(a))
                if not el.equal(lhs, rhs):
                    return DVCheck(
                        False, {"rule": f"{side} Leibniz", "u": r, "a": i} | _difference(lhs, rhs)
                    )
    return DVCheck(True)


def validated(nabla: DVConnection) -> DVConnection:
    check = dv_check(nabla)
    if not check.ok:
        raise ConnectionLeibnizError(f"{nabla!r} violates {check.witness}")
    return nabla


def zero_family(P: FiniteModule, frame: DerivationFrame | None = None) -> DVConnection:
    """All ∇_r = 0; a connection only when every frame derivation kills the acting algebra."""
    frame = frame or derivation_frame(P.algebra)
    zero = el.zeros(P.dim, P.dim)
    return DVConnection(P, frame, (zero,) * frame.size, "zero")


def canonical_connection(
    A: FiniteAlgebra, kind: ModuleKind = ModuleKind.BIMODULE
) -> DVConnection:
    """∇_u(a) = u(a) on the algebra itself."""
    frame = derivation_frame(A)
    P = algebra_as_module(A, kind)
    return DVConnection(P, frame, tuple(u.action for u in frame.derivations), "canonical")


def inner_elements(frame: DerivationFrame) -> list[AlgebraElement]:
    """b_r with u_r = ad b_r; raises when some frame derivation is outer."""
    A = frame.algebra
    m = A.dim
    columns = el.from_columns([inner_derivation(e).vector() for e in A.basis()], m * m)
    out = []
    for r, u in enumerate(frame.derivations):
        b = el.solve(columns, u.vector())
        if b is None:
            raise NotInnerDerivationError(f"{frame.names[r]} is not an inner derivation")
        out.append(AlgebraElement(A, b))
    return out


def inner_connection(P: FiniteModule, frame: DerivationFrame | None = None) -> DVConnection:
    """∇_{ad b}(p) = bp − pb on a central bimodule."""
    if P.kind is not ModuleKind.BIMODULE:
        raise ModuleKindError(f"inner connection needs a bimodule, got {P.kind.name}")
    frame = frame or derivation_frame(P.algebra)
    endos = tuple(
        el.sub(P.left_matrix(b), P.right_matrix(b)) for b in inner_elements(frame)
    )
    return DVConnection(P, frame, endos, "inner")


# --- curvature ----------------------------------------------------------------------


def curvature(nabla: DVConnection, u: Derivation, v: Derivation) -> Matrix:
    """R(u, v) = ∇_u∇_v − ∇_v∇_u − ∇_[u,v]."""
    Nu, Nv = nabla.endo(u), nabla.endo(v)
    commutator = el.sub(el.matmul(Nu, Nv), el.matmul(Nv, Nu))
    return el.sub(commutator, nabla.endo(lie_bracket(u, v)))


def curvature_table(nabla: DVConnection) -> dict[tuple[int, int], Matrix]:
    derivs = nabla.frame.derivations
    return {
        (a, b): curvature(nabla, derivs[a], derivs[b])
        for a in range(len(derivs))
        for b in range(len(derivs))
    }


def is_flat(nabla: DVConnection) -> bool:
    return all(el.is_zero(R) for R in curvature_table(nabla).values())


def curvature_check(nabla: DVConnection) -> DVCheck:
    """Antisymmetry, centre-bilinearity and module linearity of R on the frame."""
    P, frame = nabla.module, nabla.frame
    table = curvature_table(nabla)
    derivs = frame.derivations
    for (a, b), R in table.items():
        negated = el.scale(-el.ONE, table[(b, a)])
        if not el.equal(R, negated):
            return DVCheck(False, {"property": "antisymmetry", "u": a, "v": b})
        if not P.is_endomorphism(R):
            return DVCheck(False, {"property": "module map", "u": a, "v": b})
        for k, z in enumerate(centre_basis(nabla.algebra)):
            lhs = curvature(nabla, derivs[a].times_central(z), derivs[b])
            rhs = el.matmul(P.left_matrix(z), R)
            if not el.equal(lhs, rhs):
                return DVCheck(False, {"property": "centre-bilinear", "u": a, "v": b, "centre": k})
    return DVCheck(True)


# --- linear connections and torsion ------------------------------------------------------


def _one_forms(nabla: DVConnection) -> OneFormsModule:
    forms = ce_one_forms_module(nabla.frame)
    if nabla.module is not forms.module:
        raise LinearConnectionError(f"{nabla!r} does not act on the 1-forms of its frame")
    return forms


def covariant_form(nabla: DVConnection, r: int, phi: CEForm) -> CEForm:
    """∇_r φ as a 1-form."""
    forms = _one_forms(nabla)
    return forms.form(el.apply(nabla.endos[r], forms.coordinates(phi)))


def torsion(nabla: DVConnection, phi: CEForm) -> CEForm:
    """(Tφ)(u_a, u_b) = dφ(u_a, u_b) − (∇_aφ)(u_b) + (∇_bφ)(u_a)."""
    frame = nabla.frame
    dphi = ce_d(phi)
    moved = [covariant_form(nabla, r, phi) for r in range(frame.size)]

    def value(T: tuple[int, ...]) -> AlgebraElement:
        a, b = T
        return dphi.evaluate(T) - moved[a].evaluate((b,)) + moved[b].evaluate((a,))

    return form_from_values(frame, 2, value)


def torsion_table(
    nabla: DVConnection, phis: list[CEForm]
) -> dict[tuple[int, int, int], AlgebraElement]:
    """(Tφ_p)(u_a, u_b) for every listed form and every frame pair a < b."""
    size = nabla.frame.size
    out = {}
    for p, phi in enumerate(phis):
        T = torsion(nabla, phi)
        for a, b in combinations(range(size), 2):
            out[(p, a, b)] = T.evaluate((a, b))
    return out


def is_torsion_free(nabla: DVConnection) -> bool:
    forms = _one_forms(nabla)
    return not any(torsion(nabla, forms.form(v)) for v in _unit_vectors(forms.dim))


def _unit_vectors(n: int) -> list[Vector]:
    return [el.unit_vector(n, i) for i in range(n)]


def torsion_bimodule_check(nabla: DVConnection) -> DVCheck:
    """T(aφ) = aT(φ) and T(φa) = T(φ)a on module and algebra bases."""
    forms = _one_forms(nabla)
    for v in range(forms.dim):
        phi = forms.form(el.unit_vector(forms.dim, v))
        T = torsion(nabla, phi)
        for i, a in enumerate(nabla.algebra.basis()):
            if torsion(nabla, phi.left_multiply(a)) != T.left_multiply(a):
                return DVCheck(False, {"side": "left", "form": v, "a": i})
            if torsion(nabla, phi.right_multiply(a)) != T.right_multiply(a):
                return DVCheck(False, {"side": "right", "form": v, "a": i})
    return DVCheck(True)


def linear_connection_from_omega(
    forms: OneFormsModule, omega, label: str = "omega"
) -> DVConnection:
    """∇_r(aθ^p) = u_r(a)θ^p + a·ω[p][r][q]θ^q.

    On components: (∇_rφ)(u_q) = u_r(φ(u_q)) + Σ_p φ(u_p)·ω[p][r][q].

    Raises :class:`el.NotInSubspaceError` when the operator leaves the 1-forms.
    """
    frame = forms.frame
    A = frame.algebra
    m, f = A.dim, frame.size
    n = m * f
    endos = []
    for r, u in enumerate(frame.derivations):
        entries: dict[tuple[int, int], el.Scalar] = {}
        for q in range(f):
            for (i, j), value in u.action.to_dok().items():
                key = (q * m + i, q * m + j)
                entries[key] = entries.get(key, el.ZERO) + value
        for p in range(f):
            for q in range(f):
                w = omega[p][r][q]
                if not w:
                    continue
                for (i, j), value in A.right_matrix(w).to_dok().items():
                    key = (q * m + i, p * m + j)
                    entries[key] = entries.get(key, el.ZERO) + value
        endos.append(el.restrict(el.from_entries(entries, n, n), forms.space))
    return DVConnection(forms.module, frame, tuple(endos), label)


# --- operations on connections ----------------------------------------------------------


def _same_frame(first: DVConnection, second: DVConnection) -> None:
    if first.frame is not second.frame:
        raise FrameError("connections over different frames")


def direct_sum(first: DVConnection, second: DVConnection) -> DVConnection:
    _same_frame(first, second)
    P = direct_sum_modules(first.module, second.module)
    endos = tuple(el.block_diag(N1, N2) for N1, N2 in zip(first.endos, second.endos))
    return DVConnection(P, first.frame, endos, f"{first.label}⊕{second.label}")


def dual(nabla: DVConnection) -> DVConnection:
    """The unique ∇′ on P* with u(F(p)) = (∇′_uF)(p) + F(∇_u p)."""
    P = nabla.module
    D: DualModule = dual_module(P)
    endos = []
    for u, N in zip(nabla.frame.derivations, nabla.endos):
        cols = []
        for b, F in enumerate(D.maps):
            moved = el.sub(el.matmul(u.action, F), el.matmul(F, N))
            if not D.space.contains(matrix_to_vector(moved)):
                raise DualConnectionError(f"∇′ leaves the dual module at basis map {b}")
            cols.append(D.coordinates_of_map(moved))
        endos.append(el.from_columns(cols, D.dim))
    return DVConnection(D, nabla.frame, tuple(endos), f"({nabla.label})*")


def pairing_check(nabla: DVConnection, dual_nabla: DVConnection) -> DVCheck:
    """u(⟨p, F⟩) = ⟨∇_u p, F⟩ + ⟨p, ∇′_u F⟩ on frame, module and dual bases."""
    D = dual_nabla.module
    if not isinstance(D, DualModule) or D.source is not nabla.module:
        raise DualConnectionError("second connection does not act on the dual module")
    P = nabla.module
    for r, (u, N, M) in enumerate(zip(nabla.frame.derivations, nabla.endos, dual_nabla.endos)):
        for b in range(D.dim):
            fb = el.unit_vector(D.dim, b)
            moved = el.apply(M, fb)
            for v in range(P.dim):
                pv = P.basis_vector(v)
                lhs = u(D.evaluate(fb, pv))
                rhs = D.evaluate(fb, el.apply(N, pv)) + D.evaluate(moved, pv)
                if lhs != rhs:
                    return DVCheck(False, {"u": r, "dual": b, "p": v})
    return DVCheck(True)


def tensor(first: DVConnection, second: DVConnection) -> DVConnection:
    """∇_u(p⊗q) = ∇_u p⊗q + p⊗∇_u q on the balanced tensor product."""
    _same_frame(first, second)
    T: TensorModule = tensor_modules(first.module, second.module)
    Ip, Iq = el.identity(first.module.dim), el.identity(second.module.dim)
    endos = []
    for r, (N1, N2) in enumerate(zip(first.endos, second.endos)):
        plain = el.add(el.kron(N1, Iq), el.kron(Ip, N2))
        try:
            endos.append(T.induce(plain))
        except el.NotInSubspaceError as exc:
            raise ConnectionLeibnizError(
                f"∇_{r} does not preserve the balancing relations of {T.label}"
            ) from exc
    return DVConnection(T, first.frame, tuple(endos), f"{first.label}⊗{second.label}")


def _involution(P: FiniteModule) -> Matrix:
    if P.involution is None:
        raise NoInvolutionError(f"{P!r} carries no involution")
    if P.kind not in (ModuleKind.BIMODULE, ModuleKind.CENTRE):
        raise ModuleKindError(f"conjugation exchanges sides; {P.kind.name} modules have one")
    return P.involution


def conjugate(nabla: DVConnection) -> DVConnection:
    """∇̄_u(p) = (∇_{u*}(p*))* with p* = S·conj(p)."""
    S = _involution(nabla.module)
    frame = nabla.frame
    p = nabla.module.dim
    Sbar = el.conjugate(S)
    endos = []
    for stars in frame.involution:
        M = el.linear_combination(stars, nabla.endos, p, p)
        endos.append(el.matmul(S, el.conjugate(M), Sbar))
    return DVConnection(nabla.module, frame, tuple(endos), f"conj({nabla.label})")


def is_real(nabla: DVConnection) -> bool:
    return all(el.equal(N, M) for N, M in zip(nabla.endos, conjugate(nabla).endos))


def difference(first: DVConnection, second: DVConnection) -> tuple[Matrix, ...]:
    _same_frame(first, second)
    if first.module is not second.module:
        raise ModuleKindError("connections on different modules")
    return tuple(el.sub(N1, N2) for N1, N2 in zip(first.endos, second.endos))


def is_endomorphism_family(P: FiniteModule, family: tuple[Matrix, ...]) -> bool:
    return all(P.is_endomorphism(F) for F in family)


def add_endomorphisms(nabla: DVConnection, family: tuple[Matrix, ...]) -> DVConnection:
    """∇ + F for a frame-indexed family of module endomorphisms."""
    if len(family) != nabla.frame.size:
        raise FrameError(f"{len(family)} endomorphisms for a frame of size {nabla.frame.size}")
    for r, F in enumerate(family):
        if not nabla.module.is_endomorphism(F):
            raise ConnectionLeibnizError(f"F_{r} is not a module endomorphism")
    endos = tuple(el.add(N, F) for N, F in zip(nabla.endos, family))
    return validated(DVConnection(nabla.module, nabla.frame, endos, f"{nabla.label}+F"))
