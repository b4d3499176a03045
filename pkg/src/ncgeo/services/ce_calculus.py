"""Chevalley–Eilenberg forms over a frame of derivations.

A frame is a basis u_0..u_{f-1} of the derivations of an algebra over the base
field. A degree-k form stores one algebra element per strictly increasing index
tuple and is evaluated on other tuples by the permutation sign. Conventions:

* ``ce_d`` is the coboundary without any 1/(k+1) weight,
* ``wedge`` sums over shuffles with their signs and no factorial weight,
* ``contract`` inserts into the first slot.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations, product

from ncgeo.infrastructure import exactlin as el
from ncgeo.infrastructure.algebras import (
    AlgebraElement,
    AlgebraMismatchError,
    FiniteAlgebra,
    NoInvolutionError,
    centre_basis,
    centre_subspace,
)
from ncgeo.infrastructure.derivations import (
    Derivation,
    derivation_basis,
    derivation_involution,
    lie_bracket,
)
from ncgeo.infrastructure.exactlin import ONE, ZERO, Matrix, Scalar, Subspace, Vector
from ncgeo.infrastructure.memo import shared_cache
from ncgeo.infrastructure.modules import (
    DualModule,
    FiniteModule,
    ModuleKind,
    dual_module,
)

logger = logging.getLogger(__name__)

CONVENTIONS = {
    "d": "(dφ)(u_0..u_k) = Σ_i (−1)^i u_i(φ(..û_i..)) + Σ_{a<b} (−1)^{a+b} φ([u_a,u_b], ..), "
    "no 1/(k+1) weight",
    "wedge": "(φ∧ψ)(u_1..u_{p+q}) = Σ over (p,q)-shuffles of sign·φ(..)ψ(..), no factorial weight",
    "contraction": "(ι_uφ)(u_1..u_{k-1}) = φ(u, u_1..u_{k-1}), no factor k",
    "inner derivation": "ad b(a) = ba − ab",
}


class FrameError(Exception):
    pass


class FormDegreeError(Exception):
    pass


def normalisation_ratio(k: int) -> int:
    """``ce_d`` on degree k forms is this multiple of the 1/(k+1)-weighted coboundary."""
    return k + 1


@dataclass(frozen=True, eq=False)
class DerivationFrame:
    algebra: FiniteAlgebra
    derivations: tuple[Derivation, ...]
    names: tuple[str, ...]

    def __post_init__(self) -> None:
        if any(u.algebra is not self.algebra for u in self.derivations):
            raise AlgebraMismatchError("frame derivations from another algebra")
        if self.size and el.rank(self._columns) != self.size:
            raise FrameError("frame derivations are linearly dependent")

    @property
    def size(self) -> int:
        return len(self.derivations)

    @cached_property
    def _columns(self) -> Matrix:
        m = self.algebra.dim
        return el.from_columns([u.vector() for u in self.derivations], m * m)

    def coordinates(self, u: Derivation) -> Vector:
        """Coefficients x with u = Σ_r x_r u_r."""
        if u.algebra is not self.algebra:
            raise AlgebraMismatchError("derivation of another algebra")
        if not self.size:
            if u.is_zero():
                return ()
            raise FrameError("derivation outside the span of the frame")
        x = el.solve(self._columns, u.vector())
        if x is None:
            raise FrameError("derivation outside the span of the frame")
        return x

    @cached_property
    def brackets(self) -> tuple[tuple[Vector, ...], ...]:
        """brackets[a][b] = coordinates of [u_a, u_b]."""
        out = []
        for ua in self.derivations:
            out.append(tuple(self.coordinates(lie_bracket(ua, ub)) for ub in self.derivations))
        return tuple(out)

    def bracket_constant(self, c: int, a: int, b: int) -> Scalar:
        return self.brackets[a][b][c]

    @cached_property
    def involution(self) -> tuple[Vector, ...]:
        """involution[a] = coordinates of u_a*."""
        if not self.algebra.has_involution:
            raise NoInvolutionError(f"algebra {self.algebra.label} has no involution")
        return tuple(self.coordinates(derivation_involution(u)) for u in self.derivations)

    @cached_property
    def central_multiples(self) -> tuple[tuple[Vector, ...], ...]:
        """central_multiples[k][a] = coordinates of z_k·u_a for the centre basis z_k."""
        return tuple(
            tuple(self.coordinates(u.times_central(z)) for u in self.derivations)
            for z in centre_basis(self.algebra)
        )

    @cached_property
    def is_centre_free(self) -> bool:
        """The frame is a basis of the derivations as a module over the centre."""
        centre = centre_basis(self.algebra)
        if not self.size:
            return True
        m = self.algebra.dim
        vectors = [u.times_central(z).vector() for z in centre for u in self.derivations]
        return Subspace.span(vectors, m * m).dim == len(centre) * self.size

    def combination(self, coeffs: Vector) -> Derivation:
        m = self.algebra.dim
        action = el.linear_combination(coeffs, [u.action for u in self.derivations], m, m)
        return Derivation(self.algebra, action)


@shared_cache
def derivation_frame(A: FiniteAlgebra) -> DerivationFrame:
    basis = tuple(derivation_basis(A))
    frame = DerivationFrame(A, basis, tuple(f"u{r + 1}" for r in range(len(basis))))
    logger.debug("Derivation frame of %s has %d elements", A.label, frame.size)
    return frame


def _permutation_sign(order: tuple[int, ...]) -> int:
    inversions = sum(1 for i, j in combinations(range(len(order)), 2) if order[i] > order[j])
    return -1 if inversions % 2 else 1


def _sort_sign(indices: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    """Sign of the sorting permutation (0 on repeats) and the sorted tuple."""
    if len(set(indices)) != len(indices):
        return 0, ()
    return _permutation_sign(indices), tuple(sorted(indices))


@dataclass(frozen=True, eq=False)
class CEForm:
    frame: DerivationFrame
    degree: int
    components: dict[tuple[int, ...], AlgebraElement]

    @property
    def algebra(self) -> FiniteAlgebra:
        return self.frame.algebra

    def evaluate(self, indices: tuple[int, ...]) -> AlgebraElement:
        """φ(u_{i_1}, ..., u_{i_k}) for any index tuple."""
        if len(indices) != self.degree:
            raise FormDegreeError(f"degree-{self.degree} form evaluated on {len(indices)} slots")
        sign, key = _sort_sign(tuple(indices))
        if not sign:
            return self.algebra.zero
        value = self.components.get(key)
        if value is None:
            return self.algebra.zero
        return value if sign > 0 else -value

    def evaluate_on(self, derivations: list[Derivation]) -> AlgebraElement:
        """Base-field multilinear expansion over the frame coordinates."""
        coords = [self.frame.coordinates(u) for u in derivations]
        total = self.algebra.zero
        supports = [[(r, c) for r, c in enumerate(x) if c] for x in coords]
        for combo in product(*supports):
            coeff = ONE
            for _, c in combo:
                coeff *= c
            total = total + self.evaluate(tuple(r for r, _ in combo)) * coeff
        return total

    def _same(self, other: "CEForm") -> None:
        if other.frame is not self.frame:
            raise FrameError("forms over different frames")
        if other.degree != self.degree:
            raise FormDegreeError(f"degrees {self.degree} and {other.degree} differ")

    def __add__(self, other: "CEForm") -> "CEForm":
        self._same(other)
        out = dict(self.components)
        for key, value in other.components.items():
            out[key] = out[key] + value if key in out else value
        return _make(self.frame, self.degree, out)

    def __neg__(self) -> "CEForm":
        return CEForm(self.frame, self.degree, {k: -v for k, v in self.components.items()})

    def __sub__(self, other: "CEForm") -> "CEForm":
        return self + (-other)

    def scaled(self, c) -> "CEForm":
        c = el.scalar(c)
        return _make(self.frame, self.degree, {k: v * c for k, v in self.components.items()})

    def left_multiply(self, a: AlgebraElement) -> "CEForm":
        """(aφ)(u..) = a·φ(u..)."""
        return _make(self.frame, self.degree, {k: a * v for k, v in self.components.items()})

    def right_multiply(self, a: AlgebraElement) -> "CEForm":
        return _make(self.frame, self.degree, {k: v * a for k, v in self.components.items()})

    def __bool__(self) -> bool:
        return bool(self.components)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CEForm):
            return NotImplemented
        return (
            other.frame is self.frame
            and other.degree == self.degree
            and other.components == self.components
        )

    def __hash__(self) -> int:
        return hash((id(self.frame), self.degree, frozenset(self.components.items())))

    def __repr__(self) -> str:
        return f"CEForm(degree={self.degree}, terms={len(self.components)})"


def _make(frame: DerivationFrame, degree: int, components: dict) -> CEForm:
    return CEForm(frame, degree, {k: v for k, v in components.items() if v})


def zero_form(frame: DerivationFrame, degree: int) -> CEForm:
    return CEForm(frame, degree, {})


def function_form(frame: DerivationFrame, a: AlgebraElement) -> CEForm:
    if a.algebra is not frame.algebra:
        raise AlgebraMismatchError("element of another algebra")
    return _make(frame, 0, {(): a})


def theta(frame: DerivationFrame, r: int) -> CEForm:
    """Dual frame form: θ^r(u_q) = δ^r_q·1."""
    return CEForm(frame, 1, {(r,): frame.algebra.one})


def form_from_values(frame: DerivationFrame, degree: int, values) -> CEForm:
    """Form whose component on each increasing tuple T is ``values(T)``."""
    return _make(
        frame, degree, {T: values(T) for T in combinations(range(frame.size), degree)}
    )


def basis_forms(frame: DerivationFrame, degree: int) -> list[CEForm]:
    """Base-field basis: e_i on one increasing tuple."""
    A = frame.algebra
    return [
        CEForm(frame, degree, {T: A.basis_element(i)})
        for T in combinations(range(frame.size), degree)
        for i in range(A.dim)
    ]


def ce_d(phi: CEForm) -> CEForm:
    frame, k = phi.frame, phi.degree
    derivs = frame.derivations
    out = {}
    for T in combinations(range(frame.size), k + 1):
        total = frame.algebra.zero
        for j, t in enumerate(T):
            rest = T[:j] + T[j + 1:]
            term = derivs[t](phi.evaluate(rest))
            total = total - term if j % 2 else total + term
        for a, b in combinations(range(k + 1), 2):
            rest = tuple(T[i] for i in range(k + 1) if i not in (a, b))
            bracket = frame.brackets[T[a]][T[b]]
            term = frame.algebra.zero
            for c, coeff in enumerate(bracket):
                if coeff:
                    term = term + phi.evaluate((c,) + rest) * coeff
            total = total - term if (a + b) % 2 else total + term
        out[T] = total
    return _make(frame, k + 1, out)


def weighted_d(phi: CEForm) -> CEForm:
    """The 1/(k+1)-weighted coboundary, kept to document the ratio to ``ce_d``."""
    return ce_d(phi).scaled(f"1/{normalisation_ratio(phi.degree)}")


def wedge(phi: CEForm, psi: CEForm) -> CEForm:
    if phi.frame is not psi.frame:
        raise FrameError("wedge of forms over different frames")
    frame = phi.frame
    p, q = phi.degree, psi.degree
    out = {}
    for T in combinations(range(frame.size), p + q):
        total = frame.algebra.zero
        for first in combinations(range(p + q), p):
            second = tuple(i for i in range(p + q) if i not in first)
            left = phi.evaluate(tuple(T[i] for i in first))
            if not left:
                continue
            right = psi.evaluate(tuple(T[i] for i in second))
            value = left * right
            total = total + value if _permutation_sign(first + second) > 0 else total - value
        out[T] = total
    return _make(frame, p + q, out)


def contract(u: Derivation, phi: CEForm) -> CEForm:
    if phi.degree == 0:
        raise FormDegreeError("cannot contract a degree-0 form")
    frame = phi.frame
    x = frame.coordinates(u)
    out = {}
    for T in combinations(range(frame.size), phi.degree - 1):
        total = frame.algebra.zero
        for c, coeff in enumerate(x):
            if coeff:
                total = total + phi.evaluate((c,) + T) * coeff
        out[T] = total
    return _make(frame, phi.degree - 1, out)


def lie_derivative(u: Derivation, phi: CEForm) -> CEForm:
    """L_u = d∘ι_u + ι_u∘d."""
    inner = contract(u, ce_d(phi))
    if phi.degree == 0:
        return inner
    return ce_d(contract(u, phi)) + inner


def form_involution(phi: CEForm) -> CEForm:
    """φ*(u_1..u_k) = (φ(u_1*..u_k*))*."""
    frame = phi.frame
    if not frame.algebra.has_involution:
        raise NoInvolutionError(f"algebra {frame.algebra.label} has no involution")
    stars = frame.involution
    out = {}
    for T in combinations(range(frame.size), phi.degree):
        supports = [[(b, c) for b, c in enumerate(stars[t]) if c] for t in T]
        total = frame.algebra.zero
        for combo in product(*supports):
            value = phi.evaluate(tuple(b for b, _ in combo))
            if not value:
                continue
            coeff = ONE
            for _, c in combo:
                coeff *= c
            total = total + value.star() * el.conj(coeff)
        out[T] = total
    return _make(frame, phi.degree, out)


def is_centre_multilinear(phi: CEForm) -> bool:
    """φ(.., z·u, ..) = z·φ(.., u, ..) for central z in every slot."""
    frame = phi.frame
    for z, multiples in zip(centre_basis(frame.algebra), frame.central_multiples):
        for T in combinations(range(frame.size), phi.degree):
            expected = z * phi.evaluate(T)
            for slot, t in enumerate(T):
                total = frame.algebra.zero
                for c, coeff in enumerate(multiples[t]):
                    if coeff:
                        total = total + phi.evaluate(T[:slot] + (c,) + T[slot + 1:]) * coeff
                if total != expected:
                    return False
    return True


def exterior_derivative(a: AlgebraElement, frame: DerivationFrame) -> CEForm:
    """da with (da)(u) = u(a)."""
    return ce_d(function_form(frame, a))


# --- the 1-forms module and its duality with derivations ---------------------------


@dataclass(frozen=True, eq=False)
class OneFormsModule:
    """Centre-linear 1-forms as a bimodule; ambient coordinates r*m + i for φ(u_r)."""

    frame: DerivationFrame
    space: Subspace
    module: FiniteModule

    @property
    def dim(self) -> int:
        return self.module.dim

    def coordinates(self, phi: CEForm) -> Vector:
        if phi.degree != 1:
            raise FormDegreeError("only 1-forms live in the 1-forms module")
        return self.space.coordinates(self.ambient_of(phi))

    def ambient_of(self, phi: CEForm) -> Vector:
        out: list[Scalar] = []
        for r in range(self.frame.size):
            out.extend(phi.evaluate((r,)).coeffs)
        return tuple(out)

    def form(self, coords: Vector) -> CEForm:
        ambient = self.space.from_coordinates(coords)
        m = self.frame.algebra.dim
        return _make(
            self.frame,
            1,
            {
                (r,): AlgebraElement(self.frame.algebra, ambient[r * m:(r + 1) * m])
                for r in range(self.frame.size)
            },
        )


@shared_cache
def ce_one_forms_module(frame: DerivationFrame) -> OneFormsModule:
    A = frame.algebra
    m, f = A.dim, frame.size
    n = m * f
    rows = []
    for z, multiples in zip(centre_basis(A), frame.central_multiples):
        Lz = A.left_matrix(z)
        for r in range(f):
            # Σ_s X_{sr} φ(u_s) − z φ(u_r) = 0
            entries = {}
            for s, coeff in enumerate(multiples[r]):
                if coeff:
                    for i in range(m):
                        entries[(i, s * m + i)] = entries.get((i, s * m + i), ZERO) + coeff
            for (i, j), value in Lz.to_dok().items():
                entries[(i, r * m + j)] = entries.get((i, r * m + j), ZERO) - value
            rows.append(el.from_entries(entries, m, n))
    space = el.kernel(el.vstack(rows, n)) if rows else Subspace.full(n)
    left = tuple(el.restrict(el.block_diag(*([L] * f)), space) for L in A.left_matrices)
    right = tuple(el.restrict(el.block_diag(*([R] * f)), space) for R in A.right_matrices)
    involution = None
    if A.has_involution and space.dim == n:
        # φ*(u_r) = Σ_s conj(I_r[s]) φ(u_s)*
        blocks = {}
        for r, coords in enumerate(frame.involution):
            for s, c in enumerate(coords):
                if c:
                    for (i, j), value in A.involution.to_dok().items():
                        blocks[(r * m + i, s * m + j)] = el.conj(c) * value
        involution = el.from_entries(blocks, n, n)
    module = FiniteModule(
        A, ModuleKind.BIMODULE, space.dim, left, right,
        label=f"Ω1[{A.label}]", involution=involution,
    )
    logger.debug("CE 1-forms over %s: dimension %d", A.label, space.dim)
    return OneFormsModule(frame, space, module)


@dataclass(frozen=True)
class OneFormDuality:
    derivations_dim: int
    dual_dim: int
    rank: int

    @property
    def injective(self) -> bool:
        return self.rank == self.derivations_dim

    @property
    def bijective(self) -> bool:
        return self.injective and self.rank == self.dual_dim


def evaluation_map(forms: OneFormsModule, u: Derivation) -> Matrix:
    """ev_u: φ ↦ φ(u) as a matrix on the module coordinates."""
    A = forms.frame.algebra
    m = A.dim
    x = forms.frame.coordinates(u)
    blocks = [el.scale(c, el.identity(m)) for c in x]
    ambient = el.hstack(blocks, m) if blocks else el.zeros(m, 0)
    return el.matmul(ambient, forms.space.embedding())


def one_form_duality(A: FiniteAlgebra) -> OneFormDuality:
    frame = derivation_frame(A)
    forms = ce_one_forms_module(frame)
    dual: DualModule = dual_module(forms.module)
    images = [dual.coordinates_of_map(evaluation_map(forms, u)) for u in frame.derivations]
    rank = el.rank(el.from_rows(images, dual.dim)) if images and dual.dim else 0
    logger.info(
        "Derivations of %s: %d; dual of the 1-forms: %d; rank %d",
        A.label, frame.size, dual.dim, rank,
    )
    return OneFormDuality(frame.size, dual.dim, rank)


@dataclass(frozen=True)
class CentralityReport:
    ok: bool
    witness: dict | None = None


def differentials_central(A: FiniteAlgebra) -> CentralityReport:
    """a·de_i = de_i·a for all basis a, e_i among the CE 1-forms."""
    frame = derivation_frame(A)
    basis = A.basis()
    for i, e in enumerate(basis):
        de = exterior_derivative(e, frame)
        for j, a in enumerate(basis):
            left, right = de.left_multiply(a), de.right_multiply(a)
            if left != right:
                r = next(
                    r for r in range(frame.size) if left.evaluate((r,)) != right.evaluate((r,))
                )
                return CentralityReport(False, {"a": j, "e": i, "u": r})
    return CentralityReport(True)


def centre_is_stable(A: FiniteAlgebra) -> bool:
    """u(z) is central for every derivation u and central z."""
    centre = centre_subspace(A)
    return all(
        centre.contains(u(z).coeffs) for u in derivation_basis(A) for z in centre_basis(A)
    )
