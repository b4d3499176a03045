"""Connes calculus of a finite spectral triple.

π sends a_0δa_1⋯δa_k to rep(a_0)[D, rep(a_1)]⋯[D, rep(a_k)]. On tensors the same
formula is linear, and it agrees with the form expression on Ω^k because [D, 1] = 0.
Operators are flattened row-major into C^{h·h}. Ω_D^k is presented as
π(Ω^k)/π(δJ₀^{k−1}), which is isomorphic to Ω^k/J^k.
"""

import logging
import random
from dataclasses import dataclass
from functools import cached_property
from itertools import product

from ncgeo.config import settings
from ncgeo.infrastructure import exactlin as el
from ncgeo.infrastructure.algebras import (
    AlgebraElement,
    AlgebraMatrix,
    AlgebraMismatchError,
    FiniteAlgebra,
    NoInvolutionError,
    function_algebra,
    matrix_product,
    square_size,
)
from ncgeo.infrastructure.exactlin import ONE, Matrix, QuotientMap, Scalar, Subspace, Vector
from ncgeo.infrastructure.memo import shared_cache
from ncgeo.infrastructure.modules import (
    FiniteModule,
    ModuleKind,
    ModuleKindError,
    ProjectiveModule,
    TensorModule,
    hom_space,
    matrix_to_vector,
    tensor_modules,
    vector_to_matrix,
)
from ncgeo.services.universal_calculus import (
    DegreeBoundError,
    UniversalForm,
    random_monomial,
    uderivative,
    universal_forms,
    uproduct,
    ustar,
)
from ncgeo.services.universal_connections import grassmann_universal_connection

logger = logging.getLogger(__name__)


class SpectralTripleError(Exception):
    pass


class GaugeLinearityError(Exception):
    pass


@dataclass(frozen=True)
class ConnesCheck:
    ok: bool
    witness: dict | None = None


def _witness(lhs: Matrix, rhs: Matrix, **extra) -> dict | None:
    diff = el.first_difference(lhs, rhs)
    if diff is None:
        return None
    row, col, a, b = diff
    return {
        **extra,
        "row": row,
        "col": col,
        "lhs": el.format_scalar(a),
        "rhs": el.format_scalar(b),
    }


# --- spectral triples -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpectralTriple:
    algebra: FiniteAlgebra
    h_dim: int
    rep: tuple[Matrix, ...]
    D: Matrix
    grading: Matrix | None = None
    label: str = ""

    @classmethod
    def build(
        cls,
        A: FiniteAlgebra,
        rep,
        D: Matrix,
        grading: Matrix | None = None,
        label: str = "",
        allow_degenerate: bool = False,
    ) -> "SpectralTriple":
        """Validate and assemble a triple; ``rep`` lists the images of the basis elements."""
        if not A.has_involution:
            raise NoInvolutionError(f"{A.label} has no involution")
        rep = tuple(rep)
        if len(rep) != A.dim:
            raise SpectralTripleError(f"{len(rep)} representing matrices for dimension {A.dim}")
        h = D.shape[0]
        shapes = [M.shape for M in rep] + [D.shape]
        if grading is not None:
            shapes.append(grading.shape)
        if any(shape != (h, h) for shape in shapes):
            raise SpectralTripleError(f"operators must all be {h}×{h}, got {shapes}")
        triple = cls(A, h, rep, D, grading, label or f"triple[{A.label}]")
        violation = triple.violation()
        if violation is not None:
            raise SpectralTripleError(f"{triple.label}: {violation}")
        if not allow_degenerate and triple.is_degenerate:
            raise SpectralTripleError(f"{triple.label}: D commutes with the representation")
        logger.debug("Built spectral triple %s on C^%d", triple.label, h)
        return triple

    def rep_of(self, a: AlgebraElement | Vector) -> Matrix:
        coeffs = a.coeffs if isinstance(a, AlgebraElement) else a
        if isinstance(a, AlgebraElement) and a.algebra is not self.algebra:
            raise AlgebraMismatchError("element of another algebra")
        return el.linear_combination(coeffs, self.rep, self.h_dim, self.h_dim)

    def commutator(self, a: AlgebraElement | Vector) -> Matrix:
        """[D, rep(a)]."""
        R = self.rep_of(a)
        return el.sub(el.matmul(self.D, R), el.matmul(R, self.D))

    @cached_property
    def brackets(self) -> tuple[Matrix, ...]:
        return tuple(self.commutator(a) for a in self.algebra.basis())

    @property
    def is_degenerate(self) -> bool:
        return all(el.is_zero(B) for B in self.brackets)

    def violation(self) -> dict | None:
        A = self.algebra
        h = self.h_dim
        if not el.equal(self.rep_of(A.unit), el.identity(h)):
            return {"axiom": "unit"}
        for i in range(A.dim):
            for j in range(A.dim):
                lhs = el.matmul(self.rep[i], self.rep[j])
                rhs = self.rep_of(A.multiply(el.unit_vector(A.dim, i), el.unit_vector(A.dim, j)))
                witness = _witness(lhs, rhs, axiom="homomorphism", basis=(i, j))
                if witness is not None:
                    return witness
        for i in range(A.dim):
            star = self.rep_of(A.star_vector(el.unit_vector(A.dim, i)))
            witness = _witness(star, el.adjoint(self.rep[i]), axiom="involution", basis=i)
            if witness is not None:
                return witness
        witness = _witness(self.D, el.adjoint(self.D), axiom="self-adjoint D")
        if witness is not None:
            return witness
        G = self.grading
        if G is None:
            return None
        witness = _witness(el.matmul(G, G), el.identity(h), axiom="grading squares to 1")
        if witness is not None:
            return witness
        witness = _witness(
            el.matmul(G, self.D), el.scale(-ONE, el.matmul(self.D, G)), axiom="ΓD = −DΓ"
        )
        if witness is not None:
            return witness
        for i, R in enumerate(self.rep):
            witness = _witness(el.matmul(G, R), el.matmul(R, G), axiom="even rep", basis=i)
            if witness is not None:
                return witness
        return None

    def __repr__(self) -> str:
        return f"SpectralTriple({self.label}, h={self.h_dim})"


def finite_space_triple(
    D: Matrix, grading: Matrix | None = None, allow_degenerate: bool = False
) -> SpectralTriple:
    """Functions on N points acting diagonally on C^N."""
    N = D.shape[0]
    A = function_algebra(N)
    rep = [el.from_entries({(i, i): ONE}, N, N) for i in range(N)]
    return SpectralTriple.build(
        A, rep, D, grading, label=f"points:{N}", allow_degenerate=allow_degenerate
    )


def two_point_triple(m: Scalar | int = 1, allow_degenerate: bool = False) -> SpectralTriple:
    m = el.scalar(m)
    if not m and not allow_degenerate:
        raise SpectralTripleError("m = 0 gives D = 0: every commutator and every Ω_D^k vanish")
    D = el.from_entries({(0, 1): m, (1, 0): el.conj(m)}, 2, 2)
    grading = el.from_entries({(0, 0): ONE, (1, 1): -ONE}, 2, 2)
    return finite_space_triple(D, grading, allow_degenerate=allow_degenerate)


def path_triple() -> SpectralTriple:
    """Three points joined 1–3–2: e₁δe₂ is junk while δe₁δe₂ is not."""
    D = el.from_entries({(0, 2): ONE, (2, 0): ONE, (1, 2): ONE, (2, 1): ONE}, 3, 3)
    return finite_space_triple(D)


# --- the representation π -------------------------------------------------------------


def _check_degree(k: int) -> None:
    bound = settings.connes_degree_bound
    if k < 0 or k > bound:
        raise DegreeBoundError(f"operator forms of degree {k} outside the bound 0..{bound}")


@shared_cache
def pi_matrix(t: SpectralTriple, k: int) -> Matrix:
    """π on A^{⊗(k+1)}: column (i_0…i_k) is vec(rep(e_{i_0})[D,e_{i_1}]⋯[D,e_{i_k}])."""
    _check_degree(k)
    m = t.algebra.dim
    cols = []
    for indices in product(range(m), repeat=k + 1):
        op = t.rep[indices[0]]
        for i in indices[1:]:
            op = el.matmul(op, t.brackets[i])
        cols.append(matrix_to_vector(op))
    return el.from_columns(cols, t.h_dim * t.h_dim)


def pi_vector(t: SpectralTriple, w: UniversalForm) -> Vector:
    if w.algebra is not t.algebra:
        raise AlgebraMismatchError("form over another algebra")
    return el.apply(pi_matrix(t, w.degree), w.coeffs)


def pi_rep(t: SpectralTriple, w: UniversalForm) -> Matrix:
    return vector_to_matrix(pi_vector(t, w), t.h_dim, t.h_dim)


def operator_star(w: UniversalForm) -> UniversalForm:
    """The star with π(w)† = π(operator_star(w)).

    Relative to ``ustar`` this carries the extra sign (−1)^{k(k+1)/2}, which is plain
    reversal with conjugation of the factors.
    """
    k = w.degree
    return ustar(w).scaled(-ONE if (k * (k + 1) // 2) % 2 else ONE)


def _rng(label: str) -> random.Random:
    return random.Random(f"{settings.seed}:{label}")


def multiplicativity_check(
    t: SpectralTriple, label: str = "pi-product", samples: int | None = None
) -> ConnesCheck:
    """π(ww′) = π(w)π(w′) on random monomial pairs of total degree within the bound."""
    rng = _rng(label)
    samples = settings.property_samples if samples is None else samples
    bound = settings.connes_degree_bound
    for n in range(samples):
        k = rng.randint(0, bound)
        l = rng.randint(0, bound - k)  # noqa: E741
        w, w2 = random_monomial(t.algebra, k, rng), random_monomial(t.algebra, l, rng)
        lhs = pi_rep(t, uproduct(w, w2))
        rhs = el.matmul(pi_rep(t, w), pi_rep(t, w2))
        witness = _witness(lhs, rhs, sample=n, degrees=(k, l))
        if witness is not None:
            logger.warning("π is not multiplicative on %s: %s", t.label, witness)
            return ConnesCheck(False, witness)
    return ConnesCheck(True)


def adjoint_check(
    t: SpectralTriple, label: str = "pi-star", samples: int | None = None
) -> ConnesCheck:
    rng = _rng(label)
    samples = settings.property_samples if samples is None else samples
    for n in range(samples):
        k = rng.randint(0, settings.connes_degree_bound)
        w = random_monomial(t.algebra, k, rng)
        lhs = pi_rep(t, operator_star(w))
        rhs = el.adjoint(pi_rep(t, w))
        witness = _witness(lhs, rhs, sample=n, degree=k)
        if witness is not None:
            logger.warning("π does not intertwine the stars on %s: %s", t.label, witness)
            return ConnesCheck(False, witness)
    return ConnesCheck(True)


# --- junk forms and Ω_D ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ConnesDegree:
    """One degree of the calculus: forms, junk and the operator quotient."""

    triple: SpectralTriple
    degree: int
    forms: Subspace
    junk0: Subspace
    junk: Subspace
    image: Subspace
    junk_image: Subspace
    quotient: QuotientMap

    @property
    def dim(self) -> int:
        return self.quotient.dim

    def project_operator(self, op: Vector) -> Vector:
        """Class of a flattened operator lying in π(Ω^k)."""
        return self.quotient.project(self.image.coordinates(op))

    def project(self, w: UniversalForm) -> Vector:
        if w.degree != self.degree:
            raise el.DimensionMismatchError(f"degree-{w.degree} form in degree {self.degree}")
        return self.project_operator(pi_vector(self.triple, w))

    def operator(self, cls: Vector) -> Matrix:
        """Operator representative of a class."""
        op = self.image.from_coordinates(self.quotient.lift(cls))
        h = self.triple.h_dim
        return vector_to_matrix(op, h, h)

    def lift(self, cls: Vector) -> UniversalForm:
        """A universal form whose class is ``cls``."""
        op = self.image.from_coordinates(self.quotient.lift(cls))
        on_forms = el.matmul(pi_matrix(self.triple, self.degree), self.forms.embedding())
        coords = el.solve(on_forms, op)
        return UniversalForm(self.triple.algebra, self.degree, self.forms.from_coordinates(coords))

    @property
    def dimension_consistent(self) -> bool:
        """dim Ω^k − dim J^k agrees with the operator presentation."""
        return self.forms.dim - self.junk.dim == self.dim


@dataclass(frozen=True)
class JunkWitness:
    """φ with π(φ) = 0 and π(δφ) ≠ 0."""

    degree: int
    form: UniversalForm

    def as_dict(self) -> dict:
        terms = {
            "⊗".join(self.form.algebra.basis_names[i] for i in indices): el.format_scalar(c)
            for indices, c in self.form.terms()
        }
        return {"degree": self.degree, "terms": terms}


@dataclass(frozen=True, eq=False)
class ConnesCalculus:
    triple: SpectralTriple
    degrees: tuple[ConnesDegree, ...]

    @property
    def k_max(self) -> int:
        return len(self.degrees) - 1

    def __getitem__(self, k: int) -> ConnesDegree:
        return self.degrees[k]

    def dims(self) -> list[int]:
        return [d.dim for d in self.degrees]

    def d_matrix(self, k: int) -> Matrix:
        """d[φ] = [δφ] from Ω_D^k to Ω_D^{k+1}."""
        if not 0 <= k < self.k_max:
            raise DegreeBoundError(f"d out of degree {k} needs k < {self.k_max}")
        source, target = self.degrees[k], self.degrees[k + 1]
        cols = [
            target.project(uderivative(source.lift(el.unit_vector(source.dim, c))))
            for c in range(source.dim)
        ]
        return el.from_columns(cols, target.dim)

    def well_defined_check(self) -> ConnesCheck:
        """δ maps J^k into J^{k+1}, checked on a spanning set of each J^k."""
        A = self.triple.algebra
        for k in range(self.k_max):
            target = self.degrees[k + 1]
            for n, v in enumerate(self.degrees[k].junk.vectors()):
                image = uderivative(UniversalForm(A, k, v))
                if not target.junk.contains(image.coeffs) or any(target.project(image)):
                    return ConnesCheck(False, {"degree": k, "junk_basis": n})
        return ConnesCheck(True)

    def d_squared_check(self) -> ConnesCheck:
        for k in range(self.k_max - 1):
            composite = el.matmul(self.d_matrix(k + 1), self.d_matrix(k))
            if not el.is_zero(composite):
                return ConnesCheck(False, {"degree": k})
        return ConnesCheck(True)

    def ideal_check(self, label: str = "junk-ideal", samples: int | None = None) -> ConnesCheck:
        """J·Ω and Ω·J stay in J on random junk elements and monomials."""
        rng = _rng(label)
        samples = settings.property_samples if samples is None else samples
        A = self.triple.algebra
        pools = [(k, d.junk.vectors()) for k, d in enumerate(self.degrees) if d.junk.dim]
        if not pools:
            return ConnesCheck(True, {"junk": "zero up to the degree bound"})
        for n in range(samples):
            k, vectors = rng.choice(pools)
            l = rng.randint(0, self.k_max - k)  # noqa: E741
            j = UniversalForm(A, k, rng.choice(vectors))
            w = random_monomial(A, l, rng)
            target = self.degrees[k + l].junk
            for side, product_form in (("right", uproduct(j, w)), ("left", uproduct(w, j))):
                if not target.contains(product_form.coeffs):
                    return ConnesCheck(False, {"sample": n, "side": side, "degrees": (k, l)})
        return ConnesCheck(True)

    def junk_witness(self) -> JunkWitness | None:
        """Search the basis of each J₀^k below the top degree; ``None`` proves absence."""
        for k in range(self.k_max):
            for v in self.degrees[k].junk0.vectors():
                phi = UniversalForm(self.triple.algebra, k, v)
                if any(pi_vector(self.triple, uderivative(phi))):
                    return JunkWitness(k, phi)
        return None


def _span(vectors: list[Vector], ambient_dim: int) -> Subspace:
    return Subspace.span(vectors, ambient_dim) if vectors else Subspace.zero(ambient_dim)


def _delta_span(A: FiniteAlgebra, space: Subspace, k: int) -> list[Vector]:
    return [uderivative(UniversalForm(A, k, v)).coeffs for v in space.vectors()]


def _build_degree(t: SpectralTriple, k: int, previous: ConnesDegree | None) -> ConnesDegree:
    A = t.algebra
    h2 = t.h_dim * t.h_dim
    forms = universal_forms(A, k)
    pi = pi_matrix(t, k)
    on_forms = el.matmul(pi, forms.embedding())
    kernel = el.kernel(on_forms)
    junk0 = _span(
        [forms.from_coordinates(v) for v in kernel.vectors()], forms.ambient_dim
    )
    image = el.image(on_forms)
    if previous is None:
        junk = junk0
        junk_image = Subspace.zero(h2)
    else:
        lifted = _delta_span(A, previous.junk0, k - 1)
        junk = junk0.sum(_span(lifted, forms.ambient_dim))
        junk_image = _span([el.apply(pi, v) for v in lifted], h2)
    relations = _span([image.coordinates(v) for v in junk_image.vectors()], image.dim)
    degree = ConnesDegree(
        t, k, forms, junk0, junk, image, junk_image, el.quotient(image.dim, relations)
    )
    logger.info(
        "Ω_D^%d of %s: forms %d, J₀ %d, J %d, quotient %d",
        k, t.label, forms.dim, junk0.dim, junk.dim, degree.dim,
    )
    return degree


@shared_cache
def junk_and_omega_D(t: SpectralTriple, k_max: int | None = None) -> ConnesCalculus:
    k_max = settings.connes_degree_bound if k_max is None else k_max
    _check_degree(k_max)
    degrees: list[ConnesDegree] = []
    for k in range(k_max + 1):
        degrees.append(_build_degree(t, k, degrees[-1] if degrees else None))
    return ConnesCalculus(t, tuple(degrees))


@shared_cache
def omega_d_one_module(t: SpectralTriple) -> FiniteModule:
    """Ω_D¹ as a bimodule: left and right multiplication of operators by rep(a).

    The centre of a commutative algebra does not act centrally here: e₁·[D, b] differs
    from [D, b]·e₁, so the module is built with ``central=False``.
    """
    degree = junk_and_omega_D(t, 1)[1]
    h = t.h_dim
    Ih = el.identity(h)
    left = tuple(
        degree.quotient.induce(el.restrict(el.kron(R, Ih), degree.image)) for R in t.rep
    )
    right = tuple(
        degree.quotient.induce(el.restrict(el.kron(Ih, el.transpose(R)), degree.image))
        for R in t.rep
    )
    return FiniteModule(
        t.algebra,
        ModuleKind.BIMODULE,
        degree.dim,
        left,
        right,
        label=f"ΩD1[{t.label}]",
        central=False,
    ).validate()


# --- connections on projective modules ------------------------------------------------


@dataclass(frozen=True, eq=False)
class OperatorConnection:
    """A right connection ∇: P → P⊗Ω_D¹ as a matrix on module coordinates."""

    triple: SpectralTriple
    module: FiniteModule
    tensor: TensorModule
    map: Matrix
    label: str = ""

    def __call__(self, s: Vector) -> Vector:
        return el.apply(self.map, s)


def _tensor(t: SpectralTriple, P: FiniteModule) -> TensorModule:
    if P.algebra is not t.algebra:
        raise AlgebraMismatchError("module over another algebra")
    if P.kind is not ModuleKind.RIGHT:
        raise ModuleKindError(f"connections into P⊗Ω_D¹ need a right module, got {P.kind.name}")
    return tensor_modules(P, omega_d_one_module(t))


def _bracket_map(t: SpectralTriple, T: TensorModule, a: AlgebraElement) -> Matrix:
    """s ↦ s⊗[D, rep(a)]."""
    degree = junk_and_omega_D(t, 1)[1]
    cls = degree.project_operator(matrix_to_vector(t.commutator(a)))
    P = T.left_factor
    return el.from_columns([T.element(P.basis_vector(b), cls) for b in range(P.dim)], T.dim)


def grassmann_connection(t: SpectralTriple, P: ProjectiveModule) -> OperatorConnection:
    """∇₀ = (Id⊗π)∘p∘δ on P = p·A^N."""
    T = _tensor(t, P)
    universal = grassmann_universal_connection(P)
    m = t.algebra.dim
    degree = junk_and_omega_D(t, 1)[1]
    classes = [degree.project_operator(matrix_to_vector(B)) for B in t.brackets]
    cols = [
        T.element(P.basis_vector(v), classes[i]) for v in range(P.dim) for i in range(m)
    ]
    id_pi = el.from_columns(cols, T.dim)
    nabla = OperatorConnection(t, P, T, el.matmul(id_pi, universal.map), f"∇0[{P.label}]")
    logger.debug("Grassmann connection on %s with values in a %d-dimensional tensor", P, T.dim)
    return nabla


def leibniz_check(nabla: OperatorConnection) -> ConnesCheck:
    """∇(sa) = ∇(s)a + s⊗[D, a] on module and algebra bases."""
    P, T = nabla.module, nabla.tensor
    for i, a in enumerate(nabla.triple.algebra.basis()):
        lhs = el.matmul(nabla.map, P.right_matrix(a))
        rhs = el.add(
            el.matmul(T.right_matrix(a), nabla.map), _bracket_map(nabla.triple, T, a)
        )
        witness = _witness(lhs, rhs, algebra_basis=i)
        if witness is not None:
            logger.warning("%s breaks the right Leibniz rule: %s", nabla.label, witness)
            return ConnesCheck(False, witness)
    return ConnesCheck(True)


def linearity_defect(nabla: OperatorConnection, sigma: Matrix) -> dict | None:
    """First basis element a with σ(sa) ≠ σ(s)a, or ``None`` for a module map."""
    P, T = nabla.module, nabla.tensor
    if sigma.shape != (T.dim, P.dim):
        return {"shape": sigma.shape, "expected": (T.dim, P.dim)}
    for i, a in enumerate(nabla.triple.algebra.basis()):
        witness = _witness(
            el.matmul(sigma, P.right_matrix(a)), el.matmul(T.right_matrix(a), sigma),
            algebra_basis=i,
        )
        if witness is not None:
            return witness
    return None


def add_gauge(nabla: OperatorConnection, sigma: Matrix) -> OperatorConnection:
    """∇ + σ for a gauge field σ ∈ Hom_A(P, P⊗Ω_D¹)."""
    defect = linearity_defect(nabla, sigma)
    if defect is not None:
        raise GaugeLinearityError(f"σ is not right A-linear: {defect}")
    return OperatorConnection(
        nabla.triple, nabla.module, nabla.tensor, el.add(nabla.map, sigma), f"{nabla.label}+σ"
    )


def gauge_field_space(nabla: OperatorConnection) -> Subspace:
    P, T = nabla.module, nabla.tensor
    pairs = [(T.right_matrix(a), P.right_matrix(a)) for a in nabla.triple.algebra.basis()]
    return hom_space(pairs, T.dim, P.dim)


def gauge_field_basis(nabla: OperatorConnection) -> list[Matrix]:
    rows, cols = nabla.tensor.dim, nabla.module.dim
    return [vector_to_matrix(v, rows, cols) for v in gauge_field_space(nabla).vectors()]


def difference_check(first: OperatorConnection, second: OperatorConnection) -> ConnesCheck:
    """The difference of two connections on one module is a gauge field."""
    if first.module is not second.module:
        raise ModuleKindError("connections on different modules")
    defect = linearity_defect(first, el.sub(first.map, second.map))
    return ConnesCheck(defect is None, defect)


def conjugate_idempotent(p: AlgebraMatrix, g: AlgebraMatrix, g_inv: AlgebraMatrix) -> AlgebraMatrix:
    """g·p·g⁻¹, after checking that ``g_inv`` inverts ``g``."""
    N = square_size(p)
    if square_size(g) != N or square_size(g_inv) != N:
        raise el.DimensionMismatchError("conjugating matrices must match the idempotent")
    A = p[0][0].algebra
    identity = tuple(tuple(A.one if v == w else A.zero for w in range(N)) for v in range(N))
    if matrix_product(g, g_inv) != identity or matrix_product(g_inv, g) != identity:
        raise ValueError("g_inv is not the inverse of g")
    return matrix_product(matrix_product(g, p), g_inv)

