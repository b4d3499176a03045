"""The universal differential calculus of a finite algebra.

Degree-k forms live in A^{⊗(k+1)} with the flat index Σ_j i_j m^{k-j} of the
basis tensor e_{i_0}⊗…⊗e_{i_k}. Products contract neighbouring factors, and the
differential is the bar differential, inserting the unit with alternating signs.
"""

import logging
import random
from dataclasses import dataclass
from itertools import product

from ncgeo.config import settings
from ncgeo.infrastructure import exactlin as el
from ncgeo.infrastructure.algebras import AlgebraElement, AlgebraMismatchError, FiniteAlgebra
from ncgeo.infrastructure.exactlin import ONE, ZERO, Scalar, Subspace, Vector
from ncgeo.infrastructure.memo import shared_cache

logger = logging.getLogger(__name__)


class DegreeBoundError(Exception):
    pass


@dataclass(frozen=True, eq=False)
class UniversalForm:
    algebra: FiniteAlgebra
    degree: int
    coeffs: Vector

    def __post_init__(self) -> None:
        expected = self.algebra.dim ** (self.degree + 1)
        if len(self.coeffs) != expected:
            raise el.DimensionMismatchError(
                f"degree-{self.degree} form needs {expected} coefficients, got {len(self.coeffs)}"
            )

    def _same(self, other: "UniversalForm") -> None:
        if other.algebra is not self.algebra:
            raise AlgebraMismatchError("universal forms over different algebras")
        if other.degree != self.degree:
            raise el.DimensionMismatchError(f"degrees {self.degree} and {other.degree} differ")

    def __add__(self, other: "UniversalForm") -> "UniversalForm":
        self._same(other)
        return UniversalForm(self.algebra, self.degree, el.add_vectors(self.coeffs, other.coeffs))

    def __sub__(self, other: "UniversalForm") -> "UniversalForm":
        self._same(other)
        return UniversalForm(self.algebra, self.degree, el.sub_vectors(self.coeffs, other.coeffs))

    def __neg__(self) -> "UniversalForm":
        return UniversalForm(self.algebra, self.degree, tuple(-x for x in self.coeffs))

    def scaled(self, c) -> "UniversalForm":
        return UniversalForm(self.algebra, self.degree, el.scale_vector(el.scalar(c), self.coeffs))

    def __mul__(self, other: "UniversalForm") -> "UniversalForm":
        return uproduct(self, other)

    def __bool__(self) -> bool:
        return any(self.coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, UniversalForm):
            return NotImplemented
        return (
            other.algebra is self.algebra
            and other.degree == self.degree
            and other.coeffs == self.coeffs
        )

    def __hash__(self) -> int:
        return hash((id(self.algebra), self.degree, self.coeffs))

    def terms(self):
        """Nonzero coefficients with their factor indices (i_0, …, i_k)."""
        m = self.algebra.dim
        for flat, c in enumerate(self.coeffs):
            if c:
                yield _decode(flat, m, self.degree + 1), c

    def in_monomial_span(self) -> bool:
        return universal_forms(self.algebra, self.degree).contains(self.coeffs)


def _decode(flat: int, m: int, length: int) -> tuple[int, ...]:
    out = []
    for _ in range(length):
        flat, r = divmod(flat, m)
        out.append(r)
    return tuple(reversed(out))


def _encode(indices, m: int) -> int:
    flat = 0
    for i in indices:
        flat = flat * m + i
    return flat


def zero_form(A: FiniteAlgebra, degree: int) -> UniversalForm:
    return UniversalForm(A, degree, el.zero_vector(A.dim ** (degree + 1)))


def as_form(a: AlgebraElement) -> UniversalForm:
    return UniversalForm(a.algebra, 0, a.coeffs)


def uproduct(w: UniversalForm, w2: UniversalForm) -> UniversalForm:
    """Multiply the last factor of w into the first factor of w2."""
    if w.algebra is not w2.algebra:
        raise AlgebraMismatchError("universal forms over different algebras")
    A = w.algebra
    m = A.dim
    tail = m**w2.degree
    out = [ZERO] * (m ** (w.degree + w2.degree + 1))
    right = [(divmod(flat, tail), c) for flat, c in enumerate(w2.coeffs) if c]
    for flat, x in enumerate(w.coeffs):
        if not x:
            continue
        prefix, last = divmod(flat, m)
        for (first, suffix), y in right:
            xy = x * y
            for k, c in A.table[last][first].items():
                out[(prefix * m + k) * tail + suffix] += xy * c
    return UniversalForm(A, w.degree + w2.degree, tuple(out))


def bimodule_action(b: AlgebraElement, w: UniversalForm, c: AlgebraElement) -> UniversalForm:
    return uproduct(uproduct(as_form(b), w), as_form(c))


def _insert_unit(w: UniversalForm, position: int) -> Vector:
    A = w.algebra
    m = A.dim
    k = w.degree
    tail = m ** (k + 1 - position)
    unit_terms = [(u, c) for u, c in enumerate(A.unit) if c]
    out = [ZERO] * (m ** (k + 2))
    for flat, x in enumerate(w.coeffs):
        if not x:
            continue
        prefix, suffix = divmod(flat, tail)
        for u, c in unit_terms:
            out[(prefix * m + u) * tail + suffix] += x * c
    return tuple(out)


def uderivative(w: UniversalForm) -> UniversalForm:
    """δ(x_0⊗…⊗x_k) = Σ_i (−1)^i x_0⊗…⊗x_{i−1}⊗1⊗x_i⊗…⊗x_k."""
    total = el.zero_vector(w.algebra.dim ** (w.degree + 2))
    for position in range(w.degree + 2):
        inserted = _insert_unit(w, position)
        if position % 2:
            total = el.sub_vectors(total, inserted)
        else:
            total = el.add_vectors(total, inserted)
    return UniversalForm(w.algebra, w.degree + 1, total)


def udelta(a: AlgebraElement) -> UniversalForm:
    """δa = 1⊗a − a⊗1."""
    return uderivative(as_form(a))


def monomial(a0: AlgebraElement, rest: list[AlgebraElement]) -> UniversalForm:
    """a_0 δa_1 ⋯ δa_k."""
    out = as_form(a0)
    for a in rest:
        out = uproduct(out, udelta(a))
    return out


def ustar(w: UniversalForm) -> UniversalForm:
    """(x_0⊗…⊗x_k)* = (−1)^{k(k+1)/2} x_k*⊗…⊗x_0*."""
    A = w.algebra
    m = A.dim
    stars = [
        [(j, c) for j, c in enumerate(A.star_vector(el.unit_vector(m, i))) if c] for i in range(m)
    ]
    sign = -ONE if (w.degree * (w.degree + 1) // 2) % 2 else ONE
    out = [ZERO] * len(w.coeffs)
    for indices, c in w.terms():
        cc = sign * el.conj(c)
        for combo in product(*(stars[i] for i in reversed(indices))):
            value = cc
            for _, s in combo:
                value *= s
            out[_encode([j for j, _ in combo], m)] += value
    return UniversalForm(A, w.degree, tuple(out))


def _check_degree(k: int, bound: int | None) -> int:
    bound = settings.universal_max_degree if bound is None else bound
    if k < 0 or k > bound:
        raise DegreeBoundError(f"degree {k} outside the configured bound 0..{bound}")
    return bound


@shared_cache
def _forms(A: FiniteAlgebra, k: int) -> Subspace:
    m = A.dim
    basis = A.basis()
    if k == 0:
        return Subspace.full(m)
    vectors = [
        monomial(basis[idx[0]], [basis[i] for i in idx[1:]]).coeffs
        for idx in product(range(m), repeat=k + 1)
    ]
    space = Subspace.span(vectors, m ** (k + 1))
    logger.info("Universal forms of degree %d over %s: dimension %d", k, A.label, space.dim)
    return space


def universal_forms(A: FiniteAlgebra, k: int, max_degree: int | None = None) -> Subspace:
    """Span of the monomials a_0δa_1⋯δa_k inside A^{⊗(k+1)}."""
    _check_degree(k, max_degree)
    return _forms(A, k)


def universal_one_forms(A: FiniteAlgebra) -> Subspace:
    """ker μ: A⊗A → A."""
    return el.kernel(A.multiplication_matrix)


def left_closure(generators: list[UniversalForm]) -> Subspace:
    """Left submodule generated by the given forms of one degree."""
    A = generators[0].algebra
    vectors = [
        uproduct(as_form(a), g).coeffs for g in generators for a in A.basis()
    ]
    return Subspace.span(vectors, len(generators[0].coeffs))


def noncentral_witness(A: FiniteAlgebra) -> tuple[int, int] | None:
    """Basis pair (a, b) with b·δa ≠ δa·b, or ``None`` if Ω¹ is central on the basis."""
    basis = A.basis()
    for i, a in enumerate(basis):
        da = udelta(a)
        for j, b in enumerate(basis):
            if uproduct(as_form(b), da) != uproduct(da, as_form(b)):
                return i, j
    return None


def scalar_coefficient(w: UniversalForm, indices: tuple[int, ...]) -> Scalar:
    return w.coeffs[_encode(indices, w.algebra.dim)]


def random_element(A: FiniteAlgebra, rng: random.Random, spread: int = 2) -> AlgebraElement:
    return A.element([el.scalar(rng.randint(-spread, spread)) for _ in range(A.dim)])


def random_monomial(A: FiniteAlgebra, k: int, rng: random.Random) -> UniversalForm:
    """a_0δa_1⋯δa_k with small random integer coefficients."""
    return monomial(random_element(A, rng), [random_element(A, rng) for _ in range(k)])
