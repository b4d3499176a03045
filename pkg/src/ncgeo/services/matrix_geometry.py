"""Derivation-based geometry of M_n.

The frame is u_r = ad ε_r for the anti-Hermitian basis ε_r of su(n), with
[ε_r, ε_q] = c^s_rq ε_s, and θ^r is the dual frame θ^r(u_q) = δ^r_q·1.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations

from ncgeo.config import settings
from ncgeo.infrastructure import exactlin as el
from ncgeo.infrastructure.algebras import AlgebraElement, FiniteAlgebra, matrix_algebra
from ncgeo.infrastructure.derivations import SuBasis, inner_derivation, su_basis
from ncgeo.infrastructure.exactlin import ONE, ZERO, Scalar
from ncgeo.infrastructure.memo import shared_cache
from ncgeo.services.ce_calculus import (
    CEForm,
    DerivationFrame,
    ce_d,
    ce_one_forms_module,
    exterior_derivative,
    theta,
    wedge,
    zero_form,
)
from ncgeo.services.connections import (
    DVConnection,
    dv_check,
    linear_connection_from_omega,
    torsion_table,
)

logger = logging.getLogger(__name__)


class MatrixSizeError(Exception):
    pass


@dataclass(frozen=True, eq=False)
class ThetaFrame:
    n: int
    basis: SuBasis
    frame: DerivationFrame
    thetas: tuple[CEForm, ...]

    @property
    def algebra(self) -> FiniteAlgebra:
        return self.basis.algebra

    @property
    def size(self) -> int:
        return self.basis.size

    def c(self, s: int, r: int, q: int) -> Scalar:
        """c^s_rq."""
        return self.basis.constant(s, r, q)

    @property
    def epsilons(self) -> tuple[AlgebraElement, ...]:
        return self.basis.elements


@shared_cache
def theta_frame(n: int) -> ThetaFrame:
    if n < 2:
        raise MatrixSizeError(f"matrix geometry needs n >= 2, got {n}")
    if n >= 4 and not settings.allow_n4:
        raise MatrixSizeError(f"n = {n} is disabled; set NCGEO_ALLOW_N4=1 to enable it")
    basis = su_basis(n)
    A = matrix_algebra(n)
    derivations = tuple(inner_derivation(e) for e in basis.elements)
    frame = DerivationFrame(A, derivations, tuple(f"u_{x}" for x in basis.names))
    thetas = tuple(theta(frame, r) for r in range(frame.size))
    logger.info("Theta frame over M_%d with %d elements", n, frame.size)
    return ThetaFrame(n, basis, frame, thetas)


@dataclass(frozen=True)
class GeometryCheck:
    ok: bool
    witness: dict | None = None
    values: dict = field(default_factory=dict)


def structure_check(tf: ThetaFrame) -> GeometryCheck:
    """Frame brackets reproduce c^s_rq; c is antisymmetric and satisfies Jacobi."""
    f = tf.size
    for r in range(f):
        for q in range(f):
            for s in range(f):
                if tf.frame.bracket_constant(s, r, q) != tf.c(s, r, q):
                    witness = {"relation": "frame bracket", "r": r, "q": q, "s": s}
                    return GeometryCheck(False, witness)
                if tf.c(s, r, q) != -tf.c(s, q, r):
                    witness = {"relation": "antisymmetry", "r": r, "q": q, "s": s}
                    return GeometryCheck(False, witness)
    for a, b, d in combinations(range(f), 3):
        for t in range(f):
            total = ZERO
            for s in range(f):
                total += (
                    tf.c(s, a, b) * tf.c(t, s, d)
                    + tf.c(s, b, d) * tf.c(t, s, a)
                    + tf.c(s, d, a) * tf.c(t, s, b)
                )
            if total:
                return GeometryCheck(False, {"relation": "Jacobi", "indices": [a, b, d], "t": t})
    return GeometryCheck(True)


def frame_checks(tf: ThetaFrame) -> GeometryCheck:
    """θ^r(u_q) = δ^r_q, θ^r central, θ^r∧θ^q = −θ^q∧θ^r, and Ω¹ free of rank n²−1."""
    A = tf.algebra
    for r, th in enumerate(tf.thetas):
        for q in range(tf.size):
            expected = A.one if r == q else A.zero
            if th.evaluate((q,)) != expected:
                return GeometryCheck(False, {"relation": "duality", "r": r, "q": q})
        for i, a in enumerate(A.basis()):
            if th.left_multiply(a) != th.right_multiply(a):
                return GeometryCheck(False, {"relation": "centrality", "r": r, "a": i})
    for r in range(tf.size):
        for q in range(r, tf.size):
            forward = wedge(tf.thetas[r], tf.thetas[q])
            if forward != -wedge(tf.thetas[q], tf.thetas[r]):
                return GeometryCheck(False, {"relation": "anticommutation", "r": r, "q": q})
    forms = ce_one_forms_module(tf.frame)
    expected_dim = tf.size * A.dim
    ok = forms.dim == expected_dim
    return GeometryCheck(
        ok,
        None if ok else {"relation": "free rank", "dimension": forms.dim},
        {"dim_one_forms": forms.dim, "rank": tf.size},
    )


def _sum_forms(forms: list[CEForm], frame: DerivationFrame, degree: int) -> CEForm:
    total = zero_form(frame, degree)
    for phi in forms:
        total = total + phi
    return total


def depsilon_check(tf: ThetaFrame) -> GeometryCheck:
    """dε_r = Σ c^s_qr ε_s θ^q."""
    f = tf.size
    for r, eps in enumerate(tf.epsilons):
        lhs = exterior_derivative(eps, tf.frame)
        terms = [
            tf.thetas[q].left_multiply(tf.epsilons[s]).scaled(tf.c(s, q, r))
            for q in range(f)
            for s in range(f)
            if tf.c(s, q, r)
        ]
        rhs = _sum_forms(terms, tf.frame, 1)
        if lhs != rhs:
            q = next(q for q in range(f) if lhs.evaluate((q,)) != rhs.evaluate((q,)))
            return GeometryCheck(False, {"r": r, "q": q})
    return GeometryCheck(True)


def maurer_cartan_check(tf: ThetaFrame) -> GeometryCheck:
    """dθ^r = −½ c^r_qs θ^q∧θ^s."""
    f = tf.size
    half = el.scalar("-1/2")
    for r in range(f):
        lhs = ce_d(tf.thetas[r])
        terms = [
            wedge(tf.thetas[q], tf.thetas[s]).scaled(half * tf.c(r, q, s))
            for q in range(f)
            for s in range(f)
            if tf.c(r, q, s)
        ]
        rhs = _sum_forms(terms, tf.frame, 2)
        if lhs != rhs:
            a, b = next(
                T for T in combinations(range(f), 2) if lhs.evaluate(T) != rhs.evaluate(T)
            )
            return GeometryCheck(False, {"r": r, "a": a, "b": b})
    return GeometryCheck(True)


def theta_element(tf: ThetaFrame) -> CEForm:
    """θ = Σ ε_r θ^r, so θ(u_q) = ε_q."""
    terms = [th.left_multiply(eps) for th, eps in zip(tf.thetas, tf.epsilons)]
    return _sum_forms(terms, tf.frame, 1)


def theta_element_check(tf: ThetaFrame) -> GeometryCheck:
    """da = s·(aθ − θa) with one sign s for every basis element a."""
    th = theta_element(tf)
    sign = None
    for i, a in enumerate(tf.algebra.basis()):
        da = exterior_derivative(a, tf.frame)
        commutator = th.left_multiply(a) - th.right_multiply(a)
        if not commutator and not da:
            continue
        if da == commutator:
            found = 1
        elif da == -commutator:
            found = -1
        else:
            return GeometryCheck(False, {"a": i, "reason": "not proportional"})
        if sign is not None and found != sign:
            return GeometryCheck(False, {"a": i, "reason": "sign changes", "sign": sign})
        sign = found
    logger.debug("da = s(aθ − θa) over M_%d with s = %s", tf.n, sign)
    return GeometryCheck(sign is not None, None, {"s": sign})


# --- linear connections on the 1-forms ------------------------------------------------------


def omega_table(tf: ThetaFrame, values) -> list[list[list[AlgebraElement]]]:
    """omega[p][r][q] = values(p, r, q)."""
    f = tf.size
    return [[[values(p, r, q) for q in range(f)] for r in range(f)] for p in range(f)]


def scalar_omega(tf: ThetaFrame, coefficient) -> list[list[list[AlgebraElement]]]:
    A = tf.algebra
    return omega_table(tf, lambda p, r, q: A.scalar_element(coefficient(p, r, q)))


def linear_connection(tf: ThetaFrame, omega) -> DVConnection:
    return linear_connection_from_omega(ce_one_forms_module(tf.frame), omega)


@dataclass(frozen=True)
class ConnectionSpace:
    dimension: int
    expected: int
    scalar_only: bool
    mode: str


def _commutant_system(A: FiniteAlgebra) -> el.Matrix:
    """ω ↦ ([b, ω])_b over the algebra basis."""
    blocks = [el.sub(A.left_matrix(b), A.right_matrix(b)) for b in A.basis()]
    return el.vstack(blocks, A.dim)


def _full_system(tf: ThetaFrame) -> el.Matrix:
    """Right-Leibniz defect of the ω-part of ∇_r, linear in every entry of every ω^p_rq.

    Unknown (p, r, q, i) is the e_i coefficient of ω^p_rq; rows are grouped by r,
    then by the algebra basis element b acting on the right.
    """
    A = tf.algebra
    m, f = A.dim, tf.size
    n = m * f
    rights = [el.block_diag(*([A.right_matrix(b)] * f)) for b in A.basis()]
    block = len(rights) * n * n
    entries: dict[tuple[int, int], Scalar] = {}
    col = 0
    for p in range(f):
        for r in range(f):
            for q in range(f):
                for e in A.basis():
                    W = el.from_entries(
                        {
                            (q * m + a, p * m + b): value
                            for (a, b), value in A.right_matrix(e).to_dok().items()
                        },
                        n,
                        n,
                    )
                    for t, R in enumerate(rights):
                        D = el.sub(el.matmul(W, R), el.matmul(R, W))
                        base = r * block + t * n * n
                        for (x, y), value in D.to_dok().items():
                            entries[(base + x * n + y, col)] = value
                    col += 1
    return el.from_entries(entries, f * block, col)


def linear_connection_space(tf: ThetaFrame, mode: str | None = None) -> ConnectionSpace:
    """Dimension of {ω ∈ M_n : ∇_r(θ^p) = ω^p_rq θ^q is a connection on the bimodule Ω¹}.

    ``mode="full"`` solves the whole system in every entry of every ω^p_rq; the
    default for n > 2 is ``"block"``, which solves the single block [b, ω] = 0 the
    system decouples into.
    """
    mode = mode or ("full" if tf.n == 2 else "block")
    A = tf.algebra
    f = tf.size
    commutant = el.kernel(_commutant_system(A))
    scalar_only = commutant == el.Subspace.span([A.unit], A.dim)
    if mode == "full":
        solutions = el.kernel(_full_system(tf))
        dimension = solutions.dim
        scalars = [el.kron_vectors(el.unit_vector(f**3, j), A.unit) for j in range(f**3)]
        scalar_only = dimension == f**3 and all(solutions.contains(v) for v in scalars)
    elif mode == "block":
        dimension = commutant.dim * f**3
    else:
        raise ValueError(f"unknown solve mode {mode!r}")
    logger.info("Linear connections on Ω1[M_%d]: dimension %d (%s solve)", tf.n, dimension, mode)
    return ConnectionSpace(dimension, f**3, scalar_only, mode)


@dataclass(frozen=True)
class TorsionFreeSolution:
    """Scalar ω with ω^p_rq − ω^p_qr = −c^p_rq, as particular solution plus kernel."""

    dimension: int
    particular: tuple[Scalar, ...]
    lam: Scalar
    verified: bool


def _omega_index(f: int, p: int, r: int, q: int) -> int:
    return (p * f + r) * f + q


def torsion_free_solver(tf: ThetaFrame) -> TorsionFreeSolution:
    f = tf.size
    rows, rhs = [], []
    for p in range(f):
        for a, b in combinations(range(f), 2):
            row = {_omega_index(f, p, a, b): ONE, _omega_index(f, p, b, a): -ONE}
            rows.append(tuple(row.get(j, ZERO) for j in range(f**3)))
            rhs.append(-tf.c(p, a, b))
    system = el.from_rows(rows, f**3)
    particular = el.solve(system, tuple(rhs))
    if particular is None:
        raise ArithmeticError("torsion-free system is inconsistent")
    dimension = el.kernel(system).dim

    # ω = λc: each equation reads λ(c^p_ab − c^p_ba) = −c^p_ab
    antisymmetrised = tuple(
        tf.c(p, a, b) - tf.c(p, b, a) for p in range(f) for a, b in combinations(range(f), 2)
    )
    lam_vector = el.solve(el.from_columns([antisymmetrised], len(rhs)), tuple(rhs))
    if lam_vector is None:
        raise ArithmeticError("no ad-proportional torsion-free connection")
    lam = lam_vector[0]

    nabla = linear_connection(tf, scalar_omega(tf, lambda p, r, q: lam * tf.c(p, r, q)))
    table = torsion_table(nabla, list(tf.thetas))
    verified = dv_check(nabla).ok and not any(table.values())
    logger.info(
        "Torsion-free connections over M_%d: dimension %d, λ = %s",
        tf.n, dimension, el.format_scalar(lam),
    )
    return TorsionFreeSolution(dimension, particular, lam, verified)


def flat_torsion_check(tf: ThetaFrame) -> GeometryCheck:
    """The ω = 0 connection has (Tθ^p)(u_r, u_q) = −c^p_rq·1."""
    A = tf.algebra
    nabla = linear_connection(tf, omega_table(tf, lambda p, r, q: A.zero))
    for (p, r, q), value in torsion_table(nabla, list(tf.thetas)).items():
        if value != A.scalar_element(-tf.c(p, r, q)):
            return GeometryCheck(False, {"p": p, "r": r, "q": q})
    return GeometryCheck(True)
