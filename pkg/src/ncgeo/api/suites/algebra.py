import logging

from ncgeo.api.router import CheckContext, Outcome, SuiteRouter, UsageError
from ncgeo.api.schemas import SuiteName, SuiteParams
from ncgeo.infrastructure import exactlin as el
from ncgeo.infrastructure.algebras import (
    FiniteAlgebra,
    algebra_from_name,
    algebra_matrix,
    assemble_blocks,
    centre_basis,
    direct_sum_algebra,
    function_algebra,
    idempotent_check,
    matrix_algebra,
    truncated_polynomial_algebra,
)
from ncgeo.infrastructure.derivations import (
    derivation_basis,
    derivation_involution,
    derivation_subspace,
    inner_derivation,
    lie_bracket,
    su_basis,
)
from ncgeo.infrastructure.modules import (
    ModuleKind,
    double_dual_map,
    dual_module,
    free_module,
    projective_from_idempotent,
    tensor_modules,
)
from ncgeo.services.ce_calculus import centre_is_stable

logger = logging.getLogger(__name__)

router = SuiteRouter(
    SuiteName.ALGEBRA,
    sections="§2 algebras, centres, derivations and module types; §8 su(n) basis",
    parameters={
        "n": "matrix size for M_n (default 2)",
        "N": "points / truncation order for the commutative algebras (default 3)",
        "algebra": "extra algebra to validate, matrix:n | functions:N | trunc-poly:N",
    },
)


@router.setup
def fixtures(params: SuiteParams) -> dict:
    n = params.n or 2
    N = params.N or 3
    algebras = [matrix_algebra(n), function_algebra(N), truncated_polynomial_algebra(N)]
    if params.algebra:
        try:
            algebras.append(algebra_from_name(params.algebra))
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    return {"n": n, "N": N, "algebras": algebras}


def _algebras(ctx: CheckContext) -> list[FiniteAlgebra]:
    return ctx["algebras"]


@router.check("axioms", anchor="§2")
def check_axioms(ctx: CheckContext) -> Outcome:
    for A in _algebras(ctx):
        violation = A.axiom_violation()
        if violation is not None:
            return Outcome(False, f"{A.label} violates an axiom", {"algebra": A.label, **violation})
    return Outcome(True, ", ".join(A.label for A in _algebras(ctx)))


@router.check("centre-dimensions", anchor="Eq (+890)")
def check_centres(ctx: CheckContext) -> Outcome:
    n, N = ctx["n"], ctx["N"]
    M2 = matrix_algebra(2)
    expected = {
        matrix_algebra(n).label: 1,
        function_algebra(N).label: N,
        direct_sum_algebra(M2, M2).label: 2,
    }
    algebras = [matrix_algebra(n), function_algebra(N), direct_sum_algebra(M2, M2)]
    found = {A.label: len(centre_basis(A)) for A in algebras}
    ok = found == expected
    return Outcome(ok, f"centre dimensions {found}", None if ok else {"expected": expected})


@router.check("derivation-dimensions", anchor="Eq (+831)")
def check_derivation_dimensions(ctx: CheckContext) -> Outcome:
    n, N = ctx["n"], ctx["N"]
    cases = [
        (matrix_algebra(n), n * n - 1),
        (function_algebra(N), 0),
        (truncated_polynomial_algebra(N), N - 1),
    ]
    found = {A.label: len(derivation_basis(A)) for A, _ in cases}
    expected = {A.label: dim for A, dim in cases}
    ok = found == expected
    return Outcome(ok, f"derivation dimensions {found}", None if ok else {"expected": expected})


@router.check("derivation-bracket-closure", anchor="Eq (+860)")
def check_bracket_closure(ctx: CheckContext) -> Outcome:
    for A in _algebras(ctx):
        space = derivation_subspace(A)
        basis = derivation_basis(A)
        for i, u in enumerate(basis):
            if u.leibniz_violation() is not None:
                return Outcome(False, "basis derivation breaks Leibniz", {"algebra": A.label})
            for j, v in enumerate(basis[i:], start=i):
                if not space.contains(lie_bracket(u, v).vector()):
                    witness = {"algebra": A.label, "pair": [i, j]}
                    return Outcome(False, "bracket left Der(A)", witness)
    return Outcome(True)


@router.check("centre-stability", anchor="§5")
def check_centre_stability(ctx: CheckContext) -> Outcome:
    M2 = matrix_algebra(2)
    algebras = _algebras(ctx) + [direct_sum_algebra(M2, M2)]
    unstable = [A.label for A in algebras if not centre_is_stable(A)]
    return Outcome(not unstable, "", {"unstable": unstable} if unstable else None)


@router.check("inner-derivations", anchor="§8")
def check_inner_span(ctx: CheckContext) -> Outcome:
    n = ctx["n"]
    basis = su_basis(n)
    A = basis.algebra
    span = el.Subspace.span([inner_derivation(e).vector() for e in basis.elements], A.dim**2)
    ok = span == derivation_subspace(A)
    return Outcome(ok, f"span of ad ε_r has dimension {span.dim}")


@router.check("su-structure-constants", anchor="§8")
def check_su_structure(ctx: CheckContext) -> Outcome:
    basis = su_basis(ctx["n"])
    A = basis.algebra
    for r, er in enumerate(basis.elements):
        if er.star() != -er:
            return Outcome(False, "basis element is not anti-Hermitian", {"r": r})
        for q, eq in enumerate(basis.elements):
            total = A.zero
            for s, es in enumerate(basis.elements):
                total = total + es * basis.constant(s, r, q)
            if er.commutator(eq) != total:
                return Outcome(False, "[ε_r, ε_q] ≠ c^s_rq ε_s", {"r": r, "q": q})
    details = ""
    if ctx["n"] == 2:
        F, G, H = basis.elements
        details = "[F,G] = 2H" if F.commutator(G) == H * 2 else "[F,G] ≠ 2H"
        if details != "[F,G] = 2H":
            return Outcome(False, details)
    return Outcome(True, details)


@router.check("derivation-involution", anchor="§5")
def check_derivation_involution(ctx: CheckContext) -> Outcome:
    basis = su_basis(ctx["n"])
    for r, e in enumerate(basis.elements):
        u = inner_derivation(e)
        if derivation_involution(u) != u:
            return Outcome(False, "ad ε is not real", {"r": r})
    derivations = derivation_basis(basis.algebra)
    for i, u in enumerate(derivations):
        if derivation_involution(derivation_involution(u)) != u:
            return Outcome(False, "(u*)* ≠ u", {"basis": i})
        for j, v in enumerate(derivations):
            lhs = derivation_involution(lie_bracket(u, v))
            rhs = lie_bracket(derivation_involution(u), derivation_involution(v))
            if lhs != rhs:
                return Outcome(False, "[u,v]* ≠ [u*,v*]", {"pair": [i, j]})
    return Outcome(True)


@router.check("dual-modules", anchor="§2")
def check_duals(ctx: CheckContext) -> Outcome:
    A = matrix_algebra(ctx["n"])
    P = free_module(A, 1, ModuleKind.LEFT)
    D = dual_module(P)
    if D.kind is not ModuleKind.RIGHT or D.dim != P.dim:
        return Outcome(False, "dual of a free left module", {"kind": D.kind.name, "dim": D.dim})
    injection = double_dual_map(P)
    ok = el.rank(injection) == P.dim
    return Outcome(ok, f"P → P** has rank {el.rank(injection)}")


@router.check("tensor-free-modules", anchor="§2")
def check_tensor(ctx: CheckContext) -> Outcome:
    A = matrix_algebra(ctx["n"])
    found = {}
    for r, s in ((1, 1), (1, 2), (2, 2)):
        P = free_module(A, r, ModuleKind.BIMODULE)
        T = tensor_modules(P, free_module(A, s, ModuleKind.LEFT))
        found[f"{r}x{s}"] = T.dim
        if T.dim != A.dim * r * s:
            return Outcome(False, "free tensor product has the wrong rank", {"ranks": [r, s]})
    return Outcome(True, f"dimensions {found}")


@router.check("idempotents", anchor="Eq (+830)")
def check_idempotents(ctx: CheckContext) -> Outcome:
    M2 = matrix_algebra(2)
    half = el.scalar("1/2")
    # ½(1 + v·σ) with v = (3/5, 4/5, 0)
    v1, v2 = el.scalar("3/5"), el.scalar("4/5")
    p = M2.element([half, half * (v1 - v2 * el.IMAG), half * (v1 + v2 * el.IMAG), half])
    if not idempotent_check(((p,),)):
        return Outcome(False, "½(1 + v·σ) is not idempotent")

    # partition data: two blocks p_ζκ with Σ_κ p_ζκ p_κξ = p_ζξ
    A = function_algebra(2)
    e1, e2 = A.basis()
    blocks = [
        [algebra_matrix(A, [[e1, A.zero], [A.zero, A.zero]]), algebra_matrix(A, [[0, 0], [0, 0]])],
        [algebra_matrix(A, [[0, 0], [0, 0]]), algebra_matrix(A, [[A.one, A.zero], [A.zero, e2]])],
    ]
    assembled = assemble_blocks(blocks)
    if not idempotent_check(assembled):
        return Outcome(False, "assembled partition matrix is not idempotent")
    P = projective_from_idempotent(A, assembled)
    return Outcome(True, f"partition module of dimension {P.dim}")
