from ncgeo.api.router import CheckContext, Outcome, SuiteRouter
from ncgeo.api.schemas import SuiteName, SuiteParams
from ncgeo.infrastructure import exactlin as el
from ncgeo.infrastructure.algebras import (
    AlgebraMatrix,
    FiniteAlgebra,
    algebra_matrix,
    matrix_algebra,
    truncated_polynomial_algebra,
)
from ncgeo.infrastructure.derivations import inner_derivation, zero_derivation
from ncgeo.infrastructure.modules import (
    ModuleKind,
    algebra_as_module,
    free_module,
    projective_from_idempotent,
)
from ncgeo.services.ce_calculus import ce_one_forms_module, derivation_frame
from ncgeo.services.connections import (
    DVConnection,
    add_endomorphisms,
    canonical_connection,
    conjugate,
    curvature_check,
    difference,
    direct_sum,
    dual,
    dv_check,
    inner_connection,
    is_endomorphism_family,
    is_flat,
    is_real,
    is_torsion_free,
    pairing_check,
    tensor,
    torsion_bimodule_check,
    zero_family,
)
from ncgeo.services.universal_calculus import udelta
from ncgeo.services.universal_connections import (
    add_morphism,
    bimodule_pair_check,
    curvature_module_check,
    delta_connection,
    grassmann_universal_connection,
    interior_reduce,
    permutation_flip,
    reduced_connection,
    universal_check,
    universal_curvature,
)

router = SuiteRouter(
    SuiteName.CONNECTIONS,
    sections="§6–§7 derivation-based and universal connections, curvature, torsion, operations",
    parameters={"n": "matrix size for the canonical and inner connections (default 2)"},
    ledger={
        "universal_extension": "D_k(α⊗p) = δα⊗p + (−1)^k α⊗∇p on left modules",
        "bimodule_pair": "ϱ∘∇L = ∇R and u⌟∇L = ∇R⌞u are reported, not enforced",
    },
)


@router.setup
def fixtures(params: SuiteParams) -> dict:
    return {"n": params.n or 2}


def _inner_on_forms(A: FiniteAlgebra) -> DVConnection:
    return inner_connection(ce_one_forms_module(derivation_frame(A)).module)


def _scalar_shift(nabla: DVConnection) -> tuple[el.Matrix, ...]:
    """F_r = (r+1)·id, a module endomorphism of any module."""
    p = nabla.module.dim
    return tuple(el.scale(el.scalar(r + 1), el.identity(p)) for r in range(nabla.frame.size))


def _idempotents() -> list[AlgebraMatrix]:
    M2 = matrix_algebra(2)
    half = el.scalar("1/2")
    v1, v2 = el.scalar("3/5"), el.scalar("4/5")
    p = M2.element([half, half * (v1 - v2 * el.IMAG), half * (v1 + v2 * el.IMAG), half])
    return [
        algebra_matrix(M2, [[M2.one, M2.zero], [M2.zero, M2.zero]]),
        algebra_matrix(M2, [[p]]),
    ]


@router.check("canonical-connection", anchor="Eq (+870)")
def check_canonical(ctx: CheckContext) -> Outcome:
    for A in (matrix_algebra(ctx["n"]), truncated_polynomial_algebra(3)):
        nabla = canonical_connection(A)
        check = dv_check(nabla)
        if not check.ok:
            return Outcome(False, f"canonical connection on {A.label}", check.witness)
        for r, u in enumerate(nabla.frame.derivations):
            if any(nabla(u, A.unit)):
                return Outcome(False, "∇_u(1) ≠ 0", {"algebra": A.label, "u": r})
        if not is_flat(nabla):
            return Outcome(False, "canonical connection is curved", {"algebra": A.label})
    return Outcome(True)


@router.check("zero-family-rejected", anchor="Eq (+847)")
def check_zero_family(ctx: CheckContext) -> Outcome:
    check = dv_check(zero_family(algebra_as_module(matrix_algebra(2))))
    if check.ok:
        return Outcome(False, "∇ = 0 accepted on M_2")
    return Outcome(True, "Leibniz fails for ∇ = 0", check.witness)


@router.check("inner-connection", anchor="Eq (+871)")
def check_inner(ctx: CheckContext) -> Outcome:
    A = matrix_algebra(ctx["n"])
    on_algebra = inner_connection(algebra_as_module(A))
    canonical = canonical_connection(A)
    if not all(el.equal(N, M) for N, M in zip(on_algebra.endos, canonical.endos)):
        return Outcome(False, "inner ≠ canonical on P = A")
    nabla = _inner_on_forms(A)
    check = dv_check(nabla)
    if not check.ok:
        return Outcome(False, "inner connection on Ω¹", check.witness)
    if not is_flat(nabla):
        return Outcome(False, "inner connection on Ω¹ is curved")
    if is_torsion_free(nabla):
        return Outcome(False, "inner connection on Ω¹ is torsion-free")
    return Outcome(True, f"flat with torsion on Ω¹[{A.label}]")


@router.check("curvature", anchor="Eq (+874)")
def check_curvature(ctx: CheckContext) -> Outcome:
    M2 = matrix_algebra(2)
    inner = _inner_on_forms(M2)
    shifted = add_endomorphisms(canonical_connection(M2), _scalar_shift(canonical_connection(M2)))
    for nabla in (canonical_connection(M2), inner, shifted):
        check = curvature_check(nabla)
        if not check.ok:
            return Outcome(False, f"curvature of {nabla.label}", check.witness)
    if is_flat(shifted):
        return Outcome(False, "scalar shift of the canonical connection stayed flat")
    return Outcome(True, "canonical and inner flat; shifted connection curved")


@router.check("torsion-bimodule-map", anchor="Eq (+873)")
def check_torsion(ctx: CheckContext) -> Outcome:
    check = torsion_bimodule_check(_inner_on_forms(matrix_algebra(2)))
    return Outcome(check.ok, "", check.witness)


@router.check("direct-sum-and-dual", anchor="§7 (i)–(ii)")
def check_sum_dual(ctx: CheckContext) -> Outcome:
    M2 = matrix_algebra(2)
    canonical = canonical_connection(M2)
    summed = direct_sum(canonical, canonical)
    if not dv_check(summed).ok:
        return Outcome(False, "∇⊕∇ is not a connection")
    left = canonical_connection(M2, ModuleKind.LEFT)
    starred = dual(left)
    check = dv_check(starred)
    if not check.ok:
        return Outcome(False, "dual connection", check.witness)
    check = pairing_check(left, starred)
    if not check.ok:
        return Outcome(False, "u⟨p, F⟩ ≠ ⟨∇p, F⟩ + ⟨p, ∇′F⟩", check.witness)
    return Outcome(True, f"dual on a module of dimension {starred.module.dim}")


@router.check("tensor-product", anchor="Eq (+848)")
def check_tensor(ctx: CheckContext) -> Outcome:
    M2 = matrix_algebra(2)
    product = tensor(canonical_connection(M2), _inner_on_forms(M2))
    check = dv_check(product)
    if not check.ok:
        return Outcome(False, "∇¹⊗∇² is not a connection", check.witness)
    if not is_flat(product):
        return Outcome(False, "tensor product of flat connections is curved")
    return Outcome(True, f"flat on {product.module.label}")


@router.check("conjugate-and-real", anchor="Eq (+849)")
def check_conjugate(ctx: CheckContext) -> Outcome:
    M2 = matrix_algebra(2)
    for nabla in (canonical_connection(M2), _inner_on_forms(M2)):
        check = dv_check(conjugate(nabla))
        if not check.ok:
            return Outcome(False, f"conjugate of {nabla.label}", check.witness)
        if not is_real(nabla):
            return Outcome(False, f"{nabla.label} connection is not real")
    return Outcome(True)


@router.check("affine-structure", anchor="§7 (iv)")
def check_affine(ctx: CheckContext) -> Outcome:
    nabla = _inner_on_forms(matrix_algebra(2))
    family = _scalar_shift(nabla)
    moved = add_endomorphisms(nabla, family)
    gap = difference(moved, nabla)
    if not is_endomorphism_family(nabla.module, gap):
        return Outcome(False, "difference is not a family of module maps")
    back = add_endomorphisms(nabla, gap)
    if not all(el.equal(N, M) for N, M in zip(back.endos, moved.endos)):
        return Outcome(False, "∇ + (∇′ − ∇) ≠ ∇′")
    return Outcome(True)


@router.check("universal-delta", anchor="Def (+864)")
def check_universal_delta(ctx: CheckContext) -> Outcome:
    A = matrix_algebra(2)
    nabla = delta_connection(free_module(A, 1, ModuleKind.LEFT))
    check = universal_check(nabla)
    if not check.ok:
        return Outcome(False, "δ connection", check.witness)
    for t, e in enumerate(A.basis()):
        if el.column(nabla.map, t) != udelta(e).coeffs:
            return Outcome(False, "∇(a) ≠ δa", {"a": t})
    if not el.is_zero(universal_curvature(nabla)):
        return Outcome(False, "δ connection is curved")
    right = delta_connection(free_module(A, 2, ModuleKind.RIGHT))
    if not universal_check(right).ok or not el.is_zero(universal_curvature(right)):
        return Outcome(False, "δ connection on a free right module")
    return Outcome(True)


@router.check("universal-grassmann", anchor="chain (+941)")
def check_universal_grassmann(ctx: CheckContext) -> Outcome:
    A = matrix_algebra(2)
    count = 0
    for n, p in enumerate(_idempotents()):
        for kind in (ModuleKind.LEFT, ModuleKind.RIGHT):
            nabla = grassmann_universal_connection(projective_from_idempotent(A, p, kind))
            check = universal_check(nabla)
            if not check.ok:
                return Outcome(False, "Grassmann connection", {"p": n, "kind": kind.name})
            check = curvature_module_check(nabla)
            if not check.ok:
                return Outcome(False, "∇² is not a module map", {"p": n, "kind": kind.name})
            count += 1
    return Outcome(True, f"{count} Grassmann connections")


@router.check("universal-affine", anchor="Def (+864)")
def check_universal_affine(ctx: CheckContext) -> Outcome:
    A = matrix_algebra(2)
    P = free_module(A, 1, ModuleKind.LEFT)
    b = A.basis()[1]
    db = udelta(b).coeffs
    identity = el.identity(A.dim)
    sigma = el.from_columns(
        [el.apply(el.kron(A.left_matrix(e), identity), db) for e in A.basis()], A.dim**2
    )
    shifted = add_morphism(delta_connection(P), sigma)
    if not curvature_module_check(shifted).ok:
        return Outcome(False, "∇ + σ has a curvature that is not a module map")
    return Outcome(True, "∇ + (a ↦ a·δb) is a connection")


def _right_shift(A: FiniteAlgebra, b) -> el.Matrix:
    """σ(a) = δb·a on the right module A."""
    identity = el.identity(A.dim)
    db = udelta(b).coeffs
    return el.from_columns(
        [el.apply(el.kron(identity, A.right_matrix(e)), db) for e in A.basis()], A.dim**2
    )


@router.check("interior-reduction", anchor="Eqs (+911)/(+912)")
def check_interior(ctx: CheckContext) -> Outcome:
    A = matrix_algebra(2)
    nabla = delta_connection(free_module(A, 1, ModuleKind.LEFT))
    for i, b in enumerate(A.basis()):
        u = inner_derivation(b)
        if not el.equal(interior_reduce(nabla, u), u.action):
            return Outcome(False, "u⌟δa ≠ u(a)", {"b": i})
    if not el.is_zero(interior_reduce(nabla, zero_derivation(A))):
        return Outcome(False, "zero derivation gives a nonzero endomorphism")
    check = dv_check(reduced_connection(nabla))
    if not check.ok:
        return Outcome(False, "reduced family breaks the one-sided Leibniz rule", check.witness)
    return Outcome(True)


@router.check("bimodule-pairs", anchor="Eqs (+894)/(+895)")
def check_pairs(ctx: CheckContext) -> Outcome:
    T = truncated_polynomial_algebra(3)
    left = delta_connection(free_module(T, 1, ModuleKind.LEFT))
    right = delta_connection(free_module(T, 1, ModuleKind.RIGHT))
    rho = permutation_flip(algebra_as_module(T))
    report = bimodule_pair_check(left, right, rho)
    if not report.ok or not report.flip_ok:
        return Outcome(False, "δ connections over a commutative algebra", report.witness)

    A = matrix_algebra(2)
    left = delta_connection(free_module(A, 1, ModuleKind.LEFT))
    right = delta_connection(free_module(A, 1, ModuleKind.RIGHT))
    if not bimodule_pair_check(left, right).ok:
        return Outcome(False, "u⌟δa ≠ δa⌞u on M_2")
    modified = add_morphism(right, _right_shift(A, A.basis()[1]))
    report = bimodule_pair_check(left, modified)
    if report.ok:
        return Outcome(False, "shifted right connection still compatible")
    return Outcome(True, "one-sided shift detected", report.witness)
