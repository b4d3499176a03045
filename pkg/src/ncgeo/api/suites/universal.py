from ncgeo.api.router import CheckContext, Outcome, SuiteRouter, UsageError
from ncgeo.api.schemas import SuiteName, SuiteParams
from ncgeo.config import settings
from ncgeo.infrastructure.algebras import (
    FiniteAlgebra,
    algebra_from_name,
    function_algebra,
    matrix_algebra,
    truncated_polynomial_algebra,
)
from ncgeo.infrastructure.exactlin import kron_vectors, sub_vectors
from ncgeo.services.universal_calculus import (
    as_form,
    bimodule_action,
    left_closure,
    monomial,
    noncentral_witness,
    random_element,
    random_monomial,
    udelta,
    uderivative,
    universal_forms,
    universal_one_forms,
    uproduct,
    ustar,
)

router = SuiteRouter(
    SuiteName.UNIVERSAL,
    sections="§5 universal calculus: Ω¹ = ker μ, δ, monomials, products, involution",
    parameters={
        "k_max": "top degree for the graded identities (default 2)",
        "algebra": "test algebra (default matrix:2)",
    },
)


@router.setup
def fixtures(params: SuiteParams) -> dict:
    k_max = 2 if params.k_max is None else params.k_max
    if k_max + 1 > settings.universal_max_degree:
        raise UsageError(
            f"k_max = {k_max} needs forms of degree {k_max + 1}; "
            f"the bound is {settings.universal_max_degree}"
        )
    A = algebra_from_name(params.algebra) if params.algebra else matrix_algebra(2)
    shipped = [function_algebra(2), truncated_polynomial_algebra(3), matrix_algebra(2)]
    return {"k_max": k_max, "algebra": A, "shipped": shipped}


def _algebra(ctx: CheckContext) -> FiniteAlgebra:
    return ctx["algebra"]


@router.check("one-forms-dimension", anchor="Eq (+891)")
def check_one_forms(ctx: CheckContext) -> Outcome:
    found = {A.label: universal_one_forms(A).dim for A in ctx["shipped"]}
    bad = {A.label: found[A.label] for A in ctx["shipped"] if found[A.label] != A.dim * (A.dim - 1)}
    return Outcome(not bad, f"dim ker μ {found}", {"mismatch": bad} if bad else None)


@router.check("delta-leibniz", anchor="Eq (+851)")
def check_delta_leibniz(ctx: CheckContext) -> Outcome:
    A = _algebra(ctx)
    if udelta(A.one):
        return Outcome(False, "δ1 ≠ 0")
    for i, a in enumerate(A.basis()):
        for j, b in enumerate(A.basis()):
            lhs = udelta(a * b)
            rhs = uproduct(udelta(a), as_form(b)) + uproduct(as_form(a), udelta(b))
            if lhs != rhs:
                return Outcome(False, "δ(ab) ≠ (δa)b + aδb", {"pair": [i, j]})
    return Outcome(True)


@router.check("left-generation", anchor="Eq (+892)")
def check_generation(ctx: CheckContext) -> Outcome:
    A = _algebra(ctx)
    closure = left_closure([udelta(e) for e in A.basis()])
    ok = closure == universal_one_forms(A)
    return Outcome(ok, f"left span of δe_i has dimension {closure.dim}")


@router.check("form-dimensions", anchor="Eq (+892)")
def check_form_dimensions(ctx: CheckContext) -> Outcome:
    A = _algebra(ctx)
    m = A.dim
    found = {k: universal_forms(A, k).dim for k in range(ctx["k_max"] + 1)}
    expected = {k: m * (m - 1) ** k for k in found}
    ok = found == expected
    return Outcome(ok, f"dim Ω^k {found}", None if ok else {"expected": expected})


@router.check("product-associativity", anchor="§5")
def check_associativity(ctx: CheckContext) -> Outcome:
    A = _algebra(ctx)
    rng = ctx.rng
    for n in range(settings.property_samples):
        forms = [random_monomial(A, rng.randint(0, 1), rng) for _ in range(3)]
        x, y, z = forms
        lhs = uproduct(uproduct(x, y), z)
        rhs = uproduct(x, uproduct(y, z))
        if lhs != rhs or lhs.degree != sum(w.degree for w in forms):
            return Outcome(False, "product is not associative", {"sample": n})
        if not lhs.in_monomial_span():
            return Outcome(False, "product left the monomial span", {"sample": n})
    return Outcome(True, f"{settings.property_samples} sampled triples")


@router.check("product-rule", anchor="§5")
def check_product_rule(ctx: CheckContext) -> Outcome:
    """(a₀δa₁)(b₀δb₁) = a₀δ(a₁b₀)δb₁ − a₀a₁δb₀δb₁ and (δa)b = δ(ab) − aδb."""
    A = _algebra(ctx)
    rng = ctx.rng
    for n in range(settings.property_samples):
        x0, x1, y0, y1 = (random_element(A, rng) for _ in range(4))
        lhs = uproduct(monomial(x0, [x1]), monomial(y0, [y1]))
        rhs = monomial(x0, [x1 * y0, y1]) - monomial(x0 * x1, [y0, y1])
        if lhs != rhs:
            return Outcome(False, "product of degree-1 monomials", {"sample": n})
        right = uproduct(udelta(x1), as_form(y0))
        if right != udelta(x1 * y0) - uproduct(as_form(x1), udelta(y0)):
            return Outcome(False, "(δa)b ≠ δ(ab) − aδb", {"sample": n})
    return Outcome(True)


@router.check("bimodule-action", anchor="§5")
def check_bimodule_action(ctx: CheckContext) -> Outcome:
    """b(δa)c = b⊗ac − ba⊗c."""
    A = _algebra(ctx)
    basis = A.basis()
    for i, a in enumerate(basis):
        for j, b in enumerate(basis):
            for k, c in enumerate(basis):
                lhs = bimodule_action(b, udelta(a), c)
                expected = sub_vectors(
                    kron_vectors(b.coeffs, (a * c).coeffs), kron_vectors((b * a).coeffs, c.coeffs)
                )
                if lhs.coeffs != expected:
                    return Outcome(False, "b(δa)c", {"a": i, "b": j, "c": k})
    return Outcome(True)


@router.check("differential-squares-to-zero", anchor="§5")
def check_d_squared(ctx: CheckContext) -> Outcome:
    A = _algebra(ctx)
    rng = ctx.rng
    for n in range(settings.property_samples):
        k = rng.randint(0, ctx["k_max"] - 1) if ctx["k_max"] > 0 else 0
        w = random_monomial(A, k, rng)
        if uderivative(uderivative(w)):
            return Outcome(False, "δδ ≠ 0", {"sample": n, "degree": k})
        w2 = random_monomial(A, 0, rng)
        # graded Leibniz for a degree-k form times a function
        lhs = uderivative(uproduct(w, w2))
        sign = -1 if k % 2 else 1
        rhs = uproduct(uderivative(w), w2) + uproduct(w, uderivative(w2)).scaled(sign)
        if lhs != rhs:
            return Outcome(False, "graded Leibniz", {"sample": n, "degree": k})
    return Outcome(True)


@router.check("involution", anchor="§5")
def check_involution(ctx: CheckContext) -> Outcome:
    A = _algebra(ctx)
    if not A.has_involution:
        return Outcome(True, f"{A.label} has no involution")
    rng = ctx.rng
    for n in range(settings.property_samples):
        w = random_monomial(A, rng.randint(0, 1), rng)
        if ustar(ustar(w)) != w:
            return Outcome(False, "w** ≠ w", {"sample": n})
        a = random_element(A, rng)
        if ustar(udelta(a)) != udelta(a.star()):
            return Outcome(False, "(δa)* ≠ δ(a*)", {"sample": n})
        w2 = random_monomial(A, rng.randint(0, 1), rng)
        sign = -1 if (w.degree * w2.degree) % 2 else 1
        if ustar(uproduct(w, w2)) != uproduct(ustar(w2), ustar(w)).scaled(sign):
            return Outcome(False, "(αβ)* ≠ ±β*α*", {"sample": n})
    return Outcome(True)


@router.check("noncentral-one-forms", anchor="Remark (+935)")
def check_noncentral(ctx: CheckContext) -> Outcome:
    A = truncated_polynomial_algebra(3)
    witness = noncentral_witness(A)
    if witness is None:
        return Outcome(False, "Ω¹ of trunc-poly:3 looks central")
    a, b = witness
    names = A.basis_names
    return Outcome(True, f"{names[b]}·δ{names[a]} ≠ δ{names[a]}·{names[b]}", {"a": a, "b": b})
