from ncgeo.api.router import CheckContext, Outcome, SuiteRouter, UsageError
from ncgeo.api.schemas import SuiteName, SuiteParams
from ncgeo.config import settings
from ncgeo.infrastructure import exactlin as el
from ncgeo.infrastructure.algebras import AlgebraMatrix, FiniteAlgebra, algebra_matrix
from ncgeo.infrastructure.modules import ModuleKind, projective_from_idempotent
from ncgeo.services.connes import (
    GaugeLinearityError,
    SpectralTriple,
    SpectralTripleError,
    add_gauge,
    adjoint_check,
    conjugate_idempotent,
    difference_check,
    finite_space_triple,
    gauge_field_basis,
    grassmann_connection,
    junk_and_omega_D,
    leibniz_check,
    linearity_defect,
    multiplicativity_check,
    path_triple,
    pi_rep,
    two_point_triple,
)
from ncgeo.services.universal_calculus import as_form, monomial, udelta

router = SuiteRouter(
    SuiteName.CONNES,
    sections="§9 spectral triples, π, junk J = J₀ + δJ₀, Ω_D, Grassmann connections, gauge fields",
    parameters={
        "m": "Dirac entry of the two-point triple, e.g. 1, 1/2 or 1+2i (default 1)",
        "k_max": f"top degree of Ω_D (default and bound {settings.connes_degree_bound})",
    },
    ledger={
        "pi_star_sign": "π(w)† = π(w*)·(−1)^{k(k+1)/2} against the universal star",
        "omega_D": "Ω_D^k presented as π(Ω^k)/π(δJ₀^{k−1}), isomorphic to Ω^k/J^k; "
        "dimensions cross-checked against dim Ω^k − dim J^k",
        "compact_resolvent": "vacuous in finite dimension, not checked",
    },
)


@router.setup
def fixtures(params: SuiteParams) -> dict:
    m = el.parse_scalar(params.m) if params.m is not None else el.scalar(1)
    if not m:
        raise UsageError("m = 0 gives D = 0: the two-point calculus degenerates")
    bound = settings.connes_degree_bound
    k_max = bound if params.k_max is None else params.k_max
    if k_max > bound:
        raise UsageError(f"k_max = {k_max} exceeds the Connes degree bound {bound}")
    return {"m": m, "k_max": k_max, "triple": two_point_triple(m)}


def _triple(ctx: CheckContext) -> SpectralTriple:
    return ctx["triple"]


def _idempotents(A: FiniteAlgebra) -> dict[str, AlgebraMatrix]:
    e1 = A.basis_element(0)
    p = algebra_matrix(A, [[e1, 0], [0, 0]])
    g = algebra_matrix(A, [[1, e1], [0, 1]])
    g_inv = algebra_matrix(A, [[1, -e1], [0, 1]])
    return {
        "identity": algebra_matrix(A, [[1, 0], [0, 1]]),
        "diag(e1,0)": p,
        "g·diag(e1,0)·g⁻¹": conjugate_idempotent(p, g, g_inv),
    }


@router.check("triple-invariants", anchor="§9")
def check_triple(ctx: CheckContext) -> Outcome:
    t = _triple(ctx)
    violation = t.violation()
    if violation is not None:
        return Outcome(False, "two-point triple", violation)
    if t.grading is None:
        return Outcome(False, "two-point triple lost its grading")
    anti = el.add(el.matmul(t.grading, t.D), el.matmul(t.D, t.grading))
    if not el.is_zero(anti):
        return Outcome(False, "ΓD + DΓ ≠ 0")
    path = path_triple()
    if path.violation() is not None:
        return Outcome(False, "path triple", path.violation())
    try:
        finite_space_triple(el.from_entries({(0, 1): el.scalar(1)}, 2, 2))
    except SpectralTripleError:
        return Outcome(True, "non-self-adjoint D rejected")
    return Outcome(False, "non-self-adjoint D accepted")


@router.check("dirac-bracket", anchor="§9")
def check_bracket(ctx: CheckContext) -> Outcome:
    t, m = _triple(ctx), ctx["m"]
    expected = el.from_entries({(0, 1): -m, (1, 0): el.conj(m)}, 2, 2)
    found = t.commutator(t.algebra.basis_element(0))
    if el.equal(found, expected):
        return Outcome(True)
    row, col, a, b = el.first_difference(found, expected)
    witness = {
        "row": row,
        "col": col,
        "found": el.format_scalar(a),
        "expected": el.format_scalar(b),
    }
    return Outcome(False, "[D, e₁] ≠ offdiag(−m, conj m)", witness)


@router.check("operator-representation", anchor="Eq (+940)")
def check_pi(ctx: CheckContext) -> Outcome:
    t = _triple(ctx)
    A = t.algebra
    for i, a in enumerate(A.basis()):
        if not el.equal(pi_rep(t, as_form(a)), t.rep_of(a)):
            return Outcome(False, "π(a) ≠ rep(a)", {"a": i})
    if not el.is_zero(pi_rep(t, udelta(A.one))):
        return Outcome(False, "π(δ1) ≠ 0")
    e1, e2 = A.basis()
    image = pi_rep(t, monomial(e1, [e2]))
    nonzero = sum(1 for value in image.to_dok().values() if value)
    if nonzero != 1:
        return Outcome(False, "π(e₁δe₂) should have one nonzero entry", {"nonzero": nonzero})
    return Outcome(True)


@router.check("pi-multiplicative", anchor="Eq (+940)")
def check_multiplicative(ctx: CheckContext) -> Outcome:
    report = multiplicativity_check(_triple(ctx), label=ctx.check_id)
    return Outcome(report.ok, f"{settings.property_samples} sampled pairs", report.witness)


@router.check("pi-adjoint", anchor="§9")
def check_adjoint(ctx: CheckContext) -> Outcome:
    report = adjoint_check(_triple(ctx), label=ctx.check_id)
    return Outcome(report.ok, "π(w)† = π(w*)", report.witness)


@router.check("omega-d-dimensions", anchor="§9")
def check_dimensions(ctx: CheckContext) -> Outcome:
    calc = junk_and_omega_D(_triple(ctx), ctx["k_max"])
    dims = calc.dims()
    if calc[0].junk0.dim:
        return Outcome(False, "faithful representation with J₀⁰ ≠ 0", {"dims": dims})
    if calc.k_max >= 1 and dims[1] != 2:
        return Outcome(False, "dim Ω_D¹ ≠ 2", {"dims": dims})
    bad = [k for k, degree in enumerate(calc.degrees) if not degree.dimension_consistent]
    if bad:
        return Outcome(False, "dim Ω^k − dim J^k disagrees with π(Ω^k)/π(δJ₀)", {"degrees": bad})
    return Outcome(True, f"dim Ω_D^k {dims}")


@router.check("connes-differential", anchor="§9")
def check_differential(ctx: CheckContext) -> Outcome:
    calc = junk_and_omega_D(_triple(ctx), ctx["k_max"])
    report = calc.well_defined_check()
    if not report.ok:
        return Outcome(False, "δJ ⊄ J", report.witness)
    report = calc.d_squared_check()
    if not report.ok:
        return Outcome(False, "d∘d ≠ 0 on Ω_D", report.witness)
    return Outcome(True)


@router.check("junk-ideal", anchor="§9")
def check_junk_ideal(ctx: CheckContext) -> Outcome:
    calc = junk_and_omega_D(_triple(ctx), ctx["k_max"])
    report = calc.ideal_check(label=ctx.check_id)
    return Outcome(report.ok, "J·Ω, Ω·J ⊂ J on samples", report.witness)


@router.check("junk-witness", anchor="§9")
def check_junk_witness(ctx: CheckContext) -> Outcome:
    """π(φ) = 0 does not force π(δφ) = 0: absent on two points, present on the path."""
    two_point = junk_and_omega_D(_triple(ctx), ctx["k_max"]).junk_witness()
    path = junk_and_omega_D(path_triple(), 2).junk_witness()
    witness = {
        "two_point": two_point.as_dict() if two_point else f"absent up to degree {ctx['k_max']}",
        "path": path.as_dict() if path else "absent",
    }
    if two_point is not None:
        return Outcome(False, "two-point triple has junk with π(δφ) ≠ 0", witness)
    if path is None:
        return Outcome(False, "no junk witness on the 1–3–2 path", witness)
    return Outcome(True, "witness found on the path triple only", witness)


@router.check("grassmann-leibniz", anchor="Eq (+945)")
def check_grassmann(ctx: CheckContext) -> Outcome:
    t = _triple(ctx)
    for name, p in _idempotents(t.algebra).items():
        P = projective_from_idempotent(t.algebra, p, ModuleKind.RIGHT)
        report = leibniz_check(grassmann_connection(t, P))
        if not report.ok:
            return Outcome(False, f"∇₀ on {name}", report.witness)
    return Outcome(True, ", ".join(_idempotents(t.algebra)))


@router.check("gauge-fields", anchor="Eq (+945)")
def check_gauge(ctx: CheckContext) -> Outcome:
    t = _triple(ctx)
    p = _idempotents(t.algebra)["diag(e1,0)"]
    nabla = grassmann_connection(t, projective_from_idempotent(t.algebra, p, ModuleKind.RIGHT))
    basis = gauge_field_basis(nabla)
    rows, cols = nabla.tensor.dim, nabla.module.dim
    if not el.equal(add_gauge(nabla, el.zeros(rows, cols)).map, nabla.map):
        return Outcome(False, "∇₀ + 0 ≠ ∇₀")
    for n, sigma in enumerate(basis):
        shifted = add_gauge(nabla, sigma)
        if not leibniz_check(shifted).ok:
            return Outcome(False, "∇₀ + σ breaks Leibniz", {"gauge_basis": n})
        if not difference_check(shifted, nabla).ok:
            return Outcome(False, "difference is not right-linear", {"gauge_basis": n})

    candidates = (
        el.from_entries({(i, j): el.scalar(1)}, rows, cols)
        for i in range(rows)
        for j in range(cols)
    )
    bad = next((s for s in candidates if linearity_defect(nabla, s) is not None), None)
    if bad is None:
        return Outcome(False, "every elementary σ is right-linear")
    try:
        add_gauge(nabla, bad)
    except GaugeLinearityError:
        return Outcome(True, f"{len(basis)} gauge basis fields", linearity_defect(nabla, bad))
    return Outcome(False, "non-linear σ accepted")
