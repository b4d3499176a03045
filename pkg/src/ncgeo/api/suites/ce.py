import random
from itertools import combinations

from ncgeo.api.router import CheckContext, Outcome, SuiteRouter, UsageError
from ncgeo.api.schemas import SuiteName, SuiteParams
from ncgeo.config import settings
from ncgeo.infrastructure import exactlin as el
from ncgeo.infrastructure.algebras import (
    FiniteAlgebra,
    algebra_from_name,
    direct_sum_algebra,
    function_algebra,
    matrix_algebra,
    truncated_polynomial_algebra,
)
from ncgeo.infrastructure.derivations import lie_bracket
from ncgeo.services.ce_calculus import (
    CEForm,
    DerivationFrame,
    basis_forms,
    ce_d,
    ce_one_forms_module,
    contract,
    derivation_frame,
    differentials_central,
    exterior_derivative,
    form_from_values,
    form_involution,
    function_form,
    is_centre_multilinear,
    lie_derivative,
    normalisation_ratio,
    one_form_duality,
    weighted_d,
    theta,
    wedge,
)
from ncgeo.services.jets import o1_module
from ncgeo.services.matrix_geometry import theta_frame
from ncgeo.services.universal_calculus import random_element

router = SuiteRouter(
    SuiteName.CE,
    sections="§5 Chevalley–Eilenberg calculus: d, ∧, contraction, Lie derivative, involution",
    parameters={
        "k_max": "top degree of the basis forms for d∘d = 0 (default 2)",
        "N": "number of points for the commutative cross-check (default 3)",
        "algebra": "extra algebra for the coboundary checks",
    },
    ledger={
        "d_ratio": "ce_d on degree k is (k+1)× the 1/(k+1)-weighted coboundary",
        "lie_derivative": "L_u = d∘ι_u + ι_u∘d",
    },
)


@router.setup
def fixtures(params: SuiteParams) -> dict:
    k_max = 2 if params.k_max is None else params.k_max
    if k_max > 3:
        raise UsageError(f"basis forms are checked up to degree 3, got k_max = {k_max}")
    algebras = [matrix_algebra(2), matrix_algebra(3), truncated_polynomial_algebra(3)]
    if params.algebra:
        algebras.append(algebra_from_name(params.algebra))
    return {"k_max": k_max, "N": params.N or 3, "algebras": algebras}


def random_form(frame: DerivationFrame, degree: int, rng: random.Random) -> CEForm:
    return form_from_values(frame, degree, lambda T: random_element(frame.algebra, rng))


def _samples(A: FiniteAlgebra, rng: random.Random):
    frame = derivation_frame(A)
    for _ in range(settings.property_samples):
        p, q = rng.randint(0, 1), rng.randint(0, 1)
        yield random_form(frame, p, rng), random_form(frame, q, rng)


@router.check("d-squares-to-zero", anchor="Eq (+840)")
def check_d_squared(ctx: CheckContext) -> Outcome:
    counted = {}
    for A in ctx["algebras"]:
        frame = derivation_frame(A)
        count = 0
        for k in range(ctx["k_max"] + 1):
            for n, phi in enumerate(basis_forms(frame, k)):
                if ce_d(ce_d(phi)):
                    return Outcome(False, "dd ≠ 0", {"algebra": A.label, "degree": k, "form": n})
                count += 1
        counted[A.label] = count
    return Outcome(True, f"basis forms checked {counted}")


@router.check("d-on-functions", anchor="Eq (+920)")
def check_d_functions(ctx: CheckContext) -> Outcome:
    for A in ctx["algebras"]:
        frame = derivation_frame(A)
        for i, a in enumerate(A.basis()):
            da = exterior_derivative(a, frame)
            for r, u in enumerate(frame.derivations):
                if da.evaluate((r,)) != u(a):
                    return Outcome(False, "(da)(u) ≠ u(a)", {"algebra": A.label, "a": i, "u": r})
    tf = theta_frame(2)
    F, G, H = tf.epsilons
    value = exterior_derivative(F, tf.frame).evaluate((1,))
    if value != H * -2:
        return Outcome(False, "(dε_F)(u_G) ≠ −2ε_H")
    return Outcome(True, "(dε_F)(u_G) = [ε_G, ε_F] = −2ε_H")


@router.check("weighted-coboundary-ratio", anchor="Eqs (+920)/(+921)")
def check_ratio(ctx: CheckContext) -> Outcome:
    frame = theta_frame(2).frame
    for k in (0, 1):
        ratio = normalisation_ratio(k)
        for n, phi in enumerate(basis_forms(frame, k)):
            if ce_d(phi) != weighted_d(phi).scaled(ratio):
                return Outcome(False, "ratio to the weighted coboundary", {"degree": k, "form": n})
    return Outcome(True, "degree 0 ratio 1, degree 1 ratio 2")


@router.check("graded-leibniz", anchor="§5")
def check_graded_leibniz(ctx: CheckContext) -> Outcome:
    rng = ctx.rng
    for A in (matrix_algebra(2), truncated_polynomial_algebra(3)):
        for n, (phi, psi) in enumerate(_samples(A, rng)):
            lhs = ce_d(wedge(phi, psi))
            second = wedge(phi, ce_d(psi))
            rhs = wedge(ce_d(phi), psi) + (-second if phi.degree % 2 else second)
            if lhs != rhs:
                return Outcome(False, "d(φ∧ψ) ≠ dφ∧ψ ± φ∧dψ", {"algebra": A.label, "sample": n})
    return Outcome(True, f"{settings.property_samples} samples per algebra")


@router.check("wedge-of-thetas", anchor="§5")
def check_wedge_thetas(ctx: CheckContext) -> Outcome:
    tf = theta_frame(2)
    A, f = tf.algebra, tf.size
    for q in range(f):
        for s in range(f):
            form = wedge(tf.thetas[q], tf.thetas[s])
            for a in range(f):
                for b in range(f):
                    expected = A.zero
                    if (q, s) == (a, b) and a != b:
                        expected = A.one
                    elif (q, s) == (b, a) and a != b:
                        expected = -A.one
                    if form.evaluate((a, b)) != expected:
                        return Outcome(False, "θ^q∧θ^s", {"q": q, "s": s, "a": a, "b": b})
    x, y = A.basis()[1], A.basis()[2]
    if wedge(function_form(tf.frame, x), function_form(tf.frame, y)) != function_form(
        tf.frame, x * y
    ):
        return Outcome(False, "degree-0 wedge is not the product")
    return Outcome(True)


@router.check("no-graded-commutativity", anchor="§5")
def check_graded_commutativity(ctx: CheckContext) -> Outcome:
    tf = theta_frame(2)
    A = tf.algebra
    names = A.basis_names
    for i, a in enumerate(A.basis()):
        for j, b in enumerate(A.basis()):
            phi = tf.thetas[0].left_multiply(a)
            psi = tf.thetas[1].left_multiply(b)
            if wedge(phi, psi) != -wedge(psi, phi):
                witness = {"phi": f"{names[i]}·θ^0", "psi": f"{names[j]}·θ^1"}
                return Outcome(True, "φ∧ψ ≠ −ψ∧φ", witness)
    return Outcome(False, "M_2-valued 1-forms anticommute")


@router.check("contraction", anchor="§5")
def check_contraction(ctx: CheckContext) -> Outcome:
    tf = theta_frame(2)
    A, frame = tf.algebra, tf.frame
    for q, u in enumerate(frame.derivations):
        for r in range(tf.size):
            expected = function_form(frame, A.one if q == r else A.zero)
            if contract(u, theta(frame, r)) != expected:
                return Outcome(False, "ι_{u_q}θ^r ≠ δ^r_q", {"q": q, "r": r})
        for n, phi in enumerate(basis_forms(frame, 2)):
            if contract(u, contract(u, phi)):
                return Outcome(False, "ι_u∘ι_u ≠ 0", {"u": q, "form": n})
    rng = ctx.rng
    for n in range(settings.property_samples):
        phi, psi = random_form(frame, 1, rng), random_form(frame, 1, rng)
        u = frame.derivations[rng.randrange(tf.size)]
        lhs = contract(u, wedge(phi, psi))
        rhs = wedge(contract(u, phi), psi) - wedge(phi, contract(u, psi))
        if lhs != rhs:
            return Outcome(False, "ι_u(φ∧ψ) ≠ ι_uφ∧ψ − φ∧ι_uψ", {"sample": n})
    return Outcome(True)


@router.check("lie-derivative", anchor="§5")
def check_lie_derivative(ctx: CheckContext) -> Outcome:
    frame = derivation_frame(matrix_algebra(2))
    A = frame.algebra
    for r, u in enumerate(frame.derivations):
        for i, a in enumerate(A.basis()):
            fa = function_form(frame, a)
            if lie_derivative(u, fa) != function_form(frame, u(a)):
                return Outcome(False, "L_u(a) ≠ u(a)", {"u": r, "a": i})
            if lie_derivative(u, ce_d(fa)) != ce_d(lie_derivative(u, fa)):
                return Outcome(False, "L_u∘d ≠ d∘L_u", {"u": r, "a": i})
    pairs = list(combinations(range(frame.size), 2))
    for n, phi in enumerate(basis_forms(frame, 1)):
        for r, q in pairs:
            u, v = frame.derivations[r], frame.derivations[q]
            lhs = lie_derivative(lie_bracket(u, v), phi)
            rhs = lie_derivative(u, lie_derivative(v, phi)) - lie_derivative(
                v, lie_derivative(u, phi)
            )
            if lhs != rhs:
                return Outcome(False, "L_[u,v] ≠ [L_u, L_v]", {"form": n, "pair": [r, q]})
    return Outcome(True)


@router.check("form-involution", anchor="§5")
def check_involution(ctx: CheckContext) -> Outcome:
    tf = theta_frame(2)
    frame = tf.frame
    for r, th in enumerate(tf.thetas):
        if form_involution(th) != th:
            return Outcome(False, "(θ^r)* ≠ θ^r", {"r": r})
    for k in (0, 1):
        for n, phi in enumerate(basis_forms(frame, k)):
            if form_involution(form_involution(phi)) != phi:
                return Outcome(False, "(φ*)* ≠ φ", {"degree": k, "form": n})
    A = tf.algebra
    real = A.basis()[0]
    if form_involution(function_form(frame, real)) != function_form(frame, real):
        return Outcome(False, "real 0-form moved")
    return Outcome(True)


@router.check("one-form-duality", anchor="Eq (+853)")
def check_duality(ctx: CheckContext) -> Outcome:
    found = {}
    for A in (matrix_algebra(2), function_algebra(ctx["N"]), truncated_polynomial_algebra(3)):
        report = one_form_duality(A)
        found[A.label] = [report.derivations_dim, report.dual_dim]
        if not report.bijective:
            witness = {"algebra": A.label, "rank": report.rank, "dims": found[A.label]}
            return Outcome(False, "Der(A) → (Ω¹)* is not bijective", witness)
    return Outcome(True, f"[dim Der, dim dual] {found}")


@router.check("differentials-central", anchor="§5 Remark")
def check_central(ctx: CheckContext) -> Outcome:
    for A in (truncated_polynomial_algebra(3), function_algebra(ctx["N"])):
        if not differentials_central(A).ok:
            return Outcome(False, f"da not central over the commutative {A.label}")
    report = differentials_central(matrix_algebra(2))
    if report.ok:
        return Outcome(False, "da central over M_2")
    return Outcome(True, "M_2: a·de_i ≠ de_i·a", report.witness)


@router.check("commutative-cross-check", anchor="§5")
def check_commutative(ctx: CheckContext) -> Outcome:
    F = function_algebra(ctx["N"])
    frame = derivation_frame(F)
    forms = ce_one_forms_module(frame)
    o1 = o1_module(F)
    if frame.size or forms.dim or o1.dim:
        witness = {"derivations": frame.size, "ce_one_forms": forms.dim, "o1": o1.dim}
        return Outcome(False, "forms of positive degree survive over points", witness)
    return Outcome(True, f"{F.label}: no derivations, CE Ω¹ = O¹ = 0")


@router.check("centre-multilinearity", anchor="§5")
def check_centre_multilinear(ctx: CheckContext) -> Outcome:
    """Basis forms over M_2 and the centre-linear 1-forms of algebras with a larger centre."""
    M2 = matrix_algebra(2)
    frame = derivation_frame(M2)
    for k in (1, 2):
        for n, phi in enumerate(basis_forms(frame, k)):
            if not is_centre_multilinear(phi):
                return Outcome(False, "φ(zu) ≠ zφ(u)", {"algebra": M2.label, "form": n})
    found = {}
    for A in (truncated_polynomial_algebra(3), direct_sum_algebra(M2, M2)):
        forms = ce_one_forms_module(derivation_frame(A))
        found[A.label] = forms.dim
        for n in range(forms.dim):
            phi = forms.form(el.unit_vector(forms.dim, n))
            if not is_centre_multilinear(phi):
                return Outcome(False, "φ(zu) ≠ zφ(u)", {"algebra": A.label, "form": n})
    return Outcome(True, f"centre-linear 1-forms {found}")
