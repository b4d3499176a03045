from ncgeo.api.router import CheckContext, Outcome, SuiteRouter, UsageError
from ncgeo.api.schemas import SuiteName, SuiteParams
from ncgeo.infrastructure import exactlin as el
from ncgeo.services.ce_calculus import ce_d, exterior_derivative, one_form_duality
from ncgeo.services.connections import dv_check, is_flat
from ncgeo.services.matrix_geometry import (
    MatrixSizeError,
    ThetaFrame,
    depsilon_check,
    flat_torsion_check,
    frame_checks,
    linear_connection,
    linear_connection_space,
    maurer_cartan_check,
    omega_table,
    scalar_omega,
    structure_check,
    theta_element_check,
    theta_frame,
    torsion_free_solver,
)

router = SuiteRouter(
    SuiteName.MATRIX_GEOMETRY,
    sections="§8 θ-frame over M_n, dε, Maurer–Cartan, θ element, linear connections, torsion",
    parameters={"n": "matrix size; default runs n = 2 and n = 3 (n ≥ 4 needs NCGEO_ALLOW_N4)"},
    ledger={
        "lambda": "-1/2",
        "lambda_convention": "ω = λc is torsion-free for λ = −1/2 under the unweighted d; the "
        "1/(k+1)-weighted coboundary halves it to −1/4",
        "s": -1,
        "s_convention": "da = s(aθ − θa) with u_r = ad ε_r and ad b(a) = ba − ab",
        "torsion_free_uniqueness": "only the antisymmetric part of ω is pinned; the solution "
        "space and the ad-proportional representative are both reported",
    },
)


@router.setup
def fixtures(params: SuiteParams) -> dict:
    sizes = [params.n] if params.n else [2, 3]
    try:
        frames = [theta_frame(n) for n in sizes]
    except MatrixSizeError as exc:
        raise UsageError(str(exc)) from exc
    return {"frames": frames}


def _frames(ctx: CheckContext) -> list[ThetaFrame]:
    return ctx["frames"]


@router.check("structure-constants", anchor="§8")
def check_structure(ctx: CheckContext) -> Outcome:
    for tf in _frames(ctx):
        report = structure_check(tf)
        if not report.ok:
            return Outcome(False, f"structure constants of su({tf.n})", report.witness)
    return Outcome(True)


@router.check("theta-frame", anchor="Eqs (+930)/(+931)")
def check_frame(ctx: CheckContext) -> Outcome:
    dims = {}
    for tf in _frames(ctx):
        report = frame_checks(tf)
        if not report.ok:
            return Outcome(False, f"θ-frame over M_{tf.n}", report.witness)
        dims[tf.n] = report.values["dim_one_forms"]
        if dims[tf.n] != (tf.n**2 - 1) * tf.n**2:
            return Outcome(False, "Ω¹ is not free of rank n²−1", {"n": tf.n, "dim": dims[tf.n]})
    return Outcome(True, f"dim Ω¹[M_n] by n: {dims}")


@router.check("d-epsilon", anchor="Eq (+922)")
def check_depsilon(ctx: CheckContext) -> Outcome:
    for tf in _frames(ctx):
        report = depsilon_check(tf)
        if not report.ok:
            return Outcome(False, f"dε_r over M_{tf.n}", report.witness)
        F, G = tf.epsilons[0], tf.epsilons[1]
        if exterior_derivative(F, tf.frame).evaluate((1,)) != G.commutator(F):
            return Outcome(False, "(dε_F)(u_G) ≠ [ε_G, ε_F]", {"n": tf.n})
    return Outcome(True)


@router.check("maurer-cartan", anchor="Eq (+934)")
def check_maurer_cartan(ctx: CheckContext) -> Outcome:
    for tf in _frames(ctx):
        report = maurer_cartan_check(tf)
        if not report.ok:
            return Outcome(False, f"dθ^r over M_{tf.n}", report.witness)
        if tf.n == 2:
            # (dθ^H)(u_F, u_G) = −c^H_FG
            value = ce_d(tf.thetas[2]).evaluate((0, 1))
            if value != tf.algebra.scalar_element(-tf.c(2, 0, 1)):
                return Outcome(False, "(dθ^H)(u_F, u_G) ≠ −c^H_FG")
    return Outcome(True)


@router.check("theta-element", anchor="§8")
def check_theta_element(ctx: CheckContext) -> Outcome:
    signs = {}
    for tf in _frames(ctx):
        report = theta_element_check(tf)
        if not report.ok:
            return Outcome(False, f"da ≠ s(aθ − θa) over M_{tf.n}", report.witness)
        signs[tf.n] = report.values["s"]
    if set(signs.values()) != {-1}:
        return Outcome(False, "global sign is not −1", {"s": signs})
    return Outcome(True, f"s by n: {signs}")


@router.check("linear-connections", anchor="Eqs (+932)/(+933)")
def check_linear_connections(ctx: CheckContext) -> Outcome:
    rng = ctx.rng
    for tf in _frames(ctx):
        space = linear_connection_space(tf)
        if space.dimension != space.expected or not space.scalar_only:
            witness = {"n": tf.n, "dimension": space.dimension, "expected": space.expected}
            return Outcome(False, "ω is not forced to be scalar", witness)
        omega = scalar_omega(tf, lambda p, r, q: rng.randint(-3, 3))
        check = dv_check(linear_connection(tf, omega))
        if not check.ok:
            return Outcome(False, "scalar ω rejected", {"n": tf.n} | check.witness)
        A = tf.algebra
        e12 = A.basis_element(1)
        injected = omega_table(tf, lambda p, r, q: e12 if (p, r, q) == (0, 0, 0) else A.zero)
        if dv_check(linear_connection(tf, injected)).ok:
            return Outcome(False, "non-scalar ω accepted", {"n": tf.n})
    return Outcome(True, "dimension (n²−1)³, all ω scalar")


@router.check("torsion-free-solver", anchor="§8")
def check_torsion_free(ctx: CheckContext) -> Outcome:
    found = {}
    for tf in _frames(ctx):
        solution = torsion_free_solver(tf)
        f = tf.size
        expected = f * f * (f + 1) // 2
        found[tf.n] = el.format_scalar(solution.lam)
        if solution.dimension != expected:
            return Outcome(
                False, "solution space dimension",
                {"n": tf.n, "dimension": solution.dimension, "expected": expected},
            )
        if solution.lam != el.scalar("-1/2") or not solution.verified:
            return Outcome(False, "ω = λc", {"n": tf.n, "lambda": found[tf.n]})
    return Outcome(True, f"λ by n: {found}")


@router.check("flat-connection-torsion", anchor="§8")
def check_flat_torsion(ctx: CheckContext) -> Outcome:
    for tf in _frames(ctx):
        report = flat_torsion_check(tf)
        if not report.ok:
            return Outcome(False, "(Tθ^p)(u_r, u_q) ≠ −c^p_rq", {"n": tf.n} | report.witness)
        A = tf.algebra
        nabla = linear_connection(tf, omega_table(tf, lambda p, r, q: A.zero))
        if not is_flat(nabla):
            return Outcome(False, "ω = 0 connection is curved", {"n": tf.n})
    return Outcome(True)


@router.check("derivation-duality", anchor="§8")
def check_duality(ctx: CheckContext) -> Outcome:
    for tf in _frames(ctx):
        report = one_form_duality(tf.algebra)
        if not report.bijective:
            return Outcome(False, f"Der(M_{tf.n}) → (Ω¹)* is not bijective", {"rank": report.rank})
    return Outcome(True)
