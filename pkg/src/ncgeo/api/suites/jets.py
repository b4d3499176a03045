from ncgeo.api.router import CheckContext, Outcome, SuiteRouter, UsageError
from ncgeo.api.schemas import SuiteName, SuiteParams
from ncgeo.infrastructure import exactlin as el
from ncgeo.infrastructure.algebras import (
    algebra_from_name,
    direct_sum_algebra,
    function_algebra,
    matrix_algebra,
    truncated_polynomial_algebra,
)
from ncgeo.infrastructure.derivations import derivation_basis
from ncgeo.infrastructure.modules import (
    ModuleKind,
    algebra_as_module,
    free_module,
    vector_to_matrix,
)
from ncgeo.services.commutative_connections import (
    canonical_splitting,
    connection_as_derivation_law,
    connection_from_splitting,
    extend_derivations,
    identity_ring_connection,
    jet_sequence,
    leibniz_check,
    o1_duality,
    ring_connection_check,
    ring_difference_vanishes,
    sample_connections,
    shifted_ring_connection,
    splitting_from_connection,
    subalgebra_inclusion,
    vertical_derivations,
)
from ncgeo.services.jets import (
    DiffOperator,
    NonCommutativeAlgebraError,
    derivation_operator,
    diff_operator_space,
    diffop_to_hom,
    is_diffop,
    jet1_of_module_iso,
    jet1_splitting,
    jet_hom_space,
    jet_module,
    jet_projection,
    o1_module,
)

router = SuiteRouter(
    SuiteName.JETS,
    sections="§3–§4 jet modules, O¹, differential operators, commutative connections",
    parameters={
        "algebra": "commutative test algebra (default trunc-poly:3)",
        "N": "number of points for the split algebra (default 3)",
        "k_max": "top jet order for the tower checks (default 2, at most 3)",
    },
)


@router.setup
def fixtures(params: SuiteParams) -> dict:
    A = algebra_from_name(params.algebra) if params.algebra else truncated_polynomial_algebra(3)
    if not A.is_commutative:
        raise UsageError(f"the jets suite needs a commutative algebra, got {A.label}")
    k_max = 2 if params.k_max is None else params.k_max
    if not 1 <= k_max <= 3:
        raise UsageError(f"jet order k_max must be between 1 and 3, got {k_max}")
    return {"algebra": A, "N": params.N or 3, "k_max": k_max}


@router.check("noncommutative-rejected", anchor="§1")
def check_noncommutative(ctx: CheckContext) -> Outcome:
    M2 = matrix_algebra(2)
    try:
        jet_module(M2, algebra_as_module(M2, ModuleKind.LEFT), 1)
    except NonCommutativeAlgebraError as exc:
        return Outcome(True, str(exc))
    return Outcome(False, "jets over M_2 were built")


@router.check("o1-dimensions", anchor="§3")
def check_o1(ctx: CheckContext) -> Outcome:
    A, N = ctx["algebra"], ctx["N"]
    found = {
        function_algebra(N).label: o1_module(function_algebra(N)).dim,
        truncated_polynomial_algebra(3).label: o1_module(truncated_polynomial_algebra(3)).dim,
    }
    expected = {function_algebra(N).label: 0, truncated_polynomial_algebra(3).label: 2}
    if found != expected:
        return Outcome(False, f"dim O¹ {found}", {"expected": expected})
    return Outcome(True, f"dim O¹({A.label}) = {o1_module(A).dim}")


@router.check("jet-dimensions", anchor="§3")
def check_jets(ctx: CheckContext) -> Outcome:
    N = ctx["N"]
    F, T = function_algebra(N), truncated_polynomial_algebra(3)
    found = {
        F.label: jet_module(F, algebra_as_module(F, ModuleKind.LEFT), 1).dim,
        T.label: jet_module(T, algebra_as_module(T, ModuleKind.LEFT), 1).dim,
    }
    expected = {F.label: N, T.label: 5}
    ok = found == expected
    return Outcome(ok, f"dim J¹ {found}", None if ok else {"expected": expected})


@router.check("jet-tower", anchor="§3, inverse system")
def check_tower(ctx: CheckContext) -> Outcome:
    A = ctx["algebra"]
    P = algebra_as_module(A, ModuleKind.LEFT)
    jets = [jet_module(A, P, k) for k in range(ctx["k_max"] + 1)]
    for k in range(1, len(jets)):
        high, low = jets[k], jets[k - 1]
        if not high.mu.is_subspace_of(low.mu):
            return Outcome(False, "μ^{k+1} ⊄ μ^k", {"k": k})
        projection = jet_projection(high, low)
        if el.rank(projection) != low.dim:
            return Outcome(False, "projection is not onto", {"k": k})
        if not el.equal(el.matmul(projection, high.jet_matrix), low.jet_matrix):
            return Outcome(False, "π^k_{k−1}∘J^k ≠ J^{k−1}", {"k": k})
    for J in jets[1:]:
        if not el.equal(el.matmul(J.to_base, J.jet_matrix), el.identity(P.dim)):
            return Outcome(False, "π^k_0∘J^k ≠ id", {"k": J.order})
        for i, a in enumerate(A.basis()):
            for j, b in enumerate(A.basis()):
                La, Sb = J.left_matrix(a), J.star_matrix(b)
                if not el.equal(el.matmul(La, Sb), el.matmul(Sb, La)):
                    return Outcome(False, "left and ⋆ actions do not commute", {"pair": [i, j]})
    return Outcome(True, f"dimensions {[J.dim for J in jets]}")


@router.check("second-order-relation", anchor="Eq (mos041)")
def check_mu2_relation(ctx: CheckContext) -> Outcome:
    """1⊗abp − a⊗bp − b⊗ap + ab⊗p lies in μ² for basis a, b, p."""
    A = ctx["algebra"]
    P = algebra_as_module(A, ModuleKind.LEFT)
    J = jet_module(A, P, 1)
    basis = A.basis()
    for i, a in enumerate(basis):
        for j, b in enumerate(basis):
            for v in range(P.dim):
                p = P.basis_vector(v)
                terms = [
                    J.ambient(A.unit, P.act_left(a * b, p)),
                    J.ambient(a.coeffs, P.act_left(b, p)),
                    J.ambient(b.coeffs, P.act_left(a, p)),
                    J.ambient((a * b).coeffs, p),
                ]
                x = el.sub_vectors(
                    el.add_vectors(terms[0], terms[3]), el.add_vectors(terms[1], terms[2])
                )
                if not J.mu.contains(x):
                    return Outcome(False, "relation leaves μ²", {"a": i, "b": j, "p": v})
    return Outcome(True)


@router.check("jet-is-differential-operator", anchor="Eq (5.44)")
def check_jet_order(ctx: CheckContext) -> Outcome:
    A = ctx["algebra"]
    P = algebra_as_module(A, ModuleKind.LEFT)
    for k in range(1, ctx["k_max"] + 1):
        J = jet_module(A, P, k)
        check = is_diffop(DiffOperator(P, J.as_module(), J.jet_matrix), k)
        if not check.ok:
            return Outcome(False, f"J^{k} is not of order {k}", {"tuple": list(check.witness)})
    return Outcome(True)


@router.check("d1-leibniz", anchor="Eq (+850)")
def check_d1(ctx: CheckContext) -> Outcome:
    A = ctx["algebra"]
    o1 = o1_module(A)
    if any(o1.d1(A.one)):
        return Outcome(False, "d¹1 ≠ 0")
    for i, a in enumerate(A.basis()):
        for j, b in enumerate(A.basis()):
            lhs = o1.d1(b * a)
            rhs = el.add_vectors(
                o1.module.act_left(b, o1.d1(a)), o1.module.act_left(a, o1.d1(b))
            )
            if lhs != rhs:
                return Outcome(False, "d¹(ba) ≠ b d¹a + a d¹b", {"pair": [i, j]})
            if o1.module.act_left(a, o1.d1(b)) != o1.module.act_right(o1.d1(b), a):
                return Outcome(False, "a·d¹b ≠ d¹b·a", {"pair": [i, j]})
    d1_op = DiffOperator(algebra_as_module(A, ModuleKind.LEFT), o1.module, o1.d1_matrix)
    if o1.dim and (is_diffop(d1_op, 0).ok or not is_diffop(d1_op, 1).ok):
        return Outcome(False, "d¹ is not of exact order 1")
    return Outcome(True)


@router.check("jet1-splitting", anchor="§3, split sequence")
def check_splitting(ctx: CheckContext) -> Outcome:
    A = ctx["algebra"]
    split = jet1_splitting(A)
    if split.jet.dim != A.dim + split.o1.dim:
        return Outcome(False, "dim J¹ ≠ dim A + dim O¹")
    for b in range(split.jet.dim):
        j = el.unit_vector(split.jet.dim, b)
        if split.reassemble(*split.decompose(j)) != j:
            return Outcome(False, "decompose/reassemble round trip", {"basis": b})
    return Outcome(True)


@router.check("jet-tensor-isomorphism", anchor="(mos071)")
def check_jet_iso(ctx: CheckContext) -> Outcome:
    A = ctx["algebra"]
    P = free_module(A, 2, ModuleKind.LEFT)
    iso = jet1_of_module_iso(A, P)
    size = iso.forward.shape[0]
    ok = el.equal(el.matmul(iso.forward, iso.backward), el.identity(size))
    return Outcome(ok, f"J¹(A^2) ≅ J¹⊗A^2 of dimension {size}")


@router.check("representative-object", anchor="Eq (5.50)")
def check_representative(ctx: CheckContext) -> Outcome:
    A = ctx["algebra"]
    P = algebra_as_module(A, ModuleKind.LEFT)
    J = jet_module(A, P, 1)
    ops = diff_operator_space(P, P, 1)
    homs = jet_hom_space(J, P)
    if ops.dim != homs.dim:
        return Outcome(False, "dim Diff₁ ≠ dim Hom(J¹, Q)", {"diff": ops.dim, "hom": homs.dim})
    for n, v in enumerate(ops.vectors()):
        op = DiffOperator(P, P, vector_to_matrix(v, P.dim, P.dim))
        f = diffop_to_hom(op, 1)
        if not el.equal(el.matmul(f, J.jet_matrix), op.map):
            return Outcome(False, "f^Δ∘J¹ ≠ Δ", {"basis": n})
    for t, tau in enumerate(derivation_basis(A)):
        if not is_diffop(derivation_operator(tau.action, P), 1).ok:
            return Outcome(False, "derivation is not first order", {"tau": t})
    return Outcome(True, f"dim Diff₁ = dim Hom = {ops.dim}")


@router.check("connection-round-trip", anchor="Defs (+176)/(+181)")
def check_round_trip(ctx: CheckContext) -> Outcome:
    A = ctx["algebra"]
    seq = jet_sequence(algebra_as_module(A, ModuleKind.LEFT))
    if not seq.is_exact():
        return Outcome(False, "0 → O¹⊗P → J¹(P) → P → 0 is not exact")
    canonical = connection_from_splitting(seq, canonical_splitting(seq))
    if not el.equal(canonical.covariant, seq.o1.d1_matrix):
        return Outcome(False, "canonical splitting does not give d¹")
    count = 0
    for n, nabla in enumerate(sample_connections(seq, ctx.check_id)):
        if not leibniz_check(seq, nabla.covariant).ok:
            return Outcome(False, "sampled connection breaks Leibniz", {"sample": n})
        gamma = splitting_from_connection(seq, nabla.covariant).splitting
        again = connection_from_splitting(seq, gamma)
        if not el.equal(again.covariant, nabla.covariant):
            return Outcome(False, "Γ ↔ ∇ round trip", {"sample": n})
        count += 1
    return Outcome(True, f"{count} sampled connections")


@router.check("derivation-law", anchor="Eq (5.81)")
def check_derivation_law(ctx: CheckContext) -> Outcome:
    A = ctx["algebra"]
    report = o1_duality(A)
    if not report.bijective:
        return Outcome(
            False, "Der(A) → Hom(O¹, A) is not bijective",
            {"derivations": report.derivations_dim, "hom": report.hom_dim, "rank": report.rank},
        )
    seq = jet_sequence(algebra_as_module(A, ModuleKind.LEFT))
    for n, nabla in enumerate(sample_connections(seq, ctx.check_id, count=5)):
        violation = connection_as_derivation_law(nabla).rule_violation()
        if violation is not None:
            return Outcome(False, "∇_τ(fs) ≠ τ(f)s + f∇_τ(s)", {"sample": n, **violation})
    return Outcome(True, f"dim Hom(O¹, A) = dim Der(A) = {report.hom_dim}")


@router.check("ring-connections", anchor="§4")
def check_ring_connections(ctx: CheckContext) -> Outcome:
    """A ⊂ A⊕A diagonally, then C[x]/x³ ⊂ C[y]/y⁶ by x ↦ y² shifted by a vertical derivation."""
    A = ctx["algebra"]
    identity = identity_ring_connection(A)
    if not ring_connection_check(identity).ok:
        return Outcome(False, "∇_τ = τ is not a ring connection")
    S = direct_sum_algebra(A, A)
    images = [e.coeffs + e.coeffs for e in A.basis()]
    diagonal = extend_derivations(S, A, subalgebra_inclusion(S, A, images))
    check = ring_connection_check(diagonal)
    if not check.ok:
        return Outcome(False, "diagonal extension is not a ring connection", check.witness)
    # derivations of A⊕A act componentwise
    if vertical_derivations(S, diagonal.inclusion):
        return Outcome(False, "A⊕A has vertical derivations over the diagonal")
    T, R = truncated_polynomial_algebra(3), truncated_polynomial_algebra(6)
    squares = extend_derivations(
        R, T, subalgebra_inclusion(R, T, [R.basis_element(2 * i).coeffs for i in range(T.dim)])
    )
    if not ring_connection_check(squares).ok:
        return Outcome(False, "x ↦ y² extension is not a ring connection")
    vertical = vertical_derivations(R, squares.inclusion)
    if len(vertical) != 1:
        return Outcome(False, "expected one vertical derivation", {"vertical": len(vertical)})
    shifted = shifted_ring_connection(squares, vertical * len(squares.derivations))
    if not ring_connection_check(shifted).ok:
        return Outcome(False, "shifted connection is not a ring connection")
    if not ring_difference_vanishes(squares, shifted):
        return Outcome(False, "difference of two ring connections is not vertical")
    return Outcome(True, f"{len(squares.derivations)} derivations of {T.label} lift to {R.label}")
