import pytest

from ncgeo.infrastructure import exactlin as el
from ncgeo.infrastructure.algebras import algebra_matrix
from ncgeo.infrastructure.modules import ModuleKind, ModuleKindError, projective_from_idempotent
from ncgeo.services.connes import (
    GaugeLinearityError,
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
    omega_d_one_module,
    operator_star,
    path_triple,
    pi_rep,
    two_point_triple,
)
from ncgeo.services.universal_calculus import DegreeBoundError, as_form, monomial, udelta


@pytest.fixture
def diagonal_projection(two_point):
    A = two_point.algebra
    return algebra_matrix(A, [[A.basis_element(0), 0], [0, 0]])


def test_two_point_triple(two_point):
    assert two_point.violation() is None
    assert not two_point.is_degenerate
    G, D = two_point.grading, two_point.D
    assert el.is_zero(el.add(el.matmul(G, D), el.matmul(D, G)))


def test_degenerate_and_invalid_triples_are_rejected():
    with pytest.raises(SpectralTripleError):
        two_point_triple(0)
    assert two_point_triple(0, allow_degenerate=True).is_degenerate
    with pytest.raises(SpectralTripleError):
        finite_space_triple(el.from_entries({(0, 1): el.scalar(1)}, 2, 2))


@pytest.mark.parametrize("m", ["1", "1/2", "1+2i"])
def test_dirac_bracket(m):
    m = el.parse_scalar(m)
    t = two_point_triple(m)
    expected = el.from_entries({(0, 1): -m, (1, 0): el.conj(m)}, 2, 2)
    assert el.equal(t.commutator(t.algebra.basis_element(0)), expected)


def test_pi_on_functions_and_differentials(two_point):
    A = two_point.algebra
    for a in A.basis():
        assert el.equal(pi_rep(two_point, as_form(a)), two_point.rep_of(a))
    assert el.is_zero(pi_rep(two_point, udelta(A.one)))
    e1, e2 = A.basis()
    image = pi_rep(two_point, monomial(e1, [e2]))
    assert sum(1 for value in image.to_dok().values() if value) == 1


def test_pi_is_a_star_representation(two_point):
    assert multiplicativity_check(two_point, samples=20).ok
    assert adjoint_check(two_point, samples=20).ok
    e1, e2 = two_point.algebra.basis()
    w = monomial(e1, [e2])
    assert el.equal(pi_rep(two_point, operator_star(w)), el.adjoint(pi_rep(two_point, w)))


def test_omega_d_dimensions(two_point):
    calc = junk_and_omega_D(two_point, 2)
    dims = calc.dims()
    assert dims[:2] == [2, 2]
    assert calc[0].junk0.dim == 0
    assert all(degree.dimension_consistent for degree in calc.degrees)


def test_degree_bound(two_point):
    with pytest.raises(DegreeBoundError):
        junk_and_omega_D(two_point, 5)
    with pytest.raises(DegreeBoundError):
        junk_and_omega_D(two_point, 1).d_matrix(1)


def test_connes_differential(two_point):
    calc = junk_and_omega_D(two_point, 2)
    assert calc.well_defined_check().ok
    assert calc.d_squared_check().ok
    assert calc.ideal_check(samples=20).ok


def test_project_and_lift(two_point):
    degree = junk_and_omega_D(two_point, 1)[1]
    e1, e2 = two_point.algebra.basis()
    cls = degree.project(monomial(e1, [e2]))
    assert degree.project(degree.lift(cls)) == cls
    with pytest.raises(el.DimensionMismatchError):
        degree.project(as_form(e1))


def test_junk_witness_on_the_path_only(two_point):
    assert junk_and_omega_D(two_point, 2).junk_witness() is None
    witness = junk_and_omega_D(path_triple(), 2).junk_witness()
    assert witness is not None
    assert witness.degree == 1
    assert witness.as_dict()["degree"] == 1


def test_omega_d_one_is_a_bimodule(two_point):
    module = omega_d_one_module(two_point)
    assert module.dim == 2
    assert module.axiom_violation() is None
    # functions act differently on the two sides of [D, a]
    assert not module.central
    assert module.centrality_violation() == {"axiom": "centrality", "centre_basis": 0}


def test_grassmann_connections(two_point, diagonal_projection):
    A = two_point.algebra
    e1 = A.basis_element(0)
    g = algebra_matrix(A, [[1, e1], [0, 1]])
    g_inv = algebra_matrix(A, [[1, -e1], [0, 1]])
    for p in (
        algebra_matrix(A, [[1, 0], [0, 1]]),
        diagonal_projection,
        conjugate_idempotent(diagonal_projection, g, g_inv),
    ):
        P = projective_from_idempotent(A, p, ModuleKind.RIGHT)
        assert leibniz_check(grassmann_connection(two_point, P)).ok


def test_grassmann_connection_needs_a_right_module(two_point, diagonal_projection):
    P = projective_from_idempotent(two_point.algebra, diagonal_projection, ModuleKind.LEFT)
    with pytest.raises(ModuleKindError):
        grassmann_connection(two_point, P)


def test_conjugation_checks_the_inverse(two_point, diagonal_projection):
    A = two_point.algebra
    g = algebra_matrix(A, [[1, A.basis_element(0)], [0, 1]])
    with pytest.raises(ValueError):
        conjugate_idempotent(diagonal_projection, g, g)


def test_gauge_fields(two_point, diagonal_projection):
    P = projective_from_idempotent(two_point.algebra, diagonal_projection, ModuleKind.RIGHT)
    nabla = grassmann_connection(two_point, P)
    rows, cols = nabla.tensor.dim, nabla.module.dim
    assert el.equal(add_gauge(nabla, el.zeros(rows, cols)).map, nabla.map)
    for sigma in gauge_field_basis(nabla):
        shifted = add_gauge(nabla, sigma)
        assert leibniz_check(shifted).ok
        assert difference_check(shifted, nabla).ok


def test_non_linear_gauge_field_is_rejected(two_point, diagonal_projection):
    P = projective_from_idempotent(two_point.algebra, diagonal_projection, ModuleKind.RIGHT)
    nabla = grassmann_connection(two_point, P)
    rows, cols = nabla.tensor.dim, nabla.module.dim
    candidates = [
        el.from_entries({(i, j): el.scalar(1)}, rows, cols)
        for i in range(rows)
        for j in range(cols)
    ]
    bad = next(s for s in candidates if linearity_defect(nabla, s) is not None)
    with pytest.raises(GaugeLinearityError):
        add_gauge(nabla, bad)
