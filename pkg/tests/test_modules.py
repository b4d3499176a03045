import pytest

from ncgeo.infrastructure import exactlin as el
from ncgeo.infrastructure.algebras import AlgebraMismatchError, algebra_matrix
from ncgeo.infrastructure.modules import (
    FiniteModule,
    ModuleAxiomError,
    ModuleKind,
    ModuleKindError,
    NotIdempotentError,
    algebra_as_module,
    direct_sum_modules,
    double_dual_map,
    dual_module,
    free_module,
    hom_space,
    matrix_to_vector,
    projective_from_idempotent,
    tensor_modules,
    vector_to_matrix,
)


def test_kind_pairs():
    assert ModuleKind.RIGHT.value == (1, 0)
    assert ModuleKind.LEFT.value == (0, 1)
    assert ModuleKind.BIMODULE.dual() is ModuleKind.CENTRE
    assert ModuleKind.RIGHT.dual() is ModuleKind.LEFT
    assert ModuleKind.from_sides(left_full=True, right_full=False) is ModuleKind.LEFT


@pytest.mark.parametrize("kind", list(ModuleKind))
def test_free_modules_satisfy_axioms(M2, kind):
    P = free_module(M2, 2, kind)
    assert P.dim == 8
    assert P.free_rank == 2
    assert P.axiom_violation() is None


def test_one_sided_module_accepts_only_central_elements_on_other_side(M2):
    P = free_module(M2, 1, ModuleKind.RIGHT)
    assert el.equal(P.left_matrix(M2.scalar_element(2)), el.scale(el.scalar(2), el.identity(4)))
    with pytest.raises(ModuleKindError):
        P.left_matrix(M2.basis_element(1))


def test_wrong_algebra_is_rejected(M2, T3):
    P = free_module(M2, 1, ModuleKind.LEFT)
    with pytest.raises(AlgebraMismatchError):
        P.left_matrix(T3.one)


def test_actions_on_vectors(M2):
    A = algebra_as_module(M2)
    E12, E21 = M2.basis_element(1), M2.basis_element(2)
    assert A.act_left(E12, E21.coeffs) == (E12 * E21).coeffs
    assert A.act_right(E21.coeffs, E12) == (E21 * E12).coeffs


def test_as_kind_forgets_a_side(M2):
    A = algebra_as_module(M2)
    right = A.as_kind(ModuleKind.RIGHT)
    assert right.kind is ModuleKind.RIGHT
    assert right.axiom_violation() is None
    with pytest.raises(ModuleKindError):
        right.as_kind(ModuleKind.LEFT)


def twisted_bimodule(C3, central):
    """C³ with the right action twisted by the cyclic shift of points."""
    right = tuple(C3.left_matrix(C3.basis_element((i + 1) % 3)) for i in range(3))
    return FiniteModule(
        C3, ModuleKind.BIMODULE, 3, C3.left_matrices, right, label="twisted", central=central
    )


def test_centrality_is_an_axiom_unless_waived(C3):
    with pytest.raises(ModuleAxiomError):
        twisted_bimodule(C3, central=True).validate()
    module = twisted_bimodule(C3, central=False).validate()
    assert module.centrality_violation() == {"axiom": "centrality", "centre_basis": 0}
    assert module.as_kind(ModuleKind.BIMODULE).central is False
    assert algebra_as_module(C3).centrality_violation() is None


def test_direct_sum(M2):
    P = free_module(M2, 1, ModuleKind.LEFT)
    Q = free_module(M2, 2, ModuleKind.LEFT)
    S = direct_sum_modules(P, Q)
    assert S.dim == 12
    assert S.axiom_violation() is None
    with pytest.raises(ModuleKindError):
        direct_sum_modules(P, free_module(M2, 1, ModuleKind.RIGHT))


def test_matrix_vector_flattening():
    X = el.matrix([[1, 2, 3], [4, 5, 6]])
    v = matrix_to_vector(X)
    assert v == el.vector([1, 2, 3, 4, 5, 6])
    assert el.equal(vector_to_matrix(v, 2, 3), X)


def test_hom_space_of_commuting_matrices():
    N = el.matrix([[1, 0], [0, 2]])
    space = hom_space([(N, N)], 2, 2)
    # the commutant of a diagonal matrix with distinct entries is diagonal
    assert space.dim == 2
    assert hom_space([], 2, 3).dim == 6


def test_dual_of_free_right_module(M2):
    P = free_module(M2, 2, ModuleKind.RIGHT)
    D = dual_module(P)
    assert D.kind is ModuleKind.LEFT
    assert D.dim == 8
    assert D.axiom_violation() is None
    for coords in (el.unit_vector(D.dim, 0), el.unit_vector(D.dim, 5)):
        F = D.map_of(coords)
        assert D.coordinates_of_map(F) == coords


def test_double_dual_is_an_isomorphism_for_free_modules(M2):
    P = free_module(M2, 1, ModuleKind.LEFT)
    assert el.rank(double_dual_map(P)) == P.dim


def test_bimodule_dual_is_centre_module(M2):
    D = dual_module(algebra_as_module(M2))
    assert D.kind is ModuleKind.CENTRE
    # bimodule maps M_2 → M_2 are multiples of the identity
    assert D.dim == 1


def test_tensor_over_the_algebra(M2):
    A = algebra_as_module(M2)
    T = tensor_modules(A, A)
    assert T.kind is ModuleKind.BIMODULE
    assert T.dim == 4
    assert T.axiom_violation() is None
    one = M2.one.coeffs
    E12 = M2.basis_element(1).coeffs
    assert T.element(E12, one) == T.element(one, E12)


def test_tensor_needs_matching_sides(M2):
    L = free_module(M2, 1, ModuleKind.LEFT)
    with pytest.raises(ModuleKindError):
        tensor_modules(L, L)


def test_projective_module_from_idempotent(M2):
    E11 = M2.basis_element(0)
    p = algebra_matrix(M2, [[1, 0], [0, 0]])
    P = projective_from_idempotent(M2, p, ModuleKind.RIGHT)
    assert P.dim == 4
    assert P.rank == 2
    assert P.axiom_violation() is None
    q = algebra_matrix(M2, [[E11]])
    Q = projective_from_idempotent(M2, q, ModuleKind.LEFT)
    assert Q.dim == 2
    with pytest.raises(NotIdempotentError):
        projective_from_idempotent(M2, algebra_matrix(M2, [[2]]))
    with pytest.raises(ModuleKindError):
        projective_from_idempotent(M2, p, ModuleKind.BIMODULE)


def test_projective_coordinates_round_trip(M2):
    p = algebra_matrix(M2, [[M2.basis_element(0)]])
    P = projective_from_idempotent(M2, p, ModuleKind.RIGHT)
    for v in range(P.dim):
        coords = P.basis_vector(v)
        assert P.coordinates(P.ambient(coords)) == coords
