import pytest

from ncgeo.infrastructure import exactlin as el
from ncgeo.infrastructure.algebras import (
    algebra_matrix,
    direct_sum_algebra,
    truncated_polynomial_algebra,
)
from ncgeo.infrastructure.modules import (
    ModuleKind,
    algebra_as_module,
    free_module,
    projective_from_idempotent,
)
from ncgeo.services.commutative_connections import (
    ConnectionLeibnizError,
    NotASplittingError,
    RingConnectionError,
    canonical_splitting,
    connection_as_derivation_law,
    connection_from_splitting,
    extend_derivations,
    grassmann_splitting,
    hom_o1p_basis,
    identity_ring_connection,
    jet_sequence,
    leibniz_check,
    o1_duality,
    ring_connection_check,
    ring_difference_vanishes,
    sample_connections,
    shifted_ring_connection,
    splitting_check,
    splitting_from_connection,
    subalgebra_inclusion,
    vertical_derivations,
)
from ncgeo.services.jets import NonCommutativeAlgebraError


@pytest.fixture
def sequence(T3):
    return jet_sequence(algebra_as_module(T3, ModuleKind.LEFT))


@pytest.fixture
def diagonal(T3):
    S = direct_sum_algebra(T3, T3)
    images = [e.coeffs + e.coeffs for e in T3.basis()]
    return extend_derivations(S, T3, subalgebra_inclusion(S, T3, images))


def test_jet_sequence_is_exact(sequence, T3):
    assert sequence.is_exact()
    assert jet_sequence(free_module(T3, 2, ModuleKind.LEFT)).is_exact()


def test_jet_sequence_needs_commutative_algebra(M2):
    with pytest.raises(NonCommutativeAlgebraError):
        jet_sequence(algebra_as_module(M2, ModuleKind.LEFT))


def test_canonical_splitting_gives_d1(sequence):
    gamma = canonical_splitting(sequence)
    assert splitting_check(sequence, gamma).ok
    nabla = connection_from_splitting(sequence, gamma)
    assert el.equal(nabla.covariant, sequence.o1.d1_matrix)
    assert leibniz_check(sequence, nabla.covariant).ok


def test_non_splittings_and_non_connections_are_rejected(sequence):
    with pytest.raises(NotASplittingError):
        connection_from_splitting(sequence, el.zeros(sequence.jet.dim, 3))
    zero = el.zeros(sequence.tensor.dim, 3)
    assert not leibniz_check(sequence, zero).ok
    with pytest.raises(ConnectionLeibnizError):
        splitting_from_connection(sequence, zero)


def test_connections_and_splittings_correspond(sequence):
    for nabla in sample_connections(sequence, "round-trip", count=5):
        assert leibniz_check(sequence, nabla.covariant).ok
        gamma = splitting_from_connection(sequence, nabla.covariant).splitting
        assert splitting_check(sequence, gamma).ok
        again = connection_from_splitting(sequence, gamma)
        assert el.equal(again.covariant, nabla.covariant)


def test_sampling_is_deterministic(sequence):
    first = [c.covariant for c in sample_connections(sequence, "same", count=3)]
    second = [c.covariant for c in sample_connections(sequence, "same", count=3)]
    assert all(el.equal(a, b) for a, b in zip(first, second))


def test_connections_differ_by_module_maps(sequence):
    # Hom_A(A, O¹) ≅ O¹
    assert len(hom_o1p_basis(sequence)) == sequence.o1.dim


def test_grassmann_connection_on_projective_module(T3):
    p = algebra_matrix(T3, [[1, 0], [0, 0]])
    P = projective_from_idempotent(T3, p, ModuleKind.LEFT)
    seq = jet_sequence(P)
    gamma = grassmann_splitting(seq)
    assert splitting_check(seq, gamma).ok
    assert leibniz_check(seq, connection_from_splitting(seq, gamma).covariant).ok
    with pytest.raises(ValueError):
        grassmann_splitting(jet_sequence(algebra_as_module(T3, ModuleKind.LEFT)))


@pytest.mark.parametrize("name", ["T3", "C3"])
def test_derivations_are_dual_to_differentials(name, request):
    report = o1_duality(request.getfixturevalue(name))
    assert report.bijective


def test_connection_as_derivation_law(sequence):
    for nabla in sample_connections(sequence, "law", count=3):
        law = connection_as_derivation_law(nabla)
        assert len(law.operators) == 2
        assert law.rule_violation() is None


def test_identity_ring_connection(T3):
    assert ring_connection_check(identity_ring_connection(T3)).ok


def test_diagonal_ring_connection_has_no_vertical_freedom(diagonal):
    assert ring_connection_check(diagonal).ok
    # derivations of A⊕A act componentwise
    assert vertical_derivations(diagonal.ring, diagonal.inclusion) == []


def test_ring_connections_differ_by_vertical_derivations(T3):
    R = truncated_polynomial_algebra(6)
    images = [R.basis_element(2 * i).coeffs for i in range(3)]
    squares = extend_derivations(R, T3, subalgebra_inclusion(R, T3, images))
    assert ring_connection_check(squares).ok
    vertical = vertical_derivations(R, squares.inclusion)
    # only y⁵ d/dy kills y²
    assert len(vertical) == 1
    shifted = shifted_ring_connection(squares, vertical * 2)
    assert ring_connection_check(shifted).ok
    assert ring_difference_vanishes(squares, shifted)


def test_inclusion_must_be_unital(T3):
    S = direct_sum_algebra(T3, T3)
    images = [e.coeffs + el.zero_vector(3) for e in T3.basis()]
    with pytest.raises(RingConnectionError):
        subalgebra_inclusion(S, T3, images)
