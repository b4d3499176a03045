import pytest

from ncgeo.config import settings
from ncgeo.infrastructure import exactlin as el
from ncgeo.infrastructure.algebras import algebra_matrix
from ncgeo.infrastructure.derivations import inner_derivation, zero_derivation
from ncgeo.infrastructure.modules import (
    ModuleKind,
    ModuleKindError,
    algebra_as_module,
    free_module,
    projective_from_idempotent,
)
from ncgeo.services.connections import dv_check
from ncgeo.services.universal_calculus import DegreeBoundError, udelta
from ncgeo.services.universal_connections import (
    UniversalConnection,
    UniversalLeibnizError,
    add_morphism,
    bimodule_pair_check,
    curvature_module_check,
    delta_connection,
    extend,
    grassmann_universal_connection,
    interior_reduce,
    permutation_flip,
    reduced_connection,
    universal_check,
    universal_curvature,
)


def left_shift(A, b):
    """σ(a) = a·δb on the left module A."""
    db = udelta(b).coeffs
    identity = el.identity(A.dim)
    return el.from_columns(
        [el.apply(el.kron(A.left_matrix(e), identity), db) for e in A.basis()], A.dim**2
    )


def right_shift(A, b):
    """σ(a) = δb·a on the right module A."""
    db = udelta(b).coeffs
    identity = el.identity(A.dim)
    return el.from_columns(
        [el.apply(el.kron(identity, A.right_matrix(e)), db) for e in A.basis()], A.dim**2
    )


@pytest.mark.parametrize(("kind", "rank"), [(ModuleKind.LEFT, 1), (ModuleKind.RIGHT, 2)])
def test_delta_connection_is_flat(M2, kind, rank):
    nabla = delta_connection(free_module(M2, rank, kind))
    assert universal_check(nabla).ok
    assert el.is_zero(universal_curvature(nabla))


def test_delta_connection_is_delta_on_the_algebra(M2):
    nabla = delta_connection(free_module(M2, 1, ModuleKind.LEFT))
    for t, e in enumerate(M2.basis()):
        assert el.column(nabla.map, t) == udelta(e).coeffs


def test_universal_connections_are_one_sided(M2):
    with pytest.raises(ModuleKindError):
        delta_connection(algebra_as_module(M2))
    with pytest.raises(el.DimensionMismatchError):
        UniversalConnection(free_module(M2, 1, ModuleKind.LEFT), el.zeros(4, 4))


def test_zero_map_is_not_a_connection(M2):
    P = free_module(M2, 1, ModuleKind.LEFT)
    check = universal_check(UniversalConnection(P, el.zeros(16, 4)))
    assert not check.ok
    assert check.witness["rule"] == "Leibniz"


@pytest.mark.parametrize("kind", [ModuleKind.LEFT, ModuleKind.RIGHT])
def test_grassmann_connection(M2, kind):
    p = algebra_matrix(M2, [[M2.one, M2.zero], [M2.zero, M2.zero]])
    nabla = grassmann_universal_connection(projective_from_idempotent(M2, p, kind))
    assert universal_check(nabla).ok
    assert curvature_module_check(nabla).ok


def test_grassmann_connection_on_a_rank_one_projection(M2):
    half = el.scalar("1/2")
    v1, v2 = el.scalar("3/5"), el.scalar("4/5")
    q = M2.element([half, half * (v1 - v2 * el.IMAG), half * (v1 + v2 * el.IMAG), half])
    nabla = grassmann_universal_connection(
        projective_from_idempotent(M2, algebra_matrix(M2, [[q]]), ModuleKind.RIGHT)
    )
    assert universal_check(nabla).ok
    assert curvature_module_check(nabla).ok


def test_adding_a_module_morphism(M2):
    P = free_module(M2, 1, ModuleKind.LEFT)
    shifted = add_morphism(delta_connection(P), left_shift(M2, M2.basis_element(1)))
    assert universal_check(shifted).ok
    assert curvature_module_check(shifted).ok


def test_adding_a_non_morphism_is_rejected(M2):
    P = free_module(M2, 1, ModuleKind.LEFT)
    # right multiplication is not left linear
    with pytest.raises(UniversalLeibnizError):
        add_morphism(delta_connection(P), right_shift(M2, M2.basis_element(1)))


def test_extension_respects_the_degree_bound(M2):
    nabla = delta_connection(free_module(M2, 1, ModuleKind.LEFT))
    assert el.equal(extend(nabla, 0), nabla.map)
    assert extend(nabla, 1).shape == (64, 16)
    with pytest.raises(DegreeBoundError):
        extend(nabla, settings.universal_max_degree)


def test_interior_reduction(M2):
    nabla = delta_connection(free_module(M2, 1, ModuleKind.LEFT))
    for b in M2.basis():
        u = inner_derivation(b)
        assert el.equal(interior_reduce(nabla, u), u.action)
    assert el.is_zero(interior_reduce(nabla, zero_derivation(M2)))
    assert dv_check(reduced_connection(nabla)).ok


def test_bimodule_pairs_over_a_commutative_algebra(T3):
    left = delta_connection(free_module(T3, 1, ModuleKind.LEFT))
    right = delta_connection(free_module(T3, 1, ModuleKind.RIGHT))
    report = bimodule_pair_check(left, right, permutation_flip(algebra_as_module(T3)))
    assert report.ok
    assert report.flip_ok


def test_bimodule_pairs_detect_one_sided_shifts(M2):
    left = delta_connection(free_module(M2, 1, ModuleKind.LEFT))
    right = delta_connection(free_module(M2, 1, ModuleKind.RIGHT))
    report = bimodule_pair_check(left, right)
    assert report.ok
    assert report.flip_ok is None
    modified = add_morphism(right, right_shift(M2, M2.basis_element(1)))
    report = bimodule_pair_check(left, modified)
    assert not report.ok
    assert report.witness["condition"] == "interior"
    with pytest.raises(ModuleKindError):
        bimodule_pair_check(right, left)
    with pytest.raises(ModuleKindError):
        permutation_flip(free_module(M2, 1, ModuleKind.LEFT))
