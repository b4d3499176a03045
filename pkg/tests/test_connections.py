import pytest

from ncgeo.infrastructure import exactlin as el
from ncgeo.infrastructure.algebras import AlgebraMismatchError
from ncgeo.infrastructure.modules import ModuleKind, ModuleKindError, algebra_as_module
from ncgeo.services.ce_calculus import FrameError, ce_one_forms_module, derivation_frame
from ncgeo.services.connections import (
    ConnectionLeibnizError,
    DVConnection,
    NotInnerDerivationError,
    add_endomorphisms,
    canonical_connection,
    conjugate,
    curvature_check,
    difference,
    direct_sum,
    dual,
    dv_check,
    inner_connection,
    inner_elements,
    is_endomorphism_family,
    is_flat,
    is_real,
    is_torsion_free,
    pairing_check,
    tensor,
    torsion_bimodule_check,
    zero_family,
)


def scalar_shift(nabla):
    p = nabla.module.dim
    return tuple(el.scale(el.scalar(r + 1), el.identity(p)) for r in range(nabla.frame.size))


@pytest.fixture
def inner_on_forms(M2):
    return inner_connection(ce_one_forms_module(derivation_frame(M2)).module)


@pytest.mark.parametrize("name", ["M2", "M3", "T3"])
def test_canonical_connection_is_flat(name, request):
    A = request.getfixturevalue(name)
    nabla = canonical_connection(A)
    assert dv_check(nabla).ok
    assert is_flat(nabla)
    for u in nabla.frame.derivations:
        assert not any(nabla(u, A.unit))


def test_zero_family_breaks_leibniz(M2, C3):
    check = dv_check(zero_family(algebra_as_module(M2)))
    assert not check.ok
    assert check.witness["rule"] in {"left Leibniz", "right Leibniz"}
    # no derivations over points, so ∇ = 0 is the only connection
    assert dv_check(zero_family(algebra_as_module(C3))).ok


def test_family_shape_is_checked(M2, T3):
    frame = derivation_frame(M2)
    P = algebra_as_module(M2)
    with pytest.raises(FrameError):
        DVConnection(P, frame, ())
    with pytest.raises(el.DimensionMismatchError):
        DVConnection(P, frame, (el.identity(2),) * 3)
    with pytest.raises(AlgebraMismatchError):
        DVConnection(algebra_as_module(T3), frame, (el.identity(3),) * 3)


def test_inner_connection_agrees_with_canonical_on_the_algebra(M2):
    inner = inner_connection(algebra_as_module(M2))
    canonical = canonical_connection(M2)
    assert all(el.equal(N, M) for N, M in zip(inner.endos, canonical.endos))


def test_inner_connection_on_one_forms(inner_on_forms):
    assert dv_check(inner_on_forms).ok
    assert is_flat(inner_on_forms)
    assert not is_torsion_free(inner_on_forms)
    assert torsion_bimodule_check(inner_on_forms).ok


def test_inner_connection_needs_inner_derivations_and_a_bimodule(M2, T3):
    with pytest.raises(NotInnerDerivationError):
        inner_elements(derivation_frame(T3))
    with pytest.raises(ModuleKindError):
        inner_connection(algebra_as_module(M2, ModuleKind.LEFT))


def test_scalar_shift_is_curved(M2):
    canonical = canonical_connection(M2)
    shifted = add_endomorphisms(canonical, scalar_shift(canonical))
    assert dv_check(shifted).ok
    assert curvature_check(shifted).ok
    assert not is_flat(shifted)


def test_adding_a_non_endomorphism_is_rejected(M2):
    canonical = canonical_connection(M2)
    bad = (M2.left_matrix(M2.basis_element(1)),) * 3
    with pytest.raises(ConnectionLeibnizError):
        add_endomorphisms(canonical, bad)
    with pytest.raises(FrameError):
        add_endomorphisms(canonical, scalar_shift(canonical)[:1])


def test_direct_sum(M2):
    canonical = canonical_connection(M2)
    summed = direct_sum(canonical, canonical)
    assert summed.module.dim == 8
    assert dv_check(summed).ok


def test_dual_connection_pairs(M2):
    left = canonical_connection(M2, ModuleKind.LEFT)
    starred = dual(left)
    assert starred.module.kind is ModuleKind.RIGHT
    assert dv_check(starred).ok
    assert pairing_check(left, starred).ok


def test_tensor_of_flat_connections_is_flat(M2, inner_on_forms):
    product = tensor(canonical_connection(M2), inner_on_forms)
    assert dv_check(product).ok
    assert is_flat(product)


def test_conjugate_and_reality(M2, inner_on_forms):
    for nabla in (canonical_connection(M2), inner_on_forms):
        assert dv_check(conjugate(nabla)).ok
        assert is_real(nabla)
    with pytest.raises(ModuleKindError):
        conjugate(canonical_connection(M2, ModuleKind.LEFT))


def test_connections_form_an_affine_space(inner_on_forms):
    moved = add_endomorphisms(inner_on_forms, scalar_shift(inner_on_forms))
    gap = difference(moved, inner_on_forms)
    assert is_endomorphism_family(inner_on_forms.module, gap)
    back = add_endomorphisms(inner_on_forms, gap)
    assert all(el.equal(N, M) for N, M in zip(back.endos, moved.endos))


def test_difference_needs_the_same_module(M2):
    with pytest.raises(ModuleKindError):
        difference(canonical_connection(M2), inner_connection(algebra_as_module(M2)))
