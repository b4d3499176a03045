import pytest

from ncgeo.infrastructure import exactlin as el
from ncgeo.infrastructure.derivations import derivation_basis
from ncgeo.infrastructure.modules import (
    ModuleKind,
    algebra_as_module,
    free_module,
    vector_to_matrix,
)
from ncgeo.services.jets import (
    DiffOperator,
    NonCommutativeAlgebraError,
    NotADifferentialOperatorError,
    d1,
    derivation_operator,
    diff_operator_space,
    diffop_to_hom,
    hom_to_diffop,
    is_diffop,
    jet1_of_module_iso,
    jet1_splitting,
    jet_hom_space,
    jet_module,
    jet_projection,
    o1_module,
)


@pytest.fixture
def line(T3):
    return algebra_as_module(T3, ModuleKind.LEFT)


def _x_dx_squared():
    # (x d/dx)² on 1, x, x²
    return el.matrix([[0, 0, 0], [0, 1, 0], [0, 0, 4]])


def test_jets_need_a_commutative_algebra(M2):
    with pytest.raises(NonCommutativeAlgebraError):
        jet_module(M2, algebra_as_module(M2, ModuleKind.LEFT), 1)
    with pytest.raises(NonCommutativeAlgebraError):
        o1_module(M2)


def test_jet_dimensions(T3, C3, line):
    assert jet_module(T3, line, 0).dim == 3
    assert jet_module(T3, line, 1).dim == 5
    assert jet_module(C3, algebra_as_module(C3, ModuleKind.LEFT), 1).dim == 3
    with pytest.raises(ValueError):
        jet_module(T3, line, -1)


def test_jet_tower_projects(T3, line):
    high, low = jet_module(T3, line, 2), jet_module(T3, line, 1)
    assert high.mu.is_subspace_of(low.mu)
    projection = jet_projection(high, low)
    assert el.equal(el.matmul(projection, high.jet_matrix), low.jet_matrix)
    with pytest.raises(ValueError):
        jet_projection(low, high)


def test_jet_then_base_is_identity(T3, line):
    J = jet_module(T3, line, 1)
    assert el.equal(el.matmul(J.to_base, J.jet_matrix), el.identity(3))


def test_o1_dimensions(T3, C3):
    assert o1_module(C3).dim == 0
    assert o1_module(T3).dim == 2


def test_d1_is_a_derivation(T3):
    o1 = o1_module(T3)
    x = T3.basis_element(1)
    assert not any(d1(T3.one))
    assert d1(x * x) == el.add_vectors(o1.module.act_left(x, d1(x)), o1.module.act_left(x, d1(x)))
    assert o1.d1(x) == d1(x)


def test_jet1_splits_as_algebra_plus_differentials(T3):
    split = jet1_splitting(T3)
    assert split.jet.dim == T3.dim + split.o1.dim
    j = el.unit_vector(split.jet.dim, 3)
    assert split.reassemble(*split.decompose(j)) == j


def test_jet_of_free_module_is_tensor_product(T3):
    iso = jet1_of_module_iso(T3, free_module(T3, 2, ModuleKind.LEFT))
    size = iso.forward.shape[0]
    assert size == 10
    assert el.equal(el.matmul(iso.forward, iso.backward), el.identity(size))


def test_order_of_operators(T3, line):
    left_mult = DiffOperator(line, line, T3.left_matrix(T3.basis_element(1)))
    assert is_diffop(left_mult, 0).ok
    squared = DiffOperator(line, line, _x_dx_squared())
    first = is_diffop(squared, 1)
    assert not first.ok
    assert first.witness is not None
    assert is_diffop(squared, 2).ok


def test_operator_of_too_high_order_has_no_jet_map(line):
    with pytest.raises(NotADifferentialOperatorError):
        diffop_to_hom(DiffOperator(line, line, _x_dx_squared()), 1)


def test_jets_represent_differential_operators(T3, line):
    J = jet_module(T3, line, 1)
    ops = diff_operator_space(line, line, 1)
    assert ops.dim == jet_hom_space(J, line).dim
    for v in ops.vectors():
        op = DiffOperator(line, line, vector_to_matrix(v, 3, 3))
        f = diffop_to_hom(op, 1)
        assert el.equal(hom_to_diffop(f, J, line).map, op.map)


def test_derivations_are_first_order(T3, line):
    for tau in derivation_basis(T3):
        op = derivation_operator(tau.action, line)
        assert is_diffop(op, 1).ok
        assert not is_diffop(op, 0).ok
