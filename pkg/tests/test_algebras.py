import pytest
from hypothesis import given, settings

from ncgeo.infrastructure import exactlin as el
from ncgeo.infrastructure.algebras import (
    AlgebraAxiomError,
    AlgebraMismatchError,
    FiniteAlgebra,
    NoInvolutionError,
    NotSquareError,
    algebra_from_name,
    algebra_matrix,
    centre_basis,
    direct_sum_algebra,
    function_algebra,
    idempotent_check,
    is_central,
    matrix_algebra,
    matrix_product,
    truncated_polynomial_algebra,
)
from ncgeo.infrastructure.derivations import (
    Derivation,
    derivation_basis,
    derivation_involution,
    inner_derivation,
    is_derivation,
    lie_bracket,
    su_basis,
    unit_scalar,
    zero_derivation,
)
from strategies import elements


def test_matrix_algebra_basis_products(M2):
    E11, E12, E21, E22 = M2.basis()
    assert E12 * E21 == E11
    assert E21 * E12 == E22
    assert not E12 * E12
    assert M2.one == E11 + E22
    assert M2.basis_names == ("E11", "E12", "E21", "E22")


def test_constructors_are_cached():
    assert matrix_algebra(2) is matrix_algebra(2)
    assert algebra_from_name("trunc-poly:3") is truncated_polynomial_algebra(3)


@pytest.mark.parametrize(
    ("name", "dim", "commutative"),
    [("matrix:2", 4, False), ("functions:3", 3, True), ("trunc-poly:4", 4, True)],
)
def test_algebra_from_name(name, dim, commutative):
    A = algebra_from_name(name)
    assert A.dim == dim
    assert A.is_commutative is commutative
    assert A.axiom_violation() is None


@pytest.mark.parametrize("name", ["matrix", "poly:3", "matrix:x"])
def test_algebra_from_name_rejects(name):
    with pytest.raises(ValueError):
        algebra_from_name(name)


def test_broken_table_is_rejected():
    # e_1·e_0 = 0, so e_0 is not a right unit
    table = (({0: el.ONE}, {1: el.ONE}), ({}, {0: el.ONE}))
    A = FiniteAlgebra("broken", 2, table, el.unit_vector(2, 0))
    assert A.axiom_violation() == {"axiom": "right unit", "basis": 1}
    with pytest.raises(AlgebraAxiomError):
        A.validate()


@settings(max_examples=25, deadline=None)
@given(elements(matrix_algebra(2)), elements(matrix_algebra(2)), elements(matrix_algebra(2)))
def test_matrix_product_is_associative(a, b, c):
    assert (a * b) * c == a * (b * c)


@settings(max_examples=25, deadline=None)
@given(elements(matrix_algebra(2)), elements(matrix_algebra(2)))
def test_star_is_antimultiplicative(a, b):
    assert (a * b).star() == b.star() * a.star()
    assert a.star().star() == a


def test_star_conjugates_scalars(M2):
    a = M2.basis_element(1) * el.IMAG
    assert a.star() == M2.basis_element(2) * (-el.IMAG)


def test_mixing_algebras_raises(M2, T3):
    with pytest.raises(AlgebraMismatchError):
        M2.one + T3.one


def test_centre(M2, C3, T3):
    assert [z.coeffs for z in centre_basis(M2)] == [M2.unit]
    assert len(centre_basis(C3)) == 3
    assert len(centre_basis(T3)) == 3
    assert is_central(M2.scalar_element(5))
    assert not is_central(M2.basis_element(1))


def test_direct_sum(M2):
    S = direct_sum_algebra(M2, M2)
    assert S.dim == 8
    assert S.unit == M2.unit + M2.unit
    assert len(centre_basis(S)) == 2
    assert S.has_involution


def test_truncated_polynomials_have_nilpotent_x(T3):
    x = T3.basis_element(1)
    assert x * x == T3.basis_element(2)
    assert not x * x * x


def test_no_involution_raises():
    table = (({0: el.ONE},),)
    A = FiniteAlgebra("plain", 1, table, el.unit_vector(1, 0))
    assert not A.has_involution
    with pytest.raises(NoInvolutionError):
        A.one.star()


def test_idempotents_and_algebra_matrices(M2):
    E11 = M2.basis_element(0)
    p = algebra_matrix(M2, [[E11, 0], [0, 1]])
    assert idempotent_check(p)
    assert not idempotent_check(algebra_matrix(M2, [[2]]))
    assert matrix_product(p, p) == p
    with pytest.raises(NotSquareError):
        idempotent_check(algebra_matrix(M2, [[1, 0]]))


def test_unit_scalar(M2):
    assert unit_scalar(M2.scalar_element(3)) == el.scalar(3)
    assert unit_scalar(M2.basis_element(0)) is None


# --- derivations ---------------------------------------------------------------


@pytest.mark.parametrize(
    ("name", "dim"),
    [("matrix:2", 3), ("matrix:3", 8), ("functions:3", 0), ("trunc-poly:3", 2)],
)
def test_derivation_dimensions(name, dim):
    basis = derivation_basis(algebra_from_name(name))
    assert len(basis) == dim
    assert all(u.leibniz_violation() is None for u in basis)


def test_inner_derivation_convention(M2):
    E11, E12, _, _ = M2.basis()
    u = inner_derivation(E11)
    # ad b(a) = ba − ab
    assert u(E12) == E11 * E12 - E12 * E11
    assert is_derivation(u)
    assert inner_derivation(M2.one).is_zero()


def test_non_derivation_is_detected(M2):
    identity = Derivation(M2, el.identity(4))
    assert identity.leibniz_violation() is not None
    assert not is_derivation(identity)


def test_lie_bracket_of_inner_derivations(M2):
    a, b = M2.basis_element(1), M2.basis_element(2)
    bracket = lie_bracket(inner_derivation(a), inner_derivation(b))
    assert bracket == inner_derivation(a.commutator(b))


def test_derivation_vector_round_trip(T3):
    for u in derivation_basis(T3):
        assert Derivation.from_vector(T3, u.vector()) == u


def test_derivation_involution_of_inner(M2):
    b = M2.basis_element(1)
    # (ad b)* = ad(−b*)
    assert derivation_involution(inner_derivation(b)) == inner_derivation(-b.star())


def test_zero_derivation_and_scaling(M2):
    u = inner_derivation(M2.basis_element(1))
    assert (u - u) == zero_derivation(M2)
    assert u.scaled(2) == u + u


@pytest.mark.parametrize("n", [2, 3])
def test_su_basis(n):
    basis = su_basis(n)
    assert basis.size == n * n - 1
    for r, er in enumerate(basis.elements):
        assert er.star() == -er
        for q, eq in enumerate(basis.elements):
            total = basis.algebra.zero
            for s, es in enumerate(basis.elements):
                total = total + es * basis.constant(s, r, q)
            assert er.commutator(eq) == total
            assert basis.constant(0, r, q) == -basis.constant(0, q, r)


def test_su2_names():
    assert su_basis(2).names == ("F12", "G12", "H1")


def test_su_basis_rejects_small_n():
    with pytest.raises(ValueError):
        su_basis(1)


def test_function_algebra_idempotents():
    C = function_algebra(2)
    e1, e2 = C.basis()
    assert e1 * e1 == e1
    assert not e1 * e2
