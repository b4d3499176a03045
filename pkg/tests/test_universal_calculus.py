import pytest
from hypothesis import given, settings

from ncgeo.infrastructure import exactlin as el
from ncgeo.infrastructure.algebras import AlgebraMismatchError, matrix_algebra
from ncgeo.services.universal_calculus import (
    DegreeBoundError,
    UniversalForm,
    as_form,
    bimodule_action,
    left_closure,
    monomial,
    noncentral_witness,
    scalar_coefficient,
    udelta,
    uderivative,
    universal_forms,
    universal_one_forms,
    uproduct,
    ustar,
    zero_form,
)
from strategies import elements

MATRIX2 = matrix_algebra(2)


def test_delta_of_unit_vanishes(M2):
    assert not udelta(M2.one)


def test_delta_is_one_tensor_a_minus_a_tensor_one(T3):
    x = T3.basis_element(1)
    dx = udelta(x)
    assert scalar_coefficient(dx, (0, 1)) == el.ONE
    assert scalar_coefficient(dx, (1, 0)) == -el.ONE
    assert sum(1 for _ in dx.terms()) == 2


@pytest.mark.parametrize("name", ["M2", "C3", "T3"])
def test_one_forms_are_kernel_of_multiplication(name, request):
    A = request.getfixturevalue(name)
    assert universal_one_forms(A).dim == A.dim * (A.dim - 1)
    assert universal_forms(A, 1) == universal_one_forms(A)


def test_form_dimensions(T3):
    for k in range(3):
        assert universal_forms(T3, k).dim == 3 * 2**k


def test_degree_bound(T3):
    with pytest.raises(DegreeBoundError):
        universal_forms(T3, 4)
    assert universal_forms(T3, 4, max_degree=4).dim == 3 * 2**4


def test_left_generation_by_differentials(C3):
    closure = left_closure([udelta(e) for e in C3.basis()])
    assert closure == universal_one_forms(C3)


@settings(max_examples=20, deadline=None)
@given(elements(MATRIX2), elements(MATRIX2))
def test_leibniz_rule(a, b):
    assert udelta(a * b) == uproduct(udelta(a), as_form(b)) + uproduct(as_form(a), udelta(b))


@settings(max_examples=15, deadline=None)
@given(elements(MATRIX2), elements(MATRIX2), elements(MATRIX2))
def test_product_is_associative(a, b, c):
    x, y, z = monomial(a, [b]), udelta(c), as_form(b)
    assert uproduct(uproduct(x, y), z) == uproduct(x, uproduct(y, z))


@settings(max_examples=15, deadline=None)
@given(elements(MATRIX2), elements(MATRIX2), elements(MATRIX2))
def test_derivative_squares_to_zero(a, b, c):
    w = monomial(a, [b, c])
    assert uderivative(w).degree == 3
    assert not uderivative(uderivative(monomial(a, [b])))


def test_products_stay_in_monomial_span(T3):
    x = T3.basis_element(1)
    w = uproduct(monomial(x, [x]), monomial(T3.one, [x]))
    assert w.degree == 2
    assert w.in_monomial_span()


def test_bimodule_action(M2):
    a, b, c = M2.basis_element(1), M2.basis_element(2), M2.basis_element(0)
    lhs = bimodule_action(b, udelta(a), c)
    expected = el.sub_vectors(
        el.kron_vectors(b.coeffs, (a * c).coeffs), el.kron_vectors((b * a).coeffs, c.coeffs)
    )
    rhs = UniversalForm(M2, 1, expected)
    assert lhs == rhs


@settings(max_examples=15, deadline=None)
@given(elements(MATRIX2), elements(MATRIX2))
def test_star_is_involutive_and_commutes_with_delta(a, b):
    w = monomial(a, [b])
    assert ustar(ustar(w)) == w
    assert ustar(udelta(a)) == udelta(a.star())


def test_noncentral_one_forms(T3, C3):
    assert noncentral_witness(T3) is not None
    assert noncentral_witness(C3) is not None


def test_mixed_algebras_and_degrees_raise(M2, T3):
    with pytest.raises(AlgebraMismatchError):
        uproduct(as_form(M2.one), as_form(T3.one))
    with pytest.raises(el.DimensionMismatchError):
        as_form(M2.one) + udelta(M2.basis_element(1))
    with pytest.raises(el.DimensionMismatchError):
        UniversalForm(M2, 1, el.zero_vector(4))


def test_zero_form(M2):
    assert not zero_form(M2, 2)
    assert len(zero_form(M2, 2).coeffs) == 64
