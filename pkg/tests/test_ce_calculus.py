import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncgeo.infrastructure import exactlin as el
from ncgeo.infrastructure.algebras import AlgebraMismatchError, direct_sum_algebra, matrix_algebra
from ncgeo.infrastructure.derivations import Derivation, inner_derivation, lie_bracket
from ncgeo.services.ce_calculus import (
    DerivationFrame,
    FormDegreeError,
    FrameError,
    basis_forms,
    ce_d,
    ce_one_forms_module,
    contract,
    derivation_frame,
    differentials_central,
    exterior_derivative,
    form_from_values,
    form_involution,
    function_form,
    is_centre_multilinear,
    lie_derivative,
    normalisation_ratio,
    one_form_duality,
    theta,
    wedge,
    weighted_d,
)
from ncgeo.services.universal_calculus import random_element

MATRIX2 = matrix_algebra(2)


def random_form(degree: int, seed: int):
    rng = random.Random(seed)
    frame = derivation_frame(MATRIX2)
    return form_from_values(frame, degree, lambda T: random_element(MATRIX2, rng))


@pytest.fixture
def frame(M2):
    return derivation_frame(M2)


def test_frame_of_m2(frame):
    assert frame.size == 3
    assert frame.is_centre_free
    assert frame.names == ("u1", "u2", "u3")


def test_dependent_frame_is_rejected(M2):
    u = inner_derivation(M2.basis_element(1))
    with pytest.raises(FrameError):
        DerivationFrame(M2, (u, u.scaled(2)), ("a", "b"))


def test_coordinates_outside_the_frame(T3):
    frame = DerivationFrame(T3, (derivation_frame(T3).derivations[0],), ("u",))
    with pytest.raises(FrameError):
        frame.coordinates(derivation_frame(T3).derivations[1])


def test_evaluation_is_alternating(frame, M2):
    phi = wedge(theta(frame, 0), theta(frame, 1))
    assert phi.evaluate((0, 1)) == M2.one
    assert phi.evaluate((1, 0)) == -M2.one
    assert not phi.evaluate((1, 1))
    with pytest.raises(FormDegreeError):
        phi.evaluate((0,))


@pytest.mark.parametrize("degree", [0, 1, 2])
def test_d_squares_to_zero_on_basis_forms(frame, degree):
    for phi in basis_forms(frame, degree):
        assert not ce_d(ce_d(phi))


def test_d_of_functions_is_evaluation(frame, M2):
    for a in M2.basis():
        da = exterior_derivative(a, frame)
        for r, u in enumerate(frame.derivations):
            assert da.evaluate((r,)) == u(a)


@pytest.mark.parametrize("degree", [0, 1, 2])
def test_ratio_to_weighted_coboundary(frame, degree):
    assert normalisation_ratio(degree) == degree + 1
    for phi in basis_forms(frame, degree)[:4]:
        assert ce_d(phi) == weighted_d(phi).scaled(degree + 1)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 1), st.integers(0, 1), st.integers(), st.integers())
def test_graded_leibniz(p, q, seed_phi, seed_psi):
    phi, psi = random_form(p, seed_phi), random_form(q, seed_psi)
    second = wedge(phi, ce_d(psi))
    expected = wedge(ce_d(phi), psi) + (-second if p % 2 else second)
    assert ce_d(wedge(phi, psi)) == expected


def test_wedge_is_not_graded_commutative(frame, M2):
    E12 = M2.basis_element(1)
    phi = theta(frame, 0).left_multiply(E12)
    psi = theta(frame, 1).left_multiply(E12.star())
    assert wedge(phi, psi) != -wedge(psi, phi)


def test_wedge_of_functions_is_product(frame, M2):
    a, b = M2.basis_element(1), M2.basis_element(2)
    assert wedge(function_form(frame, a), function_form(frame, b)) == function_form(frame, a * b)


def test_contraction(frame, M2):
    for q, u in enumerate(frame.derivations):
        for r in range(frame.size):
            expected = function_form(frame, M2.one if q == r else M2.zero)
            assert contract(u, theta(frame, r)) == expected
    with pytest.raises(FormDegreeError):
        contract(frame.derivations[0], function_form(frame, M2.one))


@settings(max_examples=15, deadline=None)
@given(st.integers(), st.integers(), st.integers(0, 2))
def test_contraction_is_an_antiderivation(seed_phi, seed_psi, r):
    frame = derivation_frame(MATRIX2)
    u = frame.derivations[r]
    phi, psi = random_form(1, seed_phi), random_form(1, seed_psi)
    expected = wedge(contract(u, phi), psi) - wedge(phi, contract(u, psi))
    assert contract(u, wedge(phi, psi)) == expected
    assert not contract(u, contract(u, wedge(phi, psi)))


def test_lie_derivative(frame, M2):
    u, v = frame.derivations[0], frame.derivations[1]
    for a in M2.basis():
        fa = function_form(frame, a)
        assert lie_derivative(u, fa) == function_form(frame, u(a))
        assert lie_derivative(u, ce_d(fa)) == ce_d(lie_derivative(u, fa))
    for phi in basis_forms(frame, 1)[:6]:
        lhs = lie_derivative(lie_bracket(u, v), phi)
        rhs = lie_derivative(u, lie_derivative(v, phi)) - lie_derivative(v, lie_derivative(u, phi))
        assert lhs == rhs


def test_form_involution_is_involutive(frame):
    for phi in basis_forms(frame, 1):
        assert form_involution(form_involution(phi)) == phi


def test_one_form_duality(M2, C3, T3):
    for A in (M2, C3, T3):
        assert one_form_duality(A).bijective
    assert one_form_duality(C3).derivations_dim == 0


def test_one_forms_module(frame):
    forms = ce_one_forms_module(frame)
    # M_2 has trivial centre, so every map on the frame is centre-linear
    assert forms.dim == 12
    assert forms.module.axiom_violation() is None
    phi = theta(frame, 2)
    assert forms.form(forms.coordinates(phi)) == phi
    with pytest.raises(FormDegreeError):
        forms.coordinates(function_form(frame, frame.algebra.one))


def test_differentials_are_central_only_over_commutative_algebras(M2, T3):
    assert differentials_central(T3).ok
    report = differentials_central(M2)
    assert not report.ok
    assert set(report.witness) == {"a", "e", "u"}


def test_centre_multilinearity():
    M2 = matrix_algebra(2)
    S = direct_sum_algebra(M2, M2)
    forms = ce_one_forms_module(derivation_frame(S))
    for n in range(forms.dim):
        assert is_centre_multilinear(forms.form(el.unit_vector(forms.dim, n)))
    frame = derivation_frame(S)
    raw = form_from_values(frame, 1, lambda T: S.one if T == (0,) else S.zero)
    assert not is_centre_multilinear(raw)


def test_frames_reject_foreign_derivations(M2, T3):
    with pytest.raises(AlgebraMismatchError):
        DerivationFrame(M2, (Derivation(T3, el.zeros(3, 3)),), ("u",))
