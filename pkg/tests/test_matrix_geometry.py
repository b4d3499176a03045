import random

import pytest

from ncgeo.infrastructure import exactlin as el
from ncgeo.services.ce_calculus import ce_d, exterior_derivative, one_form_duality
from ncgeo.services.connections import dv_check, is_flat
from ncgeo.services.matrix_geometry import (
    MatrixSizeError,
    depsilon_check,
    flat_torsion_check,
    frame_checks,
    linear_connection,
    linear_connection_space,
    maurer_cartan_check,
    omega_table,
    scalar_omega,
    structure_check,
    theta_element_check,
    theta_frame,
    torsion_free_solver,
)


@pytest.fixture(params=[2, 3])
def tf(request, theta2, theta3):
    return {2: theta2, 3: theta3}[request.param]


@pytest.mark.parametrize("n", [1, 4])
def test_unsupported_sizes(n):
    with pytest.raises(MatrixSizeError):
        theta_frame(n)


def test_frame_is_cached(theta2):
    assert theta_frame(2) is theta2
    assert theta2.size == 3
    assert theta2.frame.names == ("u_F12", "u_G12", "u_H1")


def test_structure_constants(tf):
    assert structure_check(tf).ok


def test_one_forms_are_free_of_rank_n2_minus_1(tf):
    report = frame_checks(tf)
    assert report.ok
    assert report.values["dim_one_forms"] == (tf.n**2 - 1) * tf.n**2


def test_d_epsilon(tf):
    assert depsilon_check(tf).ok
    F, G = tf.epsilons[0], tf.epsilons[1]
    assert exterior_derivative(F, tf.frame).evaluate((1,)) == G.commutator(F)


def test_maurer_cartan(tf, theta2):
    assert maurer_cartan_check(tf).ok
    value = ce_d(theta2.thetas[2]).evaluate((0, 1))
    assert value == theta2.algebra.scalar_element(-theta2.c(2, 0, 1))


def test_theta_element_sign(tf):
    report = theta_element_check(tf)
    assert report.ok
    assert report.values["s"] == -1


def test_linear_connections_have_scalar_coefficients(tf):
    space = linear_connection_space(tf)
    assert space.dimension == space.expected == tf.size**3
    assert space.scalar_only


def test_block_solve_agrees_with_full_solve(theta2):
    full = linear_connection_space(theta2, mode="full")
    block = linear_connection_space(theta2, mode="block")
    assert full.dimension == block.dimension == 27
    assert full.scalar_only and block.scalar_only
    with pytest.raises(ValueError):
        linear_connection_space(theta2, mode="guess")


def test_scalar_omega_gives_a_connection(theta2):
    rng = random.Random(7)
    omega = scalar_omega(theta2, lambda p, r, q: rng.randint(-3, 3))
    assert dv_check(linear_connection(theta2, omega)).ok


def test_non_scalar_omega_is_rejected(theta2):
    A = theta2.algebra
    e12 = A.basis_element(1)
    omega = omega_table(theta2, lambda p, r, q: e12 if (p, r, q) == (0, 0, 0) else A.zero)
    assert not dv_check(linear_connection(theta2, omega)).ok


def test_torsion_free_connections(tf):
    solution = torsion_free_solver(tf)
    f = tf.size
    assert solution.dimension == f * f * (f + 1) // 2
    assert solution.lam == el.scalar("-1/2")
    assert solution.verified


def test_flat_connection_has_structure_constant_torsion(tf):
    assert flat_torsion_check(tf).ok
    zero = omega_table(tf, lambda p, r, q: tf.algebra.zero)
    assert is_flat(linear_connection(tf, zero))


def test_derivations_and_one_forms_are_dual(tf):
    assert one_form_duality(tf.algebra).bijective
