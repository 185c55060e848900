from fractions import Fraction

import pytest

from kummer.checks import (
    cached_kernel,
    euler_holds,
    quadric_lift_holds,
    singular_on_diagonal,
    splitting_holds,
    squares_in_pt_span,
    tilde_euler_holds,
)
from kummer.data import genus3_quartic, igusa_quartic
from kummer.heis import heisenberg_basis, lifted_basis, theta_ring
from kummer.igusakern import p_ring, random_rational_point, ustar
from kummer.lift import (
    BigradedEquation,
    determinant_equation_g2,
    determinant_equation_g3,
    divide_by_monomial,
    embed,
    f_r,
    g3_jacobian_minors,
    g3_jacobian_rank,
    mixed_ring,
    moduli_equation,
    proportionality,
    pt_coordinates,
    schottky_build,
    schottky_pullback,
    sj_characteristics,
    tilde,
    tilde_invariant_quartic,
)


@pytest.fixture(scope="module")
def schottky():
    return schottky_build()


def test_f_r_of_a_linear_form_is_the_quartic():
    for g in (1, 2, 3):
        R = p_ring(g)
        for i, P in enumerate(heisenberg_basis(g).polynomials):
            F = f_r(R.gen(i), g)
            assert F.bidegree == (0, 4)
            assert F.poly == embed(P, mixed_ring(g))


def test_f_r_rejects_bad_input():
    R = p_ring(2)
    with pytest.raises(ValueError):
        f_r(R.zero(), 2)
    with pytest.raises(ValueError):
        f_r(R.gen(0) ** 2 + R.gen(1), 2)


def test_f_r_is_linear_in_r():
    R = p_ring(2)
    a = R.gen(0) ** 2 * R.gen(3)
    b = R.gen(1) * R.gen(2) * R.gen(4)
    assert f_r(a + b.scale(3), 2).poly == f_r(a, 2).poly + f_r(b, 2).poly.scale(3)


def test_bigraded_equation_validates_bidegree():
    F = f_r(igusa_quartic(), 2)
    assert F.bidegree == (12, 4)
    with pytest.raises(ValueError):
        BigradedEquation(2, F.poly, (11, 5))
    with pytest.raises(ValueError):
        BigradedEquation(2, p_ring(2).gen(0), (0, 1))  # five variables: no two equal blocks


def test_f_r_g2_is_proportional_to_the_determinant():
    F = f_r(igusa_quartic(), 2)
    D = determinant_equation_g2()
    assert D.bidegree == (12, 4)
    assert proportionality(F.poly, D.poly) == 8


def test_f_r_g2_euler_and_singularity():
    R = igusa_quartic()
    assert euler_holds(R, 2)
    assert singular_on_diagonal(R, 2)
    F = f_r(R, 2)
    assert F.diagonal() == ustar(R, 2).scale(4)


def test_f_r_g3_term_counts():
    F = f_r(genus3_quartic(), 3)
    assert F.pt_term_count() == 728
    assert len(F) == 2048
    assert F.check_pt_decomposition()
    assert F.bidegree == (12, 4)


def test_all_genus_three_kernel_elements_give_singular_kummer_equations():
    for S in cached_kernel(3, 4).basis:
        assert euler_holds(S, 3)
        assert singular_on_diagonal(S, 3)


def test_g3_jacobian_minors_vanish_and_rank_six():
    assert all(m.is_zero() for m in g3_jacobian_minors())
    for s in range(3):
        assert g3_jacobian_rank(random_rational_point(3, s)) == 6


def test_det_g3_is_divisible_and_bigraded():
    D = determinant_equation_g3()
    assert D.bidegree == (16, 4)
    assert not D.poly.is_zero()


def test_divide_by_monomial():
    x = theta_ring(1).gens()
    f = x[0] ** 2 * x[1] + x[0] * x[1] ** 3
    assert divide_by_monomial(f, [1, 1]) == x[0] + x[1] ** 2
    assert divide_by_monomial(f, [2, 0]) is None


def test_proportionality():
    x = theta_ring(1).gens()
    f = x[0] ** 4 + x[1] ** 4
    assert proportionality(f.scale(Fraction(-3, 2)), f) == Fraction(-3, 2)
    assert proportionality(f + x[0] ** 4, f) is None
    assert proportionality(f.ring.zero(), f) is None


def test_pt_coordinates_roundtrip():
    basis = heisenberg_basis(3).polynomials
    coeffs = [i - 7 for i in range(len(basis))]
    f = basis[0].ring.zero()
    for c, P in zip(coeffs, basis):
        f = f + P.scale(c)
    assert pt_coordinates(f, 3) == coeffs
    x = theta_ring(3).gens()
    assert pt_coordinates(x[0] ** 3 * x[1], 3) is None


def test_tilde_of_a_variable_is_the_lifted_quartic():
    R = p_ring(2)
    for i, pt in enumerate(lifted_basis(2).polynomials):
        assert tilde(R.gen(i), 2) == pt
    with pytest.raises(ValueError):
        tilde(p_ring(3).gen(0), 2)


def test_tilde_invariant_quartic_is_linear():
    basis = heisenberg_basis(2).polynomials
    f = basis[0].scale(2) - basis[3]
    assert tilde_invariant_quartic(f, 2) == lifted_basis(2).polynomials[0].scale(2) - lifted_basis(2).polynomials[3]
    with pytest.raises(ValueError):
        tilde_invariant_quartic(theta_ring(2).gen(0) ** 4, 2)


@pytest.mark.parametrize("g", [1, 2, 3])
def test_splitting_and_quadric_lifts(g):
    assert splitting_holds(g)
    assert quadric_lift_holds(g)
    assert squares_in_pt_span(g)


@pytest.mark.parametrize("g, R", [(2, igusa_quartic), (3, genus3_quartic)])
def test_moduli_equations(g, R):
    mod = moduli_equation(R(), g)
    assert mod.is_homogeneous(16) and not mod.is_zero()
    assert mod.ring.nvars == 1 << (g + 1)
    assert tilde_euler_holds(R(), g)


def test_lift_rejects_non_kernel_input():
    with pytest.raises(ValueError):
        moduli_equation(p_ring(2).gen(0) ** 4, 2)


def test_schottky_defining_identity(schottky):
    assert len(schottky.q_vars) == 36 == len(schottky.characteristics)
    assert len(schottky.quadratic_expressions) == 5
    assert schottky.fbar8.is_homogeneous(8)
    assert schottky_pullback(schottky.fbar8) == moduli_equation(igusa_quartic(), 2)
    for q, p in zip(schottky.quadratic_expressions, lifted_basis(2).polynomials):
        assert q.is_homogeneous(2)
        pulled = schottky_pullback(q)
        assert pulled == p.change_ring(pulled.ring)


def test_schottky_build_is_deterministic(schottky):
    again = schottky_build()
    assert again.fbar8 == schottky.fbar8
    assert again.quadratic_expressions == schottky.quadratic_expressions


def test_sj_characteristics_are_even_pairs():
    pairs = sj_characteristics()
    assert len(pairs) == 36
    for (e0, f0), (e1, f1) in pairs:
        assert e0 == e1 and f1 == f0 + 1 and e0 % 2 == 0 and f0 % 2 == 0
