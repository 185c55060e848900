import random

import pytest

from kummer.f2lin import Character, Subgroup, enumerate_subgroups, even_characteristics
from kummer.heis import (
    act,
    eigenspace_dimension,
    eigenspace_formula,
    even_quadrics,
    heisenberg_act,
    heisenberg_basis,
    in_eigenspace,
    invariant_quartic,
    lifted_basis,
    lifted_quartic,
    quadric,
    theta_ring,
)
from kummer.polycore import substitute_hom


def brute_force_quartic(T, g):
    """P_T by the defining sum, one term at a time."""
    x = theta_ring(g).gens()
    a, b = T.generators
    total = theta_ring(g).zero()
    for rho in range(1 << g):
        total = total + x[rho] * x[rho ^ a] * x[rho ^ b] * x[rho ^ a ^ b]
    return total


@pytest.mark.parametrize("g", [1, 2, 3])
def test_quartics_match_defining_sum(g):
    for T in enumerate_subgroups(g):
        assert invariant_quartic(T, g) == brute_force_quartic(T, g)


def test_genus_one_quartics():
    x0, x1 = theta_ring(1).gens()
    T0, T1 = enumerate_subgroups(1)
    assert invariant_quartic(T0, 1) == x0**4 + x1**4
    assert invariant_quartic(T1, 1) == 2 * x0**2 * x1**2


def test_quartics_have_disjoint_support():
    seen = set()
    for P in heisenberg_basis(3).polynomials:
        assert not (set(P.terms) & seen)
        seen |= set(P.terms)


@pytest.mark.parametrize("g", [2, 3])
def test_quartics_are_invariant(g):
    chi = Character.trivial(g)
    for P in heisenberg_basis(g).polynomials:
        assert in_eigenspace(P, chi)


def test_action_matches_substitution():
    g = 2
    x = theta_ring(g).gens()
    f = x[0] ** 3 * x[1] + x[2] * x[3] ** 2 * x[1]
    rng = random.Random(5)
    for _ in range(10):
        alpha, beta = rng.randrange(4), rng.randrange(4)
        images = [x[s ^ beta].scale(-1 if bin((s ^ beta) & alpha).count("1") % 2 else 1)
                  for s in range(4)]
        assert act(f, alpha, beta) == substitute_hom(f, images)
    assert heisenberg_act("translation", 1, x[0]) == x[1]
    assert heisenberg_act("sign_change", 1, x[1]) == -x[1]
    with pytest.raises(ValueError):
        heisenberg_act("rotation", 1, x[0])


def test_action_is_a_projective_representation_on_quartics():
    P = heisenberg_basis(2).polynomials[4] + theta_ring(2).gen(0) ** 3 * theta_ring(2).gen(1)
    for a1 in range(4):
        for b1 in range(4):
            for a2 in range(4):
                lhs = act(act(P, a1, b1), a2, 0)
                rhs = act(P, a1 ^ a2, b1)
                assert lhs == rhs or lhs == -rhs


def test_quadrics():
    x = theta_ring(1).gens()
    assert quadric(0, 0, 1) == x[0] ** 2 + x[1] ** 2
    assert quadric(0, 1, 1) == x[0] ** 2 - x[1] ** 2
    assert quadric(1, 0, 1) == 2 * x[0] * x[1]
    assert len(even_quadrics(2)) == 10


@pytest.mark.parametrize("g", [2, 3])
def test_squared_quadrics_are_invariant(g):
    chi = Character.trivial(g)
    for e, f in even_characteristics(g):
        q = quadric(e, f, g)
        assert in_eigenspace(q * q, chi)


@pytest.mark.parametrize("g", [2, 3, 4])
def test_eigenspace_dimensions(g):
    assert eigenspace_dimension(g, 4) == eigenspace_formula(g, True)
    assert eigenspace_dimension(g, 4, Character.last_translation(g)) == eigenspace_formula(g, False)


def test_eigenspace_values():
    assert [eigenspace_formula(g, True) for g in (2, 3, 4)] == [5, 15, 51]
    assert [eigenspace_formula(g, False) for g in (2, 3, 4)] == [2, 5, 15]


def test_lifted_quartics_lie_in_the_chi_eigenspace():
    for g in (1, 2):
        chi = Character.last_translation(g + 1)
        for pt in lifted_basis(g).polynomials:
            assert in_eigenspace(pt, chi)
            assert not in_eigenspace(pt, Character.trivial(g + 1))


def test_lifted_basis_sizes_and_rings():
    lb = lifted_basis(2)
    assert len(lb) == 5 and lb.polynomials[0].ring.nvars == 8
    assert lb.labels() == ["p~_0", "p~_1", "p~_2", "p~_3", "p~_12"]
    assert len(lifted_basis(3)) == 15


def test_lifted_quartic_split_coordinates():
    T = Subgroup((0,), 1)
    v = lifted_basis(1).polynomials[0].ring.gens()
    assert lifted_quartic(T, 1) == v[0] ** 4 + v[2] ** 4 - v[1] ** 4 - v[3] ** 4


def test_rejects_foreign_subgroup():
    with pytest.raises(ValueError):
        invariant_quartic(Subgroup((0, 1), 1), 2)
