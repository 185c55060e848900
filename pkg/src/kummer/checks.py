"""Verification suites shared by the command line and the test-suite.

Every check appends one entry to a :class:`VerificationReport`.  Symbolic
checks are exact (pass/fail); numeric checks record a relative residual
and the tolerance it was compared against.
"""

from __future__ import annotations

import logging
from functools import lru_cache

from .bundle import VerificationReport
from .data import genus3_quartic, igusa_quartic
from .f2lin import Character, even_characteristics
from .heis import (
    eigenspace_dimension,
    eigenspace_formula,
    heisenberg_basis,
    lift_ring,
    quadric,
    split_quartic,
    theta_ring,
)
from .igusakern import (
    dimension_formula,
    in_span,
    kernel,
    random_rational_point,
    ustar,
    xstar,
)
from .lift import (
    DivisibilityError,
    determinant_equation_g2,
    determinant_equation_g3,
    f_r,
    g3_jacobian_minors,
    g3_jacobian_rank,
    moduli_equation,
    proportionality,
    pt_coordinates,
    schottky_build,
    schottky_evaluate,
    schottky_pullback,
    tilde_invariant_quartic,
    tilde_lift_kummer,
)
from .polycore import partial_derivative
from .thetanum import (
    DEFAULT_PRECISION,
    GENUS4_PRECISION,
    SCHOTTKY_PRECISION,
    ZeroScale,
    check_degree2_identity,
    check_degree4_identity,
    check_key_identity,
    check_lift_identity,
    sample_tau,
    sample_z,
    theta2_vector,
    theta_null_vector,
    verify_vanishing,
)

log = logging.getLogger(__name__)

CLASSICAL = {2: igusa_quartic, 3: genus3_quartic}
TOL_G3 = 1e-8
TOL_G4 = 1e-6
SCHOTTKY_ZERO = 1e-20
SCHOTTKY_NONZERO = 1e-3


@lru_cache(maxsize=None)
def cached_kernel(g: int, d: int):
    return kernel(g, d, "exact")


# ---------------------------------------------------------------------------
# exact identities
# ---------------------------------------------------------------------------


def derivative_formula_holds(g: int) -> bool:
    """dP_T/dx_s = 4 x_(s+a) x_(s+b) x_(s+a+b) for every T and s."""
    basis = heisenberg_basis(g)
    x = theta_ring(g).gens()
    for T, P in basis.quartics:
        a, b = T.generators
        for s in range(1 << g):
            if partial_derivative(P, s) != (x[s ^ a] * x[s ^ b] * x[s ^ a ^ b]).scale(4):
                return False
    return True


def splitting_holds(g: int) -> bool:
    """P_T~(v) = P_T(..., v_s0, ...) + P_T(..., v_s1, ...) for every T."""
    ring = lift_ring(g)
    n = 1 << g
    for T, P in heisenberg_basis(g).quartics:
        even = P.change_ring(ring, [2 * s for s in range(n)])
        odd = P.change_ring(ring, [2 * s + 1 for s in range(n)])
        if split_quartic(T, g, ring) != even + odd:
            return False
    return True


def quadric_lift_holds(g: int) -> bool:
    """tilde(Q[e;e']^2) = Q[e0;e'0] Q[e0;e'1] for every even [e;e']."""
    ring = lift_ring(g)
    for e, f in even_characteristics(g):
        q = quadric(e, f, g)
        lhs = tilde_invariant_quartic(q * q, g)
        rhs = quadric(2 * e, 2 * f, g + 1, ring) * quadric(2 * e, 2 * f + 1, g + 1, ring)
        if lhs != rhs:
            return False
    return True


def squares_in_pt_span(g: int) -> bool:
    """Every Q[e;e']^2 is a linear combination of the P_T."""
    return all(pt_coordinates(q * q, g) is not None
               for q in (quadric(e, f, g) for e, f in even_characteristics(g)))


def euler_holds(R, g: int) -> bool:
    F = f_r(R, g)
    return F.diagonal() == ustar(R, g).scale(R.degree())


def singular_on_diagonal(R, g: int) -> bool:
    return all(p.is_zero() for p in f_r(R, g).coordinate_partials_on_diagonal())


def tilde_euler_holds(R, g: int) -> bool:
    F = tilde_lift_kummer(R, g)
    return F.diagonal() == moduli_equation(R, g, check=False).scale(R.degree())


def eigenspace_dimensions_hold(g: int) -> bool:
    chi = Character.last_translation(g)
    return (eigenspace_dimension(g, 4) == eigenspace_formula(g, True)
            and eigenspace_dimension(g, 4, chi) == eigenspace_formula(g, False))


def symbolic_suite(g: int, report: VerificationReport) -> VerificationReport:
    add = report.add
    if g in (2, 3):
        R = CLASSICAL[g]()
        name = f"R_{g}"
        add(f"x*({name})=0", xstar(R, g).is_zero(), g)
        for d in range(1, 4):
            kd = cached_kernel(g, d)
            add(f"kernel dimension d={d}", kd.dimension == 0, g, value=kd.dimension, expected=0)
        k4 = cached_kernel(g, 4)
        expected = {2: 1, 3: 27}[g]
        add("kernel dimension d=4", k4.dimension == expected, g, value=k4.dimension, expected=expected)
        add("kernel verified over Q", k4.verified, g)
        add(f"{name} in kernel", in_span(R, k4.basis), g)
        add("Euler identity", all(euler_holds(S, g) for S in k4.basis), g, elements=k4.dimension)
        add("dF_R/dx vanishes on the diagonal",
            all(singular_on_diagonal(S, g) for S in k4.basis), g, elements=k4.dimension)
        add("tilde Euler identity", tilde_euler_holds(R, g), g, element=name)
        mod = moduli_equation(R, g)
        add(f"moduli equation of {name} nonzero of degree 16",
            not mod.is_zero() and mod.is_homogeneous(16), g)
        add("P_T~ splitting", splitting_holds(g), g)
        add("quadric lift identity", quadric_lift_holds(g), g)
        add("Q^2 in span of P_T", squares_in_pt_span(g), g)
    if g == 2:
        F = f_r(igusa_quartic(), 2)
        c = proportionality(F.poly, determinant_equation_g2().poly)
        add("F_{R_2} ∝ det_g2", c is not None, 2, scalar=str(c))
    if g == 3:
        F = f_r(genus3_quartic(), 3)
        add("F_{R_3} term count 728", F.pt_term_count() == 728, 3,
            value=F.pt_term_count(), monomials=len(F), basis="u-monomial times P_T(x)")
        add("F_{R_3} P_T decomposition", F.check_pt_decomposition(), 3)
        add("7x7 minors vanish", all(m.is_zero() for m in g3_jacobian_minors()), 3)
        ranks = [g3_jacobian_rank(random_rational_point(3, s)) for s in range(2)]
        add("Jacobian submatrix rank 6", ranks == [6, 6], 3, ranks=ranks)
        try:
            D = determinant_equation_g3()
            add("det_g3 divisible by u000*u111", True, 3)
            add("det_g3 bidegree (16,4)", D.bidegree == (16, 4) and not D.poly.is_zero(), 3)
        except DivisibilityError:
            add("det_g3 divisible by u000*u111", False, 3)
    if 1 <= g <= 4:
        add("dP_T/dx_s = 4 a_{s,T}", derivative_formula_holds(g), g)
    if 2 <= g <= 4:
        add("eigenspace dimensions", eigenspace_dimensions_hold(g), g)
    if g == 4:
        values = [dimension_formula(k) for k in (4, 5, 6)]
        add("dimension formula", values == [510, 11594, 210210], 4, values=values)
        S = schottky_build()
        add("Schottky defining identity",
            schottky_pullback(S.fbar8) == moduli_equation(igusa_quartic(), 2), 4)
        add("Schottky quadratic expressions",
            all(schottky_pullback(q) == p.change_ring(schottky_pullback(q).ring)
                for q, p in zip(S.quadratic_expressions, _lifted_g2())), 4)
    return report


def _lifted_g2():
    from .heis import lifted_basis

    return lifted_basis(2).polynomials


# ---------------------------------------------------------------------------
# numeric identities
# ---------------------------------------------------------------------------


def _residual_entry(report, check, g, seed, precision, tol, fn):
    try:
        r = fn()
    except ZeroScale:
        return report.add(check, False, g, None, tol, seed=seed, precision=precision,
                          outcome="zero scale")
    return report.add_residual(check, r, tol, g, seed=seed, precision=precision)


def numeric_suite(g: int, report: VerificationReport, trials: int = 20, seed: int = 0,
                  precision: int | None = None, tol: float | None = None,
                  kummer_points: int | None = None) -> VerificationReport:
    """Theta-function checks for source genus g (2 or 3) or the genus-4 Schottky probe."""
    if g == 4:
        return schottky_suite(report, seed=seed, precision=precision, tol=tol)
    if g not in (1, 2, 3):
        raise ValueError("numeric suites exist for genus 1-4")
    prec = precision or DEFAULT_PRECISION
    tol_g = tol if tol is not None else TOL_G3
    G = g + 1
    prec_up = max(prec, GENUS4_PRECISION) if G == 4 else prec
    tol_up = tol if tol is not None else (TOL_G4 if G == 4 else TOL_G3)
    kern = cached_kernel(g, 4).basis if g in (2, 3) else []
    equations = [f_r(R, g).poly for R in kern]
    npts = trials if kummer_points is None else kummer_points
    for i in range(trials):
        s = seed + i
        tau, z = sample_tau(g, s), sample_z(g, s)
        _residual_entry(report, "degree-2 identity", g, s, prec, tol_g,
                        lambda: check_degree2_identity(tau, z, prec))
        _residual_entry(report, "degree-4 identity", g, s, prec, tol_g,
                        lambda: check_degree4_identity(tau, z, prec))
        if equations and i < npts:
            point = theta_null_vector(tau, prec) + theta2_vector(tau, z, prec)
            _residual_entry(report, "F_R vanishing", g, s, prec, tol_g,
                            lambda: max(verify_vanishing(F, point, prec).value for F in equations))
        tau_up, z_up = sample_tau(G, s), sample_z(G, s)
        _residual_entry(report, "lift identity", G, s, prec_up, tol_up,
                        lambda: check_lift_identity(tau_up, z_up, prec_up))
        _residual_entry(report, "key identity", G, s, prec_up, tol_up,
                        lambda: check_key_identity(tau_up, prec_up))
        if g in (2, 3):
            mod = _moduli(g)
            _residual_entry(report, f"moduli equation of R_{g} vanishing", G, s, prec_up, tol_up,
                            lambda: verify_vanishing(mod, theta_null_vector(tau_up, prec_up),
                                                     prec_up).value)
    return report


@lru_cache(maxsize=None)
def _moduli(g: int):
    return moduli_equation(CLASSICAL[g](), g)


@lru_cache(maxsize=None)
def _fbar8():
    return schottky_build().fbar8


def schottky_relative(tau, precision: int) -> float:
    ev = schottky_evaluate(_fbar8(), tau, precision)
    if ev.scale == 0:
        raise ZeroScale("all terms of the Schottky form vanish")
    return float(abs(ev.value) / ev.scale)


def schottky_suite(report: VerificationReport, seed: int = 0, count: int = 3,
                   precision: int | None = None, tol: float | None = None) -> VerificationReport:
    """|F|/scale small on diag(H_1, H_3), and not small at generic points of H_4."""
    prec = precision or SCHOTTKY_PRECISION
    zero_tol = tol if tol is not None else SCHOTTKY_ZERO
    for i in range(count):
        s = seed + i
        tau = sample_tau(4, s, "block_diag", (1, 3))
        _residual_entry(report, "Schottky form vanishes on diag(H_1,H_3)", 4, s, prec, zero_tol,
                        lambda: schottky_relative(tau, prec))
    for i in range(count):
        s = seed + i
        r = schottky_relative(sample_tau(4, s), prec)
        report.add("Schottky form nonzero at generic tau", r > SCHOTTKY_NONZERO, 4, r,
                   SCHOTTKY_NONZERO, seed=s, precision=prec, comparison="residual > tolerance")
    return report


def run_suite(suite: str, g: int, trials: int = 20, seed: int = 0, precision: int | None = None,
              tol: float | None = None) -> VerificationReport:
    report = VerificationReport(f"{suite}:g={g}")
    if suite in ("symbolic", "all"):
        symbolic_suite(g, report)
    if suite in ("numeric", "all"):
        numeric_suite(g, report, trials, seed, precision, tol)
    return report

