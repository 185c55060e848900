"""Equations built from generalized Igusa equations.

* ``f_r``: the universal Kummer equation F_R = sum_T u*(dR/dp_T) P_T(x).
* ``determinant_equation_g2`` / ``determinant_equation_g3``: the classical
  Cramer-rule equations from the Jacobian of the P_T.
* ``tilde_lift_kummer`` / ``moduli_equation``: the same constructions with
  p_T replaced by the lifted quartics p~_T in 2^(g+1) variables.
* ``schottky_build`` / ``schottky_evaluate``: the degree-8 form in the
  36 genus-3 even quadrics whose pull-back is the moduli equation of R_2,
  and its evaluation at Schottky-Jung products of genus-4 theta constants.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .f2lin import Subgroup, characteristic_label, enumerate_subgroups, even_characteristics
from .heis import (
    even_quadrics,
    heisenberg_basis,
    lifted_basis,
    theta_ring,
)
from .igusakern import p_ring, ustar, xstar
from .linalg import SparseMatrix, solve
from .polycore import (
    FIELD_MASK,
    Polynomial,
    Ring,
    partial_derivative,
    substitute_hom,
)


# ---------------------------------------------------------------------------
# bigraded equations
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def mixed_ring(g: int, left: str = "u", right: str = "x") -> Ring:
    """Ring with 2^g ``left`` variables followed by 2^g ``right`` variables."""
    return Ring(theta_ring(g, left).names + theta_ring(g, right).names)


def embed(f: Polynomial, ring: Ring) -> Polynomial:
    """Move f into a ring containing all of its variable names."""
    return f.change_ring(ring, [ring.index(n) for n in f.ring.names])


def bidegrees(f: Polynomial, nleft: int) -> set[tuple[int, int]]:
    ring = f.ring
    shifts = ring._shifts
    out = set()
    for m in f.terms:
        a = sum((m >> s) & FIELD_MASK for s in shifts[:nleft])
        out.add((a, ring.degree_of(m) - a))
    return out


@dataclass(frozen=True)
class BigradedEquation:
    """A polynomial in two equal-size blocks of variables of fixed bidegree.

    The first block holds the parameter variables (u, or v for lifts), the
    second the coordinates (x, or y for lifts).
    """

    genus: int
    poly: Polynomial
    bidegree: tuple[int, int]
    construction: str = ""
    # for Heisenberg-invariant builds: the u-coefficient of each P_T(x)
    pt_coefficients: tuple[Polynomial, ...] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        n = self.poly.ring.nvars
        if n % 2:
            raise ValueError("bigraded ring needs two equal blocks of variables")
        found = bidegrees(self.poly, n // 2)
        if found - {tuple(self.bidegree)}:
            raise ValueError(f"terms of bidegree {sorted(found)} in an equation declared {self.bidegree}")

    @property
    def ring(self) -> Ring:
        return self.poly.ring

    @property
    def half(self) -> int:
        return self.poly.ring.nvars // 2

    def __len__(self) -> int:
        return len(self.poly)

    def pt_term_count(self) -> int:
        """Number of terms of F written as sum_T c_T(u) P_T(x), in the basis u^a P_T(x)."""
        if self.pt_coefficients is None:
            raise ValueError("equation was not built in the P_T basis")
        return sum(len(c) for c in self.pt_coefficients)

    def check_pt_decomposition(self) -> bool:
        """Whether poly equals sum_T c_T(u) P_T(x) exactly."""
        if self.pt_coefficients is None:
            return False
        g = self.genus
        ring = self.poly.ring
        total = ring.zero()
        for c, P in zip(self.pt_coefficients, heisenberg_basis(g).polynomials):
            if c:
                total = total + embed(c, ring) * embed(P, ring)
        return total == self.poly

    def diagonal(self) -> Polynomial:
        """Substitute the coordinates by the parameters: F(u, u)."""
        ring = self.poly.ring
        h = self.half
        target = Ring(ring.names[:h], ring.domain)
        gens = target.gens()
        return substitute_hom(self.poly, gens + gens)

    def coordinate_partials_on_diagonal(self) -> list[Polynomial]:
        """dF/dx_s evaluated at x = u, for every coordinate s."""
        h = self.half
        ring = self.poly.ring
        target = Ring(ring.names[:h], ring.domain)
        gens = target.gens()
        return [substitute_hom(partial_derivative(self.poly, h + s), gens + gens) for s in range(h)]


# ---------------------------------------------------------------------------
# invariant quartics in the P_T basis
# ---------------------------------------------------------------------------


def pt_coordinates(f: Polynomial, g: int) -> list[Fraction | int] | None:
    """Coefficients c_T with f = sum_T c_T P_T, or None if f is not in the span.

    The P_T have pairwise disjoint monomial supports, so c_T is read off the
    leading monomial of P_T; the decomposition is then checked exactly.
    """
    basis = heisenberg_basis(g).polynomials
    ring = basis[0].ring
    f = embed(f, ring) if f.ring != ring else f
    coeffs = []
    acc = ring.zero()
    for P in basis:
        m, c = P.leading_term()
        a = Fraction(f.terms.get(m, 0)) / c
        a = a.numerator if a.denominator == 1 else a
        coeffs.append(a)
        if a:
            acc = acc + P.scale(a)
    return coeffs if acc == f else None


# ---------------------------------------------------------------------------
# F_R
# ---------------------------------------------------------------------------


def _require_homogeneous(R: Polynomial) -> int:
    if R.is_zero():
        raise ValueError("R must be nonzero")
    if not R.is_homogeneous():
        raise ValueError("R must be homogeneous")
    return R.degree()


def f_r(R: Polynomial, g: int) -> BigradedEquation:
    """F_R = sum_T u*(dR/dp_T) * P_T(x), of bidegree (4(d-1), 4)."""
    d = _require_homogeneous(R)
    ring = mixed_ring(g)
    xs = [embed(P, ring) for P in heisenberg_basis(g).polynomials]
    total = ring.zero()
    coeffs = []
    for i, PT in enumerate(xs):
        c = ustar(partial_derivative(R, i), g)
        coeffs.append(c)
        if c:
            total = total + embed(c, ring) * PT
    return BigradedEquation(g, total, (4 * (d - 1), 4), "f_r", tuple(coeffs))


# ---------------------------------------------------------------------------
# determinants
# ---------------------------------------------------------------------------


def det(matrix: list[list[Polynomial]]) -> Polynomial:
    """Determinant by memoized Laplace expansion along rows."""
    n = len(matrix)
    if n == 0:
        raise ValueError("empty matrix")
    ring = matrix[0][0].ring
    memo: dict[tuple[int, int], Polynomial] = {}

    def minor(r: int, cols: int) -> Polynomial:
        # rows r..n-1, columns in the bitmask ``cols``
        if r == n:
            return ring.one()
        key = (r, cols)
        if key in memo:
            return memo[key]
        acc = ring.zero()
        sign = 1
        for c in range(n):
            if cols >> c & 1:
                entry = matrix[r][c]
                if entry:
                    sub = minor(r + 1, cols & ~(1 << c))
                    if sub:
                        term = entry * sub
                        acc = acc + term if sign > 0 else acc - term
                sign = -sign
        memo[key] = acc
        return acc

    return minor(0, (1 << n) - 1)


def jacobian_rows(g: int, subgroups: list[Subgroup], sigmas: list[int], ring: Ring) -> list[list[Polynomial]]:
    """(1/4) dP_T/dx_s evaluated at x = u, one row per s, one column per T."""
    basis = heisenberg_basis(g)
    uring = theta_ring(g, "u")
    rows = []
    for s in sigmas:
        row = []
        for T in subgroups:
            P = basis.polynomials[basis.index[T]]
            D = partial_derivative(P, s).scale(Fraction(1, 4)).change_ring(uring, list(range(uring.nvars)))
            row.append(embed(D, ring))
        rows.append(row)
    return rows


def _first_row_expansion(g: int, subgroups: list[Subgroup], sigmas: list[int]
                         ) -> tuple[list[Polynomial], list[Polynomial]]:
    """Cofactor coefficients of the first (symbolic P_T) row, and the P_T."""
    uring = theta_ring(g, "u")
    lower = jacobian_rows(g, subgroups, sigmas, uring)
    n = len(subgroups)
    cof = []
    for j in range(n):
        sub = [[row[c] for c in range(n) if c != j] for row in lower]
        m = det(sub)
        cof.append(m if j % 2 == 0 else -m)
    basis = heisenberg_basis(g)
    return cof, [basis.polynomials[basis.index[T]] for T in subgroups]


def _assemble(g: int, cof: list[Polynomial], quartics: list[Polynomial]) -> Polynomial:
    ring = mixed_ring(g)
    total = ring.zero()
    for c, P in zip(cof, quartics):
        if c:
            total = total + embed(c, ring) * embed(P, ring)
    return total


def determinant_equation_g2() -> BigradedEquation:
    """The 5x5 determinant with first row P_0, P_1, P_2, P_3, P_12."""
    subs = list(enumerate_subgroups(2))
    cof, quartics = _first_row_expansion(2, subs, list(range(4)))
    return BigradedEquation(2, _assemble(2, cof, quartics), (12, 4), "det_g2")


def g3_subgroups() -> list[Subgroup]:
    """The seven T of the g=3 determinant: P_2, P_3, P_24, P_34, P_25, P_35, P_12."""
    gen = Subgroup.generated_by
    return [
        Subgroup((0, 2), 3),
        Subgroup((0, 3), 3),
        gen(2, 4, 3),
        gen(3, 4, 3),
        gen(2, 5, 3),
        gen(3, 5, 3),
        gen(1, 2, 3),
    ]


def g3_jacobian() -> list[list[Polynomial]]:
    """The 8x7 matrix (1/4) dP_T/dx_s(u) for the seven g=3 subgroups."""
    return jacobian_rows(3, g3_subgroups(), list(range(8)), theta_ring(3, "u"))


def g3_jacobian_minors() -> list[Polynomial]:
    """The eight 7x7 minors (row s deleted, s = 0..7)."""
    J = g3_jacobian()
    return [det([row for k, row in enumerate(J) if k != s]) for s in range(8)]


def g3_jacobian_rank(point) -> int:
    """Rank over Q of the 8x7 matrix g3_jacobian() at a rational point u."""
    from .linalg import rref_vectors

    rows = []
    for row in g3_jacobian():
        vals = {}
        for j, f in enumerate(row):
            v = Fraction(0)
            for e, c in f:
                t = Fraction(c)
                for i, k in enumerate(e):
                    if k:
                        t *= Fraction(point[i]) ** k
                v += t
            if v:
                vals[j] = v
        rows.append(vals)
    return len(rref_vectors(rows, 7, None))


def divide_by_monomial(f: Polynomial, exps: list[int]) -> Polynomial | None:
    """f / x^exps if every term is divisible, else None."""
    ring = f.ring
    mono = ring.pack(exps)
    shifts = ring._shifts
    out = {}
    for m, c in f.terms.items():
        for e, s in zip(exps, shifts):
            if ((m >> s) & FIELD_MASK) < e:
                return None
        out[m - mono] = c
    return Polynomial(ring, out)


class DivisibilityError(ArithmeticError):
    pass


def determinant_cofactors_g3() -> list[Polynomial]:
    """Raw cofactors a_T of the 7x7 determinant (rows x001 ... x110)."""
    cof, _ = _first_row_expansion(3, g3_subgroups(), list(range(1, 7)))
    return cof


def determinant_equation_g3() -> BigradedEquation:
    """The 7x7 determinant divided by u000*u111, of bidegree (16, 4)."""
    cof = determinant_cofactors_g3()
    exps = [1, 0, 0, 0, 0, 0, 0, 1]
    divided = []
    for c in cof:
        q = divide_by_monomial(c, exps)
        if q is None:
            raise DivisibilityError("cofactor is not divisible by u000*u111")
        divided.append(q)
    basis = heisenberg_basis(3)
    quartics = [basis.polynomials[basis.index[T]] for T in g3_subgroups()]
    return BigradedEquation(3, _assemble(3, divided, quartics), (16, 4), "det_g3")


def proportionality(a: Polynomial, b: Polynomial) -> Fraction | None:
    """The scalar c with a = c*b, or None."""
    if a.ring != b.ring:
        raise ValueError("ring mismatch")
    if b.is_zero():
        return Fraction(0) if a.is_zero() else None
    m, cb = b.leading_term()
    c = Fraction(a.terms.get(m, 0)) / cb
    if c == 0 or a != b.scale(c):
        return None
    return c


# ---------------------------------------------------------------------------
# lifts
# ---------------------------------------------------------------------------


def tilde(R: Polynomial, g: int) -> Polynomial:
    """Substitute p_T -> p~_T(v) (the lifted quartics in 2^(g+1) variables)."""
    if R.ring.names != p_ring(g).names:
        raise ValueError(f"polynomial is not in the genus-{g} p-ring")
    return substitute_hom(R, lifted_basis(g).polynomials)


def tilde_invariant_quartic(f: Polynomial, g: int) -> Polynomial:
    """tilde of an invariant quartic f = sum c_T P_T, i.e. sum c_T p~_T."""
    coeffs = pt_coordinates(f, g)
    if coeffs is None:
        raise ValueError("not a Heisenberg-invariant quartic")
    ring = lifted_basis(g).polynomials[0].ring
    total = ring.zero()
    for c, pt in zip(coeffs, lifted_basis(g).polynomials):
        if c:
            total = total + pt.scale(c)
    return total


def _require_kernel(R: Polynomial, g: int) -> int:
    d = _require_homogeneous(R)
    if not xstar(R, g).is_zero():
        raise ValueError("R is not in the kernel of x*")
    return d


def tilde_lift_kummer(R: Polynomial, g: int, check: bool = True) -> BigradedEquation:
    """F~_R = sum_T tilde(dR/dp_T)(v) * p~_T(y), bidegree (4(d-1), 4)."""
    d = _require_kernel(R, g) if check else _require_homogeneous(R)
    ring = mixed_ring(g + 1, "v", "y")
    yring = theta_ring(g + 1, "y")
    total = ring.zero()
    for i, pt in enumerate(lifted_basis(g).polynomials):
        dR = partial_derivative(R, i)
        if dR.is_zero():
            continue
        py = embed(pt.change_ring(yring, list(range(yring.nvars))), ring)
        total = total + embed(tilde(dR, g), ring) * py
    return BigradedEquation(g + 1, total, (4 * (d - 1), 4), "tilde_lift")


def moduli_equation(R: Polynomial, g: int, check: bool = True) -> Polynomial:
    """R~(v) = R(..., p~_T(v), ...), homogeneous of degree 4d in 2^(g+1) variables."""
    if R.is_zero():
        return lifted_basis(g).polynomials[0].ring.zero()
    if check:
        _require_kernel(R, g)
    return tilde(R, g)


# ---------------------------------------------------------------------------
# the Schottky form
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def q_ring() -> Ring:
    """36 variables q_<eps>_<eps'> indexed by the genus-3 even characteristics."""
    return Ring(["q" + characteristic_label(e, f, 3) for e, f in even_characteristics(3)])


@dataclass(frozen=True)
class SchottkyData:
    q_vars: tuple[str, ...]
    characteristics: tuple[tuple[int, int], ...]
    quadratic_expressions: tuple[Polynomial, ...]  # one per g=2 lifted basis element
    fbar8: Polynomial
    labels: tuple[str, ...]


def _quadric_products():
    quads = [q for _, q in even_quadrics(3, "v")]
    n = len(quads)
    pairs = [(a, b) for a in range(n) for b in range(a, n)]
    return quads, pairs


def schottky_build() -> SchottkyData:
    """Write each g=2 lifted quartic as a quadratic form in the 36 quadrics.

    The linear system over the 666 products Q_m Q_m' (m <= m') is solved in
    reduced echelon form with every free unknown set to zero; rows are the
    degree-4 monomials of C[v] in descending order.  f-bar_8 is R_2 with p_T
    replaced by these quadratic expressions.
    """
    from .data import igusa_quartic

    quads, pairs = _quadric_products()
    vring = quads[0].ring
    products = [quads[a] * quads[b] for a, b in pairs]
    monos = sorted({m for P in products for m in P.terms}, reverse=True)
    lifted = lifted_basis(2)
    targets = [pt.change_ring(vring) for pt in lifted.polynomials]
    for t in targets:
        for m in t.terms:
            if m not in monos:
                monos.append(m)
    idx = {m: i for i, m in enumerate(monos)}
    columns = [{idx[m]: c for m, c in P.terms.items()} for P in products]
    A = SparseMatrix(len(monos), columns)
    qr = q_ring()
    qg = qr.gens()
    exprs = []
    for t in targets:
        sol = solve(A, {idx[m]: c for m, c in t.terms.items()})
        if sol is None:
            raise ArithmeticError("lifted quartic is not a quadratic form in the quadrics")
        expr = qr.zero()
        for j, c in sorted(sol.items()):
            a, b = pairs[j]
            expr = expr + (qg[a] * qg[b]).scale(c)
        exprs.append(expr)
    fbar8 = substitute_hom(igusa_quartic(), exprs)
    chars = tuple(even_characteristics(3))
    return SchottkyData(qr.names, chars, tuple(exprs), fbar8, tuple(lifted.labels()))


def schottky_pullback(f: Polynomial) -> Polynomial:
    """Substitute q_m -> Q_m(v) (genus-3 quadrics in 8 variables)."""
    quads = [q for _, q in even_quadrics(3, "v")]
    return substitute_hom(f, quads)


def sj_characteristics() -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """For each genus-3 even [e; e'], the genus-4 pair [e0; e'0], [e0; e'1]."""
    return [((2 * e, 2 * f), (2 * e, 2 * f + 1)) for e, f in even_characteristics(3)]


def schottky_evaluate(fbar8: Polynomial, tau, precision: int = 256):
    """F(tau) = fbar8(..., theta[e0;e'0](tau) theta[e0;e'1](tau), ...).

    Returns the polynomial evaluation (value, cancellation scale, error).
    """
    from .polycore import evaluate
    from .thetanum import PeriodMatrix, theta_constants_all

    if not isinstance(tau, PeriodMatrix):
        tau = PeriodMatrix.from_matrix(tau)
    if tau.genus != 4:
        raise ValueError("the Schottky form needs a genus-4 period matrix")
    import gmpy2

    eps_list = sorted({a[0] for a, _ in sj_characteristics()})
    consts = theta_constants_all(tau, precision, eps_list)
    with gmpy2.context(gmpy2.get_context(), precision=precision):
        q = [consts[a] * consts[b] for a, b in sj_characteristics()]
    return evaluate(fbar8, q, precision)
