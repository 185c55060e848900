"""Heisenberg-invariant quartics, even quadrics and their lifts.

Variables ``x_sigma`` are indexed by the integer value of sigma.  For the
lift to genus g+1 the split coordinate is the last one, so ``v_{sigma 0}``
has index ``2*sigma`` and ``v_{sigma 1}`` has index ``2*sigma + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from .f2lin import (
    Character,
    Subgroup,
    bitstring,
    enumerate_subgroups,
    even_characteristics,
    parity,
)
from .polycore import QQ, PrimeField, Polynomial, Ring


def var_names(prefix: str, g: int) -> list[str]:
    return [prefix + bitstring(s, g) for s in range(1 << g)]


@lru_cache(maxsize=None)
def theta_ring(g: int, prefix: str = "x", domain=QQ) -> Ring:
    """Ring of the 2^g coordinates, e.g. x000 ... x111."""
    return Ring(var_names(prefix, g), domain)


def _check_subgroup(T: Subgroup, g: int) -> None:
    if not isinstance(T, Subgroup) or T.genus != g:
        raise ValueError(f"malformed subgroup {T!r} for genus {g}")


def quartic_terms(T: Subgroup, g: int) -> dict[tuple[int, ...], int]:
    """Exponent vectors of P_T with their coefficients."""
    a, b = T.generators
    n = 1 << g
    acc: dict[tuple[int, ...], int] = {}
    for rho in range(n):
        e = [0] * n
        for s in (rho, rho ^ a, rho ^ b, rho ^ a ^ b):
            e[s] += 1
        key = tuple(e)
        acc[key] = acc.get(key, 0) + 1
    return acc


def invariant_quartic(T: Subgroup, g: int, ring: Ring | None = None) -> Polynomial:
    """P_T = sum_rho x_rho x_(rho+alpha) x_(rho+beta) x_(rho+alpha+beta)."""
    _check_subgroup(T, g)
    ring = ring or theta_ring(g)
    return ring.from_terms(quartic_terms(T, g).items())


def quadric(eps: int, eps1: int, g: int, ring: Ring | None = None) -> Polynomial:
    """Q[eps; eps'] = sum_sigma (-1)^(sigma.eps') x_sigma x_(sigma+eps)."""
    ring = ring or theta_ring(g)
    n = 1 << g
    terms = []
    for s in range(n):
        e = [0] * n
        e[s] += 1
        e[s ^ eps] += 1
        terms.append((e, -1 if parity(s & eps1) else 1))
    return ring.from_terms(terms)


def lift_ring(g: int, prefix: str = "v", domain=QQ) -> Ring:
    return theta_ring(g + 1, prefix, domain)


def lifted_quartic(T: Subgroup, g: int, ring: Ring | None = None) -> Polynomial:
    """p~_{T,chi} = P_T(..., v_{sigma 0}, ...) - P_T(..., v_{sigma 1}, ...)."""
    _check_subgroup(T, g)
    ring = ring or lift_ring(g)
    if ring.nvars != 1 << (g + 1):
        raise ValueError("lift ring must have 2^(g+1) variables")
    n1 = ring.nvars
    terms = []
    for e, c in quartic_terms(T, g).items():
        for half, sign in ((0, 1), (1, -1)):
            v = [0] * n1
            for s, k in enumerate(e):
                if k:
                    v[2 * s + half] = k
            terms.append((v, sign * c))
    return ring.from_terms(terms)


def split_quartic(T: Subgroup, g: int, ring: Ring | None = None) -> Polynomial:
    """P_{T~} for T~ the image of T under sigma -> (sigma, 0)."""
    Tt = Subgroup(tuple(2 * t for t in T.elements), g + 1)
    return invariant_quartic(Tt, g + 1, ring or lift_ring(g))


# ---------------------------------------------------------------------------
# the Heisenberg action
# ---------------------------------------------------------------------------


def _action_tables(ring: Ring, alpha: int, beta: int):
    n = ring.nvars
    perm = [s ^ beta for s in range(n)]
    signs = [parity(s & alpha) for s in range(n)]
    return perm, signs


def act(f: Polynomial, alpha: int = 0, beta: int = 0) -> Polynomial:
    """Apply the translation x_s -> x_(s+beta) and then the sign change by alpha.

    On quartics the two kinds of generator commute, so the order is only a
    convention here.
    """
    ring = f.ring
    n = ring.nvars
    if n & (n - 1):
        raise ValueError("ring mismatch: variable count is not a power of two")
    if not (0 <= alpha < n and 0 <= beta < n):
        raise ValueError("group element outside (Z/2Z)^g")
    perm, signs = _action_tables(ring, alpha, beta)
    shifts = ring._shifts
    dshift = ring._degshift
    from .polycore import FIELD_MASK

    neg = (lambda c: ring.domain.p - c) if isinstance(ring.domain, PrimeField) else (lambda c: -c)
    out = {}
    for m, c in f.terms.items():
        t = (m >> dshift) << dshift
        odd = 0
        for s in range(n):
            e = (m >> shifts[s]) & FIELD_MASK
            if e:
                # x_s^e is the image of x_(s+beta)^e under the translation
                t |= e << shifts[perm[s]]
                if signs[perm[s]] and e & 1:
                    odd ^= 1
        out[t] = neg(c) if odd else c
    return Polynomial._from_raw(ring, out)


def heisenberg_act(kind: str, element: int, f: Polynomial) -> Polynomial:
    """``kind`` is ``"sign_change"`` or ``"translation"``."""
    if kind == "sign_change":
        return act(f, alpha=element)
    if kind == "translation":
        return act(f, beta=element)
    raise ValueError(f"unknown action kind {kind!r}")


def in_eigenspace(f: Polynomial, chi: Character) -> bool:
    """Whether every group element h acts on f by the scalar chi(h)."""
    n = f.ring.nvars
    for a in range(n):
        if act(f, alpha=a) != f.scale(chi.value(a, 0)):
            return False
    for b in range(n):
        if act(f, beta=b) != f.scale(chi.value(0, b)):
            return False
    return True


# ---------------------------------------------------------------------------
# eigenspace dimensions
# ---------------------------------------------------------------------------


def _monomials_of_degree(n: int, d: int):
    def rec(i, left, cur):
        if i == n - 1:
            yield tuple(cur + [left])
            return
        for k in range(left, -1, -1):
            yield from rec(i + 1, left - k, cur + [k])

    yield from rec(0, d, [])


def eigenspace_dimension(g: int, degree: int = 4, chi: Character | None = None,
                         p: int | None = None) -> int:
    """Dimension of the chi-eigenspace of degree-4 forms in 2^g variables.

    Every monomial is pushed through the projector sum_h chi(h) h; the rank
    of the images (over a prime field) is the dimension.
    """
    from .linalg import rank_mod_p
    from .polycore import DEFAULT_PRIME

    if degree != 4:
        raise ValueError("only degree 4 is supported")
    chi = chi or Character.trivial(g)
    if chi.genus != g:
        raise ValueError("character genus mismatch")
    p = p or DEFAULT_PRIME
    n = 1 << g
    seen = set()
    rows = []
    for exps in _monomials_of_degree(n, degree):
        if exps in seen:
            continue
        image: dict[tuple[int, ...], int] = {}
        for b in range(n):
            moved = [0] * n
            for s, k in enumerate(exps):
                if k:
                    moved[s ^ b] = k
            moved = tuple(moved)
            seen.add(moved)
            for a in range(n):
                sign = -1 if sum(k for s, k in enumerate(moved) if k and parity(s & a)) & 1 else 1
                c = sign * chi.value(a, b)
                image[moved] = image.get(moved, 0) + c
        row = {key: c % p for key, c in image.items() if c % p}
        if row:
            rows.append(row)
    keys = sorted({k for r in rows for k in r})
    index = {k: i for i, k in enumerate(keys)}
    return rank_mod_p([{index[k]: c for k, c in r.items()} for r in rows], p)


def eigenspace_formula(g: int, trivial: bool) -> int:
    if trivial:
        return ((1 << g) + 1) * ((1 << (g - 1)) + 1) // 3
    return ((1 << (g - 1)) + 1) * ((1 << (g - 2)) + 1) // 3 if g >= 2 else 1


# ---------------------------------------------------------------------------
# bases
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HeisenbergBasis:
    genus: int
    quartics: tuple[tuple[Subgroup, Polynomial], ...]
    index: dict = field(compare=False, repr=False)

    @property
    def polynomials(self) -> list[Polynomial]:
        return [q for _, q in self.quartics]

    def labels(self) -> list[str]:
        return ["P_" + T.label() for T, _ in self.quartics]

    def __len__(self) -> int:
        return len(self.quartics)


@dataclass(frozen=True)
class LiftedBasis:
    genus: int
    character: Character
    quartics: tuple[tuple[Subgroup, Polynomial], ...]

    @property
    def polynomials(self) -> list[Polynomial]:
        return [q for _, q in self.quartics]

    def labels(self) -> list[str]:
        return ["p~_" + T.label() for T, _ in self.quartics]

    def __len__(self) -> int:
        return len(self.quartics)


@lru_cache(maxsize=None)
def heisenberg_basis(g: int, prefix: str = "x") -> HeisenbergBasis:
    ring = theta_ring(g, prefix)
    subs = enumerate_subgroups(g)
    quartics = tuple((T, invariant_quartic(T, g, ring)) for T in subs)
    return HeisenbergBasis(g, quartics, {T: i for i, T in enumerate(subs)})


@lru_cache(maxsize=None)
def lifted_basis(g: int, prefix: str = "v") -> LiftedBasis:
    ring = lift_ring(g, prefix)
    quartics = tuple((T, lifted_quartic(T, g, ring)) for T in enumerate_subgroups(g))
    return LiftedBasis(g, Character.last_translation(g + 1), quartics)


@lru_cache(maxsize=None)
def even_quadrics(g: int, prefix: str = "x") -> tuple[tuple[tuple[int, int], Polynomial], ...]:
    ring = theta_ring(g, prefix)
    return tuple(((e, f), quadric(e, f, g, ring)) for e, f in even_characteristics(g))
