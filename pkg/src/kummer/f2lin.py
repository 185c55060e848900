"""Combinatorics of (Z/2Z)^g.

Group elements are g-bit vectors; the first coordinate is the most
significant bit, so ``GroupElement.from_bits("011")`` has integer value 3
and ``x_sigma`` variables are ordered by that integer.  Heavy code paths
work directly on the integers; the small classes here exist for the
public surface and for serialization.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache


def parity(n: int) -> int:
    return bin(n).count("1") & 1


def bitstring(value: int, genus: int) -> str:
    return format(value, f"0{genus}b") if genus else ""


@dataclass(frozen=True, order=True)
class GroupElement:
    """An element sigma of (Z/2Z)^g."""

    bits: int
    genus: int

    def __post_init__(self):
        if self.genus < 1:
            raise ValueError("genus must be positive")
        if not 0 <= self.bits < 1 << self.genus:
            raise ValueError(f"{self.bits} is not a {self.genus}-bit vector")

    @classmethod
    def from_bits(cls, s: str) -> "GroupElement":
        return cls(int(s, 2), len(s))

    def __add__(self, other: "GroupElement") -> "GroupElement":
        return add(self, other)

    def __str__(self) -> str:
        return bitstring(self.bits, self.genus)

    def coordinate(self, k: int) -> int:
        """The k-th coordinate, 1-based as in sigma_1 ... sigma_g."""
        return (self.bits >> (self.genus - k)) & 1


def _same_genus(a: GroupElement, b: GroupElement) -> None:
    if a.genus != b.genus:
        raise ValueError(f"genus mismatch: {a.genus} vs {b.genus}")


def add(a: GroupElement, b: GroupElement) -> GroupElement:
    _same_genus(a, b)
    return GroupElement(a.bits ^ b.bits, a.genus)


def pairing(a: GroupElement, b: GroupElement) -> int:
    """The F_2 dot product a . b."""
    _same_genus(a, b)
    return parity(a.bits & b.bits)


@dataclass(frozen=True)
class Subgroup:
    """A subgroup of (Z/2Z)^g of order 1, 2 or 4, kept in canonical form."""

    elements: tuple[int, ...]
    genus: int

    def __post_init__(self):
        els = self.elements
        if len(els) not in (1, 2, 4) or els[0] != 0 or list(els) != sorted(set(els)):
            raise ValueError(f"malformed subgroup {els}")
        if any(not 0 <= e < 1 << self.genus for e in els):
            raise ValueError("element outside (Z/2Z)^g")
        if any((a ^ b) not in els for a in els for b in els):
            raise ValueError(f"{els} is not closed under addition")

    @classmethod
    def generated_by(cls, alpha: int, beta: int, genus: int) -> "Subgroup":
        return cls(tuple(sorted({0, alpha, beta, alpha ^ beta})), genus)

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def generators(self) -> tuple[int, int]:
        """Canonical (alpha, beta): the two smallest nonzero elements, zero-padded."""
        els = self.elements
        if len(els) == 1:
            return 0, 0
        if len(els) == 2:
            return els[1], 0
        return els[1], els[2]

    def label(self) -> str:
        """Display label: P_0, P_i, P_ij for g <= 3, comma separated beyond."""
        a, b = self.generators
        if self.order == 1:
            return "0"
        if self.order == 2:
            return str(a)
        if self.genus <= 3:
            return f"{a}{b}"
        return f"{a},{b}"

    def bitstrings(self) -> list[str]:
        return [bitstring(e, self.genus) for e in self.elements]

    def __str__(self) -> str:
        return "{" + ",".join(self.bitstrings()) + "}"


@lru_cache(maxsize=None)
def enumerate_subgroups(g: int) -> tuple[Subgroup, ...]:
    """All subgroups of order <= 4 in a fixed order.

    Trivial group first, then the order-2 groups by generator, then the
    order-4 groups lexicographically by canonical generator pair.
    """
    if g < 1:
        raise ValueError("g must be at least 1")
    n = 1 << g
    out = [Subgroup((0,), g)]
    out += [Subgroup((0, a), g) for a in range(1, n)]
    for a in range(1, n):
        for b in range(a + 1, n):
            c = a ^ b
            if c > b:
                out.append(Subgroup((0, a, b, c), g))
    return tuple(out)


def subgroup_count(g: int) -> int:
    """(2^g + 1)(2^(g-1) + 1)/3, the number of subgroups of order <= 4."""
    return ((1 << g) + 1) * ((1 << (g - 1)) + 1) // 3


@dataclass(frozen=True)
class Character:
    """A character of (Z/2Z)^(2g), i.e. of the Heisenberg group mod scalars.

    chi(sign change alpha, translation beta) = (-1)^(sign_part.beta + translation_part.alpha)
    """

    sign_part: int
    translation_part: int
    genus: int

    def value(self, alpha: int, beta: int) -> int:
        return -1 if parity(self.sign_part & beta) ^ parity(self.translation_part & alpha) else 1

    def is_trivial(self) -> bool:
        return self.sign_part == 0 and self.translation_part == 0

    @classmethod
    def trivial(cls, genus: int) -> "Character":
        return cls(0, 0, genus)

    @classmethod
    def last_translation(cls, genus: int) -> "Character":
        """Trivial on sign changes, (-1)^(beta_g) on translations."""
        return cls(1, 0, genus)

    def to_json(self) -> list[str]:
        return [bitstring(self.sign_part, self.genus), bitstring(self.translation_part, self.genus)]


def all_characters(g: int) -> list[Character]:
    n = 1 << g
    return [Character(s, t, g) for s in range(n) for t in range(n)]


def even_characteristics(g: int) -> list[tuple[int, int]]:
    """Pairs (eps, eps') with eps . eps' = 0, in lexicographic order."""
    if g < 1:
        raise ValueError("g must be at least 1")
    n = 1 << g
    return [(e, f) for e in range(n) for f in range(n) if not parity(e & f)]


def characteristic_label(eps: int, eps1: int, g: int) -> str:
    return f"{bitstring(eps, g)}_{bitstring(eps1, g)}"
