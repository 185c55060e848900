"""Sparse multivariate polynomials over exact coefficient domains.

Monomials are stored packed into a single Python integer: the total degree
occupies the most significant field, followed by one field per variable
(variable 0 most significant).  Integer comparison of packed monomials is
therefore graded-lexicographic comparison, and monomial multiplication is
integer addition.

Coefficients live in one of two exact domains:

* :data:`QQ`, Python ``int`` or reduced :class:`fractions.Fraction`
  (integral values are always stored as ``int``);
* :class:`PrimeField`, integers in ``[0, p)``.

:class:`ComplexFloat` is only a precision tag for numeric evaluation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

import gmpy2

FIELD_BITS = 16
FIELD_MASK = (1 << FIELD_BITS) - 1
MAX_DEGREE = FIELD_MASK

# 2**62 - 57, the largest prime below 2**62.
DEFAULT_PRIME = 4611686018427387847


class DomainError(ValueError):
    """Raised when polynomials from incompatible rings or domains meet."""


# ---------------------------------------------------------------------------
# coefficient domains
# ---------------------------------------------------------------------------


class RationalField:
    """Arbitrary-precision rationals."""

    tag = "Q"
    exact = True
    characteristic = 0

    def __repr__(self) -> str:
        return "QQ"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RationalField)

    def __hash__(self) -> int:
        return hash("QQ")

    def convert(self, c) -> int | Fraction:
        if isinstance(c, int):
            return c
        if isinstance(c, Fraction):
            return c.numerator if c.denominator == 1 else c
        if isinstance(c, str):
            return self.parse(c)
        if isinstance(c, float):
            raise DomainError("floats are not exact rationals")
        c = Fraction(c)
        return c.numerator if c.denominator == 1 else c

    def normalize(self, c):
        if type(c) is Fraction and c.denominator == 1:
            return c.numerator
        return c

    def format(self, c) -> str:
        if isinstance(c, Fraction):
            return f"{c.numerator}/{c.denominator}"
        return str(c)

    def parse(self, s: str) -> int | Fraction:
        if "/" in s:
            num, den = s.split("/")
            return self.normalize(Fraction(int(num), int(den)))
        return int(s)

    def inverse(self, c):
        return self.normalize(Fraction(1) / c)


class PrimeField:
    """The field Z/pZ for a prime p below 2**63."""

    exact = True

    def __init__(self, p: int = DEFAULT_PRIME):
        p = int(p)
        if p < 2 or p >= 1 << 63 or not gmpy2.is_prime(p, 50):
            raise DomainError(f"{p} is not a prime below 2**63")
        self.p = p
        self.characteristic = p
        self.tag = f"Fp:{p}"

    def __repr__(self) -> str:
        return f"GF({self.p})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self) -> int:
        return hash(("GF", self.p))

    def convert(self, c) -> int:
        if isinstance(c, int):
            return c % self.p
        if isinstance(c, Fraction):
            if c.denominator % self.p == 0:
                raise ZeroDivisionError(f"denominator divisible by {self.p}")
            return c.numerator * pow(c.denominator, -1, self.p) % self.p
        if isinstance(c, str):
            return self.parse(c)
        raise DomainError(f"cannot map {c!r} into {self}")

    def normalize(self, c) -> int:
        return c % self.p

    def format(self, c) -> str:
        return str(c)

    def parse(self, s: str) -> int:
        if "/" in s:
            num, den = s.split("/")
            return int(num) * pow(int(den), -1, self.p) % self.p
        return int(s) % self.p

    def inverse(self, c) -> int:
        return pow(c, -1, self.p)


@dataclass(frozen=True)
class ComplexFloat:
    """Precision tag for numeric evaluation; never a polynomial domain."""

    precision: int = 106
    exact = False
    tag = "C"


QQ = RationalField()


def GF(p: int = DEFAULT_PRIME) -> PrimeField:
    return PrimeField(p)


def domain_from_tag(tag: str):
    if tag == "Q":
        return QQ
    if tag.startswith("Fp:"):
        return PrimeField(int(tag[3:]))
    raise DomainError(f"unknown domain tag {tag!r}")


# ---------------------------------------------------------------------------
# rings
# ---------------------------------------------------------------------------


class Ring:
    """A polynomial ring: ordered variable names over an exact domain."""

    __slots__ = ("names", "domain", "nvars", "_shifts", "_degshift", "_index", "_hash")

    def __init__(self, names: Sequence[str], domain=QQ):
        if not getattr(domain, "exact", False):
            raise DomainError("polynomial rings need an exact coefficient domain")
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable names")
        self.names = names
        self.domain = domain
        self.nvars = n = len(names)
        self._shifts = tuple(FIELD_BITS * (n - 1 - i) for i in range(n))
        self._degshift = FIELD_BITS * n
        self._index = {name: i for i, name in enumerate(names)}
        self._hash = hash((names, domain))

    def __repr__(self) -> str:
        return f"Ring({len(self.names)} vars over {self.domain!r})"

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Ring)
            and self._hash == other._hash
            and self.names == other.names
            and self.domain == other.domain
        )

    def __hash__(self) -> int:
        return self._hash

    def index(self, name: str) -> int:
        return self._index[name]

    def with_domain(self, domain) -> "Ring":
        return Ring(self.names, domain)

    # -- monomials -------------------------------------------------------

    def pack(self, exps: Sequence[int]) -> int:
        if len(exps) != self.nvars:
            raise ValueError(f"expected {self.nvars} exponents, got {len(exps)}")
        m = 0
        deg = 0
        for e, s in zip(exps, self._shifts):
            if e < 0:
                raise ValueError("negative exponent")
            m |= e << s
            deg += e
        if deg > MAX_DEGREE:
            raise OverflowError("total degree exceeds packing limit")
        return m | (deg << self._degshift)

    def exponents(self, m: int) -> tuple[int, ...]:
        return tuple((m >> s) & FIELD_MASK for s in self._shifts)

    def degree_of(self, m: int) -> int:
        return m >> self._degshift

    def exponent(self, m: int, i: int) -> int:
        return (m >> self._shifts[i]) & FIELD_MASK

    def var_unit(self, i: int) -> int:
        """Packed monomial of the i-th variable."""
        return (1 << self._shifts[i]) | (1 << self._degshift)

    # -- constructors ----------------------------------------------------

    def zero(self) -> "Polynomial":
        return Polynomial(self, {})

    def one(self) -> "Polynomial":
        return Polynomial(self, {0: 1})

    def constant(self, c) -> "Polynomial":
        c = self.domain.convert(c)
        return Polynomial(self, {0: c} if c else {})

    def gen(self, i: int | str) -> "Polynomial":
        if isinstance(i, str):
            i = self._index[i]
        if not 0 <= i < self.nvars:
            raise IndexError(f"variable index {i} out of range")
        return Polynomial(self, {self.var_unit(i): 1})

    def gens(self) -> list["Polynomial"]:
        return [self.gen(i) for i in range(self.nvars)]

    def from_terms(self, terms: Iterable[tuple[Sequence[int], object]]) -> "Polynomial":
        acc: dict[int, object] = {}
        conv = self.domain.convert
        for exps, c in terms:
            m = self.pack(exps)
            acc[m] = acc.get(m, 0) + conv(c)
        return Polynomial._from_raw(self, acc)

    def monomial(self, exps: Sequence[int], c=1) -> "Polynomial":
        return self.from_terms([(exps, c)])


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------


def _clean(domain, acc: dict) -> dict:
    """Normalize raw accumulated coefficients and drop zeros."""
    if isinstance(domain, PrimeField):
        p = domain.p
        out = {}
        for m, c in acc.items():
            c %= p
            if c:
                out[m] = c
        return out
    out = {}
    for m, c in acc.items():
        if c:
            if type(c) is Fraction and c.denominator == 1:
                c = c.numerator
            out[m] = c
    return out


def _mul_into(acc: dict, a: Mapping[int, object], b: Mapping[int, object], scale=1) -> None:
    if len(a) < len(b):
        a, b = b, a
    get = acc.get
    items_b = list(b.items())
    if scale != 1:
        items_b = [(m, c * scale) for m, c in items_b]
    for m2, c2 in items_b:
        for m1, c1 in a.items():
            m = m1 + m2
            acc[m] = get(m, 0) + c1 * c2


class Polynomial:
    """Immutable sparse polynomial; ``terms`` maps packed monomial -> coefficient."""

    __slots__ = ("ring", "terms", "_sorted")

    def __init__(self, ring: Ring, terms: dict):
        self.ring = ring
        self.terms = terms
        self._sorted = None

    @classmethod
    def _from_raw(cls, ring: Ring, acc: dict) -> "Polynomial":
        return cls(ring, _clean(ring.domain, acc))

    # -- inspection ------------------------------------------------------

    def __len__(self) -> int:
        return len(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def sorted_terms(self) -> list[tuple[int, object]]:
        """Terms in descending graded-lex order."""
        if self._sorted is None:
            self._sorted = sorted(self.terms.items(), key=lambda t: t[0], reverse=True)
        return self._sorted

    def __iter__(self) -> Iterator[tuple[tuple[int, ...], object]]:
        exps = self.ring.exponents
        for m, c in self.sorted_terms():
            yield exps(m), c

    def degree(self) -> int:
        if not self.terms:
            return -1
        return self.ring.degree_of(max(self.terms))

    def is_homogeneous(self, degree: int | None = None) -> bool:
        degs = {self.ring.degree_of(m) for m in self.terms}
        if not degs:
            return True
        if len(degs) != 1:
            return False
        return degree is None or degs == {degree}

    def leading_term(self) -> tuple[int, object]:
        return self.sorted_terms()[0]

    def coefficient(self, exps: Sequence[int]):
        return self.terms.get(self.ring.pack(exps), 0)

    def variables_used(self) -> set[int]:
        used = set()
        for m in self.terms:
            e = self.ring.exponents(m)
            used.update(i for i, k in enumerate(e) if k)
        return used

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Polynomial):
            return self.ring == other.ring and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == self.ring.constant(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.ring, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        return f"Polynomial({to_string(self, max_terms=6)})"

    # -- arithmetic ------------------------------------------------------

    def _check(self, other: "Polynomial") -> None:
        if self.ring != other.ring:
            raise DomainError("ring/domain mismatch")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return self.ring.constant(other)
        raise TypeError(f"cannot combine polynomial with {type(other).__name__}")

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        acc = dict(self.terms)
        get = acc.get
        for m, c in other.terms.items():
            acc[m] = get(m, 0) + c
        return Polynomial._from_raw(self.ring, acc)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._from_raw(self.ring, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Polynomial":
        other = self._coerce(other)
        acc = dict(self.terms)
        get = acc.get
        for m, c in other.terms.items():
            acc[m] = get(m, 0) - c
        return Polynomial._from_raw(self.ring, acc)

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            acc: dict = {}
            _mul_into(acc, self.terms, other.terms)
            return Polynomial._from_raw(self.ring, acc)
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, c) -> "Polynomial":
        c = self.ring.domain.convert(c)
        if not c:
            return self.ring.zero()
        return Polynomial._from_raw(self.ring, {m: v * c for m, v in self.terms.items()})

    def __pow__(self, k: int) -> "Polynomial":
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial powers need a non-negative integer exponent")
        result = self.ring.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __truediv__(self, c) -> "Polynomial":
        dom = self.ring.domain
        return self.scale(dom.inverse(dom.convert(c)))

    # -- conversions -----------------------------------------------------

    def change_ring(self, target: Ring, var_map: Sequence[int] | None = None) -> "Polynomial":
        """Re-embed into ``target`` sending variable i to ``var_map[i]``.

        Coefficients are converted into the target domain, so this is also
        reduction modulo p.
        """
        src = self.ring
        if var_map is None:
            if src.names == target.names:
                var_map = list(range(src.nvars))
            else:
                var_map = [target.index(n) for n in src.names]
        if len(var_map) != src.nvars:
            raise ValueError("variable map has the wrong length")
        shifts = src._shifts
        tshifts = [target._shifts[j] for j in var_map]
        dshift_s, dshift_t = src._degshift, target._degshift
        conv = target.domain.convert
        same_domain = src.domain == target.domain
        acc: dict = {}
        for m, c in self.terms.items():
            t = (m >> dshift_s) << dshift_t
            for s, ts in zip(shifts, tshifts):
                e = (m >> s) & FIELD_MASK
                if e:
                    t += e << ts
            acc[t] = acc.get(t, 0) + (c if same_domain else conv(c))
        return Polynomial._from_raw(target, acc)

    def reduce_mod(self, p: int) -> "Polynomial":
        return self.change_ring(self.ring.with_domain(PrimeField(p)))

    def map_coefficients(self, fn) -> "Polynomial":
        return Polynomial._from_raw(self.ring, {m: fn(c) for m, c in self.terms.items()})

    def homogeneous_components(self) -> dict[int, "Polynomial"]:
        comps: dict[int, dict] = {}
        for m, c in self.terms.items():
            comps.setdefault(self.ring.degree_of(m), {})[m] = c
        return {d: Polynomial(self.ring, t) for d, t in comps.items()}


# ---------------------------------------------------------------------------
# the operations
# ---------------------------------------------------------------------------


def add(a: Polynomial, b: Polynomial) -> Polynomial:
    return a + b


def mul(a: Polynomial, b: Polynomial) -> Polynomial:
    return a * b


def scale(a: Polynomial, c) -> Polynomial:
    return a.scale(c)


def power(a: Polynomial, k: int) -> Polynomial:
    return a ** k


def partial_derivative(f: Polynomial, var: int | str) -> Polynomial:
    """Formal partial derivative with respect to variable ``var``."""
    ring = f.ring
    if isinstance(var, str):
        var = ring.index(var)
    if not 0 <= var < ring.nvars:
        raise IndexError(f"variable index {var} out of range")
    shift = ring._shifts[var]
    unit = ring.var_unit(var)
    acc = {}
    for m, c in f.terms.items():
        e = (m >> shift) & FIELD_MASK
        if e:
            acc[m - unit] = c * e
    return Polynomial._from_raw(ring, acc)


def substitute_hom(f: Polynomial, images: Sequence[Polynomial] | Mapping[int, Polynomial],
                   target: Ring | None = None) -> Polynomial:
    """Apply the ring homomorphism sending variable i of ``f`` to ``images[i]``.

    Terms are grouped variable by variable (a sparse Horner scheme), so
    shared prefixes of monomials are expanded once.
    """
    ring = f.ring
    if isinstance(images, Mapping):
        imgs = [images.get(i) for i in range(ring.nvars)]
    else:
        imgs = list(images)
        if len(imgs) != ring.nvars:
            raise ValueError("need one image per variable")
    used = f.variables_used()
    for i in used:
        if imgs[i] is None:
            raise ValueError(f"no image for variable {ring.names[i]}")
    rings = {im.ring for im in imgs if im is not None}
    if target is None:
        if len(rings) != 1:
            raise DomainError("images must share one target ring")
        target = rings.pop()
    elif rings - {target}:
        raise DomainError("images must lie in the target ring")
    if target.domain != ring.domain:
        raise DomainError("domain mismatch between source and target")
    if not f.terms:
        return target.zero()

    order = sorted(used)
    pow_cache: dict[tuple[int, int], dict] = {}

    def power_of(i: int, k: int) -> dict:
        key = (i, k)
        if key not in pow_cache:
            if k == 1:
                pow_cache[key] = imgs[i].terms
            else:
                half = power_of(i, k // 2)
                acc: dict = {}
                _mul_into(acc, half, half)
                if k % 2:
                    acc2: dict = {}
                    _mul_into(acc2, _clean(target.domain, acc), imgs[i].terms)
                    acc = acc2
                pow_cache[key] = _clean(target.domain, acc)
        return pow_cache[key]

    exps = ring.exponent
    dom = target.domain

    def rec(terms: list, level: int) -> dict:
        if level == len(order):
            total = 0
            for _, c in terms:
                total += c
            return {0: total} if total else {}
        var = order[level]
        buckets: dict[int, list] = {}
        for t in terms:
            buckets.setdefault(exps(t[0], var), []).append(t)
        acc: dict = {}
        get = acc.get
        for k in sorted(buckets):
            sub = rec(buckets[k], level + 1)
            if not sub:
                continue
            if k == 0:
                for m, c in sub.items():
                    acc[m] = get(m, 0) + c
            else:
                _mul_into(acc, sub, power_of(var, k))
        return _clean(dom, acc)

    return Polynomial(target, rec(list(f.terms.items()), 0))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def to_json_obj(f: Polynomial) -> dict:
    ring = f.ring
    fmt = ring.domain.format
    return {
        "ring": {"vars": list(ring.names), "domain": ring.domain.tag},
        "terms": [{"c": fmt(c), "e": list(e)} for e, c in f],
    }


def canonical_serialize(f: Polynomial) -> bytes:
    """Deterministic UTF-8 JSON bytes, terms in descending graded-lex order."""
    if not getattr(f.ring.domain, "exact", False):
        raise DomainError("only exact polynomials serialize")
    return json.dumps(to_json_obj(f), separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def from_json_obj(obj: Mapping, ring: Ring | None = None) -> Polynomial:
    r = obj["ring"]
    if ring is None:
        ring = Ring(r["vars"], domain_from_tag(r["domain"]))
    elif list(ring.names) != list(r["vars"]) or ring.domain.tag != r["domain"]:
        raise DomainError("serialized ring does not match")
    parse = ring.domain.parse
    return ring.from_terms((t["e"], parse(t["c"])) for t in obj["terms"])


def parse(data: bytes | str, ring: Ring | None = None) -> Polynomial:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return from_json_obj(json.loads(data), ring)


def to_string(f: Polynomial, max_terms: int | None = None) -> str:
    """Human-readable form, e.g. ``2*x0^2*x1 - x1^3``."""
    if not f.terms:
        return "0"
    names = f.ring.names
    parts = []
    for k, (e, c) in enumerate(f):
        if max_terms is not None and k >= max_terms:
            parts.append(f"... ({len(f) - max_terms} more)")
            break
        mono = "*".join(
            names[i] if a == 1 else f"{names[i]}^{a}" for i, a in enumerate(e) if a
        )
        cs = f.ring.domain.format(c)
        if not mono:
            parts.append(cs)
        elif cs == "1":
            parts.append(mono)
        elif cs == "-1":
            parts.append("-" + mono)
        else:
            parts.append(f"{cs}*{mono}")
    return " + ".join(parts).replace("+ -", "- ")


# ---------------------------------------------------------------------------
# numeric evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Evaluation:
    """A numeric polynomial value with its cancellation scale.

    ``scale`` is the sum of absolute values of the individual term
    contributions; ``error`` bounds the rounding error of the summation.
    """

    value: object
    scale: object
    error: object

    @property
    def relative(self) -> float:
        if self.scale == 0:
            return float("nan")
        return float(abs(self.value) / self.scale)


def _to_mpc(z):
    if isinstance(z, (int, float, complex)):
        return gmpy2.mpc(complex(z))
    return gmpy2.mpc(z)


def _coeff_mpfr(c):
    if isinstance(c, Fraction):
        return gmpy2.mpfr(c.numerator) / c.denominator
    return gmpy2.mpfr(c)


def evaluate(f: Polynomial, point: Sequence, precision: int = 106) -> Evaluation:
    """Evaluate ``f`` at a complex point in ``precision``-bit arithmetic.

    Direct term-by-term summation (no Horner), using cached variable
    powers.  Inputs may be Python complex numbers or gmpy2 ``mpc`` values.
    """
    if precision < 53:
        raise ValueError("precision must be at least 53 bits")
    if len(point) != f.ring.nvars:
        raise ValueError(f"point has {len(point)} coordinates, ring has {f.ring.nvars}")
    if not isinstance(f.ring.domain, RationalField):
        raise DomainError("numeric evaluation needs rational coefficients")
    ring = f.ring
    shifts = ring._shifts
    with gmpy2.context(gmpy2.get_context(), precision=precision):
        pt = [_to_mpc(z) for z in point]
        pows: list[dict[int, object]] = [{1: z} for z in pt]

        def pw(i: int, e: int):
            d = pows[i]
            v = d.get(e)
            if v is None:
                v = pt[i] ** e
                d[e] = v
            return v

        total = gmpy2.mpc(0)
        scale = gmpy2.mpfr(0)
        for m, c in f.terms.items():
            t = _coeff_mpfr(c)
            for i, s in enumerate(shifts):
                e = (m >> s) & FIELD_MASK
                if e:
                    t = t * pw(i, e)
            total += t
            scale += abs(t)
        eps = gmpy2.mpfr(2) ** (-precision)
        error = scale * eps * (len(f.terms) + ring.nvars + 2)
        return Evaluation(total, scale, error)


def leading_coefficient(f: Polynomial):
    return f.leading_term()[1] if f.terms else 0


def common_denominator(f: Polynomial) -> int:
    den = 1
    for c in f.terms.values():
        if isinstance(c, Fraction):
            den = den * c.denominator // gmpy2.gcd(den, c.denominator)
    return int(den)


def content(f: Polynomial) -> int:
    g = 0
    for c in f.terms.values():
        g = gmpy2.gcd(g, int(c))
    return int(g)


def primitive_part(f: Polynomial) -> Polynomial:
    """Clear denominators, divide by content, make the leading coefficient positive."""
    if not isinstance(f.ring.domain, RationalField):
        raise DomainError("primitive part needs rational coefficients")
    if not f.terms:
        return f
    g = f.scale(common_denominator(f))
    c = content(g)
    if leading_coefficient(g) < 0:
        c = -c
    return Polynomial(f.ring, {m: v // c for m, v in g.terms.items()})
