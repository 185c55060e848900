"""Sparse exact linear algebra over Q and F_p.

Matrices are column-major (one ``{row: value}`` dict per column), the
natural layout for the x* map where each column is the expansion of one
p-monomial.  Elimination is Gauss-Jordan with a fixed pivot rule: the
pivot for a column is the lowest-index unused row holding a nonzero entry
there.  No other choice is made anywhere, so results do not depend on
hashing or thread scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import gmpy2


class ReconstructionError(ArithmeticError):
    """Rational reconstruction failed for the current modulus."""


@dataclass
class SparseMatrix:
    nrows: int
    columns: list[dict[int, object]]
    modulus: int | None = None  # None means exact rationals
    row_labels: list | None = field(default=None, repr=False)

    @property
    def ncols(self) -> int:
        return len(self.columns)

    def nnz(self) -> int:
        return sum(len(c) for c in self.columns)

    def rows(self) -> list[dict[int, object]]:
        out: list[dict[int, object]] = [dict() for _ in range(self.nrows)]
        for j, col in enumerate(self.columns):
            for i, v in col.items():
                out[i][j] = v
        return out

    def reduce_mod(self, p: int) -> "SparseMatrix":
        cols = []
        for col in self.columns:
            new = {}
            for i, v in col.items():
                w = _to_mod(v, p)
                if w:
                    new[i] = w
            cols.append(new)
        return SparseMatrix(self.nrows, cols, p, self.row_labels)

    def triplets(self) -> str:
        """Sorted "row col num/den" lines."""
        lines = []
        for j, col in enumerate(self.columns):
            for i, v in col.items():
                if isinstance(v, Fraction):
                    s = f"{v.numerator}/{v.denominator}"
                else:
                    s = f"{v}/1"
                lines.append((i, j, s))
        lines.sort()
        return "".join(f"{i} {j} {s}\n" for i, j, s in lines)


def _to_mod(v, p: int) -> int:
    if isinstance(v, Fraction):
        if v.denominator % p == 0:
            raise ZeroDivisionError(f"denominator divisible by {p}")
        return v.numerator * pow(v.denominator, -1, p) % p
    return int(v) % p


def _normalize_q(v):
    if type(v) is Fraction and v.denominator == 1:
        return v.numerator
    return v


def rref_rows(rows: Sequence[dict[int, object]], ncols: int, modulus: int | None = None
              ) -> tuple[list[dict[int, object]], list[int]]:
    """Reduced row echelon form of a sparse row list.

    Returns ``(pivot_rows, pivot_cols)``; pivot row k has a 1 in column
    ``pivot_cols[k]`` and zeros in every other pivot column.
    """
    p = modulus
    work = [dict(r) for r in rows]
    colrows: dict[int, set[int]] = {}
    for i, r in enumerate(work):
        for j in r:
            colrows.setdefault(j, set()).add(i)
    used = [False] * len(work)
    pivot_rows: list[int] = []
    pivot_cols: list[int] = []
    for c in range(ncols):
        holders = colrows.get(c)
        if not holders:
            continue
        cand = [i for i in holders if not used[i]]
        if not cand:
            continue
        r = min(cand)
        used[r] = True
        prow = work[r]
        piv = prow[c]
        if p is None:
            inv = Fraction(1) / piv if not (piv == 1) else 1
            if inv != 1:
                prow = {j: _normalize_q(v * inv) for j, v in prow.items()}
        else:
            inv = pow(piv, -1, p)
            if inv != 1:
                prow = {j: v * inv % p for j, v in prow.items()}
        work[r] = prow
        for i in list(holders):
            if i == r:
                continue
            row = work[i]
            f = row[c]
            for j, v in prow.items():
                old = row.get(j)
                if p is None:
                    new = _normalize_q((old or 0) - f * v)
                else:
                    new = ((old or 0) - f * v) % p
                if new:
                    if old is None:
                        colrows.setdefault(j, set()).add(i)
                    row[j] = new
                elif old is not None:
                    del row[j]
                    colrows[j].discard(i)
        pivot_rows.append(r)
        pivot_cols.append(c)
    return [work[r] for r in pivot_rows], pivot_cols


def rank_mod_p(rows: Sequence[dict[int, int]], p: int) -> int:
    ncols = 1 + max((j for r in rows for j in r), default=-1)
    return len(rref_rows(rows, ncols, p)[1])


def nullspace(matrix: SparseMatrix) -> list[dict[int, object]]:
    """Right kernel basis, one sparse vector per free column (free entry 1)."""
    prows, pcols = rref_rows(matrix.rows(), matrix.ncols, matrix.modulus)
    pivset = set(pcols)
    p = matrix.modulus
    # column -> list of (pivot col, entry) from pivot rows
    by_free: dict[int, list[tuple[int, object]]] = {}
    for row, pc in zip(prows, pcols):
        for j, v in row.items():
            if j != pc:
                by_free.setdefault(j, []).append((pc, v))
    basis = []
    for f in range(matrix.ncols):
        if f in pivset:
            continue
        vec: dict[int, object] = {f: 1}
        for pc, v in by_free.get(f, []):
            vec[pc] = (-v) % p if p is not None else -v
        basis.append(vec)
    return basis


def rref_vectors(vectors: Sequence[dict[int, object]], ncols: int, modulus: int | None = None
                 ) -> list[dict[int, object]]:
    """Canonical basis of the span: RREF, leading entry in the lowest column."""
    rows, _ = rref_rows(vectors, ncols, modulus)
    return rows


def solve(matrix: SparseMatrix, rhs: dict[int, object]) -> dict[int, object] | None:
    """One solution of A x = b with all free variables zero, or None."""
    ncols = matrix.ncols
    rows = matrix.rows()
    for i, v in rhs.items():
        rows[i][ncols] = v
    prows, pcols = rref_rows(rows, ncols + 1, matrix.modulus)
    if ncols in pcols:
        return None
    x = {}
    for row, pc in zip(prows, pcols):
        v = row.get(ncols)
        if v:
            x[pc] = v
    return x


# ---------------------------------------------------------------------------
# modular helpers
# ---------------------------------------------------------------------------


def rational_reconstruct(a: int, m: int, bound: int | None = None) -> Fraction:
    """Find r/s with r = a*s (mod m) and |r|, s <= bound (default sqrt(m/2))."""
    a %= m
    if bound is None:
        bound = int(gmpy2.isqrt(m // 2))
    r0, r1 = m, a
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound:
        raise ReconstructionError(f"no rational with bound {bound} for {a} mod {m}")
    if s1 < 0:
        r1, s1 = -r1, -s1
    if gmpy2.gcd(s1, m) != 1:
        raise ReconstructionError("denominator not invertible")
    return Fraction(r1, s1)


def crt_pair(a1: int, m1: int, a2: int, m2: int) -> tuple[int, int]:
    t = (a2 - a1) * pow(m1, -1, m2) % m2
    return a1 + m1 * t, m1 * m2


def prime_sequence(count: int, start: int | None = None) -> list[int]:
    """Deterministic list of primes below 2^62, descending from ``start``."""
    from .polycore import DEFAULT_PRIME

    p = DEFAULT_PRIME if start is None else start
    out = []
    while len(out) < count:
        if gmpy2.is_prime(p, 50):
            out.append(p)
        p -= 2 if p % 2 else 1
    return out


def random_primes(count: int, seed: int, bits: int = 62) -> list[int]:
    import random

    rng = random.Random(seed)
    out: list[int] = []
    while len(out) < count:
        c = rng.getrandbits(bits) | (1 << (bits - 1)) | 1
        c = int(gmpy2.next_prime(c))
        if c < 1 << bits and c not in out:
            out.append(c)
    return out


def vector_to_mod(vec: dict[int, object], p: int) -> dict[int, int]:
    out = {}
    for j, v in vec.items():
        w = _to_mod(v, p)
        if w:
            out[j] = w
    return out


def iter_nonzero(vec: dict[int, object]) -> Iterable[tuple[int, object]]:
    return ((j, v) for j, v in sorted(vec.items()) if v)
