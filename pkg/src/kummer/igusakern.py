"""The substitution map x*: C[p] -> C[x] and its kernel.

``x*`` sends ``p_T`` to the quartic ``P_T(x)``; homogeneous elements of its
kernel are the generalized Igusa equations.

Two structural facts keep the computation small:

* Every image ``x*(m)`` is Heisenberg invariant, so its coefficients are
  constant on translation orbits of x-monomials.  Matrix rows are indexed
  by orbit representatives (the smallest packed monomial of each orbit).
* The diagonal substitutions ``x_s -> i^(s_k) x_s`` and
  ``x_s -> (-1)^(s_j s_k) x_s`` map every ``P_T`` to ``+-P_T``.  The signs
  give a grading of C[p] by a 2-group that x* respects, so the matrix is
  block diagonal and the kernel is the direct sum of the block kernels.

For g <= 3 the blocks are expanded exactly.  For g = 4 a full expansion is
out of reach; the kernel is instead computed over F_p from evaluations:
a p-polynomial R lies in the kernel iff R(P(x)) = 0 for all x, and for
enough random points x the evaluation matrix has exactly that kernel (a
Schwartz-Zippel argument; the resulting basis is then re-checked at fresh
points).
"""

from __future__ import annotations

import logging
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb

import numpy as np

from . import ffdense
from .f2lin import Subgroup, enumerate_subgroups
from .heis import heisenberg_basis, theta_ring
from .linalg import (
    ReconstructionError,
    SparseMatrix,
    crt_pair,
    nullspace,
    prime_sequence,
    rational_reconstruct,
    rref_vectors,
)
from .polycore import (
    DEFAULT_PRIME,
    FIELD_MASK,
    QQ,
    PrimeField,
    Polynomial,
    Ring,
    primitive_part,
    substitute_hom,
)

log = logging.getLogger(__name__)

STRATEGIES = ("exact", "modular_reconstruct", "modular_only")

# Rough cost model of an exact expansion: bytes per stored entry.
_BYTES_PER_ENTRY = 120
DEFAULT_MEMORY_BUDGET = 4 << 30


class BudgetExceeded(RuntimeError):
    """The requested computation exceeds the configured budget."""

    def __init__(self, message: str, estimate: dict):
        super().__init__(message)
        self.estimate = estimate


# ---------------------------------------------------------------------------
# rings and the maps x*, u*
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def p_ring(g: int, domain=QQ) -> Ring:
    """Ring of the variables p_T, one per subgroup, in enumeration order."""
    return Ring(["p_" + T.label() for T in enumerate_subgroups(g)], domain)


def _check_p_ring(R: Polynomial, g: int) -> None:
    if R.ring.names != p_ring(g).names:
        raise ValueError(f"polynomial is not in the genus-{g} p-ring")


def _images(g: int, prefix: str, domain) -> list[Polynomial]:
    target = theta_ring(g, prefix, domain)
    return [P.change_ring(target, list(range(target.nvars))) for P in heisenberg_basis(g).polynomials]


def xstar(R: Polynomial, g: int) -> Polynomial:
    """x*(R) = R(..., P_T(x), ...)."""
    _check_p_ring(R, g)
    return substitute_hom(R, _images(g, "x", R.ring.domain))


def ustar(R: Polynomial, g: int) -> Polynomial:
    """u*(R) = R(..., P_T(u), ...)."""
    _check_p_ring(R, g)
    return substitute_hom(R, _images(g, "u", R.ring.domain))


# ---------------------------------------------------------------------------
# grading
# ---------------------------------------------------------------------------


def subgroup_grade(T: Subgroup) -> int:
    """Sign pattern of P_T under the diagonal substitutions, packed as bits.

    Bit k (k < g): some element of T has a nonzero k-th coordinate.
    Further bits, one per coordinate pair j < k: the determinant of the
    generators of T restricted to coordinates j, k (mod 2).
    """
    g = T.genus
    a, b = T.generators
    bits = 0
    for k in range(g):
        if any((t >> k) & 1 for t in T.elements):
            bits |= 1 << k
    pos = g
    for j in range(g):
        for k in range(j + 1, g):
            det = (((a >> j) & 1) * ((b >> k) & 1) + ((a >> k) & 1) * ((b >> j) & 1)) & 1
            if det:
                bits |= 1 << pos
            pos += 1
    return bits


@lru_cache(maxsize=None)
def variable_grades(g: int) -> tuple[int, ...]:
    return tuple(subgroup_grade(T) for T in enumerate_subgroups(g))


def grade(exps, g: int) -> int:
    """Grade of a p-monomial given by its exponent vector."""
    out = 0
    for e, w in zip(exps, variable_grades(g)):
        if e & 1:
            out ^= w
    return out


def p_monomials(g: int, d: int) -> list[tuple[int, ...]]:
    """Degree-d p-monomials as sorted variable-index tuples, descending graded-lex."""
    n = len(enumerate_subgroups(g))
    ring = p_ring(g)
    monos = list(combinations_with_replacement(range(n), d))

    def key(t):
        e = [0] * n
        for i in t:
            e[i] += 1
        return ring.pack(e)

    monos.sort(key=key, reverse=True)
    return monos


def _exps(t: tuple[int, ...], n: int) -> list[int]:
    e = [0] * n
    for i in t:
        e[i] += 1
    return e


def blocks(g: int, d: int) -> dict[int, list[int]]:
    """Column positions (into ``p_monomials(g, d)``) grouped by grade."""
    out: dict[int, list[int]] = {}
    gr = variable_grades(g)
    for j, t in enumerate(p_monomials(g, d)):
        w = 0
        for i in t:
            w ^= gr[i]
        out.setdefault(w, []).append(j)
    return dict(sorted(out.items()))


# ---------------------------------------------------------------------------
# the matrix of x*
# ---------------------------------------------------------------------------


@dataclass
class XStarMatrix:
    """Matrix of x* on degree-d monomials: column j is x*(j-th p-monomial).

    Rows are translation-orbit representatives of x-monomials when
    ``compressed`` is set, all occurring x-monomials otherwise.
    """

    genus: int
    degree: int
    columns: list[tuple[int, ...]]
    rows: list[int]
    matrix: SparseMatrix
    domain: object
    compressed: bool
    block_of: dict[int, list[int]] = field(repr=False, default_factory=dict)

    @property
    def ncols(self) -> int:
        return len(self.columns)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    def column_polynomial(self, j: int) -> Polynomial:
        ring = p_ring(self.genus, self.domain)
        return ring.monomial(_exps(self.columns[j], ring.nvars))

    def triplets(self) -> str:
        return self.matrix.triplets()


def matrix_estimate(g: int, d: int) -> dict:
    """Column count and a coarse size estimate of the expanded matrix."""
    n = len(enumerate_subgroups(g))
    ncols = comb(n + d - 1, d)
    nx = 1 << g
    # x-monomials of degree 4d, reduced by the translation orbits
    rows = comb(nx + 4 * d - 1, 4 * d) // nx
    per_col = min(rows, (nx ** d))
    nnz = ncols * per_col
    return {
        "genus": g,
        "degree": d,
        "columns": ncols,
        "rows_upper_bound": rows,
        "nnz_upper_bound": nnz,
        "bytes_estimate": nnz * _BYTES_PER_ENTRY,
    }


class _Expander:
    """Expands x*(m) for p-monomials m, caching prefix products."""

    def __init__(self, g: int, domain, compress: bool):
        self.g = g
        self.ring = theta_ring(g, "x", domain)
        self.dom = domain
        self.images = [P.change_ring(self.ring).terms for P in heisenberg_basis(g).polynomials]
        self.compress = compress
        self._cache: dict[tuple[int, ...], dict] = {(): {0: 1}}
        self._canon: dict[int, int] = {}

    def product(self, t: tuple[int, ...]) -> dict:
        got = self._cache.get(t)
        if got is not None:
            return got
        prev = self.product(t[:-1])
        img = self.images[t[-1]]
        acc: dict = {}
        get = acc.get
        for m2, c2 in img.items():
            for m1, c1 in prev.items():
                m = m1 + m2
                acc[m] = get(m, 0) + c1 * c2
        if isinstance(self.dom, PrimeField):
            p = self.dom.p
            acc = {m: c % p for m, c in acc.items() if c % p}
        else:
            acc = {m: c for m, c in acc.items() if c}
        if len(t) <= 3:
            self._cache[t] = acc
        return acc

    def is_canonical(self, m: int) -> bool:
        c = self._canon.get(m)
        if c is None:
            ring = self.ring
            shifts = ring._shifts
            n = ring.nvars
            base = (m >> ring._degshift) << ring._degshift
            exps = [(m >> s) & FIELD_MASK for s in shifts]
            c = True
            for beta in range(1, n):
                t = base
                for s, e in enumerate(exps):
                    if e:
                        t |= e << shifts[s ^ beta]
                if t < m:
                    c = False
                    break
            self._canon[m] = c
        return c

    def column(self, t: tuple[int, ...]) -> dict:
        full = self.product(t)
        if not self.compress:
            return full
        return {m: c for m, c in full.items() if self.is_canonical(m)}


def _check_budget(g: int, d: int, budget: int) -> dict:
    est = matrix_estimate(g, d)
    if g >= 4 and d >= 2 or est["bytes_estimate"] > budget:
        raise BudgetExceeded(
            f"x* matrix for g={g}, d={d} has {est['columns']} columns and an estimated "
            f"{est['bytes_estimate'] / 2**30:.1f} GiB expansion; exceeds the budget "
            f"(use the evaluation route of kernel(..., strategy='modular_only'))",
            est,
        )
    return est


def build_matrix(g: int, d: int, domain=QQ, compress: bool = True,
                 budget: int = DEFAULT_MEMORY_BUDGET) -> XStarMatrix:
    """Expand x* on all degree-d p-monomials.

    Columns are in descending graded-lex order of p-monomials.  Rows are
    interned in order of first appearance while scanning the columns, so
    the matrix is fully deterministic.
    """
    if d < 0:
        raise ValueError("degree must be non-negative")
    _check_budget(g, d, budget)
    cols = p_monomials(g, d)
    exp = _Expander(g, domain, compress)
    row_index: dict[int, int] = {}
    rows: list[int] = []
    columns: list[dict] = []
    for t in cols:
        col = {}
        for m, c in sorted(exp.column(t).items(), reverse=True):
            i = row_index.get(m)
            if i is None:
                i = row_index[m] = len(rows)
                rows.append(m)
            col[i] = c
        columns.append(col)
    modulus = domain.p if isinstance(domain, PrimeField) else None
    mat = SparseMatrix(len(rows), columns, modulus, rows)
    return XStarMatrix(g, d, cols, rows, mat, domain, compress, blocks(g, d))


def _block_matrix(exp: _Expander, cols: list[tuple[int, ...]], modulus) -> SparseMatrix:
    row_index: dict[int, int] = {}
    columns = []
    for t in cols:
        col = {}
        for m, c in sorted(exp.column(t).items(), reverse=True):
            i = row_index.get(m)
            if i is None:
                i = row_index[m] = len(row_index)
            col[i] = c
        columns.append(col)
    return SparseMatrix(len(row_index), columns, modulus)


# ---------------------------------------------------------------------------
# kernel bases
# ---------------------------------------------------------------------------


@dataclass
class KernelBasis:
    """Canonical basis of ker x* in degree d.

    Over Q the basis is the reduced row echelon basis (leading monomials
    distinct, in descending order), each vector scaled to integer
    coefficients with content 1 and positive leading coefficient.  Over
    F_p it is the monic RREF basis.
    """

    genus: int
    degree: int
    basis: list[Polynomial]
    strategy: str
    primes: list[int]
    verified: bool
    domain: object = QQ
    caveat: str | None = None
    block_dimensions: dict[int, int] = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def __len__(self) -> int:
        return len(self.basis)


def _vectors_to_polys(g: int, d: int, vecs: list[dict[int, object]], cols, domain) -> list[Polynomial]:
    ring = p_ring(g, domain)
    n = ring.nvars
    out = []
    for vec in vecs:
        out.append(ring.from_terms((_exps(cols[j], n), c) for j, c in vec.items()))
    return out


def _canonical_q(polys: list[Polynomial]) -> list[Polynomial]:
    """RREF over Q (by descending monomial), then primitive integer form."""
    if not polys:
        return []
    ring = polys[0].ring
    monos = sorted({m for f in polys for m in f.terms}, reverse=True)
    idx = {m: i for i, m in enumerate(monos)}
    rows = [{idx[m]: Fraction(c) for m, c in f.terms.items()} for f in polys]
    red = rref_vectors(rows, len(monos), None)
    out = []
    for r in red:
        f = Polynomial._from_raw(ring, {monos[j]: c for j, c in r.items()})
        out.append(primitive_part(f))
    out.sort(key=lambda f: f.leading_term()[0], reverse=True)
    return out


def verify_kernel_element(R: Polynomial, g: int) -> bool:
    return xstar(R, g).is_zero()


def _block_kernel_mod(exp: _Expander, cols, p: int) -> list[dict[int, int]]:
    mat = _block_matrix(exp, cols, p)
    vecs = nullspace(mat)
    return rref_vectors(vecs, len(cols), p)


def _reconstruct_block(g: int, cols, kernels_mod: list[tuple[int, list[dict[int, int]]]]
                       ) -> list[dict[int, Fraction]] | None:
    """Rational reconstruction (with CRT) of monic RREF kernel vectors."""
    first_p, first = kernels_mod[0]
    shape = [sorted(v) for v in first]
    for _, vecs in kernels_mod[1:]:
        if [sorted(v) for v in vecs] != shape:
            # an unlucky prime changed the echelon shape; caller retries
            return None
    m = 1
    acc: list[dict[int, int]] = [dict() for _ in first]
    for p, vecs in kernels_mod:
        for k, v in enumerate(vecs):
            for j, c in v.items():
                if m == 1:
                    acc[k][j] = c
                else:
                    acc[k][j] = crt_pair(acc[k].get(j, 0), m, c, p)[0]
        m *= p
    out = []
    try:
        for v in acc:
            out.append({j: rational_reconstruct(c, m) for j, c in v.items()})
    except ReconstructionError:
        return None
    return out


def kernel(g: int, d: int, strategy: str = "exact", prime: int = DEFAULT_PRIME,
           max_primes: int = 8, seed: int = 0, budget: int = DEFAULT_MEMORY_BUDGET,
           verify: bool = True, threads: int = 1, allow_long: bool = False) -> KernelBasis:
    """Basis of the degree-d part of ker x*.

    ``exact`` eliminates over Q; ``modular_reconstruct`` eliminates over
    F_p and lifts by rational reconstruction, adding primes until every
    vector passes the exact check x*(R) = 0; ``modular_only`` returns the
    F_p basis.  For g >= 4 only ``modular_only`` is available and uses the
    evaluation route; with ``allow_long`` the evaluation kernels are also
    lifted to Q (``modular_reconstruct``).  Blocks are solved on ``threads`` worker threads;
    the result does not depend on the thread count.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if d < 0:
        raise ValueError("degree must be non-negative")
    if d == 0:
        dom = QQ if strategy != "modular_only" else PrimeField(prime)
        return KernelBasis(g, 0, [], strategy, [], True, dom)
    if g >= 4:
        if strategy == "exact" or (strategy == "modular_reconstruct" and not allow_long):
            est = matrix_estimate(g, d)
            hint = ("rerun with allow_long for modular reconstruction"
                    if strategy == "modular_reconstruct" else "use modular_only or modular_reconstruct")
            raise BudgetExceeded(
                f"exact elimination for g={g}, d={d} needs the full {est['columns']}-column "
                f"expansion; {hint}", est)
        if strategy == "modular_reconstruct":
            return reconstruct_by_evaluation(g, d, prime=prime, max_primes=max_primes,
                                             seed=seed, threads=threads)
        return kernel_by_evaluation(g, d, prime=prime, seed=seed, threads=threads)
    _check_budget(g, d, budget)
    cols = p_monomials(g, d)
    blk = blocks(g, d)
    t0 = time.perf_counter()
    items = list(blk.items())
    if strategy == "exact":
        exp = _Expander(g, QQ, True)

        def solve_block(item):
            w, idxs = item
            bcols = [cols[j] for j in idxs]
            mat = _block_matrix(exp, bcols, None)
            return rref_vectors(nullspace(mat), len(bcols), None)

        vecs: list[dict[int, object]] = []
        dims = {}
        for (w, idxs), ker in zip(items, map_blocks(solve_block, items, threads)):
            dims[w] = len(ker)
            vecs += [{idxs[j]: c for j, c in v.items()} for v in ker]
        polys = _canonical_q(_vectors_to_polys(g, d, vecs, cols, QQ))
        ok = all(verify_kernel_element(R, g) for R in polys) if verify else False
        log.info("exact kernel g=%d d=%d dim=%d in %.1fs", g, d, len(polys), time.perf_counter() - t0)
        return KernelBasis(g, d, polys, strategy, [], ok, QQ, block_dimensions=dims)

    primes = prime_sequence(max_primes, prime)
    if strategy == "modular_only":
        p = primes[0]
        dom = PrimeField(p)
        exp = _Expander(g, dom, True)
        vecs = []
        dims = {}
        for w, idxs in blk.items():
            ker = _block_kernel_mod(exp, [cols[j] for j in idxs], p)
            dims[w] = len(ker)
            vecs += [{idxs[j]: c for j, c in v.items()} for v in ker]
        polys = _vectors_to_polys(g, d, vecs, cols, dom)
        polys.sort(key=lambda f: f.leading_term()[0], reverse=True)
        return KernelBasis(g, d, polys, strategy, [p], False, dom,
                           caveat="basis over F_p only; not verified over Q", block_dimensions=dims)

    # modular_reconstruct
    expanders = {}
    vecs = []
    dims = {}
    used: set[int] = set()
    for w, idxs in blk.items():
        bcols = [cols[j] for j in idxs]
        mods: list[tuple[int, list]] = []
        result = None
        for p in primes:
            if p not in expanders:
                expanders[p] = _Expander(g, PrimeField(p), True)
            ker = _block_kernel_mod(expanders[p], bcols, p)
            if mods and len(ker) != len(mods[0][1]):
                # dimension jumps only at unlucky primes: keep the smaller kernel
                if len(ker) < len(mods[0][1]):
                    mods = []
                else:
                    continue
            mods.append((p, ker))
            used.add(p)
            if not ker:
                result = []
                break
            cand = _reconstruct_block(g, bcols, mods)
            if cand is None:
                continue
            polys = _vectors_to_polys(g, d, [{idxs[j]: c for j, c in v.items()} for v in cand], cols, QQ)
            if all(verify_kernel_element(R, g) for R in polys):
                result = cand
                break
        if result is None:
            raise ReconstructionError(
                f"rational reconstruction failed for block {w} after {len(primes)} primes")
        dims[w] = len(result)
        vecs += [{idxs[j]: c for j, c in v.items()} for v in result]
    polys = _canonical_q(_vectors_to_polys(g, d, vecs, cols, QQ))
    return KernelBasis(g, d, polys, strategy, sorted(used, reverse=True), True, QQ,
                       block_dimensions=dims)


def in_span(R: Polynomial, basis: list[Polynomial]) -> bool:
    """Exact membership of R in the span of ``basis`` (same ring)."""
    if R.is_zero():
        return True
    monos = sorted({m for f in basis for m in f.terms} | set(R.terms), reverse=True)
    idx = {m: i for i, m in enumerate(monos)}
    mod = R.ring.domain.p if isinstance(R.ring.domain, PrimeField) else None
    conv = (lambda c: c) if mod else Fraction
    rows = [{idx[m]: conv(c) for m, c in f.terms.items()} for f in basis]
    r0 = len(rref_vectors(rows, len(monos), mod))
    rows.append({idx[m]: conv(c) for m, c in R.terms.items()})
    return len(rref_vectors(rows, len(monos), mod)) == r0


def same_span(a: list[Polynomial], b: list[Polynomial]) -> bool:
    return len(a) == len(b) and all(in_span(f, b) for f in a)


# ---------------------------------------------------------------------------
# the evaluation route (g = 4)
# ---------------------------------------------------------------------------


def _mont(p: int):
    pinv, r2, r3 = ffdense.montgomery_constants(p)
    return np.uint64(p), np.uint64(pinv), np.uint64(r2), np.uint64(r3), np.uint64((1 << 64) % p)


def _subgroup_generators(g: int) -> np.ndarray:
    return np.array([T.generators for T in enumerate_subgroups(g)], dtype=np.int64)


def sample_images(g: int, nsamples: int, p: int, rng: np.random.Generator) -> np.ndarray:
    """Montgomery-form values P_T(x) at ``nsamples`` random points x in F_p^(2^g)."""
    P, PI, R2, _, _ = _mont(p)
    X = rng.integers(0, p, size=(nsamples, 1 << g), dtype=np.uint64)
    X = ffdense.to_montgomery(X, P, PI, R2)
    return ffdense.quartic_values(X, _subgroup_generators(g), P, PI)


def kernel_by_evaluation(g: int, d: int, prime: int = DEFAULT_PRIME, seed: int = 0,
                         margin: int = 16, check_points: int = 8,
                         block_filter=None, threads: int = 1) -> KernelBasis:
    """ker x* over F_p from the values of p-monomials at random image points.

    For each grade block with n columns, the p-monomials are evaluated at
    n + ``margin`` points y = P(x); the kernel of that evaluation matrix is
    the block of ker x* unless all points fall on a proper subvariety.
    The basis is then checked at ``check_points`` fresh points.
    """
    if d < 1:
        raise ValueError("degree must be positive")
    p = prime
    P, PI, R2, R3, ONE = _mont(p)
    cols = p_monomials(g, d)
    items = [(w, idxs) for w, idxs in blocks(g, d).items()
             if block_filter is None or block_filter(w)]
    dom = PrimeField(p)
    ring = p_ring(g, dom)
    nvars = ring.nvars
    t0 = time.perf_counter()

    def solve_block(item):
        w, idxs = item
        # one generator per block keeps the samples independent of scheduling
        rng = np.random.default_rng([seed, p % (1 << 32), g, d, w])
        n = len(idxs)
        cidx = np.array([cols[j] for j in idxs], dtype=np.int64)
        Y = sample_images(g, n + margin, p, rng)
        E = ffdense.monomial_values(Y, cidx, P, PI, ONE)
        _, K = ffdense.echelon_kernel_montgomery(E, P, PI, R3, ONE)
        K = ffdense.from_montgomery(K, P, PI)
        if K.shape[0]:
            Yc = sample_images(g, check_points, p, rng)
            Ec = ffdense.from_montgomery(ffdense.monomial_values(Yc, cidx, P, PI, ONE), P, PI)
            if np.any(_matmul_mod(Ec, K.T, p)):
                raise ArithmeticError(f"kernel check failed for block {w}")
        log.debug("block %d: %d cols, kernel %d", w, n, K.shape[0])
        return K

    polys: list[Polynomial] = []
    dims: dict[int, int] = {}
    for (w, idxs), K in zip(items, map_blocks(solve_block, items, threads)):
        dims[w] = K.shape[0]
        for row in K:
            nz = np.nonzero(row)[0]
            polys.append(ring.from_terms((_exps(cols[idxs[j]], nvars), int(row[j])) for j in nz))
    polys.sort(key=lambda f: f.leading_term()[0], reverse=True)
    log.info("evaluation kernel g=%d d=%d p=%d dim=%d in %.1fs", g, d, p, len(polys),
             time.perf_counter() - t0)
    return KernelBasis(g, d, polys, "modular_only", [p], False, dom,
                       caveat="basis over F_p by random evaluation; not verified over Q",
                       block_dimensions=dims)


def reconstruct_by_evaluation(g: int, d: int, prime: int = DEFAULT_PRIME, max_primes: int = 8,
                              seed: int = 0, threads: int = 1, check_points: int = 4) -> KernelBasis:
    """ker x* over Q from evaluation kernels at several primes.

    Each block's monic RREF basis is combined by CRT and lifted by rational
    reconstruction; a lifted vector R is accepted once R(P(x)) = 0 holds
    exactly over Z at ``check_points`` random integer points (x* R has
    degree 4d, so a nonzero image survives a random point from a box of
    width 2^64 with probability at most 4d/2^64).
    """
    primes = prime_sequence(max_primes, prime)
    cols = p_monomials(g, d)
    blk = blocks(g, d)
    rng = random.Random(seed)
    points = [[rng.getrandbits(64) - (1 << 63) for _ in range(1 << g)] for _ in range(check_points)]
    images = [[int(sum(int(c) * _int_monomial(P, m, x) for m, c in P.terms.items()))
               for P in heisenberg_basis(g).polynomials] for x in points]
    mods: dict[int, list[tuple[int, list[dict[int, int]]]]] = {w: [] for w in blk}
    done: dict[int, list[dict[int, Fraction]]] = {}
    used: list[int] = []
    for p in primes:
        todo = [w for w in blk if w not in done]
        if not todo:
            break
        kb = kernel_by_evaluation(g, d, prime=p, seed=seed, threads=threads,
                                  block_filter=set(todo).__contains__)
        used.append(p)
        pos = {}
        for w in todo:
            pos.update({cols[j]: (w, k) for k, j in enumerate(blk[w])})
        per_block: dict[int, list[dict[int, int]]] = {w: [] for w in todo}
        nvars = len(enumerate_subgroups(g))
        for f in kb.basis:
            vec: dict[int, int] = {}
            w = None
            for e, c in f:
                t = tuple(i for i in range(nvars) for _ in range(e[i]))
                w, k = pos[t]
                vec[k] = c
            per_block[w].append(vec)
        for w in todo:
            vecs = sorted(per_block[w], key=lambda v: min(v))
            prev = mods[w]
            if prev and len(vecs) != len(prev[0][1]):
                if len(vecs) > len(prev[0][1]):
                    continue
                prev.clear()
            prev.append((p, vecs))
            if not vecs:
                done[w] = []
                continue
            cand = _reconstruct_block(g, [cols[j] for j in blk[w]], prev)
            if cand is None:
                continue
            if _vanishes_on(cand, [cols[j] for j in blk[w]], images):
                done[w] = cand
    missing = [w for w in blk if w not in done]
    if missing:
        raise ReconstructionError(
            f"rational reconstruction failed for {len(missing)} blocks after {len(primes)} primes")
    vecs = []
    for w, idxs in blk.items():
        vecs += [{idxs[j]: c for j, c in v.items()} for v in done[w]]
    polys = _canonical_q(_vectors_to_polys(g, d, vecs, cols, QQ))
    return KernelBasis(g, d, polys, "modular_reconstruct", used, True, QQ,
                       caveat=f"x* R = 0 checked exactly at {check_points} random integer points",
                       block_dimensions={w: len(done[w]) for w in blk})


def _int_monomial(P: Polynomial, m: int, x) -> int:
    t = 1
    for i, e in enumerate(P.ring.exponents(m)):
        if e:
            t *= x[i] ** e
    return t


def _vanishes_on(vecs: list[dict[int, Fraction]], cols, images) -> bool:
    for y in images:
        for v in vecs:
            acc = Fraction(0)
            for j, c in v.items():
                t = 1
                for k in cols[j]:
                    t *= y[k]
                acc += c * t
            if acc:
                return False
    return True


def map_blocks(fn, items: list, threads: int = 1) -> list:
    """[fn(item) for item in items], optionally on a thread pool (order kept)."""
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _matmul_mod(A: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    """A @ B mod p with Python integers (small shapes only)."""
    Ao = A.astype(object)
    Bo = B.astype(object)
    return np.array((Ao @ Bo) % p, dtype=object).astype(bool)


# ---------------------------------------------------------------------------
# dimension formula and tangent spaces
# ---------------------------------------------------------------------------


def dimension_formula(g: int) -> int:
    """(2/9)(2^g+1)(2^g-1)(2^(g-1)+1)(2^(g-3)-1), the predicted kernel dimension."""
    if g < 4:
        raise ValueError("the formula applies for g >= 4")
    num = 2 * ((1 << g) + 1) * ((1 << g) - 1) * ((1 << (g - 1)) + 1) * ((1 << (g - 3)) - 1)
    if num % 9:
        raise ArithmeticError("formula is not integral")
    return num // 9


def image_point(x, g: int, p: int) -> list[int]:
    """y = (..., P_T(x), ...) mod p for an integer (or rational) point x."""
    out = []
    for P in heisenberg_basis(g).polynomials:
        acc = 0
        for m, c in P.terms.items():
            t = int(c)
            for i in range(P.ring.nvars):
                e = P.ring.exponent(m, i)
                if e:
                    t *= _mod_value(x[i], p) ** e
            acc += t
        out.append(acc % p)
    return out


def _mod_value(v, p: int) -> int:
    if isinstance(v, Fraction):
        return v.numerator * pow(v.denominator, -1, p) % p
    return int(v) % p


def jacobian_rank(polys: list[Polynomial], y: list[int], p: int) -> int:
    """Rank over F_p of the Jacobian matrix of ``polys`` at the point y."""
    if not polys:
        return 0
    ring = polys[0].ring
    n = ring.nvars
    shifts = ring._shifts
    M = np.zeros((len(polys), n), dtype=np.uint64)
    yv = [v % p for v in y]
    for r, f in enumerate(polys):
        row = [0] * n
        for m, c in f.terms.items():
            exps = [(m >> s) & FIELD_MASK for s in shifts]
            for i, e in enumerate(exps):
                if not e:
                    continue
                t = int(c) * e
                for k, ek in enumerate(exps):
                    ee = ek - (k == i)
                    if ee:
                        t = t * pow(yv[k], ee, p) % p
                row[i] = (row[i] + t) % p
        M[r] = row
    return ffdense.rank(M, p)


def tangent_check(kern: KernelBasis, x) -> int:
    """Projective dimension of the tangent space at y = P(x) of the zero set of the kernel.

    Returns (number of p-variables - 1) - rank of the Jacobian at y.
    """
    g = kern.genus
    if isinstance(kern.domain, PrimeField):
        p = kern.domain.p
        polys = kern.basis
    else:
        p = DEFAULT_PRIME
        polys = [f.reduce_mod(p) for f in kern.basis]
    if len(x) != 1 << g:
        raise ValueError(f"point needs {1 << g} coordinates")
    y = image_point(x, g, p)
    if not any(y):
        raise ValueError("the image point y is zero")
    n = len(enumerate_subgroups(g))
    return (n - 1) - jacobian_rank(polys, y, p)


def random_rational_point(g: int, seed: int, bound: int = 10**6) -> list[Fraction]:
    rng = random.Random(seed)
    return [Fraction(rng.randint(-bound, bound), rng.randint(1, bound)) for _ in range(1 << g)]
