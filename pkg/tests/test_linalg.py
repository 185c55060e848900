import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kummer import ffdense
from kummer.linalg import (
    ReconstructionError,
    SparseMatrix,
    crt_pair,
    nullspace,
    prime_sequence,
    random_primes,
    rank_mod_p,
    rational_reconstruct,
    rref_vectors,
    solve,
)

P = 4611686018427387847


def dense_rank_mod(A, p):
    """Plain Gaussian elimination with Python integers."""
    M = [[int(v) % p for v in row] for row in A]
    r = 0
    for c in range(len(M[0]) if M else 0):
        piv = next((i for i in range(r, len(M)) if M[i][c]), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = pow(M[r][c], -1, p)
        M[r] = [v * inv % p for v in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [(vi - f * vr) % p for vi, vr in zip(M[i], M[r])]
        r += 1
    return r


def random_low_rank(rng, m, n, r, p):
    A = rng.integers(0, p, size=(m, r), dtype=np.uint64).astype(object)
    B = rng.integers(0, p, size=(r, n), dtype=np.uint64).astype(object)
    return np.array((A @ B) % p, dtype=np.uint64)


@pytest.mark.parametrize("shape, r", [((6, 9), 4), ((12, 7), 5), ((30, 30), 17), ((1, 1), 0)])
def test_ffdense_rank_and_kernel(shape, r):
    rng = np.random.default_rng(r)
    A = random_low_rank(rng, *shape, r, P) if r else np.zeros(shape, dtype=np.uint64)
    assert ffdense.rank(A, P) == dense_rank_mod(A, P) == r
    rk, K = ffdense.kernel(A, P)
    assert rk == r and K.shape == (shape[1] - r, shape[1])
    prod = (A.astype(object) @ K.T.astype(object)) % P
    assert not np.any(prod)


def test_ffdense_rref_matches_reference():
    rng = np.random.default_rng(3)
    A = random_low_rank(rng, 8, 10, 5, P)
    R, piv = ffdense.rref(A, P)
    rows = [{j: int(v) for j, v in enumerate(row) if v} for row in A]
    ref = rref_vectors(rows, 10, P)
    assert [{j: int(v) for j, v in enumerate(row) if v} for row in R] == ref
    assert list(piv) == [min(r) for r in ref]


def test_montgomery_multiplication_matches_python():
    pinv, r2, _ = ffdense.montgomery_constants(P)
    rnd = random.Random(1)
    vals = np.array([rnd.randrange(P) for _ in range(200)], dtype=np.uint64)
    mont = ffdense.to_montgomery(vals, np.uint64(P), np.uint64(pinv), np.uint64(r2))
    back = ffdense.from_montgomery(mont, np.uint64(P), np.uint64(pinv))
    assert list(map(int, back)) == list(map(int, vals))
    for i in range(0, 200, 2):
        prod = ffdense.montmul(mont[i], mont[i + 1], np.uint64(P), np.uint64(pinv))
        plain = ffdense.from_montgomery(np.array([prod], dtype=np.uint64), np.uint64(P), np.uint64(pinv))[0]
        assert int(plain) == int(vals[i]) * int(vals[i + 1]) % P


def test_montgomery_rejects_bad_modulus():
    with pytest.raises(ValueError):
        ffdense.montgomery_constants(1 << 63)
    with pytest.raises(ValueError):
        ffdense.montgomery_constants(10)


def test_exact_nullspace_and_solve():
    A = SparseMatrix(2, [{0: 1, 1: 2}, {0: 2, 1: 4}, {0: Fraction(1, 2)}])
    ker = nullspace(A)
    assert len(ker) == 1
    v = ker[0]
    for i in range(2):
        assert sum(A.columns[j].get(i, 0) * c for j, c in v.items()) == 0
    x = solve(A, {0: 3, 1: 4})
    assert x is not None
    assert solve(SparseMatrix(2, [{0: 1}]), {1: 1}) is None


@given(st.integers(-10**6, 10**6), st.integers(1, 10**6))
@settings(max_examples=100)
def test_rational_reconstruction_recovers_small_fractions(num, den):
    q = Fraction(num, den)
    m = P * 4611686018427387817
    a = q.numerator * pow(q.denominator, -1, m) % m
    assert rational_reconstruct(a, m) == q


def test_rational_reconstruction_fails_when_bound_too_small():
    a = pow(10**9 + 7, -1, P)
    assert rational_reconstruct(a, P) == Fraction(1, 10**9 + 7)
    with pytest.raises(ReconstructionError):
        rational_reconstruct(a, P, bound=10)


def test_crt_and_primes():
    x, m = crt_pair(2, 3, 3, 5)
    assert m == 15 and x % 3 == 2 and x % 5 == 3
    ps = prime_sequence(3)
    assert ps[0] == P and len(set(ps)) == 3 and all(p < 1 << 62 for p in ps)
    rp = random_primes(2, 1)
    assert rp == random_primes(2, 1) and rp[0] != rp[1]
    assert all((1 << 61) < p < (1 << 62) for p in rp)


def test_rank_mod_p_small():
    assert rank_mod_p([{0: 1, 1: 1}, {0: 2, 1: 2}, {2: 5}], 7) == 2
