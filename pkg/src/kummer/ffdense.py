"""Dense elimination over F_p for primes below 2^62, compiled with numba.

Entries are kept in Montgomery form (x * 2^64 mod p) so products of two
62-bit residues never need 128-bit integers: the high word is assembled
from 32-bit partial products.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_M32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)


def montgomery_constants(p: int) -> tuple[int, int, int]:
    """(-p^-1 mod 2^64, 2^128 mod p, 2^192 mod p)."""
    if not (2 < p < 1 << 62) or p % 2 == 0:
        raise ValueError("Montgomery arithmetic needs an odd prime below 2^62")
    pinv = (-pow(p, -1, 1 << 64)) % (1 << 64)
    return pinv, pow(2, 128, p), pow(2, 192, p)


@njit(cache=True, nogil=True, inline="always")
def _mulhi(a, b):
    a_lo = a & _M32
    a_hi = a >> _S32
    b_lo = b & _M32
    b_hi = b >> _S32
    p0 = a_lo * b_lo
    p1 = a_lo * b_hi
    p2 = a_hi * b_lo
    p3 = a_hi * b_hi
    mid = (p0 >> _S32) + (p1 & _M32) + (p2 & _M32)
    return p3 + (p1 >> _S32) + (p2 >> _S32) + (mid >> _S32)


@njit(cache=True, nogil=True, inline="always")
def montmul(a, b, p, pinv):
    lo = a * b
    hi = _mulhi(a, b)
    m = lo * pinv
    t = hi + _mulhi(m, p)
    if lo != np.uint64(0):
        t += np.uint64(1)
    if t >= p:
        t -= p
    return t


@njit(cache=True, nogil=True, inline="always")
def _addmod(a, b, p):
    s = a + b
    if s >= p:
        s -= p
    return s


@njit(cache=True, nogil=True, inline="always")
def _submod(a, b, p):
    if a >= b:
        return a - b
    return a + (p - b)


@njit(cache=True, nogil=True)
def _inv_plain(a, p):
    # extended Euclid on signed 64-bit values (p < 2^62)
    t0 = np.int64(0)
    t1 = np.int64(1)
    r0 = np.int64(p)
    r1 = np.int64(a)
    while r1 != 0:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        t0, t1 = t1, t0 - q * t1
    if t0 < 0:
        t0 += np.int64(p)
    return np.uint64(t0)


@njit(cache=True, nogil=True)
def _mont_inverse(a, p, pinv, r3):
    # a = xR  ->  (xR)^-1 * R^3 * R^-1 = x^-1 R
    return montmul(_inv_plain(a, p), r3, p, pinv)


@njit(cache=True, nogil=True)
def to_montgomery(a, p, pinv, r2):
    out = np.empty_like(a)
    flat_in = a.ravel()
    flat_out = out.ravel()
    for i in range(flat_in.size):
        flat_out[i] = montmul(flat_in[i] % p, r2, p, pinv)
    return out


@njit(cache=True, nogil=True)
def from_montgomery(a, p, pinv):
    out = np.empty_like(a)
    flat_in = a.ravel()
    flat_out = out.ravel()
    one = np.uint64(1)
    for i in range(flat_in.size):
        flat_out[i] = montmul(flat_in[i], one, p, pinv)
    return out


@njit(cache=True, nogil=True)
def _echelon(A, p, pinv, r3):
    """In-place row echelon form with unit pivots; returns the pivot columns."""
    m, n = A.shape
    piv = np.empty(min(m, n), dtype=np.int64)
    r = 0
    for c in range(n):
        if r >= m:
            break
        k = -1
        for i in range(r, m):
            if A[i, c] != 0:
                k = i
                break
        if k < 0:
            continue
        if k != r:
            for j in range(c, n):
                tmp = A[r, j]
                A[r, j] = A[k, j]
                A[k, j] = tmp
        inv = _mont_inverse(A[r, c], p, pinv, r3)
        for j in range(c, n):
            A[r, j] = montmul(A[r, j], inv, p, pinv)
        for i in range(r + 1, m):
            f = A[i, c]
            if f != 0:
                for j in range(c, n):
                    a = A[r, j]
                    if a != 0:
                        A[i, j] = _submod(A[i, j], montmul(f, a, p, pinv), p)
        piv[r] = c
        r += 1
    return piv[:r]


@njit(cache=True, nogil=True)
def _kernel_from_echelon(A, piv, p, pinv, one):
    m, n = A.shape
    r = piv.size
    is_piv = np.zeros(n, dtype=np.bool_)
    for k in range(r):
        is_piv[piv[k]] = True
    nfree = n - r
    K = np.zeros((nfree, n), dtype=np.uint64)
    idx = 0
    for f in range(n):
        if is_piv[f]:
            continue
        x = K[idx]
        x[f] = one
        for k in range(r - 1, -1, -1):
            c = piv[k]
            s = np.uint64(0)
            for j in range(c + 1, n):
                if x[j] != 0 and A[k, j] != 0:
                    s = _addmod(s, montmul(A[k, j], x[j], p, pinv), p)
            x[c] = _submod(np.uint64(0), s, p)
        idx += 1
    return K


@njit(cache=True, nogil=True)
def _rref_inplace(A, p, pinv, r3):
    m, n = A.shape
    piv = _echelon(A, p, pinv, r3)
    for k in range(piv.size - 1, -1, -1):
        c = piv[k]
        for i in range(k):
            f = A[i, c]
            if f != 0:
                for j in range(c, n):
                    a = A[k, j]
                    if a != 0:
                        A[i, j] = _submod(A[i, j], montmul(f, a, p, pinv), p)
    return piv


def rank(A: np.ndarray, p: int) -> int:
    pinv, r2, r3 = montgomery_constants(p)
    M = to_montgomery(np.ascontiguousarray(A, dtype=np.uint64), np.uint64(p), np.uint64(pinv), np.uint64(r2))
    return int(_echelon(M, np.uint64(p), np.uint64(pinv), np.uint64(r3)).size)


def kernel(A: np.ndarray, p: int) -> tuple[int, np.ndarray]:
    """Rank of A and the RREF basis of its right kernel (plain residues)."""
    pinv, r2, r3 = montgomery_constants(p)
    P, PI, R2, R3 = np.uint64(p), np.uint64(pinv), np.uint64(r2), np.uint64(r3)
    M = to_montgomery(np.ascontiguousarray(A, dtype=np.uint64), P, PI, R2)
    piv = _echelon(M, P, PI, R3)
    one = np.uint64((1 << 64) % p)
    K = _kernel_from_echelon(M, piv, P, PI, one)
    if K.shape[0]:
        _rref_inplace(K, P, PI, R3)
    return int(piv.size), from_montgomery(K, P, PI)


def rref(A: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    pinv, r2, r3 = montgomery_constants(p)
    P, PI, R2, R3 = np.uint64(p), np.uint64(pinv), np.uint64(r2), np.uint64(r3)
    M = to_montgomery(np.ascontiguousarray(A, dtype=np.uint64), P, PI, R2)
    piv = _rref_inplace(M, P, PI, R3)
    return from_montgomery(M[: piv.size], P, PI), piv


# ---------------------------------------------------------------------------
# evaluation matrices for x*
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def quartic_values(X, gens, p, pinv):
    """P_T(x) for every sample row of X (Montgomery form in and out).

    ``gens`` holds (alpha, beta) per subgroup; the sum over rho produces the
    multiplicities of P_T automatically.
    """
    N, n = X.shape
    nT = gens.shape[0]
    Y = np.zeros((N, nT), dtype=np.uint64)
    for s in range(N):
        for t in range(nT):
            a = gens[t, 0]
            b = gens[t, 1]
            acc = np.uint64(0)
            for rho in range(n):
                v = montmul(X[s, rho], X[s, rho ^ a], p, pinv)
                v = montmul(v, X[s, rho ^ b], p, pinv)
                v = montmul(v, X[s, rho ^ a ^ b], p, pinv)
                acc = _addmod(acc, v, p)
            Y[s, t] = acc
    return Y


@njit(cache=True, nogil=True)
def monomial_values(Y, cols, p, pinv, one):
    """E[s, j] = prod_k Y[s, cols[j, k]] (Montgomery form)."""
    N = Y.shape[0]
    ncol, d = cols.shape
    E = np.empty((N, ncol), dtype=np.uint64)
    for s in range(N):
        for j in range(ncol):
            v = one
            for k in range(d):
                v = montmul(v, Y[s, cols[j, k]], p, pinv)
            E[s, j] = v
    return E


@njit(cache=True, nogil=True)
def echelon_kernel_montgomery(E, p, pinv, r3, one):
    piv = _echelon(E, p, pinv, r3)
    K = _kernel_from_echelon(E, piv, p, pinv, one)
    if K.shape[0]:
        _rref_inplace(K, p, pinv, r3)
    return piv.size, K
