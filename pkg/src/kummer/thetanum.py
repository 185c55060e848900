"""Multiprecision theta functions and numerical identity checks.

theta[e; e'](tau, z) = sum_n exp(pi i m tau m^t + 2 pi i m (z + e'/2)^t),
m = n + e/2, is summed over a box |n_i| <= R.  Box points whose term is
below 2^-(precision+14) of the largest term (judged in double precision)
are dropped before the multiprecision pass.  All 2^g values of e' for a
fixed e are accumulated in one pass, since they differ only by the phase
i^(sum_k (2 n_k + e_k) e'_k).

Every vanishing verdict is a relative residual |value| / scale, where the
scale is the sum of absolute values of the summed contributions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import gmpy2
import numpy as np

from .f2lin import enumerate_subgroups, even_characteristics
from .heis import heisenberg_basis, lifted_basis, quadric
from .polycore import Evaluation, Polynomial, evaluate, partial_derivative

DEFAULT_PRECISION = 106
GENUS4_PRECISION = 160
SCHOTTKY_PRECISION = 256


class ZeroScale(ArithmeticError):
    """Every term of the evaluated expression is zero: no vanishing verdict possible."""


def _ctx(precision: int):
    if precision < 53:
        raise ValueError("precision must be at least 53 bits")
    return gmpy2.context(gmpy2.get_context(), precision=precision)


# ---------------------------------------------------------------------------
# period matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PeriodMatrix:
    """A point of the Siegel upper half space, stored as exact binary floats."""

    genus: int
    real_part: tuple[tuple[float, ...], ...]
    imag_part: tuple[tuple[float, ...], ...]
    min_eigenvalue: float = field(default=0.0, compare=False)

    def __post_init__(self):
        g = self.genus
        X = np.array(self.real_part, dtype=float)
        Y = np.array(self.imag_part, dtype=float)
        if X.shape != (g, g) or Y.shape != (g, g):
            raise ValueError("period matrix has the wrong shape")
        if not (np.array_equal(X, X.T) and np.array_equal(Y, Y.T)):
            raise ValueError("period matrix is not symmetric")
        lam = float(np.linalg.eigvalsh(Y).min())
        if not lam > 0:
            raise ValueError("imaginary part is not positive definite")
        # certify: Y - bound*I must admit a Cholesky factorization
        for bound in (lam * (1 - 1e-9), lam / 2):
            try:
                np.linalg.cholesky(Y - bound * np.eye(g))
                break
            except np.linalg.LinAlgError:
                continue
        else:  # pragma: no cover - numerically degenerate
            raise ValueError("could not certify positive definiteness")
        object.__setattr__(self, "min_eigenvalue", bound if self.min_eigenvalue <= 0 else
                           min(self.min_eigenvalue, bound))

    @classmethod
    def from_arrays(cls, X, Y) -> "PeriodMatrix":
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        X = (X + X.T) / 2
        Y = (Y + Y.T) / 2
        return cls(X.shape[0], tuple(map(tuple, X.tolist())), tuple(map(tuple, Y.tolist())))

    @classmethod
    def from_matrix(cls, tau) -> "PeriodMatrix":
        T = np.asarray(tau, dtype=complex)
        return cls.from_arrays(T.real, T.imag)

    def real(self) -> np.ndarray:
        return np.array(self.real_part, dtype=float)

    def imag(self) -> np.ndarray:
        return np.array(self.imag_part, dtype=float)

    def scaled(self, k: float) -> "PeriodMatrix":
        return PeriodMatrix.from_arrays(self.real() * k, self.imag() * k)

    def to_json(self) -> dict:
        return {
            "genus": self.genus,
            "precision": 53,
            "real": [repr(v) for row in self.real_part for v in row],
            "imag": [repr(v) for row in self.imag_part for v in row],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PeriodMatrix":
        g = obj["genus"]
        X = np.array([float(v) for v in obj["real"]]).reshape(g, g)
        Y = np.array([float(v) for v in obj["imag"]]).reshape(g, g)
        return cls.from_arrays(X, Y)


def sample_tau(g: int, seed: int, kind: str = "generic", partition: Sequence[int] | None = None
               ) -> PeriodMatrix:
    """Seeded random period matrix.

    ``generic``: Re uniform in [-1/2, 1/2], Im = I + W^t W with W uniform in
    [0, 1], so the smallest eigenvalue of Im is at least 1.
    ``block_diag``: independent generic blocks of the sizes in ``partition``.
    """
    if g < 1:
        raise ValueError("g must be at least 1")
    rng = np.random.default_rng(seed)
    if kind == "generic":
        return PeriodMatrix.from_arrays(*_generic_blocks(g, rng))
    if kind == "block_diag":
        if not partition or any(k < 1 for k in partition) or sum(partition) != g:
            raise ValueError(f"invalid partition {partition} of {g}")
        X = np.zeros((g, g))
        Y = np.zeros((g, g))
        pos = 0
        for k in partition:
            Xb, Yb = _generic_blocks(k, rng)
            X[pos:pos + k, pos:pos + k] = Xb
            Y[pos:pos + k, pos:pos + k] = Yb
            pos += k
        return PeriodMatrix.from_arrays(X, Y)
    raise ValueError(f"unknown kind {kind!r}")


def _generic_blocks(g: int, rng: np.random.Generator):
    A = rng.uniform(-0.5, 0.5, size=(g, g))
    X = np.triu(A) + np.triu(A, 1).T
    W = rng.uniform(0.0, 1.0, size=(g, g))
    Y = np.eye(g) + W.T @ W
    return X, (Y + Y.T) / 2


def sample_z(g: int, seed: int, scale: float = 0.5) -> list[complex]:
    rng = np.random.default_rng([seed, 7919])
    re = rng.uniform(-scale, scale, size=g)
    im = rng.uniform(-scale, scale, size=g)
    return [complex(a, b) for a, b in zip(re, im)]


# ---------------------------------------------------------------------------
# theta series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThetaValue:
    value: object  # gmpy2.mpc
    error: object  # gmpy2.mpfr bound on |computed - exact|
    scale: object  # sum of |terms|


def truncation_radius(tau: PeriodMatrix, precision: int, z: Sequence[complex] | None = None) -> int:
    lam = tau.min_eigenvalue
    zi = max((abs(complex(c).imag) for c in z), default=0.0) if z is not None else 0.0
    return (math.ceil(math.sqrt((precision * math.log(2) + 10) / (math.pi * lam)))
            + 2 + math.ceil(zi / lam))


def _box(g: int, R: int) -> np.ndarray:
    axes = [np.arange(-R, R + 1)] * g
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, g)


def _series_all_eps1(eps: int, tau: PeriodMatrix, z: Sequence[complex], precision: int,
                     radius: int | None = None) -> dict[int, ThetaValue]:
    """theta[eps; e'](tau, z) for every e' (one lattice pass)."""
    g = tau.genus
    R = radius if radius is not None else truncation_radius(tau, precision, z)
    epsv = np.array([(eps >> (g - 1 - k)) & 1 for k in range(g)], dtype=float)
    N = _box(g, R)
    M = N + epsv / 2
    X, Y = tau.real(), tau.imag()
    zr = np.array([complex(c).real for c in z])
    zi = np.array([complex(c).imag for c in z])
    logmag = -math.pi * np.einsum("ij,jk,ik->i", M, Y, M) - 2 * math.pi * (M @ zi)
    cut = (precision + 14) * math.log(2)
    top = logmag.max()
    keep = logmag >= top - cut
    # a term is kept exactly when it is above the cut, in lexicographic order of n
    Nk = N[keep]
    dropped = int((~keep).sum())

    vals = {}
    with _ctx(precision + 16):
        pi = gmpy2.const_pi()
        Xm = [[gmpy2.mpfr(X[i, j]) for j in range(g)] for i in range(g)]
        Ym = [[gmpy2.mpfr(Y[i, j]) for j in range(g)] for i in range(g)]
        zrm = [gmpy2.mpfr(v) for v in zr]
        zim = [gmpy2.mpfr(v) for v in zi]
        # sums[e'][k] collects the terms whose phase factor is i^k
        sums = [[gmpy2.mpc(0) for _ in range(4)] for _ in range(1 << g)]
        scale = gmpy2.mpfr(0)
        e1bits = [[(f >> (g - 1 - k)) & 1 for k in range(g)] for f in range(1 << g)]
        for n in Nk.tolist():
            twom = [2 * n[k] + ((eps >> (g - 1 - k)) & 1) for k in range(g)]  # 2m, integers
            m = [gmpy2.mpfr(t) / 2 for t in twom]
            qr = gmpy2.mpfr(0)
            qi = gmpy2.mpfr(0)
            for i in range(g):
                if not twom[i]:
                    continue
                ri = gmpy2.mpfr(0)
                ii = gmpy2.mpfr(0)
                for j in range(g):
                    if twom[j]:
                        ri += Xm[i][j] * m[j]
                        ii += Ym[i][j] * m[j]
                qr += m[i] * ri
                qi += m[i] * ii
            lr = gmpy2.mpfr(0)
            li = gmpy2.mpfr(0)
            for k in range(g):
                if twom[k]:
                    lr += m[k] * zrm[k]
                    li += m[k] * zim[k]
            # exponent: pi i (qr + i qi) + 2 pi i (lr + i li)
            re_part = -pi * (qi + 2 * li)
            im_part = pi * (qr + 2 * lr)
            mag = gmpy2.exp(re_part)
            term = gmpy2.mpc(mag * gmpy2.cos(im_part), mag * gmpy2.sin(im_part))
            scale += mag
            for f in range(1 << g):
                k = 0
                bits = e1bits[f]
                for j in range(g):
                    if bits[j]:
                        k += twom[j]
                sums[f][k & 3] += term
    with _ctx(precision):
        eps_round = gmpy2.mpfr(2) ** (-precision)
        for f in range(1 << g):
            s = sums[f]
            v = s[0] - s[2] + gmpy2.mpc(0, 1) * (s[1] - s[3])
            # dropped terms are each below exp(top - cut); rounding below 2^-prec
            tail = gmpy2.mpfr(dropped) * gmpy2.exp(gmpy2.mpfr(top - cut))
            err = tail + scale * eps_round * (len(Nk) + 8)
            vals[f] = ThetaValue(gmpy2.mpc(v), err, scale)
    return vals


def theta(eps: int, eps1: int, tau: PeriodMatrix, z: Sequence[complex] | None = None,
          precision: int = DEFAULT_PRECISION, radius: int | None = None) -> ThetaValue:
    """theta[eps; eps'](tau, z); characteristics are g-bit integers (first coordinate high)."""
    if precision < 53:
        raise ValueError("precision must be at least 53 bits")
    z = list(z) if z is not None else [0j] * tau.genus
    if len(z) != tau.genus:
        raise ValueError("z has the wrong length")
    return _series_all_eps1(eps, tau, z, precision, radius)[eps1]


def theta_all(tau: PeriodMatrix, z: Sequence[complex] | None = None,
              precision: int = DEFAULT_PRECISION, eps_list: Iterable[int] | None = None
              ) -> dict[tuple[int, int], ThetaValue]:
    """theta[e; e'](tau, z) for all e in ``eps_list`` (default: all) and all e'."""
    g = tau.genus
    z = list(z) if z is not None else [0j] * g
    out = {}
    for e in (range(1 << g) if eps_list is None else eps_list):
        for f, v in _series_all_eps1(e, tau, z, precision).items():
            out[(e, f)] = v
    return out


def theta_constants_all(tau: PeriodMatrix, precision: int = DEFAULT_PRECISION,
                        eps_list: Iterable[int] | None = None) -> dict[tuple[int, int], object]:
    return {k: v.value for k, v in theta_all(tau, None, precision, eps_list).items()}


def _double(z: Sequence[complex], k: int = 2) -> list[complex]:
    return [k * complex(c) for c in z]


def theta2(sigma: int, tau: PeriodMatrix, z: Sequence[complex] | None = None,
           precision: int = DEFAULT_PRECISION) -> ThetaValue:
    """Second order theta Theta[sigma](tau, z) = theta[sigma; 0](2 tau, 2 z)."""
    z = list(z) if z is not None else [0j] * tau.genus
    return theta(sigma, 0, tau.scaled(2), _double(z), precision)


def theta2_vector(tau: PeriodMatrix, z: Sequence[complex] | None = None,
                  precision: int = DEFAULT_PRECISION) -> list:
    """(..., Theta[sigma](tau, z), ...) in sigma order."""
    g = tau.genus
    z = list(z) if z is not None else [0j] * g
    t2 = tau.scaled(2)
    z2 = _double(z)
    return [_series_all_eps1(s, t2, z2, precision)[0].value for s in range(1 << g)]


def theta_null_vector(tau: PeriodMatrix, precision: int = DEFAULT_PRECISION) -> list:
    """The point Theta_tau(0) = (..., Theta[sigma](tau, 0), ...)."""
    return theta2_vector(tau, None, precision)


# ---------------------------------------------------------------------------
# residuals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Residual:
    """|value| / scale, or a zero-scale outcome."""

    value: float
    zero_scale: bool = False

    def passes(self, tol: float) -> bool:
        return not self.zero_scale and self.value < tol


def verify_vanishing(f: Polynomial, point: Sequence, precision: int = DEFAULT_PRECISION) -> Residual:
    """Relative residual of f at a point.  Raises ZeroScale if every term vanishes."""
    ev = evaluate(f, point, precision)
    if ev.scale == 0:
        raise ZeroScale("all term contributions are zero")
    return Residual(float(abs(ev.value) / ev.scale))


def relative_difference(lhs: Evaluation, rhs_value, rhs_scale) -> float:
    """|lhs - rhs| / (scale of lhs + scale of rhs)."""
    den = lhs.scale + rhs_scale
    if den == 0:
        raise ZeroScale("both sides have zero scale")
    return float(abs(lhs.value - rhs_value) / den)


# ---------------------------------------------------------------------------
# identity checks
# ---------------------------------------------------------------------------


def check_degree2_identity(tau: PeriodMatrix, z: Sequence[complex],
                           precision: int = DEFAULT_PRECISION) -> float:
    """max over even [e; e'] of the residual of Q[e;e'](Theta(tau, z)) = theta(tau,0) theta(tau,2z)."""
    g = tau.genus
    X = theta2_vector(tau, z, precision)
    t0 = theta_all(tau, None, precision)
    t2 = theta_all(tau, _double(z), precision)
    worst = 0.0
    with _ctx(precision):
        for e, f in even_characteristics(g):
            lhs = evaluate(quadric(e, f, g), X, precision)
            a, b = t0[(e, f)], t2[(e, f)]
            rhs = a.value * b.value
            worst = max(worst, relative_difference(lhs, rhs, abs(rhs)))
    return worst


def a_coefficients(u: Sequence, g: int) -> dict[tuple[int, int], object]:
    """a_{sigma,T} = u_(s+alpha) u_(s+beta) u_(s+alpha+beta), keyed by (sigma, T index)."""
    out = {}
    for t, T in enumerate(enumerate_subgroups(g)):
        a, b = T.generators
        for s in range(1 << g):
            out[(s, t)] = u[s ^ a] * u[s ^ b] * u[s ^ a ^ b]
    return out


def check_degree4_identity(tau: PeriodMatrix, z: Sequence[complex],
                           precision: int = DEFAULT_PRECISION) -> float:
    """Residual of P_T(Theta(tau,z)) = sum_s a_{s,T} Theta[s](tau,2z) and of 4a = dP_T/dx_s(Theta(0))."""
    g = tau.genus
    X = theta2_vector(tau, z, precision)
    u = theta_null_vector(tau, precision)
    W = theta2_vector(tau, _double(z), precision)
    basis = heisenberg_basis(g)
    worst = 0.0
    with _ctx(precision):
        a = a_coefficients(u, g)
        for t, P in enumerate(basis.polynomials):
            lhs = evaluate(P, X, precision)
            rhs = gmpy2.mpc(0)
            rscale = gmpy2.mpfr(0)
            for s in range(1 << g):
                term = a[(s, t)] * W[s]
                rhs += term
                rscale += abs(term)
            worst = max(worst, relative_difference(lhs, rhs, rscale))
            for s in range(1 << g):
                d = evaluate(partial_derivative(P, s), u, precision)
                four_a = 4 * a[(s, t)]
                if d.scale == 0 and four_a == 0:
                    continue
                worst = max(worst, relative_difference(d, four_a, abs(four_a)))
    return worst


def lift_constants(tau: PeriodMatrix, precision: int) -> list:
    """theta[s0; 0..01](2 tau, 0) for s in (Z/2Z)^g, g + 1 = genus of tau."""
    G = tau.genus
    t2 = tau.scaled(2)
    out = []
    for s in range(1 << (G - 1)):
        out.append(_series_all_eps1(2 * s, t2, [0j] * G, precision)[1].value)
    return out


def check_lift_identity(tau: PeriodMatrix, z: Sequence[complex],
                        precision: int = DEFAULT_PRECISION) -> float:
    """Residual of p~_T(Theta_tau(z)) = sum_s b_{s,T} theta[s0; 0..01](2 tau, 4 z)."""
    G = tau.genus
    g = G - 1
    if g < 1:
        raise ValueError("lift identity needs genus at least 2")
    X = theta2_vector(tau, z, precision)
    c = lift_constants(tau, precision)
    t2 = tau.scaled(2)
    z4 = _double(z, 4)
    W = [_series_all_eps1(2 * s, t2, z4, precision)[1].value for s in range(1 << g)]
    worst = 0.0
    with _ctx(precision):
        b = a_coefficients(c, g)
        for t, pt in enumerate(lifted_basis(g).polynomials):
            lhs = evaluate(pt, X, precision)
            rhs = gmpy2.mpc(0)
            rscale = gmpy2.mpfr(0)
            for s in range(1 << g):
                term = b[(s, t)] * W[s]
                rhs += term
                rscale += abs(term)
            worst = max(worst, relative_difference(lhs, rhs, rscale))
    return worst


def check_odd_lift_constants(tau: PeriodMatrix, precision: int = DEFAULT_PRECISION) -> float:
    """max |theta[s1; 0..01](2 tau, 0)| / scale: these odd constants vanish."""
    G = tau.genus
    t2 = tau.scaled(2)
    worst = 0.0
    for s in range(1 << (G - 1)):
        v = _series_all_eps1(2 * s + 1, t2, [0j] * G, precision)[1]
        worst = max(worst, float(abs(v.value) / v.scale))
    return worst


def check_key_identity(tau: PeriodMatrix, precision: int = DEFAULT_PRECISION) -> float:
    """Residual of P_T(..., Theta[s0](tau, b), ...) = p~_T(Theta_tau(0)), b = e_(g+1)/4."""
    G = tau.genus
    g = G - 1
    b = [0j] * (G - 1) + [0.25 + 0j]
    Yb = theta2_vector(tau, b, precision)
    u0 = theta_null_vector(tau, precision)
    xb = [Yb[2 * s] for s in range(1 << g)]
    worst = 0.0
    with _ctx(precision):
        for P, pt in zip(heisenberg_basis(g).polynomials, lifted_basis(g).polynomials):
            lhs = evaluate(P, xb, precision)
            rhs = evaluate(pt, u0, precision)
            worst = max(worst, relative_difference(lhs, rhs.value, rhs.scale))
    return worst


def check_two_torsion_sign(tau: PeriodMatrix, precision: int = DEFAULT_PRECISION) -> float:
    """Residual of Theta[s](tau, 2b) = (-1)^(s_(g+1)) Theta[s](tau, 0), b = e_(g+1)/4."""
    G = tau.genus
    twob = [0j] * (G - 1) + [0.5 + 0j]
    A = theta2_vector(tau, twob, precision)
    B = theta_null_vector(tau, precision)
    worst = 0.0
    with _ctx(precision):
        for s in range(1 << G):
            target = -B[s] if s & 1 else B[s]
            worst = max(worst, float(abs(A[s] - target) / (abs(A[s]) + abs(target))))
    return worst


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def report_line(check: str, genus: int, seed: int, precision: int, residual: float,
                tolerance: float, passed: bool | None = None, **extra) -> str:
    entry = {
        "check": check,
        "genus": genus,
        "seed": seed,
        "precision": precision,
        "residual": residual,
        "tolerance": tolerance,
        "pass": bool(residual < tolerance) if passed is None else passed,
    }
    entry.update(extra)
    return json.dumps(entry, sort_keys=True)
