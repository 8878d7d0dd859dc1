"""Scale-invariant form of the variational eigenproblem, assembled exactly.

The generalized problem H(Z, mu) c = E S(mu) c has a special structure: with
D(mu) = diag((2 mu)^-(deg_i + 3)) it is congruent to the mu-free pencil

    ( mu^2 * K  +  2 mu * W  -  8 Z mu * U ,   G )

whose four matrices have exactly integer entries once every elementary
integral is multiplied by a common factor Q^2 (Q = lcm of all denominators).
They are assembled here in exact integer arithmetic, factored G = L L^T once
per basis order, and the three congruence transforms A_X = L^-1 X L^-T are
stored in binary64.  After that every (Z, mu) evaluation is a single dense
symmetric eigensolve of mu^2 A_K + 2 mu A_W - 8 Z mu A_U.

The one-time factorization needs more than binary64 for omega >= 9: the
unit-diagonal overlap loses roughly three decades of spectrum per basis
order, crossing 2^-52 between omega = 10 and 12, so G formed in binary64
stops being numerically definite there.  The factorization therefore runs in
multiprecision floats (gmpy2 if available, else mpmath) at a precision scaled
to the basis order; everything per (Z, mu) stays binary64.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from . import basis
from .errors import ConditioningError

try:
    import gmpy2

    _HAVE_GMPY2 = True
except ImportError:  # pragma: no cover - exercised only without gmpy2
    from mpmath import mp as _mp
    from mpmath import mpf as _mpf

    _HAVE_GMPY2 = False

# binary64 handles the factorization comfortably up to here
_FLOAT64_OMEGA_LIMIT = 8

TWO_PI_SQ = 2.0 * math.pi**2


def assemble_integer_pencil(omega: int):
    """Exact integer matrices (G, K, W, U) of the scale-invariant pencil.

    Every entry is the corresponding combination of elementary integrals
    times Q^2 with Q = lcm(1..2*omega+6); the common factor cancels in the
    pencil.  Returns (terms, G, K, W, U) with matrices as lists of int rows.
    """
    terms = basis.enumerate_terms(omega)
    n = len(terms)
    maxd = 2 * omega + 6
    fact = [math.factorial(k) for k in range(maxd + 4)]
    Q = math.lcm(*range(1, maxd + 1))
    Qd = [0] + [Q // k for k in range(1, maxd + 1)]

    def F(a: int, b: int, c: int) -> int:
        # elementary integral numerator: (a+b+c+2)! * Q^2 / ((c+1)(b+c+2))
        return fact[a + b + c + 2] * Qd[c + 1] * Qd[b + c + 2]

    G = [[0] * n for _ in range(n)]
    K = [[0] * n for _ in range(n)]
    W = [[0] * n for _ in range(n)]
    U = [[0] * n for _ in range(n)]
    for i in range(n):
        n1, m1, p1 = terms[i].n, terms[i].m, terms[i].p
        for j in range(i, n):
            n2, m2, p2 = terms[j].n, terms[j].m, terms[j].p
            ns, ms, ps = n1 + n2, m1 + m2, p1 + p2

            g = F(ns + 2, ps + 1, ms) - F(ns, ps + 1, ms + 2)
            w = F(ns + 2, ps, ms) - F(ns, ps, ms + 2)
            u = F(ns + 1, ps + 1, ms)

            # kinetic pieces (coef, mu-power e, base exponents); each mu^e
            # carries (2 mu)^(2-e) relative to the overall mu^2, hence the
            # integer factor 2^(2-e).
            k = 0
            for coef, e, a, b, c in (
                (n1 * n2, 0, ns - 2, ps, ms),
                (-(n1 + n2), 1, ns - 1, ps, ms),
                (1, 2, ns, ps, ms),
                (m1 * m2, 0, ns, ps, ms - 2),
                (p1 * p2, 0, ns, ps - 2, ms),
            ):
                if coef:
                    # weight u (s^2 - t^2)
                    k += coef * (1 << (2 - e)) * (
                        F(a + 2, b + 1, c) - F(a, b + 1, c + 2)
                    )
            for coef, e, a, b, c in (
                (n1 * p2 + n2 * p1, 0, ns - 1, ps - 1, ms),
                (-(p1 + p2), 1, ns, ps - 1, ms),
            ):
                if coef:
                    # weight s (u^2 - t^2)
                    k += coef * (1 << (2 - e)) * (
                        F(a + 1, b + 2, c) - F(a + 1, b, c + 2)
                    )
            coef = m1 * p2 + m2 * p1
            if coef:
                # weight t (s^2 - u^2) on base (ns, ps - 1, ms - 1)
                k += coef * 4 * (F(ns + 2, ps - 1, ms) - F(ns, ps + 1, ms))

            G[i][j] = G[j][i] = g
            K[i][j] = K[j][i] = k
            W[i][j] = W[j][i] = w
            U[i][j] = U[j][i] = u
    return terms, G, K, W, U


def _precision_bits(omega: int) -> int:
    # ~3 lost decades per basis order, plus 64 result bits and headroom
    return max(128, 64 + 12 * omega)


class _HighPrecision:
    """Minimal multiprecision shim: gmpy2.mpfr if present, else mpmath.

    gmpy2 arithmetic follows the active thread context, so callers must run
    inside ``with hp.active():`` for operations to use the requested bits.
    """

    def __init__(self, bits: int):
        self.bits = bits
        if _HAVE_GMPY2:
            self.number = gmpy2.mpfr
            self.sqrt = gmpy2.sqrt
        else:  # pragma: no cover
            _mp.prec = bits
            self.number = _mpf
            self.sqrt = _mp.sqrt

    def active(self):
        if _HAVE_GMPY2:
            return gmpy2.context(precision=self.bits)
        return _nullcontext()  # pragma: no cover


class _nullcontext:  # pragma: no cover - mpmath fallback only
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


def _hp_cholesky(hp: _HighPrecision, G, n: int):
    """Lower Cholesky factor of the integer matrix G in multiprecision."""
    num = hp.number
    L = [[num(0)] * n for _ in range(n)]
    for j in range(n):
        Lj = L[j]
        acc = num(G[j][j])
        for k in range(j):
            acc -= Lj[k] * Lj[k]
        if acc <= 0:
            raise ConditioningError(
                f"overlap pencil lost definiteness at pivot {j} of {n} "
                f"({hp.bits}-bit arithmetic); reduce the basis order",
                pivot=j,
            )
        Lj[j] = hp.sqrt(acc)
        inv = 1 / Lj[j]
        for i in range(j + 1, n):
            Li = L[i]
            acc = num(G[i][j])
            for k in range(j):
                acc -= Li[k] * Lj[k]
            Li[j] = acc * inv
    return L


def _hp_forward_solve(hp: _HighPrecision, L, B, n: int):
    """X = L^-1 B for B given as rows of ints or multiprecision numbers."""
    num = hp.number
    X = [[num(0)] * n for _ in range(n)]
    for i in range(n):
        Li = L[i]
        Xi = X[i]
        Bi = B[i]
        inv = 1 / Li[i]
        for col in range(n):
            acc = num(Bi[col])
            for k in range(i):
                acc -= Li[k] * X[k][col]
            Xi[col] = acc * inv
    return X


def _hp_reduce(hp: _HighPrecision, L, B, n: int) -> np.ndarray:
    """A = L^-1 B L^-T rounded to binary64 and exactly symmetrized."""
    Y = _hp_forward_solve(hp, L, B, n)
    Yt = [[Y[j][i] for j in range(n)] for i in range(n)]
    A = _hp_forward_solve(hp, L, Yt, n)
    An = np.array([[float(A[i][j]) for j in range(n)] for i in range(n)])
    return 0.5 * (An + An.T)


def _hp_back_solve(hp: _HighPrecision, L, y: np.ndarray) -> np.ndarray:
    """c = L^-T y, done in multiprecision so the ill-conditioned directions
    of the monomial representation are resolved faithfully."""
    num = hp.number
    n = len(y)
    c = [num(0)] * n
    for i in range(n - 1, -1, -1):
        acc = num(float(y[i]))
        for k in range(i + 1, n):
            acc -= L[k][i] * c[k]
        c[i] = acc / L[i][i]
    return np.array([float(v) for v in c])


@dataclass(frozen=True, eq=False)
class ReducedPencil:
    """Per-order reduced pencil: eigensolves are binary64 from here on."""

    omega: int
    terms: tuple[basis.BasisTerm, ...]
    degrees: np.ndarray
    A_K: np.ndarray
    A_W: np.ndarray
    A_U: np.ndarray
    Q: int
    _backsolve: callable  # y -> L^-T y

    def reduced_matrix(self, Z: float, mu: float) -> np.ndarray:
        return mu * mu * self.A_K + 2.0 * mu * self.A_W - 8.0 * Z * mu * self.A_U

    def eigenvalues(self, Z: float, mu: float) -> np.ndarray:
        """All pencil eigenvalues (= energies in hartree), ascending."""
        return np.linalg.eigvalsh(self.reduced_matrix(Z, mu))

    def ground(self, Z: float, mu: float) -> tuple[float, float, np.ndarray]:
        """Lowest eigenvalue, gap to the next one, and S-normalized
        coefficients in the monomial basis (first nonzero made positive)."""
        w, V = np.linalg.eigh(self.reduced_matrix(Z, mu))
        energy = float(w[0])
        gap = float(w[1] - w[0]) if len(w) > 1 else math.inf
        # The pencil eigenvector v solves (mu^2 K + ...) v = E G v and relates
        # to the physical coefficients by v = D(mu) c with
        # D = diag((2 mu)^-(deg+3)); S = (2 pi^2 / Q^2) D G D then gives
        # c = D^-1 v / sqrt(2 pi^2 / Q^2) with c^T S c = 1.
        v = self._backsolve(V[:, 0])
        c = v * (2.0 * mu) ** (self.degrees + 3.0)
        c *= self.Q / math.sqrt(TWO_PI_SQ)
        nonzero = np.nonzero(c)[0]
        if nonzero.size and c[nonzero[0]] < 0.0:
            c = -c
        return energy, gap, c


def _build_float64(omega: int) -> ReducedPencil:
    terms, G, K, W, U = assemble_integer_pencil(omega)
    n = len(terms)
    Gf = np.array(G, dtype=float)
    try:
        L = np.linalg.cholesky(Gf)
    except np.linalg.LinAlgError as err:
        raise ConditioningError(
            f"overlap pencil at omega={omega} is not positive definite "
            f"in binary64: {err}",
            pivot=-1,
        ) from err

    def reduce64(B) -> np.ndarray:
        Y = solve_triangular(L, np.array(B, dtype=float), lower=True)
        A = solve_triangular(L, Y.T, lower=True)
        return 0.5 * (A + A.T)

    def backsolve(y: np.ndarray) -> np.ndarray:
        return solve_triangular(L, y, lower=True, trans="T")

    return ReducedPencil(
        omega=omega,
        terms=tuple(terms),
        degrees=np.array([t.degree for t in terms], dtype=float),
        A_K=reduce64(K),
        A_W=reduce64(W),
        A_U=reduce64(U),
        Q=math.lcm(*range(1, 2 * omega + 7)),
        _backsolve=backsolve,
    )


def _build_highprec(omega: int) -> ReducedPencil:
    terms, G, K, W, U = assemble_integer_pencil(omega)
    n = len(terms)
    hp = _HighPrecision(_precision_bits(omega))
    with hp.active():
        L = _hp_cholesky(hp, G, n)
        A_K = _hp_reduce(hp, L, K, n)
        A_W = _hp_reduce(hp, L, W, n)
        A_U = _hp_reduce(hp, L, U, n)

    def backsolve(y: np.ndarray) -> np.ndarray:
        with hp.active():
            return _hp_back_solve(hp, L, y)

    return ReducedPencil(
        omega=omega,
        terms=tuple(terms),
        degrees=np.array([t.degree for t in terms], dtype=float),
        A_K=A_K,
        A_W=A_W,
        A_U=A_U,
        Q=math.lcm(*range(1, 2 * omega + 7)),
        _backsolve=backsolve,
    )


_CACHE: dict[int, ReducedPencil] = {}
_CACHE_LOCK = threading.Lock()


def reduced_pencil(omega: int) -> ReducedPencil:
    """Build (or fetch from cache) the reduced pencil for a basis order.

    Thread-safe: concurrent sweep workers share one factorization.
    """
    if omega < 0:
        raise ValueError(f"omega must be non-negative, got {omega}")
    with _CACHE_LOCK:
        if omega not in _CACHE:
            if omega <= _FLOAT64_OMEGA_LIMIT:
                _CACHE[omega] = _build_float64(omega)
            else:
                _CACHE[omega] = _build_highprec(omega)
        return _CACHE[omega]


def clear_cache() -> None:
    with _CACHE_LOCK:
        _CACHE.clear()
