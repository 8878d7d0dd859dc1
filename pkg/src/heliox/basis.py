"""Explicitly correlated two-electron basis and its closed-form integrals.

Basis functions are e^(-mu*s) * s^n * t^m * u^p in the collective coordinates

    s = r1 + r2,    t = r1 - r2,    u = r12,

restricted to even m (singlet S symmetry) and n + m + p <= omega.  Every
overlap and Hamiltonian matrix element reduces, after polynomial algebra in
(s, t, u), to the elementary triple integral

    I(a, b, c; alpha) = int_0^inf e^(-alpha*s) s^a ds
                        int_0^s u^b du int_0^u t^c dt
                      = (a+b+c+2)! / ((c+1) (b+c+2) alpha^(a+b+c+3)),

so matrices are assembled exactly (no numerical quadrature).  The two-electron
volume element in these coordinates carries the weight pi^2 * u * (s^2 - t^2)
with t running over [-u, u]; integrands here are even in t, so the t range is
folded to [0, u] and doubled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI_SQ = 2.0 * math.pi**2

# Largest factorial exactly representable as a float; beyond this the
# elementary integral falls back to log space.
_FLOAT_FACT_LIMIT = 170


@dataclass(frozen=True)
class BasisTerm:
    """Exponent triple (n, m, p) of one basis function s^n t^m u^p."""

    n: int
    m: int
    p: int

    def __post_init__(self):
        if self.n < 0 or self.m < 0 or self.p < 0:
            raise ValueError(f"exponents must be non-negative, got {self}")
        if self.m % 2 != 0:
            raise ValueError(f"t-exponent m must be even, got m={self.m}")

    @property
    def degree(self) -> int:
        return self.n + self.m + self.p


@dataclass(frozen=True, eq=False)
class HylleraasExpansion:
    """A variational state: nuclear charge, basis set and linear coefficients.

    ``norm`` is the constant C making the state unit-normalized,
    int |C * psi|^2 dV1 dV2 = 1.  Coefficients coming out of the ground-state
    solver are already S-normalized, so for those states C is 1 up to
    roundoff; hand-built states should call :func:`normalize`.
    """

    Z: float
    omega: int
    mu: float
    terms: tuple[BasisTerm, ...]
    coeffs: np.ndarray
    norm: float = 1.0

    def __post_init__(self):
        if self.mu <= 0.0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.norm <= 0.0:
            raise ValueError(f"norm must be positive, got {self.norm}")
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.shape != (len(self.terms),):
            raise ValueError(
                f"{len(self.terms)} terms but coefficient shape {coeffs.shape}"
            )
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", coeffs)


def term_count(omega: int) -> int:
    """Number of (n, m, p) triples with m even and n + m + p <= omega."""
    if omega < 0:
        raise ValueError(f"omega must be non-negative, got {omega}")
    return sum(
        (omega - m + 1) * (omega - m + 2) // 2 for m in range(0, omega + 1, 2)
    )


def enumerate_terms(omega: int) -> list[BasisTerm]:
    """All basis terms up to total degree omega, lexicographic in (n, m, p)."""
    if omega < 0:
        raise ValueError(f"omega must be non-negative, got {omega}")
    terms = [
        BasisTerm(n, m, p)
        for n in range(omega + 1)
        for m in range(0, omega - n + 1, 2)
        for p in range(omega - n - m + 1)
    ]
    assert len(terms) == term_count(omega)
    return terms


def base_integral(a: int, b: int, c: int, alpha: float) -> float:
    """Elementary triple integral I(a, b, c; alpha), exact in closed form.

    I(a, b, c; alpha) = (a+b+c+2)! / ((c+1) (b+c+2) alpha^(a+b+c+3)).
    """
    for name, v in (("a", a), ("b", b), ("c", c)):
        if v < 0 or v != int(v):
            raise ValueError(f"{name} must be a non-negative integer, got {v}")
    if alpha <= 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    k = a + b + c + 2
    denom = (c + 1) * (b + c + 2)
    if k <= _FLOAT_FACT_LIMIT:
        try:
            return math.factorial(k) / denom / alpha ** (k + 1)
        except OverflowError:
            pass  # alpha**(k+1) underflowed the division; retry in log space
    log_val = (
        math.lgamma(k + 1) - math.log(denom) - (k + 1) * math.log(alpha)
    )
    if log_val > 709.0:
        raise OverflowError(
            f"I({a},{b},{c};{alpha}) exceeds the double-precision range"
        )
    return math.exp(log_val)


def _factorial_table(max_k: int) -> np.ndarray:
    out = np.empty(max_k + 1)
    acc = 1.0
    out[0] = 1.0
    for k in range(1, max_k + 1):
        acc *= k
        out[k] = acc
    return out


class _Accumulator:
    """Sums coef * I(a, b, c; alpha) over arrays of integer exponents."""

    def __init__(self, shape, alpha: float, max_degree: int):
        self.alpha = alpha
        self.fact = _factorial_table(max_degree + 2)
        self.total = np.zeros(shape)

    def add(self, coef, a, b, c) -> None:
        coef = np.asarray(coef, dtype=float)
        valid = coef != 0.0
        if not np.any(valid):
            return
        a = np.where(valid, a, 0)
        b = np.where(valid, b, 0)
        c = np.where(valid, c, 0)
        deg = a + b + c
        val = self.fact[deg + 2] / ((c + 1) * (b + c + 2))
        val /= self.alpha ** (deg + 3.0)
        self.total += np.where(valid, coef * val, 0.0)


def _exponent_arrays(row_terms, col_terms):
    def cols(terms):
        return (
            np.array([t.n for t in terms], dtype=np.int64),
            np.array([t.m for t in terms], dtype=np.int64),
            np.array([t.p for t in terms], dtype=np.int64),
        )

    n1, m1, p1 = (v[:, None] for v in cols(row_terms))
    n2, m2, p2 = (v[None, :] for v in cols(col_terms))
    return n1, m1, p1, n2, m2, p2


def _overlap_block(row_terms, col_terms, mu: float) -> np.ndarray:
    n1, m1, p1, n2, m2, p2 = _exponent_arrays(row_terms, col_terms)
    ns, ms, ps = n1 + n2, m1 + m2, p1 + p2
    max_deg = int(ns.max() + ms.max() + ps.max()) + 3
    acc = _Accumulator(ns.shape, 2.0 * mu, max_deg)
    one = np.ones(ns.shape)
    # weight u*(s^2 - t^2) = s^2 u - t^2 u
    acc.add(one, ns + 2, ps + 1, ms)
    acc.add(-one, ns, ps + 1, ms + 2)
    return TWO_PI_SQ * acc.total


def _hamiltonian_block(row_terms, col_terms, mu: float, Z: float) -> np.ndarray:
    """<row|H|col> via the kinetic-energy functional plus the potential.

    Kinetic part (phi, chi the two basis functions, subscripts = partials):

        T = pi^2 * int [  u(s^2-t^2) (phi_s chi_s + phi_t chi_t + phi_u chi_u)
                        + s(u^2-t^2) (phi_s chi_u + phi_u chi_s)
                        + t(s^2-u^2) (phi_t chi_u + phi_u chi_t) ] ds du dt

    Potential part:

        V = pi^2 * int phi chi [ -4 Z s u + (s^2 - t^2) ] ds du dt
    """
    n1, m1, p1, n2, m2, p2 = _exponent_arrays(row_terms, col_terms)
    ns, ms, ps = n1 + n2, m1 + m2, p1 + p2
    max_deg = int(ns.max() + ms.max() + ps.max()) + 4
    acc = _Accumulator(ns.shape, 2.0 * mu, max_deg)
    one = np.ones(ns.shape)

    # potential: -4Z*s*u + s^2 - t^2 against phi*chi
    acc.add(-4.0 * Z * one, ns + 1, ps + 1, ms)
    acc.add(one, ns + 2, ps, ms)
    acc.add(-one, ns, ps, ms + 2)

    # derivative products, each a short monomial list (coef, ds, du, dt);
    # the e^(-mu s) factor of both functions contributes the -mu terms.
    grad_ss = (
        ((n1 * n2) * one, ns - 2, ps, ms),
        (-mu * (n1 + n2) * one, ns - 1, ps, ms),
        (mu * mu * one, ns, ps, ms),
    )
    grad_tt = (((m1 * m2) * one, ns, ps, ms - 2),)
    grad_uu = (((p1 * p2) * one, ns, ps - 2, ms),)
    grad_su = (
        ((n1 * p2 + n2 * p1) * one, ns - 1, ps - 1, ms),
        (-mu * (p1 + p2) * one, ns, ps - 1, ms),
    )
    grad_tu = (((m1 * p2 + m2 * p1) * one, ns, ps - 1, ms - 1),)

    # weight u*(s^2 - t^2) on the diagonal gradient terms
    for coef, a, b, c in (*grad_ss, *grad_tt, *grad_uu):
        acc.add(coef, a + 2, b + 1, c)
        acc.add(-coef, a, b + 1, c + 2)
    # weight s*(u^2 - t^2) on the s-u cross terms
    for coef, a, b, c in grad_su:
        acc.add(coef, a + 1, b + 2, c)
        acc.add(-coef, a + 1, b, c + 2)
    # weight t*(s^2 - u^2) on the t-u cross terms
    for coef, a, b, c in grad_tu:
        acc.add(coef, a + 2, b, c + 1)
        acc.add(-coef, a, b + 2, c + 1)

    return TWO_PI_SQ * acc.total


def overlap_matrix(terms, mu: float) -> np.ndarray:
    """Overlap matrix S_ij = <i|j> at nonlinear parameter mu."""
    if mu <= 0.0:
        raise ValueError(f"mu must be positive, got {mu}")
    return _overlap_block(terms, terms, mu)


def hamiltonian_matrix(terms, mu: float, Z: float) -> np.ndarray:
    """Hamiltonian matrix H_ij = <i|H|j> for nuclear charge Z."""
    if mu <= 0.0:
        raise ValueError(f"mu must be positive, got {mu}")
    return _hamiltonian_block(terms, terms, mu, Z)


def overlap_element(t_i: BasisTerm, t_j: BasisTerm, mu: float) -> float:
    """Single overlap element <i|j>."""
    if mu <= 0.0:
        raise ValueError(f"mu must be positive, got {mu}")
    return float(_overlap_block([t_i], [t_j], mu)[0, 0])


def hamiltonian_element(
    t_i: BasisTerm, t_j: BasisTerm, mu: float, Z: float
) -> float:
    """Single Hamiltonian element <i|H|j>."""
    if mu <= 0.0:
        raise ValueError(f"mu must be positive, got {mu}")
    return float(_hamiltonian_block([t_i], [t_j], mu, Z)[0, 0])


def interelectron_distance(r1, r2, cos_theta):
    """r12 from the triangle relation, in a form that cannot go negative."""
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    return np.sqrt((r1 - r2) ** 2 + 2.0 * r1 * r2 * (1.0 - cos_theta))


def wavefunction_value(exp: HylleraasExpansion, r1, r2, cos_theta):
    """Pointwise value of the normalized state at (r1, r2, cos(theta)).

    Accepts scalars or broadcastable arrays; symmetric under r1 <-> r2
    because all t-exponents are even.
    """
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    x = np.asarray(cos_theta, dtype=float)
    if np.any(r1 < 0.0) or np.any(r2 < 0.0):
        raise ValueError("radii must be non-negative")
    if np.any(x < -1.0) or np.any(x > 1.0):
        raise ValueError("cos(theta) must lie in [-1, 1]")
    s = r1 + r2
    t = r1 - r2
    u = interelectron_distance(r1, r2, x)
    total = np.zeros(np.broadcast(r1, r2, x).shape)
    for term, coef in zip(exp.terms, exp.coeffs):
        total += coef * s**term.n * t**term.m * u**term.p
    value = exp.norm * np.exp(-exp.mu * s) * total
    return float(value) if value.ndim == 0 else value


def norm_constant(exp: HylleraasExpansion) -> float:
    """Normalization constant C = (c^T S c)^(-1/2) of the expansion."""
    if not np.any(exp.coeffs):
        raise ValueError("coefficient vector is zero")
    S = overlap_matrix(exp.terms, exp.mu)
    quad = float(exp.coeffs @ S @ exp.coeffs)
    if quad <= 0.0:
        raise ValueError(f"overlap quadratic form is not positive: {quad}")
    return 1.0 / math.sqrt(quad)


def normalize(exp: HylleraasExpansion) -> HylleraasExpansion:
    """Return the same expansion with its norm constant filled in."""
    return HylleraasExpansion(
        Z=exp.Z,
        omega=exp.omega,
        mu=exp.mu,
        terms=exp.terms,
        coeffs=exp.coeffs,
        norm=norm_constant(exp),
    )
