"""Partial-wave radial kernels of a normalized two-electron state.

For a singlet S state psi(r1, r2, cos theta) the angular projection

    f_l(r1, r2) = r1 r2 (2l+1)/2 * int_-1^1 psi(r1, r2, x) P_l(x) dx

defines the radial kernels whose eigenvalues are the Schmidt coefficients.
Two interchangeable backends are provided:

* ``quadrature`` - Gauss-Legendre in the inter-electron distance u = r12,
  using int_-1^1 F dx = (1/(r1 r2)) int F u du over u in [|r1-r2|, r1+r2].
  In this variable the integrand is a polynomial (the expansion's u powers
  times P_l((r1^2+r2^2-u^2)/(2 r1 r2)) times the Jacobian u), so the rule
  is exact once the node guard is satisfied; quadrature in x = cos(theta)
  would instead stall near r1 = r2 where odd u powers have a square-root
  branch at x = 1.  This is the production path.
* ``analytic`` - closed form obtained by expanding P_l in powers of x, which
  reduces the projection to elementary angular moments

      I(k, p) = int_-1^1 x^k (r1^2 + r2^2 - 2 r1 r2 x)^(p/2) dx,

  used to validate the quadrature path to full precision.

The angular moments are evaluated by exact polynomial integration (p even)
or an exact antiderivative after substituting w = r12^2 (p odd), switching
to a geometric binomial series when 2 r1 r2 << r1^2 + r2^2 where the
antiderivative route would cancel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .basis import HylleraasExpansion, wavefunction_value

_SERIES_THRESHOLD = 0.5  # switch point in B/A for the odd-p moment routes
_SERIES_EPS = 1e-19


@lru_cache(maxsize=64)
def gauss_legendre(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Cached Gauss-Legendre nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    return x, w


def legendre_table(lmax: int, x: np.ndarray) -> np.ndarray:
    """P_l(x) for l = 0..lmax by upward recurrence, shape (lmax+1, len(x))."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((lmax + 1, x.size))
    out[0] = 1.0
    if lmax >= 1:
        out[1] = x
    for l in range(1, lmax):
        out[l + 1] = ((2 * l + 1) * x * out[l] - l * out[l - 1]) / (l + 1)
    return out


def generalized_binomial(x: float, l: int) -> float:
    """binom(x, l) = x (x-1) ... (x-l+1) / l! for real x."""
    if l < 0:
        raise ValueError(f"l must be non-negative, got {l}")
    num = 1.0
    for j in range(l):
        num *= x - j
    return num / math.factorial(l)


@lru_cache(maxsize=256)
def legendre_power_coefficients(l: int) -> tuple[float, ...]:
    """Coefficients g_k with P_l(x) = 2^l sum_k g_k x^k,
    g_k = binom(l, k) * binom((l+k-1)/2, l)."""
    return tuple(
        math.comb(l, k) * generalized_binomial((l + k - 1) / 2.0, l)
        for k in range(l + 1)
    )


def _moment_even(k: int, q: int, A: float, B: float) -> float:
    # int x^k (A - B x)^q dx over [-1, 1], exact binomial expansion
    total = 0.0
    for j in range(q + 1):
        if (k + j) % 2 == 0:
            total += (
                math.comb(q, j) * A ** (q - j) * (-B) ** j * 2.0 / (k + j + 1)
            )
    return total


def _moment_odd_series(k: int, p: int, A: float, B: float) -> float:
    # (A - Bx)^(p/2) expanded in powers of Bx/A; geometric for B < A
    half = 0.5 * p
    ratio = B / A
    coef = A**half
    total = coef * (2.0 / (k + 1) if k % 2 == 0 else 0.0)
    j = 0
    while True:
        coef *= -(half - j) / (j + 1) * ratio
        j += 1
        if (k + j) % 2 == 0:
            total += coef * 2.0 / (k + j + 1)
        if abs(coef) < _SERIES_EPS * abs(total) + _SERIES_EPS or j > 500:
            return total


def _moment_odd_antiderivative(k: int, p: int, A: float, B: float) -> float:
    # substitute w = A - Bx = r12^2:
    #   I = (2 / B^(k+1)) int_{u-}^{u+} (A - u^2)^k u^(p+1) du
    u_hi = math.sqrt(A + B)
    u_lo = math.sqrt(max(A - B, 0.0))
    total = 0.0
    for j in range(k + 1):
        e = 2 * j + p + 2
        total += (
            math.comb(k, j)
            * A ** (k - j)
            * (-1.0) ** j
            * (u_hi**e - u_lo**e)
            / e
        )
    return 2.0 * total / B ** (k + 1)


def legendre_theta_integral(k: int, p: int, r1: float, r2: float) -> float:
    """Angular moment I(k, p) = int_0^pi sin(t) cos(t)^k r12^p dt."""
    if k < 0 or p < 0:
        raise ValueError(f"k and p must be non-negative, got k={k}, p={p}")
    if r1 < 0.0 or r2 < 0.0:
        raise ValueError("radii must be non-negative")
    A = r1 * r1 + r2 * r2
    B = 2.0 * r1 * r2
    if A == 0.0:
        raise ValueError("I(k, p) is singular at r1 = r2 = 0")
    if B == 0.0:
        return A ** (0.5 * p) * (2.0 / (k + 1) if k % 2 == 0 else 0.0)
    if p % 2 == 0:
        return _moment_even(k, p // 2, A, B)
    if B <= _SERIES_THRESHOLD * A:
        return _moment_odd_series(k, p, A, B)
    return _moment_odd_antiderivative(k, p, A, B)


def _coefficients_by_u_power(exp: HylleraasExpansion) -> list[list[tuple]]:
    """Regroup the expansion as psi = e^(-mu s) sum_p u^p A_p(s, t)."""
    groups: list[list[tuple]] = [[] for _ in range(exp.omega + 1)]
    for term, coef in zip(exp.terms, exp.coeffs):
        groups[term.p].append((term.n, term.m, coef))
    return groups


def kernel_value_analytic(
    l: int, exp: HylleraasExpansion, r1: float, r2: float
) -> float:
    """f_l(r1, r2) in closed form via the angular moments I(k, p)."""
    if l < 0:
        raise ValueError(f"l must be non-negative, got {l}")
    if r1 < 0.0 or r2 < 0.0:
        raise ValueError("radii must be non-negative")
    if r1 == 0.0 or r2 == 0.0:
        return 0.0
    g = legendre_power_coefficients(l)
    groups = _coefficients_by_u_power(exp)
    s = r1 + r2
    t = r2 - r1
    radial = [
        sum(coef * s**n * t**m for n, m, coef in group) for group in groups
    ]
    total = 0.0
    for k in range(l + 1):
        if g[k] == 0.0:
            continue
        angular = sum(
            radial[p] * legendre_theta_integral(k, p, r1, r2)
            for p in range(len(groups))
            if radial[p] != 0.0
        )
        total += g[k] * angular
    pref = exp.norm * 2.0 ** (l - 1) * (2 * l + 1) * r1 * r2
    return pref * math.exp(-exp.mu * s) * total


def min_nodes(l: int, omega: int) -> int:
    """Node guard for the quadrature backend.

    In the r12 variable the integrand has polynomial degree at most
    omega + 2l + 1, so this many Gauss points integrate it exactly.
    """
    return l + math.ceil(omega / 2) + 2


def kernel_value_quadrature(
    l: int,
    exp: HylleraasExpansion,
    r1: float,
    r2: float,
    nodes: int = 64,
) -> float:
    """f_l(r1, r2) by Gauss-Legendre quadrature in the distance u = r12."""
    if l < 0:
        raise ValueError(f"l must be non-negative, got {l}")
    if nodes < min_nodes(l, exp.omega):
        raise ValueError(
            f"nodes={nodes} below the exactness guard "
            f"{min_nodes(l, exp.omega)} for l={l}, omega={exp.omega}"
        )
    if r1 == 0.0 or r2 == 0.0:
        return 0.0
    xi, w = gauss_legendre(nodes)
    lo, hi = abs(r1 - r2), r1 + r2
    half = 0.5 * (hi - lo)
    u = 0.5 * (hi + lo) + half * xi
    x = np.clip((r1 * r1 + r2 * r2 - u * u) / (2.0 * r1 * r2), -1.0, 1.0)
    psi = wavefunction_value(exp, r1, r2, x)
    pl = legendre_table(l, x)[l]
    return (2 * l + 1) / 2.0 * half * float(np.dot(w, psi * pl * u))


@dataclass(frozen=True, eq=False)
class RadialKernel:
    """Evaluator for one partial-wave kernel f_l of a normalized state."""

    l: int
    expansion: HylleraasExpansion
    backend: str = "quadrature"
    nodes: int = 64

    def __post_init__(self):
        if self.backend not in ("analytic", "quadrature"):
            raise ValueError(f"unknown backend {self.backend!r}")

    def value(self, r1: float, r2: float) -> float:
        if self.backend == "analytic":
            return kernel_value_analytic(self.l, self.expansion, r1, r2)
        return kernel_value_quadrature(
            self.l, self.expansion, r1, r2, self.nodes
        )

    __call__ = value
