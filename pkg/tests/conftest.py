"""Shared fixtures and independent quadrature oracles.

The oracles integrate in different coordinates than the library (tensor
Gauss rules in (s, u, t) or (r1, r2, cos theta)) so they share no code with
the closed-form evaluation paths they check.
"""

from __future__ import annotations

import numpy as np
import pytest

from heliox import basis, variational


@pytest.fixture(scope="session")
def he6() -> variational.GroundState:
    """Helium ground state at basis order 6 (fast, well conditioned)."""
    return variational.optimize_mu(2.0, 6)


@pytest.fixture(scope="session")
def product_state() -> basis.HylleraasExpansion:
    """Single-configuration (order-0) state: an unentangled reference."""
    terms = tuple(basis.enumerate_terms(0))
    exp = basis.HylleraasExpansion(
        Z=2.0, omega=0, mu=27.0 / 16.0, terms=terms, coeffs=np.array([1.0])
    )
    return basis.normalize(exp)


def triple_quadrature(a: int, b: int, c: int, alpha: float, n: int = 48):
    """Brute-force tensor quadrature of the elementary triple integral.

    Gauss-Laguerre in s against the weight e^(-alpha s), nested Gauss-
    Legendre in u over [0, s] and t over [0, u]; exact for the monomial
    integrands up to machine precision, and independent of the factorial
    closed form.
    """
    xs, ws = np.polynomial.laguerre.laggauss(n)
    xu, wu = np.polynomial.legendre.leggauss(n)
    xt, wt = np.polynomial.legendre.leggauss(n)
    s = xs / alpha  # (n,)
    u = 0.5 * (xu[None, :] + 1.0) * s[:, None]  # (n, n)
    t = 0.5 * (xt[None, None, :] + 1.0) * u[:, :, None]  # (n, n, n)
    inner_t = (t**c @ wt) * 0.5 * u  # (n, n)
    inner_u = ((u**b * inner_t) @ wu) * 0.5 * s  # (n,)
    return float((s**a * inner_u) @ ws / alpha)


def pair_quadrature(f, mu: float, n_r: int = 48, n_v: int = 48, n_u: int = 64):
    """Integrate f(r1, r2, x) e^(-2 mu (r1+r2)) r1^2 r2^2 over two-electron
    space (Euler angles integrated out); f is the bare integrand, the
    exponential weight is supplied here.

    Two substitutions keep every test integrand polynomial, making the
    tensor Gauss rule exact: the angular integral is done in the
    inter-electron distance, int_-1^1 F dx = int F u/(r1 r2) du over
    u in [r2-r1, r2+r1], and the radial square is folded onto the ordered
    triangle r1 = v r2, v in [0, 1] (doubled), which removes the min/max
    kink on the diagonal.
    """
    xr, wr = np.polynomial.laguerre.laggauss(n_r)
    xv, wv = np.polynomial.legendre.leggauss(n_v)
    xu, wu = np.polynomial.legendre.leggauss(n_u)
    v = 0.5 * (xv + 1.0)  # (nv,)
    # for fixed v the exponential is e^(-2 mu (1+v) r2): scale the nodes
    r2 = xr[None, :] / (2.0 * mu * (1.0 + v[:, None]))  # (nv, nr)
    r1 = v[:, None] * r2
    mid = r2[:, :, None]
    half = r1[:, :, None]
    u = mid + half * xu[None, None, :]  # in [r2 - r1, r2 + r1]
    x = np.clip(
        (r1[:, :, None] ** 2 + r2[:, :, None] ** 2 - u**2)
        / (2.0 * r1[:, :, None] * r2[:, :, None]),
        -1.0,
        1.0,
    )
    vals = f(r1[:, :, None], r2[:, :, None], x) * u * half  # u du jacobian
    angular = vals @ wu  # (nv, nr); the 1/(r1 r2) of dx cancelled r1^2 r2^2
    radial = r1 * r2 * r2  # r1^2 r2^2 / (r1 r2) * (r2 from dr1 = r2 dv)
    total = (wv / 2.0) @ ((angular * radial / (2.0 * mu * (1.0 + v[:, None]))) @ wr)
    return 2.0 * 8.0 * np.pi**2 * float(total)
