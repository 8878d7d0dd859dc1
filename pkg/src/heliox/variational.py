"""Ground-state solver: lowest pencil eigenvalue at given mu, and mu optimum.

Each E(mu) evaluation is a dense symmetric eigensolve of the reduced pencil
(see :mod:`heliox.pencil`); the expensive exact factorization happens once
per basis order and is cached, so scanning mu is cheap.  Expansion orders
above ``OMEGA_CAP`` are refused unless explicitly forced: beyond it the
one-electron spectrum of the basis is so degenerate that even the exact
reduction leaves little binary64 headroom, and runtimes grow steeply.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import basis, pencil
from .errors import BracketError

OMEGA_CAP = 12

# Golden-section ratio for derivative-free scalar minimization.
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def effective_charge(Z: float) -> float:
    """One-electron charge after mutual screening; the single-function
    optimum is exactly mu = Z - 5/16 and optima drift slowly with omega."""
    return Z - 5.0 / 16.0


@dataclass(frozen=True, eq=False)
class GroundState:
    """Lowest variational eigenstate at fixed (Z, omega, mu)."""

    Z: float
    omega: int
    mu: float
    energy: float
    expansion: basis.HylleraasExpansion
    gap: float  # distance to the next eigenvalue, sanity guard


def _check_omega(omega: int, force: bool) -> None:
    if omega < 0:
        raise ValueError(f"omega must be non-negative, got {omega}")
    if omega > OMEGA_CAP:
        if not force:
            raise ValueError(
                f"omega={omega} exceeds the default cap {OMEGA_CAP}; "
                "pass force_omega=True (CLI: --force-omega) to override"
            )
        warnings.warn(
            f"omega={omega} is beyond the default cap {OMEGA_CAP}; "
            "expect slower setup and reduced eigenvalue headroom",
            stacklevel=3,
        )


def solve_at_mu(
    Z: float, omega: int, mu: float, *, force_omega: bool = False
) -> GroundState:
    """Lowest generalized eigenpair of (H, S) at fixed mu.

    The returned expansion carries S-normalized coefficients with the first
    nonzero coefficient made positive (deterministic sign).
    """
    if Z <= 0.0:
        raise ValueError(f"Z must be positive, got {Z}")
    if mu <= 0.0:
        raise ValueError(f"mu must be positive, got {mu}")
    _check_omega(omega, force_omega)

    red = pencil.reduced_pencil(omega)
    energy, gap, coeffs = red.ground(Z, mu)
    if gap <= 1e-8:
        raise AssertionError(
            f"ground state is not clearly separated: gap {gap:.3e} "
            f"at Z={Z}, omega={omega}, mu={mu}"
        )
    expansion = basis.HylleraasExpansion(
        Z=Z, omega=omega, mu=mu, terms=red.terms, coeffs=coeffs, norm=1.0
    )
    return GroundState(
        Z=Z, omega=omega, mu=mu, energy=energy, expansion=expansion, gap=gap
    )


def default_bracket(Z: float) -> tuple[float, float]:
    zeff = effective_charge(Z)
    return 0.5 * zeff, 2.0 * zeff


def optimize_mu(
    Z: float,
    omega: int,
    bracket: tuple[float, float] | None = None,
    tol: float = 1e-6,
    *,
    scan_points: int = 17,
    force_omega: bool = False,
) -> GroundState:
    """Minimize E(mu) over the bracket with a scan plus golden section.

    A coarse scan locates the basin (guarding against a minimum sitting on
    the bracket edge, which raises :class:`BracketError`), then golden-section
    iterations shrink the interval until |delta mu| <= tol.
    """
    if bracket is None:
        bracket = default_bracket(Z)
    lo, hi = bracket
    if not (0.0 < lo < hi):
        raise ValueError(f"bracket must satisfy 0 < lo < hi, got {bracket}")
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    if Z <= 0.0:
        raise ValueError(f"Z must be positive, got {Z}")
    _check_omega(omega, force_omega)

    red = pencil.reduced_pencil(omega)

    def energy_at(mu: float) -> float:
        return float(red.eigenvalues(Z, mu)[0])

    # coarse scan for the basin of the minimum
    grid = np.linspace(lo, hi, max(scan_points, 3))
    energies = [energy_at(mu) for mu in grid]
    best = int(np.argmin(energies))
    if best == 0 or best == len(grid) - 1:
        raise BracketError(
            f"no interior minimum of E(mu) in [{lo}, {hi}] for "
            f"Z={Z}, omega={omega}",
            f_lo=energies[0],
            f_hi=energies[-1],
        )

    a, b = float(grid[best - 1]), float(grid[best + 1])
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = energy_at(x1), energy_at(x2)
    while (b - a) > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = energy_at(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = energy_at(x2)

    mu_best = x1 if f1 <= f2 else x2
    return solve_at_mu(Z, omega, mu_best, force_omega=force_omega)
