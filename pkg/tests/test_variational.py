"""Ground-state solver: closed-form limits, reference energies, mu optimum."""

import numpy as np
import pytest

from heliox import BracketError, optimize_mu, solve_at_mu
from heliox.variational import OMEGA_CAP, default_bracket, effective_charge


class TestSolveAtMu:
    def test_order_zero_closed_form(self):
        # E = mu^2 - 2 Z mu + 5 mu/8, minimized at mu = Z - 5/16
        state = solve_at_mu(2.0, 0, 27.0 / 16.0)
        assert state.energy == pytest.approx(-2.84765625, abs=1e-9)

    def test_monotone_in_omega_at_fixed_mu(self):
        energies = [solve_at_mu(2.0, om, 1.8).energy for om in (0, 2, 4, 6)]
        assert all(b <= a + 1e-13 for a, b in zip(energies, energies[1:]))

    def test_sign_convention(self):
        state = solve_at_mu(2.0, 4, 1.9)
        coeffs = state.expansion.coeffs
        nonzero = coeffs[coeffs != 0.0]
        assert nonzero[0] > 0.0

    def test_expansion_metadata(self):
        state = solve_at_mu(3.0, 2, 2.5)
        assert state.expansion.Z == 3.0
        assert state.expansion.omega == 2
        assert state.expansion.mu == 2.5
        assert state.gap > 1e-8

    def test_validation(self):
        with pytest.raises(ValueError):
            solve_at_mu(0.0, 2, 1.0)
        with pytest.raises(ValueError):
            solve_at_mu(2.0, 2, -1.0)
        with pytest.raises(ValueError):
            solve_at_mu(2.0, -1, 1.0)

    def test_omega_cap_enforced(self):
        with pytest.raises(ValueError, match="force"):
            solve_at_mu(2.0, OMEGA_CAP + 1, 1.0)


class TestOptimizeMu:
    def test_order_zero_minimizer(self):
        state = optimize_mu(2.0, 0, (1.0, 2.5), tol=1e-7)
        assert state.mu == pytest.approx(1.6875, abs=1e-6)
        assert state.energy == pytest.approx(-2.84765625, abs=1e-10)

    def test_default_bracket_contains_screened_charge(self):
        lo, hi = default_bracket(2.0)
        assert lo < effective_charge(2.0) < hi

    @pytest.mark.parametrize(
        "Z,omega,ref,tol",
        [
            (1.0, 8, -0.5277500643, 5e-9),
            (5.0, 8, -22.03097150, 5e-8),
        ],
    )
    def test_reference_energies(self, Z, omega, ref, tol):
        state = optimize_mu(Z, omega)
        assert state.energy == pytest.approx(ref, abs=tol)

    def test_monotone_in_omega_optimized(self):
        energies = [optimize_mu(2.0, om).energy for om in (0, 2, 4, 6)]
        assert all(b < a for a, b in zip(energies, energies[1:]))

    def test_variational_upper_bound(self, he6):
        # the optimized order-6 energy cannot fall below the exact one
        assert he6.energy >= -2.9037243770341196
        assert he6.energy == pytest.approx(-2.903723702, abs=5e-9)

    def test_bracket_without_interior_minimum(self):
        with pytest.raises(BracketError) as exc:
            optimize_mu(2.0, 0, (3.0, 4.0))
        assert exc.value.f_lo < exc.value.f_hi  # E rises away from 27/16

    def test_validation(self):
        with pytest.raises(ValueError):
            optimize_mu(2.0, 2, (0.0, 1.0))
        with pytest.raises(ValueError):
            optimize_mu(2.0, 2, (2.0, 1.0))
        with pytest.raises(ValueError):
            optimize_mu(2.0, 2, tol=0.0)
        with pytest.raises(ValueError):
            optimize_mu(-2.0, 2)
