"""Nystrom discretization, occupation numbers, entropies, convergence."""

import math

import numpy as np
import pytest

from heliox import (
    ConsistencyError,
    ConvergenceError,
    GridSpec,
    build_kernel_matrix,
    converge,
    default_schedule,
    entropies,
    kernel_value_quadrature,
    occupations_from_kernel,
    partial_entropies,
    spectrum_for,
)
from heliox.spectrum import (
    LAMBDA_CUTOFF,
    OccupationEntry,
    OccupationSpectrum,
    build_kernel_matrices,
)


class TestGridSpec:
    def test_points_and_spacing(self):
        grid = GridSpec(R=10.0, n_m=4)
        assert grid.dr == 2.5
        assert np.allclose(grid.points(), [0.0, 2.5, 5.0, 7.5, 10.0])

    def test_validation(self):
        with pytest.raises(ValueError):
            GridSpec(R=0.0, n_m=10)
        with pytest.raises(ValueError):
            GridSpec(R=5.0, n_m=0)


class TestKernelMatrix:
    def test_border_zero_and_exact_symmetry(self, he6):
        grid = GridSpec(R=8.0, n_m=60)
        M = build_kernel_matrix(1, grid, he6.expansion)
        assert M.shape == (61, 61)
        assert not M[0].any() and not M[:, 0].any()
        assert np.array_equal(M, M.T)

    def test_matches_scalar_quadrature(self, he6):
        grid = GridSpec(R=8.0, n_m=40)
        mats = build_kernel_matrices(he6.expansion, grid, [0, 2])
        r = grid.points()
        for li, l in enumerate((0, 2)):
            for i in (1, 13, 40):
                for j in (5, 27):
                    ref = grid.dr * kernel_value_quadrature(
                        l, he6.expansion, r[i], r[j], 64
                    )
                    assert mats[li][i, j] == pytest.approx(ref, abs=1e-15)

    def test_product_state_rank_one(self, product_state):
        grid = GridSpec(R=12.0, n_m=80)
        M = build_kernel_matrix(0, grid, product_state)
        w = np.linalg.eigvalsh(M)
        assert w[-1] > 0.0
        assert np.all(np.abs(w[:-1]) < 1e-14 * w[-1])
        # separable pattern dr * C * (r1 e^(-mu r1)) (r2 e^(-mu r2))
        r = grid.points()
        g = r * np.exp(-product_state.mu * r)
        expect = grid.dr * product_state.norm * np.outer(g, g)
        assert np.allclose(M, expect, atol=1e-15)

    def test_trace_consistency(self, he6):
        grid = GridSpec(R=10.0, n_m=120)
        M = build_kernel_matrix(0, grid, he6.expansion)
        r = grid.points()
        direct = grid.dr * sum(
            kernel_value_quadrature(0, he6.expansion, ri, ri, 64) for ri in r
        )
        assert np.trace(M) == pytest.approx(direct, rel=1e-14)

    def test_node_guard_propagates(self, he6):
        with pytest.raises(ValueError):
            build_kernel_matrices(
                he6.expansion, GridSpec(R=8.0, n_m=20), [10], nodes=8
            )


class TestOccupations:
    def test_product_state_single_mode(self, product_state):
        grid = GridSpec(R=20.0 / product_state.mu, n_m=600)
        M = build_kernel_matrix(0, grid, product_state)
        occ = occupations_from_kernel(M, 0)
        lams = [lam for _, lam in occ]
        assert lams[0] == pytest.approx(1.0, abs=1e-6)
        assert all(lam < 1e-12 for lam in lams[1:])
        assert all(lam >= 0.0 for lam in lams)
        assert lams == sorted(lams, reverse=True)

    def test_cutoff_applied(self, product_state):
        grid = GridSpec(R=10.0, n_m=50)
        M = build_kernel_matrix(3, grid, product_state)  # identically ~0
        assert occupations_from_kernel(M, 3) == []
        assert LAMBDA_CUTOFF == 1e-16

    def test_spectrum_with_orbitals(self, he6):
        grid = GridSpec(R=9.0, n_m=150)
        spec = spectrum_for(he6.expansion, grid, lmax=2, include_orbitals=True)
        assert set(spec.orbitals) == {0, 1, 2}
        for l, orbs in spec.orbitals.items():
            kept = [e for e in spec.entries if e.l == l]
            assert orbs.shape == (151, len(kept))
            # discrete normalization: integral of v^2 over the box is 1
            norms = grid.dr * (orbs**2).sum(axis=0)
            assert np.allclose(norms, 1.0, rtol=1e-10)


class TestEntropies:
    def _spectrum(self, entries):
        grid = GridSpec(R=1.0, n_m=2)
        lmax = max(e.l for e in entries)
        return OccupationSpectrum(entries=entries, lmax=lmax, grid=grid)

    def test_pure_state(self):
        spec = self._spectrum([OccupationEntry(0, 0, 1 / (4 * math.pi), 1.0)])
        res = entropies(spec)
        assert res.S == 0.0
        assert res.L == 0.0

    def test_two_equal_modes(self):
        spec = self._spectrum(
            [
                OccupationEntry(0, 0, 0.0, 0.5),
                OccupationEntry(1, 0, 0.0, 0.5),
            ]
        )
        res = entropies(spec)
        assert res.S == pytest.approx(1.0, abs=1e-15)
        assert res.L == pytest.approx(0.5, abs=1e-15)

    def test_degeneracy_weights(self):
        # one l=1 mode counts three times in both sums
        lam = 0.2
        spec = self._spectrum([OccupationEntry(0, 1, 0.0, lam)])
        res = entropies(spec)
        assert res.S == pytest.approx(-3 * lam * math.log2(lam))
        assert res.L == pytest.approx(1 - 3 * lam * lam)

    def test_overoccupation_rejected(self):
        spec = self._spectrum([OccupationEntry(0, 0, 1.0, 1.0 + 1e-6)])
        with pytest.raises(ConsistencyError):
            entropies(spec)

    def test_empty_rejected(self):
        empty = OccupationSpectrum(
            entries=[], lmax=0, grid=GridSpec(R=1.0, n_m=2)
        )
        with pytest.raises(ValueError):
            entropies(empty)

    def test_product_state_is_unentangled(self, product_state):
        grid = GridSpec(R=20.0 / product_state.mu, n_m=600)
        spec = spectrum_for(product_state, grid, lmax=3)
        res = entropies(spec)
        assert res.S < 1e-6
        assert res.L < 1e-6
        assert abs(res.deficit) < 1e-6

    def test_partial_sums_monotone(self, he6):
        spec = spectrum_for(he6.expansion, GridSpec(R=10.0, n_m=300), lmax=10)
        s_part, l_part = partial_entropies(spec)
        assert np.all(np.diff(s_part) >= 0.0)  # vN from below
        assert np.all(np.diff(l_part) <= 0.0)  # linear from above
        full = entropies(spec)
        assert s_part[-1] == pytest.approx(full.S, abs=1e-15)
        assert l_part[-1] == pytest.approx(full.L, abs=1e-15)


class TestConverge:
    def test_ladder_walk(self, he6):
        schedule = [(7.0, 100, 4), (9.0, 200, 4), (10.0, 400, 4)]
        res = converge(he6.expansion, tol_S=1e-3, tol_L=1e-4, schedule=schedule)
        assert 2 <= len(res.ladder) <= 3
        last = res.ladder[-1]
        assert res.S == last.S and res.L == last.L
        assert 0.0 < res.deficit < 1e-3

    def test_exhausted_ladder_raises_with_records(self, he6):
        schedule = [(7.0, 60, 2), (9.0, 120, 2)]
        with pytest.raises(ConvergenceError) as exc:
            converge(he6.expansion, tol_S=1e-12, tol_L=1e-12, schedule=schedule)
        assert len(exc.value.records) == 2

    def test_schedule_validation(self, he6):
        with pytest.raises(ValueError):
            converge(he6.expansion, schedule=[])
        with pytest.raises(ValueError):
            converge(
                he6.expansion,
                schedule=[(9.0, 100, 4), (7.0, 200, 4)],  # shrinking box
            )

    def test_default_schedules(self):
        anion = default_schedule(1.0)
        assert len(anion) == 4
        assert anion[-1][0] == 50.0
        compact = default_schedule(4.0)
        assert compact[0][0] == pytest.approx(3.5)
        assert all(l == 20 for _, _, l in compact)
        with pytest.raises(ValueError):
            default_schedule(0.0)
