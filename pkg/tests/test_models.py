import warnings

import numpy as np
import pytest

from ctcost.counterdiabatic import adiabatic_trajectory, cd_full, exigency
from ctcost.errors import InvalidInputError
from ctcost.models import (
    Ramp,
    classify_subblocks,
    ho_cd_analytic,
    ho_exigency_analytic,
    ho_model,
    ising_cd_momentum,
    ising_dense,
    ising_momentum,
    lmg_exigency,
    lmg_exigency_generic,
    lmg_ground_state,
    lmg_hp_exigency,
    lmg_model,
    lz_cd_analytic,
    lz_energies,
    lz_model,
    selected_cost_ising,
    transitionless_cost_ising,
)
from ctcost.models.ising import ising_cd_block
from ctcost.models.lmg import collective_spin
from ctcost.operators import QuantumState, eigendecompose, expectation_and_variance, frobenius_norm, thermal_state
from ctcost.propagation import IntegratorConfig

from conftest import SY

ISING_RAMP = Ramp("cosine", 0.5, 1.5, 0.0, 1.0)


class TestRamp:
    @pytest.mark.parametrize("kind", ["cosine", "linear", "constant"])
    def test_endpoints(self, kind):
        r = Ramp(kind, 2.0, 5.0, 1.0, 3.0)
        assert r.value(1.0) == pytest.approx(2.0)
        assert r.value(3.0) == pytest.approx(2.0 if kind == "constant" else 5.0)

    def test_cosine_has_no_quench(self):
        r = Ramp("cosine", -10, 5, 0.0, 2.0)
        assert r.rate(0.0) == 0.0
        assert abs(r.rate(2.0)) < 1e-12
        assert r.accel(0.0) != 0.0

    @pytest.mark.parametrize("kind", ["cosine", "linear"])
    def test_derivatives(self, kind, rng):
        r = Ramp(kind, 0.75, 1.25, 0.0, 1.7)
        h = 1e-6
        for t in rng.uniform(0.1, 1.6, 5):
            assert r.rate(t) == pytest.approx((r.value(t + h) - r.value(t - h)) / (2 * h), rel=1e-7)
            assert r.accel(t) == pytest.approx((r.rate(t + h) - r.rate(t - h)) / (2 * h), rel=1e-6, abs=1e-8)

    def test_validation(self):
        with pytest.raises(InvalidInputError):
            Ramp("exponential", 0, 1)
        with pytest.raises(InvalidInputError):
            Ramp("linear", 0, 1, 1.0, 1.0)

    def test_with_duration(self):
        assert Ramp("linear", 0, 1, 0.5, 1.0).with_duration(3.0).t1 == 3.5


class TestLandauZener:
    def test_spectrum(self):
        s = lz_model(1.3, Ramp("linear", 0.0, 1.0))
        np.testing.assert_allclose(np.linalg.eigvalsh(s.H(0.0)), [-1.3, 1.3])
        s = lz_model(1.0, Ramp("linear", -10.0, 5.0))
        np.testing.assert_allclose(np.linalg.eigvalsh(s.H(0.0)), [-np.sqrt(101), np.sqrt(101)])
        np.testing.assert_allclose(lz_energies(1.0, -10.0), [-np.sqrt(101), np.sqrt(101)])

    def test_far_ground_state_is_up(self):
        s = lz_model(1.0, Ramp("linear", -10.0, 5.0))
        v = eigendecompose(s.H(0.0)).eigenvectors[:, 0]
        assert abs(v[0]) ** 2 == pytest.approx(1.0, abs=0.01)  # O((delta / g)^2) mixing

    def test_minimum_gap(self):
        g = np.linspace(-3, 3, 601)
        gaps = [np.diff(lz_energies(1.0, x))[0] for x in g]
        assert min(gaps) == pytest.approx(2.0) and g[np.argmin(gaps)] == pytest.approx(0.0, abs=1e-12)

    def test_rejects_bad_gap(self):
        with pytest.raises(InvalidInputError):
            lz_model(0.0, Ramp("linear", 0, 1))

    def test_analytic_field(self):
        np.testing.assert_allclose(lz_cd_analytic(1.0, Ramp("constant", 1, 1), 0.3), 0)
        r = Ramp("linear", -0.5, 0.5)
        np.testing.assert_allclose(lz_cd_analytic(1.0, r, 0.5), -0.5 * SY)


class TestIsingDense:
    def test_two_spin_blocks(self):
        s = ising_dense(2, 1.0, ISING_RAMP)
        H0, H1 = s.H(0.0), s.H(1.0)
        # {|uu>, |dd>} = indices {0, 3}; {|ud>, |du>} = {1, 2}
        for H in (H0, H1):
            np.testing.assert_allclose(H[np.ix_([0, 3], [1, 2])], 0)
        np.testing.assert_allclose(H0[np.ix_([1, 2], [1, 2])], H1[np.ix_([1, 2], [1, 2])])
        # driven block gap 2 sqrt(J^2 + 4 g^2)
        E = np.linalg.eigvalsh(H0[np.ix_([0, 3], [0, 3])])
        assert E[1] - E[0] == pytest.approx(2 * np.sqrt(1 + 4 * 0.25))

    @pytest.mark.parametrize("L", [3, 0, 12])
    def test_rejects_sizes(self, L):
        with pytest.raises(InvalidInputError):
            ising_dense(L, 1.0, ISING_RAMP)

    def test_sectors_are_conserved(self):
        s = ising_dense(6, 1.0, ISING_RAMP)
        even, odd = s.sector_list()
        assert len(even) == len(odd) == 32
        np.testing.assert_allclose(s.H(0.3)[np.ix_(even, odd)], 0)


class TestIsingMomentum:
    def test_momentum_grids(self):
        m = ising_momentum(8, 1.0, ISING_RAMP)
        np.testing.assert_allclose(np.sort(m.even_momenta),
                                   np.sort(np.pi / 8 * np.array([1, 3, 5, 7, -1, -3, -5, -7])))
        np.testing.assert_allclose(np.sort(m.odd_momenta),
                                   np.sort(np.pi / 4 * np.array([0, 1, 2, 3, -1, -2, -3, 4])))
        assert len(m.even_momenta) == 8
        assert not set(np.round(m.even_momenta, 12)) & set(np.round(m.odd_momenta, 12))

    @pytest.mark.parametrize("L", [2, 4, 6, 8])
    def test_spectrum_matches_dense(self, L):
        m, d = ising_momentum(L, 1.0, ISING_RAMP), ising_dense(L, 1.0, ISING_RAMP)
        for t in np.linspace(0, 1, 5):
            np.testing.assert_allclose(m.spectrum(t), np.linalg.eigvalsh(d.H(t)), atol=1e-8)

    def test_field_norm_matches_dense(self):
        m, d = ising_momentum(4, 1.0, ISING_RAMP), ising_dense(4, 1.0, ISING_RAMP)
        for t in (0.2, 0.5):
            assert ising_cd_momentum(m, t)[1] == pytest.approx(frobenius_norm(cd_full(d, t)), abs=1e-8)

    def test_amplitudes_match_pair_form(self):
        # |f(k)| with the cos k sign of the other Jordan-Wigner convention, same set over the grid
        m = ising_momentum(8, 1.0, ISING_RAMP)
        t = 0.4
        g, gd = ISING_RAMP.value(t), ISING_RAMP.rate(t)
        ours = sorted(m.cd_amplitude(k, t) for k in m.pairs("even"))
        theirs = sorted(abs(gd * np.sin(k) / (2 * (g**2 + 1 - 2 * g * np.cos(k)))) for k in m.pairs("even"))
        np.testing.assert_allclose(ours, theirs, rtol=1e-13)

    def test_amplitudes_vanish(self):
        m = ising_momentum(6, 1.0, ISING_RAMP)
        amps, norm = ising_cd_momentum(m, 0.0)
        assert norm == 0.0 and all(a == 0 for a in amps.values())
        # away from g = J, where the k = pi gap of this convention closes
        assert m.cd_amplitude(1e-9, 0.2) < 1e-8 and m.cd_amplitude(np.pi - 1e-9, 0.2) < 1e-8

    def test_block_field_matches_generic(self):
        m = ising_momentum(8, 1.0, ISING_RAMP)
        block = next(b for b in m.classifications["even"].blocks if b.kind == "C")
        from ctcost.propagation import Schedule

        s = Schedule(lambda t: m.block_hamiltonian(block, ISING_RAMP.value(t)), 0.0, 1.0)
        for t in (0.3, 0.7):
            np.testing.assert_allclose(ising_cd_block(m, block, t), cd_full(s, t), atol=1e-8)

    def test_rejects_odd_L(self):
        with pytest.raises(InvalidInputError):
            ising_momentum(5, 1.0, ISING_RAMP)


class TestSubBlocks:
    def test_even_sector_counts(self):
        cls = classify_subblocks(ising_momentum(8, 1.0, ISING_RAMP), "even")
        assert cls.counts() == {"A": 16, "B": 16, "C": 96}
        assert cls.n_blocks("A") == 1 and cls.n_blocks("C") == 24
        assert {b.size for b in cls.blocks if b.kind == "C"} == {4}
        assert all(b.size == 1 for b in cls.blocks if b.kind == "B")

    def test_example_block(self):
        # one type-C block: pairs 5pi/8 and 7pi/8 active, pi/8 and 3pi/8 singly occupied
        cls = classify_subblocks(ising_momentum(8, 1.0, ISING_RAMP), "even")
        want = tuple(sorted((5 * np.pi / 8, 7 * np.pi / 8)))
        hits = [b for b in cls.blocks if b.active == pytest.approx(want) and b.kind == "C"]
        assert len(hits) == 4  # each single can be k or -k

    @pytest.mark.parametrize("L", [4, 6, 8, 10])
    @pytest.mark.parametrize("sector", ["even", "odd"])
    def test_state_counting(self, L, sector):
        m = ising_momentum(L, 1.0, ISING_RAMP)
        cls = classify_subblocks(m, sector)
        assert sum(b.size for b in cls.blocks) == 2 ** (L - 1)
        for b in cls.blocks:
            assert b.size == 2 ** len(b.active)
        if sector == "even":
            assert [b.size for b in cls.blocks if b.kind == "A"] == [2 ** (L // 2)]

    def test_frozen_states_are_eigenstates(self):
        m = ising_momentum(8, 1.0, ISING_RAMP)
        for cls in m.classifications.values():
            for b in cls.blocks:
                if b.kind == "B":
                    for t in (0.1, 0.6):
                        H = m.block_hamiltonian(b, ISING_RAMP.value(t))
                        assert H.shape == (1, 1)

    def test_bad_sector(self):
        with pytest.raises(InvalidInputError):
            classify_subblocks(ising_momentum(4, 1.0, ISING_RAMP), "both")


class TestIsingCosts:
    grid = IntegratorConfig(100)

    def test_full_cost_matches_dense(self):
        from ctcost.counterdiabatic import cost_transitionless

        for L in (2, 4):
            a = transitionless_cost_ising(ising_momentum(L, 1.0, ISING_RAMP), grid=self.grid).total
            b = cost_transitionless(ising_dense(L, 1.0, ISING_RAMP), grid=self.grid).total
            assert a == pytest.approx(b, rel=1e-9)

    @pytest.mark.parametrize("beta", [0.0, 0.4, 2.0, np.inf])
    def test_selected_cost_matches_dense_two_spins(self, beta):
        from ctcost.counterdiabatic import cost_selected

        d = ising_dense(2, 1.0, ISING_RAMP)
        a = selected_cost_ising(ising_momentum(2, 1.0, ISING_RAMP), beta, grid=self.grid).total
        b = cost_selected(d, thermal_state(d.H(0), beta), grid=self.grid).total
        assert a == pytest.approx(b, rel=1e-9)

    def test_large_chain_ratio_bound(self):
        m = ising_momentum(8, 1.0, ISING_RAMP)
        r = selected_cost_ising(m, 0.0, grid=self.grid).total / transitionless_cost_ising(m, grid=self.grid).total
        assert r <= 0.5

    def test_negative_beta(self):
        with pytest.raises(InvalidInputError):
            selected_cost_ising(ising_momentum(4, 1.0, ISING_RAMP), -1.0)


class TestOscillator:
    ramp = Ramp("cosine", 1.0, 2.0, 0.0, 1.0)

    def test_spectrum_at_start(self):
        s = ho_model(1.0, self.ramp, 60)
        E = np.linalg.eigvalsh(s.H(0.0))
        np.testing.assert_allclose(E[:31], np.arange(31) + 0.5, atol=1e-8)

    def test_ground_state_width(self):
        s = ho_model(1.0, self.ramp, 60)
        for t in (0.0, 0.5, 1.0):
            v = eigendecompose(s.H(t)).eigenvectors[:, 0]
            x = np.sqrt(0.5) * (np.diag(np.sqrt(np.arange(1, 61)), 1) + np.diag(np.sqrt(np.arange(1, 61)), -1))
            mean, var = expectation_and_variance(QuantumState.pure(v), x)
            assert var == pytest.approx(1 / (2 * self.ramp.value(t)), rel=1e-10)

    @pytest.mark.parametrize("n_max,levels", [(60, 10), (80, 20)])
    def test_cd_field_low_levels(self, n_max, levels):
        # valid range of the fixed-basis truncation: the lowest instantaneous levels, whole ramp
        s = ho_model(1.0, self.ramp, n_max)
        for t in np.linspace(0.05, 0.95, 7):
            V = eigendecompose(s.H(t)).eigenvectors[:, :levels]
            D = V.conj().T @ (cd_full(s, t) - ho_cd_analytic(1.0, self.ramp, t, n_max)) @ V
            assert np.abs(D).max() <= 1e-10

    @pytest.mark.xfail(strict=True, reason="fixed w(t0) basis cannot resolve levels ~n_max/2 once w ~ 2")
    def test_cd_field_lower_half(self):
        s = ho_model(1.0, self.ramp, 60)
        for t in np.linspace(0.05, 0.95, 7):
            D = np.abs(cd_full(s, t) - ho_cd_analytic(1.0, self.ramp, t, 60))[:30, :30]
            assert D.max() <= 1e-6

    def test_exigency_analytic(self):
        assert ho_exigency_analytic(Ramp("constant", 1, 1), 0.4) == 0
        assert ho_exigency_analytic(self.ramp) == 1.0

    def test_truncation_stability(self):
        c = []
        for n_max in (60, 80):
            s = ho_model(1.0, self.ramp, n_max)
            c.append(exigency(s, adiabatic_trajectory(s, thermal_state(s.H(0), np.inf), IntegratorConfig(200))).total)
        assert abs(c[0] - c[1]) <= 1e-6 * c[1]

    def test_validation(self):
        with pytest.raises(InvalidInputError):
            ho_model(1.0, self.ramp, 10)
        with pytest.raises(InvalidInputError):
            ho_model(-1.0, self.ramp, 40)


class TestLMG:
    ramp = Ramp("cosine", 0.75, 1.25, 0.0, 1.0)

    def test_spin_algebra(self):
        Sx, Sy, Sz = collective_spin(10)
        np.testing.assert_allclose(Sx @ Sy - Sy @ Sx, 1j * Sz, atol=1e-12)
        S2 = Sx @ Sx + Sy @ Sy + Sz @ Sz
        np.testing.assert_allclose(S2, 5 * 6 * np.eye(11), atol=1e-12)

    def test_derivative(self):
        m = lmg_model(20, 0.0, 1.0, self.ramp)
        np.testing.assert_allclose(m.schedule.dH(0.3), -2 * self.ramp.rate(0.3) * m.Sz)

    @pytest.mark.parametrize("gamma", [0.0, 0.4])
    def test_ground_state_matches_dense(self, gamma):
        m = lmg_model(30, gamma, 1.0, self.ramp)
        for t in (0.0, 0.5, 0.9):
            E, v = lmg_ground_state(30, self.ramp.value(t), 1.0, gamma)
            H = m.schedule.H(t)
            assert E == pytest.approx(np.linalg.eigvalsh(H)[0], abs=1e-10)
            np.testing.assert_allclose(H @ v, E * v, atol=1e-9)

    def test_paramagnetic_limit(self):
        E, v = lmg_ground_state(40, 50.0, 1.0)
        Sz = collective_spin(40)[2]
        assert abs(v[0]) ** 2 == pytest.approx(1.0, abs=1e-3)
        assert expectation_and_variance(QuantumState.pure(v), Sz)[1] < 1e-2

    def test_exigency_forms_agree(self):
        m = lmg_model(100, 0.0, 1.0, self.ramp)
        for t in np.linspace(0.05, 0.95, 5):
            psi = QuantumState.pure(lmg_ground_state(100, self.ramp.value(t), 1.0)[1])
            assert lmg_exigency(m, psi, t) == pytest.approx(lmg_exigency_generic(m, psi, t), abs=1e-10)

    def test_exigency_zero_cases(self):
        m = lmg_model(10, 0.0, 1.0, self.ramp)
        psi = QuantumState.pure(lmg_ground_state(10, 1.0, 1.0)[1])
        assert lmg_exigency(m, psi, 0.0) == 0.0
        assert lmg_exigency(m, QuantumState.pure(np.eye(11)[3]), 0.5) == 0.0

    def test_mixed_state_falls_back(self):
        m = lmg_model(10, 0.0, 1.0, self.ramp)
        rho = thermal_state(m.schedule.H(0.5), 1.0)
        with pytest.warns(UserWarning):
            v = lmg_exigency(m, rho, 0.5)
        assert v == pytest.approx(lmg_exigency_generic(m, rho, 0.5))

    def test_hp_closed_form(self):
        assert lmg_hp_exigency(1.5, 1.0, 10) == pytest.approx(2 / np.sqrt(3), rel=1e-14)
        assert lmg_hp_exigency(1.5, -1.0, 10) == lmg_hp_exigency(1.5, 1.0, 400)

    def test_hp_broken_side_grows_with_N(self):
        assert lmg_hp_exigency(0.8, 1.0, 400) > lmg_hp_exigency(0.8, 1.0, 100)

    def test_hp_guards(self):
        with pytest.raises(InvalidInputError):
            lmg_hp_exigency(0.0, 1.0, 10)
        with pytest.warns(UserWarning):
            lmg_hp_exigency(1.0005, 1.0, 10)

    def test_hp_converges_to_exact(self):
        # finite-size deviation shrinks with N on the paramagnetic side
        g = 1.2
        err = []
        for N in (100, 400, 1600):
            psi = QuantumState.pure(lmg_ground_state(N, g, 1.0)[1])
            var = expectation_and_variance(psi, collective_spin(N)[2])[1]
            exact = 2 * np.sqrt(2) * np.sqrt(var)
            err.append(abs(exact - lmg_hp_exigency(g, 1.0, N)) / lmg_hp_exigency(g, 1.0, N))
        assert err[0] > err[1] > err[2]
        assert err[2] < 0.01
