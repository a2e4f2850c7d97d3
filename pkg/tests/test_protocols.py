import math

import numpy as np
import pytest

from nwise.dynamics import PropagatorOptions
from nwise.errors import UsageError
from nwise.model import LinearRamp
from nwise.protocols import (CoolingScenario, GhzScenario, cooling_records, ghz_fidelity, resonant_nu,
                             run_cooling, run_ghz, selectivity_map)

from oracles import Z, evolve_constant, evolve_piecewise, hamiltonian, kron_all, landau_zener, site_op

W3 = (5.0, 4.0, 3.0)
P3 = (0.4, 0.3, 0.2, 0.1)


def cooling_hamiltonian(s: CoolingScenario):
    """Kronecker-built H(t) for a cooling scenario in spectroscopic units."""
    nu = s.resolved_nu
    base = hamiltonian([w / 2 for w in s.omegas], 0, 0, 0)
    xs = kron_all([np.array([[0, 1], [1, 0]], complex)] * s.n)
    ys = kron_all([np.array([[0, -1j], [1j, 0]], complex)] * s.n)
    if s.mode == "odd-exact":
        return lambda t: base + s.gamma / 2 * (math.cos(nu * t) * xs + math.sin(nu * t) * ys)
    return lambda t: base + s.gamma / 2 * math.cos(nu * t) * xs


def reference_cooling(s: CoolingScenario, steps=6000):
    """(success probability, conditional fidelity) from explicit evolution of each mixture component."""
    h = cooling_hamiltonian(s)
    dim = 1 << s.n
    minus1 = np.arange(dim) >= dim // 2
    p = 0.0
    target = 0.0
    for i, w in enumerate(s.weights):
        if w == 0:
            continue
        psi = evolve_piecewise(h, np.eye(dim, dtype=complex)[i], 0.0, s.pulse_duration, steps)
        pop = np.abs(psi) ** 2
        p += w * pop[minus1].sum()
        target += w * pop[-1]
    return p, target / p


class TestGhz:
    @pytest.mark.parametrize("n", [3, 4, 5])
    @pytest.mark.parametrize("target,value", [("full", 1.0), ("half", 0.5)])
    def test_endpoints(self, n, target, value):
        res = run_ghz(GhzScenario(n, 0.8, target=target))
        assert res.final_p_minus == pytest.approx(value, abs=1e-9)
        assert np.abs(res.leakage).max() < 1e-9

    def test_curve_matches_closed_form(self):
        res = run_ghz(GhzScenario(4, 1.3, steps=50))
        np.testing.assert_allclose(res.p_minus, np.sin(1.3 * res.times) ** 2, atol=1e-10)
        np.testing.assert_allclose(res.tau, 1.3 * res.times)

    def test_half_transfer_is_balanced_ghz(self):
        res = run_ghz(GhzScenario(3, 1.0, target="half"))
        assert res.ghz_fidelity[-1] == pytest.approx(1.0, abs=1e-9)

    def test_detuned_first_spin(self):
        s = GhzScenario(3, 0.6, omega1=LinearRamp(0.0, 0.9), t1=2.0, steps=4)
        res = run_ghz(s)
        psi = evolve_constant(0.9 * site_op(3, 1, Z) + 0.6 * kron_all([np.array([[0, 1], [1, 0]])] * 3),
                              np.eye(8, dtype=complex)[0], 2.0)
        assert res.final_p_minus == pytest.approx(abs(psi[-1]) ** 2, abs=1e-9)

    def test_landau_zener(self):
        alpha, T = 2.0, 40.0  # alpha T / gamma = 80
        s = GhzScenario(3, 1.0, omega1=LinearRamp(alpha), t0=-T, t1=T, steps=40)
        res = run_ghz(s, PropagatorOptions(steps_per_period=32))
        assert res.final_p_minus == pytest.approx(landau_zener(1.0, alpha), rel=0.02)

    def test_fidelity_helper(self):
        assert ghz_fidelity(1 / math.sqrt(2), -1j / math.sqrt(2)) == pytest.approx(1.0)

    def test_zero_coupling_needs_duration(self):
        with pytest.raises(UsageError):
            GhzScenario(3, 0.0)

    def test_oracle_gap(self):
        assert run_ghz(GhzScenario(3, 1.0, steps=10), oracle=True).oracle_gap < 1e-10


class TestCoolingSetup:
    def test_parity(self):
        with pytest.raises(UsageError, match="odd"):
            CoolingScenario(4, (1, 2, 3, 4), 1.0, (1,) + (0,) * 7)
        with pytest.raises(UsageError, match="even"):
            CoolingScenario(3, W3, 1.0, P3, mode="even-rwa")

    def test_weights_validated(self):
        with pytest.raises(UsageError):
            CoolingScenario(3, W3, 1.0, (0.4, 0.3, 0.2))

    @pytest.mark.parametrize("n,expect", [(3, -12.0), (5, 28.0), (7, -33.0)])
    def test_resonant_frequency_sign(self, n, expect):
        omegas = {3: W3, 5: (9, 7, 5, 4, 3), 7: (9, 7, 5, 4, 3, 2, 3)}[n]
        assert resonant_nu(n, omegas) == expect

    def test_pulse_lengths(self):
        assert CoolingScenario(3, W3, 2.0, P3).pulse_duration == pytest.approx(math.pi / 2)
        even = CoolingScenario(4, (50, 7, 6, 5), 2.0, (1,) + (0,) * 7, mode="even-rwa")
        assert even.pulse_duration == pytest.approx(math.pi)
        assert even.resolved_nu == 68.0


class TestCooling:
    def test_three_spin_against_reference(self):
        s = CoolingScenario(3, W3, 1.0, P3)
        rep = run_cooling(s)
        p, fid = reference_cooling(s)
        assert rep.success_probability == pytest.approx(p, abs=1e-6)
        assert rep.conditional_fidelity == pytest.approx(fid, abs=1e-6)
        assert rep.resonant_labels == [rep.intended_label] and not rep.resonance_mismatch

    def test_even_rwa_against_reference(self):
        s = CoolingScenario(4, (50, 7, 6, 5), 1.0, (0.4,) + (0.6 / 7,) * 7, mode="even-rwa")
        rep = run_cooling(s)
        p, fid = reference_cooling(s, steps=40000)
        assert rep.success_probability == pytest.approx(p, abs=1e-6)
        assert rep.conditional_fidelity == pytest.approx(fid, abs=1e-6)

    def test_no_coupling_no_evolution(self):
        rep = run_cooling(CoolingScenario(5, (9, 7, 5, 4, 3), 0.0, (1 / 16,) * 16, pulse=2.0))
        assert rep.success_probability == 0.0 and rep.conditional_fidelity is None

    def test_mismatch_flagged(self):
        # plane "-+" has splitting -2 and counter-rotates, so nu = 2 selects it instead
        rep = run_cooling(CoolingScenario(3, W3, 1.0, P3, nu=2.0))
        assert [str(l) for l in rep.resonant_labels] == ["-+"]
        assert rep.resonance_mismatch

    def test_evolved_state_pattern(self):
        s = CoolingScenario(3, W3, 1.0, P3)
        rep = run_cooling(s)
        recs = cooling_records(s)
        assert recs[0].observables["P_ancilla_minus"] == 0.0
        assert recs[-1].observables["P_ancilla_minus"] == pytest.approx(rep.success_probability, abs=1e-12)
        assert recs[-1].observables["P_all_minus"] == pytest.approx(0.4, abs=1e-4)

    def test_serializable(self):
        d = run_cooling(CoolingScenario(3, W3, 1.0, P3)).to_dict()
        assert "wall_clock_seconds" not in d
        assert all(isinstance(v, (int, float, str, bool, list, dict, type(None))) for v in d.values())


class TestSelectivity:
    def test_single_resonance_and_bounds(self):
        entries = selectivity_map(CoolingScenario(3, W3, 1.0, P3))
        zero = [e for e in entries if e.delta == 0]
        assert len(zero) == 1 and str(zero[0].label) == "++" and zero[0].predicted == 1.0
        for e in entries:
            if e.delta:
                assert e.predicted <= 1 / (1 + 36)
                assert e.observed <= 1.1 * e.predicted

    def test_detuned_drive(self):
        delta = 0.5
        s = CoolingScenario(3, W3, 1.0, P3, nu=-12.0 - delta, pulse=4 * math.pi)
        sel = next(e for e in selectivity_map(s) if str(e.label) == "++")
        assert sel.predicted == pytest.approx(1 / (1 + delta ** 2))
        assert sel.observed == pytest.approx(sel.predicted, rel=1e-3)

    def test_leakage_shrinks_with_freezing_ratio(self):
        leak = []
        for r in (3, 6, 12):
            s = CoolingScenario(3, tuple(r * x / 3 for x in W3), 1.0, P3)
            leak.append(max(e.observed for e in selectivity_map(s) if e.delta))
        assert leak[0] > leak[1] > leak[2]

    def test_even_mode_rejected(self):
        with pytest.raises(UsageError):
            selectivity_map(CoolingScenario(4, (50, 7, 6, 5), 1.0, (1,) + (0,) * 7, mode="even-rwa"))
