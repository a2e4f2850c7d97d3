import math

import numpy as np
import pytest

from nwise.errors import UsageError
from nwise.model import (Constant, Cosine, CouplingSchedule, DomainError, InitialState, LinearRamp,
                         ScenarioConfig, SechPulse, Sine, Tabulated, build_full_hamiltonian, driver_to_dict,
                         frequency_scale, interval_substeps)
from nwise.oracle import dense_hamiltonian

from oracles import hamiltonian


class TestDrivers:
    @pytest.mark.parametrize("d,t,expect", [
        (Constant(2.5), 7.0, 2.5),
        (Cosine(2.0, 3.0, 0.5), 0.4, 2.0 * math.cos(1.7)),
        (Sine(2.0, 3.0, 0.5), 0.4, 2.0 * math.sin(1.7)),
        (LinearRamp(-1.5, 0.25), 2.0, -2.75),
        (SechPulse(1.0, 0.5, 1.0), 2.0, 1 / math.cosh(2.0)),
        (Tabulated((0.0, 1.0, 3.0), (0.0, 2.0, -2.0)), 2.0, 0.0),
    ])
    def test_values(self, d, t, expect):
        assert d(t) == pytest.approx(expect, abs=1e-15)

    def test_vectorized(self):
        ts = np.linspace(0, 1, 5)
        for d in (Constant(1.0), Cosine(1, 2), Tabulated((0, 1), (0, 1))):
            assert np.shape(d(ts)) == (5,)

    def test_tabulated_rejects_out_of_range(self):
        with pytest.raises(DomainError):
            Tabulated((0.0, 1.0), (0.0, 1.0))(1.5)

    def test_tabulated_needs_increasing_times(self):
        with pytest.raises(UsageError):
            Tabulated((0.0, 0.0), (1.0, 2.0))

    def test_sech_width_positive(self):
        with pytest.raises(UsageError):
            SechPulse(1.0, 0.0)

    def test_to_dict_skips_kind_tag(self):
        assert driver_to_dict(Cosine(1.0, 2.0)) == {"kind": "cosine", "amplitude": 1.0, "frequency": 2.0,
                                                    "phase": 0.0}


class TestInitialState:
    def test_mixture_must_be_normalized(self):
        with pytest.raises(UsageError, match="sum to 1"):
            InitialState("mixture", weights=(0.5, 0.4)).validate(2)

    def test_mixture_length(self):
        with pytest.raises(UsageError):
            InitialState("mixture", weights=(1.0,)).validate(3)

    def test_anchored_density_keeps_first_spin_up(self):
        rho = InitialState("mixture", weights=(0.4, 0.3, 0.2, 0.1)).density(3)
        assert np.allclose(np.diag(rho).real[:4], [0.4, 0.3, 0.2, 0.1])
        assert np.allclose(np.diag(rho).real[4:], 0)

    def test_ghz_vector(self):
        psi = InitialState("ghz", phase=math.pi).vector(3)
        assert psi[0] == pytest.approx(1 / math.sqrt(2)) and psi[7] == pytest.approx(-1 / math.sqrt(2))

    def test_basis_range(self):
        with pytest.raises(UsageError):
            InitialState("basis", 8).validate(3)


class TestScenario:
    def test_field_count(self):
        with pytest.raises(UsageError):
            ScenarioConfig(3, (Constant(1.0),) * 2)

    def test_time_order(self):
        with pytest.raises(UsageError):
            ScenarioConfig(2, (Constant(1.0),) * 2, t0=1.0, t1=0.0)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_hamiltonian_matches_kron(self, n, rng):
        w = rng.normal(size=n)
        g = rng.normal(size=3)
        cfg = ScenarioConfig(n, tuple(Constant(x) for x in w), CouplingSchedule(*(Constant(x) for x in g)))
        assert len(build_full_hamiltonian(cfg, 0.0)) == n + 3
        np.testing.assert_allclose(dense_hamiltonian(cfg, 0.0), hamiltonian(w, *g), atol=1e-14)

    def test_frequency_scale_tracks_drive_rate(self):
        cfg = ScenarioConfig(2, (Constant(0.0),) * 2, CouplingSchedule(x=Cosine(1e-3, 40.0)))
        assert frequency_scale(cfg, 0.0, 1.0) == pytest.approx(40.0)

    def test_substeps_scale_with_resolution(self):
        cfg = ScenarioConfig(2, (Constant(1.0), Constant(0.5)))
        coarse = interval_substeps(cfg, cfg.times, 32)
        fine = interval_substeps(cfg, cfg.times, 64)
        assert sum(fine) >= 2 * sum(coarse) - len(coarse)
