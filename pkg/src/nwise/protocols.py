"""GHZ generation and selective-interaction cooling experiments.

Cooling parameters use spectroscopic units: ``omegas`` are spin level
splittings and ``gamma`` is the resonant Rabi frequency.  The Hamiltonian
therefore carries w_k/2 on Z_k and gamma/2 on the rotating N-wise couplings,
so that a plane with detuning D from the drive undergoes

    P(t) = gamma^2/(gamma^2 + D^2) * sin^2(sqrt(gamma^2 + D^2) t / 2)

and a pi-pulse at resonance lasts pi/gamma.  The GHZ protocol uses the
Hamiltonian coefficients directly: w_1(t) Z_1 + gamma_x X...X.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dynamics import (PropagatorOptions, SparsePropagator, detuning, evolve_density, iter_blocks,
                       iter_states, longitudinal_splitting, measure_and_project)
from .errors import UsageError
from .model import Constant, Cosine, CouplingSchedule, Driver, InitialState, ScenarioConfig, Sine
from .pauli import DENSE_CAP
from .subspace import SubspaceLabel, enumerate_labels, label_of_basis_state, label_table
from .transform import chain_unitary

MODES = ("odd-exact", "even-rwa")
TARGETS = ("half", "full")


@dataclass(frozen=True)
class GhzScenario:
    n: int
    gamma_x: float
    omega1: Driver = Constant(0.0)
    target: str = "full"
    t0: float = 0.0
    t1: float | None = None
    steps: int = 200

    def __post_init__(self):
        if self.n < 2:
            raise UsageError(f"need n >= 2, got {self.n}")
        if self.target not in TARGETS:
            raise UsageError(f"target must be one of {TARGETS}, got {self.target!r}")
        if self.t1 is None and self.gamma_x == 0:
            raise UsageError("gamma_x = 0 needs an explicit end time")

    @property
    def bare_duration(self) -> float:
        """Time for the target under gamma_x alone: pi/(2 gx) full, pi/(4 gx) half."""
        return math.pi / ((2 if self.target == "full" else 4) * abs(self.gamma_x))

    @property
    def end(self) -> float:
        return self.t0 + self.bare_duration if self.t1 is None else self.t1

    @property
    def target_value(self) -> float:
        return 1.0 if self.target == "full" else 0.5

    def to_config(self) -> ScenarioConfig:
        return ScenarioConfig(
            n=self.n,
            fields=(self.omega1,) + (Constant(0.0),) * (self.n - 1),
            couplings=CouplingSchedule(x=Constant(float(self.gamma_x))),
            t0=self.t0, t1=self.end, steps=self.steps,
            initial=InitialState("basis", 0),
        )


@dataclass
class GhzResult:
    scenario: GhzScenario
    times: np.ndarray
    p_minus: np.ndarray
    p_plus: np.ndarray
    ghz_fidelity: np.ndarray
    leakage: np.ndarray
    substeps: int
    oracle_gap: float | None = None

    @property
    def tau(self) -> np.ndarray:
        return self.scenario.gamma_x * self.times

    @property
    def final_p_minus(self) -> float:
        return float(self.p_minus[-1])

    def records(self):
        from .io import TimeSeriesRecord

        out = []
        for j, t in enumerate(self.times):
            out.append(TimeSeriesRecord(
                t=float(t), tau=float(self.tau[j]),
                observables={
                    "P_minus": float(self.p_minus[j]),
                    "P_plus": float(self.p_plus[j]),
                    "ghz_fidelity": float(self.ghz_fidelity[j]),
                    "leakage": float(self.leakage[j]),
                }))
        return out

    def summary(self) -> dict:
        out = {
            "target": self.scenario.target,
            "target_value": self.scenario.target_value,
            "final_P_minus": self.final_p_minus,
            "final_ghz_fidelity": float(self.ghz_fidelity[-1]),
            "max_leakage": float(np.max(np.abs(self.leakage))),
            "substeps": self.substeps,
        }
        if self.oracle_gap is not None:
            out["oracle_max_gap"] = self.oracle_gap
        return out


def ghz_fidelity(a: complex, b: complex) -> float:
    """Overlap with (|+..+> + e^{i phi}|-..->)/sqrt(2), maximized over phi."""
    return (abs(a) + abs(b)) ** 2 / 2


def run_ghz(s: GhzScenario, opts: PropagatorOptions = PropagatorOptions(), oracle: bool = False) -> GhzResult:
    cfg = s.to_config()
    psi0 = cfg.initial.vector(cfg.n)
    last = (1 << s.n) - 1
    ts, pm, pp, fid, leak = [], [], [], [], []
    finals = []
    for t, psi in iter_states(cfg, psi0, opts):
        a, b = psi[0], psi[last]
        ts.append(t)
        pp.append(abs(a) ** 2)
        pm.append(abs(b) ** 2)
        fid.append(ghz_fidelity(a, b))
        leak.append(float(np.vdot(psi, psi).real) - abs(a) ** 2 - abs(b) ** 2)
        finals.append(psi)
    from .model import interval_substeps

    sub = sum(interval_substeps(cfg, cfg.times, opts.steps_per_period))
    result = GhzResult(s, np.array(ts), np.array(pm), np.array(pp), np.array(fid), np.array(leak), sub)
    if oracle:
        if s.n > DENSE_CAP:
            raise UsageError(f"--oracle needs n <= {DENSE_CAP}")
        from .oracle import compare

        result.oracle_gap = compare(cfg, psi0, opts).max_gap
    return result


@dataclass(frozen=True)
class CoolingScenario:
    """Selective-interaction cooling run.

    ``weights`` give the initial populations of the states |+>_1|s> with s
    running over spins 2..n in binary counting order (bit 0 = |+>).  ``nu``
    defaults to the value resonant with the |+...+>/|-...-> plane and
    ``pulse`` to the pi-pulse for that plane.
    """

    n: int
    omegas: tuple[float, ...]
    gamma: float
    weights: tuple[float, ...]
    nu: float | None = None
    pulse: float | None = None
    mode: str = "odd-exact"
    steps: int = 200

    def __post_init__(self):
        object.__setattr__(self, "omegas", tuple(float(w) for w in self.omegas))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if self.mode not in MODES:
            raise UsageError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "odd-exact" and self.n % 2 == 0:
            raise UsageError(f"odd-exact cooling needs an odd number of spins, got n={self.n}")
        if self.mode == "even-rwa" and self.n % 2 == 1:
            raise UsageError(f"even-rwa cooling needs an even number of spins, got n={self.n}")
        if len(self.omegas) != self.n:
            raise UsageError(f"expected {self.n} splittings, got {len(self.omegas)}")
        if self.gamma < 0:
            raise UsageError("gamma must be >= 0")
        if self.pulse is None and self.gamma == 0:
            raise UsageError("gamma = 0 needs an explicit pulse duration")
        if self.pulse is not None and self.pulse < 0:
            raise UsageError("pulse duration must be >= 0")
        InitialState("mixture", weights=self.weights, anchored=True).validate(self.n)

    @property
    def resolved_nu(self) -> float:
        return resonant_nu(self.n, self.omegas, self.mode) if self.nu is None else float(self.nu)

    @property
    def rabi_rate(self) -> float:
        """Resonant Rabi frequency; the linear drive of even-rwa keeps half of it."""
        return self.gamma if self.mode == "odd-exact" else self.gamma / 2

    @property
    def pulse_duration(self) -> float:
        return math.pi / self.rabi_rate if self.pulse is None else float(self.pulse)

    @property
    def min_omega_ratio(self) -> float:
        return min(abs(w) for w in self.omegas) / self.gamma if self.gamma else math.inf

    def to_config(self) -> ScenarioConfig:
        nu = self.resolved_nu
        half = self.gamma / 2
        if self.mode == "odd-exact":
            couplings = CouplingSchedule(x=Cosine(half, nu, 0.0), y=Sine(half, nu, 0.0))
        else:
            couplings = CouplingSchedule(x=Cosine(half, nu, 0.0))
        return ScenarioConfig(
            n=self.n,
            fields=tuple(Constant(w / 2) for w in self.omegas),
            couplings=couplings,
            t0=0.0, t1=self.pulse_duration, steps=self.steps,
            initial=InitialState("mixture", weights=self.weights, anchored=True),
        )


def resonant_nu(n: int, omegas: Sequence[float], mode: str = "odd-exact") -> float:
    """Drive frequency resonant with the plane of |+...+> and |-...->.

    For odd n the rotation sense of that plane is (-1)**((n-1)/2), giving
    -sum(omegas) at n = 3 and +sum(omegas) at n = 5.
    """
    total = float(math.fsum(omegas))
    if mode == "odd-exact":
        return (-1) ** ((n - 1) // 2) * total
    return total


@dataclass(frozen=True)
class SelectivityEntry:
    label: SubspaceLabel
    delta: float
    predicted: float
    observed: float

    @property
    def margin(self) -> float:
        """1.1 * predicted ceiling minus the observed maximum transition."""
        return 1.1 * self.predicted - self.observed

    def to_dict(self) -> dict:
        return {"label": str(self.label), "delta": self.delta, "predicted_max": self.predicted,
                "observed_max": self.observed, "frozen_margin": self.margin}


def _ceiling(rate: float, delta: float) -> float:
    d = rate ** 2 + delta ** 2
    return float(rate ** 2 / d) if d > 0 else 0.0


def _label_deltas(s: CoolingScenario) -> np.ndarray:
    nu = s.resolved_nu
    labels = enumerate_labels(s.n)
    if s.mode == "odd-exact":
        return np.array([detuning(l, s.omegas, nu) for l in labels])
    return np.array([longitudinal_splitting(l, s.omegas) - nu for l in labels])


def _sweep(s: CoolingScenario, opts: PropagatorOptions):
    """Run all planes through the pulse; returns (entries, final blocks, substeps)."""
    cfg = s.to_config()
    table = label_table(s.n)
    peak = np.zeros(len(table))
    count = [0]

    def watch(t, u):
        np.maximum(peak, np.abs(u[:, 1, 0]) ** 2, out=peak)
        count[0] += 1

    *_, (_, blocks) = iter_blocks(cfg, opts, cfg.times, table, on_substep=watch)
    deltas = _label_deltas(s)
    entries = [SelectivityEntry(l, float(d), _ceiling(s.rabi_rate, d), float(p))
               for l, d, p in zip(enumerate_labels(s.n), deltas, peak)]
    return entries, blocks, count[0]


def selectivity_map(s: CoolingScenario, opts: PropagatorOptions = PropagatorOptions()) -> list[SelectivityEntry]:
    if s.mode != "odd-exact":
        raise UsageError("selectivity_map is defined for odd-exact mode")
    return _sweep(s, opts)[0]


@dataclass
class CoolingReport:
    scenario: CoolingScenario
    success_probability: float
    conditional_fidelity: float | None
    entries: list[SelectivityEntry]
    resonant_labels: list[SubspaceLabel]
    substeps: int
    wall_clock: float = 0.0
    oracle: dict | None = None
    populations: dict[str, float] = field(default_factory=dict)

    @property
    def intended_label(self) -> SubspaceLabel:
        return SubspaceLabel((1,) * (self.scenario.n - 1))

    @property
    def resonance_mismatch(self) -> bool:
        return self.resonant_labels != [self.intended_label]

    @property
    def max_leakage(self) -> float:
        others = [e.observed for e in self.entries if e.label != self.intended_label]
        return max(others) if others else 0.0

    @property
    def min_frozen_margin(self) -> float:
        others = [e.margin for e in self.entries if e.label != self.intended_label]
        return min(others) if others else math.inf

    def to_dict(self, timing: bool = False) -> dict:
        s = self.scenario
        out = {
            "mode": s.mode,
            "n": s.n,
            "nu": s.resolved_nu,
            "pulse_duration": s.pulse_duration,
            "rabi_rate": s.rabi_rate,
            "omega_over_gamma_min": s.min_omega_ratio,
            "success_probability": self.success_probability,
            "conditional_fidelity": self.conditional_fidelity,
            "outcome_possible": self.conditional_fidelity is not None,
            "intended_label": str(self.intended_label),
            "resonant_labels": [str(l) for l in self.resonant_labels],
            "resonance_mismatch": self.resonance_mismatch,
            "max_leakage": self.max_leakage,
            "min_frozen_margin": self.min_frozen_margin,
            "subspaces": [e.to_dict() for e in self.entries],
            "initial_state_planes": self.populations,
            "substeps": self.substeps,
        }
        if self.oracle is not None:
            out["oracle"] = self.oracle
        if timing:
            out["wall_clock_seconds"] = self.wall_clock
        return out


def run_cooling(s: CoolingScenario, opts: PropagatorOptions = PropagatorOptions(),
                oracle: bool = False) -> CoolingReport:
    start = time.perf_counter()
    cfg = s.to_config()
    entries, blocks, substeps = _sweep(s, opts)
    prop = SparsePropagator(s.n, blocks, chain_unitary(s.n))
    rho0 = cfg.initial.density(s.n)
    rho = evolve_density(rho0, prop)
    p, post = measure_and_project(rho, 1, -1)
    last = (1 << s.n) - 1
    fid = None if post is None else float(post[last, last].real)

    scale = max(1.0, max(abs(w) for w in s.omegas), abs(s.resolved_nu))
    resonant = [e.label for e in entries if abs(e.delta) <= 1e-9 * scale]
    planes = {}
    for w, i in cfg.initial.components(s.n):
        label, _ = label_of_basis_state(i, s.n)
        planes[format(i, f"0{s.n}b")] = str(label)

    report = CoolingReport(s, p, fid, entries, resonant, substeps, populations=planes)
    if oracle:
        report.oracle = cooling_oracle(s, opts)
    report.wall_clock = time.perf_counter() - start
    return report


def cooling_oracle(s: CoolingScenario, opts: PropagatorOptions = PropagatorOptions()) -> dict:
    """Success probability and conditional fidelity from the dense oracle."""
    from .oracle import DENSITY_CAP, dense_evolve

    if s.n > DENSITY_CAP:
        raise UsageError(f"dense density-matrix oracle needs n <= {DENSITY_CAP}")
    cfg = s.to_config()
    rho = dense_evolve(cfg, cfg.initial.density(s.n), opts, [cfg.t0, cfg.t1]).final
    p, post = measure_and_project(rho, 1, -1)
    last = (1 << s.n) - 1
    return {
        "success_probability": p,
        "conditional_fidelity": None if post is None else float(post[last, last].real),
    }


def cooling_records(s: CoolingScenario, opts: PropagatorOptions = PropagatorOptions()):
    """Ancilla and target populations on the pulse grid."""
    from .io import TimeSeriesRecord

    cfg = s.to_config()
    chain = chain_unitary(s.n)
    rho0 = cfg.initial.density(s.n)
    last = (1 << s.n) - 1
    minus = np.flatnonzero(np.arange(1 << s.n) >> (s.n - 1))
    out = []
    for t, blocks in iter_blocks(cfg, opts):
        rho = evolve_density(rho0, SparsePropagator(s.n, blocks, chain))
        diag = np.real(np.diag(rho))
        out.append(TimeSeriesRecord(t=t, observables={
            "P_ancilla_minus": float(diag[minus].sum()),
            "P_all_minus": float(diag[last]),
        }))
    return out
