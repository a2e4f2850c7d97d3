"""Scenario description: drivers, field/coupling schedules and the Hamiltonian.

Units use hbar = 1.  The Hamiltonian is

    H(t) = sum_k w_k(t) Z_k + gx(t) X...X + gy(t) Y...Y + gz(t) Z...Z
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields as dc_fields
from typing import ClassVar, Sequence

import numpy as np

from .errors import UsageError
from .pauli import OperatorSum, PauliString


class DomainError(UsageError):
    """A tabulated driver was evaluated outside its grid."""


@dataclass(frozen=True)
class Constant:
    value: float
    kind: ClassVar[str] = "constant"

    def __call__(self, t):
        return self.value + 0.0 * np.asarray(t, dtype=float) if np.ndim(t) else float(self.value)

    @property
    def rate(self) -> float:
        return 0.0


@dataclass(frozen=True)
class Cosine:
    amplitude: float
    frequency: float
    phase: float = 0.0
    kind: ClassVar[str] = "cosine"

    def __call__(self, t):
        return self.amplitude * np.cos(self.frequency * np.asarray(t, dtype=float) + self.phase)

    @property
    def rate(self) -> float:
        return abs(self.frequency)


@dataclass(frozen=True)
class Sine:
    amplitude: float
    frequency: float
    phase: float = 0.0
    kind: ClassVar[str] = "sine"

    def __call__(self, t):
        return self.amplitude * np.sin(self.frequency * np.asarray(t, dtype=float) + self.phase)

    @property
    def rate(self) -> float:
        return abs(self.frequency)


@dataclass(frozen=True)
class LinearRamp:
    slope: float
    offset: float = 0.0
    kind: ClassVar[str] = "linear-ramp"

    def __call__(self, t):
        return self.slope * np.asarray(t, dtype=float) + self.offset

    @property
    def rate(self) -> float:
        return 0.0


@dataclass(frozen=True)
class SechPulse:
    amplitude: float
    width: float
    center: float = 0.0
    kind: ClassVar[str] = "sech-pulse"

    def __post_init__(self):
        if not self.width > 0:
            raise UsageError(f"sech-pulse width must be > 0, got {self.width}")

    def __call__(self, t):
        x = (np.asarray(t, dtype=float) - self.center) / self.width
        return self.amplitude / np.cosh(x)

    @property
    def rate(self) -> float:
        return 1.0 / self.width


@dataclass(frozen=True)
class Tabulated:
    """Piecewise-linear interpolation through (time, value) nodes."""

    times: tuple[float, ...]
    values: tuple[float, ...]
    kind: ClassVar[str] = "tabulated"

    def __post_init__(self):
        times = tuple(float(x) for x in self.times)
        values = tuple(float(x) for x in self.values)
        if len(times) != len(values) or len(times) < 2:
            raise UsageError("tabulated driver needs >= 2 nodes with matching values")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise UsageError("tabulated times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __call__(self, t):
        ta = np.asarray(t, dtype=float)
        lo, hi = self.times[0], self.times[-1]
        span = hi - lo
        slack = 1e-12 * max(span, 1.0)
        if np.any(ta < lo - slack) or np.any(ta > hi + slack):
            raise DomainError(f"t={t} outside tabulated range [{lo}, {hi}]")
        out = np.interp(ta, self.times, self.values)
        return out if np.ndim(t) else float(out)

    @property
    def rate(self) -> float:
        return 0.0


Driver = Constant | Cosine | Sine | LinearRamp | SechPulse | Tabulated

DRIVER_KINDS = {cls.kind: cls for cls in (Constant, Cosine, Sine, LinearRamp, SechPulse, Tabulated)}


def evaluate_driver(d: Driver, t: float) -> float:
    return float(d(t))


def driver_to_dict(d: Driver) -> dict:
    if isinstance(d, Tabulated):
        return {"kind": d.kind, "times": list(d.times), "values": list(d.values)}
    out = {"kind": d.kind}
    for f in dc_fields(d):
        out[f.name] = float(getattr(d, f.name))
    return out


@dataclass(frozen=True)
class CouplingSchedule:
    x: Driver = Constant(0.0)
    y: Driver = Constant(0.0)
    z: Driver = Constant(0.0)


@dataclass(frozen=True)
class InitialState:
    """Initial-state descriptor.

    kind 'basis': computational basis state ``index``.
    kind 'ghz': (|+...+> + e^{i phase}|-...->)/sqrt(2).
    kind 'mixture': diagonal weights.  With ``anchored`` the weights run over
    the 2**(n-1) states of spins 2..n with spin 1 fixed in |+>, in binary
    counting order; otherwise over all 2**n basis states.
    """

    kind: str = "basis"
    index: int = 0
    phase: float = 0.0
    weights: tuple[float, ...] = ()
    anchored: bool = True

    def validate(self, n: int):
        dim = 1 << n
        if self.kind == "basis":
            if not 0 <= self.index < dim:
                raise UsageError(f"basis index {self.index} outside 0..{dim - 1}")
        elif self.kind == "mixture":
            expect = dim // 2 if self.anchored else dim
            if len(self.weights) != expect:
                raise UsageError(f"mixture needs {expect} weights for n={n}, got {len(self.weights)}")
            if any(w < 0 for w in self.weights):
                raise UsageError("mixture weights must be nonnegative")
            total = math.fsum(self.weights)
            if abs(total - 1.0) > 1e-12:
                raise UsageError(f"mixture weights must sum to 1 (got {total!r})")
        elif self.kind != "ghz":
            raise UsageError(f"unknown initial-state kind {self.kind!r}")

    @property
    def is_pure(self) -> bool:
        return self.kind != "mixture"

    def components(self, n: int) -> list[tuple[float, int]]:
        """(weight, basis index) pairs of a diagonal mixture, zero weights skipped."""
        if self.kind == "basis":
            return [(1.0, self.index)]
        if self.kind != "mixture":
            raise UsageError("components() is defined for basis states and mixtures")
        return [(float(w), i) for i, w in enumerate(self.weights) if w > 0]

    def vector(self, n: int) -> np.ndarray:
        dim = 1 << n
        psi = np.zeros(dim, dtype=complex)
        if self.kind == "basis":
            psi[self.index] = 1.0
        elif self.kind == "ghz":
            psi[0] = 1 / math.sqrt(2)
            psi[dim - 1] = np.exp(1j * self.phase) / math.sqrt(2)
        else:
            raise UsageError("a mixture has no state vector")
        return psi

    def density(self, n: int) -> np.ndarray:
        if self.is_pure:
            psi = self.vector(n)
            return np.outer(psi, psi.conj())
        rho = np.zeros((1 << n, 1 << n), dtype=complex)
        for w, i in self.components(n):
            rho[i, i] = w
        return rho

    def to_dict(self) -> dict:
        if self.kind == "basis":
            return {"kind": "basis", "index": int(self.index)}
        if self.kind == "ghz":
            return {"kind": "ghz", "phase": float(self.phase)}
        return {"kind": "mixture", "weights": [float(w) for w in self.weights], "anchored": bool(self.anchored)}


@dataclass(frozen=True)
class ScenarioConfig:
    n: int
    fields: tuple[Driver, ...]
    couplings: CouplingSchedule = field(default_factory=CouplingSchedule)
    t0: float = 0.0
    t1: float = 1.0
    steps: int = 100
    initial: InitialState = field(default_factory=InitialState)

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(self.fields))
        if self.n < 2:
            raise UsageError(f"need n >= 2 spins, got {self.n}")
        if len(self.fields) != self.n:
            raise UsageError(f"expected {self.n} field drivers, got {len(self.fields)}")
        if self.steps < 1:
            raise UsageError("step count must be >= 1")
        if self.t1 < self.t0:
            raise UsageError("t1 must be >= t0")
        self.initial.validate(self.n)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.steps + 1)

    def to_dict(self) -> dict:
        return {
            "system": {"n": self.n},
            "fields": [driver_to_dict(d) for d in self.fields],
            "couplings": {k: driver_to_dict(getattr(self.couplings, k)) for k in "xyz"},
            "time": {"t0": float(self.t0), "t1": float(self.t1), "steps": int(self.steps)},
            "initial": self.initial.to_dict(),
        }


def field_values(fields: Sequence[Driver], t) -> np.ndarray:
    return np.array([d(t) for d in fields], dtype=float)


def coupling_values(c: CouplingSchedule, t) -> tuple[float, float, float]:
    return float(c.x(t)), float(c.y(t)), float(c.z(t))


def build_full_hamiltonian(cfg: ScenarioConfig, t: float) -> OperatorSum:
    n = cfg.n
    w = field_values(cfg.fields, t)
    gx, gy, gz = coupling_values(cfg.couplings, t)
    terms = [(w[k], PauliString.single(n, k + 1, "Z")) for k in range(n)]
    terms += [
        (gx, PauliString.uniform(n, "X")),
        (gy, PauliString.uniform(n, "Y")),
        (gz, PauliString.uniform(n, "Z")),
    ]
    return OperatorSum(n, terms)


def frequency_scale(cfg: ScenarioConfig, t0: float, t1: float, samples: int = 65) -> float:
    """Fastest angular frequency of the problem on [t0, t1].

    Twice the bound sum|w_k| + |gx| + |gy| + |gz| on the energy scale, or the
    fastest driver modulation rate, whichever is larger.
    """
    ts = np.linspace(t0, t1, samples) if t1 > t0 else np.array([t0])
    drivers = list(cfg.fields) + [cfg.couplings.x, cfg.couplings.y, cfg.couplings.z]
    for d in drivers:
        if isinstance(d, Tabulated):
            inner = [x for x in d.times if t0 < x < t1]
            ts = np.union1d(ts, inner)
    bound = np.zeros_like(ts)
    for d in drivers:
        bound += np.abs(d(ts))
    rate = max(d.rate for d in drivers)
    return max(2.0 * float(bound.max()), rate)


def substep_count(cfg: ScenarioConfig, t0: float, t1: float, steps_per_period: int) -> int:
    """Integrator substeps needed on [t0, t1] at the given period resolution."""
    if t1 <= t0:
        return 1
    f = frequency_scale(cfg, t0, t1)
    return max(1, math.ceil(steps_per_period * (t1 - t0) * f / (2 * math.pi) - 1e-9))


def interval_substeps(cfg: ScenarioConfig, times: Sequence[float], steps_per_period: int) -> list[int]:
    """Substep count for each interval of an output grid.

    The frequency scale is taken once over the whole grid so that both
    integrators see the same discretization for the same options.
    """
    times = np.asarray(times, dtype=float)
    if times.size < 2:
        return []
    f = frequency_scale(cfg, float(times[0]), float(times[-1]))
    out = []
    for a, b in zip(times[:-1], times[1:]):
        out.append(max(1, math.ceil(steps_per_period * (b - a) * f / (2 * math.pi) - 1e-9)))
    return out
