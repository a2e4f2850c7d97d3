"""Seeded random scenarios for verification runs."""
from __future__ import annotations

import numpy as np

from .model import (DRIVER_KINDS, Constant, Cosine, CouplingSchedule, InitialState, LinearRamp, ScenarioConfig,
                    SechPulse, Sine, Tabulated)


def random_driver(rng: np.random.Generator, kind: str, t0: float, t1: float):
    a = float(rng.uniform(-1.5, 1.5))
    if kind == "constant":
        return Constant(a)
    if kind == "cosine":
        return Cosine(a, float(rng.uniform(0.5, 4.0)), float(rng.uniform(0, 2 * np.pi)))
    if kind == "sine":
        return Sine(a, float(rng.uniform(0.5, 4.0)), float(rng.uniform(0, 2 * np.pi)))
    if kind == "linear-ramp":
        return LinearRamp(float(rng.uniform(-2, 2)), a)
    if kind == "sech-pulse":
        return SechPulse(a, float(rng.uniform(0.2, 1.0)), float(rng.uniform(t0, t1)))
    if kind == "tabulated":
        inner = np.sort(rng.uniform(t0, t1, 3))
        times = np.concatenate([[t0], inner, [t1]])
        times = np.unique(times)
        return Tabulated(tuple(times), tuple(rng.uniform(-1.5, 1.5, len(times))))
    raise ValueError(f"unknown driver kind {kind!r}")


def random_static_config(n: int, rng: np.random.Generator) -> ScenarioConfig:
    """Constant fields and couplings drawn uniformly from [-2, 2]."""
    w = rng.uniform(-2, 2, n)
    g = rng.uniform(-2, 2, 3)
    return ScenarioConfig(n, tuple(Constant(float(x)) for x in w),
                          CouplingSchedule(*(Constant(float(x)) for x in g)))


def random_dynamic_config(n: int, rng: np.random.Generator, steps: int = 8) -> ScenarioConfig:
    """Time-dependent scenario cycling through every driver kind.

    The first driver kind is chosen at random and the rest follow in order,
    so that any n + 3 >= 6 drivers cover all kinds.  The initial state is a
    random basis state.
    """
    t0 = 0.0
    t1 = float(rng.uniform(0.5, 1.5))
    kinds = list(DRIVER_KINDS)
    start = int(rng.integers(len(kinds)))
    order = [kinds[(start + i) % len(kinds)] for i in range(n + 3)]
    drivers = [random_driver(rng, k, t0, t1) for k in order]
    initial = InitialState("basis", int(rng.integers(1 << n)))
    return ScenarioConfig(n, tuple(drivers[:n]), CouplingSchedule(*drivers[n:]), t0, t1, steps, initial)
