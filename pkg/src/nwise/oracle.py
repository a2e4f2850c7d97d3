"""Brute-force dense reference for the decomposed engine.

Integrates the full 2**n-dimensional Schroedinger (or von Neumann) equation
directly from the Pauli-sum Hamiltonian.  Nothing here goes through the
subspace or dynamics modules; only the scenario types and the basis
convention are shared.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Sequence

import numpy as np

from .dynamics import PropagatorOptions, iter_states
from .errors import CapacityError, IntegrationError
from .model import ScenarioConfig, build_full_hamiltonian, interval_substeps
from .pauli import DENSE_CAP, PauliString, string_to_dense
from .transform import chain_unitary

DENSITY_CAP = 8
SUB_RESOLUTION = 32


@lru_cache(maxsize=256)
def _unit_matrix(letters: tuple[str, ...]) -> np.ndarray:
    m = string_to_dense(PauliString(letters))
    m.setflags(write=False)
    return m


def dense_hamiltonian(cfg: ScenarioConfig, t: float) -> np.ndarray:
    if cfg.n > DENSE_CAP:
        raise CapacityError(f"dense oracle limited to n <= {DENSE_CAP}, got {cfg.n}")
    dim = 1 << cfg.n
    h = np.zeros((dim, dim), dtype=complex)
    for c, s in build_full_hamiltonian(cfg, t).terms:
        h += c * _unit_matrix(s.letters)
    return h


@dataclass
class DenseTrajectory:
    times: np.ndarray
    states: list[np.ndarray] = field(repr=False)
    substeps: int = 0
    max_drift: float = 0.0

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def expm_apply(h: np.ndarray, dt: float, x: np.ndarray) -> np.ndarray:
    """exp(-i h dt) @ x by a Taylor series summed to machine precision.

    Steps are short (|h| dt <= pi / steps_per_period), so the series converges
    in a handful of dense products and never needs the full exponential.
    """
    out = np.array(x, dtype=complex)
    term = out
    scale = np.abs(x).max() or 1.0
    for k in range(1, 200):
        term = (-1j * dt / k) * (h @ term)
        out += term
        if np.abs(term).max() <= 1e-17 * scale:
            break
    else:
        raise IntegrationError("Taylor series for the step exponential did not converge")
    return out


def dense_evolve(cfg: ScenarioConfig, initial: np.ndarray | None = None, opts=None,
                 times: Sequence[float] | None = None) -> DenseTrajectory:
    """Evolve a state vector or density matrix under H(t) on a grid.

    ``opts`` is a PropagatorOptions (method, steps_per_period, norm_tol); the
    default is midpoint-exponential at 256 steps per period.
    """
    opts = opts or PropagatorOptions()
    if initial is None:
        initial = cfg.initial.vector(cfg.n) if cfg.initial.is_pure else cfg.initial.density(cfg.n)
    state = np.array(initial, dtype=complex)
    is_rho = state.ndim == 2
    cap = DENSITY_CAP if is_rho else DENSE_CAP
    if cfg.n > cap:
        kind = "density matrices" if is_rho else "state vectors"
        raise CapacityError(f"dense oracle limited to n <= {cap} for {kind}, got {cfg.n}")
    times = cfg.times if times is None else np.asarray(times, dtype=float)

    def size(x):
        return np.trace(x).real if is_rho else np.vdot(x, x).real

    ref = size(state)
    out = [state.copy()]
    total = 0
    drift = 0.0
    for (a, b), m in zip(zip(times[:-1], times[1:]), interval_substeps(cfg, times, opts.steps_per_period)):
        dt = (b - a) / m
        for i in range(m):
            t = a + i * dt
            if opts.method == "midpoint-exponential":
                h = dense_hamiltonian(cfg, t + dt / 2)
                state = expm_apply(h, dt, state)
                if is_rho:
                    state = expm_apply(h, dt, state.conj().T).conj().T
            else:
                state = _rk4(cfg, t, dt, state, is_rho)
        total += m
        drift = max(drift, abs(size(state) - ref))
        if drift > opts.norm_tol:
            raise IntegrationError(f"dense norm drift {drift:.3e} exceeds {opts.norm_tol:.1e} at t={b}",
                                   max_drift=drift)
        out.append(state.copy())
    return DenseTrajectory(np.asarray(times), out, total, drift)


def _rk4(cfg, t, dt, state, is_rho):
    def f(tt, y):
        h = dense_hamiltonian(cfg, tt)
        return -1j * (h @ y - y @ h) if is_rho else -1j * (h @ y)

    k1 = f(t, state)
    k2 = f(t + dt / 2, state + dt / 2 * k1)
    k3 = f(t + dt / 2, state + dt / 2 * k2)
    k4 = f(t + dt, state + dt * k3)
    return state + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


@dataclass(frozen=True)
class BlockReport:
    n: int
    t: float
    order: str
    commutator_residuals: dict[int, float]  # site k >= 2 -> max |[H~, Z_k]|
    off_block: float

    @property
    def max_residual(self) -> float:
        return max(max(self.commutator_residuals.values()), self.off_block)


def extract_blocks(ht: np.ndarray) -> np.ndarray:
    """2x2 blocks (label order) of a transformed-frame matrix."""
    half = ht.shape[0] // 2
    i = np.arange(half)
    out = np.empty((half, 2, 2), dtype=complex)
    out[:, 0, 0] = ht[i, i]
    out[:, 0, 1] = ht[i, half + i]
    out[:, 1, 0] = ht[half + i, i]
    out[:, 1, 1] = ht[half + i, half + i]
    return out


def verify_block_structure(cfg: ScenarioConfig, t: float, chain=None) -> BlockReport:
    chain = chain or chain_unitary(cfg.n)
    u = chain.dense
    if u is None:
        raise CapacityError(f"dense chain limited to n <= {DENSE_CAP}")
    ht = u.conj().T @ dense_hamiltonian(cfg, t) @ u
    residuals = {}
    for k in range(2, cfg.n + 1):
        zk = np.diag(_unit_matrix(PauliString.single(cfg.n, k, "Z").letters)).real
        # [H, Z] for diagonal Z is H_ab (z_b - z_a)
        residuals[k] = float(np.abs(ht * (zk[None, :] - zk[:, None])).max())
    half = 1 << (cfg.n - 1)
    idx = np.arange(1 << cfg.n) % half
    off = float(np.abs(np.where(idx[:, None] != idx[None, :], ht, 0)).max())
    return BlockReport(cfg.n, float(t), chain.order, residuals, off)


@dataclass(frozen=True)
class CompareReport:
    times: np.ndarray
    gaps: np.ndarray
    steps_per_period: int
    refine: int
    components: int

    @property
    def max_gap(self) -> float:
        return float(self.gaps.max())

    @property
    def sub_resolution(self) -> bool:
        return self.steps_per_period < SUB_RESOLUTION


def compare(cfg: ScenarioConfig, initial: np.ndarray | None = None, opts=None, refine: int = 2) -> CompareReport:
    """Infidelity between engine and dense oracle at every grid point.

    The oracle steps ``refine`` times finer than the engine, so the gap tracks
    the engine's discretization error and shrinks with the step size.  A
    diagonal mixture is compared component by component and the worst
    component is reported.
    """
    opts = opts or PropagatorOptions()
    fine = replace(opts, steps_per_period=opts.steps_per_period * refine)
    dim = 1 << cfg.n
    if initial is not None:
        initial = np.asarray(initial, dtype=complex)
        if initial.ndim == 2:
            raise ValueError("compare takes a state vector; use the scenario for diagonal mixtures")
        starts = [initial]
    elif cfg.initial.is_pure:
        starts = [cfg.initial.vector(cfg.n)]
    else:
        starts = []
        for _, i in cfg.initial.components(cfg.n):
            psi = np.zeros(dim, dtype=complex)
            psi[i] = 1
            starts.append(psi)
    times = cfg.times
    gaps = np.zeros(len(times))
    for psi0 in starts:
        engine = [psi for _, psi in iter_states(cfg, psi0, opts, times)]
        ref = dense_evolve(cfg, psi0, fine, times).states
        for j, (a, b) in enumerate(zip(engine, ref)):
            gaps[j] = max(gaps[j], max(0.0, 1.0 - abs(np.vdot(b, a)) ** 2))
    return CompareReport(times, gaps, opts.steps_per_period, refine, len(starts))
