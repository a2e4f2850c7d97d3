"""Time evolution through the decomposed two-level engine.

Every invariant plane evolves under its own 2x2 effective Hamiltonian.  All
planes are stepped together as a batch of 2x2 matrices of shape (L, 2, 2),
which reproduces sequential per-label evaluation exactly.  The full N-spin
propagator is V = U (direct sum of blocks) U^dagger with U the chain
permutation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import IntegrationError, NumericalError, UsageError
from .model import ScenarioConfig, interval_substeps
from .subspace import LabelTable, SubspaceLabel, label_table
from .transform import ChainUnitary, chain_unitary

METHODS = ("midpoint-exponential", "rk4")


@dataclass(frozen=True)
class PropagatorOptions:
    method: str = "midpoint-exponential"
    steps_per_period: int = 256
    norm_tol: float = 1e-8

    def __post_init__(self):
        if self.method not in METHODS:
            raise UsageError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.steps_per_period < 1:
            raise UsageError("steps_per_period must be a positive integer")
        if not self.norm_tol > 0:
            raise UsageError("norm_tol must be > 0")


def block_hamiltonians(omega, bx, by, c) -> np.ndarray:
    h = np.empty((len(omega), 2, 2), dtype=complex)
    h[:, 0, 0] = c + omega
    h[:, 1, 1] = c - omega
    h[:, 0, 1] = bx - 1j * by
    h[:, 1, 0] = bx + 1j * by
    return h


def block_exponentials(omega, bx, by, c, dt: float) -> np.ndarray:
    """exp(-i dt H) for a batch of blocks, in closed form."""
    r = np.sqrt(omega ** 2 + bx ** 2 + by ** 2)
    cos = np.cos(r * dt)
    sinc = dt * np.sinc(r * dt / np.pi)  # sin(r dt) / r
    phase = np.exp(-1j * c * dt)
    u = np.empty((len(omega), 2, 2), dtype=complex)
    u[:, 0, 0] = phase * (cos - 1j * sinc * omega)
    u[:, 1, 1] = phase * (cos + 1j * sinc * omega)
    u[:, 0, 1] = phase * (-1j * sinc * (bx - 1j * by))
    u[:, 1, 0] = phase * (-1j * sinc * (bx + 1j * by))
    return u


def _step(table: LabelTable, cfg: ScenarioConfig, t: float, dt: float, u: np.ndarray, method: str) -> np.ndarray:
    if method == "midpoint-exponential":
        p = table.fields_at(cfg.fields, cfg.couplings, t + dt / 2)
        return block_exponentials(*p, dt) @ u

    def deriv(tt, y):
        return -1j * block_hamiltonians(*table.fields_at(cfg.fields, cfg.couplings, tt)) @ y

    k1 = deriv(t, u)
    k2 = deriv(t + dt / 2, u + dt / 2 * k1)
    k3 = deriv(t + dt / 2, u + dt / 2 * k2)
    k4 = deriv(t + dt, u + dt * k3)
    return u + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def unitarity_drift(blocks: np.ndarray) -> np.ndarray:
    """Per-block max |U^dagger U - 1|."""
    g = np.conj(np.swapaxes(blocks, 1, 2)) @ blocks
    return np.abs(g - np.eye(2)).max(axis=(1, 2))


def iter_blocks(cfg: ScenarioConfig, opts: PropagatorOptions = PropagatorOptions(),
                times: Sequence[float] | None = None, table: LabelTable | None = None,
                on_substep: Callable[[float, np.ndarray], None] | None = None,
                ) -> Iterator[tuple[float, np.ndarray]]:
    """Yield (t, cumulative block propagators from times[0] to t) on a grid.

    ``on_substep`` sees every internal substep, for observables that need a
    finer sampling than the output grid.
    """
    times = cfg.times if times is None else np.asarray(times, dtype=float)
    table = table or label_table(cfg.n)
    u = np.broadcast_to(np.eye(2, dtype=complex), (len(table), 2, 2)).copy()
    yield float(times[0]), u.copy()
    for (a, b), m in zip(zip(times[:-1], times[1:]), interval_substeps(cfg, times, opts.steps_per_period)):
        dt = (b - a) / m
        for i in range(m):
            t = a + i * dt
            u = _step(table, cfg, t, dt, u, opts.method)
            if on_substep is not None:
                on_substep(t + dt, u)
        drift = unitarity_drift(u)
        worst = int(np.argmax(drift))
        if drift[worst] > opts.norm_tol:
            label = SubspaceLabel(tuple(table.eps[worst]))
            raise IntegrationError(
                f"norm drift {drift[worst]:.3e} exceeds tolerance {opts.norm_tol:.1e} in subspace {label} at t={b}",
                max_drift=float(drift[worst]), label=label)
        yield float(b), u.copy()


@dataclass(frozen=True)
class TwoLevelTrajectory:
    label: SubspaceLabel
    times: np.ndarray
    states: np.ndarray  # (T, 2)

    @property
    def transition(self) -> np.ndarray:
        """Population of the effective |-> state along the grid."""
        return np.abs(self.states[:, 1]) ** 2


def propagate_two_level(label: SubspaceLabel, cfg: ScenarioConfig, psi0,
                        opts: PropagatorOptions = PropagatorOptions(),
                        times: Sequence[float] | None = None) -> TwoLevelTrajectory:
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (2,) or abs(np.vdot(psi0, psi0).real - 1) > 1e-12:
        raise UsageError("psi0 must be a normalized amplitude pair")
    if label.n != cfg.n:
        raise UsageError(f"label is for n={label.n}, scenario has n={cfg.n}")
    table = LabelTable(cfg.n, [label])
    ts, states = [], []
    for t, u in iter_blocks(cfg, opts, times, table):
        ts.append(t)
        states.append(u[0] @ psi0)
    states = np.array(states)
    drift = np.abs(np.sum(np.abs(states) ** 2, axis=1) - 1).max()
    if drift > opts.norm_tol:
        raise IntegrationError(f"norm drift {drift:.3e} exceeds tolerance {opts.norm_tol:.1e}",
                               max_drift=float(drift), label=label)
    return TwoLevelTrajectory(label, np.array(ts), states)


def rabi_probability(gamma, delta, t):
    """gamma^2/(gamma^2+delta^2) * sin^2(w_R t / 2), with w_R = sqrt(delta^2+gamma^2).

    Returns 0 when both gamma and delta vanish.
    """
    gamma = np.asarray(gamma, dtype=float)
    delta = np.asarray(delta, dtype=float)
    wr2 = gamma ** 2 + delta ** 2
    amp = np.divide(gamma ** 2, wr2, out=np.zeros(np.broadcast(gamma, wr2).shape), where=wr2 > 0)
    out = amp * np.sin(np.sqrt(wr2) * np.asarray(t, dtype=float) / 2) ** 2
    return float(out) if out.ndim == 0 else out


def rotation_sense(label: SubspaceLabel) -> int:
    """Sense of rotation of the effective transverse field under a circular drive.

    With gx = cos(nu t), gy = sin(nu t) the effective coupling inside a plane
    is proportional to exp(-i s nu t) with s = (-1)**((n-1)/2) * P_odd.
    """
    n = label.n
    if n % 2 == 0:
        raise UsageError("rotation sense is defined for odd n only")
    p = 1
    for k in range(3, n + 1, 2):
        p *= label.eps[k - 2]
    return (-1) ** ((n - 1) // 2) * p


def longitudinal_splitting(label: SubspaceLabel, omegas: Sequence[float]) -> float:
    """w_1 + sum_k w_k * eps_2 ... eps_k for static level splittings."""
    total = float(omegas[0])
    prod = 1
    for k in range(2, label.n + 1):
        prod *= label.eps[k - 2]
        total += omegas[k - 1] * prod
    return total


def _static_values(fields) -> list[float]:
    out = []
    for d in fields:
        if isinstance(d, (int, float)):
            out.append(float(d))
        elif getattr(d, "kind", None) == "constant":
            out.append(float(d.value))
        else:
            raise UsageError("detuning needs static fields")
    return out


def detuning(label: SubspaceLabel, fields, nu: float, n: int | None = None) -> float:
    """Detuning of one plane from a circularly rotating coupling.

    ``fields`` are the spin level splittings (Hamiltonian coefficient w_k/2 on
    Z_k), so the plane's transition frequency is the splitting-weighted sum
    and the detuning is that sum minus s * nu, with s from rotation_sense.
    """
    omegas = _static_values(fields)
    n = len(omegas) if n is None else n
    if n != len(omegas) or label.n != n:
        raise UsageError(f"label/fields size mismatch for n={n}")
    if n % 2 == 0:
        raise UsageError("detuning under a rotating coupling is only defined for odd n")
    return longitudinal_splitting(label, omegas) - rotation_sense(label) * nu


@dataclass(frozen=True, eq=False)
class SparsePropagator:
    """V = U (direct sum of 2x2 blocks) U^dagger, stored as blocks + chain."""

    n: int
    blocks: np.ndarray  # (2**(n-1), 2, 2), label order
    chain: ChainUnitary

    def __post_init__(self):
        if self.blocks.shape != (1 << (self.n - 1), 2, 2):
            raise UsageError(f"blocks must have shape {(1 << (self.n - 1), 2, 2)}")

    @classmethod
    def identity(cls, n: int) -> "SparsePropagator":
        blocks = np.broadcast_to(np.eye(2, dtype=complex), (1 << (n - 1), 2, 2)).copy()
        return cls(n, blocks, chain_unitary(n))

    def block(self, label: SubspaceLabel) -> np.ndarray:
        return self.blocks[label.index]

    def apply(self, psi: np.ndarray) -> np.ndarray:
        """V psi; psi may be a vector or a matrix acted on column-wise."""
        psi = np.asarray(psi, dtype=complex)
        if psi.shape[0] != 1 << self.n:
            raise UsageError(f"state has dimension {psi.shape[0]}, expected {1 << self.n}")
        tail = psi.shape[1:]
        flat = self.chain.apply_dagger(psi).reshape((2, 1 << (self.n - 1), -1))
        out = np.einsum("lij,jlk->ilk", self.blocks, flat)
        return self.chain.apply(out.reshape((1 << self.n,) + tail))

    def then(self, later: "SparsePropagator") -> "SparsePropagator":
        """Propagator for this evolution followed by ``later``."""
        if later.n != self.n:
            raise UsageError("propagators act on different system sizes")
        return SparsePropagator(self.n, later.blocks @ self.blocks, self.chain)

    def max_unitarity_drift(self) -> float:
        return float(unitarity_drift(self.blocks).max())

    def to_dense(self) -> np.ndarray:
        from .pauli import DENSE_CAP
        from .errors import CapacityError
        if self.n > DENSE_CAP:
            raise CapacityError(f"dense operators limited to n <= {DENSE_CAP}")
        return self.apply(np.eye(1 << self.n, dtype=complex))


def assemble_propagator(cfg: ScenarioConfig, t0: float, t1: float,
                        opts: PropagatorOptions = PropagatorOptions()) -> SparsePropagator:
    if t1 < t0:
        raise UsageError("t1 must be >= t0")
    if t1 == t0:
        return SparsePropagator.identity(cfg.n)
    *_, (_, blocks) = iter_blocks(cfg, opts, [t0, t1])
    return SparsePropagator(cfg.n, blocks, chain_unitary(cfg.n))


def iter_states(cfg: ScenarioConfig, psi0: np.ndarray, opts: PropagatorOptions = PropagatorOptions(),
                times: Sequence[float] | None = None) -> Iterator[tuple[float, np.ndarray]]:
    """Yield (t, psi(t)) on the output grid using the decomposed engine."""
    chain = chain_unitary(cfg.n)
    for t, blocks in iter_blocks(cfg, opts, times):
        yield t, SparsePropagator(cfg.n, blocks, chain).apply(psi0)


def check_density(rho: np.ndarray, tol: float = 1e-10, what: str = "density matrix"):
    tr = np.trace(rho).real
    if abs(tr - 1) > tol:
        raise NumericalError(f"{what}: trace {tr!r} deviates from 1")
    herm = np.abs(rho - rho.conj().T).max()
    if herm > tol:
        raise NumericalError(f"{what}: not Hermitian (max deviation {herm:.2e})")
    if rho.shape[0] <= 256:
        lo = np.linalg.eigvalsh((rho + rho.conj().T) / 2).min()
        if lo < -tol:
            raise NumericalError(f"{what}: negative eigenvalue {lo:.2e}")


def evolve_density(rho0: np.ndarray, prop: SparsePropagator) -> np.ndarray:
    check_density(rho0, what="initial density matrix")
    rho = prop.apply(prop.apply(rho0).conj().T)
    check_density(rho, what="evolved density matrix")
    return rho


def spin_mask(n: int, spin: int, outcome: int) -> np.ndarray:
    """Boolean mask of basis states with sigma^z_spin = outcome."""
    if not 1 <= spin <= n:
        raise UsageError(f"spin {spin} outside 1..{n}")
    if outcome not in (1, -1):
        raise UsageError("outcome must be +1 or -1")
    bit = (np.arange(1 << n) >> (n - spin)) & 1
    return bit == (outcome < 0)


def measure_and_project(rho: np.ndarray, spin: int, outcome: int) -> tuple[float, np.ndarray | None]:
    """Projective sigma^z measurement of one spin.

    Returns the outcome probability and the normalized post-measurement state;
    the state is None when the probability is below 1e-14.
    """
    n = int(round(math.log2(rho.shape[0])))
    keep = spin_mask(n, spin, outcome)
    p = float(np.real(np.trace(rho[np.ix_(keep, keep)])))
    if p < 1e-14:
        return max(p, 0.0), None
    post = np.zeros_like(rho)
    post[np.ix_(keep, keep)] = rho[np.ix_(keep, keep)] / p
    return p, post
