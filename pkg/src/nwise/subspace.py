"""Invariant two-level subspaces and their effective Hamiltonians.

In the transformed frame spins 2..n only enter through their sigma^z
eigenvalues eps_2..eps_n, so each sign string labels one invariant plane and
spin 1 evolves under

    H_eff = omega * Z + bx * X + by * Y + c * 1

with omega = w_1 + sum_{k>=2} w_k * eps_2 * ... * eps_k.  Odd n adds
gz * P_odd to omega and puts (-1)**((n-1)/2) * gy * P_odd on Y; even n puts
(-1)**(n/2) * gy * P_even on X and gz * P_even on the identity.  P_odd is the
product of eps at sites 3, 5, ..., n and P_even the product at 2, 4, ..., n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .errors import UsageError
from .model import CouplingSchedule, Driver, ScenarioConfig, coupling_values, field_values
from .transform import ChainUnitary, chain_unitary


@dataclass(frozen=True)
class SubspaceLabel:
    """Signs (eps_2, ..., eps_n) of the transformed-frame sigma^z_k."""

    eps: tuple[int, ...]

    def __post_init__(self):
        eps = tuple(int(e) for e in self.eps)
        if not eps or any(e not in (1, -1) for e in eps):
            raise UsageError(f"label entries must be +1/-1, got {self.eps!r}")
        object.__setattr__(self, "eps", eps)

    @property
    def n(self) -> int:
        return len(self.eps) + 1

    @property
    def index(self) -> int:
        """Binary-counting position: eps_2 most significant, +1 <-> bit 0."""
        i = 0
        for e in self.eps:
            i = (i << 1) | (e < 0)
        return i

    @classmethod
    def from_index(cls, index: int, n: int) -> "SubspaceLabel":
        m = n - 1
        if not 0 <= index < (1 << m):
            raise UsageError(f"label index {index} outside 0..{(1 << m) - 1}")
        return cls(tuple(-1 if index >> (m - 1 - k) & 1 else 1 for k in range(m)))

    def __str__(self):
        return "".join("+" if e > 0 else "-" for e in self.eps)


def enumerate_labels(n: int) -> list[SubspaceLabel]:
    if n < 2:
        raise UsageError(f"need n >= 2, got {n}")
    return [SubspaceLabel.from_index(i, n) for i in range(1 << (n - 1))]


class EffectiveHamiltonian(NamedTuple):
    omega: float
    bx: float
    by: float
    c: float

    def matrix(self) -> np.ndarray:
        return np.array([
            [self.c + self.omega, self.bx - 1j * self.by],
            [self.bx + 1j * self.by, self.c - self.omega],
        ])


class LabelTable:
    """Per-label sign products for all 2**(n-1) labels at once."""

    def __init__(self, n: int, labels: Sequence[SubspaceLabel] | None = None):
        if n < 2:
            raise UsageError(f"need n >= 2, got {n}")
        self.n = n
        if labels is None:
            idx = np.arange(1 << (n - 1))
            bits = (idx[:, None] >> np.arange(n - 2, -1, -1)[None, :]) & 1
            eps = (1 - 2 * bits).astype(np.int8)
        else:
            if any(l.n != n for l in labels):
                raise UsageError(f"labels must have length {n - 1}")
            eps = np.array([l.eps for l in labels], dtype=np.int8).reshape(len(labels), n - 1)
        self.eps = eps
        self.cum = np.cumprod(eps, axis=1, dtype=np.int8).astype(float)
        # column j holds site j + 2
        if n % 2:
            sel = [k - 2 for k in range(3, n + 1, 2)]
            self.sign = (-1) ** ((n - 1) // 2)
        else:
            sel = [k - 2 for k in range(2, n + 1, 2)]
            self.sign = (-1) ** (n // 2)
        self.parity = np.prod(eps[:, sel], axis=1).astype(float) if sel else np.ones(len(eps))

    def __len__(self):
        return len(self.eps)

    def longitudinal(self, w: np.ndarray) -> np.ndarray:
        """w_1 + sum_k w_k * prod eps, for every label."""
        return w[0] + self.cum @ np.asarray(w[1:], dtype=float)

    def fields(self, w, gx: float, gy: float, gz: float):
        """(omega, bx, by, c) arrays over the labels."""
        omega = self.longitudinal(np.asarray(w, dtype=float))
        L = len(self)
        if self.n % 2:
            omega = omega + gz * self.parity
            bx = np.full(L, float(gx))
            by = self.sign * gy * self.parity
            c = np.zeros(L)
        else:
            bx = gx + self.sign * gy * self.parity
            by = np.zeros(L)
            c = gz * self.parity
        return omega, bx, by, c

    def fields_at(self, fields: Sequence[Driver], couplings: CouplingSchedule, t: float):
        return self.fields(field_values(fields, t), *coupling_values(couplings, t))


@lru_cache(maxsize=32)
def label_table(n: int) -> LabelTable:
    return LabelTable(n)


def effective_field(label: SubspaceLabel, fields: Sequence[Driver], couplings: CouplingSchedule,
                    t: float) -> EffectiveHamiltonian:
    if len(fields) != label.n:
        raise UsageError(f"label has length {label.n - 1}, expected {len(fields) - 1}")
    table = LabelTable(label.n, [label])
    omega, bx, by, c = table.fields_at(fields, couplings, t)
    return EffectiveHamiltonian(float(omega[0]), float(bx[0]), float(by[0]), float(c[0]))


def transformed_indices(label: SubspaceLabel) -> tuple[int, int]:
    """Transformed-frame basis indices of (spin 1 = +, spin 1 = -) in this plane."""
    i = label.index
    return i, (1 << (label.n - 1)) + i


def subspace_basis_pair(label: SubspaceLabel, chain: ChainUnitary | None = None) -> tuple[int, int]:
    chain = chain or chain_unitary(label.n)
    a, b = transformed_indices(label)
    return chain.image(a), chain.image(b)


def label_of_basis_state(index: int, n: int, chain: ChainUnitary | None = None) -> tuple[SubspaceLabel, int]:
    """Label of the plane holding an original-frame basis state, and its slot (0 or 1)."""
    chain = chain or chain_unitary(n)
    tb = chain.preimage(index)
    half = 1 << (n - 1)
    return SubspaceLabel.from_index(tb % half, n), tb // half


def embed(label: SubspaceLabel, chi, chain: ChainUnitary | None = None) -> np.ndarray:
    chi = np.asarray(chi, dtype=complex)
    if chi.shape != (2,):
        raise UsageError("chi must be a pair of amplitudes")
    if abs(np.vdot(chi, chi).real - 1.0) > 1e-12:
        raise UsageError("chi must be normalized")
    i0, i1 = subspace_basis_pair(label, chain)
    psi = np.zeros(1 << label.n, dtype=complex)
    psi[i0] = chi[0]
    psi[i1] = chi[1]
    return psi


def two_level_eigen(h: EffectiveHamiltonian):
    """Eigenvalues (descending) and eigenvectors of one 2x2 block.

    A fully degenerate block (omega = bx = by = 0) returns (1,0), (0,1).
    """
    r = math.sqrt(h.omega ** 2 + h.bx ** 2 + h.by ** 2)
    if r == 0.0:
        return (h.c, h.c), (np.array([1, 0], complex), np.array([0, 1], complex))
    theta = math.atan2(math.hypot(h.bx, h.by), h.omega)
    phi = math.atan2(h.by, h.bx)
    cs, sn = math.cos(theta / 2), math.sin(theta / 2)
    up = np.array([cs, np.exp(1j * phi) * sn])
    down = np.array([-np.exp(-1j * phi) * sn, cs])
    return (h.c + r, h.c - r), (up, down)


@dataclass(frozen=True)
class Eigenpair:
    """One eigenpair; the vector is supported on exactly two basis states."""

    value: float
    label: SubspaceLabel
    indices: tuple[int, int]
    amplitudes: tuple[complex, complex]

    @cached_property
    def vector(self) -> np.ndarray:
        psi = np.zeros(1 << self.label.n, dtype=complex)
        psi[self.indices[0]] = self.amplitudes[0]
        psi[self.indices[1]] = self.amplitudes[1]
        return psi


def static_spectrum(cfg: ScenarioConfig, t: float) -> list[Eigenpair]:
    """All 2**n eigenpairs of H(t), label by label (upper level first)."""
    chain = chain_unitary(cfg.n)
    blocks = zip(*label_table(cfg.n).fields_at(cfg.fields, cfg.couplings, t))
    out = []
    for label, params in zip(enumerate_labels(cfg.n), blocks):
        h = EffectiveHamiltonian(*map(float, params))
        values, vectors = two_level_eigen(h)
        pair = subspace_basis_pair(label, chain)
        for e, v in zip(values, vectors):
            out.append(Eigenpair(float(e), label, pair, (complex(v[0]), complex(v[1]))))
    return out
