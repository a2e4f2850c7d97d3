"""Chain of controlled-flip unitaries that block-diagonalizes the Hamiltonian.

Each pair factor

    U_jk = (1 + Z_j + X_k - Z_j X_k) / 2

is the identity when spin j is |+> and flips spin k when spin j is |->.  The
chain is U = U_{n-1,n} ... U_{2,3} U_{1,2}, so U_{1,2} acts first on kets.
Under this ordering the image of a basis state has bit k equal to the parity
of input bits 1..k.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .errors import UsageError
from .pauli import DENSE_CAP, OperatorSum, PauliString, to_dense

PERMUTATION_CAP = 24

ORDERS = ("forward", "reverse")


def pair_operator(j: int, k: int, n: int) -> OperatorSum:
    if not (1 <= j <= n and 1 <= k <= n) or j == k:
        raise UsageError(f"invalid pair ({j}, {k}) for n={n}")
    zj = PauliString.single(n, j, "Z")
    xk = PauliString.single(n, k, "X")
    return OperatorSum(n, [
        (0.5, PauliString.uniform(n, "I")),
        (0.5, zj),
        (0.5, xk),
        (-0.5, zj * xk),
    ])


def pair_unitary(j: int, k: int, n: int) -> np.ndarray:
    return to_dense(pair_operator(j, k, n), n).real


def chain_pairs(n: int, order: str = "forward") -> tuple[tuple[int, int], ...]:
    """Pair factors in the order they act on a ket."""
    if order not in ORDERS:
        raise UsageError(f"order must be one of {ORDERS}, got {order!r}")
    pairs = tuple((k, k + 1) for k in range(1, n))
    return pairs if order == "forward" else pairs[::-1]


@dataclass(frozen=True, eq=False)
class ChainUnitary:
    n: int
    order: str = "forward"
    pairs: tuple[tuple[int, int], ...] = field(init=False)

    def __post_init__(self):
        if self.n < 2:
            raise UsageError(f"need n >= 2, got {self.n}")
        object.__setattr__(self, "pairs", chain_pairs(self.n, self.order))

    @cached_property
    def permutation(self) -> np.ndarray | None:
        """perm[b] is the basis index of U|b>; None above the table cap."""
        if self.n > PERMUTATION_CAP:
            return None
        idx = self.table()
        idx.setflags(write=False)
        return idx

    def table(self) -> np.ndarray:
        """Freshly computed image table, regardless of the caching cap."""
        idx = np.arange(1 << self.n, dtype=np.int64)
        for j, k in self.pairs:
            cj = 1 << (self.n - j)
            tk = 1 << (self.n - k)
            idx = np.where(idx & cj, idx ^ tk, idx)
        return idx

    @cached_property
    def inverse(self) -> np.ndarray | None:
        p = self.permutation
        if p is None:
            return None
        inv = np.empty_like(p)
        inv[p] = np.arange(p.size)
        inv.setflags(write=False)
        return inv

    @cached_property
    def dense(self) -> np.ndarray | None:
        """Product of the dense pair factors; None above the dense cap."""
        if self.n > DENSE_CAP:
            return None
        u = np.eye(1 << self.n)
        for j, k in self.pairs:
            u = pair_unitary(j, k, self.n) @ u
        return u

    def image(self, b: int) -> int:
        return permute_index(self, b)

    def preimage(self, b: int) -> int:
        _check_index(self.n, b)
        if self.inverse is not None:
            return int(self.inverse[b])
        for j, k in reversed(self.pairs):
            if b >> (self.n - j) & 1:
                b ^= 1 << (self.n - k)
        return b

    def apply(self, psi: np.ndarray) -> np.ndarray:
        """U psi for a state vector (or columns of a matrix)."""
        perm = self.permutation if self.permutation is not None else self.table()
        out = np.empty_like(psi)
        out[perm] = psi
        return out

    def apply_dagger(self, psi: np.ndarray) -> np.ndarray:
        perm = self.permutation if self.permutation is not None else self.table()
        return psi[perm]


def _check_index(n: int, b: int):
    if not 0 <= b < (1 << n):
        raise UsageError(f"basis index {b} outside 0..{(1 << n) - 1}")


def permute_index(u: ChainUnitary, b: int) -> int:
    _check_index(u.n, b)
    if u.permutation is not None:
        return int(u.permutation[b])
    for j, k in u.pairs:
        if b >> (u.n - j) & 1:
            b ^= 1 << (u.n - k)
    return b


@lru_cache(maxsize=64)
def chain_unitary(n: int, order: str = "forward") -> ChainUnitary:
    return ChainUnitary(n, order)


def transformed_hamiltonian(h: np.ndarray, u: ChainUnitary) -> np.ndarray:
    d = u.dense
    if d is None:
        raise UsageError(f"no dense chain for n={u.n}")
    return d.T @ h @ d


CLOSED_FORM_NOTE = (
    "single-product closed form with factors [1 + Z_{N-(k-1)} + X_{N-k} - Z_{N-(k+1)} X_{N-k}] "
    "refers to site N+1 at k=0 and is not evaluable; the chain is built as "
    "U_{N-1,N} ... U_{2,3} U_{1,2} from pair factors instead"
)
