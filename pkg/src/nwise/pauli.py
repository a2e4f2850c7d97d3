"""Symbolic and dense Pauli-string algebra.

Strings carry a phase ``i**k`` (k in 0..3) and one letter per site.  Dense
matrices use the computational basis with spin 1 as the most significant bit
and bit value 0 meaning sigma^z = +1.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import CapacityError, UsageError

DENSE_CAP = 12
_DROP = 1e-15

LETTERS = "IXYZ"
_PHASES = (1, 1j, -1, -1j)

# (a, b) -> (power of i, product letter)
_MUL = {}
for _a in LETTERS:
    _MUL[("I", _a)] = (0, _a)
    _MUL[(_a, "I")] = (0, _a)
    _MUL[(_a, _a)] = (0, "I")
for _a, _b, _c in (("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")):
    _MUL[(_a, _b)] = (1, _c)
    _MUL[(_b, _a)] = (3, _c)


@dataclass(frozen=True)
class PauliString:
    """``i**power`` times a tensor product of single-site Pauli letters."""

    letters: tuple[str, ...]
    power: int = 0

    def __post_init__(self):
        letters = tuple(self.letters)
        if any(c not in LETTERS for c in letters):
            raise UsageError(f"invalid Pauli letters {letters!r}")
        object.__setattr__(self, "letters", letters)
        object.__setattr__(self, "power", int(self.power) % 4)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse labels such as ``"XXZ"``, ``"-iYY"`` or ``"+IZ"``."""
        power = 0
        s = label.strip()
        if s.startswith("-"):
            power += 2
            s = s[1:]
        elif s.startswith("+"):
            s = s[1:]
        if s.startswith("i"):
            power += 1
            s = s[1:]
        return cls(tuple(s), power)

    @classmethod
    def single(cls, n: int, site: int, letter: str) -> "PauliString":
        """``letter`` on ``site`` (1-based), identity elsewhere."""
        if not 1 <= site <= n:
            raise UsageError(f"site {site} outside 1..{n}")
        letters = ["I"] * n
        letters[site - 1] = letter
        return cls(tuple(letters))

    @classmethod
    def uniform(cls, n: int, letter: str) -> "PauliString":
        return cls((letter,) * n)

    @property
    def n(self) -> int:
        return len(self.letters)

    @property
    def phase(self) -> complex:
        return _PHASES[self.power]

    def __mul__(self, other: "PauliString") -> "PauliString":
        return pauli_multiply(self, other)

    def __str__(self):
        prefix = ("", "i", "-", "-i")[self.power]
        return prefix + "".join(self.letters)


def pauli_multiply(a: PauliString, b: PauliString) -> PauliString:
    if a.n != b.n:
        raise UsageError(f"length mismatch: {a.n} vs {b.n}")
    power = a.power + b.power
    out = []
    for x, y in zip(a.letters, b.letters):
        p, c = _MUL[(x, y)]
        power += p
        out.append(c)
    return PauliString(tuple(out), power)


def anticommutes(a: PauliString, b: PauliString) -> bool:
    if a.n != b.n:
        raise UsageError(f"length mismatch: {a.n} vs {b.n}")
    clashes = sum(1 for x, y in zip(a.letters, b.letters) if x != "I" and y != "I" and x != y)
    return clashes % 2 == 1


class OperatorSum:
    """Complex-weighted sum of Pauli strings of a common length.

    Terms are merged eagerly; the string phase is folded into the coefficient
    so each key is a bare letter tuple.  Coefficients below 1e-15 in magnitude
    are dropped.
    """

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms: Iterable[tuple[complex, PauliString]] = ()):
        self.n = int(n)
        merged: dict[tuple[str, ...], complex] = {}
        for coeff, s in terms:
            if s.n != self.n:
                raise UsageError(f"string {s} has length {s.n}, expected {self.n}")
            merged[s.letters] = merged.get(s.letters, 0j) + complex(coeff) * s.phase
        self._terms = {k: v for k, v in merged.items() if abs(v) >= _DROP}

    @property
    def terms(self) -> list[tuple[complex, PauliString]]:
        return [(c, PauliString(k)) for k, c in sorted(self._terms.items())]

    def __len__(self):
        return len(self._terms)

    def __eq__(self, other):
        if not isinstance(other, OperatorSum):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms

    def __add__(self, other: "OperatorSum") -> "OperatorSum":
        _check_len(self, other)
        return OperatorSum(self.n, self.terms + other.terms)

    def __sub__(self, other: "OperatorSum") -> "OperatorSum":
        _check_len(self, other)
        return OperatorSum(self.n, self.terms + [(-c, s) for c, s in other.terms])

    def __mul__(self, other):
        if isinstance(other, OperatorSum):
            _check_len(self, other)
            out = []
            for ca, sa in self.terms:
                for cb, sb in other.terms:
                    out.append((ca * cb, pauli_multiply(sa, sb)))
            return OperatorSum(self.n, out)
        return OperatorSum(self.n, [(c * other, s) for c, s in self.terms])

    __rmul__ = __mul__

    def __repr__(self):
        body = " + ".join(f"({c:.6g})*{s}" for c, s in self.terms) or "0"
        return f"OperatorSum(n={self.n}, {body})"


def _check_len(a: OperatorSum, b: OperatorSum):
    if a.n != b.n:
        raise UsageError(f"length mismatch: {a.n} vs {b.n}")


def as_sum(x, n: int | None = None) -> OperatorSum:
    if isinstance(x, OperatorSum):
        return x
    if isinstance(x, PauliString):
        return OperatorSum(x.n, [(1.0, x)])
    raise TypeError(f"cannot interpret {type(x).__name__} as an operator")


def commutator(a: OperatorSum, b: OperatorSum) -> OperatorSum:
    """Symbolic ``[a, b]``; only anticommuting pairs survive, each as 2ab."""
    a, b = as_sum(a), as_sum(b)
    _check_len(a, b)
    out = []
    for ca, sa in a.terms:
        for cb, sb in b.terms:
            if anticommutes(sa, sb):
                out.append((2 * ca * cb, pauli_multiply(sa, sb)))
    return OperatorSum(a.n, out)


def commutes(a, b) -> bool:
    return len(commutator(a, b)) == 0


def string_to_dense(s: PauliString) -> np.ndarray:
    """Dense matrix of one string via its X/Z bit masks.

    P|b> = i**(power + #Y) * (-1)**popcount(b & zmask) |b ^ xmask>.
    """
    n = s.n
    if n > DENSE_CAP:
        raise CapacityError(f"dense operators limited to n <= {DENSE_CAP}, got {n}")
    xmask = zmask = 0
    ny = 0
    for pos, c in enumerate(s.letters):
        bit = 1 << (n - 1 - pos)
        if c in "XY":
            xmask |= bit
        if c in "ZY":
            zmask |= bit
        ny += c == "Y"
    dim = 1 << n
    cols = np.arange(dim)
    rows = cols ^ xmask
    parity = np.zeros(dim, dtype=np.int64)
    masked = cols & zmask
    while masked.any():
        parity ^= masked & 1
        masked = masked >> 1
    vals = _PHASES[(s.power + ny) % 4] * (1 - 2 * parity)
    m = np.zeros((dim, dim), dtype=complex)
    m[rows, cols] = vals
    return m


def to_dense(op, n: int | None = None) -> np.ndarray:
    op = as_sum(op)
    if n is None:
        n = op.n
    if op.n != n:
        raise UsageError(f"operator has n={op.n}, requested n={n}")
    if n > DENSE_CAP:
        raise CapacityError(f"dense operators limited to n <= {DENSE_CAP}, got {n}")
    dim = 1 << n
    m = np.zeros((dim, dim), dtype=complex)
    for c, s in op.terms:
        m += c * string_to_dense(s)
    return m
