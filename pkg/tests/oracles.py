"""Independent reference computations for the test suite.

Everything here is built from Kronecker products and scipy, with no use of
the package's Pauli, chain or subspace code.  Spin 1 is the leftmost factor
and |+> = (1, 0).
"""
from functools import reduce

import numpy as np
from scipy.linalg import expm

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
SINGLE = {"I": I2, "X": X, "Y": Y, "Z": Z}


def kron_all(mats):
    return reduce(np.kron, mats)


def site_op(n, site, m):
    """m on spin ``site`` (1-based), identity elsewhere."""
    return kron_all([m if k == site else I2 for k in range(1, n + 1)])


def word(label):
    return kron_all([SINGLE[c] for c in label])


def hamiltonian(omegas, gx, gy, gz):
    """sum_k w_k Z_k + gx X..X + gy Y..Y + gz Z..Z."""
    n = len(omegas)
    h = sum(w * site_op(n, k + 1, Z) for k, w in enumerate(omegas))
    return h + gx * kron_all([X] * n) + gy * kron_all([Y] * n) + gz * kron_all([Z] * n)


def pair(n, j, k):
    """(1 + Z_j + X_k - Z_j X_k) / 2."""
    one = np.eye(1 << n, dtype=complex)
    zj, xk = site_op(n, j, Z), site_op(n, k, X)
    return (one + zj + xk - zj @ xk) / 2


def chain(n):
    """U_{n-1,n} ... U_{23} U_{12}."""
    u = np.eye(1 << n, dtype=complex)
    for j in range(1, n):
        u = pair(n, j, j + 1) @ u
    return u


def transformed_two(w1, w2, gx, gy, gz):
    """Two-spin transformed Hamiltonian as an explicit operator."""
    z1, z2, x1 = site_op(2, 1, Z), site_op(2, 2, Z), site_op(2, 1, X)
    return (w1 * np.eye(4) + w2 * z2) @ z1 + gx * x1 - gy * z2 @ x1 + gz * z2


def transformed_three(w1, w2, w3, gx, gy, gz):
    """Three-spin transformed Hamiltonian as an explicit operator."""
    z = [site_op(3, k, Z) for k in (1, 2, 3)]
    one = np.eye(8, dtype=complex)
    x1, y1 = site_op(3, 1, X), site_op(3, 1, Y)
    return ((w1 * one + w2 * z[1] + w3 * z[1] @ z[2]) @ z[0] + gx * x1
            - gy * z[2] @ y1 + gz * z[2] @ z[0])


def transformed_general(omegas, gx, gy, gz):
    """Closed-form transformed Hamiltonian for any n, as an explicit operator."""
    n = len(omegas)
    dim = 1 << n
    z = [None] + [site_op(n, k, Z) for k in range(1, n + 1)]
    one = np.eye(dim, dtype=complex)
    long = omegas[0] * one
    prod = one
    for k in range(2, n + 1):
        prod = prod @ z[k]
        long = long + omegas[k - 1] * prod
    h = long @ z[1] + gx * site_op(n, 1, X)
    if n % 2:
        p = kron_all([Z if (k >= 3 and k % 2 == 1) else I2 for k in range(1, n + 1)])
        h = h + (-1) ** ((n - 1) // 2) * gy * p @ site_op(n, 1, Y) + gz * p @ z[1]
    else:
        p = kron_all([Z if k % 2 == 0 else I2 for k in range(1, n + 1)])
        h = h + (-1) ** (n // 2) * gy * p @ site_op(n, 1, X) + gz * p
    return h


def evolve_constant(h, psi, t):
    return expm(-1j * h * t) @ psi


def evolve_piecewise(hfun, psi, t0, t1, steps):
    """Midpoint-sampled piecewise-constant evolution with exact exponentials."""
    dt = (t1 - t0) / steps
    for i in range(steps):
        psi = expm(-1j * hfun(t0 + (i + 0.5) * dt) * dt) @ psi
    return psi


def rabi_reference(gamma, delta, t):
    """Transition probability from the exact 2x2 exponential in the rotating frame.

    H = (delta/2) Z + (gamma/2) X, starting in |+>.
    """
    h = 0.5 * delta * Z + 0.5 * gamma * X
    return np.array([abs((expm(-1j * h * s) @ [1, 0])[1]) ** 2 for s in np.atleast_1d(t)])


def landau_zener(gamma, alpha):
    """Asymptotic transfer probability for H = alpha t Z + gamma X swept from -inf to inf."""
    return 1 - np.exp(-np.pi * gamma ** 2 / alpha)


def eig_sorted(h):
    vals, vecs = np.linalg.eigh(h)
    return vals, vecs


def clusters(values, tol=1e-7):
    """Group sorted eigenvalues into clusters of near-equal values."""
    groups = [[0]]
    for i in range(1, len(values)):
        if values[i] - values[groups[-1][-1]] < tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups
