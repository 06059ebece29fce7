"""Independent dense-matrix and finite-difference references for the tests.

Nothing here touches the package's gate kernels: states are built from
Kronecker products and scipy's matrix exponential.
"""
import numpy as np
from scipy.linalg import expm

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)


def pauli(n, ops):
    """Dense operator with ``ops = {qubit: 2x2}``; qubit 0 is least significant."""
    out = np.array([[1.0 + 0j]])
    for q in range(n - 1, -1, -1):
        out = np.kron(out, ops.get(q, I2))
    return out


def ising_matrix(a, b):
    n = len(a)
    h = sum(a[k] * pauli(n, {k: X}) for k in range(n))
    h = h + sum(b[i] * pauli(n, {i: Z, i + 1: Z}) for i in range(n - 1))
    return np.asarray(h, dtype=complex)


def generator(n, kind, qubits):
    if kind == "X":
        return pauli(n, {qubits[0]: X})
    if kind == "Z":
        return pauli(n, {qubits[0]: Z})
    return pauli(n, {qubits[0]: Z, qubits[1]: Z})


def rotation(n, kind, qubits, angle):
    return expm(-0.5j * angle * generator(n, kind, qubits))


def hva_layer(n, angles):
    """Dense unitary of one layer: X rotations first, then every ZZ bond."""
    u = np.eye(2 ** n, dtype=complex)
    for q in range(n):
        u = rotation(n, "X", (q,), angles[q]) @ u
    for i in range(n - 1):
        u = rotation(n, "ZZ", (i, i + 1), angles[n + i]) @ u
    return u


def hva_state(initial_params, params, n, n_layers):
    psi = np.zeros(2 ** n, dtype=complex)
    psi[0] = 1
    psi = hva_layer(n, initial_params) @ psi
    per = 2 * n - 1
    for layer in range(n_layers):
        psi = hva_layer(n, params[layer * per:(layer + 1) * per]) @ psi
    return psi


def central_difference(f, params, k, eps=1e-5):
    plus = np.array(params, dtype=float)
    minus = plus.copy()
    plus[k] += eps
    minus[k] -= eps
    return (f(plus) - f(minus)) / (2 * eps)


def fd_geometry(state_fn, params, h_dense, eps=1e-5):
    """A, C and <H^2> from finite-difference derivative vectors and dense H."""
    psi = state_fn(params)
    derivs = np.array([central_difference(state_fn, params, k, eps) for k in range(len(params))])
    m = len(params)
    hpsi = h_dense @ psi
    energy = np.vdot(psi, hpsi).real
    a = np.empty((m, m))
    c = np.empty(m)
    for i in range(m):
        for j in range(m):
            a[i, j] = (np.vdot(derivs[i], derivs[j])
                       - np.vdot(derivs[i], psi) * np.vdot(psi, derivs[j])).real
        c[i] = (np.vdot(derivs[i], hpsi) + np.vdot(psi, derivs[i]) * energy).imag
    return a, c, np.vdot(hpsi, hpsi).real, derivs


def random_state(rng, n):
    v = rng.standard_normal(2 ** n) + 1j * rng.standard_normal(2 ** n)
    return v / np.linalg.norm(v)
