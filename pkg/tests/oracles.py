"""Brute-force reference implementations on the full 2^d Fock space.

Everything here is built from Jordan-Wigner matrices, independently of the
configuration-basis code in the package. Mode p (1-based) is the p-th
Kronecker factor; a string of Z factors on modes below p carries the
fermionic sign.
"""

import functools

import numpy as np
from scipy.linalg import expm, logm

from pinspace.fock import build_basis


@functools.lru_cache(maxsize=None)
def annihilators(d):
    lower = np.array([[0.0, 1.0], [0.0, 0.0]])
    z = np.diag([1.0, -1.0])
    eye = np.eye(2)
    ops = []
    for p in range(d):
        m = np.ones((1, 1))
        for q in range(d):
            m = np.kron(m, z if q < p else lower if q == p else eye)
        ops.append(m)
    return tuple(ops)


def vacuum(d):
    v = np.zeros(2 ** d, dtype=complex)
    v[0] = 1.0
    return v


def determinant_vector(cfg, d):
    """f+_{i1} f+_{i2} ... f+_{iN} |0>, rightmost operator first."""
    a = annihilators(d)
    v = vacuum(d)
    for p in reversed(cfg):
        v = a[p - 1].T @ v
    return v


def sector_vectors(setting):
    return np.array([determinant_vector(c, setting.d) for c in build_basis(setting)]).T


def to_fock(psi):
    return sector_vectors(psi.setting) @ psi.coeffs


def from_fock(vec, setting):
    return sector_vectors(setting).conj().T @ vec


def one_rdm(psi):
    """rho[i, j] = <psi| a+_j a_i |psi>."""
    a = annihilators(psi.setting.d)
    v = to_fock(psi)
    d = psi.setting.d
    return np.array([[v.conj() @ (a[j].T @ (a[i] @ v)) for j in range(d)] for i in range(d)])


def hamiltonian(one_body, two_body):
    """sum h_pq a+_p a_q + 1/2 sum V_pqrs a+_p a+_q a_s a_r over all 2^d states."""
    d = one_body.shape[0]
    a = annihilators(d)
    h = np.zeros((2 ** d, 2 ** d), dtype=complex)
    for p in range(d):
        for q in range(d):
            if one_body[p, q] != 0:
                h += one_body[p, q] * a[p].T @ a[q]
    for p, q, r, s in zip(*np.nonzero(two_body)):
        h += 0.5 * two_body[p, q, r, s] * a[p].T @ a[q].T @ a[s] @ a[r]
    return h


def sector_matrix(one_body, two_body, setting):
    vecs = sector_vectors(setting)
    return vecs.conj().T @ hamiltonian(one_body, two_body) @ vecs


def rotate(psi, u):
    """exp(sum_pq K_pq a+_p a_q) |psi> with K = log(u), mapping f+_q to sum_p u_pq f+_p."""
    d = psi.setting.d
    k = logm(u)
    a = annihilators(d)
    gen = sum(k[p, q] * a[p].T @ a[q] for p in range(d) for q in range(d))
    return from_fock(expm(gen) @ to_fock(psi), psi.setting)
