"""One-particle reduced density matrices and natural orbitals.

Matrix elements follow <i|rho|j> = <Psi| f+_j f_i |Psi> with 0-based array
indices standing for orbitals 1..d.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from pinspace.errors import ShapeError, SymmetryError
from pinspace.fock import (
    Configuration,
    Setting,
    Wavefunction,
    _basis,
    _basis_array,
    apply_orbital_rotation,
    basis_index,
    require_normalized,
)

DEG_TOL = 1e-8
HERMITIAN_TOL = 1e-12


@functools.lru_cache(maxsize=64)
def _hopping_table(n: int, d: int):
    """Nonzero elements <a| f+_j f_i |b> as parallel arrays (a, b, i, j, sign)."""
    basis = _basis(n, d)
    index = basis_index(Setting(n, d))
    rows = []
    for b, cfg in enumerate(basis):
        occ = set(cfg)
        for pos, i in enumerate(cfg):
            rest = cfg[:pos] + cfg[pos + 1:]
            for j in range(1, d + 1):
                if j in occ and j != i:
                    continue
                new = tuple(sorted(rest + (j,)))
                # sign of f_i then sign of f+_j on the remainder
                sign = (-1) ** (pos + sum(1 for q in rest if q < j))
                rows.append((index[new], b, i - 1, j - 1, sign))
    table = np.array(rows, dtype=np.intp).T
    table.setflags(write=False)
    return table


def transition_rdm(bra: Wavefunction, ket: Wavefunction) -> np.ndarray:
    """T[i, j] = <bra| f+_j f_i |ket>."""
    if bra.setting != ket.setting:
        raise ShapeError("bra and ket live in different settings")
    s = bra.setting
    a, b, i, j, sign = _hopping_table(s.N, s.d)
    vals = sign * np.conj(bra.coeffs[a]) * ket.coeffs[b]
    t = np.zeros((s.d, s.d), dtype=complex)
    np.add.at(t, (i, j), vals)
    return t


def one_rdm(psi: Wavefunction, auto_normalize: bool = False) -> np.ndarray:
    """One-particle reduced density matrix of a normalized state.

    Raises NormalizationError for unnormalized input unless
    ``auto_normalize`` is set.
    """
    psi = require_normalized(psi, auto_normalize)
    rho = transition_rdm(psi, psi)
    return (rho + rho.conj().T) / 2


@dataclass(frozen=True, eq=False)
class NaturalBasis:
    """Natural occupation numbers (descending) and orbitals (columns of ``unitary``).

    ``degeneracy_blocks`` partitions 1..d into maximal runs of equal NONs.
    """

    nons: np.ndarray
    unitary: np.ndarray
    degeneracy_blocks: tuple[tuple[int, ...], ...]

    @property
    def is_degenerate(self) -> bool:
        return any(len(b) > 1 for b in self.degeneracy_blocks)


def degeneracy_blocks(values, tol: float = DEG_TOL) -> tuple[tuple[int, ...], ...]:
    """Group consecutive sorted values whose neighbours differ by less than tol."""
    blocks = [[1]]
    for k in range(1, len(values)):
        if abs(values[k - 1] - values[k]) < tol:
            blocks[-1].append(k + 1)
        else:
            blocks.append([k + 1])
    return tuple(tuple(b) for b in blocks)


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    out = vecs.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        mags = np.abs(col)
        # first index attaining the maximum, robust to round-off ties
        lead = int(np.flatnonzero(mags >= mags.max() - 1e-12)[0])
        out[:, k] = col * (np.conj(col[lead]) / mags[lead])
    return out


def natural_basis(rho: np.ndarray, deg_tol: float = DEG_TOL) -> NaturalBasis:
    """Diagonalize a 1-RDM, sorting NONs non-increasingly.

    Each natural orbital is rotated so that its largest-magnitude component
    is real and positive. Orbitals inside a degenerate block are returned as
    the eigensolver produced them.
    """
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ShapeError(f"1-RDM must be square, got shape {rho.shape}")
    asym = np.max(np.abs(rho - rho.conj().T)) if rho.size else 0.0
    if asym > HERMITIAN_TOL:
        raise SymmetryError(f"1-RDM is not Hermitian (max asymmetry {asym:.3g})")
    w, v = np.linalg.eigh(rho)
    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = _fix_phases(v[:, order].astype(complex))
    return NaturalBasis(nons=w, unitary=v, degeneracy_blocks=degeneracy_blocks(w, deg_tol))


def to_natural_expansion(psi: Wavefunction, deg_tol: float = DEG_TOL,
                         auto_normalize: bool = False) -> tuple[Wavefunction, NaturalBasis]:
    """Re-expand ``psi`` in configurations built from its own natural orbitals."""
    psi = require_normalized(psi, auto_normalize)
    nb = natural_basis(one_rdm(psi), deg_tol)
    return apply_orbital_rotation(psi, nb.unitary.conj().T), nb


def support(psi: Wavefunction, threshold: float = 1e-12) -> frozenset[Configuration]:
    """Configurations whose amplitude exceeds ``threshold`` in magnitude."""
    if threshold < 0:
        raise ValueError(f"support threshold must be non-negative, got {threshold}")
    basis = _basis(psi.setting.N, psi.setting.d)
    return frozenset(basis[k] for k in np.flatnonzero(np.abs(psi.coeffs) > threshold))


def occupation_vector(psi: Wavefunction) -> np.ndarray:
    """n_j = sum of |c_i|^2 over configurations containing j."""
    s = psi.setting
    idx = _basis_array(s.N, s.d)
    weights = np.abs(psi.coeffs) ** 2
    n = np.zeros(s.d)
    np.add.at(n, idx, np.repeat(weights[:, None], s.N, axis=1))
    return n
