"""Configuration basis of the N-fermion space over d spin-orbitals.

Orbitals are labelled 1..d in every public interface. A configuration is a
strictly increasing tuple of occupied orbitals and stands for the Slater
determinant

    |i_1, ..., i_N> = f+_{i_1} f+_{i_2} ... f+_{i_N} |vac>

with ascending indices. With this ordering the creation operator f+_p acting
on a configuration picks up the sign (-1)**(number of occupied orbitals below
p), and the matrix element <bra| u^{(x)N} |ket> of an orbital rotation is the
plain determinant of the submatrix u[bra, ket].
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Mapping

import numpy as np

from pinspace.errors import (
    ConfigurationError,
    InvalidSettingError,
    NormalizationError,
    ShapeError,
    UnitarityError,
)

Configuration = tuple[int, ...]

PRUNE_TOL = 1e-14
UNITARY_TOL = 1e-10
NORM_TOL = 1e-12


@dataclass(frozen=True, order=True)
class Setting:
    """N fermions in a d-dimensional one-particle space."""

    num_particles: int
    num_orbitals: int

    def __post_init__(self):
        n, d = self.num_particles, self.num_orbitals
        if not (isinstance(n, (int, np.integer)) and isinstance(d, (int, np.integer))):
            raise InvalidSettingError(f"setting entries must be integers, got ({n!r}, {d!r})")
        if d < 1 or n < 1 or n > d:
            raise InvalidSettingError(f"invalid setting (N={n}, d={d}); need 1 <= N <= d")

    @property
    def N(self) -> int:
        return self.num_particles

    @property
    def d(self) -> int:
        return self.num_orbitals

    @property
    def dim(self) -> int:
        return comb(self.num_orbitals, self.num_particles)

    @classmethod
    def parse(cls, text: str) -> "Setting":
        """Parse ``"N,d"``."""
        try:
            n, d = (int(x) for x in text.split(","))
        except ValueError as exc:
            raise InvalidSettingError(f"cannot parse setting {text!r}; expected 'N,d'") from exc
        return cls(n, d)

    def __str__(self):
        return f"({self.num_particles},{self.num_orbitals})"


@functools.lru_cache(maxsize=64)
def _basis(n: int, d: int) -> tuple[Configuration, ...]:
    return tuple(itertools.combinations(range(1, d + 1), n))


@functools.lru_cache(maxsize=64)
def _basis_index(n: int, d: int) -> dict[Configuration, int]:
    return {cfg: k for k, cfg in enumerate(_basis(n, d))}


@functools.lru_cache(maxsize=64)
def _basis_array(n: int, d: int) -> np.ndarray:
    arr = np.array(_basis(n, d), dtype=np.intp) - 1
    arr.setflags(write=False)
    return arr


def build_basis(setting: Setting) -> list[Configuration]:
    """All binomial(d, N) configurations in lexicographic order."""
    return list(_basis(setting.N, setting.d))


def basis_index(setting: Setting) -> dict[Configuration, int]:
    return _basis_index(setting.N, setting.d)


def check_configuration(occ: Iterable[int], setting: Setting) -> Configuration:
    occ = tuple(int(x) for x in occ)
    if len(occ) != setting.N:
        raise ConfigurationError(f"configuration {occ} must have {setting.N} entries")
    if any(b <= a for a, b in zip(occ, occ[1:])):
        raise ConfigurationError(f"configuration {occ} is not strictly increasing")
    if occ and (occ[0] < 1 or occ[-1] > setting.d):
        raise ConfigurationError(f"configuration {occ} has entries outside 1..{setting.d}")
    return occ


def _check_orbital(p: int, d: int):
    if not 1 <= p <= d:
        raise IndexError(f"orbital index {p} outside 1..{d}")


def apply_creation(config: Configuration, p: int, d: int) -> tuple[int, Configuration] | None:
    """Act with f+_p on a configuration (``()`` is the vacuum).

    Returns ``(sign, new_config)`` or ``None`` when p is already occupied.
    """
    _check_orbital(p, d)
    if p in config:
        return None
    below = sum(1 for q in config if q < p)
    new = tuple(sorted(config + (p,)))
    return (-1) ** below, new


def apply_annihilation(config: Configuration, p: int, d: int) -> tuple[int, Configuration] | None:
    """Act with f_p on a configuration; ``None`` when p is empty."""
    _check_orbital(p, d)
    if p not in config:
        return None
    below = config.index(p)
    return (-1) ** below, tuple(q for q in config if q != p)


def apply_string(ops: Iterable[tuple[str, int]], config: Configuration, d: int):
    """Apply a product of ladder operators, rightmost first.

    ``ops`` is a sequence like ``[("+", 1), ("-", 3)]`` meaning f+_1 f_3.
    Returns ``(sign, config)`` or ``None``.
    """
    sign = 1
    for kind, p in reversed(list(ops)):
        res = apply_creation(config, p, d) if kind == "+" else apply_annihilation(config, p, d)
        if res is None:
            return None
        s, config = res
        sign *= s
    return sign, config


def slater_overlap(u: np.ndarray, bra: Configuration, ket: Configuration) -> complex:
    """<bra| u^{(x)N} |ket> as the determinant of u[bra, ket]."""
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ShapeError(f"orbital matrix must be square, got shape {u.shape}")
    if len(bra) != len(ket):
        raise ShapeError("bra and ket hold different particle numbers")
    d = u.shape[0]
    for cfg in (bra, ket):
        if cfg and (min(cfg) < 1 or max(cfg) > d):
            raise ShapeError(f"configuration {cfg} does not fit a {d}x{d} orbital matrix")
    if not bra:
        return 1.0
    rows = np.asarray(bra) - 1
    cols = np.asarray(ket) - 1
    return np.linalg.det(u[np.ix_(rows, cols)])


def compound_matrix(u: np.ndarray, n: int) -> np.ndarray:
    """Matrix of u^{(x)n} restricted to the n-particle configuration basis.

    Entry [a, b] is det(u[basis[a], basis[b]]); by Cauchy-Binet this is
    multiplicative in u.
    """
    d = u.shape[0]
    idx = _basis_array(n, d)
    sub = u[idx[:, None, :, None], idx[None, :, None, :]]
    return np.linalg.det(sub)


def check_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> np.ndarray:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ShapeError(f"orbital matrix must be square, got shape {u.shape}")
    err = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if err > tol:
        raise UnitarityError(f"orbital matrix is not unitary (max |u+u - 1| = {err:.3g})")
    return u


@dataclass(frozen=True, eq=False)
class Wavefunction:
    """Amplitudes over the configuration basis of a fixed setting.

    ``coeffs`` is dense and follows :func:`build_basis` order. The mapping view
    lives in :attr:`amplitudes`. ``original_norm`` records the norm before an
    explicit renormalization.
    """

    setting: Setting
    coeffs: np.ndarray
    original_norm: float | None = field(default=None)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (self.setting.dim,):
            raise ShapeError(
                f"expected {self.setting.dim} amplitudes for {self.setting}, got shape {c.shape}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_amplitudes(cls, setting: Setting, amplitudes: Mapping[Iterable[int], complex]):
        index = basis_index(setting)
        c = np.zeros(setting.dim, dtype=complex)
        for occ, amp in amplitudes.items():
            cfg = check_configuration(occ, setting)
            c[index[cfg]] += amp
        return cls(setting, c)

    @classmethod
    def single(cls, setting: Setting, occ: Iterable[int]):
        return cls.from_amplitudes(setting, {tuple(occ): 1.0})

    @property
    def amplitudes(self) -> dict[Configuration, complex]:
        basis = _basis(self.setting.N, self.setting.d)
        return {basis[k]: complex(self.coeffs[k]) for k in np.flatnonzero(self.coeffs)}

    def __getitem__(self, occ) -> complex:
        return complex(self.coeffs[basis_index(self.setting)[tuple(occ)]])

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def normalized(self) -> "Wavefunction":
        nrm = self.norm()
        if nrm == 0.0:
            raise NormalizationError("cannot normalize the zero vector")
        return Wavefunction(self.setting, self.coeffs / nrm, original_norm=nrm)

    def is_real(self, tol: float = 1e-14) -> bool:
        return bool(np.all(np.abs(self.coeffs.imag) <= tol))


def require_normalized(psi: Wavefunction, auto_normalize: bool = False, tol: float = NORM_TOL):
    if psi.is_normalized(tol):
        return psi
    if auto_normalize:
        return psi.normalized()
    raise NormalizationError(
        f"state has norm {psi.norm():.15g}; enable auto-normalization to renormalize it"
    )


def apply_orbital_rotation(psi: Wavefunction, u: np.ndarray, tol: float = UNITARY_TOL) -> Wavefunction:
    """Return u^{(x)N} |psi>.

    u[:, k] holds the expansion of the new orbital k in the old orbitals.
    Amplitudes below 1e-14 in magnitude are set to zero.
    """
    u = check_unitary(u, tol)
    if u.shape[0] != psi.setting.d:
        raise ShapeError(f"orbital matrix is {u.shape[0]}x{u.shape[0]}, setting has d={psi.setting.d}")
    c = compound_matrix(u, psi.setting.N) @ psi.coeffs
    c[np.abs(c) < PRUNE_TOL] = 0.0
    return Wavefunction(psi.setting, c, original_norm=psi.original_norm)


def random_state(setting: Setting, rng: np.random.Generator, real: bool = False,
                 configs: Iterable[Configuration] | None = None) -> Wavefunction:
    """Haar-like random normalized state, optionally restricted to ``configs``."""
    index = basis_index(setting)
    sel = list(range(setting.dim)) if configs is None else [index[tuple(c)] for c in configs]
    c = np.zeros(setting.dim, dtype=complex)
    v = rng.standard_normal(len(sel))
    if not real:
        v = v + 1j * rng.standard_normal(len(sel))
    c[sel] = v / np.linalg.norm(v)
    return Wavefunction(setting, c)


def random_unitary(d: int, rng: np.random.Generator, real: bool = False) -> np.ndarray:
    """Haar-random orthogonal/unitary matrix via QR with phase correction."""
    z = rng.standard_normal((d, d))
    if not real:
        z = (z + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph
