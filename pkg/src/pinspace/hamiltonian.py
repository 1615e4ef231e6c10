"""Second-quantized Hamiltonians and dense exact diagonalization.

Two-body terms follow H_2 = 1/2 sum V[p,q,r,s] f+_p f+_q f_s f_r, stored as
a dense array with 0-based indices and the symmetry V[p,q,r,s] = V[q,p,s,r].
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from pinspace.errors import ShapeError, SymmetryError
from pinspace.fock import (
    Configuration,
    Setting,
    Wavefunction,
    _basis,
    apply_string,
    basis_index,
)
from pinspace.rdm import _hopping_table

HERMITIAN_TOL = 1e-10
UP, DOWN = 1, -1

# spin-momentum labels of the six trimer orbitals in the natural-orbital order
# used for the Borland-Dennis comparison: 0up, 1up, 0dn, 2up, 2dn, 1dn
TRIMER_NO_ORDER = ((0, UP), (1, UP), (0, DOWN), (2, UP), (2, DOWN), (1, DOWN))


@dataclass(frozen=True, eq=False)
class ManyBodyOperator:
    """One- plus two-body operator on d spin-orbitals.

    ``spins`` optionally tags each orbital as up (+1) or down (-1) so that
    matrices can be restricted to a fixed number of up electrons.
    """

    one_body: np.ndarray
    two_body: np.ndarray | None = None
    spins: tuple[int, ...] | None = None
    labels: tuple[str, ...] | None = field(default=None)

    def __post_init__(self):
        h = np.array(self.one_body, dtype=complex)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ShapeError(f"one-body matrix must be square, got {h.shape}")
        d = h.shape[0]
        if np.max(np.abs(h - h.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise SymmetryError("one-body matrix is not Hermitian")
        v = np.zeros((d,) * 4, dtype=complex) if self.two_body is None else np.array(self.two_body, dtype=complex)
        if v.shape != (d,) * 4:
            raise ShapeError(f"two-body tensor must have shape {(d,) * 4}, got {v.shape}")
        if np.max(np.abs(v - v.transpose(1, 0, 3, 2)), initial=0.0) > HERMITIAN_TOL:
            raise SymmetryError("two-body tensor violates V[p,q,r,s] = V[q,p,s,r]")
        if self.spins is not None and len(self.spins) != d:
            raise ShapeError(f"need {d} spin labels, got {len(self.spins)}")
        h.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "one_body", h)
        object.__setattr__(self, "two_body", v)

    @property
    def d(self) -> int:
        return self.one_body.shape[0]

    @classmethod
    def from_terms(cls, one_body, terms: Sequence[tuple[int, int, int, int, complex]],
                   spins=None, labels=None) -> "ManyBodyOperator":
        """Build from 1-based ``(p, q, r, s, value)`` two-body terms.

        A term without its (q, p, s, r) partner gets the partner added with
        the same value; conflicting partners are rejected.
        """
        h = np.asarray(one_body, dtype=complex)
        d = h.shape[0]
        given: dict[tuple[int, int, int, int], complex] = {}
        for p, q, r, s, val in terms:
            key = (p - 1, q - 1, r - 1, s - 1)
            if min(key) < 0 or max(key) >= d:
                raise ShapeError(f"two-body index {(p, q, r, s)} outside 1..{d}")
            given[key] = given.get(key, 0) + complex(val)
        v = np.zeros((d,) * 4, dtype=complex)
        for (p, q, r, s), val in given.items():
            mirror = (q, p, s, r)
            if mirror in given and abs(given[mirror] - val) > HERMITIAN_TOL:
                raise SymmetryError(f"terms {(p + 1, q + 1, r + 1, s + 1)} and its mirror disagree")
            v[p, q, r, s] = val
            v[mirror] = val
        return cls(h, v, spins, labels)

    def two_body_terms(self, tol: float = 0.0) -> list[tuple[int, int, int, int, complex]]:
        idx = np.argwhere(np.abs(self.two_body) > tol)
        return [(int(p) + 1, int(q) + 1, int(r) + 1, int(s) + 1, complex(self.two_body[p, q, r, s]))
                for p, q, r, s in idx]

    def transform(self, u: np.ndarray, spins=None, labels=None) -> "ManyBodyOperator":
        """Express the operator in new orbitals, the columns of unitary ``u``."""
        u = np.asarray(u, dtype=complex)
        h = u.conj().T @ self.one_body @ u
        v = np.einsum("ap,bq,abcd,cr,ds->pqrs", u.conj(), u.conj(), self.two_body, u, u, optimize=True)
        return ManyBodyOperator(h, v, spins, labels)

    def to_dict(self) -> dict:
        def num(z):
            return float(z.real) if z.imag == 0 else [float(z.real), float(z.imag)]

        out = {
            "d": self.d,
            "one_body": [[num(z) for z in row] for row in self.one_body],
            "two_body": [{"p": p, "q": q, "r": r, "s": s, "re": z.real, "im": z.imag}
                         for p, q, r, s, z in self.two_body_terms()],
        }
        if self.spins is not None:
            out["spins"] = list(self.spins)
        if self.labels is not None:
            out["labels"] = list(self.labels)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ManyBodyOperator":
        def num(z):
            if isinstance(z, (list, tuple)):
                return complex(z[0], z[1])
            if isinstance(z, dict):
                return complex(z.get("re", 0.0), z.get("im", 0.0))
            return complex(z)

        try:
            d = int(data["d"])
            h = np.array([[num(z) for z in row] for row in data["one_body"]], dtype=complex)
            terms = [(int(t["p"]), int(t["q"]), int(t["r"]), int(t["s"]),
                      complex(t.get("re", 0.0), t.get("im", 0.0))) for t in data.get("two_body", [])]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed Hamiltonian description: {exc}") from exc
        if h.shape != (d, d):
            raise ShapeError(f"one_body must be {d}x{d}, got {h.shape}")
        spins = tuple(int(x) for x in data["spins"]) if "spins" in data else None
        labels = tuple(data["labels"]) if "labels" in data else None
        return cls.from_terms(h, terms, spins, labels)


def _bonds(n_sites: int, periodic: bool) -> set[tuple[int, int]]:
    bonds = {(a, a + 1) for a in range(n_sites - 1)}
    if periodic and n_sites > 2:
        bonds.add((0, n_sites - 1))
    return bonds


def momentum_orbitals(n_sites: int) -> np.ndarray:
    """Columns are plane waves exp(2 pi i k a / L) / sqrt(L), k = 0..L-1."""
    a = np.arange(n_sites)
    return np.exp(2j * np.pi * np.outer(a, a) / n_sites) / np.sqrt(n_sites)


def hubbard_cluster(n_sites: int, t: float = 1.0, u: float = 0.0, periodic: bool = False,
                    ordering: str = "site") -> ManyBodyOperator:
    """Hubbard chain or ring with hopping -t and on-site repulsion u.

    ``ordering`` selects the spin-orbital basis:

    ``"site"``
        site-major, up before down: a-up -> 2a+1, a-down -> 2a+2 (1-based,
        sites a = 0..L-1).
    ``"momentum"``
        the same pattern over plane waves k = 0..L-1.
    ``"trimer-no"``
        L = 3 only; plane waves ordered 0up, 1up, 0dn, 2up, 2dn, 1dn.

    A two-site ring has a single bond, identical to the open chain.
    """
    if n_sites < 2:
        raise ValueError(f"a Hubbard cluster needs at least 2 sites, got {n_sites}")
    d = 2 * n_sites
    h = np.zeros((d, d))
    for a, b in _bonds(n_sites, periodic):
        for sigma in (0, 1):
            h[2 * a + sigma, 2 * b + sigma] = h[2 * b + sigma, 2 * a + sigma] = -t
    v = np.zeros((d,) * 4)
    for a in range(n_sites):
        up, dn = 2 * a, 2 * a + 1
        v[up, dn, up, dn] = v[dn, up, dn, up] = u
    spins = tuple(UP if k % 2 == 0 else DOWN for k in range(d))
    site = ManyBodyOperator(h, v, spins, tuple(f"{a}{'u' if s == UP else 'd'}" for a in range(n_sites) for s in (UP, DOWN)))
    if ordering == "site":
        return site
    plane = momentum_orbitals(n_sites)
    if ordering == "momentum":
        order = [(k, s) for k in range(n_sites) for s in (UP, DOWN)]
    elif ordering == "trimer-no":
        if n_sites != 3:
            raise ValueError("the 'trimer-no' ordering needs exactly 3 sites")
        order = list(TRIMER_NO_ORDER)
    else:
        raise ValueError(f"unknown ordering {ordering!r}")
    w = np.zeros((d, d), dtype=complex)
    for col, (k, s) in enumerate(order):
        offset = 0 if s == UP else 1
        w[offset::2, col] = plane[:, k]
    return site.transform(w, tuple(s for _, s in order),
                          tuple(f"k{k}{'u' if s == UP else 'd'}" for k, s in order))


@functools.lru_cache(maxsize=32)
def _pair_table(n: int, d: int):
    """Nonzero <a| f+_p f+_q f_s f_r |b> as arrays (a, b, p, q, r, s, sign)."""
    basis = _basis(n, d)
    index = basis_index(Setting(n, d))
    rows = []
    for b, cfg in enumerate(basis):
        for r in cfg:
            for s in cfg:
                if r == s:
                    continue
                for p in range(1, d + 1):
                    for q in range(1, d + 1):
                        if p == q:
                            continue
                        res = apply_string([("+", p), ("+", q), ("-", s), ("-", r)], cfg, d)
                        if res is not None:
                            sign, new = res
                            rows.append((index[new], b, p - 1, q - 1, r - 1, s - 1, sign))
    if not rows:
        return np.zeros((7, 0), dtype=np.intp)
    return np.array(rows, dtype=np.intp).T


def sector_configurations(op: ManyBodyOperator, setting: Setting, n_up: int | None = None) -> list[Configuration]:
    basis = _basis(setting.N, setting.d)
    if n_up is None:
        return list(basis)
    if op.spins is None:
        raise ValueError("operator carries no spin labels; cannot select an S_z sector")
    return [cfg for cfg in basis if sum(1 for j in cfg if op.spins[j - 1] == UP) == n_up]


def build_matrix(op: ManyBodyOperator, setting: Setting, n_up: int | None = None) -> np.ndarray:
    """Dense matrix <j|H|i> over the configuration basis.

    With ``n_up`` the rows and columns are restricted to
    :func:`sector_configurations` in that order.
    """
    if op.d != setting.d:
        raise ShapeError(f"operator acts on d={op.d} orbitals, setting has d={setting.d}")
    dim = setting.dim
    m = np.zeros((dim, dim), dtype=complex)
    a, b, i, j, sign = _hopping_table(setting.N, setting.d)
    np.add.at(m, (a, b), sign * op.one_body[j, i])
    if np.any(op.two_body) and setting.N >= 2:
        a, b, p, q, r, s, sign = _pair_table(setting.N, setting.d)
        np.add.at(m, (a, b), 0.5 * sign * op.two_body[p, q, r, s])
    err = np.max(np.abs(m - m.conj().T), initial=0.0)
    if err > HERMITIAN_TOL:
        raise SymmetryError(f"assembled matrix is not Hermitian (max asymmetry {err:.3g})")
    m = (m + m.conj().T) / 2
    if n_up is not None:
        index = basis_index(setting)
        sel = [index[c] for c in sector_configurations(op, setting, n_up)]
        m = m[np.ix_(sel, sel)]
    return m


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    energies: np.ndarray
    states: tuple[Wavefunction, ...]
    configurations: tuple[Configuration, ...]
    residuals: np.ndarray
    deg_tol: float

    @property
    def ground_energy(self) -> float:
        return float(self.energies[0])

    @property
    def ground_states(self) -> tuple[Wavefunction, ...]:
        """The full (possibly degenerate) ground manifold."""
        k = int(np.sum(self.energies - self.energies[0] <= self.deg_tol))
        return self.states[:k]


def ground_state(op: ManyBodyOperator, setting: Setting, n_up: int | None = None,
                 deg_tol: float = 1e-8) -> SpectrumResult:
    """Full dense diagonalization; eigenvectors are returned as states of ``setting``."""
    configs = sector_configurations(op, setting, n_up)
    if not configs:
        raise ValueError(f"sector n_up={n_up} is empty in {setting}")
    m = build_matrix(op, setting, n_up)
    w, v = np.linalg.eigh(m)
    residuals = np.linalg.norm(m @ v - v * w, axis=0)
    index = basis_index(setting)
    sel = [index[c] for c in configs]
    states = []
    for k in range(len(w)):
        c = np.zeros(setting.dim, dtype=complex)
        c[sel] = v[:, k]
        states.append(Wavefunction(setting, c))
    return SpectrumResult(w, tuple(states), tuple(configs), residuals, deg_tol)


def number_operator_matrix(setting: Setting, orbitals: Sequence[int]) -> np.ndarray:
    """Diagonal matrix of sum_j n_j over the given 1-based orbitals."""
    occ = set(orbitals)
    return np.diag([float(sum(1 for j in cfg if j in occ)) for cfg in _basis(setting.N, setting.d)])


def sz_matrix(op: ManyBodyOperator, setting: Setting) -> np.ndarray:
    """S_z / hbar = (N_up - N_down) / 2 as a diagonal matrix."""
    if op.spins is None:
        raise ValueError("operator carries no spin labels")
    return np.diag([0.5 * sum(op.spins[j - 1] for j in cfg) for cfg in _basis(setting.N, setting.d)])
