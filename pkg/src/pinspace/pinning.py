"""Pinning analysis and selection rules.

For a linear form L and a natural-orbital basis, the induced operator
L(n_1-hat, ..., n_d-hat) is diagonal on configurations with the integer
eigenvalue L evaluated at the configuration's 0/1 vertex spectrum. When a
constraint is saturated by the natural occupation numbers, the state is
annihilated by that operator, so only configurations on the hyperplane can
carry weight in the natural expansion.
"""

from __future__ import annotations

import functools
import itertools
import warnings
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from pinspace.constraints import (
    EQUALITY,
    ConstraintCatalog,
    FaceSpec,
    LinearConstraint,
    evaluate,
    l1_distance,
    pauli_constraint,
    vertex_value,
)
from pinspace.errors import (
    ConfigurationError,
    DegenerateNONWarning,
    NoPermutationError,
    NotPinnedError,
    ShapeError,
)
from pinspace.fock import (
    Configuration,
    Setting,
    Wavefunction,
    _basis,
    _basis_array,
    apply_orbital_rotation,
    basis_index,
    build_basis,
    require_normalized,
)
from pinspace.rdm import (
    DEG_TOL,
    NaturalBasis,
    natural_basis,
    occupation_vector,
    one_rdm,
    support,
    to_natural_expansion,
)

SATURATION_TOL = 1e-8
RESIDUAL_TOL = 1e-8
QUASIPINNING_L1 = 1e-3
SUPPORT_TOL = 1e-9

BD_SIX = ((1, 2, 3), (1, 2, 4), (1, 3, 5), (1, 4, 5), (2, 3, 6), (2, 4, 6))


def lhat_eigenvalues(setting: Setting, c: LinearConstraint) -> np.ndarray:
    """Integer eigenvalue of the induced operator on every basis configuration."""
    if c.d != setting.d:
        raise ShapeError(f"constraint has {c.d} coefficients, setting has d={setting.d}")
    kappa = np.asarray(c.kappa, dtype=np.int64)
    return c.kappa0 + kappa[_basis_array(setting.N, setting.d)].sum(axis=1)


def lhat_apply(psi: Wavefunction, c: LinearConstraint) -> Wavefunction:
    """Apply the natural-orbital induced operator of ``c``.

    ``psi`` must already be expanded in its natural orbitals.
    """
    ev = lhat_eigenvalues(psi.setting, c)
    return Wavefunction(psi.setting, psi.coeffs * ev)


def _block_invariant(c: LinearConstraint, blocks) -> bool:
    # the induced operator is unchanged by rotations inside blocks of equal kappa
    return all(len({c.kappa[j - 1] for j in b}) == 1 for b in blocks)


@dataclass(frozen=True)
class ActiveSpace:
    setting: Setting
    face: FaceSpec
    configurations: tuple[Configuration, ...]
    constraints: tuple[LinearConstraint, ...] = ()

    @property
    def empty(self) -> bool:
        return not self.configurations

    def __len__(self):
        return len(self.configurations)


def selection_rule_configs(face: FaceSpec, catalog: ConstraintCatalog,
                           setting: Setting | None = None) -> ActiveSpace:
    """Configurations whose vertex spectra annihilate every face constraint.

    Evaluated in integer arithmetic. An empty result is returned with
    ``ActiveSpace.empty`` set rather than raised.
    """
    setting = setting or catalog.setting
    if setting.d != catalog.setting.d:
        raise ShapeError(f"catalog is for d={catalog.setting.d}, setting has d={setting.d}")
    cons = face.constraints(catalog)
    configs = tuple(cfg for cfg in build_basis(setting)
                    if all(vertex_value(c, cfg) == 0 for c in cons))
    if not configs:
        warnings.warn(f"face {face.indices} selects no configuration in {setting}", stacklevel=2)
    return ActiveSpace(setting, face, configs, cons)


def active_space_check(psi: Wavefunction, r: int, s: int, tol: float = 1e-10,
                       deg_tol: float = DEG_TOL) -> tuple[float, float, bool]:
    """Evaluate both sides of S^(r,s)(n) = 0 <=> S-hat |psi> = 0.

    Returns ``(value, residual, holds)`` where ``holds`` is true when both
    sides agree at tolerance ``tol``.
    """
    c = pauli_constraint(r, s, psi.setting)
    psi_no, nb = to_natural_expansion(psi, deg_tol)
    value = evaluate(c, nb.nons)
    residual = lhat_apply(psi_no, c).norm()
    return value, residual, (value <= tol) == (residual <= tol)


def verify_pinning_structure(psi: Wavefunction, c: LinearConstraint, tol: float = SATURATION_TOL,
                             deg_tol: float = DEG_TOL) -> float:
    """Norm of the induced operator applied to the natural expansion of a pinned state.

    Raises NotPinnedError when ``|c(n)| > tol``. Warns with
    DegenerateNONWarning when degenerate natural orbitals make the induced
    operator basis dependent; use :func:`find_consistent_permutation` or
    :func:`bd_degenerate_rotation` in that case.
    """
    psi_no, nb = to_natural_expansion(psi, deg_tol)
    value = evaluate(c, nb.nons)
    if abs(value) > tol:
        raise NotPinnedError(f"constraint {c.label or c} has value {value:.3e}, not saturated at tol {tol:g}")
    if not _block_invariant(c, nb.degeneracy_blocks):
        warnings.warn(
            f"degenerate NONs {nb.degeneracy_blocks}; residual depends on the natural-orbital choice",
            DegenerateNONWarning, stacklevel=2,
        )
    return lhat_apply(psi_no, c).norm()


@functools.lru_cache(maxsize=4)
def _all_permutations(d: int) -> np.ndarray:
    perms = np.array(list(itertools.permutations(range(d))), dtype=np.int8)
    perms.setflags(write=False)
    return perms


def _permutation_chunks(d: int, chunk: int = 200_000) -> Iterator[np.ndarray]:
    """All permutations of range(d) in lexicographic order, in array chunks."""
    if d <= 9:
        yield _all_permutations(d)
        return
    it = itertools.permutations(range(d))
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return
        yield np.array(block, dtype=np.int8)


@dataclass(frozen=True)
class ConsistentPermutation:
    """Relabeled natural orbitals reconciling a state with a face.

    ``permutation[k-1]`` is the position (in non-increasing order) of the
    natural orbital that receives label k, so the relabeled occupations are
    ``basis.nons[k-1] = n_sorted[permutation[k-1]-1]``.
    """

    permutation: tuple[int, ...]
    basis: NaturalBasis
    support: frozenset[Configuration]

    def __iter__(self):
        return iter((self.permutation, self.basis, self.support))


def find_consistent_permutation(psi: Wavefunction, face: FaceSpec, catalog: ConstraintCatalog,
                                tol: float = SATURATION_TOL, support_tol: float = SUPPORT_TOL,
                                deg_tol: float = DEG_TOL,
                                auto_normalize: bool = False) -> ConsistentPermutation:
    """Search relabelings of the natural orbitals under which ``psi`` obeys a face.

    A permutation is accepted when every face constraint vanishes (within
    ``tol``) on the relabeled occupation numbers and on the vertex spectrum of
    every configuration in the relabeled natural support (exactly). The
    lexicographically smallest accepted permutation is returned, which also
    keeps the order inside degenerate blocks whenever that is possible.
    """
    psi = require_normalized(psi, auto_normalize)
    nb = natural_basis(one_rdm(psi), deg_tol)
    psi_no = apply_orbital_rotation(psi, nb.unitary.conj().T)
    supp = sorted(support(psi_no, support_tol))
    cons = face.constraints(catalog)
    d = psi.setting.d
    if not cons:
        ident = tuple(range(1, d + 1))
        return ConsistentPermutation(ident, nb, frozenset(supp))

    kap = np.array([c.kappa for c in cons], dtype=np.int64)  # (m, d)
    k0 = np.array([c.kappa0 for c in cons], dtype=np.int64)
    sup_idx = np.array(supp, dtype=np.intp) - 1  # (s, N)
    n = nb.nons
    found = None
    for perms in _permutation_chunks(d):
        vals = k0 + n[perms] @ kap.T  # (M, m)
        cand = perms[np.all(np.abs(vals) <= tol, axis=1)].astype(np.intp)
        if not len(cand):
            continue
        inv = np.empty_like(cand)
        rows = np.arange(len(cand))[:, None]
        inv[rows, cand] = np.arange(d)
        # new label of each support orbital, then exact integer constraint values
        labels = inv[:, sup_idx]  # (c, s, N)
        vv = k0 + kap.T[labels].sum(axis=2)  # (c, s, m)
        ok = np.all(vv == 0, axis=(1, 2))
        if ok.any():
            found = cand[int(np.argmax(ok))]
            break
    if found is None:
        raise NoPermutationError(
            f"no relabeling of the natural orbitals satisfies face {face.indices}; "
            "the state may lie outside the face's active space or have ambiguous degenerate orbitals"
        )
    perm = tuple(int(p) + 1 for p in found)
    inv = np.argsort(found)
    blocks = tuple(tuple(sorted(int(inv[j - 1]) + 1 for j in b)) for b in nb.degeneracy_blocks)
    new_basis = NaturalBasis(nons=nb.nons[found], unitary=nb.unitary[:, found],
                             degeneracy_blocks=blocks)
    relabeled = apply_orbital_rotation(psi, new_basis.unitary.conj().T)
    return ConsistentPermutation(perm, new_basis, support(relabeled, support_tol))


def bd_degenerate_rotation(psi: Wavefunction, deg_tol: float = DEG_TOL,
                           support_tol: float = 1e-10) -> tuple[Wavefunction, np.ndarray]:
    """Rotate the degenerate orbitals 3 and 4 of a pinned (3,6) state.

    ``psi`` is a six-configuration state in its natural orbitals with
    n_3 = n_4. The new orbitals are

        |3~> = (c123 |3> + c124 |4>) / nu,   |4~> = (c124* |3> - c123* |4>) / nu

    with nu = sqrt(|c123|^2 + |c124|^2), after which only 123, 145 and 246
    carry weight. Returns the re-expanded state and the orbital matrix whose
    columns are the new orbitals.
    """
    if (psi.setting.N, psi.setting.d) != (3, 6):
        raise ValueError(f"expected a (3,6) state, got {psi.setting}")
    extra = support(psi, support_tol) - set(BD_SIX)
    if extra:
        raise ValueError(f"state has weight outside the six pinned configurations: {sorted(extra)}")
    n = occupation_vector(psi)
    if abs(n[2] - n[3]) > deg_tol:
        raise ValueError(f"n3 - n4 = {n[2] - n[3]:.3e} exceeds the degeneracy tolerance {deg_tol:g}")
    c123, c124 = psi[(1, 2, 3)], psi[(1, 2, 4)]
    nu = np.sqrt(abs(c123) ** 2 + abs(c124) ** 2)
    if nu == 0:
        raise ValueError("c123 and c124 both vanish; the rotation is undefined")
    u = np.eye(6, dtype=complex)
    u[2, 2], u[3, 2] = c123 / nu, c124 / nu
    u[2, 3], u[3, 3] = np.conj(c124) / nu, -np.conj(c123) / nu
    return apply_orbital_rotation(psi, u.conj().T), u


@dataclass(frozen=True)
class Tolerances:
    saturation: float = SATURATION_TOL
    residual: float = RESIDUAL_TOL
    quasipinning: float = QUASIPINNING_L1
    degeneracy: float = DEG_TOL
    support: float = SUPPORT_TOL


@dataclass(frozen=True)
class ConstraintResult:
    label: str
    kind: str
    value: float
    l1_distance: float
    saturated: bool
    quasipinned: bool
    residual: float | None
    status: str


@dataclass(frozen=True)
class PinningReport:
    setting: Setting
    nons: np.ndarray
    degeneracy_blocks: tuple[tuple[int, ...], ...]
    constraints: tuple[ConstraintResult, ...]
    support: tuple[Configuration, ...]
    catalog_partial: bool = False
    original_norm: float | None = None
    permutation: tuple[int, ...] | None = None
    permuted_nons: np.ndarray | None = None
    permuted_support: tuple[Configuration, ...] | None = None
    tolerances: Tolerances = field(default_factory=Tolerances)

    def saturated(self) -> list[ConstraintResult]:
        return [r for r in self.constraints if r.saturated]

    def to_dict(self) -> dict:
        out = {
            "setting": {"N": self.setting.N, "d": self.setting.d},
            "nons": [float(x) for x in self.nons],
            "degeneracy_blocks": [list(b) for b in self.degeneracy_blocks],
            "catalog_partial": self.catalog_partial,
            "original_norm": self.original_norm,
            "constraints": [
                {
                    "label": r.label,
                    "kind": r.kind,
                    "value": r.value,
                    "l1_distance": r.l1_distance,
                    "saturated": r.saturated,
                    "quasipinned": r.quasipinned,
                    "residual": r.residual,
                    "status": r.status,
                }
                for r in self.constraints
            ],
            "support": [list(c) for c in self.support],
            "tolerances": vars(self.tolerances).copy(),
        }
        if self.permutation is not None:
            out["permutation"] = list(self.permutation)
            out["permuted_nons"] = [float(x) for x in self.permuted_nons]
            out["permuted_support"] = [list(c) for c in self.permuted_support]
        return out


def _status(c: LinearConstraint, value: float, l1: float, saturated: bool, residual, invariant: bool,
            tols: Tolerances) -> str:
    if saturated:
        if not invariant and residual > tols.residual:
            return "degenerate-unresolved"
        return "pinned" if residual <= tols.residual else "residual-mismatch"
    if c.kind == EQUALITY or value < -tols.saturation:
        return "violated"
    return "quasipinned" if l1 <= tols.quasipinning else "free"


def analyze(psi: Wavefunction, catalog: ConstraintCatalog, tolerances: Tolerances | None = None,
            face: FaceSpec | None = None, auto_normalize: bool = False) -> PinningReport:
    """Evaluate every catalog constraint on ``psi`` and check pinning structure.

    With ``face`` given, also run the relabeling search of
    :func:`find_consistent_permutation`; failure there is recorded as a
    missing permutation rather than raised.
    """
    tols = tolerances or Tolerances()
    psi = require_normalized(psi, auto_normalize)
    if catalog.setting.d != psi.setting.d:
        raise ShapeError(f"catalog is for {catalog.setting}, state is {psi.setting}")
    psi_no, nb = to_natural_expansion(psi, tols.degeneracy)
    results = []
    for c in catalog.constraints:
        value = evaluate(c, nb.nons)
        l1 = l1_distance(c, nb.nons)
        saturated = abs(value) <= tols.saturation
        residual = lhat_apply(psi_no, c).norm() if saturated else None
        invariant = _block_invariant(c, nb.degeneracy_blocks)
        results.append(ConstraintResult(c.label, c.kind, value, l1, saturated, l1 <= tols.quasipinning,
                                        residual, _status(c, value, l1, saturated, residual, invariant, tols)))
    order = basis_index(psi.setting)
    supp = tuple(sorted(support(psi_no, tols.support), key=order.__getitem__))
    perm = pnons = psupp = None
    if face is not None:
        try:
            res = find_consistent_permutation(psi, face, catalog, tols.saturation, tols.support, tols.degeneracy)
        except NoPermutationError:
            pass
        else:
            perm, pnons = res.permutation, res.basis.nons
            psupp = tuple(sorted(res.support, key=order.__getitem__))
    return PinningReport(psi.setting, nb.nons, nb.degeneracy_blocks, tuple(results), supp,
                         catalog.partial, psi.original_norm, perm, pnons, psupp, tols)


def configurations_on_hyperplane(c: LinearConstraint, setting: Setting) -> list[Configuration]:
    return [cfg for cfg in _basis(setting.N, setting.d) if vertex_value(c, cfg) == 0]


def restrict(psi: Wavefunction, configs: Sequence[Configuration]) -> Wavefunction:
    """Project onto the span of ``configs`` (not renormalized)."""
    index = basis_index(psi.setting)
    try:
        sel = [index[tuple(c)] for c in configs]
    except KeyError as exc:
        raise ConfigurationError(f"configuration {exc.args[0]} not in {psi.setting}") from exc
    c = np.zeros_like(psi.coeffs)
    c[sel] = psi.coeffs[sel]
    return Wavefunction(psi.setting, c)
