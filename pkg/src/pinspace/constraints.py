"""Pauli and generalized Pauli constraints on occupation-number vectors.

A constraint is an integer affine form ``kappa0 + kappa . n`` that is either
required to be non-negative (``inequality``) or to vanish (``equality``) on
non-increasingly ordered natural occupation numbers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from numbers import Integral, Rational
from typing import Sequence

import numpy as np

from pinspace.errors import (
    DegenerateConstraintError,
    ShapeError,
    UnsupportedSettingError,
)
from pinspace.fock import Configuration, Setting

INEQUALITY = "inequality"
EQUALITY = "equality"
CATALOG_FORMAT_HINT = (
    '{"N":3,"d":8,"constraints":[{"kappa0":9,"kappa":[-19,-11,21,13,5,5,-3,-11],'
    '"kind":"inequality"}]}'
)


@dataclass(frozen=True)
class LinearConstraint:
    kappa0: int
    kappa: tuple[int, ...]
    kind: str = INEQUALITY
    label: str = ""

    def __post_init__(self):
        if not isinstance(self.kappa0, Integral) or not all(isinstance(k, Integral) for k in self.kappa):
            raise ValueError(f"constraint coefficients must be integers: {self.kappa0}, {self.kappa}")
        object.__setattr__(self, "kappa0", int(self.kappa0))
        object.__setattr__(self, "kappa", tuple(int(k) for k in self.kappa))
        if self.kind not in (INEQUALITY, EQUALITY):
            raise ValueError(f"unknown constraint kind {self.kind!r}")
        if not any(self.kappa):
            raise DegenerateConstraintError("constraint normal vector is zero")

    @property
    def d(self) -> int:
        return len(self.kappa)

    def __call__(self, n):
        return evaluate(self, n)

    def __str__(self):
        terms = [f"{self.kappa0}"]
        for j, k in enumerate(self.kappa, start=1):
            if k:
                terms.append(f"{'+' if k > 0 else '-'} {abs(k)}*n{j}")
        rel = "= 0" if self.kind == EQUALITY else ">= 0"
        return f"{' '.join(terms)} {rel}"

    def to_dict(self) -> dict:
        return {"label": self.label, "kappa0": self.kappa0, "kappa": list(self.kappa), "kind": self.kind}

    @classmethod
    def from_dict(cls, data: dict) -> "LinearConstraint":
        return cls(int(data["kappa0"]), tuple(int(k) for k in data["kappa"]),
                   data.get("kind", INEQUALITY), data.get("label", ""))


def evaluate(c: LinearConstraint, n):
    """kappa0 + sum_j kappa_j n_j.

    Integer or rational input is evaluated exactly; floating input returns a
    float.
    """
    if len(n) != c.d:
        raise ShapeError(f"constraint acts on {c.d} occupation numbers, got {len(n)}")
    if isinstance(n, np.ndarray) and n.dtype.kind == "f":
        return float(c.kappa0 + np.dot(c.kappa, n))
    if all(isinstance(x, Rational) for x in n):
        return c.kappa0 + sum(k * x for k, x in zip(c.kappa, n))
    return float(c.kappa0 + np.dot(c.kappa, np.asarray(n, dtype=float)))


def vertex_value(c: LinearConstraint, config: Configuration) -> int:
    """Exact integer value of the constraint at a configuration's vertex spectrum."""
    return c.kappa0 + sum(c.kappa[j - 1] for j in config)


def vertex_spectrum(config: Configuration, d: int) -> np.ndarray:
    """0/1 occupation vector with ones at the occupied orbitals."""
    v = np.zeros(d, dtype=int)
    v[np.asarray(config, dtype=int) - 1] = 1
    return v


def pauli_constraint(r: int, s: int, setting: Setting) -> LinearConstraint:
    """S^(r,s)(n) = sum_{i<=r} (1 - n_i) + sum_{j>d-s} n_j >= 0."""
    N, d = setting.N, setting.d
    if not (0 <= r <= N and 0 <= s <= d - N):
        raise ValueError(f"need 0 <= r <= {N} and 0 <= s <= {d - N}, got r={r}, s={s}")
    if r == 0 and s == 0:
        raise DegenerateConstraintError("S^(0,0) is identically zero")
    kappa = [0] * d
    for i in range(r):
        kappa[i] = -1
    for j in range(d - s, d):
        kappa[j] = 1
    return LinearConstraint(r, tuple(kappa), INEQUALITY, f"S({r},{s})")


def particle_hole_dual(c: LinearConstraint, setting: Setting) -> LinearConstraint:
    """Substitute n_i -> 1 - n_{d-i+1}; the result constrains (d-N, d)."""
    if c.d != setting.d:
        raise ShapeError(f"constraint has {c.d} coefficients, setting has d={setting.d}")
    kappa0 = c.kappa0 + sum(c.kappa)
    kappa = tuple(-k for k in reversed(c.kappa))
    label = f"{c.label or 'constraint'}~ph({setting.d - setting.N},{setting.d})"
    return LinearConstraint(kappa0, kappa, c.kind, label)


def l1_distance(c: LinearConstraint, n) -> float:
    """l1 distance from n to the hyperplane c = 0, |c(n)| / max_j |kappa_j|."""
    scale = max(abs(k) for k in c.kappa)
    if scale == 0:
        raise DegenerateConstraintError("constraint normal vector is zero")
    return abs(evaluate(c, n)) / scale


def in_pauli_simplex(n, num_particles: int, tol: float = 1e-10) -> bool:
    """1 >= n_1 >= ... >= n_d >= 0 and sum(n) = N, all up to ``tol``."""
    n = np.asarray(n, dtype=float)
    if n.size == 0:
        return False
    if n[0] > 1 + tol or n[-1] < -tol:
        return False
    if np.any(np.diff(n) > tol):
        return False
    return abs(n.sum() - num_particles) <= tol


@dataclass(frozen=True)
class ConstraintCatalog:
    setting: Setting
    constraints: tuple[LinearConstraint, ...]
    provenance: tuple[str, ...] = ()
    partial: bool = False

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        for c in self.constraints:
            if c.d != self.setting.d:
                raise ShapeError(f"constraint {c.label!r} has {c.d} coefficients, setting has d={self.setting.d}")
        prov = tuple(self.provenance) or ("",) * len(self.constraints)
        if len(prov) != len(self.constraints):
            raise ValueError("one provenance entry per constraint is required")
        object.__setattr__(self, "provenance", prov)

    def __len__(self):
        return len(self.constraints)

    def __getitem__(self, k) -> LinearConstraint:
        return self.constraints[k]

    def to_dict(self) -> dict:
        return {
            "N": self.setting.N,
            "d": self.setting.d,
            "partial": self.partial,
            "constraints": [dict(c.to_dict(), source=p) for c, p in zip(self.constraints, self.provenance)],
        }

    @classmethod
    def from_dict(cls, data: dict, default_source: str = "") -> "ConstraintCatalog":
        try:
            setting = Setting(int(data["N"]), int(data["d"]))
            entries = data["constraints"]
            constraints = [LinearConstraint.from_dict(e) for e in entries]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed catalog, expected {CATALOG_FORMAT_HINT}") from exc
        source = data.get("source", default_source)
        provenance = [e.get("source", source) for e in entries]
        return cls(setting, constraints, provenance, bool(data.get("partial", False)))


@dataclass(frozen=True)
class FaceSpec:
    """Indices of catalog constraints imposed as equalities."""

    indices: tuple[int, ...] = field(default=())
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(k) for k in self.indices))

    def constraints(self, catalog: ConstraintCatalog) -> tuple[LinearConstraint, ...]:
        for k in self.indices:
            if not 0 <= k < len(catalog):
                raise IndexError(f"face index {k} outside catalog of length {len(catalog)}")
        return tuple(catalog[k] for k in self.indices)


def load_catalog(path) -> ConstraintCatalog:
    with open(path) as fh:
        return ConstraintCatalog.from_dict(json.load(fh), default_source=f"file {path}")


def _data_json(name: str) -> dict:
    return json.loads(resources.files("pinspace.data").joinpath(name).read_text())


def builtin_catalog(setting: Setting) -> ConstraintCatalog:
    """Shipped constraint lists for (1,d), (2,d), (3,6) and the partial (3,8) list."""
    N, d = setting.N, setting.d
    if N == 1:
        cons = [LinearConstraint(-1, tuple(1 if j == 0 else 0 for j in range(d)), EQUALITY, "n1=1")]
        cons += [LinearConstraint(0, tuple(1 if j == i else 0 for j in range(d)), EQUALITY, f"n{i + 1}=0")
                 for i in range(1, d)]
        return ConstraintCatalog(setting, cons, ["one-fermion setting"] * len(cons))
    if N == 2:
        cons = []
        for k in range(1, d // 2 + 1):
            kap = [0] * d
            kap[2 * k - 2], kap[2 * k - 1] = 1, -1
            cons.append(LinearConstraint(0, tuple(kap), EQUALITY, f"n{2 * k - 1}=n{2 * k}"))
        if d % 2:
            cons.append(LinearConstraint(0, tuple(1 if j == d - 1 else 0 for j in range(d)), EQUALITY, f"n{d}=0"))
        return ConstraintCatalog(setting, cons, ["two-fermion setting"] * len(cons))
    if (N, d) in ((3, 6), (3, 8)):
        return ConstraintCatalog.from_dict(_data_json(f"catalog_{N}_{d}.json"))
    raise UnsupportedSettingError(
        f"no builtin constraints for setting {setting}; supply a catalog file of the form {CATALOG_FORMAT_HINT}"
    )


def named_faces() -> dict[str, dict]:
    return _data_json("faces.json")


def named_face(name: str) -> tuple[ConstraintCatalog, FaceSpec]:
    faces = named_faces()
    if name not in faces:
        raise KeyError(f"unknown face {name!r}; known faces: {', '.join(sorted(faces))}")
    entry = faces[name]
    catalog = builtin_catalog(Setting(entry["N"], entry["d"]))
    return catalog, FaceSpec(tuple(entry["indices"]), name)


def pauli_catalog(setting: Setting, pairs: Sequence[tuple[int, int]]) -> ConstraintCatalog:
    """Catalog of Pauli constraints S^(r,s), e.g. to describe a complete active space."""
    cons = [pauli_constraint(r, s, setting) for r, s in pairs]
    return ConstraintCatalog(setting, cons, ["Pauli exclusion"] * len(cons))

