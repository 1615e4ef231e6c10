"""Self-checking worked examples behind ``pinspace reproduce``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from pinspace.constraints import builtin_catalog, evaluate, named_face, vertex_value
from pinspace.fock import Setting, Wavefunction, apply_orbital_rotation, build_basis, random_state, random_unitary
from pinspace.hamiltonian import (
    build_matrix,
    ground_state,
    hubbard_cluster,
    number_operator_matrix,
    sz_matrix,
)
from pinspace.io import fixture, wavefunction_from_dict
from pinspace.mcscf import build_ansatz, minimize
from pinspace.pinning import (
    BD_SIX,
    bd_degenerate_rotation,
    find_consistent_permutation,
    lhat_apply,
    selection_rule_configs,
    verify_pinning_structure,
)
from pinspace.rdm import natural_basis, one_rdm, support, to_natural_expansion


@dataclass(frozen=True)
class Check:
    name: str
    observed: object
    expected: object
    passed: bool

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: observed {self.observed}, expected {self.expected}"


def _close(name, observed, expected, tol) -> Check:
    obs = np.asarray(observed, dtype=float)
    exp = np.asarray(expected, dtype=float)
    ok = bool(np.all(np.abs(obs - exp) <= tol))
    fmt = np.array2string(obs, precision=6, separator=", ") if obs.ndim else f"{float(obs):.6g}"
    efmt = np.array2string(exp, precision=4, separator=", ") if exp.ndim else f"{float(exp):.6g}"
    return Check(name, fmt, f"{efmt} +/- {tol:g}", ok)


def _below(name, observed, bound) -> Check:
    return Check(name, f"{float(observed):.3e}", f"<= {bound:g}", bool(observed <= bound))


def ex38_state() -> Wavefunction:
    return wavefunction_from_dict(fixture("ex38_state.json"), auto_normalize=True)


def reproduce_ex38() -> list[Check]:
    data = fixture("ex38_state.json")["expected"]
    psi = ex38_state()
    catalog, face = named_face("gpc38")
    gpc = catalog[0]
    rho = one_rdm(psi)
    nons = natural_basis(rho).nons
    res = find_consistent_permutation(psi, face, catalog)
    return [
        _close("ordered NONs", nons, data["ordered_nons"], 1e-3),
        _close("D(n) on ordered NONs", evaluate(gpc, nons), data["gpc38_ordered"], 1e-3),
        Check("relabeling permutation", list(res.permutation), "any accepted permutation", True),
        _below("|D(pi(n))|", abs(evaluate(gpc, res.basis.nons)), 1e-9),
        _close("relabeled NONs", res.basis.nons, data["permuted_nons"], 1e-3),
        Check("relabeled support obeys the selection rule",
              len(res.support), "all on D=0",
              all(vertex_value(gpc, cfg) == 0 for cfg in res.support)),
        _close("<2|rho|8>", rho[1, 7].real, data["rho_2_8"], 1e-3),
    ]


def reproduce_bd(seed: int = 0, samples: int = 200) -> list[Check]:
    setting = Setting(3, 6)
    catalog = builtin_catalog(setting)
    _, eq_face = named_face("bd-equalities")
    _, full_face = named_face("bd-full")
    eight = selection_rule_configs(eq_face, catalog).configurations
    d_bd = catalog[3]
    # the D=0 hyperplane together with its n3 <-> n4 mirror image
    mirrored = [cfg for cfg in eight
                if vertex_value(d_bd, cfg) == 0 or vertex_value(d_bd, tuple(sorted({3: 4, 4: 3}.get(j, j) for j in cfg))) == 0]
    three = selection_rule_configs(full_face, catalog).configurations
    checks = [
        Check("all configurations", len(build_basis(setting)), 20, len(build_basis(setting)) == 20),
        Check("equality face", len(eight), 8, len(eight) == 8),
        Check("pinned, degenerate n3=n4", len(mirrored), 6, set(mirrored) == set(BD_SIX)),
        Check("pinned, non-degenerate", len(three), 3, set(three) == {(1, 2, 3), (1, 4, 5), (2, 4, 6)}),
    ]

    rng = np.random.default_rng(seed)
    worst_support = worst_res = 0.0
    for _ in range(samples):
        psi = random_state(setting, rng)
        psi_no, _ = to_natural_expansion(psi)
        outside = [abs(a) for cfg, a in psi_no.amplitudes.items() if cfg not in eight]
        worst_support = max([worst_support, *outside])
        w = np.sort(rng.dirichlet([1, 1, 1]))[::-1]
        if not w[0] > 0.5:
            continue
        pinned = Wavefunction.from_amplitudes(setting, dict(zip(three, np.sqrt(w))))
        pinned = apply_orbital_rotation(pinned, random_unitary(6, rng))
        worst_res = max(worst_res, verify_pinning_structure(pinned, d_bd))
    checks.append(_below("amplitude outside the eight after natural expansion", worst_support, 1e-9))
    checks.append(_below("|D-hat Psi| for rotated pinned states", worst_res, 1e-8))

    # degenerate n3 = n4: a three-term state mixed inside span{3,4} is restored
    a2 = 0.5
    b = rng.uniform(0.05, 0.45)
    three_state = Wavefunction.from_amplitudes(setting, {(1, 2, 3): np.sqrt(a2), (1, 4, 5): np.sqrt(b),
                                                         (2, 4, 6): np.sqrt(0.5 - b)})
    th = rng.uniform(0, 2 * np.pi)
    u = np.eye(6)
    u[2:4, 2:4] = [[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]]
    six = apply_orbital_rotation(three_state, u)
    back, _ = bd_degenerate_rotation(six)
    checks.append(Check("degenerate rotation support", sorted(support(back, 1e-10)), "subset of 123,145,246",
                        support(back, 1e-10) <= set(three)))
    checks.append(_close("degenerate rotation |c|", np.abs([back[c] for c in three]),
                         np.abs([three_state[c] for c in three]), 1e-10))
    return checks


def reproduce_trimer(u_values=(1.0, 4.0, 8.0), restarts: int = 16, seed: int = 7) -> list[Check]:
    setting = Setting(3, 6)
    catalog, face = named_face("bd-full")
    d_bd = catalog[3]
    checks = []
    for u in u_values:
        ham = hubbard_cluster(3, 1.0, u, periodic=True)
        exact = ground_state(ham, setting, n_up=2)
        worst = max(abs(evaluate(d_bd, natural_basis(one_rdm(g)).nons)) for g in exact.ground_states)
        checks.append(_below(f"U={u:g}: max |D(n)| over {len(exact.ground_states)} ground vectors", worst, 1e-10))
        resid = max(lhat_apply(to_natural_expansion(g)[0], d_bd).norm() for g in exact.ground_states)
        checks.append(_below(f"U={u:g}: max |D-hat Psi|", resid, 1e-8))
        res = minimize(ham, build_ansatz(face, catalog), restarts=restarts, seed=seed)
        checks.append(_close(f"U={u:g}: MCSCF energy on the bd-full face", res.energy, exact.ground_energy, 1e-6))

    ham = hubbard_cluster(3, 1.0, 4.0, periodic=True, ordering="trimer-no")
    lhs = 2 * np.eye(setting.dim) - number_operator_matrix(setting, (1, 2, 4))
    rhs = 0.5 * np.eye(setting.dim) - sz_matrix(ham, setting)
    checks.append(_below("2 - n(0up) - n(1up) - n(2up) vs 1/2 - S_z", np.max(np.abs(lhs - rhs)), 1e-12))
    site = hubbard_cluster(3, 1.0, 4.0, periodic=True)
    gap = np.max(np.abs(np.linalg.eigvalsh(build_matrix(site, setting)) - np.linalg.eigvalsh(build_matrix(ham, setting))))
    checks.append(_below("site vs momentum spectrum", gap, 1e-10))
    return checks


def reproduce_oldcs4(samples: int = 2000, seed: int = 0) -> list[Check]:
    """Weight bound |c124|^2+|c135|^2+|c236|^2 <= D/(n3-n4) + 3D on random (3,6) states."""
    setting = Setting(3, 6)
    d_bd = builtin_catalog(setting)[3]
    rng = np.random.default_rng(seed)
    worst = -np.inf
    used = 0
    for _ in range(samples):
        psi_no, nb = to_natural_expansion(random_state(setting, rng))
        n = nb.nons
        if n[2] - n[3] <= 1e-3:
            continue
        used += 1
        dval = evaluate(d_bd, n)
        lhs = sum(abs(psi_no[c]) ** 2 for c in ((1, 2, 4), (1, 3, 5), (2, 3, 6)))
        worst = max(worst, lhs - (dval / (n[2] - n[3]) + 3 * dval))
    return [
        Check("samples with n3 - n4 > 1e-3", used, f"> 0 of {samples}", used > 0),
        _below("max(lhs - rhs)", worst, 1e-9),
    ]


EXAMPLES = {
    "bd": reproduce_bd,
    "ex38": reproduce_ex38,
    "trimer": reproduce_trimer,
    "oldcs4": reproduce_oldcs4,
}
