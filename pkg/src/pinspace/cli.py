"""Command-line front end: ``pinspace <subcommand> ...``.

Exit codes: 0 success, 2 input error, 3 computation error, 4 a reproduction
check failed. JSON output prints floats with 12 significant digits, so
identical inputs give byte-identical files.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from pinspace.constraints import (
    ConstraintCatalog,
    FaceSpec,
    builtin_catalog,
    named_face,
    named_faces,
    pauli_catalog,
)
from pinspace.errors import (
    ConfigurationError,
    InvalidSettingError,
    NormalizationError,
    PinspaceError,
    UnsupportedSettingError,
)
from pinspace.fock import Setting
from pinspace.hamiltonian import ManyBodyOperator, ground_state, hubbard_cluster
from pinspace.io import InputError, load_json, load_wavefunction, wavefunction_to_dict, write_json
from pinspace.mcscf import DEFAULT_SEED, build_ansatz, minimize
from pinspace.pinning import Tolerances, analyze, selection_rule_configs
from pinspace.rdm import DEG_TOL, natural_basis, one_rdm, to_natural_expansion
from pinspace.reproduce import EXAMPLES

EXIT_OK, EXIT_INPUT, EXIT_COMPUTE, EXIT_MISMATCH = 0, 2, 3, 4

INPUT_ERRORS = (InputError, NormalizationError, ConfigurationError, InvalidSettingError,
                UnsupportedSettingError, KeyError, OSError)


def _setting(text: str) -> Setting:
    try:
        return Setting.parse(text)
    except (ValueError, PinspaceError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _catalog(path) -> ConstraintCatalog:
    try:
        return ConstraintCatalog.from_dict(load_json(path), default_source=f"file {path}")
    except InputError:
        raise
    except (ValueError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _operator(path) -> ManyBodyOperator:
    try:
        return ManyBodyOperator.from_dict(load_json(path))
    except InputError:
        raise
    except (ValueError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _resolve_face(text: str, setting: Setting | None, catalog_path=None) -> tuple[ConstraintCatalog, FaceSpec]:
    """Face argument: a named face, ``trivial``, ``cas:r,s`` or comma-separated catalog indices."""
    if text in named_faces() and catalog_path is None:
        catalog, face = named_face(text)
        if setting is not None and catalog.setting != setting:
            raise InputError(f"face {text!r} belongs to setting {catalog.setting}, not {setting}")
        return catalog, face
    if setting is None:
        raise InputError(f"face {text!r} needs an explicit setting")
    if text.startswith("cas:"):
        try:
            r, s = (int(x) for x in text[4:].split(","))
        except ValueError as exc:
            raise InputError(f"expected cas:r,s, got {text!r}") from exc
        return pauli_catalog(setting, [(r, s)]), FaceSpec((0,), text)
    catalog = _catalog(catalog_path) if catalog_path else builtin_catalog(setting)
    if catalog.setting != setting:
        raise InputError(f"catalog is for {catalog.setting}, not {setting}")
    if text == "trivial":
        return catalog, FaceSpec((), "trivial")
    try:
        indices = tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        known = ", ".join(sorted(named_faces()))
        raise InputError(f"unknown face {text!r}; use one of {known}, 'trivial', 'cas:r,s' or indices") from exc
    for k in indices:
        if not 0 <= k < len(catalog):
            raise InputError(f"face index {k} outside catalog of length {len(catalog)}")
    return catalog, FaceSpec(indices, text)


def _tolerances(args) -> Tolerances:
    return Tolerances(args.saturation_tol, args.residual_tol, args.quasipinning_tol,
                      args.deg_tol, args.support_tol)


def _complex_matrix(m: np.ndarray) -> dict:
    return {"re": np.real(m).tolist(), "im": np.imag(m).tolist()}


def cmd_analyze(args) -> int:
    psi = load_wavefunction(args.state, args.auto_normalize)
    face = None
    if args.face:
        catalog, face = _resolve_face(args.face, psi.setting, args.catalog)
    elif args.catalog:
        catalog = _catalog(args.catalog)
    else:
        catalog = builtin_catalog(psi.setting)
    report = analyze(psi, catalog, _tolerances(args), face)
    write_json(report.to_dict(), args.report)
    return EXIT_OK


def cmd_enumerate(args) -> int:
    catalog, face = _resolve_face(args.face, args.setting, args.catalog)
    active = selection_rule_configs(face, catalog, args.setting)
    for cfg in active.configurations:
        print(" ".join(str(j) for j in cfg))
    return EXIT_OK


def cmd_rotate_no(args) -> int:
    psi = load_wavefunction(args.state, args.auto_normalize)
    psi_no, nb = to_natural_expansion(psi, args.deg_tol)
    out = wavefunction_to_dict(psi_no, args.threshold)
    out["nons"] = nb.nons
    out["degeneracy_blocks"] = [list(b) for b in nb.degeneracy_blocks]
    out["natural_orbitals"] = _complex_matrix(nb.unitary)
    write_json(out, args.out)
    return EXIT_OK


def cmd_rdm(args) -> int:
    psi = load_wavefunction(args.state, args.auto_normalize)
    rho = one_rdm(psi)
    nb = natural_basis(rho, args.deg_tol)
    write_json({"N": psi.setting.N, "d": psi.setting.d, "rho": _complex_matrix(rho), "nons": nb.nons,
                "degeneracy_blocks": [list(b) for b in nb.degeneracy_blocks]}, args.out)
    return EXIT_OK


def cmd_ham_hubbard(args) -> int:
    op = hubbard_cluster(args.sites, args.t, args.u, args.periodic, args.ordering)
    write_json(op.to_dict(), args.out)
    return EXIT_OK


def cmd_ham_ground(args) -> int:
    op = _operator(args.ham)
    res = ground_state(op, args.setting, args.n_up, args.deg_tol)
    write_json({
        "setting": {"N": args.setting.N, "d": args.setting.d},
        "n_up": args.n_up,
        "energies": res.energies[: args.levels],
        "ground_energy": res.ground_energy,
        "ground_degeneracy": len(res.ground_states),
        "ground_states": [wavefunction_to_dict(g, 1e-14) for g in res.ground_states],
    }, args.out)
    return EXIT_OK


def cmd_mcscf(args) -> int:
    op = _operator(args.ham)
    catalog, face = _resolve_face(args.face, args.setting, args.catalog)
    ansatz = build_ansatz(face, catalog, args.setting, args.mode)
    res = minimize(op, ansatz, restarts=args.restarts, max_iter=args.max_iter, tol=args.gtol,
                   seed=args.seed, gradient=args.gradient)
    out = {"face": face.name, "mode": args.mode, "seed": args.seed,
           "active_space": [list(c) for c in ansatz.configurations]}
    out.update(res.to_dict())
    write_json(out, args.out)
    return EXIT_OK


def cmd_reproduce(args) -> int:
    names = sorted(EXAMPLES) if args.example == "all" else [args.example]
    failed = 0
    for name in names:
        print(f"== {name}")
        for check in EXAMPLES[name]():
            print(check.line())
            failed += not check.passed
    print(f"{'FAIL' if failed else 'PASS'}: {failed} failed check(s)")
    return EXIT_MISMATCH if failed else EXIT_OK


def cmd_constraints_list(args) -> int:
    catalog = _catalog(args.catalog) if args.catalog else builtin_catalog(args.setting)
    print(f"setting {catalog.setting}{' (partial list)' if catalog.partial else ''}")
    for k, (c, src) in enumerate(zip(catalog.constraints, catalog.provenance)):
        print(f"[{k}] {c.label}: {c}    source: {src}")
    return EXIT_OK


def _add_state_args(p):
    p.add_argument("--state", required=True, help="state JSON {N, d, terms:[{occ, re, im}]}")
    p.add_argument("--auto-normalize", action="store_true",
                   help="renormalize an unnormalized state instead of rejecting it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pinspace", description=__doc__.splitlines()[0],
                                     formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("analyze", help="evaluate constraints and pinning structure of a state", formatter_class=fmt)
    _add_state_args(p)
    p.add_argument("--catalog", help="catalog JSON; default is the builtin catalog of the state's setting")
    p.add_argument("--face", help="also search for a relabeling consistent with this face")
    p.add_argument("--report", default="-", help="output path, '-' for stdout")
    defaults = Tolerances()
    p.add_argument("--saturation-tol", type=float, default=defaults.saturation)
    p.add_argument("--residual-tol", type=float, default=defaults.residual)
    p.add_argument("--quasipinning-tol", type=float, default=defaults.quasipinning,
                   help="l1 distance below which a constraint counts as quasipinned")
    p.add_argument("--deg-tol", type=float, default=defaults.degeneracy)
    p.add_argument("--support-tol", type=float, default=defaults.support)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("enumerate", help="list configurations allowed by the selection rule of a face",
                       formatter_class=fmt)
    p.add_argument("setting", type=_setting, help="N,d")
    p.add_argument("face", help="named face, 'trivial', 'cas:r,s' or catalog indices like 0,1,2")
    p.add_argument("--catalog", help="catalog JSON used with index faces")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("rotate-no", help="re-expand a state in its natural orbitals", formatter_class=fmt)
    _add_state_args(p)
    p.add_argument("--deg-tol", type=float, default=DEG_TOL)
    p.add_argument("--threshold", type=float, default=1e-14, help="drop smaller amplitudes from the output")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_rotate_no)

    p = sub.add_parser("rdm", help="one-particle density matrix tools")
    rsub = p.add_subparsers(dest="rdm_command", required=True)
    q = rsub.add_parser("dump", help="write rho and its eigenvalues", formatter_class=fmt)
    _add_state_args(q)
    q.add_argument("--deg-tol", type=float, default=DEG_TOL)
    q.add_argument("--out", default="-")
    q.set_defaults(func=cmd_rdm)

    p = sub.add_parser("ham", help="Hamiltonian construction and exact diagonalization")
    hsub = p.add_subparsers(dest="ham_command", required=True)
    q = hsub.add_parser("hubbard", help="write a Hubbard cluster Hamiltonian", formatter_class=fmt)
    q.add_argument("--sites", type=int, required=True)
    q.add_argument("--t", type=float, default=1.0)
    q.add_argument("--u", type=float, default=0.0)
    q.add_argument("--periodic", action="store_true")
    q.add_argument("--ordering", choices=("site", "momentum", "trimer-no"), default="site")
    q.add_argument("--out", default="-")
    q.set_defaults(func=cmd_ham_hubbard)
    q = hsub.add_parser("ground", help="dense diagonalization in a particle-number sector", formatter_class=fmt)
    q.add_argument("--ham", required=True)
    q.add_argument("--setting", type=_setting, required=True)
    q.add_argument("--n-up", type=int, help="restrict to this number of spin-up electrons")
    q.add_argument("--deg-tol", type=float, default=1e-8)
    q.add_argument("--levels", type=int, default=10, help="number of lowest energies to print")
    q.add_argument("--out", default="-")
    q.set_defaults(func=cmd_ham_ground)

    p = sub.add_parser("mcscf", help="minimize the energy over the active space of a face", formatter_class=fmt)
    p.add_argument("--ham", required=True)
    p.add_argument("--setting", type=_setting, required=True)
    p.add_argument("--face", required=True, help="named face, 'trivial', 'cas:r,s' or catalog indices")
    p.add_argument("--catalog")
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--mode", choices=("real", "complex"), default="real")
    p.add_argument("--gradient", choices=("analytic", "central"), default="analytic")
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--gtol", type=float, default=1e-6, help="gradient-norm convergence threshold")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_mcscf)

    p = sub.add_parser("reproduce", help="run a self-checking worked example")
    p.add_argument("example", choices=sorted(EXAMPLES) + ["all"])
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("constraints", help="inspect constraint catalogs")
    csub = p.add_subparsers(dest="constraints_command", required=True)
    q = csub.add_parser("list", help="print a catalog with provenance")
    q.add_argument("--setting", type=_setting)
    q.add_argument("--catalog")
    q.set_defaults(func=cmd_constraints_list)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "constraints" and args.setting is None and args.catalog is None:
        print("pinspace constraints list: need --setting or --catalog", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except INPUT_ERRORS as exc:
        print(f"pinspace: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (PinspaceError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"pinspace: computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
