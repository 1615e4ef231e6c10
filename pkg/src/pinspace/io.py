"""JSON formats for states, catalogs, Hamiltonians and reports."""

from __future__ import annotations

import json
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from pinspace.errors import PinspaceError
from pinspace.fock import Setting, Wavefunction, basis_index, check_configuration

SIG_DIGITS = 12


class InputError(PinspaceError, ValueError):
    """Unreadable or malformed input file."""


def load_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def wavefunction_from_dict(data: dict, auto_normalize: bool = False) -> Wavefunction:
    """Parse ``{"N":..,"d":..,"terms":[{"occ":[..],"re":..,"im":..}]}``.

    ``occ`` lists must be strictly increasing and may not repeat.
    """
    try:
        setting = Setting(int(data["N"]), int(data["d"]))
        terms = data["terms"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed state: {exc}") from exc
    index = basis_index(setting)
    c = np.zeros(setting.dim, dtype=complex)
    seen = set()
    for t in terms:
        try:
            cfg = check_configuration(t["occ"], setting)
            amp = complex(float(t.get("re", 0.0)), float(t.get("im", 0.0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed term {t!r}: {exc}") from exc
        if cfg in seen:
            raise InputError(f"duplicate configuration {list(cfg)}")
        seen.add(cfg)
        c[index[cfg]] = amp
    psi = Wavefunction(setting, c)
    return psi.normalized() if auto_normalize and not psi.is_normalized() else psi


def wavefunction_to_dict(psi: Wavefunction, threshold: float = 0.0) -> dict:
    terms = [{"occ": list(cfg), "re": a.real, "im": a.imag}
             for cfg, a in psi.amplitudes.items() if abs(a) > threshold]
    return {"N": psi.setting.N, "d": psi.setting.d, "terms": terms}


def load_wavefunction(path, auto_normalize: bool = False) -> Wavefunction:
    return wavefunction_from_dict(load_json(path), auto_normalize)


def fixture(name: str) -> dict:
    """Bundled data file from ``pinspace/data``."""
    return json.loads(resources.files("pinspace.data").joinpath(name).read_text())


def _round(obj):
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _round(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        x = float(f"{x:.{SIG_DIGITS}g}")
        return 0.0 if x == 0 else x
    if isinstance(obj, complex):
        return {"re": _round(obj.real), "im": _round(obj.imag)}
    return obj


def dumps(obj) -> str:
    """JSON text with every float rounded to 12 significant digits."""
    return json.dumps(_round(obj), indent=2, sort_keys=False) + "\n"


def write_json(obj, path=None):
    text = dumps(obj)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)
