"""Energy minimization over pinning-selected multiconfigurational ansatzes.

The ansatz is u^{(x)N} sum_i c_i |i> with the configurations i fixed by a
polytope face and both the coefficients and the orbital rotation u = exp(K)
free. Coefficients enter projectively (c = x / |x|), K is a real
antisymmetric generator in the default real mode and a general
anti-Hermitian one in complex mode.

Only the linear ansatz space is optimized. Restricting instead to states
whose ordered occupation numbers lie on the face (with the induced
self-consistency conditions) can never give a lower energy than this.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from pinspace.constraints import ConstraintCatalog, FaceSpec
from pinspace.errors import EmptyActiveSpaceError, ShapeError
from pinspace.fock import Configuration, Setting, Wavefunction, _basis, basis_index, compound_matrix
from pinspace.hamiltonian import ManyBodyOperator, build_matrix
from pinspace.pinning import ActiveSpace, selection_rule_configs
from pinspace.rdm import _hopping_table

logger = logging.getLogger(__name__)

DEFAULT_SEED = 7
REAL, COMPLEX = "real", "complex"


@dataclass(frozen=True)
class AnsatzSpace:
    active: ActiveSpace
    mode: str = REAL

    def __post_init__(self):
        if self.mode not in (REAL, COMPLEX):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.active.empty:
            raise EmptyActiveSpaceError("the ansatz has no configurations")

    @property
    def setting(self) -> Setting:
        return self.active.setting

    @property
    def configurations(self) -> tuple[Configuration, ...]:
        return self.active.configurations

    @property
    def n_coeff_params(self) -> int:
        m = len(self.active.configurations)
        return m if self.mode == REAL else 2 * m

    @property
    def n_rotation_params(self) -> int:
        d = self.setting.d
        return d * (d - 1) // 2 if self.mode == REAL else d * d

    @property
    def n_params(self) -> int:
        return self.n_coeff_params + self.n_rotation_params


def build_ansatz(face: FaceSpec, catalog: ConstraintCatalog, setting: Setting | None = None,
                 mode: str = REAL) -> AnsatzSpace:
    active = selection_rule_configs(face, catalog, setting)
    if active.empty:
        raise EmptyActiveSpaceError(f"face {face.indices} selects no configuration")
    return AnsatzSpace(active, mode)


def full_space_ansatz(setting: Setting, mode: str = REAL) -> AnsatzSpace:
    """Ansatz over every configuration (the trivial face)."""
    active = ActiveSpace(setting, FaceSpec((), "trivial"), tuple(_basis(setting.N, setting.d)))
    return AnsatzSpace(active, mode)


def rotation_generator(ansatz: AnsatzSpace, theta: np.ndarray) -> np.ndarray:
    d = ansatz.setting.d
    iu = np.triu_indices(d, 1)
    nre = len(iu[0])
    k = np.zeros((d, d), dtype=complex)
    k[iu] = theta[:nre]
    k -= k.T
    if ansatz.mode == COMPLEX:
        s = np.zeros((d, d))
        ju = np.triu_indices(d)
        s[ju] = theta[nre:]
        s = s + np.triu(s, 1).T
        k = k + 1j * s
    return k


def _expm_antihermitian(k: np.ndarray):
    """exp(K) for anti-Hermitian K via the Hermitian matrix iK = W diag(mu) W+."""
    mu, w = np.linalg.eigh(1j * k)
    lam = -1j * mu
    return (w * np.exp(lam)) @ w.conj().T, w, lam


class _Objective:
    """Energy and gradient of one Hamiltonian over one ansatz, with cached tables."""

    def __init__(self, hmat: np.ndarray, ansatz: AnsatzSpace):
        s = ansatz.setting
        if hmat.shape != (s.dim, s.dim):
            raise ShapeError(f"Hamiltonian matrix must be {s.dim}x{s.dim}, got {hmat.shape}")
        self.h = hmat
        self.ansatz = ansatz
        index = basis_index(s)
        self.sel = np.array([index[c] for c in ansatz.configurations], dtype=np.intp)
        self.table = _hopping_table(s.N, s.d)
        self.n_c = ansatz.n_coeff_params
        self.real = ansatz.mode == REAL

    def split(self, params):
        params = np.asarray(params, dtype=float)
        if params.shape != (self.ansatz.n_params,):
            raise ShapeError(f"expected {self.ansatz.n_params} parameters, got shape {params.shape}")
        m = len(self.sel)
        x = params[:m] if self.real else params[:m] + 1j * params[m:2 * m]
        return x, params[self.n_c:]

    def state(self, params):
        x, theta = self.split(params)
        nrm = np.linalg.norm(x)
        if nrm == 0:
            raise ValueError("coefficient parameters vanish")
        u, w, lam = _expm_antihermitian(rotation_generator(self.ansatz, theta))
        if self.real:
            u = u.real
        cmat = compound_matrix(u, self.ansatz.setting.N)
        psi = cmat[:, self.sel] @ (x / nrm)
        return psi, x, nrm, u, w, lam, cmat

    def energy(self, params) -> float:
        psi = self.state(params)[0]
        e = np.vdot(psi, self.h @ psi)
        if abs(e.imag) > 1e-10:
            raise ArithmeticError(f"energy has imaginary part {e.imag:.3g}")
        return float(e.real)

    def gradient(self, params) -> np.ndarray:
        psi, x, nrm, u, w, lam, cmat = self.state(params)
        sigma = self.h @ psi
        e = float(np.vdot(psi, sigma).real)
        # coefficient block: dE/dx = 2 (H_eff c - E c) / |x|
        g = cmat[:, self.sel].conj().T @ sigma
        r = 2 * (g - e * x / nrm) / nrm
        grad_c = r.real if self.real else np.concatenate([r.real, r.imag])
        # orbital block: dPsi = Gamma(dU U+) Psi, dU the Frechet derivative of exp
        a, b, i, j, sign = self.table
        t = np.zeros_like(u, dtype=complex)
        np.add.at(t, (i, j), sign * sigma[a].conj() * psi[b])
        bmat = w.conj().T @ (u.conj().T @ t) @ w
        delta = lam[:, None] - lam[None, :]
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(np.abs(delta) > 1e-14, np.expm1(delta) / delta, 1.0)
        phi = np.exp(lam)[None, :] * ratio
        gfull = w.conj() @ (phi * bmat.T) @ w.T
        d = u.shape[0]
        iu = np.triu_indices(d, 1)
        grad_r = 2 * (gfull[iu] - gfull.T[iu]).real
        if not self.real:
            ju = np.triu_indices(d)
            sym = gfull[ju] + np.where(ju[0] == ju[1], 0, gfull.T[ju])
            grad_r = np.concatenate([grad_r, 2 * (1j * sym).real])
        return np.concatenate([grad_c, grad_r])


def _as_matrix(h, setting: Setting) -> np.ndarray:
    if isinstance(h, ManyBodyOperator):
        return build_matrix(h, setting)
    return np.asarray(h, dtype=complex)


def assemble_state(ansatz: AnsatzSpace, params) -> Wavefunction:
    obj = _Objective(np.zeros((ansatz.setting.dim,) * 2), ansatz)
    return Wavefunction(ansatz.setting, obj.state(params)[0])


def energy(h, ansatz: AnsatzSpace, params) -> float:
    """<Psi|H|Psi> for the ansatz state at ``params``.

    ``h`` is a ManyBodyOperator or a dense matrix over the full basis.
    """
    return _Objective(_as_matrix(h, ansatz.setting), ansatz).energy(params)


def energy_gradient(h, ansatz: AnsatzSpace, params) -> np.ndarray:
    return _Objective(_as_matrix(h, ansatz.setting), ansatz).gradient(params)


def central_difference(fun, params, step: float = 1e-6) -> np.ndarray:
    params = np.asarray(params, dtype=float)
    g = np.empty_like(params)
    for k in range(len(params)):
        e = np.zeros_like(params)
        e[k] = step
        g[k] = (fun(params + e) - fun(params - e)) / (2 * step)
    return g


def params_from(ansatz: AnsatzSpace, coefficients, generator=None) -> np.ndarray:
    """Pack coefficients over the ansatz configurations and an optional generator K."""
    c = np.asarray(coefficients, dtype=complex)
    coeff = c.real if ansatz.mode == REAL else np.concatenate([c.real, c.imag])
    d = ansatz.setting.d
    if generator is None:
        return np.concatenate([coeff, np.zeros(ansatz.n_rotation_params)])
    k = np.asarray(generator)
    iu = np.triu_indices(d, 1)
    rot = [k[iu].real]
    if ansatz.mode == COMPLEX:
        rot.append(k[np.triu_indices(d)].imag)
    return np.concatenate([coeff, *rot])


@dataclass(frozen=True, eq=False)
class McscfResult:
    energy: float
    state: Wavefunction
    coefficients: dict[Configuration, complex]
    rotation: np.ndarray
    params: np.ndarray
    converged: bool
    gradient_norm: float
    best_restart: int
    restart_energies: tuple[float, ...]
    restart_converged: tuple[bool, ...]
    restart_iterations: tuple[int, ...]
    history: tuple[float, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "energy": self.energy,
            "converged": self.converged,
            "gradient_norm": self.gradient_norm,
            "best_restart": self.best_restart,
            "coefficients": [{"occ": list(k), "re": v.real, "im": v.imag} for k, v in self.coefficients.items()],
            "rotation": {"re": self.rotation.real.tolist(), "im": self.rotation.imag.tolist()},
            "restarts": [
                {"energy": e, "converged": c, "iterations": n}
                for e, c, n in zip(self.restart_energies, self.restart_converged, self.restart_iterations)
            ],
        }


def minimize(h, ansatz: AnsatzSpace, restarts: int = 16, max_iter: int = 1000, grad_step: float = 1e-6,
             tol: float = 1e-6, seed: int = DEFAULT_SEED, gradient: str = "analytic") -> McscfResult:
    """Best-of-restarts BFGS minimization of the ansatz energy.

    Parameters
    ----------
    h : ManyBodyOperator or ndarray
        Hamiltonian, or its dense matrix over the full configuration basis.
    ansatz : AnsatzSpace
    restarts : int
        Number of independent random starting points drawn from ``seed``.
    max_iter : int
        Iteration cap per restart.
    grad_step : float
        Step of the central differences when ``gradient="central"``.
    tol : float
        A restart counts as converged once the gradient norm is at most ``tol``.
    gradient : {"analytic", "central"}

    Returns
    -------
    McscfResult
        The lowest-energy restart; ties go to the lowest restart index.
    """
    if restarts < 1:
        raise ValueError("need at least one restart")
    obj = _Objective(_as_matrix(h, ansatz.setting), ansatz)
    if gradient == "analytic":
        jac = obj.gradient
    elif gradient == "central":
        def jac(p):
            return central_difference(obj.energy, p, grad_step)
    else:
        raise ValueError(f"unknown gradient mode {gradient!r}")

    rng = np.random.default_rng(seed)
    runs = []
    for k in range(restarts):
        x0 = np.concatenate([rng.standard_normal(ansatz.n_coeff_params),
                             rng.uniform(-np.pi, np.pi, ansatz.n_rotation_params)])
        history = [obj.energy(x0)]
        res = optimize.minimize(obj.energy, x0, jac=jac, method="BFGS",
                                callback=lambda xk: history.append(obj.energy(xk)),
                                options={"maxiter": max_iter, "gtol": tol})
        gnorm = float(np.linalg.norm(jac(res.x)))
        runs.append((float(res.fun), res.x, gnorm <= tol, int(res.nit), tuple(history), gnorm))
        logger.debug("restart %d: E=%.12f |g|=%.2e nit=%d", k, res.fun, gnorm, res.nit)

    best = min(range(restarts), key=lambda k: (runs[k][0], k))
    e_best, p_best, conv, _, hist, gnorm = runs[best]
    psi, x, nrm, u, *_ = obj.state(p_best)
    coeffs = {cfg: complex(v) for cfg, v in zip(ansatz.configurations, x / nrm)}
    state = Wavefunction(ansatz.setting, psi)
    return McscfResult(
        energy=obj.energy(p_best),
        state=state,
        coefficients=coeffs,
        rotation=np.asarray(u, dtype=complex),
        params=p_best,
        converged=conv,
        gradient_norm=gnorm,
        best_restart=best,
        restart_energies=tuple(r[0] for r in runs),
        restart_converged=tuple(r[2] for r in runs),
        restart_iterations=tuple(r[3] for r in runs),
        history=hist,
    )
