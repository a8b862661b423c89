"""Trace-minimization SDP and its ADMM solver.

Per frequency ``p`` the constraint is

    B_p = [[2 T_r, F_p], [F_p^H, 2 T_t / P]]  >= 0,

with ``T_r`` (``N_R x N_R``) and ``T_t`` (``N_T x N_T``) Hermitian Toeplitz
matrices on the virtual arrays ``N_R = P (N_r - 1) + 1``. ``F_p`` agrees with
the strided embedding ``R(Y_p)`` on the observed entries; with the default
``data_fill="masked"`` the remaining entries are free, with ``"zero"`` they
are fixed to zero.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, fields

import numpy as np

from .model import MultiFreqTensor

log = logging.getLogger(__name__)


class SolverError(ValueError):
    pass


# -- Toeplitz structure -----------------------------------------------------

@dataclass(frozen=True)
class HermitianToeplitz:
    """Hermitian Toeplitz matrix ``T[i, j] = v[j - i]`` for ``j >= i``."""

    first_row: np.ndarray

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.first_row, dtype=complex)).copy()
        if v.ndim != 1 or v.size == 0:
            raise SolverError("first_row must be a non-empty vector")
        v[0] = v[0].real
        v.setflags(write=False)
        object.__setattr__(self, "first_row", v)

    @property
    def size(self) -> int:
        return self.first_row.size

    def matrix(self) -> np.ndarray:
        n = self.size
        k = np.subtract.outer(np.arange(n), np.arange(n))  # i - j
        v = self.first_row
        return np.where(k <= 0, v[np.abs(k)], np.conj(v[np.abs(k)]))

    @classmethod
    def project(cls, m: np.ndarray) -> "HermitianToeplitz":
        """Frobenius-nearest Hermitian Toeplitz matrix (diagonal averaging)."""
        m = 0.5 * (m + m.conj().T)
        return cls(np.array([np.diagonal(m, k).mean() for k in range(m.shape[0])]))


def toeplitz_project(m: np.ndarray) -> np.ndarray:
    return HermitianToeplitz.project(m).matrix()


# -- index maps -------------------------------------------------------------

def virtual_sizes(n_rx: int, n_tx: int, n_freq: int) -> tuple[int, int]:
    return n_freq * (n_rx - 1) + 1, n_freq * (n_tx - 1) + 1


def _check_dims(n_r, n_t, p, dims):
    if p < 1:
        raise SolverError("frequency index p must be >= 1")
    if p * (n_r - 1) + 1 > dims[0] or p * (n_t - 1) + 1 > dims[1]:
        raise SolverError(
            f"stride {p} on a {n_r}x{n_t} array overflows virtual size {dims[0]}x{dims[1]}")


def r_map(q: np.ndarray, p: int, dims) -> np.ndarray:
    """Embed ``q`` on the stride-``p`` sub-lattice of an ``dims`` zero matrix."""
    q = np.asarray(q)
    n_r, n_t = q.shape
    _check_dims(n_r, n_t, p, dims)
    out = np.zeros(dims, dtype=complex)
    out[: p * (n_r - 1) + 1: p, : p * (n_t - 1) + 1: p] = q
    return out


def r_adjoint(u: np.ndarray, p: int, shape=None) -> np.ndarray:
    """Extract the stride-``p`` sub-lattice; ``shape`` defaults to the largest that fits."""
    u = np.asarray(u)
    if shape is None:
        shape = ((u.shape[0] - 1) // p + 1, (u.shape[1] - 1) // p + 1)
    n_r, n_t = shape
    _check_dims(n_r, n_t, p, u.shape)
    return u[: p * (n_r - 1) + 1: p, : p * (n_t - 1) + 1: p].astype(complex)


def observation_mask(n_rx: int, n_tx: int, p: int, dims) -> np.ndarray:
    return r_map(np.ones((n_rx, n_tx)), p, dims).real > 0


def real_inner(a, b) -> float:
    """Real inner product ``Re tr(a^H b)``."""
    return float(np.real(np.vdot(a, b)))


# -- PSD projection ---------------------------------------------------------

def psd_project(m: np.ndarray) -> np.ndarray:
    """Frobenius-nearest PSD matrix; accepts a stack ``(..., n, n)``."""
    m = np.asarray(m)
    if not np.all(np.isfinite(m)):
        raise SolverError("psd_project: non-finite entries")
    h = 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))
    w, v = np.linalg.eigh(h)
    w = np.clip(w, 0.0, None)
    out = (v * w[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))
    return 0.5 * (out + np.conj(np.swapaxes(out, -1, -2)))


# -- configuration and results ---------------------------------------------

@dataclass
class SolverConfig:
    rho: float = 0.5
    tol: float = 1e-6
    max_iter: int = 20000
    adaptive_rho: bool = True
    pin_offdiag: bool = False
    data_fill: str = "masked"
    literal_t_update: bool = False
    check_every: int = 50

    def __post_init__(self):
        if not self.rho > 0:
            raise SolverError("rho must be positive")
        if not self.tol > 0:
            raise SolverError("tol must be positive")
        if int(self.max_iter) < 1:
            raise SolverError("max_iter must be >= 1")
        if self.data_fill not in ("masked", "zero"):
            raise SolverError("data_fill must be 'masked' or 'zero'")
        self.max_iter = int(self.max_iter)

    @classmethod
    def from_dict(cls, d: dict) -> "SolverConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise SolverError(f"unknown solver option(s): {sorted(unknown)}")
        return cls(**d)


@dataclass
class AdmmState:
    t_r: HermitianToeplitz
    t_t: HermitianToeplitz
    z: np.ndarray  # (P, n, n)
    psi: np.ndarray
    rho: float
    iter: int = 0
    primal_residual: float = np.inf
    dual_residual: float = np.inf


@dataclass
class SolveResult:
    t_r: HermitianToeplitz
    t_t: HermitianToeplitz
    dual_q: np.ndarray  # (P, N_r, N_t)
    iterations: int
    residuals: tuple
    converged: bool
    objective: float
    p_r: np.ndarray
    p_t: np.ndarray
    history: list = field(default_factory=list)
    config: SolverConfig | None = None


def sdp_objective(t_r: np.ndarray, t_t: np.ndarray) -> float:
    return float(np.real(np.trace(t_r)) / t_r.shape[0] + np.real(np.trace(t_t)) / t_t.shape[0])


# -- ADMM -------------------------------------------------------------------

def _assemble(t_r, t_t, f, n_freq):
    P = f.shape[0]
    top = np.concatenate([np.broadcast_to(2 * t_r, (P,) + t_r.shape), f], axis=2)
    bottom = np.concatenate([np.conj(np.swapaxes(f, 1, 2)),
                             np.broadcast_to(2 * t_t / n_freq, (P,) + t_t.shape)], axis=2)
    return np.concatenate([top, bottom], axis=1)


def admm_solve(y: MultiFreqTensor, config: SolverConfig | None = None, **overrides) -> SolveResult:
    """Solve the trace-minimization SDP for the observation ``y``.

    Non-convergence is reported through ``converged=False``, not raised.
    """
    cfg = config or SolverConfig()
    if overrides:
        cfg = SolverConfig(**{**cfg.__dict__, **overrides})
    if not isinstance(y, MultiFreqTensor):
        y = MultiFreqTensor(y)
    P, n_rx, n_tx = y.slices.shape
    NR, NT = virtual_sizes(n_rx, n_tx, P)
    ybar = np.stack([r_map(y[p], p, (NR, NT)) for p in range(1, P + 1)])
    mask = np.stack([observation_mask(n_rx, n_tx, p, (NR, NT)) for p in range(1, P + 1)])
    fixed = mask if cfg.data_fill == "masked" else np.ones_like(mask)
    n = NR + NT
    sr, st = slice(0, NR), slice(NR, n)

    if y.norm() == 0:
        zero_r, zero_t = HermitianToeplitz(np.zeros(NR)), HermitianToeplitz(np.zeros(NT))
        return SolveResult(zero_r, zero_t, np.zeros((P, n_rx, n_tx), complex), 0, (0.0, 0.0),
                           True, 0.0, np.zeros((NR, NR)), np.zeros((NT, NT)), [], cfg)

    z = np.zeros((P, n, n), dtype=complex)
    psi = np.zeros_like(z)
    rho = cfg.rho
    data_scale = float(np.sum(1 + np.linalg.norm(ybar, axis=(1, 2))))
    eye_r, eye_t = np.eye(NR), np.eye(NT)
    history = []
    converged = False
    r_res = s_res = np.inf
    it = 0
    for it in range(1, cfg.max_iter + 1):
        w = z + psi / rho
        if cfg.literal_t_update:
            t_r = 0.5 * w[:, sr, sr].sum(axis=0) - P / (2 * rho * NR) * eye_r
            t_t = 0.5 * w[:, st, st].sum(axis=0) - P / (2 * rho * NR) * eye_t
            t_r = 0.5 * (t_r + t_r.conj().T)
            t_t = 0.5 * (t_t + t_t.conj().T)
        else:
            t_r = toeplitz_project(w[:, sr, sr].sum(axis=0) / (2 * P) - eye_r / (4 * rho * P * NR))
            t_t = toeplitz_project(0.5 * w[:, st, st].sum(axis=0) - P * eye_t / (4 * rho * NT))
        # free entries come from the average of the two off-diagonal blocks
        f_free = 0.5 * (w[:, sr, st] + np.conj(np.swapaxes(w[:, st, sr], 1, 2)))
        f = np.where(fixed, ybar, f_free)
        b = _assemble(t_r, t_t, f, P)

        z_old = z
        z = psd_project(b - psi / rho)
        if cfg.pin_offdiag:
            z[:, sr, st] = np.where(fixed, ybar, z[:, sr, st])
            z[:, st, sr] = np.conj(np.swapaxes(z[:, sr, st], 1, 2))
        psi = psi + rho * (z - b)
        psi = 0.5 * (psi + np.conj(np.swapaxes(psi, 1, 2)))

        r_res = float(np.sum(np.linalg.norm(z - b, axis=(1, 2)))) / data_scale
        s_res = rho * float(np.linalg.norm(z - z_old)) / max(float(np.linalg.norm(psi)), 1e-300)
        if it % cfg.check_every == 0 or it == 1:
            history.append((it, r_res, s_res, rho))
        if r_res <= cfg.tol and s_res <= cfg.tol:
            converged = True
            break
        if cfg.adaptive_rho and it % cfg.check_every == 0:
            if r_res > 10 * s_res:
                rho *= 2.0
            elif s_res > 10 * r_res:
                rho /= 2.0

    history.append((it, r_res, s_res, rho))
    if not converged:
        log.warning("ADMM stopped after %d iterations (primal %.2e, dual %.2e)", it, r_res, s_res)
    else:
        log.info("ADMM converged in %d iterations", it)
    hat = psi[:, sr, st]
    dual_q = np.stack([r_adjoint(-2 * hat[p - 1], p, (n_rx, n_tx)) for p in range(1, P + 1)])
    p_r = 2 * psi[:, sr, sr].sum(axis=0)
    p_t = (2 / P) * psi[:, st, st].sum(axis=0)
    tr, tt = HermitianToeplitz.project(t_r), HermitianToeplitz.project(t_t)
    return SolveResult(tr, tt, dual_q, it, (r_res, s_res), converged,
                       sdp_objective(tr.matrix(), tt.matrix()), p_r, p_t, history, cfg)


# -- dual feasibility -------------------------------------------------------

def _diag_sums(m):
    return np.array([np.diagonal(m, k).sum() for k in range(m.shape[0])])


def dual_feasibility_check(q, p_r: np.ndarray, p_t: np.ndarray, tol: float = 1e-8) -> dict:
    """Margins of every dual-SDP constraint (report only, nothing raised).

    Negative margins mean violation; ``feasible`` applies ``tol``.
    """
    q = np.asarray(q)
    P = q.shape[0]
    NR, NT = p_r.shape[0], p_t.shape[0]
    delta_r = np.zeros(NR)
    delta_r[0] = 1
    delta_t = np.zeros(NT)
    delta_t[0] = 1
    trace_r = float(np.max(np.abs(_diag_sums(p_r) - delta_r)))
    trace_t = float(np.max(np.abs(_diag_sums(p_t) - delta_t)))
    g_min = []
    for p in range(1, P + 1):
        qb = r_map(q[p - 1], p, (NR, NT))
        g = np.block([[p_r / P, qb], [qb.conj().T, p_t]])
        g_min.append(float(np.linalg.eigvalsh(0.5 * (g + g.conj().T)).min()))
    pr_min = float(np.linalg.eigvalsh(0.5 * (p_r + p_r.conj().T)).min())
    pt_min = float(np.linalg.eigvalsh(0.5 * (p_t + p_t.conj().T)).min())
    rep = {
        "g_min_eig": g_min,
        "trace_r_error": trace_r,
        "trace_t_error": trace_t,
        "p_r_min_eig": pr_min,
        "p_t_min_eig": pt_min,
    }
    rep["feasible"] = bool(min(g_min) >= -tol and trace_r <= tol and trace_t <= tol
                           and pr_min >= -tol and pt_min >= -tol)
    return rep
