"""Angle extraction: Toeplitz-Vandermonde decomposition, pairing and peak search."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import permutations
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar, nnls

from .model import MultiFreqTensor, steering_vector, wrap_distance

log = logging.getLogger(__name__)

PEAK_THRESHOLD = 1 - 1e-3
EXHAUSTIVE_MAX = 6


class DecompositionError(ValueError):
    pass


# -- Vandermonde decomposition ---------------------------------------------

@dataclass
class VandermondeFactors:
    """``T = W diag(powers) W^H`` with ``W[i, l] = exp(-j 2 pi indices[i] omegas[l])``."""

    omegas: np.ndarray
    powers: np.ndarray
    indices: np.ndarray

    @property
    def order(self) -> int:
        return self.omegas.size

    def vandermonde(self) -> np.ndarray:
        return np.exp(-2j * np.pi * np.outer(self.indices, self.omegas))

    def reconstruct(self) -> np.ndarray:
        w = self.vandermonde()
        return (w * self.powers) @ w.conj().T


def _as_matrix(t) -> np.ndarray:
    if hasattr(t, "matrix"):
        return t.matrix()
    return np.asarray(t, dtype=complex)


def vandermonde_decompose(t, rank_tol: float = 1e-7, psd_tol: float = 1e-8) -> VandermondeFactors:
    """Decompose a PSD Toeplitz matrix by shift invariance of its signal subspace.

    The model order is the number of eigenvalues above ``rank_tol * lambda_max``.
    Frequencies come from the eigenvalues of the shift operator on the
    signal subspace (projected to the unit circle); powers from
    nonnegative least squares on the full matrix.
    """
    m = _as_matrix(t)
    m = 0.5 * (m + m.conj().T)
    n = m.shape[0]
    idx = np.arange(n, dtype=float)
    w, v = np.linalg.eigh(m)
    lam_max = w[-1]
    if lam_max <= 0:
        if w[0] < -psd_tol:
            raise DecompositionError("input is not positive semidefinite")
        return VandermondeFactors(np.zeros(0), np.zeros(0), idx)
    if w[0] < -psd_tol * max(1.0, lam_max):
        raise DecompositionError(f"input is not positive semidefinite (min eigenvalue {w[0]:.3e})")
    order = int(np.sum(w > rank_tol * lam_max))
    if order >= n:
        raise DecompositionError("decomposition not unique: matrix has full rank")
    us = v[:, n - order:]
    phi = np.linalg.lstsq(us[:-1], us[1:], rcond=None)[0]
    z = np.linalg.eigvals(phi)
    omegas = np.mod(-np.angle(z) / (2 * np.pi), 1.0)
    omegas = np.sort(omegas)
    # powers from the real-stacked vectorized model
    wmat = np.exp(-2j * np.pi * np.outer(idx, omegas))
    basis = np.stack([np.outer(wmat[:, l], wmat[:, l].conj()).ravel() for l in range(order)], axis=1)
    rhs = m.ravel()
    a = np.concatenate([basis.real, basis.imag])
    b = np.concatenate([rhs.real, rhs.imag])
    powers, _ = nnls(a, b)
    return VandermondeFactors(omegas, powers, idx)


# -- pairing ----------------------------------------------------------------

class PairedSource(NamedTuple):
    omega_r: float
    omega_t: float
    amplitudes: np.ndarray


@dataclass
class AnglePairing:
    pairs: list
    residual: float
    method: str = "exhaustive"
    candidates: list = field(default_factory=list)


def _fit(omega_r, omega_t, y: MultiFreqTensor):
    """Per-p least-squares amplitudes of the paired atoms and the residual norm."""
    P, n_rx, n_tx = y.slices.shape
    L = len(omega_r)
    amps = np.zeros((L, P), dtype=complex)
    res2 = 0.0
    for p in range(1, P + 1):
        cols = np.stack([np.outer(steering_vector(wr, p, n_rx),
                                  steering_vector(wt, p, n_tx)).ravel()
                         for wr, wt in zip(omega_r, omega_t)], axis=1)
        target = y[p].ravel()
        c, *_ = np.linalg.lstsq(cols, target, rcond=None)
        amps[:, p - 1] = c
        res2 += float(np.linalg.norm(cols @ c - target) ** 2)
    return amps, np.sqrt(res2)


def pair_angles(fr: VandermondeFactors, ft: VandermondeFactors, y: MultiFreqTensor) -> AnglePairing:
    """Match receive and transmit frequencies by least-squares data fit.

    All bijections are tried up to six sources; above that the lists are
    matched by descending power.
    """
    if fr.order != ft.order:
        raise DecompositionError(
            f"cannot pair {fr.order} receive frequencies with {ft.order} transmit frequencies")
    L = fr.order
    if L == 0:
        return AnglePairing([], float(y.norm()), "empty")
    wr = fr.omegas
    if L <= EXHAUSTIVE_MAX:
        cands = []
        for perm in permutations(range(L)):
            amps, res = _fit(wr, ft.omegas[list(perm)], y)
            cands.append((res, perm, amps))
        res, perm, amps = min(cands, key=lambda c: c[0])
        method = "exhaustive"
        cand_res = [(c[1], c[0]) for c in cands]
    else:
        order_r = np.argsort(-fr.powers)
        order_t = np.argsort(-ft.powers)
        perm = np.empty(L, dtype=int)
        perm[order_r] = order_t
        amps, res = _fit(wr, ft.omegas[perm], y)
        method = "greedy"
        cand_res = [(tuple(perm), res)]
    pairs = [PairedSource(float(wr[l]), float(ft.omegas[perm[l]]), amps[l]) for l in range(L)]
    return AnglePairing(pairs, float(res), method, cand_res)


# -- dual polynomial ---------------------------------------------------------

def _steer(omegas, p, n, order=0):
    i = np.arange(n)[:, None]
    base = np.exp(-2j * np.pi * p * i * np.atleast_1d(omegas)[None, :])
    return base * (-2j * np.pi * p * i) ** order


def chi_grid(q, omega_r, omega_t) -> np.ndarray:
    """Dual polynomial ``chi_p = b(omega_t, p)^T Q_p^H a(omega_r, p)`` on a tensor grid.

    Returns shape ``(P, len(omega_r), len(omega_t))``.
    """
    q = np.asarray(q)
    P, n_rx, n_tx = q.shape
    out = np.empty((P, np.size(omega_r), np.size(omega_t)), dtype=complex)
    for p in range(1, P + 1):
        out[p - 1] = _steer(omega_r, p, n_rx).T @ np.conj(q[p - 1]) @ _steer(omega_t, p, n_tx)
    return out


def chi_norm_grid(q, omega_r, omega_t, tile: int = 512) -> np.ndarray:
    wr = np.atleast_1d(omega_r)
    out = np.empty((wr.size, np.size(omega_t)))
    for s in range(0, wr.size, tile):
        out[s:s + tile] = np.sqrt(np.sum(np.abs(chi_grid(q, wr[s:s + tile], omega_t)) ** 2, axis=0))
    return out


def _local_derivs(q, wr, wt):
    """Value, gradient and Hessian of ``f = ||chi||^2`` at one point."""
    q = np.asarray(q)
    f = 0.0
    g = np.zeros(2)
    h = np.zeros((2, 2))
    for p in range(1, q.shape[0] + 1):
        qc = np.conj(q[p - 1])
        a = [_steer(wr, p, q.shape[1], o)[:, 0] for o in range(3)]
        b = [_steer(wt, p, q.shape[2], o)[:, 0] for o in range(3)]
        c = {(i, j): a[i] @ qc @ b[j] for i in range(3) for j in range(3) if i + j <= 2}
        v = c[0, 0]
        f += abs(v) ** 2
        g += 2 * np.real(np.conj(v) * np.array([c[1, 0], c[0, 1]]))
        h[0, 0] += 2 * np.real(abs(c[1, 0]) ** 2 + np.conj(v) * c[2, 0])
        h[1, 1] += 2 * np.real(abs(c[0, 1]) ** 2 + np.conj(v) * c[0, 2])
        h[0, 1] += 2 * np.real(np.conj(c[0, 1]) * c[1, 0] + np.conj(v) * c[1, 1])
    h[1, 0] = h[0, 1]
    return f, g, h


def _f_only(q, wr, wt):
    return float(np.sum(np.abs(chi_grid(q, [wr], [wt])) ** 2))


def refine_peak(q, wr, wt, step: float, gtol: float = 1e-8, max_iter: int = 100):
    """Damped Newton ascent on ``||chi||^2``; per-axis golden section if the Hessian is indefinite."""
    x = np.array([wr, wt], dtype=float)
    f, g, h = _local_derivs(q, *x)
    for _ in range(max_iter):
        if np.linalg.norm(g) <= gtol:
            break
        evals = np.linalg.eigvalsh(h)
        if evals[-1] < 0:
            d = -np.linalg.solve(h, g)
            t = 1.0
            while t > 1e-12:
                xn = x + t * d
                fn = _f_only(q, *xn)
                if fn >= f:
                    break
                t *= 0.5
            else:
                break
            x = xn
        else:
            for axis in range(2):
                def neg(s, axis=axis):
                    xx = x.copy()
                    xx[axis] += s
                    return -_f_only(q, *xx)
                r = minimize_scalar(neg, bounds=(-step, step), method="bounded",
                                    options={"xatol": 1e-13})
                if -r.fun > _f_only(q, *x):
                    x[axis] += r.x
        f_new, g, h = _local_derivs(q, *x)
        if abs(f_new - f) <= 1e-16 * max(1.0, f) and np.linalg.norm(g) > gtol:
            f = f_new
            break
        f = f_new
    return float(x[0] % 1.0), float(x[1] % 1.0), float(np.sqrt(max(f, 0.0))), float(np.linalg.norm(g))


class Peak(NamedTuple):
    omega_r: float
    omega_t: float
    value: float
    max_component: float
    gradient_norm: float


def _grid_local_maxima(vals):
    nb = np.ones_like(vals, dtype=bool)
    for dr in (-1, 0, 1):
        for dt in (-1, 0, 1):
            if dr or dt:
                nb &= vals >= np.roll(np.roll(vals, dr, axis=0), dt, axis=1)
    return nb


def localize_support(q, grid_resolution: int = 256, threshold: float = PEAK_THRESHOLD,
                     candidate_level: float = 0.5, merge_tol: float = 1e-6) -> list[Peak]:
    """Peaks of ``||chi||_2`` reaching ``threshold``, refined off the grid.

    ``max_component`` is ``max_p |chi_p|`` at the peak, to be compared with
    ``1/sqrt(P)``.
    """
    if grid_resolution < 32:
        raise ValueError("grid_resolution must be at least 32")
    q = np.asarray(q)
    g = np.arange(grid_resolution) / grid_resolution
    vals = chi_norm_grid(q, g, g)
    if not np.any(vals > 0):
        return []
    cand = np.argwhere(_grid_local_maxima(vals) & (vals >= candidate_level * threshold))
    peaks: list[Peak] = []
    for a, b in cand:
        wr, wt, val, gn = refine_peak(q, g[a], g[b], 1.0 / grid_resolution)
        if val < threshold:
            continue
        if any(max(wrap_distance(wr, pk.omega_r), wrap_distance(wt, pk.omega_t)) < merge_tol
               for pk in peaks):
            continue
        comp = float(np.max(np.abs(chi_grid(q, [wr], [wt]))))
        peaks.append(Peak(wr, wt, val, comp, gn))
    return sorted(peaks, key=lambda pk: -pk.value)


def recover_sources(t_r, t_t, y: MultiFreqTensor, rank_tol: float = 1e-7) -> AnglePairing:
    """Decompose both Toeplitz estimates and pair them against the data.

    The transmit block of each atom is built from ``conj(b)``, so ``T_t``
    carries the transmit frequencies with flipped sign and is decomposed
    through its conjugate. Solver noise shows up as eigenvalues of either
    sign below ``rank_tol * lambda_max``, so the PSD tolerance is ``rank_tol``.
    """
    fr = vandermonde_decompose(t_r, rank_tol, psd_tol=rank_tol)
    ft = vandermonde_decompose(np.conj(_as_matrix(t_t)), rank_tol, psd_tol=rank_tol)
    return pair_angles(fr, ft, y)
