"""Independent references: grid dual norms, duality brackets, small-SDP minimizer."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import MultiFreqTensor, Scenario, synthesize
from .recovery import chi_norm_grid, localize_support
from .solver import observation_mask, r_map, virtual_sizes

ORACLE_MAX_N = 3
ORACLE_MAX_P = 2


class OracleError(ValueError):
    pass


def dual_norm_grid(q, grid_resolution: int = 256) -> float:
    """Max of ``||chi||_2`` over the ``grid_resolution``-point grid on each axis."""
    if grid_resolution < 16:
        raise ValueError("grid_resolution must be at least 16")
    q = np.asarray(q)
    if not np.any(q):
        return 0.0
    g = np.arange(grid_resolution) / grid_resolution
    return float(chi_norm_grid(q, g, g).max())


def dual_norm_dyadic(q, start: int = 16, levels: int = 5) -> list[float]:
    """Running maxima over dyadically refined grids.

    Level ``k`` evaluates only the points new to resolution ``start * 2**k``,
    so the sequence is nondecreasing by construction.
    """
    q = np.asarray(q)
    out = []
    current = dual_norm_grid(q, start)
    out.append(current)
    res = start
    for _ in range(levels):
        res *= 2
        g = np.arange(res) / res
        odd = g[1::2]
        # new points have an odd index on at least one axis
        new_max = max(chi_norm_grid(q, odd, g).max(), chi_norm_grid(q, g[::2], odd).max())
        current = max(current, float(new_max))
        out.append(current)
    return out


def dual_norm_sup(q, grid_resolution: int = 256) -> float:
    """Grid maximum improved by off-grid refinement of every grid local maximum."""
    base = dual_norm_grid(q, grid_resolution)
    peaks = localize_support(q, grid_resolution, threshold=0.0, candidate_level=0.0)
    return max([base] + [pk.value for pk in peaks])


def restore_feasibility(q, grid_resolution: int = 256):
    """Scale ``q`` into the unit dual-norm ball; returns ``(q_scaled, sup_norm)``."""
    q = np.asarray(q)
    s = dual_norm_sup(q, grid_resolution)
    return q / max(1.0, s), s


@dataclass
class GapReport:
    primal: float
    dual: float
    gap: float
    primal_literal: float
    gap_literal: float
    dual_norm: float
    feasible: bool
    weak_duality_ok: bool | None

    def __iter__(self):
        return iter((self.primal, self.dual, self.gap))


def duality_gap(y: MultiFreqTensor, decomposition, q, grid_resolution: int = 256,
                tol: float = 1e-8) -> GapReport:
    """Bracket the atomic norm between an explicit decomposition and a dual point.

    ``primal`` is the group norm ``sum_l ||c_l||_2``, the norm paired with the
    ``sup ||chi||_2 <= 1`` dual constraint. ``primal_literal`` is
    ``sum_{l,p} |c_l^p|``; it coincides with ``primal`` only for one frequency.
    """
    sources = list(decomposition)
    if not isinstance(y, MultiFreqTensor):
        y = MultiFreqTensor(y)
    q = np.asarray(q)
    if sources:
        scen = Scenario(y.n_rx, y.n_tx, y.n_freq, sources)
        fit = synthesize(scen).slices
    else:
        fit = np.zeros_like(y.slices)
    ref = max(y.norm(), 1e-300)
    if np.linalg.norm(fit - y.slices) > 1e-8 * ref and y.norm() > 0:
        raise OracleError("decomposition does not synthesize the data")
    coeffs = np.stack([s.coeffs for s in sources]) if sources else np.zeros((0, y.n_freq))
    primal = float(np.sum(np.linalg.norm(coeffs, axis=1)))
    literal = float(np.sum(np.abs(coeffs)))
    dual = float(np.sum([np.real(np.vdot(q[p], y.slices[p])) for p in range(y.n_freq)]))
    dn = dual_norm_grid(q, grid_resolution) if q.size else 0.0
    feasible = dn <= 1.0
    return GapReport(primal, dual, primal - dual, literal, literal - dual, dn, feasible,
                     (primal - dual >= -tol) if feasible else None)


def toeplitz_minimizer_oracle(y: MultiFreqTensor, data_fill: str = "masked", solver: str = "CLARABEL"):
    """Solve the trace-minimization SDP with a generic conic solver (tiny sizes only).

    Returns ``(T_r, T_t, objective)``.
    """
    import cvxpy as cp

    if not isinstance(y, MultiFreqTensor):
        y = MultiFreqTensor(y)
    P, n_rx, n_tx = y.slices.shape
    if n_rx > ORACLE_MAX_N or n_tx > ORACLE_MAX_N or P > ORACLE_MAX_P:
        raise OracleError(f"oracle limited to N_r, N_t <= {ORACLE_MAX_N} and P <= {ORACLE_MAX_P}")
    NR, NT = virtual_sizes(n_rx, n_tx, P)
    if y.norm() == 0:
        return np.zeros((NR, NR)), np.zeros((NT, NT)), 0.0
    tr = cp.Variable((NR, NR), hermitian=True)
    tt = cp.Variable((NT, NT), hermitian=True)
    cons = [tr[i, j] == tr[i + 1, j + 1] for i in range(NR - 1) for j in range(NR - 1)]
    cons += [tt[i, j] == tt[i + 1, j + 1] for i in range(NT - 1) for j in range(NT - 1)]
    for p in range(1, P + 1):
        ybar = r_map(y[p], p, (NR, NT))
        if data_fill == "masked":
            f = cp.Variable((NR, NT), complex=True)
            m = observation_mask(n_rx, n_tx, p, (NR, NT)).astype(float)
            cons.append(cp.multiply(m, f) == ybar)
        else:
            f = ybar
        cons.append(cp.bmat([[2 * tr, f], [cp.conj(f).T if not isinstance(f, np.ndarray)
                                           else f.conj().T, 2 * tt / P]]) >> 0)
    obj = cp.Minimize(cp.real(cp.trace(tr)) / NR + cp.real(cp.trace(tt)) / NT)
    prob = cp.Problem(obj, cons)
    prob.solve(solver=solver)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise OracleError(f"oracle solver status {prob.status}")
    return np.asarray(tr.value), np.asarray(tt.value), float(prob.value)
