"""Dual-certificate construction and the uniqueness checks built on it.

The certificate is interpolated in centred ("shifted") coordinates, where
the dual polynomial of frequency ``p`` is a combination of translated
kernels ``K_p`` and their first partial derivatives. Orders ``(i, j)``
always mean ``i`` derivatives in ``omega_r`` and ``j`` in ``omega_t``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .kernels import KernelParams, kernel_1d_orders, real_part
from .model import MultiFreqTensor, Scenario, atom, separation_2d, wrap_distance

log = logging.getLogger(__name__)

ALPHA_CONST = 1.0533
BETA_CONST = 0.9556e-2
EPS_CONST = 2.7650e-2
SEPARATION_CONST = 1.19
NEAR_CONST = 0.1224
SIZE_THRESHOLD = 512
INVERTIBILITY_FC_THRESHOLD = 128
BOUNDS_FC_THRESHOLD = 512
INTERP_TOL = 1e-8
RCOND_MIN = 1e-12
STRICT_MARGIN = 1e-9
REFINE_MARGIN = 0.05

_BLOCKS = ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))


class CertificateError(RuntimeError):
    pass


class SingularSystemError(CertificateError):
    def __init__(self, rcond: float, p: int):
        super().__init__(
            f"support violates invertibility at p={p}: "
            f"reciprocal condition {rcond:.3e} < {RCOND_MIN:g}")
        self.rcond = rcond
        self.p = p


@dataclass(frozen=True)
class Support:
    """Support angles (L x 2, columns omega_r, omega_t) and shifted sign targets (L x P)."""

    points: np.ndarray
    signs: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float)) % 1.0
        sg = np.atleast_2d(np.asarray(self.signs, dtype=complex))
        if pts.shape[1] != 2 or sg.shape[0] != pts.shape[0]:
            raise ValueError("points must be L x 2 and signs L x P")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "signs", sg)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def n_freq(self) -> int:
        return self.signs.shape[1]

    def within_sign_bound(self) -> bool:
        return bool(np.all(np.abs(self.signs) <= 1 / np.sqrt(self.n_freq) + 1e-12))


@dataclass
class DualCertificate:
    params: KernelParams
    support: Support
    alpha: np.ndarray  # (P, L)
    beta: np.ndarray
    eps: np.ndarray

    @property
    def n_freq(self) -> int:
        return self.alpha.shape[0]


def sign_vectors(coeffs) -> np.ndarray:
    """Rows ``conj(c_l) / ||c_l||_2``, the values the dual polynomial must take."""
    c = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    return np.conj(c) / np.linalg.norm(c, axis=1, keepdims=True)


def _phase(omega_r, omega_t, n_rx, n_tx, n_freq):
    p = np.arange(1, n_freq + 1)
    return np.exp(1j * np.pi * np.multiply.outer(
        (n_rx - 1) * np.asarray(omega_r) + (n_tx - 1) * np.asarray(omega_t), p))


def shift_signs(raw_signs, points, n_rx: int, n_tx: int) -> Support:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    raw = np.atleast_2d(np.asarray(raw_signs, dtype=complex))
    rot = _phase(points[:, 0], points[:, 1], n_rx, n_tx, raw.shape[1])
    return Support(points, raw * rot)


def unshift(chi_tilde, omega_r, omega_t, n_rx: int, n_tx: int) -> np.ndarray:
    """Map centred-coordinate values back to array coordinates (phase only)."""
    chi_tilde = np.asarray(chi_tilde, dtype=complex)
    return chi_tilde * np.conj(_phase(omega_r, omega_t, n_rx, n_tx, chi_tilde.shape[-1]))


def support_from_scenario(scenario: Scenario) -> Support:
    pts = np.array([[s.omega_r, s.omega_t] for s in scenario.sources])
    return shift_signs(sign_vectors(scenario.coefficient_matrix()), pts,
                       scenario.n_rx, scenario.n_tx)


# -- interpolation system ----------------------------------------------------

def _blocks(points, params: KernelParams, p: int) -> dict:
    dr = points[:, None, 0] - points[None, :, 0]
    dt = points[:, None, 1] - points[None, :, 1]
    kr = kernel_1d_orders(dr, p, params.n_a, 2)
    kt = kernel_1d_orders(dt, p, params.m_a, 2)
    return {(i, j): real_part(kr[i] * kt[j]) for i, j in _BLOCKS}


def build_system(support: Support, params: KernelParams, p: int):
    """Return the 3L x 3L interpolation matrix at frequency ``p`` and its RHS."""
    b = _blocks(support.points, params, p)
    e = np.block([
        [b[0, 0], b[1, 0], b[0, 1]],
        [b[1, 0], b[2, 0], b[1, 1]],
        [b[0, 1], b[1, 1], b[0, 2]],
    ])
    L = support.size
    rhs = np.concatenate([support.signs[:, p - 1], np.zeros(2 * L, dtype=complex)])
    return e, rhs


def split_blocks(e: np.ndarray) -> dict:
    L = e.shape[0] // 3
    s = [slice(0, L), slice(L, 2 * L), slice(2 * L, 3 * L)]
    return {
        (0, 0): e[s[0], s[0]], (1, 0): e[s[0], s[1]], (0, 1): e[s[0], s[2]],
        (2, 0): e[s[1], s[1]], (1, 1): e[s[1], s[2]], (0, 2): e[s[2], s[2]],
    }


def schur_factors(e: np.ndarray):
    """``S1, S2, S3`` of the block elimination (derivative blocks first)."""
    b = split_blocks(e)
    e02_inv_e11 = np.linalg.solve(b[0, 2], b[1, 1])
    e02_inv_e01 = np.linalg.solve(b[0, 2], b[0, 1])
    s1 = b[2, 0] - b[1, 1] @ e02_inv_e11
    s2 = b[1, 0] - b[1, 1] @ e02_inv_e01
    s3 = b[0, 0] + s2.T @ np.linalg.solve(s1, s2) - b[0, 1] @ e02_inv_e01
    return s1, s2, s3


def _column_scale(e: np.ndarray) -> np.ndarray:
    L = e.shape[0] // 3
    curv = np.sqrt(np.abs(np.diag(e)[L:]).max()) or 1.0
    return np.concatenate([np.ones(L), np.full(2 * L, 1.0 / curv)])


def solve_coefficients(e: np.ndarray, rhs: np.ndarray, p: int = 1, check_schur: bool = True):
    """Solve the interpolation system; returns ``(alpha, beta, eps)``.

    The solve is done on the symmetrically rescaled matrix so that value and
    derivative rows have comparable magnitude. With ``check_schur`` the
    block-elimination formulas are evaluated as an independent route and
    must agree to 1e-6 relative.
    """
    d = _column_scale(e)
    scaled = e * d[:, None] * d[None, :]
    cond = np.linalg.cond(scaled)
    rcond = 0.0 if not np.isfinite(cond) else 1.0 / cond
    if rcond < RCOND_MIN:
        raise SingularSystemError(rcond, p)
    x = d * np.linalg.solve(scaled, d * rhs)
    resid = np.max(np.abs(e @ x - rhs))
    if resid > 1e-8 * max(np.max(np.abs(rhs)), 1e-300):
        raise CertificateError(f"interpolation residual {resid:.3e} too large at p={p}")
    L = e.shape[0] // 3
    alpha, beta, eps = x[:L], x[L:2 * L], x[2 * L:]
    if check_schur:
        sa, sb, se = schur_solve(e, rhs[:L])
        for name, u, v in (("alpha", alpha, sa), ("beta", beta, sb), ("eps", eps, se)):
            scale = max(np.max(np.abs(u)), 1e-300)
            if np.max(np.abs(u - v)) > 1e-6 * scale and np.max(np.abs(u)) > 1e-14:
                raise CertificateError(f"Schur route disagrees on {name} at p={p}")
    return alpha, beta, eps


def schur_solve(e: np.ndarray, d: np.ndarray):
    b = split_blocks(e)
    s1, s2, s3 = schur_factors(e)
    alpha = np.linalg.solve(s3, d)
    s1_inv_s2_alpha = np.linalg.solve(s1, s2 @ alpha)
    beta = -s1_inv_s2_alpha
    eps = np.linalg.solve(b[0, 2], b[1, 1] @ s1_inv_s2_alpha - b[0, 1] @ alpha)
    return alpha, beta, eps


def build_certificate(support: Support, params: KernelParams) -> DualCertificate:
    P, L = support.n_freq, support.size
    coef = np.zeros((3, P, L), dtype=complex)
    for p in range(1, P + 1):
        e, rhs = build_system(support, params, p)
        coef[:, p - 1] = solve_coefficients(e, rhs, p)
    return DualCertificate(params, support, coef[0], coef[1], coef[2])


def certificate_for(scenario: Scenario) -> DualCertificate:
    params = KernelParams.from_array_sizes(scenario.n_rx, scenario.n_tx)
    return build_certificate(support_from_scenario(scenario), params)


# -- evaluation --------------------------------------------------------------

def eval_grid(cert: DualCertificate, omega_r, omega_t, orders=(0, 0)) -> np.ndarray:
    """Centred dual polynomial on the tensor grid ``omega_r x omega_t``.

    Returns shape ``(P, len(omega_r), len(omega_t))``.
    """
    i, j = orders
    if i + j > 2:
        raise ValueError("orders must satisfy i + j <= 2")
    wr = np.atleast_1d(np.asarray(omega_r, dtype=float))
    wt = np.atleast_1d(np.asarray(omega_t, dtype=float))
    pts = cert.support.points
    out = np.zeros((cert.n_freq, wr.size, wt.size), dtype=complex)
    for p in range(1, cert.n_freq + 1):
        kr = kernel_1d_orders(np.subtract.outer(wr, pts[:, 0]).T, p, cert.params.n_a, i + 1)
        kt = kernel_1d_orders(np.subtract.outer(wt, pts[:, 1]).T, p, cert.params.m_a, j + 1)
        a, b, e = cert.alpha[p - 1], cert.beta[p - 1], cert.eps[p - 1]
        left = a[:, None] * kr[i] + b[:, None] * kr[i + 1]
        out[p - 1] = left.T @ kt[j] + (e[:, None] * kr[i]).T @ kt[j + 1]
    return out


def eval_certificate(cert: DualCertificate, omega_r: float, omega_t: float, orders=(0, 0)) -> np.ndarray:
    """Centred dual polynomial vector (length P) at one point."""
    return eval_grid(cert, [omega_r], [omega_t], orders)[:, 0, 0]


def interpolation_residual(cert: DualCertificate) -> dict:
    worst_val = worst_dr = worst_dt = 0.0
    for (wr, wt), target in zip(cert.support.points, cert.support.signs):
        worst_val = max(worst_val, np.max(np.abs(eval_certificate(cert, wr, wt) - target)))
        worst_dr = max(worst_dr, np.max(np.abs(eval_certificate(cert, wr, wt, (1, 0)))))
        worst_dt = max(worst_dt, np.max(np.abs(eval_certificate(cert, wr, wt, (0, 1)))))
    return {"value": float(worst_val), "d_r": float(worst_dr), "d_t": float(worst_dt)}


def dual_matrices(cert: DualCertificate) -> np.ndarray:
    """Dual variables ``Q_p`` (P x N_r x N_t) whose dual polynomial is the certificate.

    The centred polynomial's Fourier coefficients are read off the kernel
    expansion and re-indexed to array coordinates.
    """
    params = cert.params
    kr_idx, gr = _table(params.n_a)
    kt_idx, gt = _table(params.m_a)
    pts = cert.support.points
    out = np.zeros((cert.n_freq, params.n_rx, params.n_tx), dtype=complex)
    for p in range(1, cert.n_freq + 1):
        er = np.exp(2j * np.pi * p * np.outer(pts[:, 0], kr_idx))  # L x Kr
        et = np.exp(2j * np.pi * p * np.outer(pts[:, 1], kt_idx))
        a, b, e = cert.alpha[p - 1], cert.beta[p - 1], cert.eps[p - 1]
        fr = -2j * np.pi * p * kr_idx
        ft = -2j * np.pi * p * kt_idx
        # coef[kr, kt] = sum_l er*et * (a + b fr + e ft)
        coef = ((a[:, None] * er).T @ et
                + ((b[:, None] * er) * fr).T @ et
                + (er.T @ (e[:, None] * et * ft)))
        scale = np.outer(gr, gt) / (p * p * params.n_a * params.m_a)
        out[p - 1] = np.conj(coef * scale)
    return out


def _table(n):
    from .kernels import g_table
    return g_table(n)


# -- grid verification -------------------------------------------------------

def near_radius(params: KernelParams) -> float:
    return NEAR_CONST / max(params.m_a, params.n_a)


def _min_box_distance(cert, wr, wt):
    """Min over support points of the max-coordinate wrap distance."""
    pts = cert.support.points
    dr = wrap_distance(np.subtract.outer(pts[:, 0], wr))  # L x Gr
    dt = wrap_distance(np.subtract.outer(pts[:, 1], wt))
    return np.min(np.maximum(dr[:, :, None], dt[:, None, :]), axis=0)


def norm_grid(cert, wr, wt, tile=256):
    """``||chi_tilde||_2`` on the tensor grid, evaluated in row tiles."""
    out = np.empty((wr.size, wt.size))
    for start in range(0, wr.size, tile):
        block = eval_grid(cert, wr[start:start + tile], wt)
        out[start:start + tile] = np.sqrt(np.sum(np.abs(block) ** 2, axis=0))
    return out


@dataclass
class GridVerification:
    far_grid_max: float
    near_hessian_ok: bool
    offending: list = field(default_factory=list)
    near_max: float = 0.0
    resolution: int = 0
    refined_cells: int = 0
    heatmap: np.ndarray | None = None


def verify_grid(cert: DualCertificate, grid_resolution: int = 256, refine: bool = True,
                margin: float = REFINE_MARGIN, levels: int = 2, factor: int = 8,
                hessian_samples: int = 9, keep_heatmap: bool = False) -> GridVerification:
    """Check ``||chi|| < 1`` on the far region and local concavity on the near region.

    Far-region cells whose coarse value exceeds ``1 - margin`` are re-sampled
    ``levels`` times on a ``factor``-times finer local grid.
    """
    if grid_resolution < 64:
        raise ValueError("grid_resolution must be at least 64")
    radius = near_radius(cert.params)
    g = np.arange(grid_resolution) / grid_resolution
    norms = norm_grid(cert, g, g)
    far = _min_box_distance(cert, g, g) > radius
    far_vals = np.where(far, norms, -np.inf)
    far_max = float(far_vals.max()) if far.any() else 0.0
    offending = []
    refined = 0
    if refine:
        step = 1.0 / grid_resolution
        centres = [(g[a], g[b]) for a, b in zip(*np.nonzero(far_vals > 1 - margin))]
        for _ in range(levels):
            nxt = []
            for cr, ct in centres:
                local = cr + step * (np.arange(-factor, factor + 1) / (2 * factor))
                localt = ct + step * (np.arange(-factor, factor + 1) / (2 * factor))
                vals = norm_grid(cert, local % 1.0, localt % 1.0)
                mask = _min_box_distance(cert, local % 1.0, localt % 1.0) > radius
                refined += 1
                if mask.any():
                    v = np.where(mask, vals, -np.inf)
                    far_max = max(far_max, float(v.max()))
                    for a, b in zip(*np.nonzero(v > 1 - margin)):
                        nxt.append((local[a] % 1.0, localt[b] % 1.0))
            step /= factor
            centres = nxt[:4096]
    for a, b in zip(*np.nonzero(far_vals > 1 - STRICT_MARGIN)):
        offending.append(("far", float(g[a]), float(g[b]), float(norms[a, b])))
    ok, near_max, bad = check_near_hessian(cert, hessian_samples)
    offending.extend(bad)
    return GridVerification(far_max, ok, offending, near_max, grid_resolution, refined,
                            norms if keep_heatmap else None)


def check_near_hessian(cert: DualCertificate, samples: int = 9):
    """Negative definiteness of the phase-aligned real-part Hessian on the near region.

    Returns ``(ok, max ||chi|| over the sampled near points, offending points)``.
    """
    radius = near_radius(cert.params)
    offs = np.linspace(-radius, radius, samples)
    bad = []
    near_max = 0.0
    for (wr0, wt0), target in zip(cert.support.points, cert.support.signs):
        wr, wt = (wr0 + offs) % 1.0, (wt0 + offs) % 1.0
        h20 = eval_grid(cert, wr, wt, (2, 0))
        h11 = eval_grid(cert, wr, wt, (1, 1))
        h02 = eval_grid(cert, wr, wt, (0, 2))
        vals = eval_grid(cert, wr, wt)
        centre = (np.abs(offs)[:, None] == 0) & (np.abs(offs)[None, :] == 0)
        nv = np.sqrt(np.sum(np.abs(vals) ** 2, axis=0))
        near_max = max(near_max, float(np.where(centre, -np.inf, nv).max()))
        for p in range(cert.n_freq):
            if abs(target[p]) < 1e-14:
                continue
            align = np.conj(target[p]) / abs(target[p])
            a, b, c = (np.real(align * h20[p]), np.real(align * h11[p]),
                       np.real(align * h02[p]))
            det = a * c - b * b
            tr = a + c
            for u, v in zip(*np.nonzero(~((det > 0) & (tr < 0)))):
                bad.append(("near", float(wr[u]), float(wt[v]), p + 1))
    return not bad, near_max, bad


# -- bound checks ------------------------------------------------------------

def check_lemma1_bounds(cert: DualCertificate, hypotheses: dict | None = None) -> list[dict]:
    P = cert.n_freq
    f_c = cert.params.f_c
    out = []
    for p in range(1, P + 1):
        rec = {
            "p": p,
            "alpha_inf": float(np.max(np.abs(cert.alpha[p - 1]))),
            "beta_inf": float(np.max(np.abs(cert.beta[p - 1]))),
            "eps_inf": float(np.max(np.abs(cert.eps[p - 1]))),
            "alpha_bound": ALPHA_CONST * p * p / np.sqrt(P),
            "beta_bound": BETA_CONST * p / (np.sqrt(P) * f_c ** 3),
            "eps_bound": EPS_CONST * p / (np.sqrt(P) * f_c),
        }
        for k in ("alpha", "beta", "eps"):
            rec[f"{k}_ok"] = bool(rec[f"{k}_inf"] <= rec[f"{k}_bound"])
        # Stated alongside the norm bounds; reported only.
        rec["alpha_first"] = complex(cert.alpha[p - 1][0])
        rec["alpha_first_claim_ok"] = bool(abs(cert.alpha[p - 1][0]) >= 2 + ALPHA_CONST * p * p)
        if hypotheses is not None:
            rec["hypotheses_ok"] = bool(hypotheses.get("all_ok", False))
        out.append(rec)
    return out


def _inf_norm(m):
    return float(np.max(np.sum(np.abs(m), axis=1))) if m.size else 0.0


def check_invertibility(support: Support, params: KernelParams, p: int) -> dict:
    """Normalized invertibility ratios of the interpolation blocks.

    All three normalized distances to the identity must be ``< 1``.
    """
    e, _ = build_system(support, params, p)
    b = split_blocks(e)
    L = support.size
    eye = np.eye(L)
    k02 = b[0, 2][0, 0]
    k20 = b[2, 0][0, 0]
    f_c = params.f_c
    rep = {"p": p, "k02_origin": float(k02)}
    rep["e02_ratio"] = _inf_norm(eye - b[0, 2] / k02)
    rep["e02_bound"] = 1.0608 * f_c / (np.pi ** 2 * (f_c + 4))
    try:
        s1, s2, s3 = schur_factors(e)
    except np.linalg.LinAlgError:
        rep.update(s1_ratio=np.inf, is3=np.inf, s1_bound=1.0,
                   is3_bound=_is3_bound(p, f_c), invertible=False,
                   e02_ok=False, s1_ok=False, is3_ok=False)
        return rep
    rep["s1_ratio"] = _inf_norm(eye - s1 / k20)
    rep["s1_bound"] = 1.0
    rep["is3"] = _inf_norm(eye - s3)
    rep["is3_bound"] = _is3_bound(p, f_c)
    rep["e02_ok"] = bool(rep["e02_ratio"] <= rep["e02_bound"])
    rep["s1_ok"] = bool(rep["s1_ratio"] <= rep["s1_bound"])
    rep["is3_ok"] = bool(rep["is3"] <= rep["is3_bound"])
    finite = all(np.isfinite(rep[k]) for k in ("e02_ratio", "s1_ratio", "is3"))
    rep["invertible"] = bool(finite and rep["e02_ratio"] < 1 and rep["s1_ratio"] < 1
                             and rep["is3"] < 1)
    return rep


def _is3_bound(p, f_c):
    return (p * p - 1 + 5.0567e-2) / (p * p) + 7.3830e-4 / (f_c ** 2 * p * p)


def check_theorem2_hypotheses(scenario: Scenario) -> dict:
    n_rx, n_tx, P = scenario.n_rx, scenario.n_tx, scenario.n_freq
    quarter = min((n_rx - 1) // 4, (n_tx - 1) // 4)
    threshold = SEPARATION_CONST / quarter if quarter > 0 else np.inf
    pts = [(s.omega_r, s.omega_t) for s in scenario.sources]
    if len(pts) >= 2:
        seps = [separation_2d(pts, p) for p in range(1, P + 1)]
    else:
        seps = [np.inf] * P
    G = max((n_rx - 1) // 2, (n_tx - 1) // 2)
    f_c = max(2 * ((n_rx - 1) // 4), 2 * ((n_tx - 1) // 4))
    mags = np.abs(sign_vectors(scenario.coefficient_matrix()))
    sign_bound = 1 / np.sqrt(P)
    rep = {
        "separation": seps,
        "separation_threshold": threshold,
        "separation_ok": bool(all(s > threshold for s in seps)),
        "separation_margin": float(min(seps) - threshold),
        "G": G,
        "size_threshold": SIZE_THRESHOLD,
        "size_ok": bool(G >= SIZE_THRESHOLD),
        "size_margin": G - SIZE_THRESHOLD,
        "sign_max": float(mags.max()),
        "sign_threshold": float(sign_bound),
        "sign_ok": bool(mags.max() <= sign_bound + 1e-12),
        "sign_margin": float(sign_bound - mags.max()),
        # the two other size thresholds in circulation, reported separately
        "f_c": f_c,
        "fc_invertibility_ok": bool(f_c >= INVERTIBILITY_FC_THRESHOLD),
        "fc_bounds_ok": bool(f_c >= BOUNDS_FC_THRESHOLD),
    }
    rep["all_ok"] = rep["separation_ok"] and rep["size_ok"] and rep["sign_ok"]
    rep["violated"] = [k for k in ("separation", "size", "sign") if not rep[f"{k}_ok"]]
    return rep


def check_theorem1(sources, cert: DualCertificate, tensor: MultiFreqTensor,
                   grid_resolution: int = 256, verification: GridVerification | None = None) -> dict:
    """Both uniqueness conditions for a candidate decomposition.

    ``sources`` is a sequence of :class:`~squintless.model.Source`.
    """
    n_rx, n_tx = tensor.n_rx, tensor.n_tx
    atoms = np.stack([atom(s.omega_r, s.omega_t, s.coeffs, n_rx, n_tx).ravel()
                      for s in sources])
    fit = float(np.linalg.norm(atoms.sum(axis=0) - tensor.slices.ravel())
                / max(tensor.norm(), 1e-300))
    targets = sign_vectors(np.stack([s.coeffs for s in sources]))
    interp = 0.0
    for s, tgt in zip(sources, targets):
        val = unshift(eval_certificate(cert, s.omega_r, s.omega_t), s.omega_r, s.omega_t,
                      n_rx, n_tx)
        interp = max(interp, float(np.max(np.abs(val - tgt))))
    if verification is None:
        verification = verify_grid(cert, grid_resolution)
    cond1 = interp <= INTERP_TOL and verification.far_grid_max <= 1 - STRICT_MARGIN
    unit = atoms / np.linalg.norm(atoms, axis=1, keepdims=True)
    gram_min = float(np.linalg.eigvalsh(unit.conj() @ unit.T).min())
    return {
        "decomposition_fit": fit,
        "interpolation_error": interp,
        "far_grid_max": verification.far_grid_max,
        "condition1": bool(cond1),
        "gram_min_eig": gram_min,
        "condition2": bool(gram_min > 1e-10),
        "unique": bool(cond1 and gram_min > 1e-10),
    }


@dataclass
class CertificateReport:
    support_ok: bool
    far_grid_max: float
    near_hessian_ok: bool
    bounds: list
    invertibility: list
    theorem2_hypotheses: dict
    interpolation: dict = field(default_factory=dict)
    near_max: float = 0.0
    offending: list = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return bool(self.support_ok and self.far_grid_max < 1 and self.near_hessian_ok)


def certify(scenario: Scenario, grid_resolution: int = 256, refine: bool = True):
    """Build the certificate for ``scenario`` and run every check.

    Returns ``(report, certificate, verification)``; the certificate is
    ``None`` when the interpolation system is singular.
    """
    hyp = check_theorem2_hypotheses(scenario)
    params = KernelParams.from_array_sizes(scenario.n_rx, scenario.n_tx)
    support = support_from_scenario(scenario)
    inv = [check_invertibility(support, params, p) for p in range(1, scenario.n_freq + 1)]
    try:
        cert = build_certificate(support, params)
    except CertificateError as exc:
        log.warning("certificate construction failed: %s", exc)
        report = CertificateReport(False, float("inf"), False, [], inv, hyp,
                                   offending=[("construction", str(exc))])
        return report, None, None
    interp = interpolation_residual(cert)
    ver = verify_grid(cert, grid_resolution, refine=refine)
    report = CertificateReport(
        support_ok=bool(max(interp.values()) <= INTERP_TOL),
        far_grid_max=ver.far_grid_max,
        near_hessian_ok=ver.near_hessian_ok,
        bounds=check_lemma1_bounds(cert, hyp),
        invertibility=inv,
        theorem2_hypotheses=hyp,
        interpolation=interp,
        near_max=ver.near_max,
        offending=ver.offending[:100],
    )
    return report, cert, ver
