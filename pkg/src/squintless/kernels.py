"""Squared-Fejér interpolation kernels and their derivatives.

``K_p(w) = 1/(p n) * sum_k g_n(k) exp(-j 2 pi k w p)`` with ``g_n`` the
autocorrelation of the length-(2n+1) triangle. At ``p = 1`` this is
``(sin(pi n w) / (n sin(pi w)))**4``, a band-limited kernel whose highest
nonzero frequency is ``2n - 2``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

IMAG_TOL = 1e-10


class KernelError(ValueError):
    pass


@dataclass(frozen=True)
class KernelParams:
    """Kernel half-widths for the receive (``n_a``) and transmit (``m_a``) axes."""

    n_a: int
    m_a: int

    def __post_init__(self):
        if self.n_a < 1 or self.m_a < 1:
            raise KernelError("kernel half-widths must be positive")

    @classmethod
    def from_array_sizes(cls, n_rx: int, n_tx: int) -> "KernelParams":
        for name, n in (("n_rx", n_rx), ("n_tx", n_tx)):
            if n < 5 or (n - 1) % 4:
                raise KernelError(
                    f"{name}={n} must satisfy {name} = 4k + 1 with k >= 1 "
                    f"(got remainder {(n - 1) % 4} of {name}-1 modulo 4)")
        return cls((n_rx - 1) // 4, (n_tx - 1) // 4)

    @property
    def f_c(self) -> int:
        return max(2 * self.m_a, 2 * self.n_a)

    @property
    def n_rx(self) -> int:
        return 4 * self.n_a + 1

    @property
    def n_tx(self) -> int:
        return 4 * self.m_a + 1


def g_coeff(k: int, n: int) -> float:
    """Triangle autocorrelation coefficient ``g_n(k)``, ``|k| <= 2n``."""
    if abs(k) > 2 * n:
        raise KernelError(f"coefficient out of kernel support: |k|={abs(k)} > 2n={2 * n}")
    t = np.arange(max(k - n, -n), min(k + n, n) + 1)
    return float(np.sum((1 - np.abs(t) / n) * (1 - np.abs(k - t) / n)) / n)


@lru_cache(maxsize=64)
def g_table(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Integer frequencies ``-2n..2n`` and their coefficients (read-only)."""
    k = np.arange(-2 * n, 2 * n + 1)
    tri = 1 - np.abs(np.arange(-n, n + 1)) / n
    g = np.convolve(tri, tri) / n
    k.setflags(write=False)
    g.setflags(write=False)
    return k, g


def kernel_1d(omega, p: int, n: int, order: int = 0):
    """Direct term-by-term evaluation of ``d^order K_p / d omega^order``.

    Accepts scalar or array ``omega``; returns complex of the same shape.
    """
    if order not in (0, 1, 2, 3):
        raise KernelError("order must be 0, 1, 2 or 3")
    omega = np.asarray(omega, dtype=float)
    k = np.arange(-2 * n, 2 * n + 1)
    g = np.array([g_coeff(int(kk), n) for kk in k])
    weights = g * (-2j * np.pi * k * p) ** order / (p * n)
    phase = np.exp(-2j * np.pi * np.multiply.outer(omega, k) * p)
    out = phase @ weights
    return out[()] if out.ndim == 0 else out


def kernel_1d_orders(omega, p: int, n: int, max_order: int = 2) -> np.ndarray:
    """All derivative orders ``0..max_order`` at once; shape ``(max_order+1,) + omega.shape``.

    Uses the cached coefficient table and one shared exponential table.
    Agrees with :func:`kernel_1d` to ~1e-12.
    """
    omega = np.asarray(omega, dtype=float)
    k, g = g_table(n)
    # k is integer, so reducing p*omega mod 1 leaves the phases unchanged.
    arg = np.mod(omega * p, 1.0)
    phase = np.exp(-2j * np.pi * np.multiply.outer(arg, k))
    factor = -2j * np.pi * k * p
    weights = np.stack([g * factor ** o for o in range(max_order + 1)]) / (p * n)
    return np.moveaxis(phase @ weights.T, -1, 0)


def kernel_2d(omega_r, omega_t, p: int, params: KernelParams, orders=(0, 0)):
    """``d^i/d(omega_r)^i d^j/d(omega_t)^j`` of the separable product kernel."""
    i, j = orders
    if i + j > 4:
        raise KernelError("total derivative order must not exceed 4")
    return (kernel_1d(omega_r, p, params.n_a, i)
            * kernel_1d(omega_t, p, params.m_a, j))


def real_part(z, tol: float = IMAG_TOL):
    """Strip the imaginary part of a value that is real in exact arithmetic."""
    z = np.asarray(z)
    scale = max(1.0, float(np.max(np.abs(z))) if z.size else 1.0)
    worst = float(np.max(np.abs(z.imag))) if z.size else 0.0
    if worst > tol * scale:
        raise KernelError(f"imaginary residue {worst:.3e} exceeds {tol:g} (scale {scale:.3e})")
    out = np.real(z)
    return out[()] if out.ndim == 0 else out


def origin_curvature(n: int) -> float:
    """Closed form of ``K_1''(0) = -4 pi^2 (n^2 - 1) / 3``.

    With the kernel's cutoff ``f = 2n - 2`` this is ``-pi^2 f (f + 4) / 3``.
    """
    return -4.0 * np.pi ** 2 * (n * n - 1) / 3.0


def cutoff_half_width(f_cut: int) -> int:
    """Half-width ``n`` whose kernel has highest frequency ``f_cut`` (even)."""
    if f_cut < 2 or f_cut % 2:
        raise KernelError("cutoff must be an even integer >= 2")
    return f_cut // 2 + 1
