"""Multi-frequency array signal model.

Angles are normalized frequencies in cycles, stored modulo 1. The physical
angles follow from ``omega = d * f0 * sin(theta) / c`` with half-wavelength
spacing ``d = c / (2 * f0)``, i.e. ``omega = sin(theta) / 2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np


class ScenarioError(ValueError):
    """Raised for invalid scenario descriptions."""


@dataclass(frozen=True)
class Source:
    """One propagation path: DOA, DOD and per-frequency complex amplitudes."""

    omega_r: float
    omega_t: float
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if coeffs.ndim != 1:
            raise ScenarioError("coeffs must be a vector")
        if not np.any(coeffs):
            raise ScenarioError("coeffs must not be the zero vector")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "omega_r", float(self.omega_r) % 1.0)
        object.__setattr__(self, "omega_t", float(self.omega_t) % 1.0)

    @property
    def normalized(self) -> bool:
        """Whether ``||coeffs||_2 <= 1`` (the atomic-set normalization)."""
        return bool(np.linalg.norm(self.coeffs) <= 1.0 + 1e-12)


@dataclass(frozen=True)
class Scenario:
    n_rx: int
    n_tx: int
    n_freq: int
    sources: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        if self.n_rx < 2 or self.n_tx < 2:
            raise ScenarioError("n_rx and n_tx must be at least 2")
        if self.n_freq < 1:
            raise ScenarioError("n_freq must be at least 1")
        if len(self.sources) < 1:
            raise ScenarioError("scenario needs at least one source")
        for i, s in enumerate(self.sources):
            if s.coeffs.shape != (self.n_freq,):
                raise ScenarioError(
                    f"sources[{i}].coeffs has length {s.coeffs.size}, "
                    f"expected n_freq={self.n_freq}")

    @property
    def n_sources(self) -> int:
        return len(self.sources)

    def normalization_violations(self) -> list[int]:
        """Indices of sources with ``||c_l||_2 > 1``. Nothing is rescaled."""
        return [i for i, s in enumerate(self.sources) if not s.normalized]

    def coefficient_matrix(self) -> np.ndarray:
        """L x P matrix of complex amplitudes."""
        return np.stack([s.coeffs for s in self.sources])


@dataclass(frozen=True)
class MultiFreqTensor:
    """P complex N_r x N_t slices, slice p-1 observed at frequency index p."""

    slices: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.slices, dtype=complex)
        if arr.ndim != 3:
            raise ValueError("slices must stack into a (P, N_r, N_t) array")
        object.__setattr__(self, "slices", arr)

    @property
    def n_freq(self) -> int:
        return self.slices.shape[0]

    @property
    def n_rx(self) -> int:
        return self.slices.shape[1]

    @property
    def n_tx(self) -> int:
        return self.slices.shape[2]

    def __getitem__(self, p: int) -> np.ndarray:
        """Slice at 1-based frequency index ``p``."""
        return self.slices[p - 1]

    def norm(self) -> float:
        return float(np.linalg.norm(self.slices))


def steering_vector(omega: float, p: int, n: int) -> np.ndarray:
    """Length-``n`` ULA response ``exp(-j 2 pi i p omega)`` at frequency ``p``."""
    return np.exp(-2j * np.pi * np.arange(n) * p * omega)


def steering_matrix(omegas, p: int, n: int) -> np.ndarray:
    """Columns are ``steering_vector(omega, p, n)`` for each omega."""
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    return np.exp(-2j * np.pi * np.outer(np.arange(n), omegas) * p)


def atom(omega_r: float, omega_t: float, coeffs, n_rx: int, n_tx: int) -> np.ndarray:
    """Rank-1-per-slice tensor of a single source, shape (P, N_r, N_t)."""
    coeffs = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    out = np.empty((coeffs.size, n_rx, n_tx), dtype=complex)
    for idx, c in enumerate(coeffs):
        p = idx + 1
        out[idx] = c * np.outer(steering_vector(omega_r, p, n_rx),
                                steering_vector(omega_t, p, n_tx))
    return out


def synthesize(scenario: Scenario) -> MultiFreqTensor:
    """Noise-free observation: sum of source atoms at every frequency."""
    total = np.zeros((scenario.n_freq, scenario.n_rx, scenario.n_tx), dtype=complex)
    for s in scenario.sources:
        total += atom(s.omega_r, s.omega_t, s.coeffs, scenario.n_rx, scenario.n_tx)
    return MultiFreqTensor(total)


def wrap_distance(a, b=0.0, p: int = 1):
    """Closest wrap-around distance of ``p * |a - b|`` on the unit circle."""
    frac = np.mod(p * np.abs(np.asarray(a, dtype=float) - b), 1.0)
    return np.minimum(frac, 1.0 - frac)


def separation_1d(omegas, p: int = 1) -> float:
    omegas = list(omegas)
    if len(omegas) < 2:
        raise ValueError("undefined separation: need at least two angles")
    return float(min(wrap_distance(a, b, p) for a, b in combinations(omegas, 2)))


def separation_2d(points, p: int = 1) -> float:
    """Min over pairs of the larger per-coordinate wrap distance."""
    points = [tuple(pt) for pt in points]
    if len(points) < 2:
        raise ValueError("undefined separation: need at least two sources")
    return float(min(
        max(wrap_distance(a[0], b[0], p), wrap_distance(a[1], b[1], p))
        for a, b in combinations(points, 2)))
