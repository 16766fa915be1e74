"""Initial conditions: solitons, soliton trains, monochromatic waves and noise."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .spectral import FieldState, Grid

__all__ = [
    "SolitonSpec",
    "CwSpec",
    "NoiseSpec",
    "soliton_envelope",
    "soliton_profile",
    "multi_soliton_profile",
    "cw_profile",
    "add_noise",
    "rotation_rate",
]


@dataclass(frozen=True)
class SolitonSpec:
    """Stationary soliton ``U(t - center) * exp(i*phase)``."""

    A: float = 1.0
    center: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        if not self.A > 0:
            raise ValueError(f"soliton amplitude must be positive, got {self.A}")

    def K(self, beta: float, gamma: float = 0.0) -> float:
        """Propagation constant; ``A**2`` in the anomalous case ``beta < 0``."""
        return float(-np.sign(beta) * self.A**2)


@dataclass(frozen=True)
class CwSpec:
    """Monochromatic wave ``A * exp(-i * Omega_cw * t)``."""

    A: float = 1.0
    Omega_cw: float = 0.0

    def __post_init__(self):
        if not self.A > 0:
            raise ValueError(f"cw amplitude must be real and positive, got {self.A}")

    def K(self, beta: float, gamma: float) -> float:
        return beta * self.Omega_cw**2 + gamma * self.A**2


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"noise sigma must be >= 0, got {self.sigma}")


def _check_soliton_sign(beta: float, gamma: float):
    if not beta * gamma < 0:
        raise ValueError(f"bright solitons need beta*gamma < 0 (beta={beta}, gamma={gamma})")


def soliton_envelope(t, A: float, beta: float, gamma: float) -> np.ndarray:
    """``U(t) = A sqrt(2/gamma) sech(A t / sqrt(-beta))`` evaluated at ``t``."""
    _check_soliton_sign(beta, gamma)
    a = A / np.sqrt(abs(beta))
    amp = A * np.sqrt(2.0 / abs(gamma))
    return amp / np.cosh(a * np.asarray(t, dtype=float))


def _periodic_offset(t: np.ndarray, center: float, T: float) -> np.ndarray:
    # minimal-image distance so solitons near the edge wrap smoothly
    return (t - center + 0.5 * T) % T - 0.5 * T


def soliton_profile(spec: SolitonSpec, beta: float, gamma: float, grid: Grid) -> FieldState:
    """Sample a single soliton on ``grid`` at ``z = 0``."""
    s = _periodic_offset(grid.t, spec.center, grid.T)
    u = soliton_envelope(s, spec.A, beta, gamma) * np.exp(1j * spec.phase)
    return FieldState(u, 0.0)


def multi_soliton_profile(
    specs: Sequence[SolitonSpec], beta: float, gamma: float, grid: Grid
) -> FieldState:
    """Pointwise sum of soliton profiles (not an exact multi-soliton solution)."""
    if not specs:
        raise ValueError("at least one soliton is required")
    for sp in specs:
        if not -0.5 * grid.T < sp.center <= 0.5 * grid.T:
            raise ValueError(f"soliton center {sp.center} outside the window")
    u = np.zeros(grid.N, dtype=np.complex128)
    for sp in specs:
        u += soliton_profile(sp, beta, gamma, grid).samples
    return FieldState(u, 0.0)


def cw_profile(spec: CwSpec, grid: Grid) -> FieldState:
    """Sample ``A exp(-i Omega_cw t)``; ``Omega_cw`` must sit on the lattice."""
    ell = spec.Omega_cw / grid.d_omega
    if abs(ell - round(ell)) > 1e-9 * max(1.0, abs(ell)):
        raise ValueError(
            f"Omega_cw={spec.Omega_cw} is not on the frequency lattice (spacing {grid.d_omega})"
        )
    return FieldState(spec.A * np.exp(-1j * spec.Omega_cw * grid.t), 0.0)


def add_noise(field: FieldState, noise: NoiseSpec) -> FieldState:
    """Add circular complex Gaussian noise, ``sigma/sqrt(2)`` per quadrature.

    The generator is ``numpy.random.default_rng(noise.seed)`` (PCG64), so equal
    seeds give bit-identical noise.
    """
    if noise.sigma == 0:
        return FieldState(field.samples.copy(), field.z)
    rng = np.random.default_rng(noise.seed)
    n = field.samples.shape[0]
    xi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return FieldState(field.samples + (noise.sigma / np.sqrt(2.0)) * xi, field.z)


def rotation_rate(background, beta: float, gamma: float) -> float:
    """Common propagation constant ``K`` of a stationary background.

    Soliton trains qualify only when all amplitudes are equal.
    """
    if isinstance(background, (SolitonSpec, CwSpec)):
        return background.K(beta, gamma)
    specs = list(background)
    amps = {sp.A for sp in specs}
    if len(amps) != 1:
        raise ValueError("soliton train with unequal amplitudes has no common rotating frame")
    return specs[0].K(beta, gamma)
