"""
Periodic grid, continuous-normalised Fourier transform pair and resonance
bookkeeping for the split-step Fourier scheme.

Conventions
-----------
Samples sit at ``t_j = -T/2 + (j + 1) * dt`` for ``j = 0 .. N-1`` so the
window is the half-open interval ``(-T/2, T/2]``.  Spectra are returned on the
lattice ``omega_l = 2*pi*l/T`` with ``l`` running over ``(-N/2, N/2]`` in
increasing order.  The FFT-native order is recovered with
``Grid.native_index``: ``native[grid.native_index] == spectrum``.

The forward transform approximates ``F[u](w) = int u(t) exp(-i w t) dt``::

    spectrum(w_l) = dt * sum_j u(t_j) exp(-i w_l t_j)

and :func:`inverse_ft` is its exact inverse.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft

__all__ = [
    "Grid",
    "FieldState",
    "ResonanceInfo",
    "build_grid",
    "forward_ft",
    "inverse_ft",
    "resonance_info",
]


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid of ``N`` points on a window of length ``T``."""

    T: float
    N: int

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"window length T must be positive, got {self.T}")
        if int(self.N) != self.N or self.N < 8:
            raise ValueError(f"N must be an integer >= 8, got {self.N}")
        if self.N % 2:
            raise ValueError(f"N must be even, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "T", float(self.T))

    @property
    def dt(self) -> float:
        return self.T / self.N

    @property
    def d_omega(self) -> float:
        return 2.0 * np.pi / self.T

    @property
    def omega_max(self) -> float:
        return np.pi / self.dt

    @cached_property
    def t(self) -> np.ndarray:
        return -0.5 * self.T + (np.arange(self.N) + 1.0) * self.dt

    @cached_property
    def ell(self) -> np.ndarray:
        """Integer lattice indices in increasing order, ``(-N/2, N/2]``."""
        return np.arange(-self.N // 2 + 1, self.N // 2 + 1)

    @cached_property
    def omega(self) -> np.ndarray:
        return self.d_omega * self.ell

    @cached_property
    def native_index(self) -> np.ndarray:
        """Position in FFT-native order of each increasing-order bin."""
        return self.ell % self.N

    @cached_property
    def sorted_index(self) -> np.ndarray:
        """Inverse permutation of :attr:`native_index`."""
        inv = np.empty(self.N, dtype=np.intp)
        inv[self.native_index] = np.arange(self.N)
        return inv

    @cached_property
    def omega_native(self) -> np.ndarray:
        """Lattice frequencies in FFT-native order (Nyquist bin positive)."""
        return self.omega[self.sorted_index]

    @cached_property
    def _phase(self) -> np.ndarray:
        # exp(-i w_l t_0) accounts for the grid not starting at t = 0
        return np.exp(-1j * self.omega * self.t[0])

    def bin_of(self, omega: float) -> int:
        """Index (increasing order) of the lattice bin nearest ``omega``."""
        idx = int(round(omega / self.d_omega)) - self.ell[0]
        return int(np.clip(idx, 0, self.N - 1))

    def to_native(self, spectrum: np.ndarray) -> np.ndarray:
        return np.asarray(spectrum)[..., self.sorted_index]

    def to_sorted(self, native: np.ndarray) -> np.ndarray:
        return np.asarray(native)[..., self.native_index]


@dataclass(frozen=True)
class FieldState:
    """Complex field samples at propagation distance ``z``."""

    samples: np.ndarray
    z: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.complex128)
        if s.ndim != 1:
            raise ValueError("field samples must be one-dimensional")
        object.__setattr__(self, "samples", s)

    def __len__(self):
        return self.samples.shape[0]

    @property
    def power(self) -> float:
        return float(np.vdot(self.samples, self.samples).real)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.samples)))


def build_grid(T: float, N: int) -> Grid:
    """Construct a :class:`Grid`, validating ``T > 0`` and ``N >= 8``."""
    return Grid(T, N)


def _check_len(samples: np.ndarray, grid: Grid):
    if samples.shape[-1] != grid.N:
        raise ValueError(f"expected {grid.N} samples, got {samples.shape[-1]}")


def forward_ft(field: FieldState | np.ndarray, grid: Grid) -> np.ndarray:
    """Continuous-normalised spectrum on the increasing-order lattice.

    Accepts a :class:`FieldState` or a raw array; a 2-D array is transformed
    along its last axis.
    """
    u = field.samples if isinstance(field, FieldState) else np.asarray(field)
    _check_len(u, grid)
    native = sfft.fft(u, axis=-1)
    return grid.dt * grid.to_sorted(native) * grid._phase


def inverse_ft(spectrum: np.ndarray, grid: Grid) -> np.ndarray:
    """Exact inverse of :func:`forward_ft`; returns time samples."""
    s = np.asarray(spectrum)
    _check_len(s, grid)
    native = grid.to_native(s / grid._phase)
    return sfft.ifft(native, axis=-1) / grid.dt


@dataclass(frozen=True)
class ResonanceInfo:
    """Resonant frequencies of the dispersive sub-step for a given ``dz``.

    ``omega_pi`` solves ``|beta| * omega**2 * dz = pi``.  Writing
    ``omega_pi = 2*pi*n/T`` with non-integer ``n``, ``N_pi`` is the integer
    part of ``n`` and ``delta_omega_pi`` the remainder in frequency units.
    """

    beta: float
    dz: float
    T: float
    omega_max: float
    omega_pi: float = field(init=False)
    N_pi: int = field(init=False)
    delta_omega_pi: float = field(init=False)

    def __post_init__(self):
        w = math.sqrt(math.pi / (abs(self.beta) * self.dz))
        n = w * self.T / (2.0 * math.pi)
        n_int = math.floor(n)
        object.__setattr__(self, "omega_pi", w)
        object.__setattr__(self, "N_pi", int(n_int))
        object.__setattr__(self, "delta_omega_pi", 2.0 * math.pi * (n - n_int) / self.T)

    @property
    def epsilon(self) -> float:
        return 1.0 / self.omega_pi

    @property
    def dz_thresh(self) -> float:
        return math.pi / (abs(self.beta) * self.omega_max**2)

    @property
    def k_max(self) -> int:
        """Largest ``k`` with ``omega_k_pi <= omega_max``."""
        return int(math.floor(abs(self.beta) * self.omega_max**2 * self.dz / math.pi + 1e-12))

    def omega_k_pi(self, k: int) -> float:
        if k < 1:
            raise ValueError("k must be >= 1")
        return math.sqrt(k * math.pi / (abs(self.beta) * self.dz))

    def resonances(self) -> list[float]:
        """All ``omega_k_pi`` on the grid, k = 1 .. k_max."""
        return [self.omega_k_pi(k) for k in range(1, self.k_max + 1)]


def resonance_info(beta: float, dz: float, grid: Grid) -> ResonanceInfo:
    if beta == 0:
        raise ValueError("beta must be nonzero")
    if not dz > 0:
        raise ValueError(f"dz must be positive, got {dz}")
    return ResonanceInfo(float(beta), float(dz), grid.T, grid.omega_max)
