"""
First-order split-step Fourier integrator for

    i u_z - beta u_tt + gamma |u|^2 u = 0

Each step applies the nonlinear phase ``u * exp(i gamma |u|^2 dz)`` in the
time domain, then the dispersive multiplier ``exp(i beta w^2 dz)`` in the
frequency domain.  Both sub-steps are unit-modulus multiplications, so the
discrete power ``sum |u_j|^2`` is conserved to round-off.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .spectral import FieldState, Grid, forward_ft, inverse_ft

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

__all__ = [
    "BlowUpError",
    "RunConfig",
    "Trajectory",
    "split_step",
    "propagate",
    "apply_spectral_filter",
    "filter_mask",
]

log = logging.getLogger(__name__)

DEFAULT_SNAPSHOTS = 200


class BlowUpError(FloatingPointError):
    """Raised when the field becomes non-finite or exceeds the blow-up bound."""

    def __init__(self, msg: str, step: int):
        super().__init__(msg)
        self.step = step


def _nonlinear_phase_numpy(u: np.ndarray, g: float) -> None:
    a = (u.real * u.real + u.imag * u.imag) * g
    u *= np.cos(a) + 1j * np.sin(a)


if numba is not None:

    @numba.njit(cache=True)
    def _nonlinear_phase(u, g):  # pragma: no cover - compiled
        for i in range(u.shape[0]):
            v = u[i]
            a = (v.real * v.real + v.imag * v.imag) * g
            if a < 1e-3:
                # Taylor branch, truncation error below a**5/120 < 1e-17
                a2 = a * a
                c = 1.0 - 0.5 * a2 + a2 * a2 / 24.0
                s = a - a * a2 / 6.0
            else:
                c = np.cos(a)
                s = np.sin(a)
            u[i] = v * complex(c, s)

else:  # pragma: no cover
    _nonlinear_phase = _nonlinear_phase_numpy


@dataclass(frozen=True)
class RunConfig:
    """Equation coefficients and stepping parameters for one run.

    ``filter`` is an optional ``(omega_center, half_width)`` band that is
    zeroed in the spectrum after every step.  ``scheme`` selects the
    first-order ``"lie"`` splitting (nonlinear then dispersive) or the
    symmetric ``"strang"`` variant.
    """

    beta: float = -1.0
    gamma: float = 2.0
    dz: float = 0.004
    z_max: float = 500.0
    record_every: int | None = None
    filter: tuple[float, float] | None = None
    scheme: str = "lie"
    blowup_factor: float = 10.0

    def __post_init__(self):
        if not self.dz > 0:
            raise ValueError(f"dz must be positive, got {self.dz}")
        if self.z_max < 0:
            raise ValueError(f"z_max must be >= 0, got {self.z_max}")
        if self.record_every is not None and self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.scheme not in ("lie", "strang"):
            raise ValueError(f"unknown splitting scheme {self.scheme!r}")

    @property
    def n_steps(self) -> int:
        return int(round(self.z_max / self.dz))

    @property
    def stride(self) -> int:
        if self.record_every is not None:
            return self.record_every
        return max(1, self.n_steps // DEFAULT_SNAPSHOTS)


@dataclass
class Trajectory:
    """Snapshots of a run; row ``i`` of ``samples`` was taken at ``z[i]``."""

    z: np.ndarray
    samples: np.ndarray
    blown_up: bool = False
    blowup_step: int | None = None
    _spectra: dict = field(default_factory=dict, repr=False)

    def __len__(self):
        return len(self.z)

    def snapshot(self, i: int) -> FieldState:
        return FieldState(self.samples[i], float(self.z[i]))

    @property
    def initial(self) -> FieldState:
        return self.snapshot(0)

    @property
    def final(self) -> FieldState:
        return self.snapshot(-1)

    def spectra(self, grid: Grid) -> np.ndarray:
        """``|forward_ft|`` of every snapshot, shape ``(len(self), N)``; cached."""
        key = (grid.T, grid.N)
        if key not in self._spectra:
            self._spectra[key] = np.abs(forward_ft(self.samples, grid))
        return self._spectra[key]


def filter_mask(grid: Grid, center: float, half_width: float, *, native=False) -> np.ndarray:
    """Boolean mask of bins with ``|w - center| <= half_width``."""
    w = grid.omega_native if native else grid.omega
    return np.abs(w - center) <= half_width


def apply_spectral_filter(
    field: FieldState, center: float, half_width: float, grid: Grid
) -> FieldState:
    """Zero the spectrum inside ``|w - center| <= half_width``."""
    if not -grid.omega_max < center <= grid.omega_max:
        raise ValueError(f"filter center {center} outside (-{grid.omega_max}, {grid.omega_max}]")
    mask = filter_mask(grid, center, half_width)
    if not mask.any():
        warnings.warn(f"filter band {center}+-{half_width} contains no lattice bins", stacklevel=2)
        return FieldState(field.samples.copy(), field.z)
    spec = forward_ft(field, grid)
    spec[mask] = 0.0
    return FieldState(inverse_ft(spec, grid), field.z)


def _dispersion(config: RunConfig, grid: Grid, fraction: float = 1.0) -> np.ndarray:
    w = grid.omega_native
    d = np.exp(1j * config.beta * w * w * config.dz * fraction)
    if config.filter is not None:
        mask = filter_mask(grid, *config.filter, native=True)
        if not mask.any():
            warnings.warn(f"filter band {config.filter} contains no lattice bins", stacklevel=3)
        d[mask] = 0.0
    return d


def _step_inplace(u: np.ndarray, d: np.ndarray, g: float, scheme: str) -> np.ndarray:
    if scheme == "strang":
        _nonlinear_phase(u, 0.5 * g)
        u = sfft.fft(u, overwrite_x=True)
        u *= d
        u = sfft.ifft(u, overwrite_x=True)
        _nonlinear_phase(u, 0.5 * g)
        return u
    _nonlinear_phase(u, g)
    u = sfft.fft(u, overwrite_x=True)
    u *= d
    return sfft.ifft(u, overwrite_x=True)


def split_step(field: FieldState, config: RunConfig, grid: Grid) -> FieldState:
    """Advance ``field`` by one step ``config.dz``."""
    if len(field) != grid.N:
        raise ValueError(f"field has {len(field)} samples, grid has {grid.N}")
    u = field.samples.copy()
    u = _step_inplace(u, _dispersion(config, grid), config.gamma * config.dz, config.scheme)
    if not np.all(np.isfinite(u)):
        raise BlowUpError("non-finite field after split step", step=1)
    return FieldState(u, field.z + config.dz)


def propagate(initial: FieldState, config: RunConfig, grid: Grid, *, raise_on_blowup=False) -> Trajectory:
    """Run ``round(z_max/dz)`` steps, recording every ``config.stride`` steps.

    The first snapshot is the initial condition and the final state is always
    recorded.  If the field turns non-finite or ``max|u|`` exceeds
    ``blowup_factor`` times the initial peak, the run stops and the returned
    trajectory is flagged (or :class:`BlowUpError` is raised).
    """
    if len(initial) != grid.N:
        raise ValueError(f"field has {len(initial)} samples, grid has {grid.N}")
    n_steps = config.n_steps
    stride = config.stride
    d = _dispersion(config, grid)
    g = config.gamma * config.dz
    bound = config.blowup_factor * max(np.abs(initial.samples).max(), np.finfo(float).tiny)

    n_rec = n_steps // stride + (1 if n_steps % stride else 0) + 1
    out = np.empty((n_rec, grid.N), dtype=np.complex128)
    zs = np.empty(n_rec)
    out[0] = initial.samples
    zs[0] = initial.z
    rec = 1

    u = initial.samples.copy()
    for n in range(1, n_steps + 1):
        u = _step_inplace(u, d, g, config.scheme)
        if n % stride == 0 or n == n_steps:
            out[rec] = u
            zs[rec] = initial.z + n * config.dz
            rec += 1
            peak = np.abs(u).max()
            if not np.isfinite(peak) or peak > bound:
                msg = f"blow-up at step {n} (z={n * config.dz:.4g}, max|u|={peak:.3g})"
                log.warning(msg)
                if raise_on_blowup:
                    raise BlowUpError(msg, step=n)
                return Trajectory(zs[:rec], out[:rec], blown_up=True, blowup_step=n)
    return Trajectory(zs[:rec], out[:rec])
