"""
Dense eigenanalysis of the linearised one-step split-step map.

A perturbation ``w`` of a stationary background ``u = ubar * exp(iKz)`` is
advanced in the co-rotating frame by

    w' = exp(-iK dz) * D[ P w + Q conj(w) ]

where ``D`` is the dispersive multiplier (a circulant matrix in the time
domain) and ``P, Q`` are diagonal.  The exact variant keeps the nonlinear
phase ``E = exp(i gamma |ubar|^2 dz)``::

    P = E (1 + i gamma dz |ubar|^2),   Q = E i gamma dz ubar^2

and the truncated variant expands ``E`` to first order::

    P = 1 + 2i gamma dz |ubar|^2,      Q = i gamma dz ubar^2

The map is real-linear, so it is diagonalised as the real ``2N x 2N`` matrix
acting on ``(Re w, Im w)``, which has the same eigenvalues as the complex
stacked form acting on ``(w, conj w)``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.fft as sfft
import scipy.linalg as sla

from .backgrounds import CwSpec, SolitonSpec, cw_profile, multi_soliton_profile, rotation_rate, soliton_profile
from .spectral import Grid, forward_ft

__all__ = [
    "LinearMap",
    "FloquetResult",
    "BandReport",
    "DEFAULT_MAX_N",
    "background_field",
    "build_linear_map",
    "floquet_increments",
    "scan_unstable_bands",
]

log = logging.getLogger(__name__)

DEFAULT_MAX_N = 2048
RESONANCE_WINDOW = 5.0


def background_field(background, beta: float, gamma: float, grid: Grid) -> tuple[np.ndarray, float]:
    """Samples of ``ubar`` and its rotation rate ``K``; ``None`` is the zero field."""
    if background is None:
        return np.zeros(grid.N, dtype=np.complex128), 0.0
    K = rotation_rate(background, beta, gamma)
    if isinstance(background, SolitonSpec):
        u = soliton_profile(background, beta, gamma, grid).samples
    elif isinstance(background, CwSpec):
        u = cw_profile(background, grid).samples
    else:
        u = multi_soliton_profile(list(background), beta, gamma, grid).samples
    return u, K


@dataclass(frozen=True)
class LinearMap:
    """``w -> A w + B conj(w)`` on the time samples of the perturbation."""

    A: np.ndarray
    B: np.ndarray
    dz: float
    beta: float
    gamma: float
    K: float
    variant: str
    background: object = None

    @property
    def N(self) -> int:
        return self.A.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        """Complex stacked form acting on ``(w, conj w)``."""
        return np.block([[self.A, self.B], [self.B.conj(), self.A.conj()]])

    def real_matrix(self) -> np.ndarray:
        """Equivalent real form acting on ``(Re w, Im w)``."""
        Ar, Ai, Br, Bi = self.A.real, self.A.imag, self.B.real, self.B.imag
        return np.block([[Ar + Br, Bi - Ai], [Ai + Bi, Ar - Br]])

    def apply(self, w: np.ndarray) -> np.ndarray:
        return self.A @ w + self.B @ np.conj(w)


def build_linear_map(
    background,
    beta: float,
    gamma: float,
    dz: float,
    grid: Grid,
    *,
    variant: str = "exact",
    max_n: int = DEFAULT_MAX_N,
) -> LinearMap:
    """Assemble the co-rotating linearised step over ``background``.

    ``background`` is a :class:`SolitonSpec`, :class:`CwSpec`, a sequence of
    equal-amplitude solitons, or ``None`` for the zero field.
    """
    if variant not in ("exact", "truncated"):
        raise ValueError(f"unknown map variant {variant!r}")
    if grid.N > max_n:
        raise ValueError(
            f"N={grid.N} exceeds the dense-eigen limit {max_n}; reduce T at fixed dt "
            "so that omega_max stays above the resonance"
        )
    if not dz > 0:
        raise ValueError(f"dz must be positive, got {dz}")
    ubar, K = background_field(background, beta, gamma, grid)
    a = gamma * dz * np.abs(ubar) ** 2
    if variant == "exact":
        E = np.exp(1j * a)
        p = E * (1 + 1j * a)
        q = E * 1j * gamma * dz * ubar**2
    else:
        p = 1 + 2j * a
        q = 1j * gamma * dz * ubar**2
    d = np.exp(1j * beta * grid.omega_native**2 * dz)
    # column j of the circulant D is its first column rolled by j
    c = sfft.ifft(d)
    idx = (np.arange(grid.N)[:, None] - np.arange(grid.N)[None, :]) % grid.N
    M = np.exp(-1j * K * dz) * c[idx]
    return LinearMap(M * p[None, :], M * q[None, :], dz, beta, gamma, K, variant, background)


@dataclass
class FloquetResult:
    """Eigenvalues of one map, sorted by decreasing increment.

    Mode shapes are kept for the first ``len(mass)`` modes.  ``mass[i]`` is
    the spectral mass of mode ``i`` over the increasing-order lattice,
    normalised to 1.  Because ``+-omega`` modes pair up, centroids and peaks
    are reported for the positive-frequency half; ``sidebands[i]`` holds the
    lower and upper of the two strongest positive-frequency lobes.
    """

    mu: np.ndarray
    increments: np.ndarray
    omega: np.ndarray
    mass: np.ndarray
    centroids: np.ndarray
    peaks: np.ndarray
    sidebands: np.ndarray
    resonant_fraction: np.ndarray
    dz: float
    resonances: list[float] = field(default_factory=list)

    @property
    def top_increment(self) -> float:
        return float(self.increments[0])

    def unstable(self, tol: float = 1e-3) -> np.ndarray:
        """Indices of modes with increment above ``tol``."""
        return np.flatnonzero(self.increments > tol)


def _mode_mass(vecs: np.ndarray, grid: Grid) -> np.ndarray:
    n = grid.N
    x, y = vecs[:n].T, vecs[n:].T
    a = x + 1j * y
    b_conj = np.conj(x - 1j * y)
    m = np.abs(forward_ft(a, grid)) ** 2 + np.abs(forward_ft(b_conj, grid)) ** 2
    return m / m.sum(axis=1, keepdims=True)


def _two_lobes(m: np.ndarray, w: np.ndarray, rel: float = 0.1) -> tuple[float, float]:
    i = int(np.argmax(m))
    rest = m.copy()
    rest[max(i - 1, 0): i + 2] = 0.0
    j = int(np.argmax(rest))
    if rest[j] < rel * m[i]:
        return w[i], w[i]
    return (w[i], w[j]) if w[i] < w[j] else (w[j], w[i])


def floquet_increments(
    lmap: LinearMap, grid: Grid, *, n_modes: int | None = None, tol: float = 1e-3
) -> FloquetResult:
    """All eigenvalues of ``lmap``; mode shapes for the leading modes.

    By default shapes are computed for every mode with increment above
    ``tol`` (at least one), otherwise for the first ``n_modes``.
    """
    R = lmap.real_matrix()
    try:
        mu, vecs = sla.eig(R, overwrite_a=True, check_finite=False)
    except sla.LinAlgError as exc:
        raise RuntimeError(f"dense eigen-solve failed: {exc}") from exc
    inc = np.log(np.abs(mu)) / lmap.dz
    order = np.argsort(-inc, kind="stable")
    mu, inc, vecs = mu[order], inc[order], vecs[:, order]
    if n_modes is None:
        n_modes = max(1, int(np.sum(inc > tol)))
    vecs = vecs[:, :n_modes]
    mass = _mode_mass(vecs, grid)
    w = grid.omega
    pos = w > 0
    pmass = mass[:, pos]
    centroids = (pmass * w[pos]).sum(axis=1) / np.maximum(pmass.sum(axis=1), 1e-300)
    peaks = w[pos][np.argmax(pmass, axis=1)]
    sidebands = np.array([_two_lobes(m, w[pos]) for m in pmass]).reshape(-1, 2)
    k_max = int(abs(lmap.beta) * grid.omega_max**2 * lmap.dz / np.pi + 1e-12)
    res = [float(np.sqrt(k * np.pi / (abs(lmap.beta) * lmap.dz))) for k in range(1, k_max + 1)]
    near = np.zeros(len(w), dtype=bool)
    for r in res:
        near |= np.abs(np.abs(w) - r) <= RESONANCE_WINDOW
    frac = mass[:, near].sum(axis=1)
    return FloquetResult(mu, inc, w, mass, centroids, peaks, sidebands, frac, lmap.dz, res)


@dataclass(frozen=True)
class BandReport:
    """Unstable-mode locations for each ``dz`` of a sweep."""

    dz: list[float]
    modes: list[list[tuple[float, float, int, float]]]

    def rows(self):
        """``(dz, centroid, increment, nearest k, distance to omega_k_pi)``."""
        for dz, ms in zip(self.dz, self.modes):
            for c, inc, k, dist in ms:
                yield dz, c, inc, k, dist

    @property
    def empty(self) -> bool:
        return not any(self.modes)


def scan_unstable_bands(
    results: Iterable[tuple[float, FloquetResult]] | Sequence[FloquetResult], tol: float = 1e-3
) -> BandReport:
    """Locate every unstable mode relative to the nearest resonance."""
    dzs, modes = [], []
    for item in results:
        r = item[1] if isinstance(item, tuple) else item
        dzs.append(r.dz)
        row = []
        for i in r.unstable(tol):
            if i >= len(r.centroids):
                break
            c = float(r.centroids[i])
            dist = [abs(c - w) for w in r.resonances] or [np.inf]
            k = int(np.argmin(dist))
            row.append((c, float(r.increments[i]), k + 1, float(dist[k])))
        modes.append(row)
    return BandReport(dzs, modes)
