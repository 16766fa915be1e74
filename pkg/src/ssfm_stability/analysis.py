"""
Measure instability from simulated spectra: noise floor, peaks near the
resonant frequencies, growth increments and the peak-pair symmetry.

Peaks are labelled per resonance ``k`` and side (``+1`` near ``+omega_k_pi``,
``-1`` near ``-omega_k_pi``).  On each side the strongest pair of peaks
roughly symmetric about the resonance is the *primary* pair, its lower
member ``left`` and upper member ``right``; a lone peak at the resonance is
labelled ``central``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import signal, stats

from .propagator import Trajectory
from .spectral import FieldState, Grid, ResonanceInfo, forward_ft

__all__ = [
    "PowerSpectrum",
    "Peak",
    "PeakSet",
    "IncrementEstimate",
    "ShiftReport",
    "InstabilityReport",
    "power_spectrum",
    "default_exclusions",
    "noise_floor",
    "detect_peaks",
    "estimate_increment_endpoint",
    "growth_rate",
    "estimate_increment_slope",
    "check_shift_symmetry",
    "analyze_trajectory",
]

LN10 = math.log(10.0)
SOLITON_BAND = 5.0
RESONANCE_BAND = 5.0


@dataclass(frozen=True)
class PowerSpectrum:
    """``log10`` of the continuous-normalised spectrum magnitude at ``z``."""

    omega: np.ndarray
    log10_mag: np.ndarray
    z: float = 0.0

    def __post_init__(self):
        if self.omega.shape != self.log10_mag.shape:
            raise ValueError("omega and log10_mag must have the same shape")

    @property
    def d_omega(self) -> float:
        return float(self.omega[1] - self.omega[0])

    def reflected(self) -> "PowerSpectrum":
        """Spectrum of the field reflected in ``omega`` (``l -> -l``)."""
        n = len(self.omega)
        ell = np.rint(self.omega / self.d_omega).astype(int)
        src = (-ell - ell[0]) % n
        return PowerSpectrum(self.omega, self.log10_mag[src], self.z)


def power_spectrum(field: FieldState, grid: Grid) -> PowerSpectrum:
    mag = np.abs(forward_ft(field, grid))
    return PowerSpectrum(grid.omega, _log10(mag), field.z)


def _log10(mag: np.ndarray) -> np.ndarray:
    return np.log10(np.maximum(mag, 1e-300))


def default_exclusions(
    res: ResonanceInfo | None, soliton_band=SOLITON_BAND, resonance_band=RESONANCE_BAND
) -> list[tuple[float, float]]:
    """``(center, half_width)`` bands kept out of the noise-floor median."""
    bands = [(0.0, soliton_band)]
    if res is not None:
        for w in res.resonances():
            bands += [(w, resonance_band), (-w, resonance_band)]
    return bands


def _excluded(omega: np.ndarray, exclusions: Iterable[tuple[float, float]]) -> np.ndarray:
    mask = np.zeros(omega.shape, dtype=bool)
    for c, hw in exclusions:
        mask |= np.abs(omega - c) < hw
    return mask


def noise_floor(spectrum: PowerSpectrum, exclusions: Iterable[tuple[float, float]] = ()) -> float:
    """Median ``log10`` magnitude over bins outside the exclusion bands."""
    keep = ~_excluded(spectrum.omega, exclusions)
    if keep.sum() < 0.25 * len(spectrum.omega):
        raise ValueError(
            f"exclusion bands leave {keep.sum()} of {len(spectrum.omega)} bins (< 25%)"
        )
    return float(np.median(spectrum.log10_mag[keep]))


@dataclass(frozen=True)
class Peak:
    omega: float
    height: float
    bin_count: int
    index: int
    k: int = 1
    side: int = 1
    label: str | None = None
    rank: str | None = None


@dataclass
class PeakSet:
    peaks: list[Peak]
    noise_floor_exponent: float
    threshold: float
    omega_pi: float
    d_omega: float

    def __len__(self):
        return len(self.peaks)

    def __iter__(self):
        return iter(self.peaks)

    @property
    def unstable(self) -> bool:
        return bool(self.peaks)

    def get(self, label: str, side: int = 1, k: int = 1, rank: str = "primary") -> Peak | None:
        """Peak with ``label`` ('left'/'right'); a central peak answers both."""
        for p in self.peaks:
            if p.k == k and p.side == side and p.rank == rank and p.label in (label, "central"):
                return p
        return None

    def primary(self, k: int = 1) -> list[Peak]:
        return [p for p in self.peaks if p.k == k and p.rank == "primary"]

    def half_separation(self, k: int = 1) -> float:
        """``(right+ - left+)/2`` of the primary pair; 0 when stable or central."""
        left, right = self.get("left", 1, k), self.get("right", 1, k)
        if left is None or right is None:
            return 0.0
        return 0.5 * (right.omega - left.omega)

    def offsets(self, k: int = 1) -> tuple[float, float] | None:
        """``(left+ - omega_pi, right+ - omega_pi)`` of the primary pair."""
        left, right = self.get("left", 1, k), self.get("right", 1, k)
        if left is None or right is None:
            return None
        return left.omega - self.omega_pi, right.omega - self.omega_pi


def _run_length(above: np.ndarray, i: int) -> int:
    lo = i
    while lo > 0 and above[lo - 1]:
        lo -= 1
    hi = i
    while hi < len(above) - 1 and above[hi + 1]:
        hi += 1
    return hi - lo + 1


def _pick_pair(cands: list[Peak], center: float, tol: float, central_tol: float):
    """Best (left, right) pair or single central peak by weakest member height.

    Ties go to a pair over a single peak, then to the midpoint nearest
    ``center``, so the choice does not depend on the scan direction.
    """
    best, key = None, None
    for i, a in enumerate(cands):
        options = [((a,), a.omega)] if abs(a.omega - center) <= central_tol else []
        options += [((a, b), 0.5 * (a.omega + b.omega)) for b in cands[i + 1:]]
        for members, mid in options:
            if abs(mid - center) > tol:
                continue
            k = (min(m.height for m in members), len(members), -abs(mid - center))
            if key is None or k > key:
                best, key = members, k
    return best


def detect_peaks(
    spectrum: PowerSpectrum,
    res: ResonanceInfo,
    floor_margin: float = 2.0,
    *,
    noise_exponent: float | None = None,
    window: float = 5.0,
    prominence: float = 1.0,
    max_pairs: int = 2,
) -> PeakSet:
    """Find instability peaks within ``window`` of each ``+-omega_k_pi``.

    A peak is a local maximum at least ``floor_margin`` decades above the
    noise floor and ``prominence`` decades above its surroundings; bins of
    the pedestal around it count towards ``bin_count``.
    """
    floor = noise_exponent
    if floor is None:
        floor = noise_floor(spectrum, default_exclusions(res))
    thr = floor + floor_margin
    w, y = spectrum.omega, spectrum.log10_mag
    dw = spectrum.d_omega
    # pair midpoints sit within ~0.1 of the resonance; a lone peak much closer
    tol = 0.1 + dw
    central_tol = max(1.5 * dw, 0.05)
    above = y >= thr
    out: list[Peak] = []
    for k in range(1, res.k_max + 1):
        wk = res.omega_k_pi(k)
        for side in (1, -1):
            center = side * wk
            sel = np.flatnonzero(np.abs(w - center) <= window)
            if sel.size < 3:
                continue
            # pad with -inf so maxima at the window edge still register
            seg = np.concatenate(([-np.inf], y[sel], [-np.inf]))
            idx, _ = signal.find_peaks(seg, height=thr, prominence=prominence)
            cands = [
                Peak(float(w[j]), float(y[j]), int(_run_length(above, j)), int(j), k, side)
                for j in sel[idx - 1]
            ]
            cands.sort(key=lambda p: p.omega)
            remaining = list(cands)
            labelled = []
            for r in range(max_pairs):
                pair = _pick_pair(remaining, center, tol, central_tol)
                if pair is None:
                    break
                rank = ("primary", "secondary")[r] if r < 2 else f"order-{r + 1}"
                if len(pair) == 1:
                    labelled.append(_relabel(pair[0], "central", rank))
                else:
                    labelled += [_relabel(pair[0], "left", rank), _relabel(pair[1], "right", rank)]
                remaining = [p for p in remaining if p not in pair]
            out += labelled + remaining
    out.sort(key=lambda p: p.omega)
    return PeakSet(out, float(floor), float(thr), res.omega_pi, dw)


def _relabel(p: Peak, label: str, rank: str) -> Peak:
    return Peak(p.omega, p.height, p.bin_count, p.index, p.k, p.side, label, rank)


@dataclass(frozen=True)
class IncrementEstimate:
    value: float
    stderr: float = float("nan")
    stable: bool = False
    n_points: int = 0
    method: str = ""


def estimate_increment_endpoint(
    peaks: PeakSet, noise_exponent: float, z_max: float
) -> IncrementEstimate:
    """``(mean primary peak exponent - noise exponent) * ln10 / z_max``.

    The mean runs over every primary peak on both sides of ``omega = 0``.
    """
    if not z_max > 0:
        raise ValueError("z_max must be positive")
    prim = [p for p in peaks.peaks if p.rank == "primary" and p.k == 1]
    if not prim:
        return IncrementEstimate(0.0, stable=True, method="endpoint")
    mean_exp = float(np.mean([p.height for p in prim]))
    val = (mean_exp - noise_exponent) * LN10 / z_max
    return IncrementEstimate(val, n_points=len(prim), method="endpoint")


def growth_rate(
    z: np.ndarray,
    magnitude: np.ndarray,
    *,
    threshold: float | None = None,
    cap: float | None = None,
    min_points: int = 10,
) -> IncrementEstimate:
    """Least-squares slope of ``ln|magnitude|`` against ``z``.

    Only the longest contiguous stretch with ``threshold <= magnitude <= cap``
    is fit (the later one on ties).  This drops the transient before the
    growing mode dominates the bin and the saturated tail.
    """
    z = np.asarray(z, dtype=float)
    m = np.abs(np.asarray(magnitude))
    ok = np.ones(m.shape, dtype=bool)
    if threshold is not None:
        ok &= m >= threshold
    if cap is not None:
        ok &= m <= cap
    start, stop = _longest_run(ok)
    n = stop - start
    if n < min_points:
        return IncrementEstimate(0.0, stable=True, n_points=n, method="slope")
    fit = stats.linregress(z[start:stop], np.log(np.maximum(m[start:stop], 1e-300)))
    stable = fit.slope <= 0
    return IncrementEstimate(float(fit.slope), float(fit.stderr), stable, n, "slope")


def _longest_run(mask: np.ndarray) -> tuple[int, int]:
    best = (0, 0)
    i, n = 0, len(mask)
    while i < n:
        if not mask[i]:
            i += 1
            continue
        j = i
        while j < n and mask[j]:
            j += 1
        if j - i >= best[1] - best[0]:
            best = (i, j)
        i = j
    return best


def estimate_increment_slope(
    trajectory: Trajectory,
    peak_bin: int,
    grid: Grid,
    *,
    floor: float | None = None,
    margin: float = 1.0,
    saturation: float = 2.0,
    min_points: int = 10,
) -> IncrementEstimate:
    """Growth rate of spectral bin ``peak_bin`` (increasing-order index).

    ``floor`` is the seeding noise exponent; by default the median over the
    initial spectrum outside the soliton band.  Snapshots less than
    ``margin`` decades above it, or within ``saturation`` decades of the
    initial spectral maximum, are ignored.
    """
    spectra = trajectory.spectra(grid)
    if floor is None:
        floor = initial_floor(trajectory, grid)
    cap = spectra[0].max() * 10.0 ** (-saturation)
    return growth_rate(
        trajectory.z,
        spectra[:, peak_bin],
        threshold=10.0 ** (floor + margin),
        cap=cap,
        min_points=min_points,
    )


def initial_floor(trajectory: Trajectory, grid: Grid) -> float:
    spec = PowerSpectrum(grid.omega, _log10(trajectory.spectra(grid)[0]), float(trajectory.z[0]))
    return noise_floor(spec, [(0.0, SOLITON_BAND)])


@dataclass(frozen=True)
class ShiftReport:
    holds: bool
    left_minus_error: float
    right_minus_error: float
    center_shift: float
    tolerance: float


def check_shift_symmetry(peaks: PeakSet, tolerance: float | None = None) -> ShiftReport:
    """Check ``w_left- = -w_right+`` and ``w_right- = -w_left+`` within one bin."""
    lp, rp = peaks.get("left", 1), peaks.get("right", 1)
    lm, rm = peaks.get("left", -1), peaks.get("right", -1)
    missing = [n for n, p in (("left+", lp), ("right+", rp), ("left-", lm), ("right-", rm)) if p is None]
    if missing:
        raise ValueError(f"missing labelled peaks: {', '.join(missing)}")
    tol = peaks.d_omega if tolerance is None else tolerance
    e1 = lm.omega + rp.omega
    e2 = rm.omega + lp.omega
    shift = 0.5 * (lp.omega + rp.omega) - peaks.omega_pi
    ok = abs(e1) <= tol + 1e-12 and abs(e2) <= tol + 1e-12
    return ShiftReport(ok, e1, e2, shift, tol)


@dataclass
class InstabilityReport:
    """Measured instability of one run."""

    stable: bool
    increment: float
    increment_endpoint: IncrementEstimate
    increment_slope: IncrementEstimate
    omega_pi: float
    left_offset: float | None
    right_offset: float | None
    half_separation: float
    noise_floor_final: float
    noise_floor_initial: float
    peaks: PeakSet
    symmetry: ShiftReport | None = None
    spectrum: PowerSpectrum | None = field(default=None, repr=False)
    notes: list[str] = field(default_factory=list)


def _last_linear_snapshot(trajectory: Trajectory, grid: Grid, res: ResonanceInfo, saturation: float) -> int:
    spectra = trajectory.spectra(grid)
    cap = spectra[0].max() * 10.0 ** (-saturation)
    near = np.zeros(grid.N, dtype=bool)
    for w in res.resonances():
        near |= np.abs(np.abs(grid.omega) - w) <= RESONANCE_BAND
    over = np.flatnonzero(spectra[:, near].max(axis=1) > cap)
    return int(over[0]) - 1 if over.size else len(trajectory) - 1


def analyze_trajectory(
    trajectory: Trajectory,
    grid: Grid,
    res: ResonanceInfo,
    *,
    floor_margin: float = 2.0,
    exclusions: Sequence[tuple[float, float]] | None = None,
    saturation: float = 2.0,
) -> InstabilityReport:
    """Spectrum at the last snapshot, peaks, both increment estimators.

    The slope estimator is fitted on the primary peaks at ``z_max`` unless
    the resonant bins came within ``saturation`` decades of the initial
    spectral maximum; then it uses the peaks of the last snapshot before
    that happened.
    """
    final = trajectory.final
    spec = power_spectrum(final, grid)
    excl = default_exclusions(res) if exclusions is None else list(exclusions)
    floor = noise_floor(spec, excl)
    floor0 = initial_floor(trajectory, grid)
    peaks = detect_peaks(spec, res, floor_margin, noise_exponent=floor)
    z_span = float(trajectory.z[-1] - trajectory.z[0])
    notes = []
    if not peaks.unstable or z_span <= 0:
        none = IncrementEstimate(0.0, stable=True)
        return InstabilityReport(
            True, 0.0, none, none, res.omega_pi, None, None, 0.0, floor, floor0, peaks,
            spectrum=spec,
        )
    endpoint = estimate_increment_endpoint(peaks, floor0, z_span)
    notes.append("endpoint increment averages all primary peaks against the initial noise floor")
    fit_peaks = peaks
    s = _last_linear_snapshot(trajectory, grid, res, saturation)
    if s < len(trajectory) - 1:
        # saturated: the modes that dominate at z_max are not the linear ones
        spec_s = PowerSpectrum(grid.omega, _log10(trajectory.spectra(grid)[s]), float(trajectory.z[s]))
        lin = detect_peaks(spec_s, res, floor_margin, noise_exponent=noise_floor(spec_s, excl))
        if lin.primary():
            fit_peaks = lin
            notes.append(f"growth saturated; slope fitted on peaks at z={trajectory.z[s]:.4g}")
    slopes = [
        estimate_increment_slope(trajectory, p.index, grid, floor=floor0, saturation=saturation)
        for p in fit_peaks.primary()
    ]
    good = [e for e in slopes if not e.stable]
    if good:
        slope = IncrementEstimate(
            float(np.mean([e.value for e in good])),
            float(np.sqrt(np.mean([e.stderr**2 for e in good]))),
            False,
            min(e.n_points for e in good),
            "slope",
        )
    else:
        slope = IncrementEstimate(0.0, stable=True, method="slope")
    increment = slope.value if not slope.stable else endpoint.value
    offs = peaks.offsets()
    sym = None
    try:
        sym = check_shift_symmetry(peaks)
    except ValueError as exc:
        notes.append(str(exc))
    return InstabilityReport(
        False,
        increment,
        endpoint,
        slope,
        res.omega_pi,
        offs[0] if offs else None,
        offs[1] if offs else None,
        peaks.half_separation(),
        floor,
        floor0,
        peaks,
        sym,
        spec,
        notes,
    )
