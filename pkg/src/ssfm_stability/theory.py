"""
Semi-analytic predictions of the split-step instability.

Soliton background
------------------
Unstable modes come in coupled pairs near ``+-omega_pi`` labelled by a
half-separation ``Omega = pi * n_diff / T``.  A pair ``(n_sum, n_diff)`` of
equal-parity integers yields the real quantity::

    X = -(K/beta + 2 dw_pi / eps) T + pi^2 n_diff^2 / T + 2 pi n_sum / eps

and the mode grows when ``|2 F0 + (beta/gamma) X| < |F(2 Omega)|`` where
``F(nu)`` is the continuous transform of ``U^2``.  The growth rate is then
``gamma * sqrt(|F(2 Omega)|^2 - (2 F0 + (beta/gamma) X)^2) / T``.

Monochromatic background
------------------------
Closed-form rate ``sqrt((gamma A^2)^2 - (2 beta W - gamma A^2)^2)`` for the
offset ``W = (omega_k_pi - omega) * omega_k_pi`` inside
``0 < beta W < gamma A^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy import integrate

from .backgrounds import CwSpec, SolitonSpec, soliton_envelope
from .spectral import Grid, ResonanceInfo

__all__ = [
    "TheoryPrediction",
    "CwPrediction",
    "u_sq_ft",
    "u_sq_ft_quad",
    "instability_interval",
    "theory_rhs",
    "jump_difference",
    "predict_soliton_instability",
    "predicted_peak_frequencies",
    "center_shift",
    "single_node_criterion",
    "max_increment",
    "omega_scale_estimate",
    "closest_negative_sum",
    "cw_growth_rate",
    "cw_predict",
]

RANKS = ("primary", "secondary", "tertiary")


def _sech2_params(soliton: SolitonSpec, beta: float, gamma: float):
    # U^2 = amp * sech^2(a t)
    a = soliton.A / math.sqrt(abs(beta))
    amp = 2.0 * soliton.A**2 / abs(gamma)
    return amp, a


def u_sq_ft(Omega: float, soliton: SolitonSpec, beta: float, gamma: float) -> complex:
    """``F[U^2](2*Omega)`` from the closed-form transform of ``sech^2``.

    ``int sech^2(a t) exp(-i nu t) dt = pi nu / (a^2 sinh(pi nu / (2a)))``;
    an off-center soliton contributes the phase ``exp(-i nu t0)``.
    """
    amp, a = _sech2_params(soliton, beta, gamma)
    nu = 2.0 * Omega
    x = math.pi * nu / (2.0 * a)
    if abs(x) < 1e-8:
        val = amp * 2.0 / a * (1.0 - x * x / 6.0)
    elif abs(x) > 700:
        val = 0.0
    else:
        val = amp * math.pi * nu / (a * a * math.sinh(x))
    return complex(val * np.exp(-1j * nu * soliton.center))


def u_sq_ft_quad(Omega: float, soliton: SolitonSpec, beta: float, gamma: float) -> complex:
    """Quadrature of ``int U^2(t) exp(-2 i Omega t) dt`` over the real line.

    ``U^2`` is even and below ``1e-21`` of its peak beyond ``a t = 25``, so
    the cosine transform over ``[0, 25/a]`` is exact to double precision.
    """
    nu = 2.0 * Omega
    _, a = _sech2_params(soliton, beta, gamma)
    L = 25.0 / a

    def f(t):
        return soliton_envelope(t, soliton.A, beta, gamma) ** 2

    opts = dict(epsabs=1e-13, epsrel=1e-12, limit=400)
    if nu == 0:
        val, _ = integrate.quad(f, 0.0, L, **opts)
    else:
        val, _ = integrate.quad(f, 0.0, L, weight="cos", wvar=abs(nu), **opts)
    return complex(2.0 * val * np.exp(-1j * nu * soliton.center))


def instability_interval(
    Omega: float, soliton: SolitonSpec, beta: float, gamma: float
) -> tuple[float, float]:
    """Open interval of ``X`` for which the ``Omega`` mode is unstable."""
    f0 = u_sq_ft(0.0, soliton, beta, gamma).real
    f2 = abs(u_sq_ft(Omega, soliton, beta, gamma))
    r = gamma / beta
    lo, hi = sorted((r * (-2.0 * f0 - f2), r * (-2.0 * f0 + f2)))
    return lo, hi


def _first_term(K: float, beta: float, T: float, res: ResonanceInfo) -> float:
    return -(K / beta + 2.0 * res.delta_omega_pi / res.epsilon) * T


def theory_rhs(
    n_sum: int, n_diff: int, soliton: SolitonSpec, beta: float, T: float, res: ResonanceInfo
) -> tuple[float, float]:
    """``(Omega, X)`` for the integer pair ``(n_sum, n_diff)``."""
    if (n_sum - n_diff) % 2:
        raise ValueError(f"n_sum={n_sum} and n_diff={n_diff} must have equal parity")
    K = soliton.K(beta)
    Omega = math.pi * n_diff / T
    X = (
        _first_term(K, beta, T, res)
        + math.pi**2 * n_diff**2 / T
        + 2.0 * math.pi * n_sum / res.epsilon
    )
    return Omega, X


def jump_difference(
    X: float, Omega: float, soliton: SolitonSpec, beta: float, gamma: float
) -> complex:
    """``J_P - J_M`` for ``i(J_P + J_M) = X``, on the growing branch.

    The branch is chosen so that ``beta * Re(J_P - J_M) >= 0``.
    """
    f0 = u_sq_ft(0.0, soliton, beta, gamma).real
    f2 = abs(u_sq_ft(Omega, soliton, beta, gamma))
    q = 2.0 * f0 + (beta / gamma) * X
    root = np.sqrt(complex(q * q - f2 * f2))
    jd = 1j * gamma / beta * root
    if beta * jd.real < 0:
        jd = -jd
    return complex(jd)


@dataclass(frozen=True)
class TheoryPrediction:
    n_sum: int
    n_diff: int
    Omega: float
    X: float
    increment: float
    jump_diff: complex
    interval: tuple[float, float]
    rank: str = "primary"
    peak_frequencies: dict = field(default_factory=dict, compare=False)

    @property
    def half_separation(self) -> float:
        return abs(self.Omega)


def closest_negative_sum(soliton: SolitonSpec, beta: float, T: float, res: ResonanceInfo) -> int:
    """Largest ``n_sum`` for which ``first_term + 2 pi n_sum / eps`` is negative."""
    first = _first_term(soliton.K(beta), beta, T, res)
    step = 2.0 * math.pi / res.epsilon
    c = math.ceil(-first / step) - 1
    while first + (c + 1) * step < 0:
        c += 1
    while first + c * step >= 0:
        c -= 1
    return c


def _n_diff_estimate(first: float, n_sum: int, T: float, res: ResonanceInfo) -> float:
    e = first + 2.0 * math.pi * n_sum / res.epsilon
    return math.sqrt(max(-e * T / math.pi**2, 0.0))


def predicted_peak_frequencies(
    Omega: float, soliton: SolitonSpec, beta: float, res: ResonanceInfo
) -> dict[str, float]:
    """Frequencies of the four peaks fed by the ``Omega`` mode and its twin."""
    c = res.omega_pi + center_shift(Omega, soliton, beta, res)
    W = abs(Omega)
    return {
        "right+": c + W,
        "left+": c - W,
        "right-": -(c - W),
        "left-": -(c + W),
    }


def center_shift(Omega: float, soliton: SolitonSpec, beta: float, res: ResonanceInfo) -> float:
    """Offset of the peak-pair midpoint from ``omega_pi``."""
    K = soliton.K(beta)
    return -res.epsilon * (-K / beta + Omega**2) / 2.0


def predict_soliton_instability(
    soliton: SolitonSpec,
    beta: float,
    gamma: float,
    T: float,
    res: ResonanceInfo,
    search_width: int = 8,
) -> list[TheoryPrediction]:
    """Unstable ``(n_sum, n_diff)`` pairs near ``omega_pi``, strongest first.

    ``n_sum`` runs over the value closest to zero that keeps the
    ``Omega``-independent part of ``X`` negative, one above it and two below.
    For each, ``n_diff >= 0`` is scanned from ``search_width`` below its
    zero-crossing estimate to ``search_width`` beyond the largest value whose
    ``X`` can still reach an instability interval.  Adjacent ``n_diff`` of
    one ``n_sum`` are nodes of the same spectral peak and share a rank.  An
    empty list means stable, which includes ``omega_pi`` above the grid's
    highest frequency.
    """
    if res.k_max == 0:
        # the resonance lies beyond the grid's highest frequency
        return []
    K = soliton.K(beta)
    first = _first_term(K, beta, T, res)
    c = closest_negative_sum(soliton, beta, T, res)
    found: list[TheoryPrediction] = []
    # envelope of every instability interval, reached at Omega = 0
    x_lo, x_hi = instability_interval(0.0, soliton, beta, gamma)
    for n_sum in (c + 1, c, c - 1, c - 2):
        e = first + 2.0 * math.pi * n_sum / res.epsilon
        est = _n_diff_estimate(first, n_sum, T, res)
        n_lo = math.sqrt(max((x_lo - e) * T / math.pi**2, 0.0))
        n_hi = math.sqrt(max((x_hi - e) * T / math.pi**2, 0.0))
        lo = max(0, math.floor(min(est, n_lo)) - search_width)
        hi = math.ceil(max(est, n_hi)) + search_width
        for n_diff in range(lo, hi + 1):
            if (n_sum - n_diff) % 2:
                continue
            Omega, X = theory_rhs(n_sum, n_diff, soliton, beta, T, res)
            interval = instability_interval(Omega, soliton, beta, gamma)
            if not interval[0] < X < interval[1]:
                continue
            jd = jump_difference(X, Omega, soliton, beta, gamma)
            inc = beta * jd.real / T
            if inc <= 0:
                continue
            found.append(
                TheoryPrediction(
                    n_sum, n_diff, Omega, X, inc, jd, interval,
                    peak_frequencies=predicted_peak_frequencies(Omega, soliton, beta, res),
                )
            )
    return _rank(found)


def _rank(preds: Sequence[TheoryPrediction]) -> list[TheoryPrediction]:
    # group adjacent nodes (same n_sum, n_diff differing by 2) into one peak
    groups: list[list[TheoryPrediction]] = []
    for p in sorted(preds, key=lambda p: (p.n_sum, p.n_diff)):
        g = groups[-1] if groups else None
        if g and g[-1].n_sum == p.n_sum and p.n_diff - g[-1].n_diff == 2:
            g.append(p)
        else:
            groups.append([p])
    groups.sort(key=lambda g: -max(p.increment for p in g))
    out = []
    for i, g in enumerate(groups):
        rank = RANKS[i] if i < len(RANKS) else f"order-{i + 1}"
        out.extend(replace(p, rank=rank) for p in g)
    out.sort(key=lambda p: -p.increment)
    return out


def single_node_criterion(Omega: float, soliton: SolitonSpec, beta: float, gamma: float) -> bool:
    """True when a peak at ``Omega`` can hold only one lattice node."""
    f2 = abs(u_sq_ft(Omega, soliton, beta, gamma))
    return 4.0 * math.pi * abs(Omega) > 2.0 * abs(gamma / beta) * f2


def max_increment(background, gamma: float, T: float, beta: float = -1.0) -> float:
    """Upper envelope ``(gamma/T) int_{-T/2}^{T/2} U^2 dt`` of the growth rate.

    For a monochromatic wave this is ``gamma A^2``.
    """
    if isinstance(background, CwSpec):
        return abs(gamma) * background.A**2
    amp, a = _sech2_params(background, beta, gamma)
    integral = amp * 2.0 / a * math.tanh(a * T / 2.0)
    return abs(gamma) * integral / T


@dataclass(frozen=True)
class OmegaScale:
    n_sum: int
    n_diff_estimate: float
    Omega_estimate: float
    likely_unstable: bool


def omega_scale_estimate(
    soliton: SolitonSpec, beta: float, gamma: float, T: float, res: ResonanceInfo
) -> OmegaScale:
    """Order-of-magnitude half-separation and the sufficient-instability flag."""
    first = _first_term(soliton.K(beta), beta, T, res)
    c = closest_negative_sum(soliton, beta, T, res)
    est = _n_diff_estimate(first, c, T, res)
    Om = math.pi * est / T
    f2 = abs(u_sq_ft(Om, soliton, beta, gamma))
    flag = 4.0 * math.pi * Om < 2.0 * abs(gamma / beta) * f2
    return OmegaScale(c, est, Om, flag)


def cw_growth_rate(W, A: float, beta: float, gamma: float):
    """Growth rate at offset ``W``; zero outside ``0 < beta W < gamma A^2``."""
    W = np.asarray(W, dtype=float)
    g = gamma * A**2
    rad = g * g - (2.0 * beta * W - g) ** 2
    return np.sqrt(np.clip(rad, 0.0, None))


@dataclass(frozen=True)
class CwPrediction:
    """Lattice-sampled monochromatic-background growth rates.

    ``omega``, ``W``, ``rate`` and ``k`` list lattice points within ``window``
    of ``+-omega_k_pi`` (positive side; the rates are even in ``omega``).
    """

    omega: np.ndarray
    W: np.ndarray
    rate: np.ndarray
    k: np.ndarray
    lambda_max: float
    band_width: dict[int, float]
    band: dict[int, tuple[float, float]]
    grid_miss: dict[int, bool]

    def in_band(self) -> np.ndarray:
        return self.rate > 0


def cw_predict(
    cw: CwSpec, beta: float, gamma: float, grid: Grid, res: ResonanceInfo, window: float = 1.0
) -> CwPrediction:
    if cw.Omega_cw != 0:
        raise ValueError("closed forms assume Omega_cw = 0")
    g = gamma * cw.A**2
    om, Ws, rates, ks = [], [], [], []
    widths, bands, miss = {}, {}, {}
    for k in range(1, res.k_max + 1):
        wk = res.omega_k_pi(k)
        sel = np.abs(grid.omega - wk) <= window
        w = grid.omega[sel]
        W = (wk - w) * wk
        om.append(w)
        Ws.append(W)
        rates.append(cw_growth_rate(W, cw.A, beta, gamma))
        ks.append(np.full(w.shape, k))
        widths[k] = abs(g / (beta * wk))
        # 0 < beta W < g  <=>  omega between wk and wk - g/(beta wk)
        bands[k] = tuple(sorted((wk, wk - g / (beta * wk))))
        miss[k] = widths[k] < grid.d_omega
    om, Ws, rates, ks = (np.concatenate(xs) if xs else np.empty(0) for xs in (om, Ws, rates, ks))
    return CwPrediction(om, Ws, rates, ks, abs(g), widths, bands, miss)
