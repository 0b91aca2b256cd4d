"""Quantitative buildup analysis: charging law, crossover, and envelopes.

On resonance the normalized modulus follows |Psi(tau)/phi| = 1 - e^{-tau/2}
(time constant: two lifetimes) until the exponential term dips below the
algebraic remainder; ln delta(tau) with delta = |1 - |Psi/phi|| then leaves
the slope -1/2 line and turns into a tau^{-1/2}-modulated oscillation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import TransientSolution
from .resonances import ResonantState
from .scattering import stationary_wave


class NodePositionError(ValueError):
    """|phi(x)| is numerically zero: normalization is meaningless at a node."""


class FitWindowError(RuntimeError):
    """The requested fit window is not covered or not in the linear regime."""


class NoOnsetError(RuntimeError):
    """The series ends before the slope leaves the exponential regime."""


def exponential_law(tau):
    """Charging law 1 - e^{-tau/2} for tau >= 0."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0.0):
        raise ValueError("tau must be non-negative")
    out = 1.0 - np.exp(-0.5 * tau)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class BuildupSeries:
    """Normalized buildup on a lifetime-unit grid."""

    tau: np.ndarray = field(repr=False)
    ratio_abs: np.ndarray = field(repr=False)
    ratio_abs2: np.ndarray = field(repr=False)
    delta: np.ndarray = field(repr=False)
    resonance_index: int | None
    r_ratio: float


@dataclass(frozen=True)
class OnsetReport:
    """Exponential-window fit and crossover location."""

    tau0: float
    fit_window: tuple[float, float]
    fit_slope: float
    fit_residual: float
    tau_onset: float | None = None
    envelope_exponent: float | None = None


def normalize_buildup(
    solution: TransientSolution,
    state: ResonantState,
    profile=None,
    energy_ev: float | None = None,
    x: float | None = None,
    *,
    resonance_index: int | None = None,
) -> BuildupSeries:
    """|Psi/phi| series with time converted to lifetime units.

    phi is recomputed from the stationary solver at the solution's energy
    and position (overridable), and tau = t Gamma_n / hbar.
    """
    profile = profile if profile is not None else solution.profile
    energy_ev = energy_ev if energy_ev is not None else solution.energy_ev
    x = x if x is not None else solution.x
    phi = stationary_wave(profile, energy_ev, x)
    if abs(phi) < 1e-12:
        raise NodePositionError(f"|phi({x})| = {abs(phi):.2e}; position sits on a node")
    tau = solution.t_fs / state.lifetime_fs
    ratio = np.abs(solution.psi / phi)
    return BuildupSeries(
        tau=tau,
        ratio_abs=ratio,
        ratio_abs2=ratio**2,
        delta=np.abs(1.0 - ratio),
        resonance_index=resonance_index,
        r_ratio=state.r_ratio,
    )


def fit_time_constant(
    series: BuildupSeries,
    *,
    tau_min: float = 0.5,
    tau_max: float = 6.0,
    residual_tol: float = 0.05,
) -> OnsetReport:
    """Least-squares fit of ln(1 - |Psi/phi|) over the pre-onset window.

    tau0 = -1/slope; an RMS residual above ``residual_tol`` means the window
    reaches into the crossover and is rejected.
    """
    tau, ratio = series.tau, series.ratio_abs
    if tau[0] > tau_min + 1e-12 or tau[-1] < tau_max - 1e-12:
        raise FitWindowError(
            f"series [{tau[0]:.3g}, {tau[-1]:.3g}] does not cover [{tau_min}, {tau_max}]"
        )
    mask = (tau >= tau_min) & (tau <= tau_max) & (ratio < 1.0)
    if np.count_nonzero(mask) < 8:
        raise FitWindowError("too few usable points in the fit window")
    x = tau[mask]
    y = np.log(1.0 - ratio[mask])
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - slope * x - intercept) ** 2)))
    if residual > residual_tol:
        raise FitWindowError(
            f"fit residual {residual:.3g} exceeds {residual_tol}; window overlaps the onset"
        )
    return OnsetReport(
        tau0=-1.0 / slope,
        fit_window=(tau_min, tau_max),
        fit_slope=float(slope),
        fit_residual=residual,
    )


def delta_curve(series: BuildupSeries) -> tuple[np.ndarray, np.ndarray, int]:
    """(tau, ln delta) with exact zeros dropped; returns the dropped count."""
    keep = series.delta > 0.0
    dropped = int(np.count_nonzero(~keep))
    return series.tau[keep], np.log(series.delta[keep]), dropped


def local_slopes(
    tau: np.ndarray, values: np.ndarray, *, window: float = 0.5
) -> np.ndarray:
    """Moving linear-fit slope of ``values`` vs tau with +-window/2 support."""
    slopes = np.full(tau.shape, np.nan)
    half = 0.5 * window
    lo = np.searchsorted(tau, tau - half, side="left")
    hi = np.searchsorted(tau, tau + half, side="right")
    for i in range(tau.size):
        a, b = lo[i], hi[i]
        if b - a >= 3:
            slopes[i] = np.polyfit(tau[a:b], values[a:b], 1)[0]
    return slopes


def detect_onset(
    series: BuildupSeries,
    *,
    window: float = 0.5,
    rel_deviation: float = 0.2,
    persistence: int = 3,
    fit_tau_min: float = 0.5,
    envelope_margin: float = 4.0,
) -> OnsetReport:
    """Crossover time out of the exponential regime, plus the window fits.

    The tau axis is cut into consecutive windows of the given width; the
    onset is the left edge of the first of ``persistence`` consecutive
    windows whose ln-delta slope deviates from -1/2 by more than
    ``rel_deviation`` (relative).  Requiring a persistent run keeps the
    oscillatory structure right at the crossover from triggering early.
    """
    tau_d, ln_delta, _ = delta_curve(series)
    if tau_d.size < 16:
        raise NoOnsetError("series too short for onset detection")
    start = max(fit_tau_min, float(tau_d[0]))
    edges = np.arange(start, float(tau_d[-1]) + window, window)
    flagged: list[bool] = []
    for a, b in zip(edges[:-1], edges[1:]):
        mask = (tau_d >= a) & (tau_d < b)
        if np.count_nonzero(mask) < 4:
            flagged.append(False)
            continue
        slope = np.polyfit(tau_d[mask], ln_delta[mask], 1)[0]
        flagged.append(abs(slope + 0.5) > rel_deviation * 0.5)

    tau_onset = None
    run = 0
    for i, bad in enumerate(flagged):
        run = run + 1 if bad else 0
        if run >= persistence:
            tau_onset = float(edges[i - persistence + 1])
            break
    if tau_onset is None:
        raise NoOnsetError("no onset in range")

    fit_tau_max = min(6.0, tau_onset - 1.0)
    base = fit_time_constant(series, tau_min=fit_tau_min, tau_max=fit_tau_max)

    exponent = None
    env_start = tau_onset + envelope_margin
    if series.tau[-1] >= 1.5 * env_start:
        mask = series.tau >= env_start
        # subtract the known exponential so the fit sees the power-law part
        # alone even where e^{-tau/2} has not fully died out yet
        residual = np.abs(1.0 - series.ratio_abs[mask] - np.exp(-0.5 * series.tau[mask]))
        try:
            exponent = fit_envelope_exponent(series.tau[mask], residual)
        except FitWindowError:
            exponent = None
    return OnsetReport(
        tau0=base.tau0,
        fit_window=base.fit_window,
        fit_slope=base.fit_slope,
        fit_residual=base.fit_residual,
        tau_onset=tau_onset,
        envelope_exponent=exponent,
    )


def fit_envelope_exponent(
    tau: np.ndarray, values: np.ndarray, *, n_blocks: int = 12, min_per_block: int = 24
) -> float:
    """Power-law exponent of the envelope of an oscillatory series.

    Block maxima over log-spaced tau blocks stand in for the envelope; the
    fit is ln(max |values|) vs ln(tau) at the block centers.
    """
    tau = np.asarray(tau, dtype=float)
    values = np.abs(np.asarray(values, dtype=float))
    if tau.size < n_blocks * min_per_block:
        raise FitWindowError("too few samples for an envelope fit")
    edges = np.geomspace(tau[0], tau[-1], n_blocks + 1)
    centers, maxima = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        mask = (tau >= a) & (tau <= b)
        if np.count_nonzero(mask) < min_per_block:
            continue
        m = values[mask].max()
        if m > 0.0:
            centers.append(math.sqrt(a * b))
            maxima.append(m)
    if len(centers) < 4:
        raise FitWindowError("too few populated blocks for an envelope fit")
    return float(np.polyfit(np.log(centers), np.log(maxima), 1)[0])
