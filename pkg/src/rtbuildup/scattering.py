"""Scattering states of a piecewise-constant profile via transfer matrices.

Amplitude convention: state vectors are (right-moving, left-moving)
coefficients.  On the left of the structure they multiply e^{+ikx}, e^{-ikx}
(edge at x = 0); on the right they multiply e^{+ik(x-L)}, e^{-ik(x-L)} (edge
at x = L).  With edge-referenced bases the transfer matrix of a concatenated
profile is the product (matrix of right part) @ (matrix of left part), and
the determinant is exactly 1.

Internally each segment is crossed with the (psi, psi') propagator

    [[cos(kappa w),        sin(kappa w)/kappa],
     [-kappa sin(kappa w), cos(kappa w)      ]]

whose entries are even in kappa, hence analytic in k everywhere except k = 0.
Pole searches can therefore continue t(k) into the fourth quadrant without
branch-cut bookkeeping; the principal square root used for kappa is
immaterial.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import numpy as np
from scipy.optimize import minimize_scalar

from .profile import PotentialProfile


class ZeroWavevectorError(ArithmeticError):
    """A local wavevector is exactly zero (E equal to a segment height).

    Measure-zero event; callers perturb k and retry.
    """


def _local_wavevectors(profile: PotentialProfile, k):
    """kappa_j = sqrt(k^2 - V_j / (hbar^2/2m)) for every segment.

    ``k`` may be a complex scalar or ndarray; the result has one leading
    axis per segment.
    """
    c2 = profile.constants.hbar2_over_2m
    k = np.asarray(k, dtype=complex)
    kappa = np.sqrt(k[np.newaxis, ...] ** 2 - (profile.heights / c2)[(...,) + (np.newaxis,) * k.ndim])
    if np.any(kappa == 0.0):
        raise ZeroWavevectorError("local wavevector is exactly zero; perturb k")
    return kappa


def _wave_matrix(profile: PotentialProfile, k):
    """Entries (w11, w12, w21, w22) of the (psi, psi') propagator across [0, L]."""
    kappa = _local_wavevectors(profile, k)
    shape = np.asarray(k, dtype=complex).shape
    w11 = np.ones(shape, dtype=complex)
    w12 = np.zeros(shape, dtype=complex)
    w21 = np.zeros(shape, dtype=complex)
    w22 = np.ones(shape, dtype=complex)
    for j, (width, _height) in enumerate(profile.segments):
        kj = kappa[j]
        c = np.cos(kj * width)
        s = np.sin(kj * width)
        p12 = s / kj
        p21 = -kj * s
        w11, w12, w21, w22 = (
            c * w11 + p12 * w21,
            c * w12 + p12 * w22,
            p21 * w11 + c * w21,
            p21 * w12 + c * w22,
        )
    return w11, w12, w21, w22


def _transfer_entries(profile: PotentialProfile, k):
    """Entries (m11, m12, m21, m22) of the amplitude transfer matrix.

    Vectorized over k.  t(k) = 1 / m22, r(k) = -m21 / m22.
    """
    if np.any(np.asarray(k) == 0):
        raise ZeroWavevectorError("transfer matrix undefined at k = 0")
    w11, w12, w21, w22 = _wave_matrix(profile, k)
    ik = 1j * np.asarray(k, dtype=complex)
    a = w11 + w22
    b = w11 - w22
    m11 = 0.5 * (a + ik * w12 + w21 / ik)
    m12 = 0.5 * (b - ik * w12 + w21 / ik)
    m21 = 0.5 * (b + ik * w12 - w21 / ik)
    m22 = 0.5 * (a - ik * w12 - w21 / ik)
    return m11, m12, m21, m22


@dataclass(frozen=True)
class TransferMatrix:
    """Amplitude transfer matrix at fixed (possibly complex) momentum k."""

    m11: complex
    m12: complex
    m21: complex
    m22: complex
    k: complex

    @property
    def determinant(self) -> complex:
        return self.m11 * self.m22 - self.m12 * self.m21

    @property
    def transmission_amplitude(self) -> complex:
        return 1.0 / self.m22

    @property
    def reflection_amplitude(self) -> complex:
        return -self.m21 / self.m22


def transfer_matrix(profile: PotentialProfile, k: complex) -> TransferMatrix:
    """Transfer matrix composed segment by segment; k must be nonzero."""
    m11, m12, m21, m22 = _transfer_entries(profile, complex(k))
    return TransferMatrix(complex(m11), complex(m12), complex(m21), complex(m22), complex(k))


class _PiecewiseWave:
    """Wave psi(x) on [0, L] from marching (psi, psi') across the segments.

    Shared evaluator for scattering states (real E) and resonant states
    (complex E); cheap closed-form propagation inside each segment.
    """

    def __init__(self, profile: PotentialProfile, k: complex, psi0: complex, dpsi0: complex):
        self.profile = profile
        self.k = complex(k)
        kappa = _local_wavevectors(profile, complex(k))
        self._kappa = kappa.ravel()
        values = [complex(psi0)]
        derivs = [complex(dpsi0)]
        for j, (width, _h) in enumerate(profile.segments):
            kj = self._kappa[j]
            c = np.cos(kj * width)
            s = np.sin(kj * width)
            v, d = values[-1], derivs[-1]
            values.append(c * v + s / kj * d)
            derivs.append(-kj * s * v + c * d)
        # entry j: (psi, psi') at the left edge of segment j; the final pair
        # is the value at x = L.
        self._values = np.asarray(values)
        self._derivs = np.asarray(derivs)

    @property
    def end_values(self) -> tuple[complex, complex]:
        return complex(self._values[-1]), complex(self._derivs[-1])

    def _segment_index(self, x):
        edges = self.profile.boundaries
        x = np.asarray(x, dtype=float)
        if np.any(x < edges[0]) or np.any(x > edges[-1]):
            raise ValueError(f"position outside [0, {edges[-1]}] A")
        return np.clip(np.searchsorted(edges, x, side="right") - 1, 0, len(self._kappa) - 1)

    def value(self, x):
        idx = self._segment_index(x)
        s = np.asarray(x, dtype=float) - self.profile.boundaries[idx]
        kj = self._kappa[idx]
        out = self._values[idx] * np.cos(kj * s) + self._derivs[idx] * np.sin(kj * s) / kj
        return complex(out) if out.ndim == 0 else out

    def derivative(self, x):
        idx = self._segment_index(x)
        s = np.asarray(x, dtype=float) - self.profile.boundaries[idx]
        kj = self._kappa[idx]
        out = -kj * np.sin(kj * s) * self._values[idx] + self._derivs[idx] * np.cos(kj * s)
        return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class StationaryState:
    """Scattering state at real energy, unit incidence from the left.

    Normalization: the incident wave is e^{ikx} for x < 0.
    """

    energy_ev: float
    k: float
    transmission_amplitude: complex
    reflection_amplitude: complex
    _wave: _PiecewiseWave = field(repr=False, compare=False)

    def phi(self, x):
        """phi(x, k) for x in [0, L]; accepts scalars or arrays."""
        return self._wave.value(x)

    def phi_derivative(self, x):
        return self._wave.derivative(x)


def stationary_state(profile: PotentialProfile, energy_ev: float) -> StationaryState:
    """Scattering solution at real E > 0."""
    if not energy_ev > 0.0:
        raise ValueError(f"energy must be positive, got {energy_ev}")
    k = profile.constants.wavevector(energy_ev)
    m = transfer_matrix(profile, k)
    t = m.transmission_amplitude
    r = m.reflection_amplitude
    wave = _PiecewiseWave(profile, k, 1.0 + r, 1j * k * (1.0 - r))
    return StationaryState(float(energy_ev), k, t, r, wave)


def stationary_wave(profile: PotentialProfile, energy_ev: float, x) -> complex:
    """phi(x, k) at real energy for 0 <= x <= L."""
    return stationary_state(profile, energy_ev).phi(x)


@dataclass(frozen=True)
class PeakSeed:
    """Transmission maximum used to seed the pole search."""

    energy_ev: float
    transmission: float
    gamma_estimate_ev: float


@dataclass(frozen=True)
class ScanResult:
    energies_ev: np.ndarray
    transmission: np.ndarray
    peaks: tuple[PeakSeed, ...]


def _transmission_grid(profile: PotentialProfile, energies_ev: np.ndarray) -> np.ndarray:
    c2 = profile.constants.hbar2_over_2m
    k = np.sqrt(energies_ev / c2)
    m22 = _transfer_entries(profile, k)[3]
    return 1.0 / np.abs(m22) ** 2


def transmission_scan(
    profile: PotentialProfile,
    e_min_ev: float,
    e_max_ev: float,
    n_points: int | None = None,
    *,
    points_per_decade: int = 2000,
    refine: bool = True,
) -> ScanResult:
    """|t(E)|^2 on a log-spaced grid plus refined local maxima.

    The default density (2000 points per decade) resolves widths down to a
    small fraction of a meV at typical resonance energies; each grid maximum
    is sharpened by golden-section search before being reported as a seed.
    """
    if not (0.0 < e_min_ev < e_max_ev):
        raise ValueError("need 0 < e_min < e_max")
    if n_points is None:
        decades = np.log10(e_max_ev / e_min_ev)
        n_points = max(64, int(np.ceil(decades * points_per_decade)) + 1)
    energies = np.logspace(np.log10(e_min_ev), np.log10(e_max_ev), n_points)
    # a grid point whose rounded wavevector lands exactly on a segment height
    # makes the local wavevector vanish; nudge off the measure-zero singularity
    c2 = profile.constants.hbar2_over_2m
    k2 = np.sqrt(energies / c2) ** 2
    for h in profile.heights:
        energies[k2 == h / c2] *= 1.0 - 1e-9
    t2 = _transmission_grid(profile, energies)

    def t2_at(e: float) -> float:
        return float(_transmission_grid(profile, np.asarray([e]))[0])

    peaks: list[PeakSeed] = []
    interior = np.flatnonzero((t2[1:-1] > t2[:-2]) & (t2[1:-1] > t2[2:])) + 1
    # prominence filter: rounding noise on flat transmission produces
    # strict maxima at the 1e-16 level; genuine peaks rise far above it
    interior = [
        i for i in interior
        if t2[i] - min(t2[i - 1], t2[i + 1]) > 1e-9 * t2[i]
    ]
    for i in interior:
        e_peak, t_peak = energies[i], t2[i]
        if refine:
            res = minimize_scalar(
                lambda e: -t2_at(e),
                bracket=(energies[i - 1], energies[i], energies[i + 1]),
                method="golden",
                options={"xtol": 1e-13},
            )
            e_peak, t_peak = float(res.x), float(-res.fun)
        peaks.append(
            PeakSeed(e_peak, t_peak, _estimate_width(profile, energies, t2, i, e_peak, t_peak))
        )
    return ScanResult(energies, t2, tuple(peaks))


def _estimate_width(profile, energies, t2, i, e_peak, t_peak) -> float:
    """FWHM estimate around grid index i; falls back to the local grid scale."""
    half = 0.5 * t_peak

    def cross(step: int) -> float | None:
        # walk outward until t2 drops below half, then bisect the bracket
        j = i
        while 0 < j + step < len(energies) - 1 and t2[j + step] > half:
            j += step
            if abs(j - i) > 4000:
                return None
        j2 = j + step
        if not (0 <= j2 < len(energies)) or t2[j2] > half:
            return None
        e_in, e_out = energies[j], energies[j2]
        for _ in range(80):
            mid = 0.5 * (e_in + e_out)
            tm = float(_transmission_grid(profile, np.asarray([mid]))[0])
            if tm > half:
                e_in = mid
            else:
                e_out = mid
            if abs(e_out - e_in) < 1e-12 * e_peak:
                break
        return 0.5 * (e_in + e_out)

    right = cross(+1)
    left = cross(-1)
    if left is not None and right is not None and right > left:
        return right - left
    return max(energies[min(i + 1, len(energies) - 1)] - energies[max(i - 1, 0)], 1e-9)
