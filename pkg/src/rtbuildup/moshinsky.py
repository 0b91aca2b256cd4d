"""Faddeeva and Moshinsky functions over the full complex plane.

The transient kernel is the Moshinsky function M(y) = w(iy)/2 built from
the Faddeeva function w(z) = exp(-z^2) erfc(-iz).  The direct evaluation is
accurate for Re(y) >= 0 (i.e. iy in the upper half plane); elsewhere M is
obtained from the reflection

    M(y) = exp(y^2) - M(-y),

whose exponential can exceed the double range long before the physics does
(|y|^2 grows like R_n * tau).  All reflected values are therefore carried as
``ScaledComplex`` pairs  m * exp(s)  and only collapsed to plain complex on
request.

Momentum arguments follow

    y_q = -exp(-i pi/4) sqrt(m / 2 hbar) (hbar q / m) sqrt(t)

with q one of +-k, +-k_n, +-k_n*; on resonance the same arguments depend
only on the sharpness ratio R_n and the time in lifetime units.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import wofz

from .units import PhysicalConstants

EXP_MINUS_IPI4 = cmath.exp(-0.25j * cmath.pi)

_LOG_MAX = math.log(np.finfo(float).max)  # ~709.78
_SQRT_PI = math.sqrt(math.pi)


class MoshinskyOverflowError(OverflowError):
    """Unscaled output would exceed the floating-point range.

    The scaled representation (mantissa, exponent) is always available.
    """


class ScaledComplex(NamedTuple):
    """Complex number m * exp(s) with the magnitude carried in the exponent.

    The mantissa is kept at unit modulus (zero excepted) so sums and
    products never overflow for any representable exponent.
    """

    mantissa: complex
    log_scale: float

    @classmethod
    def from_complex(cls, value: complex) -> "ScaledComplex":
        value = complex(value)
        if value == 0:
            return cls(0j, 0.0)
        mag = abs(value)
        return cls(value / mag, math.log(mag))

    @classmethod
    def from_exponential(cls, exponent: complex) -> "ScaledComplex":
        """exp(exponent) without overflow."""
        exponent = complex(exponent)
        return cls(cmath.exp(1j * exponent.imag), exponent.real)

    def _rebalanced(self) -> "ScaledComplex":
        mag = abs(self.mantissa)
        if mag == 0.0:
            return ScaledComplex(0j, 0.0)
        return ScaledComplex(self.mantissa / mag, self.log_scale + math.log(mag))

    def __add__(self, other: "ScaledComplex") -> "ScaledComplex":
        a, b = self, other
        if a.mantissa == 0:
            return b
        if b.mantissa == 0:
            return a
        if b.log_scale > a.log_scale:
            a, b = b, a
        shift = b.log_scale - a.log_scale
        scale = math.exp(shift) if shift > -745.0 else 0.0
        return ScaledComplex(a.mantissa + b.mantissa * scale, a.log_scale)._rebalanced()

    def __sub__(self, other: "ScaledComplex") -> "ScaledComplex":
        return self + ScaledComplex(-other.mantissa, other.log_scale)

    def __mul__(self, other: "ScaledComplex") -> "ScaledComplex":
        return ScaledComplex(
            self.mantissa * other.mantissa, self.log_scale + other.log_scale
        )._rebalanced()

    def scaled_by(self, factor: complex) -> "ScaledComplex":
        return ScaledComplex(self.mantissa * factor, self.log_scale)._rebalanced()

    def conjugate(self) -> "ScaledComplex":
        return ScaledComplex(self.mantissa.conjugate(), self.log_scale)

    @property
    def log_abs(self) -> float:
        if self.mantissa == 0:
            return -math.inf
        return self.log_scale + math.log(abs(self.mantissa))

    def ratio_to(self, other: "ScaledComplex") -> complex:
        """self / other as a plain complex (other must be nonzero)."""
        if other.mantissa == 0:
            raise ZeroDivisionError("ratio to a zero ScaledComplex")
        shift = self.log_scale - other.log_scale
        if shift > _LOG_MAX:
            raise MoshinskyOverflowError("ratio exceeds the floating-point range")
        return self.mantissa / other.mantissa * math.exp(shift) if shift > -745.0 else 0j

    def to_complex(self) -> complex:
        """Plain complex value; raises when it cannot be represented."""
        if self.mantissa == 0:
            return 0j
        if self.log_abs > _LOG_MAX:
            raise MoshinskyOverflowError(
                f"value ~ exp({self.log_abs:.1f}) exceeds the floating-point range; "
                "use the scaled representation"
            )
        return self.mantissa * math.exp(self.log_scale)


def faddeeva_scaled(z: complex) -> ScaledComplex:
    """w(z) as a ScaledComplex, valid in both half planes."""
    z = complex(z)
    if z.imag >= 0.0:
        return ScaledComplex.from_complex(wofz(z))
    # w(z) = 2 exp(-z^2) - w(-z); -z lies in the accurate upper half plane
    return ScaledComplex.from_exponential(-z * z).scaled_by(2.0) - ScaledComplex.from_complex(
        wofz(-z)
    )


def faddeeva(z: complex, *, scaled: bool = False):
    """Faddeeva function w(z) = exp(-z^2) erfc(-iz).

    Relative accuracy is ~1e-14 in the upper half plane.  In the lower half
    plane the reflection formula applies; if the result overflows a double
    and ``scaled`` is false this raises ``MoshinskyOverflowError``.
    """
    value = faddeeva_scaled(z)
    return value if scaled else value.to_complex()


def _as_complex_argument(y) -> complex:
    return complex(y.y) if isinstance(y, MoshinskyArgument) else complex(y)


def moshinsky_m_scaled(y) -> ScaledComplex:
    """M(y) = w(iy)/2 as a ScaledComplex."""
    y = _as_complex_argument(y)
    if y.real >= 0.0:
        return ScaledComplex.from_complex(0.5 * wofz(1j * y))
    return moshinsky_reflect(y)


def moshinsky_m(y, *, scaled: bool = False):
    """Moshinsky function M(0, q; t) = w(iy_q)/2.

    Dispatches to the direct Faddeeva evaluation for Re(y) >= 0 and to the
    symmetry relation otherwise; propagates the overflow signal when an
    unscaled result cannot be represented.
    """
    value = moshinsky_m_scaled(y)
    return value if scaled else value.to_complex()


def moshinsky_reflect(y) -> ScaledComplex:
    """M(y) via the symmetry relation M(y) = exp(y^2) - M(-y).

    Always returns the scaled representation, so no overflow is possible.
    For Re(y) <= 0 the subtraction is well conditioned (the result carries
    the dominant magnitude) and happens after aligning both terms on a
    common exponent.  For Re(y) > 0 the relation has to be applied twice,
    exp(y^2) - [exp(y^2) - M_direct(y)], and the exponentials cancel
    algebraically; evaluating them numerically instead would erase the
    answer whenever exp(Re y^2) dwarfs it, so the collapsed form is used.
    """
    y = _as_complex_argument(y)
    if (-y).real >= 0.0:
        m_neg = ScaledComplex.from_complex(0.5 * wofz(-1j * y))
        return ScaledComplex.from_exponential(y * y) - m_neg
    return ScaledComplex.from_complex(0.5 * wofz(1j * y))


def _moshinsky_m_grid(y: np.ndarray) -> np.ndarray:
    """Vectorized M(y) for plain-complex-safe inputs.

    Used on time grids where Re(y^2) stays well inside the double range
    (on-resonance kernels have Re(y^2) <= 0); raises the overflow signal
    otherwise instead of returning infinities.
    """
    y = np.asarray(y, dtype=complex)
    out = np.empty_like(y)
    direct = y.real >= 0.0
    out[direct] = 0.5 * wofz(1j * y[direct])
    if np.any(~direct):
        yy = y[~direct] ** 2
        if np.max(yy.real) > _LOG_MAX - 5.0:
            raise MoshinskyOverflowError("exp(y^2) overflows; use the scalar scaled API")
        out[~direct] = np.exp(yy) - 0.5 * wofz(-1j * y[~direct])
    return out


_ASYMPTOTIC_COEFFS_CACHE: list[float] = []


def _asymptotic_coefficients(n: int) -> list[float]:
    """Coefficients a_1..a_n of M(y) ~ a_1/y + a_2/y^2 + ...

    Derived from the large-z expansion w(z) ~ (i/sqrt(pi)) sum_j
    (2j-1)!! / (2 z^2)^j / z evaluated at z = iy: even-order coefficients
    vanish and a_{2j+1} = (-1)^j (2j-1)!! / (2^{j+1} sqrt(pi)).
    """
    coeffs = _ASYMPTOTIC_COEFFS_CACHE
    if not coeffs:
        coeffs.append(1.0 / (2.0 * _SQRT_PI))  # a_1
    while len(coeffs) < n:
        if len(coeffs) % 2 == 1:
            coeffs.append(0.0)  # even order
        else:
            j = len(coeffs) // 2  # producing a_{2j+1}
            coeffs.append(coeffs[-2] * (-(2 * j - 1) / 2.0))
    return coeffs[:n]


def moshinsky_asymptotic(y, n_terms: int = 3, *, min_abs: float = 8.0) -> tuple[complex, float]:
    """Partial sum of the large-argument expansion plus a truncation bound.

    Valid for -pi/2 < arg(y) < pi/2 and |y| above ``min_abs``; the error
    estimate is the magnitude of the first omitted nonzero term.
    """
    y = _as_complex_argument(y)
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    phase = cmath.phase(y)
    if not (-0.5 * math.pi < phase < 0.5 * math.pi):
        raise ValueError(f"arg(y) = {phase:.3f} outside the validity sector (-pi/2, pi/2)")
    if abs(y) < min_abs:
        raise ValueError(f"|y| = {abs(y):.3f} below the asymptotic threshold {min_abs}")
    n_bound = n_terms + 1 if (n_terms + 1) % 2 == 1 else n_terms + 2
    coeffs = _asymptotic_coefficients(n_bound)
    inv = 1.0 / y
    value = 0j
    power = 1.0 + 0j
    for a in coeffs[:n_terms]:
        power *= inv
        value += a * power
    bound = abs(coeffs[n_bound - 1]) * abs(inv) ** n_bound
    return value, bound


@dataclass(frozen=True)
class MoshinskyArgument:
    """Dimensionless argument y_q of M(0, q; t)."""

    y: complex

    @classmethod
    def from_momentum(
        cls, q: complex, t_fs: float, constants: PhysicalConstants
    ) -> "MoshinskyArgument":
        """Physical construction from a (complex) momentum and a time."""
        if t_fs < 0.0:
            raise ValueError("time must be non-negative")
        root = math.sqrt(constants.hbar2_over_2m * t_fs / constants.hbar)
        return cls(-EXP_MINUS_IPI4 * complex(q) * root)

    @classmethod
    def from_lifetime_units(cls, r_ratio: float, tau: float, kind: str) -> "MoshinskyArgument":
        """On-resonance construction from the sharpness ratio and tau.

        ``kind`` selects q: '+k', '-k', '+k_n', '-k_n', '+k_n*', '-k_n*'.
        """
        if tau < 0.0:
            raise ValueError("tau must be non-negative")
        shifts = {"k": 0.0, "k_n": -0.5j, "k_n*": 0.5j}
        if len(kind) < 2 or kind[0] not in "+-" or kind[1:] not in shifts:
            raise ValueError(f"unknown argument kind {kind!r}")
        sign = -1.0 if kind[0] == "+" else 1.0
        return cls(sign * EXP_MINUS_IPI4 * cmath.sqrt((r_ratio + shifts[kind[1:]]) * tau))
