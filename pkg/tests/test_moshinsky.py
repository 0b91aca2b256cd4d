import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rtbuildup import (
    MoshinskyArgument,
    MoshinskyOverflowError,
    PhysicalConstants,
    ScaledComplex,
    faddeeva,
    faddeeva_scaled,
    moshinsky_asymptotic,
    moshinsky_m,
    moshinsky_m_scaled,
    moshinsky_reflect,
)
from rtbuildup.moshinsky import _moshinsky_m_grid

mp.mp.dps = 35


def faddeeva_reference(z: complex) -> complex:
    """High-precision w(z) = exp(-z^2) erfc(-iz) via mpmath (independent oracle)."""
    zm = mp.mpc(z.real, z.imag)
    return complex(mp.e ** (-(zm**2)) * mp.erfc(-1j * zm))


def identity_residual(y: complex) -> float:
    """|M(y) + M(-y) - exp(y^2)| relative to the largest participating term.

    Normalizing by exp(y^2) alone is unattainable in fixed precision where
    Re(y^2) is strongly negative (the two M values would have to cancel to
    hundreds of digits), so the residual is measured against the dominant
    magnitude, the forward-stable form of the identity.
    """
    m_pos = moshinsky_m_scaled(y)
    m_neg = moshinsky_m_scaled(-y)
    rhs = ScaledComplex.from_exponential(y * y)
    diff = (m_pos + m_neg) - rhs
    largest = max(m_pos.log_abs, m_neg.log_abs, rhs.log_abs)
    return math.exp(diff.log_abs - largest) if diff.log_abs > -math.inf else 0.0


# ---------------------------------------------------------------- faddeeva

def test_faddeeva_at_zero():
    assert faddeeva(0.0) == pytest.approx(1.0)


def test_faddeeva_at_i_matches_erfc_oracle():
    # w(i) = e * erfc(1); frozen from mpmath at 40 digits
    assert faddeeva(1j) == pytest.approx(0.42758357615580700441, rel=1e-14)


@pytest.mark.parametrize(
    "z,expected",
    [
        (0.5 + 0.5j, 0.533156707912174914 + 0.230488231384458409j),
        (3.0 + 0.0j, 0.000123409804086679549 + 0.201157317037600387j),
        (2.0 + 1.0j, 0.140239581366277944 + 0.222213440179899103j),
    ],
)
def test_faddeeva_frozen_values(z, expected):
    assert faddeeva(z) == pytest.approx(expected, rel=1e-13)


def test_faddeeva_real_axis_identity():
    # Re w(x) = exp(-x^2) exactly on the real axis
    for x in (0.3, 1.0, 2.5, 5.0):
        assert faddeeva(x).real == pytest.approx(math.exp(-x * x), rel=1e-12)


def test_faddeeva_upper_half_plane_accuracy_batch():
    rng = np.random.default_rng(20240811)
    r = 10.0 ** rng.uniform(-3, 2, 300)
    th = rng.uniform(0.0, np.pi, 300)
    zs = r * np.cos(th) + 1j * r * np.sin(th)
    for z in zs:
        ref = faddeeva_reference(complex(z))
        assert abs(faddeeva(complex(z)) - ref) <= 1e-13 * abs(ref)


def test_faddeeva_lower_half_plane_against_oracle():
    for z in (0.5 - 0.8j, 2.0 - 1.0j, -1.5 - 2.5j, 0.1 - 5.0j):
        ref = faddeeva_reference(z)
        assert faddeeva(z) == pytest.approx(ref, rel=1e-11)


def test_faddeeva_overflow_signal_and_scaled_escape():
    z = 1.0 - 30.0j  # exp(-z^2) ~ exp(899)
    with pytest.raises(MoshinskyOverflowError):
        faddeeva(z)
    scaled = faddeeva(z, scaled=True)
    zm = mp.mpc(z.real, z.imag)
    ref_log = mp.log(abs(mp.e ** (-(zm**2)) * mp.erfc(-1j * zm)))
    assert scaled.log_abs == pytest.approx(float(ref_log), rel=1e-12)


# ---------------------------------------------------------------- moshinsky_m

def test_m_at_zero_is_half():
    assert moshinsky_m(0.0) == pytest.approx(0.5)


def test_m_matches_direct_definition_both_half_planes():
    for y in (1.2 + 0.3j, -0.7 + 0.2j, -2.0 - 1.0j, 3.0 - 0.5j):
        ref = 0.5 * faddeeva_reference(1j * y)
        assert moshinsky_m(y) == pytest.approx(ref, rel=1e-11)


def test_m_accepts_argument_wrapper():
    arg = MoshinskyArgument(0.5 + 0.25j)
    assert moshinsky_m(arg) == moshinsky_m(0.5 + 0.25j)


def test_symmetry_identity_on_log_grid():
    worst = 0.0
    for r in np.geomspace(1e-3, 30.0, 31):
        for phase in np.arange(16) / 16.0 * 2.0 * np.pi:
            worst = max(worst, identity_residual(r * cmath.exp(1j * phase)))
    assert worst < 1e-11


@settings(max_examples=80, deadline=None)
@given(
    r=st.floats(min_value=1e-3, max_value=25.0),
    phase=st.floats(min_value=0.0, max_value=2.0 * math.pi),
)
def test_symmetry_identity_property(r, phase):
    assert identity_residual(r * cmath.exp(1j * phase)) < 1e-11


def test_reflect_at_zero():
    assert moshinsky_reflect(0.0).to_complex() == pytest.approx(0.5)


def test_reflect_dominated_by_exponential_where_it_grows():
    # exp(y^2) dominates where Re(y) < 0 and Re(y^2) is large positive
    y = -20.0
    val = moshinsky_reflect(y)
    assert val.log_abs == pytest.approx(y * y, abs=1e-3)
    # on the opposite ray the reflection collapses to the direct value
    direct = moshinsky_m(20.0)
    assert moshinsky_reflect(20.0).to_complex() == pytest.approx(direct, rel=1e-13)


def test_reflect_consistent_with_direct_for_moderate_arguments():
    rng = np.random.default_rng(7)
    for _ in range(200):
        y = complex(rng.uniform(-5, 5), rng.uniform(-5, 5))
        direct = moshinsky_m(y)
        assert moshinsky_reflect(y).to_complex() == pytest.approx(direct, rel=1e-11, abs=1e-300)


def test_grid_evaluator_matches_scalar():
    ys = np.asarray([0.5 + 0.1j, -0.5 + 0.1j, 2.0 - 3.0j, -2.0 - 3.0j, 10.0 + 0.0j])
    grid = _moshinsky_m_grid(ys)
    for y, g in zip(ys, grid):
        assert g == pytest.approx(moshinsky_m(complex(y)), rel=1e-13)


def test_grid_evaluator_overflow_guard():
    with pytest.raises(MoshinskyOverflowError):
        _moshinsky_m_grid(np.asarray([-40.0 + 0.0j]))


# ---------------------------------------------------------------- asymptotics

def test_asymptotic_leading_term_large_real_argument():
    y = 50.0
    approx, _ = moshinsky_asymptotic(y, 1)
    assert approx == pytest.approx(1.0 / (2.0 * math.sqrt(math.pi) * y), rel=1e-12)
    assert moshinsky_m(y) == pytest.approx(approx, rel=5e-4)


def test_asymptotic_within_truncation_bound():
    # the bound is asymptotically sharp, so allow it a 5% slack
    cases = [(20.0, -math.pi / 8, 3), (8.5, 0.2, 3), (12.0, 0.0, 5), (60.0, -1.0, 4), (9.0, 1.2, 2)]
    for r, phase, n in cases:
        y = r * cmath.exp(1j * phase)
        approx, bound = moshinsky_asymptotic(y, n)
        err = abs(approx - moshinsky_m(y))
        assert err <= 1.05 * bound + 1e-15 * abs(moshinsky_m(y))


def test_asymptotic_bound_shrinks_with_more_terms():
    y = 15.0 * cmath.exp(-0.3j)
    errs = [abs(moshinsky_asymptotic(y, n)[0] - moshinsky_m(y)) for n in (1, 3, 5)]
    assert errs[0] > errs[1] > errs[2]


def test_asymptotic_rejects_outside_sector():
    with pytest.raises(ValueError):
        moshinsky_asymptotic(10.0 * cmath.exp(0.75j * math.pi), 3)
    with pytest.raises(ValueError):
        moshinsky_asymptotic(-12.0, 3)


def test_asymptotic_rejects_small_modulus():
    with pytest.raises(ValueError):
        moshinsky_asymptotic(2.0, 3)


def test_on_resonance_argument_asymptotics_match_direct():
    # left-moving argument at R tau = 100 sits in the validity sector
    arg = MoshinskyArgument.from_lifetime_units(10.0, 10.0, "-k")
    approx, bound = moshinsky_asymptotic(arg, 3)
    assert abs(approx - moshinsky_m(arg)) <= 1.05 * bound


def test_decay_of_reflected_kernels_with_time():
    # the three kernels entering the long-time remainder all fade out
    r_ratio = 315.0
    taus = [5.0, 20.0, 80.0, 320.0]
    for kind in ("-k", "-k_n", "-k_n*"):
        mags = [
            abs(moshinsky_m(MoshinskyArgument.from_lifetime_units(r_ratio, tau, kind)))
            for tau in taus
        ]
        assert all(a > b for a, b in zip(mags, mags[1:]))
        assert mags[-1] < 0.01


# ---------------------------------------------------------------- arguments

def test_argument_routes_agree_on_resonance():
    constants = PhysicalConstants(electron_mass_factor=0.067)
    r_ratio, eps_ev = 312.9, 0.0378539
    gamma_ev = eps_ev / r_ratio
    lifetime = constants.hbar / gamma_ev
    k = constants.wavevector(eps_ev)
    k_n = constants.complex_wavevector(complex(eps_ev, -0.5 * gamma_ev))
    for tau in (0.05, 1.0, 12.0, 60.0):
        t_fs = tau * lifetime
        pairs = [
            ("+k", k), ("-k", -k),
            ("+k_n", k_n), ("-k_n", -k_n),
            ("+k_n*", k_n.conjugate()), ("-k_n*", -k_n.conjugate()),
        ]
        for kind, q in pairs:
            physical = MoshinskyArgument.from_momentum(q, t_fs, constants).y
            rescaled = MoshinskyArgument.from_lifetime_units(r_ratio, tau, kind).y
            assert abs(physical - rescaled) <= 1e-12 * abs(physical)


@settings(max_examples=60, deadline=None)
@given(
    r_ratio=st.floats(min_value=5.0, max_value=500.0),
    tau=st.floats(min_value=1e-3, max_value=80.0),
)
def test_argument_routes_agree_property(r_ratio, tau):
    constants = PhysicalConstants(electron_mass_factor=0.067)
    eps_ev = 0.05
    gamma_ev = eps_ev / r_ratio
    k_n = constants.complex_wavevector(complex(eps_ev, -0.5 * gamma_ev))
    t_fs = tau * constants.hbar / gamma_ev
    physical = MoshinskyArgument.from_momentum(k_n, t_fs, constants).y
    rescaled = MoshinskyArgument.from_lifetime_units(r_ratio, tau, "+k_n").y
    assert abs(physical - rescaled) <= 1e-12 * abs(physical)


def test_argument_rejects_unknown_kind():
    with pytest.raises(ValueError):
        MoshinskyArgument.from_lifetime_units(10.0, 1.0, "k")
    with pytest.raises(ValueError):
        MoshinskyArgument.from_lifetime_units(10.0, 1.0, "+q")


def test_argument_rejects_negative_time():
    constants = PhysicalConstants()
    with pytest.raises(ValueError):
        MoshinskyArgument.from_momentum(0.02, -1.0, constants)
    with pytest.raises(ValueError):
        MoshinskyArgument.from_lifetime_units(10.0, -0.5, "+k")


# ---------------------------------------------------------------- scaled type

def test_scaled_roundtrip_and_arithmetic():
    a = ScaledComplex.from_complex(3.0 + 4.0j)
    assert a.to_complex() == pytest.approx(3.0 + 4.0j, rel=1e-15)
    b = ScaledComplex.from_exponential(800.0 + 1.0j)
    product = a * b
    assert product.log_abs == pytest.approx(math.log(5.0) + 800.0, rel=1e-12)
    with pytest.raises(MoshinskyOverflowError):
        product.to_complex()


def test_scaled_addition_across_scales():
    big = ScaledComplex.from_exponential(100.0)
    small = ScaledComplex.from_complex(1.0)
    total = big + small
    # adding a unit to exp(100) moves the log by exp(-100)
    assert total.log_abs == pytest.approx(100.0 + math.exp(-100.0), abs=1e-12)
    tiny = ScaledComplex.from_exponential(-900.0)
    assert (big + tiny).log_abs == pytest.approx(100.0, abs=1e-12)  # swamped cleanly


def test_scaled_subtraction_cancellation():
    a = ScaledComplex.from_complex(1.0 + 1e-9)
    b = ScaledComplex.from_complex(1.0)
    assert (a - b).to_complex() == pytest.approx(1e-9, rel=1e-6)


def test_scaled_zero_handling():
    zero = ScaledComplex.from_complex(0.0)
    one = ScaledComplex.from_complex(1.0)
    assert zero.log_abs == -math.inf
    assert (zero + one).to_complex() == 1.0
    assert (one - one).to_complex() == 0.0
    assert zero.to_complex() == 0.0


def test_scaled_ratio():
    a = ScaledComplex.from_exponential(500.0)
    b = ScaledComplex.from_exponential(499.0)
    assert a.ratio_to(b) == pytest.approx(math.e, rel=1e-12)
