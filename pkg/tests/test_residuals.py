"""Tests for manufactured q_bar constructions and their identity checks."""

import math

import numpy as np
import pytest

from hyperrelax._errors import InvalidParameterError, UnsupportedProfileError
from hyperrelax.grid import make_grid
from hyperrelax.models import build_model, exact_solution_of
from hyperrelax.residuals import (
    KINDS,
    SechProfile,
    TravelingWaveProfile,
    TrigMode,
    TrigSumProfile,
    check_derivative_oracle,
    construct_bar_q,
    reports_to_csv,
    sample_points,
    scaling_study,
    verify_identities,
    verify_kind,
)

FINE_TAUS = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)

CASES = [
    ("mixed", {}),
    ("odd_m", {"m": 3}),
    ("odd_m", {"m": 5}),
    ("odd_m", {"m": 3, "mu": 0.1}),
    ("even_m", {"m": 4}),
    ("even_m", {"m": 2}),
    ("kawahara", {}),
    ("ks", {}),
]


@pytest.mark.parametrize("kind,options", CASES)
def test_identities_hold_on_random_profiles(kind, options, rng):
    """Test every auxiliary equation vanishes and the residual matches tau R."""
    reports, _ = verify_kind(kind, rng, profiles=10, **options)
    assert len(reports) == 30
    for report in reports:
        assert report.passed, report.summary()
        roles = [check.role for check in report.checks]
        assert roles.count("residual") == (2 if kind == "mixed" else 1)


@pytest.mark.parametrize("kind,options", CASES)
def test_deviations_scale_linearly_in_tau(kind, options, rng):
    """Test |q_bar_j - lead_j| and |tau R| are O(tau)."""
    profile = TrigSumProfile.random(rng)
    t, x = sample_points(rng, 20)
    study = scaling_study(kind, profile, FINE_TAUS, t, x, **options)
    fitted = [slope for slope in study.slopes if slope is not None]
    assert fitted
    for slope in fitted:
        assert 0.95 <= slope <= 1.05
    assert study.residual_slope is not None
    assert 0.95 <= study.residual_slope <= 1.05


def test_mixed_component_for_single_wave():
    """Test q_bar_1 = (1 + tau) cos(x - t) for w = sin(x - t)."""
    profile = TrigSumProfile((TrigMode(1.0, 1, 1.0, 0.0),))
    t = np.array([0.0, 0.3, 1.1])
    x = np.array([0.5, 2.0, 4.0])
    for tau in (0.5, 0.01):
        bar = construct_bar_q("mixed", profile, tau)
        np.testing.assert_allclose(bar.evaluate(1, t, x), (1.0 + tau) * np.cos(x - t), rtol=1e-14)


def test_odd_m3_components():
    """Test q_bar_2 = w_xx - tau w_tx and q_bar_0 = w - tau w_tx + tau^2 w_tt."""
    profile = TrigSumProfile((TrigMode(0.7, 2, 0.4, 0.3), TrigMode(-0.2, 1, -0.9, 1.0)))
    t = np.array([0.2, 0.8])
    x = np.array([1.0, 5.5])
    tau = 0.1
    bar = construct_bar_q("odd_m", profile, tau, m=3)

    def d(a, b):
        return profile.derivative(a, b, t, x)

    np.testing.assert_allclose(bar.evaluate(2, t, x), d(0, 2) - tau * d(1, 1), atol=1e-14)
    np.testing.assert_allclose(
        bar.evaluate(0, t, x), d(0, 0) - tau * d(1, 1) + tau**2 * d(2, 0), atol=1e-14
    )
    np.testing.assert_allclose(bar.evaluate(1, t, x), d(0, 1), atol=1e-14)


def test_leads_are_tau_zero_construction(rng):
    """Test leads equal the components built at tau = 0."""
    profile = TrigSumProfile.random(rng)
    bar = construct_bar_q("kawahara", profile, 0.3)
    base = construct_bar_q("kawahara", profile, 0.0)
    assert [form.terms for form in bar.leads] == [form.terms for form in base.components]
    assert base.rows == ()
    assert all(base.deviation(j).is_zero for j in range(base.m))


def test_zero_profile_gives_exact_results(rng):
    """Test the zero profile has no residual and no fitted slopes."""
    profile = TrigSumProfile(())
    t, x = sample_points(rng, 5)
    report = verify_identities(construct_bar_q("ks", profile, 0.1), t, x)
    assert report.passed
    assert all(check.max_error == 0.0 for check in report.checks)
    study = scaling_study("ks", profile, FINE_TAUS, t, x)
    assert all(slope is None for slope in study.slopes)
    assert study.residual_slope is None


@pytest.mark.parametrize("kind", ["mixed", "odd_m"])
def test_jet_profiles_satisfy_identities(kind, rng):
    """Test sech profiles through Taylor jets."""
    profile = SechProfile(amplitude=0.8, width=1.5, speed=0.4, center=1.0)
    t, x = sample_points(rng, 20, x_range=(-5.0, 5.0))
    for tau in (1.0, 1e-3):
        assert verify_identities(construct_bar_q(kind, profile, tau), t, x).passed


def test_derivative_oracle_for_each_profile(rng):
    """Test exact partials against central differences."""
    grid = make_grid(-50.0, 50.0, 128)
    profiles = [
        TrigSumProfile.random(rng),
        SechProfile(amplitude=1.2, width=2.0, speed=0.5),
        TravelingWaveProfile(exact_solution_of(build_model("kawahara_limit", grid, order=3))),
    ]
    for profile in profiles:
        check = check_derivative_oracle(profile, rng)
        assert check.passed, (profile.kind, check.worst, check.max_relative_error)


def test_reports_to_csv(rng):
    """Test one CSV row per checked equation."""
    reports, _ = verify_kind("odd_m", rng, tau_list=(0.5,), profiles=1)
    lines = reports_to_csv(reports).strip().splitlines()
    assert lines[0] == "kind,tau,equation,role,max_residual,scale"
    assert len(lines) == 4
    assert lines[1].startswith("odd_m,0.5,0,residual,")


def test_kinds_are_registered():
    """Test the list of supported constructions."""
    assert KINDS == ("mixed", "odd_m", "even_m", "kawahara", "ks")


@pytest.mark.parametrize(
    "kind,tau,options,error",
    [
        ("mixed", -1.0, {}, InvalidParameterError),
        ("mixed", math.inf, {}, InvalidParameterError),
        ("odd_m", 0.1, {"m": 7}, UnsupportedProfileError),
        ("odd_m", 0.1, {"m": 4}, InvalidParameterError),
        ("even_m", 0.1, {"m": 4, "sigma0": -1}, InvalidParameterError),
        ("even_m", 0.1, {"m": 4, "mu": 0.2}, InvalidParameterError),
        ("ks", 0.1, {"m": 2}, InvalidParameterError),
        ("burgers", 0.1, {}, UnsupportedProfileError),
    ],
)
def test_invalid_constructions(kind, tau, options, error, rng):
    """Test bad kinds and parameters."""
    with pytest.raises(error):
        construct_bar_q(kind, TrigSumProfile.random(rng), tau, **options)


def test_kawahara_needs_primitives():
    """Test the Kawahara construction rejects profiles without x-primitives."""
    with pytest.raises(UnsupportedProfileError, match="trig_sum"):
        construct_bar_q("kawahara", SechProfile(), 0.1)


def test_identities_need_positive_tau(rng):
    """Test verification at tau = 0 is refused."""
    bar = construct_bar_q("mixed", TrigSumProfile.random(rng), 0.0)
    t, x = sample_points(rng, 3)
    with pytest.raises(InvalidParameterError, match="tau > 0"):
        verify_identities(bar, t, x)


def test_profile_validation():
    """Test wavenumbers and primitives of jet profiles."""
    with pytest.raises(UnsupportedProfileError, match="Wavenumbers"):
        TrigSumProfile((TrigMode(1.0, 0),))
    with pytest.raises(UnsupportedProfileError, match="x-primitives"):
        SechProfile().derivative(0, -1, np.zeros(2), np.zeros(2))


def test_verify_kind_needs_a_profile(rng):
    """Test profiles must be at least one."""
    with pytest.raises(InvalidParameterError):
        verify_kind("mixed", rng, profiles=0)
