import math

import numpy as np
import pytest
from pydantic import ValidationError

from qcs.channel import (
    ChannelParams,
    CurveMethod,
    evolve_exact,
    evolve_fock_oracle,
    evolve_gaussian,
    first_crossing,
    gaussian_curve,
    gaussian_half_lives,
    gaussian_purity_closed_form,
    gaussian_qcs_closed_form,
    halflife,
    ode_curve,
    oracle_curve,
    oracle_matrix,
    purity_rate,
    qcs_rate,
    validate_times,
)
from qcs.charfn import WeightConvention, radial_moments_at
from qcs.errors import CutoffTooSmall, InvalidSpec, RootNotBracketed
from qcs.metrics import qcs_gaussian
from qcs.states import FockDensityMatrix, build_state, to_fock_matrix
from qcs.tolerances import DEFAULT_TOLERANCES

SAMPLE_TIMES = [0.01, 0.05, 0.2, 1.0]
ORACLE_TOL = 5e-5


def test_channel_rates():
    channel = ChannelParams(t_R=2.0, nbar_inf=1.5)
    assert channel.gamma == pytest.approx(1.25)
    assert channel.delta == pytest.approx(0.75)
    assert channel.gamma - channel.delta == pytest.approx(1 / channel.t_R)
    assert channel.asymptotic_qcs_squared == pytest.approx(0.25)
    assert ChannelParams.from_rates(1.25, 0.75) == channel
    with pytest.raises(InvalidSpec):
        ChannelParams.from_rates(0.5, 0.75)
    with pytest.raises(ValidationError):
        ChannelParams(t_R=0.0)
    with pytest.raises(ValidationError):
        ChannelParams(nbar_inf=-1.0)


def test_validate_times():
    np.testing.assert_array_equal(validate_times([0, 0.5]), [0.0, 0.5])
    for bad in ([], [0.2, 0.1], [-0.1], [0.0, float("nan")]):
        with pytest.raises(InvalidSpec):
            validate_times(bad)


def test_gaussian_propagator_relaxes_to_thermal():
    channel = ChannelParams(t_R=1.0, nbar_inf=2.0, omega=0.7)
    state = build_state({"family": "gaussian", "V": [[3.0, 0.5], [0.5, 1.0]], "mean": [1.0, -2.0]})
    late = evolve_gaussian(state.moments, channel, 60.0)
    np.testing.assert_allclose(late.V, 5.0 * np.eye(2), atol=1e-12)
    np.testing.assert_allclose(late.mean, 0.0, atol=1e-12)
    assert evolve_gaussian(state.moments, channel, 0.0).V == pytest.approx(state.moments.V)


def test_rotation_preserves_qcs_and_purity():
    state = build_state({"family": "squeezed_thermal", "beta": 1.2, "r": 0.6})
    still = gaussian_curve(state.moments, ChannelParams(nbar_inf=0.5), [0.0, 0.2, 0.4])
    spinning = gaussian_curve(state.moments, ChannelParams(nbar_inf=0.5, omega=3.0), [0.0, 0.2, 0.4])
    np.testing.assert_allclose(spinning.C, still.C, rtol=1e-12)
    np.testing.assert_allclose(spinning.P, still.P, rtol=1e-12)


def test_exact_route_matches_gaussian_propagator(squeezed11, warm_channel):
    times = [0.0, 0.01, 0.03, 0.05, 0.1, 0.5]
    exact = evolve_exact(squeezed11, warm_channel, times)
    closed = gaussian_curve(squeezed11.moments, warm_channel, times)
    assert exact.method is CurveMethod.EXACT_INTEGRAL
    assert closed.method is CurveMethod.CLOSED_FORM_GAUSSIAN
    np.testing.assert_allclose(exact.C, closed.C, atol=1e-7)
    np.testing.assert_allclose(exact.P, closed.P, atol=1e-7)
    np.testing.assert_allclose(exact.kappa, closed.kappa, atol=1e-6)


def test_threaded_evolution_is_identical(fock5, warm_channel):
    times = np.linspace(0.0, 0.1, 6)
    serial = evolve_exact(fock5, warm_channel, times)
    threaded = evolve_exact(fock5, warm_channel, times, threads=4)
    assert serial.to_frame().equals(threaded.to_frame())


def test_qcs_rate_matches_finite_difference(fock5, even4, warm_channel):
    tolerances = DEFAULT_TOLERANCES.with_overrides(quad_tol=1e-10)
    h = 2e-4
    for state in (fock5, even4):
        for t in (0.02, 0.05):
            centre = radial_moments_at(state, warm_channel, t, tolerances)
            ahead = radial_moments_at(state, warm_channel, t + h, tolerances)
            behind = radial_moments_at(state, warm_channel, t - h, tolerances)
            slope = (math.sqrt(ahead.qcs_squared) - math.sqrt(behind.qcs_squared)) / (2 * h)
            expected = qcs_rate(math.sqrt(centre.qcs_squared), centre.kappa, warm_channel)
            assert slope == pytest.approx(expected, rel=1e-4)


@pytest.mark.parametrize("nbar", [0.0, 0.5])
@pytest.mark.parametrize("name", ["fock5", "cat11", "even4"])
def test_purity_rate_matches_finite_difference(name, nbar, request):
    state = request.getfixturevalue(name)
    channel = ChannelParams(nbar_inf=nbar)
    tolerances = DEFAULT_TOLERANCES.with_overrides(quad_tol=1e-10)
    h = 2e-4
    for t in (0.02, 0.05):
        centre = radial_moments_at(state, channel, t, tolerances)
        ahead = radial_moments_at(state, channel, t + h, tolerances)
        behind = radial_moments_at(state, channel, t - h, tolerances)
        slope = (ahead.purity - behind.purity) / (2 * h)
        expected = purity_rate(centre.qcs_squared, centre.purity, channel)
        assert slope == pytest.approx(expected, rel=1e-4)


@pytest.mark.parametrize("name", ["fock5", "cat11", "even4", "squeezed11"])
def test_qcs_decreases_towards_thermal_value(name, warm_channel, request):
    curve = evolve_exact(request.getfixturevalue(name), warm_channel, np.linspace(0.0, 1.0, 11))
    assert np.all(np.diff(curve.C) < 0)
    assert curve.C[-1] > math.sqrt(warm_channel.asymptotic_qcs_squared)


def test_purity_slope_at_start(warm_channel):
    assert purity_rate(11.0, 1.0, warm_channel) == pytest.approx(-32.0)
    h = 1e-6
    curve = ode_curve(math.sqrt(11), 1.0, warm_channel, [0.0, h])
    assert (curve.P[1] - curve.P[0]) / h == pytest.approx(-32.0, rel=1e-3)


@pytest.mark.parametrize("closed_form", [True, False])
def test_ode_fixed_point_at_zero_temperature(closed_form):
    times = np.linspace(0.0, 2.0, 5)
    curve = ode_curve(1.0, 1.0, ChannelParams(nbar_inf=0.0), times, closed_form=closed_form)
    np.testing.assert_allclose(curve.C, 1.0, rtol=1e-10)
    np.testing.assert_allclose(curve.P, 1.0, rtol=1e-10)


def test_ode_closed_form_matches_integration(warm_channel):
    times = np.linspace(0.0, 0.3, 7)
    closed = ode_curve(math.sqrt(11), 1.2, warm_channel, times)
    integrated = ode_curve(math.sqrt(11), 1.2, warm_channel, times, closed_form=False)
    np.testing.assert_allclose(closed.C, integrated.C, rtol=1e-8)
    np.testing.assert_allclose(closed.P, integrated.P, rtol=1e-8)
    assert closed.C[0] == pytest.approx(math.sqrt(11))


def test_ode_accepts_time_dependent_kappa(warm_channel):
    curve = ode_curve(2.0, lambda t: 1.0 + 0.1 * t, warm_channel, [0.0, 0.1, 0.2])
    np.testing.assert_allclose(curve.kappa, [1.0, 1.01, 1.02])
    assert np.all(np.diff(curve.C) < 0)
    with pytest.raises(InvalidSpec):
        ode_curve(0.0, 1.0, warm_channel, [0.0])


def test_gaussian_closed_forms_start_at_initial_values(warm_channel):
    assert gaussian_qcs_closed_form(3.0, 1.5, warm_channel, [0.0])[0] == pytest.approx(3.0)
    assert gaussian_purity_closed_form(3.0, 1.5, warm_channel, [0.0], P0=0.4)[0] == pytest.approx(0.4)
    late = gaussian_qcs_closed_form(3.0, 1.0, warm_channel, [40.0])[0]
    assert late ** 2 == pytest.approx(1 / 3, rel=1e-9)


def test_oracle_relaxes_vacuum_to_thermal():
    matrix = to_fock_matrix(build_state("vacuum"), 40).matrix
    relaxed = evolve_fock_oracle(matrix, ChannelParams(nbar_inf=1.0), 8.0, dt=0.01)
    n = np.arange(10)
    expected = 0.5 ** (n + 1)
    np.testing.assert_allclose(relaxed.populations[:10], expected, atol=1e-3)
    assert relaxed.trace == pytest.approx(1.0, abs=1e-12)


def test_oracle_follows_thermal_relaxation_law(warm_channel):
    matrix = oracle_matrix(build_state("thermal:3"))
    n = np.arange(matrix.dim)
    for t in (0.1, 0.5, 2.0):
        relaxed = evolve_fock_oracle(matrix, warm_channel, t)
        nbar = 1.0 + (3.0 - 1.0) * math.exp(-t)
        assert float(n @ relaxed.populations) == pytest.approx(nbar, abs=1e-6)
        thermal = nbar ** n[:30] / (1 + nbar) ** (n[:30] + 1)
        np.testing.assert_allclose(relaxed.populations[:30], thermal, atol=1e-6)


def test_oracle_needs_headroom():
    matrix = to_fock_matrix(build_state("fock:5"), 7).matrix
    with pytest.raises(CutoffTooSmall):
        evolve_fock_oracle(matrix, ChannelParams(nbar_inf=1.0), 0.1)


def test_oracle_matrix_adds_headroom():
    state = build_state("thermal:5")
    matrix = oracle_matrix(state)
    assert matrix.support(DEFAULT_TOLERANCES.leakage_tol) + 1 <= 0.8 * matrix.dim
    padded = oracle_matrix(build_state({"family": "fock_matrix", "matrix": {"real": [[0.0, 0.0], [0.0, 1.0]]}}))
    assert padded.dim >= 23


def test_oracle_keeps_coherences(warm_channel):
    state = build_state("cat:1.2")
    evolved = evolve_fock_oracle(oracle_matrix(state), warm_channel, 0.05)
    assert isinstance(evolved, FockDensityMatrix)
    assert abs(evolved.data[0, 2]) > 0.01
    assert evolved.trace == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("name", ["fock5", "cat11", "even4"])
def test_exact_route_matches_fock_oracle(name, warm_channel, request):
    state = request.getfixturevalue(name)
    exact = evolve_exact(state, warm_channel, SAMPLE_TIMES)
    oracle = oracle_curve(oracle_matrix(state), warm_channel, SAMPLE_TIMES)
    np.testing.assert_allclose(exact.C, oracle.C, atol=ORACLE_TOL)
    np.testing.assert_allclose(exact.P, oracle.P, atol=ORACLE_TOL)


@pytest.mark.slow
def test_squeezed_exact_route_matches_fock_oracle(squeezed11, warm_channel):
    exact = evolve_exact(squeezed11, warm_channel, SAMPLE_TIMES)
    oracle = oracle_curve(oracle_matrix(squeezed11), warm_channel, SAMPLE_TIMES, dt=5e-4)
    np.testing.assert_allclose(exact.C, oracle.C, atol=ORACLE_TOL)
    np.testing.assert_allclose(exact.P, oracle.P, atol=ORACLE_TOL)


def test_printed_weight_disagrees_with_oracle(fock5, warm_channel):
    oracle = oracle_curve(oracle_matrix(fock5), warm_channel, SAMPLE_TIMES)
    derived = evolve_exact(fock5, warm_channel, SAMPLE_TIMES)
    printed = evolve_exact(fock5, warm_channel, SAMPLE_TIMES, convention=WeightConvention.PRINTED)
    assert np.max(np.abs(derived.C - oracle.C)) <= ORACLE_TOL
    assert np.max(np.abs(printed.C - oracle.C)) > ORACLE_TOL


def test_first_crossing_scans_before_bisecting():
    # dips below 0.5 near t = 0.1 and recovers; a bracket at t_R alone would miss it
    def dip(t):
        return 1.0 - 0.8 * math.exp(-((t - 0.1) / 0.03) ** 2)

    crossing = first_crossing(dip, 0.5, 1.0, 1e-8)
    assert dip(crossing) == pytest.approx(0.5, abs=1e-6)
    assert crossing < 0.1
    with pytest.raises(RootNotBracketed):
        first_crossing(lambda t: 1.0, 0.5, 1.0, 1e-8)


# printed to two or three decimals, so exact values are compared within half a unit of 0.01
PRINTED_BAND = 0.005
HALF_LIFE_CASES = [
    # state, exact tau_C, approximate tau_C, exact tau_P, approximate tau_P
    ("fock5", 0.07, 0.064, 0.028, 0.016),
    ("cat11", 0.038, 0.032, 0.045, 0.016),
    ("even4", 0.033, 0.026, 0.067, 0.016),
]


@pytest.mark.parametrize("name, tau_c, tau_c_approx, tau_p, tau_p_approx", HALF_LIFE_CASES)
def test_half_lives(name, tau_c, tau_c_approx, tau_p, tau_p_approx, warm_channel, request):
    report = halflife(request.getfixturevalue(name), warm_channel)
    assert report.C0 == pytest.approx(math.sqrt(11), abs=1e-6)
    assert report.tau_C_exact == pytest.approx(tau_c, abs=PRINTED_BAND)
    assert report.tau_C_approx == pytest.approx(tau_c_approx, abs=0.001)
    assert report.tau_P_exact == pytest.approx(tau_p, abs=PRINTED_BAND)
    assert report.tau_P_approx == pytest.approx(tau_p_approx, abs=0.001)
    assert report.tau_1_exact > report.tau_C_exact
    assert "gaussian_variants" in report.not_applicable


def test_fock_half_life_approximations_are_exact_plugins(fock5, warm_channel):
    report = halflife(fock5, warm_channel)
    assert report.tau_C_exact == pytest.approx(0.07355, abs=3e-4)
    assert report.tau_C_approx == pytest.approx(1 / (33 * 61 / 121 - 1), rel=1e-6)
    assert report.tau_P_approx == pytest.approx(1 / 64, rel=1e-9)


def test_squeezed_half_lives(squeezed11, warm_channel):
    report = halflife(squeezed11, warm_channel)
    assert report.tau_C_exact == pytest.approx(0.047, abs=0.002)
    assert report.tau_C_gaussian_approx == pytest.approx(0.048, abs=0.001)
    assert report.tau_C_gaussian_approx == pytest.approx(0.04845, abs=1e-5)
    assert report.tau_P_exact == pytest.approx(0.050, abs=0.002)
    assert report.tau_P_gaussian_approx == pytest.approx(0.052, abs=0.001)
    assert report.tau_C_gaussian_log == pytest.approx(math.log1p(3 / (report.kappa0 * 33 - 4)), rel=1e-12)
    assert report.tau_P_gaussian_solved == pytest.approx(report.tau_P_exact, abs=0.002)
    assert report.tau_1_gaussian_log == pytest.approx(report.tau_1_exact, abs=0.002)
    assert report.tau_C_exact < report.tau_P_exact


@pytest.mark.parametrize("nbar", [0.5, 1.0])
@pytest.mark.parametrize("beta", [1.0, 1.5])
@pytest.mark.parametrize("c0_squared", [10.0, 20.0, 50.0, 200.0])
def test_gaussian_purity_half_life_trails_qcs_half_life(c0_squared, beta, nbar):
    state = build_state({"family": "squeezed_thermal", "beta": beta, "r": 0.5 * math.acosh(beta * c0_squared)})
    report = qcs_gaussian(state.moments)
    assert report.C_squared == pytest.approx(c0_squared, rel=1e-9)
    assert 2 - report.kappa < 1.01 / c0_squared ** 2
    channel = ChannelParams(nbar_inf=nbar)
    values, _ = gaussian_half_lives(report.C_squared, report.kappa, channel)
    tau_c, tau_p = values["tau_C_gaussian_approx"], values["tau_P_gaussian_approx"]
    load = (2 * nbar + 1) * report.C_squared
    assert tau_c < tau_p <= tau_c * (1 + 2 / (load - 4))
    assert tau_c <= 3 * tau_p
    assert values["tau_C_gaussian_log"] < values["tau_P_gaussian_solved"]


def test_gaussian_half_lives_flag_small_loads():
    values, skipped = gaussian_half_lives(1.0, 1.0, ChannelParams(nbar_inf=0.0))
    assert values == {}
    assert set(skipped) == {"tau_C_gaussian", "tau_P_gaussian", "tau_1_gaussian"}


def test_coherent_state_approximations_not_applicable():
    report = halflife(build_state("coherent:1.3,-0.2"), ChannelParams(nbar_inf=0.0))
    assert report.C0 == pytest.approx(1.0, abs=1e-6)
    assert report.tau_C_approx is None
    assert report.tau_C_exact is None
    assert report.tau_P_exact is None
    assert "tau_C_approx" in report.not_applicable
    assert "tau_C_exact" in report.not_applicable
