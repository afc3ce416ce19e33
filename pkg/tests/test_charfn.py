import numpy as np
import pytest

from qcs.channel import ChannelParams
from qcs.charfn import RadialMoments, WeightConvention, angular_profile, char_at, radial_moments_at
from qcs.errors import QuadratureNotConverged
from qcs.quadrature import AngularProfile
from qcs.states import build_state, state_from_matrix, to_fock_matrix

POINTS = np.array([0.3 + 0.1j, -0.8 + 0.5j, 1.2 - 0.7j, 0.05j, 2.0 + 0.0j])


def _as_matrix_state(state):
    return state_from_matrix(np.asarray(to_fock_matrix(state).matrix.data))


def test_vacuum_characteristic_function():
    values = char_at(build_state("vacuum"), POINTS)
    np.testing.assert_allclose(values, np.exp(-np.abs(POINTS) ** 2 / 2), atol=1e-14)
    assert char_at(build_state("vacuum"), 0) == 1.0


def test_coherent_characteristic_function():
    alpha = 1.3 - 0.2j
    values = char_at(build_state("coherent:1.3,-0.2"), POINTS)
    expected = np.exp(POINTS * np.conj(alpha) - np.conj(POINTS) * alpha - np.abs(POINTS) ** 2 / 2)
    np.testing.assert_allclose(values, expected, atol=1e-12)


@pytest.mark.parametrize("source", ["fock:3", "cat:1.1", "even:3", "thermal:0.7", "coherent:0.6,0.4"])
def test_matrix_route_matches_analytic_form(source):
    state = build_state(source)
    np.testing.assert_allclose(char_at(_as_matrix_state(state), POINTS), char_at(state, POINTS), atol=1e-8)


def test_matrix_route_matches_rotated_displaced_gaussian():
    state = build_state({"family": "gaussian", "V": [[1.6, 0.4], [0.4, 1.1]], "mean": [0.5, -0.3]})
    np.testing.assert_allclose(char_at(_as_matrix_state(state), POINTS), char_at(state, POINTS), atol=1e-8)


def test_chi_is_hermitian_under_inversion():
    state = build_state("coherent:0.6,0.4")
    np.testing.assert_allclose(char_at(state, -POINTS), np.conj(char_at(state, POINTS)), atol=1e-14)


def test_angular_profiles():
    assert angular_profile(build_state("fock:2"))[0] is AngularProfile.ISOTROPIC
    assert angular_profile(build_state("cat:1.0"))[0] is AngularProfile.TRAPEZOID
    assert angular_profile(build_state("squeezed:1.2,0.4"))[0] is AngularProfile.ISOTROPIC


@pytest.mark.parametrize("source", ["fock:2", "squeezed:1.2,0.4", "coherent:0.6,0.4"])
def test_isotropic_profile_matches_ring_average(source):
    state = build_state(source)
    _, profile = angular_profile(state)
    r = np.array([0.4, 1.1])
    phases = 2 * np.pi * np.arange(512) / 512
    ring = np.abs(char_at(state, r[:, None] * np.exp(1j * phases)[None, :])) ** 2
    np.testing.assert_allclose(profile(r), 2 * np.pi * ring.mean(axis=1), rtol=1e-10)


def test_fock_moments_at_zero():
    moments = radial_moments_at(build_state("fock:5"))
    assert moments.qcs_squared == pytest.approx(11.0, abs=1e-6)
    assert moments.purity == pytest.approx(1.0, abs=1e-8)
    assert moments.kappa == pytest.approx(61 / 121, abs=1e-6)


def test_matrix_state_moments_match_analytic():
    state = build_state("cat:1.1")
    analytic = radial_moments_at(state)
    numeric = radial_moments_at(_as_matrix_state(state))
    assert numeric.qcs_squared == pytest.approx(analytic.qcs_squared, rel=1e-7)
    assert numeric.kappa == pytest.approx(analytic.kappa, rel=1e-6)


def test_conventions_agree_at_time_zero(warm_channel):
    state = build_state("fock:2")
    derived = radial_moments_at(state, warm_channel, 0.0)
    printed = radial_moments_at(state, warm_channel, 0.0, convention=WeightConvention.PRINTED)
    assert printed.i1 == derived.i1


def test_thermal_state_is_stationary():
    channel = ChannelParams(t_R=1.0, nbar_inf=0.5)
    moments = radial_moments_at(build_state("thermal:0.5"), channel, 0.3)
    assert moments.qcs_squared == pytest.approx(0.5, rel=1e-8)
    assert moments.purity == pytest.approx(0.5, rel=1e-8)


def test_positive_time_needs_channel():
    with pytest.raises(ValueError):
        radial_moments_at(build_state("fock:1"), None, 0.1)


def test_radial_moment_sanity_checks():
    with pytest.raises(QuadratureNotConverged):
        RadialMoments(t=0.0, i0=0.0, i1=1.0, i2=1.0)
    with pytest.raises(QuadratureNotConverged):
        RadialMoments(t=0.0, i0=1.0, i1=2.0, i2=1.0)
