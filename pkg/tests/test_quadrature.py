import math

import numpy as np
import pytest

from qcs.errors import QuadratureNotConverged
from qcs.quadrature import AngularProfile, integrate_radial


def test_isotropic_gaussian():
    result = integrate_radial(lambda r: 2 * np.pi * np.exp(-r * r), 10.0)
    assert result.value[0] == pytest.approx(math.pi, rel=1e-10)
    assert result.angles == 1
    assert result.panels >= 16


def test_component_axis_is_integrated_on_shared_panels():
    def integrand(r):
        base = 2 * np.pi * np.exp(-r * r)
        return np.stack([base, r * r * base])

    result = integrate_radial(integrand, 10.0)
    np.testing.assert_allclose(result.value, [math.pi, math.pi], rtol=1e-10)
    assert result.error.shape == (2,)


def test_trapezoid_profile_handles_angular_dependence():
    # int e^{-r^2} (1 + r^2 cos^2 phi) d^2 xi = pi + pi / 2
    def integrand(points):
        return np.exp(-np.abs(points) ** 2) * (1 + points.real ** 2)

    result = integrate_radial(integrand, 10.0, AngularProfile.TRAPEZOID)
    assert result.value[0] == pytest.approx(1.5 * math.pi, rel=1e-9)
    assert result.angles >= 8


def test_result_does_not_depend_on_initial_panels():
    def integrand(r):
        return 2 * np.pi * np.exp(-r * r) * np.cos(3 * r) ** 2

    coarse = integrate_radial(integrand, 9.0, initial_panels=4)
    fine = integrate_radial(integrand, 9.0, initial_panels=64)
    assert coarse.value[0] == pytest.approx(fine.value[0], rel=1e-9)


def test_discontinuity_exhausts_refinement():
    with pytest.raises(QuadratureNotConverged):
        integrate_radial(lambda r: (r < 1.2345).astype(float), 3.0, tol=1e-13, max_level=2)


def test_invalid_radius():
    with pytest.raises(ValueError):
        integrate_radial(lambda r: r, 0.0)
