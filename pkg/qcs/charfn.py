"""Characteristic functions and their radial moment integrals.

chi(xi) = Tr rho D(xi) with D(xi) = exp(xi a^dagger - conj(xi) a).  Under the
thermal channel the moments

    I_k(t) = int |xi|^{2k} |chi(xi; t)|^2 d^2 xi
           = e^{(k+1) t/t_R} int |y|^{2k} e^{-(2 nbar + 1)(e^{t/t_R} - 1)|y|^2} |chi(y)|^2 d^2 y

only need the initial chi, so every time point is one polar quadrature.
"""

import logging
import math
import time
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Callable, Optional, Tuple, Union

import numpy as np
from scipy.special import eval_laguerre, i0e

from infra.logging import get_event_logger
from qcs.errors import QuadratureNotConverged
from qcs.quadrature import AngularProfile, RadialIntegral, integrate_radial
from qcs.special import superdiagonal_series
from qcs.states import State
from qcs.tolerances import DEFAULT_TOLERANCES, Tolerances

if TYPE_CHECKING:
    from qcs.channel import ChannelParams

logger = logging.getLogger(__name__)
event_logger = get_event_logger()

# exponent of the envelope at the truncation radius
ENVELOPE_EXPONENT = 50.0


class WeightConvention(str, Enum):
    """Exponent factor in the time-dependent moment weight.

    DERIVED uses (2 nbar + 1) for every moment.  PRINTED uses 2 nbar for the
    k >= 1 moments; it exists so the two can be compared against the Fock
    oracle and is not meant for production runs.
    """

    DERIVED = "derived"
    PRINTED = "printed"


@dataclass(frozen=True)
class RadialMoments:
    """Unnormalized moments I_k = int |xi|^{2k} |chi(xi; t)|^2 d^2 xi."""

    t: float
    i0: float
    i1: float
    i2: float
    error: float = 0.0
    panels: int = 0
    angles: int = 1

    def __post_init__(self):
        if not self.i0 > 0:
            raise QuadratureNotConverged(f"Norm integral I0 = {self.i0} is not positive")
        if self.i1 * self.i1 > self.i0 * self.i2 * (1 + 1e-9):
            raise QuadratureNotConverged(
                f"Moments violate Cauchy-Schwarz: I1^2 = {self.i1 ** 2:.6g} > I0 I2 = {self.i0 * self.i2:.6g}"
            )

    @property
    def qcs_squared(self) -> float:
        return self.i1 / self.i0

    @property
    def purity(self) -> float:
        return self.i0 / math.pi

    @property
    def kappa(self) -> float:
        return self.i2 * self.i0 / (self.i1 * self.i1) - 1.0


PhasePoint = Union[complex, np.ndarray]


def char_at(state: State, xi: PhasePoint) -> Union[complex, np.ndarray]:
    """chi(xi) for complex xi (scalar or array)."""
    points = np.asarray(xi, dtype=complex)
    x = np.abs(points) ** 2
    family = state.family
    spec = state.spec

    if family == "fock":
        values = np.exp(-0.5 * x) * eval_laguerre(spec.n, x)
    elif family == "even_mixture":
        total = sum(eval_laguerre(2 * k, x) for k in range(1, spec.M + 1))
        values = np.exp(-0.5 * x) * total / spec.M
    elif family == "cat":
        alpha = state.alpha
        norm = 2 * (1 + math.exp(-2 * abs(alpha) ** 2))
        cross = points * np.conj(alpha) - np.conj(points) * alpha
        values = (
            np.exp(-0.5 * x) * 2 * np.cos(cross.imag)
            + np.exp(-0.5 * np.abs(2 * alpha + points) ** 2)
            + np.exp(-0.5 * np.abs(2 * alpha - points) ** 2)
        ) / norm
    elif state.moments is not None:
        cov, (mu_x, mu_p) = state.moments.V, state.moments.mean
        xi1, xi2 = points.real, points.imag
        quadratic = xi1 * xi1 * cov[1, 1] - 2 * xi1 * xi2 * cov[0, 1] + xi2 * xi2 * cov[0, 0]
        values = np.exp(-0.5 * quadratic + 1j * math.sqrt(2) * (xi2 * mu_x - xi1 * mu_p))
    else:
        values = _matrix_char(state.matrix.data, points)

    values = np.asarray(values, dtype=complex)
    if state.matrix is None:
        values = np.where(points == 0, 1.0 + 0j, values)
    if values.ndim == 0:
        return complex(values)
    return values


def _matrix_char(rho: np.ndarray, points: np.ndarray) -> np.ndarray:
    radius = np.abs(points)
    phase = np.angle(points)
    values = np.zeros(points.shape, dtype=complex)
    for k, c_k in enumerate(superdiagonal_series(rho, radius)):
        if k == 0:
            values = values + c_k
        else:
            values = values + c_k * np.exp(1j * k * phase) + (-1) ** k * np.conj(c_k) * np.exp(-1j * k * phase)
    return values


def angular_profile(state: State) -> Tuple[AngularProfile, Callable[[np.ndarray], np.ndarray]]:
    """Integrand of the angular direction for |chi|^2.

    Rotation-symmetric or Gaussian |chi|^2 gets the closed-form circle
    integral g(r) = int |chi(r e^{i phi})|^2 d phi; matrix states use the
    Parseval sum over number-basis diagonals; cat states fall back to the
    trapezoid rule on complex points.
    """
    family = state.family
    spec = state.spec
    two_pi = 2 * np.pi

    if family == "fock":
        return AngularProfile.ISOTROPIC, lambda r: two_pi * np.exp(-r * r) * eval_laguerre(spec.n, r * r) ** 2
    if family == "even_mixture":
        def even_profile(r: np.ndarray) -> np.ndarray:
            x = r * r
            mean = sum(eval_laguerre(2 * k, x) for k in range(1, spec.M + 1)) / spec.M
            return two_pi * np.exp(-x) * mean * mean
        return AngularProfile.ISOTROPIC, even_profile
    if family == "thermal":
        return AngularProfile.ISOTROPIC, lambda r: two_pi * np.exp(-(1 + 2 * spec.nbar) * r * r)
    if family == "coherent":
        return AngularProfile.ISOTROPIC, lambda r: two_pi * np.exp(-r * r)
    if family == "cat":
        return AngularProfile.TRAPEZOID, lambda points: np.abs(char_at(state, points)) ** 2
    if state.moments is not None:
        low, high = state.moments.eigenvalues

        def gaussian_profile(r: np.ndarray) -> np.ndarray:
            x = r * r
            return two_pi * np.exp(-low * x) * i0e(0.5 * (high - low) * x)
        return AngularProfile.ISOTROPIC, gaussian_profile

    rho = state.matrix.data

    def matrix_profile(r: np.ndarray) -> np.ndarray:
        total = np.zeros(np.shape(r))
        for k, c_k in enumerate(superdiagonal_series(rho, r)):
            total = total + (1 if k == 0 else 2) * np.abs(c_k) ** 2
        return two_pi * total
    return AngularProfile.ISOTROPIC, matrix_profile


def radial_extent(state: State) -> Tuple[float, float]:
    """(decay rate a, radius R0) with |chi(r)|^2 below ~e^{-50} beyond R0 at t = 0."""
    family = state.family
    spec = state.spec
    if family == "fock":
        return 1.0, math.sqrt(ENVELOPE_EXPONENT + 8 * (spec.n + 1))
    if family == "even_mixture":
        return 1.0, math.sqrt(ENVELOPE_EXPONENT + 8 * (2 * spec.M + 1))
    if family == "cat":
        return 1.0, 2 * abs(state.alpha) + math.sqrt(ENVELOPE_EXPONENT)
    if family == "thermal":
        rate = 1 + 2 * spec.nbar
        return rate, math.sqrt(ENVELOPE_EXPONENT / rate)
    if state.moments is not None:
        low, _ = state.moments.eigenvalues
        return low, math.sqrt(ENVELOPE_EXPONENT / low)
    top = state.matrix.support()
    return 1.0, math.sqrt(ENVELOPE_EXPONENT + 8 * (top + 1))


def _weight_exponents(channel: Optional["ChannelParams"], t: float,
                      convention: WeightConvention) -> Tuple[float, np.ndarray]:
    """(tau, b_k) with weight_k = e^{(k+1) tau - b_k r^2}."""
    if channel is None or t == 0:
        return 0.0, np.zeros(3)
    tau = t / channel.t_R
    growth = math.expm1(tau)
    derived = (2 * channel.nbar_inf + 1) * growth
    if convention is WeightConvention.PRINTED:
        printed = 2 * channel.nbar_inf * growth
        return tau, np.array([derived, printed, printed])
    return tau, np.full(3, derived)


def radial_moments_at(
    state: State,
    channel: Optional["ChannelParams"] = None,
    t: float = 0.0,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    convention: WeightConvention = WeightConvention.DERIVED,
) -> RadialMoments:
    """I_0, I_1, I_2 at time t (units of time, not t/t_R); t = 0 needs no channel."""
    if not (t >= 0 and math.isfinite(t)):
        raise ValueError(f"t must be finite and non-negative, got {t}")
    if t > 0 and channel is None:
        raise ValueError("A channel is required for t > 0")

    started = time.perf_counter()
    tau, exponents = _weight_exponents(channel, t, convention)
    profile, ring = angular_profile(state)
    rate, r0 = radial_extent(state)
    shrink = float(np.min(exponents))
    r_max = r0 * math.sqrt(rate / (rate + shrink))
    powers = np.arange(3)
    prefactor = np.exp((powers + 1) * tau)

    def weights(r: np.ndarray) -> np.ndarray:
        x = r * r
        return prefactor[:, None] * x[None, :] ** powers[:, None] * np.exp(-exponents[:, None] * x[None, :])

    if profile is AngularProfile.ISOTROPIC:
        def integrand(r: np.ndarray) -> np.ndarray:
            return weights(r) * ring(r)[None, :]
    else:
        def integrand(points: np.ndarray) -> np.ndarray:
            radii = np.abs(points).ravel()
            values = weights(radii) * ring(points).ravel()[None, :]
            return values.reshape((3,) + points.shape)

    try:
        result: RadialIntegral = integrate_radial(integrand, r_max, profile, tolerances.quad_tol)
    except QuadratureNotConverged:
        event_logger.log_computation(f"radial_moments[{state.family}]", time.perf_counter() - started,
                                     False, "quadrature did not converge")
        raise

    moments = RadialMoments(
        t=float(t),
        i0=float(result.value[0]),
        i1=float(result.value[1]),
        i2=float(result.value[2]),
        error=float(np.max(result.error)),
        panels=result.panels,
        angles=result.angles,
    )
    logger.debug(
        f"Moments of {state.family} at t={t:g}: C^2={moments.qcs_squared:.10g}, "
        f"P={moments.purity:.10g} ({result.panels} panels, {result.angles} angles)"
    )
    return moments
