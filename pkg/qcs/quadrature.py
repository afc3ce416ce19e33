"""Adaptive polar quadrature for integrals over the phase plane.

Integrals are reduced to radius x angle.  The radial direction uses
Gauss-Legendre panels that are bisected until the two-half estimate agrees
with the single-panel one; the angular direction is either skipped
(rotation-invariant integrand, the caller supplies the angle-integrated
profile) or a uniform trapezoid rule whose point count doubles until
successive estimates agree.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, List, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from infra.logging import get_trace_logger
from qcs.errors import QuadratureNotConverged
from qcs.tolerances import DEFAULT_TOLERANCES

logger = logging.getLogger(__name__)
trace_logger = get_trace_logger()

GAUSS_ORDER = 20
INITIAL_PANELS = 16
MAX_LEVEL = 18
MIN_ANGLES = 8
MAX_ANGLES = 8192
_TINY = 1e-300


class AngularProfile(str, Enum):
    """How the angular direction of a phase-plane integrand is handled."""

    # integrand(r) already returns the integral over the full circle
    ISOTROPIC = "isotropic"
    # integrand(xi) is evaluated on complex points and averaged over angles
    TRAPEZOID = "trapezoid"


@dataclass(frozen=True)
class RadialIntegral:
    """Result of integrate_radial; value and error have one entry per component."""

    value: np.ndarray
    error: np.ndarray
    panels: int
    angles: int


@lru_cache(maxsize=4)
def _legendre_rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _as_components(values: np.ndarray, n_points: int) -> np.ndarray:
    values = np.asarray(values)
    if values.ndim == 1:
        return values.reshape(1, n_points)
    return values.reshape(values.shape[0], n_points)


class _AngularIntegrator:
    """Integrates a complex-point integrand over the full circle at given radii."""

    def __init__(self, integrand: Callable[[np.ndarray], np.ndarray], tol: float,
                 max_angles: int = MAX_ANGLES):
        self.integrand = integrand
        self.tol = tol
        self.max_angles = max_angles
        self.max_used = 0

    def _ring_sum(self, radii: np.ndarray, phases: np.ndarray) -> np.ndarray:
        points = radii[:, None] * np.exp(1j * phases)[None, :]
        values = np.asarray(self.integrand(points))
        if values.ndim == 2:
            values = values[None, ...]
        return values.sum(axis=-1)

    def __call__(self, radii: np.ndarray) -> np.ndarray:
        count = MIN_ANGLES
        phases = 2 * np.pi * np.arange(count) / count
        total = self._ring_sum(radii, phases)
        estimate = 2 * np.pi * total / count
        while True:
            if count * 2 > self.max_angles:
                raise QuadratureNotConverged(
                    f"Angular rule did not converge with {self.max_angles} points"
                )
            midpoints = phases + np.pi / count
            total = total + self._ring_sum(radii, midpoints)
            count *= 2
            phases = 2 * np.pi * np.arange(count) / count
            refined = 2 * np.pi * total / count
            scale = max(float(np.max(np.abs(refined))), _TINY)
            if np.max(np.abs(refined - estimate)) <= self.tol * scale:
                self.max_used = max(self.max_used, count)
                return refined
            estimate = refined


def integrate_radial(
    integrand: Callable[[np.ndarray], np.ndarray],
    r_max: float,
    profile: AngularProfile = AngularProfile.ISOTROPIC,
    tol: float = DEFAULT_TOLERANCES.quad_tol,
    order: int = GAUSS_ORDER,
    initial_panels: int = INITIAL_PANELS,
    max_level: int = MAX_LEVEL,
) -> RadialIntegral:
    """Integrate over the disc |xi| <= r_max in polar coordinates.

    With ``AngularProfile.ISOTROPIC`` the integrand maps radii to the angular
    integral g(r) = int f(r e^{i phi}) d phi; with ``TRAPEZOID`` it maps
    complex points to f.  Either may return a leading component axis, in
    which case every component is integrated on the same panels.

    A panel is accepted when |two halves - whole| <= tol * scale * width / r_max,
    where scale is the absolute integral from the first pass.  Accepted
    contributions are summed with math.fsum in panel order so results do not
    depend on evaluation batching.
    """
    if not (r_max > 0 and math.isfinite(r_max)):
        raise ValueError(f"r_max must be positive and finite, got {r_max}")

    nodes, weights = _legendre_rule(order)
    if profile is AngularProfile.TRAPEZOID:
        angular = _AngularIntegrator(integrand, tol)
        ring = angular
    else:
        angular = None
        ring = integrand

    def panel_sums(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        half = 0.5 * (hi - lo)
        centre = 0.5 * (hi + lo)
        radii = (centre[:, None] + half[:, None] * nodes[None, :]).ravel()
        values = _as_components(ring(radii), radii.size).real
        values = values * radii[None, :]
        values = values.reshape(values.shape[0], lo.size, order)
        return np.einsum("cpq,q->cp", values, weights) * half[None, :]

    edges = np.linspace(0.0, r_max, initial_panels + 1)
    lo, hi = edges[:-1], edges[1:]
    coarse = panel_sums(lo, hi)
    scale = np.maximum(np.abs(coarse).sum(axis=1), _TINY)

    accepted: List[Tuple[float, np.ndarray, np.ndarray]] = []
    for level_index in range(max_level + 1):
        mid = 0.5 * (lo + hi)
        left = panel_sums(lo, mid)
        right = panel_sums(mid, hi)
        fine = left + right
        diff = np.abs(fine - coarse)
        allowed = tol * scale[:, None] * ((hi - lo) / r_max)[None, :]
        done = np.all(diff <= allowed, axis=0)
        for index in np.flatnonzero(done):
            accepted.append((float(lo[index]), fine[:, index], diff[:, index]))

        trace_logger.trace_quadrature(
            level_index, int(lo.size), int(done.sum()), angular.max_used if angular else 1
        )

        pending = ~done
        if not np.any(pending):
            break
        lo = np.concatenate([lo[pending], mid[pending]])
        hi = np.concatenate([mid[pending], hi[pending]])
        coarse = np.concatenate([left[:, pending], right[:, pending]], axis=1)
        order_index = np.argsort(lo, kind="stable")
        lo, hi, coarse = lo[order_index], hi[order_index], coarse[:, order_index]
    else:
        raise QuadratureNotConverged(
            f"Radial quadrature did not converge after {max_level} refinements "
            f"({lo.size} panels pending)"
        )

    accepted.sort(key=lambda item: item[0])
    components = scale.size
    value = np.array([math.fsum(item[1][c] for item in accepted) for c in range(components)])
    error = np.array([math.fsum(item[2][c] for item in accepted) for c in range(components)])
    angles = angular.max_used if angular else 1
    logger.debug(f"Radial quadrature used {len(accepted)} panels and {angles} angles")
    return RadialIntegral(value=value, error=error, panels=len(accepted), angles=angles)
