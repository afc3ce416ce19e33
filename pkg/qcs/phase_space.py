"""Position kernels, Wigner grids and the interference decomposition.

Wigner convention: W(alpha) = (1/pi^2) int chi(xi) e^{conj(xi) alpha - xi conj(alpha)} d^2 xi,
so int W d^2 alpha = 1 and the vacuum is (2/pi) e^{-2|alpha|^2}.  Grid axes
are (Re alpha, Im alpha) for Wigner grids and (x, x') for kernels.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict

from qcs.charfn import char_at, radial_extent
from qcs.errors import GridTooCoarse, InvalidSpec
from qcs.metrics import closed_form_qcs, qcs
from qcs.special import hermite_functions, superdiagonal_series
from qcs.states import FockDensityMatrix, State, mean_amplitude, mean_photon_number, to_fock_matrix
from qcs.tolerances import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)

DEFAULT_KERNEL_POINTS = 801
KERNEL_MARGIN = 4.0


@dataclass(frozen=True)
class Grid2D:
    """Uniform tensor grid; values[i, j] sits at (x[i], y[j])."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    n1: int
    n2: int
    values: Optional[np.ndarray] = None

    def __post_init__(self):
        bounds = (self.x_min, self.x_max, self.y_min, self.y_max)
        if not all(math.isfinite(b) for b in bounds):
            raise InvalidSpec("Grid ranges must be finite")
        if self.n1 < 2 or self.n2 < 2:
            raise InvalidSpec(f"Grid needs at least 2 points per axis, got {self.n1}x{self.n2}")
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise InvalidSpec("Grid ranges must be increasing")
        if self.values is not None and np.shape(self.values) != (self.n1, self.n2):
            raise InvalidSpec(f"Grid values have shape {np.shape(self.values)}, expected {(self.n1, self.n2)}")

    @classmethod
    def square(cls, half_width: float, points: int) -> "Grid2D":
        return cls(-half_width, half_width, -half_width, half_width, points, points)

    @classmethod
    def with_spacing(cls, half_width: float, spacing: float) -> "Grid2D":
        """Square grid whose spacing does not exceed ``spacing``."""
        points = int(math.ceil(2 * half_width / spacing)) + 1
        return cls.square(half_width, points)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n1)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.n2)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n1 - 1)

    @property
    def dy(self) -> float:
        return (self.y_max - self.y_min) / (self.n2 - 1)

    def with_values(self, values: np.ndarray) -> "Grid2D":
        return replace(self, values=np.asarray(values))

    def trapezoid_weights(self) -> Tuple[np.ndarray, np.ndarray]:
        wx = np.full(self.n1, self.dx)
        wx[[0, -1]] *= 0.5
        wy = np.full(self.n2, self.dy)
        wy[[0, -1]] *= 0.5
        return wx, wy

    def integrate(self, values: Optional[np.ndarray] = None) -> complex:
        values = self.values if values is None else values
        wx, wy = self.trapezoid_weights()
        return wx @ values @ wy

    def to_frame(self) -> pd.DataFrame:
        xx, yy = np.meshgrid(self.x, self.y, indexing="ij")
        frame = pd.DataFrame({"x": xx.ravel(), "y": yy.ravel(), "value": np.real(self.values).ravel()})
        if np.iscomplexobj(self.values):
            frame["value_imag"] = np.imag(self.values).ravel()
        return frame


class InterferenceReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    p_N: float
    p_diag_ell: Dict[float, float]
    residual: Dict[float, float]


# ---------------------------------------------------------------------------
# Position kernel
# ---------------------------------------------------------------------------


def default_kernel_grid(matrix: FockDensityMatrix, tolerances: Tolerances = DEFAULT_TOLERANCES) -> Grid2D:
    """[-L, L]^2 with L = sqrt(2 N_c) + 4 and at least 801 points per axis."""
    half_width = math.sqrt(2 * matrix.dim) + KERNEL_MARGIN
    top = matrix.support(tolerances.psd_tol)
    spacing = _nyquist_spacing(top)
    points = max(DEFAULT_KERNEL_POINTS, int(math.ceil(2 * half_width / spacing)) + 1)
    return Grid2D.square(half_width, points)


def _nyquist_spacing(top: int) -> float:
    # psi_n oscillates with local wavenumber up to sqrt(2n + 1); sample twice per half-period
    return math.pi / (2 * math.sqrt(2 * top + 1))


def _check_kernel_grid(grid: Grid2D, matrix: FockDensityMatrix, tolerances: Tolerances) -> None:
    top = matrix.support(tolerances.psd_tol)
    limit = _nyquist_spacing(top)
    if max(grid.dx, grid.dy) > limit:
        raise GridTooCoarse(
            f"Kernel spacing {max(grid.dx, grid.dy):.4g} exceeds {limit:.4g} needed for number state {top}"
        )
    reach = math.sqrt(2 * top + 1) + 3
    if min(-grid.x_min, grid.x_max, -grid.y_min, grid.y_max) < reach:
        raise GridTooCoarse(f"Kernel grid must cover [-{reach:.3g}, {reach:.3g}] on both axes")


def position_kernel(state: State, grid: Optional[Grid2D] = None, cutoff: Optional[int] = None,
                    tolerances: Tolerances = DEFAULT_TOLERANCES) -> Grid2D:
    """rho(x, x') = sum_mn rho_mn psi_m(x) psi_n(x') on the grid."""
    matrix = to_fock_matrix(state, cutoff, tolerances).matrix
    grid = default_kernel_grid(matrix, tolerances) if grid is None else grid
    _check_kernel_grid(grid, matrix, tolerances)
    top = matrix.dim - 1
    psi_x = hermite_functions(top, grid.x)
    psi_y = hermite_functions(top, grid.y)
    kernel = psi_x.T @ matrix.data @ psi_y
    return grid.with_values(kernel)


def kernel_coherence_integral(kernel: Grid2D) -> float:
    """int int (x - x')^2 |rho(x, x')|^2 / int int |rho(x, x')|^2 on the kernel grid."""
    wx, wy = kernel.trapezoid_weights()
    density = np.abs(kernel.values) ** 2 * np.outer(wx, wy)
    spread = (kernel.x[:, None] - kernel.y[None, :]) ** 2
    return float(np.sum(spread * density) / np.sum(density))


# ---------------------------------------------------------------------------
# Interference decomposition
# ---------------------------------------------------------------------------


def p_n(state: State, n: int, tolerances: Tolerances = DEFAULT_TOLERANCES) -> float:
    """<n|rho|n> from the number basis."""
    if n < 0:
        raise InvalidSpec(f"n must be non-negative, got {n}")
    matrix = to_fock_matrix(state, tolerances=tolerances).matrix
    if n >= matrix.dim:
        return 0.0
    return float(matrix.data[n, n].real)


def _triangle_cdf(z: np.ndarray) -> np.ndarray:
    z = np.clip(z, -1.0, 1.0)
    return np.where(z <= 0, 0.5 * (1 + z) ** 2, 1 - 0.5 * (1 - z) ** 2)


def strip_weights(grid: Grid2D, ell: float) -> np.ndarray:
    """Trapezoid weights times the fraction of each cell with |x - x'| <= ell."""
    if not ell > 0:
        raise InvalidSpec(f"ell must be positive, got {ell}")
    if abs(grid.dx - grid.dy) > 1e-9 * grid.dx:
        raise InvalidSpec("Strip integrals need equal spacing on both axes")
    h = grid.dx
    offset = grid.x[:, None] - grid.y[None, :]
    covered = _triangle_cdf((ell - offset) / h) - _triangle_cdf((-ell - offset) / h)
    wx, wy = grid.trapezoid_weights()
    return covered * np.outer(wx, wy)


def interference_profile(state: State, ns: Sequence[int], ells: Sequence[float],
                         grid: Optional[Grid2D] = None, cutoff: Optional[int] = None,
                         tolerances: Tolerances = DEFAULT_TOLERANCES) -> List[InterferenceReport]:
    """p_N(n) and its strip-restricted parts for several n and ell from one kernel."""
    if not ns or not ells:
        raise InvalidSpec("interference_profile needs at least one n and one ell")
    kernel = position_kernel(state, grid, cutoff, tolerances)
    matrix = to_fock_matrix(state, cutoff, tolerances).matrix
    strips = {float(ell): strip_weights(kernel, ell) for ell in ells}
    top = max(max(ns), matrix.dim - 1)
    psi_x = hermite_functions(top, kernel.x)
    psi_y = hermite_functions(top, kernel.y)

    reports = []
    for n in ns:
        if n < 0:
            raise InvalidSpec(f"n must be non-negative, got {n}")
        exact = float(matrix.data[n, n].real) if n < matrix.dim else 0.0
        projected = np.outer(psi_x[n], psi_y[n]) * kernel.values
        diagonal_parts = {ell: float(np.sum(weights * projected).real) for ell, weights in strips.items()}
        reports.append(InterferenceReport(
            n=n,
            p_N=exact,
            p_diag_ell=diagonal_parts,
            residual={ell: exact - value for ell, value in diagonal_parts.items()},
        ))
    return reports


def p_n_diag(state: State, n: int, ell: float, grid: Optional[Grid2D] = None,
             cutoff: Optional[int] = None,
             tolerances: Tolerances = DEFAULT_TOLERANCES) -> InterferenceReport:
    """int_{|x - x'| <= ell} <x'|n><n|x> rho(x, x') dx dx'."""
    return interference_profile(state, [n], [ell], grid, cutoff, tolerances)[0]


# ---------------------------------------------------------------------------
# Wigner function
# ---------------------------------------------------------------------------


def _reference_qcs(state: State, tolerances: Tolerances) -> float:
    known = closed_form_qcs(state)
    return known if known is not None else qcs(state, tolerances).C


def _check_wigner_spacing(state: State, grid: Grid2D, tolerances: Tolerances) -> None:
    scale = _reference_qcs(state, tolerances)
    limit = 1 / (4 * scale)
    if max(grid.dx, grid.dy) > limit:
        raise GridTooCoarse(f"Wigner spacing {max(grid.dx, grid.dy):.4g} exceeds 1/(4C) = {limit:.4g}")


def default_wigner_grid(state: State, spacing: Optional[float] = None,
                        tolerances: Tolerances = DEFAULT_TOLERANCES) -> Grid2D:
    """Square grid at spacing 1/(8C) wide enough to hold the state's Wigner function."""
    if spacing is None:
        spacing = 1 / (8 * max(_reference_qcs(state, tolerances), 1.0))
    if state.moments is not None:
        # six standard deviations of Re alpha along the widest axis
        half_width = abs(mean_amplitude(state)) + 3 * math.sqrt(state.moments.eigenvalues[1])
    else:
        half_width = math.sqrt(2 * mean_photon_number(state) + 1) + KERNEL_MARGIN
    return Grid2D.with_spacing(max(half_width, KERNEL_MARGIN), spacing)


def _gaussian_wigner(state: State, alpha: np.ndarray) -> np.ndarray:
    moments = state.moments
    sigma_inverse = np.linalg.inv(moments.V / 2)
    dx = math.sqrt(2) * alpha.real - moments.mean[0]
    dp = math.sqrt(2) * alpha.imag - moments.mean[1]
    quadratic = sigma_inverse[0, 0] * dx * dx + 2 * sigma_inverse[0, 1] * dx * dp + sigma_inverse[1, 1] * dp * dp
    return 2 * np.exp(-0.5 * quadratic) / (math.pi * math.sqrt(moments.det))


def _matrix_wigner(rho: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """(2/pi) [w_0 + 2 Re sum_k w_k e^{ik arg alpha}] with w_k from signed Laguerre diagonals at |2 alpha|."""
    radius = 2 * np.abs(alpha)
    phase = np.angle(alpha)
    total = np.zeros(alpha.shape)
    for k, w_k in enumerate(superdiagonal_series(rho, radius, signed=True)):
        if k == 0:
            total = total + w_k.real
        elif np.any(w_k):
            total = total + 2 * np.real(w_k * np.exp(1j * k * phase))
    return 2 / math.pi * total


def wigner_grid(state: State, grid: Grid2D, cutoff: Optional[int] = None,
                tolerances: Tolerances = DEFAULT_TOLERANCES) -> Grid2D:
    """W on a (Re alpha, Im alpha) grid by closed form or number-basis Laguerre expansion."""
    _check_wigner_spacing(state, grid, tolerances)
    xx, yy = np.meshgrid(grid.x, grid.y, indexing="ij")
    alpha = xx + 1j * yy
    if state.moments is not None:
        values = _gaussian_wigner(state, alpha)
    else:
        matrix = to_fock_matrix(state, cutoff, tolerances).matrix
        values = _matrix_wigner(matrix.data, alpha)
    return grid.with_values(values)


def wigner_integrals(wigner: Grid2D) -> Tuple[float, float]:
    """(int W, pi int W^2) by the tensor trapezoid rule."""
    values = np.real(wigner.values)
    return float(wigner.integrate(values)), float(math.pi * wigner.integrate(values * values))


def wigner_from_charfn(state: State, grid: Grid2D, extent: Optional[float] = None,
                       points: int = 201) -> Grid2D:
    """W by direct Riemann-sum Fourier transform of chi; a low-resolution cross-check."""
    if extent is None:
        _, extent = radial_extent(state)
    xi = np.linspace(-extent, extent, points)
    h = xi[1] - xi[0]
    xi1, xi2 = np.meshgrid(xi, xi, indexing="ij")
    chi = char_at(state, xi1 + 1j * xi2)
    # conj(xi) alpha - xi conj(alpha) = 2i (xi1 alpha2 - xi2 alpha1)
    forward = np.exp(2j * np.outer(xi, grid.y))
    backward = np.exp(-2j * np.outer(xi, grid.x))
    values = (h * h / math.pi ** 2) * (backward.T @ chi.T @ forward)
    return grid.with_values(values.real)


def qcs_wigner_gradient(state: State, grid: Grid2D, cutoff: Optional[int] = None,
                        tolerances: Tolerances = DEFAULT_TOLERANCES) -> float:
    """C^2 = (1/4) ||grad W||^2 / ||W||^2 with fourth-order central differences.

    The two-cell halo on each side is excluded from both norms.
    """
    wigner = wigner_grid(state, grid, cutoff, tolerances)
    values = np.real(wigner.values)
    if min(values.shape) < 5:
        raise GridTooCoarse("Gradient route needs at least 5 points per axis")
    hx, hy = wigner.dx, wigner.dy
    grad_x = (-values[4:, 2:-2] + 8 * values[3:-1, 2:-2] - 8 * values[1:-3, 2:-2] + values[:-4, 2:-2]) / (12 * hx)
    grad_y = (-values[2:-2, 4:] + 8 * values[2:-2, 3:-1] - 8 * values[2:-2, 1:-3] + values[2:-2, :-4]) / (12 * hy)
    interior = values[2:-2, 2:-2]
    gradient_norm = float(np.sum(grad_x * grad_x + grad_y * grad_y))
    value_norm = float(np.sum(interior * interior))
    return 0.25 * gradient_norm / value_norm
