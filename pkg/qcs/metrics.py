"""Quadrature coherence scale, purity and kappa through independent routes.

The chi-moment route is canonical; the commutator, Gaussian closed-form,
per-quadrature kernel and Wigner-gradient routes exist to check it.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.sparse import diags

from qcs.charfn import radial_moments_at
from qcs.errors import CutoffTooSmall, GridTooCoarse, InvalidSpec, Unphysical, UnsupportedFamily
from qcs.special import gauss_hermite_rule, hermite_functions
from qcs.states import MAX_AUTO_CUTOFF, FockDensityMatrix, GaussianMoments, State, to_fock_matrix, total_noise
from qcs.tolerances import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)


class QcsMethod(str, Enum):
    CHI_MOMENTS = "chi_moments"
    COMMUTATOR = "commutator"
    GAUSSIAN_CLOSED_FORM = "gaussian_closed_form"
    WIGNER_GRADIENT = "wigner_gradient"


class QcsReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    C: float
    C_squared: float
    purity: float
    kappa: Optional[float] = None
    method: QcsMethod
    total_noise: Optional[float] = None

    @model_validator(mode="after")
    def _check(self) -> "QcsReport":
        if not self.C > 0:
            raise ValueError(f"QCS must be positive, got {self.C}")
        if not 0 < self.purity <= 1 + 1e-6:
            raise ValueError(f"Purity {self.purity} outside (0, 1]")
        if self.kappa is not None and self.kappa < -1e-9:
            raise ValueError(f"kappa {self.kappa} is negative")
        return self

    @classmethod
    def from_squared(cls, c_squared: float, purity: float, method: QcsMethod,
                     kappa: Optional[float] = None, noise: Optional[float] = None) -> "QcsReport":
        return cls(C=math.sqrt(c_squared), C_squared=c_squared, purity=purity,
                   kappa=kappa, method=method, total_noise=noise)


def qcs(state: State, tolerances: Tolerances = DEFAULT_TOLERANCES) -> QcsReport:
    """C^2 = I1/I0, P = I0/pi, kappa = I2 I0 / I1^2 - 1 at t = 0."""
    moments = radial_moments_at(state, tolerances=tolerances)
    return QcsReport.from_squared(
        moments.qcs_squared,
        moments.purity,
        QcsMethod.CHI_MOMENTS,
        kappa=moments.kappa,
        noise=total_noise(state),
    )


def quadrature_operators(dim: int):
    """Sparse X and P with <n-1|X|n> = sqrt(n/2), <n-1|P|n> = -i sqrt(n/2)."""
    off = np.sqrt(np.arange(1, dim) / 2)
    position = diags([off, off], [1, -1], shape=(dim, dim), format="csr")
    momentum = diags([-1j * off, 1j * off], [1, -1], shape=(dim, dim), format="csr")
    return position, momentum


def _commutator_norm(rho: np.ndarray, operator) -> float:
    # rho A computed as (A^T rho^T)^T to keep the sparse operand on the left
    left = operator @ rho
    right = (operator.T @ rho.T).T
    difference = right - left
    return float(np.vdot(difference, difference).real)


def qcs_commutator(matrix: FockDensityMatrix, tolerances: Tolerances = DEFAULT_TOLERANCES) -> QcsReport:
    """C^2 = (||[rho, X]||^2 + ||[rho, P]||^2) / (2 P) from tridiagonal X, P."""
    populations = matrix.populations
    if matrix.dim < 3 or np.max(np.abs(populations[-2:])) >= tolerances.margin_tol:
        raise CutoffTooSmall(
            f"Commutator route needs two empty rows at the cutoff; last populations "
            f"{populations[-2:].tolist()} exceed {tolerances.margin_tol:g}"
        )
    position, momentum = quadrature_operators(matrix.dim)
    rho = matrix.data
    purity = matrix.purity
    c_squared = (_commutator_norm(rho, position) + _commutator_norm(rho, momentum)) / (2 * purity)
    return QcsReport.from_squared(c_squared, purity, QcsMethod.COMMUTATOR)


def commutator_route(state: State, tolerances: Tolerances = DEFAULT_TOLERANCES) -> QcsReport:
    """qcs_commutator on a cutoff widened until the margin rule holds."""
    truncation = to_fock_matrix(state, tolerances=tolerances)
    matrix, size = truncation.matrix, truncation.cutoff
    while True:
        try:
            return qcs_commutator(matrix, tolerances)
        except CutoffTooSmall:
            if size >= MAX_AUTO_CUTOFF:
                raise
            if state.matrix is not None:
                # zero padding is exact for an explicit matrix
                size += 2
                matrix = state.matrix.padded(size)
            else:
                size = min(MAX_AUTO_CUTOFF, math.ceil(size * 1.25))
                matrix = to_fock_matrix(state, size, tolerances).matrix
            logger.debug(f"Commutator route widening cutoff to {size}")


def qcs_gaussian(moments: GaussianMoments) -> QcsReport:
    """C^2 = Tr V^{-1} / 2, P = 1/sqrt(det V), kappa = 2 - det V / (sigma_x^2 + sigma_p^2)^2."""
    det = moments.det
    if det < 1.0 - 1e-12:
        raise Unphysical(f"det V = {det:.12g} < 1")
    trace = float(moments.V[0, 0] + moments.V[1, 1])
    c_squared = trace / (2 * det)
    kappa = 2.0 - det / (trace / 2) ** 2
    return QcsReport.from_squared(
        c_squared,
        min(1.0, 1.0 / math.sqrt(det)),
        QcsMethod.GAUSSIAN_CLOSED_FORM,
        kappa=kappa,
        noise=trace / 2,
    )


def _quadrature_coherence(rho: np.ndarray, theta: float, n_nodes: int) -> float:
    """(1/P) int int (x - x')^2 |<x_theta|rho|x'_theta>|^2 dx dx' by Gauss-Hermite."""
    dim = rho.shape[0]
    phases = np.exp(-1j * theta * np.arange(dim))
    rotated = phases[:, None] * rho * phases.conj()[None, :]
    nodes, weights = gauss_hermite_rule(n_nodes)
    psi = hermite_functions(dim - 1, nodes)
    kernel = psi.T @ rotated @ psi
    density = np.abs(kernel) ** 2 * np.outer(weights, weights)
    spread = (nodes[:, None] - nodes[None, :]) ** 2
    return float(np.sum(spread * density) / np.sum(density))


def qcs_theta(state: State, theta: float, nodes: Optional[int] = None,
              cutoff: Optional[int] = None,
              tolerances: Tolerances = DEFAULT_TOLERANCES) -> Tuple[float, float]:
    """(C_{X_theta}^2, C_{P_theta}^2) from the rotated position kernel.

    The Gauss-Hermite rule is exact once it has more nodes than the cutoff,
    so the only discretization parameter is ``nodes`` (default cutoff + 8).
    """
    matrix = to_fock_matrix(state, cutoff, tolerances).matrix
    n_nodes = matrix.dim + 8 if nodes is None else int(nodes)
    if n_nodes < matrix.dim + 1:
        raise GridTooCoarse(
            f"{n_nodes} Gauss-Hermite nodes cannot resolve a kernel with cutoff {matrix.dim}"
        )
    rho = matrix.data
    return (
        _quadrature_coherence(rho, theta, n_nodes),
        _quadrature_coherence(rho, theta + math.pi / 2, n_nodes),
    )


def fock_kappa_exact(n: int) -> Fraction:
    """kappa_n = (2n^2 + 2n + 1) / (2n + 1)^2 as an exact fraction."""
    if n < 0:
        raise InvalidSpec(f"Fock number must be non-negative, got {n}")
    return Fraction(2 * n * n + 2 * n + 1, (2 * n + 1) ** 2)


def cat_kappa(alpha_abs_squared: float) -> float:
    """1 + 4a^2 / (cosh a + 2a sinh a)^2 with a = |alpha|^2, scaled by e^{-a}."""
    a = alpha_abs_squared
    decay = math.exp(-2 * a)
    denominator = 0.5 * (1 + decay) + a * (1 - decay)
    return 1.0 + 4 * a * a * decay / denominator ** 2


def closed_form_kappa(state: State) -> float:
    family = state.family
    if family == "fock":
        return float(fock_kappa_exact(state.spec.n))
    if family == "cat":
        return cat_kappa(abs(state.alpha) ** 2)
    if state.moments is not None:
        return qcs_gaussian(state.moments).kappa
    raise UnsupportedFamily(f"No closed-form kappa for family {family!r}")


def closed_form_qcs(state: State) -> Optional[float]:
    """Known closed-form C for analytic families, None for explicit matrices."""
    family = state.family
    spec = state.spec
    if family == "fock":
        return math.sqrt(2 * spec.n + 1)
    if family == "cat":
        a = abs(state.alpha) ** 2
        return math.sqrt(1 + 2 * a * math.tanh(a))
    if family == "even_mixture":
        return math.sqrt(2 * spec.M + 3)
    if family == "thermal":
        return 1 / math.sqrt(1 + 2 * spec.nbar)
    if state.moments is not None:
        return qcs_gaussian(state.moments).C
    return None


def nonclassicality_bounds(C: float) -> Tuple[float, float]:
    """(max(C - 1, 0), C): bounds on the distance to the optical classical states."""
    if not (C > 0 and math.isfinite(C)):
        raise InvalidSpec(f"C must be positive and finite, got {C}")
    return max(C - 1.0, 0.0), C


@dataclass(frozen=True)
class PrincipalVariances:
    theta_star: float
    sigma2_x: float
    sigma2_p: float

    def qcs_bounds(self) -> Tuple[float, float]:
        """1/(2 sigma_p*^2) <= C_G^2 <= 1/(2 sigma_x*^2)."""
        return 1 / (2 * self.sigma2_p), 1 / (2 * self.sigma2_x)


def gaussian_principal_variances(moments: GaussianMoments) -> PrincipalVariances:
    """Quadrature angle with the narrowest marginal and the extreme marginal variances."""
    evals, evecs = np.linalg.eigh(moments.V / 2)
    narrow = evecs[:, 0]
    theta = math.atan2(narrow[1], narrow[0]) % math.pi
    return PrincipalVariances(theta_star=theta, sigma2_x=float(evals[0]), sigma2_p=float(evals[1]))
