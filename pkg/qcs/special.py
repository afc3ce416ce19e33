"""Special functions for number-basis expansions.

Hermite functions come from the three-term recurrence on psi_n itself, and the
displacement matrix elements are built diagonal by diagonal from a normalized
associated-Laguerre recurrence whose seed carries the log-factorial scaling.
Neither route forms n! or H_n(x), so both stay finite for n of several hundred.
"""

from functools import lru_cache
from typing import Iterator, Tuple

import numpy as np
from scipy.special import gammaln, roots_hermite

PI_QUARTER = np.pi ** (-0.25)
# entries of a cached cutoff x cutoff x len(r) diagonal table (8 MB)
DIAGONAL_TABLE_LIMIT = 1 << 20


def hermite_functions(n_max: int, x: np.ndarray) -> np.ndarray:
    """Orthonormal Hermite functions psi_0..psi_n_max evaluated at x.

    Returns an array of shape (n_max + 1,) + x.shape.

    Recursion relation:
        psi_n(x) = sqrt(2/n) * x * psi_{n-1}(x) - sqrt((n-1)/n) * psi_{n-2}(x)
    """
    if n_max < 0:
        raise ValueError("n_max must be non-negative.")
    x = np.asarray(x, dtype=float)
    psi = np.empty((n_max + 1,) + x.shape)
    psi[0] = PI_QUARTER * np.exp(-0.5 * x * x)
    if n_max >= 1:
        psi[1] = np.sqrt(2.0) * x * psi[0]
    for m in range(2, n_max + 1):
        psi[m] = np.sqrt(2.0 / m) * x * psi[m - 1] - np.sqrt((m - 1) / m) * psi[m - 2]
    return psi


def laguerre_diagonal(k: int, n_terms: int, r: np.ndarray) -> Iterator[np.ndarray]:
    """Yield d_m(r) = <m+k|D(r)|m> for m = 0..n_terms-1 at real r >= 0.

    d_m(r) = sqrt(m!/(m+k)!) r^k e^{-r^2/2} L_m^{(k)}(r^2), generated by the
    normalized Laguerre recurrence
        d_{m+1} = [(2m+1+k-x) d_m - sqrt(m(m+k)) d_{m-1}] / sqrt((m+1)(m+1+k)),
    with x = r^2 and the seed exp(k ln r - x/2 - lgamma(k+1)/2).
    """
    r = np.asarray(r, dtype=float)
    x = r * r
    with np.errstate(divide="ignore", invalid="ignore"):
        k_log_r = np.where(r > 0, k * np.log(r), 0.0 if k == 0 else -np.inf)
    previous = np.zeros_like(x)
    current = np.exp(k_log_r - 0.5 * x - 0.5 * gammaln(k + 1))
    for m in range(n_terms):
        yield current
        following = ((2 * m + 1 + k - x) * current - np.sqrt(m * (m + k)) * previous) / np.sqrt(
            (m + 1) * (m + 1 + k)
        )
        previous, current = current, following


@lru_cache(maxsize=8)
def _diagonals_cached(cutoff: int, radii_bytes: bytes) -> np.ndarray:
    radii = np.frombuffer(radii_bytes, dtype=float)
    diagonals = np.zeros((cutoff, cutoff, radii.size))
    for k in range(cutoff):
        for m, values in enumerate(laguerre_diagonal(k, cutoff - k, radii)):
            diagonals[k, m] = values
    diagonals.setflags(write=False)
    return diagonals


def displacement_diagonals(cutoff: int, radii: np.ndarray) -> np.ndarray:
    """Real displacement elements at phase zero, grouped by diagonal offset.

    Entry [k, m, i] is <m+k|D(r_i)|m> (zero where m + k >= cutoff).  The
    opposite diagonal follows from <m|D(r)|m+k> = (-1)^k <m+k|D(r)|m>.
    Results are cached per (cutoff, radii) since the radial quadrature
    revisits the same abscissae.
    """
    radii = np.ascontiguousarray(np.asarray(radii, dtype=float).ravel())
    return _diagonals_cached(int(cutoff), radii.tobytes())


def displacement_matrix(cutoff: int, xi: complex) -> np.ndarray:
    """Truncated matrix <m|D(xi)|n> for a single complex xi."""
    radius, phase = abs(xi), np.angle(xi)
    diagonals = displacement_diagonals(cutoff, np.array([radius]))[..., 0]
    matrix = np.zeros((cutoff, cutoff), dtype=complex)
    index = np.arange(cutoff)
    for k in range(cutoff):
        m = index[: cutoff - k]
        values = diagonals[k, : cutoff - k]
        matrix[m + k, m] = values * np.exp(1j * k * phase)
        if k:
            matrix[m, m + k] = (-1) ** k * values * np.exp(-1j * k * phase)
    return matrix


def superdiagonal_series(matrix: np.ndarray, r: np.ndarray, signed: bool = False) -> Iterator[np.ndarray]:
    """Yield c_k(r) = sum_m rho_{m,m+k} (+-1)^m <m+k|D(r)|m> for k = 0..N-1.

    Point sets small enough for a full diagonal table (quadrature panels) go
    through the displacement_diagonals cache; larger ones such as Wigner grids
    stream one diagonal at a time so memory stays O(N * len(r)).  With
    ``signed`` the parity factor (-1)^m is applied, which is the Wigner
    kernel's weighting.
    """
    cutoff = matrix.shape[0]
    r = np.asarray(r, dtype=float)
    parity = (-1.0) ** np.arange(cutoff) if signed else np.ones(cutoff)

    if cutoff * cutoff * r.size <= DIAGONAL_TABLE_LIMIT:
        table = displacement_diagonals(cutoff, r)
        for k in range(cutoff):
            weights = np.diagonal(matrix, offset=k) * parity[: cutoff - k]
            yield np.asarray(weights @ table[k, : cutoff - k], dtype=complex).reshape(r.shape)
        return

    for k in range(cutoff):
        coefficients = np.diagonal(matrix, offset=k)
        total = np.zeros(r.shape, dtype=complex)
        if not np.any(coefficients):
            yield total
            continue
        for m, values in enumerate(laguerre_diagonal(k, cutoff - k, r)):
            weight = coefficients[m] * parity[m]
            if weight != 0:
                total = total + weight * values
        yield total


def gauss_hermite_rule(n_nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and Christoffel weights 1/sum_k psi_k(x_i)^2 for integrals of psi-products.

    For f(x) = p(x) e^{-x^2} with deg p <= 2 n_nodes - 1,
    sum_i w_i p(x_i) e^{-x_i^2} is exact; returning w_i e^{x_i^2} lets callers
    work with bounded Hermite functions instead of growing polynomials.
    """
    nodes, _ = roots_hermite(n_nodes)
    psi = hermite_functions(n_nodes - 1, nodes)
    weights = 1.0 / np.sum(psi * psi, axis=0)
    return nodes, weights
