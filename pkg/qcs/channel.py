"""Thermal Lindblad channel: exact, Gaussian, ODE and Fock-oracle evolution plus half-lives.

The channel is

    d rho/dt = -i omega [N, rho] + gamma D[a] rho + delta D[a^dagger] rho,

with gamma = (nbar_inf + 1)/t_R and delta = nbar_inf/t_R.  Times are in the
same units as t_R throughout.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, FiniteFloat
from scipy.integrate import solve_ivp
from scipy.optimize import bisect, brentq

from infra.logging import get_event_logger, get_trace_logger
from qcs.charfn import RadialMoments, WeightConvention, radial_moments_at
from qcs.errors import CutoffTooSmall, InvalidSpec, RootNotBracketed, StepTooLarge, Unphysical
from qcs.metrics import qcs_commutator, qcs_gaussian
from qcs.states import FockDensityMatrix, GaussianMoments, State, to_fock_matrix
from qcs.tolerances import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)
event_logger = get_event_logger()
trace_logger = get_trace_logger()

# fraction of the cutoff the oracle input may occupy
ORACLE_HEADROOM = 0.8
BRACKET_LIMIT = 64.0
SCAN_POINTS = 32


class ChannelParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    t_R: FiniteFloat = Field(1.0, gt=0)
    nbar_inf: FiniteFloat = Field(0.0, ge=0)
    omega: FiniteFloat = 0.0

    @property
    def gamma(self) -> float:
        return (self.nbar_inf + 1) / self.t_R

    @property
    def delta(self) -> float:
        return self.nbar_inf / self.t_R

    @property
    def asymptotic_qcs_squared(self) -> float:
        return 1 / (1 + 2 * self.nbar_inf)

    @classmethod
    def from_rates(cls, gamma: float, delta: float, omega: float = 0.0) -> "ChannelParams":
        if not gamma > delta >= 0:
            raise InvalidSpec(f"Channel rates need gamma > delta >= 0, got gamma={gamma}, delta={delta}")
        t_R = 1 / (gamma - delta)
        return cls(t_R=t_R, nbar_inf=delta * t_R, omega=omega)


class CurveMethod(str, Enum):
    EXACT_INTEGRAL = "exact_integral"
    ODE = "ode"
    CLOSED_FORM_GAUSSIAN = "closed_form_gaussian"
    FOCK_ORACLE = "fock_oracle"


@dataclass(frozen=True)
class EvolutionCurve:
    times: np.ndarray
    C: np.ndarray
    P: np.ndarray
    kappa: np.ndarray
    method: CurveMethod

    def __post_init__(self):
        arrays = [np.asarray(getattr(self, name), dtype=float) for name in ("times", "C", "P", "kappa")]
        if len({array.shape for array in arrays}) != 1:
            raise ValueError("EvolutionCurve columns must have equal length")
        times, qcs_values, purities, _ = arrays
        if np.any(np.diff(times) <= 0):
            raise ValueError("EvolutionCurve times must be increasing")
        if np.any(qcs_values <= 0) or np.any(purities <= 0) or np.any(purities > 1 + 1e-6):
            raise ValueError("EvolutionCurve needs C > 0 and 0 < P <= 1")
        for name, array in zip(("times", "C", "P", "kappa"), arrays):
            object.__setattr__(self, name, array)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "t": self.times,
            "C": self.C,
            "P": self.P,
            "kappa": self.kappa,
            "method": self.method.value,
        })


def validate_times(times: Iterable[float]) -> np.ndarray:
    times = np.atleast_1d(np.asarray(list(times), dtype=float))
    if times.size == 0:
        raise InvalidSpec("At least one time point is required")
    if not np.all(np.isfinite(times)) or np.any(times < 0):
        raise InvalidSpec("Times must be finite and non-negative")
    if np.any(np.diff(times) <= 0):
        raise InvalidSpec("Times must be strictly increasing")
    return times


# ---------------------------------------------------------------------------
# Exact characteristic-function route
# ---------------------------------------------------------------------------


def evolve_exact(state: State, channel: ChannelParams, times: Sequence[float],
                 tolerances: Tolerances = DEFAULT_TOLERANCES, threads: int = 1,
                 convention: WeightConvention = WeightConvention.DERIVED) -> EvolutionCurve:
    """C(t), P(t), kappa(t) from the radial moments at each time point."""
    times = validate_times(times)
    started = time.perf_counter()

    def point(t: float) -> RadialMoments:
        return radial_moments_at(state, channel, float(t), tolerances, convention)

    if threads > 1 and times.size > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            moments = list(pool.map(point, times))
    else:
        moments = [point(t) for t in times]

    curve = EvolutionCurve(
        times=times,
        C=np.sqrt([m.qcs_squared for m in moments]),
        P=np.array([m.purity for m in moments]),
        kappa=np.array([m.kappa for m in moments]),
        method=CurveMethod.EXACT_INTEGRAL,
    )
    event_logger.log_computation(f"evolve_exact[{state.family}]", time.perf_counter() - started, True)
    return curve


# ---------------------------------------------------------------------------
# Gaussian propagator
# ---------------------------------------------------------------------------


def _rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, s], [-s, c]])


def evolve_gaussian(moments: GaussianMoments, channel: ChannelParams, t: float) -> GaussianMoments:
    """V(t) = e^{-t/t_R} R V R^T + (2 nbar_inf + 1)(1 - e^{-t/t_R}) I, mean e^{-t/2t_R} R mean."""
    if moments.det < 1.0 - 1e-12:
        raise Unphysical(f"det V = {moments.det:.12g} < 1")
    if not (t >= 0 and math.isfinite(t)):
        raise InvalidSpec(f"t must be finite and non-negative, got {t}")
    decay = math.exp(-t / channel.t_R)
    rotation = _rotation(channel.omega * t)
    cov = decay * rotation @ moments.V @ rotation.T + (2 * channel.nbar_inf + 1) * (1 - decay) * np.eye(2)
    cov = 0.5 * (cov + cov.T)
    mean = math.sqrt(decay) * rotation @ moments.mean
    return GaussianMoments(cov, mean)


def gaussian_curve(moments: GaussianMoments, channel: ChannelParams,
                   times: Sequence[float]) -> EvolutionCurve:
    times = validate_times(times)
    reports = [qcs_gaussian(evolve_gaussian(moments, channel, float(t))) for t in times]
    return EvolutionCurve(
        times=times,
        C=np.array([r.C for r in reports]),
        P=np.array([r.purity for r in reports]),
        kappa=np.array([r.kappa for r in reports]),
        method=CurveMethod.CLOSED_FORM_GAUSSIAN,
    )


# ---------------------------------------------------------------------------
# Fock-basis oracle
# ---------------------------------------------------------------------------


class _LindbladGenerator:
    """Lindblad right-hand side on a truncated number basis.

    Truncated a and a^dagger are used consistently in every term, so the trace
    is conserved exactly by the discrete generator.
    """

    def __init__(self, dim: int, channel: ChannelParams):
        n = np.arange(dim, dtype=float)
        raised = n + 1
        raised[-1] = 0.0
        self.dim = dim
        self.gamma = channel.gamma
        self.delta = channel.delta
        self.omega = channel.omega
        self.diagonal = (
            -0.5 * self.gamma * (n[:, None] + n[None, :])
            - 0.5 * self.delta * (raised[:, None] + raised[None, :])
        )
        self.rotation = -1j * self.omega * (n[:, None] - n[None, :])
        self.hopping = np.sqrt(np.outer(n[1:], n[1:]))
        # birth-death coefficients for diagonal inputs
        self.loss_rate = self.gamma * n + self.delta * raised
        self.down_rate = self.gamma * n[1:]
        self.up_rate = self.delta * n[1:]

    def matrix_rhs(self, rho: np.ndarray) -> np.ndarray:
        coefficient = self.diagonal + self.rotation if self.omega else self.diagonal
        out = coefficient * rho
        out[:-1, :-1] += self.gamma * self.hopping * rho[1:, 1:]
        out[1:, 1:] += self.delta * self.hopping * rho[:-1, :-1]
        return out

    def population_rhs(self, p: np.ndarray) -> np.ndarray:
        out = -self.loss_rate * p
        out[:-1] += self.down_rate * p[1:]
        out[1:] += self.up_rate * p[:-1]
        return out


def _rk4(rhs: Callable[[np.ndarray], np.ndarray], y: np.ndarray, t: float, dt: float) -> np.ndarray:
    steps = max(1, math.ceil(t / dt - 1e-9))
    h = t / steps
    for _ in range(steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def evolve_fock_oracle(matrix: FockDensityMatrix, channel: ChannelParams, t: float,
                       dt: Optional[float] = None,
                       tolerances: Tolerances = DEFAULT_TOLERANCES) -> FockDensityMatrix:
    """Integrate the full Lindblad generator with fixed-step RK4.

    Number-diagonal inputs are propagated through the birth-death population
    equations instead.  Leakage into the top level above leakage_tol raises
    CutoffTooSmall; trace drift above trace_tol raises StepTooLarge.
    """
    if not (t >= 0 and math.isfinite(t)):
        raise InvalidSpec(f"t must be finite and non-negative, got {t}")
    dt = tolerances.oracle_dt * channel.t_R if dt is None else dt
    if not dt > 0:
        raise InvalidSpec(f"dt must be positive, got {dt}")

    dim = matrix.dim
    occupied = matrix.support(tolerances.leakage_tol)
    if dim < 2 or occupied + 1 > ORACLE_HEADROOM * dim:
        raise CutoffTooSmall(
            f"Oracle cutoff {dim} leaves less than {1 - ORACLE_HEADROOM:.0%} headroom above support {occupied}"
        )
    if t == 0:
        return matrix

    generator = _LindbladGenerator(dim, channel)
    initial_trace = matrix.trace
    if matrix.is_diagonal():
        populations = _rk4(generator.population_rhs, matrix.populations, t, dt)
        rho = np.diag(populations)
    else:
        data = matrix.data
        if channel.omega == 0 and not np.any(data.imag):
            data = data.real.copy()
        rho = _rk4(generator.matrix_rhs, data, t, dt)

    if not np.all(np.isfinite(rho)):
        raise StepTooLarge(f"Oracle diverged with dt={dt:g}")
    drift = abs(float(np.trace(rho).real) - initial_trace)
    leakage = float(np.real(rho[-1, -1]))
    trace_logger.trace_oracle(max(1, math.ceil(t / dt - 1e-9)), drift, leakage)
    if drift > tolerances.trace_tol:
        raise StepTooLarge(f"Oracle trace drifted by {drift:.3e} with dt={dt:g}")
    if leakage > tolerances.leakage_tol:
        raise CutoffTooSmall(f"Population {leakage:.3e} reached the cutoff {dim}")
    return FockDensityMatrix(0.5 * (rho + np.conj(rho).T))


def oracle_matrix(state: State, cutoff: Optional[int] = None,
                  tolerances: Tolerances = DEFAULT_TOLERANCES) -> FockDensityMatrix:
    """Number-basis input for the oracle with room above the occupied levels.

    An explicit cutoff is used as given; otherwise the truncation is widened
    to half again the occupied support plus 20 levels.
    """
    matrix = to_fock_matrix(state, cutoff, tolerances).matrix
    if cutoff is not None:
        return matrix
    occupied = matrix.support(tolerances.leakage_tol)
    wanted = max(matrix.dim, math.ceil(1.5 * (occupied + 1)) + 20)
    if wanted == matrix.dim:
        return matrix
    if state.matrix is not None:
        return matrix.padded(wanted)
    return to_fock_matrix(state, wanted, tolerances).matrix


def oracle_curve(matrix: FockDensityMatrix, channel: ChannelParams, times: Sequence[float],
                 dt: Optional[float] = None,
                 tolerances: Tolerances = DEFAULT_TOLERANCES) -> EvolutionCurve:
    """C(t), P(t) from the Fock oracle, advanced sequentially between time points."""
    times = validate_times(times)
    started = time.perf_counter()
    current, clock = matrix, 0.0
    qcs_values, purities = [], []
    for t in times:
        current = evolve_fock_oracle(current, channel, float(t) - clock, dt, tolerances)
        clock = float(t)
        report = qcs_commutator(current, tolerances)
        qcs_values.append(report.C)
        purities.append(report.purity)
    event_logger.log_computation("oracle_curve", time.perf_counter() - started, True)
    return EvolutionCurve(
        times=times,
        C=np.array(qcs_values),
        P=np.array(purities),
        kappa=np.full(times.size, np.nan),
        method=CurveMethod.FOCK_ORACLE,
    )


# ---------------------------------------------------------------------------
# Effective ODEs
# ---------------------------------------------------------------------------


def qcs_rate(C: float, kappa: float, channel: ChannelParams) -> float:
    """dC/dt = (1/2t_R) [1 - kappa (2 nbar_inf + 1) C^2] C."""
    return (1 - kappa * (2 * channel.nbar_inf + 1) * C * C) * C / (2 * channel.t_R)


def purity_rate(C_squared: float, P: float, channel: ChannelParams) -> float:
    """dP/dt = (1/t_R) [1 - (2 nbar_inf + 1) C^2] P."""
    return (1 - (2 * channel.nbar_inf + 1) * C_squared) * P / channel.t_R


def gaussian_qcs_closed_form(C0: float, kappa0: float, channel: ChannelParams,
                             times: Sequence[float]) -> np.ndarray:
    """C(t) for constant kappa: C^2 = C0^2 / (e^{-t/t_R} + L (1 - e^{-t/t_R}))."""
    tau = np.asarray(times, dtype=float) / channel.t_R
    load = C0 * C0 * kappa0 * (2 * channel.nbar_inf + 1)
    decay = np.exp(-tau)
    return np.sqrt(C0 * C0 / (decay - load * np.expm1(-tau)))


def gaussian_purity_closed_form(C0: float, kappa0: float, channel: ChannelParams,
                                times: Sequence[float], P0: float = 1.0) -> np.ndarray:
    """P(t) = P0 e^{t/t_R} (1 + L (e^{t/t_R} - 1))^{-1/kappa0}."""
    tau = np.asarray(times, dtype=float) / channel.t_R
    load = C0 * C0 * kappa0 * (2 * channel.nbar_inf + 1)
    return P0 * np.exp(tau - np.log1p(load * np.expm1(tau)) / kappa0)


KappaPath = Union[float, Callable[[float], float]]


def ode_curve(C0: float, kappa_path: KappaPath, channel: ChannelParams, times: Sequence[float],
              P0: float = 1.0, closed_form: bool = True, rtol: float = 1e-11,
              atol: float = 1e-13) -> EvolutionCurve:
    """Integrate the effective QCS and purity ODEs.

    A constant ``kappa_path`` uses the closed form unless ``closed_form`` is
    False; a callable kappa(t) is always integrated numerically.
    """
    if not C0 > 0:
        raise InvalidSpec(f"C0 must be positive, got {C0}")
    times = validate_times(times)

    if not callable(kappa_path) and closed_form:
        kappa0 = float(kappa_path)
        return EvolutionCurve(
            times=times,
            C=gaussian_qcs_closed_form(C0, kappa0, channel, times),
            P=gaussian_purity_closed_form(C0, kappa0, channel, times, P0),
            kappa=np.full(times.size, kappa0),
            method=CurveMethod.ODE,
        )

    def kappa_at(t: float) -> float:
        return float(kappa_path(t)) if callable(kappa_path) else float(kappa_path)

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        C, log_p = y
        return [qcs_rate(C, kappa_at(t), channel), purity_rate(C * C, 1.0, channel)]

    span = (0.0, float(times[-1]))
    if span[1] == 0:
        C_values, log_p = np.array([C0]), np.array([math.log(P0)])
    else:
        solution = solve_ivp(rhs, span, [C0, math.log(P0)], method="DOP853",
                             t_eval=times, rtol=rtol, atol=atol)
        if not solution.success:
            raise StepTooLarge(f"ODE integration failed: {solution.message}")
        C_values, log_p = solution.y
    return EvolutionCurve(
        times=times,
        C=np.asarray(C_values),
        P=np.exp(log_p),
        kappa=np.array([kappa_at(t) for t in times]),
        method=CurveMethod.ODE,
    )


# ---------------------------------------------------------------------------
# Half-lives
# ---------------------------------------------------------------------------


class HalfLifeReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    tau_C_exact: Optional[float] = None
    tau_P_exact: Optional[float] = None
    tau_1_exact: Optional[float] = None
    tau_C_approx: Optional[float] = None
    tau_P_approx: Optional[float] = None
    tau_C_gaussian_approx: Optional[float] = None
    tau_C_gaussian_log: Optional[float] = None
    tau_P_gaussian_approx: Optional[float] = None
    tau_P_gaussian_solved: Optional[float] = None
    tau_1_gaussian_approx: Optional[float] = None
    tau_1_gaussian_log: Optional[float] = None
    not_applicable: Dict[str, str] = Field(default_factory=dict)
    C0: float
    kappa0: float
    P0: float
    nbar_inf: float
    t_R: float


class _MomentCache:
    """Memoized exact moments shared by the three half-life searches."""

    def __init__(self, state: State, channel: ChannelParams, tolerances: Tolerances,
                 convention: WeightConvention):
        self.state = state
        self.channel = channel
        self.tolerances = tolerances
        self.convention = convention
        self._values: Dict[float, RadialMoments] = {}

    def __call__(self, t: float) -> RadialMoments:
        if t not in self._values:
            self._values[t] = radial_moments_at(self.state, self.channel, t, self.tolerances, self.convention)
        return self._values[t]


def first_crossing(fn: Callable[[float], float], target: float, t_R: float, tol: float,
                   name: str = "crossing") -> float:
    """Earliest t with fn(t) = target, given fn(0) > target.

    [0, t_R] is scanned on a uniform grid (purity can dip below a level and
    recover), then the bracket doubles up to 64 t_R; bisection finishes to
    within tol.
    """
    previous = 0.0
    candidates = list(np.linspace(0.0, t_R, SCAN_POINTS + 1)[1:])
    upper = t_R
    while upper < BRACKET_LIMIT * t_R:
        upper *= 2
        candidates.append(upper)
    for candidate in candidates:
        if fn(candidate) <= target:
            break
        previous = candidate
    else:
        raise RootNotBracketed(f"{name}: target {target:.6g} not reached within {BRACKET_LIMIT:g} t_R")

    iteration = 0

    def shifted(t: float) -> float:
        nonlocal iteration
        value = fn(t) - target
        iteration += 1
        trace_logger.trace_bisection(name, iteration, t, value)
        return value

    if fn(candidate) == target:
        return float(candidate)
    return float(bisect(shifted, previous, candidate, xtol=tol))


def _solve_gaussian_purity_halflife(kappa0: float, load: float) -> Optional[float]:
    """tau/t_R solving 1 + z = 2^kappa (1 + z/L)^kappa with z = L (e^{tau} - 1)."""

    def residual(z: float) -> float:
        return 1 + z - 2 ** kappa0 * (1 + z / load) ** kappa0

    grid = np.geomspace(1e-8, 1e6 * max(load, 1.0), 400)
    values = [residual(z) for z in grid]
    for lo, hi, v_lo, v_hi in zip(grid[:-1], grid[1:], values[:-1], values[1:]):
        if v_lo < 0 <= v_hi:
            z = brentq(residual, lo, hi, xtol=1e-14)
            return math.log1p(z / load)
    return None


def gaussian_half_lives(c0_squared: float, kappa0: float,
                        channel: ChannelParams) -> Tuple[Dict[str, float], Dict[str, str]]:
    """Closed-form Gaussian half-lives from C0^2 and kappa0, with reasons for the skipped ones.

    For physical Gaussian states kappa0 sits within 1/C0^4 of 2 once C0^2 is
    large, where tau_P_gaussian_approx exceeds tau_C_gaussian_approx by a
    factor of at most 1 + 2/((2 nbar_inf + 1) C0^2 - 4).
    """
    thermal = 2 * channel.nbar_inf + 1
    t_R = channel.t_R
    load = kappa0 * thermal * c0_squared
    values: Dict[str, float] = {}
    skipped: Dict[str, str] = {}

    if load > 4:
        values["tau_C_gaussian_approx"] = 3 * t_R / (load - 4)
        values["tau_C_gaussian_log"] = t_R * math.log1p(3 / (load - 4))
    else:
        skipped["tau_C_gaussian"] = "requires kappa0 (2 nbar_inf + 1) C0^2 > 4"
    power = 2 ** kappa0
    if thermal * c0_squared > power:
        values["tau_P_gaussian_approx"] = t_R * (power - 1) / ((thermal * c0_squared - power) * kappa0)
        solved = _solve_gaussian_purity_halflife(kappa0, load)
        if solved is not None:
            values["tau_P_gaussian_solved"] = t_R * solved
        else:
            skipped["tau_P_gaussian_solved"] = "no positive root"
    else:
        skipped["tau_P_gaussian"] = "requires (2 nbar_inf + 1) C0^2 > 2^kappa0"
    ratio = kappa0 * thermal
    if c0_squared > 1 and ratio > 1:
        values["tau_1_gaussian_log"] = t_R * math.log1p((1 - 1 / c0_squared) / (ratio - 1))
        expansion = math.log(ratio / (ratio - 1)) - 1 / load
        if expansion > 0:
            values["tau_1_gaussian_approx"] = t_R * expansion
        else:
            skipped["tau_1_gaussian_approx"] = "large-C0 expansion is not positive"
    else:
        skipped["tau_1_gaussian"] = "requires C0 > 1 and kappa0 (2 nbar_inf + 1) > 1"
    return values, skipped


def halflife(state: State, channel: ChannelParams, tolerances: Tolerances = DEFAULT_TOLERANCES,
             convention: WeightConvention = WeightConvention.DERIVED) -> HalfLifeReport:
    """Exact half-lives by root-finding on evolve_exact plus the closed-form approximations."""
    started = time.perf_counter()
    moments = _MomentCache(state, channel, tolerances, convention)
    initial = moments(0.0)
    c0_squared = initial.qcs_squared
    C0 = math.sqrt(c0_squared)
    P0 = initial.purity
    kappa0 = initial.kappa
    if state.moments is not None:
        gaussian = qcs_gaussian(state.moments)
        kappa0 = gaussian.kappa
    thermal = 2 * channel.nbar_inf + 1
    t_R = channel.t_R
    tol = tolerances.halflife_tol * t_R
    values: Dict[str, Optional[float]] = {}
    skipped: Dict[str, str] = {}

    # exact
    asymptote = channel.asymptotic_qcs_squared
    if c0_squared / 4 > asymptote:
        values["tau_C_exact"] = first_crossing(
            lambda t: moments(t).qcs_squared, c0_squared / 4, t_R, tol, "tau_C")
    else:
        skipped["tau_C_exact"] = "C0/2 does not exceed the asymptotic QCS"
    try:
        values["tau_P_exact"] = first_crossing(lambda t: moments(t).purity, P0 / 2, t_R, tol, "tau_P")
    except RootNotBracketed:
        if P0 / 2 >= 1 / thermal:
            raise
        skipped["tau_P_exact"] = "purity never falls to P0/2"
    if c0_squared > 1 and asymptote < 1:
        values["tau_1_exact"] = first_crossing(lambda t: moments(t).qcs_squared, 1.0, t_R, tol, "tau_1")
    else:
        skipped["tau_1_exact"] = "requires C0 > 1 and nbar_inf > 0"

    # approximations
    load = kappa0 * thermal * c0_squared
    if load > 1:
        values["tau_C_approx"] = t_R / (load - 1)
    else:
        skipped["tau_C_approx"] = "requires kappa0 (2 nbar_inf + 1) C0^2 > 1"
    if thermal * c0_squared > 1:
        values["tau_P_approx"] = 0.5 * t_R / (thermal * c0_squared - 1)
    else:
        skipped["tau_P_approx"] = "requires (2 nbar_inf + 1) C0^2 > 1"

    if state.moments is not None:
        gaussian_values, gaussian_skipped = gaussian_half_lives(c0_squared, kappa0, channel)
        values.update(gaussian_values)
        skipped.update(gaussian_skipped)
    else:
        skipped["gaussian_variants"] = "state is not Gaussian"

    report = HalfLifeReport(
        **values,
        not_applicable=skipped,
        C0=C0,
        kappa0=kappa0,
        P0=P0,
        nbar_inf=channel.nbar_inf,
        t_R=t_R,
    )
    event_logger.log_computation(f"halflife[{state.family}]", time.perf_counter() - started, True)
    return report
