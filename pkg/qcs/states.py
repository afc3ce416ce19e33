"""State specifications, validated representations and number-basis conversion."""

import json
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, FiniteFloat, TypeAdapter, ValidationError, model_validator
from scipy.linalg import expm
from scipy.optimize import brentq
from scipy.special import gammaln

from qcs.errors import CutoffTooSmall, InvalidSpec, Unphysical
from qcs.tolerances import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)

MAX_AUTO_CUTOFF = 4096
_DET_SLACK = 1e-12


# ---------------------------------------------------------------------------
# Specs
# ---------------------------------------------------------------------------

Amplitude = Tuple[FiniteFloat, FiniteFloat]


class _SpecBase(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    @model_validator(mode="before")
    @classmethod
    def _real_amplitude(cls, data: Any) -> Any:
        # "alpha": 2.0 is shorthand for [2.0, 0.0]
        if isinstance(data, dict) and isinstance(data.get("alpha"), (int, float)):
            data = {**data, "alpha": [float(data["alpha"]), 0.0]}
        return data


class FockSpec(_SpecBase):
    family: Literal["fock"] = "fock"
    n: int = Field(ge=0)


class CoherentSpec(_SpecBase):
    family: Literal["coherent"] = "coherent"
    alpha: Amplitude


class CatSpec(_SpecBase):
    """Even cat state (|alpha> + |-alpha>) / sqrt(N)."""

    family: Literal["cat"] = "cat"
    alpha: Amplitude


class ThermalSpec(_SpecBase):
    family: Literal["thermal"] = "thermal"
    nbar: FiniteFloat = Field(ge=0)


class EvenMixtureSpec(_SpecBase):
    """Uniform mixture of |2>, |4>, ..., |2M>."""

    family: Literal["even_mixture"] = "even_mixture"
    M: int = Field(ge=1)


class SqueezedThermalSpec(_SpecBase):
    family: Literal["squeezed_thermal"] = "squeezed_thermal"
    beta: FiniteFloat = Field(gt=0)
    r: FiniteFloat
    phi: FiniteFloat = 0.0


class GaussianSpec(_SpecBase):
    family: Literal["gaussian"] = "gaussian"
    V: Tuple[Tuple[FiniteFloat, FiniteFloat], Tuple[FiniteFloat, FiniteFloat]]
    mean: Amplitude = (0.0, 0.0)

    @model_validator(mode="after")
    def _symmetric(self) -> "GaussianSpec":
        (v11, v12), (v21, v22) = self.V
        if abs(v12 - v21) > 1e-12 * max(abs(v11), abs(v22), 1.0):
            raise ValueError("covariance matrix V must be symmetric")
        return self


class MatrixPayload(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    real: List[List[FiniteFloat]]
    imag: Optional[List[List[FiniteFloat]]] = None

    @model_validator(mode="after")
    def _square(self) -> "MatrixPayload":
        size = len(self.real)
        if size == 0 or any(len(row) != size for row in self.real):
            raise ValueError("matrix.real must be a non-empty square array")
        if self.imag is not None:
            if len(self.imag) != size or any(len(row) != size for row in self.imag):
                raise ValueError("matrix.imag must match the shape of matrix.real")
        return self

    def to_array(self) -> np.ndarray:
        data = np.array(self.real, dtype=complex)
        if self.imag is not None:
            data = data + 1j * np.array(self.imag, dtype=float)
        return data

    @classmethod
    def from_array(cls, data: np.ndarray) -> "MatrixPayload":
        data = np.asarray(data)
        imag = data.imag.tolist() if np.iscomplexobj(data) and np.any(data.imag) else None
        return cls(real=np.real(data).tolist(), imag=imag)


class FockMatrixSpec(_SpecBase):
    family: Literal["fock_matrix"] = "fock_matrix"
    matrix: MatrixPayload


StateSpec = Annotated[
    Union[
        FockSpec,
        CoherentSpec,
        CatSpec,
        ThermalSpec,
        EvenMixtureSpec,
        SqueezedThermalSpec,
        GaussianSpec,
        FockMatrixSpec,
    ],
    Field(discriminator="family"),
]

STATE_SPEC_ADAPTER: TypeAdapter = TypeAdapter(StateSpec)

_SHORTHAND_ALIASES = {
    "fock": "fock",
    "vacuum": "fock",
    "coherent": "coherent",
    "cat": "cat",
    "thermal": "thermal",
    "even": "even_mixture",
    "even_mixture": "even_mixture",
    "squeezed": "squeezed_thermal",
    "squeezed_thermal": "squeezed_thermal",
}


def parse_state_spec(source: Union[str, Dict[str, Any], BaseModel]) -> BaseModel:
    """Parse a state spec from JSON text, a shorthand string or a mapping."""
    if isinstance(source, BaseModel):
        return source
    try:
        if isinstance(source, str):
            text = source.strip()
            if text.startswith("{"):
                return STATE_SPEC_ADAPTER.validate_json(text)
            return STATE_SPEC_ADAPTER.validate_python(_parse_shorthand(text))
        return STATE_SPEC_ADAPTER.validate_python(source)
    except ValidationError as exc:
        raise InvalidSpec(f"Invalid state spec: {exc}") from exc


def _parse_shorthand(text: str) -> Dict[str, Any]:
    """``family:params`` such as fock:5, even:4, thermal:5, coherent:1.3,-0.2,
    cat:2.236, cat:qcs2=11 or squeezed:1.8,1.84[,phi]."""
    name, _, params = text.partition(":")
    family = _SHORTHAND_ALIASES.get(name.strip().lower())
    if family is None:
        raise InvalidSpec(f"Unknown state family in shorthand: {text!r}")
    if name.strip().lower() == "vacuum":
        return {"family": "fock", "n": 0}

    if family == "cat" and params.strip().startswith("qcs2="):
        target = _to_float(params.strip()[len("qcs2="):], text)
        return {"family": "cat", "alpha": [cat_amplitude_for_qcs(math.sqrt(target)), 0.0]}

    values = [_to_float(item, text) for item in params.split(",") if item.strip()]
    try:
        if family == "fock":
            (n,) = values
            if n != int(n):
                raise InvalidSpec(f"Fock number must be an integer: {text!r}")
            return {"family": "fock", "n": int(n)}
        if family == "even_mixture":
            (m,) = values
            if m != int(m):
                raise InvalidSpec(f"Mixture size must be an integer: {text!r}")
            return {"family": "even_mixture", "M": int(m)}
        if family == "thermal":
            (nbar,) = values
            return {"family": "thermal", "nbar": nbar}
        if family in ("coherent", "cat"):
            re_part, im_part = (values + [0.0])[:2] if len(values) in (1, 2) else (None, None)
            if re_part is None:
                raise ValueError
            return {"family": family, "alpha": [re_part, im_part]}
        beta, r, *rest = values
        if len(rest) > 1:
            raise ValueError
        return {"family": "squeezed_thermal", "beta": beta, "r": r, "phi": rest[0] if rest else 0.0}
    except ValueError as exc:
        raise InvalidSpec(f"Wrong number of parameters in shorthand: {text!r}") from exc


def _to_float(value: str, text: str) -> float:
    try:
        return float(value)
    except ValueError as exc:
        raise InvalidSpec(f"Non-numeric parameter {value!r} in {text!r}") from exc


def spec_to_dict(spec: BaseModel) -> Dict[str, Any]:
    return json.loads(spec.model_dump_json())


# ---------------------------------------------------------------------------
# Representations
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FockDensityMatrix:
    """Number-basis density matrix, stored exactly Hermitian and read-only."""

    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise InvalidSpec(f"Density matrix must be square, got shape {data.shape}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @classmethod
    def validated(cls, data: np.ndarray, tolerances: Tolerances = DEFAULT_TOLERANCES,
                  allow_deficit: bool = False) -> "FockDensityMatrix":
        """Check Hermiticity, trace and positivity, then store the Hermitian part.

        With ``allow_deficit`` a trace below one (from truncation) is accepted;
        the caller reports the deficit.
        """
        data = np.asarray(data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1] or data.size == 0:
            raise InvalidSpec(f"Density matrix must be a non-empty square array, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise InvalidSpec("Density matrix has non-finite entries")
        asymmetry = float(np.max(np.abs(data - data.conj().T)))
        if asymmetry > tolerances.psd_tol:
            raise Unphysical(f"Density matrix is not Hermitian (max asymmetry {asymmetry:.3e})")
        hermitian = 0.5 * (data + data.conj().T)

        trace = float(np.trace(hermitian).real)
        if trace > 1.0 + tolerances.trace_tol or (not allow_deficit and trace < 1.0 - tolerances.trace_tol):
            raise Unphysical(f"Density matrix trace {trace:.12g} is not 1")

        smallest = float(np.linalg.eigvalsh(hermitian)[0])
        if smallest < -tolerances.psd_tol:
            raise Unphysical(f"Density matrix has negative eigenvalue {smallest:.3e}")
        return cls(hermitian)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def populations(self) -> np.ndarray:
        return np.diagonal(self.data).real.copy()

    @property
    def trace(self) -> float:
        return float(np.trace(self.data).real)

    @property
    def purity(self) -> float:
        # Tr rho^2 = sum |rho_mn|^2 for Hermitian rho
        return float(np.vdot(self.data, self.data).real)

    def is_diagonal(self, atol: float = 0.0) -> bool:
        off = self.data - np.diag(np.diagonal(self.data))
        return bool(np.max(np.abs(off), initial=0.0) <= atol)

    def support(self, threshold: float = 1e-16) -> int:
        """Highest number state with population above threshold (0 if none)."""
        occupied = np.flatnonzero(self.populations > threshold)
        return int(occupied[-1]) if occupied.size else 0

    def padded(self, cutoff: int) -> "FockDensityMatrix":
        if cutoff <= self.dim:
            return FockDensityMatrix(self.data[:cutoff, :cutoff])
        data = np.zeros((cutoff, cutoff), dtype=complex)
        data[: self.dim, : self.dim] = self.data
        return FockDensityMatrix(data)


@dataclass(frozen=True, eq=False)
class GaussianMoments:
    """Covariance V (V11 = 2 Tr rho X^2 for centred states) and mean (<X>, <P>)."""

    V: np.ndarray
    mean: np.ndarray

    def __post_init__(self):
        cov = np.array(self.V, dtype=float).reshape(2, 2)
        mean = np.array(self.mean, dtype=float).reshape(2)
        cov.setflags(write=False)
        mean.setflags(write=False)
        object.__setattr__(self, "V", cov)
        object.__setattr__(self, "mean", mean)

    @classmethod
    def validated(cls, V: Any, mean: Any = (0.0, 0.0)) -> "GaussianMoments":
        cov = np.array(V, dtype=float).reshape(2, 2)
        if not np.all(np.isfinite(cov)) or not np.all(np.isfinite(mean)):
            raise InvalidSpec("Gaussian moments must be finite")
        if abs(cov[0, 1] - cov[1, 0]) > 1e-12 * max(abs(cov[0, 0]), abs(cov[1, 1]), 1.0):
            raise InvalidSpec("Covariance matrix must be symmetric")
        cov[1, 0] = cov[0, 1]
        if cov[0, 0] <= 0 or np.linalg.det(cov) <= 0:
            raise Unphysical("Covariance matrix must be positive definite")
        det = float(np.linalg.det(cov))
        if det < 1.0 - _DET_SLACK:
            raise Unphysical(f"Covariance determinant {det:.12g} violates det V >= 1")
        return cls(cov, np.asarray(mean, dtype=float))

    @property
    def det(self) -> float:
        return float(self.V[0, 0] * self.V[1, 1] - self.V[0, 1] * self.V[1, 0])

    @property
    def sigma_x2(self) -> float:
        return float(self.V[0, 0] / 2)

    @property
    def sigma_p2(self) -> float:
        return float(self.V[1, 1] / 2)

    @property
    def sigma_xp(self) -> float:
        return float(self.V[0, 1] / 2)

    @property
    def eigenvalues(self) -> Tuple[float, float]:
        low, high = np.linalg.eigvalsh(self.V)
        return float(low), float(high)


@dataclass(frozen=True, eq=False)
class State:
    """Immutable state handle.

    Gaussian families (thermal, coherent, squeezed_thermal, gaussian) carry
    their moments; fock_matrix carries its matrix; the remaining analytic
    families are described by the spec alone.
    """

    spec: BaseModel
    moments: Optional[GaussianMoments] = None
    matrix: Optional[FockDensityMatrix] = None

    @property
    def family(self) -> str:
        return self.spec.family

    @property
    def alpha(self) -> complex:
        re_part, im_part = self.spec.alpha
        return complex(re_part, im_part)

    @property
    def rotation_invariant(self) -> bool:
        return self.family in ("fock", "thermal", "even_mixture")

    @property
    def is_pure(self) -> bool:
        if self.family in ("fock", "coherent", "cat"):
            return True
        if self.moments is not None:
            return abs(self.moments.det - 1.0) <= 1e-9
        if self.matrix is not None:
            return abs(self.matrix.purity - 1.0) <= 1e-9
        return False


def squeezed_thermal_covariance(beta: float, r: float, phi: float = 0.0) -> np.ndarray:
    """V = beta * R(phi/2) diag(e^{-2r}, e^{2r}) R(phi/2)^T."""
    c, s = math.cos(phi / 2), math.sin(phi / 2)
    rotation = np.array([[c, -s], [s, c]])
    return beta * rotation @ np.diag([math.exp(-2 * r), math.exp(2 * r)]) @ rotation.T


def build_state(spec: Union[BaseModel, str, Dict[str, Any]],
                tolerances: Tolerances = DEFAULT_TOLERANCES) -> State:
    """Validate a spec and return the corresponding immutable State."""
    spec = parse_state_spec(spec)
    family = spec.family

    if family in ("fock", "cat", "even_mixture"):
        return State(spec)
    if family == "thermal":
        return State(spec, moments=GaussianMoments(np.eye(2) * (1 + 2 * spec.nbar), np.zeros(2)))
    if family == "coherent":
        alpha = complex(*spec.alpha)
        mean = math.sqrt(2) * np.array([alpha.real, alpha.imag])
        return State(spec, moments=GaussianMoments(np.eye(2), mean))
    if family == "squeezed_thermal":
        if spec.beta < 1.0 - _DET_SLACK:
            raise Unphysical(f"squeezed_thermal needs beta >= 1, got {spec.beta}")
        cov = squeezed_thermal_covariance(spec.beta, spec.r, spec.phi)
        return State(spec, moments=GaussianMoments.validated(cov))
    if family == "gaussian":
        return State(spec, moments=GaussianMoments.validated(spec.V, spec.mean))
    if family == "fock_matrix":
        matrix = FockDensityMatrix.validated(spec.matrix.to_array(), tolerances)
        return State(spec, matrix=matrix)
    raise InvalidSpec(f"Unknown family {family!r}")


def state_from_matrix(data: np.ndarray, tolerances: Tolerances = DEFAULT_TOLERANCES) -> State:
    """Wrap an explicit number-basis matrix (e.g. an evolved oracle state)."""
    matrix = FockDensityMatrix.validated(data, tolerances, allow_deficit=True)
    spec = FockMatrixSpec(matrix=MatrixPayload.from_array(matrix.data))
    return State(spec, matrix=matrix)


# ---------------------------------------------------------------------------
# Scalar properties
# ---------------------------------------------------------------------------


def mean_photon_number(state: State) -> float:
    """Tr(rho a^dagger a)."""
    family = state.family
    spec = state.spec
    if family == "fock":
        return float(spec.n)
    if family == "thermal":
        return float(spec.nbar)
    if family == "even_mixture":
        return float(spec.M + 1)
    if family == "coherent":
        return abs(state.alpha) ** 2
    if family == "cat":
        a = abs(state.alpha) ** 2
        return a * math.tanh(a)
    if state.moments is not None:
        moments = state.moments
        return float((np.trace(moments.V) - 2) / 4 + moments.mean @ moments.mean / 2)
    return float(np.arange(state.matrix.dim) @ state.matrix.populations)


def mean_amplitude(state: State) -> complex:
    """<a>; zero for the phase-symmetric families."""
    if state.family in ("fock", "thermal", "even_mixture", "cat"):
        return 0j
    if state.family == "coherent":
        return state.alpha
    if state.moments is not None:
        mu_x, mu_p = state.moments.mean
        return complex(mu_x, mu_p) / math.sqrt(2)
    data = state.matrix.data
    n = np.arange(1, state.matrix.dim)
    return complex(np.sum(np.sqrt(n) * np.diagonal(data, offset=-1)))


def total_noise(state: State) -> float:
    """Delta X^2 + Delta P^2 = 2<n> + 1 - 2|<a>|^2."""
    return 2 * mean_photon_number(state) + 1 - 2 * abs(mean_amplitude(state)) ** 2


def cat_amplitude_for_qcs(qcs: float) -> float:
    """|alpha| of the even cat whose QCS is ``qcs`` (solves 1 + 2a tanh a = C^2, a = |alpha|^2)."""
    target = qcs * qcs
    if not math.isfinite(target) or target < 1.0:
        raise InvalidSpec(f"Even cat states have C >= 1, got C = {qcs}")
    if target == 1.0:
        return 0.0
    a = brentq(lambda x: 1 + 2 * x * math.tanh(x) - target, 0.0, target, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return math.sqrt(a)


# ---------------------------------------------------------------------------
# Number-basis conversion
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FockTruncation:
    matrix: FockDensityMatrix
    deficit: float
    cutoff: int


def default_cutoff(state: State, trace_tol: float = DEFAULT_TOLERANCES.trace_tol) -> int:
    """ceil(8 (<n> + 1) + 10), widened for strongly squeezed Gaussian tails."""
    if state.matrix is not None:
        return state.matrix.dim
    cutoff = math.ceil(8 * (mean_photon_number(state) + 1) + 10)
    if state.family in ("squeezed_thermal", "gaussian"):
        low, high = state.moments.eigenvalues
        ratio = (high - 1) / (high + 1)
        if ratio > 0:
            cutoff = max(cutoff, math.ceil(math.log(trace_tol) / math.log(ratio)) + 10)
    return cutoff


def coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    """<n|alpha> for n < cutoff, computed through logarithms."""
    n = np.arange(cutoff)
    if alpha == 0:
        amplitudes = np.zeros(cutoff, dtype=complex)
        amplitudes[0] = 1.0
        return amplitudes
    log_abs = -0.5 * abs(alpha) ** 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(log_abs) * np.exp(1j * n * np.angle(alpha))


def ladder_operator(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1)


def _gaussian_matrix(moments: GaussianMoments, cutoff: int) -> np.ndarray:
    """rho = D(alpha) U(theta) S(r) rho_th S(r)^dagger U(theta)^dagger D(alpha)^dagger."""
    working = cutoff + cutoff // 2 + 20
    nu = math.sqrt(moments.det)
    n_th = max((nu - 1) / 2, 0.0)
    evals, evecs = np.linalg.eigh(moments.V)
    if np.linalg.det(evecs) < 0:
        evecs[:, 1] *= -1
    squeeze = 0.25 * math.log(evals[1] / evals[0])
    theta = math.atan2(evecs[0, 1], evecs[0, 0])

    n = np.arange(working)
    if n_th > 0:
        q = n_th / (1 + n_th)
        rho = np.diag((1 - q) * q ** n).astype(complex)
    else:
        rho = np.zeros((working, working), dtype=complex)
        rho[0, 0] = 1.0

    a = ladder_operator(working)
    if squeeze > 0:
        generator = 0.5 * squeeze * (a @ a - a.T @ a.T)
        s = expm(generator)
        rho = s @ rho @ s.conj().T
    phases = np.exp(-1j * theta * n)
    rho = phases[:, None] * rho * phases.conj()[None, :]

    alpha = complex(moments.mean[0], moments.mean[1]) / math.sqrt(2)
    if alpha != 0:
        d = expm(alpha * a.T - alpha.conjugate() * a)
        rho = d @ rho @ d.conj().T
    return rho[:cutoff, :cutoff]


def _matrix_for(state: State, cutoff: int) -> np.ndarray:
    family = state.family
    spec = state.spec
    n = np.arange(cutoff)
    if family == "fock":
        rho = np.zeros((cutoff, cutoff), dtype=complex)
        if spec.n < cutoff:
            rho[spec.n, spec.n] = 1.0
        return rho
    if family == "thermal":
        q = spec.nbar / (1 + spec.nbar)
        return np.diag((1 - q) * q ** n).astype(complex)
    if family == "even_mixture":
        populations = np.zeros(cutoff)
        levels = 2 * np.arange(1, spec.M + 1)
        populations[levels[levels < cutoff]] = 1.0 / spec.M
        return np.diag(populations).astype(complex)
    if family == "coherent":
        vector = coherent_amplitudes(state.alpha, cutoff)
        return np.outer(vector, vector.conj())
    if family == "cat":
        alpha = state.alpha
        norm = 2 * (1 + math.exp(-2 * abs(alpha) ** 2))
        vector = np.where(n % 2 == 0, 2 * coherent_amplitudes(alpha, cutoff), 0) / math.sqrt(norm)
        return np.outer(vector, vector.conj())
    if family == "fock_matrix":
        return state.matrix.padded(cutoff).data
    return _gaussian_matrix(state.moments, cutoff)


@lru_cache(maxsize=64)
def _truncate(state: State, cutoff: int) -> Tuple[np.ndarray, float]:
    rho = _matrix_for(state, cutoff)
    rho = 0.5 * (rho + rho.conj().T)
    rho.setflags(write=False)
    if state.matrix is not None:
        deficit = state.matrix.trace - float(np.trace(rho).real)
    else:
        deficit = 1.0 - float(np.trace(rho).real)
    return rho, max(deficit, 0.0)


def to_fock_matrix(state: State, cutoff: Optional[int] = None,
                   tolerances: Tolerances = DEFAULT_TOLERANCES) -> FockTruncation:
    """Truncated number-basis matrix plus its trace deficit.

    With ``cutoff=None`` the default heuristic is used and widened until the
    deficit drops below trace_tol; an explicit cutoff that loses more than
    trace_tol raises CutoffTooSmall.
    """
    if cutoff is not None and cutoff < 1:
        raise InvalidSpec(f"cutoff must be >= 1, got {cutoff}")
    automatic = cutoff is None
    size = default_cutoff(state, tolerances.trace_tol) if automatic else int(cutoff)

    while True:
        rho, deficit = _truncate(state, size)
        if deficit <= tolerances.trace_tol:
            break
        if not automatic or state.matrix is not None or size >= MAX_AUTO_CUTOFF:
            raise CutoffTooSmall(
                f"Cutoff {size} keeps trace {1 - deficit:.12g}; deficit exceeds {tolerances.trace_tol:g}"
            )
        size = min(MAX_AUTO_CUTOFF, math.ceil(size * 1.25))
        logger.debug(f"Widening {state.family} cutoff to {size} (deficit {deficit:.3e})")

    return FockTruncation(FockDensityMatrix(rho), deficit, size)
