import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Literal, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from qcs import __version__
from qcs.channel import (
    ChannelParams,
    evolve_exact,
    evolve_fock_oracle,
    gaussian_curve,
    halflife,
    ode_curve,
    oracle_curve,
    oracle_matrix,
)
from qcs.charfn import WeightConvention
from qcs.errors import InvalidSpec, UnsupportedFamily
from qcs.metrics import nonclassicality_bounds, qcs
from qcs.phase_space import (
    Grid2D,
    default_wigner_grid,
    interference_profile,
    kernel_coherence_integral,
    position_kernel,
    wigner_grid,
    wigner_integrals,
)
from qcs.states import State, build_state, state_from_matrix
from qcs.tolerances import DEFAULT_TOLERANCES, Tolerances
from validation.orchestrator import run_validation

logger = logging.getLogger(__name__)

OutputFormat = Literal["csv", "json", "raster"]


class GridOverride(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    half_width: float = Field(gt=0)
    points: int = Field(ge=5)

    def to_grid(self) -> Grid2D:
        return Grid2D.square(self.half_width, self.points)


class RunConfig(BaseModel):
    """One resolved CLI invocation; everything but threads and out is echoed."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    command: str
    version: str = __version__
    state: Dict[str, Any]
    channel: ChannelParams = Field(default_factory=ChannelParams)
    method: Literal["exact", "closed-form", "ode", "oracle"] = "exact"
    convention: WeightConvention = WeightConvention.DERIVED
    t_max: float = Field(0.0, ge=0)
    dt: float = Field(0.01, gt=0)
    times: Optional[List[float]] = None
    t: List[float] = Field(default_factory=lambda: [0.0])
    cutoff: Optional[int] = Field(None, ge=1)
    grid: Optional[GridOverride] = None
    ell: List[float] = Field(default_factory=lambda: [1.0])
    n: List[int] = Field(default_factory=lambda: list(range(13)))
    tolerances: Tolerances = DEFAULT_TOLERANCES
    format: OutputFormat = "json"
    threads: int = Field(1, ge=1)
    out: Optional[str] = None

    @model_validator(mode="after")
    def _check_lists(self) -> "RunConfig":
        for name in ("n", "ell", "t"):
            if not getattr(self, name):
                raise ValueError(f"{name} must list at least one value")
        if any(not ell > 0 for ell in self.ell):
            raise ValueError("ell values must be positive")
        if any(n < 0 for n in self.n):
            raise ValueError("n values must be non-negative")
        if any(not (t >= 0 and math.isfinite(t)) for t in self.t):
            raise ValueError("t values must be finite and non-negative")
        return self

    def resolved_times(self) -> np.ndarray:
        if self.times is not None:
            return np.asarray(self.times, dtype=float)
        steps = int(math.floor(self.t_max / self.dt + 1e-9))
        times = np.round(np.arange(steps + 1) * self.dt, 12)
        if self.t_max - times[-1] > 1e-12:
            times = np.append(times, self.t_max)
        return times

    def echo(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", exclude={"threads", "out"})


@dataclass
class CommandOutput:
    kind: OutputFormat
    payload: Any
    exit_code: int = 0


class CommandDefinition(BaseModel):
    name: str
    description: str
    default_format: OutputFormat
    formats: List[OutputFormat]


class CommandRegistry:
    def __init__(self):
        self.commands: Dict[str, Callable[[RunConfig], CommandOutput]] = {}
        self.command_definitions: Dict[str, CommandDefinition] = {}

    def register_command(self, name: str, func: Callable[[RunConfig], CommandOutput],
                         description: str, formats: List[OutputFormat]):
        self.commands[name] = func
        self.command_definitions[name] = CommandDefinition(
            name=name,
            description=description,
            default_format=formats[0],
            formats=formats,
        )

    def run(self, config: RunConfig) -> CommandOutput:
        if config.command not in self.commands:
            raise InvalidSpec(f"Unknown command {config.command!r}")
        definition = self.command_definitions[config.command]
        if config.format not in definition.formats:
            raise InvalidSpec(f"{config.command} does not support --format {config.format}")
        logger.info(f"Running {config.command} on {config.state.get('family')}")
        return self.commands[config.command](config)


def _state(config: RunConfig) -> State:
    return build_state(config.state, config.tolerances)


def _one_row(payload: Dict[str, Any]) -> pd.DataFrame:
    return pd.DataFrame([payload])


def cmd_qcs(config: RunConfig) -> CommandOutput:
    report = qcs(_state(config), config.tolerances)
    lower, upper = nonclassicality_bounds(report.C)
    if config.format == "csv":
        row = report.model_dump(mode="json")
        row.update(distance_lower=lower, distance_upper=upper)
        return CommandOutput("csv", _one_row(row))
    return CommandOutput("json", {
        "config": config.echo(),
        "report": report.model_dump(mode="json"),
        "nonclassicality_bounds": {"lower": lower, "upper": upper},
    })


def cmd_evolve(config: RunConfig) -> CommandOutput:
    state = _state(config)
    times = config.resolved_times()
    tolerances = config.tolerances
    if config.method == "exact":
        curve = evolve_exact(state, config.channel, times, tolerances, config.threads, config.convention)
    elif config.method == "closed-form":
        if state.moments is None:
            raise UnsupportedFamily(f"--method closed-form needs a Gaussian state, got {state.family}")
        curve = gaussian_curve(state.moments, config.channel, times)
    elif config.method == "ode":
        initial = qcs(state, tolerances)
        curve = ode_curve(initial.C, initial.kappa, config.channel, times, P0=initial.purity)
    else:
        matrix = oracle_matrix(state, config.cutoff, tolerances)
        curve = oracle_curve(matrix, config.channel, times, tolerances.oracle_dt * config.channel.t_R, tolerances)
    frame = curve.to_frame()
    if config.format == "json":
        return CommandOutput("json", {"config": config.echo(), "curve": frame.to_dict(orient="list")})
    return CommandOutput("csv", frame)


def cmd_halflife(config: RunConfig) -> CommandOutput:
    report = halflife(_state(config), config.channel, config.tolerances, config.convention)
    if config.format == "csv":
        row = report.model_dump(mode="json", exclude={"not_applicable"})
        return CommandOutput("csv", _one_row(row))
    return CommandOutput("json", {"config": config.echo(), "report": report.model_dump(mode="json")})


def cmd_interference(config: RunConfig) -> CommandOutput:
    state = _state(config)
    tolerances = config.tolerances
    grid = config.grid.to_grid() if config.grid else None
    rows = []
    start = oracle_matrix(state, config.cutoff, tolerances) if any(config.t) else None
    for t in sorted(config.t):
        if t > 0:
            evolved = evolve_fock_oracle(start, config.channel, t, tolerances=tolerances)
            current = state_from_matrix(np.asarray(evolved.data), tolerances)
            cutoff = None
        else:
            current, cutoff = state, config.cutoff
        for report in interference_profile(current, config.n, config.ell, grid, cutoff, tolerances):
            for ell in config.ell:
                rows.append({
                    "t": t,
                    "n": report.n,
                    "ell": ell,
                    "p_N": report.p_N,
                    "p_diag": report.p_diag_ell[float(ell)],
                    "residual": report.residual[float(ell)],
                })
    frame = pd.DataFrame(rows, columns=["t", "n", "ell", "p_N", "p_diag", "residual"])
    if config.format == "json":
        return CommandOutput("json", {"config": config.echo(), "rows": frame.to_dict(orient="records")})
    return CommandOutput("csv", frame)


def cmd_wigner(config: RunConfig) -> CommandOutput:
    state = _state(config)
    grid = config.grid.to_grid() if config.grid else default_wigner_grid(state, tolerances=config.tolerances)
    wigner = wigner_grid(state, grid, config.cutoff, config.tolerances)
    integral, purity = wigner_integrals(wigner)
    logger.info(f"Wigner grid {wigner.n1}x{wigner.n2}: integral {integral:.9f}, pi ||W||^2 {purity:.9f}")
    if config.format == "raster":
        return CommandOutput("raster", wigner)
    if config.format == "json":
        return CommandOutput("json", {
            "config": config.echo(),
            "grid": {"x_min": wigner.x_min, "x_max": wigner.x_max, "n1": wigner.n1,
                     "y_min": wigner.y_min, "y_max": wigner.y_max, "n2": wigner.n2},
            "integral": integral,
            "purity": purity,
        })
    return CommandOutput("csv", wigner.to_frame())


def cmd_kernel(config: RunConfig) -> CommandOutput:
    grid = config.grid.to_grid() if config.grid else None
    kernel = position_kernel(_state(config), grid, config.cutoff, config.tolerances)
    if config.format == "raster":
        return CommandOutput("raster", kernel)
    if config.format == "json":
        return CommandOutput("json", {
            "config": config.echo(),
            "grid": {"x_min": kernel.x_min, "x_max": kernel.x_max, "n1": kernel.n1,
                     "y_min": kernel.y_min, "y_max": kernel.y_max, "n2": kernel.n2},
            "coherence_integral": kernel_coherence_integral(kernel),
        })
    return CommandOutput("csv", kernel.to_frame())


def cmd_validate(config: RunConfig) -> CommandOutput:
    report = run_validation(_state(config), config.tolerances)
    if not report.passed:
        logger.warning(f"Validation failed for {report.family}")
    return CommandOutput(
        "json",
        {"config": config.echo(), "report": report.model_dump(mode="json")},
        exit_code=0 if report.passed else 3,
    )


def create_registry() -> CommandRegistry:
    registry = CommandRegistry()
    registry.register_command("qcs", cmd_qcs, "QCS, purity, kappa and nonclassicality bounds at t = 0",
                              ["json", "csv"])
    registry.register_command("evolve", cmd_evolve, "C(t), P(t), kappa(t) under the thermal channel",
                              ["csv", "json"])
    registry.register_command("halflife", cmd_halflife, "Exact and approximate half-lives",
                              ["json", "csv"])
    registry.register_command("interference", cmd_interference,
                              "Number-state probabilities split by distance from the kernel diagonal",
                              ["csv", "json"])
    registry.register_command("wigner", cmd_wigner, "Wigner function on a grid", ["csv", "raster", "json"])
    registry.register_command("kernel", cmd_kernel, "Position-basis kernel rho(x, x') on a grid",
                              ["csv", "raster", "json"])
    registry.register_command("validate", cmd_validate, "Cross-route consistency checks", ["json"])
    return registry
