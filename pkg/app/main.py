import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from app.commands import CommandOutput, CommandRegistry, GridOverride, RunConfig, create_registry
from infra.config import Settings
from infra.io import write_csv, write_json, write_raster
from infra.logging import get_event_logger, get_logger, setup_logging
from qcs.channel import ChannelParams
from qcs.charfn import WeightConvention
from qcs.errors import InvalidSpec, QcsError
from qcs.states import parse_state_spec, spec_to_dict
from qcs.tolerances import DEFAULT_TOLERANCES, Tolerances

logger = get_logger("cli")
event_logger = get_event_logger()


def _split(text: str) -> List[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def parse_floats(text: str, option: str) -> List[float]:
    try:
        return [float(item) for item in _split(text)]
    except ValueError:
        raise InvalidSpec(f"{option} expects comma-separated numbers, got {text!r}")


def parse_ints(text: str, option: str) -> List[int]:
    """'0..12' (inclusive) or '0,2,4'."""
    try:
        if ".." in text:
            low, high = text.split("..", 1)
            return list(range(int(low), int(high) + 1))
        return [int(item) for item in _split(text)]
    except ValueError:
        raise InvalidSpec(f"{option} expects integers or a range like 0..12, got {text!r}")


def parse_grid(text: str) -> GridOverride:
    """'half_width,points', e.g. '6,321'."""
    parts = _split(text)
    if len(parts) != 2:
        raise InvalidSpec(f"--grid expects 'half_width,points', got {text!r}")
    try:
        return GridOverride(half_width=float(parts[0]), points=int(parts[1]))
    except (ValueError, ValidationError) as e:
        raise InvalidSpec(f"Invalid --grid {text!r}: {e}")


def parse_tolerances(items: Optional[List[str]], base: Tolerances) -> Tolerances:
    overrides: Dict[str, float] = {}
    for item in items or []:
        for pair in _split(item):
            key, sep, value = pair.partition("=")
            if not sep:
                raise InvalidSpec(f"--tol expects key=value, got {pair!r}")
            if key.strip() not in Tolerances.model_fields:
                raise InvalidSpec(f"Unknown tolerance {key.strip()!r}")
            try:
                overrides[key.strip()] = float(value)
            except ValueError:
                raise InvalidSpec(f"Tolerance {key.strip()} must be a number, got {value!r}")
    try:
        return base.with_overrides(**overrides)
    except ValidationError as e:
        raise InvalidSpec(f"Invalid tolerance override: {e}")


def build_parser(registry: CommandRegistry, settings: Settings) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    source = common.add_mutually_exclusive_group(required=True)
    source.add_argument("--state", help="JSON spec or shorthand such as fock:5, cat:qcs2=11, even:4")
    source.add_argument("--state-file", help="File holding a JSON spec or shorthand")

    channel = common.add_argument_group("channel")
    channel.add_argument("--nbar-inf", type=float, default=0.0, help="Asymptotic thermal occupation")
    channel.add_argument("--t-rel", type=float, default=1.0, help="Relaxation time t_R")
    channel.add_argument("--omega", type=float, default=0.0, help="Oscillator frequency")

    times = common.add_argument_group("time grid")
    times.add_argument("--t-max", type=float, default=0.0)
    times.add_argument("--dt", type=float, default=0.01)
    times.add_argument("--times", help="Explicit comma-separated times; overrides --t-max/--dt")
    times.add_argument("--t", default="0", help="Times at which interference profiles are taken")

    numerics = common.add_argument_group("numerics")
    numerics.add_argument("--method", choices=["exact", "closed-form", "ode", "oracle"], default="exact")
    numerics.add_argument("--convention", choices=[c.value for c in WeightConvention],
                          default=WeightConvention.DERIVED.value, help=argparse.SUPPRESS)
    numerics.add_argument("--cutoff", type=int, help="Number-basis cutoff (default: automatic)")
    numerics.add_argument("--grid", help="Square grid 'half_width,points'")
    numerics.add_argument("--ell", default="1", help="Strip half-widths, comma-separated")
    numerics.add_argument("--n", default="0..12", help="Number states, e.g. 0..12")
    numerics.add_argument("--tol", action="append", metavar="KEY=VALUE", help="Tolerance override")
    numerics.add_argument("--threads", type=int, default=settings.threads)

    output = common.add_argument_group("output")
    output.add_argument("--out", help="Output path (default: stdout)")
    output.add_argument("--format", choices=["csv", "json", "raster"])
    output.add_argument("--log-level", default=settings.log_level)
    output.add_argument("--log-dir", default=settings.log_dir)

    parser = argparse.ArgumentParser(prog="qcs", description="Quadrature coherence scale numerics")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, definition in registry.command_definitions.items():
        subparsers.add_parser(name, parents=[common], help=definition.description,
                              description=definition.description)
    return parser


def build_config(args: argparse.Namespace, registry: CommandRegistry, settings: Settings) -> RunConfig:
    if args.state_file:
        try:
            source = Path(args.state_file).read_text()
        except OSError as e:
            raise InvalidSpec(f"Cannot read --state-file {args.state_file}: {e}")
    else:
        source = args.state
    spec = parse_state_spec(source.strip())

    base = DEFAULT_TOLERANCES
    if settings.quad_tol is not None:
        base = base.with_overrides(quad_tol=settings.quad_tol)

    values: Dict[str, Any] = {
        "command": args.command,
        "state": spec_to_dict(spec),
        "method": args.method,
        "convention": args.convention,
        "t_max": args.t_max,
        "dt": args.dt,
        "times": parse_floats(args.times, "--times") if args.times else None,
        "t": parse_floats(args.t, "--t"),
        "cutoff": args.cutoff,
        "grid": parse_grid(args.grid) if args.grid else None,
        "ell": parse_floats(args.ell, "--ell"),
        "n": parse_ints(args.n, "--n"),
        "tolerances": parse_tolerances(args.tol, base),
        "format": args.format or registry.command_definitions[args.command].default_format,
        "threads": args.threads,
        "out": args.out,
    }
    try:
        values["channel"] = ChannelParams(t_R=args.t_rel, nbar_inf=args.nbar_inf, omega=args.omega)
        return RunConfig(**values)
    except ValidationError as e:
        raise InvalidSpec(f"Invalid arguments: {e}")


def emit(output: CommandOutput, config: RunConfig) -> None:
    if output.kind == "csv":
        write_csv(output.payload, config.echo(), config.out)
    elif output.kind == "raster":
        write_raster(output.payload, config.out)
    else:
        write_json(output.payload, config.out)


def main(argv: Optional[List[str]] = None) -> int:
    try:
        settings = Settings.from_env()
    except ValidationError as e:
        print(f"error: invalid QCS_* environment: {e}", file=sys.stderr)
        return InvalidSpec.exit_code
    registry = create_registry()
    parser = build_parser(registry, settings)
    args = parser.parse_args(argv)

    setup_logging(log_level=args.log_level, log_dir=args.log_dir, enable_file=bool(args.log_dir))
    started = time.perf_counter()
    try:
        config = build_config(args, registry, settings)
        event_logger.log_command_start(config.command, config.echo())
        output = registry.run(config)
        emit(output, config)
    except QcsError as e:
        logger.debug(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        event_logger.log_command_complete(args.command, time.perf_counter() - started, False, str(e))
        return e.exit_code

    event_logger.log_command_complete(args.command, time.perf_counter() - started, output.exit_code == 0)
    return output.exit_code


if __name__ == "__main__":
    sys.exit(main())
