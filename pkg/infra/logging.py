import logging
import logging.config
from typing import Dict, Any, Optional
from datetime import datetime
import json
from pathlib import Path

# Logger names
ROOT_LOGGER_NAME = "qcs"
EVENT_LOGGER_NAME = "qcs.events"
TRACE_LOGGER_NAME = "qcs.traces"

_EXTRA_FIELDS = (
    "event_type",
    "command",
    "computation",
    "processing_time",
    "success",
    "error",
    "level_index",
    "active_panels",
    "accepted_panels",
    "angles",
    "iteration",
    "bracket",
    "step_count",
    "trace_drift",
    "leakage",
)


class StructuredFormatter(logging.Formatter):
    """Custom formatter for structured JSON logging"""

    def format(self, record):
        log_obj = {
            "timestamp": datetime.fromtimestamp(record.created).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
        }

        # Add extra fields if they exist
        for field in _EXTRA_FIELDS:
            if hasattr(record, field):
                log_obj[field] = getattr(record, field)

        return json.dumps(log_obj, default=str)


def setup_logging(log_level: str = "INFO",
                  log_dir: Optional[str] = None,
                  enable_console: bool = True,
                  enable_file: bool = False) -> None:
    """
    Sets up logging for the qcs library and command line

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_dir: Directory to store log files
        enable_console: Whether to log to stderr
        enable_file: Whether to log to rotating files under log_dir
    """
    if enable_file and not log_dir:
        raise ValueError("log_dir is required when file logging is enabled")

    if enable_file:
        Path(log_dir).mkdir(parents=True, exist_ok=True)

    log_level = log_level.upper()
    handlers: Dict[str, Dict[str, Any]] = {}

    # stdout carries command output
    if enable_console:
        handlers["console"] = {
            "class": "logging.StreamHandler",
            "level": log_level,
            "formatter": "standard",
            "stream": "ext://sys.stderr",
        }

    if enable_file:
        handlers["file_general"] = {
            "class": "logging.handlers.RotatingFileHandler",
            "level": log_level,
            "formatter": "structured",
            "filename": f"{log_dir}/qcs_general.log",
            "maxBytes": 10485760,  # 10MB
            "backupCount": 5,
        }
        handlers["file_events"] = {
            "class": "logging.handlers.RotatingFileHandler",
            "level": "INFO",
            "formatter": "structured",
            "filename": f"{log_dir}/qcs_events.log",
            "maxBytes": 10485760,
            "backupCount": 10,
        }
        handlers["file_traces"] = {
            "class": "logging.handlers.RotatingFileHandler",
            "level": "DEBUG",
            "formatter": "structured",
            "filename": f"{log_dir}/qcs_traces.log",
            "maxBytes": 10485760,
            "backupCount": 10,
        }

    console = ["console"] if enable_console else []

    config = {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {
            "standard": {
                "format": "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
            },
            "structured": {
                "()": StructuredFormatter,
            },
        },
        "handlers": handlers,
        "loggers": {
            ROOT_LOGGER_NAME: {
                "handlers": console + (["file_general"] if enable_file else []),
                "level": log_level,
                "propagate": False,
            },
            EVENT_LOGGER_NAME: {
                "handlers": (["file_events"] if enable_file else []) + console,
                "level": log_level,
                "propagate": False,
            },
            TRACE_LOGGER_NAME: {
                # traces only reach the console at DEBUG
                "handlers": (["file_traces"] if enable_file else []) + console,
                "level": "DEBUG" if enable_file else log_level,
                "propagate": False,
            },
            "app": {
                "handlers": console + (["file_general"] if enable_file else []),
                "level": log_level,
                "propagate": False,
            },
            "validation": {
                "handlers": console + (["file_general"] if enable_file else []),
                "level": log_level,
                "propagate": False,
            },
            "infra": {
                "handlers": console + (["file_general"] if enable_file else []),
                "level": log_level,
                "propagate": False,
            },
        },
    }

    logging.config.dictConfig(config)


class EventLogger:
    """Logger for command and computation events"""

    def __init__(self):
        self.logger = logging.getLogger(EVENT_LOGGER_NAME)

    def log_command_start(self, command: str, config: Dict[str, Any]):
        self.logger.info(
            f"Command {command} started",
            extra={
                "command": command,
                "event_type": "command_start",
                "computation": config,
            },
        )

    def log_command_complete(self, command: str, processing_time: float,
                             success: bool, error: Optional[str] = None):
        self.logger.info(
            f"Command {command} {'completed' if success else 'failed'}",
            extra={
                "command": command,
                "processing_time": processing_time,
                "success": success,
                "error": error,
                "event_type": "command_complete",
            },
        )

    def log_computation(self, computation: str, processing_time: float,
                        success: bool, error: Optional[str] = None):
        """Log a finished computation such as a moment evaluation or a half-life solve"""
        self.logger.info(
            f"Computation {computation} {'completed' if success else 'failed'}",
            extra={
                "computation": computation,
                "processing_time": processing_time,
                "success": success,
                "error": error,
                "event_type": "computation",
            },
        )


class TraceLogger:
    """Logger for detailed numerical traces"""

    def __init__(self):
        self.logger = logging.getLogger(TRACE_LOGGER_NAME)

    def trace_quadrature(self, level_index: int, active_panels: int,
                         accepted_panels: int, angles: int):
        self.logger.debug(
            f"Quadrature level {level_index}: {active_panels} active, {accepted_panels} accepted",
            extra={
                "level_index": level_index,
                "active_panels": active_panels,
                "accepted_panels": accepted_panels,
                "angles": angles,
                "event_type": "quadrature_level",
            },
        )

    def trace_bisection(self, computation: str, iteration: int, t: float, value: float):
        self.logger.debug(
            f"Bisection {computation} step {iteration}: f({t:.6g}) = {value:.6g}",
            extra={
                "computation": computation,
                "iteration": iteration,
                "bracket": [t, value],
                "event_type": "bisection",
            },
        )

    def trace_oracle(self, step_count: int, trace_drift: float, leakage: float):
        self.logger.debug(
            f"Fock oracle finished {step_count} steps",
            extra={
                "step_count": step_count,
                "trace_drift": trace_drift,
                "leakage": leakage,
                "event_type": "oracle",
            },
        )


# Global logger instances
event_logger = EventLogger()
trace_logger = TraceLogger()


def get_logger(name: str) -> logging.Logger:
    """Get a logger with the specified name"""
    return logging.getLogger(f"{ROOT_LOGGER_NAME}.{name}")


def get_event_logger() -> EventLogger:
    """Get the global event logger instance"""
    return event_logger


def get_trace_logger() -> TraceLogger:
    """Get the global trace logger instance"""
    return trace_logger
