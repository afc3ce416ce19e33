import io
import json
import logging
import struct
import sys
from pathlib import Path
from typing import Any, Dict, Optional, TextIO

import numpy as np
import pandas as pd

from qcs.errors import InvalidSpec
from qcs.phase_space import Grid2D

logger = logging.getLogger(__name__)

RASTER_MAGIC = 0x51435352  # "QCSR"
RASTER_VERSION = 1
_HEADER = struct.Struct("<8d")


def _dumps(payload: Dict[str, Any]) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, default=_json_default)


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if hasattr(value, "model_dump"):
        return value.model_dump(mode="json")
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def _open_text(path: Optional[str]) -> TextIO:
    if path is None:
        return sys.stdout
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", newline="")


def csv_text(frame: pd.DataFrame, config: Dict[str, Any]) -> str:
    """CSV body with 12 significant digits behind a '# config: {...}' provenance line."""
    buffer = io.StringIO()
    buffer.write(f"# config: {json.dumps(config, sort_keys=True, default=_json_default)}\n")
    frame.to_csv(buffer, index=False, float_format="%.12g", lineterminator="\n")
    return buffer.getvalue()


def write_csv(frame: pd.DataFrame, config: Dict[str, Any], path: Optional[str] = None) -> None:
    text = csv_text(frame, config)
    handle = _open_text(path)
    try:
        handle.write(text)
    finally:
        if handle is not sys.stdout:
            handle.close()
    if path:
        logger.info(f"Wrote {len(frame)} rows to {path}")


def write_json(payload: Dict[str, Any], path: Optional[str] = None) -> None:
    text = _dumps(payload) + "\n"
    handle = _open_text(path)
    try:
        handle.write(text)
    finally:
        if handle is not sys.stdout:
            handle.close()
    if path:
        logger.info(f"Wrote JSON report to {path}")


def write_raster(grid: Grid2D, path: str) -> None:
    """8 little-endian float64 header values then row-major float64 data."""
    if path is None:
        raise InvalidSpec("Raster output needs --out")
    values = np.asarray(grid.values)
    if np.iscomplexobj(values):
        values = values.real
    header = _HEADER.pack(
        float(RASTER_MAGIC), float(RASTER_VERSION), float(grid.n1), float(grid.n2),
        grid.x_min, grid.x_max, grid.y_min, grid.y_max,
    )
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as handle:
        handle.write(header)
        handle.write(np.ascontiguousarray(values, dtype="<f8").tobytes())
    logger.info(f"Wrote {grid.n1}x{grid.n2} raster to {path}")


def read_raster(path: str) -> Grid2D:
    with open(path, "rb") as handle:
        payload = handle.read()
    if len(payload) < _HEADER.size:
        raise InvalidSpec(f"{path} is too short to be a raster")
    magic, version, n1, n2, x_min, x_max, y_min, y_max = _HEADER.unpack_from(payload)
    if int(magic) != RASTER_MAGIC or int(version) != RASTER_VERSION:
        raise InvalidSpec(f"{path} is not a version {RASTER_VERSION} raster")
    n1, n2 = int(n1), int(n2)
    values = np.frombuffer(payload, dtype="<f8", offset=_HEADER.size)
    if values.size != n1 * n2:
        raise InvalidSpec(f"{path} holds {values.size} values, expected {n1 * n2}")
    return Grid2D(x_min, x_max, y_min, y_max, n1, n2, values.reshape(n1, n2).copy())
