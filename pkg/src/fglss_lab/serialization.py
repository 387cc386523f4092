"""File formats: deterministic JSON, packed ±1 strings, artifact loading."""

import base64
import json
import logging
from pathlib import Path
from typing import Any

import numpy as np

from .errors import LabInputError, MissingArtifactError

logger = logging.getLogger(__name__)


def pack_bits(values: np.ndarray) -> str:
    """Pack a ±1 vector into base64 (bit = 1 marks a -1 entry, MSB first)."""
    indicator = (np.asarray(values) < 0).astype(np.uint8)
    return base64.b64encode(np.packbits(indicator).tobytes()).decode("ascii")


def unpack_bits(encoded: str, length: int) -> np.ndarray:
    """Inverse of ``pack_bits`` for a vector of the given length."""
    try:
        raw = np.frombuffer(base64.b64decode(encoded, validate=True), dtype=np.uint8)
    except ValueError as e:
        raise LabInputError(f"malformed packed bit string: {encoded!r}") from e
    bits = np.unpackbits(raw)[:length]
    if len(bits) != length:
        raise LabInputError(f"packed bit string holds fewer than {length} bits")
    return (1 - 2 * bits.astype(np.int8)).astype(np.int8)


def dumps(data: Any) -> str:
    """Canonical JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def write_json(path: str | Path, data: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(data), encoding="utf-8")
    logger.debug("Wrote %s", path)
    return path


def read_json(path: str | Path, artifact: str) -> Any:
    """Load a JSON artifact.

    Raises:
        MissingArtifactError: If the file does not exist
        LabInputError: If the file is not valid JSON
    """
    path = Path(path)
    if not path.is_file():
        raise MissingArtifactError(artifact, str(path))
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise LabInputError(f"{artifact} file {path} is not valid JSON: {e}") from e
