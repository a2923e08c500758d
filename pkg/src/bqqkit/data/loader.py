"""Resolve an input source (file path or generator spec) into a dense matrix."""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..config import logger
from ..errors import ConfigError, FormatError
from ..matrix import as_dense
from .fvecs import parse_fvecs
from .raw import RAW_MAGIC, read_raw
from .synthetic import gen_gaussian, gen_lowrank_noise, gen_random_cities
from .text import parse_delimited
from .tsplib import distance_matrix, parse_tsplib

INPUT_FORMATS = ("auto", "fvecs", "tsp", "csv", "raw")
GENERATOR_KINDS = ("gaussian", "lowrank", "cities")
GENERATOR_PREFIX = "gen:"
DEFAULT_LOWRANK = 4
DEFAULT_NOISE = 0.01

_SUFFIX_FORMATS = {
    ".fvecs": "fvecs",
    ".tsp": "tsp",
    ".csv": "csv",
    ".txt": "csv",
    ".tsv": "csv",
    ".raw": "raw",
    ".bqqm": "raw",
}


@dataclass(frozen=True)
class GeneratorSpec:
    """``gen:<kind>:<m>x<n>[:rank][:noise]``; a single size means a square matrix."""

    kind: str
    rows: int
    cols: int
    rank: int = DEFAULT_LOWRANK
    noise: float = DEFAULT_NOISE

    @classmethod
    def parse(cls, spec: str) -> "GeneratorSpec":
        parts = spec.removeprefix(GENERATOR_PREFIX).split(":")
        if len(parts) < 2 or parts[0] not in GENERATOR_KINDS:  # noqa: PLR2004
            msg = f"generator spec {spec!r} must look like gen:<{'|'.join(GENERATOR_KINDS)}>:<m>x<n>"
            raise ConfigError(msg)
        try:
            sizes = [int(v) for v in parts[1].lower().split("x")]
            rows, cols = (sizes[0], sizes[0]) if len(sizes) == 1 else sizes
            rank = int(parts[2]) if len(parts) > 2 else DEFAULT_LOWRANK  # noqa: PLR2004
            noise = float(parts[3]) if len(parts) > 3 else DEFAULT_NOISE  # noqa: PLR2004
        except ValueError:
            msg = f"malformed generator spec {spec!r}"
            raise ConfigError(msg) from None
        if parts[0] == "cities" and rows != cols:
            msg = f"a city distance matrix is square, got {rows}x{cols}"
            raise ConfigError(msg)
        return cls(kind=parts[0], rows=rows, cols=cols, rank=rank, noise=noise)

    def generate(self, seed: int) -> np.ndarray:
        if self.kind == "gaussian":
            return gen_gaussian(self.rows, self.cols, seed)
        if self.kind == "lowrank":
            return gen_lowrank_noise(self.rows, self.cols, self.rank, self.noise, seed)
        return distance_matrix(gen_random_cities(self.rows, seed))


def is_generator(source: str) -> bool:
    return str(source).startswith(GENERATOR_PREFIX)


def detect_format(path: Path, data: bytes) -> str:
    if data.startswith(RAW_MAGIC):
        return "raw"
    detected = _SUFFIX_FORMATS.get(path.suffix.lower())
    if detected is None:
        msg = f"cannot infer the format of {path}; pass one of {', '.join(INPUT_FORMATS[1:])}"
        raise FormatError(msg, offset=0)
    return detected


def parse_matrix(data: bytes, fmt: str) -> np.ndarray:
    """Decode file contents of a known format into a matrix."""
    if fmt == "raw":
        return read_raw(data)
    if fmt == "fvecs":
        records = parse_fvecs(data)
        if records.empty:
            msg = "fvecs input holds no vectors"
            raise FormatError(msg, offset=0)
        return records.as_matrix()
    text = _decode_text(data)
    if fmt == "tsp":
        return distance_matrix(parse_tsplib(text))
    return parse_delimited(text)


def _decode_text(data: bytes) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as e:
        msg = f"text input is not valid UTF-8: {e.reason}"
        raise FormatError(msg, offset=e.start) from e


def load_matrix(source: str | Path, fmt: str = "auto", seed: int = 0) -> np.ndarray:
    """Load a matrix from a file, or draw it from a generator spec with ``seed``.

    Raises:
        ConfigError: For an unknown format or a malformed generator spec
        FormatError: When the file contents do not parse
        OSError: When the file cannot be read
    """
    if fmt not in INPUT_FORMATS:
        msg = f"unknown input format {fmt!r}; expected one of {', '.join(INPUT_FORMATS)}"
        raise ConfigError(msg)
    if is_generator(str(source)):
        spec = GeneratorSpec.parse(str(source))
        logger.debug(f"Generating {spec.kind} {spec.rows}x{spec.cols} input with seed {seed}")
        return as_dense(spec.generate(seed), name=str(source))

    path = Path(source)
    data = path.read_bytes()
    if fmt == "auto":
        fmt = detect_format(path, data)
    w = as_dense(parse_matrix(data, fmt), name=str(path))
    logger.debug(f"Loaded {w.shape[0]}x{w.shape[1]} {fmt} matrix from {path}")
    return w
