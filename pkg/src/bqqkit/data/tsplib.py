"""TSPLIB EUC_2D instances and their rounded Euclidean distance matrices."""

from dataclasses import dataclass

import numpy as np

from ..config import logger
from ..errors import FormatError

SUPPORTED_EDGE_WEIGHT_TYPES = ("EUC_2D",)
MIN_NODES = 2
TRAILING_SECTIONS = (
    "DEMAND_SECTION",
    "DEPOT_SECTION",
    "DISPLAY_DATA_SECTION",
    "EDGE_DATA_SECTION",
    "EDGE_WEIGHT_SECTION",
    "FIXED_EDGES_SECTION",
    "TOUR_SECTION",
)


@dataclass(frozen=True)
class TspInstance:
    name: str
    node_coords: np.ndarray

    @property
    def dimension(self) -> int:
        return len(self.node_coords)


def _header_entry(line: str) -> tuple[str, str] | None:
    if ":" in line:
        key, _, value = line.partition(":")
        return key.strip().upper(), value.strip()
    parts = line.split(None, 1)
    if len(parts) == 2:  # noqa: PLR2004
        return parts[0].upper(), parts[1].strip()
    return None


def parse_tsplib(text: str) -> TspInstance:
    """Parse the header and NODE_COORD_SECTION of a TSPLIB file.

    Raises:
        FormatError: For a missing or unsupported EDGE_WEIGHT_TYPE, a malformed
            coordinate line, fewer than two nodes or a DIMENSION mismatch; the error names
            the 1-based line number
    """
    header: dict[str, str] = {}
    coords: list[tuple[float, float]] = []
    in_coords = False
    last_line = 0

    for line_number, raw in enumerate(text.splitlines(), start=1):
        last_line = line_number
        line = raw.strip()
        if not line:
            continue
        if line.upper() == "EOF":
            break
        if line.upper().startswith("NODE_COORD_SECTION"):
            weight_type = header.get("EDGE_WEIGHT_TYPE")
            if weight_type not in SUPPORTED_EDGE_WEIGHT_TYPES:
                msg = f"unsupported EDGE_WEIGHT_TYPE {weight_type!r}"
                raise FormatError(msg, offset=line_number, unit="line")
            in_coords = True
            continue
        if in_coords:
            parts = line.split()
            if len(parts) != 3:  # noqa: PLR2004
                if parts[0].upper() in TRAILING_SECTIONS:
                    break
                msg = f"expected 'index x y', got {line!r}"
                raise FormatError(msg, offset=line_number, unit="line")
            try:
                x, y = float(parts[1]), float(parts[2])
            except ValueError:
                msg = f"non-numeric coordinate in {line!r}"
                raise FormatError(msg, offset=line_number, unit="line") from None
            if not (np.isfinite(x) and np.isfinite(y)):
                msg = f"non-finite coordinate in {line!r}"
                raise FormatError(msg, offset=line_number, unit="line")
            coords.append((x, y))
            continue
        entry = _header_entry(line)
        if entry is None:
            msg = f"malformed header line {line!r}"
            raise FormatError(msg, offset=line_number, unit="line")
        header[entry[0]] = entry[1]

    if not in_coords:
        msg = "no NODE_COORD_SECTION found"
        raise FormatError(msg, offset=last_line, unit="line")
    if len(coords) < MIN_NODES:
        msg = f"need at least {MIN_NODES} nodes, got {len(coords)}"
        raise FormatError(msg, offset=last_line, unit="line")
    if "DIMENSION" in header and header["DIMENSION"].isdigit():
        if int(header["DIMENSION"]) != len(coords):
            msg = f"DIMENSION {header['DIMENSION']} but {len(coords)} coordinates"
            raise FormatError(msg, offset=last_line, unit="line")

    name = header.get("NAME", "unnamed")
    logger.debug(f"Parsed TSPLIB instance {name} with {len(coords)} nodes")
    return TspInstance(name=name, node_coords=np.array(coords))


def distance_matrix(instance: TspInstance) -> np.ndarray:
    """Symmetric distance matrix rounded to the nearest integer (nint), zero diagonal."""
    coords = instance.node_coords
    diff = coords[:, None, :] - coords[None, :, :]
    return np.floor(np.sqrt(np.sum(diff**2, axis=-1)) + 0.5)


def format_tsplib(instance: TspInstance) -> str:
    lines = [
        f"NAME : {instance.name}",
        "TYPE : TSP",
        f"DIMENSION : {instance.dimension}",
        "EDGE_WEIGHT_TYPE : EUC_2D",
        "NODE_COORD_SECTION",
    ]
    lines += [
        f"{index} {x!r} {y!r}"
        for index, (x, y) in enumerate(instance.node_coords.tolist(), start=1)
    ]
    lines.append("EOF")
    return "\n".join(lines) + "\n"
