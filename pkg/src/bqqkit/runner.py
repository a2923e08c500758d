"""MSE-versus-memory trade-off sweeps over methods, parameter grids and seeds."""

import asyncio
import csv
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from .config import BQQ_THREADS, SCALAR_BITS, logger
from .data.loader import INPUT_FORMATS, is_generator, load_matrix
from .errors import ConfigError
from .matrix import destandardize, mse, standardize
from .methods import format_params, get_method, quantize_matrix
from .metrics import SweepMetrics
from .pubo import AnnealParams

OUTPUT_FORMATS = ("csv", "json")
CSV_COLUMNS = ("method", "params", "seed", "memory_bits", "mse", "wall_time_ms")


@dataclass(frozen=True)
class BenchmarkConfig:
    """Everything a sweep needs.

    Attributes:
        input: File path or ``gen:...`` generator spec
        input_format: One of ``INPUT_FORMATS``
        methods: Method ids, in output order
        grids: Per method, a list of values per parameter; missing params use defaults
        bqq_budget: Products p * l_scale to hold fixed while sweeping BQQ's p
        anneal: Annealing schedule for BQQ
        seeds: Seeds; generated inputs are re-drawn per seed
        group_rows: Tile height for group-wise quantization, or None
        group_cols: Tile width for group-wise quantization, or None
        scalar_bits: Width charged per stored scalar
        output: Output path stem, or None for stdout
        formats: Output formats
        original_scale: Also report MSE in the input's units
        record_wall_time: Write measured wall times instead of 0
    """

    input: str
    methods: tuple[str, ...]
    seeds: tuple[int, ...]
    input_format: str = "auto"
    grids: dict[str, dict[str, list]] = field(default_factory=dict)
    bqq_budget: tuple[float, ...] = ()
    anneal: AnnealParams = field(default_factory=AnnealParams.auto_detect)
    group_rows: int | None = None
    group_cols: int | None = None
    scalar_bits: int = SCALAR_BITS
    output: str | None = None
    formats: tuple[str, ...] = ("csv",)
    original_scale: bool = False
    record_wall_time: bool = False

    def __post_init__(self):
        if not self.methods:
            msg = "at least one method is required"
            raise ConfigError(msg)
        if not self.seeds:
            msg = "at least one seed is required"
            raise ConfigError(msg)
        if self.input_format not in INPUT_FORMATS:
            msg = f"unknown input format {self.input_format!r}"
            raise ConfigError(msg)
        unknown = sorted(set(self.formats) - set(OUTPUT_FORMATS))
        if unknown or not self.formats:
            msg = f"output formats must be among {', '.join(OUTPUT_FORMATS)}, got {self.formats}"
            raise ConfigError(msg)
        for method_id in self.methods:
            method = get_method(method_id)
            extra = sorted(set(self.grids.get(method_id, {})) - set(method.param_names))
            if extra:
                msg = f"unknown parameter(s) {', '.join(extra)} for method {method_id}"
                raise ConfigError(msg)
        for name in ("group_rows", "group_cols"):
            value = getattr(self, name)
            if value is not None and value < 1:
                msg = f"{name} must be positive, got {value}"
                raise ConfigError(msg)

    def param_points(self, method_id: str) -> list[dict]:
        """Cartesian product of the method's grid in declared parameter order."""
        method = get_method(method_id)
        grid = self.grids.get(method_id, {})
        axes = [grid.get(param.name, [param.default]) for param in method.params]
        points = [method.resolve(dict(zip(method.param_names, combo, strict=True))) for combo in product(*axes)]
        if method_id == "bqq" and self.bqq_budget:
            points = [
                {**point, "l_scale": budget / point["p"]}
                for point in points
                for budget in self.bqq_budget
            ]
            unique = {tuple(point.items()): point for point in points}
            points = list(unique.values())
        return points

    def cells(self) -> list[tuple[str, dict, int]]:
        return [
            (method_id, point, seed)
            for method_id in self.methods
            for point in self.param_points(method_id)
            for seed in self.seeds
        ]


@dataclass(frozen=True)
class TradeoffRecord:
    """One (method, parameters, seed) point of the trade-off curve.

    A failed cell has ``error`` set, ``memory_bits`` 0 and ``mse`` None.
    """

    method: str
    params: dict
    seed: int
    memory_bits: int
    mse: float | None
    wall_time_ms: int = 0
    mse_original: float | None = None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None

    def as_dict(self, *, original_scale: bool = False) -> dict:
        record = {
            "method": self.method,
            "params": dict(self.params),
            "seed": self.seed,
            "memory_bits": self.memory_bits,
            "mse": self.mse,
            "wall_time_ms": self.wall_time_ms,
        }
        if original_scale:
            record["mse_original"] = self.mse_original
        if self.failed:
            record["error"] = self.error
        return record

    def as_row(self, *, original_scale: bool = False) -> list[str]:
        def number(value: float | None) -> str:
            return "error" if value is None else repr(value)

        row = [
            self.method,
            format_params(self.params),
            str(self.seed),
            str(self.memory_bits),
            number(self.mse),
            str(self.wall_time_ms),
        ]
        if original_scale:
            row.append(number(self.mse_original))
        return row


def records_to_csv(records: list[TradeoffRecord], *, original_scale: bool = False) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    header = list(CSV_COLUMNS) + (["mse_original"] if original_scale else [])
    writer.writerow(header)
    for record in records:
        writer.writerow(record.as_row(original_scale=original_scale))
    return buffer.getvalue()


def records_to_json(records: list[TradeoffRecord], *, original_scale: bool = False) -> str:
    payload = [record.as_dict(original_scale=original_scale) for record in records]
    return json.dumps(payload, indent=2) + "\n"


def write_records(
    records: list[TradeoffRecord],
    stem: str | Path,
    formats: tuple[str, ...],
    *,
    original_scale: bool = False,
) -> list[Path]:
    """Write ``<stem>.csv`` and/or ``<stem>.json``; returns the written paths."""
    writers = {"csv": records_to_csv, "json": records_to_json}
    written = []
    for fmt in formats:
        path = Path(f"{stem}.{fmt}")
        path.write_text(writers[fmt](records, original_scale=original_scale))
        written.append(path)
    return written


class SweepRunner:
    """Runs every cell of a ``BenchmarkConfig`` on a bounded thread pool.

    Results are gathered by cell index, so the pool size never changes the output.
    """

    def __init__(
        self,
        config: BenchmarkConfig,
        metrics: SweepMetrics | None = None,
        max_workers: int = BQQ_THREADS,
    ):
        self.config = config
        self.metrics = metrics
        self.max_workers = max(1, max_workers)
        self.inputs: dict[int, np.ndarray] = {}

    def _load_inputs(self):
        config = self.config
        if is_generator(config.input):
            for seed in config.seeds:
                self.inputs[seed] = load_matrix(config.input, config.input_format, seed)
        else:
            w = load_matrix(config.input, config.input_format)
            self.inputs = dict.fromkeys(config.seeds, w)

    def run_cell(self, index: int, method_id: str, params: dict, seed: int) -> TradeoffRecord:
        """Standardize, quantize, reconstruct and score one cell; never raises."""
        config = self.config
        w = self.inputs[seed]
        started = time.perf_counter()
        try:
            w_std, record = standardize(w)
            code = quantize_matrix(
                method_id,
                w_std,
                params,
                seed=seed,
                anneal=config.anneal,
                group_rows=config.group_rows,
                group_cols=config.group_cols,
            )
            reconstruction = code.dequantize()
            error = mse(w_std, reconstruction)
            error_original = mse(w, destandardize(reconstruction, record))
            memory_bits = code.footprint(config.scalar_bits).total_bits
        except Exception as e:
            logger.error(
                f"Cell {index} ({method_id} {format_params(params)} seed={seed}) failed: {e}"
            )
            result = TradeoffRecord(
                method=method_id,
                params=params,
                seed=seed,
                memory_bits=0,
                mse=None,
                error=f"{type(e).__name__}: {e}",
            )
        else:
            elapsed_ms = round((time.perf_counter() - started) * 1000)
            result = TradeoffRecord(
                method=method_id,
                params=params,
                seed=seed,
                memory_bits=memory_bits,
                mse=error,
                wall_time_ms=elapsed_ms if config.record_wall_time else 0,
                mse_original=error_original,
            )
            logger.info(
                f"Cell {index}: {method_id} {format_params(params)} seed={seed} "
                f"-> {memory_bits} bits, MSE {error:.6g}"
            )
        if self.metrics is not None:
            self.metrics.record_cell(result, time.perf_counter() - started)
        return result

    async def run(self) -> list[TradeoffRecord]:
        """Run all cells and return records sorted by (method, memory_bits, cell index)."""
        self._load_inputs()
        cells = self.config.cells()
        logger.info(
            f"Running {len(cells)} sweep cell(s) on {self.max_workers} worker(s)..."
        )
        loop = asyncio.get_running_loop()
        with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
            futures = [
                loop.run_in_executor(pool, self.run_cell, index, *cell)
                for index, cell in enumerate(cells)
            ]
            results = await asyncio.gather(*futures)
        failed = sum(record.failed for record in results)
        if failed:
            logger.warning(f"{failed} of {len(results)} cell(s) failed")
        order = sorted(
            range(len(results)),
            key=lambda i: (results[i].method, results[i].memory_bits, i),
        )
        return [results[i] for i in order]


async def run_sweep(
    config: BenchmarkConfig, metrics: SweepMetrics | None = None
) -> list[TradeoffRecord]:
    """Run a sweep with the default worker bound."""
    runner = SweepRunner(config, metrics=metrics)
    return await runner.run()
