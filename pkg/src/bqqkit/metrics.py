from pathlib import Path
from typing import TYPE_CHECKING

from prometheus_client import REGISTRY, CollectorRegistry, Counter, Gauge, Histogram
from prometheus_client import write_to_textfile

from .config import (
    CELL_SECONDS_METRIC_NAME,
    CELLS_METRIC_NAME,
    MEMORY_METRIC_NAME,
    MSE_METRIC_NAME,
    logger,
)
from .methods import format_params

if TYPE_CHECKING:
    from .runner import TradeoffRecord


class SweepMetrics:
    """Prometheus collectors describing a trade-off sweep."""

    def __init__(self, registry: CollectorRegistry | None = None):
        if registry is None:
            self.registry = REGISTRY
        else:
            self.registry = registry

        # Handle case where metrics already exist (repeated sweeps in one process)
        try:
            self.cells_counter = Counter(
                CELLS_METRIC_NAME,
                "Sweep cells run, by method and outcome",
                ["method", "status"],
                registry=self.registry,
            )
        except ValueError:
            self.cells_counter = self.registry._names_to_collectors[CELLS_METRIC_NAME]

        try:
            self.mse_gauge = Gauge(
                MSE_METRIC_NAME,
                "Reconstruction MSE (standardized units) of the last cell",
                ["method", "params"],
                registry=self.registry,
            )
        except ValueError:
            self.mse_gauge = self.registry._names_to_collectors[MSE_METRIC_NAME]

        try:
            self.memory_gauge = Gauge(
                MEMORY_METRIC_NAME,
                "Memory footprint in bits of the last cell",
                ["method", "params"],
                registry=self.registry,
            )
        except ValueError:
            self.memory_gauge = self.registry._names_to_collectors[MEMORY_METRIC_NAME]

        try:
            self.cell_seconds = Histogram(
                CELL_SECONDS_METRIC_NAME,
                "Wall time per sweep cell in seconds",
                ["method"],
                registry=self.registry,
            )
        except ValueError:
            self.cell_seconds = self.registry._names_to_collectors[
                CELL_SECONDS_METRIC_NAME
            ]

    def record_cell(self, record: "TradeoffRecord", seconds: float):
        """Update the collectors from one finished cell."""
        status = "error" if record.failed else "ok"
        self.cells_counter.labels(method=record.method, status=status).inc()
        self.cell_seconds.labels(method=record.method).observe(seconds)
        if not record.failed:
            labels = {"method": record.method, "params": format_params(record.params)}
            self.mse_gauge.labels(**labels).set(record.mse)
            self.memory_gauge.labels(**labels).set(record.memory_bits)
        logger.debug(f"Recorded {status} cell for {record.method} in {seconds:.3f}s")

    def write(self, path: str | Path):
        """Dump the registry in the text exposition format."""
        write_to_textfile(str(path), self.registry)
        logger.info(f"Wrote sweep metrics to {path}")
