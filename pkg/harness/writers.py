import csv
import logging
from pathlib import Path
from typing import *

from pydantic import BaseModel

from harness import SweepResult
from solvers import SolutionTrace
from utils.consts import AGG_COLUMNS, CSV_COLUMNS, TRACE_COLUMNS

logger = logging.getLogger(__name__)


def aggregate_path(out: str | Path) -> Path:
    out = Path(out)
    return out.with_name(f"{out.stem}.agg.csv")


def write_csv(path: str | Path, columns: list[str], rows: Iterable[BaseModel]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row.model_dump())
    logger.debug(f"wrote {path}")


def write_sweep(result: SweepResult, out: str | Path) -> tuple[Path, Path]:
    """Per-trial rows to `out`, per (axis value, algorithm) means next to it."""
    write_csv(out, CSV_COLUMNS, result.rows)
    agg = aggregate_path(out)
    write_csv(agg, AGG_COLUMNS, result.aggregate())
    logger.info(f"results written to {out} and {agg}")
    return Path(out), agg


def trace_path(trace: str | Path, algo: str, several: bool) -> Path:
    trace = Path(trace)
    if not several:
        return trace
    return trace.with_name(f"{trace.stem}.{algo}{trace.suffix}")


def write_traces(solutions: dict[str, SolutionTrace], trace: str | Path) -> list[Path]:
    paths = []
    for algo, sol in solutions.items():
        path = trace_path(trace, algo, len(solutions) > 1)
        write_csv(path, TRACE_COLUMNS, sol.records)
        paths.append(path)
    return paths
