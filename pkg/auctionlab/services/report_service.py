"""
Report Service Module

Turns run reports into plotting tables and reads persisted reports back.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Union

import pandas as pd

from auctionlab.core.exceptions import MissingSeries
from auctionlab.schemas.experiment import RunReport
from auctionlab.utils.file_handler import FileHandler

logger = logging.getLogger(__name__)

# Columns each plot kind must carry, in output order.
PLOT_COLUMNS: Dict[str, List[str]] = {
    "bk-curve": ["n", "vickrey_revenue", "myerson_revenue"],
    "profit-curve": ["family", "r", "Pi_r"],
    "payoff-one-strategic": ["value", "truthful_bid", "linear_bid", "thresholded_bid"],
    "sample-complexity": ["T", "mean_ratio", "p05_ratio", "std_error"],
}


def emit_plot_data(
    report: RunReport,
    kind: str,
    out: Optional[Union[str, Path]] = None,
    file_handler: Optional[FileHandler] = None,
) -> pd.DataFrame:
    """
    Extract a labeled table for external plotting.

    Args:
        report: A run report holding the series ``kind``.
        kind: One of ``PLOT_COLUMNS``.
        out: Optional CSV destination; nothing is written on error.
        file_handler: Writer to use (defaults to a new ``FileHandler``).

    Returns:
        The table as a DataFrame.

    Raises:
        MissingSeries: If the report is empty or lacks the series.
    """
    if kind not in PLOT_COLUMNS:
        raise MissingSeries(f"unknown plot kind {kind!r}; expected one of {sorted(PLOT_COLUMNS)}")
    if not report.replications:
        raise MissingSeries("report has no replications")
    rows = report.series.get(kind)
    if not rows:
        raise MissingSeries(
            f"report of scenario {report.scenario!r} has no {kind!r} series"
        )
    frame = pd.DataFrame(rows)
    missing = [c for c in PLOT_COLUMNS[kind] if c not in frame.columns]
    if missing:
        raise MissingSeries(f"{kind!r} series lacks columns {missing}")
    frame = frame[PLOT_COLUMNS[kind]]
    if out is not None:
        (file_handler or FileHandler()).write_frame(frame, out)
    logger.debug("Plot data emitted", extra={"kind": kind, "rows": len(frame)})
    return frame


def load_report(path: Union[str, Path]) -> RunReport:
    """Read a JSON report written by the experiment service."""
    return RunReport.model_validate(FileHandler.read_json(path))


__all__ = ["PLOT_COLUMNS", "emit_plot_data", "load_report"]
