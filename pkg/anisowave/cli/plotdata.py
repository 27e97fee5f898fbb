"""
Plot-data emission for anisowave reports.

Every file starts with one comment line naming the columns, followed by a
CSV header row and the data rows in a fixed order.
"""

import csv
import logging
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..anisotropy import build_ellipsoid, quasi_norm
from ..group import field_points, slice_rows
from ..models import CheckResult, ExpansiveMatrix, GroupField

logger = logging.getLogger(__name__)

PLOT_KINDS = ("slice", "ratio", "decay")

# (numerator, denominator) keys recognized in report rows
RATIO_PAIRS = (("maximal", "seq"), ("peetre_disc", "lp"), ("coorbit", "lp"))

DECAY_FLOOR = 1e-11


def _nearest_scale(F: GroupField, s: float) -> int:
    return int(np.argmin(np.abs(F.scales - s)))


def slice_table(F: GroupField, scale_index: Optional[int] = None) -> Tuple[str, List[str], List[List[Any]]]:
    """One scale slice of a field; defaults to the slice closest to s = 0."""
    j = _nearest_scale(F, 0.0) if scale_index is None else scale_index
    d = F.grid.d
    comment = f"scale slice s={F.scales[j]:.12g}; columns: x1..x{d}, real, imag, abs"
    header = [f"x{i + 1}" for i in range(d)] + ["real", "imag", "abs"]
    return comment, header, slice_rows(F, j)


def _report_rows(source: Union[CheckResult, Dict[str, Any], Sequence[Dict[str, Any]]]) -> List[Dict[str, Any]]:
    if isinstance(source, CheckResult):
        return list(source.rows)
    if isinstance(source, dict):
        return list(source.get("rows", []))
    return list(source)


def ratio_table(
    source: Union[CheckResult, Dict[str, Any], Sequence[Dict[str, Any]]],
    numerator: Optional[str] = None,
    denominator: Optional[str] = None,
) -> Tuple[str, List[str], List[List[Any]]]:
    """
    Per-row ratios of two norms in a report.

    Without explicit keys the first matching pair of RATIO_PAIRS is used.

    Raises:
        ValueError: If no ratio pair can be found in the rows
    """
    rows = _report_rows(source)
    if numerator is None or denominator is None:
        keys = set(rows[0]) if rows else set()
        match = next(((a, b) for a, b in RATIO_PAIRS if a in keys and b in keys), None)
        if match is None:
            raise ValueError(f"No ratio columns in report rows (keys: {sorted(keys)})")
        numerator, denominator = match
    table = []
    for i, row in enumerate(rows):
        top, bottom = float(row[numerator]), float(row[denominator])
        ratio = top / bottom if bottom != 0 else math.nan
        table.append([i, row.get("kind", ""), top, bottom, ratio])
    comment = f"norm ratios {numerator}/{denominator}; columns: index, kind, {numerator}, {denominator}, ratio"
    return comment, ["index", "kind", numerator, denominator, "ratio"], table


def decay_table(F: GroupField, M: ExpansiveMatrix, s: float = 0.0) -> Tuple[str, List[str], List[List[Any]]]:
    """
    (log(1 + rho), log max-modulus) pairs of one scale slice.

    The max-modulus on a shell is taken over that shell and every shell
    further out, for shells with rho >= 1; values below DECAY_FLOOR times the
    peak are dropped.
    """
    j = _nearest_scale(F, s)
    rho = np.asarray(quasi_norm(build_ellipsoid(M), M, field_points(F)))
    mags = np.abs(F.values[j]).ravel()
    peak = float(mags.max()) if mags.size else 0.0
    table = []
    if peak > 0:
        for level in np.unique(rho[rho >= 1]):
            envelope = float(mags[rho >= level].max())
            if envelope > DECAY_FLOOR * peak:
                table.append([float(np.log1p(level)), math.log(envelope)])
    comment = f"radial decay at s={F.scales[j]:.12g}; columns: log_radius = log(1 + rho_A(x)), log_max_modulus"
    return comment, ["log_radius", "log_max_modulus"], table


def write_table(path: str, comment: str, header: List[str], rows: List[List[Any]]) -> int:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# {comment}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return len(rows)


def emit_plot_data(
    source: Any,
    kind: str,
    path: str,
    M: Optional[ExpansiveMatrix] = None,
    scale_index: Optional[int] = None,
) -> int:
    """
    Write plot data for a field or a report as CSV.

    Args:
        source: GroupField for "slice" and "decay"; a report dict, CheckResult
            or list of rows for "ratio"
        kind: One of "slice", "ratio", "decay"
        path: Output CSV path
        M: Expansive matrix, required for "decay"
        scale_index: Slice to emit for "slice" (default: the scale closest to 0)

    Returns:
        Number of data rows written

    Raises:
        ValueError: For unknown kinds or a missing matrix
    """
    if kind == "slice":
        table = slice_table(source, scale_index)
    elif kind == "ratio":
        table = ratio_table(source)
    elif kind == "decay":
        if M is None:
            raise ValueError("Decay plot data needs the expansive matrix")
        table = decay_table(source, M)
    else:
        raise ValueError(f"Unknown plot kind: {kind} (expected one of {', '.join(PLOT_KINDS)})")
    count = write_table(path, *table)
    logger.debug(f"Wrote {count} {kind} rows to {path}")
    return count
