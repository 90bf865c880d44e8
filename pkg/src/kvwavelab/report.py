"""Deterministic artifact emission: CSV tables and figure files.

Tables are plain CSV preceded by ``# key=value`` metadata comment lines
(parameters, mesh, artifact version — never timestamps), with floats
printed to 17 significant digits so doubles round-trip exactly and reruns
are byte-diffable.  Figures render through the Agg backend straight to
files next to the tables.
"""

from __future__ import annotations

import math
import os
from typing import Mapping, Optional, Sequence

from .errors import ParseError, ValidationError

__all__ = [
    "ARTIFACT_VERSION",
    "format_value",
    "write_csv",
    "read_csv",
    "plot_series",
]

#: Recorded in every table so downstream consumers can detect format drift.
ARTIFACT_VERSION = "1"


def format_value(value: object) -> str:
    """Render one cell: floats at 17 significant digits, rest as str."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.17g}"
    if isinstance(value, complex):
        return f"{value.real:.17g}{value.imag:+.17g}j"
    return str(value)


def write_csv(
    path: str,
    header: Sequence[str],
    rows: Sequence[Sequence[object]],
    metadata: Optional[Mapping[str, object]] = None,
) -> str:
    """Write a metadata-stamped CSV; returns the path written.

    The file starts with one ``# key=value`` line per metadata entry (in
    the mapping's order, ``artifact_version`` always first), then the
    comma-joined header, then the rows.  Output depends only on the
    arguments, so identical inputs give byte-identical files.
    """
    header = [str(h) for h in header]
    if not header:
        raise ValidationError("CSV needs at least one column")
    for k, row in enumerate(rows):
        if len(row) != len(header):
            raise ValidationError(
                f"row {k} has {len(row)} cells, header has {len(header)}"
            )
    meta = {"artifact_version": ARTIFACT_VERSION}
    if metadata:
        for key, value in metadata.items():
            if key != "artifact_version":
                meta[str(key)] = value
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    lines = [f"# {key}={format_value(value)}" for key, value in meta.items()]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(format_value(cell) for cell in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def read_csv(path: str):
    """Parse a table written by ``write_csv``.

    Returns (metadata, header, rows); cells parse back to float when they
    look numeric, otherwise stay strings.  Round-trips every value at the
    emitted precision.
    """
    metadata = {}
    header: Optional[list] = None
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" not in body:
                    raise ParseError(f"line {lineno}: metadata without '='")
                key, _, value = body.partition("=")
                metadata[key.strip()] = value.strip()
                continue
            cells = line.split(",")
            if header is None:
                header = cells
                continue
            parsed = []
            for cell in cells:
                try:
                    parsed.append(float(cell))
                except ValueError:
                    parsed.append(cell)
            rows.append(parsed)
    if header is None:
        raise ParseError(f"{path}: no header line found")
    return metadata, header, rows


def plot_series(
    path: str,
    x: Sequence[float],
    series: Mapping[str, Sequence[float]],
    xlabel: str,
    ylabel: str,
    title: str = "",
    logx: bool = False,
    logy: bool = False,
) -> str:
    """Render one or more y-series against x to an image file.

    Uses the Agg backend so rendering works headless; the figure is closed
    after saving.  Returns the path written.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if not series:
        raise ValidationError("plot_series needs at least one series")
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    try:
        for label, y in series.items():
            ax.plot(x, y, marker="o", markersize=2.5, linewidth=1.0, label=label)
        if logx:
            ax.set_xscale("log")
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if len(series) > 1:
            ax.legend(loc="best", fontsize=8)
        ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
        fig.savefig(path, dpi=150)
    finally:
        plt.close(fig)
    return path
