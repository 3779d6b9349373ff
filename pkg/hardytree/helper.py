"""
Artifact writers: CSV and JSON tables with a header block, and a plain-text SVG plot.
"""
import csv
import io
import json
import math
import sys
import traceback
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from hardytree import __version__
from hardytree.config_manager import RunConfig
from hardytree.log.logging import Logger

LOGGER = Logger.get_logger("hardytree")

FLOAT_FORMAT = "{:.12g}"
PLOT_WIDTH, PLOT_HEIGHT, MARGIN = 640, 400, 56


def header(config: RunConfig, **extra) -> Dict[str, str]:
    """Header block recorded at the top of every artifact."""
    block = {
        "command": config.command,
        "input": str(config.input),
        "config_hash": config.config_hash(),
        "grid": str(config.grid),
        "seed": str(config.seed),
        "p": str(config.pnorm),
        "version": __version__,
    }
    block.update({key: str(value) for key, value in extra.items()})
    return block


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return FLOAT_FORMAT.format(value)
    return str(value)


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return _cell(value)
    return value


def render_csv(rows: Sequence[dict], block: Dict[str, str], columns: Optional[Sequence[str]] = None) -> str:
    columns = list(columns) if columns is not None else (list(rows[0]) if rows else [])
    buffer = io.StringIO()
    for key, value in block.items():
        buffer.write("# {}: {}\n".format(key, value))
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(column)) for column in columns])
    return buffer.getvalue()


def render_json(rows: Sequence[dict], block: Dict[str, str], **sections) -> str:
    document = {"header": block, "rows": [{k: _json_value(v) for k, v in row.items()} for row in rows]}
    document.update(sections)
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def write_table(
    rows: Sequence[dict],
    config: RunConfig,
    block: Dict[str, str],
    columns: Optional[Sequence[str]] = None,
    path: Optional[str] = None,
) -> str:
    """
    Renders rows in the configured format and writes them to `path` (stdout when None).

        :return: The rendered text.
    """
    text = render_json(rows, block) if config.format == "json" else render_csv(rows, block, columns)
    _write(text, path)
    return text


def _write(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as e:
        LOGGER.error("Could not write {}: {}\nTraceback: {}".format(path, e, traceback.format_exc()))
        raise
    LOGGER.info("Wrote {}".format(path))


def _scale(values: List[float], size: float, log: bool) -> Tuple[callable, float, float]:
    data = [math.log10(x) for x in values] if log else list(values)
    lo, hi = min(data), max(data)
    if hi - lo < 1e-12:
        lo, hi = lo - 1.0, hi + 1.0

    def to_pixels(x):
        x = math.log10(x) if log else x
        return (x - lo) / (hi - lo) * size

    return to_pixels, lo, hi


def emit_plot(
    points: Iterable[Tuple[float, float]],
    target: float,
    path: str,
    block: Dict[str, str],
    x_label: str = "eps",
    y_label: str = "eps*N",
) -> Optional[str]:
    """
    Log-log plot of (x, y) points with a horizontal target line, as standalone SVG text.

    The y axis falls back to linear when a value is not positive. An empty table writes nothing.
    """
    points = [(float(x), float(y)) for x, y in points]
    if not points:
        LOGGER.warning("Nothing to plot for {}; no SVG written".format(path))
        return None
    xs = [x for x, _ in points]
    ys = [y for _, y in points] + [target]
    log_y = all(y > 0 for y in ys)
    fx, _, _ = _scale(xs, PLOT_WIDTH - 2 * MARGIN, log=all(x > 0 for x in xs))
    fy, _, _ = _scale(ys, PLOT_HEIGHT - 2 * MARGIN, log=log_y)

    def px(x):
        return MARGIN + fx(x)

    def py(y):
        return PLOT_HEIGHT - MARGIN - fy(y)

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        "<!-- {} -->".format("; ".join("{}: {}".format(k, v) for k, v in block.items())),
        '<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{1}" viewBox="0 0 {0} {1}">'.format(
            PLOT_WIDTH, PLOT_HEIGHT
        ),
        '<rect width="100%" height="100%" fill="white"/>',
        '<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="black"/>'.format(
            MARGIN, PLOT_HEIGHT - MARGIN, PLOT_WIDTH - MARGIN
        ),
        '<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="black"/>'.format(MARGIN, MARGIN, PLOT_HEIGHT - MARGIN),
        '<line x1="{0}" y1="{1:.3f}" x2="{2}" y2="{1:.3f}" stroke="red" stroke-dasharray="6,4"/>'.format(
            MARGIN, py(target), PLOT_WIDTH - MARGIN
        ),
    ]
    if len(points) > 1:
        lines.append(
            '<polyline fill="none" stroke="steelblue" points="{}"/>'.format(
                " ".join("{:.3f},{:.3f}".format(px(x), py(y)) for x, y in points)
            )
        )
    lines += ['<circle cx="{:.3f}" cy="{:.3f}" r="3" fill="steelblue"/>'.format(px(x), py(y)) for x, y in points]
    lines += [
        '<text x="{}" y="{}" font-size="12" text-anchor="middle">{}{}</text>'.format(
            PLOT_WIDTH // 2, PLOT_HEIGHT - 16, x_label, " (log)" if all(x > 0 for x in xs) else ""
        ),
        '<text x="16" y="{}" font-size="12" transform="rotate(-90 16 {})" text-anchor="middle">{}{}</text>'.format(
            PLOT_HEIGHT // 2, PLOT_HEIGHT // 2, y_label, " (log)" if log_y else ""
        ),
        '<text x="{}" y="{:.3f}" font-size="11" fill="red">target {}</text>'.format(
            PLOT_WIDTH - MARGIN - 120, py(target) - 4, FLOAT_FORMAT.format(target)
        ),
        "</svg>",
    ]
    text = "\n".join(lines) + "\n"
    _write(text, path)
    return text
