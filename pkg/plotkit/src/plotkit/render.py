"""Render phase-diagram sweep CSVs as heatmap images.

Input is the sweep CSV grammar: header ``delta\\p,p1,p2,...`` then one row
per delta with squared overlaps.  Cells whose overlap falls below a
threshold (the run's initial overlap, read from the ``<csv>.json`` sidecar,
or an explicit value) are drawn white; everything else is colored on a
perceptually uniform map spanning [threshold, 1].  Delta runs up the
vertical axis, p along the horizontal, matching the usual presentation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

CSV_HEADER_PREFIX = "delta\\p"
DEFAULT_COLORMAP = "viridis"
DEFAULT_DPI = 150


class RenderError(Exception):
    """Malformed input or unusable configuration."""


@dataclass(frozen=True)
class PlotConfig:
    input_path: Path
    output_path: Path
    colormap: str = DEFAULT_COLORMAP
    threshold: float | None = None  # None: read initial_overlap from sidecar
    x_label: str = "p"
    y_label: str = "$\\Delta$"
    title: str | None = None
    dpi: int = DEFAULT_DPI

    def __post_init__(self):
        object.__setattr__(self, "input_path", Path(self.input_path))
        object.__setattr__(self, "output_path", Path(self.output_path))
        if self.threshold is not None and not 0.0 <= self.threshold <= 1.0:
            raise RenderError(f"threshold {self.threshold} outside [0, 1]")
        if self.dpi < 10:
            raise RenderError("dpi must be at least 10")


@dataclass(frozen=True)
class SweepGrid:
    delta_values: np.ndarray
    p_values: np.ndarray
    overlaps: np.ndarray  # (n_delta, n_p)


def load_grid(path: Path) -> SweepGrid:
    """Parse a sweep CSV; raises RenderError naming the offending row."""
    lines = Path(path).read_text(encoding="ascii").splitlines()
    if not lines:
        raise RenderError(f"{path}: empty file")
    header = lines[0].split(",")
    if header[0] != CSV_HEADER_PREFIX:
        raise RenderError(
            f"{path}: row 1: header must start with {CSV_HEADER_PREFIX!r}"
        )
    try:
        p_values = np.array([int(tok) for tok in header[1:]], dtype=np.int64)
    except ValueError:
        raise RenderError(f"{path}: row 1: non-integer p column") from None
    if p_values.size == 0:
        raise RenderError(f"{path}: row 1: no p columns")

    deltas: list[float] = []
    rows: list[list[float]] = []
    for row_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        tokens = line.split(",")
        if len(tokens) != p_values.size + 1:
            raise RenderError(
                f"{path}: row {row_no}: expected {p_values.size + 1} fields, "
                f"got {len(tokens)}"
            )
        try:
            deltas.append(float(tokens[0]))
            rows.append([float(tok) for tok in tokens[1:]])
        except ValueError:
            raise RenderError(f"{path}: row {row_no}: non-numeric entry") from None
    if not rows:
        raise RenderError(f"{path}: no data rows")
    return SweepGrid(
        delta_values=np.array(deltas),
        p_values=p_values,
        overlaps=np.array(rows),
    )


def sidecar_threshold(csv_path: Path) -> float:
    """initial_overlap from the <csv>.json sidecar written by the sweep tool."""
    sidecar = csv_path.with_name(csv_path.name + ".json")
    if not sidecar.exists():
        raise RenderError(
            f"auto threshold needs the sidecar {sidecar}, which does not exist; "
            "pass an explicit threshold instead"
        )
    try:
        value = json.loads(sidecar.read_text(encoding="ascii"))["initial_overlap"]
    except (json.JSONDecodeError, KeyError) as exc:
        raise RenderError(f"{sidecar}: missing or invalid initial_overlap") from exc
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise RenderError(f"{sidecar}: initial_overlap {value} outside [0, 1]")
    return value


def mask_below(overlaps: np.ndarray, threshold: float) -> np.ma.MaskedArray:
    """Masked view of the grid: below-threshold and missing cells are masked."""
    bad = ~np.isfinite(overlaps)
    below = np.zeros_like(bad)
    below[~bad] = overlaps[~bad] < threshold
    return np.ma.masked_array(overlaps, mask=bad | below)


def white_cell_count(overlaps: np.ndarray, threshold: float) -> int:
    return int(mask_below(overlaps, threshold).mask.sum())


def render_heatmap(config: PlotConfig) -> Path:
    """Render the CSV to a PNG; deterministic for fixed inputs and dpi."""
    grid = load_grid(config.input_path)
    threshold = (
        config.threshold if config.threshold is not None
        else sidecar_threshold(config.input_path)
    )
    masked = mask_below(grid.overlaps, threshold)

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    try:
        cmap = plt.get_cmap(config.colormap).copy()
        cmap.set_bad("white")
        mesh = ax.pcolormesh(
            _edges(grid.p_values.astype(float)),
            _edges(grid.delta_values),
            masked,
            cmap=cmap,
            vmin=threshold,
            vmax=1.0,
            rasterized=False,
        )
        ax.set_xlabel(config.x_label)
        ax.set_ylabel(config.y_label)
        if config.title:
            ax.set_title(config.title)
        colorbar = fig.colorbar(mesh, ax=ax)
        colorbar.set_label("squared overlap")
        fig.tight_layout()
        config.output_path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(
            config.output_path,
            dpi=config.dpi,
            metadata={"Software": "plotkit"},
        )
    finally:
        plt.close(fig)
    return config.output_path


def _edges(centers: np.ndarray) -> np.ndarray:
    """Cell edges bracketing the given center coordinates."""
    centers = np.asarray(centers, dtype=float)
    if centers.size == 1:
        half = 0.5 if centers[0] == 0 else abs(centers[0]) * 0.05 + 0.5
        return np.array([centers[0] - half, centers[0] + half])
    mids = (centers[:-1] + centers[1:]) / 2.0
    first = centers[0] - (mids[0] - centers[0])
    last = centers[-1] + (centers[-1] - mids[-1])
    return np.concatenate([[first], mids, [last]])
