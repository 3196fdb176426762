"""plotkit: heatmap rendering for phase-diagram sweep CSV files."""

from .render import (
    PlotConfig,
    RenderError,
    SweepGrid,
    load_grid,
    mask_below,
    render_heatmap,
    sidecar_threshold,
    white_cell_count,
)

__version__ = "0.1.0"
