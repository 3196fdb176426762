import json
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from plotkit import (
    PlotConfig,
    RenderError,
    load_grid,
    mask_below,
    render_heatmap,
    sidecar_threshold,
    white_cell_count,
)
from plotkit.cli import main


def write_csv(path: Path, deltas, ps, rows, initial_overlap=None):
    lines = ["delta\\p," + ",".join(str(p) for p in ps)]
    for d, row in zip(deltas, rows):
        lines.append(",".join([f"{d:.12g}"] + [f"{v:.12g}" for v in row]))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    if initial_overlap is not None:
        sidecar = path.with_name(path.name + ".json")
        sidecar.write_text(json.dumps({"initial_overlap": initial_overlap}))
    return path


def white_pixel_count(png_path: Path) -> int:
    rgb = np.asarray(Image.open(png_path).convert("RGB"))
    return int(np.all(rgb == 255, axis=-1).sum())


@pytest.fixture()
def grid_csv(tmp_path):
    return write_csv(
        tmp_path / "grid.csv",
        deltas=[0.5, 1.0],
        ps=[1, 2, 3],
        rows=[[0.1, 0.9, 0.85], [0.5, 1.0, 0.2]],
        initial_overlap=0.4,
    )


class TestLoadGrid:
    def test_parses_shape_and_values(self, grid_csv):
        grid = load_grid(grid_csv)
        assert np.allclose(grid.delta_values, [0.5, 1.0])
        assert np.array_equal(grid.p_values, [1, 2, 3])
        assert grid.overlaps.shape == (2, 3)
        assert grid.overlaps[1, 2] == pytest.approx(0.2)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("delta,1,2\n0.5,0.1,0.2\n")
        with pytest.raises(RenderError, match="row 1"):
            load_grid(path)

    def test_bad_row_named(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("delta\\p,1,2\n0.5,0.1,0.2\n1.0,oops,0.2\n")
        with pytest.raises(RenderError, match="row 3"):
            load_grid(path)

    def test_field_count_mismatch(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("delta\\p,1,2\n0.5,0.1\n")
        with pytest.raises(RenderError, match="row 2"):
            load_grid(path)


class TestMask:
    def test_spec_example_exactly_one_white_cell(self):
        overlaps = np.array([[0.1, 0.9], [0.5, 1.0]])
        assert white_cell_count(overlaps, 0.4) == 1
        masked = mask_below(overlaps, 0.4)
        assert bool(masked.mask[0, 0]) is True
        assert masked.mask.sum() == 1

    def test_nan_cells_masked(self):
        overlaps = np.array([[np.nan, 0.9]])
        assert white_cell_count(overlaps, 0.1) == 1

    def test_threshold_boundary_is_not_white(self):
        overlaps = np.array([[0.4, 0.39999]])
        assert white_cell_count(overlaps, 0.4) == 1

    def test_monotone_color_scale(self):
        # higher overlap maps to a higher position in the color scale
        import matplotlib.pyplot as plt
        from matplotlib.colors import Normalize

        norm = Normalize(vmin=0.4, vmax=1.0)
        cmap = plt.get_cmap("viridis")
        values = np.linspace(0.4, 1.0, 50)
        luminance = [
            0.2126 * r + 0.7152 * g + 0.0722 * b
            for r, g, b, _ in (cmap(norm(v)) for v in values)
        ]
        assert np.all(np.diff(norm(values)) > 0)
        assert np.all(np.diff(luminance) > -1e-12)


class TestSidecar:
    def test_reads_initial_overlap(self, grid_csv):
        assert sidecar_threshold(grid_csv) == pytest.approx(0.4)

    def test_missing_sidecar_is_error(self, tmp_path):
        path = write_csv(tmp_path / "plain.csv", [0.5], [1], [[0.7]])
        with pytest.raises(RenderError, match="sidecar"):
            sidecar_threshold(path)


class TestRender:
    def test_renders_png(self, grid_csv, tmp_path):
        out = render_heatmap(PlotConfig(grid_csv, tmp_path / "grid.png"))
        assert out.exists()
        image = Image.open(out)
        assert image.format == "PNG"
        assert image.size[0] > 100

    def test_byte_deterministic(self, grid_csv, tmp_path):
        a = render_heatmap(PlotConfig(grid_csv, tmp_path / "a.png"))
        b = render_heatmap(PlotConfig(grid_csv, tmp_path / "b.png"))
        assert a.read_bytes() == b.read_bytes()

    def test_white_area_tracks_masked_cells(self, grid_csv, tmp_path):
        # cells below threshold: 2 at t=0.4 (0.1, 0.2); 3 at t=0.6 (0.1, 0.5, 0.2)
        base = white_pixel_count(render_heatmap(
            PlotConfig(grid_csv, tmp_path / "t0.png", threshold=0.0)
        ))
        two = white_pixel_count(render_heatmap(
            PlotConfig(grid_csv, tmp_path / "t4.png", threshold=0.4)
        ))
        three = white_pixel_count(render_heatmap(
            PlotConfig(grid_csv, tmp_path / "t6.png", threshold=0.6)
        ))
        assert two > base
        assert three > two
        ratio = (two - base) / (three - base)
        assert ratio == pytest.approx(2.0 / 3.0, rel=0.15)

    def test_all_high_grid_has_no_white_cells(self, tmp_path):
        path = write_csv(tmp_path / "ones.csv", [0.5, 1.0], [1, 2],
                         [[1.0, 1.0], [1.0, 1.0]])
        base = white_pixel_count(render_heatmap(
            PlotConfig(path, tmp_path / "ones0.png", threshold=0.0)
        ))
        full = white_pixel_count(render_heatmap(
            PlotConfig(path, tmp_path / "ones.png", threshold=0.9)
        ))
        # identical figure chrome, no masked cells: white counts nearly match
        assert abs(full - base) < 0.02 * base

    def test_invalid_threshold_rejected(self, grid_csv, tmp_path):
        with pytest.raises(RenderError):
            PlotConfig(grid_csv, tmp_path / "x.png", threshold=1.5)


class TestCli:
    def test_basic_invocation(self, grid_csv, tmp_path, capsys):
        rc = main(["--input", str(grid_csv), "--out", str(tmp_path / "o.png")])
        assert rc == 0
        assert (tmp_path / "o.png").exists()
        assert "wrote" in capsys.readouterr().out

    def test_explicit_threshold(self, grid_csv, tmp_path):
        rc = main(["--input", str(grid_csv), "--out", str(tmp_path / "o.png"),
                   "--threshold", "0.6"])
        assert rc == 0

    def test_bad_threshold_value(self, grid_csv, tmp_path, capsys):
        rc = main(["--input", str(grid_csv), "--out", str(tmp_path / "o.png"),
                   "--threshold", "lots"])
        assert rc == 1
        assert "usage error" in capsys.readouterr().err

    def test_missing_sidecar_exit_code(self, tmp_path, capsys):
        path = write_csv(tmp_path / "plain.csv", [0.5], [1], [[0.7]])
        rc = main(["--input", str(path), "--out", str(tmp_path / "o.png")])
        assert rc == 2
        assert "sidecar" in capsys.readouterr().err

    def test_malformed_csv_exit_code(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("delta\\p,1\nbogus\n")
        rc = main(["--input", str(path), "--out", str(tmp_path / "o.png")])
        assert rc == 2
        assert "row" in capsys.readouterr().err
