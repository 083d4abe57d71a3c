"""Tests for offline figure rendering from plot data."""

import matplotlib
import numpy as np
import pandas as pd
import pytest

from mellinsio.figures import draw_overview, figure_kind, render_figures
from mellinsio.layout import build_canvas, cm_to_in
from mellinsio.loader import save_table
from mellinsio.plots import draw_loop, draw_mu_scan, draw_sv_decay
from mellinsio.styles import apply_style, get_palette


@pytest.fixture
def plot_dir(tmp_path):
    theta = np.linspace(0.0, 2.0 * np.pi, 33)
    save_table(tmp_path / "index.loop_h.csv", pd.DataFrame({"k": range(33), "re": np.cos(theta) + 2, "im": np.sin(theta)}))
    sv = np.logspace(0, -8, 64)
    save_table(tmp_path / "pdo.sv_semi_commutator.csv", pd.DataFrame({"k": np.arange(1, 65), "sigma": sv, "relative": sv}))
    save_table(
        tmp_path / "index.mu_scan.csv",
        pd.DataFrame({"mu": [0.0, 0.5, 1.0], "min_h": [1.0, 0.8, 0.6], "residual": [1e-12, 1e-4, 1e-3], "winding": [0, 0, 0]}),
    )
    save_table(tmp_path / "identities.mellin_gaussian.csv", pd.DataFrame({"x": [0.0, 1.0], "error": [0.0, 1e-12]}))
    save_table(tmp_path / "index.timing.csv", pd.DataFrame({"check": ["a"], "status": ["PASS"], "wall_time_s": [0.1]}))
    return tmp_path


class TestFigureKinds:
    """Test frame-name dispatch."""

    @pytest.mark.parametrize(
        "name,kind",
        [("loop_h", "loop"), ("sv_regularizer", "sv_decay"), ("mu_scan", "mu_scan"), ("mellin_gaussian", None)],
    )
    def test_kind(self, name, kind):
        assert figure_kind(name) == kind


class TestRenderFigures:
    """Test batch rendering."""

    def test_renders_known_frames(self, plot_dir):
        written = render_figures(plot_dir, style="paper")
        assert sorted(p.name for p in written) == [
            "index.loop_h.png",
            "index.mu_scan.png",
            "index.overview.png",
            "pdo.sv_semi_commutator.png",
        ]
        assert all(p.stat().st_size > 0 for p in written)

    def test_overview_can_be_skipped(self, plot_dir):
        written = render_figures(plot_dir, overview=False)
        assert not any(p.name.endswith("overview.png") for p in written)

    def test_separate_output_directory(self, plot_dir, tmp_path):
        out = tmp_path / "figs"
        written = render_figures(plot_dir, out_dir=out, fmt="pdf")
        assert all(p.parent == out and p.suffix == ".pdf" for p in written)

    def test_unknown_style(self, plot_dir):
        with pytest.raises(ValueError, match="Unknown style"):
            render_figures(plot_dir, style="poster")


class TestDrawers:
    """Test the individual plot modules."""

    def test_overview_panels_are_labeled(self):
        theta = np.linspace(0.0, 2.0 * np.pi, 17)
        frames = [
            ("loop_h", pd.DataFrame({"k": range(17), "re": np.cos(theta) + 2, "im": np.sin(theta)})),
            ("sv_V", pd.DataFrame({"k": np.arange(1, 9), "sigma": np.logspace(0, -3, 8), "relative": np.logspace(0, -3, 8)})),
            ("mu_scan", pd.DataFrame({"mu": [0.0, 1.0], "min_h": [1.0, 0.7], "residual": [1e-12, 1e-4], "winding": [0, 0]})),
            ("sv_regularizer", pd.DataFrame({"k": [1, 2], "sigma": [1.0, 1e-4], "relative": [1.0, 1e-4]})),
        ]
        fig = draw_overview("index", frames, width_cm=6.0, height_cm=5.0)
        axes = [ax for ax in fig.axes if ax.has_data()]
        assert len(axes) == 4
        labels = [text.get_text() for ax in axes for text in ax.texts]
        assert {"A", "B", "C", "D"} <= set(labels)
        assert fig.get_figwidth() == pytest.approx(cm_to_in(18.0))
        assert fig.get_figheight() == pytest.approx(cm_to_in(10.0))

    def test_overview_rejects_unknown_frames(self):
        with pytest.raises(ValueError):
            draw_overview("index", [])
        with pytest.raises(ValueError, match="no drawer"):
            draw_overview("identities", [("mellin_gaussian", pd.DataFrame({"x": [0.0]})), ("sv_V", pd.DataFrame())])

    def test_loop_needs_columns(self):
        fig, (ax,) = build_canvas(1, 8.0, 6.0)
        with pytest.raises(ValueError):
            draw_loop(ax, pd.DataFrame({"x": [1.0]}))

    def test_sv_multi_curve(self):
        fig, (ax,) = build_canvas(1, 8.0, 6.0)
        frame = pd.DataFrame({"k": np.arange(1, 17), "VL-H": np.logspace(0, -5, 16), "LV-H": np.logspace(0, -6, 16)})
        draw_sv_decay(ax, frame, title="calibration")
        assert len(ax.get_lines()) >= 2
        assert ax.get_legend() is not None

    def test_scan_needs_mu(self):
        fig, (ax,) = build_canvas(1, 8.0, 6.0)
        with pytest.raises(ValueError):
            draw_mu_scan(ax, pd.DataFrame({"min_h": [1.0]}))


class TestStylesAndLayout:
    """Test style presets and the panel grid."""

    def test_apply_style(self):
        apply_style("screen", palette="paul_tol")
        assert matplotlib.rcParams["font.size"] == 10
        apply_style("default")

    def test_unknown_palette(self):
        with pytest.raises(ValueError, match="Unknown palette"):
            get_palette("neon")

    def test_palette_is_a_copy(self):
        get_palette("cb_safe").append("#000000")
        assert "#000000" not in get_palette("cb_safe")

    def test_canvas_grid(self):
        fig, axes = build_canvas(5, 18.0, 12.0, max_cols=3)
        assert len(axes) == 5
        assert fig.get_figwidth() == pytest.approx(cm_to_in(18.0))

    def test_canvas_needs_panels(self):
        with pytest.raises(ValueError):
            build_canvas(0, 8.0, 6.0)
