import numpy as np
import pytest

from decolab.errors import DomainError
from decolab.models import PointCloud
from decolab.render import (INTERIOR, FrameSpec, ZoomSchedule, load_counts, overlay,
                            render, render_auto, render_deep, zoom_sequence)
from decolab.solvers import solve_superattracting_center

from conftest import Q_STAR, S1


def test_center_interior():
    img = render(FrameSpec(0, 4, (33, 33), 200))
    assert img.center_pixel() == INTERIOR


def test_all_escape_near_two():
    img = render(FrameSpec(2, 0.1, (16, 16), 200))
    assert not img.interior.any()


def test_frame_validation():
    with pytest.raises(DomainError):
        FrameSpec(0, 0)
    with pytest.raises(DomainError):
        FrameSpec(0, 1, coloring="rainbow")
    with pytest.raises(DomainError):
        FrameSpec(0, 1, mode=("newton", 1))


def test_precision_policy(monkeypatch):
    fr = FrameSpec(0, 10 ** -11.9)
    assert fr.precision >= 64 + int(np.ceil(np.log2(4 / 10 ** -11.9)))
    monkeypatch.setenv("DECOLAB_PRECISION_BITS", "500")
    assert fr.precision == 500


def test_conjugation_symmetry():
    img = render(FrameSpec(-0.5, 2.5, (40, 40), 300))
    assert np.array_equal(img.counts, img.counts[::-1, :])


def test_monotone_refinement():
    fr = FrameSpec("-0.75+0.1i", 0.05, (40, 40), 200)
    a = render(fr)
    b = render(FrameSpec(fr.center, fr.width, fr.pixels, 400))
    assert not np.any(~a.interior & b.interior)


def test_hp_engine_matches_float_engine():
    fr = FrameSpec("-0.7435+0.1314i", 1e-3, (24, 24), 500)
    a, b = render(fr, "float64"), render(fr, "hp", bits=128)
    assert np.mean(np.abs(a.counts - b.counts) <= 1) >= 0.99


def test_perturbation_agrees_with_direct():
    s1 = solve_superattracting_center(Q_STAR, S1)
    fr = FrameSpec(s1, 1e-8, (24, 24), 2000)
    a = render_deep(fr)
    b = render(fr, "hp")
    assert a.meta["engine"] == "perturb"
    agree = (np.abs(a.counts - b.counts) <= 1) | (a.interior & b.interior)
    assert agree.mean() >= 0.99


def test_julia_mode():
    fr = FrameSpec(0, 3, (32, 32), 300, ("julia", "-1"))
    img = render(fr)
    assert img.center_pixel() == INTERIOR
    deep = render_deep(FrameSpec(0, 1e-3, (16, 16), 300, ("julia", "-1")))
    assert deep.center_pixel() == INTERIOR


def test_auto_dispatch():
    assert render_auto(FrameSpec(0, 4, (8, 8), 50)).meta["engine"] == "float64"
    assert render_auto(FrameSpec(0, 4, (8, 8), 50), "on").meta["engine"] == "perturb"


def test_overlay():
    img = render(FrameSpec(0, 4, (32, 32), 100))
    same = overlay(img, PointCloud([]))
    assert np.array_equal(same.rgb, img.rgb) and same.meta["overlay_outside"] == 0
    marked = overlay(img, PointCloud([0j, 100 + 0j]))
    # the center point lands on one of the four central pixels
    assert (marked.rgb[15:17, 15:17] == (255, 0, 0)).all(-1).any()
    assert marked.meta["overlay_outside"] == 1


def test_save_formats(tmp_path):
    img = render(FrameSpec(0, 4, (20, 10), 50, coloring="distance"))
    img.save(tmp_path / "a.png")
    img.save(tmp_path / "a.ppm")
    assert (tmp_path / "a.ppm").read_bytes().startswith(b"P6\n20 10\n255\n")
    img.save_counts(tmp_path / "a.counts")
    assert np.array_equal(load_counts(tmp_path / "a.counts"), img.counts)
    from PIL import Image
    assert Image.open(tmp_path / "a.png").size == (20, 10)


def test_zoom_schedule():
    sch = ZoomSchedule(0, 10 ** -1.5, 10 ** -11.9, 15)
    w = sch.widths()
    assert len(w) == 15 and w[0] == 10 ** -1.5 and w[-1] == 10 ** -11.9
    assert np.allclose(np.diff(np.log10(w)), -10.4 / 14)
    assert ZoomSchedule(0, 1, 0.5, 2).widths() == [1, 0.5]
    with pytest.raises(DomainError):
        ZoomSchedule(0, 1, 0.5, 1)


def test_zoom_sequence():
    imgs = zoom_sequence(ZoomSchedule("-0.75+0.1i", 0.1, 0.01, 3),
                         FrameSpec(0, 1, (8, 8), 100))
    assert [i.frame.width for i in imgs] == pytest.approx([0.1, 0.1 ** 1.5, 0.01])
