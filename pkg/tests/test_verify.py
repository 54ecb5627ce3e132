import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from decolab.errors import DomainError
from decolab.models import ModelSpec, PointCloud
from decolab.render import FrameSpec
from decolab.verify import (AffineMap, VerificationReport, align_similarity,
                            classify_decoration_level, extract_boundary, hausdorff,
                            model_boundary, semihyperbolic_test)

pts = st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
               min_size=1, max_size=20)


def test_report_thresholds(tmp_path):
    r = VerificationReport("t", {"a": 0.1, "b": 3}, {"a_max": 0.2, "b_min": 2})
    assert r.passed
    assert not VerificationReport("t", {"a": 0.3}, {"a_max": 0.2}).passed
    d = json.loads(r.to_json(tmp_path / "r.json"))
    assert set(d) >= {"test", "metrics", "thresholds", "passed", "artifacts"}
    with pytest.raises(ValueError):
        VerificationReport("t", {"a": 1}, {"a_between": 1})


def test_boundary_at_cusp():
    cl = extract_boundary(FrameSpec(0.25, 0.1, (64, 64), 500))
    assert len(cl) > 0
    assert np.min(np.abs(cl.plane - 0.25)) < 0.01


def test_boundary_inside_cardioid():
    with pytest.raises(DomainError, match="no boundary"):
        extract_boundary(FrameSpec(-0.1, 0.05, (32, 32), 500))


def test_hausdorff_examples():
    a = PointCloud([0, 1, 1j])
    assert hausdorff(a, a) == 0
    assert hausdorff(PointCloud([0]), PointCloud([3, 4j])) == 4
    assert hausdorff(a, PointCloud(a.points + (0.3 - 0.4j))) == pytest.approx(0.5)


@settings(max_examples=50, deadline=None)
@given(pts, pts, pts)
def test_hausdorff_metric(a, b, c):
    A, B, C = PointCloud(a), PointCloud(b), PointCloud(c)
    assert hausdorff(A, B) == hausdorff(B, A)
    assert hausdorff(A, C) <= hausdorff(A, B) + hausdorff(B, C) + 1e-12


def _shape(n=400, seed=0):
    rng = np.random.default_rng(seed)
    t = np.sort(rng.uniform(0, 2 * np.pi, n))
    return (1 + 0.3 * np.cos(3 * t) + 0.1 * np.sin(2 * t)) * np.exp(1j * t) + 0.4


def test_align_exact_affine():
    m = PointCloud(_shape())
    t = PointCloud(2j * m.points + 5)
    amap, res = align_similarity(m, t, 30)
    assert abs(amap.a - 2j) < 1e-9 and abs(amap.b - 5) < 1e-9 and res < 1e-9


def test_align_noise():
    m = PointCloud(_shape())
    rng = np.random.default_rng(1)
    noise = 0.01 * (rng.uniform(-1, 1, len(m)) + 1j * rng.uniform(-1, 1, len(m)))
    t = PointCloud(m.points + noise)
    _, res = align_similarity(m, t, 30)
    assert res < 0.02


def test_align_invariance():
    m = PointCloud(_shape(300, 2))
    t = PointCloud(0.7 * _shape(300, 3) * np.exp(0.4j) - 1)
    _, r1 = align_similarity(m, t, 30)
    A, B = 3 - 1j, 2 + 7j
    _, r2 = align_similarity(PointCloud(A * m.points + B), PointCloud(A * t.points + B), 30)
    assert abs(r1 - r2) < 1e-9


def test_align_degenerate():
    with pytest.raises(DomainError):
        align_similarity(PointCloud([1, 1]), PointCloud([0, 1]))


def test_classify_round_trip():
    model = PointCloud([0, 1, 2j, 3 + 3j], [0, 1, 2, 3])
    wm = AffineMap(0.5j, 1 + 1j)
    for p, m in zip(model.plane, model.levels):
        assert classify_decoration_level(complex(wm(PointCloud([p])).plane[0]), wm,
                                         model, 1e-9) == m
    assert classify_decoration_level(100, wm, model, 0.1) is None


def test_model_boundary_contains_decorations():
    spec = ModelSpec.douady("-0.10+0.97i", 220)
    fr = FrameSpec(0, 8, (96, 96), 500)
    cl = model_boundary(spec, fr)
    plain = extract_boundary(fr)
    assert len(cl) > len(plain)


def test_semihyp_examples():
    r = semihyperbolic_test(-2, 10_000, delta=0.5)
    assert r.classification == "heuristically semihyperbolic"
    assert r.metrics["min_distance"] == pytest.approx(2)
    assert "heuristic" in r.notes
    assert semihyperbolic_test(0, 1000).classification == "superattracting-like"
    assert semihyperbolic_test(-1, 1000).classification == "superattracting-like"
    assert semihyperbolic_test(1, 1000).classification == "heuristically semihyperbolic"
    with pytest.raises(DomainError):
        semihyperbolic_test(0, 50, transient=100)


def test_semihyp_monotone_and_deterministic():
    c = "-0.1010963638456221+0.9562865108091415i"
    a = semihyperbolic_test(c, 500, delta=1e-3)
    b = semihyperbolic_test(c, 2000, delta=1e-3)
    assert b.metrics["min_distance"] <= a.metrics["min_distance"]
    assert semihyperbolic_test(c, 500, delta=1e-3).to_json() == a.to_json()
