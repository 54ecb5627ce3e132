import math

import numpy as np
import pytest

from decolab.bottcher import green_batch
from decolab.errors import DomainError
from decolab.models import (ModelSpec, PointCloud, build_model_K, build_model_M,
                            build_nested_model, check_gamma_chain, gamma_m,
                            rescale_gamma0, sample_julia)

CP = "-0.10+0.97i"


def test_julia_unit_circle():
    j = sample_julia(0, 500)
    assert len(j) == 500
    assert np.max(np.abs(np.abs(j.plane) - 1)) < 1e-10


def test_julia_segment():
    j = sample_julia(-2, 500)
    assert np.all(np.abs(j.plane.imag) < 1e-8)
    assert np.all(np.abs(j.plane.real) <= 2 + 1e-12)


def test_julia_cantor_keeps_beta():
    j = sample_julia(5, 300)
    beta = 0.5 + 1j * math.sqrt(19) / 2
    assert np.min(np.abs(j.plane - beta)) < 1e-8
    # disconnected: the two first-level pieces are far apart
    d = np.abs(j.plane[:, None] - j.plane[None, :])
    np.fill_diagonal(d, np.inf)
    assert d.min() > 0
    assert np.all(np.abs(j.plane) <= 0.5 + math.sqrt(0.25 + 5) + 1e-12)


def test_julia_forward_invariance():
    c = -0.10 + 0.97j
    j = sample_julia(c, 2000)
    img = j.plane ** 2 + c
    d = np.min(np.abs(img[:, None] - j.plane[None, :]), axis=1)
    assert np.median(d) < 0.05


def test_julia_deterministic():
    a, b = sample_julia(CP, 400, seed_rng=3), sample_julia(CP, 400, seed_rng=3)
    assert np.array_equal(a.points, b.points)


def test_rescale_boundary_points():
    spec = ModelSpec(CP, 0.5, 2.0)
    g = rescale_gamma0(PointCloud([0.5, 2.0]), spec)
    assert np.allclose(np.abs(g.plane), [spec.R, spec.R ** 2])


def test_douady_factor():
    spec = ModelSpec.douady(CP, 220)
    assert math.isclose(spec.scale, 220 ** 1.5)
    assert math.isclose(spec.R, 220)


def test_rescale_rejects_bad_radii():
    with pytest.raises(DomainError, match="bracket"):
        rescale_gamma0(sample_julia(CP, 200), ModelSpec(CP, 0.5, 1.0))


def test_gamma_m_roots():
    g = gamma_m(PointCloud([4.0]), 1)
    assert sorted(np.round(g.plane.real, 12)) == [-2, 2]
    g0 = PointCloud([3 + 1j])
    assert np.array_equal(gamma_m(g0, 0).plane, g0.plane)
    assert len(gamma_m(g0, 3)) == 8


def test_gamma_chain():
    spec = ModelSpec.douady(CP, 220)
    g0 = rescale_gamma0(sample_julia(CP, 300), spec)
    spans = check_gamma_chain([gamma_m(g0, m) for m in range(7)], spec.R)
    assert len(spans) == 7


def test_model_M_bands_and_counts():
    spec = ModelSpec.douady(CP, 220, m_max=4, samples_per_level=60)
    cloud = build_model_M(spec)
    assert len(cloud) <= 60 * (2 ** 5 - 1)
    g = green_batch(cloud.plane)
    m = cloud.levels
    lo, hi = 2.0 ** -m * math.log(220), 2.0 ** (1 - m) * math.log(220)
    assert np.mean((g > lo) & (g < hi)) >= 0.99


def test_model_K_identity_at_zero():
    spec = ModelSpec.douady(CP, 220, m_max=2, samples_per_level=40)
    cloud = build_model_K(0, spec)
    j = sample_julia(CP, 40)
    g0 = rescale_gamma0(j, spec)
    expect = np.concatenate([gamma_m(g0, m).plane for m in range(3)])
    assert np.allclose(np.sort_complex(cloud.plane), np.sort_complex(expect))


def test_model_K_rabbit_bands():
    c = -0.123 + 0.745j
    spec = ModelSpec.douady(CP, 220, m_max=3, samples_per_level=40)
    cloud = build_model_K(c, spec)
    g = green_batch(c, cloud.plane)
    m = cloud.levels
    ok = (g > 2.0 ** -m * math.log(220)) & (g < 2.0 ** (1 - m) * math.log(220))
    assert ok.mean() >= 0.99


def test_nested_reduces_to_plain():
    spec = ModelSpec.douady(CP, 220, m_max=2, samples_per_level=40)
    j = sample_julia(CP, 40)
    a = build_model_M(spec, julia=j)
    b = build_nested_model(spec, j)
    assert np.array_equal(a.points, b.points)


def test_nested_one_level():
    inner_spec = ModelSpec.douady(CP, 220, m_max=1, samples_per_level=30)
    inner = build_model_K(0, inner_spec)
    # bracket the inner cloud by outer radii
    r = np.abs(inner.plane)
    outer = ModelSpec(CP, 0.9 * r.min(), 1.1 * r.max(), m_max=1)
    cloud = build_nested_model(outer, inner)
    g = green_batch(cloud.plane)
    m = cloud.levels
    assert np.all(g > 2.0 ** -m * math.log(outer.R) * 0.999)


def test_csv_round_trip(tmp_path):
    cl = PointCloud([1 + 2j, -0.5 + 0.25j], [0, 3], origin="0.1+0.2i")
    p = tmp_path / "c.csv"
    cl.to_csv(p)
    assert p.read_text().splitlines()[0] == "re,im,level"
    back = PointCloud.from_csv(p)
    assert np.allclose(back.plane, cl.plane, rtol=0, atol=1e-15)
    assert list(back.levels) == [0, 3]


def test_csv_deep_origin_keeps_offsets(tmp_path):
    o = "0.36266849381916837+0.64502388598639611i"
    cl = PointCloud(np.array([1e-13, 2e-13j]), origin=o)
    cl.to_csv(tmp_path / "d.csv")
    back = PointCloud.from_csv(tmp_path / "d.csv").with_origin(o)
    assert np.allclose(back.points, cl.points, rtol=1e-6, atol=0)


def test_binary_round_trip(tmp_path):
    cl = PointCloud([1 + 2j, 3 - 1j], [1, 2])
    cl.to_binary(tmp_path / "c.bin")
    back = PointCloud.from_binary(tmp_path / "c.bin")
    assert np.array_equal(back.points, cl.points) and list(back.levels) == [1, 2]


def test_dedup_and_diameter():
    cl = PointCloud([0, 1e-9, 1, 1j])
    assert len(cl.dedup(1e-6)) == 3
    assert math.isclose(PointCloud([0, 3, 4j]).diameter(), 5)
