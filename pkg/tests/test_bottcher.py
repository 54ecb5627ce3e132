import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from decolab.bottcher import (green_batch, green_K, green_M, inverse_phi_c,
                              inverse_phi_c_batch, inverse_phi_M, inverse_phi_M_batch,
                              phi_c, phi_c_batch, phi_M, phi_M_batch)
from decolab.errors import DomainError
from decolab.hp import hp


def test_green_examples():
    assert math.isclose(green_K(0, 4).green, math.log(4), rel_tol=1e-14)
    g = green_K(0, 0.5)
    assert g.green == 0 and not g.valid
    assert green_K(-1, 0).green == 0


def test_phi_M_normalization():
    assert abs(complex(phi_M(1e6)) / 1e6 - 1) < 1e-5


def test_phi_M_real_axis():
    w = complex(phi_M(-3))
    assert abs(w.imag) < 1e-30 and w.real < -2


def test_phi_M_undefined_on_M():
    with pytest.raises(DomainError, match="undefined on M"):
        phi_M(-1)


def test_phi_c_closed_forms():
    assert complex(phi_c(0, "0.3+2i")) == pytest.approx(0.3 + 2j, abs=1e-30)
    assert abs(complex(phi_c(-2, 3)) - (3 + math.sqrt(5)) / 2) < 1e-25
    z = 1.5 + 1.2j
    assert abs(complex(phi_c(-2, z)) - (z + cmath.sqrt(z - 2) * cmath.sqrt(z + 2)) / 2) < 1e-14


def test_phi_magnitude_is_green():
    for c in (1, "0.5+0.9i", -2.5, "0.2+1.3i"):
        w = phi_M(c)
        assert abs(math.log(abs(complex(w))) - green_M(c)) < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.complex_numbers(max_magnitude=1.2, allow_nan=False, allow_infinity=False),
       st.floats(0.05, 3.0), st.floats(0, 2 * math.pi))
def test_functional_equation(c, g, t):
    # a point of potential above G_c(0) (or any point when K_c is connected)
    w = cmath.exp(complex(g + max(green_K(c, 0).green, 0) * 2, t))
    z = inverse_phi_c(c, w)
    fz = phi_c(c, z)
    f2 = phi_c(c, z * z + hp(c))
    assert abs(complex(f2 - fz * fz)) < 1e-10 * abs(complex(fz)) ** 2


@pytest.mark.parametrize("r", [1.5, 2.0, 10.0])
def test_inverse_round_trip_on_circles(r):
    for j in range(12):
        w = r * cmath.exp(2j * math.pi * (j + 0.1) / 12)
        c = inverse_phi_M(w)
        assert abs(complex(phi_M(c)) - w) < 1e-10


def test_inverse_large_and_real():
    assert abs(complex(inverse_phi_M(1e6)) / 1e6 - 1) < 1e-5
    c = complex(inverse_phi_M(-3))
    assert abs(c.imag) < 1e-20 and c.real < -2


def test_inverse_domain():
    with pytest.raises(DomainError):
        inverse_phi_M(0.99)
    with pytest.raises(DomainError):
        inverse_phi_c(0, 1.0)


def test_inverse_phi_c_dynamical_identity():
    assert abs(complex(inverse_phi_c(0, "2+1i")) - (2 + 1j)) < 1e-25
    z = complex(inverse_phi_c(-2, (3 + math.sqrt(5)) / 2))
    assert abs(z - 3) < 1e-14


def test_branch_continuity_along_ray():
    ws = np.exp(np.linspace(math.log(1.05), math.log(3.0), 60)) * cmath.exp(0.7j)
    cs = np.array([complex(inverse_phi_M(w)) for w in ws])
    # no branch jumps: each increment is comparable to its neighbours
    dc = np.abs(np.diff(cs))
    assert np.all(dc[1:] < 10 * dc[:-1]) and np.all(dc[:-1] < 10 * dc[1:])


def test_batch_agrees_with_scalar():
    rng = np.random.default_rng(1)
    w = np.exp(rng.uniform(0.05, 2, 50) + 1j * rng.uniform(0, 2 * np.pi, 50))
    c = inverse_phi_M_batch(w)
    ok = np.isfinite(c)
    assert ok.mean() > 0.95
    assert np.max(np.abs(phi_M_batch(c[ok]) - w[ok]) / np.abs(w[ok])) < 1e-9
    for wi, ci in list(zip(w[ok], c[ok]))[:5]:
        assert abs(complex(inverse_phi_M(wi)) - ci) < 1e-9
    g = green_batch(c[ok])
    assert np.allclose(g, np.log(np.abs(w[ok])), rtol=1e-9)


def test_batch_dynamical_plane():
    cc = -0.123 + 0.745j
    rng = np.random.default_rng(2)
    w = np.exp(rng.uniform(0.05, 2, 40) + 1j * rng.uniform(0, 2 * np.pi, 40))
    z = inverse_phi_c_batch(cc, w)
    ok = np.isfinite(z)
    assert ok.mean() > 0.95
    assert np.allclose(green_batch(cc, z[ok]), np.log(np.abs(w[ok])), rtol=1e-9)
    assert np.allclose(phi_c_batch(cc, z[ok]), w[ok], rtol=1e-8)


@pytest.mark.parametrize("c", [-0.1360976659383244 - 0.8997979711738228j,
                               -0.1393 + 1.0014j,
                               -0.0006295046148779323 - 0.7383916330451161j])
def test_tracked_branch_near_boundary(c):
    # small potential, where the principal product picks a wrong root
    assert green_M(c) < 1e-3
    w = phi_M(c)
    assert abs(complex(inverse_phi_M(w)) - c) < 1e-12
    assert abs(complex(phi_c(c, c) - w)) < 1e-12


def test_batch_floor():
    c = np.array([-0.1360976659383244 - 0.8997979711738228j, 0.5 + 0.5j, 3.0])
    out = phi_M_batch(c)
    assert np.isnan(out[0])
    assert abs(out[1] - complex(phi_M(0.5 + 0.5j))) < 1e-12
    assert abs(out[2] - complex(phi_M(3.0))) < 1e-12


def test_green_batch_deep_escape():
    # escape after more than 1023 iterations must not overflow
    g = green_batch(np.array([0.2501 + 0j]), n_max=5000)
    assert 0 < g[0] < 1e-3
