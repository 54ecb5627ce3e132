"""
Decorated model sets.

A Julia set J_{c'} for c' outside M is a Cantor set.  Scaled by rho/rho'**2
it lands in the annulus A(R, R**2), R = rho/rho', and its preimages under
z -> z**(2**m) fill the nested annuli A(R**(1/2**m), R**(2/2**m)).  Pulling
those clouds back by the inverse Böttcher map of M (or of K_c) gives the
decorations of M(c') (or K_c(c')).  Everything here is a finite point cloud.
"""
import io
import math
import struct
from dataclasses import dataclass, field

import gmpy2
import numpy as np

from .bottcher import inverse_phi_c_batch, inverse_phi_M_batch
from .errors import DomainError
from .hp import HPComplex, context, hp

BINARY_MAGIC = b"DCPC"
ANNULUS_RTOL = 1e-12


class PointCloud:
    """
    Finite set of plane points with per-point level labels.

    Points are held as complex128 offsets from an ``origin`` (an
    :class:`HPComplex`), so deep windows keep their relative accuracy even
    when the absolute coordinates need more than 53 bits.

    Parameters
    ----------
    points : array_like of complex
        Offsets from ``origin``.
    levels : array_like of int, optional
        Decoration level per point, -1 when not applicable.
    label : str
    origin : HPComplex or literal, optional
    meta : dict, optional
        Free-form bookkeeping (drop counts, seeds ...).
    """

    def __init__(self, points, levels=None, label="", origin=0, meta=None):
        pts = np.asarray(points, dtype=np.complex128).ravel()
        if levels is None:
            lv = np.full(pts.shape, -1, dtype=np.int32)
        else:
            lv = np.broadcast_to(np.asarray(levels, dtype=np.int32), pts.shape).copy()
        self.points = pts
        self.levels = lv
        self.label = label
        self.origin = hp(origin)
        self.meta = dict(meta or {})

    def __len__(self):
        return self.points.size

    def __repr__(self):
        return f"PointCloud({self.label!r}, n={len(self)}, origin={self.origin})"

    @property
    def plane(self):
        """Absolute coordinates rounded to complex128."""
        return complex(self.origin) + self.points

    def level(self, m):
        sel = self.levels == m
        return PointCloud(self.points[sel], self.levels[sel], self.label, self.origin)

    def with_origin(self, origin):
        """Same points re-expressed as offsets from another origin."""
        origin = hp(origin)
        shift = complex(self.origin - origin)
        return PointCloud(self.points + shift, self.levels, self.label, origin, self.meta)

    def diameter(self):
        """Exact diameter of the point set (convex hull based)."""
        return _diameter(self.points)

    def dedup(self, resolution):
        """Drop points falling in an already occupied grid cell of ``resolution``."""
        keep = dedup_mask(self.points, resolution)
        return PointCloud(self.points[keep], self.levels[keep], self.label,
                          self.origin, self.meta)

    def concat(self, other, label=None):
        other = other.with_origin(self.origin)
        return PointCloud(np.concatenate([self.points, other.points]),
                          np.concatenate([self.levels, other.levels]),
                          self.label if label is None else label, self.origin,
                          {**self.meta, **other.meta})

    # -- persistence ---------------------------------------------------
    def to_csv(self, path):
        """Write ``re,im,level`` rows with absolute coordinates.

        Offsets are added to the origin at the origin's precision, so no
        digits of a deep origin are lost.
        """
        buf = io.StringIO()
        buf.write("re,im,level\n")
        o = self.origin
        if o == 0:
            for p, m in zip(self.points, self.levels):
                buf.write(f"{p.real!r},{p.imag!r},{int(m)}\n")
        else:
            d = o.digits()
            with context(o.precision):
                ov = o.value
                for p, m in zip(self.points, self.levels):
                    v = HPComplex._wrap(ov + gmpy2.mpc(complex(p)), o.precision)
                    buf.write(f"{_fmt(v.re, d)},{_fmt(v.im, d)},{int(m)}\n")
        with open(path, "w") as fh:
            fh.write(buf.getvalue())

    @classmethod
    def from_csv(cls, path, label=None):
        """Read a cloud written by :meth:`to_csv` (or any ``re,im[,level]`` CSV)."""
        with open(path) as fh:
            rows = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
        if rows and rows[0].lower().startswith("re"):
            rows = rows[1:]
        if not rows:
            raise DomainError(f"empty point cloud file {path}")
        parts = [r.split(",") for r in rows]
        long = any(len(p[0].lstrip("+-")) > 24 or len(p[1].lstrip("+-")) > 24 for p in parts)
        levels = [int(p[2]) if len(p) > 2 and p[2] != "" else -1 for p in parts]
        if not long:
            pts = np.array([complex(float(p[0]), float(p[1])) for p in parts])
            return cls(pts, levels, label or str(path))
        digits = max(len(p[0]) + len(p[1]) for p in parts)
        bits = max(256, int(digits * 3.33) + 16)
        origin = HPComplex(f"{parts[0][0]},{parts[0][1]}", bits)
        with context(bits):
            offs = [complex(HPComplex(f"{p[0]},{p[1]}", bits) - origin) for p in parts]
        return cls(np.array(offs), levels, label or str(path), origin)

    def to_binary(self, path):
        """Little-endian: magic, uint64 n, n (re, im) doubles, n int32 levels."""
        pl = self.plane
        with open(path, "wb") as fh:
            fh.write(BINARY_MAGIC)
            fh.write(struct.pack("<Q", pl.size))
            fh.write(np.column_stack([pl.real, pl.imag]).astype("<f8").tobytes())
            fh.write(self.levels.astype("<i4").tobytes())

    @classmethod
    def from_binary(cls, path, label=None):
        with open(path, "rb") as fh:
            data = fh.read()
        if data[:4] != BINARY_MAGIC:
            raise DomainError(f"{path}: not a point cloud file")
        (n,) = struct.unpack_from("<Q", data, 4)
        xy = np.frombuffer(data, dtype="<f8", count=2 * n, offset=12).reshape(n, 2)
        lv = np.frombuffer(data, dtype="<i4", count=n, offset=12 + 16 * n)
        return cls(xy[:, 0] + 1j * xy[:, 1], lv, label or str(path))


def _fmt(x, d):
    return "{0:.{1}g}".format(x, d)


def _diameter(p):
    if p.size < 2:
        return 0.0
    from scipy.spatial import ConvexHull, QhullError
    xy = np.column_stack([p.real, p.imag])
    try:
        h = xy[ConvexHull(xy).vertices]
    except (QhullError, ValueError):
        h = xy
    if len(h) > 4000:
        h = h[:: len(h) // 4000 + 1]
    d = h[:, None, :] - h[None, :, :]
    return float(np.sqrt((d ** 2).sum(-1)).max())


def dedup_mask(points, resolution):
    """Boolean mask keeping the first point of every occupied grid cell."""
    if points.size == 0 or resolution <= 0:
        return np.ones(points.shape, bool)
    key = np.column_stack([np.floor(points.real / resolution),
                           np.floor(points.imag / resolution)]).astype(np.int64)
    _, first = np.unique(key, axis=0, return_index=True)
    mask = np.zeros(points.shape, bool)
    mask[first] = True
    return mask


@dataclass(frozen=True)
class ModelSpec:
    """
    Recipe for a decorated model.

    ``rho_prime < |J_{c'}| < rho`` must hold; R = rho / rho_prime.
    """
    c_prime: HPComplex
    rho_prime: float
    rho: float
    m_max: int = 6
    samples_per_level: int = 256
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "c_prime", hp(self.c_prime))
        if not (0 < self.rho_prime < self.rho):
            raise DomainError("ModelSpec needs 0 < rho_prime < rho")
        if self.m_max < 0 or self.samples_per_level < 1:
            raise DomainError("ModelSpec needs m_max >= 0 and samples_per_level >= 1")

    @property
    def R(self):
        return self.rho / self.rho_prime

    @property
    def scale(self):
        """Factor rho / rho_prime**2 mapping J_{c'} into A(R, R**2)."""
        return self.rho / self.rho_prime ** 2

    @classmethod
    def douady(cls, c_prime, R, **kw):
        """Radii rho' = R**-0.5 and rho = R**0.5, scale factor R**1.5."""
        return cls(c_prime, R ** -0.5, R ** 0.5, **kw)


def sample_julia(c, n_points, seed_rng=0, burn_in=20, resolution=None):
    """
    Points of J_c by random inverse iteration.

    The chain starts at the beta fixed point (1 + sqrt(1 - 4c))/2, which is
    kept in the cloud, applies a uniformly random branch of z -> ±sqrt(z - c)
    and discards the first ``burn_in`` points.  Points are deduplicated on a
    grid of ``resolution`` (default diam/2048 with diam = 2 * bound, bound =
    1/2 + sqrt(1/4 + |c|)); sampling continues until ``n_points`` distinct
    points are collected or 20 * n_points steps were taken.
    """
    if n_points < 1:
        raise DomainError("n_points must be >= 1")
    cc = complex(hp(c))
    bound = 0.5 + math.sqrt(0.25 + abs(cc))
    res = 2 * bound / 2048 if resolution is None else resolution
    rng = np.random.default_rng(seed_rng)
    beta = (1 + np.sqrt(1 - 4 * cc + 0j)) / 2
    chunk = max(256, n_points)
    pts = [beta]
    z = beta
    total = 0
    cells = {(math.floor(beta.real / res), math.floor(beta.imag / res))}
    while len(pts) < n_points and total < 20 * n_points + burn_in:
        signs = rng.integers(0, 2, size=chunk)
        for s in signs:
            z = np.sqrt(z - cc)
            if s:
                z = -z
            total += 1
            if total <= burn_in:
                continue
            key = (math.floor(z.real / res), math.floor(z.imag / res))
            if key in cells:
                continue
            cells.add(key)
            pts.append(z)
            if len(pts) >= n_points:
                break
    return PointCloud(np.array(pts), -1, f"J({cc})",
                      meta={"c": str(hp(c)), "seed": seed_rng, "resolution": res})


def check_annulus(points, inner, outer, what):
    a = np.abs(points)
    if a.size and (a.min() < inner * (1 - ANNULUS_RTOL) or a.max() > outer * (1 + ANNULUS_RTOL)):
        raise DomainError(f"{what}: |z| in [{a.min():.6g}, {a.max():.6g}] "
                          f"not inside [{inner:.6g}, {outer:.6g}]")


def rescale_gamma0(julia, spec):
    """Gamma_0 = J_{c'} * rho / rho'**2, contained in A(R, R**2)."""
    try:
        check_annulus(julia.plane, spec.rho_prime, spec.rho, "J_c'")
    except DomainError as e:
        raise DomainError(f"radii do not bracket J_c' ({e})") from None
    g = julia.plane * spec.scale
    return PointCloud(g, 0, "Gamma_0", meta=dict(julia.meta))


def gamma_m(gamma0, m):
    """All 2**m-th roots of every point of ``gamma0``, labelled with level m."""
    if m < 0:
        raise DomainError("m must be >= 0")
    p = gamma0.plane
    if m == 0:
        return PointCloud(p, 0, "Gamma_0", meta=dict(gamma0.meta))
    k = 2 ** m
    r = np.abs(p) ** (1.0 / k)
    th = np.angle(p)
    j = np.arange(k)
    out = r[:, None] * np.exp(1j * (th[:, None] + 2 * np.pi * j[None, :]) / k)
    return PointCloud(out.ravel(), m, f"Gamma_{m}", meta=dict(gamma0.meta))


def check_gamma_chain(clouds, R):
    """Assert Gamma_m ⊂ A(R**(1/2**m), R**(2/2**m)) and pairwise disjointness."""
    spans = []
    for m, g in enumerate(clouds):
        lo, hi = R ** (1 / 2 ** m), R ** (2 / 2 ** m)
        check_annulus(g.plane, lo, hi, f"Gamma_{m}")
        a = np.abs(g.plane)
        spans.append((a.min(), a.max()))
    for i in range(len(spans) - 1):
        if not spans[i + 1][1] < spans[i][0]:
            raise DomainError(f"Gamma_{i} and Gamma_{i + 1} overlap")
    return spans


def _build(spec, base, invert, label, max_drop=0.10):
    g0 = rescale_gamma0(base, spec) if base is not None else None
    levels = [gamma_m(g0, m) for m in range(spec.m_max + 1)]
    check_gamma_chain(levels, spec.R)
    pts, lv = [], []
    drops = {}
    for m, g in enumerate(levels):
        c = invert(g.plane)
        bad = ~np.isfinite(c)
        drops[m] = int(bad.sum())
        if bad.mean() > max_drop:
            raise DomainError(f"level {m}: {bad.sum()} of {bad.size} inversions failed")
        pts.append(c[~bad])
        lv.append(np.full((~bad).sum(), m, dtype=np.int32))
    meta = {"c_prime": str(spec.c_prime), "R": spec.R, "rho_prime": spec.rho_prime,
            "rho": spec.rho, "m_max": spec.m_max, "dropped": drops}
    return PointCloud(np.concatenate(pts), np.concatenate(lv), label, meta=meta)


def build_model_M(spec, julia=None):
    """
    Decoration cloud of M(c') = M ∪ Phi_M^{-1}(∪ Gamma_m).

    Only the decoration points are emitted, labelled with their level.
    Failed inversions are dropped and counted in ``meta['dropped']``; more
    than 10% at any level is an error.
    """
    if julia is None:
        julia = sample_julia(spec.c_prime, spec.samples_per_level, spec.seed)
    return _build(spec, julia, inverse_phi_M_batch, f"M({spec.c_prime})")


def build_model_K(c, spec, julia=None):
    """Decoration cloud of K_c(c') = K_c ∪ Phi_c^{-1}(∪ Gamma_m)."""
    if julia is None:
        julia = sample_julia(spec.c_prime, spec.samples_per_level, spec.seed)
    cc = complex(hp(c))
    if cc == 0:
        inv = lambda w: np.asarray(w, dtype=complex)
    else:
        inv = lambda w: inverse_phi_c_batch(cc, w)
    return _build(spec, julia, inv, f"K_{cc}({spec.c_prime})")


def build_nested_model(spec_outer, inner_cloud, plane="M", c=None):
    """
    Model with ``inner_cloud`` in place of the Julia sample.

    ``inner_cloud`` must lie in A(rho', rho) of ``spec_outer``; the pipeline
    is otherwise that of :func:`build_model_M` (``plane='M'``) or
    :func:`build_model_K` (``plane='K'`` with parameter ``c``).
    """
    base = PointCloud(inner_cloud.plane, -1, inner_cloud.label, meta=dict(inner_cloud.meta))
    if plane == "M":
        return _build(spec_outer, base, inverse_phi_M_batch, f"nested M({spec_outer.c_prime})")
    return build_model_K(c, spec_outer, julia=base)
