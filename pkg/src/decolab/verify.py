"""
Desk-scale checks of similarity between model clouds and rendered sets.

Boundary clouds come from exterior distance estimation; clouds are
compared by exact Hausdorff distance (k-d tree nearest neighbours) after a
complex-affine alignment z -> a z + b fitted by alternating nearest
neighbour correspondence and linear least squares.
"""
import json
import math
from dataclasses import dataclass, field

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr
from scipy.spatial import cKDTree

from .errors import DomainError
from .hp import HPComplex, context, hp
from .bottcher import phi_M_batch
from .models import PointCloud
from .render import render, render_auto

M_DIAMETER = 2.4996  # diameter of the boundary of M (convex hull of an 800 px render)

HEURISTIC_NOTE = ("finite-orbit heuristic: a bounded orbit that keeps away from 0 "
                  "over the sampled iterates is evidence, not a proof, of a "
                  "non-recurrent critical point")


@dataclass
class VerificationReport:
    """
    Named metrics with bounds.

    Threshold keys end in ``_max`` (metric must not exceed the value) or
    ``_min`` (metric must reach the value); ``passed`` holds iff every bound
    is met.
    """
    test_name: str
    metrics: dict
    thresholds: dict = field(default_factory=dict)
    passed: bool = None
    artifacts: list = field(default_factory=list)
    notes: str = ""

    def __post_init__(self):
        self.metrics = {k: float(v) for k, v in self.metrics.items()}
        self.thresholds = {k: float(v) for k, v in self.thresholds.items()}
        if self.passed is None:
            self.passed = self.evaluate()

    def evaluate(self):
        for key, bound in self.thresholds.items():
            name, kind = key.rsplit("_", 1)
            v = self.metrics.get(name, float("nan"))
            if kind == "max" and not v <= bound:
                return False
            if kind == "min" and not v >= bound:
                return False
            if kind not in ("max", "min"):
                raise ValueError(f"threshold key {key!r} must end in _max or _min")
        return True

    def to_dict(self):
        d = {"test": self.test_name, "metrics": self.metrics,
             "thresholds": self.thresholds, "passed": bool(self.passed),
             "artifacts": [str(a) for a in self.artifacts]}
        if self.notes:
            d["notes"] = self.notes
        return d

    def to_json(self, path=None):
        s = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(s + "\n")
        return s


# --------------------------------------------------------------------------
# clouds from images

def extract_boundary(frame, de_threshold_px=1.0, image=None, deep="auto"):
    """
    Pixel centers whose exterior distance estimate is below
    ``de_threshold_px`` pixel pitches, as offsets from the frame center.

    Raises
    ------
    DomainError
        "no boundary in frame".
    """
    img = image if image is not None else render_auto(frame, deep)
    sel = np.isfinite(img.de) & (img.de < de_threshold_px * frame.pitch)
    if not sel.any():
        raise DomainError("no boundary in frame")
    pts = frame.offsets()[sel]
    return PointCloud(pts, -1, "boundary", origin=frame.center,
                      meta={"width": frame.width, "pixels": list(frame.pixels)})


def _julia_de(u, c, n_max=400, bailout=1e6):
    """Exterior distance estimate to J_c at the points ``u`` (0 when bounded)."""
    z = u.astype(np.complex128)
    dz = np.ones_like(z)
    out = np.zeros(z.shape)
    alive = np.ones(z.shape, bool)
    with np.errstate(all="ignore"):
        for _ in range(n_max):
            dz[alive] = 2 * z[alive] * dz[alive]
            z[alive] = z[alive] ** 2 + c
            a = np.abs(z)
            hit = alive & (a > bailout)
            out[hit] = a[hit] * np.log(a[hit]) / np.abs(dz[hit])
            alive &= ~hit
            if not alive.any():
                break
    return out


def model_boundary(spec, frame, de_threshold_px=1.0):
    """
    Boundary cloud of the decorated set M(c') rasterized on ``frame``.

    A pixel is kept when it lies within ``de_threshold_px`` pitches of
    either the boundary of M (exterior distance estimate) or of a decoration
    Gamma_m.  The decoration distance is the distance estimate to J_{c'} at
    u = Phi_M(c)^(2^m) / scale, divided by |du/dc|.  This samples M(c') the
    same way ``extract_boundary`` samples a rendered window, so the two
    clouds have matching density.
    """
    if frame.julia_c is not None:
        raise DomainError("model_boundary needs a mandelbrot frame")
    img = render(frame)
    pitch = frame.pitch
    offs = frame.offsets()
    c = complex(frame.center) + offs
    dist = np.where(np.isfinite(img.de), img.de, np.inf)
    h = 1e-7 * pitch
    phi = phi_M_batch(c)
    dphi = (phi_M_batch(c + h) - phi_M_batch(c - h)) / (2 * h)
    R, sc, cp = spec.R, spec.scale, complex(spec.c_prime)
    with np.errstate(all="ignore"):
        for m in range(spec.m_max + 1):
            k = 2 ** m
            r = np.abs(phi) ** k
            sel = np.isfinite(phi) & (r > R) & (r < R * R)
            if not sel.any():
                continue
            u = phi[sel] ** k / sc
            du = k * phi[sel] ** (k - 1) * dphi[sel] / sc
            d = _julia_de(u, cp) / np.abs(du)
            dist[sel] = np.minimum(dist[sel], d)
    sel = dist < de_threshold_px * pitch
    if not sel.any():
        raise DomainError("no boundary in frame")
    return PointCloud(offs[sel], -1, "model-boundary", origin=frame.center,
                      meta={"width": frame.width, "pixels": list(frame.pixels)})


def _common(a, b):
    """Offsets of ``a`` and ``b`` from a shared origin (that of ``b``)."""
    if a.origin == b.origin:
        return a.points, b.points
    return a.with_origin(b.origin).points, b.points


def _xy(p):
    return np.column_stack([p.real, p.imag])


def hausdorff(a, b):
    """Symmetric Hausdorff distance between two finite clouds."""
    if len(a) == 0 or len(b) == 0:
        raise DomainError("hausdorff needs nonempty clouds")
    pa, pb = _common(a, b)
    return _hausdorff_arrays(pa, pb)


def _hausdorff_arrays(pa, pb):
    da, _ = cKDTree(_xy(pb)).query(_xy(pa))
    db, _ = cKDTree(_xy(pa)).query(_xy(pb))
    return float(max(da.max(), db.max()))


def _affine_lsq(src, dst):
    ms, md = src.mean(), dst.mean()
    s = src - ms
    den = np.vdot(s, s).real
    if den == 0:
        raise DomainError("degenerate cloud in alignment")
    a = np.vdot(s, dst - md) / den
    return a, md - a * ms


def _principal_phase(p):
    q = p - p.mean()
    m2 = np.sum(q * q)
    return 0.5 * np.angle(m2) if abs(m2) > 0 else 0.0


@dataclass(frozen=True)
class AffineMap:
    """z -> a z + b with b given relative to the target origin."""
    a: complex
    b: complex
    origin: HPComplex = None

    def __call__(self, cloud):
        o = self.origin if self.origin is not None else hp(0)
        return PointCloud(self.a * cloud.plane + self.b, cloud.levels,
                          cloud.label, origin=o)

    def inverse_point(self, c):
        o = self.origin if self.origin is not None else hp(0)
        d = complex(hp(c) - o)
        return (d - self.b) / self.a


def align_similarity(model, target, iterations=30, init=()):
    """
    Complex-affine map a z + b carrying ``model`` onto ``target``.

    The initial map matches diameters, principal directions (both
    orientations of the axis are tried) and centroids.  Each iteration pairs
    every model point with its nearest target point and every target point
    with its nearest mapped model point, then refits a and b by least squares.

    Extra starting maps ``(a, b)`` (``b`` relative to the target origin)
    may be passed in ``init``; the best refined result is kept.

    Returns
    -------
    (AffineMap, float)
        Map (offset ``b`` relative to the target origin) and normalized
        Hausdorff residual hausdorff(a model + b, target) / diam(target).
    """
    if len(model) == 0 or len(target) == 0:
        raise DomainError("alignment needs nonempty clouds")
    src = model.plane
    dst = target.points
    dm, dt = model.diameter(), target.diameter()
    if dm == 0 or dt == 0:
        raise DomainError("degenerate cloud (diameter 0)")
    tree_t = cKDTree(_xy(dst))
    best = None
    base = dt / dm * np.exp(1j * (_principal_phase(dst) - _principal_phase(src)))
    starts = [(a0, dst.mean() - a0 * src.mean()) for a0 in (base, -base)]
    starts += [(complex(a0), complex(b0)) for a0, b0 in init]
    for a, b in starts:
        for _ in range(iterations):
            mapped = a * src + b
            _, i_t = tree_t.query(_xy(mapped))
            _, i_m = cKDTree(_xy(mapped)).query(_xy(dst))
            s = np.concatenate([src, src[i_m]])
            d = np.concatenate([dst[i_t], dst])
            a_new, b_new = _affine_lsq(s, d)
            moved = abs(a_new - a) * dm + abs(b_new - b)
            a, b = a_new, b_new
            if moved < 1e-15 * dt:
                break
        res = _hausdorff_arrays(a * src + b, dst) / dt
        if best is None or res < best[2]:
            best = (a, b, res)
    a, b, res = best
    return AffineMap(complex(a), complex(b), target.origin), float(res)


def _disk(cloud, radius):
    p = cloud.points
    keep = np.abs(p) <= radius
    return PointCloud(p[keep], -1, cloud.label, origin=cloud.origin, meta=cloud.meta)


def decoration_similarity(spec, s, period, window_factor=10.0, pixels=300,
                          max_iter=20000, iterations=30, threshold=0.05):
    """
    Compare the decorated model M(c') with the rendered set around a center.

    The window around the period-``period`` center ``s`` has width
    ``window_factor`` times the diameter of the small copy, estimated as
    |lambda| diam(M) with lambda the atom size.  The target is the
    distance-estimate boundary of that window; the model is the rasterized
    boundary of M(c') in the window pulled back by c -> (c - s) / lambda.
    Both clouds are clipped to the inscribed disk so that the comparison is
    rotation neutral.  Alignment starts from the default diameter and
    principal-axis guess and from the atom-size map.

    Returns
    -------
    VerificationReport
        Metrics ``residual`` (normalized Hausdorff after alignment),
        ``residual_atom_map`` (before refinement), point counts and the
        fitted map relative to lambda.
    """
    from .render import FrameSpec
    from .solvers import atom_size

    s = hp(s)
    lam = complex(atom_size(s, period))
    width = window_factor * abs(lam) * M_DIAMETER
    tgt = _disk(extract_boundary(FrameSpec(s, width, (pixels, pixels), max_iter), 1.0),
                width / 2)
    mw = width / abs(lam)
    mdl = _disk(model_boundary(spec, FrameSpec(0, mw, (pixels, pixels), max_iter)), mw / 2)
    dt = tgt.diameter()
    r0 = _hausdorff_arrays(lam * mdl.plane, tgt.points) / dt
    amap, res = align_similarity(mdl, tgt, iterations, init=[(lam, 0j)])
    ratio = amap.a / lam
    metrics = {"residual": res, "residual_atom_map": r0,
               "target_points": len(tgt), "model_points": len(mdl),
               "window_width": width, "a_over_lambda_re": ratio.real,
               "a_over_lambda_im": ratio.imag}
    return VerificationReport("decoration_similarity", metrics,
                              {"residual_max": threshold},
                              notes="threshold is an engineering choice; the similarity "
                                    "statement is qualitative (existence of some K)")


def classify_decoration_level(c, window_map, model, tol):
    """
    Decoration level of parameter ``c`` in an aligned window.

    ``c`` is pulled back through ``window_map`` into model coordinates and
    matched to the nearest model point; its level is returned when the match
    is within ``tol`` (model units), otherwise None.
    """
    z = window_map.inverse_point(c)
    pts = model.plane
    tree = cKDTree(_xy(pts))
    d, i = tree.query([z.real, z.imag])
    if d <= tol:
        return int(model.levels[i])
    return None


def semihyperbolic_test(c, n_iter=10_000, delta=None, transient=100, delta_rel=1e-3):
    """
    Finite-orbit heuristic for a non-recurrent critical point.

    Classification:

    * ``superattracting-like``: the orbit re-enters |z| < delta exactly at
      the multiples of a detected period;
    * ``heuristically semihyperbolic``: the orbit escapes, or stays bounded
      with min |z_n| > delta over (transient, n_iter];
    * ``recurrent-suspect``: anything else.

    ``delta`` defaults to ``delta_rel`` times the diameter of the bounded
    part of the orbit.
    """
    if not n_iter > transient:
        raise DomainError("n_iter must exceed transient")
    cc = hp(c)
    bits = cc.precision
    with context(bits):
        cv = cc.value
        z = mpc(0)
        zs = [0j]
        escaped = None
        for n in range(1, n_iter + 1):
            z = z * z + cv
            zf = complex(z)
            if abs(zf) > 2:
                escaped = n
                break
            zs.append(zf)
    orb = np.array(zs)
    if delta is None:
        re, im = orb.real, orb.imag
        diam = math.hypot(re.max() - re.min(), im.max() - im.min())
        delta = delta_rel * diam if diam > 0 else delta_rel
    tail = np.abs(orb[transient + 1:])
    min_d = float(tail.min()) if tail.size else float("inf")
    bounded = escaped is None
    hits = np.nonzero(np.abs(orb[1:]) < delta)[0] + 1
    kind = "recurrent-suspect"
    period = 0
    if bounded and hits.size >= 2:
        period = int(hits[0])
        expect = np.arange(period, orb.size, period)
        if np.array_equal(hits, expect):
            kind = "superattracting-like"
    if kind != "superattracting-like":
        if not bounded or min_d > delta:
            kind = "heuristically semihyperbolic"
    metrics = {"min_distance": min_d if np.isfinite(min_d) else -1.0,
               "delta": delta, "bounded": 1.0 if bounded else 0.0,
               "escaped_at": float(escaped) if escaped else -1.0,
               "period": float(period),
               "semihyperbolic": 1.0 if kind == "heuristically semihyperbolic" else 0.0,
               "superattracting_like": 1.0 if kind == "superattracting-like" else 0.0}
    rep = VerificationReport("semihyperbolic_test", metrics, {"semihyperbolic_min": 1.0},
                             notes=f"{kind}; {HEURISTIC_NOTE}")
    rep.classification = kind
    return rep
