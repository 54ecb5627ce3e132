"""
Escape-time and distance-estimator rendering of M and K_c.

Three engines share one pixel convention:

* ``float64``: direct iteration in machine precision (numba);
* ``hp``: direct iteration of every pixel in gmpy2 at the frame precision,
  slow, used as the oracle for deep frames;
* ``perturb``: one multiple-precision reference orbit at the frame center,
  per-pixel deltas in machine precision,

      d_{n+1} = 2 Z_n d_n + d_n**2 + dc,

  with rebasing: whenever |Z_m + d| < |d| (or the reference runs out) the
  delta is re-expressed against the start of the reference orbit.  Rebasing
  removes the loss of precision that classic glitch detection only flags.

Pixel (i, j) of a w x h frame sits at

    center + ((j + 1/2) - w/2) * pitch + 1j * (h/2 - (i + 1/2)) * pitch,

so row 0 is the top of the image and frames centred on the real axis are
exactly conjugation symmetric.
"""
import math
import os
from dataclasses import dataclass, field, replace

import gmpy2
import numba
import numpy as np
from gmpy2 import mpc, mpfr

from .errors import DomainError
from .hp import ENV_PRECISION, HPComplex, context, hp

INTERIOR = -1
DEFAULT_ESCAPE = 1e6


@dataclass(frozen=True)
class FrameSpec:
    """
    One image.

    ``mode`` is ``"mandelbrot"`` or ``("julia", c)``; ``coloring`` one of
    ``escape``, ``distance``, ``binary``.
    """
    center: HPComplex
    width: float
    pixels: tuple = (256, 256)
    max_iter: int = 1000
    mode: object = "mandelbrot"
    coloring: str = "escape"
    overlay: object = None
    escape_radius: float = DEFAULT_ESCAPE

    def __post_init__(self):
        object.__setattr__(self, "center", hp(self.center))
        object.__setattr__(self, "pixels", tuple(int(v) for v in self.pixels))
        if not self.width > 0:
            raise DomainError("frame width must be positive")
        if min(self.pixels) < 1 or self.max_iter < 1:
            raise DomainError("frame needs positive pixel counts and max_iter")
        if self.coloring not in ("escape", "distance", "binary"):
            raise DomainError(f"unknown coloring {self.coloring!r}")
        m = self.mode
        if isinstance(m, tuple):
            if m[0] != "julia":
                raise DomainError(f"unknown mode {m!r}")
            object.__setattr__(self, "mode", ("julia", hp(m[1])))
        elif m != "mandelbrot":
            raise DomainError(f"unknown mode {m!r}")

    @property
    def pitch(self):
        return self.width / self.pixels[0]

    @property
    def julia_c(self):
        return self.mode[1] if isinstance(self.mode, tuple) else None

    @property
    def precision(self):
        """Reference precision: 64 + ceil(log2(4/width)), or the env override."""
        v = os.environ.get(ENV_PRECISION)
        if v:
            return int(v)
        return 64 + max(0, math.ceil(math.log2(4 / self.width)))

    def offsets(self):
        """Pixel offsets from the center, complex128 array of shape (h, w)."""
        w, h = self.pixels
        p = self.pitch
        x = ((np.arange(w) + 0.5) - w / 2) * p
        y = (h / 2 - (np.arange(h) + 0.5)) * p
        return x[None, :] + 1j * y[:, None]

    def with_width(self, width):
        return replace(self, width=width)


@dataclass
class Image:
    """
    Rendered frame.

    ``counts`` holds escape iterations (int32, -1 for interior), ``de`` the
    exterior distance estimate in plane units (NaN for interior), ``rgb``
    the 8-bit color image.
    """
    frame: FrameSpec
    counts: np.ndarray
    de: np.ndarray
    rgb: np.ndarray = None
    meta: dict = field(default_factory=dict)

    @property
    def interior(self):
        return self.counts == INTERIOR

    def center_pixel(self):
        h, w = self.counts.shape
        return self.counts[h // 2, w // 2]

    def save(self, path):
        """PNG via Pillow (no metadata chunks); PPM when the suffix is .ppm."""
        rgb = self.rgb if self.rgb is not None else colorize(self)
        if str(path).lower().endswith(".ppm"):
            h, w, _ = rgb.shape
            with open(path, "wb") as fh:
                fh.write(f"P6\n{w} {h}\n255\n".encode())
                fh.write(np.ascontiguousarray(rgb, dtype=np.uint8).tobytes())
            return path
        try:
            from PIL import Image as PILImage
        except ImportError:  # pragma: no cover
            return self.save(os.path.splitext(str(path))[0] + ".ppm")
        PILImage.fromarray(np.ascontiguousarray(rgb, dtype=np.uint8), "RGB").save(
            path, format="PNG", optimize=False)
        return path

    def save_counts(self, path):
        """Flat little-endian binary: int32 w, int32 h, then h*w int32 counts."""
        h, w = self.counts.shape
        with open(path, "wb") as fh:
            fh.write(np.array([w, h], dtype="<i4").tobytes())
            fh.write(self.counts.astype("<i4").tobytes())
        return path


def load_counts(path):
    data = np.fromfile(path, dtype="<i4")
    w, h = int(data[0]), int(data[1])
    return data[2:].reshape(h, w)


# --------------------------------------------------------------------------
# kernels

@numba.njit(cache=True)
def _direct_kernel(cre, cim, offs, max_iter, R, julia, jc):
    h, w = offs.shape
    counts = np.full((h, w), -1, dtype=np.int32)
    de = np.full((h, w), np.nan)
    R2 = R * R
    c0 = complex(cre, cim)
    for i in range(h):
        for j in range(w):
            p = c0 + offs[i, j]
            if julia:
                c = jc
                z = p
                dz = 1.0 + 0j
            else:
                c = p
                z = 0j
                dz = 0j
            for n in range(max_iter):
                if julia:
                    dz = 2 * z * dz
                else:
                    dz = 2 * z * dz + 1
                z = z * z + c
                a2 = z.real * z.real + z.imag * z.imag
                if a2 > R2:
                    counts[i, j] = n + 1
                    az = math.sqrt(a2)
                    de[i, j] = az * math.log(az) / abs(dz)
                    break
    return counts, de


@numba.njit(cache=True)
def _perturb_kernel(Z, offs, max_iter, R, julia):
    h, w = offs.shape
    counts = np.full((h, w), -1, dtype=np.int32)
    de = np.full((h, w), np.nan)
    R2 = R * R
    L = Z.shape[0]
    rebases = 0
    for i in range(h):
        for j in range(w):
            dc = 0j if julia else offs[i, j]
            d = offs[i, j] if julia else 0j
            m = 0
            dz = 1.0 + 0j if julia else 0j
            for n in range(max_iter):
                zm = Z[m] + d
                if julia:
                    dz = 2 * zm * dz
                else:
                    dz = 2 * zm * dz + 1
                d = 2 * Z[m] * d + d * d + dc
                m += 1
                zz = Z[m] + d
                a2 = zz.real * zz.real + zz.imag * zz.imag
                if a2 > R2:
                    counts[i, j] = n + 1
                    az = math.sqrt(a2)
                    de[i, j] = az * math.log(az) / abs(dz)
                    break
                dd = d.real * d.real + d.imag * d.imag
                if a2 < dd or m == L - 1:
                    d = zz - Z[0]
                    m = 0
                    rebases += 1
    return counts, de, rebases


def reference_orbit(frame, bits=None):
    """
    Multiple-precision orbit at the frame center, rounded to complex128.

    Iterates until escape beyond the frame's escape radius or ``max_iter``.
    For julia mode the orbit starts at the center with parameter c.
    """
    bits = frame.precision if bits is None else bits
    with context(bits):
        ctr = mpc(frame.center.value, precision=bits)
        if frame.julia_c is None:
            c, z = ctr, mpc(0)
        else:
            c, z = mpc(frame.julia_c.value, precision=bits), ctr
        R2 = mpfr(frame.escape_radius) ** 2
        out = [complex(z)]
        for _ in range(frame.max_iter):
            z = z * z + c
            out.append(complex(z))
            if gmpy2.norm(z) > R2:
                break
    return np.array(out, dtype=np.complex128)


def _hp_kernel(frame, bits):
    offs = frame.offsets()
    h, w = offs.shape
    counts = np.full((h, w), INTERIOR, dtype=np.int32)
    de = np.full((h, w), np.nan)
    julia = frame.julia_c is not None
    with context(bits):
        ctr = mpc(frame.center.value, precision=bits)
        jc = mpc(frame.julia_c.value, precision=bits) if julia else None
        R2 = mpfr(frame.escape_radius) ** 2
        for i in range(h):
            for j in range(w):
                p = ctr + mpc(complex(offs[i, j]))
                if julia:
                    c, z, dz = jc, p, 1.0 + 0j
                else:
                    c, z, dz = p, mpc(0), 0j
                for n in range(frame.max_iter):
                    zf = complex(z)
                    dz = 2 * zf * dz + (0 if julia else 1)
                    z = z * z + c
                    if gmpy2.norm(z) > R2:
                        counts[i, j] = n + 1
                        az = abs(complex(z))
                        de[i, j] = az * math.log(az) / abs(dz)
                        break
    return counts, de


def _direct_float_ok(frame):
    scale = max(1.0, abs(complex(frame.center)))
    return frame.pitch > 2.0 ** -40 * scale


def render(frame, engine="auto", bits=None):
    """
    Direct rendering.

    Parameters
    ----------
    engine : {"auto", "float64", "hp"}
        ``auto`` uses float64 while the pixel pitch is above 2**-40 of the
        coordinate scale and the multiple-precision engine below it.
    bits : int, optional
        Precision of the ``hp`` engine (default: the frame policy).

    Returns
    -------
    Image
        Never raises for budget exhaustion; such pixels are interior.
    """
    if engine == "auto":
        engine = "float64" if _direct_float_ok(frame) else "hp"
    if engine == "float64":
        jc = complex(frame.julia_c) if frame.julia_c is not None else 0j
        counts, de = _direct_kernel(float(frame.center.re), float(frame.center.im),
                                    frame.offsets(), frame.max_iter,
                                    float(frame.escape_radius),
                                    frame.julia_c is not None, jc)
        meta = {"engine": "float64"}
    elif engine == "hp":
        b = bits if bits is not None else max(frame.precision, frame.center.precision)
        counts, de = _hp_kernel(frame, b)
        meta = {"engine": "hp", "precision": b}
    else:
        raise DomainError(f"unknown engine {engine!r}")
    img = Image(frame, counts, de, meta=meta)
    img.rgb = colorize(img)
    return img


def render_deep(frame):
    """
    Perturbation rendering against one reference orbit at the frame center.

    Returns
    -------
    Image
        ``meta`` records the reference length, its precision and the number
        of rebases performed.
    """
    bits = frame.precision
    Z = reference_orbit(frame, bits)
    counts, de, rebases = _perturb_kernel(Z, frame.offsets(), frame.max_iter,
                                          float(frame.escape_radius),
                                          frame.julia_c is not None)
    img = Image(frame, counts, de, meta={"engine": "perturb", "precision": bits,
                                         "reference_length": int(Z.size),
                                         "rebases": int(rebases)})
    img.rgb = colorize(img)
    return img


def render_auto(frame, deep="auto"):
    """Dispatch used by the CLI: ``deep`` is ``auto``, ``on`` or ``off``."""
    if deep == "on" or (deep == "auto" and frame.width < 1e-6):
        return render_deep(frame)
    return render(frame)


# --------------------------------------------------------------------------
# colors

def colorize(img):
    """8-bit RGB for the frame's coloring mode."""
    counts, frame = img.counts, img.frame
    h, w = counts.shape
    rgb = np.zeros((h, w, 3), dtype=np.uint8)
    ext = counts != INTERIOR
    if frame.coloring == "binary":
        rgb[ext] = 255
    elif frame.coloring == "distance":
        near = ext & (img.de < 0.5 * frame.pitch)
        far = ext & ~near
        t = np.zeros((h, w))
        t[far] = np.clip(np.log2(img.de[far] / frame.pitch) / 8, 0, 1)
        v = (160 + 95 * t).astype(np.uint8)
        rgb[far] = v[far][:, None]
        rgb[near] = 0
    else:
        if ext.any():
            n = counts[ext].astype(float)
            s = np.log1p(n - n.min())
            s = s / s.max() if s.max() > 0 else s
            rgb[ext, 0] = (255 * s ** 0.5).astype(np.uint8)
            rgb[ext, 1] = (255 * s).astype(np.uint8)
            rgb[ext, 2] = (255 * (1 - (1 - s) ** 3)).astype(np.uint8)
    return rgb


def overlay(img, cloud, frame=None):
    """
    Mark cloud points lying inside the frame in pure red.

    Returns
    -------
    Image
        Copy with the marked RGB; ``meta['overlay_outside']`` counts the
        points outside the frame.
    """
    frame = img.frame if frame is None else frame
    rgb = (img.rgb if img.rgb is not None else colorize(img)).copy()
    out = Image(frame, img.counts, img.de, rgb, dict(img.meta))
    if cloud is None or len(cloud) == 0:
        out.meta["overlay_outside"] = 0
        return out
    shift = complex(cloud.origin - frame.center)
    d = cloud.points + shift
    w, h = frame.pixels
    p = frame.pitch
    col = np.floor(d.real / p + w / 2).astype(np.int64)
    row = np.floor(h / 2 - d.imag / p).astype(np.int64)
    inside = (col >= 0) & (col < w) & (row >= 0) & (row < h)
    rgb[row[inside], col[inside]] = (255, 0, 0)
    out.rgb = rgb
    out.meta["overlay_outside"] = int((~inside).sum())
    return out


# --------------------------------------------------------------------------
# zooms

@dataclass(frozen=True)
class ZoomSchedule:
    """Geometric interpolation of widths from ``width_start`` to ``width_end``."""
    center: HPComplex
    width_start: float
    width_end: float
    frames: int

    def __post_init__(self):
        object.__setattr__(self, "center", hp(self.center))
        if self.frames < 2:
            raise DomainError("a zoom schedule needs at least 2 frames")
        if not (self.width_start > 0 and self.width_end > 0):
            raise DomainError("zoom widths must be positive")

    def widths(self):
        r = (self.width_end / self.width_start) ** (1 / (self.frames - 1))
        ws = [self.width_start * r ** k for k in range(self.frames)]
        ws[-1] = self.width_end
        return ws


def zoom_sequence(schedule, base, deep="auto"):
    """Render every width of ``schedule`` with the other settings of ``base``."""
    out = []
    for wd in schedule.widths():
        fr = replace(base, center=schedule.center, width=wd)
        out.append(render_auto(fr, deep))
    return out
