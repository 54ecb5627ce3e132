"""
Green's function and Böttcher coordinates of K_c and M.

Forward maps use the telescoping product

    Phi_c(z) = z * prod_{n>=0} (1 + c/z_n**2) ** (1/2**(n+1)),   z_0 = z,

with principal branches, and Phi_M(c) = Phi_c(c).  The principal branch is
guaranteed when every factor has |c/z_n**2| < 1.  Close to M or K_c this
fails, and the branch is then tracked along the external field line: the
gradient flow of G is integrated upward into the guaranteed region, and
the angle is carried back down one level at a time.

Inverses are computed by continuation along the radial segment in w (the
usual external-ray tracing): at each potential level the equation
z_N = Phi_c^{-1}(w**(2**N)) is solved by Newton from the previous level,
with N large enough that Phi_c^{-1}(W) ~ W - c/(2W) is accurate.  No
branch of the product is ever chosen during inversion.
"""
import math
from dataclasses import dataclass

import gmpy2
import numba
import numpy as np
from gmpy2 import mpc, mpfr

from .dynamics import _prec_of
from .errors import ConvergenceError, DomainError
from .hp import HPComplex, context, hp

HARD_FLOOR = 1e-12        # |w| > 1 + HARD_FLOOR
SHARPNESS = 8             # continuation steps per halving of the potential
START_POTENTIAL = math.log(1e3)
BATCH_FLOOR = 2e-3        # lowest G_M where the float64 principal product is used


@dataclass(frozen=True)
class PotentialValue:
    """Green's function value and argument of the Böttcher coordinate."""
    green: float
    external_angle_arg: float
    valid: bool


# --------------------------------------------------------------------------
# forward maps, multiple precision

def _log_phi(c, z, n_max, bits):
    """Principal-branch log Phi_c(z) and the list of orbit points used.

    Returns (logphi, orbit, risky) where ``risky`` is True when some factor
    had |c/z_n**2| >= 1 (the principal branch is then not guaranteed).
    """
    acc = gmpy2.log(z)
    w = mpfr(1) / 2
    eps = mpfr(2) ** (-bits - 4)
    orbit = [z]
    risky = False
    for _ in range(n_max):
        u = c / (z * z)
        au = abs(u)
        if au >= 1:
            risky = True
        acc += w * gmpy2.log(1 + u)
        if au * w < eps:
            return acc, orbit, risky
        z = z * z + c
        orbit.append(z)
        if not gmpy2.is_finite(abs(z)):
            break
        w /= 2
    return None, orbit, risky


def _green_raw(c, z, n_max, bits):
    """Green's function by the escape-truncated sum at ``bits`` precision."""
    big = mpfr(2) ** (bits + 64)
    g = mpfr(0)
    for n in range(n_max + 1):
        az = abs(z)
        if az > big:
            # G = 2^-n (log|z_n| + sum_j 2^-(j+1) log|1 + c/z_{n+j}^2|); tail < 2^-bits
            return g + gmpy2.log(az) / mpfr(2) ** n, n
        z = z * z + c
    return None, n_max


def green_K(c, z, n_max=200, angle=True):
    """
    Green's function of K_c at ``z``.

    Returns
    -------
    PotentialValue
        ``green = 0`` and ``valid = False`` when ``z`` does not escape within
        ``n_max`` iterations.  ``external_angle_arg`` is arg Phi_c(z) in
        [0, 2 pi) when requested and defined, NaN otherwise.
    """
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    bits = _prec_of(c, z)
    with context(bits):
        cv, zv = hp(c, bits).value, hp(z, bits).value
        g, _ = _green_raw(cv, zv, n_max, bits)
    if g is None or g <= 0:
        return PotentialValue(0.0, float("nan"), False)
    ang = float("nan")
    if angle:
        try:
            ang = float(gmpy2.phase(phi_c(c, z, n_max).value)) % (2 * math.pi)
        except (DomainError, ConvergenceError):
            pass
    return PotentialValue(float(g), ang, True)


def green_M(c, n_max=200):
    """G_M(c) = G_c(c)."""
    return green_K(c, c, n_max, angle=False).green


def _orbit_log(x, c, plane, big, n_max):
    """Log z_N, N and d/dx log Phi along the orbit, stopped once |z_N| > big.

    ``plane`` is 'M' (x is the parameter) or 'K' (x is the point, c fixed).
    Returns None when the orbit does not reach ``big`` within ``n_max``.
    """
    z, d = x, mpc(1)
    cc = x if plane == "M" else c
    add = 1 if plane == "M" else 0
    for n in range(n_max + 1):
        if abs(z) > big:
            L = gmpy2.log(z)
            p2 = mpfr(2) ** n
            return L, n, d / (z * p2)
        d = 2 * z * d + add
        z = z * z + cc
    return None


def _ray_log(x, c, plane, bits, n_max):
    """
    log Phi at ``x`` by climbing the external field line to a point where the
    principal product is guaranteed, then descending level by level.

    Along a field line arg Phi is constant.  The flow dx/ds = G/h'(x) with
    s = log G and h = log Phi is integrated by RK4 with step doubling; a step
    is accepted when its angle error, scaled by 2^N, is far below the branch
    spacing 2 pi.  On the way down each recorded point has
    log Phi = (Log z_N + 2 pi i k) / 2^N, and k is the integer closest to
    the angle carried down from the point above.
    """
    big = mpfr(2) ** (bits // 2 + 8)
    ln2 = gmpy2.log(mpfr(2))
    two_pi = 2 * gmpy2.const_pi()

    def level(y):
        r = _orbit_log(y, c, plane, big, n_max)
        if r is None:
            raise ConvergenceError("field line left the basin of infinity")
        return r

    def flow(y):
        L, n, dh = level(y)
        return L.real / mpfr(2) ** n / dh

    def rk4(y, h):
        k1 = flow(y)
        k2 = flow(y + h / 2 * k1)
        k3 = flow(y + h / 2 * k2)
        k4 = flow(y + h * k3)
        return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    path = [x]
    y = x
    h = ln2 / 4
    for _ in range(64 * bits):
        cy = y if plane == "M" else c
        lp, _, risky = _log_phi(cy, y, n_max, bits)
        if lp is not None and not risky:
            break
        _, n, dh = level(y)
        full = rk4(y, h)
        half = rk4(rk4(y, h / 2), h / 2)
        err = abs(dh * (full - half)) * mpfr(2) ** n / two_pi
        if err < mpfr(1) / 64:
            y = half
            path.append(y)
            if err < mpfr(1) / 4096:
                h = min(h * 2, ln2)
        else:
            h /= 2
            if h < mpfr(2) ** -40:
                raise ConvergenceError("branch tracking failed; increase precision")
    else:
        raise ConvergenceError("field line did not reach the principal region")
    theta = lp.imag
    for y in reversed(path[:-1]):
        L, n, _ = level(y)
        p2 = mpfr(2) ** n
        t = (theta * p2 - L.imag) / two_pi
        k = gmpy2.rint(t)
        if abs(t - k) > mpfr(1) / 4:
            raise ConvergenceError("branch tracking failed; increase precision")
        theta = (L.imag + two_pi * k) / p2
        lp = mpc(L.real / p2, theta)
    return lp


def _tracked_log(x, c, plane, bits, n_max):
    """_ray_log at a working precision that carries the angle through 2^N."""
    r = _orbit_log(x, c, plane, mpfr(2) ** (bits // 2 + 8), n_max)
    if r is None:
        raise DomainError("Böttcher undefined (no escape within n_max)")
    work = bits + 2 * r[1] + 32
    with context(work):
        xw = mpc(x, precision=work)
        cw = None if c is None else mpc(c, precision=work)
        return _ray_log(xw, cw, plane, work, n_max)


def phi_M(c, n_max=200):
    """
    Böttcher coordinate of the exterior of M.

    The principal product is used where every factor has |c/z_n^2| < 1;
    elsewhere the branch is tracked along the external field line.

    Raises
    ------
    DomainError
        "Böttcher undefined on M" when ``c`` does not escape within ``n_max``.
    """
    bits = _prec_of(c)
    with context(bits):
        cv = hp(c, bits).value
        if cv == 0:
            raise DomainError("Böttcher undefined on M")
        lp, _, risky = _log_phi(cv, cv, n_max, bits)
        if lp is None:
            raise DomainError("Böttcher undefined on M (no escape within n_max)")
    if risky:
        lp = _tracked_log(cv, None, "M", bits, n_max)
    with context(bits):
        return HPComplex._wrap(gmpy2.exp(lp), bits)


def phi_c(c, z, n_max=200):
    """
    Böttcher coordinate Phi_c(z) of the basin of infinity.

    For ``c`` outside M the coordinate is defined where G_c(z) > G_c(0).
    Where the principal product is not guaranteed (some |c/z_n^2| >= 1) the
    branch is tracked along the external field line through ``z``.
    """
    bits = _prec_of(c, z)
    c = hp(c, bits)
    z = hp(z, bits)
    with context(bits):
        cv, zv = c.value, z.value
        if zv == 0:
            raise DomainError("Böttcher coordinate undefined at the critical point")
        lp, _, risky = _log_phi(cv, zv, n_max, bits)
        if lp is None:
            raise DomainError("Böttcher undefined on K_c (no escape within n_max)")
    if not risky:
        with context(bits):
            return HPComplex._wrap(gmpy2.exp(lp), bits)
    _check_defined(c, z)
    lp = _tracked_log(zv, cv, "K", bits, n_max)
    with context(bits):
        return HPComplex._wrap(gmpy2.exp(lp), bits)


def _check_defined(c, z):
    """Phi_c(z) needs G_c(z) > G_c(0) when c is outside M."""
    g0 = green_K(c, 0, angle=False)
    if g0.valid:
        gz = green_K(c, z, angle=False)
        if gz.green <= g0.green:
            raise DomainError("Böttcher coordinate undefined below the critical level")


# --------------------------------------------------------------------------
# inverse maps, multiple precision

def _level_solve(x, W, N, c, plane, tol, max_steps=60):
    """Newton for z_N(x) = Phi^{-1}(W); ``plane`` is 'M' or a fixed c (mpc)."""
    for _ in range(max_steps):
        if plane == "M":
            cc = x
            z = x
            d = mpc(1)
            for _ in range(N):
                d = 2 * z * d + 1
                z = z * z + cc
        else:
            cc = c
            z = x
            d = mpc(1)
            for _ in range(N):
                d = 2 * z * d
                z = z * z + cc
        target = W - cc / (2 * W)
        f = z - target
        df = d + (1 / (2 * W) if plane == "M" else 0)
        if df == 0:
            return None
        st = f / df
        x = x - st
        if not gmpy2.is_finite(abs(x)):
            return None
        if abs(st) <= tol * max(1, abs(x)):
            return x
    return None


def _continuation(w, seed, plane, c, tol, bits):
    G_target = gmpy2.log(abs(w))
    ang = gmpy2.phase(w)
    ln2 = gmpy2.log(mpfr(2))
    logW = mpfr(bits) * ln2 / 2 + 40
    eps = mpfr(2) ** (-(bits - 16))

    def solve_at(G, x):
        N = max(0, int(gmpy2.ceil(gmpy2.log2(logW / G))))
        p2 = mpfr(2) ** N
        W = gmpy2.exp(mpc(G * p2, ang * p2))
        return _level_solve(x, W, N, c, plane, eps)

    if G_target >= START_POTENTIAL:
        x = solve_at(G_target, seed if seed is not None else w)
        if x is None:
            raise ConvergenceError("inversion failed; increase precision")
        return x
    G = mpfr(START_POTENTIAL)
    x = gmpy2.exp(mpc(G, ang))
    x = solve_at(G, x)
    if x is None:
        raise ConvergenceError("inversion failed; increase precision")
    factor = mpfr(2) ** (mpfr(-1) / SHARPNESS)
    last = None
    while G > G_target:
        step = factor
        while True:
            Gn = max(G * step, G_target)
            xn = solve_at(Gn, x)
            # reject jumps to a neighbouring solution: consecutive moves along
            # the segment may grow by at most a bounded factor
            if xn is not None and (last is None or abs(xn - x) <= 4 * last * (1 - step) / (1 - factor)):
                break
            step = gmpy2.sqrt(step)
            if 1 - step < mpfr(2) ** -30:
                raise ConvergenceError("inversion failed; increase precision")
        last = abs(xn - x) * (1 - factor) / (1 - step)
        G, x = Gn, xn
    return x


def inverse_phi_M(w, seed=None, tol=1e-25):
    """
    Parameter ``c`` with Phi_M(c) = w.

    Raises
    ------
    DomainError
        |w| <= 1 (or within the hard floor 1e-12 of the unit circle).
    ConvergenceError
        "inversion failed; increase precision".
    """
    bits = _prec_of(w, seed) if seed is not None else _prec_of(w)
    w = hp(w, bits)
    aw = abs(complex(w))
    if not aw > 1 + HARD_FLOOR:
        raise DomainError("inverse Böttcher map needs |w| > 1")
    extra = int(max(0, -math.log2(aw - 1))) + 16
    work = bits + extra
    with context(work):
        wv = mpc(w.value, precision=work)
        x = None
        if seed is not None:
            G = gmpy2.log(abs(wv))
            logW = mpfr(work) * gmpy2.log(mpfr(2)) / 2 + 40
            N = max(0, int(gmpy2.ceil(gmpy2.log2(logW / G))))
            W = gmpy2.exp((2 ** N) * gmpy2.log(wv))
            x = _level_solve(mpc(hp(seed, work).value), W, N, None, "M",
                             mpfr(2) ** (-(work - 16)))
        cand = None if x is None else HPComplex._wrap(x, work)
        if cand is not None and _residual_M(cand, w) < tol * max(1.0, aw):
            return HPComplex(cand, bits)
        x = _continuation(wv, None, "M", None, tol, work)
        cand = HPComplex._wrap(x, work)
    if not _residual_M(cand, w) < max(tol, 1e-300) * max(1.0, aw):
        raise ConvergenceError("inversion failed; increase precision")
    return HPComplex(cand, bits)


def _residual_M(c, w):
    try:
        return abs(complex(phi_M(c) - w))
    except DomainError:
        return float("inf")


def inverse_phi_c(c, w, seed=None, tol=1e-25):
    """
    Point ``z`` with Phi_c(z) = w, by continuation along the radial segment.

    Raises
    ------
    DomainError
        |w| <= 1, or (for c outside M) |w| at or below the critical level.
    ConvergenceError
        "inversion failed; increase precision".
    """
    bits = _prec_of(c, w)
    c = hp(c, bits)
    w = hp(w, bits)
    aw = abs(complex(w))
    if not aw > 1 + HARD_FLOOR:
        raise DomainError("inverse Böttcher map needs |w| > 1")
    g0 = green_K(c, 0, angle=False)
    if g0.valid and math.log(aw) <= 2 * g0.green:
        # Phi_c^{-1} is defined above the critical value's level G_c(c) = 2 G_c(0)
        raise DomainError("w below the critical value level; Phi_c^{-1} not univalent")
    extra = int(max(0, -math.log2(aw - 1))) + 16
    work = bits + extra
    with context(work):
        wv = mpc(w.value, precision=work)
        cv = mpc(c.value, precision=work)
        if seed is not None:
            G = gmpy2.log(abs(wv))
            logW = mpfr(work) * gmpy2.log(mpfr(2)) / 2 + 40
            N = max(0, int(gmpy2.ceil(gmpy2.log2(logW / G))))
            W = gmpy2.exp((2 ** N) * gmpy2.log(wv))
            x = _level_solve(mpc(hp(seed, work).value), W, N, cv, "K",
                             mpfr(2) ** (-(work - 16)))
            if x is not None:
                return HPComplex(HPComplex._wrap(x, work), bits)
        x = _continuation(wv, None, "K", cv, tol, work)
    return HPComplex(HPComplex._wrap(x, work), bits)


# --------------------------------------------------------------------------
# batch versions in float64

def phi_M_batch(c, n_max=200):
    """
    Vectorized principal-product Phi_M.

    The principal product matches the tracked branch of :func:`phi_M` for
    G_M(c) >= BATCH_FLOOR and picks wrong roots of unity below it, so NaN is
    returned there and where c does not escape.
    """
    out = _phi_batch(np.asarray(c, dtype=complex), None, n_max)
    with np.errstate(invalid="ignore", divide="ignore"):
        out[~(np.log(np.abs(out)) >= BATCH_FLOOR)] = np.nan
    return out


def phi_c_batch(c, z, n_max=200):
    """Vectorized principal-product Phi_c (no branch certification)."""
    return _phi_batch(np.asarray(z, dtype=complex), complex(c), n_max)


def _phi_batch(z, c, n_max):
    cc = z.copy() if c is None else np.full_like(z, c)
    z = z.copy()
    with np.errstate(all="ignore"):
        acc = np.log(z)
        w = 0.5
        done = np.zeros(z.shape, bool)
        for _ in range(n_max):
            u = cc / (z * z)
            acc = np.where(done, acc, acc + w * np.log1p(u))
            done |= np.abs(u) * w < 1e-18
            if done.all():
                break
            z = np.where(done, z, z * z + cc)
            w *= 0.5
        out = np.exp(acc)
    out[~done] = np.nan
    return out


def green_batch(c, z=None, n_max=400, bailout=1e100):
    """
    Vectorized Green's function; G_M(c) when ``z`` is None, else G_c(z) for a
    scalar ``c``.  Zero where the orbit does not escape within ``n_max``.
    """
    if z is None:
        z = np.asarray(c, dtype=complex).copy()
        cc = z.copy()
    else:
        z = np.asarray(z, dtype=complex).copy()
        cc = np.full_like(z, complex(c))
    g = np.zeros(z.shape)
    alive = np.ones(z.shape, bool)
    with np.errstate(all="ignore"):
        for n in range(n_max + 1):
            a = np.abs(z)
            hit = alive & (a > bailout)
            g[hit] = np.ldexp(np.log(a[hit]), -n)
            alive &= ~hit
            if not alive.any():
                break
            z = np.where(alive, z * z + cc, z)
    return g


@numba.njit(cache=True)
def _level_newton(x, W, N, c, is_M, max_newton):
    prev = np.inf
    for _ in range(max_newton):
        cc = x if is_M else c
        z = x
        d = 1.0 + 0j
        for _k in range(N):
            d = 2 * z * d + (1.0 if is_M else 0.0)
            z = z * z + cc
        f = z - (W - cc / (2 * W))
        df = d + (1 / (2 * W) if is_M else 0.0)
        if df == 0:
            return x, False
        st = f / df
        x = x - st
        if not (np.isfinite(x.real) and np.isfinite(x.imag)):
            return x, False
        a = abs(st)
        if a <= 1e-15 * max(1.0, abs(x)) or (a <= 1e-12 * max(1.0, abs(x)) and a >= prev):
            return x, True
        prev = a
    return x, False


@numba.njit(cache=True)
def _inverse_kernel(w, c, is_M, sharpness, logW, G0, max_newton):
    out = np.empty(w.shape[0], dtype=np.complex128)
    factor = 2.0 ** (-1.0 / sharpness)
    two_pi = 2 * np.pi
    for i in range(w.shape[0]):
        Gt = np.log(abs(w[i]))
        t0 = np.angle(w[i]) / two_pi
        G = max(G0, Gt)
        x = np.exp(G + 1j * two_pi * t0)
        ok = True
        last = -1.0
        first = True
        while ok and (first or G > Gt * (1 + 1e-15)):
            step = factor
            while True:
                Gn = Gt if first and G <= Gt else max(G * step, Gt)
                N = max(0, int(np.ceil(np.log2(logW / Gn))))
                p2 = 2.0 ** N
                t = (t0 * p2) % 1.0
                W = np.exp(Gn * p2 + 1j * two_pi * t)
                xn, conv = _level_newton(x, W, N, c, is_M, max_newton)
                if conv and (first or last < 0
                             or abs(xn - x) <= 4 * last * (1 - step) / (1 - factor)):
                    break
                step = np.sqrt(step)
                if 1 - step < 1e-9:
                    ok = False
                    break
            if ok:
                if not first:
                    last = abs(xn - x) * (1 - factor) / (1 - step)
                first = False
                G = Gn
                x = xn
        out[i] = x if ok else np.nan + 0j
    return out


def _inverse_batch(w, c, sharpness=8, wbig=1e26, max_newton=60):
    w = np.ascontiguousarray(np.asarray(w, dtype=np.complex128).ravel())
    if w.size == 0:
        return w.copy()
    is_M = c is None
    return _inverse_kernel(w, 0j if is_M else complex(c), is_M, float(sharpness),
                           math.log(wbig), START_POTENTIAL, max_newton)


def inverse_phi_M_batch(w, sharpness=8, verify=True, rtol=1e-9):
    """
    Vectorized Phi_M^{-1} in float64 by ray continuation.

    Returns
    -------
    ndarray
        NaN where the continuation failed or the forward check
        ``|Phi_M(c) - w| < rtol |w|`` does not hold.
    """
    w = np.asarray(w, dtype=complex)
    shape = w.shape
    c = _inverse_batch(w.ravel(), None, sharpness)
    if verify:
        back = phi_M_batch(c)
        bad = ~(np.abs(back - w.ravel()) < rtol * np.abs(w.ravel()))
        c[bad] = np.nan
    return c.reshape(shape)


def inverse_phi_c_batch(c, w, sharpness=8, verify=True, rtol=1e-9):
    """Vectorized Phi_c^{-1}; see :func:`inverse_phi_M_batch`.

    The forward check uses the functional equation on the potential, which
    does not depend on a branch: G_c(z) = log|w|.
    """
    w = np.asarray(w, dtype=complex)
    shape = w.shape
    z = _inverse_batch(w.ravel(), complex(c), sharpness)
    if verify:
        g = green_batch(complex(c), z)
        bad = ~(np.abs(g - np.log(np.abs(w.ravel()))) < rtol * np.maximum(1, np.log(np.abs(w.ravel()))) * 10)
        z[bad] = np.nan
    return z.reshape(shape)
