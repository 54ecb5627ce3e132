"""
Special parameters of the quadratic family.

Superattracting centers, Misiurewicz points, parabolic roots, tuned
Misiurewicz points and cascades of centers accumulating on a parameter.
Every solver is a Newton iteration from an explicit seed; there is no
global search.

Notes
-----
Center and Misiurewicz solves use deflated Newton: the log derivative of
the target function is corrected by the log derivatives of the factors
belonging to lower periods/preperiods, so that the iteration is not
attracted by roots of smaller (l, k) pairs.  For a center of period q the
reduced function is prod_{d | q} z_d(c)^{moebius(q/d)}.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from .dynamics import (MAX_NEWTON_STEPS, _prec_of, critical_orbit,
                       cycle_multiplier, find_cycle, newton)
from .errors import ConvergenceError, DegenerateError, DomainError
from .hp import HPComplex, context, hp

SEED_SNAP = 1e-10  # largest distance a literal input may move when polished


@dataclass(frozen=True)
class MisiurewiczSpec:
    """Preperiod ``l`` and period ``k``: P_c^k(P_c^l(0)) = P_c^l(0)."""
    l: int
    k: int

    def __post_init__(self):
        if self.l < 1 or self.k < 1:
            raise DomainError("Misiurewicz spec needs l >= 1 and k >= 1")


@dataclass(frozen=True)
class ParabolicSpec:
    """Period ``m`` and rotation number ``num/den`` of the target multiplier."""
    m: int
    num: int = 0
    den: int = 1

    def __post_init__(self):
        if self.m < 1 or self.den < 1:
            raise DomainError("parabolic spec needs m >= 1 and den >= 1")
        if math.gcd(self.num, self.den) != 1:
            raise DomainError("rotation number must be a reduced fraction")

    def multiplier(self, bits):
        with context(bits):
            t = 2 * gmpy2.const_pi() * mpfr(self.num) / self.den
            return mpc(gmpy2.cos(t), gmpy2.sin(t))


@dataclass(frozen=True)
class CascadeRecord:
    """
    Centers ``s_n`` of periods ``q_n`` accumulating on ``c1``.

    ``fitted_law`` is one of ``geometric``, ``inverse_square``,
    ``inverse_linear`` or ``inconclusive``; ``exponent`` is the slope of
    log|s_n - c1| against log n (power laws) or against n (geometric).
    """
    c1: HPComplex
    centers: tuple
    mu: HPComplex = None
    fitted_law: str = "inconclusive"
    fitted_constant: HPComplex = None
    exponent: float = float("nan")
    fit_residual: float = float("nan")
    ratios: tuple = field(default=(), repr=False)
    error: str = None


# --------------------------------------------------------------------------
# small number theory helpers

def divisors(n):
    return [d for d in range(1, n + 1) if n % d == 0]


def moebius(n):
    if n == 1:
        return 1
    res = 1
    p = 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            res = -res
        p += 1
    if n > 1:
        res = -res
    return res


# --------------------------------------------------------------------------
# superattracting centers

def _center_fun(q, cv_prec_holder=None):
    terms = [(d, moebius(q // d)) for d in divisors(q) if moebius(q // d) != 0]

    def fun(c):
        zs, ds = critical_orbit(c, q, None)
        ld = mpc(0)
        merit = mpfr(0)
        for d, mu in terms:
            if zs[d] == 0:
                if d == q:
                    return mpc(0), mpc(0)
                return mpc(1), mpc("inf")
            ld += mu * ds[d] / zs[d]
            merit += mu * gmpy2.log(abs(zs[d]))
        if ld == 0:
            return mpc(1), mpc("inf")
        return gmpy2.exp(merit), 1 / ld
    return fun


def _is_center(c, q, tol):
    zs, _ = critical_orbit(c, q, None)
    return abs(zs[q]) < tol, zs


def solve_superattracting_center(period, seed, tol=1e-30):
    """
    Center of exact period ``period`` near ``seed``.

    Newton on the reduced Gleason function built from c -> P_c^q(0).

    Returns
    -------
    HPComplex
        ``c`` with ``|P_c^period(0)| < tol``.

    Raises
    ------
    DegenerateError
        "period collapse": the root found has a proper divisor period.
    ConvergenceError
        "no center near seed".
    """
    q = int(period)
    if q < 1:
        raise DomainError("period must be >= 1")
    prec = _prec_of(seed)
    c, bits, _ = newton(_center_fun(q), hp(seed, prec).value, tol, prec,
                        label="center")
    with context(bits):
        zs, _ = critical_orbit(c, q, None)
        if not abs(zs[q]) < tol:
            raise ConvergenceError("no center near seed", last=HPComplex._wrap(c, bits),
                                   residual=float(abs(zs[q])))
        for d in divisors(q)[:-1]:
            if abs(zs[d]) <= tol:
                raise DegenerateError(f"period collapse: center has period {d}, not {q}")
    return HPComplex._wrap(c, bits)


def atom_size(s, p):
    """
    Linear size estimate of the small copy of M with center ``s`` (period p).

    The copy is approximately ``s + size * M``; the hyperbolic component of
    ``s`` has radius roughly ``|size| / 4``.
    """
    bits = _prec_of(s)
    with context(bits):
        zs, _ = critical_orbit(hp(s, bits).value, p, None)
        l = mpc(1)
        b = mpc(1)
        for j in range(1, p):
            l = 2 * zs[j] * l
            b += 1 / l
        return HPComplex._wrap(1 / (b * l * l), bits)


def renormalized_parameter(c, p):
    """
    Quadratic renormalization coordinate near a period ``p`` center.

    With a = P_c^p(0) and b = (P_c^p)''(0)/2, the first return map is close to
    w -> a + b w**2, which is conjugate to u -> u**2 + a b.  The returned
    value ``a*b`` is therefore an approximate straightening of ``c``.
    """
    bits = _prec_of(c)
    with context(bits):
        return HPComplex._wrap(_renorm(hp(c, bits).value, p), bits)


def _renorm(c, p):
    z = mpc(0)
    d1 = mpc(1)
    d2 = mpc(0)
    for _ in range(p):
        d2 = 2 * (d1 * d1 + z * d2)
        d1 = 2 * z * d1
        z = z * z + c
    return z * d2 / 2


def solve_renormalized(s0, p, target, tol=1e-24):
    """Parameter ``c`` near ``s0`` whose renormalization coordinate is ``target``."""
    bits = _prec_of(s0, target)
    size = atom_size(s0, p)
    with context(bits):
        t = hp(target, bits).value
        h = mpfr(2) ** (-bits // 3)

        def fun(c):
            f = _renorm(c, p) - t
            df = (_renorm(c + h, p) - _renorm(c - h, p)) / (2 * h)
            if df == 0:
                return f, mpc("inf")
            return f, f / df
        seed = hp(s0, bits).value + size.value * t
    c, bits, _ = newton(fun, seed, tol, bits, label="renormalized parameter")
    return HPComplex._wrap(c, bits)


def find_center_near(seed, q_max=300, tol=1e-30):
    """
    Smallest period ``q <= q_max`` whose center is the one governing ``seed``.

    Candidate periods are the indices where ``|P_seed^q(0)|`` reaches a new
    minimum.  A candidate is accepted when Newton from ``seed`` lands on a
    center of exact period ``q`` and ``seed`` lies in the closure of that
    center's hyperbolic component (the ``q`` cycle at ``seed`` that follows the
    critical orbit has ``|multiplier| <= 1``).

    Returns
    -------
    (HPComplex, int)
    """
    if q_max < 1:
        raise DomainError("q_max must be >= 1")
    bits = _prec_of(seed)
    s = hp(seed, bits)
    with context(bits):
        zs, _ = critical_orbit(s.value, q_max, None)
        best = mpfr("inf")
        cands = []
        for q in range(1, q_max + 1):
            a = abs(zs[q])
            if a < best:
                best = a
                cands.append(q)
    for q in cands:
        try:
            c = solve_superattracting_center(q, s, tol)
        except (ConvergenceError, DegenerateError):
            continue
        if _in_component(s, q, zs[q]):
            return c, q
    raise ConvergenceError(f"no center within q_max={q_max} near seed")


def _in_component(s, q, zq, slack=1e-9):
    try:
        cyc = find_cycle(s, HPComplex._wrap(zq, s.precision), q, tol=1e-20)
    except (ConvergenceError, DegenerateError):
        return False
    return abs(complex(cyc.multiplier)) <= 1 + slack


# --------------------------------------------------------------------------
# Misiurewicz points

def _mis_fun(l, k):
    divs = divisors(k)[:-1]

    def fun(c):
        zs, ds = critical_orbit(c, l + k, None)
        f = zs[l + k] - zs[l]
        if f == 0:
            return mpc(0), mpc(0)
        ld = (ds[l + k] - ds[l]) / f
        merit = gmpy2.log(abs(f))
        for i in range(l):
            g = zs[i + k] - zs[i]
            if g == 0:
                return mpc(1), mpc("inf")
            ld -= (ds[i + k] - ds[i]) / g
            merit -= gmpy2.log(abs(g))
        for d in divs:
            g = zs[l + d] - zs[l]
            if g == 0:
                return mpc(1), mpc("inf")
            ld -= (ds[l + d] - ds[l]) / g
            merit -= gmpy2.log(abs(g))
        if ld == 0:
            return mpc(1), mpc("inf")
        return gmpy2.exp(merit), 1 / ld
    return fun


def minimal_pair(c, l, k, tol):
    """
    Smallest ``(l', k')`` (by ``l' + k'``, then ``l'``) with
    ``|z_{l'+k'} - z_{l'}| < tol``, scanning all pairs with
    ``l' + k' <= l + k`` and ``l' >= 0``.  ``l' = 0`` means ``c`` is a center.
    """
    n = l + k
    bits = _prec_of(c)
    with context(bits):
        zs, _ = critical_orbit(hp(c, bits).value, n, None)
        for s in range(1, n + 1):
            for lp in range(0, s):
                kp = s - lp
                if abs(zs[lp + kp] - zs[lp]) < tol:
                    return lp, kp
    return None


def solve_misiurewicz(spec, seed, tol=1e-30):
    """
    Misiurewicz parameter of preperiod ``spec.l`` and period ``spec.k``.

    Returns
    -------
    HPComplex

    Raises
    ------
    DegenerateError
        Strictness or minimality fails: the root is periodic, has a smaller
        preperiod, or satisfies a smaller relation.
    ConvergenceError
        "no Misiurewicz point near seed".
    """
    l, k = spec.l, spec.k
    prec = _prec_of(seed)
    c, bits, _ = newton(_mis_fun(l, k), hp(seed, prec).value, tol, prec,
                        label="Misiurewicz point")
    res = HPComplex._wrap(c, bits)
    _check_misiurewicz(res, l, k, tol)
    return res


def _check_misiurewicz(c, l, k, tol):
    bits = c.precision
    with context(bits):
        zs, _ = critical_orbit(c.value, l + k, None)
        if not abs(zs[l + k] - zs[l]) < tol:
            raise ConvergenceError("no Misiurewicz point near seed", last=c,
                                   residual=float(abs(zs[l + k] - zs[l])))
        if abs(zs[l - 1 + k] - zs[l - 1]) <= tol:
            raise DegenerateError("degenerate: actually periodic or smaller preperiod")
    mp = minimal_pair(c, l, k, tol)
    if mp is not None and mp != (l, k):
        raise DegenerateError(f"degenerate: minimal relation is (l={mp[0]}, k={mp[1]}), "
                              f"not (l={l}, k={k})")


def multiplier_at_misiurewicz(c, spec, tol=1e-20):
    """
    Multiplier ``(P_c^k)'(z)`` of the cycle hit at ``z = P_c^l(0)``.

    Raises
    ------
    DomainError
        ``c`` does not satisfy the relation, or the cycle is not repelling.
    """
    bits = _prec_of(c)
    c = hp(c, bits)
    l, k = spec.l, spec.k
    with context(bits):
        zs, _ = critical_orbit(c.value, l + k, None)
        if not abs(zs[l + k] - zs[l]) < tol:
            raise DomainError("input is not Misiurewicz for spec (residual check failed)")
        mu = cycle_multiplier(c.value, zs[l], k)
    if not abs(mu) > 1:
        raise DomainError("not repelling: input not Misiurewicz for spec")
    return HPComplex._wrap(mu, bits)


# --------------------------------------------------------------------------
# parabolic roots

def solve_parabolic_root(spec, seed_c, seed_z, tol=1e-30, max_steps=MAX_NEWTON_STEPS):
    """
    Parameter ``c`` and point ``z`` with P_c^m(z) = z and (P_c^m)'(z) = lambda.

    Two-dimensional Newton with the exact Jacobian from second-order
    derivative recursions.  Steps are halved while the residual norm grows.

    Returns
    -------
    (HPComplex, HPComplex)
    """
    m = spec.m
    bits = _prec_of(seed_c, seed_z)
    while True:
        with context(bits):
            lam = spec.multiplier(bits)
            c = hp(seed_c, bits).value
            z = hp(seed_z, bits).value
            eps = mpfr(2) ** (-(bits - 8))

            def evaluate(c, z):
                w = z
                a = mpc(1)     # dw/dz
                b = mpc(0)     # dw/dc
                az = mpc(0)    # d2w/dz2
                ac = mpc(0)    # d2w/dzdc
                for _ in range(m):
                    az = 2 * (a * a + w * az)
                    ac = 2 * (b * a + w * ac)
                    a, b = 2 * w * a, 2 * w * b + 1
                    w = w * w + c
                return (w - z, a - lam), ((a - 1, b), (az, ac))

            def norm(F):
                return abs(F[0]) + abs(F[1])

            F, J = evaluate(c, z)
            r = norm(F)
            steps = 0
            done = False
            while steps < max_steps:
                (j11, j12), (j21, j22) = J
                det = j11 * j22 - j12 * j21
                if det == 0 or not gmpy2.is_finite(abs(det)):
                    raise DegenerateError("degenerate configuration: singular Jacobian")
                dz = (F[0] * j22 - j12 * F[1]) / det
                dc = (j11 * F[1] - j21 * F[0]) / det
                if r < tol and abs(dz) + abs(dc) <= eps * (1 + abs(z) + abs(c)):
                    done = True
                    break
                t = mpfr(1)
                for _ in range(40):
                    Fn, Jn = evaluate(c - t * dc, z - t * dz)
                    if norm(Fn) <= r:
                        break
                    t /= 2
                else:
                    break
                c, z = c - t * dc, z - t * dz
                F, J, r = Fn, Jn, norm(Fn)
                steps += 1
            if done or r < tol:
                return HPComplex._wrap(c, bits), HPComplex._wrap(z, bits)
            if steps >= max_steps or bits * 2 > 8192:
                raise ConvergenceError(
                    f"parabolic Newton did not converge (residuals {float(abs(F[0])):.3e}, "
                    f"{float(abs(F[1])):.3e})", last=(c, z), residual=float(r))
            seed_c = HPComplex._wrap(c, bits)
            seed_z = HPComplex._wrap(z, bits)
        bits *= 2


# --------------------------------------------------------------------------
# tuning

def period2_center_distance(s0, p):
    """Distance from ``s0`` to the period ``2p`` center of its doubling bulb."""
    seed = solve_renormalized(s0, p, -1)
    c2 = solve_superattracting_center(2 * p, seed)
    return abs(complex(c2 - s0))


def _raw_relation_fun(L, K):
    def fun(c):
        zs, ds = critical_orbit(c, L + K, None)
        f = zs[L + K] - zs[L]
        g = ds[L + K] - ds[L]
        if g == 0:
            return f, mpc("inf")
        return f, f / g
    return fun


def tune_misiurewicz(s0, p, spec, c0, tol=1e-30, copy_radius=None,
                     containment=3.0):
    """
    Tuned Misiurewicz point ``s0 ⊥ c0`` in the small copy of M at ``s0``.

    The hybrid conjugacy transports the relation of ``c0`` to preperiod
    ``p*l`` and period ``p*k``.  Seeds come from the renormalization
    coordinate (see :func:`renormalized_parameter`) and, as a fallback, from
    the affine copy estimate ``s0 + t*size*c0``.  A root is accepted when it
    is strictly preperiodic, lies in the copy ball and its renormalized
    critical orbit ``b*z_{pj}`` stays bounded by ``containment``.  It is then
    polished on its minimal relation, which may be smaller than the
    transported one (for instance preperiod ``p(l-1)+1``).

    Parameters
    ----------
    s0 : center of exact period ``p``; a literal is polished by Newton and
        must move by less than ``SEED_SNAP``
    c0 : Misiurewicz parameter being tuned (``spec`` is its relation);
        polished by :func:`solve_misiurewicz`
    copy_radius : float, optional
        Defaults to 10x the distance from ``s0`` to its period ``2p`` center.

    Raises
    ------
    DomainError
        ``s0`` is not a center of exact period ``p``.
    ConvergenceError
        "tuning escaped the small copy; refine seed".
    """
    bits = _prec_of(s0, c0)
    s0 = hp(s0, bits)
    c0 = hp(c0, bits)
    l, k = spec.l, spec.k
    # literals carry ~16 digits: polish both inputs, keeping them in place
    c0 = solve_misiurewicz(spec, c0, tol)
    try:
        sp = solve_superattracting_center(p, s0, tol)
    except (ConvergenceError, DegenerateError) as e:
        raise DomainError(f"s0 is not a superattracting center of period {p} ({e})")
    moved = abs(complex(sp - s0))
    if not moved < SEED_SNAP:
        raise DomainError(f"s0 is not a superattracting center of period {p} "
                          f"(nearest one found is {moved:.3e} away)")
    s0 = sp
    if p == 1:
        return solve_misiurewicz(spec, c0, tol)
    if copy_radius is None:
        copy_radius = 10 * period2_center_distance(s0, p)
    L, K = p * l, p * k
    size = atom_size(s0, p)
    seeds = []
    try:
        seeds.append(solve_renormalized(s0, p, c0))
    except (ConvergenceError, DegenerateError):
        pass
    for t in (1, 0.5, 0.25, 2, 0.75, 1.5, 0.1):
        seeds.append(s0 + size * c0 * t)
    for seed in seeds:
        try:
            c, b2, _ = newton(_raw_relation_fun(L, K), seed.value, tol, bits,
                              label="tuned point")
        except (ConvergenceError, DegenerateError):
            continue
        cand = HPComplex._wrap(c, b2)
        if abs(complex(cand - s0)) > copy_radius:
            continue
        mp = minimal_pair(cand, L, K, tol)
        if mp is None or mp[0] == 0:
            continue
        with context(b2):
            zz, _ = critical_orbit(c, p * (L + K), None)
            bcoef = _renorm(c, p) / zz[p]
            if any(abs(bcoef * zz[p * j]) > containment for j in range(1, L + K + 1)):
                continue
        return solve_misiurewicz(MisiurewiczSpec(*mp), cand, tol)
    raise ConvergenceError("tuning escaped the small copy; refine seed")


# --------------------------------------------------------------------------
# cascades

def cascade(c1, s_base, q_base, dq, count, mu=None, tol=1e-30, first_ratio=None,
            law=None):
    """
    Sequence of centers of periods ``q_base + n*dq`` accumulating on ``c1``.

    Each center is solved from the seed ``c1 + (s_{n-1} - c1) * g``, where
    ``g = 1/mu`` for a Misiurewicz accumulation point and the last observed
    ratio otherwise (``first_ratio`` for the first step, default
    ``(q/(q+dq))**2``).

    The law is fitted by least squares of log|s_n - c1| against n
    (geometric, when ``mu`` is given) or against log(q_n/dq) (power law).

    Returns
    -------
    CascadeRecord
        On a Newton failure the record holds the partial sequence and
        ``error`` carries the message.
    """
    bits = _prec_of(c1, s_base)
    c1 = hp(c1, bits)
    s = hp(s_base, bits)
    mu = None if mu is None else hp(mu, bits)
    centers = [(s, int(q_base))]
    q = int(q_base)
    ratio = None
    err = None
    for n in range(count - 1):
        if mu is not None:
            g = 1 / mu
        elif ratio is not None:
            g = ratio
        else:
            g = HPComplex(first_ratio if first_ratio is not None
                          else (q / (q + dq)) ** 2, bits)
        seed = c1 + (centers[-1][0] - c1) * g
        q += dq
        try:
            sn = solve_superattracting_center(q, seed, tol)
        except (ConvergenceError, DegenerateError) as e:
            err = f"period {q}: {e}"
            break
        ratio = (sn - c1) / (centers[-1][0] - c1)
        centers.append((sn, q))
    return _fit_cascade(c1, tuple(centers), mu, dq, law, err)


def _fit_cascade(c1, centers, mu, dq, law, err):
    d = [centers[i][0] - c1 for i in range(len(centers))]
    ratios = tuple(d[i + 1] / d[i] for i in range(len(d) - 1))
    logs = np.array([math.log(abs(complex(x))) for x in d])
    if len(centers) < 3:
        return CascadeRecord(c1, centers, mu, "inconclusive", None, float("nan"),
                             float("nan"), ratios, err or "too few centers")
    if mu is not None and law in (None, "geometric"):
        n = np.arange(len(d), dtype=float)
        A = np.vstack([n, np.ones_like(n)]).T
        (slope, icpt), res, *_ = np.linalg.lstsq(A, logs, rcond=None)
        resid = float(np.sqrt(np.mean((A @ [slope, icpt] - logs) ** 2)))
        expected = -math.log(abs(complex(mu)))
        ok = abs(slope - expected) < 0.05 * abs(expected) and resid < 0.1
        # s_n - c1 = 1 / (mu^n K0)
        k0 = [1 / (d[i] * mu ** i) for i in range(len(d))]
        K0 = k0[-1]
        return CascadeRecord(c1, centers, mu, "geometric" if ok else "inconclusive",
                             K0, float(slope), resid, ratios, err)
    nn = np.array([q / dq for _, q in centers], dtype=float)
    A = np.vstack([np.log(nn), np.ones_like(nn)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, logs, rcond=None)
    resid = float(np.sqrt(np.mean((A @ [slope, icpt] - logs) ** 2)))
    if abs(slope + 2) <= 0.2 and resid < 0.1:
        fl, e = "inverse_square", 2
    elif abs(slope + 1) <= 0.1 and resid < 0.1:
        fl, e = "inverse_linear", 1
    else:
        fl, e = "inconclusive", round(-slope)
    const = d[-1] * HPComplex(nn[-1] ** e, c1.precision) if e else None
    return CascadeRecord(c1, centers, mu, fl, const, float(slope), resid, ratios, err)


# --------------------------------------------------------------------------
# winding numbers

def parameter_map(tag):
    """
    Built-in maps of the parameter.

    ``("center", q)`` is c -> P_c^q(0); ``("misiurewicz", l, k)`` is
    c -> P_c^{l+k}(0) - P_c^l(0).  Callables taking and returning ``mpc`` are
    passed through.
    """
    if callable(tag):
        return tag
    kind = tag[0]
    if kind == "center":
        q = int(tag[1])

        def f(c):
            z = mpc(0)
            for _ in range(q):
                z = z * z + c
            return z
        return f
    if kind == "misiurewicz":
        l, k = int(tag[1]), int(tag[2])

        def f(c):
            zs, _ = critical_orbit(c, l + k, None)
            return zs[l + k] - zs[l]
        return f
    raise DomainError(f"unknown parameter map {tag!r}")


def winding_number(f, center, radius, samples=64, threshold=1e-300, max_depth=30):
    """
    Winding number of ``f`` around 0 along the circle |c - center| = radius.

    Argument increments are summed over an adaptively refined sampling in
    which every increment is below pi/2 in absolute value.

    Raises
    ------
    DomainError
        ``|f|`` drops below ``threshold`` on the contour ("zero on contour").
    """
    fn = parameter_map(f)
    bits = _prec_of(center)
    with context(bits):
        c0 = hp(center, bits).value
        r = mpfr(radius)
        two_pi = 2 * gmpy2.const_pi()

        def val(t):
            v = fn(c0 + r * mpc(gmpy2.cos(two_pi * t), gmpy2.sin(two_pi * t)))
            if not abs(v) > threshold:
                raise DomainError("zero on contour")
            return v

        half_pi = gmpy2.const_pi() / 2
        total = mpfr(0)
        ts = [mpfr(i) / samples for i in range(samples + 1)]
        vals = [val(t) for t in ts[:-1]]
        vals.append(vals[0])
        stack = [(ts[i], vals[i], ts[i + 1], vals[i + 1], 0) for i in range(samples)]
        stack.reverse()
        while stack:
            ta, va, tb, vb, depth = stack.pop()
            inc = gmpy2.phase(vb / va)
            if abs(inc) < half_pi or depth >= max_depth:
                total += inc
                continue
            tm = (ta + tb) / 2
            vm = val(tm)
            stack.append((tm, vm, tb, vb, depth + 1))
            stack.append((ta, va, tm, vm, depth + 1))
        return int(round(float(total / two_pi)))
