"""
Quadratic iteration kernel.

Everything here is about P_c(z) = z**2 + c and its iterates, evaluated in
gmpy2 multiple precision together with the two first-order derivative
recursions

    dz_{n+1}/dc  = 2 z_n dz_n/dc + 1,     dz_0/dc  = 0
    dz_{n+1}/dz0 = 2 z_n dz_n/dz0,        dz_0/dz0 = 1

The module also hosts the damped Newton driver shared by the parameter
solvers.
"""
from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpc, mpfr

from .errors import ConvergenceError, DegenerateError, DomainError
from .hp import HPComplex, context, default_precision, hp

MAX_NEWTON_STEPS = 200
MAX_PRECISION = 8192


@dataclass(frozen=True)
class OrbitRecord:
    """
    Finite orbit of ``z0`` under P_c.

    ``states[n]`` is ``(z_n, dz_n/dc, dz_n/dz0)`` when derivatives were
    requested and ``(z_n,)`` otherwise.
    """
    c: HPComplex
    states: tuple
    escaped_at: int = None
    escape_radius: float = 2.0
    overflow: bool = False

    @property
    def z(self):
        return [s[0] for s in self.states]

    @property
    def escaped(self):
        return self.escaped_at is not None


@dataclass(frozen=True)
class CycleRecord:
    """A periodic point ``z`` of exact ``period`` for P_c and its multiplier."""
    c: HPComplex
    z: HPComplex
    period: int
    multiplier: HPComplex
    residual: float = 0.0
    tol: float = field(default=1e-30, repr=False)

    @property
    def kind(self):
        """``attracting``, ``indifferent`` or ``repelling``."""
        a = abs(complex(self.multiplier))
        if abs(a - 1.0) <= max(self.tol, 1e-12):
            return "indifferent"
        return "attracting" if a < 1 else "repelling"


def _prec_of(*xs):
    p = default_precision()
    for x in xs:
        if isinstance(x, HPComplex):
            p = max(p, x.precision)
    return p


def iterate(c, z0=0, n=0, with_derivatives=False, escape_radius=2.0,
            stop_on_escape=False):
    """
    Iterate P_c from ``z0`` for ``n`` steps.

    Parameters
    ----------
    c, z0 : HPComplex or literal
    n : int
        Number of applications of P_c; the record holds ``n + 1`` states
        unless truncated at escape.
    with_derivatives : bool
        Also carry dz/dc and dz/dz0.
    escape_radius : float
        ``escaped_at`` is the first index with ``|z_n| > escape_radius``.
    stop_on_escape : bool
        Truncate the orbit at the escape index.

    Returns
    -------
    OrbitRecord
    """
    if n < 0:
        raise DomainError("n must be >= 0")
    if escape_radius < 2:
        raise DomainError("escape_radius must be >= 2")
    prec = _prec_of(c, z0)
    c = hp(c, prec)
    with context(prec):
        cv = c.value
        z = mpc(hp(z0, prec).value)
        dc = mpc(0)
        dz = mpc(1)
        R = mpfr(escape_radius)
        wrap = lambda v: HPComplex._wrap(v, prec)
        states = [(wrap(z), wrap(dc), wrap(dz)) if with_derivatives else (wrap(z),)]
        escaped = None
        overflow = False
        if abs(z) > R:
            escaped = 0
        for i in range(1, n + 1):
            if escaped is not None and stop_on_escape:
                break
            if with_derivatives:
                dc = 2 * z * dc + 1
                dz = 2 * z * dz
            z = z * z + cv
            if not (gmpy2.is_finite(z.real) and gmpy2.is_finite(z.imag)):
                overflow = True
                if escaped is None:
                    escaped = i
                break
            states.append((wrap(z), wrap(dc), wrap(dz)) if with_derivatives
                          else (wrap(z),))
            if escaped is None and abs(z) > R:
                escaped = i
    return OrbitRecord(c=c, states=tuple(states), escaped_at=escaped,
                       escape_radius=float(escape_radius), overflow=overflow)


def critical_orbit(c, n, prec):
    """Raw ``mpc`` lists ``z_0..z_n`` and ``dz_j/dc`` for the orbit of 0.

    Must be called inside a gmpy2 context of ``prec`` bits.
    """
    z = mpc(0)
    d = mpc(0)
    zs = [z]
    ds = [d]
    for _ in range(n):
        d = 2 * z * d + 1
        z = z * z + c
        zs.append(z)
        ds.append(d)
    return zs, ds


def cycle_multiplier(c, z, period):
    """(P_c^period)'(z) by the chain rule; raw ``mpc`` in, raw ``mpc`` out."""
    m = mpc(1)
    for _ in range(period):
        m *= 2 * z
        z = z * z + c
    return m


def newton(fun, x0, tol, prec, max_steps=MAX_NEWTON_STEPS, label="root",
           max_prec=MAX_PRECISION, residual_scale=None):
    """
    Damped scalar Newton with precision escalation.

    Parameters
    ----------
    fun : callable
        ``fun(x) -> (f, step)`` evaluated on raw ``mpc`` inside the active
        context, where ``step`` is the Newton correction (``f/f'`` for the
        plain map, or the inverse log derivative for deflated variants) and
        ``f`` is the residual being driven to zero.
    x0 : mpc
    tol : float
        Convergence requires ``|f| < tol`` and a correction that no longer
        moves the iterate beyond working precision.
    prec : int
        Starting precision; doubled when the residual stagnates above ``tol``.

    Returns
    -------
    (mpc, int, float)
        Root, precision finally used and residual.
    """
    bits = prec
    x = mpc(x0, precision=bits)
    steps = 0
    while True:
        with context(bits):
            x = mpc(x, precision=bits)
            eps = mpfr(2) ** (-(bits - 8))
            f, st = fun(x)
            r = abs(f)
            stagnant = 0
            while steps < max_steps:
                if not gmpy2.is_finite(abs(st)):
                    raise DegenerateError(f"degenerate seed: zero derivative in {label} Newton")
                if r < tol and abs(st) <= eps * max(1, abs(x)):
                    return x, bits, float(r)
                lam = mpfr(1)
                improved = False
                for _ in range(40):
                    xn = x - lam * st
                    fn, stn = fun(xn)
                    rn = abs(fn)
                    if gmpy2.is_finite(rn) and rn <= r:
                        improved = True
                        break
                    lam /= 2
                steps += 1
                if not improved:
                    if r < tol:
                        return x, bits, float(r)
                    break
                moved = abs(xn - x)
                x, f, st, r = xn, fn, stn, rn
                if r < tol and moved <= eps * max(1, abs(x)):
                    return x, bits, float(r)
                if moved <= eps * max(1, abs(x)):
                    stagnant += 1
                    if stagnant >= 3:
                        break
            if steps >= max_steps:
                raise ConvergenceError(f"no {label} near seed (Newton did not converge)",
                                       last=HPComplex._wrap(x, bits), residual=float(r))
        if r < tol:
            return x, bits, float(r)
        if bits * 2 > max_prec:
            raise ConvergenceError(f"no {label} near seed (residual stagnated)",
                                   last=HPComplex._wrap(x, bits), residual=float(r))
        bits *= 2


def find_cycle(c, seed, period, tol=1e-30, max_steps=MAX_NEWTON_STEPS):
    """
    Periodic point of P_c near ``seed`` by Newton on P_c^period(z) - z.

    Returns
    -------
    CycleRecord
        With the multiplier (P_c^period)'(z).

    Raises
    ------
    DegenerateError
        The Newton derivative vanishes (multiplier 1 at the seed).
    ConvergenceError
        No cycle near the seed.
    """
    if period < 1:
        raise DomainError("period must be >= 1")
    prec = _prec_of(c, seed)
    c = hp(c, prec)

    def fun(z):
        cv = mpc(c.value, precision=z.precision[0])
        w = z
        d = mpc(1)
        for _ in range(period):
            d = 2 * w * d
            w = w * w + cv
        g = d - 1
        if g == 0:
            return w - z, mpc("inf")
        return w - z, (w - z) / g

    z, bits, res = newton(fun, hp(seed, prec).value, tol, prec, max_steps,
                          label="cycle")
    with context(bits):
        mult = cycle_multiplier(mpc(c.value, precision=bits), z, period)
    return CycleRecord(c=hp(c, bits), z=HPComplex._wrap(z, bits), period=period,
                       multiplier=HPComplex._wrap(mult, bits), residual=res, tol=tol)
