"""
Arbitrary precision complex scalars.

``HPComplex`` is a thin immutable wrapper over a gmpy2 ``mpc`` value that
carries its own mantissa width.  Arithmetic between two values is carried
out at the larger of the two precisions, so a 512-bit orbit never silently
drops to 256 bits because one operand came from a literal.

The hot loops in the solvers work on raw ``mpc`` objects inside a local
gmpy2 context; ``HPComplex`` is the public currency at module boundaries.
"""
import math
import os
import re

import gmpy2
from gmpy2 import mpc, mpfr

DEFAULT_PRECISION = 256
ENV_PRECISION = "DECOLAB_PRECISION_BITS"


def default_precision():
    """Working precision in bits, honouring ``DECOLAB_PRECISION_BITS``."""
    v = os.environ.get(ENV_PRECISION)
    if v:
        try:
            bits = int(v)
        except ValueError:
            raise ValueError(f"{ENV_PRECISION} must be an integer, got {v!r}")
        if bits < 53:
            raise ValueError(f"{ENV_PRECISION} must be >= 53")
        return bits
    return DEFAULT_PRECISION


def context(bits):
    """gmpy2 local context with ``bits`` of mantissa for real and imag parts."""
    return gmpy2.context(gmpy2.get_context(), precision=bits,
                         real_prec=bits, imag_prec=bits)


_NUM = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_RE_PAIR = re.compile(rf"^\s*({_NUM})\s*,\s*({_NUM})\s*$")
_RE_CPLX = re.compile(rf"^\s*({_NUM})?\s*(?:([+-])\s*((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*[ijIJ])?\s*$")
_RE_IMAG = re.compile(rf"^\s*([+-]?)\s*((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*[ijIJ]\s*$")


def parse_complex(text):
    """
    Split a complex literal into decimal real and imaginary strings.

    Accepted forms are ``RE+IMi``, ``RE-IMj``, ``RE,IM``, a bare real and
    a bare imaginary (``2.5i``, ``-i``).

    Returns
    -------
    (str, str)
        Decimal strings, kept as text so that no digits are lost to binary
        rounding before the target precision is known.
    """
    s = text.strip().replace(" ", "")
    m = _RE_PAIR.match(s)
    if m:
        return m.group(1), m.group(2)
    m = _RE_IMAG.match(s)
    if m and not re.match(rf"^{_NUM}[+-]", s):
        mag = m.group(2) or "1"
        return "0", ("-" if m.group(1) == "-" else "") + mag
    m = _RE_CPLX.match(s)
    if m and (m.group(1) is not None or m.group(2) is not None):
        re_part = m.group(1) or "0"
        if m.group(2) is None:
            return re_part, "0"
        mag = m.group(3) or "1"
        return re_part, ("-" if m.group(2) == "-" else "") + mag
    raise ValueError(f"cannot parse complex number {text!r}")


def to_mpc(x, bits):
    """Convert ``x`` (str, number, mpc or HPComplex) to an ``mpc`` of ``bits``."""
    if isinstance(x, HPComplex):
        return mpc(x.value, precision=bits)
    if isinstance(x, str):
        r, i = parse_complex(x)
        return mpc(f"({r} {i})", precision=bits)
    if isinstance(x, (tuple, list)) and len(x) == 2:
        with context(bits):
            return mpc(mpfr(x[0], bits), mpfr(x[1], bits))
    return mpc(x, precision=bits)


class HPComplex:
    """
    Immutable complex number with an explicit mantissa width.

    Parameters
    ----------
    value : str, int, float, complex, mpc, tuple or HPComplex
        Strings accept ``RE+IMi``, ``RE,IM`` and Python ``a+bj`` forms.
    precision : int, optional
        Mantissa bits.  Defaults to the precision of ``value`` when it is an
        ``HPComplex`` and to :func:`default_precision` otherwise.
    """

    __slots__ = ("_v", "_prec")

    def __init__(self, value=0, precision=None):
        if precision is None:
            precision = value.precision if isinstance(value, HPComplex) \
                else default_precision()
        precision = int(precision)
        if precision < 2:
            raise ValueError("precision must be at least 2 bits")
        self._prec = precision
        self._v = to_mpc(value, precision)

    @classmethod
    def _wrap(cls, v, prec):
        obj = cls.__new__(cls)
        obj._v = v
        obj._prec = prec
        return obj

    @property
    def value(self):
        """The underlying gmpy2 ``mpc``."""
        return self._v

    @property
    def precision(self):
        return self._prec

    @property
    def re(self):
        return self._v.real

    @property
    def im(self):
        return self._v.imag

    def with_precision(self, bits):
        return HPComplex(self, bits)

    # arithmetic -------------------------------------------------------
    def _binop(self, other, op):
        if isinstance(other, HPComplex):
            p = max(self._prec, other._prec)
            o = other._v
        elif isinstance(other, (int, float, complex, str)) or \
                type(other).__name__ in ("mpc", "mpfr", "mpz", "mpq"):
            p = self._prec
            o = to_mpc(other, p)
        else:
            return NotImplemented
        with context(p):
            return HPComplex._wrap(op(mpc(self._v, precision=p), mpc(o, precision=p)), p)

    def __add__(self, o):
        return self._binop(o, lambda a, b: a + b)

    def __radd__(self, o):
        return self._binop(o, lambda a, b: b + a)

    def __sub__(self, o):
        return self._binop(o, lambda a, b: a - b)

    def __rsub__(self, o):
        return self._binop(o, lambda a, b: b - a)

    def __mul__(self, o):
        return self._binop(o, lambda a, b: a * b)

    def __rmul__(self, o):
        return self._binop(o, lambda a, b: b * a)

    def __truediv__(self, o):
        return self._binop(o, lambda a, b: a / b)

    def __rtruediv__(self, o):
        return self._binop(o, lambda a, b: b / a)

    def __pow__(self, n):
        with context(self._prec):
            return HPComplex._wrap(self._v ** n, self._prec)

    def __neg__(self):
        return HPComplex._wrap(-self._v, self._prec)

    def __pos__(self):
        return self

    def __abs__(self):
        with context(self._prec):
            return abs(self._v)

    def conjugate(self):
        with context(self._prec):
            return HPComplex._wrap(self._v.conjugate(), self._prec)

    def __eq__(self, o):
        if isinstance(o, HPComplex):
            return self._v == o._v
        try:
            return self._v == to_mpc(o, self._prec)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash((self._v.real, self._v.imag))

    def __complex__(self):
        return complex(self._v)

    def __reduce__(self):
        return (HPComplex, (self.to_string(), self._prec))

    # formatting -------------------------------------------------------
    def digits(self):
        """Significant decimal digits carried by the mantissa."""
        return max(17, int(math.ceil(self._prec * math.log10(2))) + 1)

    def to_string(self, digits=None):
        """Format as ``RE+IMi`` with ``digits`` significant digits."""
        d = self.digits() if digits is None else int(digits)
        r = _fmt_real(self._v.real, d)
        i = _fmt_real(self._v.imag, d)
        sign = "-" if i.startswith("-") else "+"
        return f"{r}{sign}{i.lstrip('-')}i"

    def __str__(self):
        return self.to_string(17)

    def __repr__(self):
        return f"HPComplex('{self.to_string(17)}', precision={self._prec})"


def _fmt_real(x, d):
    if gmpy2.is_zero(x):
        return "0"
    s = "{0:.{1}g}".format(x, d)
    return s


def hp(x, precision=None):
    """Coerce ``x`` to :class:`HPComplex` (identity for HPComplex input)."""
    if isinstance(x, HPComplex) and (precision is None or precision == x.precision):
        return x
    return HPComplex(x, precision)
