"""Truncated arithmetic in Q_p and its unramified quadratic extension K = Q_p(w).

Elements are stored in capped-relative form: ``p**valuation * unit`` where the
unit is known modulo ``p**precision``.  Zero is a separate marker carrying an
absolute precision (``None`` for an exact zero).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .errors import (
    DivisionByZero,
    NotASquare,
    NotAUnit,
    OddValuation,
    OutOfConvergenceDomain,
    PrecisionExhausted,
)

DEFAULT_PRECISION = 48
# nonzero results with fewer significant digits than this raise PrecisionExhausted
MIN_DIGITS = 4


def vp_int(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp_pair(x: int, y: int, p: int) -> int:
    """Valuation of x + w*y for integers, assuming w is a unit."""
    if x == 0 and y == 0:
        raise ValueError("valuation of 0")
    v = 0
    while x % p == 0 and y % p == 0:
        x //= p
        y //= p
        v += 1
    return v


def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def pair_mul(x1, y1, x2, y2, c, mod):
    return (x1 * x2 + c * y1 * y2) % mod, (x1 * y2 + x2 * y1) % mod


def pair_inv(x, y, c, mod):
    n = (x * x - c * y * y) % mod
    ninv = pow(n, -1, mod)
    return (x * ninv) % mod, (-y * ninv) % mod


def pair_pow(x, y, e, c, mod):
    rx, ry = 1 % mod, 0
    bx, by = x % mod, y % mod
    while e:
        if e & 1:
            rx, ry = pair_mul(rx, ry, bx, by, c, mod)
        bx, by = pair_mul(bx, by, bx, by, c, mod)
        e >>= 1
    return rx, ry


def residue_index(x: int, y: int, p: int) -> int:
    """Position of x + w*y in the fixed residue enumeration (x outer, y inner)."""
    return (x % p) * p + (y % p)


def residue_system(p: int):
    """O_K/pO_K as pairs (x, y), x outer loop, y inner loop."""
    return [(x, y) for x in range(p) for y in range(p)]


def _split_fraction(q: Fraction, p: int):
    """Return (valuation, unit numerator, unit denominator) of a nonzero rational."""
    num, den = q.numerator, q.denominator
    v = 0
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v, num, den


# --------------------------------------------------------------------------
# Q_p
# --------------------------------------------------------------------------


class PadicScalar:
    """An element of Q_p known to a finite number of significant digits."""

    __slots__ = ("p", "valuation", "unit", "precision")

    def __init__(self, p: int, valuation, unit: int = 0, precision=DEFAULT_PRECISION):
        # valuation None means zero; precision is then the absolute precision
        # (None for an exact zero)
        self.p = p
        self.valuation = valuation
        self.precision = precision
        if valuation is None:
            self.unit = 0
        else:
            if unit % p == 0:
                raise ValueError("unit part must not be divisible by p")
            self.unit = unit % p**precision

    # construction -----------------------------------------------------
    @classmethod
    def zero(cls, p, absprec=None):
        return cls(p, None, 0, absprec)

    @classmethod
    def from_rational(cls, p, q, precision=DEFAULT_PRECISION):
        q = Fraction(q)
        if q == 0:
            return cls.zero(p)
        v, num, den = _split_fraction(q, p)
        mod = p**precision
        return cls(p, v, num * pow(den, -1, mod) % mod, precision)

    @classmethod
    def from_digits(cls, p, valuation, digits):
        digits = list(digits)
        while digits and digits[0] == 0:
            digits.pop(0)
            valuation += 1
        if not digits:
            return cls.zero(p)
        unit = sum(d * p**i for i, d in enumerate(digits))
        return cls(p, valuation, unit, len(digits))

    # properties -------------------------------------------------------
    def is_zero(self) -> bool:
        return self.valuation is None

    @property
    def absprec(self):
        if self.valuation is None:
            return self.precision
        return self.valuation + self.precision

    @property
    def digits(self):
        if self.valuation is None:
            return []
        out, u = [], self.unit
        for _ in range(self.precision):
            u, d = divmod(u, self.p)
            out.append(d)
        return out

    def norm(self) -> Fraction:
        if self.valuation is None:
            return Fraction(0)
        return Fraction(self.p) ** (-self.valuation)

    def is_unit(self) -> bool:
        return self.valuation == 0

    def to_scaled(self, absprec: int):
        """Return (n, k) with self = n / p**k modulo p**absprec, k >= 0 minimal."""
        if self.valuation is None:
            return 0, 0
        if self.absprec < absprec:
            raise PrecisionExhausted(
                f"need {absprec} absolute digits, only {self.absprec} known"
            )
        v = self.valuation
        if v >= absprec:
            return 0, 0
        k = max(0, -v)
        n = (self.unit * self.p ** (v + k)) % self.p ** (absprec + k)
        while k > 0 and n % self.p == 0:
            n //= self.p
            k -= 1
        return n, k

    def to_fraction(self) -> Fraction:
        """The finite digit expansion as a rational number."""
        if self.valuation is None:
            return Fraction(0)
        return Fraction(self.unit) * Fraction(self.p) ** self.valuation

    # arithmetic -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, PadicScalar):
            if other.p != self.p:
                raise ValueError("mismatched primes")
            return other
        if isinstance(other, (int, Fraction)):
            return PadicScalar.from_rational(self.p, other, _exact_digits(self, other, DEFAULT_PRECISION))
        return NotImplemented

    def __neg__(self):
        if self.valuation is None:
            return self
        return PadicScalar(self.p, self.valuation, -self.unit, self.precision)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        p = self.p
        if self.valuation is None or other.valuation is None:
            z, x = (self, other) if self.valuation is None else (other, self)
            if x.valuation is None:
                precs = [t.precision for t in (z, x) if t.precision is not None]
                return PadicScalar.zero(p, min(precs) if precs else None)
            if z.precision is None:
                return x
            return _padic_truncate(x, z.precision)
        vmin = min(self.valuation, other.valuation)
        A = min(self.absprec, other.absprec)
        if A <= vmin:
            return PadicScalar.zero(p, A)
        mod = p ** (A - vmin)
        s = (
            self.unit * p ** (self.valuation - vmin)
            + other.unit * p ** (other.valuation - vmin)
        ) % mod
        if s == 0:
            return PadicScalar.zero(p, A)
        k = vp_int(s, p)
        prec = A - vmin - k
        if prec < MIN_DIGITS:
            raise PrecisionExhausted(f"cancellation left {prec} significant digits")
        return PadicScalar(p, vmin + k, s // p**k, prec)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.valuation is None or other.valuation is None:
            return PadicScalar.zero(self.p, _zero_product_abs(self, other))
        prec = min(self.precision, other.precision)
        return PadicScalar(
            self.p, self.valuation + other.valuation, self.unit * other.unit, prec
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.valuation is None:
            raise DivisionByZero("division by a p-adic zero")
        if self.valuation is None:
            a = None if self.precision is None else self.precision - other.valuation
            return PadicScalar.zero(self.p, a)
        prec = min(self.precision, other.precision)
        mod = self.p**prec
        return PadicScalar(
            self.p,
            self.valuation - other.valuation,
            self.unit * pow(other.unit, -1, mod),
            prec,
        )

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __pow__(self, n: int):
        if n < 0:
            return PadicScalar.from_rational(self.p, 1, self.precision or DEFAULT_PRECISION) / self**(-n)
        if self.valuation is None:
            return self if n else PadicScalar.from_rational(self.p, 1)
        mod = self.p**self.precision
        return PadicScalar(self.p, self.valuation * n, pow(self.unit, n, mod), self.precision)

    def agrees(self, other, digits: int) -> bool:
        """True when self - other vanishes to ``digits`` places past min valuation."""
        other = self._coerce(other)
        d = self - other
        if d.valuation is None:
            ref = _ref_val(self, other)
            return d.precision is None or ref is None or d.precision >= ref + digits
        ref = _ref_val(self, other)
        return ref is not None and d.valuation >= ref + digits

    def __eq__(self, other):
        try:
            other = self._coerce(other)
        except Exception:
            return NotImplemented
        if other is NotImplemented:
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def __repr__(self):
        if self.valuation is None:
            return "PadicScalar(0)" if self.precision is None else f"O({self.p}^{self.precision})"
        return f"PadicScalar({_format_terms(self.p, self.valuation, [(d, 0) for d in self.digits[:10]], self.precision > 10)})"


def _ref_val(x, y):
    vals = [v for v in (x.valuation, y.valuation) if v is not None]
    return min(vals) if vals else None


def _zero_product_abs(x, y):
    z, o = (x, y) if x.valuation is None else (y, x)
    if z.precision is None:
        return None
    if o.valuation is None:
        if o.precision is None:
            return None
        return z.precision + o.precision
    return z.precision + o.valuation


def _exact_digits(x, q, base: int) -> int:
    """Relative digits for the exact rational q so it never limits x's precision."""
    q = Fraction(q)
    if q == 0 or x.precision is None:
        return max(base, MIN_DIGITS)
    p = x.p
    vq = vp_int(q.numerator, p) - vp_int(q.denominator, p)
    return max(base, MIN_DIGITS, x.precision, x.absprec - vq)


def _padic_truncate(x: PadicScalar, absprec: int) -> PadicScalar:
    if x.absprec <= absprec:
        return x
    if absprec <= x.valuation:
        return PadicScalar.zero(x.p, absprec)
    prec = absprec - x.valuation
    return PadicScalar(x.p, x.valuation, x.unit, prec)


# --------------------------------------------------------------------------
# K = Q_p(w), w^2 = c
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ExtContext:
    """Data of the extension: prime p, w^2 = c, and working precision N."""

    p: int
    c: int
    precision: int = DEFAULT_PRECISION

    def __post_init__(self):
        if self.p < 3 or self.p % 2 == 0 or any(self.p % d == 0 for d in range(3, int(self.p**0.5) + 1, 2)):
            raise ValueError(f"p must be an odd prime, got {self.p}")
        if self.c % self.p == 0:
            raise ValueError("c must be a p-adic unit")
        if legendre(self.c, self.p) != -1:
            raise ValueError(f"c={self.c} is a square mod {self.p}; the extension would split")
        if self.precision < 2 * MIN_DIGITS:
            raise ValueError("working precision too small")

    @property
    def q(self) -> int:
        return self.p * self.p

    @cached_property
    def modulus(self) -> int:
        return self.p**self.precision

    def elem(self, a=0, b=0, precision=None) -> "ExtScalar":
        """The element a + w*b for rationals a, b (denominators prime to p allowed)."""
        return ExtScalar.from_rationals(self, Fraction(a), Fraction(b), precision)

    def zero(self, absprec=None) -> "ExtScalar":
        return ExtScalar(self, None, 0, 0, absprec)

    def one(self) -> "ExtScalar":
        return self.elem(1)

    @cached_property
    def omega(self) -> "ExtScalar":
        return self.elem(0, 1)

    @cached_property
    def i_value(self) -> "ExtScalar":
        return sqrt_hensel(self.elem(-1))

    @cached_property
    def omega_p_flag(self) -> bool:
        """True when w = alpha*i with alpha in Q_p (then w_p = 1), i.e. -c is a square."""
        return legendre(-self.c, self.p) == 1

    @cached_property
    def omega_p(self) -> "ExtScalar":
        return self.one() if self.omega_p_flag else self.omega

    @cached_property
    def lam(self) -> "ExtScalar":
        """lambda = w_p * i; it spans the trace-zero line w*Q_p."""
        return self.omega_p * self.i_value

    @cached_property
    def mu_generator(self) -> "ExtScalar":
        """Teichmuller lift of the first generator of F_{p^2}^x in residue order."""
        p, q = self.p, self.q
        for x, y in residue_system(p):
            if (x, y) == (0, 0):
                continue
            if residue_order(x, y, self.c, p) == q - 1:
                return teichmuller(self.elem(x, y))
        raise AssertionError("F_{p^2}^x is cyclic")  # pragma: no cover


class ExtScalar:
    """An element a + w*b of K stored as p**valuation * (ux + w*uy)."""

    __slots__ = ("ctx", "valuation", "ux", "uy", "precision")

    def __init__(self, ctx: ExtContext, valuation, ux: int = 0, uy: int = 0, precision=None):
        self.ctx = ctx
        self.valuation = valuation
        if valuation is None:
            self.ux = self.uy = 0
            self.precision = precision
            return
        if precision is None:
            precision = ctx.precision
        p = ctx.p
        if ux % p == 0 and uy % p == 0:
            raise ValueError("unit part must not be divisible by p")
        mod = p**precision
        self.ux = ux % mod
        self.uy = uy % mod
        self.precision = precision

    # construction -----------------------------------------------------
    @classmethod
    def from_rationals(cls, ctx, a: Fraction, b: Fraction, precision=None):
        prec = precision or ctx.precision
        p = ctx.p
        if a == 0 and b == 0:
            return cls(ctx, None, 0, 0, None)
        vals = []
        for q in (a, b):
            if q != 0:
                vals.append(_split_fraction(q, p)[0])
        v = min(vals)
        # scale both components by p^-v into Z_(p)
        mod = p**prec
        comps = []
        for q in (a, b):
            if q == 0:
                comps.append(0)
                continue
            w, num, den = _split_fraction(q, p)
            comps.append(num * p ** (w - v) * pow(den, -1, mod) % mod)
        return cls(ctx, v, comps[0], comps[1], prec)

    @classmethod
    def from_padic(cls, ctx, a: PadicScalar, b: PadicScalar | None = None):
        b = b if b is not None else PadicScalar.zero(ctx.p)
        return _ext_from_parts(ctx, a, b)

    @classmethod
    def from_scaled(cls, ctx, nx: int, ny: int, k: int, precision=None):
        """The element (nx + w*ny) / p**k."""
        if nx == 0 and ny == 0:
            return cls(ctx, None, 0, 0, None)
        p = ctx.p
        v = vp_pair(nx, ny, p)
        return cls(ctx, v - k, nx // p**v, ny // p**v, precision or ctx.precision)

    # properties -------------------------------------------------------
    @property
    def p(self):
        return self.ctx.p

    def is_zero(self) -> bool:
        return self.valuation is None

    def is_unit(self) -> bool:
        return self.valuation == 0

    @property
    def absprec(self):
        if self.valuation is None:
            return self.precision
        return self.valuation + self.precision

    def norm_abs(self) -> Fraction:
        """|x|_p = max(|a|_p, |b|_p)."""
        if self.valuation is None:
            return Fraction(0)
        return Fraction(self.p) ** (-self.valuation)

    @property
    def a(self) -> PadicScalar:
        return _component(self, 0)

    @property
    def b(self) -> PadicScalar:
        return _component(self, 1)

    @property
    def digits(self):
        """Base-p digits of the unit part as (x_i, y_i) pairs."""
        if self.valuation is None:
            return []
        out, x, y, p = [], self.ux, self.uy, self.p
        for _ in range(self.precision):
            x, dx = divmod(x, p)
            y, dy = divmod(y, p)
            out.append((dx, dy))
        return out

    def residue(self):
        if self.valuation != 0:
            raise NotAUnit("residue of a non-unit")
        return self.ux % self.p, self.uy % self.p

    def to_scaled(self, absprec: int):
        """Return (nx, ny, k): self = (nx + w*ny)/p**k modulo p**absprec, k minimal."""
        if self.valuation is None:
            if self.precision is not None and self.precision < absprec:
                raise PrecisionExhausted(
                    f"need {absprec} absolute digits of a zero known to {self.precision}"
                )
            return 0, 0, 0
        if self.absprec < absprec:
            raise PrecisionExhausted(
                f"need {absprec} absolute digits, only {self.absprec} known"
            )
        return scaled_reduce(self.ux, self.uy, -self.valuation, absprec, self.p)

    def conj(self) -> "ExtScalar":
        if self.valuation is None:
            return self
        return ExtScalar(self.ctx, self.valuation, self.ux, -self.uy, self.precision)

    def norm(self) -> PadicScalar:
        """Field norm x * conj(x), an element of Q_p."""
        if self.valuation is None:
            a = None if self.precision is None else 2 * self.precision
            return PadicScalar.zero(self.p, a)
        mod = self.p**self.precision
        n = (self.ux * self.ux - self.ctx.c * self.uy * self.uy) % mod
        return PadicScalar(self.p, 2 * self.valuation, n, self.precision)

    def trace(self) -> PadicScalar:
        return 2 * self.a

    # arithmetic -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, ExtScalar):
            if other.ctx != self.ctx:
                raise ValueError("mismatched extension contexts")
            return other
        if isinstance(other, (int, Fraction)):
            return self.ctx.elem(other, precision=_exact_digits(self, other, self.ctx.precision))
        if isinstance(other, PadicScalar):
            return ExtScalar.from_padic(self.ctx, other)
        return NotImplemented

    def __neg__(self):
        if self.valuation is None:
            return self
        return ExtScalar(self.ctx, self.valuation, -self.ux, -self.uy, self.precision)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        ctx, p = self.ctx, self.p
        if self.valuation is None or other.valuation is None:
            z, x = (self, other) if self.valuation is None else (other, self)
            if z.precision is None:
                return x
            if x.valuation is None:
                a = z.precision if x.precision is None else min(z.precision, x.precision)
                return ExtScalar(ctx, None, 0, 0, a)
            return _ext_truncate(x, z.precision)
        vmin = min(self.valuation, other.valuation)
        A = min(self.absprec, other.absprec)
        if A <= vmin:
            return ExtScalar(ctx, None, 0, 0, A)
        mod = p ** (A - vmin)
        s1 = p ** (self.valuation - vmin)
        s2 = p ** (other.valuation - vmin)
        sx = (self.ux * s1 + other.ux * s2) % mod
        sy = (self.uy * s1 + other.uy * s2) % mod
        if sx == 0 and sy == 0:
            return ExtScalar(ctx, None, 0, 0, A)
        k = vp_pair(sx, sy, p)
        prec = A - vmin - k
        if prec < MIN_DIGITS:
            raise PrecisionExhausted(f"cancellation left {prec} significant digits")
        pk = p**k
        return ExtScalar(ctx, vmin + k, sx // pk, sy // pk, prec)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.valuation is None or other.valuation is None:
            return ExtScalar(self.ctx, None, 0, 0, _zero_product_abs(self, other))
        prec = min(self.precision, other.precision)
        mod = self.p**prec
        x, y = pair_mul(self.ux, self.uy, other.ux, other.uy, self.ctx.c, mod)
        return ExtScalar(self.ctx, self.valuation + other.valuation, x, y, prec)

    __rmul__ = __mul__

    def inverse(self) -> "ExtScalar":
        if self.valuation is None:
            raise DivisionByZero("inverse of zero")
        mod = self.p**self.precision
        x, y = pair_inv(self.ux, self.uy, self.ctx.c, mod)
        return ExtScalar(self.ctx, -self.valuation, x, y, self.precision)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.valuation is None:
            raise DivisionByZero("division by zero in K")
        if self.valuation is None:
            a = None if self.precision is None else self.precision - other.valuation
            return ExtScalar(self.ctx, None, 0, 0, a)
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        if self.valuation is None:
            return self if n else self.ctx.one()
        mod = self.p**self.precision
        x, y = pair_pow(self.ux, self.uy, n, self.ctx.c, mod)
        return ExtScalar(self.ctx, self.valuation * n, x, y, self.precision)

    def agrees(self, other, digits: int) -> bool:
        """True when self and other agree to ``digits`` places past their valuation."""
        other = self._coerce(other)
        d = self - other
        ref = _ref_val(self, other)
        if d.valuation is None:
            return d.precision is None or ref is None or d.precision >= ref + digits
        return ref is not None and d.valuation >= ref + digits

    def __eq__(self, other):
        try:
            other = self._coerce(other)
        except Exception:
            return NotImplemented
        if other is NotImplemented:
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def __repr__(self):
        return f"ExtScalar({format_ext(self)})"


def scaled_reduce(ux: int, uy: int, k: int, absprec: int, p: int):
    """Normalize (ux + w*uy)/p**k modulo p**absprec to (nx, ny, k') with k' >= 0 minimal."""
    if k < 0:
        s = p ** (-k)
        ux, uy, k = ux * s, uy * s, 0
    if absprec + k <= 0:
        return 0, 0, 0
    mod = p ** (absprec + k)
    nx, ny = ux % mod, uy % mod
    while k > 0 and nx % p == 0 and ny % p == 0:
        nx //= p
        ny //= p
        k -= 1
    if nx == 0 and ny == 0:
        k = 0
    return nx, ny, k


def _component(x: ExtScalar, which: int) -> PadicScalar:
    p = x.p
    if x.valuation is None:
        return PadicScalar.zero(p, x.precision)
    u = x.ux if which == 0 else x.uy
    if u == 0:
        return PadicScalar.zero(p, x.absprec)
    k = vp_int(u, p)
    if k >= x.precision:
        return PadicScalar.zero(p, x.absprec)
    return PadicScalar(p, x.valuation + k, u // p**k, x.precision - k)


def _ext_from_parts(ctx, a: PadicScalar, b: PadicScalar) -> ExtScalar:
    p = ctx.p
    if a.valuation is None and b.valuation is None:
        abs_ = [z.precision for z in (a, b) if z.precision is not None]
        return ExtScalar(ctx, None, 0, 0, min(abs_) if abs_ else None)
    vals = [z.valuation for z in (a, b) if z.valuation is not None]
    v = min(vals)
    A = min(z.absprec if z.absprec is not None else 10**9 for z in (a, b))
    prec = A - v
    mod = p**prec
    comps = []
    for z in (a, b):
        comps.append(0 if z.valuation is None else z.unit * p ** (z.valuation - v) % mod)
    return ExtScalar(ctx, v, comps[0], comps[1], prec)


def _ext_truncate(x: ExtScalar, absprec: int) -> ExtScalar:
    if x.absprec <= absprec:
        return x
    if absprec <= x.valuation:
        return ExtScalar(x.ctx, None, 0, 0, absprec)
    return ExtScalar(x.ctx, x.valuation, x.ux, x.uy, absprec - x.valuation)


def format_padic(x: PadicScalar) -> str:
    if x.valuation is None:
        return "0"
    return f"{x.valuation}:" + "".join(str(d) for d in x.digits)


def format_ext(x: ExtScalar, max_digits: int = 10) -> str:
    """Short human form, e.g. '1 + 2*3 + w*3 + ...' truncated at ``max_digits`` terms."""
    if x.valuation is None:
        return "0"
    return _format_terms(x.p, x.valuation, x.digits[:max_digits], x.precision > max_digits)


def _format_terms(p: int, valuation: int, digits, more: bool) -> str:
    terms = []
    for i, (dx, dy) in enumerate(digits):
        e = valuation + i
        pw = "" if e == 0 else (f"{p}" if e == 1 else f"{p}^{e}")
        for d, tag in ((dx, ""), (dy, "w")):
            if d == 0:
                continue
            factors = [str(d)] if d != 1 or not (tag or pw) else []
            factors += [f for f in (tag, pw) if f]
            terms.append("*".join(factors))
    if more:
        terms.append("...")
    return " + ".join(terms) if terms else "0"


# --------------------------------------------------------------------------
# residue-field helpers
# --------------------------------------------------------------------------


def residue_order(x: int, y: int, c: int, p: int) -> int:
    """Multiplicative order of x + w*y in F_{p^2}^x."""
    q1 = p * p - 1
    best = q1
    for d in sorted(_divisors(q1)):
        if pair_pow(x, y, d, c, p) == (1, 0):
            best = d
            break
    return best


def _divisors(n):
    return {d for i in range(1, int(n**0.5) + 1) if n % i == 0 for d in (i, n // i)}


def _residue_sqrt(x: int, y: int, c: int, p: int):
    """Canonical square root in F_{p^2}: the root with the smaller residue index."""
    roots = [
        (rx, ry)
        for rx, ry in residue_system(p)
        if pair_mul(rx, ry, rx, ry, c, p) == (x % p, y % p)
    ]
    if not roots:
        return None
    return min(roots, key=lambda r: residue_index(r[0], r[1], p))


# --------------------------------------------------------------------------
# Hensel lifting, Teichmuller lifts
# --------------------------------------------------------------------------


def sqrt_hensel(x: ExtScalar) -> ExtScalar:
    """Square root by Hensel lifting; the residue of the root is the canonical one."""
    ctx, p = x.ctx, x.p
    if x.valuation is None:
        return x
    if x.valuation % 2:
        raise OddValuation(f"valuation {x.valuation} is odd")
    r0 = _residue_sqrt(x.ux, x.uy, ctx.c, p)
    if r0 is None:
        raise NotASquare("residue is not a square in F_{p^2}")
    prec = x.precision
    mod = p**prec
    # Newton iteration r <- (r + u/r)/2 on the unit part, in integers
    rx, ry = r0
    inv2 = pow(2, -1, mod)
    known = 1
    while known < prec:
        known = min(2 * known, prec)
        m = p**known
        ix, iy = pair_inv(rx, ry, ctx.c, m)
        qx, qy = pair_mul(x.ux, x.uy, ix, iy, ctx.c, m)
        rx = (rx + qx) * inv2 % m
        ry = (ry + qy) * inv2 % m
    return ExtScalar(ctx, x.valuation // 2, rx, ry, prec)


def sqrt_padic(x: PadicScalar) -> PadicScalar:
    """Square root inside Q_p (canonical branch with residue in 1..(p-1)/2)."""
    if x.valuation is None:
        return x
    if x.valuation % 2:
        raise OddValuation(f"valuation {x.valuation} is odd")
    p = x.p
    if legendre(x.unit, p) != 1:
        raise NotASquare("not a square in Q_p")
    r = min(r for r in range(1, p) if r * r % p == x.unit % p)
    prec = x.precision
    known = 1
    inv2 = pow(2, -1, p**prec)
    while known < prec:
        known = min(2 * known, prec)
        m = p**known
        r = (r + x.unit * pow(r, -1, m)) * inv2 % m
    return PadicScalar(p, x.valuation // 2, r, prec)


def teichmuller(x: ExtScalar) -> ExtScalar:
    """The (p^2-1)-th root of unity congruent to x modulo p, as lim x^(p^(2n))."""
    if x.valuation != 0:
        raise NotAUnit("Teichmuller lift needs a unit")
    ctx, p = x.ctx, x.p
    N = ctx.precision
    mod = p**N
    q = p * p
    rx, ry = x.ux % p, x.uy % p
    # x^(q^n) is correct to n+1 digits; N rounds suffice
    rx, ry = pair_pow(rx, ry, q ** N, ctx.c, mod)
    return ExtScalar(ctx, 0, rx, ry, N)


# --------------------------------------------------------------------------
# power series
# --------------------------------------------------------------------------


def _require_small(x: ExtScalar, name: str):
    if x.valuation is not None and x.valuation < 1:
        raise OutOfConvergenceDomain(f"{name} needs |x| <= 1/p, got valuation {x.valuation}")


def _series_bound(v: int, p: int, target: int) -> int:
    """Smallest n with n*v - (n-1)/(p-1) >= target (lower bound for v(x^n/n!))."""
    n = 1
    while n * v - (n - 1) / (p - 1) < target:
        n += 1
    return n


def exp_p(x: ExtScalar) -> ExtScalar:
    _require_small(x, "exp")
    ctx = x.ctx
    if x.valuation is None:
        return ctx.one()
    # the constant 1 is exact; seeding with an N-digit 1 would drop digits of
    # x that exp (an isometry of pO_K) still determines
    one = ctx.elem(1, precision=max(ctx.precision, x.absprec))
    nmax = _series_bound(x.valuation, ctx.p, x.absprec + 2)
    total = one
    term = one
    for n in range(1, nmax + 1):
        term = term * x / n
        total = total + term
    return total


def cos_p(x: ExtScalar) -> ExtScalar:
    _require_small(x, "cos")
    ctx = x.ctx
    if x.valuation is None:
        return ctx.one()
    one = ctx.elem(1, precision=max(ctx.precision, x.absprec))
    nmax = _series_bound(x.valuation, ctx.p, x.absprec + 2)
    x2 = x * x
    total = one
    term = one
    for n in range(2, nmax + 1, 2):
        term = -term * x2 / ((n - 1) * n)
        total = total + term
    return total


def sin_p(x: ExtScalar) -> ExtScalar:
    _require_small(x, "sin")
    ctx = x.ctx
    if x.valuation is None:
        return x
    nmax = _series_bound(x.valuation, ctx.p, x.absprec + 2)
    x2 = x * x
    total = x
    term = x
    for n in range(3, nmax + 2, 2):
        term = -term * x2 / ((n - 1) * n)
        total = total + term
    return total


def log_p(x: ExtScalar) -> ExtScalar:
    """log(x) for x in 1 + pO_K."""
    ctx, p = x.ctx, x.p
    if x.valuation != 0:
        raise OutOfConvergenceDomain("log needs x in 1 + pO_K")
    z = x - 1
    if z.valuation is None:
        return ctx.zero(z.precision)
    if z.valuation < 1:
        raise OutOfConvergenceDomain("log needs x in 1 + pO_K")
    v = z.valuation
    target = z.absprec + 2
    n = 1
    total = ctx.zero()
    power = ctx.one()
    while True:
        power = power * z
        total = total + (power / n if n % 2 else -power / n)
        n += 1
        if n * v - math.log(n, p) >= target:
            break
    return total


def arcsin_p(y: ExtScalar) -> ExtScalar:
    """arcsin(y) = sum_n binom(2n, n) / (4^n (2n+1)) y^(2n+1), for |y| <= 1/p."""
    _require_small(y, "arcsin")
    ctx, p = y.ctx, y.p
    if y.valuation is None:
        return y
    v = y.valuation
    target = y.absprec + 2
    y2 = y * y
    total = y
    power = y
    coeff = Fraction(1)
    n = 0
    while True:
        n += 1
        power = power * y2
        coeff = coeff * Fraction((2 * n - 1) * 2 * n, 4 * n * n)
        total = total + power * ctx.elem(coeff / (2 * n + 1))
        if (2 * n + 3) * v - math.log(2 * n + 3, p) >= target:
            break
    return total


# --------------------------------------------------------------------------
# polar decomposition of units
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class UnitDecomposition:
    """a = r * zeta * exp(i * w_p * theta)."""

    r: PadicScalar
    zeta: ExtScalar
    theta: PadicScalar

    def recompose(self) -> ExtScalar:
        ctx = self.zeta.ctx
        rot = exp_p(ctx.lam * ExtScalar.from_padic(ctx, self.theta))
        return ExtScalar.from_padic(ctx, self.r) * self.zeta * rot


def polar_decompose(a: ExtScalar) -> UnitDecomposition:
    if a.valuation != 0:
        raise NotAUnit("polar decomposition needs a unit")
    ctx = a.ctx
    zeta = teichmuller(a)
    s = a / zeta
    r = sqrt_padic(s.norm())
    rot = s / ExtScalar.from_padic(ctx, r)
    theta_k = log_p(rot) / ctx.lam
    theta_b = theta_k.b
    if theta_k.valuation is not None and not theta_b.is_zero():
        # theta must lie in Q_p; a surviving w-part means precision ran out
        if theta_b.valuation < theta_k.valuation + ctx.precision - 4:
            raise PrecisionExhausted("angle has a non-real component")
    return UnitDecomposition(r=r, zeta=zeta, theta=theta_k.a)


@dataclass(frozen=True)
class DensityWitness:
    dense: bool
    zeta_order: int
    theta_valuation: object
    generator_ok: bool
    rotation_ok: bool


def density_check(a: ExtScalar) -> DensityWitness:
    """Whether <a> projects densely onto mu_{p^2-1} x S^1_p."""
    dec = polar_decompose(a)
    ctx = a.ctx
    zx, zy = dec.zeta.residue()
    order = residue_order(zx, zy, ctx.c, ctx.p)
    tv = dec.theta.valuation
    gen_ok = order == ctx.q - 1
    rot_ok = tv == 1
    return DensityWitness(
        dense=gen_ok and rot_ok,
        zeta_order=order,
        theta_valuation=tv,
        generator_ok=gen_ok,
        rotation_ok=rot_ok,
    )
