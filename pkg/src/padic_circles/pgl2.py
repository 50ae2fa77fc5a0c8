"""PGL_2(K) and PGL_2(Q_p): canonical representatives, Mobius action, frames,
and classification of hyperbolic elements."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import DegenerateFrame, PrecisionExhausted, SingularMatrix
from .padic import ExtContext, ExtScalar, format_ext, sqrt_hensel, vp_pair


class ProjMatrix:
    """A projective class in PGL_2(K) stored by its unique G1 or G2 representative.

    G1: lower-right entry 1.  G2: upper-right entry 1 and lower-right entry 0.
    """

    __slots__ = ("m11", "m12", "m21", "m22", "canonical_class", "_int_model")

    def __init__(self, m11, m12, m21, m22, canonical_class):
        self.m11, self.m12, self.m21, self.m22 = m11, m12, m21, m22
        self.canonical_class = canonical_class
        self._int_model = None

    @property
    def ctx(self) -> ExtContext:
        return self.m11.ctx

    @property
    def entries(self):
        return (self.m11, self.m12, self.m21, self.m22)

    def det(self) -> ExtScalar:
        return self.m11 * self.m22 - self.m12 * self.m21

    def trace(self) -> ExtScalar:
        return self.m11 + self.m22

    def __matmul__(self, other: "ProjMatrix") -> "ProjMatrix":
        a, b, c, d = self.entries
        e, f, g, h = other.entries
        return canonicalize([[a * e + b * g, a * f + b * h], [c * e + d * g, c * f + d * h]])

    def inverse(self) -> "ProjMatrix":
        a, b, c, d = self.entries
        return canonicalize([[d, -b], [-c, a]])

    def __pow__(self, n: int) -> "ProjMatrix":
        if n < 0:
            return self.inverse() ** (-n)
        out = identity(self.ctx)
        base = self
        while n:
            if n & 1:
                out = out @ base
            base = base @ base
            n >>= 1
        return out

    def is_identity(self) -> bool:
        return distance(self, identity(self.ctx)) == 0

    def in_H(self) -> bool:
        """True when the class has a representative with entries in Q_p."""
        for e in self.entries:
            if not e.is_zero() and not e.b.is_zero():
                return False
        return True

    def int_model(self):
        """Integral representative known modulo p**P (a bttree.IntMat), used by
        the fast vertex action."""
        if self._int_model is None:
            from .bttree import IntMat

            P, entries, vdet = _build_int_model(self)
            self._int_model = IntMat(self.ctx.p, self.ctx.c, P, entries, vdet)
        return self._int_model

    def __eq__(self, other):
        if not isinstance(other, ProjMatrix):
            return NotImplemented
        return self.canonical_class == other.canonical_class and distance(self, other) == 0

    __hash__ = None

    def __repr__(self):
        rows = [[format_ext(e, 4) for e in self.entries[:2]], [format_ext(e, 4) for e in self.entries[2:]]]
        return f"ProjMatrix({self.canonical_class}, {rows})"


def _build_int_model(g: ProjMatrix):
    ctx = g.ctx
    p, N = ctx.p, ctx.precision
    vals = [e.valuation for e in g.entries if e.valuation is not None]
    vmin = min(vals)
    P = N
    for e in g.entries:
        if e.absprec is not None:
            P = min(P, e.absprec - vmin)
    pairs = []
    for e in g.entries:
        if e.valuation is None:
            pairs.append((0, 0))
            continue
        s = p ** (e.valuation - vmin)
        mod = p**P
        pairs.append((e.ux * s % mod, e.uy * s % mod))
    (a, b, c, d) = pairs
    mod = p**P
    dx = (a[0] * d[0] + ctx.c * a[1] * d[1] - b[0] * c[0] - ctx.c * b[1] * c[1]) % mod
    dy = (a[0] * d[1] + a[1] * d[0] - b[0] * c[1] - b[1] * c[0]) % mod
    if dx == 0 and dy == 0:
        raise SingularMatrix("determinant vanishes at working precision")
    return P, tuple(pairs), vp_pair(dx, dy, p)


def canonicalize(raw) -> ProjMatrix:
    """Scale a 2x2 matrix over K into G1 (if m22 != 0) or G2."""
    (a, b), (c, d) = raw
    ctx = next(e.ctx for e in (a, b, c, d) if isinstance(e, ExtScalar))
    a, b, c, d = (x if isinstance(x, ExtScalar) else ctx.elem(x) for x in (a, b, c, d))
    det = a * d - b * c
    if det.is_zero():
        raise SingularMatrix("singular matrix")
    if not d.is_zero():
        inv = d.inverse()
        return ProjMatrix(a * inv, b * inv, c * inv, ctx.one(), "G1")
    if b.is_zero():
        raise SingularMatrix("singular matrix")  # pragma: no cover - det check catches it
    inv = b.inverse()
    return ProjMatrix(a * inv, ctx.one(), c * inv, ctx.zero(), "G2")


def identity(ctx: ExtContext) -> ProjMatrix:
    return canonicalize([[ctx.one(), ctx.zero()], [ctx.zero(), ctx.one()]])


def diag(a, b=1, ctx: ExtContext | None = None) -> ProjMatrix:
    ctx = ctx or a.ctx
    a = a if isinstance(a, ExtScalar) else ctx.elem(a)
    b = b if isinstance(b, ExtScalar) else ctx.elem(b)
    return canonicalize([[a, ctx.zero()], [ctx.zero(), b]])


def unipotent(t, ctx: ExtContext | None = None) -> ProjMatrix:
    """u_t = [[1, t], [0, 1]]."""
    ctx = ctx or t.ctx
    t = t if isinstance(t, ExtScalar) else ctx.elem(t)
    return canonicalize([[ctx.one(), t], [ctx.zero(), ctx.one()]])


def matrix(ctx: ExtContext, rows) -> ProjMatrix:
    return canonicalize([[_s(ctx, x) for x in row] for row in rows])


def _s(ctx, x):
    return x if isinstance(x, ExtScalar) else ctx.elem(Fraction(x))


def distance(g: ProjMatrix, h: ProjMatrix) -> Fraction:
    """Entry-wise max-norm of the difference of the canonical representatives.

    Across G1 and G2 this compares the two stored lifts as written, an artifact
    convention.
    """
    return max((x - y).norm_abs() for x, y in zip(g.entries, h.entries))


def norm_e(g: ProjMatrix) -> Fraction:
    return distance(g, identity(g.ctx))


# --------------------------------------------------------------------------
# boundary points and frames
# --------------------------------------------------------------------------


class BoundaryPoint:
    """A point of P^1(K): either a finite value or infinity."""

    __slots__ = ("value",)

    def __init__(self, value: ExtScalar | None):
        self.value = value

    @classmethod
    def finite(cls, value: ExtScalar) -> "BoundaryPoint":
        return cls(value)

    @classmethod
    def infinity(cls) -> "BoundaryPoint":
        return cls(None)

    @property
    def is_infinity(self) -> bool:
        return self.value is None

    def homogeneous(self, ctx: ExtContext):
        if self.value is None:
            return ctx.one(), ctx.zero()
        return self.value, ctx.one()

    def same(self, other: "BoundaryPoint", depth: int) -> bool:
        """Equality at truncation depth: chordal distance below p**-depth.

        One-sided: True only means the two points cannot be told apart with
        ``depth`` digits.
        """
        from .bttree import chordal_distance

        d = chordal_distance(self, other)
        if d == 0:
            return True
        p = (self.value or other.value).p
        return d < Fraction(1, p**depth)

    def __eq__(self, other):
        if not isinstance(other, BoundaryPoint):
            return NotImplemented
        if self.value is None or other.value is None:
            return self.value is None and other.value is None
        return self.value == other.value

    __hash__ = None

    def __repr__(self):
        return "inf" if self.value is None else format_ext(self.value, 6)


@dataclass(frozen=True)
class Frame:
    x: BoundaryPoint
    y: BoundaryPoint
    z: BoundaryPoint

    def __post_init__(self):
        pts = (self.x, self.y, self.z)
        for i in range(3):
            for j in range(i + 1, 3):
                if pts[i] == pts[j]:
                    raise DegenerateFrame("frame points must be mutually distinct")


def mobius(g: ProjMatrix, x: BoundaryPoint) -> BoundaryPoint:
    a, b, c, d = g.entries
    if x.is_infinity:
        if c.is_zero():
            return BoundaryPoint.infinity()
        return BoundaryPoint.finite(a / c)
    num = a * x.value + b
    den = c * x.value + d
    if den.is_zero():
        if num.is_zero():
            raise PrecisionExhausted("numerator and denominator both vanish")
        return BoundaryPoint.infinity()
    return BoundaryPoint.finite(num / den)


def _det2(u, v):
    return u[0] * v[1] - u[1] * v[0]


def frame_to_matrix(f: Frame) -> ProjMatrix:
    """The unique g with g.(0, inf, 1) = (x, y, z)."""
    ctx = next(pt.value.ctx for pt in (f.x, f.y, f.z) if not pt.is_infinity)
    X, Y, Z = (pt.homogeneous(ctx) for pt in (f.x, f.y, f.z))
    dxy = _det2(X, Y)
    if dxy.is_zero():
        raise DegenerateFrame("x and y coincide")
    lam = _det2(X, Z) / dxy
    mu = _det2(Z, Y) / dxy
    if lam.is_zero() or mu.is_zero():
        raise DegenerateFrame("z coincides with x or y")
    return canonicalize([[lam * Y[0], mu * X[0]], [lam * Y[1], mu * X[1]]])


def frame_of(g: ProjMatrix) -> Frame:
    ctx = g.ctx
    pts = [BoundaryPoint.finite(ctx.zero()), BoundaryPoint.infinity(), BoundaryPoint.finite(ctx.one())]
    return Frame(*(mobius(g, pt) for pt in pts))


# --------------------------------------------------------------------------
# hyperbolic classification
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class HyperbolicData:
    """g = conjugator * diag(p**-length * unit, 1) * conjugator**-1."""

    length: int
    unit: ExtScalar
    conjugator: ProjMatrix
    fixed_minus: BoundaryPoint
    fixed_plus: BoundaryPoint


class NonHyperbolic:
    """Tag for elliptic or parabolic classes."""

    def __repr__(self):
        return "NonHyperbolic"

    def __bool__(self):
        return False


NON_HYPERBOLIC = NonHyperbolic()


def _eigvec(g: ProjMatrix, lam: ExtScalar):
    a, b, c, d = g.entries
    u = (lam - d, c)
    w = (b, lam - a)

    def size(v):
        vals = [x.valuation for x in v if x.valuation is not None]
        return min(vals) if vals else None

    su, sw = size(u), size(w)
    if su is None and sw is None:
        raise PrecisionExhausted("eigenvector vanishes at working precision")
    if sw is None or (su is not None and su <= sw):
        return u
    return w


def _vec_point(v) -> BoundaryPoint:
    if v[1].is_zero():
        return BoundaryPoint.infinity()
    return BoundaryPoint.finite(v[0] / v[1])


def classify(g: ProjMatrix):
    """HyperbolicData for hyperbolic g, else NON_HYPERBOLIC.

    Hyperbolic iff 2*v(trace) < v(det); the translation length is
    v(det) - 2*v(trace).
    """
    ctx = g.ctx
    tr, det = g.trace(), g.det()
    if tr.is_zero():
        return NON_HYPERBOLIC
    vt, vd = tr.valuation, det.valuation
    if not 2 * vt < vd:
        return NON_HYPERBOLIC
    n = vd - 2 * vt
    s = sqrt_hensel(1 - 4 * det / (tr * tr))
    lam1 = tr * (1 + s) / 2  # |lam1| > |lam2|: attracting
    lam2 = det / lam1
    v_plus = _eigvec(g, lam1)
    v_minus = _eigvec(g, lam2)
    p_n = ctx.elem(ctx.p**n)
    unit = p_n * lam1 / lam2
    conj = canonicalize([[v_plus[0], v_minus[0]], [v_plus[1], v_minus[1]]])
    return HyperbolicData(
        length=n,
        unit=unit,
        conjugator=conj,
        fixed_minus=_vec_point(v_minus),
        fixed_plus=_vec_point(v_plus),
    )


def hyperbolic_from_data(conjugator: ProjMatrix, length: int, unit: ExtScalar) -> ProjMatrix:
    ctx = conjugator.ctx
    d = diag(unit / ctx.elem(ctx.p**length), 1, ctx)
    return conjugator @ d @ conjugator.inverse()
