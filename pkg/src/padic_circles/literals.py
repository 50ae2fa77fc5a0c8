"""Text syntax for scalars, boundary points and matrices used in configs and reports.

Scalars
    ``"v:d0d1d2"``   p**v * (d0 + d1*p + d2*p**2 + ...); digits may be
                     comma separated (``"v:d0,d1,d2"``) when p > 10.
    ``"a + w*b"``    arithmetic over integers, fractions, ``w`` (the square
                     root of c), ``i`` (a square root of -1), ``phi`` (the
                     canonical generator of mu_{p^2-1}), ``sqrt(.)`` and
                     ``teich(.)``; ``^`` and ``**`` are integer powers.
Boundary points
    a scalar literal, or ``"inf"``.
Matrices
    ``[[e11, e12], [e21, e22]]`` with scalar literals as entries.
"""
from __future__ import annotations

import ast
import re
from fractions import Fraction

from .errors import ConfigError
from .padic import ExtContext, ExtScalar, PadicScalar, format_ext, sqrt_hensel, teichmuller

_DIGIT_LITERAL = re.compile(r"(-?\d+):([0-9,]+)")


def _digit_literal(ctx: ExtContext, v: str, digits: str) -> ExtScalar:
    ds = [int(d) for d in digits.split(",")] if "," in digits else [int(d) for d in digits]
    if any(d >= ctx.p for d in ds):
        raise ConfigError(f"digit out of range for p={ctx.p}: {v}:{digits}")
    x = PadicScalar.from_digits(ctx.p, int(v), ds)
    if not x.is_zero():
        x = PadicScalar(ctx.p, x.valuation, x.unit, max(x.precision, ctx.precision))
    return ExtScalar.from_padic(ctx, x)


def parse_scalar(text, ctx: ExtContext) -> ExtScalar:
    if isinstance(text, ExtScalar):
        return text
    if isinstance(text, (int, Fraction)):
        return ctx.elem(text)
    if not isinstance(text, str):
        raise ConfigError(f"cannot read a scalar from {text!r}")
    bound = {}

    def repl(m):
        name = f"_lit{len(bound)}"
        bound[name] = _digit_literal(ctx, m.group(1), m.group(2))
        return name

    src = _DIGIT_LITERAL.sub(repl, text).replace("^", "**")
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"bad scalar literal {text!r}: {exc.msg}") from None
    return _eval(tree.body, ctx, bound, text)


def _eval(node, ctx, bound, text):
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return ctx.elem(node.value)
    if isinstance(node, ast.Name):
        if node.id in bound:
            return bound[node.id]
        if node.id == "w":
            return ctx.omega
        if node.id == "i":
            return ctx.i_value
        if node.id == "phi":
            return ctx.mu_generator
        raise ConfigError(f"unknown name {node.id!r} in {text!r}")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        val = _eval(node.operand, ctx, bound, text)
        return -val if isinstance(node.op, ast.USub) else val
    if isinstance(node, ast.BinOp):
        left = _eval(node.left, ctx, bound, text)
        if isinstance(node.op, ast.Pow):
            e = node.right
            sign = 1
            if isinstance(e, ast.UnaryOp) and isinstance(e.op, ast.USub):
                e, sign = e.operand, -1
            if not (isinstance(e, ast.Constant) and isinstance(e.value, int)):
                raise ConfigError(f"exponent must be an integer literal in {text!r}")
            return left ** (sign * e.value)
        right = _eval(node.right, ctx, bound, text)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        if isinstance(node.op, ast.Div):
            return left / right
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and len(node.args) == 1:
        arg = _eval(node.args[0], ctx, bound, text)
        if node.func.id == "sqrt":
            return sqrt_hensel(arg)
        if node.func.id == "teich":
            return teichmuller(arg)
    raise ConfigError(f"unsupported expression in scalar literal {text!r}")


def parse_boundary(text, ctx: ExtContext):
    from .pgl2 import BoundaryPoint

    if isinstance(text, BoundaryPoint):
        return text
    if isinstance(text, str) and text.strip().lower() in ("inf", "infinity", "oo"):
        return BoundaryPoint.infinity()
    return BoundaryPoint.finite(parse_scalar(text, ctx))


def parse_matrix(obj, ctx: ExtContext):
    from .pgl2 import canonicalize

    if isinstance(obj, str):
        try:
            obj = ast.literal_eval(re.sub(r"([^\[\],]+)", lambda m: repr(m.group(1).strip()), obj))
        except (ValueError, SyntaxError):
            raise ConfigError(f"bad matrix literal {obj!r}") from None
    try:
        (a, b), (c, d) = obj
    except (TypeError, ValueError):
        raise ConfigError(f"matrix must be [[a, b], [c, d]], got {obj!r}") from None
    return canonicalize([[parse_scalar(a, ctx), parse_scalar(b, ctx)],
                         [parse_scalar(c, ctx), parse_scalar(d, ctx)]])


def scalar_literal(x: ExtScalar) -> str:
    """Digit form 'v:...' of the a and w parts, suitable for parse_scalar.

    Trailing zero digits are dropped; parsing pads back to working precision.
    """
    if x.is_zero():
        return "0"
    parts = []
    for comp, tag in ((x.a, ""), (x.b, "w*")):
        if comp.is_zero():
            continue
        ds = list(comp.digits)
        while len(ds) > 1 and ds[-1] == 0:
            ds.pop()
        sep = "," if x.p > 10 else ""
        parts.append(f"{tag}{comp.valuation}:" + sep.join(str(d) for d in ds))
    return " + ".join(parts)


def short(x: ExtScalar) -> str:
    return format_ext(x, 6)
