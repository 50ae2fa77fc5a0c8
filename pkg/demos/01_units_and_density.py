from padic_circles.literals import parse_scalar
from padic_circles.padic import ExtContext, cos_p, density_check, exp_p, polar_decompose, sin_p, sqrt_hensel

# K = Q_3(w), w^2 = 2, 48 significant digits
ctx = ExtContext(3, 2, 48)

r = sqrt_hensel(ctx.elem(19))
print("sqrt(19) =", r)
print("mod 27:", r.ux % 27)

# cos^2 + sin^2 on a small element
x = ctx.elem(3 * 41, 9 * 7)
print("cos^2 + sin^2 - 1 =", cos_p(x) ** 2 + sin_p(x) ** 2 - 1)

# a unit splits as r * zeta * exp(i w_p theta)
a = parse_scalar("sqrt(1 + 2*3^2) + w*3", ctx)
d = polar_decompose(a)
print("r =", d.r, " zeta =", d.zeta, " v(theta) =", d.theta.valuation)

# the unit of the fourth Example generator generates a dense subgroup;
# pushing theta one level deeper does not
u4 = parse_scalar("phi*(sqrt(1 + 2*3^2) + w*3)", ctx)
print("u4 dense:", density_check(u4).dense)
slow = ctx.mu_generator * exp_p(ctx.lam * ctx.elem(9))
wit = density_check(slow)
print("zeta.exp(i w 9) dense:", wit.dense, " v(theta) =", wit.theta_valuation)
