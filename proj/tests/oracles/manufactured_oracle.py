"""Symbolic oracle for the manufactured problems.

Differentiates u symbolically and evaluates the derived driver and the
(y, z, ux, zgrad) bundle at a few points. The printed values are frozen
into tests/unit/test_model.cpp.
"""
import sympy as sp

t, x, y, z = sp.symbols("t x y z")
R = sp.Rational


def report(name, u, b, sigma, g, f_points, true_points):
    ut, ux, uxx = sp.diff(u, t), sp.diff(u, x), sp.diff(u, x, 2)
    gen = ut + b * ux + sigma**2 * uxx / 2
    f = -gen - g(u, ux * sigma) + g(y, z)
    zgrad = uxx * sigma + ux * sp.diff(sigma, x)
    for pt in f_points:
        subs = {t: pt[0], x: pt[1], y: pt[2], z: pt[3]}
        print(name, "f", pt, sp.N(f.subs(subs), 20))
    for pt in true_points:
        subs = {t: pt[0], x: pt[1]}
        print(name, "true", pt, [sp.N(e.subs(subs), 20) for e in (u, ux * sigma, ux, zgrad)])


g = lambda yy, zz: R(2, 5) * sp.sin(yy) + R(3, 10) * sp.cos(zz)

# Worked example: sigma = 0.3 + 0.1 sin x.
report("example", sp.sin(x + t) * sp.exp(-t), R(1, 5), R(3, 10) + sp.sin(x) / 10, g,
       [(0, 0, R(1, 2), R(1, 5)), (R(3, 10), R(7, 10), R(-2, 5), R(11, 10))],
       [(0, 0), (R(3, 10), R(7, 10))])

# Catalog "trig" with its default parameters.
eps, w, eta, c, d, s0 = R(7, 10), 2, R(1, 10), R(1, 5), R(1, 10), R(1, 5)
u = sp.exp(-d * t) * (x + eps / w * sp.sin(w * x) + eta * sp.sin(x + c * t))
report("trig", u, R(1, 20), s0 / (1 + eps * sp.cos(w * x)), g,
       [(R(3, 10), R(7, 10), R(-2, 5), R(11, 10))], [(R(1, 5), R(4, 5))])
