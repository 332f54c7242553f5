"""Shared generators and oracles for the test suite."""
import math

import numpy as np

from nlgauge import expr as ex
from nlgauge.equation_model import (AB_SCALARS, ABCoefficients, PhysicalParams,
                                    linear_schroedinger_ab, numu_from_ab)
from nlgauge.gauge_group import GaugeElement
from nlgauge.grid import Grid

# criterion number -> printed PASS/FAIL line, filled by test_acceptance
ACCEPTANCE_LINES = {}

DESK_GRID = Grid(40.0, 256)


def linear_pair(**kw):
    ab = linear_schroedinger_ab(PhysicalParams(**kw))
    return numu_from_ab(ab), ab


def random_smooth_expr(rng, depth=3, variables=("x", "y", "z", "t")) -> str:
    """A random expression that is smooth and finite on |x|, |y|, |z|, t <= 2."""
    if depth == 0:
        v = rng.choice(list(variables))
        c = round(float(rng.uniform(-1.5, 1.5)), 3)
        return rng.choice([v, f"{c}*{v}", f"({v} + {c})", f"{abs(c) + 0.5}"])
    a = random_smooth_expr(rng, depth - 1, variables)
    b = random_smooth_expr(rng, depth - 1, variables)
    k = int(rng.integers(0, 10))
    return [f"({a} + {b})", f"({a})*({b})", f"({a} - {b})",
            f"sin({a})", f"cos({b})", f"exp(0.3*sin({a}))", f"tanh({a})",
            f"({a})/(2 + cos({b}))", f"sqrt(1 + ({a})^2)", f"ln(2 + sin({b}))"][k]


def central_difference(e, var, point, h=1e-4):
    lo, hi = dict(point), dict(point)
    lo[var] -= h
    hi[var] += h
    return (e(**hi) - e(**lo)) / (2 * h)


def random_point(rng):
    return {v: float(rng.uniform(-1.5, 1.5)) for v in ("x", "y", "z")} | {"t": float(rng.uniform(0, 1))}


def random_full_element(rng, affine=True, time_dependent=True) -> GaugeElement:
    """Random full-group element with |det| bounded away from zero on [0, 1]."""
    while True:
        M = rng.uniform(-2, 2, size=(2, 2)).round(6)
        if abs(np.linalg.det(M)) > 0.5:
            break
    w = rng.uniform(-0.2, 0.2, size=4).round(6) if time_dependent else np.zeros(4)
    # small time dependence keeps det(M + w t) away from zero on [0, 1]
    ent = [ex.parse(f"{M.flat[i]} + {w[i]}*t") for i in range(4)]
    if affine:
        c = rng.uniform(-1, 1, size=4).round(6)
        theta = ex.parse(f"{c[0]}*sin(x + {c[1]}*t)")
        phi = ex.parse(f"{c[2]}*cos(x) + {c[3]}*t")
    else:
        theta = phi = ex.ZERO
    return GaugeElement(Lambda=ent[0], gamma=ent[1], lam=ent[2], kappa=ent[3],
                        theta=theta, phi=phi)


def nodeless_psi(grid: Grid, rng, modes=3, scale=0.15):
    """Smooth periodic complex wave function bounded away from zero."""
    x = grid.x
    amp = np.ones_like(x)
    ph = np.zeros_like(x)
    for n in range(1, modes + 1):
        kx = 2 * math.pi * n * x / grid.L
        a, b, c, d = rng.uniform(-scale, scale, size=4)
        amp += a * np.cos(kx) + b * np.sin(kx)
        ph += c * np.cos(kx) + d * np.sin(kx)
    return amp * np.exp(1j * ph)


def random_ab(rng, dim=1, depth=2, homogeneous=False) -> ABCoefficients:
    """Random coefficient set: scalars linear in t, fields random smooth expressions."""
    space = ("x", "y", "z")[:dim]
    kw = {}
    for n in AB_SCALARS:
        c0, c1 = rng.uniform(-1, 1, size=2).round(6)
        kw[n] = f"{c0} + {c1}*t"
    if homogeneous:
        kw.update(a6=0, a7=0, b6=0, b7=0)
    for n in ("u0", "v0"):
        kw[n] = random_smooth_expr(rng, depth, space + ("t",))
    for n in ("u1", "u2", "v1", "v2"):
        kw[n] = [random_smooth_expr(rng, depth, space + ("t",)) for _ in range(dim)]
    return ABCoefficients.build(dim=dim, **kw)


def random_periodic_expr(rng, L=40.0, modes=3, scale=0.3) -> str:
    """Smooth L-periodic expression in x (for grid fields)."""
    terms = []
    for n in range(1, modes + 1):
        a, b = rng.uniform(-scale, scale, size=2).round(6)
        terms.append(f"{a}*cos({2 * math.pi * n / L}*x) + {b}*sin({2 * math.pi * n / L}*x)")
    return " + ".join(terms)
