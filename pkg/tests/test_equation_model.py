import math

import numpy as np
import pytest
import sympy

from nlgauge import expr as ex
from nlgauge.equation_model import (AB_SCALARS, ABCoefficients, CompiledRHS, NuMuCoefficients,
                                    PhysicalParams, ab_from_numu, doebner_goldin_numu,
                                    functionals_R, functionals_R_expr, linear_schroedinger_ab,
                                    numu_from_ab, rhs)
from nlgauge.errors import ValidationError, WindingError
from nlgauge.gauge_transform import sample_points
from nlgauge.grid import Grid, STField, WaveFunction
from nlgauge.solver import evolve

from helpers import nodeless_psi, random_ab, random_periodic_expr, random_smooth_expr


def vals(c, t=0.0):
    return c.values_at(t)


def test_conversion_single_slot():
    ab = ab_from_numu(NuMuCoefficients.build(mu1=0.3))
    v = vals(ab)
    assert v["a1"] == -0.3 and v["a4"] == -0.6
    assert all(v[n] == 0 for n in AB_SCALARS if n not in ("a1", "a4"))


def test_conversion_zero():
    ab = ab_from_numu(NuMuCoefficients.build())
    assert all(e.is_number(0.0) for e in ab.slots().values() if not isinstance(e, tuple))


def test_doebner_goldin_conversion():
    ab = ab_from_numu(doebner_goldin_numu(PhysicalParams(D=0.1)))
    v = vals(ab)
    expect = {"a2": 0.5, "b2": 0.1, "a3": -0.5, "a5": 0.5, "b5": 0.2, "b4": -1.0, "b1": -0.5}
    for n, x in expect.items():
        assert v[n] == pytest.approx(x, abs=1e-15), n


def test_inverse_table_examples():
    assert numu_from_ab(ABCoefficients.build(b1=-0.5)).nu1(t=0) == -0.5
    nm = numu_from_ab(ABCoefficients.build(v2=["0.8"]))
    assert nm.Acal[0](x=1.0) == pytest.approx(0.4)
    assert nm.Tcal.is_number(0.0)


def test_linear_constructor():
    v = vals(linear_schroedinger_ab(PhysicalParams()))
    expect = {n: 0.0 for n in AB_SCALARS}
    expect.update(a2=0.5, a3=-0.5, a5=0.5, b1=-0.5, b4=-1.0)
    assert v == expect
    assert v["a1"] * v["b2"] - v["a2"] * v["b1"] == 0.25


def test_linear_constructor_with_fields():
    ab = linear_schroedinger_ab(PhysicalParams(V="x^2/2"))
    assert ab.u0(x=2.0) == -2.0
    p = PhysicalParams(e=2.0, m=0.5, c=3.0, hbar=1.0, Avec=("sin(x)",), Phi="x")
    ab = linear_schroedinger_ab(p)
    x = 0.7
    A = math.sin(x)
    assert ab.u0(x=x) == pytest.approx(-2 * x - 4 / (2 * 0.5 * 9) * A * A)
    assert ab.u1[0](x=x) == pytest.approx(2 / 1.5 * A)
    assert ab.v0(x=x) == pytest.approx(2 / 3 * math.cos(x))


def test_dg_constructor_examples():
    nm = doebner_goldin_numu(PhysicalParams())
    v = vals(nm)
    assert (v["nu1"], v["mu2"], v["mu3"], v["mu5"]) == (-0.5, -0.25, 0.5, 0.125)
    assert doebner_goldin_numu(PhysicalParams(D=0.1)).nu2(t=0) == 0.05
    assert vals(ab_from_numu(nm)) == vals(linear_schroedinger_ab(PhysicalParams()))


def test_dg_dprime_terms():
    p = PhysicalParams(D=0.2, Dprime=0.3, cvals=(1, 2, 3, 4, 5))
    v = vals(doebner_goldin_numu(p))
    assert v["mu1"] == pytest.approx(0.3) and v["mu4"] == pytest.approx(1.2)
    assert v["mu2"] == pytest.approx(-0.25 + 0.6) and v["mu5"] == pytest.approx(0.125 + 1.5)


def test_round_trip_random_sets():
    rng = np.random.default_rng(7)
    for dim in (1, 2, 3):
        for _ in range(10):
            ab = random_ab(rng, dim=dim)
            back = ab_from_numu(numu_from_ab(ab))
            pts = sample_points(rng, 20, dim)
            s1, s2 = ab.sample(pts), back.sample(pts)
            for n in s1:
                assert np.max(np.abs(s1[n] - s2[n])) <= 1e-14 * max(1.0, np.max(np.abs(s1[n]))), n
            nm = numu_from_ab(ab)
            n1, n2 = nm.sample(pts), numu_from_ab(ab_from_numu(nm)).sample(pts)
            for n in n1:
                assert np.max(np.abs(n1[n] - n2[n])) <= 1e-14 * max(1.0, np.max(np.abs(n1[n]))), n


def test_json_round_trip():
    ab = random_ab(np.random.default_rng(1), dim=2)
    again = ABCoefficients.from_json(ab.to_json())
    assert again.to_json() == ab.to_json() and again.dim == 2


def test_slot_validation():
    with pytest.raises(ValidationError):
        ABCoefficients.build(a1="x")
    with pytest.raises(ValidationError):
        ABCoefficients.build(u0="y")
    with pytest.raises(ValidationError):
        ABCoefficients.build(zz=1)
    with pytest.raises(ValidationError):
        ABCoefficients.build(dim=4)


def test_family_violations():
    assert NuMuCoefficients.build().in_real_family()
    assert NuMuCoefficients.build(nu3=1, Dcal=["x"]).family_violations() == ["nu3", "Dcal"]


# -- homogeneous functionals --------------------------------------------------

def test_R_plane_wave():
    g = Grid(40, 64)
    k = 2 * math.pi * 3 / 40
    R = functionals_R(STField(g, np.zeros(64), np.zeros(64), k))
    for j in (0, 1, 3, 4):
        assert np.max(np.abs(R[j])) < 1e-14
    assert np.allclose(R[2], k * k, atol=1e-14)


def test_R_analytic_gaussian():
    R2 = functionals_R_expr("0", "-x^2/4")[1]
    for x in (0.0, 0.5, 2.0):
        assert R2(x=x) == pytest.approx(-1 + x * x, abs=1e-15)


@pytest.mark.parametrize("dim", [1, 3])
def test_laplacian_expansion_identity(dim):
    rng = np.random.default_rng(dim)
    space = ("x", "y", "z")[:dim]
    sym = [sympy.Symbol(v) for v in ("x", "y", "z", "t")]
    for _ in range(5):
        S = random_smooth_expr(rng, 2, space)
        T = random_smooth_expr(rng, 2, space)
        R1, R2, R3, R4, R5 = functionals_R_expr(S, T, dim)
        # independent oracle: sympy on psi = exp(T + i S)
        sS, sT = (sympy.sympify(v.replace("^", "**"), locals={"ln": sympy.log}) for v in (S, T))
        psi = sympy.exp(sT + sympy.I * sS)
        lap = sum(sympy.diff(psi, sympy.Symbol(v), 2) for v in space) / psi
        f = sympy.lambdify(sym, lap, "numpy")
        for _ in range(4):
            p = dict(zip(("x", "y", "z", "t"), rng.uniform(-1, 1, size=4)))
            lhs = complex(f(*p.values()))
            ours = 1j * R1(**p) + 0.5 * R2(**p) - R3(**p) - 0.25 * R5(**p)
            assert abs(lhs - ours) <= 1e-10 * max(1.0, abs(lhs))


def test_R_grid_matches_analytic():
    g = Grid(40, 256)
    S = "0.1*x + 0.3*sin(2*pi*x/40)"
    T = "0.2*cos(4*pi*x/40)"
    Rg = functionals_R(STField.from_expressions(g, S, T))
    for a, e in zip(Rg, functionals_R_expr(S, T)):
        assert np.max(np.abs(a - e(x=g.x))) < 1e-12


# -- right-hand side ----------------------------------------------------------

def test_rhs_plane_wave_dispersion():
    g = Grid(40, 64)
    k = 2 * math.pi * 4 / 40
    dS, dT, dk = rhs(linear_schroedinger_ab(PhysicalParams()), STField(g, np.zeros(64), np.zeros(64), k))
    assert np.allclose(dS, -k * k / 2, atol=1e-14) and np.max(np.abs(dT)) < 1e-14 and dk == 0


def test_rhs_pure_drive():
    g = Grid(40, 64)
    f = STField.from_expressions(g, "sin(2*pi*x/40)", "0.1*cos(2*pi*x/40)")
    dS, dT, _ = rhs(ABCoefficients.build(u0=1), f)
    assert np.all(dS == 1.0) and np.all(dT == 0.0)


def test_rhs_heat_embedding():
    g = Grid(40, 128)
    f = STField.from_expressions(g, "0", "0.4*cos(2*pi*x/40)")
    dS, dT, _ = rhs(ABCoefficients.build(b2=0.7), f)
    assert np.max(np.abs(dS)) == 0.0
    assert np.max(np.abs(dT - 0.7 * g.deriv(f.T, 2))) < 1e-15


def test_rhs_full_formula():
    rng = np.random.default_rng(2)
    g = Grid(40, 128)
    kw = {n: float(rng.uniform(-1, 1)) for n in AB_SCALARS}
    kw.update(b6=0.0)
    per = [random_periodic_expr(rng) for _ in range(6)]
    ab = ABCoefficients.build(u0=per[0], v0=per[1], u1=[per[2]], u2=[per[3]], v1=[per[4]], v2=[per[5]], **kw)
    S = f"0.15707963267948966*x + {random_periodic_expr(rng)}"
    T = random_periodic_expr(rng)
    f = STField.from_expressions(g, S, T)
    dS, dT, dk = rhs(ab, f, 0.3)
    x = g.x
    Se, Te = ex.parse(S), ex.parse(T)
    Sx, Tx = Se.diff("x")(x=x), Te.diff("x")(x=x)
    Sxx, Txx = Se.diff("x").diff("x")(x=x), Te.diff("x").diff("x")(x=x)
    Sv, Tv = f.S, f.T
    fl = [ex.parse(p)(x=x) for p in per]
    k = kw
    full_S = (k["a1"] * Sxx + k["a2"] * Txx + k["a3"] * Sx ** 2 + k["a4"] * Sx * Tx + k["a5"] * Tx ** 2
              + k["a6"] * Sv + k["a7"] * Tv + fl[0] + fl[2] * Sx + fl[3] * Tx)
    full_T = (k["b1"] * Sxx + k["b2"] * Txx + k["b3"] * Sx ** 2 + k["b4"] * Sx * Tx + k["b5"] * Tx ** 2
              + k["b7"] * Tv + fl[1] + fl[4] * Sx + fl[5] * Tx)
    assert np.max(np.abs(dk * x + dS - full_S)) < 1e-11
    assert np.max(np.abs(dT - full_T)) < 1e-11
    assert dk == pytest.approx(kw["a6"] * f.k)


def test_rhs_homogeneity():
    rng = np.random.default_rng(4)
    g = Grid(40, 128)
    ab = ABCoefficients.build(**{n: float(rng.uniform(-1, 1)) for n in AB_SCALARS
                                 if n not in ("a6", "a7", "b6", "b7")})
    f = STField.from_expressions(g, random_periodic_expr(rng), random_periodic_expr(rng))
    base = rhs(ab, f)
    shifted = rhs(ab, f.with_arrays(s=f.s + 1.3, T=f.T - 0.7))
    # equal up to the FFT roundoff of the constant shift
    assert np.max(np.abs(base[0] - shifted[0])) < 1e-13
    assert np.max(np.abs(base[1] - shifted[1])) < 1e-13


def test_rhs_winding_errors():
    g = Grid(40, 64)
    wound = STField(g, np.zeros(64), np.zeros(64), 2 * math.pi / 40)
    with pytest.raises(WindingError):
        rhs(ABCoefficients.build(b6=1.0), wound)
    with pytest.raises(WindingError):
        rhs(ABCoefficients.build(v0="x"), wound)
    _, _, dk = rhs(ABCoefficients.build(u0="0.5*x"), wound)
    assert dk == pytest.approx(0.5)
    with pytest.raises(ValidationError):
        CompiledRHS(ABCoefficients.build(dim=2), g)


def _complex_rk4(psi, g, dt):
    def F(p):
        return 0.5j * g.deriv(p.real, 2) - 0.5 * g.deriv(p.imag, 2)
    k1 = F(psi)
    k2 = F(psi + dt / 2 * k1)
    k3 = F(psi + dt / 2 * k2)
    k4 = F(psi + dt * k3)
    return psi + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def test_one_step_matches_complex_form_to_fifth_order():
    g = Grid(40, 128)
    psi0 = nodeless_psi(g, np.random.default_rng(9), modes=4)
    f0 = WaveFunction(g, psi0).to_st()
    ab = linear_schroedinger_ab(PhysicalParams())
    errs = []
    # dt * kmax^2 / 2 = 2 is inside the RK4 stability region (|z| < 2.8) although
    # above the conservative step bound
    for dt in (0.04, 0.02):
        a = evolve(ab, f0, 0.0, dt, dt, check_cfl=False).final.to_wavefunction().psi
        b = _complex_rk4(psi0, g, dt)
        errs.append(np.max(np.abs(a - b)))
    assert errs[0] / errs[1] > 24  # ideal 32 for O(dt^5)
