import math

import numpy as np
import pytest

from nlgauge import expr as ex
from nlgauge.equation_model import (NuMuCoefficients, PhysicalParams, ab_from_numu,
                                    doebner_goldin_numu, linear_schroedinger_ab, numu_from_ab)
from nlgauge.errors import DegenerateEquationError, ValidationError
from nlgauge.gauge_group import GaugeElement, apply_to_st
from nlgauge.gauge_transform import (random_family_numu, random_subgroup_element, sample_points,
                                     transform_ab, transform_numu_subgroup)
from nlgauge.grid import Grid, STField
from nlgauge.invariants import (full_group_invariants, gauge_invariants, invariant_combination,
                                invariant_potentials, magnetic_norm, maxwell_residual, tau_beta,
                                uhat_expr, velocity_curl)

from helpers import linear_pair, random_periodic_expr


def test_linear_tau_beta():
    nm, _ = linear_pair()
    tb = tau_beta(nm)
    assert tb.tau == (0.0, 0.125, -1.0, 0.0, -0.0625)
    assert tb.beta1 == 0.0 and tb.beta2 == 0.0
    nm2, _ = linear_pair(hbar=2.0, m=0.5)
    assert tau_beta(nm2).tau[1] == pytest.approx(4.0 / (8 * 0.25))


def test_dg_and_kostin_values():
    tb = tau_beta(doebner_goldin_numu(PhysicalParams(D=0.1)))
    assert tb.tau[0] == pytest.approx(0.05, abs=1e-15) and tb.tau[4] == pytest.approx(-0.065, abs=1e-15)
    nm, _ = linear_pair()
    assert tau_beta(nm.replace(alpha2=0.4)).beta2 == 0.4


def test_time_dependent_beta():
    nm = NuMuCoefficients.build(nu1="-0.5*exp(0.2*t)", nu2="0.1*t", alpha1=0.3, alpha2=0.1)
    t = 0.6
    n1, n2 = -0.5 * math.exp(0.12), 0.06
    n1d, n2d = 0.2 * n1, 0.1
    tb = tau_beta(nm, t)
    assert tb.beta2 == pytest.approx(0.1 - 0.2)
    assert tb.beta1 == pytest.approx(n1 * 0.3 - n2 * 0.1 + n2 * n1d / n1 - n2d)


def test_full_group_invariants():
    nm, ab = linear_pair()
    assert full_group_invariants(ab) == (0.0, 0.25, -2.0, 0.0)
    swapped = transform_ab(ab, GaugeElement.swap())
    assert full_group_invariants(swapped)[:2] == (0.0, 0.25)
    dg = doebner_goldin_numu(PhysicalParams(D=0.3, Dprime=0.2, cvals=(1, -1, 0.5, 2, 0)))
    inv, note = gauge_invariants(dg)
    assert note is None
    assert inv.I1 == pytest.approx(2 * inv.tau[0], abs=1e-15)
    assert inv.I2 == pytest.approx(2 * inv.tau[1], abs=1e-15)
    assert inv.quantum_class


def test_degenerate_equations():
    with pytest.raises(DegenerateEquationError):
        tau_beta(NuMuCoefficients.build(nu2=1))
    with pytest.raises(DegenerateEquationError):
        tau_beta(NuMuCoefficients.build(nu1="t"), 0.0)
    inv, note = gauge_invariants(numu_from_ab(ab_from_numu(NuMuCoefficients.build(nu2=0.5))))
    assert inv.tau is None and "nu1" in note and inv.I2 == 0.0 and not inv.quantum_class
    fields = invariant_potentials(NuMuCoefficients.build(nu1=-0.5))
    assert fields.A2gi is None and fields.notes


def test_uhat_linear():
    nm, _ = linear_pair(V="x^2/2", m=2.0)
    U = invariant_potentials(nm).Uhat
    for x in (0.0, 0.7, -1.3):
        assert U(x=x) == pytest.approx(x * x / 4 / 2, abs=1e-15)
    p = dict(e=1.5, c=2.0, m=0.8, V="cos(x)", Phi="x*t", Avec=("sin(x)*t",))
    nm, _ = linear_pair(**p)
    U = invariant_potentials(nm).Uhat
    for x, t in ((0.3, 0.2), (-1.1, 0.9)):
        assert U(x=x, t=t) == pytest.approx((math.cos(x) + 1.5 * x * t) / 1.6, abs=1e-14)


def test_calE_linear():
    p = dict(e=1.5, c=2.0, m=0.8, V="cos(x)", Phi="x*t", Avec=("sin(x)*t",))
    nm, _ = linear_pair(**p)
    E = invariant_potentials(nm).calE[0]
    for x, t in ((0.3, 0.2), (-1.1, 0.9)):
        Efield = -t - math.sin(x) / 2.0
        assert E(x=x, t=t) == pytest.approx(math.sin(x) / 1.6 + 1.5 / 1.6 * Efield, abs=1e-14)


def test_calB_symmetric_gauge():
    B0, e, m, c = 0.7, 2.0, 1.0, 1.0
    nm, _ = linear_pair(e=e, m=m, c=c, dim=3, Avec=(f"-y*{B0}/2", f"x*{B0}/2", "0"))
    B = invariant_potentials(nm).calB
    assert [b(x=0.2, y=-0.4) for b in B] == pytest.approx([0, 0, e / (2 * m * c) * B0])
    assert invariant_potentials(linear_pair()[0]).calB is None


def test_velocity_curl_relation():
    e, m, c = 1.3, 0.9, 2.0
    A = ("sin(y)*t", "x*z", "cos(x*y)")
    nm, _ = linear_pair(e=e, m=m, c=c, dim=3, Avec=A)
    curlV = velocity_curl(nm, "x*y*z + sin(t*x)", "0.2*cos(y) + z^2")
    B = ex.curl(tuple(ex.parse(a) for a in A))
    rng = np.random.default_rng(0)
    for _ in range(10):
        p = dict(zip(("x", "y", "z", "t"), rng.uniform(-1, 1, size=4)))
        for cv, b in zip(curlV, B):
            assert cv(**p) == pytest.approx(-(e / (m * c)) * b(**p), abs=1e-12)


def _uhat_law(nm, g, pts, drop=None):
    """max |Uhat' - Uhat - (nu1/L)(thdot + alpha2 th) + nu1 Ldot th / L^2|."""
    nmp = transform_numu_subgroup(nm, g)
    L, th = g.Lambda, g.theta
    expect = (nm.nu1 / L * th.diff("t") + nm.nu1 / L * nm.alpha2 * th
              - nm.nu1 * L.diff("t") / (L * L) * th)
    diff = uhat_expr(nmp, drop) - uhat_expr(nm, drop) - expect
    return float(np.max(np.abs(diff(*pts))))


def test_uhat_transformation_law():
    rng = np.random.default_rng(1)
    for _ in range(20):
        nm = random_family_numu(rng)
        g = random_subgroup_element(rng)
        assert _uhat_law(nm, g, sample_points(rng)) < 1e-10


@pytest.mark.parametrize("drop", range(5))
def test_uhat_ablation_breaks_invariance(drop):
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(5):
        nm = random_family_numu(rng)
        g = random_subgroup_element(rng)
        worst = max(worst, _uhat_law(nm, g, sample_points(rng), drop=drop))
    assert worst > 1e-3


def test_maxwell_identity():
    nm, _ = linear_pair()
    rng = np.random.default_rng(3)
    pts = sample_points(rng, 100, 3)
    static = PhysicalParams(dim=3, Avec=("y", "z^2", "x*y"), Phi="x*y*z")
    assert maxwell_residual(nm, static, pts) < 1e-12
    kostin = nm.replace(alpha2=0.4)
    p = PhysicalParams(dim=3, c=2.0, Avec=("sin(t)*cos(y)", "0", "0"), Phi="x^2*t")
    assert maxwell_residual(kostin, p, pts) < 1e-10
    ablated = maxwell_residual(kostin, p, pts, ablate=True)
    assert ablated > 0.01
    assert ablated == pytest.approx(float(np.max(magnetic_norm(kostin, p, pts))), abs=1e-10)
    with pytest.raises(ValidationError):
        maxwell_residual(nm, PhysicalParams(), pts)


def test_invariant_combination_examples():
    nm, ab = linear_pair()
    g = Grid(40, 64)
    k = 2 * math.pi / 40
    f = STField(g, np.zeros(64), np.zeros(64), k)
    comb, L1, L2 = invariant_combination(ab, f)
    assert np.allclose(comb, -2 * k * g.x, atol=1e-15)


def _random_problem(rng):
    ab = ab_from_numu(random_family_numu(rng))
    g = Grid(40, 64)
    f = STField.from_expressions(g, random_periodic_expr(rng), random_periodic_expr(rng))
    return ab, f


def test_combination_invariant_under_homogeneous_elements():
    rng = np.random.default_rng(4)
    for el in (GaugeElement.swap(), GaugeElement(Lambda=2, gamma=0.5, lam=-0.3, kappa=1.1),
               GaugeElement.subgroup("exp(0.3*t)", "0.2*t")):
        ab, f = _random_problem(rng)
        t = 0.4
        abp, fp = transform_ab(ab, el), apply_to_st(el, f, t)
        c, L1, L2 = invariant_combination(ab, f, t)
        cp, L1p, L2p = invariant_combination(abp, fp, t)
        assert np.max(np.abs(c - cp)) < 1e-10
        M = el.matrix(t)
        assert np.max(np.abs(L1p - (M[0, 0] * L1 + M[0, 1] * L2))) < 1e-10
        assert np.max(np.abs(L2p - (M[1, 0] * L1 + M[1, 1] * L2))) < 1e-10


def test_combination_not_invariant_with_affine_part():
    # documented behaviour: an affine shift theta moves d1 S + d2 T
    rng = np.random.default_rng(5)
    ab, f = _random_problem(rng)
    el = GaugeElement.subgroup(theta="0.5*sin(2*pi*x/40)")
    c, _, _ = invariant_combination(ab, f)
    cp, _, _ = invariant_combination(transform_ab(ab, el), apply_to_st(el, f))
    assert np.max(np.abs(c - cp)) > 1e-3
