"""Gauge-invariant parameters, fields and combinations."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .equation_model import (ABCoefficients, NuMuCoefficients, PhysicalParams, ab_from_numu,
                             numu_from_ab)
from .errors import DegenerateEquationError, ValidationError
from .expr import Expression, curl, divergence, dot, vadd, vscale
from .grid import STField


@dataclass(frozen=True)
class GaugeInvariants:
    tau: tuple = None
    beta1: float = None
    beta2: float = None
    I1: float = None
    I2: float = None
    d1: float = None
    d2: float = None

    @property
    def quantum_class(self) -> bool:
        return bool(self.I2 is not None and self.I2 > 0)

    def to_json(self) -> dict:
        return {
            "tau": None if self.tau is None else list(self.tau),
            "beta": None if self.beta1 is None else [self.beta1, self.beta2],
            "I1": self.I1, "I2": self.I2, "d1": self.d1, "d2": self.d2,
            "quantum_class": self.quantum_class,
        }


def _require_nu1(nm: NuMuCoefficients, t=None):
    if nm.nu1.is_number(0.0):
        raise DegenerateEquationError("nu1 = 0: tau_3..tau_5 and the betas are undefined")
    if t is not None and nm.nu1(t=t) == 0.0:
        raise DegenerateEquationError(f"nu1({t}) = 0: tau_3..tau_5 and the betas are undefined")


def tau_beta_exprs(nm: NuMuCoefficients):
    """(tau1..tau5, beta1, beta2) as expressions in t."""
    _require_nu1(nm)
    nu1, nu2 = nm.nu1, nm.nu2
    mu1, mu2, mu3, mu4, mu5 = nm.mu
    a1, a2 = nm.alpha1, nm.alpha2
    nu1d, nu2d = nu1.diff("t"), nu2.diff("t")
    taus = (nu2 - mu1 / 2,
            nu1 * mu2 - nu2 * mu1,
            mu3 / nu1,
            mu4 - mu1 * mu3 / nu1,
            nu1 * mu5 - nu2 * mu4 + nu2 * nu2 * mu3 / nu1)
    beta1 = nu1 * a1 - nu2 * a2 + nu2 * nu1d / nu1 - nu2d
    beta2 = a2 - nu1d / nu1
    return taus + (beta1, beta2)


def tau_beta(nm: NuMuCoefficients, t=0.0) -> GaugeInvariants:
    _require_nu1(nm, t)
    vals = [e(t=t) for e in tau_beta_exprs(nm)]
    return GaugeInvariants(tau=tuple(vals[:5]), beta1=vals[5], beta2=vals[6])


def full_group_invariants(ab: ABCoefficients, t=0.0):
    """(I1, I2, d1, d2) = (a1 + b2, a1 b2 - a2 b1, 2 a3 + b4, a4 + 2 b5)."""
    v = ab.values_at(t)
    return (v["a1"] + v["b2"],
            v["a1"] * v["b2"] - v["a2"] * v["b1"],
            2 * v["a3"] + v["b4"],
            v["a4"] + 2 * v["b5"])


def gauge_invariants(coeffs, t=0.0) -> tuple:
    """All invariants of a coefficient set; the tau/beta block is None when nu1 = 0.

    Returns ``(GaugeInvariants, note)`` where note explains an omitted block.
    """
    if isinstance(coeffs, NuMuCoefficients):
        nm = coeffs
        ab = ab_from_numu(nm)
    else:
        ab = coeffs
        nm = numu_from_ab(ab)
    I1, I2, d1, d2 = full_group_invariants(ab, t)
    note = None
    try:
        tb = tau_beta(nm, t)
        tau, b1, b2 = tb.tau, tb.beta1, tb.beta2
    except DegenerateEquationError as err:
        tau = b1 = b2 = None
        note = str(err)
    return GaugeInvariants(tau=tau, beta1=b1, beta2=b2, I1=I1, I2=I2, d1=d1, d2=d2), note


# -- invariant fields ---------------------------------------------------------

@dataclass(frozen=True)
class InvariantFields:
    Uhat: Expression
    A1gi: tuple
    A2gi: tuple      # None when mu3 == 0
    calE: tuple
    calB: tuple      # None in one dimension
    notes: tuple = ()


def uhat_expr(nm: NuMuCoefficients, drop=None) -> Expression:
    """Corrected invariant scalar potential; ``drop`` (0..4) ablates one of its terms."""
    tau1, _, tau3, tau4, _, _, _ = tau_beta_exprs(nm)
    A, A2 = nm.Acal, nm.A2
    terms = [-nm.nu1 * nm.U,
             -tau3 * dot(A, A),
             -(tau4 - 2 * tau1 * tau3) * divergence(A),
             dot(A, A2),
             -nm.nu2 * divergence(A2)]
    out = ex.ZERO
    for i, term in enumerate(terms):
        if i != drop:
            out = out + term
    return out


def invariant_potentials(nm: NuMuCoefficients) -> InvariantFields:
    _require_nu1(nm)
    tau = tau_beta_exprs(nm)
    beta2 = tau[6]
    nu1, nu2 = nm.nu1, nm.nu2
    Uhat = uhat_expr(nm)
    A1gi = vadd(vadd(vscale(nu1, nm.A1),
                     vscale(2 * nu2 * nm.mu3 / nu1 - nm.mu1 - nm.mu4, nm.Acal)),
                vscale(-nu2, nm.A2))
    notes = []
    if nm.mu3.is_number(0.0):
        A2gi = None
        notes.append("mu3 = 0: A2gi is undefined and omitted")
    else:
        A2gi = vadd(vscale(nu1 / (2 * nm.mu3), nm.A2), vscale(-1, nm.Acal))
    dim = nm.dim
    calE = tuple(-g - a.diff("t") - beta2 * a
                 for g, a in zip(ex.gradient(Uhat, dim), nm.Acal))
    calB = curl(nm.Acal) if dim >= 2 else None
    return InvariantFields(Uhat=Uhat, A1gi=A1gi, A2gi=A2gi, calE=calE, calB=calB,
                           notes=tuple(notes))


def velocity_curl(nm: NuMuCoefficients, S, T) -> tuple:
    """curl of V = J^gi / rho = -2 nu1 grad S - 4 nu2 grad T - 2 Acal, for analytic S, T."""
    dim = nm.dim
    S, T = ex.as_expr(S), ex.as_expr(T)
    V = vadd(vadd(vscale(-2 * nm.nu1, ex.gradient(S, dim)),
                  vscale(-4 * nm.nu2, ex.gradient(T, dim))), vscale(-2, nm.Acal))
    return curl(V)


def maxwell_residual(nm: NuMuCoefficients, p: PhysicalParams, points, ablate=False) -> float:
    """max |curl E + (1/c) dB/dt + (beta2/c) B| over sample points.

    E = -grad Phi - (1/c) dA/dt - (beta2/c) A and B = curl A with beta2 taken
    from ``nm``.  ``ablate=True`` drops the beta2 A term from E; the residual is
    then |(beta2/c) B|.
    """
    if p.dim != 3:
        raise ValidationError("the Maxwell check needs three-component potentials")
    beta2 = tau_beta_exprs(nm)[6]
    c = p.c
    A = p.Avec
    B = curl(A)
    E = tuple(-g - a.diff("t") / c - (0 if ablate else 1) * beta2 / c * a
              for g, a in zip(ex.gradient(p.Phi, 3), A))
    res = vadd(vadd(curl(E), vscale(1 / c, tuple(b.diff("t") for b in B))), vscale(beta2 / c, B))
    xs, ys, zs, ts = points
    vals = np.stack([r(x=xs, y=ys, z=zs, t=ts) for r in res])
    return float(np.max(np.linalg.norm(vals, axis=0)))


def magnetic_norm(nm: NuMuCoefficients, p: PhysicalParams, points) -> np.ndarray:
    """|(beta2/c) B| at the sample points (the expected ablation residual)."""
    beta2 = tau_beta_exprs(nm)[6]
    B = curl(p.Avec)
    xs, ys, zs, ts = points
    vals = np.stack([(beta2 / p.c * b)(x=xs, y=ys, z=zs, t=ts) for b in B])
    return np.linalg.norm(vals, axis=0)


# -- invariant combinations on a grid -------------------------------------------

def invariant_combination(ab: ABCoefficients, f: STField, t=0.0):
    """``(d1 S + d2 T, L1, L2)`` with L1 = a1 S + a2 T and L2 = b1 S + b2 T."""
    v = ab.values_at(t)
    S, T = f.S, f.T
    d1 = 2 * v["a3"] + v["b4"]
    d2 = v["a4"] + 2 * v["b5"]
    return (d1 * S + d2 * T, v["a1"] * S + v["a2"] * T, v["b1"] * S + v["b2"] * T)
