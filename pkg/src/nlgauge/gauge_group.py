"""Elements of the affine GL(2, R) gauge group acting on (S, T).

An element acts pointwise by

    S' = Lambda S + gamma T + theta
    T' = lambda S + kappa T + phi

with time-dependent matrix entries and space-time dependent affine part.
Composition uses the "right factor acts first" convention:
``compose(g1, g2)`` applies g2, then g1, so the matrix part is ``A1 A2`` and the
affine part is ``A1 h2 + h1``.  In components

    theta = Lambda1 theta2 + gamma1 phi2 + theta1
    phi   = lambda1 theta2 + kappa1 phi2 + phi1

which for lambda = 0, kappa = 1, phi = 0 is (Lambda1 Lambda2, gamma1 + Lambda1 gamma2,
theta1 + Lambda1 theta2).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .errors import SingularGaugeError, ValidationError, WindingError
from .expr import ONE, ZERO, Expression, as_expr
from .grid import STField

DELTA_THRESHOLD = 1e-12
SUBGROUP_TOL = 1e-12
SAMPLE_TIMES = np.linspace(0.0, 1.0, 16)


def _signal(value, name):
    e = as_expr(value)
    if e.depends_on(*ex.SPACE):
        raise ValidationError(f"gauge entry {name} must depend on t only, got {e}")
    return e


@dataclass(frozen=True)
class GaugeElement:
    Lambda: Expression = ONE
    gamma: Expression = ZERO
    lam: Expression = ZERO
    kappa: Expression = ONE
    theta: Expression = ZERO
    phi: Expression = ZERO

    def __post_init__(self):
        for n in ("Lambda", "gamma", "lam", "kappa"):
            object.__setattr__(self, n, _signal(getattr(self, n), n))
        for n in ("theta", "phi"):
            object.__setattr__(self, n, as_expr(getattr(self, n)))

    # -- constructors ------------------------------------------------------
    @classmethod
    def identity(cls) -> GaugeElement:
        return cls()

    @classmethod
    def subgroup(cls, Lambda=1, gamma=0, theta=0) -> GaugeElement:
        return cls(Lambda=Lambda, gamma=gamma, theta=theta)

    @classmethod
    def swap(cls) -> GaugeElement:
        """Exchange S and T."""
        return cls(Lambda=0, gamma=1, lam=1, kappa=0)

    @classmethod
    def from_json(cls, d: dict) -> GaugeElement:
        unknown = set(d) - {"Lambda", "gamma", "lambda", "kappa", "theta", "phi"}
        if unknown:
            raise ValidationError(f"unknown gauge key(s) {sorted(unknown)}")
        return cls(Lambda=d.get("Lambda", 1), gamma=d.get("gamma", 0), lam=d.get("lambda", 0),
                   kappa=d.get("kappa", 1), theta=d.get("theta", 0), phi=d.get("phi", 0))

    def to_json(self) -> dict:
        return {"Lambda": str(self.Lambda), "gamma": str(self.gamma), "lambda": str(self.lam),
                "kappa": str(self.kappa), "theta": str(self.theta), "phi": str(self.phi)}

    # -- matrix views ------------------------------------------------------
    @property
    def matrix_exprs(self):
        return ((self.Lambda, self.gamma), (self.lam, self.kappa))

    @property
    def affine_exprs(self):
        return (self.theta, self.phi)

    @property
    def delta(self) -> Expression:
        return self.kappa * self.Lambda - self.lam * self.gamma

    def matrix(self, t=0.0) -> np.ndarray:
        return np.array([[e(t=t) for e in row] for row in self.matrix_exprs])

    def matrix_dot(self, t=0.0) -> np.ndarray:
        return np.array([[e.diff("t")(t=t) for e in row] for row in self.matrix_exprs])

    def check_invertible(self, times=None):
        """Raise SingularGaugeError if |Delta| <= 1e-12 at any of the given times."""
        ts = SAMPLE_TIMES if times is None else np.atleast_1d(np.asarray(times, dtype=float))
        d = self.delta
        vals = np.atleast_1d(d(t=ts))
        bad = np.abs(vals) <= DELTA_THRESHOLD
        if np.any(bad):
            t_bad = float(ts[np.argmax(bad)])
            raise SingularGaugeError(
                f"gauge determinant Delta = {d} vanishes at t={t_bad:g} (|Delta| <= 1e-12)")

    @property
    def is_homogeneous(self) -> bool:
        return self.theta.is_number(0.0) and self.phi.is_number(0.0)

    def __repr__(self):
        j = self.to_json()
        return "GaugeElement(" + ", ".join(f"{k}={v}" for k, v in j.items()) + ")"


def compose(g1: GaugeElement, g2: GaugeElement) -> GaugeElement:
    """The element acting as g2 followed by g1."""
    (a, b), (c, d) = g1.matrix_exprs
    (p, q), (r, s) = g2.matrix_exprs
    return GaugeElement(
        Lambda=a * p + b * r, gamma=a * q + b * s,
        lam=c * p + d * r, kappa=c * q + d * s,
        theta=a * g2.theta + b * g2.phi + g1.theta,
        phi=c * g2.theta + d * g2.phi + g1.phi,
    )


def inverse(g: GaugeElement, times=None) -> GaugeElement:
    g.check_invertible(times)
    (a, b), (c, d) = g.matrix_exprs
    if g.lam.is_number(0.0) and g.kappa.is_number(1.0):
        # keep subgroup inverses in their simple form (1/Lambda, -gamma/Lambda, -theta/Lambda)
        return GaugeElement(Lambda=1 / a, gamma=-b / a, theta=-g.theta / a, phi=-g.phi)
    det = g.delta
    ia, ib, ic, id_ = d / det, -b / det, -c / det, a / det
    return GaugeElement(Lambda=ia, gamma=ib, lam=ic, kappa=id_,
                        theta=-(ia * g.theta + ib * g.phi), phi=-(ic * g.theta + id_ * g.phi))


def is_subgroup(g: GaugeElement, tol=SUBGROUP_TOL) -> bool:
    """lambda == 0, kappa == 1, phi == 0, symbolically or at 16 sample times.

    Sampled checks use absolute tolerance 1e-12 (so lambda = 1e-15 counts as 0).
    The affine part phi is sampled at x, y, z in [-1, 1] as well.
    """
    if g.lam.is_number(0.0) and g.kappa.is_number(1.0) and g.phi.is_number(0.0):
        return True
    ts = SAMPLE_TIMES
    if np.max(np.abs(g.lam(t=ts))) > tol or np.max(np.abs(g.kappa(t=ts) - 1.0)) > tol:
        return False
    if g.phi.is_number(0.0):
        return True
    pts = np.linspace(-1.0, 1.0, 16)
    vals = g.phi(x=pts, y=pts[::-1], z=pts, t=ts)
    return bool(np.max(np.abs(vals)) <= tol)


def apply_to_st(g: GaugeElement, f: STField, t=0.0) -> STField:
    """Pointwise affine action on a grid field at time t.

    The winding slope of S' is Lambda k plus the slope of theta; T' must not wind,
    so lambda(t) k and the slope of phi have to vanish.
    """
    g.check_invertible([t])
    grid = f.grid
    (L, G), (lam, kap) = g.matrix(t)
    if abs(lam * f.k) > DELTA_THRESHOLD:
        raise WindingError(
            f"T' = lambda S + ... would wind: lambda(t) * k_S = {lam * f.k:.3g}; "
            "a full-group transform of a wound phase requires lambda(t) k_S = 0")
    xs = grid.x
    th = g.theta(x=xs, t=t)
    ph = g.phi(x=xs, t=t)
    k_th = grid.endpoint_slope(g.theta, t)
    k_ph = grid.endpoint_slope(g.phi, t)
    if abs(k_ph) * grid.L > 1e-10 * max(1.0, float(np.max(np.abs(ph)))):
        raise WindingError(f"phi = {g.phi} is not periodic on the grid; T' would wind")
    s_new = L * f.s + G * f.T + (th - k_th * xs)
    T_new = lam * f.s + kap * f.T + ph
    return STField(grid, s_new, T_new, L * f.k + k_th)
