"""Coefficient sets of the nonlinear Schroedinger family and their (S, T) right-hand side.

Two parameterizations are carried:

* :class:`NuMuCoefficients` -- nu_1..nu_5, mu_1..mu_5, alpha_1,2, delta_1,2 and
  the fields U, Tcal, Acal, A1, A2, Dcal (the "physics" form, acting on psi);
* :class:`ABCoefficients` -- a_1..a_7, b_1..b_7 and u0, v0, u1, u2, v1, v2
  (the coupled PDE for S and T).

Scalar coefficients are expressions in t; fields are expressions in (x, y, z, t);
vector fields are tuples of expressions, one per spatial dimension.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr as ex
from . import kernels
from .errors import ValidationError, WindingError
from .expr import ZERO, Expression, as_expr, as_vector, divergence, dot, vscale
from .grid import Grid, STField

NU_MU_SCALARS = ("nu1", "nu2", "nu3", "nu4", "nu5", "mu1", "mu2", "mu3", "mu4", "mu5",
                 "alpha1", "alpha2", "delta1", "delta2")
NU_MU_FIELDS = ("U", "Tcal")
NU_MU_VECTORS = ("Acal", "A1", "A2", "Dcal")
AB_SCALARS = tuple(f"a{j}" for j in range(1, 8)) + tuple(f"b{j}" for j in range(1, 8))
AB_FIELDS = ("u0", "v0")
AB_VECTORS = ("u1", "u2", "v1", "v2")


def _signal(value, name):
    e = as_expr(value)
    if e.depends_on(*ex.SPACE):
        raise ValidationError(f"coefficient {name} must depend on t only, got {e}")
    return e


def _field(value, name, dim):
    e = as_expr(value)
    extra = e.free_vars - set(ex.coords(dim)) - {"t"}
    if extra:
        raise ValidationError(f"field {name} uses {sorted(extra)} beyond dimension {dim}")
    return e


def _vector(value, name, dim):
    if value is None:
        return ex.vzero(dim)
    try:
        vec = as_vector(value, dim)
    except ValueError as err:
        raise ValidationError(f"{name}: {err}") from None
    return tuple(_field(c, name, dim) for c in vec)


class _Slots:
    """Shared helpers for the two coefficient dataclasses."""

    _scalars: tuple = ()
    _fields: tuple = ()
    _vectors: tuple = ()

    @classmethod
    def build(cls, dim=1, **kw):
        """Construct from named slots (strings, numbers or expressions); missing slots are 0."""
        unknown = set(kw) - set(cls._scalars) - set(cls._fields) - set(cls._vectors)
        if unknown:
            raise ValidationError(f"unknown coefficient slot(s) {sorted(unknown)}")
        return cls(dim=dim, **{n: kw.get(n, 0) if n not in cls._vectors else kw.get(n)
                               for n in cls._scalars + cls._fields + cls._vectors})

    def __post_init__(self):
        dim = self.dim
        if dim not in (1, 2, 3):
            raise ValidationError("dimension must be 1, 2 or 3")
        for n in self._scalars:
            object.__setattr__(self, n, _signal(getattr(self, n), n))
        for n in self._fields:
            object.__setattr__(self, n, _field(getattr(self, n), n, dim))
        for n in self._vectors:
            object.__setattr__(self, n, _vector(getattr(self, n), n, dim))

    def slots(self) -> dict:
        return {n: getattr(self, n) for n in self._scalars + self._fields + self._vectors}

    def replace(self, **kw):
        d = self.slots()
        d.update(kw)
        return type(self)(dim=self.dim, **d)

    def to_json(self) -> dict:
        out = {}
        for n, v in self.slots().items():
            out[n] = [str(c) for c in v] if isinstance(v, tuple) else str(v)
        return out

    @classmethod
    def from_json(cls, d, dim=None):
        if dim is None:
            dims = {len(v) for k, v in d.items() if k in cls._vectors and isinstance(v, list)}
            if len(dims) > 1:
                raise ValidationError("vector fields have inconsistent dimensions")
            dim = dims.pop() if dims else 1
        return cls.build(dim=dim, **d)

    def values_at(self, t=0.0) -> dict:
        """Scalar coefficients evaluated at time t."""
        return {n: getattr(self, n)(t=t) for n in self._scalars}

    def sample(self, points) -> dict:
        """Every slot evaluated at ``points = (x, y, z, t)`` arrays; vectors stacked."""
        xs, ys, zs, ts = points
        out = {}
        for n, v in self.slots().items():
            if isinstance(v, tuple):
                out[n] = np.stack([c(x=xs, y=ys, z=zs, t=ts) for c in v])
            else:
                out[n] = v(x=xs, y=ys, z=zs, t=ts)
        return out


@dataclass(frozen=True)
class NuMuCoefficients(_Slots):
    nu1: Expression = ZERO
    nu2: Expression = ZERO
    nu3: Expression = ZERO
    nu4: Expression = ZERO
    nu5: Expression = ZERO
    mu1: Expression = ZERO
    mu2: Expression = ZERO
    mu3: Expression = ZERO
    mu4: Expression = ZERO
    mu5: Expression = ZERO
    alpha1: Expression = ZERO
    alpha2: Expression = ZERO
    delta1: Expression = ZERO
    delta2: Expression = ZERO
    U: Expression = ZERO
    Tcal: Expression = ZERO
    Acal: tuple = None
    A1: tuple = None
    A2: tuple = None
    Dcal: tuple = None
    dim: int = 1

    _scalars = NU_MU_SCALARS
    _fields = NU_MU_FIELDS
    _vectors = NU_MU_VECTORS

    @property
    def nu(self):
        return (self.nu1, self.nu2, self.nu3, self.nu4, self.nu5)

    @property
    def mu(self):
        return (self.mu1, self.mu2, self.mu3, self.mu4, self.mu5)

    def family_violations(self, samples=None) -> list:
        """Slots that must vanish for the real-coefficient (psi-continuity) family but do not."""
        bad = [n for n in ("nu3", "nu4", "nu5", "delta1", "delta2", "Tcal")
               if not is_zero(getattr(self, n), samples)]
        bad += [n for n in ("Dcal",) if not all(is_zero(c, samples) for c in getattr(self, n))]
        return bad

    def in_real_family(self) -> bool:
        return not self.family_violations()


@dataclass(frozen=True)
class ABCoefficients(_Slots):
    a1: Expression = ZERO
    a2: Expression = ZERO
    a3: Expression = ZERO
    a4: Expression = ZERO
    a5: Expression = ZERO
    a6: Expression = ZERO
    a7: Expression = ZERO
    b1: Expression = ZERO
    b2: Expression = ZERO
    b3: Expression = ZERO
    b4: Expression = ZERO
    b5: Expression = ZERO
    b6: Expression = ZERO
    b7: Expression = ZERO
    u0: Expression = ZERO
    v0: Expression = ZERO
    u1: tuple = None
    u2: tuple = None
    v1: tuple = None
    v2: tuple = None
    dim: int = 1

    _scalars = AB_SCALARS
    _fields = AB_FIELDS
    _vectors = AB_VECTORS

    @property
    def a(self):
        return tuple(getattr(self, f"a{j}") for j in range(1, 8))

    @property
    def b(self):
        return tuple(getattr(self, f"b{j}") for j in range(1, 8))

    def second_order_matrix(self, t=0.0) -> np.ndarray:
        return np.array([[self.a1(t=t), self.a2(t=t)], [self.b1(t=t), self.b2(t=t)]])


@dataclass(frozen=True)
class PhysicalParams:
    """Constants and potentials of the minimally coupled (possibly diffusively modified) equation."""

    hbar: float = 1.0
    m: float = 1.0
    e: float = 0.0
    c: float = 1.0
    D: float = 0.0
    Dprime: float = 0.0
    cvals: tuple = (0.0, 0.0, 0.0, 0.0, 0.0)
    V: Expression = ZERO
    Phi: Expression = ZERO
    Avec: tuple = None
    dim: int = 1

    def __post_init__(self):
        if not (self.hbar > 0 and self.m > 0):
            raise ValidationError("hbar and m must be positive")
        if len(self.cvals) != 5:
            raise ValidationError("cvals needs five entries")
        object.__setattr__(self, "cvals", tuple(float(c) for c in self.cvals))
        object.__setattr__(self, "V", _field(self.V, "V", self.dim))
        object.__setattr__(self, "Phi", _field(self.Phi, "Phi", self.dim))
        object.__setattr__(self, "Avec", _vector(self.Avec, "A", self.dim))


def is_zero(e: Expression, samples=None, tol=1e-12) -> bool:
    """True when ``e`` folds to 0, or (if given) vanishes at all sample points."""
    if e.is_number(0.0):
        return True
    if isinstance(e, ex.Num) or samples is None:
        return False
    vals = e(*samples)
    return bool(np.all(np.abs(vals) <= tol))


# -- conversions ------------------------------------------------------------

def ab_from_numu(nm: NuMuCoefficients) -> ABCoefficients:
    """Coupled-PDE coefficients of a nu/mu equation (term-by-term table)."""
    return ABCoefficients(
        a1=-nm.mu1, b1=nm.nu1,
        a2=-2 * nm.mu2, b2=2 * nm.nu2,
        a3=-nm.mu3, b3=nm.nu3,
        a4=-2 * nm.mu1 - 2 * nm.mu4, b4=2 * nm.nu1 + 2 * nm.nu4,
        a5=-4 * nm.mu2 - 4 * nm.mu5, b5=4 * nm.nu2 + 4 * nm.nu5,
        a6=-nm.alpha2, b6=nm.delta2,
        a7=-2 * nm.alpha1, b7=2 * nm.delta1,
        u0=-nm.U - divergence(nm.A1), v0=nm.Tcal + divergence(nm.Acal),
        u1=vscale(-1, nm.A2), v1=nm.Dcal,
        u2=vscale(-2, nm.A1), v2=vscale(2, nm.Acal),
        dim=nm.dim,
    )


def numu_from_ab(ab: ABCoefficients) -> NuMuCoefficients:
    """Inverse of :func:`ab_from_numu`; Acal and A1 are read off v2 and u2 first."""
    Acal = vscale(0.5, ab.v2)
    A1 = vscale(-0.5, ab.u2)
    nu1 = ab.b1
    nu2 = ab.b2 / 2
    mu1 = -ab.a1
    mu2 = -ab.a2 / 2
    return NuMuCoefficients(
        nu1=nu1, nu2=nu2, nu3=ab.b3, nu4=ab.b4 / 2 - nu1, nu5=ab.b5 / 4 - nu2,
        mu1=mu1, mu2=mu2, mu3=-ab.a3, mu4=-ab.a4 / 2 - mu1, mu5=-ab.a5 / 4 - mu2,
        alpha1=-ab.a7 / 2, alpha2=-ab.a6, delta1=ab.b7 / 2, delta2=ab.b6,
        U=-ab.u0 - divergence(A1), Tcal=ab.v0 - divergence(Acal),
        Acal=Acal, A1=A1, A2=vscale(-1, ab.u1), Dcal=ab.v1,
        dim=ab.dim,
    )


def linear_schroedinger_ab(p: PhysicalParams) -> ABCoefficients:
    """Coupled-PDE form of the minimally coupled linear Schroedinger equation."""
    hb, m, e, c = p.hbar, p.m, p.e, p.c
    A = p.Avec
    return ABCoefficients(
        a1=0, a2=hb / (2 * m), a3=-hb / (2 * m), a4=0, a5=hb / (2 * m), a6=0, a7=0,
        b1=-hb / (2 * m), b2=0, b3=0, b4=-hb / m, b5=0, b6=0, b7=0,
        u0=-(p.V + e * p.Phi) / hb - (e * e / (2 * m * hb * c * c)) * dot(A, A),
        u1=vscale(e / (m * c), A), u2=None,
        v0=(e / (2 * m * c)) * divergence(A), v1=None, v2=vscale(e / (m * c), A),
        dim=p.dim,
    )


def doebner_goldin_numu(p: PhysicalParams) -> NuMuCoefficients:
    """nu/mu coefficients of the nonlinear diffusive equation with coefficients D and D'."""
    hb, m, e, c, Dp = p.hbar, p.m, p.e, p.c, p.Dprime
    c1, c2, c3, c4, c5 = p.cvals
    A = p.Avec
    return NuMuCoefficients(
        nu1=-hb / (2 * m), nu2=p.D / 2,
        mu1=Dp * c1, mu2=-hb / (4 * m) + Dp * c2, mu3=hb / (2 * m) + Dp * c3,
        mu4=Dp * c4, mu5=hb / (8 * m) + Dp * c5,
        Acal=vscale(e / (2 * m * c), A), A1=None, A2=vscale(-e / (m * c), A),
        U=(p.V + e * p.Phi) / hb + (e * e / (2 * m * hb * c * c)) * dot(A, A),
        dim=p.dim,
    )


# -- homogeneous functionals --------------------------------------------------

def functionals_R(f: STField):
    """R_1..R_5 on the grid, spectral derivatives; the winding slope enters grad S."""
    gS = f.gradS()
    gT, lapT = f.grid.derivs(f.T)
    lapS = f.grid.deriv(f.s, 2)
    return (lapS + 2 * gS * gT, 2 * lapT + 4 * gT ** 2, gS ** 2, 2 * gS * gT, 4 * gT ** 2)


def functionals_R_expr(S, T, dim=1):
    """R_1..R_5 as expressions for analytic S and T."""
    S, T = as_expr(S), as_expr(T)
    gS, gT = ex.gradient(S, dim), ex.gradient(T, dim)
    return (ex.laplacian(S, dim) + 2 * dot(gS, gT),
            2 * ex.laplacian(T, dim) + 4 * dot(gT, gT),
            dot(gS, gS), 2 * dot(gS, gT), 4 * dot(gT, gT))


# -- right-hand side ----------------------------------------------------------

_SLOPE_RTOL = 1e-9


class _GridField:
    """A field slot sampled on a grid, cached when time independent."""

    def __init__(self, name, e, grid, allow_slope):
        self.name = name
        self.expr = e
        self.grid = grid
        self.allow_slope = allow_slope
        self.zero = e.is_number(0.0)
        self.static = not e.depends_on("t")
        self._cache = self._sample(0.0) if self.static else None

    def _sample(self, t):
        g = self.grid
        vals = self.expr(x=g.x, t=t)
        slope = g.endpoint_slope(self.expr, t)
        if abs(slope) * g.L > _SLOPE_RTOL * max(1.0, float(np.max(np.abs(vals)))):
            if not self.allow_slope:
                raise WindingError(
                    f"field {self.name} = {self.expr} is not periodic on the grid "
                    f"(net change {slope * g.L:.3g} per period)")
        else:
            slope = 0.0
        return vals - slope * g.x, slope

    def __call__(self, t):
        return self._cache if self.static else self._sample(t)


class CompiledRHS:
    """Right-hand side of the coupled (S, T) PDE bound to a grid.

    Evaluates ``S_t`` and ``T_t`` for ``S = k x + s``.  The linear-in-x part of
    ``S_t`` (from ``a6 k x`` and any linear part of ``u0``) is returned
    separately as the slope rate ``dk``; terms that would make T wind are
    rejected.
    """

    def __init__(self, ab: ABCoefficients, grid: Grid, backend=None):
        if ab.dim != 1:
            raise ValidationError("grid dynamics are one-dimensional; coefficients have dim "
                                  f"{ab.dim}")
        self.ab = ab
        self.grid = grid
        self.kernels = kernels.available_backends()[backend] if backend else kernels
        self._a = ab.a
        self._b = ab.b
        self.static_coeffs = not any(e.depends_on("t") for e in self._a + self._b)
        self._coeff_cache = self._coeffs(0.0) if self.static_coeffs else None
        self.u0 = _GridField("u0", ab.u0, grid, allow_slope=True)
        self.v0 = _GridField("v0", ab.v0, grid, allow_slope=False)
        self.vec = [_GridField(n, getattr(ab, n)[0], grid, allow_slope=False)
                    for n in ("u1", "u2", "v1", "v2")]

    def _coeffs(self, t):
        return (np.array([e(t=t) for e in self._a]), np.array([e(t=t) for e in self._b]))

    def coeffs(self, t):
        return self._coeff_cache if self.static_coeffs else self._coeffs(t)

    def __call__(self, s, T, k, t, outS, outT) -> float:
        a, b = self.coeffs(t)
        if abs(b[5] * k) > 1e-12:
            raise WindingError(f"b6 * k_S = {b[5] * k:.3g} != 0 would make T wind")
        u0, u0_slope = self.u0(t)
        v0, _ = self.v0(t)
        u1, u2, v1, v2 = (f(t)[0] for f in self.vec)
        sx, sxx = self.grid.derivs(s)
        Tx, Txx = self.grid.derivs(T)
        self.kernels.rhs_assemble(a, b, float(k), s, T, sx, Tx, sxx, Txx,
                                  u0, u1, u2, v0, v1, v2, outS, outT)
        return float(a[5] * k + u0_slope)

    def evaluate(self, f: STField, t):
        outS, outT = np.empty(f.grid.N), np.empty(f.grid.N)
        dk = self(f.s, f.T, f.k, t, outS, outT)
        return outS, outT, dk

    def stiffness(self, t=0.0) -> float:
        """Spectral radius of the second-order matrix [[a1, a2], [b1, b2]] at time t."""
        a, b = self.coeffs(t)
        return float(max(abs(np.linalg.eigvals(np.array([[a[0], a[1]], [b[0], b[1]]])))))


def rhs(ab: ABCoefficients, f: STField, t=0.0):
    """``(dS, dT, dk)``: periodic parts of S_t and T_t plus the winding-slope rate.

    The full phase derivative is ``dk * x + dS``.
    """
    return CompiledRHS(ab, f.grid).evaluate(f, t)
