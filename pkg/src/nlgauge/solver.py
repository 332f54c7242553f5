"""RK4 / pseudo-spectral integration of the (S, T) system and gauge-invariant diagnostics."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .equation_model import ABCoefficients, CompiledRHS, NuMuCoefficients, ab_from_numu
from .errors import NumericalError, ValidationError
from .gauge_group import GaugeElement, apply_to_st
from .gauge_transform import transform_ab
from .grid import Grid, STField, WaveFunction
from .invariants import invariant_potentials, tau_beta_exprs

CFL_LIMIT = 0.5
BLOWUP = 1e12


@dataclass
class Trajectory:
    times: list
    fields: list
    dt: float
    steps: int = 0
    max_dS: float = 0.0
    max_dT: float = 0.0
    min_rho: list = field(default_factory=list)
    backend: str = ""

    @property
    def final(self) -> STField:
        return self.fields[-1]

    def stats(self) -> dict:
        return {"dt": self.dt, "steps": self.steps, "max_dS": self.max_dS,
                "max_dT": self.max_dT, "min_rho": min(self.min_rho) if self.min_rho else None,
                "backend": self.backend}

    def to_csv(self, path, nm: NuMuCoefficients = None):
        """Rows (t, x, S, T, rho, Jgi); Jgi is left empty without coefficients."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "x", "S", "T", "rho", "Jgi"])
            for t, f in zip(self.times, self.fields):
                J = observables(nm, f, t).Jgi if nm is not None else [""] * f.grid.N
                for row in zip(f.grid.x, f.S, f.T, f.rho, J):
                    w.writerow([repr(float(t))] + [repr(float(v)) if v != "" else "" for v in row])


def stiffness(ab: ABCoefficients, t0=0.0, t1=1.0) -> float:
    """Largest spectral radius of [[a1, a2], [b1, b2]] over 16 times in [t0, t1].

    The spectral radius is unchanged by the matrix part of a gauge element, so a
    run and its gauge transform share the same step-size bound.
    """
    ts = np.linspace(t0, t1, 16)
    return max(float(np.max(np.abs(np.linalg.eigvals(ab.second_order_matrix(t))))) for t in ts)


def cfl_number(ab: ABCoefficients, grid: Grid, dt, t0=0.0, t1=1.0) -> float:
    return dt * stiffness(ab, t0, t1) * grid.kmax ** 2


def _snapshot_times(t0, t1, snapshots):
    if snapshots is None:
        return np.array([t0, t1])
    if np.isscalar(snapshots):
        n = int(snapshots)
        if n < 2:
            raise ValidationError("need at least 2 snapshots (start and end)")
        return np.linspace(t0, t1, n)
    ts = np.asarray(snapshots, dtype=float)
    if ts[0] != t0 or np.any(np.diff(ts) <= 0):
        raise ValidationError("snapshot times must start at t0 and increase strictly")
    return ts


def evolve(ab: ABCoefficients, f0: STField, t0: float, t1: float, dt: float,
           snapshots=None, backend=None, check_cfl=True) -> Trajectory:
    """Classical RK4 in time with spectral derivatives in x.

    ``snapshots`` is a count (evenly spaced, endpoints included) or an explicit
    increasing list of times starting at ``t0``.  Each interval between
    snapshots is covered by equal steps no longer than ``dt``.
    """
    if not dt > 0:
        raise ValidationError(f"dt must be positive, got {dt}")
    if not t1 > t0:
        raise ValidationError("t1 must exceed t0")
    grid = f0.grid
    if check_cfl:
        cfl = cfl_number(ab, grid, dt, t0, t1)
        if cfl > CFL_LIMIT:
            raise ValidationError(
                f"dt = {dt:g} violates the step bound: dt * rho(C2) * kmax^2 = {cfl:.3g} > 0.5")
    rhs = CompiledRHS(ab, grid, backend=backend)
    kern = rhs.kernels
    n = grid.N
    times = _snapshot_times(t0, t1, snapshots)

    y = np.concatenate([f0.s, f0.T])
    k = f0.k
    stage = np.empty(2 * n)
    ks = [np.empty(2 * n) for _ in range(4)]
    out = np.empty(2 * n)

    def F(yv, kv, t, dest):
        return rhs(yv[:n], yv[n:], kv, t, dest[:n], dest[n:])

    traj = Trajectory(times=[float(t0)], fields=[f0], dt=dt, min_rho=[float(f0.rho.min())],
                      backend=backend or kernels.BACKEND)
    t = float(t0)
    for t_next in times[1:]:
        m = max(1, int(math.ceil((t_next - t) / dt - 1e-9)))
        h = (t_next - t) / m
        for _ in range(m):
            dk1 = F(y, k, t, ks[0])
            kern.rk4_stage(y, ks[0], h / 2, stage)
            dk2 = F(stage, k + h / 2 * dk1, t + h / 2, ks[1])
            kern.rk4_stage(y, ks[1], h / 2, stage)
            dk3 = F(stage, k + h / 2 * dk2, t + h / 2, ks[2])
            kern.rk4_stage(y, ks[2], h, stage)
            dk4 = F(stage, k + h * dk3, t + h, ks[3])
            kern.rk4_finish(y, ks[0], ks[1], ks[2], ks[3], h, out)
            y, out = out, y
            k = k + h / 6 * (dk1 + 2 * dk2 + 2 * dk3 + dk4)
            t += h
            traj.steps += 1
            traj.max_dS = max(traj.max_dS, kern.max_abs(ks[0][:n]))
            traj.max_dT = max(traj.max_dT, kern.max_abs(ks[0][n:]))
            big = kern.max_abs(y)
            if not (big <= BLOWUP and math.isfinite(k)):
                raise NumericalError(
                    f"integration became unstable at t={t:.6g} (max |field| = {big:.3g})",
                    trajectory=traj)
        t = float(t_next)
        f = STField(grid, y[:n].copy(), y[n:].copy(), k)
        traj.times.append(t)
        traj.fields.append(f)
        traj.min_rho.append(float(f.rho.min()))
    return traj


# -- initial data ---------------------------------------------------------------

def free_gaussian(grid: Grid, t=0.0, k0=0.0, x0=0.0, sigma0=1.0, pedestal=1.0,
                  hbar=1.0, m=1.0) -> WaveFunction:
    """Exact free-particle solution: a normalized Gaussian packet plus a constant.

    A constant is itself stationary for the free equation, so the sum is exact.
    With ``pedestal > max |packet|`` the wave function never vanishes, which
    keeps ln|psi| bounded on the periodic grid.
    """
    xs = grid.x
    z = 1 + 1j * hbar * t / (2 * m * sigma0 ** 2)
    v = hbar * k0 / m
    packet = ((2 * math.pi * sigma0 ** 2) ** -0.25 * z ** -0.5
              * np.exp(-(xs - x0 - v * t) ** 2 / (4 * sigma0 ** 2 * z)
                       + 1j * k0 * (xs - x0) - 1j * hbar * k0 ** 2 * t / (2 * m)))
    return WaveFunction(grid, pedestal + packet)


def gaussian_width(t, sigma0=1.0, hbar=1.0, m=1.0) -> float:
    return sigma0 * math.sqrt(1 + (hbar * t / (2 * m * sigma0 ** 2)) ** 2)


def packet_width(w: WaveFunction, pedestal=1.0) -> float:
    """RMS width of |psi - pedestal|^2 (the packet riding on the constant)."""
    dens = np.abs(w.psi - pedestal) ** 2
    xs = w.grid.x
    norm = dens.sum()
    mean = (xs * dens).sum() / norm
    return float(math.sqrt(((xs - mean) ** 2 * dens).sum() / norm))


def plane_wave(grid: Grid, n: int, t=0.0) -> STField:
    """S = k x - (k^2/2) t with k = 2 pi n / L, T = 0 (free particle, hbar = m = 1)."""
    k = 2 * math.pi * n / grid.L
    return STField(grid, np.full(grid.N, -k * k * t / 2), np.zeros(grid.N), k)


# -- observables ------------------------------------------------------------------

@dataclass
class Observables:
    rho: np.ndarray
    jhat: np.ndarray
    Jgi: np.ndarray
    Vfield: np.ndarray
    norm: float
    xbar: float
    vbar: float
    abar: float


def _acal(nm, grid, t):
    return nm.Acal[0](x=grid.x, t=t)


def velocity(nm: NuMuCoefficients, f: STField, t) -> np.ndarray:
    """V = J^gi / rho = -2 nu1 grad S - 4 nu2 grad T - 2 Acal (no division by rho)."""
    return (-2 * nm.nu1(t=t) * f.gradS() - 4 * nm.nu2(t=t) * f.gradT()
            - 2 * _acal(nm, f.grid, t))


def velocity_rate(nm: NuMuCoefficients, f: STField, t, rhs: CompiledRHS = None) -> np.ndarray:
    """dV/dt from the equation of motion for S and T."""
    rhs = rhs or CompiledRHS(ab_from_numu(nm), f.grid)
    dS, dT, dk = rhs.evaluate(f, t)
    g = f.grid
    nu1, nu2 = nm.nu1, nm.nu2
    dA = nm.Acal[0].diff("t")(x=g.x, t=t)
    return (-2 * nu1.diff("t")(t=t) * f.gradS() - 2 * nu1(t=t) * (dk + g.deriv(dS))
            - 4 * nu2.diff("t")(t=t) * f.gradT() - 4 * nu2(t=t) * g.deriv(dT) - 2 * dA)


def observables(nm: NuMuCoefficients, f: STField, t=0.0, rhs: CompiledRHS = None) -> Observables:
    g = f.grid
    rho = f.rho
    jhat = rho * f.gradS()
    V = velocity(nm, f, t)
    J = rho * V
    Vt = velocity_rate(nm, f, t, rhs)
    abar = g.integrate(rho * (0.5 * g.deriv(V * V) + Vt))
    return Observables(rho=rho, jhat=jhat, Jgi=J, Vfield=V, norm=g.integrate(rho),
                       xbar=g.integrate(g.x * rho), vbar=g.integrate(J), abar=abar)


def seam_warning(f: STField, tol=1e-8):
    """Message when rho at the domain edge is not negligible, else None."""
    rho = f.rho
    edge = max(rho[0], rho[-1])
    if edge > tol * rho.max():
        return (f"rho at the domain edge is {edge / rho.max():.3g} of its maximum; "
                "<x> on a periodic domain is only meaningful for localized densities")
    return None


def pedestal_seam_ok(f: STField, pedestal=1.0, tol=1e-8) -> bool:
    """Edge check for pedestal data: the packet, not rho, must vanish at the seam."""
    w = f.to_wavefunction().psi - pedestal
    return bool(max(abs(w[0]), abs(w[-1])) <= tol * np.abs(w).max())


# -- residuals ------------------------------------------------------------------

def _centered(traj: Trajectory, fn):
    """(t_i, centered difference of fn at interior snapshot i, fn field)."""
    ts = traj.times
    vals = [fn(f, t) for f, t in zip(traj.fields, ts)]
    for i in range(1, len(ts) - 1):
        yield i, ts[i], (vals[i + 1] - vals[i - 1]) / (ts[i + 1] - ts[i - 1])


def continuity_residual(nm: NuMuCoefficients, traj: Trajectory) -> dict:
    """max ||d rho/dt + div J^gi||_inf over interior snapshots.

    The Fokker-Planck form ``d rho/dt + div j - D lap rho`` uses
    ``j = -2 nu1 jhat - 2 rho Acal`` and ``D = 2 nu2``.  Outside the
    real-coefficient family the continuity law does not hold; the residual is
    still returned but flagged ``applicable = False``.
    """
    if len(traj.times) < 3:
        raise ValidationError("continuity residual needs at least 3 snapshots")
    bad = nm.family_violations()
    cont = fp = 0.0
    for i, t, rho_t in _centered(traj, lambda f, t: f.rho):
        f = traj.fields[i]
        g = f.grid
        rho = f.rho
        J = rho * velocity(nm, f, t)
        cont = max(cont, float(np.max(np.abs(rho_t + g.deriv(J)))))
        j = rho * (-2 * nm.nu1(t=t) * f.gradS() - 2 * _acal(nm, g, t))
        fp = max(fp, float(np.max(np.abs(rho_t + g.deriv(j) - 2 * nm.nu2(t=t) * g.deriv(rho, 2)))))
    return {"continuity": cont, "fokker_planck": fp, "applicable": not bad,
            "violations": bad}


def hydrodynamic_rhs(nm: NuMuCoefficients, f: STField, t, drop_friction=False) -> np.ndarray:
    """Right side of the gauge-invariant equation of motion for V = J^gi / rho in 1D.

    Written with ln rho = 2T so that no division by rho occurs, and with the
    product tau3 A2gi = A2 / 2 - tau3 Acal so that mu3 = 0 is allowed.  The
    external force is 2 calE = -2 grad Uhat - 2 dAcal/dt - 2 beta2 Acal.
    """
    g = f.grid
    tb = [e(t=t) for e in tau_beta_exprs(nm)]
    tau1, tau2, tau3, tau4, tau5, beta1, beta2 = tb
    fields = invariant_potentials(nm)
    xs = g.x
    V = velocity(nm, f, t)
    Tx, Txx = g.derivs(f.T)
    lnrho_x = 2 * Tx
    lap_rho_over_rho = 2 * Txx + 4 * Tx ** 2
    A1gi = fields.A1gi[0](x=xs, t=t)
    Acal = nm.Acal[0](x=xs, t=t)
    tau3_A2gi = nm.A2[0](x=xs, t=t) / 2 - tau3 * Acal
    div_A1gi_rho = g.deriv(A1gi) + A1gi * lnrho_x
    inner = (2 * tau1 * g.deriv(V) + 2 * tau2 * lap_rho_over_rho + 0.5 * tau3 * V * V
             + (2 * tau1 * (1 + tau3) - tau4) * V * lnrho_x + 2 * tau5 * lnrho_x ** 2
             + 2 * div_A1gi_rho - 2 * tau3_A2gi * V + 2 * beta1 * 2 * f.T)
    calE = fields.calE[0](x=xs, t=t)
    out = g.deriv(inner) + 2 * calE
    if not drop_friction:
        out = out - beta2 * V
    return out


def hydrodynamic_residual(nm: NuMuCoefficients, traj: Trajectory, drop_friction=False) -> dict:
    """Mismatch between dV/dt (centered differences) and the invariant right side.

    Returns absolute and relative (to max |right side|) maxima over interior snapshots.
    """
    if len(traj.times) < 3:
        raise ValidationError("hydrodynamic residual needs at least 3 snapshots")
    worst = scale = 0.0
    for i, t, Vt in _centered(traj, lambda f, t: velocity(nm, f, t)):
        r = hydrodynamic_rhs(nm, traj.fields[i], t, drop_friction)
        worst = max(worst, float(np.max(np.abs(Vt - r))))
        scale = max(scale, float(np.max(np.abs(r))))
    return {"absolute": worst, "relative": worst / scale if scale > 0 else worst, "scale": scale}


def expectation_series(nm: NuMuCoefficients, traj: Trajectory) -> dict:
    """<x>, <v> and the norm at each snapshot."""
    xb, vb, nb = [], [], []
    for f, t in zip(traj.fields, traj.times):
        g = f.grid
        rho = f.rho
        xb.append(g.integrate(g.x * rho))
        vb.append(g.integrate(rho * velocity(nm, f, t)))
        nb.append(g.integrate(rho))
    return {"t": list(traj.times), "xbar": xb, "vbar": vb, "norm": nb}


def ehrenfest_residual(nm: NuMuCoefficients, traj: Trajectory) -> float:
    """max |d<x>/dt - <v>| over interior snapshots (centered differences)."""
    s = expectation_series(nm, traj)
    ts, xb, vb = s["t"], s["xbar"], s["vbar"]
    return max(abs((xb[i + 1] - xb[i - 1]) / (ts[i + 1] - ts[i - 1]) - vb[i])
               for i in range(1, len(ts) - 1))


# -- covariance -------------------------------------------------------------------

def covariance_experiment(ab: ABCoefficients, g: GaugeElement, f0: STField,
                          t0: float, t1: float, dt: float, snapshots=None) -> dict:
    """Evolve-then-transform versus transform-then-evolve (transformed equation).

    Returns the sup-norm deviation of S and T at t1 together with both legs.
    """
    leg1 = evolve(ab, f0, t0, t1, dt, snapshots)
    a = apply_to_st(g, leg1.final, t1)
    ab_p = transform_ab(ab, g, times=np.linspace(t0, t1, 16))
    leg2 = evolve(ab_p, apply_to_st(g, f0, t0), t0, t1, dt, snapshots)
    b = leg2.final
    dS = float(np.max(np.abs(a.S - b.S)))
    dT = float(np.max(np.abs(a.T - b.T)))
    return {"deviation": max(dS, dT), "deviation_S": dS, "deviation_T": dT,
            "transformed": ab_p, "legs": (leg1, leg2)}
