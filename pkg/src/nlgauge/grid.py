"""Periodic 1D grids and the (S, T) field pair in logarithmic variables.

``psi = exp(T + i S)``.  On a periodic domain S may wind, so it is stored as
``S(x) = k * x + s(x)`` with ``s`` periodic and ``k`` the winding slope; T is
always periodic.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ValidationError, WindingError
from .expr import as_expr

NODE_THRESHOLD = 1e-8


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid ``x_j = x0 + j L / N`` on ``[x0, x0 + L)``."""

    L: float
    N: int
    x0: float = None

    def __post_init__(self):
        if not self.L > 0:
            raise ValidationError(f"grid length must be positive, got {self.L}")
        n = int(self.N)
        if n < 32 or n & (n - 1):
            raise ValidationError(f"N must be a power of two >= 32, got {self.N}")
        object.__setattr__(self, "N", n)
        object.__setattr__(self, "L", float(self.L))
        if self.x0 is None:
            object.__setattr__(self, "x0", -self.L / 2)
        object.__setattr__(self, "x0", float(self.x0))

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.N)

    @property
    def kmax(self) -> float:
        return self.N * math.pi / self.L

    @property
    def wavenumbers(self) -> np.ndarray:
        return 2 * math.pi * np.fft.rfftfreq(self.N, self.dx)

    def deriv(self, f, order=1):
        """Spectral derivative of a periodic array (Nyquist mode dropped for odd orders)."""
        ik = 1j * self.wavenumbers
        mult = ik ** order
        if order % 2:
            mult[-1] = 0.0
        return np.fft.irfft(mult * np.fft.rfft(f), n=self.N)

    def derivs(self, f):
        """First and second spectral derivatives sharing one forward transform."""
        fh = np.fft.rfft(f)
        k = self.wavenumbers
        d1 = 1j * k * fh
        d1[-1] = 0.0
        return np.fft.irfft(d1, n=self.N), np.fft.irfft(-(k * k) * fh, n=self.N)

    def integrate(self, f) -> float:
        return float(np.sum(f) * self.dx)

    def endpoint_slope(self, expr, t=0.0) -> float:
        """Linear part of an expression across one period: (e(x0+L) - e(x0)) / L."""
        e = as_expr(expr)
        ends = e(x=np.array([self.x0, self.x0 + self.L]), t=t)
        return float((ends[1] - ends[0]) / self.L)

    def to_json(self):
        return {"L": self.L, "N": self.N, "x0": self.x0}

    @classmethod
    def from_json(cls, d):
        return cls(L=d["L"], N=d["N"], x0=d.get("x0"))


@dataclass(frozen=True)
class STField:
    """Discretized (S, T) pair; ``s`` is the periodic remainder of S."""

    grid: Grid
    s: np.ndarray
    T: np.ndarray
    k: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        T = np.asarray(self.T, dtype=float)
        n = self.grid.N
        if s.shape != (n,) or T.shape != (n,):
            raise ValidationError(f"S and T must have shape ({n},)")
        if not (np.all(np.isfinite(s)) and np.all(np.isfinite(T)) and math.isfinite(self.k)):
            raise ValidationError("S, T and the winding slope must be finite")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "k", float(self.k))

    @property
    def S(self) -> np.ndarray:
        return self.k * self.grid.x + self.s

    @property
    def rho(self) -> np.ndarray:
        return np.exp(2 * self.T)

    @property
    def R(self) -> np.ndarray:
        return np.exp(self.T)

    def gradS(self) -> np.ndarray:
        return self.k + self.grid.deriv(self.s)

    def gradT(self) -> np.ndarray:
        return self.grid.deriv(self.T)

    def to_wavefunction(self) -> WaveFunction:
        return st_to_wavefunction(self)

    def with_arrays(self, s=None, T=None, k=None) -> STField:
        return replace(self, s=self.s if s is None else s, T=self.T if T is None else T,
                       k=self.k if k is None else k)

    @classmethod
    def from_expressions(cls, grid: Grid, S, T, t=0.0, winding: int = 0) -> STField:
        """Sample S and T expressions; a linear part of S becomes winding slope.

        ``winding`` adds ``2 pi winding / L`` to the slope.
        """
        S, T = as_expr(S), as_expr(T)
        xs = grid.x
        kS = grid.endpoint_slope(S, t)
        kT = grid.endpoint_slope(T, t)
        tvals = T(x=xs, t=t)
        if abs(kT) * grid.L > 1e-10 * max(1.0, float(np.max(np.abs(tvals)))):
            raise WindingError(f"T expression {T} is not periodic on the grid (T must not wind)")
        k = kS + 2 * math.pi * winding / grid.L
        s = S(x=xs, t=t) - kS * xs
        return cls(grid, s, tvals, k)

    # -- CSV (x, S, T) + JSON header ---------------------------------------
    def header(self):
        return {"L": self.grid.L, "N": self.grid.N, "x0": self.grid.x0, "k_S": self.k}

    def to_csv(self, path):
        """Write ``path`` (x, S, T rows, S including winding) and ``path.json`` header."""
        path = Path(path)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "S", "T"])
            for row in zip(self.grid.x, self.S, self.T):
                w.writerow([repr(float(v)) for v in row])
        Path(str(path) + ".json").write_text(json.dumps(self.header(), sort_keys=True, indent=2) + "\n")

    @classmethod
    def from_csv(cls, path) -> STField:
        path = Path(path)
        head = json.loads(Path(str(path) + ".json").read_text())
        grid = Grid(head["L"], head["N"], head.get("x0"))
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if data.shape != (grid.N, 3):
            raise ValidationError(f"{path}: expected {grid.N} rows of (x, S, T)")
        k = float(head["k_S"])
        return cls(grid, data[:, 1] - k * grid.x, data[:, 2], k)


@dataclass(frozen=True)
class WaveFunction:
    grid: Grid
    psi: np.ndarray = field(repr=False)

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=complex)
        if psi.shape != (self.grid.N,):
            raise ValidationError(f"psi must have shape ({self.grid.N},)")
        object.__setattr__(self, "psi", psi)

    def to_st(self) -> STField:
        return wavefunction_to_st(self)


def wavefunction_to_st(w: WaveFunction) -> STField:
    """Split a nodeless wave function into T = ln|psi| and an unwrapped phase.

    The phase is unwrapped along the grid and once more across the seam; the
    resulting integer winding n gives slope ``2 pi n / L``.
    """
    amp = np.abs(w.psi)
    if amp.min() <= NODE_THRESHOLD * amp.max():
        j = int(np.argmin(amp))
        raise ValidationError(
            f"wave function has a node near x={w.grid.x[j]:.6g} (|psi| = {amp[j]:.3g}); "
            "conversion to (S, T) refused")
    phase = np.unwrap(np.angle(np.append(w.psi, w.psi[0])))
    n = int(round((phase[-1] - phase[0]) / (2 * math.pi)))
    k = 2 * math.pi * n / w.grid.L
    s = phase[:-1] - k * w.grid.x
    # the remainder is defined up to 2 pi; keep it centred near zero
    s = s - 2 * math.pi * round(float(np.mean(s)) / (2 * math.pi))
    return STField(w.grid, s, np.log(amp), k)


def st_to_wavefunction(f: STField) -> WaveFunction:
    return WaveFunction(f.grid, np.exp(f.T + 1j * f.S))
