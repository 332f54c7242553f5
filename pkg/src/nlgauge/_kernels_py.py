"""Pure-numpy versions of the fused kernels in ``_kernels.pyx``."""
import numpy as np


def rhs_assemble(a, b, k, s, T, sx, Tx, sxx, Txx, u0, u1, u2, v0, v1, v2, outS, outT):
    Sx = k + sx
    q_ss = Sx * Sx
    q_st = Sx * Tx
    q_tt = Tx * Tx
    outS[:] = (a[0] * sxx + a[1] * Txx + a[2] * q_ss + a[3] * q_st + a[4] * q_tt
               + a[5] * s + a[6] * T + u0 + u1 * Sx + u2 * Tx)
    outT[:] = (b[0] * sxx + b[1] * Txx + b[2] * q_ss + b[3] * q_st + b[4] * q_tt
               + b[5] * s + b[6] * T + v0 + v1 * Sx + v2 * Tx)


def rk4_stage(y, dy, h, out):
    np.multiply(dy, h, out=out)
    out += y


def rk4_finish(y, k1, k2, k3, k4, h, out):
    np.add(k2, k3, out=out)
    out *= 2.0
    out += k1
    out += k4
    out *= h / 6.0
    out += y


def max_abs(y):
    if np.isnan(y).any():
        return float("nan")
    return float(np.max(np.abs(y))) if y.size else 0.0
