# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Fused pointwise kernels for the (S, T) integrator.

Same signatures as ``_kernels_py``; the selector lives in ``kernels.py``.
"""


def rhs_assemble(const double[::1] a, const double[::1] b, double k,
                 const double[::1] s, const double[::1] T,
                 const double[::1] sx, const double[::1] Tx,
                 const double[::1] sxx, const double[::1] Txx,
                 const double[::1] u0, const double[::1] u1, const double[::1] u2,
                 const double[::1] v0, const double[::1] v1, const double[::1] v2,
                 double[::1] outS, double[::1] outT):
    cdef Py_ssize_t i, n = s.shape[0]
    cdef double Sx, tx, q_ss, q_st, q_tt
    for i in range(n):
        Sx = k + sx[i]
        tx = Tx[i]
        q_ss = Sx * Sx
        q_st = Sx * tx
        q_tt = tx * tx
        outS[i] = (a[0] * sxx[i] + a[1] * Txx[i] + a[2] * q_ss + a[3] * q_st + a[4] * q_tt
                   + a[5] * s[i] + a[6] * T[i] + u0[i] + u1[i] * Sx + u2[i] * tx)
        outT[i] = (b[0] * sxx[i] + b[1] * Txx[i] + b[2] * q_ss + b[3] * q_st + b[4] * q_tt
                   + b[5] * s[i] + b[6] * T[i] + v0[i] + v1[i] * Sx + v2[i] * tx)


def rk4_stage(const double[::1] y, const double[::1] dy, double h, double[::1] out):
    cdef Py_ssize_t i
    for i in range(y.shape[0]):
        out[i] = y[i] + h * dy[i]


def rk4_finish(const double[::1] y, const double[::1] k1, const double[::1] k2,
               const double[::1] k3, const double[::1] k4, double h, double[::1] out):
    cdef Py_ssize_t i
    cdef double w = h / 6.0
    for i in range(y.shape[0]):
        out[i] = y[i] + w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])


def max_abs(const double[::1] y):
    cdef Py_ssize_t i
    cdef double m = 0.0, v
    for i in range(y.shape[0]):
        v = y[i]
        if v != v:
            return float("nan")
        if v < 0:
            v = -v
        if v > m:
            m = v
    return m
