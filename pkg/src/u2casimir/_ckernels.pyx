# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the integrands in ``_pykernels``.

Same signatures and element encoding; loops run per kappa in C99 complex
arithmetic instead of building broadcast temporaries.
"""
import numpy as np

cdef extern from "complex.h" nogil:
    double complex cexp(double complex)
    double complex csqrt(double complex)
    double cabs(double complex)
    double cimag(double complex)
    double creal(double complex)

cdef extern from "math.h" nogil:
    double exp(double)
    double cos(double)
    double sin(double)
    double expm1(double)

cdef double SINC_CUTOFF = 1e-2
cdef double DIFF_CUTOFF = 0.1
cdef double complex I = 1j


cdef inline void _matmul(double complex* a, double complex* b, double complex* out) noexcept nogil:
    # out = a @ b for row-major 2x2
    out[0] = a[0] * b[0] + a[1] * b[2]
    out[1] = a[0] * b[1] + a[1] * b[3]
    out[2] = a[2] * b[0] + a[3] * b[2]
    out[3] = a[2] * b[1] + a[3] * b[3]


cdef double _propagate(double[:, :] el, double complex k,
                       double complex* m, double complex* dm) noexcept nogil:
    cdef double complex me[4]
    cdef double complex dme[4]
    cdef double complex t1[4]
    cdef double complex t2[4]
    cdef double complex q, q2, x, x2, ep, em, c, s, tt
    cdef double sigma = 0.0, se, V, a
    cdef Py_ssize_t i, j, n = el.shape[0]
    m[0] = 1.0; m[1] = 0.0; m[2] = 0.0; m[3] = 1.0
    dm[0] = 0.0; dm[1] = 0.0; dm[2] = 0.0; dm[3] = 0.0
    for i in range(n):
        if el[i, 0] == 0.0:
            V = el[i, 1]
            a = el[i, 2]
            if a == 0.0:
                continue
            q = I * csqrt(V - k * k + 0j)
            q2 = k * k - V
            se = cimag(q) * a
            x = q * a
            ep = cexp(I * x - se)
            em = cexp(-I * creal(x))
            c = 0.5 * (ep + em)
            x2 = x * x
            if cabs(x) < SINC_CUTOFF:
                s = a * (1.0 + x2 * (-1.0 / 6 + x2 * (1.0 / 120 + x2 * (-1.0 / 5040)))) * exp(-se)
            else:
                s = (ep - em) / (2.0 * I * q)
            if cabs(x) < DIFF_CUTOFF:
                tt = a * a * a * (-1.0 / 3 + x2 * (1.0 / 30 + x2 * (-1.0 / 840 + x2 * (1.0 / 45360 - x2 / 9979200)))) * exp(-se)
            else:
                tt = (a * c - s) / q2
            me[0] = c; me[1] = s; me[2] = -q2 * s; me[3] = c
            dme[0] = -a * k * s; dme[1] = k * tt
            dme[2] = -k * (s + a * c); dme[3] = -a * k * s
            sigma += se
        else:
            me[0] = el[i, 3]; me[1] = el[i, 4]; me[2] = el[i, 5]; me[3] = el[i, 6]
            dme[0] = 0.0; dme[1] = 0.0; dme[2] = 0.0; dme[3] = 0.0
        _matmul(dme, m, t1)
        _matmul(me, dm, t2)
        for j in range(4):
            dm[j] = t1[j] + t2[j]
        _matmul(me, m, t1)
        for j in range(4):
            m[j] = t1[j]
    return sigma


cdef double complex _comb_near(double complex* m, double complex* dm, double sigma, double kappa,
                               double cos_theta, double vers, double gap) noexcept nogil:
    # mirrors _pykernels._comb_near
    cdef double scale = exp(sigma if sigma < 600.0 else 600.0)
    cdef double complex M[4]
    cdef double complex dM[4]
    cdef double complex T, dT, c, P, dP, num, dnum, D, dD
    cdef double E, g, h2
    cdef int j
    for j in range(4):
        M[j] = m[j] * scale
        dM[j] = I * dm[j] * scale
    T = M[0] + M[3]
    dT = dM[0] + dM[3]
    c = (2.0 - T) - 2.0 * vers
    E = exp(-kappa * gap)
    g = -expm1(-kappa * gap)
    h2 = -expm1(-2.0 * kappa * gap)
    P = -kappa * kappa * M[1] - M[2]
    dP = -2.0 * kappa * M[1] - kappa * kappa * dM[1] - dM[2]
    num = -kappa * (2.0 * E * c - T * g * g) - P * h2
    dnum = (-(2.0 * E * c - T * g * g)
            - kappa * (-2.0 * gap * E * c - 2.0 * E * dT - dT * g * g - 2.0 * T * g * gap * E)
            - dP * h2 - 2.0 * gap * P * E * E)
    D = -kappa * T - kappa * kappa * M[1] - M[2]
    dD = -T - kappa * dT - 2.0 * kappa * M[1] - kappa * kappa * dM[1] - dM[2]
    return dnum / num - dD / D


def comb_integrand(elements, kappa, double theta, double L, double support):
    cdef double[:, :] el = np.ascontiguousarray(elements, dtype=float).reshape(-1, 7)
    cdef double[:] kap = np.ascontiguousarray(kappa, dtype=float).ravel()
    out_arr = np.empty(kap.shape[0], dtype=complex)
    cdef double complex[:] out = out_arr
    cdef double complex m[4]
    cdef double complex dm[4]
    cdef double complex k, tr, dtr, D, N, dD, dN, e1, e2, phi, dphi
    cdef double sigma, gap = L - support
    cdef double cos_theta = cos(theta)
    cdef double vers = 2.0 * sin(0.5 * theta) * sin(0.5 * theta)
    cdef Py_ssize_t i
    with nogil:
        for i in range(kap.shape[0]):
            k = I * kap[i]
            sigma = _propagate(el, k, m, dm)
            if kap[i] * L < 1.0 and sigma < 300.0:
                out[i] = _comb_near(m, dm, sigma, kap[i], cos_theta, vers, gap)
                continue
            tr = m[0] + m[3]
            dtr = dm[0] + dm[3]
            D = I * k * tr + k * k * m[1] - m[2]
            N = I * k * tr - k * k * m[1] + m[2]
            dD = I * tr + I * k * dtr + 2.0 * k * m[1] + k * k * dm[1] - dm[2]
            dN = I * tr + I * k * dtr - 2.0 * k * m[1] - k * k * dm[1] + dm[2]
            e1 = cexp(I * k * gap - sigma)
            e2 = cexp(2.0 * I * k * gap)
            phi = 2.0 * I * k * cos_theta * e1 / D - 0.5 - N * e2 / (2.0 * D)
            dphi = (2.0 * I * cos_theta * e1 / D
                    - 2.0 * k * gap * cos_theta * e1 / D
                    - 2.0 * I * k * cos_theta * e1 * dD / (D * D)
                    - (dN + 2.0 * I * gap * N) * e2 / (2.0 * D)
                    + N * e2 * dD / (2.0 * D * D))
            out[i] = I * dphi / phi
    return out_arr.reshape(np.shape(kappa))


def plate_bracket(double complex det_u, double complex tr_u, double complex off_u, kappa, double L):
    cdef double[:] kap = np.ascontiguousarray(kappa, dtype=float).ravel()
    out_arr = np.empty(kap.shape[0], dtype=complex)
    cdef double complex[:] out = out_arr
    cdef double complex A, B, C, dA, dB, dC, hinf, dhinf, R, dR, S, dS, q
    cdef double x, e1, e2, g1, em2
    cdef Py_ssize_t i
    dA = -2.0 * I * (det_u - 1.0)
    dB = -2.0 * I * off_u
    q = det_u - 1.0 + off_u
    with nogil:
        for i in range(kap.shape[0]):
            x = kap[i]
            A = -2.0 * I * x * (det_u - 1.0)
            B = -2.0 * I * x * off_u
            C = x * x * (det_u + 1.0 + tr_u) + (tr_u - det_u - 1.0)
            dC = 2.0 * x * (det_u + 1.0 + tr_u)
            e1 = exp(-x * L)
            e2 = e1 * e1
            hinf = 0.5 * (A + C)
            dhinf = 0.5 * (dA + dC)
            R = 0.5 * (A - C) * e2 + B * e1
            dR = (0.5 * (dA - dC) - L * (A - C)) * e2 + (dB - L * B) * e1
            g1 = -expm1(-x * L)
            em2 = expm1(-2.0 * x * L)
            S = -I * x * ((det_u - 1.0) * g1 * g1 + 2.0 * e1 * q) - 0.5 * C * em2
            if x * L < 1.0:
                dS = (-I * ((det_u - 1.0) * g1 * g1 + 2.0 * e1 * q)
                      - 2.0 * I * x * L * e1 * ((det_u - 1.0) * g1 - q)
                      - 0.5 * dC * em2 + C * L * e2)
                out[i] = dhinf / hinf - dS / S
            else:
                out[i] = (dhinf * R - dR * hinf) / (hinf * S)
    return out_arr.reshape(np.shape(kappa))


def propagate_one(elements, double complex k):
    """Scaled transfer matrix at a single k; exposed for backend parity tests."""
    cdef double[:, :] el = np.ascontiguousarray(elements, dtype=float).reshape(-1, 7)
    cdef double complex m[4]
    cdef double complex dm[4]
    cdef double sigma = _propagate(el, k, m, dm)
    return (np.array([[m[0], m[1]], [m[2], m[3]]]),
            np.array([[dm[0], dm[1]], [dm[2], dm[3]]]), sigma)
