"""Vectorised numpy implementations of the hot integrands.

This module is the reference backend; ``_ckernels`` (Cython) exposes the same
functions with identical signatures and is preferred when it is compiled.

Potentials are passed as an ``(n, 7)`` float array of elements, one row per
element in left-to-right order:

    [kind, V, a, m11, m12, m21, m22]

``kind == 0`` is a constant slab of height ``V`` and width ``a``;
``kind == 1`` is a point interaction with constant (psi, psi') matching
matrix ``[[m11, m12], [m21, m22]]``.
"""
import numpy as np

SLAB = 0
POINT = 1

_SINC_CUTOFF = 1e-2
_DIFF_CUTOFF = 0.1


def _slab(V, a, k):
    """Scaled transfer matrix of a slab and its k-derivative.

    Returns ``(m, dm, sigma)`` with the true matrix equal to
    ``exp(sigma) * m`` and its k-derivative equal to ``exp(sigma) * dm``.
    """
    q = 1j * np.sqrt(V - k * k + 0j)  # Im q >= 0
    q2 = k * k - V
    sigma = q.imag * a
    x = q * a
    ep = np.exp(1j * x - sigma)
    em = np.exp(-1j * x.real + 0j)
    c = 0.5 * (ep + em)
    ax = np.abs(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (ep - em) / (2j * q)
        t = (a * c - s) / q2
    scale = np.exp(-sigma)
    x2 = x * x
    small = ax < _SINC_CUTOFF
    if np.any(small):
        ser = a * (1.0 + x2 * (-1.0 / 6 + x2 * (1.0 / 120 + x2 * (-1.0 / 5040)))) * scale
        s = np.where(small, ser, s)
    small = ax < _DIFF_CUTOFF
    if np.any(small):
        ser = a ** 3 * (-1.0 / 3 + x2 * (1.0 / 30 + x2 * (-1.0 / 840 + x2 * (1.0 / 45360 - x2 / 9979200)))) * scale
        t = np.where(small, ser, t)
    m = np.array([[c, s], [-q2 * s, c]])
    dm = np.array([[-a * k * s, k * t], [-k * (s + a * c), -a * k * s]])
    return m, dm, sigma


def propagate(elements, k):
    """Transfer matrix across all elements (scaled) with its k-derivative.

    ``k`` is a complex array; returns ``m, dm`` of shape ``(2, 2) + k.shape``
    and the log-scale ``sigma``.
    """
    k = np.asarray(k, dtype=complex)
    one = np.ones_like(k)
    zero = np.zeros_like(k)
    m = np.array([[one, zero], [zero, one]])
    dm = np.zeros_like(m)
    sigma = np.zeros(k.shape)
    for row in np.asarray(elements, dtype=float).reshape(-1, 7):
        kind = int(row[0])
        if kind == SLAB:
            if row[2] == 0.0:
                continue
            me, dme, se = _slab(row[1], row[2], k)
            sigma = sigma + se
        elif kind == POINT:
            pm = row[3:7].reshape((2, 2) + (1,) * k.ndim)
            me = pm * one
            dme = np.zeros_like(me)
        else:
            raise ValueError(f"unknown element kind {kind}")
        m, dm = (
            np.einsum("ij...,jk...->ik...", me, m),
            np.einsum("ij...,jk...->ik...", dme, m) + np.einsum("ij...,jk...->ik...", me, dm),
        )
    return m, dm, sigma


def _dn(m, dm, k):
    """Denominator D = ik tr M + k^2 M12 - M21 and numerator N, with k-derivatives."""
    tr = m[0, 0] + m[1, 1]
    dtr = dm[0, 0] + dm[1, 1]
    D = 1j * k * tr + k * k * m[0, 1] - m[1, 0]
    N = 1j * k * tr - k * k * m[0, 1] + m[1, 0]
    dD = 1j * tr + 1j * k * dtr + 2 * k * m[0, 1] + k * k * dm[0, 1] - dm[1, 0]
    dN = 1j * tr + 1j * k * dtr - 2 * k * m[0, 1] - k * k * dm[0, 1] + dm[1, 0]
    return D, N, dD, dN


def _comb_near_parts(m, dm, sigma, kappa, vers, gap):
    """Numerator and denominator of Phi for small kappa L, without cancellation.

    Uses the unscaled matrix M = e^sigma m and
    ``2 D Phi = -kappa [2 E c - T (1-E)^2] - P (1-E^2)`` with ``E = e^{-kappa gap}``,
    ``T = tr M``, ``c = 2 cos(theta) - T`` and ``P = -kappa^2 M12 - M21``.
    """
    scale = np.exp(np.minimum(sigma, 600.0))
    M = m * scale
    dM = 1j * dm * scale  # d/dkappa
    T = M[0, 0] + M[1, 1]
    dT = dM[0, 0] + dM[1, 1]
    c = (2.0 - T) - 2.0 * vers
    E = np.exp(-kappa * gap)
    g = -np.expm1(-kappa * gap)
    h2 = -np.expm1(-2.0 * kappa * gap)
    P = -kappa * kappa * M[0, 1] - M[1, 0]
    dP = -2.0 * kappa * M[0, 1] - kappa * kappa * dM[0, 1] - dM[1, 0]
    num = -kappa * (2.0 * E * c - T * g * g) - P * h2
    dnum = (-(2.0 * E * c - T * g * g)
            - kappa * (-2.0 * gap * E * c - 2.0 * E * dT - dT * g * g - 2.0 * T * g * gap * E)
            - dP * h2 - 2.0 * gap * P * E * E)
    D = -kappa * T - kappa * kappa * M[0, 1] - M[1, 0]
    dD = -T - kappa * dT - 2.0 * kappa * M[0, 1] - kappa * kappa * dM[0, 1] - dM[1, 0]
    return num, dnum, D, dD


def _comb_near(m, dm, sigma, kappa, vers, gap):
    """d/dkappa log Phi for small kappa L."""
    num, dnum, D, dD = _comb_near_parts(m, dm, sigma, kappa, vers, gap)
    return dnum / num - dD / D


def comb_integrand(elements, kappa, theta, L, support):
    """d/dkappa log[e^{-kappa L} t(i kappa) f_theta(i kappa)] on an array of kappa.

    This is the bracket ``-L + d log f_theta + d log t`` of the per-angle cell
    energy, evaluated without cancellation.  Returns a complex array whose
    imaginary part is a roundoff diagnostic.
    """
    kappa = np.asarray(kappa, dtype=float)
    cos_theta = np.cos(theta)
    vers = 2.0 * np.sin(0.5 * theta) ** 2
    k = 1j * kappa
    m, dm, sigma = propagate(elements, k)
    D, N, dD, dN = _dn(m, dm, k)
    gap = L - support
    e1 = np.exp(1j * k * gap - sigma)
    e2 = np.exp(2j * k * gap)
    phi = 2j * k * cos_theta * e1 / D - 0.5 - N * e2 / (2 * D)
    dphi = (
        2j * cos_theta * e1 / D
        - 2.0 * k * gap * cos_theta * e1 / D
        - 2j * k * cos_theta * e1 * dD / (D * D)
        - (dN + 2j * gap * N) * e2 / (2 * D)
        + N * e2 * dD / (2 * D * D)
    )
    with np.errstate(all="ignore"):
        # where phi cancels the near branch below takes over
        far = 1j * dphi / phi
    near_mask = (kappa * L < 1.0) & (sigma < 300.0)
    if not np.any(near_mask):
        return far
    with np.errstate(all="ignore"):
        near = _comb_near(m, dm, sigma, kappa, vers, gap)
    return np.where(near_mask, near, far)


def plate_bracket(det_u, tr_u, off_u, kappa, L):
    """L - d/dkappa log h_U(i kappa, L) + d/dkappa log h_U^inf(i kappa).

    Written as ``(h' R - R' h) / (h (h + R))`` with ``h = h_U^inf`` and
    ``R = e^{-kappa L} h_U(i kappa, L) - h``, which only contains decaying
    exponentials.  Returns a complex array.
    """
    kap = np.asarray(kappa, dtype=float)
    A = -2j * kap * (det_u - 1.0)
    B = -2j * kap * off_u
    C = kap * kap * (det_u + 1.0 + tr_u) + (tr_u - det_u - 1.0)
    dA = -2j * (det_u - 1.0)
    dB = -2j * off_u
    dC = 2.0 * kap * (det_u + 1.0 + tr_u)
    e1 = np.exp(-kap * L)
    e2 = e1 * e1
    hinf = 0.5 * (A + C)
    dhinf = 0.5 * (dA + dC)
    R = 0.5 * (A - C) * e2 + B * e1
    dR = (0.5 * (dA - dC) - L * (A - C)) * e2 + (dB - L * B) * e1
    # hinf + R = e^{-kappa L} h_U(i kappa, L) vanishes at kappa = 0; this form
    # has no cancellation there
    g1 = -np.expm1(-kap * L)
    em2 = np.expm1(-2.0 * kap * L)
    q = det_u - 1.0 + off_u
    S = -1j * kap * ((det_u - 1.0) * g1 * g1 + 2.0 * e1 * q) - 0.5 * C * em2
    dS = (-1j * ((det_u - 1.0) * g1 * g1 + 2.0 * e1 * q)
          - 2j * kap * L * e1 * ((det_u - 1.0) * g1 - q)
          - 0.5 * dC * em2 + C * L * e2)
    far = (dhinf * R - dR * hinf) / (hinf * S)
    # the R form cancels at small kappa L where the direct log difference does not
    near = dhinf / hinf - dS / S
    return np.where(kap * L < 1.0, near, far)


def comb_phi(elements, kappa, theta, L, support):
    """e^{-kappa L} t(i kappa) f_theta(i kappa), real for real potentials."""
    kappa = np.asarray(kappa, dtype=float)
    cos_theta = np.cos(theta)
    vers = 2.0 * np.sin(0.5 * theta) ** 2
    k = 1j * kappa
    m, dm, sigma = propagate(elements, k)
    D, N, _, _ = _dn(m, dm, k)
    gap = L - support
    e1 = np.exp(1j * k * gap - sigma)
    e2 = np.exp(2j * k * gap)
    far = 2j * k * cos_theta * e1 / D - 0.5 - N * e2 / (2 * D)
    near_mask = (kappa * L < 1.0) & (sigma < 300.0)
    if not np.any(near_mask):
        return far
    with np.errstate(all="ignore"):
        num, _, Dn, _ = _comb_near_parts(m, dm, sigma, kappa, vers, gap)
    return np.where(near_mask, num / (2.0 * Dn), far)
