"""The spectral function h_U(k, L), its infinite-separation limit, and the plate bracket.

The allowed momenta between the plates are the real zeros of

    h_U(k, L) = -2k (det U - 1) cos(kL) - 2k (U12 + U21)
                + i [(k^2 + 1)(det U + 1) + (k^2 - 1) tr U] sin(kL).

On the positive imaginary axis ``h_U(i kappa, L) e^{-kappa L}`` tends to
``h_U^inf(kappa) = (kappa - i)^2 c_U(-(kappa + i)/(kappa - i)) / 2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from ._scan import NOISE, refine, sign_brackets
from .boundary import BoundaryCondition, BoundaryParams, char_poly
from .errors import BracketingError, SingularPointError, ValidationError


def _scalar_or_array(x):
    return complex(x) if np.ndim(x) == 0 else x


def _trig_scaled(k, L):
    """cos(kL), sin(kL) multiplied by exp(-|Im kL|), plus that exponent.

    The difference of exponentials in sin goes through expm1 so that small
    |kL| keeps full relative precision.
    """
    z = 1j * np.asarray(k, dtype=complex) * L
    m = np.abs(z.real)
    flip = z.real < 0
    w = np.where(flip, -z, z)
    big = np.exp(w - m)
    diff = -big * np.expm1(-2 * w)  # e^{w-m} - e^{-w-m}
    diff = np.where(flip, -diff, diff)
    small = np.exp(-w - m)
    return 0.5 * (big + small), diff / 2j, m


def _h_parts(bc, k, L, scaled):
    k = np.asarray(k, dtype=complex)
    d, t, s = bc.det_u, bc.tr_u, bc.offdiag_sum
    if scaled:
        cs, sn, m = _trig_scaled(k, L)
        const = np.exp(-m)
    else:
        cs, sn, const = np.cos(k * L), np.sin(k * L), 1.0
    poly = (k * k + 1) * (d + 1) + (k * k - 1) * t
    h = -2 * k * (d - 1) * cs - 2 * k * s * const + 1j * poly * sn
    dh = (
        -2 * (d - 1) * cs
        + 2 * k * L * (d - 1) * sn
        - 2 * s * const
        + 2j * k * (d + 1 + t) * sn
        + 1j * L * poly * cs
    )
    return h, dh


def h_u(bc: BoundaryCondition, k, L: float):
    """Spectral function h_U(k, L) for complex ``k`` (scalar or array)."""
    if L <= 0:
        raise ValidationError(f"L must be positive, got {L!r}")
    return _scalar_or_array(_h_parts(bc, k, L, scaled=False)[0])


def h_u_dk(bc: BoundaryCondition, k, L: float):
    """Closed-form derivative dh_U/dk."""
    return _scalar_or_array(_h_parts(bc, k, L, scaled=False)[1])


def h_u_scaled(bc: BoundaryCondition, k, L: float):
    """h_U(k, L) * exp(-|Im k| L); finite for any imaginary part of k."""
    return _scalar_or_array(_h_parts(bc, k, L, scaled=True)[0])


def h_u_from_params(params: BoundaryParams, k, L: float):
    """h_U through the angles: 2i e^{i alpha}[...] with only n_1 entering."""
    k = np.asarray(k, dtype=complex)
    a, b, n1 = params.alpha, params.beta, params.n[0]
    inner = (
        ((k * k - 1) * np.cos(b) + (k * k + 1) * np.cos(a)) * np.sin(k * L)
        - 2 * k * np.sin(a) * np.cos(k * L)
        - 2 * k * n1 * np.sin(b)
    )
    return _scalar_or_array(2j * np.exp(1j * a) * inner)


def h_u_infinity(bc: BoundaryCondition, kappa):
    """h_U^inf(kappa) = (kappa - i)^2 c_U(-(kappa + i)/(kappa - i)) / 2."""
    kappa = np.asarray(kappa, dtype=float)
    if np.any(kappa <= 0):
        raise ValidationError("kappa must be positive")
    z = -(kappa + 1j) / (kappa - 1j)
    return _scalar_or_array(0.5 * (kappa - 1j) ** 2 * char_poly(bc, z))


def infinity_zeros(bc: BoundaryCondition, rel_tol: float = 1e-9):
    """Positive zeros of h_U^inf(kappa), i.e. bound states of a single plate.

    h_U^inf is the quadratic ``[(d + t + 1) kappa^2 - 2i (d - 1) kappa + (t - d - 1)] / 2``
    with ``d = det U`` and ``t = tr U``.
    """
    d, t = bc.det_u, bc.tr_u
    coeffs = np.array([d + t + 1, -2j * (d - 1), t - d - 1])
    scale = np.max(np.abs(coeffs))
    nz = np.flatnonzero(np.abs(coeffs) > 1e-14 * scale)
    roots = np.roots(coeffs[nz[0]:]) if nz.size else np.array([])
    return sorted(float(r.real) for r in roots if r.real > 0 and abs(r.imag) <= rel_tol * abs(r))


def h_u_infinity_dkappa(bc: BoundaryCondition, kappa):
    """d/dkappa of h_U^inf, from the expanded quadratic in kappa."""
    kappa = np.asarray(kappa, dtype=float)
    return _scalar_or_array(bc.det_u * (kappa - 1j) + bc.tr_u * kappa + (kappa + 1j))


def log_derivative_imag(bc: BoundaryCondition, kappa, L: float):
    """d/dkappa log h_U(i kappa, L), overflow-safe for large kappa*L."""
    k = 1j * np.asarray(kappa, dtype=float)
    h, dh = _h_parts(bc, k, L, scaled=True)
    return _scalar_or_array(1j * dh / h)


def regulated_log_derivative(bc: BoundaryCondition, kappa, L0: float):
    """-L0 + d/dkappa log h_U(i kappa, L0); tends to d/dkappa log h_U^inf as L0 grows."""
    return log_derivative_imag(bc, kappa, L0) - L0


def infinity_log_derivative(bc: BoundaryCondition, kappa):
    return h_u_infinity_dkappa(bc, kappa) / h_u_infinity(bc, kappa)


@dataclass(frozen=True)
class SpectralEvaluation:
    k: complex
    value: complex
    log_deriv: complex


def evaluate(bc: BoundaryCondition, k: complex, L: float) -> SpectralEvaluation:
    h, dh = _h_parts(bc, complex(k), L, scaled=False)
    h, dh = complex(h), complex(dh)
    if h == 0:
        raise SingularPointError(f"h_U vanishes at k = {k!r}")
    return SpectralEvaluation(complex(k), h, dh / h)


def bracket_plates_complex(bc: BoundaryCondition, kappa, L: float):
    """Complex value of ``L - d log h_U(i kappa, L) + d log h_U^inf(i kappa)``."""
    kap = np.atleast_1d(np.asarray(kappa, dtype=float))
    if L <= 0:
        raise ValidationError(f"L must be positive, got {L!r}")
    if np.any(kap <= 0):
        raise ValidationError("kappa must be positive")
    out = _backend.plate_bracket(bc.det_u, bc.tr_u, bc.offdiag_sum, kap, float(L))
    if not np.all(np.isfinite(out)):
        bad = kap[~np.isfinite(out)]
        raise SingularPointError(
            f"h_U(i kappa, L) or h_U^inf vanishes at kappa = {bad[0]!r} (inadmissible boundary condition?)"
        )
    return out if np.ndim(kappa) else complex(out[0])


def bracket_plates(bc: BoundaryCondition, kappa, L: float, rtol_imag: float = 1e-9):
    """Real plate bracket at ``kappa``; raises if the imaginary residue is not roundoff.

    The residue check is relative with an absolute floor so that exponentially
    small tails are not flagged.
    """
    val = np.asarray(bracket_plates_complex(bc, kappa, L))
    resid = np.abs(val.imag)
    limit = rtol_imag * np.maximum(np.abs(val), 1e-300) + 1e-14 * L
    if np.any(resid > limit):
        i = int(np.argmax(resid - limit))
        raise SingularPointError(
            f"plate bracket is not real at kappa = {np.ravel(kappa)[i] if np.ndim(kappa) else kappa!r} "
            f"(|Im| = {np.ravel(resid)[i]:.3e}); boundary condition likely inadmissible"
        )
    return val.real if np.ndim(kappa) else float(val.real)


def imag_axis_real_form(bc: BoundaryCondition, kappa, L: float):
    """Real function with the zeros of h_U(i kappa, L), scaled by e^{-kappa L}.

    h_U(i kappa) is a constant phase times a real function; dividing by
    sqrt(det U) removes the phase.  Returns ``(value, |imag residue|, scale)``
    where ``scale`` bounds the magnitude of the summed terms (for roundoff
    floors).
    """
    kap = np.asarray(kappa, dtype=float)
    cs, sn, m = _trig_scaled(1j * kap, L)
    d, t, s = bc.det_u, bc.tr_u, bc.offdiag_sum
    poly = (1 - kap * kap) * (d + 1) - (kap * kap + 1) * t
    terms = (-2j * kap * (d - 1) * cs, -2j * kap * s * np.exp(-m), 1j * poly * sn)
    h = (terms[0] + terms[1] + terms[2]) / np.sqrt(d)
    scale = sum(np.abs(x) for x in terms)
    return h.real, np.abs(h.imag), scale


def _real_form(bc, L):
    """Real function with the zeros of h_U on the real axis, its derivative and noise scale."""
    norm = 2j * np.sqrt(bc.det_u)
    d, t, s = bc.det_u, bc.tr_u, bc.offdiag_sum

    def g(k):
        h, _ = _h_parts(bc, np.asarray(k, dtype=float), L, scaled=False)
        return (h / norm).real

    def dg(k):
        _, dh = _h_parts(bc, np.asarray(k, dtype=float), L, scaled=False)
        return (dh / norm).real

    def scale(k):
        k = np.abs(np.asarray(k, dtype=float))
        return 0.5 * (2 * k * abs(d - 1) + 2 * k * abs(s) + (k * k + 1) * abs(d + 1) + (k * k + 1) * abs(t))

    return g, dg, scale


def real_spectrum(bc: BoundaryCondition, L: float, k_max: float, multiplicities: bool = False):
    """Positive real zeros of h_U(k, L) in (0, k_max], in increasing order.

    Simple roots come from sign changes on a grid of spacing pi/(32L)
    (preceded by a geometric lead-in from 1e-6/L, since h_U always vanishes
    at k = 0) refined by Brent's method.  Stationary points between samples
    are located from the closed-form derivative, which catches double roots
    and pairs of close roots.  With ``multiplicities=True`` returns
    ``(k, multiplicity)`` pairs.
    """
    if L <= 0 or k_max <= 0:
        raise ValidationError("L and k_max must be positive")
    g, dg, scale = _real_form(bc, L)
    h = np.pi / (32 * L)
    # irrational offset keeps nodes off the rational multiples of pi/L where
    # touching roots of the classic conditions sit
    nodes = (np.arange(int(np.ceil(k_max / h)) + 1) + 0.381966011250105) * h
    lead = np.geomspace(1e-6 / L, nodes[0], 24, endpoint=False)
    grid = np.concatenate([lead, nodes[nodes < k_max], [k_max]])
    grid = grid[grid <= k_max]
    vals, dvals, sc = g(grid), dg(grid), scale(grid)
    floor = NOISE * sc
    found = []

    def check(k, mult):
        if abs(g(k)) > 1e-10 * max(float(scale(k)), 1.0):
            raise BracketingError(f"refined root at k = {k!r} has residual {abs(g(k)):.3e}", (k, k))
        found.append((float(k), mult))

    brackets = {i: j for i, j in sign_brackets(vals, floor)}
    i = 0
    while i < len(grid) - 1:
        j = brackets.get(i)
        if j is not None:
            a, b = grid[i], grid[j]
            pieces = [a, b]
            if j == i + 1 and dvals[i] * dvals[j] < 0:
                pieces = [a, refine(dg, a, b), b]
            for lo, hi in zip(pieces[:-1], pieces[1:]):
                if g(lo) * g(hi) < 0:
                    check(refine(g, lo, hi), 1)
            i = j
            continue
        if abs(vals[i]) > floor[i] and dvals[i] * dvals[i + 1] < 0:
            a, b = grid[i], grid[i + 1]
            c = refine(dg, a, b)
            gc = g(c)
            if abs(gc) <= 1e-10 * max(float(scale(c)), 1.0):
                check(c, 2)
            elif np.sign(gc) != np.sign(vals[i]) and np.sign(gc) != np.sign(vals[i + 1]):
                check(refine(g, a, c), 1)
                check(refine(g, c, b), 1)
        i += 1
    found.sort()
    merged = []
    for k, m in found:
        if merged and k - merged[-1][0] < 1e-8 * max(1.0, k):
            merged[-1] = (0.5 * (k + merged[-1][0]), merged[-1][1] + m)
        else:
            merged.append((k, m))
    out = [(k, m) for k, m in merged if 0.0 < k <= k_max]
    return out if multiplicities else [k for k, _ in out]
