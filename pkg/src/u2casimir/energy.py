"""Vacuum energies: plates with U(2) boundary conditions and one-dimensional combs.

Plate energy per unit area in D spatial dimensions::

    E = -w(D) int_0^inf dkappa kappa^D [L - d log h_U(i kappa, L) + d log h_U^inf(i kappa)]

Cell energy of a comb at Bloch angle theta::

    E(theta) = w(1) int_0^inf dkappa kappa [-L + d log f_theta(i kappa) + d log t(i kappa)]

and the comb energy is the average of E(theta) over the Brillouin zone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma

from . import _backend, _pykernels
from .boundary import BoundaryCondition, is_admissible
from ._scan import EPS
from .errors import BoundStateError, QuadratureError, SingularPointError, ValidationError
from .quadrature import (QuadResult, gauss_legendre_fixed, integrate_quadpack,
                         integrate_semi_infinite)
from .scattering import Potential, _check_cell, as_potential, require_no_bound_states
from .spectral import bracket_plates, infinity_zeros, regulated_log_derivative

METHODS = ("gauss-legendre", "quadpack")


@dataclass
class EnergyResult:
    """Energy with its quadrature diagnostics.

    Attributes
    ----------
    value : float
        Energy per unit plate area (plates) or per cell (combs).
    abs_error_estimate : float
        Quadrature error estimate including the truncated tail.
    k_truncation : float
        Upper end of the integration range (``inf`` for QUADPACK).
    n_evaluations : int
        Number of integrand evaluations.
    diagnostics : dict
        Method-specific extras (decay rate, tail estimate, per-angle data).
    """

    value: float
    abs_error_estimate: float
    k_truncation: float
    n_evaluations: int
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise QuadratureError(f"non-finite energy {self.value!r}")
        self.abs_error_estimate = abs(float(self.abs_error_estimate))


def w_factor(d: float) -> float:
    """Dimension factor -sqrt(pi) / ((4 pi)^((d+1)/2) Gamma(d/2 + 1)).

    Non-integer ``d`` is accepted.

    Examples
    --------
    >>> round(w_factor(1) * 2 * math.pi, 12)
    -1.0
    """
    d = float(d)
    if not d >= 1:
        raise ValidationError(f"dimension must be >= 1, got {d!r}")
    return -math.sqrt(math.pi) / ((4 * math.pi) ** ((d + 1) / 2) * gamma(d / 2 + 1))


def _checked(f):
    def g(kappa):
        out = f(kappa)
        vals = out[0] if isinstance(out, tuple) else out
        if not np.all(np.isfinite(vals)):
            bad = np.asarray(kappa)[~np.isfinite(vals)]
            raise SingularPointError(f"integrand is singular at kappa = {float(bad.flat[0])!r}")
        return out
    return g


def _integrate(f, rate, power, method, atol, rtol):
    if method == "gauss-legendre":
        return integrate_semi_infinite(_checked(f), rate, power, atol=atol, rtol=rtol)
    if method == "quadpack":
        return integrate_quadpack(_checked(f), atol=atol, rtol=rtol)
    raise ValidationError(f"unknown quadrature method {method!r}; expected one of {METHODS}")


def _result(q: QuadResult, factor, **diag) -> EnergyResult:
    diag.setdefault("tail_estimate", abs(factor) * q.tail_estimate)
    return EnergyResult(factor * q.value, abs(factor) * q.abs_error, q.k_truncation, q.n_evaluations, diag)


def _plate_rate(bc, L):
    # h_U(i kappa) carries an e^{-kappa L} correction only when U12 + U21 != 0
    return L if abs(bc.offdiag_sum) > 1e-14 else 2 * L


def plate_energy(bc: BoundaryCondition, L: float, d: float = 1, *, atol: float = 1e-14,
                 rtol: float = 1e-12, method: str = "gauss-legendre",
                 check: bool = True) -> EnergyResult:
    """Casimir energy per unit area between plates with boundary matrix ``bc``.

    Parameters
    ----------
    bc : BoundaryCondition
    L : float
        Plate separation.
    d : float
        Number of spatial dimensions (1 for the interval).
    atol, rtol : float
        Quadrature tolerances on the integral.
    method : {"gauss-legendre", "quadpack"}
    check : bool
        Scan ``h_U(i kappa, L)`` for negative modes first.

    Raises
    ------
    BoundStateError
        ``bc`` produces a negative mode at separation ``L``.
    """
    if not L > 0:
        raise ValidationError(f"L must be positive, got {L!r}")
    w = w_factor(d)
    if check:
        report = is_admissible(bc, L)
        if not report:
            raise BoundStateError(
                f"boundary condition has a negative mode at kappa = {report.zeros[0]!r} for L = {L!r}",
                kappa=report.zeros[0])
    single = infinity_zeros(bc)
    if single:
        raise BoundStateError(
            f"each plate binds a surface state at kappa = {single[0]!r}; the infinite-separation "
            "subtraction is singular there", kappa=single[0])
    d = float(d)

    def f(kappa):
        return kappa ** d * bracket_plates(bc, kappa, L)

    q = _integrate(f, _plate_rate(bc, L), d + 1, method, atol, rtol)
    return _result(q, -w, rate=_plate_rate(bc, L), method=method)


def regulated_plate_energy(bc: BoundaryCondition, L: float, L0: float, d: float = 1, *,
                           rescale: bool = False, atol: float = 1e-14,
                           rtol: float = 1e-12) -> EnergyResult:
    """Plate energy from a finite reference separation ``L0`` instead of the infinite limit.

    Integrates ``kappa^D [b(L) - b(L0)]`` where ``b(X) = X - d log h_U(i kappa, X)``,
    which equals ``E(L) - E(L0)`` and tends to :func:`plate_energy` as ``L0``
    grows.  With ``rescale`` the difference is multiplied by
    ``L0^D / (L0^D - L^D)``, which is exact for scale-free boundary
    conditions (Dirichlet, Neumann, quasi-periodic).  Meant as a cross-check.
    """
    if not (L > 0 and L0 > L):
        raise ValidationError("need 0 < L < L0")
    w = w_factor(d)
    d = float(d)

    def f(kappa):
        far = regulated_log_derivative(bc, kappa, L0)
        diff = far - regulated_log_derivative(bc, kappa, L)
        # both terms carry roundoff of order eps (L0 + |d log h|)
        noise = 8 * EPS * kappa ** d * (L0 + np.abs(far))
        return kappa ** d * np.real(diff), noise

    q = _integrate(f, _plate_rate(bc, L), d + 1, "gauss-legendre", atol, rtol)
    factor = -w * (L0 ** d / (L0 ** d - L ** d) if rescale else 1.0)
    return _result(q, factor, L0=L0, rescale=rescale)


def _phi_log_derivative_fd(v, kappa, theta, L):
    """d/dkappa log|Phi(i kappa)| by a 4th-order central stencil with a Richardson check.

    The step is ``h = max(1e-5, 1e-4 kappa)``.  Where that would reach within
    ``4h`` of the origin the stencil runs in ``log kappa`` instead, since
    ``log Phi`` behaves like ``log kappa`` there.  Returns the derivative and
    an absolute error estimate (truncation gap plus roundoff).
    """
    el = v.elements()
    w = v.support_width
    kappa = np.asarray(kappa, dtype=float)

    def logphi(x):
        return np.log(np.abs(_pykernels.comb_phi(el, x, theta, L, w)))

    def stencil(F, x, h):
        return (8 * (F(x + h) - F(x - h)) - (F(x + 2 * h) - F(x - 2 * h))) / (12 * h)

    h = np.maximum(1e-5, 1e-4 * kappa)
    logstep = 4 * h > 0.5 * kappa
    hs = 1e-3
    s = np.log(kappa)
    in_s = lambda y: logphi(np.exp(y))  # noqa: E731
    fine = np.where(logstep, stencil(in_s, s, hs) / kappa, stencil(logphi, kappa, h))
    coarse = np.where(logstep, stencil(in_s, s, 2 * hs) / kappa, stencil(logphi, kappa, 2 * h))
    step = np.where(logstep, hs * kappa, h)
    roundoff = 4 * EPS * (np.abs(logphi(kappa)) + 1.0) / step
    return fine + (fine - coarse) / 15, np.abs(fine - coarse) / 15 + roundoff


def comb_integrand(v: Potential, kappa, theta: float, L: float, derivative: str = "analytic"):
    """Real cell-energy bracket ``-L + d log f_theta(i kappa) + d log t(i kappa)``."""
    kappa = np.asarray(kappa, dtype=float)
    if derivative == "analytic":
        val = _backend.comb_integrand(v.elements(), kappa, float(theta), float(L), float(v.support_width))
        resid = np.abs(val.imag)
        if np.any(resid > 1e-8 * np.abs(val) + 1e-12 * L):
            raise SingularPointError("cell bracket is not real; f_theta or t vanishes on the imaginary axis")
        return val.real
    if derivative == "finite-difference":
        return _phi_log_derivative_fd(v, kappa, theta, L)[0]
    raise ValidationError(f"derivative must be 'analytic' or 'finite-difference', got {derivative!r}")


def _comb_rate(v, L):
    # the cos(theta) term decays like e^{-kappa L}; reflection like e^{-2 kappa (L - w)}
    return min(L, 2 * (L - v.support_width))


def cell_energy_theta(v, L: float, theta: float, *, derivative: str = "analytic",
                      method: str = "gauss-legendre", atol: float = 1e-14, rtol: float = 1e-12,
                      check: bool = True) -> EnergyResult:
    """Vacuum energy of one comb cell at Bloch angle ``theta``.

    Parameters
    ----------
    v : Potential or str
        Unit-cell potential (grammar strings are parsed).
    derivative : {"analytic", "finite-difference"}
        How d log f_theta is obtained.  The analytic route differentiates the
        transfer matrix in closed form; finite differences are kept as a
        cross-check; their roundoff estimate feeds the quadrature's noise floor.
    check : bool
        Scan for bound states before integrating.
    """
    v = as_potential(v)
    _check_cell(v, L)
    if check:
        require_no_bound_states(v, L)

    def f(kappa):
        if derivative == "finite-difference":
            val, err = _phi_log_derivative_fd(v, kappa, theta, L)
            return kappa * val, kappa * err
        return kappa * comb_integrand(v, kappa, theta, L, derivative)

    q = _integrate(f, _comb_rate(v, L), 2.0, method, atol, rtol)
    return _result(q, w_factor(1), theta=theta, derivative=derivative, method=method)


def _theta_rule(fn, a, b, n):
    val, _ = gauss_legendre_fixed(fn, a, b, n)
    return val


def comb_energy(v, L: float, *, theta_tol: float = 1e-8, max_depth: int = 6,
                derivative: str = "analytic", method: str = "gauss-legendre",
                atol: float = 1e-14, rtol: float = 1e-12) -> EnergyResult:
    """Comb energy per cell: (1/pi) int_0^pi E(theta) dtheta, using E(theta) = E(-theta).

    Each theta interval is integrated with 64- and 32-point Gauss-Legendre
    rules; intervals whose two values differ by more than ``theta_tol`` (scaled
    to the interval's share) are bisected.
    """
    v = as_potential(v)
    _check_cell(v, L)
    require_no_bound_states(v, L)
    cache: dict[float, EnergyResult] = {}

    def e_theta(th):
        th = float(th)
        if th not in cache:
            cache[th] = cell_energy_theta(v, L, th, derivative=derivative, method=method,
                                          atol=atol, rtol=rtol, check=False)
        return cache[th].value

    total, err = 0.0, 0.0
    stack = [(0.0, math.pi, 0)]
    while stack:
        a, b, depth = stack.pop()
        hi = _theta_rule(e_theta, a, b, 64)
        lo = _theta_rule(e_theta, a, b, 32)
        gap = abs(hi - lo) / math.pi
        if gap <= theta_tol * (b - a) / math.pi or depth >= max_depth:
            total += hi
            err += gap
        else:
            m = 0.5 * (a + b)
            stack += [(m, b, depth + 1), (a, m, depth + 1)]
    quad_err = sum(r.abs_error_estimate for r in cache.values()) / max(len(cache), 1)
    n_evals = sum(r.n_evaluations for r in cache.values())
    return EnergyResult(total / math.pi, err + quad_err, max(r.k_truncation for r in cache.values()),
                        n_evals, {"n_theta": len(cache), "theta_gap": err})
