"""U(2) boundary conditions for -d^2/dx^2 on the interval [0, L].

A boundary condition is a 2x2 unitary ``U`` relating the boundary data

    (f(0) + i f'(0), f(L) - i f'(L)) = U (f(0) - i f'(0), f(L) + i f'(L)),

with the boundary length scale fixed to one.  Matrices are either built from
the angles ``(alpha, beta, n)`` through

    U = exp(i alpha) [cos(beta) I + i sin(beta) (n . sigma)]

or supplied directly and validated for unitarity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ValidationError

TWO_PI = 2.0 * math.pi

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

UNIT_TOL = 1e-12
UNITARY_TOL = 1e-10


@dataclass(frozen=True)
class BoundaryParams:
    """Angles of the standard U(2) parametrisation.

    ``alpha`` is reduced mod 2*pi into [0, 2*pi); ``beta`` must lie in
    [-pi/2, pi/2] and ``n`` must be a unit vector.
    """

    alpha: float
    beta: float
    n: tuple = (0.0, 0.0, 1.0)

    def __post_init__(self):
        n = tuple(float(c) for c in self.n)
        if len(n) != 3:
            raise ValidationError(f"n must have three components, got {len(n)}")
        norm = math.sqrt(sum(c * c for c in n))
        if abs(norm - 1.0) > UNIT_TOL:
            raise ValidationError(f"n must be a unit vector, |n| = {norm!r}")
        beta = float(self.beta)
        if not -math.pi / 2 - 1e-12 <= beta <= math.pi / 2 + 1e-12:
            raise ValidationError(f"beta must lie in [-pi/2, pi/2], got {beta!r}")
        alpha = math.fmod(float(self.alpha), TWO_PI)
        if alpha < 0.0:
            alpha += TWO_PI
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "n", n)


@dataclass(frozen=True)
class BoundaryCondition:
    """A validated unitary boundary matrix with cached det and trace."""

    u: np.ndarray
    det_u: complex = field(init=False)
    tr_u: complex = field(init=False)
    params: Optional[BoundaryParams] = None

    def __post_init__(self):
        u = np.array(self.u, dtype=complex)
        if u.shape != (2, 2):
            raise ValidationError(f"boundary matrix must be 2x2, got shape {u.shape}")
        if not np.all(np.isfinite(u)):
            raise ValidationError("boundary matrix has non-finite entries")
        defect = np.max(np.abs(u.conj().T @ u - np.eye(2)))
        if defect > UNITARY_TOL:
            raise ValidationError(f"boundary matrix is not unitary (defect {defect:.3e})")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        det = complex(u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0])
        # |det U| = 1 exactly; removing the roundoff in the modulus keeps
        # det U + 1 and det U - 1 + U12 + U21 free of spurious residues
        object.__setattr__(self, "det_u", det / abs(det))
        object.__setattr__(self, "tr_u", complex(u[0, 0] + u[1, 1]))
        if self.params is None:
            object.__setattr__(self, "params", params_from_matrix(u))

    @property
    def offdiag_sum(self) -> complex:
        """U_12 + U_21, the only off-diagonal combination entering h_U."""
        return complex(self.u[0, 1] + self.u[1, 0])

    @classmethod
    def from_matrix(cls, u) -> "BoundaryCondition":
        return cls(np.asarray(u, dtype=complex))

    def __eq__(self, other):
        if not isinstance(other, BoundaryCondition):
            return NotImplemented
        return bool(np.array_equal(self.u, other.u))

    def __hash__(self):
        return hash(self.u.tobytes())


def build_unitary(params: BoundaryParams) -> BoundaryCondition:
    """Build ``exp(i alpha)[cos(beta) I + i sin(beta) n.sigma]``."""
    if not isinstance(params, BoundaryParams):
        params = BoundaryParams(*params)
    n_sigma = sum(c * s for c, s in zip(params.n, PAULI))
    u = np.exp(1j * params.alpha) * (
        math.cos(params.beta) * np.eye(2) + 1j * math.sin(params.beta) * n_sigma
    )
    return BoundaryCondition(u, params=params)


def params_from_matrix(u) -> BoundaryParams:
    """Recover canonical ``(alpha, beta, n)`` with beta in [0, pi/2]."""
    u = np.asarray(u, dtype=complex)
    det = u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]
    phase = np.sqrt(det)
    su2 = u / phase
    # cos(beta) >= 0 selects the sign of the square root
    if (su2[0, 0] + su2[1, 1]).real < 0.0:
        phase = -phase
        su2 = -su2
    cos_beta = float(np.clip(0.5 * (su2[0, 0] + su2[1, 1]).real, -1.0, 1.0))
    rest = (su2 - cos_beta * np.eye(2)) / 1j
    vec = np.array([
        0.5 * (rest[0, 1] + rest[1, 0]).real,
        0.5 * (1j * (rest[0, 1] - rest[1, 0])).real,
        0.5 * (rest[0, 0] - rest[1, 1]).real,
    ])
    sin_beta = float(np.linalg.norm(vec))
    beta = math.atan2(sin_beta, cos_beta)
    n = (0.0, 0.0, 1.0)
    if sin_beta > 0.0:
        # rescale first so subnormal components still give a unit vector
        vec = vec / np.max(np.abs(vec))
        n = tuple(vec / np.linalg.norm(vec))
    return BoundaryParams(float(np.angle(phase)), beta, n)


def dirichlet() -> BoundaryCondition:
    return build_unitary(BoundaryParams(math.pi, 0.0))


def neumann() -> BoundaryCondition:
    return build_unitary(BoundaryParams(0.0, 0.0))


def quasi_periodic(theta: float) -> BoundaryCondition:
    """Bloch condition ``[[0, e^{i theta}], [e^{-i theta}, 0]]``."""
    u = np.array([[0.0, np.exp(1j * theta)], [np.exp(-1j * theta), 0.0]])
    params = BoundaryParams(1.5 * math.pi, 0.5 * math.pi, (math.cos(theta), -math.sin(theta), 0.0))
    return BoundaryCondition(u, params=params)


def robin(alpha: float) -> BoundaryCondition:
    """Same Robin condition ``f' = tan(alpha/2) f`` (inward) at both ends: U = e^{i alpha} I."""
    return build_unitary(BoundaryParams(alpha, 0.0))


def char_poly(bc: BoundaryCondition, z):
    """c_U(z) = det(U) - tr(U) z + z^2 = det(z I - U)."""
    z = np.asarray(z, dtype=complex)
    out = bc.det_u - bc.tr_u * z + z * z
    return complex(out) if out.ndim == 0 else out


@dataclass
class AdmissibilityReport:
    admissible: bool
    zeros: list
    near_zeros: list
    warning: bool
    max_imag_residual: float

    def __bool__(self):
        return self.admissible


def is_admissible(bc: BoundaryCondition, L: float, kappa_max: Optional[float] = None,
                  n_grid: int = 2000) -> AdmissibilityReport:
    """Numerically check that -d^2/dx^2 with condition ``bc`` has no negative modes.

    Scans h_U(i kappa, L) for zeros on a geometric grid between 1e-6/L and
    ``kappa_max`` (default 50/L).  A negative eigenvalue -kappa^2 shows up as
    such a zero.
    """
    from ._scan import NOISE, near_touches, refine, sign_brackets
    from .spectral import imag_axis_real_form

    if L <= 0:
        raise ValidationError(f"L must be positive, got {L!r}")
    kappa_max = 50.0 / L if kappa_max is None else float(kappa_max)
    if kappa_max <= 0:
        raise ValidationError(f"kappa_max must be positive, got {kappa_max!r}")
    grid = np.geomspace(1e-6 / L, kappa_max, n_grid)
    vals, resid, scale = imag_axis_real_form(bc, grid, L)
    zeros = []
    floor = NOISE * scale
    for i, j in sign_brackets(vals, floor):
        zeros.append(refine(lambda x: float(imag_axis_real_form(bc, np.array([x]), L)[0][0]),
                            grid[i], grid[j]))
    near = [float(grid[i]) for i in near_touches(vals, scale, 1e-8, floor)]
    return AdmissibilityReport(
        admissible=not zeros,
        zeros=zeros,
        near_zeros=near,
        warning=bool(near),
        max_imag_residual=float(np.max(resid / scale)),
    )


def random_params(rng: np.random.Generator) -> BoundaryParams:
    """Uniformly distributed angles; used by property tests and sweeps."""
    v = rng.normal(size=3)
    return BoundaryParams(rng.uniform(0, TWO_PI), rng.uniform(-math.pi / 2, math.pi / 2), tuple(v / np.linalg.norm(v)))


def random_admissible(rng: np.random.Generator, margin: float = 0.1) -> BoundaryCondition:
    """Random U whose eigenphases lie in [margin, pi - margin].

    Eigenvalues in the closed upper half of the unit circle keep each plate
    free of surface bound states, so the interval is admissible for every L
    (still confirmed case by case with :func:`is_admissible` by callers).
    """
    phases = rng.uniform(margin, math.pi - margin, size=2)
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return BoundaryCondition(q @ np.diag(np.exp(1j * phases)) @ q.conj().T)
