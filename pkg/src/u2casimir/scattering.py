"""Compact-support unit-cell potentials and their scattering data.

A potential is a left-to-right list of elements (constant slabs and point
interactions) centred on the origin.  Its transfer matrix maps
``(psi, psi')`` at the left edge of the support to the right edge.  The
scattering amplitudes follow from the asymptotics

    psi = e^{ikx} + r_L e^{-ikx}  (left),   psi = t e^{ikx}  (right)

for a wave incident from the left, and symmetrically for ``r_R``.
Closed forms are evaluated directly at complex ``k``, so the imaginary axis
``k = i kappa`` needs no continuation of real-axis data.
"""
from __future__ import annotations

import ast
import math
import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import _pykernels
from ._scan import NOISE, near_touches, refine, sign_brackets
from .errors import (BoundStateError, SingularMatchingError, SingularPointError,
                     ValidationError)

SLAB, POINT = _pykernels.SLAB, _pykernels.POINT


class Potential:
    """Base class; subclasses provide :meth:`elements` and ``support_width``."""

    support_width: float = 0.0
    even: bool = True

    def elements(self) -> np.ndarray:
        raise NotImplementedError

    def grammar(self) -> str:
        raise NotImplementedError


def _slab_row(V, a):
    return [SLAB, float(V), float(a), 0.0, 0.0, 0.0, 0.0]


def _point_row(m):
    return [POINT, 0.0, 0.0, m[0][0], m[0][1], m[1][0], m[1][1]]


@dataclass(frozen=True)
class Free(Potential):
    def elements(self):
        return np.zeros((0, 7))

    def grammar(self):
        return "free"


@dataclass(frozen=True)
class Delta(Potential):
    """w0 * delta(x): psi continuous, psi' jumps by w0 psi(0)."""

    w0: float

    def elements(self):
        return np.array([_point_row([[1.0, 0.0], [self.w0, 1.0]])])

    def grammar(self):
        return f"delta:w0={self.w0!r}"


@dataclass(frozen=True)
class DeltaPrime(Potential):
    """w0 delta(x) + 2 w1 delta'(x) as a point interaction.

    The matching matrix is

        [[(1 + w1)/(1 - w1), 0], [w0/(1 - w1^2), (1 - w1)/(1 + w1)]]

    (``convention="standard"``); ``convention="reversed"`` flips the sign of
    w1, i.e. reflects the potential.  Both give the same transmission and the
    same Bloch dispersion.
    """

    w0: float
    w1: float
    convention: str = "standard"

    def __post_init__(self):
        if self.convention not in ("standard", "reversed"):
            raise ValidationError(f"unknown delta' convention {self.convention!r}")
        if abs(abs(self.w1) - 1.0) < 1e-12:
            raise SingularMatchingError(f"delta-delta' matching is singular at w1 = {self.w1!r}")

    @property
    def even(self):
        return self.w1 == 0.0

    def matching_matrix(self):
        w0 = self.w0
        w1 = self.w1 if self.convention == "standard" else -self.w1
        return [[(1 + w1) / (1 - w1), 0.0], [w0 / (1 - w1 * w1), (1 - w1) / (1 + w1)]]

    def elements(self):
        return np.array([_point_row(self.matching_matrix())])

    def grammar(self):
        g = f"ddp:w0={self.w0!r},w1={self.w1!r}"
        return g if self.convention == "standard" else g + ",convention=reversed"


@dataclass(frozen=True)
class SquareBarrier(Potential):
    height: float
    width: float

    def __post_init__(self):
        if self.width < 0:
            raise ValidationError(f"barrier width must be non-negative, got {self.width!r}")

    @property
    def support_width(self):
        return float(self.width)

    def elements(self):
        return np.array([_slab_row(self.height, self.width)])

    def grammar(self):
        return f"barrier:v0={self.height!r},a={self.width!r}"


@dataclass(frozen=True)
class PiecewiseConstant(Potential):
    """Consecutive slabs ``[(value, width), ...]`` listed left to right."""

    pieces: tuple = field(default_factory=tuple)

    def __post_init__(self):
        pieces = tuple((float(v), float(a)) for v, a in self.pieces)
        if any(a < 0 for _, a in pieces):
            raise ValidationError("piece widths must be non-negative")
        object.__setattr__(self, "pieces", pieces)

    @property
    def support_width(self):
        return float(sum(a for _, a in self.pieces))

    @property
    def even(self):
        return self.pieces == self.pieces[::-1]

    def elements(self):
        if not self.pieces:
            return np.zeros((0, 7))
        return np.array([_slab_row(v, a) for v, a in self.pieces])

    def grammar(self):
        return "pwc:[" + ",".join(f"({v!r},{a!r})" for v, a in self.pieces) + "]"


_KV = re.compile(r"^\s*([A-Za-z_]\w*)\s*=\s*(.+?)\s*$")


def parse_potential(text: str) -> Potential:
    """Parse ``free``, ``delta:w0=..``, ``ddp:w0=..,w1=..``, ``barrier:v0=..,a=..``, ``pwc:[(v,a),...]``."""
    text = text.strip()
    name, _, rest = text.partition(":")
    name = name.strip().lower()
    if name == "free":
        if rest.strip():
            raise ValidationError("'free' takes no parameters")
        return Free()
    if name == "pwc":
        try:
            pieces = ast.literal_eval(rest.strip())
            return PiecewiseConstant(tuple((float(v), float(a)) for v, a in pieces))
        except (ValueError, SyntaxError, TypeError) as exc:
            raise ValidationError(f"bad piecewise-constant list {rest!r}") from exc
    kw = {}
    for part in filter(None, (p.strip() for p in rest.split(","))):
        m = _KV.match(part)
        if not m:
            raise ValidationError(f"bad potential parameter {part!r}")
        kw[m.group(1).lower()] = m.group(2)

    def num(key):
        if key not in kw:
            raise ValidationError(f"potential {name!r} requires {key}=<value>")
        try:
            return float(kw.pop(key))
        except ValueError as exc:
            raise ValidationError(f"{key} must be a number") from exc

    if name == "delta":
        pot = Delta(num("w0"))
    elif name == "ddp":
        w0, w1 = num("w0"), num("w1")
        pot = DeltaPrime(w0, w1, kw.pop("convention", "standard"))
    elif name == "barrier":
        pot = SquareBarrier(num("v0"), num("a"))
    else:
        raise ValidationError(f"unknown potential {name!r}")
    if kw:
        raise ValidationError(f"unexpected parameters for {name}: {sorted(kw)}")
    return pot


def _check_k(k):
    k = np.asarray(k, dtype=complex)
    if np.any(k == 0):
        raise ValidationError("k = 0 is not allowed")
    return k


def transfer_matrix(v: Potential, k) -> np.ndarray:
    """(psi, psi') transfer matrix across the support of ``v`` at momentum ``k``."""
    k = _check_k(k)
    m, _, sigma = _pykernels.propagate(v.elements(), k)
    return np.exp(sigma) * m


def _amplitudes(v: Potential, k):
    """t, r_L, r_R and the scaled denominator on an array of complex k."""
    k = _check_k(k)
    m, _, sigma = _pykernels.propagate(v.elements(), k)
    w = v.support_width
    tr = m[0, 0] + m[1, 1]
    D = 1j * k * tr + k * k * m[0, 1] - m[1, 0]
    scale = np.abs(k * tr) + np.abs(k * k * m[0, 1]) + np.abs(m[1, 0])
    with np.errstate(divide="ignore", invalid="ignore"):
        t = 2j * k * np.exp(-1j * k * w - sigma) / D
        rr = np.exp(-1j * k * w) * (1j * k * (m[0, 0] - m[1, 1]) + k * k * m[0, 1] + m[1, 0]) / D
        rl = np.exp(-1j * k * w) * (1j * k * (m[1, 1] - m[0, 0]) + k * k * m[0, 1] + m[1, 0]) / D
    return t, rl, rr, D, scale


@dataclass(frozen=True)
class ScatteringData:
    k: complex
    t: complex
    r_l: complex
    r_r: complex


def scattering_data(v: Potential, k: complex) -> ScatteringData:
    """Transmission and reflection amplitudes at a single (complex) momentum.

    A vanishing denominator is a transmission pole, i.e. a bound state when
    ``k`` lies on the positive imaginary axis.
    """
    t, rl, rr, D, scale = _amplitudes(v, np.array([k]))
    if abs(D[0]) <= NOISE * scale[0] or not np.isfinite(t[0]):
        raise BoundStateError(f"transmission pole at k = {k!r}", kappa=complex(k).imag)
    return ScatteringData(complex(k), complex(t[0]), complex(rl[0]), complex(rr[0]))


def _check_cell(v, L):
    if L <= 0:
        raise ValidationError(f"L must be positive, got {L!r}")
    if v.support_width >= L:
        raise ValidationError(f"support width {v.support_width!r} must be smaller than the cell length {L!r}")


def f_theta(v: Potential, k, theta: float, L: float):
    """Bloch secular function cos(theta) - [e^{-ikL} + e^{ikL}(t^2 - r_R r_L)] / (2t)."""
    _check_cell(v, L)
    kk = np.atleast_1d(np.asarray(k, dtype=complex))
    t, rl, rr, _, _ = _amplitudes(v, kk)
    if np.any(t == 0) or not np.all(np.isfinite(t)):
        raise SingularPointError("transmission amplitude vanishes or diverges")
    out = math.cos(theta) - (np.exp(-1j * kk * L) + np.exp(1j * kk * L) * (t * t - rr * rl)) / (2 * t)
    return out if np.ndim(k) else complex(out[0])


def half_trace(v: Potential, k, L: float):
    """g(k) with cos(theta) = g(k) on the Bloch spectrum; real for real k."""
    return math.cos(0.0) - f_theta(v, k, 0.0, L)


@dataclass
class BandStructure:
    bands: list  # [(k_lo, k_hi), ...]
    dispersion: list  # [(k samples, theta samples), ...] with theta in [0, pi]

    def edges(self):
        return [e for band in self.bands for e in band]


def band_structure(v: Potential, L: float, k_max: float, n_grid: int | None = None,
                   samples_per_band: int = 64) -> BandStructure:
    """Allowed bands |g(k)| <= 1 on (0, k_max] with edges refined to |g| = 1."""
    _check_cell(v, L)
    if k_max <= 0:
        raise ValidationError("k_max must be positive")
    n_grid = n_grid or max(4000, int(128 * k_max * L / math.pi))
    h = k_max / n_grid
    nodes = (np.arange(n_grid) + 0.381966011250105) * h
    grid = np.concatenate([[min(1e-6 / L, nodes[0] / 2)], nodes[nodes < k_max], [k_max]])

    def g(k):
        return np.real(half_trace(v, np.asarray(k, dtype=float), L))

    vals = g(grid)
    floor = 1e-13 * np.maximum(1.0, np.abs(vals))
    events = []  # (k, +1 entering band / -1 leaving band)
    for level in (1.0, -1.0):
        diff = vals - level
        for i, j in sign_brackets(diff, floor):
            k0 = refine(lambda x: float(g(np.array([x]))[0]) - level, grid[i], grid[j], xtol=1e-15)
            # |g| decreasing through the level means entering a band
            entering = (abs(vals[j]) < abs(vals[i]))
            events.append((k0, 1 if entering else -1))
    # narrow gaps that open between two samples that are both inside a band
    mag = np.abs(vals)
    for i in range(1, len(grid) - 1):
        if mag[i] >= mag[i - 1] and mag[i] >= mag[i + 1] and 1 - 1e-2 < mag[i] <= 1.0:
            sgn = np.sign(vals[i])
            res = minimize_scalar(lambda x: -sgn * float(g(np.array([x]))[0]),
                                  bracket=(grid[i - 1], grid[i], grid[i + 1]), tol=1e-12)
            peak = -res.fun
            if peak > 1.0 + 1e-12 and grid[i - 1] < res.x < grid[i + 1]:
                f = lambda x: sgn * float(g(np.array([x]))[0]) - 1.0
                events.append((refine(f, grid[i - 1], res.x, xtol=1e-15), -1))
                events.append((refine(f, res.x, grid[i + 1], xtol=1e-15), 1))
    events.sort()
    inside = mag[0] <= 1.0 + 1e-13
    bands, start = [], (0.0 if inside else None)
    for k0, kind in events:
        if kind == 1 and start is None:
            start = k0
        elif kind == -1 and start is not None:
            bands.append((start, k0))
            start = None
    if start is not None:
        bands.append((start, float(k_max)))
    dispersion = []
    for lo, hi in bands:
        ks = np.linspace(max(lo, grid[0]), hi, samples_per_band)
        dispersion.append((ks, np.arccos(np.clip(g(ks), -1.0, 1.0))))
    return BandStructure(bands, dispersion)


@dataclass
class BoundStateReport:
    ok: bool
    zeros: list
    near_zeros: list
    warning: bool

    def __bool__(self):
        return self.ok


def _inverse_t_imag(v, kappa):
    """Real function with the sign and zeros of 1/t(i kappa), and its noise scale."""
    kappa = np.asarray(kappa, dtype=float)
    _, _, _, D, scale = _amplitudes(v, 1j * kappa)
    # 1/t(i kappa) = -e^{sigma - kappa w} D / (2 kappa); positive factors dropped
    return -D.real, scale


def assert_no_bound_states(v: Potential, kappa_max: float = 50.0, n_grid: int = 4000,
                           kappa_min: float = 1e-6) -> BoundStateReport:
    """True iff 1/t(i kappa) has no zero on (kappa_min, kappa_max]."""
    if kappa_max <= 0:
        raise ValidationError("kappa_max must be positive")
    grid = np.geomspace(kappa_min, kappa_max, n_grid)
    vals, scale = _inverse_t_imag(v, grid)
    floor = NOISE * scale
    zeros = [refine(lambda x: float(_inverse_t_imag(v, np.array([x]))[0][0]), grid[i], grid[j], xtol=1e-15)
             for i, j in sign_brackets(vals, floor)]
    near = [float(grid[i]) for i in near_touches(vals, scale, 1e-8, floor)]
    return BoundStateReport(not zeros, zeros, near, bool(near))


def require_no_bound_states(v: Potential, L: float) -> None:
    report = assert_no_bound_states(v, kappa_max=50.0 / L)
    if not report:
        raise BoundStateError(f"potential {v.grammar()} has a bound state at kappa = {report.zeros[0]!r}",
                              kappa=report.zeros[0])


def as_potential(v) -> Potential:
    return parse_potential(v) if isinstance(v, str) else v


def pieces_from(values: Sequence[float], widths: Sequence[float]) -> PiecewiseConstant:
    return PiecewiseConstant(tuple(zip(values, widths)))
