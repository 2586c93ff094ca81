"""Command-line front end.

Subcommands ``plates``, ``comb``, ``bands``, ``spectrum`` and ``sweep``
share ``--L --D --tol --out --format --jobs``.  A flat INI file given with
``--config`` supplies defaults; flags on the command line override it.

Exit status: 0 on success, 2 for invalid input, 3 when the physical setup
is not admissible (bound state, singular point), 4 when a numerical routine
fails to converge.  Errors print one line ``u2casimir: error: <kind>: <reason>``.
"""
from __future__ import annotations

import argparse
import ast
import configparser
import csv
import dataclasses
import io
import itertools
import json
import math
import operator
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .boundary import BoundaryCondition, BoundaryParams, build_unitary, quasi_periodic
from .energy import cell_energy_theta, comb_energy, plate_energy
from .errors import CasimirError, PhysicsError, ValidationError
from .scattering import Delta, DeltaPrime, SquareBarrier, band_structure, half_trace, parse_potential
from .spectral import h_u_scaled, real_spectrum

SCHEMA = "u2casimir-output/1"
MODES = ("plates", "comb", "bands", "spectrum", "sweep")
EXIT_OK, EXIT_VALIDATION, EXIT_PHYSICS, EXIT_NUMERICS = 0, 2, 3, 4

# ---------------------------------------------------------------- parsing helpers

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.Pow: operator.pow, ast.USub: operator.neg,
        ast.UAdd: operator.pos}
_NAMES = {"pi": math.pi, "e": math.e, "tau": 2 * math.pi}


def real_expr(text) -> float:
    """Evaluate a numeric expression such as ``3*pi/2`` without ``eval``."""
    if isinstance(text, (int, float)):
        return float(text)

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ValueError
    try:
        val = ev(ast.parse(str(text).strip(), mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError, OverflowError):
        raise ValidationError(f"not a number: {text!r}") from None
    if not math.isfinite(val):
        raise ValidationError(f"not a finite number: {text!r}")
    return val


def number(text) -> float:
    """argparse type for :func:`real_expr`."""
    return real_expr(text)


def complex_entry(text: str) -> complex:
    """Parse ``re+imi`` style complex numbers: ``1``, ``-0.5+0.5i``, ``i``, ``-i``, ``2i``."""
    s = text.strip().replace(" ", "")
    if not s:
        raise ValidationError("empty matrix entry")
    if s.endswith("i"):
        body = s[:-1]
        # split at the last sign that is not part of an exponent
        cut = max((k for k, ch in enumerate(body) if ch in "+-" and k > 0 and body[k - 1] not in "eE"),
                  default=0)
        re_part, im_part = (body[:cut], body[cut:]) if cut else ("", body)
        if im_part in ("", "+"):
            im_part = "1"
        elif im_part == "-":
            im_part = "-1"
        return complex(real_expr(re_part) if re_part else 0.0, real_expr(im_part))
    return complex(real_expr(s), 0.0)


def parse_matrix(text: str) -> np.ndarray:
    """``"a,b;c,d"`` to a 2x2 complex array."""
    rows = [r for r in text.split(";")]
    cells = [[complex_entry(c) for c in r.split(",")] for r in rows]
    if len(cells) != 2 or any(len(r) != 2 for r in cells):
        raise ValidationError(f"matrix must be 'a,b;c,d', got {text!r}")
    return np.array(cells, dtype=complex)


def parse_axis(text: str):
    """``name=lo:hi:count`` to ``(name, lo, hi, count)``."""
    name, sep, rng = text.partition("=")
    parts = rng.split(":")
    if not sep or len(parts) != 3:
        raise ValidationError(f"sweep axis must be name=lo:hi:count, got {text!r}")
    try:
        count = int(parts[2])
    except ValueError:
        raise ValidationError(f"sweep count must be an integer in {text!r}") from None
    return (name.strip(), real_expr(parts[0]), real_expr(parts[1]), count)


# ---------------------------------------------------------------- job description

_POTENTIAL_KEYS = {Delta: {"w0": "w0"}, DeltaPrime: {"w0": "w0", "w1": "w1"},
                   SquareBarrier: {"v0": "height", "a": "width"}}
_GEOMETRY_AXES = ("L", "D", "alpha", "beta", "n1", "n2", "n3", "theta")


@dataclass
class JobSpec:
    """Everything needed to reproduce one CLI run."""

    mode: str
    L: float = 1.0
    D: float = 1.0
    tol: float = 1e-12
    alpha: Optional[float] = None
    beta: Optional[float] = None
    n1: Optional[float] = None
    n2: Optional[float] = None
    n3: Optional[float] = None
    matrix: Optional[str] = None
    theta: Optional[float] = None
    potential: str = "free"
    kmax: float = 20.0
    over: str = "plates"
    axes: list = field(default_factory=list)  # [(name, lo, hi, count)]
    method: str = "gauss-legendre"
    derivative: str = "analytic"
    out: Optional[str] = None
    format: str = "csv"
    jobs: int = 1

    # -- validation

    def validate(self) -> "JobSpec":
        if self.mode not in MODES:
            raise ValidationError(f"unknown mode {self.mode!r}")
        if not self.L > 0:
            raise ValidationError(f"L must be positive, got {self.L!r}")
        if not self.D >= 1:
            raise ValidationError(f"D must be >= 1, got {self.D!r}")
        if not self.tol > 0:
            raise ValidationError(f"tol must be positive, got {self.tol!r}")
        if self.format not in ("csv", "json"):
            raise ValidationError(f"format must be csv or json, got {self.format!r}")
        if self.jobs < 1:
            raise ValidationError("jobs must be >= 1")
        if self.kmax <= 0:
            raise ValidationError("kmax must be positive")
        if self.mode == "sweep":
            if self.over not in ("plates", "comb"):
                raise ValidationError(f"sweep runs over plates or comb, got {self.over!r}")
            if not self.axes:
                raise ValidationError("sweep needs at least one --vary axis")
            names = [a[0] for a in self.axes]
            if len(set(names)) != len(names):
                raise ValidationError("sweep axes must be distinct")
            allowed = set(_GEOMETRY_AXES) | set(self._potential_keys())
            for name, lo, hi, count in self.axes:
                if name not in allowed:
                    raise ValidationError(f"sweep axis {name!r} is not a parameter of this job "
                                          f"(choose from {sorted(allowed)})")
                if count < 1 or (count > 1 and lo == hi):
                    raise ValidationError(f"sweep axis {name!r} has a degenerate range")
        sources = [self.alpha is not None or self.beta is not None
                   or any(n is not None for n in (self.n1, self.n2, self.n3)),
                   self.matrix is not None]
        if self.mode != "comb" and self.mode != "bands":
            sources.append(self.theta is not None)
        if sum(sources) > 1:
            raise ValidationError("give the boundary as --alpha/--beta/--n*, --matrix or --theta, not several")
        parse_potential(self.potential)
        return self

    def _potential_keys(self):
        pot = parse_potential(self.potential)
        return list(_POTENTIAL_KEYS.get(type(pot), {}))

    # -- physics objects

    def boundary(self) -> BoundaryCondition:
        if self.matrix is not None:
            return BoundaryCondition(parse_matrix(self.matrix))
        if self.theta is not None and self.alpha is None and self.beta is None:
            return quasi_periodic(self.theta)
        if self.alpha is None or self.beta is None:
            raise ValidationError("boundary needs --alpha and --beta (with --n1 --n2 --n3), --matrix or --theta")
        n = tuple(0.0 if x is None else x for x in (self.n1, self.n2, self.n3))
        if all(x is None for x in (self.n1, self.n2, self.n3)):
            n = (0.0, 0.0, 1.0)
        return build_unitary(BoundaryParams(self.alpha, self.beta, n))

    def potential_model(self):
        return parse_potential(self.potential)

    # -- INI round trip

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        job = {}
        for f in dataclasses.fields(self):
            if f.name == "axes":
                continue
            val = getattr(self, f.name)
            if val is not None:
                job[f.name] = repr(val) if isinstance(val, float) else str(val)
        cp["job"] = job
        if self.axes:
            cp["sweep"] = {name: f"{lo!r}:{hi!r}:{count}" for name, lo, hi, count in self.axes}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text: str, mode: Optional[str] = None) -> "JobSpec":
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ValidationError(f"bad config file: {str(exc).splitlines()[0]}") from None
        values = dict(cp["job"]) if cp.has_section("job") else {}
        unknown = set(values) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ValidationError(f"unknown config keys {sorted(unknown)}")
        if mode is not None:
            values["mode"] = mode
        if "mode" not in values:
            raise ValidationError("config file does not name a mode")
        kwargs = {k: _coerce(k, v) for k, v in values.items()}
        if cp.has_section("sweep"):
            kwargs["axes"] = [parse_axis(f"{k}={v}") for k, v in cp["sweep"].items()]
        return cls(**kwargs)


_FLOAT_KEYS = {"L", "D", "tol", "alpha", "beta", "n1", "n2", "n3", "theta", "kmax"}


def _coerce(key, value):
    if key in _FLOAT_KEYS:
        return real_expr(value)
    if key == "jobs":
        try:
            return int(value)
        except ValueError:
            raise ValidationError(f"jobs must be an integer, got {value!r}") from None
    return value


# ---------------------------------------------------------------- evaluation


def _energy_row(job: JobSpec, which: str) -> dict:
    if which == "plates":
        res = plate_energy(job.boundary(), job.L, job.D, rtol=job.tol, method=job.method)
    elif job.theta is not None:
        res = cell_energy_theta(job.potential_model(), job.L, job.theta, rtol=job.tol,
                                method=job.method, derivative=job.derivative)
    else:
        res = comb_energy(job.potential_model(), job.L, rtol=job.tol, method=job.method,
                          derivative=job.derivative)
    return {"value": res.value, "abs_error": res.abs_error_estimate,
            "n_evals": res.n_evaluations, "k_truncation": res.k_truncation}


def _boundary_columns(job: JobSpec) -> dict:
    bc = job.boundary()
    p = bc.params
    return {"alpha": p.alpha, "beta": p.beta, "n1": p.n[0], "n2": p.n[1], "n3": p.n[2]}


def run_plates(job: JobSpec):
    row = {"L": job.L, "D": job.D, **_boundary_columns(job)}
    row.update(_energy_row(job, "plates"))
    return [row]


def run_comb(job: JobSpec):
    row = {"potential": job.potential_model().grammar(), "L": job.L,
           "theta": "" if job.theta is None else job.theta}
    row.update(_energy_row(job, "comb"))
    return [row]


def run_bands(job: JobSpec):
    pot = job.potential_model()
    bs = band_structure(pot, job.L, job.kmax)
    rows = []
    for i, (lo, hi) in enumerate(bs.bands):
        ends = [k for k in (lo, hi) if k > 0 and k < job.kmax]
        resid = max([abs(abs(float(np.real(half_trace(pot, k, job.L)))) - 1.0) for k in ends], default=0.0)
        rows.append({"band": i, "k_lo": lo, "k_hi": hi, "value": hi - lo, "abs_error": resid})
    return rows


def run_spectrum(job: JobSpec):
    bc = job.boundary()
    roots = real_spectrum(bc, job.L, job.kmax, multiplicities=True)
    rows = []
    for i, (k, mult) in enumerate(roots):
        h = abs(complex(h_u_scaled(bc, k, job.L)))
        rows.append({"index": i, "k": k, "multiplicity": mult, "value": k, "abs_error": h})
    return rows


def _apply_axis(job: JobSpec, name: str, value: float) -> JobSpec:
    if name in _GEOMETRY_AXES:
        return dataclasses.replace(job, **{name: value})
    pot = parse_potential(job.potential)
    pot = dataclasses.replace(pot, **{_POTENTIAL_KEYS[type(pot)][name]: value})
    return dataclasses.replace(job, potential=pot.grammar())


def sweep_points(job: JobSpec):
    grids = [(name, np.linspace(lo, hi, count)) for name, lo, hi, count in job.axes]
    for combo in itertools.product(*[g for _, g in grids]):
        point = dataclasses.replace(job, mode=job.over, axes=[])
        for (name, _), value in zip(grids, combo):
            point = _apply_axis(point, name, float(value))
        yield dict(zip([n for n, _ in grids], map(float, combo))), point


def _sweep_one(args):
    coords, point = args
    try:
        return {**coords, **_energy_row(point, point.mode), "status": "ok"}
    except PhysicsError as exc:
        nan = float("nan")
        return {**coords, "value": nan, "abs_error": nan, "n_evals": 0, "k_truncation": nan,
                "status": f"{type(exc).__name__}: {exc}"}


def run_sweep(job: JobSpec):
    points = list(sweep_points(job))
    for _, point in points:
        point.validate()
    if job.jobs == 1:
        return [_sweep_one(p) for p in points]
    with ProcessPoolExecutor(max_workers=job.jobs) as pool:
        # map yields in submission order, so rows stay in grid order
        return list(pool.map(_sweep_one, points, chunksize=max(1, len(points) // (4 * job.jobs))))


RUNNERS = {"plates": run_plates, "comb": run_comb, "bands": run_bands,
           "spectrum": run_spectrum, "sweep": run_sweep}


def run(job: JobSpec):
    """Validate and evaluate a job; returns its output rows."""
    job.validate()
    return RUNNERS[job.mode](job)


# ---------------------------------------------------------------- output


def render(job: JobSpec, rows) -> str:
    header = f"{SCHEMA} mode={job.mode}"
    if job.format == "json":
        doc = {"schema": SCHEMA, "mode": job.mode, "job": _job_dict(job), "rows": _finite_or_null(rows)}
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# {header}\n")
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def _finite_or_null(rows):
    """Strict JSON has no NaN or infinity; failed sweep points are written as null."""
    clean = lambda x: None if isinstance(x, float) and not math.isfinite(x) else x  # noqa: E731
    return [{k: clean(v) for k, v in row.items()} for row in rows]


def _job_dict(job: JobSpec) -> dict:
    d = dataclasses.asdict(job)
    d["axes"] = [list(a) for a in job.axes]
    d.pop("out")
    return d


# ---------------------------------------------------------------- argparse


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _fail("validation", message.replace("\n", " "), EXIT_VALIDATION)


def _fail(kind, message, code):
    sys.stderr.write(f"u2casimir: error: {kind}: {message}\n")
    raise SystemExit(code)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="u2casimir", description="Casimir energies for U(2) plates and 1D combs.")
    sub = parser.add_subparsers(dest="mode", parser_class=_Parser)

    shared = _Parser(add_help=False)
    g = shared.add_argument_group("shared")
    g.add_argument("--config", help="INI file with a [job] section; flags override it")
    g.add_argument("--L", type=number, help="plate separation or cell length")
    g.add_argument("--D", type=number, help="spatial dimension (plates)")
    g.add_argument("--tol", type=number, help="relative quadrature tolerance")
    g.add_argument("--out", help="output file (default: stdout)")
    g.add_argument("--format", choices=("csv", "json"))
    g.add_argument("--jobs", type=int, help="parallel workers for sweeps")
    g.add_argument("--method", choices=("gauss-legendre", "quadpack"))

    bnd = _Parser(add_help=False)
    b = bnd.add_argument_group("boundary")
    for name in ("alpha", "beta", "n1", "n2", "n3"):
        b.add_argument(f"--{name}", type=number)
    b.add_argument("--matrix", help='unitary matrix "a,b;c,d" with entries like 0.5+0.5i')
    b.add_argument("--theta", type=number, help="quasi-periodic angle (plates) or Bloch angle (comb)")

    pot = _Parser(add_help=False)
    p = pot.add_argument_group("potential")
    p.add_argument("--potential", help="free | delta:w0=.. | ddp:w0=..,w1=.. | barrier:v0=..,a=.. | pwc:[(v,a),..]")
    p.add_argument("--derivative", choices=("analytic", "finite-difference"))

    kmax = _Parser(add_help=False)
    kmax.add_argument("--kmax", type=number, help="largest momentum scanned")

    sub.add_parser("plates", parents=[shared, bnd], help="plate energy per unit area")
    sub.add_parser("comb", parents=[shared, bnd, pot], help="comb energy per cell (or one Bloch angle)")
    sub.add_parser("bands", parents=[shared, pot, kmax], help="allowed bands of the comb")
    sub.add_parser("spectrum", parents=[shared, bnd, kmax], help="real spectrum between the plates")
    sw = sub.add_parser("sweep", parents=[shared, bnd, pot], help="energies over a parameter grid")
    sw.add_argument("--over", choices=("plates", "comb"))
    sw.add_argument("--vary", action="append", type=str, metavar="NAME=LO:HI:COUNT")
    return parser


def job_from_args(args) -> JobSpec:
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                job = JobSpec.from_ini(fh.read(), mode=args.mode)
        except OSError as exc:
            raise ValidationError(f"cannot read config {args.config!r}: {exc.strerror}") from None
    else:
        job = JobSpec(mode=args.mode)
    updates = {}
    for f in dataclasses.fields(JobSpec):
        if f.name in ("mode", "axes"):
            continue
        val = getattr(args, f.name, None)
        if val is not None:
            updates[f.name] = val
    if getattr(args, "vary", None):
        updates["axes"] = [parse_axis(v) for v in args.vary]
    return dataclasses.replace(job, **updates)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.mode is None:
        _fail("validation", "a subcommand is required: " + ", ".join(MODES), EXIT_VALIDATION)
    try:
        job = job_from_args(args)
        text = render(job, run(job))
    except ValidationError as exc:
        _fail("validation", str(exc), EXIT_VALIDATION)
    except PhysicsError as exc:
        _fail("physics", f"{type(exc).__name__}: {exc}", EXIT_PHYSICS)
    except CasimirError as exc:
        _fail("numerics", f"{type(exc).__name__}: {exc}", EXIT_NUMERICS)
    if job.out:
        with open(job.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
