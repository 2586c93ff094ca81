"""Acceptance criteria, one test each; a PASS/FAIL line per criterion is printed in the summary."""
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, qp_oracle
from u2casimir.boundary import (dirichlet, is_admissible, neumann, quasi_periodic,
                                random_admissible, robin)
from u2casimir.energy import cell_energy_theta, comb_energy, plate_energy
from u2casimir.scattering import (Delta, DeltaPrime, Free, PiecewiseConstant, SquareBarrier,
                                  assert_no_bound_states, band_structure, scattering_data)
from u2casimir.spectral import infinity_log_derivative, regulated_log_derivative

# 0+ stands in for the theta -> 0 limit
THETA_GRID = [1e-9] + [j * math.pi / 12 for j in range(1, 17)]


def record(number, title, ok, detail):
    ACCEPTANCE_LINES.append(f"criterion {number} {'PASS' if ok else 'FAIL'}: {title} ({detail})")
    assert ok, f"{title}: {detail}"


def test_criterion_01_dirichlet_interval():
    err = abs(plate_energy(dirichlet(), 1.0, 1).value + math.pi / 24)
    record(1, "Dirichlet plates D=1 L=1 equal -pi/24", err < 1e-8, f"|err| = {err:.2e}")


def test_criterion_02_dirichlet_neumann_three_dimensions():
    target = -math.pi ** 2 / 1440
    errs = [abs(plate_energy(bc, 1.0, 3).value - target) for bc in (dirichlet(), neumann())]
    record(2, "Dirichlet and Neumann plates D=3 L=1 equal -pi^2/1440", max(errs) < 1e-8,
           f"|err| = {errs[0]:.2e}, {errs[1]:.2e}")


def test_criterion_03_quasi_periodic_plates():
    errs = [abs(plate_energy(quasi_periodic(th), 1.0).value - qp_oracle(th)) for th in THETA_GRID]
    limit_err = abs(plate_energy(quasi_periodic(THETA_GRID[0]), 1.0).value + math.pi / 6)
    worst = max(max(errs), limit_err)
    record(3, "quasi-periodic plates match the mode sum on 17 angles", worst < 1e-7,
           f"max |err| = {worst:.2e}")


def test_criterion_04_infinite_separation_limit():
    rng = np.random.default_rng(4)
    worst, monotone = 0.0, True
    for _ in range(20):
        bc = random_admissible(rng)
        kappa = rng.uniform(0.2, 5.0)
        target = infinity_log_derivative(bc, kappa)
        errs = [abs(regulated_log_derivative(bc, kappa, c / kappa) - target) for c in (5, 10, 20, 40)]
        monotone &= all(b < a for a, b in zip(errs, errs[1:]))
        worst = max(worst, errs[-1])
    record(4, "regulated log-derivative tends to the infinite-separation limit", worst < 1e-6 and monotone,
           f"max |err| at 40/kappa = {worst:.2e}, monotone = {monotone}")


def test_criterion_05_free_cell_equals_quasi_periodic_plates():
    errs = [abs(cell_energy_theta(Free(), 1.0, th).value - plate_energy(quasi_periodic(th), 1.0).value)
            for th in THETA_GRID]
    record(5, "free comb cell equals quasi-periodic plates on 17 angles", max(errs) < 1e-8,
           f"max |diff| = {max(errs):.2e}")


def test_criterion_06_free_comb_vanishes():
    vals = [comb_energy(Free(), L).value for L in (0.5, 1.0, 2.0)]
    worst = max(map(abs, vals))
    record(6, "free comb energy vanishes for L = 0.5, 1, 2", worst < 1e-8, f"max |E| = {worst:.2e}")


def kronig_penney_edges(w0, n_bands):
    """Band edges of cos k + (w0 / 2k) sin k = +-1 by plain bisection."""
    g = lambda k: math.cos(k) + w0 / (2 * k) * math.sin(k)  # noqa: E731
    edges = []
    ks = np.linspace(1e-6, (n_bands + 1) * math.pi, 200_000)
    for level in (1.0, -1.0):
        vals = np.array([g(k) - level for k in ks])
        for i in np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:])):
            a, b = ks[i], ks[i + 1]
            fa = g(a) - level
            while b - a > 1e-15 * b:
                m = 0.5 * (a + b)
                fm = g(m) - level
                if fm == 0.0:
                    a = b = m
                elif (fm > 0) == (fa > 0):
                    a, fa = m, fm
                else:
                    b = m
            edges.append(0.5 * (a + b))
    edges.sort()
    merged = [e for i, e in enumerate(edges) if i == 0 or e - edges[i - 1] > 1e-10]
    return merged[: 2 * n_bands]


def test_criterion_07_kronig_penney_band_edges():
    oracle = kronig_penney_edges(10.0, 4)
    bands = band_structure(Delta(10.0), 1.0, 4.5 * math.pi).bands[:4]
    found = [e for band in bands for e in band]
    err = max(abs(a - b) for a, b in zip(found, oracle)) if len(found) == len(oracle) else math.inf
    record(7, "Kronig-Penney band edges for w0 = 10 (first four bands)", err < 1e-8, f"max |err| = {err:.2e}")


def test_criterion_08_strong_coupling_limit():
    start = time.perf_counter()
    target = -math.pi / 24
    e3 = comb_energy(Delta(1e3), 1.0).value
    e4 = comb_energy(Delta(1e4), 1.0).value
    elapsed = time.perf_counter() - start
    r3, r4 = abs(e3 / target - 1), abs(e4 / target - 1)
    ok = r3 < 0.01 and r4 < r3 and elapsed < 60
    record(8, "delta comb tends to Dirichlet plates at strong coupling", ok,
           f"rel err {r3:.2e} at 1e3, {r4:.2e} at 1e4, {elapsed:.1f} s")


VARIANTS = [Free(), Delta(3.0), Delta(-2.0), DeltaPrime(2.0, 0.4), DeltaPrime(-1.0, -0.6),
            SquareBarrier(5.0, 0.3), SquareBarrier(-4.0, 0.2),
            PiecewiseConstant(((1.0, 0.1), (-3.0, 0.2), (6.0, 0.05)))]
REPULSIVE = [Free(), Delta(3.0), Delta(1e3), DeltaPrime(2.0, 0.4), SquareBarrier(5.0, 0.3),
             SquareBarrier(200.0, 0.01), PiecewiseConstant(((1.0, 0.1), (4.0, 0.2), (0.5, 0.05)))]


def test_criterion_09_scattering_unitarity():
    rng = np.random.default_rng(9)
    flux = 0.0
    for v in VARIANTS:
        for k in rng.uniform(0.01, 50.0, 200):
            s = scattering_data(v, k)
            flux = max(flux, abs(abs(s.t) ** 2 + abs(s.r_l) ** 2 - 1), abs(abs(s.t) ** 2 + abs(s.r_r) ** 2 - 1))
    imag = 0.0
    for v in REPULSIVE:
        for kappa in np.geomspace(1e-3, 50.0, 200):
            t = scattering_data(v, 1j * kappa).t
            imag = max(imag, abs(t.imag) / max(1.0, abs(t)))
    record(9, "flux conservation and real transmission on the imaginary axis", flux < 1e-10 and imag < 1e-10,
           f"max flux defect = {flux:.2e}, max |Im t| = {imag:.2e}")


def test_criterion_10_bound_state_detector():
    report = assert_no_bound_states(Delta(-5.0))
    located = (not report) and abs(report.zeros[0] - 2.5) < 1e-8
    comb_clean = all(assert_no_bound_states(v) for v in REPULSIVE)
    plates_clean = all(is_admissible(bc, L) for bc in (dirichlet(), neumann(), quasi_periodic(0.7),
                                                       robin(2 * math.atan(0.5)))
                       for L in (0.1, 1.0, 10.0))
    kappa = report.zeros[0] if report.zeros else math.nan
    record(10, "bound state of delta(-5) located, repulsive cases pass", located and comb_clean and plates_clean,
           f"kappa = {kappa:.12f}, repulsive clean = {comb_clean and plates_clean}")


def test_criterion_11_scaling_law():
    worst = 0.0
    for bc in (dirichlet(), neumann(), quasi_periodic(0.9)):
        for d in (1, 2, 3):
            base = plate_energy(bc, 1.0, d).value
            for s in (0.5, 2.0):
                worst = max(worst, abs(plate_energy(bc, s, d).value / (s ** -d * base) - 1))
    record(11, "plate energy scales as s^-D", worst < 1e-8, f"max rel err = {worst:.2e}")
