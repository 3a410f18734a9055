"""Acceptance criteria, each run at its stated tolerance.

The session fixture runs the full default grid (3 presets x 3 field
layouts x 6 bath occupations x 2 initial states, t in [0, 1000]) once; on
one core that takes roughly half an hour.  Every criterion records its
sub-checks in ``conftest.ACCEPTANCE`` so the run ends with one PASS/FAIL
line per criterion.
"""
import itertools
import time
from dataclasses import replace

import numpy as np
import pytest

from conftest import ACCEPTANCE
from dissipative_lattice.observables import concurrence, partial_trace, spin_z
from dissipative_lattice.runner.config import RunConfig, SweepPoint
from dissipative_lattice.runner.sweep import run_point, run_sweep, trace_distance
from dissipative_lattice.runner.validate import (
    oracle_backend_equivalence,
    oracle_single_spin_decay,
    oracle_steady_vs_spectral,
    oracle_thermal_spin,
)

pytestmark = pytest.mark.slow

HOMOGENEOUS, CENTER_WEAK, BORDER_WEAK = (1.0, 1.0), (1.0, 0.1), (0.1, 1.0)
PRESETS = ("ising", "xxx", "xyz")
STATES = ("separable", "max_entangled")
ALL_PAIRS = list(itertools.combinations(range(1, 8), 2))


def check(criterion, passed, detail):
    ACCEPTANCE.setdefault(criterion, []).append((bool(passed), detail))
    return bool(passed)


@pytest.fixture(scope="session")
def grid():
    cfg = replace(RunConfig(), anisotropy=PRESETS, initial_states=STATES)
    t0 = time.perf_counter()
    res = run_sweep(cfg, keep_states=True)
    res.metadata["wall_time"] = time.perf_counter() - t0
    by = {(r.point.anisotropy, (r.point.B1, r.point.B2), r.point.nbar, r.point.initial_state): r
          for r in res.points.values()}
    assert len(by) == 108
    return res, by


def steady_c(r, i, j):
    return concurrence(partial_trace(r.steady_state, (i, j)))


# -- 1 -------------------------------------------------------------------------

def test_criterion_1_cptp_on_full_grid(grid):
    res, by = grid
    failed = [r.point.label for r in res.points.values() if not r.ok]
    worst_tr = max(r.cptp["trace_error"] for r in by.values())
    worst_h = max(r.cptp["hermiticity"] for r in by.values())
    worst_ev = min(r.cptp["min_eigenvalue"] for r in by.values())
    ok = check(1, not failed and worst_tr < 1e-10 and worst_h < 1e-10 and worst_ev > -1e-8,
               f"108 points, worst |tr-1| {worst_tr:.2e}, hermiticity {worst_h:.2e}, "
               f"min eigenvalue {worst_ev:.2e}, failed points {len(failed)}")
    wall = res.metadata["wall_time"]
    slowest = max(r.elapsed for r in by.values())
    ok &= check(1, wall < 7200, f"full grid wall time {wall:.0f} s (budget 7200 s)")
    ok &= check(1, slowest < 120, f"slowest point {slowest:.1f} s (budget 120 s)")
    assert ok, failed


# -- 2 -------------------------------------------------------------------------

def test_criterion_2_single_spin():
    decay, thermal = oracle_single_spin_decay(), oracle_thermal_spin()
    a = check(2, decay.error < 1e-8, f"<Sz>(t) max error {decay.error:.2e} (tol 1e-8)")
    b = check(2, thermal.error < 1e-9, f"thermal <Sz>_ss max error {thermal.error:.2e} (tol 1e-9)")
    assert a and b


# -- 3 -------------------------------------------------------------------------

def test_criterion_3_backend_equivalence():
    eq, ss = oracle_backend_equivalence(draws=20), oracle_steady_vs_spectral(draws=20)
    a = check(3, eq.error < 1e-8, f"spectral vs adaptive, 20 draws x 10 times: {eq.error:.2e}")
    b = check(3, ss.error < 1e-8, f"steady_state vs spectral t=1e4, 20 draws: {ss.error:.2e}")
    assert a and b


# -- 4 -------------------------------------------------------------------------

def test_criterion_4_xxx_exactness(grid):
    _, by = grid
    sz_err, c_max, c_final = 0.0, 0.0, 0.0
    for field, state in itertools.product((HOMOGENEOUS, CENTER_WEAK, BORDER_WEAK), STATES):
        r = by[("xxx", field, 0.0, state)]
        sz_err = max(sz_err, *(abs(spin_z(r.steady_state, s) + 0.5) for s in range(1, 8)),
                     *(abs(spin_z(r.final_state, s) + 0.5) for s in range(1, 8)))
        c_max = max(c_max, *(steady_c(r, i, j) for i, j in ALL_PAIRS))
        c_final = max(c_final, *(concurrence(partial_trace(r.final_state, p)) for p in ALL_PAIRS))
    a = check(4, sz_err < 1e-6, f"max |<Sz_i> + 0.5| {sz_err:.2e} (tol 1e-6)")
    b = check(4, max(c_max, c_final) < 1e-8,
              f"max of 21 steady concurrences {c_max:.2e}, at t=1000 {c_final:.2e} (tol 1e-8)")
    assert a and b


# -- 5 -------------------------------------------------------------------------

def test_criterion_5_initial_state_independence(grid):
    _, by = grid
    worst, where = 0.0, None
    for preset, field, nbar in itertools.product(("ising", "xyz"), (HOMOGENEOUS, BORDER_WEAK),
                                                 (0.0, 0.01)):
        d = trace_distance(by[(preset, field, nbar, "separable")].final_state,
                           by[(preset, field, nbar, "max_entangled")].final_state)
        if d >= worst:
            worst, where = d, (preset, field, nbar)
    assert check(5, worst < 1e-6, f"max trace distance of t=1000 states {worst:.2e} at {where}")


# -- 6 -------------------------------------------------------------------------

def test_criterion_6_ising_nn_ordering(grid):
    _, by = grid
    c = {f: steady_c(by[("ising", f, 0.0, "max_entangled")], 1, 2)
         for f in (HOMOGENEOUS, CENTER_WEAK, BORDER_WEAK)}
    ok = c[BORDER_WEAK] - c[HOMOGENEOUS] > 1e-4 and c[HOMOGENEOUS] - c[CENTER_WEAK] > 1e-4
    assert check(6, ok, "Ising C12: (0.1,1) {:.5f} > (1,1) {:.5f} > (1,0.1) {:.5f}".format(
        c[BORDER_WEAK], c[HOMOGENEOUS], c[CENTER_WEAK]))


def test_criterion_6_ising_nnn_ordering(grid):
    _, by = grid
    c = {f: steady_c(by[("ising", f, 0.0, "max_entangled")], 1, 4)
         for f in (HOMOGENEOUS, CENTER_WEAK, BORDER_WEAK)}
    ok = c[CENTER_WEAK] - c[HOMOGENEOUS] > 1e-4 and c[HOMOGENEOUS] - c[BORDER_WEAK] > 1e-4
    assert check(6, ok, "Ising C14: (1,0.1) {:.5f} > (1,1) {:.5f} > (0.1,1) {:.5f}".format(
        c[CENTER_WEAK], c[HOMOGENEOUS], c[BORDER_WEAK]))


def test_criterion_6_ising_c17_zero_at_all_times(grid):
    _, by = grid
    worst = max(np.max(by[("ising", f, 0.0, s)].series["C_1_7"])
                for f in (HOMOGENEOUS, CENTER_WEAK, BORDER_WEAK) for s in STATES)
    assert check(6, worst < 1e-8, f"Ising max_t C17(t), n=0, all fields and states: {worst:.2e}")


def test_criterion_6_xyz_long_range(grid):
    _, by = grid
    r = by[("xyz", BORDER_WEAK, 0.0, "max_entangled")]
    c14, c15, c17 = steady_c(r, 1, 4), steady_c(r, 1, 5), steady_c(r, 1, 7)
    a = check(6, c15 - c14 > 1e-4, f"XYZ (0.1,1) steady C15 {c15:.5f} > C14 {c14:.5f}")
    b = check(6, c17 > 1e-4, f"XYZ (0.1,1) steady C17 {c17:.3e} > 0 with margin 1e-4")
    assert a and b


# -- 7 -------------------------------------------------------------------------

def test_criterion_7_thermal_robustness(grid):
    _, by = grid
    weak = steady_c(by[("ising", BORDER_WEAK, 0.1, "max_entangled")], 1, 2)
    hom = {n: steady_c(by[("ising", HOMOGENEOUS, n, "max_entangled")], 1, 2)
           for n in (0.005, 0.01, 0.05, 0.1)}
    a = check(7, weak > 1e-3, f"Ising (0.1,1) steady C12 at n=0.1: {weak:.3e} (need > 1e-3)")
    b = check(7, max(hom.values()) < 1e-4,
              "Ising (1,1) steady C12 for n >= 0.005: "
              + ", ".join(f"{n:g}: {v:.3e}" for n, v in hom.items()) + " (need < 1e-4)")
    assert a and b


# -- 8 -------------------------------------------------------------------------

BORDER = [1, 2, 3, 5, 6, 7]


def _border_spread(r):
    cols = np.array([r.series[f"Sz_{s}"] for s in BORDER])
    return float(np.max(cols.max(axis=0) - cols.min(axis=0)))


def test_criterion_8_symmetry_orbit(grid):
    _, by = grid
    spread_h = max(_border_spread(by[(p, HOMOGENEOUS, n, "separable")])
                   for p in PRESETS for n in (0.0, 0.01, 0.1))
    spread_w = max(_border_spread(by[(p, BORDER_WEAK, n, "separable")])
                   for p in PRESETS for n in (0.0, 0.01, 0.1))
    r = by[("ising", BORDER_WEAK, 0.0, "separable")]
    gap = min(abs(spin_z(r.steady_state, s) - spin_z(r.steady_state, 4)) for s in BORDER)
    a = check(8, spread_h < 1e-9, f"border <Sz> spread, homogeneous field: {spread_h:.2e}")
    b = check(8, spread_w < 1e-9, f"border <Sz> spread, (0.1,1) field: {spread_w:.2e}")
    c = check(8, gap > 0.01, f"Ising (0.1,1) steady |<Sz_border> - <Sz_4>|: {gap:.4f}")
    assert a and b and c


def test_single_point_budget():
    # a cold single point, including generator assembly and the steady solve
    cfg = RunConfig()
    t0 = time.perf_counter()
    run_point(cfg, SweepPoint("xyz", 0.5, 1.0, 0.1, 1.0, 0.05, "max_entangled"), keep_states=False)
    dt = time.perf_counter() - t0
    assert check(1, dt < 120, f"cold single point {dt:.1f} s (budget 120 s)")


def test_steady_state_matches_long_time_limit(grid):
    # grid-wide invariant, not a numbered criterion
    _, by = grid
    worst = max(r.steady["trace_distance_final"] for r in by.values())
    assert worst < 1e-6


def test_ising_c17_transient_matches_dense_oracle():
    # The C17(t) transient that fails criterion 6 is reproduced by a dense
    # 128 x 128 matrix-form integration sharing no code with the package.
    from functools import reduce
    from scipy.integrate import solve_ivp
    from scipy.linalg import sqrtm
    from dissipative_lattice.evolve import EvolutionGrid, iter_states
    from dissipative_lattice.runner.sweep import build_generator
    from dissipative_lattice.observables import initial_state

    n, J, G = 7, 0.05, 0.05
    sx, sz, sm = np.array([[0, 1], [1, 0]]) / 2, np.diag([0.5, -0.5]), np.array([[0, 0], [1, 0]])

    def op(o, i):
        return reduce(np.kron, [o if k == i else np.eye(2) for k in range(n)])

    ring = [1, 2, 5, 7, 6, 3]
    edges = [(ring[k], ring[(k + 1) % 6]) for k in range(6)] + [(4, b) for b in ring]
    H = J * sum(op(sx, i - 1) @ op(sx, j - 1) for i, j in edges) + sum(op(sz, i) for i in range(n))
    Ls = [np.sqrt(G) * op(sm, i) for i in range(n)]
    K = -1j * H - 0.5 * sum(L.T @ L for L in Ls)

    def rhs(t, y):
        r = y.reshape(128, 128)
        return (K @ r + r @ K.conj().T + sum(L @ r @ L.T for L in Ls)).ravel()

    psi = np.zeros(128)
    psi[0b0111111] = psi[0b1011111] = 1 / np.sqrt(2)
    t = 31.5
    sol = solve_ivp(rhs, (0, t), np.outer(psi, psi).astype(complex).ravel(), method="DOP853",
                    rtol=1e-10, atol=1e-12)
    ref = sol.y[:, -1].reshape(128, 128)
    r17 = np.einsum("abcdefgAbcdefG->agAG", ref.reshape([2] * 14)).reshape(4, 4)
    yy = np.fliplr(np.diag([-1.0, 1, 1, -1]))
    s = sqrtm(r17)
    ev = np.sort(np.linalg.eigvals(sqrtm(s @ yy @ r17.conj() @ yy @ s)).real)[::-1]
    c_ref = max(0.0, ev[0] - ev[1:].sum())

    cfg = RunConfig()
    gen, _, _ = build_generator(cfg, SweepPoint("ising", 1.0, 0.0, 1.0, 1.0, 0.0, "max_entangled"))
    (_, rho), = iter_states(gen, initial_state("max_entangled", 7), EvolutionGrid(times=(t,)))
    c = concurrence(partial_trace(rho, (1, 7)))
    assert c_ref > 0.02
    assert abs(c - c_ref) < 1e-6
