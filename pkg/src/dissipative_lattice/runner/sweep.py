"""Single-point runs and Cartesian parameter sweeps."""
from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .. import __version__
from ..evolve import ConvergenceTracker, iter_states, steady_state
from ..lattice import LatticeSpec, assign_fields, automorphisms
from ..liouville import (HERMITIAN_TOL, PSD_TOL, TRACE_TOL, build_liouvillian,
                         state_residuals)
from ..observables import initial_state, observable_record
from ..spin_ops import ModelParams, build_hamiltonian, build_lindblad_ops
from .config import RunConfig, SweepPoint

logger = logging.getLogger(__name__)

__all__ = [
    "TimeSeries",
    "PointResult",
    "SweepResult",
    "RunPointError",
    "build_generator",
    "run_point",
    "run_sweep",
    "trace_distance",
    "series_columns",
]


class RunPointError(RuntimeError):
    def __init__(self, point: SweepPoint, cause: BaseException):
        super().__init__(f"{point.label}: {type(cause).__name__}: {cause}")
        self.point = point


def trace_distance(a, b) -> float:
    diff = np.asarray(a) - np.asarray(b)
    diff = 0.5 * (diff + diff.conj().T)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))


def series_columns(pairs, tau2_sites, n_sites) -> list[str]:
    return (["T"] + [f"C_{i}_{j}" for i, j in pairs] + [f"tau2_{s}" for s in tau2_sites]
            + [f"Sz_{s}" for s in range(1, n_sites + 1)])


@dataclass
class TimeSeries:
    """Observable trajectory: one row per output time, columns as named."""

    columns: list
    values: np.ndarray

    def __getitem__(self, name: str) -> np.ndarray:
        return self.values[:, self.columns.index(name)]

    @property
    def times(self) -> np.ndarray:
        return self["T"]

    def __len__(self):
        return len(self.values)


@dataclass
class PointResult:
    point: SweepPoint
    series: TimeSeries | None = None
    steady: dict = field(default_factory=dict)
    cptp: dict = field(default_factory=dict)
    final_state: np.ndarray | None = None
    steady_state: np.ndarray | None = None
    error: str | None = None
    elapsed: float = 0.0

    @property
    def ok(self) -> bool:
        return self.error is None and self.cptp.get("passed", True)


@dataclass
class SweepResult:
    config: RunConfig
    points: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __getitem__(self, key) -> PointResult:
        return self.points[key]

    def __len__(self):
        return len(self.points)

    @property
    def failures(self) -> list[PointResult]:
        return [r for r in self.points.values() if not r.ok]


@lru_cache(maxsize=32)
def _symmetries(lattice: LatticeSpec, h: tuple) -> list:
    from ..lattice import FieldAssignment

    return [p for p in automorphisms(lattice, FieldAssignment(np.array(h)))
            if p != tuple(range(lattice.n_sites))]


def build_generator(cfg: RunConfig, point: SweepPoint):
    """Generator, lattice symmetries and parameters for one sweep point."""
    lattice = cfg.lattice
    params = ModelParams(gamma=point.gamma, delta=point.delta, J=cfg.J, omega=cfg.omega,
                         Gamma=cfg.Gamma, nbar=point.nbar, B1=point.B1, B2=point.B2)
    fields = assign_fields(lattice, point.B1, point.B2)
    H = build_hamiltonian(params, lattice, fields)
    gen = build_liouvillian(H, build_lindblad_ops(params, lattice.n_sites))
    return gen, _symmetries(lattice, tuple(fields.h)), params


def _steady_summary(rho, pairs, tau2_sites) -> dict:
    rec = observable_record(rho, 0.0, pairs, tau2_sites)
    return {"concurrences": rec.concurrences, "tau2": rec.tau2,
            "spin_z": rec.spin_z}


def run_point(cfg: RunConfig, point: SweepPoint, keep_states: bool = True) -> PointResult:
    """Trajectory of the reported observables plus the steady-state row.

    Every snapshot is checked against the density-matrix tolerances; the
    worst residuals land in ``result.cptp``.  Solver failures are re-raised
    as :class:`RunPointError` naming the parameter tuple.
    """
    t0 = time.perf_counter()
    try:
        return _run_point(cfg, point, keep_states, t0)
    except Exception as exc:
        raise RunPointError(point, exc) from exc


def _run_point(cfg, point, keep_states, t0):
    lattice = cfg.lattice
    n = lattice.n_sites
    pairs = cfg.reported_pairs
    tau2_sites = cfg.tau2_sites
    gen, syms, _ = build_generator(cfg, point)
    result = PointResult(point)

    rho_ss = steady_state(gen, syms)
    result.steady = _steady_summary(rho_ss, pairs, tau2_sites)
    if keep_states:
        result.steady_state = rho_ss

    if cfg.backend != "steady-only":
        rho0 = initial_state(point.initial_state, n)
        tracker = ConvergenceTracker()
        rows = []
        worst = {"trace_error": 0.0, "hermiticity": 0.0, "min_eigenvalue": np.inf}
        rho = rho0
        for t, rho in iter_states(gen, rho0, cfg.grid, cfg.backend):
            res = state_residuals(rho)
            worst["trace_error"] = max(worst["trace_error"], res["trace_error"])
            worst["hermiticity"] = max(worst["hermiticity"], res["hermiticity"])
            worst["min_eigenvalue"] = min(worst["min_eigenvalue"], res["min_eigenvalue"])
            tracker.update(t, rho)
            rows.append(observable_record(rho, t, pairs, tau2_sites).row(pairs, tau2_sites))
        worst["passed"] = bool(worst["trace_error"] < TRACE_TOL
                               and worst["hermiticity"] < HERMITIAN_TOL
                               and worst["min_eigenvalue"] > -PSD_TOL)
        result.cptp = worst
        result.series = TimeSeries(series_columns(pairs, tau2_sites, n), np.array(rows))
        result.steady["converged"] = tracker.converged
        result.steady["t_converged"] = tracker.t_converged
        result.steady["trace_distance_final"] = trace_distance(rho, rho_ss)
        if keep_states:
            result.final_state = rho
    result.elapsed = time.perf_counter() - t0
    return result


def _run_point_safe(args):
    cfg, point, keep_states = args
    try:
        return run_point(cfg, point, keep_states)
    except RunPointError as exc:
        logger.error("%s", exc)
        return PointResult(point, error=str(exc))


def run_sweep(cfg: RunConfig, threads: int = 1, keep_states: bool = False,
              progress=None) -> SweepResult:
    """Run every point of the configured grid.

    Failed points are recorded with their error message and the sweep goes
    on.  With ``threads > 1`` points run in worker processes; results are
    keyed by parameter tuple, so the outcome does not depend on scheduling.
    """
    points = cfg.sweep_points()
    result = SweepResult(cfg, metadata={
        "config_hash": cfg.hash(),
        "version": __version__,
        "n_points": len(points),
    })
    jobs = [(cfg, p, keep_states) for p in points]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outputs = pool.map(_run_point_safe, jobs)
            for r in outputs:
                result.points[r.point.key] = r
                if progress:
                    progress(r)
    else:
        for job in jobs:
            r = _run_point_safe(job)
            result.points[r.point.key] = r
            if progress:
                progress(r)
    result.metadata["failed"] = [r.point.label for r in result.failures]
    return result
