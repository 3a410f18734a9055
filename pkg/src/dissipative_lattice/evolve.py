"""Time evolution and steady states of a Lindblad generator.

Three routes are provided and cross-checked in the tests:

* adaptive Runge-Kutta (Dormand-Prince 8(5,3)) integration, streamed
  snapshot by snapshot so long trajectories never sit in memory at once;
* Krylov exponential action (``expm_multiply``) between output times;
* the eigen-expansion ``vec(rho(t)) = sum_i A_i eta_i exp(lambda_i t)`` from
  a dense eigensolve, for at most four sites.

Steady states come from a bordered linear solve of ``L x = 0`` with one row
swapped for the trace constraint, optionally restricted to the subspace of
operators invariant under lattice automorphisms and spin-flip parity.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import DOP853

from .liouville import DENSE_MAX_SITES, Superoperator, devectorize, vectorize

logger = logging.getLogger(__name__)

__all__ = [
    "EvolutionGrid",
    "IntegrationError",
    "SpectralConditionError",
    "DegenerateSteadyStateError",
    "SteadyStateError",
    "BACKENDS",
    "iter_states",
    "integrate",
    "SpectralSolution",
    "spectral_solve",
    "steady_state",
    "symmetric_basis",
    "ConvergenceTracker",
    "detect_convergence",
]

BACKENDS = ("rk-adaptive", "krylov", "spectral", "steady-only")


class IntegrationError(RuntimeError):
    def __init__(self, time: float, message: str):
        super().__init__(f"integration failed at t={time:.6g}: {message}")
        self.time = time


class SpectralConditionError(RuntimeError):
    """Eigenvector basis too ill-conditioned for the spectral expansion."""


class SteadyStateError(RuntimeError):
    pass


class DegenerateSteadyStateError(SteadyStateError):
    def __init__(self, multiplicity: int, singular_values=None):
        super().__init__(f"steady state is not unique: null space of dimension "
                         f"{'>= ' if multiplicity < 0 else ''}{abs(multiplicity)}")
        self.multiplicity = multiplicity
        self.singular_values = singular_values


@dataclass(frozen=True)
class EvolutionGrid:
    """Output times ``0, t_max/n_points, ..., t_max`` and integrator tolerances.

    ``n_points`` counts the samples after the initial state, so the default
    grid has 2001 rows with stride 0.5.  ``times`` overrides the uniform grid.

    The default tolerances keep the integrator's step-to-step jitter near
    the steady state around 1e-10, an order below the 1e-9 threshold of
    :func:`detect_convergence`; at ``rtol=1e-8`` the jitter is ~5e-8 and
    no trajectory would ever register as converged.
    """

    t_max: float = 1000.0
    n_points: int = 2000
    rtol: float = 1e-11
    atol: float = 1e-13
    times: tuple | None = field(default=None)

    def __post_init__(self):
        if self.times is not None:
            t = np.asarray(self.times, dtype=float)
            if t.ndim != 1 or t.size == 0:
                raise ValueError("times must be a non-empty 1-d sequence")
            if t[0] < 0 or np.any(np.diff(t) <= 0):
                raise ValueError("output times must be non-negative and strictly ascending")
            object.__setattr__(self, "times", tuple(float(x) for x in t))
            object.__setattr__(self, "t_max", float(t[-1]))
        else:
            if not self.t_max > 0:
                raise ValueError(f"t_max must be positive, got {self.t_max}")
            if self.n_points < 1:
                raise ValueError(f"n_points must be >= 1, got {self.n_points}")
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("integrator tolerances must be positive")

    @property
    def output_times(self) -> np.ndarray:
        if self.times is not None:
            return np.array(self.times)
        return self.t_max * np.arange(self.n_points + 1) / self.n_points


# -- trajectory backends ---------------------------------------------------

def _sector_indices(gen: Superoperator, v0: np.ndarray) -> np.ndarray:
    labels = gen.sectors
    active = np.unique(labels[np.flatnonzero(v0)])
    return np.flatnonzero(np.isin(labels, active))


def _adjoint_permutation(idx: np.ndarray, d: int) -> np.ndarray | None:
    """Position in ``idx`` of the transpose partner of every entry, if closed."""
    a, b = idx % d, idx // d
    partner = b + d * a
    pos = np.searchsorted(idx, partner)
    if np.any(pos >= idx.size) or np.any(idx[np.minimum(pos, idx.size - 1)] != partner):
        return None
    return pos


def _rk_states(A, x0, times, rtol, atol, adjoint=None):
    if times[0] == 0:
        yield 0.0, x0.copy()
        times = times[1:]
    if len(times) == 0:
        return
    if adjoint is None:
        def rhs(t, y):
            return A @ y
    else:
        # Near the step-size stability limit DOP853 lets round-off in the
        # anti-Hermitian directions grow to the tolerance level; projecting
        # the derivative keeps the iterate on Hermitian operators.
        def rhs(t, y):
            f = A @ y
            return 0.5 * (f + f[adjoint].conj())
    solver = DOP853(rhs, 0.0, x0, times[-1], rtol=rtol, atol=atol)
    k = 0
    while k < len(times):
        msg = solver.step()
        if solver.status == "failed":
            raise IntegrationError(solver.t, msg or "step failed")
        interp = solver.dense_output()
        while k < len(times) and times[k] <= solver.t:
            yield float(times[k]), interp(times[k])
            k += 1


def _krylov_states(A, x0, times):
    x = x0.copy()
    t_prev = 0.0
    if times[0] == 0:
        yield 0.0, x.copy()
        times = times[1:]
    cache = {}
    for t in times:
        dt = float(t - t_prev)
        key = round(dt, 12)
        if key not in cache:
            cache = {key: (A * dt).tocsr()}
        x = spla.expm_multiply(cache[key], x)
        t_prev = t
        yield float(t), x


def iter_states(gen: Superoperator, rho0, grid: EvolutionGrid | None = None,
                backend: str = "rk-adaptive") -> Iterator[tuple[float, np.ndarray]]:
    """Yield ``(t, rho(t))`` at each output time of ``grid``.

    The evolution is restricted to the invariant blocks of the generator that
    the initial state touches (e.g. a fixed spin-flip parity sector).
    """
    grid = grid or EvolutionGrid()
    if backend not in ("rk-adaptive", "krylov", "spectral"):
        raise ValueError(f"unknown trajectory backend {backend!r}")
    times = grid.output_times
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (gen.dim, gen.dim):
        raise ValueError(f"initial state has shape {rho0.shape}, generator acts on {gen.dim}")

    if backend == "spectral":
        try:
            sol = spectral_solve(gen, rho0)
        except (SpectralConditionError, MemoryError) as exc:
            logger.warning("spectral backend unavailable (%s); falling back to rk-adaptive", exc)
        else:
            for t in times:
                yield float(t), sol.evaluate(t)
            return

    v0 = vectorize(rho0)
    idx = _sector_indices(gen, v0)
    A = gen.sparse[idx][:, idx].tocsr()
    x0 = v0[idx].copy()
    if backend == "rk-adaptive":
        hermitian = np.max(np.abs(rho0 - rho0.conj().T)) <= 1e-12
        adjoint = _adjoint_permutation(idx, gen.dim) if hermitian else None
        states = _rk_states(A, x0, times, grid.rtol, grid.atol, adjoint)
    else:
        states = _krylov_states(A, x0, times)
    D = gen.liouville_dim
    for t, x in states:
        full = np.zeros(D, dtype=complex)
        full[idx] = x
        yield t, devectorize(full)


def integrate(gen: Superoperator, rho0, grid: EvolutionGrid | None = None,
              backend: str = "rk-adaptive") -> list[np.ndarray]:
    """Density matrices at every output time of ``grid``."""
    return [rho for _, rho in iter_states(gen, rho0, grid, backend)]


# -- spectral expansion ----------------------------------------------------

@dataclass
class SpectralSolution:
    """``vec(rho(t)) = sum_i A_i eta_i exp(lambda_i t)``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    coefficients: np.ndarray

    def evaluate_vector(self, t: float) -> np.ndarray:
        return self.eigenvectors @ (self.coefficients * np.exp(self.eigenvalues * t))

    def evaluate(self, t: float) -> np.ndarray:
        return devectorize(self.evaluate_vector(t))

    def stationary_count(self, tol: float = 1e-10) -> int:
        return int(np.sum(np.abs(self.eigenvalues) < tol))


def spectral_solve(gen: Superoperator, rho0, cond_limit: float = 1e10) -> SpectralSolution:
    """Diagonalize the generator and expand ``rho0`` in its eigenvectors.

    Raises
    ------
    MemoryError
        For more than four sites (dense eigensolve gate).
    SpectralConditionError
        If the eigenvector matrix is near-defective.
    """
    if gen.n_sites > DENSE_MAX_SITES:
        raise MemoryError(f"spectral solution limited to N <= {DENSE_MAX_SITES}")
    lam, eta = la.eig(gen.dense())
    cond = np.linalg.cond(eta)
    if not np.isfinite(cond) or cond > cond_limit:
        raise SpectralConditionError(f"eigenvector condition number {cond:.3g} "
                                     f"exceeds {cond_limit:.1g}")
    coeffs = la.solve(eta, vectorize(np.asarray(rho0, dtype=complex)))
    return SpectralSolution(lam, eta, coeffs)


# -- steady state ------------------------------------------------------------

def _basis_permutation(perm: Sequence[int], n_sites: int) -> np.ndarray:
    idx = np.arange(2 ** n_sites)
    out = np.zeros_like(idx)
    for i, pi in enumerate(perm):
        bit = (idx >> (n_sites - 1 - i)) & 1
        out |= bit << (n_sites - 1 - pi)
    return out


def _parity(n_sites: int) -> np.ndarray:
    idx = np.arange(2 ** n_sites)
    return np.array([bin(i).count("1") & 1 for i in idx])


def _has_parity_symmetry(gen: Superoperator) -> bool:
    # every operator must map even/odd sectors consistently
    if gen.H is None:
        return False
    par = _parity(gen.n_sites)
    for k, op in enumerate([gen.H] + gen.jumps):
        coo = op.tocoo()
        flips = par[coo.row] ^ par[coo.col]
        if flips.size and np.any(flips != (0 if k == 0 else flips[0])):
            return False
    return True


def symmetric_basis(gen: Superoperator, symmetries=(), parity: bool = True) -> sp.csr_matrix:
    """Orthonormal basis (as columns) of operators invariant under the symmetries.

    ``symmetries`` are 0-based site permutations (identity may be omitted);
    they must form a group.  With ``parity`` only blocks with equal
    spin-flip parity on both sides are kept.
    """
    n = gen.n_sites
    d = gen.dim
    perms = [tuple(range(n))] + [tuple(p) for p in symmetries]
    maps = np.array([_basis_permutation(p, n) for p in perms])
    a = np.tile(np.arange(d), d)
    b = np.repeat(np.arange(d), d)
    keep = np.ones(d * d, dtype=bool)
    if parity:
        par = _parity(n)
        keep = par[a] == par[b]
    images = maps[:, a[keep]] + d * maps[:, b[keep]]
    reps = images.min(axis=0)
    _, labels = np.unique(reps, return_inverse=True)
    rows = np.flatnonzero(keep)
    counts = np.bincount(labels)
    vals = 1.0 / np.sqrt(counts[labels])
    return sp.csr_matrix((vals, (rows, labels)), shape=(d * d, counts.size))


def _reduced_generator(gen: Superoperator, symmetries, parity):
    L = gen.sparse
    V = symmetric_basis(gen, symmetries, parity)
    W = (L @ V).tocsr()
    Lr = (V.T @ W).tocsr()
    resid = abs(W - V @ Lr).max() if W.nnz else 0.0
    scale = max(1.0, abs(L).max())
    if resid > 1e-12 * scale:
        return None, None
    return V, Lr


def _bordered(Lr, trace_vec):
    row = int(np.argmax(np.abs(trace_vec)))
    rhs = np.zeros(Lr.shape[0], dtype=complex)
    rhs[row] = 1.0
    return row, rhs


def _solve_dense(Lr: np.ndarray, trace_vec: np.ndarray, degeneracy_tol: float):
    s = la.svdvals(Lr)
    scale = max(s[0], 1e-300)
    small = int(np.sum(s < degeneracy_tol * scale))
    if small > 1:
        raise DegenerateSteadyStateError(small, s[-small - 1:])
    row, rhs = _bordered(Lr, trace_vec)
    B = Lr.copy()
    B[row, :] = trace_vec
    return la.solve(B, rhs)


def _solve_sparse(Lr: sp.csr_matrix, trace_vec: np.ndarray, degeneracy_tol: float):
    row, rhs = _bordered(Lr, trace_vec)
    B = Lr.tolil()
    B[row, :] = trace_vec
    B = B.tocsc()
    try:
        lu = spla.splu(B, permc_spec="MMD_AT_PLUS_A")
    except RuntimeError as exc:  # exactly singular factor
        raise DegenerateSteadyStateError(-2) from exc
    inv_norm = spla.onenormest(spla.LinearOperator(
        B.shape, matvec=lu.solve, rmatvec=lambda y: lu.solve(y, trans="H"), dtype=complex))
    cond = inv_norm * spla.norm(B, 1)
    if cond * degeneracy_tol > 1:
        raise DegenerateSteadyStateError(-2)
    return lu.solve(rhs)


def steady_state(gen: Superoperator, symmetries=None, *, parity: bool | None = None,
                 tol: float = 1e-10, degeneracy_tol: float = 1e-9,
                 dense_limit: int = 3000) -> np.ndarray:
    """Unique stationary state of the generator, normalized to unit trace.

    Parameters
    ----------
    gen : Superoperator
    symmetries : sequence of permutations, optional
        Lattice automorphisms (0-based, see :func:`lattice.automorphisms`)
        that leave the generator invariant.  A unique steady state is
        invariant under them, so the solve runs in the symmetric subspace.
        The invariance is verified; on failure the full space is used.
    parity : bool, optional
        Restrict to equal spin-flip parity blocks; default is to do so when
        every operator has definite parity.
    tol : float
        Required residual ``max |L vec(rho)|`` in the full space.
    degeneracy_tol : float
        Relative singular-value threshold below which a second null vector
        is declared.

    Raises
    ------
    DegenerateSteadyStateError
        When the null space has more than one dimension.
    SteadyStateError
        When the residual check fails.
    """
    if parity is None:
        parity = _has_parity_symmetry(gen)
    symmetries = list(symmetries or [])
    V = Lr = None
    if symmetries or parity:
        V, Lr = _reduced_generator(gen, symmetries, parity)
        if V is None:
            logger.warning("symmetry reduction does not commute with the generator; "
                           "solving in the full Liouville space")
    if V is None:
        V = sp.identity(gen.liouville_dim, format="csr")
        Lr = gen.sparse

    trace_full = vectorize(np.eye(gen.dim, dtype=complex))
    trace_vec = np.asarray(V.T @ trace_full).ravel()
    if Lr.shape[0] <= dense_limit:
        x = _solve_dense(Lr.toarray(), trace_vec, degeneracy_tol)
    else:
        x = _solve_sparse(Lr, trace_vec, degeneracy_tol)

    v = np.asarray(V @ x).ravel()
    rho = devectorize(v)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    resid = np.abs(gen.sparse @ vectorize(rho)).max()
    if resid > tol:
        raise SteadyStateError(f"steady-state residual {resid:.3g} exceeds {tol:.1g}")
    return rho


# -- convergence -------------------------------------------------------------

class ConvergenceTracker:
    """Incremental form of :func:`detect_convergence` for streamed snapshots."""

    def __init__(self, tol: float = 1e-9, window: int = 10):
        self.tol = tol
        self.window = window
        self._prev = None
        self._prev_t = None
        self._run = 0
        self._run_start = None
        self.converged = False
        self.t_converged = None

    def update(self, t: float, rho: np.ndarray) -> bool:
        if self._prev is not None and not self.converged:
            diff = np.max(np.abs(rho - self._prev))
            if diff < self.tol:
                if self._run == 0:
                    self._run_start = self._prev_t
                self._run += 1
                if self._run >= self.window:
                    self.converged = True
                    self.t_converged = self._run_start
            else:
                self._run = 0
        self._prev = rho
        self._prev_t = t
        return self.converged


def detect_convergence(series: Sequence[np.ndarray], times: Sequence[float] | None = None,
                       tol: float = 1e-9, window: int = 10) -> tuple[bool, float | None]:
    """Find where successive snapshots stop changing.

    Converged once ``window`` consecutive successive differences are all
    below ``tol`` in max-norm; the reported time is the first snapshot of
    that run.  Series shorter than ``window + 1`` use the whole series as
    the window.
    """
    if len(series) < 2:
        raise ValueError("need at least two snapshots")
    if times is None:
        times = np.arange(len(series), dtype=float)
    tracker = ConvergenceTracker(tol, min(window, len(series) - 1))
    for t, rho in zip(times, series):
        if tracker.update(float(t), np.asarray(rho)):
            break
    return tracker.converged, tracker.t_converged
