"""Oracle suite: analytic and cross-backend checks of the whole pipeline.

Each oracle returns an :class:`OracleResult` with the measured error and
the tolerance it was held to.  :func:`validate` prints one line per oracle
and returns a nonzero status if any of them fails.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..evolve import EvolutionGrid, integrate, iter_states, spectral_solve, steady_state
from ..lattice import assign_fields, automorphisms, build_lattice, build_triangular7
from ..liouville import Superoperator, build_liouvillian, state_residuals, vectorize
from ..observables import concurrence, initial_state, spin_z
from ..spin_ops import SPIN_MATRICES, ModelParams, build_hamiltonian, build_lindblad_ops

__all__ = ["OracleResult", "ORACLES", "run_oracles", "validate",
           "single_spin_generator", "anticommutator_flipped", "cptp_check"]

TIGHT = dict(rtol=1e-12, atol=1e-14)


@dataclass
class OracleResult:
    name: str
    error: float
    tol: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"[{status}] {self.name}: error {self.error:.3e} (tol {self.tol:.0e}){extra}"


def _result(name, error, tol, detail=""):
    return OracleResult(name, float(error), tol, bool(error < tol), detail)


def single_spin_generator(Gamma=0.05, nbar=0.0, B=1.0) -> Superoperator:
    """One spin in a field ``B`` coupled to a thermal bath."""
    H = B * SPIN_MATRICES["Sz"]
    jumps = [np.sqrt(Gamma * (nbar + 1)) * SPIN_MATRICES["S-"],
             np.sqrt(Gamma * nbar) * SPIN_MATRICES["S+"]]
    return build_liouvillian(H, jumps)


def _triangle():
    return build_lattice(3, [(1, 2), (2, 3), (1, 3)], name="triangle3")


def _random_generator(rng, n_sites=3):
    lat = _triangle() if n_sites == 3 else build_lattice(
        n_sites, [(i, i + 1) for i in range(1, n_sites)], name=f"chain{n_sites}")
    params = ModelParams(gamma=rng.uniform(0, 1), delta=rng.uniform(0, 1),
                         J=rng.uniform(0.01, 0.2), Gamma=rng.uniform(0.02, 0.2),
                         nbar=rng.uniform(0, 0.1), B1=rng.uniform(0.1, 1),
                         B2=rng.uniform(0.1, 1))
    H = build_hamiltonian(params, lat)
    return build_liouvillian(H, build_lindblad_ops(params, n_sites)), params


def _random_state(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def anticommutator_flipped(gen: Superoperator) -> Superoperator:
    """Mutant generator with ``+1/2 {L^dag L, rho}`` in the dissipator.

    This breaks trace preservation; the CPTP check has to notice.
    """
    eye = sp.identity(gen.dim, dtype=complex, format="csr")
    D = sp.csr_matrix(gen.shape, dtype=complex)
    for L in gen.jumps:
        LdL = (L.conj().T @ L).tocsr()
        D = D + sp.kron(L.conj(), L) + 0.5 * sp.kron(eye, LdL) + 0.5 * sp.kron(LdL.T, eye)
    return Superoperator.from_matrix(gen.hamiltonian_part + D)


def cptp_check(gen, rho0, grid) -> dict:
    """Worst residuals of the density-matrix contract along a trajectory."""
    worst = {"trace_error": 0.0, "hermiticity": 0.0, "min_eigenvalue": np.inf}
    for _, rho in iter_states(gen, rho0, grid):
        r = state_residuals(rho)
        worst["trace_error"] = max(worst["trace_error"], r["trace_error"])
        worst["hermiticity"] = max(worst["hermiticity"], r["hermiticity"])
        worst["min_eigenvalue"] = min(worst["min_eigenvalue"], r["min_eigenvalue"])
    worst["passed"] = (worst["trace_error"] < 1e-10 and worst["hermiticity"] < 1e-10
                       and worst["min_eigenvalue"] > -1e-8)
    return worst


# -- oracles -----------------------------------------------------------------

def oracle_single_spin_decay() -> OracleResult:
    Gamma = 0.05
    gen = single_spin_generator(Gamma, 0.0)
    theta = 0.7
    psi = np.array([np.cos(theta / 2), np.sin(theta / 2)], dtype=complex)
    rho0 = np.outer(psi, psi.conj())
    sz0 = spin_z(rho0, 1)
    grid = EvolutionGrid(t_max=200.0, n_points=400, **TIGHT)
    err = 0.0
    for t, rho in iter_states(gen, rho0, grid):
        exact = -0.5 + np.exp(-Gamma * t) * (sz0 + 0.5)
        err = max(err, abs(spin_z(rho, 1) - exact))
    return _result("single-spin <Sz>(t) decay", err, 1e-8)


def oracle_thermal_spin() -> OracleResult:
    err = 0.0
    for nbar in (0.0, 0.01, 0.05, 0.1):
        rho = steady_state(single_spin_generator(0.05, nbar))
        err = max(err, abs(spin_z(rho, 1) + 1 / (2 * (2 * nbar + 1))))
    return _result("single-spin thermal <Sz>_ss = -1/(2(2n+1))", err, 1e-9)


def oracle_amplitude_damping_spectrum() -> OracleResult:
    # eigenvalues of a damped spin: 0, -G(2n+1), -G(2n+1)/2 +- iB
    G, nbar, B = 0.05, 0.05, 1.0
    lam = np.sort_complex(np.linalg.eigvals(single_spin_generator(G, nbar, B).dense()))
    g = G * (2 * nbar + 1)
    exact = np.sort_complex(np.array([0, -g, -g / 2 + 1j * B, -g / 2 - 1j * B]))
    return _result("single-spin Liouvillian spectrum", np.max(np.abs(lam - exact)), 1e-12)


def oracle_backend_equivalence(draws=20, seed=1234) -> OracleResult:
    rng = np.random.default_rng(seed)
    times = tuple(np.linspace(0, 200, 11)[1:])
    grid = EvolutionGrid(times=times, **TIGHT)
    err = 0.0
    for _ in range(draws):
        gen, _ = _random_generator(rng, 3)
        rho0 = _random_state(rng, gen.dim)
        sol = spectral_solve(gen, rho0)
        for (t, rk), kr in zip(iter_states(gen, rho0, grid),
                               integrate(gen, rho0, grid, backend="krylov")):
            ref = sol.evaluate(t)
            err = max(err, np.max(np.abs(rk - ref)), np.max(np.abs(kr - ref)))
    return _result(f"spectral vs rk-adaptive vs krylov, N=3, {draws} draws", err, 1e-8)


def oracle_steady_vs_spectral(draws=5, seed=99) -> OracleResult:
    rng = np.random.default_rng(seed)
    err = 0.0
    for _ in range(draws):
        gen, _ = _random_generator(rng, 3)
        rho0 = _random_state(rng, gen.dim)
        err = max(err, np.max(np.abs(steady_state(gen) - spectral_solve(gen, rho0).evaluate(1e4))))
    return _result("steady_state vs spectral at t=1e4, N=3", err, 1e-8)


def oracle_werner() -> OracleResult:
    singlet = np.array([0, 1, -1, 0]) / np.sqrt(2)
    P = np.outer(singlet, singlet)
    err = 0.0
    for p in np.linspace(0, 1, 41):
        rho = p * P + (1 - p) * np.eye(4) / 4
        err = max(err, abs(concurrence(rho) - max(0.0, (3 * p - 1) / 2)))
    return _result("Werner-state concurrence max(0, (3p-1)/2)", err, 1e-12)


def oracle_cptp(seed=7) -> OracleResult:
    rng = np.random.default_rng(seed)
    grid = EvolutionGrid(t_max=200.0, n_points=100)
    worst = 0.0
    ok = True
    for n in (2, 3, 4):
        gen, _ = _random_generator(rng, n)
        res = cptp_check(gen, _random_state(rng, gen.dim), grid)
        ok &= res["passed"]
        worst = max(worst, res["trace_error"], res["hermiticity"], -res["min_eigenvalue"])
    out = _result("CPTP contract along random trajectories, N=2..4", worst, 1e-8)
    out.passed = bool(ok)
    return out


def oracle_cptp_mutation(seed=7) -> OracleResult:
    rng = np.random.default_rng(seed)
    gen, _ = _random_generator(rng, 3)
    res = cptp_check(anticommutator_flipped(gen), _random_state(rng, gen.dim),
                     EvolutionGrid(t_max=50.0, n_points=50))
    # passes when the mutant is caught
    return OracleResult("CPTP suite catches a sign-flipped dissipator",
                        res["trace_error"], 1e-10, not res["passed"],
                        f"mutant trace error {res['trace_error']:.3g}")


def oracle_symmetry_orbit() -> OracleResult:
    lat = build_triangular7()
    params = ModelParams.preset("ising")
    fields = assign_fields(lat, 1.0, 1.0)
    gen = build_liouvillian(build_hamiltonian(params, lat, fields),
                            build_lindblad_ops(params, lat.n_sites))
    border = [s - 1 for s in lat.border]
    err = 0.0
    for t, rho in iter_states(gen, initial_state("separable", 7),
                              EvolutionGrid(t_max=100.0, n_points=100)):
        sz = [spin_z(rho, s + 1) for s in border]
        err = max(err, max(sz) - min(sz))
    syms = [p for p in automorphisms(lat, fields) if p != tuple(range(7))]
    rho_ss = steady_state(gen, syms)
    from ..evolve import _basis_permutation
    for p in syms:
        m = _basis_permutation(p, 7)
        P = np.zeros_like(rho_ss)
        P[np.ix_(m, m)] = rho_ss
        err = max(err, np.max(np.abs(P - rho_ss)))
    return _result(f"border <Sz> orbit and steady-state invariance ({len(syms) + 1} automorphisms)",
                   err, 1e-9)


def oracle_matrix_free(seed=3) -> OracleResult:
    rng = np.random.default_rng(seed)
    err = 0.0
    for n in (2, 4, 7):
        lat = build_triangular7() if n == 7 else build_lattice(
            n, [(i, i + 1) for i in range(1, n)])
        params = ModelParams.preset("xyz", nbar=0.05, B1=0.1)
        gen = build_liouvillian(build_hamiltonian(params, lat),
                                build_lindblad_ops(params, n))
        v = vectorize(_random_state(rng, gen.dim))
        err = max(err, np.max(np.abs(gen.matvec(v) - gen.sparse @ v)))
    return _result("matrix-free action vs assembled sparse generator", err, 1e-12)


ORACLES = {
    "single_spin_decay": oracle_single_spin_decay,
    "thermal_spin": oracle_thermal_spin,
    "damping_spectrum": oracle_amplitude_damping_spectrum,
    "backend_equivalence": oracle_backend_equivalence,
    "steady_vs_spectral": oracle_steady_vs_spectral,
    "werner": oracle_werner,
    "cptp": oracle_cptp,
    "cptp_mutation": oracle_cptp_mutation,
    "symmetry_orbit": oracle_symmetry_orbit,
    "matrix_free": oracle_matrix_free,
}


def run_oracles(names=None) -> list[OracleResult]:
    out = []
    for name in names or ORACLES:
        try:
            out.append(ORACLES[name]())
        except Exception as exc:  # a crashing oracle is a failed oracle
            out.append(OracleResult(name, float("nan"), 0.0, False,
                                    f"{type(exc).__name__}: {exc}"))
    return out


def validate(names=None, stream=None) -> int:
    """Run the oracles, print a report, return the exit status."""
    stream = stream or sys.stdout
    results = run_oracles(names)
    for r in results:
        print(r.line(), file=stream)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} oracles passed", file=stream)
    return 1 if failed else 0
