"""Initial states, two-site reduced states, concurrence, tau2 and <Sz>."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "initial_state",
    "partial_trace",
    "pair_states",
    "concurrence",
    "tau2",
    "spin_z",
    "spin_z_all",
    "ObservableRecord",
    "observable_record",
    "DEFAULT_PAIRS",
    "DEFAULT_TAU2_SITES",
    "SUMMARY_ZERO",
]

DEFAULT_PAIRS = ((1, 2), (1, 4), (1, 5), (1, 7))
DEFAULT_TAU2_SITES = (1, 4)

PSD_TOL = 1e-8
# concurrences below this are shown as zero in summaries
SUMMARY_ZERO = 1e-10

_SYSY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))
_SWAP = np.array([0, 2, 1, 3])

_KIND_ALIASES = {
    "separable": "separable", "s": "separable", "psi_s": "separable",
    "w_state": "w_state", "w": "w_state", "psi_w": "w_state",
    "max_entangled": "max_entangled", "m": "max_entangled", "psi_m": "max_entangled",
}


def _n_sites(rho) -> int:
    d = np.shape(rho)[0]
    n = int(round(np.log2(d)))
    if 2 ** n != d:
        raise ValueError(f"dimension {d} is not a power of two")
    return n


def _basis_index(bits: Sequence[int]) -> int:
    # bits[0] is site 1 (most significant); 0 = up, 1 = down
    out = 0
    for b in bits:
        out = (out << 1) | b
    return out


def initial_state(kind: str, n_sites: int) -> np.ndarray:
    """Pure-state density matrix of one of the three reference states.

    ``separable``
        all spins up.
    ``w_state``
        equal superposition of the ``n_sites`` states with a single up spin.
    ``max_entangled``
        ``(|up down> + |down up>)/sqrt(2)`` on sites 1, 2, all others down.
    """
    try:
        kind = _KIND_ALIASES[kind.lower()]
    except KeyError:
        raise ValueError(f"unknown initial state {kind!r}") from None
    if n_sites < 2:
        raise ValueError("initial states need at least two sites")
    d = 2 ** n_sites
    psi = np.zeros(d, dtype=complex)
    if kind == "separable":
        psi[0] = 1
    elif kind == "w_state":
        for k in range(n_sites):
            bits = [1] * n_sites
            bits[k] = 0
            psi[_basis_index(bits)] = 1 / np.sqrt(n_sites)
    else:
        rest = [1] * (n_sites - 2)
        psi[_basis_index([0, 1] + rest)] = 1 / np.sqrt(2)
        psi[_basis_index([1, 0] + rest)] = 1 / np.sqrt(2)
    return np.outer(psi, psi.conj())


def _rdm_subscripts(n: int, keep: Sequence[int]) -> str:
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    if 2 * n > len(letters):
        raise ValueError(f"partial trace supports at most {len(letters) // 2} sites")
    row = list(letters[:n])
    col = list(letters[n:2 * n])
    for s in range(n):
        if s not in keep:
            col[s] = row[s]
    out = [row[s] for s in keep] + [col[s] for s in keep]
    return "".join(row + col) + "->" + "".join(out)


def partial_trace(rho, keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix of the sites in ``keep`` (1-based, ordered).

    The first site of ``keep`` is the most significant qubit of the result.
    """
    rho = np.asarray(rho)
    n = _n_sites(rho)
    keep0 = [int(s) - 1 for s in keep]
    if len(set(keep0)) != len(keep0):
        raise ValueError(f"sites in {tuple(keep)} must be distinct")
    for s in keep0:
        if not 0 <= s < n:
            raise ValueError(f"site {s + 1} outside 1..{n}")
    t = rho.reshape((2,) * (2 * n))
    k = 2 ** len(keep0)
    return np.einsum(_rdm_subscripts(n, keep0), t).reshape(k, k)


def pair_states(rho, pairs: Iterable[Sequence[int]]) -> dict:
    """Two-site reduced states keyed by pair."""
    rho = np.asarray(rho)
    n = _n_sites(rho)
    t = rho.reshape((2,) * (2 * n))
    out = {}
    for i, j in pairs:
        out[(i, j)] = np.einsum(_rdm_subscripts(n, [i - 1, j - 1]), t).reshape(4, 4)
    return out


def concurrence(rho2, psd_tol: float = PSD_TOL) -> float:
    """Wootters concurrence of a two-qubit state.

    Uses the square roots of the eigenvalues of ``rho rho_tilde`` with
    ``rho_tilde = (sy x sy) rho* (sy x sy)``, which equal the eigenvalues of
    ``sqrt(sqrt(rho) rho_tilde sqrt(rho))``.

    The value is computed on a fixed representative of ``{rho, SWAP rho SWAP}``
    so that both orderings of a pair give bit-identical results.

    Raises
    ------
    ValueError
        If ``rho2`` is not 4x4 or has an eigenvalue below ``-psd_tol``.
    """
    rho2 = np.asarray(rho2, dtype=complex)
    if rho2.shape != (4, 4):
        raise ValueError(f"expected a 4x4 two-qubit state, got {rho2.shape}")
    swapped = np.ascontiguousarray(rho2[np.ix_(_SWAP, _SWAP)])
    if swapped.tobytes() < np.ascontiguousarray(rho2).tobytes():
        rho2 = swapped
    herm = 0.5 * (rho2 + rho2.conj().T)
    if np.linalg.eigvalsh(herm)[0] < -psd_tol:
        raise ValueError("two-qubit state is not positive semidefinite")
    rho_tilde = _SYSY @ rho2.conj() @ _SYSY
    ev = np.linalg.eigvals(rho2 @ rho_tilde).real
    # the PSD check above bounds how negative these can get
    ev = np.clip(ev, 0, None)
    eps = np.sort(np.sqrt(ev))[::-1]
    return float(max(0.0, eps[0] - eps[1] - eps[2] - eps[3]))


def tau2(rho, site: int) -> float:
    """Sum of squared concurrences between ``site`` and every other site."""
    n = _n_sites(rho)
    pairs = [(site, j) for j in range(1, n + 1) if j != site]
    states = pair_states(rho, pairs)
    return float(sum(concurrence(r) ** 2 for r in states.values()))


def spin_z(rho, site: int) -> float:
    """``tr(rho Sz_site)``."""
    rho = np.asarray(rho)
    n = _n_sites(rho)
    if not 1 <= site <= n:
        raise ValueError(f"site {site} outside 1..{n}")
    diag = np.diagonal(rho)
    bit = (np.arange(rho.shape[0]) >> (n - site)) & 1
    val = 0.5 * np.sum(diag * (1 - 2 * bit))
    if abs(val.imag) > 1e-10:
        raise ValueError(f"<Sz> has imaginary part {val.imag:.3g}; state not Hermitian")
    return float(val.real)


def spin_z_all(rho) -> np.ndarray:
    n = _n_sites(rho)
    return np.array([spin_z(rho, s) for s in range(1, n + 1)])


@dataclass
class ObservableRecord:
    """Observables of one snapshot."""

    time: float
    concurrences: dict = field(default_factory=dict)
    tau2: dict = field(default_factory=dict)
    spin_z: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def row(self, pairs, tau2_sites) -> list[float]:
        return ([self.time] + [self.concurrences[p] for p in pairs]
                + [self.tau2[s] for s in tau2_sites] + list(self.spin_z))


def observable_record(rho, time: float = 0.0, pairs=DEFAULT_PAIRS,
                      tau2_sites=DEFAULT_TAU2_SITES) -> ObservableRecord:
    """Concurrences of ``pairs``, tau2 of ``tau2_sites`` and every <Sz_i>."""
    n = _n_sites(rho)
    pairs = [tuple(p) for p in pairs]
    canon = {p: (min(p), max(p)) for p in pairs}
    needed = set(canon.values())
    for s in tau2_sites:
        needed.update((min(s, j), max(s, j)) for j in range(1, n + 1) if j != s)
    conc = {p: concurrence(r) for p, r in pair_states(rho, sorted(needed)).items()}
    rec = ObservableRecord(time=float(time))
    rec.concurrences = {p: conc[canon[p]] for p in pairs}
    rec.tau2 = {s: float(sum(conc[(min(s, j), max(s, j))] ** 2
                             for j in range(1, n + 1) if j != s))
                for s in tau2_sites}
    rec.spin_z = spin_z_all(rho)
    return rec
