"""Spin-1/2 operators, the XYZ lattice Hamiltonian and thermal jump operators.

Basis convention: site 1 is the most significant bit of the computational
basis index and spin up is bit value 0, so index 0 is ``|up up ... up>``.
Operators on fewer than 5 sites are dense ``ndarray``; larger ones are CSR.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .lattice import FieldAssignment, LatticeSpec, assign_fields

__all__ = [
    "ModelParams",
    "ANISOTROPY_PRESETS",
    "SPIN_MATRICES",
    "site_operator",
    "build_hamiltonian",
    "build_lindblad_ops",
    "total_spin",
    "SPARSE_THRESHOLD",
]

SPARSE_THRESHOLD = 5

SPIN_MATRICES = {
    "Sx": np.array([[0, 0.5], [0.5, 0]], dtype=complex),
    "Sy": np.array([[0, -0.5j], [0.5j, 0]], dtype=complex),
    "Sz": np.array([[0.5, 0], [0, -0.5]], dtype=complex),
    # S+ = Sx + iSy raises |down> (index 1) to |up> (index 0)
    "S+": np.array([[0, 1], [0, 0]], dtype=complex),
    "S-": np.array([[0, 0], [1, 0]], dtype=complex),
}

# (gamma, delta)
ANISOTROPY_PRESETS = {
    "ising": (1.0, 0.0),
    "xxx": (0.0, 0.5),
    "xyz": (0.5, 1.0),
}


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters; energies and rates are in units of ``omega``.

    ``omega`` multiplies every energy and rate, so with the default
    ``omega = 1`` simulation time is the dimensionless ``T = omega * t``.
    """

    gamma: float
    delta: float
    J: float = 0.05
    omega: float = 1.0
    Gamma: float = 0.05
    nbar: float = 0.0
    B1: float = 1.0
    B2: float = 1.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.Gamma < 0:
            raise ValueError(f"Gamma must be non-negative, got {self.Gamma}")
        if self.nbar < 0:
            raise ValueError(f"nbar must be non-negative, got {self.nbar}")
        if self.B1 < 0 or self.B2 < 0:
            raise ValueError(f"field strengths must be non-negative, got ({self.B1}, {self.B2})")

    @classmethod
    def preset(cls, name: str, **overrides) -> "ModelParams":
        try:
            gamma, delta = ANISOTROPY_PRESETS[name.lower()]
        except KeyError:
            raise ValueError(f"unknown anisotropy preset {name!r}; "
                             f"known: {sorted(ANISOTROPY_PRESETS)}") from None
        return cls(gamma=gamma, delta=delta, **overrides)

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    @property
    def preset_name(self) -> str | None:
        for name, gd in ANISOTROPY_PRESETS.items():
            if gd == (self.gamma, self.delta):
                return name
        return None


@lru_cache(maxsize=256)
def _site_operator_csr(kind: str, site: int, n_sites: int) -> sp.csr_matrix:
    left = sp.identity(2 ** (site - 1), dtype=complex, format="csr")
    right = sp.identity(2 ** (n_sites - site), dtype=complex, format="csr")
    op = sp.kron(sp.kron(left, sp.csr_matrix(SPIN_MATRICES[kind])), right, format="csr")
    op.eliminate_zeros()
    return op


def _use_sparse(n_sites: int, sparse: bool | None) -> bool:
    return n_sites >= SPARSE_THRESHOLD if sparse is None else sparse


def site_operator(kind: str, site: int, n_sites: int, sparse: bool | None = None):
    """Embed a single-site spin operator into the ``2**n_sites`` Hilbert space.

    Parameters
    ----------
    kind : {'Sx', 'Sy', 'Sz', 'S+', 'S-'}
    site : int
        1-based site label.
    n_sites : int
    sparse : bool, optional
        Force the representation; by default CSR for ``n_sites >= 5``.
    """
    if kind not in SPIN_MATRICES:
        raise ValueError(f"unknown operator kind {kind!r}")
    if not 1 <= site <= n_sites:
        raise ValueError(f"site {site} outside 1..{n_sites}")
    op = _site_operator_csr(kind, site, n_sites)
    return op.copy() if _use_sparse(n_sites, sparse) else op.toarray()


def total_spin(kind: str, n_sites: int, sparse: bool | None = None):
    ops = [_site_operator_csr(kind, s, n_sites) for s in range(1, n_sites + 1)]
    tot = sum(ops[1:], ops[0]).tocsr()
    return tot if _use_sparse(n_sites, sparse) else tot.toarray()


def build_hamiltonian(params: ModelParams, lattice: LatticeSpec,
                      fields: FieldAssignment | None = None,
                      sparse: bool | None = None):
    """Nearest-neighbour XYZ exchange plus an inhomogeneous z field.

    ``H = sum_<ij> J[(1+g)/2 SxSx + (1-g)/2 SySy + d SzSz] + sum_i h_i Sz_i``,
    all multiplied by ``omega``.  When ``fields`` is omitted the field layout
    is taken from ``params.B1``/``params.B2``.
    """
    n = lattice.n_sites
    if fields is None:
        fields = assign_fields(lattice, params.B1, params.B2)
    if len(fields) != n:
        raise ValueError(f"field vector has {len(fields)} entries for {n} sites")

    cx = 0.5 * (1 + params.gamma) * params.J
    cy = 0.5 * (1 - params.gamma) * params.J
    cz = params.delta * params.J
    ops = {k: [None] + [_site_operator_csr(k, s, n) for s in range(1, n + 1)]
           for k in ("Sx", "Sy", "Sz")}

    H = sp.csr_matrix((2 ** n, 2 ** n), dtype=complex)
    for i, j in sorted(lattice.edges):
        for c, k in ((cx, "Sx"), (cy, "Sy"), (cz, "Sz")):
            if c != 0:
                H = H + c * (ops[k][i] @ ops[k][j])
    for s in lattice.sites:
        if fields[s] != 0:
            H = H + fields[s] * ops["Sz"][s]
    H = (params.omega * H).tocsr()
    H.eliminate_zeros()
    return H if _use_sparse(n, sparse) else H.toarray()


def build_lindblad_ops(params: ModelParams, n_sites: int,
                       sparse: bool | None = None) -> list:
    """Thermal jump operators, one relaxing and one exciting per site.

    Returns ``2 * n_sites`` operators: the first ``n_sites`` are
    ``sqrt(Gamma (nbar + 1)) S-_k`` and the rest ``sqrt(Gamma nbar) S+_k``.
    At ``nbar = 0`` the exciting family is identically zero but still listed.
    """
    rate = params.Gamma * params.omega
    down = np.sqrt(rate * (params.nbar + 1))
    up = np.sqrt(rate * params.nbar)
    ops = [down * site_operator("S-", k, n_sites, sparse) for k in range(1, n_sites + 1)]
    ops += [up * site_operator("S+", k, n_sites, sparse) for k in range(1, n_sites + 1)]
    return ops
