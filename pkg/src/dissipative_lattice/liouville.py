"""Liouville-space representation of the Lindblad generator.

Density matrices are column-stacked: ``vec(rho)[a + d*b] = rho[a, b]``.
With that convention ``vec(A rho B) = (B^T kron A) vec(rho)``, and the
generator reads::

    L = -i (I kron H - H^T kron I)
        + sum_k [ conj(L_k) kron L_k - 1/2 I kron L_k^dag L_k
                  - 1/2 (L_k^dag L_k)^T kron I ]
"""
from __future__ import annotations

from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = [
    "vectorize",
    "devectorize",
    "Superoperator",
    "build_liouvillian",
    "apply_liouvillian",
    "state_residuals",
    "is_physical",
    "DENSE_MAX_SITES",
]

DENSE_MAX_SITES = 4

# DensityMatrix tolerances
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-8


def _check_power_of_two(d: int) -> int:
    n = int(round(np.log2(d))) if d > 0 else -1
    if n < 0 or 2 ** n != d:
        raise ValueError(f"dimension {d} is not a power of two")
    return n


def vectorize(rho) -> np.ndarray:
    """Column-stack a square matrix into a vector."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {rho.shape}")
    _check_power_of_two(rho.shape[0])
    return rho.reshape(-1, order="F")


def devectorize(v) -> np.ndarray:
    """Inverse of :func:`vectorize`."""
    v = np.asarray(v)
    d = int(round(np.sqrt(v.size)))
    if v.ndim != 1 or d * d != v.size:
        raise ValueError(f"vector of length {v.size} is not a vectorized square matrix")
    _check_power_of_two(d)
    return v.reshape(d, d, order="F")


def _csr(a) -> sp.csr_matrix:
    return a.tocsr() if sp.issparse(a) else sp.csr_matrix(np.asarray(a, dtype=complex))


def _is_zero(a) -> bool:
    if sp.issparse(a):
        return a.count_nonzero() == 0
    return not np.any(a)


class Superoperator:
    """Lindblad generator acting on vectorized density matrices.

    Holds the Hamiltonian and jump operators and exposes three views of the
    same linear map: a cached sparse matrix, a dense matrix (small systems
    only) and a matrix-free action :meth:`matvec` working on ``d x d``
    matrices directly.
    """

    def __init__(self, H, jumps=(), *, matrix=None):
        if matrix is not None:
            self._explicit = sp.csr_matrix(matrix, dtype=complex)
            D = self._explicit.shape[0]
            self.dim = int(round(np.sqrt(D)))
            _check_power_of_two(self.dim)
            self.H = None
            self.jumps = []
            return
        self._explicit = None
        H = _csr(H)
        if H.shape[0] != H.shape[1]:
            raise ValueError(f"Hamiltonian must be square, got {H.shape}")
        _check_power_of_two(H.shape[0])
        self.dim = H.shape[0]
        self.H = H
        self.jumps = []
        for k, L in enumerate(jumps):
            L = _csr(L)
            if L.shape != H.shape:
                raise ValueError(f"jump operator {k} has shape {L.shape}, "
                                 f"Hamiltonian has {H.shape}")
            if not _is_zero(L):
                self.jumps.append(L)

    @classmethod
    def from_matrix(cls, matrix) -> "Superoperator":
        """Wrap an explicit ``d^2 x d^2`` generator (no matrix-free path)."""
        return cls(None, matrix=matrix)

    @property
    def liouville_dim(self) -> int:
        return self.dim ** 2

    @property
    def n_sites(self) -> int:
        return _check_power_of_two(self.dim)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.liouville_dim, self.liouville_dim)

    # -- assembled views ---------------------------------------------------
    @cached_property
    def hamiltonian_part(self) -> sp.csr_matrix:
        if self._explicit is not None:
            raise ValueError("explicit generator has no Hamiltonian/dissipator split")
        eye = sp.identity(self.dim, dtype=complex, format="csr")
        out = -1j * (sp.kron(eye, self.H) - sp.kron(self.H.T, eye))
        return out.tocsr()

    @cached_property
    def dissipator_part(self) -> sp.csr_matrix:
        if self._explicit is not None:
            raise ValueError("explicit generator has no Hamiltonian/dissipator split")
        eye = sp.identity(self.dim, dtype=complex, format="csr")
        out = sp.csr_matrix(self.shape, dtype=complex)
        for L in self.jumps:
            LdL = (L.conj().T @ L).tocsr()
            out = out + sp.kron(L.conj(), L) - 0.5 * sp.kron(eye, LdL) - 0.5 * sp.kron(LdL.T, eye)
        return out.tocsr()

    @cached_property
    def sparse(self) -> sp.csr_matrix:
        if self._explicit is not None:
            return self._explicit
        out = (self.hamiltonian_part + self.dissipator_part).tocsr()
        out.sum_duplicates()
        out.eliminate_zeros()
        return out

    @cached_property
    def sectors(self) -> np.ndarray:
        """Label of the weakly connected block each Liouville index belongs to.

        Blocks of the sparsity graph are invariant subspaces, so a state
        supported on some blocks never leaves them.
        """
        from scipy.sparse.csgraph import connected_components

        L = self.sparse
        pattern = sp.csr_matrix((np.ones(L.nnz), L.indices, L.indptr), shape=L.shape)
        _, labels = connected_components(pattern, directed=True, connection="weak")
        return labels

    def dense(self) -> np.ndarray:
        if self.n_sites > DENSE_MAX_SITES:
            raise MemoryError(f"dense superoperator refused for N={self.n_sites} "
                              f"(limit N <= {DENSE_MAX_SITES}); use the sparse view")
        return self.sparse.toarray()

    @cached_property
    def _effective(self) -> sp.csr_matrix:
        # K = -iH - 1/2 sum L^dag L, so that drho = K rho + rho K^dag + sum L rho L^dag
        K = -1j * self.H
        for L in self.jumps:
            K = K - 0.5 * (L.conj().T @ L)
        return K.tocsr()

    # -- actions -----------------------------------------------------------
    def apply_matrix(self, rho: np.ndarray) -> np.ndarray:
        """Matrix-free action on a ``d x d`` operator."""
        if self._explicit is not None:
            return devectorize(self._explicit @ vectorize(rho))
        K = self._effective
        rho_dag = rho.conj().T
        out = K @ rho
        out = out + (K @ rho_dag).conj().T
        for L in self.jumps:
            out = out + L @ (L @ rho_dag).conj().T
        return np.asarray(out)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return vectorize(self.apply_matrix(devectorize(v)))

    def as_linear_operator(self) -> spla.LinearOperator:
        return spla.LinearOperator(self.shape, matvec=self.matvec, dtype=complex)

    def __matmul__(self, v):
        return self.sparse @ v

    def __repr__(self):
        kind = "explicit" if self._explicit is not None else f"{len(self.jumps)} jumps"
        return f"Superoperator(N={self.n_sites}, {kind})"


def build_liouvillian(H, jumps=()) -> Superoperator:
    """Assemble the generator ``-i[H, .] + sum_k D[L_k]`` (standard GKSL sign)."""
    return Superoperator(H, jumps)


def apply_liouvillian(op: Superoperator, v) -> np.ndarray:
    """Apply the generator to a vectorized operator without assembling it."""
    v = np.asarray(v)
    if v.shape != (op.liouville_dim,):
        raise ValueError(f"expected a vector of length {op.liouville_dim}, got shape {v.shape}")
    return op.matvec(v)


def state_residuals(rho) -> dict:
    """Deviations of ``rho`` from a valid density matrix.

    Returns ``trace_error`` (``|tr rho - 1|``), ``hermiticity`` (max entry of
    ``|rho - rho^dag|``) and ``min_eigenvalue`` of the Hermitian part.
    """
    rho = np.asarray(rho)
    herm = 0.5 * (rho + rho.conj().T)
    return {
        "trace_error": float(abs(np.trace(rho) - 1)),
        "hermiticity": float(np.max(np.abs(rho - rho.conj().T))),
        "min_eigenvalue": float(np.linalg.eigvalsh(herm)[0]),
    }


def is_physical(rho, trace_tol=TRACE_TOL, herm_tol=HERMITIAN_TOL, psd_tol=PSD_TOL) -> bool:
    r = state_residuals(rho)
    return (r["trace_error"] < trace_tol and r["hermiticity"] < herm_tol
            and r["min_eigenvalue"] > -psd_tol)
