"""Sparse weight matrices with neighborhood structure."""

import numpy as np
import scipy.sparse as sp

from .errors import InvalidArgument

FACTOR_TOL = 1e-12


class WeightMatrix:
    """Nonnegative averaging weights ``Omega`` stored as CSR.

    Parameters
    ----------
    matrix : array_like or scipy sparse matrix, shape (m, m)
    w : array_like, optional
        Positive vertex weights of a factorization ``Omega = Diag(w)^-1 Omega_hat``.
    omega_hat : array_like or sparse, optional
        Symmetric factor; must be given together with ``w``.
    """

    def __init__(self, matrix, w=None, omega_hat=None):
        M = sp.csr_matrix(matrix, dtype=float)
        if M.shape[0] != M.shape[1]:
            raise InvalidArgument(f"weight matrix must be square, got {M.shape}")
        if M.nnz and not np.all(np.isfinite(M.data)):
            raise InvalidArgument("weight matrix has non-finite entries")
        M.sum_duplicates()
        M.sort_indices()
        self.csr = M
        self.w = None
        self.omega_hat = None
        if (w is None) != (omega_hat is None):
            raise InvalidArgument("factorization needs both w and omega_hat")
        if w is not None:
            self._set_factorization(w, omega_hat)

    def _set_factorization(self, w, omega_hat):
        w = np.asarray(w, dtype=float).ravel()
        H = sp.csr_matrix(omega_hat, dtype=float)
        if w.shape != (self.m,) or H.shape != self.csr.shape:
            raise InvalidArgument("factorization shapes do not match the weight matrix")
        if np.any(w <= 0):
            raise InvalidArgument("factorization weights w must be positive")
        asym = abs(H - H.T).max() if H.nnz else 0.0
        if asym > FACTOR_TOL:
            raise InvalidArgument(f"omega_hat is not symmetric (deviation {asym:.3g})")
        dev = abs(sp.diags(1.0 / w) @ H - self.csr).max() if (H.nnz or self.csr.nnz) else 0.0
        if dev > FACTOR_TOL:
            raise InvalidArgument(f"Omega != Diag(w)^-1 omega_hat (deviation {dev:.3g})")
        self.w = w
        self.omega_hat = H

    @classmethod
    def from_dense(cls, A, **kw):
        return cls(np.asarray(A, dtype=float), **kw)

    @classmethod
    def from_entries(cls, m, entries):
        """Build from ``(i, k, omega)`` triples; duplicates are summed."""
        entries = list(entries)
        if not entries:
            return cls(sp.csr_matrix((m, m)))
        i, k, v = (np.asarray(c) for c in zip(*entries))
        i = i.astype(int)
        k = k.astype(int)
        if i.min() < 0 or k.min() < 0 or max(i.max(), k.max()) >= m:
            raise InvalidArgument("edge index out of range")
        return cls(sp.coo_matrix((v.astype(float), (i, k)), shape=(m, m)))

    @classmethod
    def from_symmetric(cls, omega_hat, w=None):
        """Form ``Diag(w)^-1 omega_hat``; ``w`` defaults to the row sums (row-stochastic result)."""
        H = sp.csr_matrix(omega_hat, dtype=float)
        if w is None:
            w = np.asarray(H.sum(axis=1)).ravel()
        w = np.asarray(w, dtype=float)
        return cls(sp.diags(1.0 / w) @ H, w=w, omega_hat=H)

    @property
    def m(self):
        return self.csr.shape[0]

    @property
    def has_factorization(self):
        return self.w is not None

    def dense(self):
        return self.csr.toarray()

    @property
    def nonnegative(self):
        return bool(np.all(self.csr.data >= 0))

    @property
    def positive_diagonal(self):
        return bool(np.all(self.csr.diagonal() > 0))

    @property
    def row_sums(self):
        return np.asarray(self.csr.sum(axis=1)).ravel()

    @property
    def row_stochastic(self):
        return bool(np.allclose(self.row_sums, 1.0, atol=1e-12, rtol=0))

    def pattern(self):
        P = self.csr.copy()
        P.data = np.ones_like(P.data)
        P.eliminate_zeros()
        return P

    @property
    def symmetric_neighborhood(self):
        P = self.pattern()
        return (P != P.T).nnz == 0

    @property
    def neighborhood_sizes(self):
        # N_i always contains i
        P = self.pattern().tolil()
        P.setdiag(1.0)
        return np.asarray(P.tocsr().sum(axis=1)).ravel().astype(int)

    def apply(self, S):
        """``Omega @ S`` for an ``(m, n)`` state."""
        S = np.asarray(S, dtype=float)
        if S.shape[0] != self.m:
            raise InvalidArgument(f"state has {S.shape[0]} rows, weights have {self.m}")
        return self.csr @ S

    def __matmul__(self, other):
        return self.apply(other)

    def __repr__(self):
        fac = ", factorized" if self.has_factorization else ""
        return f"WeightMatrix(m={self.m}, nnz={self.csr.nnz}{fac})"


def as_weights(obj):
    if isinstance(obj, WeightMatrix):
        return obj
    return WeightMatrix(obj)
