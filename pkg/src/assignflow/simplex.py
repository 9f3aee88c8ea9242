"""Primitive operations on the probability simplex and the assignment manifold.

Every function accepts either a single point of shape ``(n,)`` or a stack of
points of shape ``(m, n)``; in the latter case the operation acts row-wise,
which is how assignment states (one simplex row per graph vertex) are handled.
"""

import numpy as np

from .errors import DomainError, InvalidArgument

#: entries below this value count as zero for support computations
SUPPORT_TOL = 1e-15


def _pair(p, x):
    p = np.asarray(p, dtype=float)
    x = np.asarray(x, dtype=float)
    if p.shape != x.shape:
        raise InvalidArgument(f"shape mismatch: {p.shape} vs {x.shape}")
    return p, x


def is_interior(p, tol=SUPPORT_TOL):
    return bool(np.all(np.asarray(p) > tol))


def support(p, tol=SUPPORT_TOL):
    """Boolean mask of the entries treated as nonzero."""
    return np.asarray(p) > tol


def barycenter(m, n):
    return np.full((m, n), 1.0 / n)


def replicator_apply(p, x):
    """Apply the replicator matrix ``Diag(p) - p p^T`` to ``x`` without forming it."""
    p, x = _pair(p, x)
    return p * x - np.sum(p * x, axis=-1, keepdims=True) * p


def replicator_matrix(p):
    """Dense replicator matrix of a single point; only for analysis code."""
    p = np.asarray(p, dtype=float)
    return np.diag(p) - np.outer(p, p)


def project_tangent(x):
    x = np.asarray(x, dtype=float)
    return x - x.mean(axis=-1, keepdims=True)


def exp_map(p, v):
    """Lifting map ``p * e^v / <p, e^v>`` based at an interior point ``p``.

    The exponent is shifted by its row maximum first, so arbitrarily large
    arguments do not overflow.
    """
    p, v = _pair(p, v)
    if not np.all(np.isfinite(v)):
        raise InvalidArgument("exp_map: tangent argument has non-finite entries")
    if not is_interior(p):
        raise DomainError("exp_map: base point is not strictly positive")
    return _exp_unchecked(p, v)


def _exp_unchecked(p, v):
    z = p * np.exp(v - v.max(axis=-1, keepdims=True))
    return z / z.sum(axis=-1, keepdims=True)


def inv_exp_map(p, q):
    p, q = _pair(p, q)
    if not (is_interior(p) and is_interior(q)):
        raise DomainError("inv_exp_map: both points must be strictly positive")
    return project_tangent(np.log(q) - np.log(p))


def softmax(v):
    """Rows of ``exp_map`` at the barycenter."""
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise InvalidArgument("softmax: non-finite entries")
    return _exp_unchecked(np.ones_like(v), v)


def _xlogy(x, y):
    # 0 * log 0 := 0
    out = np.zeros_like(x)
    nz = x > 0
    out[nz] = x[nz] * np.log(y[nz])
    return out


def avg_entropy(S):
    """Average normalized entropy of the rows of ``S``, a value in ``[0, 1]``."""
    S = np.atleast_2d(np.asarray(S, dtype=float))
    m, n = S.shape
    if n < 2:
        return 0.0
    h = -_xlogy(S, S).sum() / (m * np.log(n))
    return float(min(max(h, 0.0), 1.0))


def weighted_kl(Sstar, S, w):
    """Weighted KL divergence ``sum_i w_i KL(Sstar_i || S_i)``.

    Returns ``inf`` when the support of ``Sstar`` is not contained in the
    support of ``S``.
    """
    Sstar = np.atleast_2d(np.asarray(Sstar, dtype=float))
    S = np.atleast_2d(np.asarray(S, dtype=float))
    w = np.asarray(w, dtype=float)
    if Sstar.shape != S.shape or w.shape != (S.shape[0],):
        raise InvalidArgument("weighted_kl: inconsistent shapes")
    if np.any(w <= 0):
        raise InvalidArgument("weighted_kl: weights must be positive")
    sup_star = support(Sstar)
    if np.any(sup_star & ~support(S)):
        return float("inf")
    ratio = np.ones_like(S)
    ratio[sup_star] = Sstar[sup_star] / S[sup_star]
    per_row = _xlogy(np.where(sup_star, Sstar, 0.0), ratio).sum(axis=1)
    return float(np.dot(w, per_row))


def lyapunov_value(S, omega_hat):
    """Frobenius inner product ``<S, omega_hat S>`` for symmetric ``omega_hat``."""
    S = np.atleast_2d(np.asarray(S, dtype=float))
    if hasattr(omega_hat, "toarray"):
        asym = abs(omega_hat - omega_hat.T).max() if omega_hat.nnz else 0.0
    else:
        omega_hat = np.asarray(omega_hat, dtype=float)
        asym = np.abs(omega_hat - omega_hat.T).max(initial=0.0)
    if asym > 1e-10:
        raise InvalidArgument(f"lyapunov_value: matrix is not symmetric (deviation {asym:.3g})")
    return float(np.sum(S * (omega_hat @ S)))


def l1_distance_rows(S, Sstar):
    """Per-row l1 distances, shape ``(m,)``."""
    return np.abs(np.asarray(S) - np.asarray(Sstar)).sum(axis=-1)


def is_integral(S, tol=1e-12):
    S = np.atleast_2d(np.asarray(S, dtype=float))
    near_one = np.abs(S - 1.0) <= tol
    near_zero = np.abs(S) <= tol
    return bool(np.all(near_one | near_zero) and np.all(near_one.sum(axis=1) == 1))


def one_hot(labels, n):
    labels = np.asarray(labels, dtype=int)
    out = np.zeros((labels.size, n))
    out[np.arange(labels.size), labels] = 1.0
    return out
