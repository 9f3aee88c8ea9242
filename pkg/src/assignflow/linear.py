"""The linear assignment flow ``V' = R_Shat(Omega V) + b`` on the tangent space."""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, InvalidArgument, RangeError, ResourceLimitError
from .simplex import exp_map, is_interior, project_tangent, replicator_apply
from .stability import DENSE_CAP
from .weights import as_weights

RANGE_TOL = 1e-8
C1_TOL = 1e-10


@dataclass
class LinearSystem:
    """System data; vectors are stored as ``(m, n)`` arrays (row-stacked when flattened)."""

    Shat: np.ndarray
    Omega: object
    b: np.ndarray | None = None
    W0: np.ndarray | None = None

    def __post_init__(self):
        self.Omega = as_weights(self.Omega)
        self.Shat = np.atleast_2d(np.asarray(self.Shat, dtype=float))
        if self.Shat.shape[0] != self.Omega.m:
            raise InvalidArgument("Shat and Omega disagree on the number of vertices")
        if not is_interior(self.Shat):
            raise DomainError("Shat must be strictly positive")
        if self.b is not None:
            self.b = np.asarray(self.b, dtype=float).reshape(self.Shat.shape)
            dev = np.abs(self.b.sum(axis=1)).max()
            if dev > 1e-12:
                raise InvalidArgument(f"b is not tangent (row sums up to {dev:.3g})")
        if self.W0 is None:
            self.W0 = np.full_like(self.Shat, 1.0 / self.n)
        self.W0 = np.atleast_2d(np.asarray(self.W0, dtype=float))
        if self.W0.shape != self.Shat.shape or not is_interior(self.W0):
            raise DomainError("W0 must be a strictly positive state of the same shape as Shat")

    @property
    def m(self):
        return self.Shat.shape[0]

    @property
    def n(self):
        return self.Shat.shape[1]

    @property
    def size(self):
        return self.m * self.n

    @property
    def homogeneous(self):
        return self.b is None or not np.any(self.b)

    def dense(self, cap=DENSE_CAP):
        """Materialize ``A = blockdiag(R_Shat_i) (Omega kron I_n)``."""
        if self.size > cap:
            raise ResourceLimitError(f"system size {self.size} exceeds dense cap {cap}")
        n = self.n
        R = sp.block_diag([np.diag(s) - np.outer(s, s) for s in self.Shat])
        K = sp.kron(self.Omega.csr, sp.identity(n))
        return np.asarray((R @ K).toarray())


def laf_operator_apply(sys, V, inhomogeneous=False):
    """Matrix-free ``A V`` (plus ``b`` if requested); returns a flat vector."""
    V = np.asarray(V, dtype=float)
    if V.size != sys.size:
        raise InvalidArgument(f"vector of length {V.size} does not match system size {sys.size}")
    X = V.reshape(sys.m, sys.n)
    out = replicator_apply(sys.Shat, sys.Omega.apply(X))
    if inhomogeneous and sys.b is not None:
        out = out + sys.b
    return out.ravel()


def homogenize(sys, V0=None):
    """Move a constant term ``b`` into the initial value.

    Returns ``(homogeneous_system, V0 + A^+ b, shift)`` with ``shift = -A^+ b``,
    so that the inhomogeneous trajectory equals the homogeneous one plus ``shift``.
    """
    V0 = np.zeros(sys.size) if V0 is None else np.asarray(V0, dtype=float).ravel()
    hom = LinearSystem(sys.Shat, sys.Omega, None, sys.W0)
    if sys.homogeneous:
        return hom, V0.copy(), np.zeros(sys.size)
    A = sys.dense()
    b = sys.b.ravel()
    x = np.linalg.pinv(A) @ b
    res = np.abs(A @ x - b).max()
    if res > RANGE_TOL:
        raise RangeError(f"b is not in the range of A (least-squares residual {res:.3g})")
    return hom, V0 + x, -x


def _rk4_linear(A, V0, t, steps=1000):
    h = t / steps
    V = V0.copy()
    for _ in range(steps):
        k1 = A @ V
        k2 = A @ (V + 0.5 * h * k1)
        k3 = A @ (V + 0.5 * h * k2)
        k4 = A @ (V + h * k3)
        V = V + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return V


def propagate(sys, V0, t, method="auto", cond_max=1e10):
    """Evaluate the trajectory at time ``t``.

    ``method='eigen'`` uses the eigen-expansion, ``'rk4'`` dense RK4 with
    step ``t/1000``. ``'auto'`` picks the eigen-expansion unless the
    eigenvector matrix is ill-conditioned (defective ``A``). A nonzero ``b``
    is handled through :func:`homogenize`.
    """
    V0 = np.asarray(V0, dtype=float).ravel()
    if V0.size != sys.size:
        raise InvalidArgument("V0 does not match system size")
    if method not in ("auto", "eigen", "rk4"):
        raise InvalidArgument(f"unknown method {method!r}")
    shift = np.zeros(sys.size)
    if not sys.homogeneous:
        sys, V0, shift = homogenize(sys, V0)
    if t == 0:
        return V0 + shift
    A = sys.dense()
    if method != "rk4":
        lam, Q = np.linalg.eig(A)
        if method == "eigen" or np.linalg.cond(Q) < cond_max:
            c = np.linalg.solve(Q, V0)
            return (Q @ (np.exp(lam * t) * c)).real + shift
    return _rk4_linear(A, V0, t) + shift


def laf_spectrum_report(sys, tol=1e-9):
    """Eigenvalues of ``A`` and checks of their structural properties."""
    A = sys.dense()
    lam = np.linalg.eigvals(A)
    rank = int(np.linalg.matrix_rank(A, tol=tol * max(1.0, np.abs(A).max())))
    Om = sys.Omega
    Omd = Om.dense()
    nz = lam[np.abs(lam) > tol]
    realness = bool(np.abs(lam.imag).max(initial=0.0) < 1e-8)
    if nz.size == 0:
        positivity = "zero"
    elif realness and np.all(nz.real > 0):
        positivity = "positive"
    elif realness and np.all(nz.real < 0):
        positivity = "negative"
    else:
        positivity = "mixed"
    checks = {}
    invertible = abs(np.linalg.det(Omd)) > 1e-12
    if invertible:
        checks["rank_is_m(n-1)"] = rank == sys.m * (sys.n - 1)
    if Om.has_factorization:
        checks["all_real"] = realness
    sym = np.allclose(Omd, Omd.T, atol=1e-12)
    if sym and np.all(np.linalg.eigvalsh(Omd) > 0):
        checks["nonzero_positive"] = positivity == "positive" and nz.size == sys.m * (sys.n - 1)
    if np.all(np.diag(Omd) >= 0) and np.any(np.diag(Omd) > 0):
        checks["some_positive_real_part"] = bool(lam.real.max() > 0)
    return {
        "eigenvalues": lam,
        "rank": rank,
        "nullspace_dim": sys.size - rank,
        "realness": realness,
        "positivity_class": positivity,
        "checks": checks,
    }


def _power(M, x0, tol, max_iter):
    x = x0 / np.linalg.norm(x0)
    for _ in range(max_iter):
        y = M @ x
        ny = np.linalg.norm(y)
        if ny == 0:
            return None, None
        y /= ny
        # fix the sign so consecutive iterates are comparable
        if np.dot(y, x) < 0:
            y = -y
        if np.linalg.norm(y - x) < tol:
            return float(y @ (M @ y)), y
        x = y
    return None, None


def _block_project(x, m, n):
    return project_tangent(x.reshape(m, n)).ravel()


@dataclass
class DominantMode:
    eigenvalue: complex
    vector: np.ndarray
    left: np.ndarray
    c1: float | None
    method: str
    determinate: bool


def dominant_mode(sys, V0, tol=1e-10, max_iter=100_000, seed=0):
    """Eigenpair of ``A`` with the largest real part, restricted to the tangent space.

    Uses shifted power iteration on ``A + sigma I`` (right and left) and
    falls back to a full eigendecomposition if it does not converge.
    ``c1`` is the coefficient of ``V0`` along the dominant direction.
    """
    A = sys.dense()
    m, n = sys.m, sys.n
    V0 = np.asarray(V0, dtype=float).ravel()
    sigma = np.abs(A).sum(axis=1).max()
    M = A + sigma * np.eye(sys.size)
    rng = np.random.default_rng(seed)
    start = _block_project(rng.standard_normal(sys.size), m, n)
    mu, v = _power(M, start, tol, max_iter)
    mu_l, u = _power(M.T, start, tol, max_iter) if v is not None else (None, None)
    method = "power"
    if v is None or u is None or abs(mu - mu_l) > 1e-6 * max(1.0, abs(mu)):
        method = "eig"
        lam, Q = np.linalg.eig(A)
        # only tangent eigenvectors are relevant
        tangent = np.array([np.abs(Q[:, k].reshape(m, n).sum(axis=1)).max() < 1e-8 for k in range(len(lam))])
        cand = np.flatnonzero(tangent) if tangent.any() else np.arange(len(lam))
        k = cand[np.argmax(lam[cand].real)]
        lam1 = lam[k]
        if abs(lam1.imag) > 1e-10:
            return DominantMode(lam1, Q[:, k], Q[:, k], None, method, False)
        v = Q[:, k].real
        v /= np.linalg.norm(v)
        lamL, P = np.linalg.eig(A.T)
        kl = np.argmin(np.abs(lamL - lam1))
        u = P[:, kl].real
        mu = lam1.real + sigma
    lam1 = mu - sigma
    denom = float(u @ v)
    c1 = float(u @ V0) / denom if abs(denom) > 1e-14 else None
    det = c1 is not None and abs(c1) > C1_TOL
    return DominantMode(lam1, v, u, c1, method, det)


def lift_direction_limit(d, p, tie_tol=1e-12):
    """Row-wise limit of ``exp_p(t d)`` as ``t -> inf``.

    Each row is supported on the argmax set of ``d_i`` with weights
    proportional to ``p_i`` on that set. Returns ``(limit, tie_mask)``.
    """
    d = np.atleast_2d(np.asarray(d, dtype=float))
    p = np.atleast_2d(np.asarray(p, dtype=float))
    if d.shape != p.shape:
        raise InvalidArgument("direction and base point differ in shape")
    top = d.max(axis=1, keepdims=True)
    scale = np.maximum(1.0, np.abs(top))
    arg = d >= top - tie_tol * scale
    out = np.where(arg, p, 0.0)
    out /= out.sum(axis=1, keepdims=True)
    return out, arg.sum(axis=1) > 1


def lift_limit(v, W0):
    """Limit of the lifted line ``exp_W0(t v / W0)``; returns ``(limit, tie_mask)``."""
    W0 = np.atleast_2d(np.asarray(W0, dtype=float))
    v = np.asarray(v, dtype=float).reshape(W0.shape)
    return lift_direction_limit(v / W0, W0)


def predict_lifted_limit(sys, V0):
    """Predict the limit of ``exp_W0(V(t)/W0)`` from the dominant eigenvector.

    Returns ``(limit or None, info)``; ``None`` means the prediction is
    indeterminate (vanishing ``c1``, complex or nonpositive dominant eigenvalue).
    """
    hom, V0h, _ = homogenize(sys, V0)
    mode = dominant_mode(hom, V0h)
    info = {"eigenvalue": mode.eigenvalue, "c1": mode.c1, "method": mode.method}
    if not mode.determinate or np.real(mode.eigenvalue) <= 0:
        info["reason"] = "indeterminate"
        return None, info
    lim, ties = lift_limit(np.sign(mode.c1) * mode.vector, sys.W0)
    info["ties"] = ties
    return lim, info


def lifted_state(sys, V):
    """``exp_W0(V / W0)`` for a tangent vector ``V``."""
    V = np.asarray(V, dtype=float).reshape(sys.m, sys.n)
    return exp_map(sys.W0, V / sys.W0)
