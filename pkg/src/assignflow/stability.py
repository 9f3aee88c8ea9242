"""Equilibria of the S-flow: Jacobians, spectra, stability and basin estimates."""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, PreconditionError, ResourceLimitError
from .simplex import is_integral, support
from .weights import as_weights

DENSE_CAP = 4096
EQ_TOL = 1e-9
STRICT_TOL = 1e-12


def _state(S, m):
    S = np.atleast_2d(np.asarray(S, dtype=float))
    if S.shape[0] != m:
        raise InvalidArgument(f"state has {S.shape[0]} rows, weights have {m}")
    return S


def is_equilibrium(S, Omega, tol=EQ_TOL):
    """Return ``(flag, residual)``.

    The residual is the largest deviation of ``(Omega S)_ij`` from its
    ``S_i``-average over ``j`` in the support of ``S_i``.
    """
    Om = as_weights(Omega)
    S = _state(S, Om.m)
    OS = Om.apply(S)
    avg = np.sum(S * OS, axis=1, keepdims=True)
    dev = np.where(support(S), np.abs(OS - avg), 0.0)
    res = float(dev.max(initial=0.0))
    return res < tol, res


def jacobian(S, Omega, cap=DENSE_CAP):
    """Dense Jacobian of ``S -> R_S(Omega S)`` in row-stacked ordering."""
    Om = as_weights(Omega)
    S = _state(S, Om.m)
    m, n = S.shape
    if m * n > cap:
        raise ResourceLimitError(
            f"dense Jacobian of size {m * n} exceeds cap {cap}; use the closed-form spectra"
        )
    OS = Om.apply(S)
    J = np.zeros((m * n, m * n))
    Omd = Om.dense()
    for i in range(m):
        s, q = S[i], OS[i]
        B = np.diag(q) - np.dot(s, q) * np.eye(n) - np.outer(s, q)
        R = np.diag(s) - np.outer(s, s)
        blk = slice(i * n, (i + 1) * n)
        J[blk, blk] += B
        for k in np.flatnonzero(Omd[i]):
            J[blk, k * n:(k + 1) * n] += Omd[i, k] * R
    return J


def numeric_spectrum(S, Omega, cap=DENSE_CAP):
    return np.linalg.eigvals(jacobian(S, Omega, cap=cap))


def _labels(Sstar):
    if not is_integral(Sstar):
        raise InvalidArgument("state is not integral")
    return np.argmax(Sstar, axis=1)


def margins(Sstar, Omega):
    """Matrix of ``(Omega S*)_{i j*(i)} - (Omega S*)_ij``; the ``j*(i)`` entries are ``inf``."""
    Om = as_weights(Omega)
    Sstar = _state(Sstar, Om.m)
    lab = _labels(Sstar)
    OS = Om.apply(Sstar)
    rows = np.arange(Om.m)
    M = OS[rows, lab][:, None] - OS
    M[rows, lab] = np.inf
    return M


def row_margins(Sstar, Omega):
    return margins(Sstar, Omega).min(axis=1)


def spectrum_integral(Sstar, Omega):
    """Closed-form Jacobian spectrum at an integral equilibrium.

    Returns a list of ``(eigenvalue, vertex, label)`` triples, ``m * n`` in total.
    """
    Om = as_weights(Omega)
    Sstar = _state(Sstar, Om.m)
    lab = _labels(Sstar)
    OS = Om.apply(Sstar)
    out = []
    for i in range(Om.m):
        top = OS[i, lab[i]]
        for j in range(Sstar.shape[1]):
            lam = -top if j == lab[i] else OS[i, j] - top
            out.append((float(lam), i, j))
    return out


def omega_eigenvalues(Omega):
    Om = as_weights(Omega)
    if Om.has_factorization:
        d = 1.0 / np.sqrt(Om.w)
        H = Om.omega_hat.toarray()
        return np.linalg.eigvalsh(d[:, None] * H * d[None, :]).astype(complex)
    return np.linalg.eigvals(Om.dense())


def spectrum_uniform(Jplus, Omega, n):
    """Closed-form Jacobian spectrum at ``(1/|J+|) 1_m 1_{J+}^T``.

    Returns all ``m * n`` eigenvalues as a complex array.
    """
    Jplus = sorted(set(int(j) for j in Jplus))
    k = len(Jplus)
    if k < 2:
        raise InvalidArgument("the uniform equilibrium needs |J+| >= 2")
    if Jplus[0] < 0 or Jplus[-1] >= n:
        raise InvalidArgument(f"labels {Jplus} out of range for n={n}")
    Om = as_weights(Omega)
    r = Om.row_sums / k
    lam = omega_eigenvalues(Om) / k
    return np.concatenate([np.repeat(-r, n - k + 1), np.tile(lam, k - 1)]).astype(complex)


def uniform_support(S, tol=1e-12):
    """``J+`` if every row of ``S`` is the same uniform distribution on ``J+``, else None."""
    S = np.atleast_2d(np.asarray(S, dtype=float))
    Jp = np.flatnonzero(S[0] > tol)
    target = np.zeros(S.shape[1])
    target[Jp] = 1.0 / Jp.size
    if np.abs(S - target).max() <= tol:
        return Jp
    return None


def eps_unif(neighborhood_sizes):
    sizes = np.asarray(neighborhood_sizes)
    if sizes.size == 0 or np.any(sizes < 1):
        raise InvalidArgument("neighborhood sizes must be >= 1")
    return 2.0 / (1.0 + sizes.max())


def _require_stable(Sstar, Omega):
    M = margins(Sstar, Omega)
    if not np.all(M > STRICT_TOL):
        i = int(np.argmin(M.min(axis=1)))
        raise PreconditionError(
            f"S* does not satisfy the strict stability inequalities (vertex {i}, margin {M[i].min():.3g})"
        )
    return M


def eps_est(Sstar, Omega):
    """Radius of an l1 ball around ``S*`` contained in its attraction polytope."""
    Om = as_weights(Omega)
    M = _require_stable(Sstar, Om)
    rs = Om.row_sums[:, None]
    with np.errstate(invalid="ignore"):
        E = np.where(np.isinf(M), np.inf, 2.0 * M / (rs + M))
    return float(E.min())


def in_attraction_polytope(S, Sstar, Omega):
    """Strict inequalities ``(Omega S)_ij < (Omega S)_{i j*(i)}`` for all ``j != j*(i)``."""
    Om = as_weights(Omega)
    S = _state(S, Om.m)
    lab = _labels(_state(Sstar, Om.m))
    OS = Om.apply(S)
    rows = np.arange(Om.m)
    gap = OS[rows, lab][:, None] - OS
    gap[rows, lab] = np.inf
    return bool(np.all(gap > 0))


def convergence_rates(Sstar, Omega, delta=None):
    """Near-equilibrium rate approximation ``beta_i = min_j margin_ij``."""
    M = _require_stable(Sstar, Omega)
    if delta is not None:
        e = eps_est(Sstar, Omega)
        if not 0 < delta < e:
            raise PreconditionError(f"delta={delta} must lie in (0, eps_est={e:.6g})")
    return M.min(axis=1)


def unstable_trace(Sstar, Omega):
    """Trace of the coupling part ``R_S* (Omega kron I)``; positive at nonintegral equilibria."""
    Om = as_weights(Omega)
    S = _state(Sstar, Om.m)
    return float(np.sum(Om.csr.diagonal() * np.sum(S - S ** 2, axis=1)))


@dataclass
class StabilityReport:
    equilibrium: np.ndarray
    residual: float
    classification: str
    spectrum: np.ndarray | None = None
    closed_form_spectrum: np.ndarray | None = None
    eps_est: float | None = None
    eps_unif: float | None = None
    rates: np.ndarray | None = None
    notes: list = field(default_factory=list)

    def to_kv(self):
        m, n = self.equilibrium.shape
        kv = {
            "m": m,
            "n": n,
            "classification": self.classification,
            "residual": f"{self.residual:.6e}",
        }
        if self.spectrum is not None:
            kv["max_real_eig"] = f"{np.max(self.spectrum.real):.12g}"
        if self.closed_form_spectrum is not None:
            kv["max_real_eig_closed_form"] = f"{np.max(np.real(self.closed_form_spectrum)):.12g}"
        if self.eps_est is not None:
            kv["eps_est"] = f"{self.eps_est:.12g}"
        if self.eps_unif is not None:
            kv["eps_unif"] = f"{self.eps_unif:.12g}"
        if self.rates is not None:
            kv["min_rate"] = f"{self.rates.min():.12g}"
        for k, note in enumerate(self.notes):
            kv[f"note{k}"] = note
        return "".join(f"{k}={v}\n" for k, v in kv.items())

    def eigenvalues(self):
        if self.spectrum is not None:
            return self.spectrum
        return self.closed_form_spectrum


def classify(Sstar, Omega, tol=EQ_TOL, cap=DENSE_CAP):
    """Classify an equilibrium and collect spectra and basin estimates."""
    Om = as_weights(Omega)
    S = _state(Sstar, Om.m)
    if not Om.nonnegative:
        raise PreconditionError("weights must be nonnegative")
    if not Om.positive_diagonal:
        raise PreconditionError("weights must have a positive diagonal")
    ok, res = is_equilibrium(S, Om, tol)
    if not ok:
        raise PreconditionError(f"state is not an equilibrium (residual {res:.3g} >= {tol:g})")
    m, n = S.shape
    rep = StabilityReport(equilibrium=S.copy(), residual=res, classification="inconclusive")
    if m * n <= cap:
        rep.spectrum = numeric_spectrum(S, Om, cap=cap)
    else:
        rep.notes.append("dense spectrum skipped: size above cap")

    if is_integral(S):
        rep.closed_form_spectrum = np.array([e for e, _, _ in spectrum_integral(S, Om)], dtype=complex)
        M = margins(S, Om)
        if np.all(M > STRICT_TOL):
            rep.classification = "exp_stable"
            rep.eps_est = eps_est(S, Om)
            rep.rates = M.min(axis=1)
            if is_uniform(Om):
                rep.eps_unif = eps_unif(Om.neighborhood_sizes)
        elif np.any(M < -STRICT_TOL):
            rep.classification = "unstable"
        else:
            rep.classification = "inconclusive"
            rep.notes.append("tie in the stability inequalities")
    else:
        rep.classification = "nonintegral_unstable"
        Jp = uniform_support(S)
        if Jp is not None:
            rep.closed_form_spectrum = spectrum_uniform(Jp, Om, n)
    return rep


def is_uniform(Omega, tol=1e-12):
    """True if every row holds equal weights ``1/|N_i|`` on its neighborhood."""
    Om = as_weights(Omega)
    if not Om.positive_diagonal:
        return False
    sizes = Om.neighborhood_sizes
    C = Om.csr
    row_of = np.repeat(np.arange(Om.m), np.diff(C.indptr))
    return bool(np.all(np.abs(C.data - 1.0 / sizes[row_of]) <= tol))
