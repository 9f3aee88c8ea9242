"""Counterexample constructions for weight matrices outside the convergence assumptions.

Circulant doubly stochastic matrices are written as ``Omega = sum_k mu_k P^k``
with the cyclic shift ``P`` (``P_ij = 1`` iff ``i - j = 1 mod n``). Vectors
indexed by ``k = 1..n`` are stored at array position ``k - 1``, so ``mu_n``
(the coefficient of ``P^n = I``) is the last entry.
"""

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, UnsupportedError
from .flow import integrate_rk4, representative_rhs, sflow_init, w_from_s_path
from .simplex import _exp_unchecked, is_interior
from .weights import WeightMatrix

ZERO_TOL = 1e-12


def n_gamma(n):
    return max((n - 1) // 2, 0)


@dataclass
class CirculantParams:
    n: int
    alpha: float
    beta: float
    gamma: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.gamma = np.atleast_1d(np.asarray(self.gamma, dtype=float))
        if self.n < 2:
            raise InvalidArgument("n must be >= 2")
        if self.gamma.size != n_gamma(self.n):
            raise InvalidArgument(f"n={self.n} needs {n_gamma(self.n)} gamma values, got {self.gamma.size}")
        if abs(self.alpha + self.beta - 1.0) > ZERO_TOL:
            raise InvalidArgument(f"alpha + beta = {self.alpha + self.beta} != 1")
        if self.alpha + self.beta / self.n < -ZERO_TOL:
            raise InvalidArgument("alpha + beta/n >= 0 is violated")
        if np.any(np.abs(self.gamma) > self.beta / self.n + ZERO_TOL):
            raise InvalidArgument("beta/n >= |gamma_k| is violated")

    @classmethod
    def n3(cls, alpha, gamma, beta=None):
        return cls(3, alpha, 1.0 - alpha if beta is None else beta, [gamma])

    @property
    def mu(self):
        n = self.n
        mu = np.full(n, self.beta / n)
        mu[n - 1] += self.alpha
        for k, g in enumerate(self.gamma, start=1):
            mu[k - 1] += g
            mu[n - k - 1] -= g
        return mu


def shift_matrix(n):
    return np.roll(np.eye(n), 1, axis=0)


def circulant(rep):
    """``sum_k rep[k-1] P^k``; entry ``(i, j)`` is ``rep[(i - j - 1) mod n]``."""
    rep = np.asarray(rep, dtype=float)
    n = rep.size
    i, j = np.indices((n, n))
    return rep[(i - j - 1) % n]


def circulant_from_params(params):
    """Circulant doubly stochastic weight matrix of the given parameters."""
    return WeightMatrix(circulant(params.mu))


def representative_of(S, tol=1e-10):
    """Coefficients ``p`` with ``S = sum_k p_k P^k``."""
    S = np.asarray(S.dense() if hasattr(S, "dense") else S, dtype=float)
    n = S.shape[0]
    if S.shape != (n, n):
        raise InvalidArgument("a circulant state must be square")
    p = S[np.arange(1, n + 1) % n, 0]
    dev = np.abs(circulant(p) - S).max()
    if dev > tol:
        raise InvalidArgument(f"state is not circulant (deviation {dev:.3g})")
    return p


def circulant_deviation(S):
    S = np.asarray(S, dtype=float)
    n = S.shape[0]
    return float(np.abs(circulant(S[np.arange(1, n + 1) % n, 0]) - S).max())


def product_diagnostic(p, params):
    """Product ``pi = prod p_j``, its time derivative and the predicted sign."""
    p = np.asarray(p, dtype=float)
    if not is_interior(p):
        raise InvalidArgument("p must be strictly positive")
    Om = circulant(params.mu)
    pi = float(np.prod(p))
    dpi = pi * (1.0 - params.n * float(p @ Om @ p))
    if np.abs(p - 1.0 / params.n).max() <= ZERO_TOL:
        sign = 0
    else:
        sign = int(np.sign(-params.alpha)) if abs(params.alpha) > ZERO_TOL else 0
    return {"pi": pi, "dpi_dt": dpi, "predicted_sign": sign}


def regime_classify(params):
    if params.n != 3:
        raise UnsupportedError("the regime analysis covers n = 3 only")
    a, g = params.alpha, abs(params.gamma[0])
    if a < -ZERO_TOL:
        return "barycenter_sink"
    if abs(a) <= ZERO_TOL:
        return "frozen" if g <= ZERO_TOL else "periodic"
    if g <= ZERO_TOL or a > g + ZERO_TOL:
        return "vertex_attractor"
    return "boundary_spiral"


def integrate_representative(p0, Omega, h, steps, scheme="euler", record_every=1):
    """Integrate ``p' = R_p(Omega p)``; returns ``(times, states)``.

    ``scheme='euler'`` is the geometric step ``exp_p(h Omega p)``,
    ``scheme='rk4'`` classical Runge-Kutta in the ambient coordinates.
    """
    Om = np.asarray(Omega.dense() if hasattr(Omega, "dense") else Omega, dtype=float)
    p = np.array(p0, dtype=float)
    if not is_interior(p):
        raise InvalidArgument("p0 must be strictly positive")
    if scheme == "rk4":
        return integrate_rk4(lambda x: representative_rhs(x, Om), p, h, steps, record_every)
    if scheme != "euler":
        raise InvalidArgument(f"unknown scheme {scheme!r}")
    ts, xs = [0.0], [p.copy()]
    for k in range(1, steps + 1):
        p = _exp_unchecked(p, h * (Om @ p))
        if k % record_every == 0 or k == steps:
            ts.append(k * h)
            xs.append(p.copy())
    return np.array(ts), np.array(xs)


def _plane_coords(P):
    P = np.atleast_2d(P)
    n = P.shape[1]
    # orthonormal basis of the tangent plane for n = 3; first two tangent axes otherwise
    u1 = np.zeros(n)
    u1[0], u1[1] = 1.0, -1.0
    u1 /= np.linalg.norm(u1)
    u2 = np.zeros(n)
    u2[0], u2[1], u2[2] = 1.0, 1.0, -2.0
    u2 /= np.linalg.norm(u2)
    X = P - 1.0 / n
    return X @ u1, X @ u2


def winding_angle(states):
    """Total signed angle swept around the barycenter (radians)."""
    x, y = _plane_coords(states)
    th = np.unwrap(np.arctan2(y, x))
    return float(th[-1] - th[0])


def detect_period(times, states, threshold=1e-3):
    """Return-map test on the section ``p_1 = p_2`` crossed with positive orientation.

    Returns a dict with ``periodic``, ``period`` and ``return_distance``
    (``None`` entries when fewer than two crossings occur).
    """
    t = np.asarray(times)
    X = np.asarray(states)
    s = X[:, 0] - X[:, 1]
    idx = np.flatnonzero((s[:-1] < 0) & (s[1:] >= 0))
    hits = []
    for k in idx:
        lam = s[k] / (s[k] - s[k + 1])
        hits.append((t[k] + lam * (t[k + 1] - t[k]), X[k] + lam * (X[k + 1] - X[k])))
    if len(hits) < 2:
        return {"periodic": False, "period": None, "return_distance": None, "crossings": len(hits)}
    (t0, x0), (t1, x1) = hits[0], hits[1]
    dist = float(np.abs(x1 - x0).max())
    return {"periodic": dist < threshold, "period": t1 - t0, "return_distance": dist, "crossings": len(hits)}


def regime_run(params, p0=(0.5, 0.3, 0.2), h=0.01, t_end=400.0, scheme="euler"):
    """Integrate the representative flow and summarize its long-time behavior."""
    Om = circulant(params.mu)
    steps = int(round(t_end / h))
    ts, xs = integrate_representative(p0, Om, h, steps, scheme=scheme, record_every=max(1, steps // 20000))
    final = xs[-1]
    n = params.n
    return {
        "regime": regime_classify(params) if n == 3 else "n/a",
        "final": final,
        "final_pi": float(np.prod(final)),
        "min_coord": float(xs[:, :].min()),
        "winding": winding_angle(xs),
        "dist_barycenter": float(np.abs(final - 1.0 / n).max()),
        "dist_vertex": float(np.abs(final - np.eye(n)[np.argmax(final)]).max()),
        "times": ts,
        "states": xs,
    }


def sweep(alphas, gammas, p0=(0.5, 0.3, 0.2), h=0.01, t_end=100.0):
    """Regime sweep over feasible ``(alpha, gamma)`` pairs for n = 3.

    Returns CSV text with header ``alpha,gamma,regime,final_pi,winding``.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha", "gamma", "regime", "final_pi", "winding"])
    for a in alphas:
        for g in gammas:
            try:
                params = CirculantParams.n3(a, g)
            except InvalidArgument:
                continue
            r = regime_run(params, p0, h, t_end)
            w.writerow([f"{a:.6g}", f"{g:.6g}", r["regime"], f"{r['final_pi']:.6e}", f"{r['winding']:.6f}"])
    return buf.getvalue()


@dataclass
class NonposDiagExample:
    Omega: WeightMatrix

    @staticmethod
    def state(p):
        return np.array([[p, 1.0 - p], [1.0, 0.0], [0.0, 1.0]])

    @staticmethod
    def eigenvalues(p):
        return np.array([0.0, -0.5, -(p + 2) / 4, -p / 2, -(1 - p) / 2, -(3 - p) / 4])


def build_nonpos_diag_example():
    """Three vertices, two labels, vanishing first diagonal weight.

    The returned object has ``Omega``, ``state(p)`` parametrizing the line of
    equilibria for ``p`` in ``[0, 1]``, and ``eigenvalues(p)``.
    """
    Om = WeightMatrix(np.array([[0, 2, 2], [1, 2, 1], [1, 1, 2]]) / 4.0)
    return NonposDiagExample(Om)


WFLOW_D = np.array([[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]])

NAMED_PARAMS = {
    "center": (-0.5, 1.5, 0.5),
    "cycle": (0.0, 1.0, 1.0 / 3.0),
    "spiral": (0.1, 0.9, 0.3),
}


def named_params(name):
    a, b, g = NAMED_PARAMS[name]
    return CirculantParams(3, a, b, [g])


def build_wflow_demo(params):
    """Distance matrix and circulant weights for the W-flow demonstrations."""
    if params.n != 3:
        raise UnsupportedError("the W-flow demo is defined for n = 3")
    return WFLOW_D.copy(), circulant_from_params(params)


def wflow_demo_run(params, h=0.01, t_end=100.0, scheme="euler", record_every=1):
    """S- and W-trajectories of the demo, integrated through the representative.

    The circulant set is invariant but transversally unstable, so integrating
    the full S-flow lets roundoff escape it over long horizons. Integrating
    ``p`` and mapping back with ``circulant`` stays on the set exactly.
    Returns a dict with ``times``, ``p``, ``S`` and ``W``.
    """
    D, Om = build_wflow_demo(params)
    p0 = representative_of(sflow_init(D, Om))
    steps = int(round(t_end / h))
    ts, ps = integrate_representative(p0, Om, h, steps, scheme=scheme, record_every=record_every)
    S = np.array([circulant(p) for p in ps])
    return {"times": ts, "p": ps, "S": S, "W": w_from_s_path(ts, S)}
