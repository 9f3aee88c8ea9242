"""Geometric Euler integration of the S-flow with certified termination."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InvalidArgument
from .simplex import _exp_unchecked, avg_entropy, is_interior, l1_distance_rows
from .stability import STRICT_TOL, eps_est, margins
from .weights import as_weights

MODES = ("entropy", "attraction_certified", "fixed_steps")


@dataclass
class IntegratorConfig:
    h: float = 0.1
    max_steps: int = 100_000
    entropy_threshold: float = 1e-3
    record_every: int = 10
    termination_mode: str = "attraction_certified"

    def __post_init__(self):
        if not (self.h > 0 and math.isfinite(self.h)):
            raise InvalidArgument(f"step size must be positive, got {self.h}")
        if int(self.max_steps) < 1:
            raise InvalidArgument("max_steps must be >= 1")
        if int(self.record_every) < 1:
            raise InvalidArgument("record_every must be >= 1")
        if not 0 < self.entropy_threshold < 1:
            raise InvalidArgument("entropy_threshold must lie in (0, 1)")
        if self.termination_mode not in MODES:
            raise InvalidArgument(f"termination_mode must be one of {MODES}")
        self.max_steps = int(self.max_steps)
        self.record_every = int(self.record_every)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    avg_entropy: np.ndarray
    lyapunov: np.ndarray
    min_rowmax: np.ndarray

    def __len__(self):
        return len(self.times)

    @property
    def final(self):
        return self.states[-1]


@dataclass
class Certificate:
    certified: bool
    Sstar: np.ndarray | None
    epsilon: float
    margin: float
    distance: float
    tie: bool = False
    stable: bool = False


@dataclass
class TerminationRecord:
    criterion: str
    steps: int
    final_entropy: float
    certificate: Certificate | None = None
    extra: dict = field(default_factory=dict)


def _step(S, Om, h):
    return _exp_unchecked(S, h * Om.apply(S))


def euler_step(S, Omega, h):
    """One geometric Euler step ``exp_S(h Omega S)``."""
    Om = as_weights(Omega)
    S = np.atleast_2d(np.asarray(S, dtype=float))
    if not h > 0:
        raise InvalidArgument("h must be positive")
    if S.shape[0] != Om.m:
        raise InvalidArgument(f"state has {S.shape[0]} rows, weights have {Om.m}")
    if not is_interior(S):
        raise DomainError("euler_step: state must be strictly positive")
    return _step(S, Om, h)


def certified_round(S, Omega, tie_tol=1e-14):
    """Round ``S`` row-wise and check that it lies in a certified basin.

    Returns a :class:`Certificate`. Ties in the argmax of any row make the
    certificate fail with ``tie=True`` and ``Sstar=None``.
    """
    Om = as_weights(Omega)
    S = np.atleast_2d(np.asarray(S, dtype=float))
    m, n = S.shape
    srt = np.sort(S, axis=1)
    if n > 1 and np.any(srt[:, -1] - srt[:, -2] <= tie_tol):
        return Certificate(False, None, 0.0, -np.inf, np.inf, tie=True)
    Sstar = np.zeros_like(S)
    Sstar[np.arange(m), np.argmax(S, axis=1)] = 1.0
    dist = float(l1_distance_rows(S, Sstar).max())
    M = margins(Sstar, Om)
    if not np.all(M > STRICT_TOL):
        return Certificate(False, Sstar, 0.0, -dist, dist)
    eps = eps_est(Sstar, Om)
    return Certificate(dist < eps, Sstar, eps, eps - dist, dist, stable=True)


def _diagnostics(S, Om):
    # omega_hat symmetry was validated when the factorization was attached
    lyap = float(np.sum(S * (Om.omega_hat @ S))) if Om.has_factorization else np.nan
    return avg_entropy(S), lyap, float(S.max(axis=1).min())


def integrate(S0, Omega, cfg=None):
    """Iterate the geometric Euler step until the configured criterion fires.

    Returns ``(Trajectory, TerminationRecord)``. Samples are stored at step 0,
    every ``record_every`` steps and at the final step.
    """
    cfg = cfg or IntegratorConfig()
    Om = as_weights(Omega)
    S = np.array(np.atleast_2d(S0), dtype=float)
    if S.shape[0] != Om.m:
        raise InvalidArgument(f"state has {S.shape[0]} rows, weights have {Om.m}")
    if not is_interior(S):
        raise DomainError("integrate: initial state must be strictly positive")

    times, states, diag = [0.0], [S.copy()], [_diagnostics(S, Om)]
    criterion, cert, k = "budget", None, 0
    for k in range(1, cfg.max_steps + 1):
        S = _step(S, Om, cfg.h)
        at_sample = k % cfg.record_every == 0
        if at_sample:
            times.append(k * cfg.h)
            states.append(S.copy())
            diag.append(_diagnostics(S, Om))
        if cfg.termination_mode == "fixed_steps":
            continue
        if avg_entropy(S) < cfg.entropy_threshold:
            criterion = "entropy"
            break
        if cfg.termination_mode == "attraction_certified" and at_sample:
            c = certified_round(S, Om)
            if c.certified:
                criterion, cert = "attraction_certified", c
                break
    if cfg.termination_mode == "fixed_steps":
        criterion = "fixed_steps"
    if k % cfg.record_every != 0:
        times.append(k * cfg.h)
        states.append(S.copy())
        diag.append(_diagnostics(S, Om))
    if cert is None and cfg.termination_mode != "fixed_steps":
        cert = certified_round(S, Om)
    d = np.array(diag)
    traj = Trajectory(np.array(times), np.array(states), d[:, 0], d[:, 1], d[:, 2])
    rec = TerminationRecord(criterion, k, avg_entropy(S), cert)
    return traj, rec


def run_fixed(S0, Omega, h, steps):
    """Final state after ``steps`` Euler steps (no recording)."""
    Om = as_weights(Omega)
    S = np.array(np.atleast_2d(S0), dtype=float)
    if not is_interior(S):
        raise DomainError("initial state must be strictly positive")
    for _ in range(steps):
        S = _step(S, Om, h)
    return S


def _n_steps(t_end, h):
    r = t_end / h
    k = round(r)
    if k < 1 or abs(r - k) > 1e-9 * max(1.0, r):
        raise InvalidArgument(f"t_end={t_end} is not a positive multiple of h={h}")
    return k


def discretization_error_probe(S0, Omega, h, t_end, reference_h):
    """Max-abs gap at ``t_end`` between the ``h`` run and a finer reference run."""
    if not (reference_h == h or reference_h <= h / 16 * (1 + 1e-12)):
        raise InvalidArgument("reference_h must not exceed h/16")
    S_h = run_fixed(S0, Omega, h, _n_steps(t_end, h))
    S_ref = run_fixed(S0, Omega, reference_h, _n_steps(t_end, reference_h))
    return float(np.abs(S_h - S_ref).max())
