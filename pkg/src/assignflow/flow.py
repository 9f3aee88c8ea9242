"""Vector fields of the S-flow, the assignment flow and the representative flow."""

import numpy as np

from .errors import DomainError, InvalidArgument
from .simplex import (
    is_interior,
    project_tangent,
    replicator_apply,
    softmax,
)
from .weights import as_weights


def _check_state(S, m=None):
    S = np.atleast_2d(np.asarray(S, dtype=float))
    if S.ndim != 2:
        raise InvalidArgument("state must be an (m, n) array")
    if m is not None and S.shape[0] != m:
        raise InvalidArgument(f"state has {S.shape[0]} rows, expected {m}")
    return S


def _check_distances(D, m=None):
    D = np.atleast_2d(np.asarray(D, dtype=float))
    if not np.all(np.isfinite(D)):
        raise InvalidArgument("distance matrix has non-finite entries")
    if m is not None and D.shape[0] != m:
        raise InvalidArgument(f"distance matrix has {D.shape[0]} rows, expected {m}")
    return D


def sflow_rhs(S, Omega):
    """Right-hand side ``R_S(Omega S)`` of the S-flow, row by row."""
    Om = as_weights(Omega)
    S = _check_state(S, Om.m)
    return replicator_apply(S, Om.apply(S))


def sflow_init(D, Omega):
    """Initial value ``exp_1(-Omega D)`` of the S-flow."""
    Om = as_weights(Omega)
    D = _check_distances(D, Om.m)
    return softmax(-Om.apply(D))


def similarity_map(W, D, Omega):
    """Geometric neighborhood average ``S(W)``.

    Row ``i`` is ``exp_1(sum_k omega_ik (Pi0 log W_k - D_k))``.
    """
    Om = as_weights(Omega)
    W = _check_state(W, Om.m)
    D = _check_distances(D, Om.m)
    if W.shape != D.shape:
        raise InvalidArgument(f"W {W.shape} and D {D.shape} differ in shape")
    if not is_interior(W):
        raise DomainError("similarity_map: W must be strictly positive")
    V = project_tangent(np.log(W)) - D
    return softmax(Om.apply(V))


def assignment_rhs(W, D, Omega):
    """Right-hand side ``R_W S(W)`` of the assignment flow."""
    return replicator_apply(W, similarity_map(W, D, Omega))


def w_from_s_path(times, states):
    """Lift the running trapezoid integral of ``S`` at the barycenter.

    Returns an array of shape ``(len(times), m, n)`` with ``W`` at every
    sample time.
    """
    t = np.asarray(times, dtype=float)
    X = np.asarray(states, dtype=float)
    if t.size == 0 or X.shape[0] == 0:
        raise InvalidArgument("empty trajectory")
    if X.shape[0] != t.size:
        raise InvalidArgument("times and states have different lengths")
    if t.size > 1 and np.any(np.diff(t) <= 0):
        raise InvalidArgument("trajectory times must be strictly increasing")
    dt = np.diff(t)[:, None, None]
    incr = 0.5 * dt * (X[1:] + X[:-1])
    acc = np.concatenate([np.zeros_like(X[:1]), np.cumsum(incr, axis=0)])
    return softmax(project_tangent(acc))


def w_from_s_accumulate(trajectory, quadrature="trapezoid"):
    """``W`` at the final time of an S-trajectory (trapezoid rule).

    ``trajectory`` is a :class:`~assignflow.integrator.Trajectory` or a
    ``(times, states)`` pair.
    """
    if quadrature != "trapezoid":
        raise InvalidArgument(f"unknown quadrature {quadrature!r}")
    if hasattr(trajectory, "times"):
        times, states = trajectory.times, trajectory.states
    else:
        times, states = trajectory
    return w_from_s_path(times, states)[-1]


def representative_rhs(p, Omega):
    """Replicator field ``R_p(Omega p)`` on a single simplex."""
    Om = np.asarray(Omega.dense() if hasattr(Omega, "dense") else Omega, dtype=float)
    p = np.asarray(p, dtype=float)
    return replicator_apply(p, Om @ p)


def integrate_rk4(rhs, x0, h, steps, record_every=1):
    """Classical RK4 for an autonomous field; returns (times, states)."""
    x = np.array(x0, dtype=float)
    ts, xs = [0.0], [x.copy()]
    for k in range(1, steps + 1):
        k1 = rhs(x)
        k2 = rhs(x + 0.5 * h * k1)
        k3 = rhs(x + 0.5 * h * k2)
        k4 = rhs(x + h * k3)
        x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if k % record_every == 0 or k == steps:
            ts.append(k * h)
            xs.append(x.copy())
    return np.array(ts), np.array(xs)
