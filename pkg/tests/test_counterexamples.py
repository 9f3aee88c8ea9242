import numpy as np
import pytest

from assignflow.counterexamples import (
    CirculantParams,
    build_nonpos_diag_example,
    build_wflow_demo,
    circulant,
    circulant_deviation,
    circulant_from_params,
    detect_period,
    integrate_representative,
    named_params,
    product_diagnostic,
    regime_classify,
    regime_run,
    representative_of,
    sweep,
    wflow_demo_run,
)
from assignflow.errors import InvalidArgument, UnsupportedError
from assignflow.flow import sflow_init
from assignflow.integrator import IntegratorConfig, integrate, run_fixed
from assignflow.stability import is_equilibrium


def test_named_matrices():
    assert np.allclose(circulant_from_params(named_params("center")).dense(),
                       [[0, 0, 1], [1, 0, 0], [0, 1, 0]], atol=1e-15)
    assert np.allclose(circulant_from_params(named_params("cycle")).dense(),
                       np.array([[1, 0, 2], [2, 1, 0], [0, 2, 1]]) / 3, atol=1e-15)
    assert np.allclose(circulant_from_params(named_params("spiral")).dense(),
                       np.array([[2, 0, 3], [3, 2, 0], [0, 3, 2]]) / 5, atol=1e-15)


def test_circulant_is_power_sum(rng):
    n = 5
    p = rng.dirichlet(np.ones(n))
    P = np.roll(np.eye(n), 1, axis=0)
    ref = sum(p[k - 1] * np.linalg.matrix_power(P, k) for k in range(1, n + 1))
    assert np.allclose(circulant(p), ref, atol=1e-15)
    Om = circulant(p)
    assert np.allclose(Om.sum(axis=0), 1) and np.allclose(Om.sum(axis=1), 1)


def test_param_validation():
    with pytest.raises(InvalidArgument, match="alpha \\+ beta"):
        CirculantParams(3, 0.5, 0.6, [0.0])
    with pytest.raises(InvalidArgument, match="gamma"):
        CirculantParams.n3(0.0, 0.4)
    with pytest.raises(InvalidArgument, match="beta/n"):
        CirculantParams(3, -0.6, 1.6, [0.0])
    with pytest.raises(InvalidArgument):
        CirculantParams(5, 0.0, 1.0, [0.1])


def test_representative_round_trip(rng):
    assert np.allclose(representative_of(np.eye(4)), [0, 0, 0, 1])
    assert np.allclose(representative_of(np.full((4, 4), 0.25)), 0.25)
    for _ in range(20):
        n = int(rng.integers(3, 8))
        beta = rng.uniform(0.2, 1.5)
        alpha = 1 - beta
        if alpha + beta / n < 0:
            continue
        g = rng.uniform(-beta / n, beta / n, (n - 1) // 2)
        par = CirculantParams(n, alpha, beta, g)
        assert np.allclose(representative_of(circulant_from_params(par)), par.mu, atol=1e-15)
        assert np.isclose(par.mu.sum(), 1.0) and np.all(par.mu >= -1e-15)
    with pytest.raises(InvalidArgument, match="deviation"):
        representative_of(np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.5, 0.0]]))


def test_product_diagnostic():
    p = np.array([0.5, 0.3, 0.2])
    d = product_diagnostic(p, CirculantParams.n3(0.0, 0.2))
    assert abs(d["dpi_dt"]) < 1e-12 and d["predicted_sign"] == 0
    d = product_diagnostic(p, CirculantParams.n3(0.3, 0.1))
    assert d["dpi_dt"] < 0 and d["predicted_sign"] == -1
    d = product_diagnostic(p, CirculantParams.n3(-0.3, 0.1))
    assert d["dpi_dt"] > 0 and d["predicted_sign"] == 1
    d = product_diagnostic(np.full(3, 1 / 3), CirculantParams.n3(0.3, 0.1))
    assert abs(d["dpi_dt"]) < 1e-15 and d["predicted_sign"] == 0


def test_product_monotone_along_runs():
    for a, g in [(0.3, 0.1), (-0.3, 0.2), (0.1, 0.3)]:
        par = CirculantParams.n3(a, g)
        _, xs = integrate_representative([0.5, 0.3, 0.2], circulant(par.mu), 1e-3, 2000)
        dpi = np.diff(np.prod(xs, axis=1))
        assert np.all(np.sign(-a) * dpi > -1e-10)


def test_regime_classify():
    assert regime_classify(named_params("center")) == "barycenter_sink"
    assert regime_classify(named_params("cycle")) == "periodic"
    assert regime_classify(named_params("spiral")) == "boundary_spiral"
    assert regime_classify(CirculantParams.n3(0.0, 0.0)) == "frozen"
    assert regime_classify(CirculantParams.n3(0.2, 0.1)) == "vertex_attractor"
    assert regime_classify(CirculantParams.n3(0.2, 0.0)) == "vertex_attractor"
    with pytest.raises(UnsupportedError):
        regime_classify(CirculantParams(4, 0.0, 1.0, [0.1]))


def test_circulant_invariance_and_reduction():
    D, Om = build_wflow_demo(named_params("spiral"))
    S0 = sflow_init(D, Om)
    assert circulant_deviation(S0) < 1e-15
    traj, _ = integrate(S0, Om, IntegratorConfig(h=1e-3, max_steps=10_000, record_every=1000,
                                                 termination_mode="fixed_steps"))
    assert max(circulant_deviation(S) for S in traj.states) < 1e-10
    _, ps = integrate_representative(representative_of(S0), Om, 1e-3, 10_000, record_every=1000)
    assert np.allclose([representative_of(S, 1e-8) for S in traj.states], ps, atol=1e-10)


def test_cycle_period_detection():
    par = named_params("cycle")
    ts, xs = integrate_representative([0.5, 0.3, 0.2], circulant(par.mu), 0.01, 20_000, scheme="rk4")
    res = detect_period(ts, xs)
    assert res["periodic"] and res["period"] > 0
    # short windows contain no full return
    assert not detect_period(ts[:100], xs[:100])["periodic"]


def test_wflow_cycle_closed_curve():
    wf = wflow_demo_run(named_params("cycle"), h=0.01, t_end=120.0)
    per = detect_period(wf["times"], wf["p"])
    k = int(round(per["period"] / 0.01))
    W = wf["W"]
    assert np.abs(W[k + 500] - W[500]).max() < 1e-2


def test_wflow_center_interior_limit():
    wf = wflow_demo_run(named_params("center"), h=0.01, t_end=200.0)
    W = wf["W"]
    assert np.abs(W[-1] - W[-1000]).max() < 1e-8
    assert W[-1].min() > 0.05
    assert np.abs(W[-1] - 1 / 3).max() > 0.05


def test_regime_runs():
    r = regime_run(CirculantParams.n3(-0.5, 0.5), t_end=200.0)
    assert r["dist_barycenter"] < 1e-6
    r = regime_run(CirculantParams.n3(0.2, 0.1), t_end=400.0)
    assert r["dist_vertex"] < 1e-6


def test_nonpos_diag_line_and_attraction(rng):
    ex = build_nonpos_diag_example()
    for p in (0.0, 0.3, 1.0):
        ok, res = is_equilibrium(ex.state(p), ex.Omega)
        assert ok and res < 1e-12
    assert np.allclose(np.sort(ex.eigenvalues(0.5)), np.sort([0, -0.5, -0.625, -0.25, -0.25, -0.625]))
    S = ex.state(0.3)
    S[0] += [1e-3, -1e-3]
    S[1] += [-1e-3, 1e-3]
    S[2] += [1e-3, -1e-3]
    S = run_fixed(S, ex.Omega, 0.1, 2000)
    # returned to the line: rows 2 and 3 at vertices, row 1 anywhere
    assert np.abs(S[1:] - ex.state(0.3)[1:]).max() < 1e-6


def test_sweep_csv():
    text = sweep([-0.5, 0.2], [0.1], t_end=5.0)
    lines = text.strip().splitlines()
    assert lines[0] == "alpha,gamma,regime,final_pi,winding"
    assert lines[1].split(",")[2] == "barycenter_sink"
    assert lines[2].split(",")[2] == "vertex_attractor"
