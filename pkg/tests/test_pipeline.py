import time

import numpy as np
import pytest

from assignflow.counterexamples import circulant, named_params
from assignflow.errors import DataError, InvalidArgument, UnsupportedError
from assignflow.integrator import IntegratorConfig
from assignflow.pipeline import (
    GridSpec,
    LabelSet,
    build_uniform_weights,
    build_weights_from_edges,
    compute_distances,
    input_labeling,
    label,
    phase_portrait,
    tricolor_12x12,
    tricolor_input_labels,
)
from assignflow.stability import classify
from assignflow.weights import WeightMatrix


def test_uniform_weights_12x12():
    Om = build_uniform_weights(GridSpec(12, 12, 1))
    A = Om.dense()
    interior = 5 * 12 + 5
    assert np.count_nonzero(A[interior]) == 9 and np.allclose(A[interior][A[interior] > 0], 1 / 9)
    assert np.count_nonzero(A[0]) == 4 and np.allclose(A[0][A[0] > 0], 1 / 4)
    assert Om.row_stochastic and Om.positive_diagonal and Om.symmetric_neighborhood
    assert Om.has_factorization and np.allclose(Om.w, Om.neighborhood_sizes)
    assert np.allclose(build_uniform_weights(GridSpec(1, 1)).dense(), [[1.0]])


def test_edges_factorization():
    entries = [(0, 0, 0.5), (0, 1, 0.5), (1, 0, 0.25), (1, 1, 0.5), (1, 2, 0.25), (2, 1, 0.5), (2, 2, 0.5)]
    Om = build_weights_from_edges(3, entries)
    assert Om.has_factorization
    H = Om.omega_hat.toarray()
    assert np.allclose(H, H.T)
    # an asymmetric pattern cannot be factorized
    Om = build_weights_from_edges(2, [(0, 0, 1.0), (0, 1, 1.0), (1, 1, 1.0)])
    assert not Om.has_factorization


def test_compute_distances():
    labels = LabelSet(np.eye(3), scale=10.0)
    D = compute_distances(np.eye(3)[[0, 2]], labels)
    assert D[0, 0] == 0 and D[1, 2] == 0
    assert np.isclose(D[0, 1], 10 * np.sqrt(2))
    X = np.eye(3)[[0, 1, 2]].copy()
    X[1, 0] = np.nan
    with pytest.raises(DataError, match="vertex 1"):
        compute_distances(X, labels)
    with pytest.raises(InvalidArgument):
        compute_distances(np.ones((2, 2)), labels)
    with pytest.raises(InvalidArgument):
        LabelSet(np.array([[1.0, 0.0], [1.0, 0.0]]))


def test_distance_column_permutation(rng):
    P = rng.standard_normal((4, 3))
    X = rng.standard_normal((10, 3))
    perm = rng.permutation(4)
    assert np.array_equal(compute_distances(X, LabelSet(P))[:, perm], compute_distances(X, LabelSet(P[perm])))


def test_single_vertex():
    res = label(np.array([[0.0]]), LabelSet(np.array([[0.0], [1.0]])), WeightMatrix(np.eye(1)))
    assert res.certified and res.labeling[0] == 0


def test_tricolor_certified_with_corner_flips():
    feats, grid, labels = tricolor_12x12()
    t0 = time.perf_counter()
    res = label(feats, labels, grid, IntegratorConfig(termination_mode="entropy"))
    assert time.perf_counter() - t0 < 10
    assert res.certified and res.certificate.distance < 0.2
    inp = tricolor_input_labels()
    out = res.labeling.reshape(12, 12)
    changed = sorted(map(tuple, np.argwhere(out != inp)))
    assert changed == [(2, 2), (2, 6), (6, 2), (6, 6), (8, 5), (8, 9)]
    assert np.all(out[tuple(np.array(changed).T)] == 0)
    # integral input violating the stability inequalities is not returned unchanged
    Om = build_uniform_weights(grid)
    assert classify(np.eye(3)[inp.ravel()], Om).classification == "unstable"
    assert classify(res.certificate.Sstar, Om).classification == "exp_stable"


def test_default_mode_certifies_early():
    feats, grid, labels = tricolor_12x12()
    res = label(feats, labels, grid)
    assert res.record.criterion == "attraction_certified" and res.certified
    assert np.array_equal(res.labeling, label(feats, labels, grid, IntegratorConfig(termination_mode="entropy")).labeling)


def test_label_permutation_equivariance(rng):
    feats, grid, labels = tricolor_12x12()
    base = label(feats, labels, grid).labeling
    perm = np.array([2, 0, 1])
    permuted = label(feats, LabelSet(labels.prototypes[perm], scale=10.0), grid).labeling
    assert np.array_equal(perm[permuted], base)


def test_determinism(rng):
    X = rng.uniform(0, 1, (36, 3))
    labels = LabelSet(np.eye(3))
    a = label(X, labels, GridSpec(6, 6, 1))
    b = label(X, labels, GridSpec(6, 6, 1))
    assert np.array_equal(a.final_state, b.final_state)
    assert a.certificate_kv() == b.certificate_kv()


def test_uncertified_is_reported(rng):
    X = rng.uniform(0, 1, (16, 3))
    res = label(X, LabelSet(np.eye(3)), GridSpec(4, 4, 1),
                IntegratorConfig(max_steps=2, termination_mode="attraction_certified", record_every=1))
    assert not res.certified and "certified=false" in res.certificate_kv()


def test_input_labeling():
    D = np.array([[0.1, 0.5], [0.9, 0.2]])
    assert list(input_labeling(D)) == [0, 1]


def test_portrait_diagonal_and_corners():
    rows = phase_portrait(np.full((2, 2), 0.5), 5, kind="sflow")
    by_sample = {}
    for s, i, j, x, f in rows:
        by_sample.setdefault(s, {})[(i, j)] = (x, f)
    hits = 0
    for d in by_sample.values():
        # diagonal S_00 = S_11: both rows of Omega S are the barycenter
        if np.isclose(d[(0, 0)][0], d[(1, 1)][0]):
            hits += 1
            assert all(abs(f) < 1e-15 for _, f in d.values())
    assert hits == 5
    assert len({r[0] for r in phase_portrait(np.eye(2), 2)}) == 4


def test_portrait_rps_tangent_to_product_levels():
    rows = phase_portrait(circulant(named_params("cycle").mu), 12, kind="representative")
    samples = {}
    for s, _, j, x, f in rows:
        samples.setdefault(s, [np.zeros(3), np.zeros(3)])
        samples[s][0][j], samples[s][1][j] = x, f
    for p, F in samples.values():
        if np.all(p > 1e-9):
            grad = np.prod(p) / p
            assert abs(grad @ F) < 1e-10


def test_portrait_errors():
    with pytest.raises(UnsupportedError):
        phase_portrait(np.eye(4), 3)
    with pytest.raises(InvalidArgument):
        phase_portrait(np.eye(2), 1)
