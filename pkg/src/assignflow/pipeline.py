"""End-to-end labeling: grids, weights, distances, certified integration."""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.spatial.distance import cdist

from .errors import DataError, InvalidArgument, PreconditionError, UnsupportedError
from .flow import representative_rhs, sflow_init, sflow_rhs
from .integrator import IntegratorConfig, certified_round, integrate
from .stability import classify
from .weights import WeightMatrix, as_weights


@dataclass
class GridSpec:
    height: int
    width: int
    neighborhood_radius: int = 1
    boundary_policy: str = "shrink"

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise InvalidArgument("grid dimensions must be positive")
        if self.neighborhood_radius < 0:
            raise InvalidArgument("neighborhood radius must be >= 0")
        if self.boundary_policy != "shrink":
            raise InvalidArgument("only the 'shrink' boundary policy is supported")

    @property
    def m(self):
        return self.height * self.width

    @property
    def shape(self):
        return (self.height, self.width)


def grid_adjacency(grid):
    """0/1 matrix of Chebyshev-radius neighborhoods, self included, clipped at the border."""
    h, w, r = grid.height, grid.width, grid.neighborhood_radius
    idx = np.arange(grid.m).reshape(h, w)
    rows, cols = [], []
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            a = idx[max(0, -dy):h - max(0, dy), max(0, -dx):w - max(0, dx)]
            b = idx[max(0, dy):h + min(0, dy), max(0, dx):w + min(0, dx)]
            rows.append(a.ravel())
            cols.append(b.ravel())
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    return sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(grid.m, grid.m))


def build_uniform_weights(grid):
    """Uniform weights ``1/|N_i|`` with the factorization ``w = |N_i|``, ``Omega_hat`` = adjacency."""
    return WeightMatrix.from_symmetric(grid_adjacency(grid))


def try_factorize(Omega, tol=1e-12):
    """Attach ``Omega = Diag(w)^-1 Omega_hat`` with symmetric ``Omega_hat`` if one exists.

    Solves ``w_i omega_ik = w_k omega_ki`` along a spanning forest and checks
    the remaining edges. Returns the factorized matrix or None.
    """
    Om = as_weights(Omega)
    if not Om.symmetric_neighborhood or not Om.nonnegative:
        return None
    C = Om.csr
    CT = C.T.tocsr()
    w = np.zeros(Om.m)
    for root in range(Om.m):
        if w[root]:
            continue
        w[root] = 1.0
        stack = [root]
        while stack:
            i = stack.pop()
            for ptr in range(C.indptr[i], C.indptr[i + 1]):
                k, v = C.indices[ptr], C.data[ptr]
                if k == i or w[k] or v == 0:
                    continue
                back = CT[i, k]
                if back <= 0:
                    return None
                w[k] = w[i] * v / back
                stack.append(k)
    H = sp.diags(w) @ C
    H = H.tocsr()
    if H.nnz and abs(H - H.T).max() > tol * max(1.0, abs(H).max()):
        return None
    H = 0.5 * (H + H.T)
    try:
        return WeightMatrix(C, w=w, omega_hat=H)
    except InvalidArgument:
        return None


def build_weights_from_edges(m, entries, factorize=True):
    Om = WeightMatrix.from_entries(m, entries)
    if factorize:
        fac = try_factorize(Om)
        if fac is not None:
            return fac
    return Om


@dataclass
class LabelSet:
    prototypes: np.ndarray
    metric: str = "euclidean"
    scale: float = 1.0

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.prototypes, dtype=float))
        if P.shape[0] < 2:
            raise InvalidArgument("at least two labels are needed")
        if self.metric != "euclidean":
            raise InvalidArgument("only the euclidean metric is supported")
        if not np.all(np.isfinite(P)):
            raise InvalidArgument("prototypes must be finite")
        d = cdist(P, P)
        np.fill_diagonal(d, np.inf)
        if d.min() == 0:
            raise InvalidArgument("prototypes must be pairwise distinct")
        if not self.scale > 0:
            raise InvalidArgument("scale must be positive")
        self.prototypes = P

    @property
    def n(self):
        return self.prototypes.shape[0]


def compute_distances(data, labels):
    """``D_ij = scale * ||f_i - f*_j||``."""
    X = np.atleast_2d(np.asarray(data, dtype=float))
    if X.shape[1] != labels.prototypes.shape[1]:
        raise InvalidArgument(
            f"features have dimension {X.shape[1]}, prototypes {labels.prototypes.shape[1]}"
        )
    bad = np.flatnonzero(~np.all(np.isfinite(X), axis=1))
    if bad.size:
        raise DataError(f"non-finite features at vertex {int(bad[0])}")
    return labels.scale * cdist(X, labels.prototypes)


@dataclass
class LabelResult:
    labeling: np.ndarray
    final_state: np.ndarray
    certificate: object
    report: object
    trajectory: object
    record: object
    D: np.ndarray
    S0: np.ndarray
    Omega: WeightMatrix

    @property
    def certified(self):
        return bool(self.certificate is not None and self.certificate.certified)

    def certificate_kv(self):
        c, r = self.certificate, self.record
        kv = {
            "certified": str(self.certified).lower(),
            "termination": r.criterion,
            "steps": r.steps,
            "final_avg_entropy": f"{r.final_entropy:.12g}",
            "tie": str(bool(c.tie)).lower(),
            "rounded_stable": str(bool(c.stable)).lower(),
            "epsilon": f"{c.epsilon:.12g}",
            "distance": f"{c.distance:.12g}",
            "margin": f"{c.margin:.12g}",
        }
        text = "".join(f"{k}={v}\n" for k, v in kv.items())
        if self.report is not None:
            text += "".join(f"report.{line}\n" for line in self.report.to_kv().splitlines())
        return text


def label(data, labels, weights, cfg=None, Omega=None):
    """Certified labeling of feature rows ``data`` with prototypes ``labels``.

    ``weights`` is a :class:`GridSpec` (uniform weights are built) or a
    weight matrix. The labeling is the row-wise argmax of the final state;
    the certificate states whether rounding is provably safe.
    """
    if isinstance(weights, GridSpec):
        Om = build_uniform_weights(weights)
    else:
        Om = as_weights(weights)
    D = compute_distances(data, labels)
    if D.shape[0] != Om.m:
        raise InvalidArgument(f"{D.shape[0]} data rows but {Om.m} graph vertices")
    S0 = sflow_init(D, Om)
    traj, rec = integrate(S0, Om, cfg or IntegratorConfig())
    S = traj.final
    cert = rec.certificate if rec.certificate is not None else certified_round(S, Om)
    report = None
    if cert.Sstar is not None:
        try:
            report = classify(cert.Sstar, Om)
        except PreconditionError:
            report = None
    return LabelResult(np.argmax(S, axis=1), S, cert, report, traj, rec, D, S0, Om)


def input_labeling(D):
    """Nearest-prototype labeling of the raw data."""
    return np.argmin(D, axis=1)


def phase_portrait(system, resolution, kind="sflow"):
    """Sample a vector field on a regular grid of the free coordinates.

    ``kind='sflow'``: ``system`` is an m x m weight matrix with m in {2, 3}
    and two labels; the free coordinates are ``S_i0``. ``kind='representative'``:
    ``system`` is a 3 x 3 matrix and samples cover the simplex on a triangular
    grid. Returns rows ``(sample, i, j, state, rhs)``.
    """
    if resolution < 2:
        raise InvalidArgument("resolution must be >= 2")
    g = np.linspace(0.0, 1.0, resolution)
    rows = []
    if kind == "sflow":
        Om = as_weights(system)
        if Om.m > 3:
            raise UnsupportedError("phase portraits need at most 3 free coordinates")
        mesh = np.stack(np.meshgrid(*([g] * Om.m), indexing="ij"), axis=-1).reshape(-1, Om.m)
        for s, x in enumerate(mesh):
            S = np.stack([x, 1.0 - x], axis=1)
            F = sflow_rhs(S, Om)
            for (i, j), v in np.ndenumerate(S):
                rows.append((s, i, j, v, F[i, j]))
    elif kind == "representative":
        Om = np.asarray(system.dense() if hasattr(system, "dense") else system, dtype=float)
        if Om.shape != (3, 3):
            raise UnsupportedError("representative portraits are defined for n = 3")
        s = 0
        for a in range(resolution):
            for b in range(resolution - a):
                p = np.array([g[a], g[b], 0.0])
                p[2] = max(1.0 - p[0] - p[1], 0.0)
                F = representative_rhs(p, Om)
                for j in range(3):
                    rows.append((s, 0, j, p[j], F[j]))
                s += 1
    else:
        raise InvalidArgument(f"unknown portrait kind {kind!r}")
    return rows


# colors of the three labels (red, green, blue) as unit vectors
TRICOLOR = np.eye(3)


def tricolor_12x12():
    """Reconstructed 12 x 12 three-color test image.

    Red background, a green 5 x 5 square and a blue 4 x 5 rectangle resting
    on the lower border. The six rectangle corners that are not on the border
    violate the stability inequalities under 3 x 3 uniform weights. Returns
    ``(features, grid, labels)`` where ``labels`` uses unit-vector prototypes
    and distance scale 10.
    """
    lab = np.zeros((12, 12), dtype=int)
    lab[2:7, 2:7] = 1
    lab[8:12, 5:10] = 2
    feats = TRICOLOR[lab.ravel()]
    return feats, GridSpec(12, 12, 1), LabelSet(TRICOLOR.copy(), scale=10.0)


def tricolor_input_labels():
    feats, grid, _ = tricolor_12x12()
    return np.argmax(feats, axis=1).reshape(grid.shape)
