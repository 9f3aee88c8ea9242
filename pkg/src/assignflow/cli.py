"""Command line interface: ``assignflow <subcommand> ...``.

Every subcommand writes delimited outputs (CSV, key=value text) to
``--out-dir`` and, unless ``--no-figures`` is given, PNG figures next to them.
"""

import argparse
import contextlib
import os
import sys
from pathlib import Path

import numpy as np

from . import counterexamples as cx
from . import io as aio
from .errors import AssignFlowError
from .integrator import IntegratorConfig
from .linear import LinearSystem, laf_spectrum_report, predict_lifted_limit
from .pipeline import (
    GridSpec,
    LabelSet,
    build_uniform_weights,
    build_weights_from_edges,
    compute_distances,
    input_labeling,
    label,
    phase_portrait,
    tricolor_12x12,
)
from .simplex import one_hot
from .stability import classify
from .weights import WeightMatrix


def _threads():
    val = os.environ.get("AF_THREADS")
    if not val:
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=max(1, int(val)))


def _grid(text, radius):
    try:
        h, w = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise SystemExit(f"--grid expects HxW, got {text!r}") from None
    return GridSpec(h, w, radius)


def _matrix(text):
    """Parse ``"a,b;c,d"`` into a dense array."""
    return np.array([[float(x) for x in row.split(",")] for row in text.split(";")])


def _out(args):
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _figs(args):
    if args.no_figures:
        return None
    from . import plotting

    return plotting


def _weights(args, grid):
    if args.weights:
        m, entries = aio.read_edges_csv(args.weights)
        if grid is not None:
            m = max(m, grid.m)
        return build_weights_from_edges(m, entries)
    if grid is None:
        raise SystemExit("either --grid (or an image) or --weights is required")
    return build_uniform_weights(grid)


def _config(args):
    return IntegratorConfig(
        h=args.h,
        max_steps=args.max_steps,
        entropy_threshold=args.entropy_eps,
        record_every=args.record_every,
        termination_mode=args.mode,
    )


def cmd_label(args):
    out = _out(args)
    grid = _grid(args.grid, args.radius) if args.grid else None
    if args.demo:
        feats, grid, labels = tricolor_12x12()
        if args.scale is not None:
            labels = LabelSet(labels.prototypes, scale=args.scale)
    else:
        if args.image:
            feats, h, w = aio.read_pnm(args.image)
            grid = GridSpec(h, w, args.radius)
        elif args.features:
            feats = aio.read_feature_csv(args.features)
        else:
            raise SystemExit("label needs --demo, --image or --features")
        if not args.prototypes:
            raise SystemExit("--prototypes is required unless --demo is used")
        labels = LabelSet(aio.read_feature_csv(args.prototypes), scale=args.scale or 1.0)
    Om = _weights(args, grid)
    res = label(feats, labels, Om, _config(args))
    shape = grid.shape if grid is not None and grid.m == Om.m else None
    aio.write_labeling_csv(out / "labeling.csv", res.labeling, shape)
    aio.write_labeling_csv(out / "input_labeling.csv", input_labeling(res.D), shape)
    aio.write_kv(out / "certificate.txt", res.certificate_kv())
    aio.write_trajectory_csv(out / "trajectory.csv", res.trajectory)
    aio.write_diagnostics_csv(out / "diagnostics.csv", res.trajectory)
    if res.report is not None and res.report.eigenvalues() is not None:
        aio.write_spectrum_csv(out / "spectrum.csv", res.report.eigenvalues())
    plotting = _figs(args)
    if plotting:
        if shape is not None:
            plotting.plot_labelings(
                out / "labeling.png", input_labeling(res.D).reshape(shape), res.labeling.reshape(shape)
            )
        plotting.plot_diagnostics(out / "diagnostics.png", res.trajectory, args.entropy_eps)
        if res.report is not None and res.report.eigenvalues() is not None:
            plotting.plot_spectrum(out / "spectrum.png", res.report.eigenvalues(), "Jacobian at S*")
    print(f"certified={str(res.certified).lower()} termination={res.record.criterion} "
          f"steps={res.record.steps} out={out}")
    return 0 if res.certified else 2


def cmd_stability(args):
    out = _out(args)
    if args.demo == "nonpos-diag":
        # zero diagonal weight: no classification, only residual and spectrum
        from .stability import is_equilibrium, numeric_spectrum

        ex = cx.build_nonpos_diag_example()
        S = ex.state(args.p)
        _, res = is_equilibrium(S, ex.Omega)
        lam = numeric_spectrum(S, ex.Omega)
        kv = {"p": args.p, "residual": f"{res:.6e}", "classification": "unavailable",
              "reason": "weights have a zero diagonal entry",
              "max_real_eig": f"{lam.real.max():.12g}",
              "formula_gap": f"{np.abs(np.sort(lam.real) - np.sort(ex.eigenvalues(args.p))).max():.3e}"}
        aio.write_kv(out / "report.txt", kv)
        aio.write_spectrum_csv(out / "spectrum.csv", lam)
        plotting = _figs(args)
        if plotting:
            plotting.plot_spectrum(out / "spectrum.png", lam, f"line of equilibria, p={args.p:g}")
        print("".join(f"{k}={v}\n" for k, v in kv.items()), end="")
        return 0
    if args.demo in ("tricolor-input", "tricolor-output"):
        feats, grid, labels = tricolor_12x12()
        Om = build_uniform_weights(grid)
        lab = input_labeling(compute_distances(feats, labels))
        if args.demo == "tricolor-output":
            lab = label(feats, labels, Om, _config(args)).labeling
        n = labels.n
    else:
        if not args.labeling:
            raise SystemExit("stability needs --labeling or --demo")
        lab = aio.read_labeling_csv(args.labeling).ravel()
        grid = _grid(args.grid, args.radius) if args.grid else None
        Om = _weights(args, grid)
        n = args.n or int(lab.max()) + 1
    S = one_hot(lab, n)
    rep = classify(S, Om)
    aio.write_kv(out / "report.txt", rep.to_kv())
    lam = rep.eigenvalues()
    if lam is not None:
        aio.write_spectrum_csv(out / "spectrum.csv", lam)
        plotting = _figs(args)
        if plotting:
            plotting.plot_spectrum(out / "spectrum.png", lam, rep.classification)
    print(rep.to_kv(), end="")
    return 0


def cmd_portrait(args):
    out = _out(args)
    if args.kind == "representative":
        if args.params:
            a, b, g = (float(x) for x in args.params.split(","))
            Om = cx.circulant(cx.CirculantParams(3, a, b, [g]).mu)
        else:
            Om = cx.circulant(cx.named_params(args.case).mu)
    else:
        Om = WeightMatrix(_matrix(args.omega))
    rows = phase_portrait(Om, args.resolution, kind=args.kind)
    aio.write_rows_csv(out / "portrait.csv", ["sample", "i", "j", "state", "rhs"],
                       [(s, i, j, f"{x:.17g}", f"{f:.17g}") for s, i, j, x, f in rows])
    plotting = _figs(args)
    if plotting:
        plotting.plot_portrait(out / "portrait.png", rows, args.kind)
    print(f"samples={len(set(r[0] for r in rows))} out={out}")
    return 0


def cmd_counterexample(args):
    out = _out(args)
    rng = np.random.default_rng(args.seed)
    plotting = _figs(args)
    meta = {"seed": args.seed}
    if args.case == "nonpos-diag":
        ex = cx.build_nonpos_diag_example()
        from .stability import is_equilibrium, numeric_spectrum

        rows = []
        for p in np.linspace(0.0, 1.0, 5):
            S = ex.state(p)
            _, res = is_equilibrium(S, ex.Omega)
            num = np.sort(numeric_spectrum(S, ex.Omega).real)
            ref = np.sort(ex.eigenvalues(p))
            rows.append((f"{p:.4g}", f"{res:.3e}", f"{np.abs(num - ref).max():.3e}"))
        aio.write_rows_csv(out / "nonpos_diag.csv", ["p", "residual", "spectrum_gap"], rows)
        meta["case"] = "nonpos-diag"
        aio.write_kv(out / "summary.txt", meta)
        print(f"out={out}")
        return 0
    if args.case == "sweep":
        alphas = np.round(np.linspace(-0.5, 0.5, 5), 10)
        gammas = np.round(np.linspace(0.0, 1.0 / 3.0, 4), 10)
        text = cx.sweep(alphas, gammas, h=args.h, t_end=args.t_end)
        (out / "sweep.csv").write_text(text)
        print(text, end="")
        return 0
    if args.case == "custom":
        params = cx.CirculantParams.n3(args.alpha, args.gamma)
    else:
        params = cx.named_params(args.case)
    p0 = rng.dirichlet(np.ones(3)) if args.random_start else np.array([0.5, 0.3, 0.2])
    run = cx.regime_run(params, p0, h=args.h, t_end=args.t_end)
    wf = cx.wflow_demo_run(params, h=args.h, t_end=args.t_end)
    tW, W = wf["times"], wf["W"]
    meta.update({
        "alpha": params.alpha, "beta": params.beta, "gamma": params.gamma[0],
        "regime": run["regime"], "final_pi": f"{run['final_pi']:.6e}",
        "min_coord": f"{run['min_coord']:.6e}", "winding": f"{run['winding']:.6f}",
        "p0": ",".join(f"{x:.6f}" for x in p0),
    })
    aio.write_kv(out / "summary.txt", meta)
    aio.write_rows_csv(out / "representative.csv", ["t", "p1", "p2", "p3"],
                       [(f"{t:.6g}", *(f"{x:.17g}" for x in p)) for t, p in zip(run["times"], run["states"])])
    stride = max(1, len(tW) // 5000)
    aio.write_rows_csv(out / "wflow.csv", ["t", "i", "j", "value"],
                       [(f"{tW[k]:.6g}", i, j, f"{W[k, i, j]:.17g}")
                        for k in range(0, len(tW), stride) for i in range(3) for j in range(3)])
    if plotting:
        plotting.plot_simplex_trajectories(out / "representative.png", [run["states"]], run["regime"])
        plotting.plot_simplex_trajectories(out / "wflow.png", [W[:, i] for i in range(3)], "W(t)")
    print("".join(f"{k}={v}\n" for k, v in meta.items()), end="")
    return 0


def cmd_linflow(args):
    out = _out(args)
    rng = np.random.default_rng(args.seed)
    m, n = args.m, args.n
    if args.omega:
        Om = WeightMatrix(_matrix(args.omega))
        m = Om.m
    else:
        A = rng.uniform(0.1, 1.0, (m, m))
        Om = WeightMatrix.from_symmetric(A + A.T)
    Shat = rng.dirichlet(np.ones(n), size=m)
    W0 = rng.dirichlet(np.ones(n), size=m)
    sys_ = LinearSystem(Shat, Om, None, W0)
    V0 = rng.standard_normal((m, n))
    V0 -= V0.mean(axis=1, keepdims=True)
    rep = laf_spectrum_report(sys_)
    lim, info = predict_lifted_limit(sys_, V0)
    kv = {"seed": args.seed, "m": m, "n": n, "rank": rep["rank"], "nullspace_dim": rep["nullspace_dim"],
          "realness": str(rep["realness"]).lower(), "positivity_class": rep["positivity_class"]}
    kv.update({f"check.{k}": str(v).lower() for k, v in rep["checks"].items()})
    kv["dominant_eigenvalue"] = f"{np.real(info['eigenvalue']):.12g}"
    kv["prediction"] = "indeterminate" if lim is None else "determinate"
    aio.write_kv(out / "report.txt", kv)
    aio.write_spectrum_csv(out / "spectrum.csv", rep["eigenvalues"])
    if lim is not None:
        aio.write_labeling_csv(out / "predicted_labeling.csv", np.argmax(lim, axis=1))
    plotting = _figs(args)
    if plotting:
        plotting.plot_spectrum(out / "spectrum.png", rep["eigenvalues"], "sigma(A)")
    print("".join(f"{k}={v}\n" for k, v in kv.items()), end="")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="assignflow", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out-dir", default="out")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--no-figures", action="store_true")

    def integ(sp):
        sp.add_argument("--h", type=float, default=0.1)
        sp.add_argument("--entropy-eps", type=float, default=1e-3)
        sp.add_argument("--max-steps", type=int, default=100_000)
        sp.add_argument("--record-every", type=int, default=10)
        sp.add_argument("--mode", default="attraction_certified",
                        choices=["entropy", "attraction_certified", "fixed_steps"])

    def graph(sp):
        sp.add_argument("--weights", help="edge list CSV i,k,omega")
        sp.add_argument("--grid", help="grid size HxW (uniform weights)")
        sp.add_argument("--radius", type=int, default=1)

    s = sub.add_parser("label", help="certified labeling of grid or graph data")
    common(s), integ(s), graph(s)
    s.add_argument("--demo", action="store_true", help="use the bundled 12x12 three-color image")
    s.add_argument("--image", help="PGM/PPM input")
    s.add_argument("--features", help="CSV of per-vertex features")
    s.add_argument("--prototypes", help="CSV of label prototypes, one per row")
    s.add_argument("--scale", type=float, default=None)
    s.set_defaults(func=cmd_label)

    s = sub.add_parser("stability", help="classify an integral labeling")
    common(s), integ(s), graph(s)
    s.add_argument("--labeling", help="integer label CSV")
    s.add_argument("--n", type=int, help="number of labels")
    s.add_argument("--demo", choices=["tricolor-input", "tricolor-output", "nonpos-diag"])
    s.add_argument("--p", type=float, default=0.5, help="line parameter for nonpos-diag")
    s.set_defaults(func=cmd_stability)

    s = sub.add_parser("portrait", help="sample a vector field on a grid")
    common(s)
    s.add_argument("--kind", default="representative", choices=["sflow", "representative"])
    s.add_argument("--omega", default="0.5,0.5;0.5,0.5", help="dense matrix 'a,b;c,d' for sflow")
    s.add_argument("--case", default="cycle", choices=sorted(cx.NAMED_PARAMS))
    s.add_argument("--params", help="alpha,beta,gamma for the representative flow")
    s.add_argument("--resolution", type=int, default=15)
    s.set_defaults(func=cmd_portrait)

    s = sub.add_parser("counterexample", help="non-convergent and degenerate dynamics")
    common(s)
    s.add_argument("--case", default="cycle",
                   choices=sorted(cx.NAMED_PARAMS) + ["custom", "sweep", "nonpos-diag"])
    s.add_argument("--alpha", type=float, default=0.0)
    s.add_argument("--gamma", type=float, default=1.0 / 3.0)
    s.add_argument("--h", type=float, default=0.01)
    s.add_argument("--t-end", type=float, default=100.0)
    s.add_argument("--random-start", action="store_true", help="draw p0 from the seeded generator")
    s.set_defaults(func=cmd_counterexample)

    s = sub.add_parser("linflow", help="spectral analysis and limit prediction of the linear flow")
    common(s)
    s.add_argument("--m", type=int, default=3)
    s.add_argument("--n", type=int, default=3)
    s.add_argument("--omega", help="dense weight matrix 'a,b;c,d' (random symmetric-form if absent)")
    s.set_defaults(func=cmd_linflow)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with _threads():
            return args.func(args)
    except AssignFlowError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
