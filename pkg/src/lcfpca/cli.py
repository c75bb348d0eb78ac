"""Batch command-line interface: stageable subcommands plus a one-shot pipeline."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for per-curve stages")


def _add_lambda_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lambda-grid-min", type=float, default=1e-8)
    parser.add_argument("--lambda-grid-max", type=float, default=1e-4)
    parser.add_argument("--lambda-grid-points", type=int, default=50)
    parser.add_argument("--lambda-fixed", type=float, default=None,
                        help="bypass GCV and smooth at this lambda")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lcfpca",
        description="Cluster periodic light curves with spline smoothing, "
                    "functional PCA and Ward clustering.")
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fold", help="phase-fold raw curves onto the grid")
    p.add_argument("--curves-dir", required=True)
    p.add_argument("--catalog", required=True)
    p.add_argument("--grid-length", type=int, default=272)
    _add_common(p)

    p = sub.add_parser("smooth", help="penalized-spline smooth phased curves")
    p.add_argument("--phased-dir", required=True)
    p.add_argument("--order", type=int, default=4)
    _add_lambda_flags(p)
    _add_common(p)

    p = sub.add_parser("fpca", help="functional PCA on smoothed coefficients")
    p.add_argument("--coef-dir", required=True,
                   help="directory with coefficients.csv and basis.json")
    p.add_argument("--components", type=int, default=5)
    _add_common(p)

    p = sub.add_parser("cluster", help="Ward clustering of FPC scores")
    p.add_argument("--scores", required=True, help="scores.csv path")
    p.add_argument("--k", type=int, default=None,
                   help="cut the tree at this k (default: defer to validate)")
    p.add_argument("--standardize", action="store_true")
    _add_common(p)

    p = sub.add_parser("validate",
                       help="connectivity-based cluster count selection")
    p.add_argument("--scores", required=True)
    p.add_argument("--dendrogram", required=True)
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=6)
    p.add_argument("--neighbors", type=int, default=10)
    p.add_argument("--truth", default=None,
                   help="reference labels CSV for confusion/percent-correct")
    _add_common(p)

    p = sub.add_parser("simulate", help="generate a benchmark scenario")
    p.add_argument("--scenario", type=int, required=True, choices=(1, 2, 3))
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)

    p = sub.add_parser("pipeline", help="run every stage end to end")
    p.add_argument("--config", default=None, help="key = value config file")
    p.add_argument("--curves-dir", default=None)
    p.add_argument("--catalog", default=None)
    p.add_argument("--phased-dir", default=None)
    p.add_argument("--truth", default=None)
    p.add_argument("--grid-length", type=int, default=None)
    p.add_argument("--order", type=int, default=None)
    p.add_argument("--components", type=int, default=None)
    p.add_argument("--k-min", type=int, default=None)
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--neighbors", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--standardize", action="store_true", default=None)
    p.add_argument("--dump-phased", action="store_true", default=None)
    p.add_argument("--plots", action="store_true", default=None)
    p.add_argument("--lambda-grid-min", type=float, default=None)
    p.add_argument("--lambda-grid-max", type=float, default=None)
    p.add_argument("--lambda-grid-points", type=int, default=None)
    p.add_argument("--lambda-fixed", type=float, default=None)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--threads", type=int, default=None)

    return parser


def _cmd_fold(args) -> None:
    from .catalog import load_catalog, load_lightcurves
    from .phase_fold import process_all
    from .pipeline import save_phased_curve

    records = load_catalog(args.catalog)
    curves = load_lightcurves(args.curves_dir, [r.star_id for r in records])
    phased = process_all(curves, records, length=args.grid_length,
                         threads=args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for curve in phased:
        save_phased_curve(curve, out)
    print(f"wrote {len(phased)} phased curves to {out}")


def _cmd_smooth(args) -> None:
    from .bspline_basis import build_basis
    from .phase_fold import phase_grid
    from .pipeline import load_phased_dir, save_coefficients, save_fit_report
    from .smoother import smooth_all

    phased = load_phased_dir(args.phased_dir)
    basis = build_basis(phase_grid(phased[0].grid_length), order=args.order)
    grid = np.geomspace(args.lambda_grid_min, args.lambda_grid_max,
                        args.lambda_grid_points)
    dataset, fits = smooth_all(phased, basis, grid=grid,
                               lam_fixed=args.lambda_fixed, return_fits=True)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_coefficients(dataset, out)
    save_fit_report(dataset.ids, fits, out)
    print(f"smoothed {len(phased)} curves "
          f"({dataset.coef.shape[1]} coefficients each)")


def _cmd_fpca(args) -> None:
    from .fpca import fpca
    from .pipeline import (load_coefficients, save_eigenfunctions,
                           save_scores, save_scree)

    dataset = load_coefficients(args.coef_dir)
    result = fpca(dataset, args.components)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_scores(result, dataset.ids, out)
    save_scree(result, out)
    save_eigenfunctions(result, out)
    shares = ", ".join(f"{v:.3%}" for v in result.var_explained)
    print(f"cumulative variance explained: {shares}")


def _cmd_cluster(args) -> None:
    from .cluster import cut, save_dendrogram, ward_linkage
    from .pipeline import load_scores, write_labels

    ids, points = load_scores(args.scores)
    if args.standardize:
        sd = points.std(axis=0, ddof=1)
        sd[sd == 0] = 1.0
        points = (points - points.mean(axis=0)) / sd
    dendrogram = ward_linkage(points, leaf_ids=ids)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_dendrogram(dendrogram, out / "dendrogram.json")
    if args.k is not None:
        assignment = cut(dendrogram, args.k)
        write_labels(out / "assignments.csv", ids, assignment.labels)
        print(f"cut at k={args.k}: sizes "
              f"{np.bincount(assignment.labels).tolist()}")
    else:
        print(f"dendrogram over {len(ids)} leaves written")


def _cmd_validate(args) -> None:
    from .cluster import cut, load_dendrogram
    from .pipeline import (load_labels, load_scores,
                           save_confusion, save_connectivity_report,
                           write_labels)
    from .validity import confusion_matrix, percent_correct, select_k

    ids, points = load_scores(args.scores)
    dendrogram = load_dendrogram(args.dendrogram)
    report = select_k(points, dendrogram,
                      k_range=range(args.k_min, args.k_max + 1),
                      n_neighbors=args.neighbors)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_connectivity_report(report, out)
    assignment = cut(dendrogram, report.chosen_k)
    write_labels(out / "assignments.csv", ids, assignment.labels)
    for k in sorted(report.values):
        marker = "  <- chosen" if k == report.chosen_k else ""
        print(f"k={k}: connectivity {report.values[k]:.3f}{marker}")
    if args.truth:
        truth_map = load_labels(args.truth)
        truth = np.asarray([truth_map[i] for i in ids])
        save_confusion(confusion_matrix(truth, assignment.labels), out)
        print(f"percent correct at k={report.chosen_k}: "
              f"{percent_correct(truth, assignment.labels):.3f}")


def _cmd_simulate(args) -> None:
    from .pipeline import run_simulate

    out = run_simulate(args.scenario, args.seed, args.out)
    print(f"scenario {args.scenario} (seed {args.seed}) written to {out}")


def _cmd_pipeline(args) -> None:
    from .pipeline import PipelineConfig, run_pipeline

    config = (PipelineConfig.from_file(args.config) if args.config
              else PipelineConfig())
    overrides = {
        "curves_dir": args.curves_dir,
        "catalog_path": args.catalog,
        "phased_dir": args.phased_dir,
        "truth_path": args.truth,
        "out_dir": args.out,
        "grid_length": args.grid_length,
        "order": args.order,
        "lambda_min": args.lambda_grid_min,
        "lambda_max": args.lambda_grid_max,
        "lambda_points": args.lambda_grid_points,
        "lambda_fixed": args.lambda_fixed,
        "n_components": args.components,
        "k_min": args.k_min,
        "k_max": args.k_max,
        "neighbors": args.neighbors,
        "seed": args.seed,
        "standardize_scores": args.standardize,
        "dump_phased": args.dump_phased,
        "plots": args.plots,
        "threads": args.threads,
    }
    for key, value in overrides.items():
        if value is not None:
            setattr(config, key, value)
    manifest = run_pipeline(config)
    print(f"pipeline finished: {manifest['n_curves']} curves, "
          f"chosen k = {manifest['chosen_k']}, "
          f"cluster sizes {manifest['cluster_sizes']}")


_COMMANDS = {
    "fold": _cmd_fold,
    "smooth": _cmd_smooth,
    "fpca": _cmd_fpca,
    "cluster": _cmd_cluster,
    "validate": _cmd_validate,
    "simulate": _cmd_simulate,
    "pipeline": _cmd_pipeline,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        _COMMANDS[args.command](args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
