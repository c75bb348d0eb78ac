"""End-to-end orchestration: load, fold, smooth, decompose, cluster, report.

Every stage writes its outputs as plain CSV (tables) or JSON (trees and the
run manifest) so each stage can also be run standalone on the previous
stage's files.  Reruns with identical inputs and configuration produce
byte-identical artifacts.
"""

from __future__ import annotations

import csv
import json
import logging
from contextlib import contextmanager
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .bspline_basis import BasisSystem, build_basis, eval_basis
from .catalog import (StarRecord, cluster_summary, load_catalog,
                      load_lightcurves, SUMMARY_HEADERS)
from .cluster import cut, save_dendrogram, ward_linkage
from .fpca import FpcaResult, fpca
from .phase_fold import PhasedCurve, phase_grid, process_all
from .simgen import generate, scenario
from .smoother import FunctionalDataSet, smooth_all
from .validity import (confusion_matrix, connectivity, percent_correct,
                       select_k)

log = logging.getLogger(__name__)


class StageError(RuntimeError):
    """A pipeline stage failed; the message names the stage."""


@contextmanager
def _stage(name: str):
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(f"[{name}] {exc}") from exc


@dataclass
class PipelineConfig:
    """Everything a run needs; round-trips through a key=value file."""

    curves_dir: str = ""
    catalog_path: str = ""
    phased_dir: str = ""
    truth_path: str = ""
    out_dir: str = "out"
    grid_length: int = 272
    order: int = 4
    lambda_min: float = 1e-8
    lambda_max: float = 1e-4
    lambda_points: int = 50
    lambda_fixed: float = 0.0  # 0 means GCV selection
    n_components: int = 5
    k_min: int = 2
    k_max: int = 6
    neighbors: int = 10
    seed: int = 0
    standardize_scores: bool = False
    dump_phased: bool = False
    plots: bool = False
    threads: int = 1

    def lambda_grid(self) -> np.ndarray:
        return np.geomspace(self.lambda_min, self.lambda_max,
                            self.lambda_points)

    def to_file(self, path: str | Path) -> None:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool):
                value = "true" if value else "false"
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{f.name} = {value}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        values: dict[str, str] = {}
        for raw in Path(path).read_text(encoding="utf-8").splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"config line is not key = value: {raw!r}")
            key, _, val = line.partition("=")
            values[key.strip()] = val.strip()
        kwargs = {}
        for f in fields(cls):
            if f.name not in values:
                continue
            raw_val = values.pop(f.name)
            if f.type == "bool":
                kwargs[f.name] = raw_val.lower() in ("1", "true", "yes")
            elif f.type == "int":
                kwargs[f.name] = int(raw_val)
            elif f.type == "float":
                kwargs[f.name] = float(raw_val)
            else:
                kwargs[f.name] = raw_val
        if values:
            raise ValueError(f"unknown config key(s): {sorted(values)}")
        return cls(**kwargs)

    def validate(self) -> None:
        if self.grid_length < self.order:
            raise ValueError("grid_length must be at least the spline order")
        if not (0 < self.lambda_min <= self.lambda_max):
            raise ValueError("need 0 < lambda_min <= lambda_max")
        if self.lambda_points < 1:
            raise ValueError("lambda_points must be positive")
        if self.n_components < 1:
            raise ValueError("n_components must be positive")
        if not 1 <= self.k_min <= self.k_max:
            raise ValueError("need 1 <= k_min <= k_max")
        if self.neighbors < 1:
            raise ValueError("neighbors must be positive")


# ---------------------------------------------------------------------------
# CSV helpers.  Floats are written with repr so values round-trip exactly and
# rerun artifacts are byte-identical.

def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: Path, header: list[str], rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader if row]


def save_phased_curve(curve: PhasedCurve, directory: Path) -> Path:
    path = directory / f"{curve.star_id}.csv"
    write_csv(path, ["phase", "flux"], zip(curve.phases, curve.fluxes))
    return path


def load_phased_dir(directory: str | Path) -> list[PhasedCurve]:
    """Read every per-star phase/flux CSV of a directory, sorted by id."""
    directory = Path(directory)
    paths = sorted(directory.glob("*.csv"))
    paths = [p for p in paths if p.name != "truth_labels.csv"]
    curves = []
    for path in paths:
        _, rows = read_csv(path)
        arr = np.asarray([[float(a), float(b)] for a, b in rows])
        curves.append(PhasedCurve(star_id=path.stem, phases=arr[:, 0],
                                  fluxes=arr[:, 1]))
    if not curves:
        raise ValueError(f"no phased-curve CSVs found in {directory}")
    return curves


def load_labels(path: str | Path) -> dict[str, int]:
    _, rows = read_csv(Path(path))
    return {row[0]: int(row[1]) for row in rows}


def write_labels(path: Path, ids: list[str], labels) -> None:
    write_csv(path, ["id", "label"], zip(ids, (int(v) for v in labels)))


def save_coefficients(dataset: FunctionalDataSet, directory: Path) -> None:
    k = dataset.coef.shape[1]
    header = ["id"] + [f"c{j + 1}" for j in range(k)]
    rows = ([sid] + list(row) for sid, row in zip(dataset.ids, dataset.coef))
    write_csv(directory / "coefficients.csv", header, rows)
    meta = {"grid_length": dataset.basis.grid_length,
            "order": dataset.basis.order}
    (directory / "basis.json").write_text(json.dumps(meta, indent=1),
                                          encoding="utf-8")


def load_coefficients(directory: str | Path) -> FunctionalDataSet:
    directory = Path(directory)
    meta = json.loads((directory / "basis.json").read_text(encoding="utf-8"))
    basis = build_basis(phase_grid(meta["grid_length"]), order=meta["order"])
    header, rows = read_csv(directory / "coefficients.csv")
    ids = [row[0] for row in rows]
    coef = np.asarray([[float(v) for v in row[1:]] for row in rows])
    return FunctionalDataSet(basis=basis, coef=coef, ids=ids)


def save_scores(result: FpcaResult, ids: list[str], directory: Path) -> None:
    m = result.n_components
    header = ["id"] + [f"f{j + 1}" for j in range(m)]
    rows = ([sid] + list(row) for sid, row in zip(ids, result.scores))
    write_csv(directory / "scores.csv", header, rows)


def load_scores(path: str | Path) -> tuple[list[str], np.ndarray]:
    _, rows = read_csv(Path(path))
    ids = [row[0] for row in rows]
    scores = np.asarray([[float(v) for v in row[1:]] for row in rows])
    return ids, scores


def save_scree(result: FpcaResult, directory: Path) -> None:
    total = result.total_variance
    cumulative = np.cumsum(result.eigenvalues) / total if total > 0 \
        else np.zeros_like(result.eigenvalues)
    rows = ((m + 1, ev, cf) for m, (ev, cf)
            in enumerate(zip(result.eigenvalues, cumulative)))
    write_csv(directory / "scree.csv",
              ["component", "eigenvalue", "cumulative_fraction"], rows)


def save_eigenfunctions(result: FpcaResult, directory: Path) -> None:
    grid = result.basis.sample_points
    values = eval_basis(result.basis, grid) @ result.eig_coefs.T
    header = ["phase"] + [f"xi{j + 1}" for j in range(result.n_components)]
    rows = ([p] + list(v) for p, v in zip(grid, values))
    write_csv(directory / "eigenfunctions.csv", header, rows)


def save_fit_report(ids, fits, directory: Path) -> None:
    rows = ((sid, f.lam, f.df, f.sse, f.gcv) for sid, f in zip(ids, fits))
    write_csv(directory / "fit_report.csv",
              ["id", "lambda", "df", "sse", "gcv"], rows)


def save_connectivity_report(report, directory: Path) -> None:
    rows = ((k, v) for k, v in sorted(report.values.items()))
    write_csv(directory / "connectivity.csv", ["k", "connectivity"], rows)


def save_cluster_mean_curves(curves: list[PhasedCurve], labels,
                             directory: Path) -> None:
    from .simgen import group_mean_curves

    phases, means, ses = group_mean_curves(curves, labels)
    header = ["phase"]
    for c in range(means.shape[0]):
        header += [f"mean_c{c}", f"se_c{c}"]
    rows = []
    for j, p in enumerate(phases):
        row = [p]
        for c in range(means.shape[0]):
            row += [means[c, j], ses[c, j]]
        rows.append(row)
    write_csv(directory / "cluster_mean_curves.csv", header, rows)


def save_cluster_summary(records: list[StarRecord], labels,
                         directory: Path) -> None:
    header = ["cluster", "n"]
    for name in SUMMARY_HEADERS:
        header += [f"{name}_mean", f"{name}_se"]
    rows = []
    for summary in cluster_summary(records, labels):
        row = [summary.cluster, summary.n]
        for mean, se in zip(summary.means, summary.ses):
            row += [mean, se]
        rows.append(row)
    write_csv(directory / "cluster_summary.csv", header, rows)


def save_confusion(table, directory: Path) -> None:
    header = ["reference\\pipeline"] + [str(c) for c in table.labels_b] \
        + ["total"]
    rows = []
    for i, cat in enumerate(table.labels_a):
        rows.append([cat] + list(table.counts[i]) + [int(table.row_totals[i])])
    rows.append(["total"] + list(table.col_totals) + [table.total])
    write_csv(directory / "confusion.csv", header, rows)


def save_star_table(records: list[StarRecord], labels,
                    directory: Path) -> None:
    """Per-star photometry with cluster label (histogram / CMD source data)."""
    rows = ((r.star_id, int(lab), r.period, r.r_mag, r.b_mag, r.i_mag,
             r.b_minus_r, r.r_minus_i, r.b_minus_i)
            for r, lab in zip(records, labels))
    write_csv(directory / "star_table.csv",
              ["id", "label", "P", "R", "B", "I", "B-R", "R-I", "B-I"], rows)


# ---------------------------------------------------------------------------

def run_pipeline(config: PipelineConfig) -> dict:
    """Run every stage and return the manifest (also written to disk)."""
    config.validate()
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    records: list[StarRecord] = []
    with _stage("load"):
        if config.phased_dir:
            phased = load_phased_dir(config.phased_dir)
            if len({c.grid_length for c in phased}) != 1:
                raise ValueError("phased curves disagree on grid length")
            config = replace(config, grid_length=phased[0].grid_length)
        elif config.curves_dir and config.catalog_path:
            records = load_catalog(config.catalog_path)
            curves = load_lightcurves(config.curves_dir,
                                      [r.star_id for r in records])
            kept = {c.star_id for c in curves}
            records = [r for r in records if r.star_id in kept]
            with _stage("fold"):
                phased = process_all(curves, records,
                                     length=config.grid_length,
                                     threads=config.threads)
        else:
            raise ValueError("config must point at either a phased-curve "
                             "directory or a curves directory plus catalog")
        if not phased:
            raise ValueError("no input curves")

    if config.dump_phased:
        with _stage("dump-phased"):
            dump_dir = out / "phased"
            dump_dir.mkdir(exist_ok=True)
            for curve in phased:
                save_phased_curve(curve, dump_dir)

    with _stage("smooth"):
        basis = build_basis(phase_grid(config.grid_length),
                            order=config.order)
        lam_fixed = config.lambda_fixed if config.lambda_fixed > 0 else None
        dataset, fits = smooth_all(phased, basis, grid=config.lambda_grid(),
                                   lam_fixed=lam_fixed, return_fits=True)
        save_fit_report(dataset.ids, fits, out)
        save_coefficients(dataset, out)

    with _stage("fpca"):
        result = fpca(dataset, config.n_components)
        save_scores(result, dataset.ids, out)
        save_scree(result, out)
        save_eigenfunctions(result, out)

    with _stage("cluster"):
        points = result.scores
        if config.standardize_scores:
            sd = points.std(axis=0, ddof=1)
            sd[sd == 0] = 1.0
            points = (points - points.mean(axis=0)) / sd
        dendrogram = ward_linkage(points, leaf_ids=dataset.ids)
        save_dendrogram(dendrogram, out / "dendrogram.json")

    with _stage("validate"):
        k_range = range(config.k_min, config.k_max + 1)
        report = select_k(points, dendrogram, k_range=k_range,
                          n_neighbors=config.neighbors)
        save_connectivity_report(report, out)
        assignment = cut(dendrogram, report.chosen_k)
        write_labels(out / "assignments.csv", dataset.ids, assignment.labels)

    with _stage("summaries"):
        save_cluster_mean_curves(phased, assignment.labels, out)
        if records:
            save_cluster_summary(records, assignment.labels, out)
            save_star_table(records, assignment.labels, out)

    percent = None
    with _stage("compare"):
        if config.truth_path:
            truth_map = load_labels(config.truth_path)
            missing = [i for i in dataset.ids if i not in truth_map]
            if missing:
                raise ValueError(f"truth labels missing for: {missing[:5]}")
            truth = np.asarray([truth_map[i] for i in dataset.ids])
            save_confusion(confusion_matrix(truth, assignment.labels), out)
            percent = percent_correct(truth, assignment.labels)

    with _stage("manifest"):
        import scipy

        manifest = {
            "config": {f.name: getattr(config, f.name) for f in fields(config)},
            "versions": {"lcfpca": __version__, "numpy": np.__version__,
                         "scipy": scipy.__version__},
            "n_curves": len(phased),
            "grid_length": config.grid_length,
            "n_basis": basis.n_basis,
            "connectivity": {str(k): v for k, v in sorted(report.values.items())},
            "chosen_k": report.chosen_k,
            "cluster_sizes": np.bincount(assignment.labels).tolist(),
            "percent_correct": percent,
            "variance_explained": result.var_explained.tolist(),
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=1),
                                           encoding="utf-8")

    if config.plots:
        with _stage("plots"):
            from .plots import emit_plots

            emit_plots(out)

    return manifest


def run_simulate(which: int, seed: int, out_dir: str | Path) -> Path:
    """Generate a benchmark scenario into per-curve CSVs plus truth labels."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    curves, labels = generate(scenario(which), seed)
    for curve in curves:
        save_phased_curve(curve, out)
    write_labels(out / "truth_labels.csv", [c.star_id for c in curves],
                 labels)
    return out
