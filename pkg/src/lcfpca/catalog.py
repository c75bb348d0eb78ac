"""Data model and CSV I/O for light curves and star metadata."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

CATALOG_COLUMNS = ("id", "period", "t0", "R", "B-R", "R-I")
SUMMARY_VARIABLES = ("period", "r_mag", "b_mag", "i_mag", "b_minus_i",
                     "r_minus_i")
SUMMARY_HEADERS = ("P", "R", "B", "I", "B-I", "R-I")


@dataclass(frozen=True, eq=False)
class RawLightCurve:
    """Irregularly sampled (time, flux) series for one star."""

    star_id: str
    times: np.ndarray
    fluxes: np.ndarray

    def __post_init__(self) -> None:
        if self.times.shape != self.fluxes.shape or self.times.ndim != 1:
            raise ValueError(f"curve {self.star_id!r}: times and fluxes "
                             "must be equal-length vectors")
        if len(self.times) < 2:
            raise ValueError(f"curve {self.star_id!r}: need at least 2 points")
        if not (np.all(np.isfinite(self.times))
                and np.all(np.isfinite(self.fluxes))):
            raise ValueError(f"curve {self.star_id!r}: non-finite values")
        if np.any(np.diff(self.times) <= 0):
            row = int(np.flatnonzero(np.diff(self.times) <= 0)[0]) + 2
            raise ValueError(f"curve {self.star_id!r}: times not strictly "
                             f"increasing at row {row}")

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class StarRecord:
    """Catalog entry: period, reference epoch and photometric colors.

    The last three magnitudes are derived: I = R - (R-I),
    B-I = (B-R) + (R-I) and B = (B-I) + I.
    """

    star_id: str
    period: float
    t0: float
    r_mag: float
    b_minus_r: float
    r_minus_i: float
    i_mag: float
    b_minus_i: float
    b_mag: float

    @classmethod
    def from_photometry(cls, star_id: str, period: float, t0: float,
                        r_mag: float, b_minus_r: float,
                        r_minus_i: float) -> "StarRecord":
        if period <= 0:
            raise ValueError(f"star {star_id!r}: period must be positive, "
                             f"got {period!r}")
        i_mag = r_mag - r_minus_i
        b_minus_i = b_minus_r + r_minus_i
        return cls(star_id=star_id, period=period, t0=t0, r_mag=r_mag,
                   b_minus_r=b_minus_r, r_minus_i=r_minus_i, i_mag=i_mag,
                   b_minus_i=b_minus_i, b_mag=b_minus_i + i_mag)


def load_catalog(path: str | Path) -> list[StarRecord]:
    """Read a star catalog CSV with columns id, period, t0, R, B-R, R-I.

    Row order is preserved and derived magnitudes are filled in.  A missing
    column is a schema error; a non-positive period names the star.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in CATALOG_COLUMNS if c not in header]
        if missing:
            raise ValueError(f"catalog {path}: schema error, missing "
                             f"column(s) {', '.join(missing)}")
        records = []
        for row in reader:
            records.append(StarRecord.from_photometry(
                star_id=row["id"],
                period=float(row["period"]),
                t0=float(row["t0"]),
                r_mag=float(row["R"]),
                b_minus_r=float(row["B-R"]),
                r_minus_i=float(row["R-I"]),
            ))
    return records


def save_catalog(records: list[StarRecord], path: str | Path) -> None:
    """Write the six input columns back out (round-trips exactly)."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CATALOG_COLUMNS)
        for r in records:
            writer.writerow([r.star_id, repr(r.period), repr(r.t0),
                             repr(r.r_mag), repr(r.b_minus_r),
                             repr(r.r_minus_i)])


def _read_two_column_csv(path: Path) -> tuple[np.ndarray, np.ndarray]:
    rows = []
    with path.open(newline="", encoding="utf-8") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row:
                continue
            try:
                rows.append((float(row[0]), float(row[1])))
            except (ValueError, IndexError):
                if i == 0:  # header line
                    continue
                raise ValueError(f"{path}: bad numeric row {i + 1}: {row!r}")
    if not rows:
        return np.empty(0), np.empty(0)
    arr = np.asarray(rows)
    return arr[:, 0], arr[:, 1]


def load_lightcurves(directory: str | Path,
                     ids: list[str]) -> list[RawLightCurve]:
    """Load one two-column (time, flux) CSV per star id, in id order.

    Curves shorter than 2 points are skipped with a logged warning rather
    than failing the run; validation errors (unsorted times, non-finite
    values) are raised with the star named.
    """
    directory = Path(directory)
    curves = []
    for star_id in ids:
        path = directory / f"{star_id}.csv"
        if not path.exists():
            raise FileNotFoundError(f"no light-curve file for star "
                                    f"{star_id!r}: {path}")
        times, fluxes = _read_two_column_csv(path)
        if len(times) < 2:
            log.warning("star %s: curve has %d point(s), skipping",
                        star_id, len(times))
            continue
        curves.append(RawLightCurve(star_id=star_id, times=times,
                                    fluxes=fluxes))
    return curves


def save_lightcurve(curve: RawLightCurve, directory: str | Path) -> Path:
    path = Path(directory) / f"{curve.star_id}.csv"
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("time", "flux"))
        for t, f in zip(curve.times, curve.fluxes):
            writer.writerow((repr(float(t)), repr(float(f))))
    return path


@dataclass(frozen=True)
class ClusterSummaryRow:
    """Mean and standard error of each catalog variable within one cluster."""

    cluster: int
    n: int
    means: tuple[float, ...]  # ordered as SUMMARY_HEADERS
    ses: tuple[float, ...]    # NaN when n == 1


def cluster_summary(records: list[StarRecord],
                    labels: np.ndarray) -> list[ClusterSummaryRow]:
    """Per-cluster means and standard errors of P, R, B, I, B-I and R-I.

    The standard error is the sample standard deviation (n-1 denominator)
    over sqrt(n); it is NaN for singleton clusters.
    """
    labels = np.asarray(labels)
    if len(labels) != len(records):
        raise ValueError("labels and records must have equal length")
    present = set(int(v) for v in labels)
    empty = sorted(set(range(max(present) + 1)) - present) if present else []
    if empty:
        raise ValueError(f"empty cluster(s): {empty}")
    rows = []
    for cluster in sorted(present):
        members = [r for r, lab in zip(records, labels) if int(lab) == cluster]
        if not members:
            raise ValueError(f"cluster {cluster} is empty")
        n = len(members)
        means, ses = [], []
        for var in SUMMARY_VARIABLES:
            vals = np.array([getattr(r, var) for r in members])
            means.append(float(vals.mean()))
            ses.append(float(vals.std(ddof=1) / math.sqrt(n)) if n > 1
                       else float("nan"))
        rows.append(ClusterSummaryRow(cluster=cluster, n=n,
                                      means=tuple(means), ses=tuple(ses)))
    return rows
