"""Synthetic periodic light-curve populations with noise and outliers.

Each group draws curves as signal(t) + noise on an evenly spaced grid over
[0, 1].  The noise budget is sigma^2 = Var(signal)/SNR, split 90/10 between
heteroscedastic "measurement accuracy" noise (per-point standard deviations
drawn from a uniform band around sqrt(0.9)*sigma) and white noise.  A fixed
fraction of points per curve is marked as outliers and has its measurement
noise inflated tenfold.  Generation is reproducible: every curve uses its own
child stream spawned from the master seed, so order of generation is
irrelevant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .phase_fold import PhasedCurve, phase_grid

MEASUREMENT_SHARE = 0.9  # variance share of the heteroscedastic component
WHITE_SHARE = 0.1
ACCURACY_BAND = (0.5, 1.5)  # uniform band of per-point sd multipliers
OUTLIER_INFLATION = 10.0

_SIGNALS = {
    "sin": lambda t: np.sin(2 * np.pi * t),
    "cos": lambda t: np.cos(2 * np.pi * t),
    "neg-cos": lambda t: -np.cos(2 * np.pi * t),
}


@dataclass(frozen=True)
class SimGroup:
    """One homogeneous population: count, waveform, amplitude and SNR."""

    count: int
    shape: str
    amplitude: float
    snr: float

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError("group count must be at least 1")
        if self.snr <= 0:
            raise ValueError("SNR must be positive")
        if self.shape not in _SIGNALS:
            raise ValueError(f"unknown signal shape {self.shape!r}; "
                             f"choose from {sorted(_SIGNALS)}")

    def signal(self, t: np.ndarray) -> np.ndarray:
        return self.amplitude * _SIGNALS[self.shape](t)


@dataclass(frozen=True)
class SimScenario:
    groups: tuple[SimGroup, ...]
    n_points: int
    outlier_fraction: float

    def __post_init__(self) -> None:
        if not 0 <= self.outlier_fraction < 1:
            raise ValueError("outlier fraction must be in [0, 1)")
        if self.n_points < 2:
            raise ValueError("need at least 2 grid points")

    @property
    def total_curves(self) -> int:
        return sum(g.count for g in self.groups)


def scenario(number: int) -> SimScenario:
    """The three built-in benchmark populations.

    1: 500 sine + 500 cosine curves, amplitude 1, SNR 3, 250 points,
       10% outliers.
    2: 500 + 500 sine curves with amplitudes 1 and 3, SNR 3, 250 points,
       10% outliers.
    3: four negated-cosine groups of 1000/500/450/850 curves, amplitudes
       0.05/0.15/0.30/0.50, SNRs 1.5/2/2.5/3, 150 points, 5% outliers.
       The waveform dips at both ends of the phase window, the usual
       eclipsing-binary template.
    """
    if number == 1:
        groups = (SimGroup(500, "sin", 1.0, 3.0),
                  SimGroup(500, "cos", 1.0, 3.0))
        return SimScenario(groups=groups, n_points=250, outlier_fraction=0.10)
    if number == 2:
        groups = (SimGroup(500, "sin", 1.0, 3.0),
                  SimGroup(500, "sin", 3.0, 3.0))
        return SimScenario(groups=groups, n_points=250, outlier_fraction=0.10)
    if number == 3:
        groups = (SimGroup(1000, "neg-cos", 0.05, 1.5),
                  SimGroup(500, "neg-cos", 0.15, 2.0),
                  SimGroup(450, "neg-cos", 0.30, 2.5),
                  SimGroup(850, "neg-cos", 0.50, 3.0))
        return SimScenario(groups=groups, n_points=150, outlier_fraction=0.05)
    raise ValueError(f"unknown scenario {number}; choose 1, 2 or 3")


@dataclass(frozen=True)
class CurveNoiseInfo:
    """Bookkeeping for one generated curve (useful for diagnostics/tests)."""

    group: int
    sigma: float
    outlier_indices: np.ndarray
    point_sds: np.ndarray  # measurement-accuracy sd per point, pre-inflation


def generate(scn: SimScenario, seed: int, return_noise_info: bool = False):
    """Draw every curve of the scenario; returns (curves, true_labels).

    Curves appear group by group in generation order; labels hold the group
    index of each curve.  A fixed seed reproduces the output bit for bit.
    """
    grid = phase_grid(scn.n_points)
    streams = np.random.SeedSequence(seed).spawn(scn.total_curves)
    n_out = int(round(scn.outlier_fraction * scn.n_points))

    curves: list[PhasedCurve] = []
    labels: list[int] = []
    infos: list[CurveNoiseInfo] = []
    index = 0
    for g, group in enumerate(scn.groups):
        signal = group.signal(grid)
        sigma = float(np.sqrt(signal.var() / group.snr))
        for _ in range(group.count):
            rng = np.random.default_rng(streams[index])
            band = rng.uniform(*ACCURACY_BAND, scn.n_points)
            point_sds = band * np.sqrt(MEASUREMENT_SHARE) * sigma
            outliers = np.sort(rng.choice(scn.n_points, size=n_out,
                                          replace=False))
            inflated = point_sds.copy()
            inflated[outliers] *= OUTLIER_INFLATION
            measurement = rng.normal(0.0, 1.0, scn.n_points) * inflated
            white = rng.normal(0.0, np.sqrt(WHITE_SHARE) * sigma,
                               scn.n_points)
            flux = signal + measurement + white
            curves.append(PhasedCurve(star_id=f"lc{index:05d}",
                                      phases=grid, fluxes=flux))
            labels.append(g)
            if return_noise_info:
                infos.append(CurveNoiseInfo(group=g, sigma=sigma,
                                            outlier_indices=outliers,
                                            point_sds=point_sds))
            index += 1
    labels_arr = np.asarray(labels, dtype=np.int64)
    if return_noise_info:
        return curves, labels_arr, infos
    return curves, labels_arr


def group_mean_curves(curves: list[PhasedCurve], labels: np.ndarray
                      ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pointwise mean and standard-error curve per group.

    Returns (phases, means, ses) with one row per group label in sorted
    order; the standard error uses the n-1 sample standard deviation.
    """
    labels = np.asarray(labels)
    if len(labels) != len(curves):
        raise ValueError("labels and curves must have equal length")
    flux = np.vstack([c.fluxes for c in curves])
    groups = sorted(set(int(v) for v in labels))
    means, ses = [], []
    for g in groups:
        rows = flux[labels == g]
        if rows.shape[0] == 0:
            raise ValueError(f"group {g} is empty")
        means.append(rows.mean(axis=0))
        if rows.shape[0] > 1:
            ses.append(rows.std(axis=0, ddof=1) / np.sqrt(rows.shape[0]))
        else:
            ses.append(np.full(rows.shape[1], np.nan))
    return curves[0].phases, np.vstack(means), np.vstack(ses)
