"""Fold light curves to phase and resample them onto a fixed grid.

The steps mirror the usual variable-star preprocessing: map observation times
to phases in [0, 1) with the known period, extend the folded series by one
full cycle so the whole unit interval is bracketed, then linearly interpolate
onto L evenly spaced phases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import RawLightCurve, StarRecord

DEFAULT_GRID_LENGTH = 272


def phase_grid(length: int) -> np.ndarray:
    """Evenly spaced phases j/(length-1) for j = 0..length-1."""
    if length < 2:
        raise ValueError("grid length must be at least 2")
    return np.arange(length) / (length - 1)


@dataclass(frozen=True, eq=False)
class PhasedCurve:
    """One star's flux on the shared evenly spaced phase grid."""

    star_id: str
    phases: np.ndarray
    fluxes: np.ndarray

    def __post_init__(self) -> None:
        if self.phases.shape != self.fluxes.shape or self.phases.ndim != 1:
            raise ValueError("phases and fluxes must be equal-length vectors")
        if not np.all(np.isfinite(self.fluxes)):
            raise ValueError(f"curve {self.star_id!r} has non-finite flux")

    @property
    def grid_length(self) -> int:
        return len(self.phases)


def fold(curve: RawLightCurve, period: float, t0: float
         ) -> tuple[np.ndarray, np.ndarray]:
    """Fold observation times to phases in [0, 1).

    phase = fractional part of (t - t0) / period, shifted into [0, 1) for
    negative arguments.  The output is sorted by phase; observations folding
    to the same phase keep their original time order.
    """
    if period <= 0:
        raise ValueError(f"period must be positive, got {period!r}")
    cycles = (curve.times - t0) / period
    phases = cycles - np.floor(cycles)
    order = np.argsort(phases, kind="stable")
    return phases[order], curve.fluxes[order]


def extend(phases: np.ndarray, fluxes: np.ndarray
           ) -> tuple[np.ndarray, np.ndarray]:
    """Append a copy of the folded series shifted by +1 in phase.

    Doubles the length and keeps the series sorted, so every target phase in
    [0, 1] is bracketed by observed points.
    """
    phases = np.asarray(phases, dtype=float)
    if np.any(np.diff(phases) < 0):
        raise ValueError("phases must be sorted before extension")
    return (np.concatenate([phases, phases + 1.0]),
            np.concatenate([fluxes, fluxes]))


def linear_resample(phases: np.ndarray, fluxes: np.ndarray,
                    length: int = DEFAULT_GRID_LENGTH,
                    star_id: str = "") -> PhasedCurve:
    """Linear-spline interpolation of an extended phased series onto the grid.

    Each target phase p in a segment [p_j, p_j+1] gets the convex combination
    a*y_j + (1-a)*y_j+1 with a = (p_j+1 - p)/(p_j+1 - p_j).  Duplicate phases
    collapse to the later observation (zero-width segments carry no slope).
    Targets below the first folded phase use their periodic image at p + 1,
    which the extension step guarantees is bracketed; anything still outside
    the knot range clamps to the nearest knot value.
    """
    phases = np.asarray(phases, dtype=float)
    fluxes = np.asarray(fluxes, dtype=float)
    if len(np.unique(phases)) < 2:
        raise ValueError("resampling needs at least 2 distinct phases")

    keep = np.ones(len(phases), dtype=bool)
    keep[:-1] = phases[:-1] != phases[1:]
    knots_p, knots_y = phases[keep], fluxes[keep]

    targets = phase_grid(length)
    lookup = np.where(targets < knots_p[0], targets + 1.0, targets)
    values = np.interp(lookup, knots_p, knots_y)
    return PhasedCurve(star_id=star_id, phases=targets, fluxes=values)


def process_curve(curve: RawLightCurve, record: StarRecord,
                  length: int = DEFAULT_GRID_LENGTH) -> PhasedCurve:
    """Fold, extend and resample a single curve using its catalog entry."""
    ph, fl = fold(curve, record.period, record.t0)
    ph, fl = extend(ph, fl)
    return linear_resample(ph, fl, length=length, star_id=curve.star_id)


def process_all(curves: list[RawLightCurve], records: list[StarRecord],
                length: int = DEFAULT_GRID_LENGTH,
                threads: int = 1) -> list[PhasedCurve]:
    """Phase-fold every curve onto the shared grid, in input order.

    Every curve must have a catalog record; unmatched ids raise.  Curves are
    independent, so with threads > 1 they are processed concurrently (output
    order is preserved either way).
    """
    by_id = {r.star_id: r for r in records}
    missing = [c.star_id for c in curves if c.star_id not in by_id]
    if missing:
        raise ValueError(f"no catalog record for: {', '.join(missing)}")
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(
                lambda c: process_curve(c, by_id[c.star_id], length), curves))
    return [process_curve(c, by_id[c.star_id], length) for c in curves]
