import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lcfpca.catalog import RawLightCurve, StarRecord
from lcfpca.phase_fold import (extend, fold, linear_resample, phase_grid,
                               process_all, process_curve)


def make_curve(times, fluxes=None, star_id="s"):
    times = np.asarray(times, dtype=float)
    if fluxes is None:
        fluxes = np.zeros_like(times)
    return RawLightCurve(star_id=star_id, times=times,
                         fluxes=np.asarray(fluxes, dtype=float))


def test_fold_reference_epoch_is_phase_zero():
    ph, _ = fold(make_curve([2450000.0, 2450001.0]), period=2.0,
                 t0=2450000.0)
    assert ph[0] == 0.0


def test_fold_half_cycle():
    ph, _ = fold(make_curve([0.0, 5.0]), period=2.0, t0=0.0)
    assert ph[1] == pytest.approx(0.5, abs=1e-12)


def test_fold_arithmetic_example():
    ph, _ = fold(make_curve([2450000.0, 2450003.45]), period=2.758,
                 t0=2450000.0)
    expected = 3.45 / 2.758 - np.floor(3.45 / 2.758)
    # HJD-scale subtraction leaves ~1e-10 of cancellation noise
    assert ph[1] == pytest.approx(expected, abs=1e-9)
    assert ph[1] == pytest.approx(0.250906, abs=1e-6)


def test_fold_negative_offset_wraps_up():
    ph, _ = fold(make_curve([0.0, 1.5]), period=2.0, t0=2.0)
    assert 0.0 <= ph.min() and ph.max() < 1.0
    assert ph[1] == pytest.approx(0.75, abs=1e-12)  # t=1.5 is -0.25 cycles


def test_fold_sorts_by_phase_stably():
    # t=0.25 and t=2.25 fold to the same phase (0.25 is binary-exact) and
    # must keep time order; t=1.0 folds to 0 and sorts first
    curve = make_curve([0.25, 1.0, 2.25], fluxes=[1.0, 2.0, 3.0])
    ph, fl = fold(curve, period=1.0, t0=0.0)
    assert np.array_equal(fl, [2.0, 1.0, 3.0])


def test_fold_requires_positive_period():
    with pytest.raises(ValueError, match="period"):
        fold(make_curve([0.0, 1.0]), period=0.0, t0=0.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=-500, max_value=500),
       st.floats(min_value=0.5, max_value=50.0),
       st.floats(min_value=0.0, max_value=100.0))
def test_fold_period_invariance(k, period, t_offset):
    # moderate epoch keeps the k*period shift representable to ~1e-11 cycles
    t0 = 1000.0
    base = make_curve([t0 + t_offset, t0 + t_offset + period / 3],
                      fluxes=[1.0, 2.0])
    shifted = make_curve([t0 + t_offset + k * period,
                          t0 + t_offset + (k + 1 / 3) * period],
                         fluxes=[1.0, 2.0])
    ph_a, fl_a = fold(base, period, t0)
    ph_b, fl_b = fold(shifted, period, t0)
    # match observations by flux tag: sort order may differ when a phase
    # sits within float noise of the wrap boundary
    for tag in (1.0, 2.0):
        pa = ph_a[fl_a == tag][0]
        pb = ph_b[fl_b == tag][0]
        wrap = min(abs(pa - pb), 1.0 - abs(pa - pb))
        assert wrap <= 1e-9


def test_extend_doubles_and_shifts():
    ph, fl = extend(np.array([0.1, 0.6]), np.array([1.0, 2.0]))
    assert np.allclose(ph, [0.1, 0.6, 1.1, 1.6])
    assert np.allclose(fl, [1.0, 2.0, 1.0, 2.0])


def test_extend_single_point():
    ph, fl = extend(np.array([0.3]), np.array([5.0]))
    assert np.allclose(ph, [0.3, 1.3])


def test_extend_structure(rng):
    phases = np.sort(rng.uniform(0, 1, 37))
    ph, _ = extend(phases, rng.normal(size=37))
    assert len(ph) == 74
    assert ph.max() == pytest.approx(phases.max() + 1.0)
    assert np.all(np.diff(ph) >= 0)


def test_extend_rejects_unsorted():
    with pytest.raises(ValueError, match="sorted"):
        extend(np.array([0.5, 0.1]), np.array([1.0, 2.0]))


def test_resample_midpoint():
    curve = linear_resample(np.array([0.0, 1.0]), np.array([0.0, 2.0]),
                            length=3)
    assert curve.fluxes[1] == pytest.approx(1.0, abs=1e-15)


def test_resample_exact_at_knots():
    phases = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
    fluxes = np.array([3.0, -1.0, 2.0, 0.5, 3.0])
    curve = linear_resample(phases, fluxes, length=5)
    assert np.allclose(curve.fluxes, fluxes, atol=1e-15)


def test_resample_weights_example():
    # knots at phases 0.2 and 0.8 with values 1 and 4; the target 0.35 sits
    # at weight a = 0.75 on the left knot
    curve = linear_resample(np.array([0.2, 0.8]), np.array([1.0, 4.0]),
                            length=21)
    assert curve.phases[7] == pytest.approx(0.35)
    assert curve.fluxes[7] == pytest.approx(1.75, abs=1e-12)


def test_resample_affine_reproduction(rng):
    a, b = 1.3, -0.7
    phases = np.concatenate([[0.0], np.sort(rng.uniform(0, 1, 30)), [1.0]])
    curve = linear_resample(phases, a + b * phases, length=101)
    assert np.abs(curve.fluxes - (a + b * curve.phases)).max() <= 1e-12


def test_resample_duplicate_phase_later_wins():
    phases = np.array([0.0, 0.5, 0.5, 1.0])
    fluxes = np.array([0.0, 10.0, 2.0, 0.0])
    curve = linear_resample(phases, fluxes, length=3)
    assert curve.fluxes[1] == pytest.approx(2.0)


def test_resample_below_first_knot_uses_periodic_image():
    # folded phases start at 0.2; extension covers [0.2, 1.7]; the target
    # 0.05 is read at 1.05
    phases = np.array([0.2, 0.7])
    fluxes = np.array([1.0, 3.0])
    ph, fl = extend(phases, fluxes)
    curve = linear_resample(ph, fl, length=21)
    target = 0.05
    expected = np.interp(target + 1.0, ph, fl)
    assert curve.fluxes[1] == pytest.approx(expected, abs=1e-12)


def test_resample_needs_two_distinct_phases():
    with pytest.raises(ValueError, match="distinct"):
        linear_resample(np.array([0.3, 0.3]), np.array([1.0, 2.0]), length=5)


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_resample_convex_combination(seed):
    rng = np.random.default_rng(seed)
    n = rng.integers(2, 40)
    phases = np.sort(rng.uniform(0, 1, n))
    if len(np.unique(phases)) < 2:
        return
    fluxes = rng.normal(size=n)
    ph, fl = extend(phases, fluxes)
    curve = linear_resample(ph, fl, length=50)
    assert curve.fluxes.min() >= fl.min() - 1e-12
    assert curve.fluxes.max() <= fl.max() + 1e-12


def test_phase_grid_formula():
    grid = phase_grid(272)
    assert len(grid) == 272
    assert grid[0] == 0.0 and grid[-1] == 1.0
    j = np.arange(272)
    assert np.array_equal(grid, j / 271)


def _record(star_id, period=2.0, t0=0.0):
    return StarRecord.from_photometry(star_id, period, t0, 18.0, 2.0, 0.9)


def test_process_constant_curve(rng):
    times = np.sort(rng.uniform(0, 20, 60))
    curve = RawLightCurve(star_id="c", times=times,
                          fluxes=np.full(60, 1.23))
    out = process_curve(curve, _record("c"), length=272)
    assert out.grid_length == 272
    assert np.allclose(out.fluxes, 1.23, atol=1e-14)


def test_process_recovers_dense_sinusoid():
    period, t0 = 2.758, 2450000.0
    times = t0 + np.sort(np.random.default_rng(7).uniform(0, 40, 4000))
    phases_true = ((times - t0) / period) % 1.0
    fluxes = np.sin(2 * np.pi * phases_true)
    curve = RawLightCurve(star_id="sin", times=times, fluxes=fluxes)
    out = process_curve(curve, _record("sin", period=period, t0=t0),
                        length=272)
    assert np.abs(out.fluxes - np.sin(2 * np.pi * out.phases)).max() <= 1e-3


def test_process_all_order_and_length(rng):
    curves, records = [], []
    for i in range(5):
        times = np.sort(rng.uniform(0, 30, 80))
        curves.append(RawLightCurve(star_id=f"s{i}", times=times,
                                    fluxes=rng.normal(size=80)))
        records.append(_record(f"s{i}", period=1.0 + i))
    out = process_all(curves, records, length=272)
    assert [c.star_id for c in out] == [f"s{i}" for i in range(5)]
    assert all(c.grid_length == 272 for c in out)


def test_process_all_threads_match_serial(rng):
    curves, records = [], []
    for i in range(6):
        times = np.sort(rng.uniform(0, 30, 50))
        curves.append(RawLightCurve(star_id=f"s{i}", times=times,
                                    fluxes=rng.normal(size=50)))
        records.append(_record(f"s{i}"))
    serial = process_all(curves, records, length=64)
    threaded = process_all(curves, records, length=64, threads=4)
    for a, b in zip(serial, threaded):
        assert np.array_equal(a.fluxes, b.fluxes)


def test_process_all_unmatched_ids(rng):
    times = np.sort(rng.uniform(0, 10, 20))
    curves = [RawLightCurve(star_id="known", times=times,
                            fluxes=np.zeros(20)),
              RawLightCurve(star_id="stranger", times=times,
                            fluxes=np.zeros(20))]
    with pytest.raises(ValueError, match="stranger"):
        process_all(curves, [_record("known")])
