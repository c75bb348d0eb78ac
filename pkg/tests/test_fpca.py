import numpy as np
import pytest

from lcfpca.bspline_basis import eval_basis
from lcfpca.fpca import fpca, project, variance_explained
from lcfpca.phase_fold import PhasedCurve
from lcfpca.smoother import FunctionalDataSet, smooth_all

from oracles import dense_grid_fpca


def random_dataset(basis, n_curves, rng, rank=None):
    """Smooth random curves drawn from a low-rank-plus-noise model."""
    t = basis.sample_points
    modes = np.vstack([np.sin(2 * np.pi * t), np.cos(2 * np.pi * t),
                       np.sin(4 * np.pi * t), t - 0.5])
    if rank is not None:
        modes = modes[:rank]
    weights = rng.normal(size=(n_curves, modes.shape[0]))
    flux = 1.0 + weights @ modes + 0.02 * rng.normal(
        size=(n_curves, len(t)))
    curves = [PhasedCurve(star_id=f"s{i}", phases=t, fluxes=f)
              for i, f in enumerate(flux)]
    return smooth_all(curves, basis, lam_fixed=1e-6)


def test_identical_curves_give_zero_variance(medium_basis, rng):
    coef = np.tile(rng.normal(size=medium_basis.n_basis), (6, 1))
    data = FunctionalDataSet(basis=medium_basis, coef=coef,
                             ids=[f"s{i}" for i in range(6)])
    result = fpca(data, 2)
    assert np.abs(result.eigenvalues).max() <= 1e-12
    assert np.abs(result.scores).max() <= 1e-6


def test_rank_one_structure(medium_basis, rng):
    # curves proportional to one shape: single nonzero eigenvalue and
    # scores proportional to the centered multipliers
    shape = rng.normal(size=medium_basis.n_basis)
    alphas = rng.normal(size=12)
    coef = np.outer(alphas, shape)
    data = FunctionalDataSet(basis=medium_basis, coef=coef,
                             ids=[f"s{i}" for i in range(12)])
    result = fpca(data, 3)
    assert result.eigenvalues[0] > 0
    assert result.eigenvalues[1] <= 1e-10 * result.eigenvalues[0]
    centered = alphas - alphas.mean()
    ratio = result.scores[:, 0] / centered
    assert np.abs(ratio - ratio[0]).max() <= 1e-8 * abs(ratio[0])
    # first eigenfunction proportional to the shape (up to sign)
    norm = float(shape @ medium_basis.gram @ shape) ** 0.5
    aligned = result.eig_coefs[0] * np.sign(result.eig_coefs[0] @ shape)
    assert np.abs(aligned - shape / norm).max() <= 1e-8


def test_eigenfunction_orthonormality(medium_basis, rng):
    data = random_dataset(medium_basis, 30, rng)
    result = fpca(data, 5)
    inner = result.eig_coefs @ medium_basis.gram @ result.eig_coefs.T
    assert np.abs(inner - np.eye(5)).max() <= 1e-8


def test_scores_centered_and_variance_matches_eigenvalue(medium_basis, rng):
    data = random_dataset(medium_basis, 40, rng)
    result = fpca(data, 4)
    assert np.abs(result.scores.mean(axis=0)).max() <= 1e-8
    for m in range(4):
        var = result.scores[:, m].var(ddof=1)
        assert var == pytest.approx(result.eigenvalues[m], rel=1e-6)


def test_total_variance_conservation(medium_basis, rng):
    data = random_dataset(medium_basis, 25, rng)
    result = fpca(data, 3)
    centered = data.coef - data.coef.mean(axis=0)
    gram_norms = np.einsum("ij,jk,ik->i", centered, medium_basis.gram,
                           centered)
    direct = gram_norms.sum() / (len(centered) - 1)
    assert result.total_variance == pytest.approx(direct, rel=1e-8)


def test_reconstruction_error_decreases_to_zero(medium_basis, rng):
    data = random_dataset(medium_basis, 12, rng, rank=4)
    rank = 11  # N-1
    result = fpca(data, rank)
    centered = data.coef - result.mean_coefs
    errors = []
    for m in range(1, rank + 1):
        approx = result.scores[:, :m] @ result.eig_coefs[:m]
        resid = centered - approx
        err = np.einsum("ij,jk,ik->i", resid, medium_basis.gram, resid)
        errors.append(float(np.sqrt(err.max())))
    assert all(a >= b - 1e-12 for a, b in zip(errors, errors[1:]))
    assert errors[-1] <= 1e-6


def test_variance_explained_endpoints(medium_basis, rng):
    data = random_dataset(medium_basis, 10, rng, rank=3)
    result = fpca(data, 9)
    assert variance_explained(result, 9) == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(ValueError):
        variance_explained(result, 0)
    with pytest.raises(ValueError):
        variance_explained(result, 10)


def test_rank_one_variance_explained(medium_basis, rng):
    shape = rng.normal(size=medium_basis.n_basis)
    coef = np.outer(rng.normal(size=8), shape)
    data = FunctionalDataSet(basis=medium_basis, coef=coef,
                             ids=[f"s{i}" for i in range(8)])
    result = fpca(data, 1)
    assert variance_explained(result, 1) == pytest.approx(1.0, abs=1e-10)


def test_project_consistency(medium_basis, rng):
    data = random_dataset(medium_basis, 15, rng)
    result = fpca(data, 4)
    assert np.abs(project(result.mean_coefs, result)).max() <= 1e-10
    for i in (0, 7, 14):
        scores = project(data.coef[i], result)
        assert np.abs(scores - result.scores[i]).max() <= 1e-8


def test_project_unit_eigenfunction(medium_basis, rng):
    data = random_dataset(medium_basis, 15, rng)
    result = fpca(data, 3)
    synthetic = result.mean_coefs + result.eig_coefs[0]
    scores = project(synthetic, result)
    assert scores[0] == pytest.approx(1.0, abs=1e-6)
    assert np.abs(scores[1:]).max() <= 1e-6


def test_project_basis_mismatch(medium_basis, small_basis, rng):
    data = random_dataset(medium_basis, 8, rng)
    result = fpca(data, 2)
    with pytest.raises(ValueError, match="basis"):
        project(np.zeros(small_basis.n_basis), result)


def test_component_budget_enforced(medium_basis, rng):
    data = random_dataset(medium_basis, 5, rng)
    with pytest.raises(ValueError, match="n_components"):
        fpca(data, 5)  # max is N - 1 = 4
    with pytest.raises(ValueError, match="at least 2"):
        fpca(FunctionalDataSet(basis=medium_basis,
                               coef=data.coef[:1], ids=["s0"]), 1)


def test_sign_convention_deterministic(medium_basis, rng):
    data = random_dataset(medium_basis, 30, rng)
    result = fpca(data, 4)
    for m in range(4):
        s = result.scores[:, m]
        c = s - s.mean()
        skew = (c ** 3).mean() / (c ** 2).mean() ** 1.5
        assert skew >= -1e-12


def test_matches_dense_grid_oracle(medium_basis, rng):
    data = random_dataset(medium_basis, 60, rng)
    result = fpca(data, 5)

    grid = np.linspace(0.0, 1.0, 2000)
    values = data.coef @ eval_basis(medium_basis, grid).T
    ref_vals, ref_funs, ref_scores = dense_grid_fpca(values, grid, 5)

    assert np.abs(result.eigenvalues[:5] / ref_vals - 1.0).max() <= 1e-4
    ours = result.scores
    for m in range(5):
        sign = np.sign(ours[:, m] @ ref_scores[:, m])
        diff = np.abs(ours[:, m] - sign * ref_scores[:, m]).max()
        assert diff <= 1e-4 * np.abs(ours[:, m]).max()
