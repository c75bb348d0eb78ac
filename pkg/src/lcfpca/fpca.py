"""Functional principal component analysis over a shared spline basis.

With every curve represented by a coefficient row c_i, the covariance
operator's eigenproblem reduces to an ordinary symmetric eigenproblem:
factor the basis Gram matrix J = L L' and eigensolve S = L' Cov(C) L.
Eigenvectors u map back to eigenfunction coefficients L^-T u, which are
orthonormal in the function inner product by construction, and the score of
curve i on component m is the Gram-weighted projection of its centered
coefficients.  Everything is exact within the spline space; no grid
discretization is involved.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .bspline_basis import BasisSystem
from .smoother import FunctionalDataSet

EIGENVALUE_CLAMP = -1e-10
SKEWNESS_TIE = 1e-12


@dataclass(frozen=True, eq=False)
class FpcaResult:
    """Eigenstructure of the sample covariance operator plus per-curve scores.

    ``eigenvalues`` holds the full clamped spectrum in nonincreasing order;
    ``eig_coefs`` (M, K), ``scores`` (N, M) and ``var_explained`` (cumulative
    fractions of total variance) are truncated to the retained components.
    """

    eigenvalues: np.ndarray
    eig_coefs: np.ndarray
    scores: np.ndarray
    var_explained: np.ndarray
    mean_coefs: np.ndarray
    basis: BasisSystem = field(repr=False)

    @property
    def n_components(self) -> int:
        return self.eig_coefs.shape[0]

    @property
    def total_variance(self) -> float:
        return float(self.eigenvalues.sum())


def _fix_signs(eig_coefs: np.ndarray, scores: np.ndarray) -> None:
    """Deterministic sign convention, applied in place.

    Each component is flipped so its score vector has nonnegative skewness;
    when the skewness is indistinguishable from zero the first nonzero
    eigenfunction coefficient is made positive.
    """
    for m in range(eig_coefs.shape[0]):
        s = scores[:, m]
        centered = s - s.mean()
        m2 = float((centered ** 2).mean())
        skew = 0.0
        if m2 > 0:
            skew = float((centered ** 3).mean()) / m2 ** 1.5
        if skew < -SKEWNESS_TIE:
            flip = True
        elif skew > SKEWNESS_TIE:
            flip = False
        else:
            coefs = eig_coefs[m]
            nonzero = np.flatnonzero(np.abs(coefs)
                                     > 1e-12 * np.abs(coefs).max())
            flip = coefs[nonzero[0]] < 0 if nonzero.size else False
        if flip:
            eig_coefs[m] = -eig_coefs[m]
            scores[:, m] = -scores[:, m]


def fpca(data: FunctionalDataSet, n_components: int) -> FpcaResult:
    """Eigensolve the sample covariance operator and score every curve.

    Requires at least two curves and n_components <= min(N - 1, K).  The
    sample covariance uses the N-1 denominator and curves are mean-centered
    before the decomposition.
    """
    coef = np.asarray(data.coef, dtype=float)
    n_curves, k = coef.shape
    if n_curves < 2:
        raise ValueError("FPCA needs at least 2 curves")
    if not 1 <= n_components <= min(n_curves - 1, k):
        raise ValueError(
            f"n_components must be in [1, {min(n_curves - 1, k)}], "
            f"got {n_components}")

    mean_coefs = coef.mean(axis=0)
    centered = coef - mean_coefs

    try:
        chol = np.linalg.cholesky(data.basis.gram)
    except np.linalg.LinAlgError as exc:
        raise ValueError("basis Gram matrix is not positive definite") from exc

    half = centered @ chol  # row i = L' (c_i - cbar)
    s_matrix = (half.T @ half) / (n_curves - 1)
    eigvals, eigvecs = np.linalg.eigh(s_matrix)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]
    floor = EIGENVALUE_CLAMP * max(1.0, float(eigvals.max()))
    if eigvals.min() < floor:
        raise ValueError(f"covariance eigenvalue {eigvals.min():g} below "
                         "the clamping floor; input is not a covariance")
    eigvals = np.clip(eigvals, 0.0, None)

    u = eigvecs[:, :n_components]
    eig_coefs = solve_triangular(chol, u, trans="T", lower=True).T  # (M, K)
    scores = half @ u  # equals (c_i - cbar)' J xi_m
    _fix_signs(eig_coefs, scores)

    total = eigvals.sum()
    cumulative = (np.cumsum(eigvals[:n_components]) / total if total > 0
                  else np.zeros(n_components))
    return FpcaResult(eigenvalues=eigvals, eig_coefs=eig_coefs,
                      scores=scores, var_explained=cumulative,
                      mean_coefs=mean_coefs, basis=data.basis)


def variance_explained(result: FpcaResult, m: int) -> float:
    """Cumulative fraction of total variance carried by the first m components."""
    if not 1 <= m <= result.n_components:
        raise ValueError(f"m must be in [1, {result.n_components}]")
    return float(result.var_explained[m - 1])


def project(coefficients: np.ndarray, result: FpcaResult) -> np.ndarray:
    """Score a new curve (given by its basis coefficients) on the stored modes."""
    coefficients = np.asarray(coefficients, dtype=float)
    if coefficients.shape != result.mean_coefs.shape:
        raise ValueError(
            f"coefficient vector has length {coefficients.shape}, basis "
            f"expects {result.mean_coefs.shape}; was the same basis used?")
    centered = coefficients - result.mean_coefs
    return result.eig_coefs @ (result.basis.gram @ centered)
