"""Cubic B-spline basis on a fixed phase grid, with Gram and curvature matrices.

The basis is clamped: boundary knots are repeated to full multiplicity and the
interior knots sit at the interior sampling points, so a grid of L points
carries K = L + order - 2 basis functions.  All integrals are computed by
per-span Gauss-Legendre quadrature of sufficient order, which is exact for the
piecewise-polynomial integrands involved.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import BSpline


@dataclass(frozen=True, eq=False)
class BasisSystem:
    """Immutable description of one spline basis shared by every curve.

    Attributes
    ----------
    order : spline order (4 means piecewise cubic).
    knots : full clamped knot vector, length K + order.
    sample_points : the L grid points the knots were built from.
    gram : (K, K) matrix of inner products of basis functions.
    penalty : (K, K) matrix of inner products of second derivatives.
    penalty_root : (Q, K) factor with penalty = penalty_root.T @ penalty_root,
        kept because penalized fitting is more stable on the factored form.
    """

    order: int
    knots: np.ndarray
    sample_points: np.ndarray
    gram: np.ndarray = field(repr=False)
    penalty: np.ndarray = field(repr=False)
    penalty_root: np.ndarray = field(repr=False)

    @property
    def n_basis(self) -> int:
        return len(self.knots) - self.order

    @property
    def grid_length(self) -> int:
        return len(self.sample_points)

    def _spline(self) -> BSpline:
        return BSpline(self.knots, np.eye(self.n_basis), self.order - 1,
                       extrapolate=False)

    def same_space(self, other: "BasisSystem") -> bool:
        return (self.order == other.order
                and self.knots.shape == other.knots.shape
                and np.array_equal(self.knots, other.knots))


def _quadrature(points: np.ndarray, n_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights on every span of a strictly increasing grid."""
    xg, wg = leggauss(n_nodes)
    lo, hi = points[:-1], points[1:]
    half = (hi - lo) / 2.0
    nodes = (half[:, None] * (xg[None, :] + 1.0) + lo[:, None]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    return nodes, weights


def build_basis(sample_points: np.ndarray, order: int = 4) -> BasisSystem:
    """Construct the clamped basis with knots at the sampling points.

    ``sample_points`` must be strictly increasing inside [0, 1] with at least
    ``order`` entries.  Returns a fully populated :class:`BasisSystem`.
    """
    pts = np.asarray(sample_points, dtype=float)
    if pts.ndim != 1 or len(pts) < order:
        raise ValueError(f"need at least {order} sample points, got {pts.shape}")
    if np.any(np.diff(pts) <= 0):
        raise ValueError("sample points must be strictly increasing")
    if pts[0] < 0.0 or pts[-1] > 1.0:
        raise ValueError("sample points must lie within [0, 1]")

    knots = np.concatenate([np.repeat(pts[0], order), pts[1:-1],
                            np.repeat(pts[-1], order)])
    n_basis = len(knots) - order
    spline = BSpline(knots, np.eye(n_basis), order - 1, extrapolate=False)

    # Products of two cubics are degree 6: 4-point rule is exact.
    gnodes, gweights = _quadrature(pts, 4)
    vals = spline(gnodes)
    gram = vals.T @ (vals * gweights[:, None])
    gram = (gram + gram.T) / 2.0

    # Second derivatives of cubics are piecewise linear, products quadratic:
    # a 2-point rule is exact.
    pnodes, pweights = _quadrature(pts, 2)
    d2 = spline.derivative(2)(pnodes)
    root = d2 * np.sqrt(pweights)[:, None]
    penalty = root.T @ root
    penalty = (penalty + penalty.T) / 2.0

    return BasisSystem(order=order, knots=knots, sample_points=pts,
                       gram=gram, penalty=penalty, penalty_root=root)


def eval_basis(basis: BasisSystem, t_values: np.ndarray) -> np.ndarray:
    """Evaluate all basis functions at ``t_values``.

    Returns a dense (len(t), K) matrix; each row has at most ``order``
    nonzero entries.  Values outside [0, 1] raise a domain error.
    """
    t = np.atleast_1d(np.asarray(t_values, dtype=float))
    lo, hi = basis.knots[0], basis.knots[-1]
    if np.any(t < lo) or np.any(t > hi):
        bad = t[(t < lo) | (t > hi)][0]
        raise ValueError(f"evaluation point {bad!r} outside domain [{lo}, {hi}]")
    return basis._spline()(t)


def gram_matrix(basis: BasisSystem) -> np.ndarray:
    """Matrix of pairwise basis inner products (symmetric positive definite)."""
    return basis.gram


def penalty_matrix(basis: BasisSystem) -> np.ndarray:
    """Curvature penalty matrix (symmetric PSD, null space = affine functions)."""
    return basis.penalty


def design_matrix(basis: BasisSystem) -> np.ndarray:
    """Basis evaluated at its own sampling grid (the regression design)."""
    return eval_basis(basis, basis.sample_points)
