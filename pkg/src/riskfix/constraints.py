"""Projection operators for the supported convex constraint sets.

Four set kinds are implemented: the non-negative orthant, the monotone
(isotonic) cone, the l1 ball, and a linear subspace given by an orthonormal
basis.  Each set knows its Euclidean projection, the a.e. divergence
(trace of the projection Jacobian, the degrees-of-freedom count), the polar
decomposition for cone kinds, and Monte Carlo estimators of its statistical
dimension and of the tangent-cone dimension at a feasible point.

All operations are pure; Monte Carlo estimators draw replicate ``i`` from a
child seed of ``(seed, i)`` and accumulate in index order, so results do not
depend on scheduling.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import isotonic_regression

from .errors import DescriptorError, DomainError, UnsupportedKindError
from .seeds import gaussian_rows

KINDS = ("orthant", "monotone_cone", "l1_ball", "subspace")
CONE_KINDS = ("orthant", "monotone_cone", "subspace")

# Magnitude of the deterministic dither applied before counting structure
# when the input sits on a non-differentiability set (exact ties).
_DITHER = 1e-12


@dataclass(frozen=True)
class MonteCarloConfig:
    """Sample count and base seed for the Monte Carlo estimators."""

    samples: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.samples < 100:
            raise DomainError("Monte Carlo estimators need at least 100 samples")


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    """Descriptor of a closed convex set K in R^n.

    Parameters
    ----------
    kind : str
        One of ``orthant``, ``monotone_cone``, ``l1_ball``, ``subspace``.
    n : int
        Ambient dimension.
    radius : float, optional
        l1-ball radius (required for, and only for, ``l1_ball``).
    basis : ndarray, optional
        (n, d) matrix with orthonormal columns (``subspace`` only).
    """

    kind: str
    n: int
    radius: float = None
    basis: np.ndarray = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DescriptorError(f"unknown constraint kind {self.kind!r}")
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise DescriptorError("ambient dimension n must be a positive integer")
        if self.kind == "l1_ball":
            if self.radius is None or not np.isfinite(self.radius) or self.radius <= 0:
                raise DescriptorError("l1_ball needs a positive radius")
        elif self.radius is not None:
            raise DescriptorError(f"radius is only valid for l1_ball, not {self.kind}")
        if self.kind == "subspace":
            b = self.basis
            if b is None or b.ndim != 2 or b.shape[0] != self.n:
                raise DescriptorError("subspace needs an (n, d) basis matrix")
            d = b.shape[1]
            if not 1 <= d <= self.n:
                raise DescriptorError("subspace dimension must satisfy 1 <= d <= n")
            gram = b.T @ b
            if np.max(np.abs(gram - np.eye(d))) > 1e-10:
                raise DescriptorError("subspace basis columns must be orthonormal")
        elif self.basis is not None:
            raise DescriptorError(f"basis is only valid for subspace, not {self.kind}")

    @classmethod
    def orthant(cls, n: int) -> "ConstraintSet":
        return cls("orthant", n)

    @classmethod
    def monotone_cone(cls, n: int) -> "ConstraintSet":
        return cls("monotone_cone", n)

    @classmethod
    def l1_ball(cls, n: int, radius: float) -> "ConstraintSet":
        return cls("l1_ball", n, radius=float(radius))

    @classmethod
    def subspace(cls, basis: np.ndarray) -> "ConstraintSet":
        basis = np.asarray(basis, dtype=float)
        return cls("subspace", basis.shape[0], basis=basis)

    @classmethod
    def coordinate_subspace(cls, n: int, d: int) -> "ConstraintSet":
        """Span of the first d coordinate axes."""
        return cls.subspace(np.eye(n)[:, :d])

    @property
    def is_cone(self) -> bool:
        return self.kind in CONE_KINDS

    @property
    def subspace_dim(self) -> int:
        if self.kind != "subspace":
            raise UnsupportedKindError("subspace_dim only applies to subspace kind")
        return self.basis.shape[1]

    def contains(self, x: np.ndarray, tol: float = 1e-8) -> bool:
        """Membership test up to tolerance ``tol * max(1, ||x||)``."""
        x = _check_vector(self, x)
        gap = np.linalg.norm(project(self, x).point - x)
        return gap <= tol * max(1.0, np.linalg.norm(x))


@dataclass(frozen=True)
class ProjectionResult:
    """Euclidean projection together with its local structure.

    ``divergence`` is the a.e. trace of the projection Jacobian at the
    input; ``structure`` counts strictly positive outputs (orthant),
    constant pieces (monotone cone), the active support (l1 ball), or the
    subspace dimension.
    """

    point: np.ndarray
    divergence: float
    structure: int


def project(K: ConstraintSet, x: np.ndarray) -> ProjectionResult:
    """Euclidean projection of ``x`` onto ``K``.

    Orthant: coordinatewise positive part.  Monotone cone: pool-adjacent-
    violators fit.  l1 ball: identity inside the ball, otherwise
    soft-thresholding at the unique level mu > 0 with
    ``sum_i (|x_i| - mu)_+ = radius``.  Subspace: basis @ basis.T @ x.

    Exact ties (inputs on the non-differentiability set) are dithered by a
    deterministic 1e-12 perturbation before counting structure; the
    returned point is always computed from the raw input.
    """
    x = _check_vector(K, x)
    if K.kind == "orthant":
        point = np.maximum(x, 0.0)
        xc = _dithered(x) if np.any(x == 0.0) else x
        structure = int(np.count_nonzero(xc > 0.0))
        return ProjectionResult(point, float(structure), structure)

    if K.kind == "monotone_cone":
        res = isotonic_regression(x)
        point = np.asarray(res.x)
        pieces = _monotone_pieces(x, res)
        return ProjectionResult(point, float(pieces), pieces)

    if K.kind == "l1_ball":
        return _project_l1(K, x)

    # subspace
    d = K.subspace_dim
    point = K.basis @ (K.basis.T @ x)
    return ProjectionResult(point, float(d), d)


def divergence(K: ConstraintSet, x: np.ndarray) -> float:
    """Divergence (Jacobian trace) of the projection map at ``x``, a.e."""
    return project(K, x).divergence


def polar_project(K: ConstraintSet, x: np.ndarray) -> np.ndarray:
    """Projection onto the polar cone: x - Pi_K(x) for cone kinds."""
    if not K.is_cone:
        raise UnsupportedKindError("polar projection needs a cone (not l1_ball)")
    x = _check_vector(K, x)
    return x - project(K, x).point


def statistical_dimension(K: ConstraintSet, mc: MonteCarloConfig):
    """Statistical dimension delta_K with a Monte Carlo standard error.

    For cones, delta_K = E ||Pi_K(h)||^2 by homogeneity and is estimated at
    noise level 1; orthant (n/2) and subspace (d) use closed forms with zero
    standard error.  For the l1 ball the defining high-noise limit is chased
    by doubling sigma from 1 until the estimate stops moving (relative
    change below 1e-3, with an absolute floor of 1e-3 because the limit is 0
    for any bounded set).
    """
    if K.kind == "orthant":
        return K.n / 2.0, 0.0
    if K.kind == "subspace":
        return float(K.subspace_dim), 0.0
    if K.kind == "monotone_cone":
        return mc_statistical_dimension(K, mc)

    # l1 ball: sigma-doubling toward the high-noise limit.
    H = gaussian_rows(mc.seed, mc.samples, K.n)
    sigma, prev = 1.0, None
    est = se = 0.0
    for _ in range(60):
        vals = row_sq_norms(project_rows(K, sigma * H)) / sigma**2
        est = float(vals.mean())
        se = float(vals.std(ddof=1) / np.sqrt(mc.samples))
        if prev is not None and abs(est - prev) <= 1e-3 * max(abs(est), 1e-3):
            break
        prev = est
        sigma *= 2.0
    return est, se


def mc_statistical_dimension(K: ConstraintSet, mc: MonteCarloConfig, sigma: float = 1.0):
    """Plain Monte Carlo estimate of E ||Pi_K(sigma h)||^2 / sigma^2."""
    H = gaussian_rows(mc.seed, mc.samples, K.n)
    vals = row_sq_norms(project_rows(K, sigma * H)) / sigma**2
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(mc.samples))


def tangent_dimension(K: ConstraintSet, mu0: np.ndarray, mc: MonteCarloConfig):
    """Statistical dimension of the tangent cone of K at mu0, with SE.

    Estimated through the low-noise limit E err(s)/s^2 with s halving from
    1e-2 until the estimate stabilizes (relative change below 1e-3).
    Closed forms: orthant gives n - z/2 with z the number of zero
    coordinates of mu0; a subspace is its own tangent cone.
    """
    mu0 = _check_vector(K, mu0)
    if not K.contains(mu0, tol=1e-8):
        raise DomainError("mu0 must belong to K")
    if K.kind == "subspace":
        return float(K.subspace_dim), 0.0
    if K.kind == "orthant":
        z = int(np.count_nonzero(np.abs(mu0) <= 1e-12))
        return K.n - z / 2.0, 0.0

    H = gaussian_rows(mc.seed, mc.samples, K.n)
    sigma, prev = 1e-2, None
    est = se = 0.0
    for _ in range(60):
        diffs = project_rows(K, mu0 + sigma * H) - mu0
        vals = row_sq_norms(diffs) / sigma**2
        est = float(vals.mean())
        se = float(vals.std(ddof=1) / np.sqrt(mc.samples))
        if prev is not None and abs(est - prev) <= 1e-3 * max(abs(est), 1e-3):
            break
        prev = est
        sigma /= 2.0
    return est, se


def project_rows(K: ConstraintSet, Y: np.ndarray) -> np.ndarray:
    """Row-wise projection of an (r, n) matrix onto K (points only)."""
    Y = np.asarray(Y, dtype=float)
    if K.kind == "orthant":
        return np.maximum(Y, 0.0)
    if K.kind == "subspace":
        return (Y @ K.basis) @ K.basis.T
    if K.kind == "monotone_cone":
        out = np.empty_like(Y)
        for i in range(Y.shape[0]):
            out[i] = isotonic_regression(Y[i]).x
        return out
    return _project_l1_rows(K, Y)


def l1_threshold(x: np.ndarray, radius: float) -> float:
    """The unique mu > 0 with sum_i (|x_i| - mu)_+ = radius, for ||x||_1 > radius."""
    a = np.sort(np.abs(x))[::-1]
    cs = np.cumsum(a)
    k = np.arange(1, a.size + 1)
    candidates = (cs - radius) / k
    idx = int(np.max(np.nonzero(a > candidates)[0]))
    return float(candidates[idx])


def _project_l1(K: ConstraintSet, x: np.ndarray) -> ProjectionResult:
    if np.abs(x).sum() <= K.radius:
        return ProjectionResult(x.copy(), float(K.n), int(np.count_nonzero(x)))
    mu = l1_threshold(x, K.radius)
    point = np.sign(x) * np.maximum(np.abs(x) - mu, 0.0)
    xc = x
    if np.any(np.abs(np.abs(x) - mu) == 0.0):
        xc = _dithered(x)
        mu = l1_threshold(xc, K.radius)
    support = int(np.count_nonzero(np.abs(xc) > mu))
    return ProjectionResult(point, float(support - 1), support)


def _project_l1_rows(K: ConstraintSet, Y: np.ndarray) -> np.ndarray:
    out = Y.copy()
    over = np.abs(Y).sum(axis=1) > K.radius
    if not np.any(over):
        return out
    A = np.abs(Y[over])
    a = -np.sort(-A, axis=1)
    cs = np.cumsum(a, axis=1)
    k = np.arange(1, Y.shape[1] + 1)
    candidates = (cs - K.radius) / k
    counts = np.count_nonzero(a > candidates, axis=1)
    mu = candidates[np.arange(A.shape[0]), counts - 1]
    out[over] = np.sign(Y[over]) * np.maximum(A - mu[:, None], 0.0)
    return out


def _monotone_pieces(x: np.ndarray, res) -> int:
    means = res.x[res.blocks[:-1]]
    # Exact ties in the input, or distinct blocks sharing a mean, sit on the
    # non-differentiability set of the piece count; recount after dithering.
    if np.any(np.diff(x) == 0.0) or np.any(np.diff(means) == 0.0):
        res = isotonic_regression(_dithered(x))
        means = res.x[res.blocks[:-1]]
    return int(np.count_nonzero(np.diff(means) > 0.0)) + 1


def _dithered(x: np.ndarray) -> np.ndarray:
    n = x.size
    return x + _DITHER * np.cos(np.arange(1.0, n + 1.0))


def row_sq_norms(M: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", M, M)


def _check_vector(K: ConstraintSet, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != K.n:
        raise DomainError(f"expected a vector of length {K.n}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError("input vector must be finite")
    return x
