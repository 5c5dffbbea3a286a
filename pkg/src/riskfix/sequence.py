"""Gaussian-sequence-model processes of the constrained least squares fit.

For ``y = mu0 + sigma * h`` and ``fit = Pi_K(y)`` the three processes are

    err(sigma) = ||fit - mu0||^2
    lrt(sigma) = ||y - mu0||^2 - ||y - fit||^2
    dof(sigma) = <fit - mu0, sigma * h>

linked pathwise by ``lrt = 2 dof - err`` and ``err <= dof <= lrt``.  Monte
Carlo expectations over a sigma grid share one set of h draws (common
random numbers), which keeps the pathwise monotonicity statements exactly
testable and removes Monte Carlo jitter between grid points.
"""

from dataclasses import dataclass

import numpy as np

from .constraints import ConstraintSet, project, project_rows, row_sq_norms
from .errors import DomainError
from .kernels import kernel_G, kernel_H
from .seeds import gaussian_rows


@dataclass(frozen=True)
class ProcessSample:
    """One pathwise evaluation of the three processes at noise level sigma."""

    sigma: float
    err: float
    lrt: float
    dof: float


@dataclass(frozen=True)
class RiskCurve:
    """Monte Carlo means and standard errors over an increasing sigma grid.

    All grid points share the identical set of h draws (common random
    numbers seeded from ``base_seed``).
    """

    sigma_grid: np.ndarray
    err_mean: np.ndarray
    err_se: np.ndarray
    lrt_mean: np.ndarray
    lrt_se: np.ndarray
    dof_mean: np.ndarray
    dof_se: np.ndarray
    samples: int
    base_seed: int


def eval_processes(K: ConstraintSet, mu0, sigma: float, h) -> ProcessSample:
    """Evaluate err/lrt/dof for one noise draw ``h`` at level ``sigma``."""
    mu0 = np.asarray(mu0, dtype=float)
    h = np.asarray(h, dtype=float)
    _check_inputs(K, mu0, sigma)
    y = mu0 + sigma * h
    fit = project(K, y).point
    diff = fit - mu0
    err = float(diff @ diff)
    dof = float(diff @ (sigma * h))
    resid = y - fit
    lrt = float(sigma * sigma * (h @ h) - resid @ resid)
    return ProcessSample(float(sigma), err, lrt, dof)


def process_rows(K: ConstraintSet, mu0: np.ndarray, sigma: float, H: np.ndarray):
    """Vectorized err/lrt/dof arrays for the rows of ``H``."""
    Y = mu0 + sigma * H
    fits = project_rows(K, Y)
    diffs = fits - mu0
    err = row_sq_norms(diffs)
    dof = sigma * np.einsum("ij,ij->i", diffs, H)
    resid = Y - fits
    lrt = sigma * sigma * row_sq_norms(H) - row_sq_norms(resid)
    return err, lrt, dof


def mc_expectations(
    K: ConstraintSet,
    mu0,
    sigma_grid,
    samples: int = 2000,
    base_seed: int = 0,
) -> RiskCurve:
    """Monte Carlo E err / E lrt / E dof over ``sigma_grid`` with CRN."""
    mu0 = np.asarray(mu0, dtype=float)
    sigma_grid = np.asarray(sigma_grid, dtype=float)
    if samples < 100:
        raise DomainError("mc_expectations needs at least 100 samples")
    if sigma_grid.ndim != 1 or sigma_grid.size == 0:
        raise DomainError("sigma grid must be a non-empty 1-d array")
    if np.any(sigma_grid <= 0) or np.any(np.diff(sigma_grid) <= 0):
        raise DomainError("sigma grid must be positive and strictly increasing")
    _check_inputs(K, mu0, float(sigma_grid[0]))

    H = gaussian_rows(base_seed, samples, K.n)
    shape = sigma_grid.shape
    em, es = np.empty(shape), np.empty(shape)
    lm, ls = np.empty(shape), np.empty(shape)
    dm, ds = np.empty(shape), np.empty(shape)
    root = np.sqrt(samples)
    for j, sigma in enumerate(sigma_grid):
        err, lrt, dof = process_rows(K, mu0, float(sigma), H)
        em[j], es[j] = err.mean(), err.std(ddof=1) / root
        lm[j], ls[j] = lrt.mean(), lrt.std(ddof=1) / root
        dm[j], ds[j] = dof.mean(), dof.std(ddof=1) / root
    return RiskCurve(sigma_grid, em, es, lm, ls, dm, ds, samples, base_seed)


def orthant_err_closed_form(mu0, sigma: float) -> float:
    """Exact E err(sigma) for the orthant: sigma^2 * sum_i G(mu0_i / sigma)."""
    mu0 = _check_orthant_args(mu0, sigma)
    return float(sigma * sigma * np.sum(kernel_G(mu0 / sigma)))


def orthant_lrt_closed_form(mu0, sigma: float) -> float:
    """Exact E lrt(sigma) for the orthant: E err + 2 sigma^2 sum_i H(mu0_i/sigma)."""
    mu0 = _check_orthant_args(mu0, sigma)
    extra = 2.0 * sigma * sigma * np.sum(kernel_H(mu0 / sigma))
    return orthant_err_closed_form(mu0, sigma) + float(extra)


def _check_orthant_args(mu0, sigma: float) -> np.ndarray:
    mu0 = np.asarray(mu0, dtype=float)
    if np.any(mu0 < 0):
        raise DomainError("orthant closed forms need a non-negative mu0")
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    return mu0


def _check_inputs(K: ConstraintSet, mu0: np.ndarray, sigma: float) -> None:
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    if not K.contains(mu0, tol=1e-8):
        raise DomainError("mu0 must belong to K")
