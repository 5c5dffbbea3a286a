"""Risk fixed-point equation: solver, regime classification, diagnostics.

The asymptotic risk ``r^2`` of the constrained least squares estimator in
the linear measurement model solves

    E err( omega_{m/n}(r) ) = n r^2,   omega_d(r) = sqrt((r^2 + sigma^2) / d),

which has a unique positive solution exactly when ``m > delta_K``.  The
solver runs the monotone iteration ``r_{t+1}^2 = E err(omega(r_t)) / n``
from ``r_0 = 0`` with common random numbers across iterations, so the
empirical iteration map inherits the pathwise monotone structure and the
trace is nondecreasing.  The residual non-degeneracy statistic

    (E lrt(omega_n) - E err(omega_n)) / (2 n sigma^2)

must stay below 1 for the risk characterization to apply; it is reported
with a Monte Carlo standard error.
"""

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Union

import numpy as np

from .constraints import (
    ConstraintSet,
    MonteCarloConfig,
    statistical_dimension,
    tangent_dimension,
)
from .errors import DescriptorError, DomainError, NoSolutionError
from .kernels import DiscretePrior, prior_G, prior_H
from .sequence import orthant_err_closed_form, orthant_lrt_closed_form, process_rows
from .seeds import gaussian_rows

SignalSpec = Union[np.ndarray, DiscretePrior]

ORTHANT_CLOSED_FORM = "orthant_closed_form"
SUBSPACE_CLOSED_FORM = "subspace_closed_form"


def omega(r: float, delta: float, sigma: float) -> float:
    """Effective sequence-model noise level sqrt((r^2 + sigma^2) / delta)."""
    if not delta > 0:
        raise DomainError("delta must be positive")
    return math.sqrt((r * r + sigma * sigma) / delta)


@dataclass(frozen=True, eq=False)
class FixedPointProblem:
    """One risk-prediction instance.

    ``signal`` is either an explicit vector in K or a ``DiscretePrior`` of
    i.i.d. coordinates (orthant analytic path only).  ``err_evaluator`` is a
    ``MonteCarloConfig`` for the generic Monte Carlo path, or one of the
    closed-form tags ``"orthant_closed_form"`` / ``"subspace_closed_form"``.
    """

    constraint: ConstraintSet
    signal: SignalSpec
    m: int
    n: int
    sigma2: float
    err_evaluator: Union[MonteCarloConfig, str] = field(default_factory=MonteCarloConfig)

    def __post_init__(self):
        if not isinstance(self.m, (int, np.integer)) or self.m < 1:
            raise DomainError("sample size m must be a positive integer")
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise DomainError("dimension n must be a positive integer")
        if not (np.isfinite(self.sigma2) and self.sigma2 > 0):
            raise DomainError("noise variance sigma2 must be positive")
        if self.constraint.n != self.n:
            raise DescriptorError("constraint dimension does not match n")
        ev = self.err_evaluator
        if isinstance(ev, str):
            if ev == ORTHANT_CLOSED_FORM:
                if self.constraint.kind != "orthant":
                    raise DescriptorError("orthant_closed_form needs an orthant constraint")
            elif ev == SUBSPACE_CLOSED_FORM:
                if self.constraint.kind != "subspace":
                    raise DescriptorError("subspace_closed_form needs a subspace constraint")
            else:
                raise DescriptorError(f"unknown err evaluator {ev!r}")
        elif not isinstance(ev, MonteCarloConfig):
            raise DescriptorError("err_evaluator must be a MonteCarloConfig or closed-form tag")
        if isinstance(self.signal, DiscretePrior):
            if ev != ORTHANT_CLOSED_FORM:
                raise DescriptorError("prior signals run through the orthant analytic path only")
        else:
            mu0 = np.asarray(self.signal, dtype=float)
            if mu0.shape != (self.n,):
                raise DomainError(f"signal must be a vector of length {self.n}")
            if not np.all(np.isfinite(mu0)):
                raise DomainError("signal must be finite")


@dataclass
class FixedPointSolution:
    """Solver output: the risk root, diagnostics and regime classification.

    ``r_sq``/``omega`` are None when no solution exists (m <= delta_K up to
    the 3-SE guard band).  ``bounds`` are the a-priori brackets
    ``delta_K/(m - delta_K) <= r^2/sigma^2 <= delta_T/(m - delta_T)_+``.
    """

    r_sq: float
    omega: float
    trace: list
    status: str  # converged | no_solution | max_iterations
    delta_K: float
    delta_K_se: float
    delta_T: float
    delta_T_se: float
    regime: str  # I | II | III | indeterminate
    r2_statistic: float
    r2_se: float
    r2_holds: bool
    r2_verified: bool
    L_n: float
    bounds: tuple
    r_se: float = 0.0


class R2Check(NamedTuple):
    statistic: float
    holds: bool


def classify_regime(m, delta_k, se_k, delta_t, se_t) -> str:
    """Sampling regime relative to delta_K and delta_T with 3-SE guard bands.

    I: m above delta_T; II: between delta_K and delta_T; III: below
    delta_K; ``indeterminate`` when m falls inside a guard band.
    """
    if m < delta_k - 3.0 * se_k:
        return "III"
    if m > delta_t + 3.0 * se_t:
        return "I"
    if m > delta_k + 3.0 * se_k and m < delta_t - 3.0 * se_t:
        return "II"
    return "indeterminate"


def solve(
    problem: FixedPointProblem,
    tol: float = 1e-6,
    max_iter: int = 200,
    r0_sq: float = 0.0,
) -> FixedPointSolution:
    """Solve the fixed-point equation by the monotone iteration from r0.

    Existence is gated on ``m > delta_K`` with a 3-SE guard band around the
    Monte Carlo estimate of delta_K; within the band, or below it, the
    status is ``no_solution``.  Convergence criterion:
    ``|r_{t+1} - r_t| / max(r_t, 1e-12) < tol``.
    """
    m, n = problem.m, problem.n
    sigma2 = problem.sigma2
    sigma = math.sqrt(sigma2)
    ev = _Evaluator(problem)

    delta_k, se_k = ev.delta_K()
    delta_t, se_t = ev.delta_T()
    l_n = math.log(1.0 + delta_t) + math.log(math.log(16.0 * n))
    if m < 10.0 * l_n:
        warnings.warn(
            f"m = {m} is below 10 * L_n = {10.0 * l_n:.2f}; the risk "
            "characterization degrades near the parametric rate",
            RuntimeWarning,
            stacklevel=2,
        )
    regime = classify_regime(m, delta_k, se_k, delta_t, se_t)
    bounds = (
        delta_k / (m - delta_k) if m > delta_k else math.inf,
        delta_t / (m - delta_t) if m > delta_t else math.inf,
    )

    if m <= delta_k + 3.0 * se_k:
        return FixedPointSolution(
            r_sq=None, omega=None, trace=[], status="no_solution",
            delta_K=delta_k, delta_K_se=se_k, delta_T=delta_t, delta_T_se=se_t,
            regime=regime, r2_statistic=None, r2_se=0.0, r2_holds=None,
            r2_verified=None, L_n=l_n, bounds=bounds,
        )

    delta = m / n
    r = math.sqrt(max(r0_sq, 0.0))
    trace = [r * r]
    status = "max_iterations"
    prev_step = None
    for _ in range(max_iter):
        w = omega(r, delta, sigma)
        err_mean, _ = ev.err(w)
        r_new = math.sqrt(max(err_mean / n, 0.0))
        trace.append(r_new * r_new)
        done = _step_converged(r, r_new, prev_step, tol)
        prev_step = abs(r_new - r)
        r = r_new
        if done:
            status = "converged"
            break

    w = omega(r, delta, sigma)
    _, err_se = ev.err(w)
    gap_mean, gap_se = ev.lrt_minus_err(w)
    scale = 2.0 * n * sigma2
    r2_stat = gap_mean / scale
    r2_se = gap_se / scale
    return FixedPointSolution(
        r_sq=r * r, omega=w, trace=trace, status=status,
        delta_K=delta_k, delta_K_se=se_k, delta_T=delta_t, delta_T_se=se_t,
        regime=regime, r2_statistic=r2_stat, r2_se=r2_se,
        r2_holds=bool(r2_stat < 1.0),
        r2_verified=bool(r2_stat + 3.0 * r2_se < 1.0),
        L_n=l_n, bounds=bounds, r_se=err_se / n,
    )


def vanishing_risk_shortcut(problem: FixedPointProblem) -> float:
    """Single evaluation at r = 0: rbar^2 = E err(omega_{m/n}(0)) / n.

    Agrees with ``solve`` to first order whenever the risk vanishes; meant
    as a fast cross-check of the full iteration.
    """
    ev = _Evaluator(problem)
    w = omega(0.0, problem.m / problem.n, math.sqrt(problem.sigma2))
    err_mean, _ = ev.err(w)
    return err_mean / problem.n


def nnls_solve(
    prior: DiscretePrior,
    ratio: float,
    sigma: float,
    tol: float = 1e-10,
    max_iter: int = 10_000,
) -> float:
    """Analytic NNLS fixed point: omega_ratio(r)^2 * E G(U/omega) = r^2.

    Deterministic monotone iteration from 0; requires ratio = m/n > 1/2
    (the orthant has delta_K / n = 1/2).  Returns r, not r^2.
    """
    if not ratio > 0.5:
        raise NoSolutionError("NNLS fixed point needs m/n > 1/2")
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    r = 0.0
    prev_step = None
    for _ in range(max_iter):
        w = omega(r, ratio, sigma)
        r_new = math.sqrt(w * w * prior_G(prior, w))
        done = _step_converged(r, r_new, prev_step, tol)
        prev_step = abs(r_new - r)
        r = r_new
        if done:
            return r
    warnings.warn("nnls_solve hit the iteration cap before the step tolerance",
                  RuntimeWarning, stacklevel=2)
    return r


def _step_converged(r: float, r_new: float, prev_step, tol: float) -> bool:
    """Stop once the projected remaining distance is below tol.

    The iteration contracts linearly with an a-priori-unknown factor rho;
    the distance left after a step of size s is about s * rho / (1 - rho).
    Requiring that projection (with rho estimated from consecutive steps)
    to fall below tol/2 keeps independent runs within 5 * tol of each
    other, which the bare step criterion cannot guarantee when rho > 5/7.
    """
    step = abs(r_new - r)
    if step == 0.0:
        return True
    scale = max(r, 1e-12)
    if step / scale >= tol:
        return False
    if prev_step is None or prev_step <= 0.0:
        return False
    rho = min(step / prev_step, 0.999)
    return step * rho / (1.0 - rho) < 0.5 * tol * scale


def nnls_check_R2(prior: DiscretePrior, r: float, ratio: float, sigma: float) -> R2Check:
    """Residual non-degeneracy statistic omega^2 E H(U/omega) / sigma^2."""
    w = omega(r, ratio, sigma)
    stat = w * w * prior_H(prior, w) / (sigma * sigma)
    return R2Check(statistic=stat, holds=bool(stat < 1.0))


class _Evaluator:
    """E err / E lrt evaluators for one problem, with CRN for the MC path."""

    def __init__(self, problem: FixedPointProblem):
        self.problem = problem
        self.K = problem.constraint
        ev = problem.err_evaluator
        self.kind = ev if isinstance(ev, str) else "monte_carlo"
        if self.kind == "monte_carlo":
            self.mc = ev
            self.mu0 = np.asarray(problem.signal, dtype=float)
            if not self.K.contains(self.mu0, tol=1e-8):
                raise DomainError("signal must belong to the constraint set")
            self.H = gaussian_rows(ev.seed, ev.samples, problem.n)
        elif self.kind == ORTHANT_CLOSED_FORM:
            self.mc = MonteCarloConfig()
            if isinstance(problem.signal, DiscretePrior):
                self.prior = problem.signal
                self.mu0 = None
            else:
                self.prior = None
                self.mu0 = np.asarray(problem.signal, dtype=float)
                if np.any(self.mu0 < 0):
                    raise DomainError("orthant signal must be non-negative")
        else:
            self.mc = MonteCarloConfig()
            self.mu0 = np.asarray(problem.signal, dtype=float)
            if not self.K.contains(self.mu0, tol=1e-8):
                raise DomainError("signal must lie in the subspace")

    def err(self, sigma_h: float):
        if self.kind == SUBSPACE_CLOSED_FORM:
            return sigma_h**2 * self.K.subspace_dim, 0.0
        if self.kind == ORTHANT_CLOSED_FORM:
            if self.prior is not None:
                w = sigma_h
                return self.problem.n * w * w * prior_G(self.prior, w), 0.0
            return orthant_err_closed_form(self.mu0, sigma_h), 0.0
        err, _, _ = process_rows(self.K, self.mu0, sigma_h, self.H)
        return float(err.mean()), float(err.std(ddof=1) / math.sqrt(err.size))

    def lrt_minus_err(self, sigma_h: float):
        if self.kind == SUBSPACE_CLOSED_FORM:
            return 0.0, 0.0
        if self.kind == ORTHANT_CLOSED_FORM:
            if self.prior is not None:
                gap = 2.0 * self.problem.n * sigma_h**2 * prior_H(self.prior, sigma_h)
            else:
                gap = orthant_lrt_closed_form(self.mu0, sigma_h) - orthant_err_closed_form(
                    self.mu0, sigma_h
                )
            return gap, 0.0
        err, lrt, _ = process_rows(self.K, self.mu0, sigma_h, self.H)
        diff = lrt - err
        return float(diff.mean()), float(diff.std(ddof=1) / math.sqrt(diff.size))

    def delta_K(self):
        if self.kind == SUBSPACE_CLOSED_FORM:
            return float(self.K.subspace_dim), 0.0
        if self.kind == ORTHANT_CLOSED_FORM:
            return self.problem.n / 2.0, 0.0
        return statistical_dimension(self.K, self.mc)

    def delta_T(self):
        if self.kind == SUBSPACE_CLOSED_FORM:
            return float(self.K.subspace_dim), 0.0
        if self.kind == ORTHANT_CLOSED_FORM:
            n = self.problem.n
            if self.prior is not None:
                return n * (1.0 - self.prior.mass_at_zero / 2.0), 0.0
            z = int(np.count_nonzero(np.abs(self.mu0) <= 1e-12))
            return n - z / 2.0, 0.0
        return tangent_dimension(self.K, self.mu0, self.mc)
