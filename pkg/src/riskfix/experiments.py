"""Experiment grids: theory prediction vs empirical risk, tidy reports.

A config describes a constraint family, one or more signal presets, a grid
of (n, m) sizes and Monte Carlo budgets.  Each grid cell solves the risk
fixed point (theory), simulates the estimator across replicates
(empirical), and emits one record; cells fail soft.  Reports serialize to
CSV or JSON with identical field names and values.
"""

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict
from itertools import product

import numpy as np

from .constraints import ConstraintSet, MonteCarloConfig
from .errors import ConfigError, DomainError
from .fixed_point import (
    ORTHANT_CLOSED_FORM,
    SUBSPACE_CLOSED_FORM,
    FixedPointProblem,
    solve,
)
from .kernels import DiscretePrior
from .linear_model import empirical_risk, generate_instance, solve_instance
from .seeds import child_rng, child_seed

CSV_COLUMNS = (
    "experiment_id", "n", "m", "sigma", "constraint", "signal",
    "r_theory_sq", "r_theory_se", "risk_emp_mean", "risk_emp_se",
    "ratio", "r2_statistic", "regime", "runtime_seconds",
)

_INT_COLUMNS = {"n", "m"}
_STR_COLUMNS = {"experiment_id", "constraint", "signal", "regime"}


@dataclass
class ExperimentRecord:
    """One grid cell: theoretical prediction vs empirical risk."""

    experiment_id: str
    n: int
    m: int
    sigma: float
    constraint: str
    signal: str
    r_theory_sq: float
    r_theory_se: float
    risk_emp_mean: float
    risk_emp_se: float
    ratio: float  # sqrt(theory) / sqrt(empirical)
    r2_statistic: float
    regime: str
    runtime_seconds: float


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one experiment grid."""

    name: str
    constraint: str
    signals: tuple
    grid: tuple  # ((n, m), ...)
    sigma: float = 1.0
    replicates: int = 200
    samples: int = 10_000
    seed: int = 0
    solver: str = "auto"
    jobs: int = 1

    def __post_init__(self):
        if not self.signals:
            raise ConfigError("config needs at least one signal spec")
        if not self.grid:
            raise ConfigError("config needs a non-empty (n, m) grid")
        for pair in self.grid:
            if len(pair) != 2 or pair[0] < 1 or pair[1] < 1:
                raise ConfigError(f"grid entries must be positive (n, m) pairs, got {pair!r}")
        if self.sigma <= 0 or self.replicates < 10 or self.samples < 100 or self.jobs < 1:
            raise ConfigError("sigma, replicates, samples and jobs must be positive")
        if self.solver not in ("amp", "pgd", "auto"):
            raise ConfigError(f"unknown solver choice {self.solver!r}")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        data = dict(raw)
        if "signal" in data and "signals" not in data:
            data["signals"] = data.pop("signal")
        signals = data.get("signals")
        if isinstance(signals, str):
            data["signals"] = (signals,)
        elif signals is not None:
            data["signals"] = tuple(signals)
        if "grid" in data:
            try:
                data["grid"] = tuple((int(n), int(m)) for n, m in data["grid"])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"grid must be a list of [n, m] pairs: {exc}") from exc
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        missing = {"name", "constraint", "signals", "grid"} - set(data)
        if missing:
            raise ConfigError(f"missing config fields: {sorted(missing)}")
        return cls(**data)


def load_config(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top-level JSON value must be an object")
    return ExperimentConfig.from_dict(raw)


def resolve_constraint(spec: str, n: int) -> ConstraintSet:
    """Constraint from a compact string: kind or kind:parameter."""
    kind, _, param = spec.partition(":")
    if kind == "orthant":
        return ConstraintSet.orthant(n)
    if kind == "monotone_cone":
        return ConstraintSet.monotone_cone(n)
    if kind == "l1_ball":
        if not param:
            raise ConfigError("l1_ball needs a radius, e.g. l1_ball:2.5")
        return ConstraintSet.l1_ball(n, float(param))
    if kind == "subspace":
        if not param:
            raise ConfigError("subspace needs a dimension, e.g. subspace:10")
        return ConstraintSet.coordinate_subspace(n, int(param))
    raise ConfigError(f"unknown constraint spec {spec!r}")


def resolve_signal(spec: str, n: int):
    """Signal vector (or DiscretePrior) from a preset string.

    Presets: ``zero``, ``constant:u``, ``linear``, ``quadratic``,
    ``piecewise_constant:k``, ``atoms=v1:w1,v2:w2``, ``file:path``.
    """
    if spec == "zero":
        return np.zeros(n)
    if spec == "linear":
        return np.arange(1, n + 1) / n
    if spec == "quadratic":
        return (np.arange(1, n + 1) / n) ** 2
    if spec.startswith("constant:"):
        return float(spec.split(":", 1)[1]) * np.ones(n)
    if spec.startswith("piecewise_constant:"):
        k = int(spec.split(":", 1)[1])
        if not 1 <= k <= n:
            raise ConfigError(f"piecewise_constant needs 1 <= k <= n, got {k}")
        levels = np.linspace(0.0, 1.0, k) if k > 1 else np.zeros(1)
        return levels[np.minimum(np.arange(n) * k // n, k - 1)]
    if spec.startswith("atoms="):
        return parse_prior(spec[len("atoms="):])
    if spec.startswith("file:"):
        path = spec.split(":", 1)[1]
        vec = np.loadtxt(path, dtype=float).reshape(-1)
        if vec.size != n:
            raise ConfigError(f"{path}: expected {n} values, found {vec.size}")
        return vec
    raise ConfigError(f"unknown signal spec {spec!r}")


def parse_prior(spec: str) -> DiscretePrior:
    """Prior from 'v1:w1,v2:w2,...'."""
    atoms = []
    for chunk in spec.split(","):
        value, _, weight = chunk.partition(":")
        if not weight:
            raise ConfigError(f"prior atom {chunk!r} must look like value:weight")
        atoms.append((float(value), float(weight)))
    return DiscretePrior(atoms)


def run_experiment(config: ExperimentConfig):
    """All grid cells of the config, ordered by (signal, grid) index."""
    tasks = list(enumerate(product(config.signals, config.grid)))
    if config.jobs == 1:
        return [_run_cell(config, idx, sig, n, m) for idx, (sig, (n, m)) in tasks]
    with ThreadPoolExecutor(max_workers=config.jobs) as pool:
        futures = [
            pool.submit(_run_cell, config, idx, sig, n, m)
            for idx, (sig, (n, m)) in tasks
        ]
        return [f.result() for f in futures]


def _run_cell(config: ExperimentConfig, idx: int, signal_spec: str, n: int, m: int) -> ExperimentRecord:
    start = time.perf_counter()
    experiment_id = f"{config.name}-{idx:03d}"
    cell_seed = child_seed(config.seed, idx)
    theory_seed = child_seed(cell_seed, 0)
    emp_seed = child_seed(cell_seed, 1)
    try:
        K = resolve_constraint(config.constraint, n)
        signal = resolve_signal(signal_spec, n)
        sol = _solve_theory(config, K, signal, n, m, theory_seed)
        if isinstance(signal, DiscretePrior):
            emp_mean, emp_se = _empirical_risk_prior(
                K, signal, m, n, config.sigma, config.replicates, emp_seed, config.solver
            )
        else:
            emp_mean, emp_se, _ = empirical_risk(
                K, signal, m, n, config.sigma, config.replicates, emp_seed, config.solver
            )
        ratio = None
        if sol.r_sq is not None and sol.r_sq > 0 and emp_mean > 0:
            ratio = math.sqrt(sol.r_sq) / math.sqrt(emp_mean)
        return ExperimentRecord(
            experiment_id=experiment_id, n=n, m=m, sigma=config.sigma,
            constraint=config.constraint, signal=signal_spec,
            r_theory_sq=sol.r_sq, r_theory_se=(sol.r_se if sol.r_sq is not None else None),
            risk_emp_mean=emp_mean, risk_emp_se=emp_se, ratio=ratio,
            r2_statistic=sol.r2_statistic, regime=sol.regime,
            runtime_seconds=time.perf_counter() - start,
        )
    except Exception as exc:  # fail-soft per grid cell
        return ExperimentRecord(
            experiment_id=experiment_id, n=n, m=m, sigma=config.sigma,
            constraint=config.constraint, signal=signal_spec,
            r_theory_sq=None, r_theory_se=None, risk_emp_mean=None,
            risk_emp_se=None, ratio=None, r2_statistic=None,
            regime=f"error: {exc}", runtime_seconds=time.perf_counter() - start,
        )


def _solve_theory(config, K, signal, n, m, seed):
    if K.kind == "orthant":
        evaluator, tol = ORTHANT_CLOSED_FORM, 1e-10
    elif K.kind == "subspace":
        evaluator, tol = SUBSPACE_CLOSED_FORM, 1e-10
    else:
        evaluator, tol = MonteCarloConfig(samples=config.samples, seed=seed), 1e-6
    problem = FixedPointProblem(
        constraint=K, signal=signal, m=m, n=n,
        sigma2=config.sigma**2, err_evaluator=evaluator,
    )
    return solve(problem, tol=tol)


def _empirical_risk_prior(K, prior, m, n, sigma, replicates, base_seed, solver_choice):
    """Empirical risk with a fresh i.i.d. signal draw per replicate."""
    risks = np.empty(replicates)
    for i in range(replicates):
        mu0 = child_rng(base_seed, 2 * i + 1).choice(prior.values, size=n, p=prior.weights)
        inst = generate_instance(m, n, mu0, sigma, seed=child_seed(base_seed, 2 * i))
        risks[i] = solve_instance(K, inst, solver_choice).risk
    return float(risks.mean()), float(risks.std(ddof=1) / math.sqrt(replicates))


def get_preset(name: str, full: bool = False) -> ExperimentConfig:
    """Built-in experiment grids."""
    if name == "figure2-left":
        return ExperimentConfig(
            name="figure2-left", constraint="orthant", signals=("constant:5",),
            grid=tuple((50, m) for m in (40, 60, 100, 200, 400)),
            sigma=1.0, replicates=1000, samples=10_000, seed=20, solver="auto",
        )
    if name == "figure2-right":
        sizes = (100, 200, 300, 400, 500) if full else (100, 200, 300)
        return ExperimentConfig(
            name="figure2-right", constraint="monotone_cone",
            signals=("zero", "linear", "quadratic"),
            grid=tuple((n, n) for n in sizes),
            sigma=1.0, replicates=200, samples=10_000, seed=21, solver="auto",
        )
    if name == "degenerate":
        return ExperimentConfig(
            name="degenerate", constraint="orthant", signals=("zero",),
            grid=((50, 20),), sigma=1.0, replicates=200, samples=10_000,
            seed=22, solver="auto",
        )
    raise ConfigError(f"unknown preset {name!r}; available: figure2-left, figure2-right, degenerate")


def emit_report(records, format: str = "csv", path: str = None):
    """Write records as CSV (fixed header) or JSON; returns the text."""
    if not records:
        raise DomainError("emit_report needs at least one record")
    if format == "csv":
        lines = [",".join(CSV_COLUMNS)]
        for rec in records:
            row = asdict(rec)
            lines.append(",".join(_csv_cell(row[c]) for c in CSV_COLUMNS))
        text = "\n".join(lines) + "\n"
    elif format == "json":
        text = json.dumps([asdict(rec) for rec in records], indent=2) + "\n"
    else:
        raise DomainError(f"unknown report format {format!r}")
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def parse_records(path: str, format: str = "csv"):
    """Inverse of emit_report, for round-tripping reports."""
    with open(path, encoding="utf-8") as fh:
        if format == "json":
            return [ExperimentRecord(**row) for row in json.load(fh)]
        header = fh.readline().strip().split(",")
        if tuple(header) != CSV_COLUMNS:
            raise ConfigError(f"{path}: unexpected CSV header")
        records = []
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            cells = line.split(",")
            row = {}
            for col, cell in zip(CSV_COLUMNS, cells):
                if col in _STR_COLUMNS:
                    row[col] = cell
                elif cell == "":
                    row[col] = None
                elif col in _INT_COLUMNS:
                    row[col] = int(cell)
                else:
                    row[col] = float(cell)
            records.append(ExperimentRecord(**row))
        return records


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value.replace(",", ";")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))
