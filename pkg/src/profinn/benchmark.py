"""Optimizer comparison harness: quadratics, Rosenbrock, and a frozen
Burgers loss snapshot, run under every shipped quasi-Newton rule from a
shared initialization. Results land in a CSV with iterations-to-tolerance
per rule; divergent or stalled runs record -1.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ConfigError, NumericalError
from .loss import LossWeights
from .network import MlpConfig
from .optim import QN_RULES, make_quasi_newton
from .problems import objective
from .problems.burgers import BurgersProblem

TABLE_HEADER = "rule,problem,iters_to_1e-6,iters_to_1e-10,final_value"

THRESHOLDS = (1e-6, 1e-10)


def _quadratic_case(n: int, seed: int):
    rng = np.random.default_rng(seed)
    d = rng.uniform(0.5, 100.0, size=n)
    theta0 = rng.normal(size=n)

    def obj(t):
        return float(0.5 * t @ (d * t)), d * t, None

    return f"quadratic{n}", obj, theta0


def _rosenbrock_case():
    def obj(t):
        a, b = 1.0, 100.0
        f = (a - t[0]) ** 2 + b * (t[1] - t[0] ** 2) ** 2
        g = np.array([
            -2 * (a - t[0]) - 4 * b * t[0] * (t[1] - t[0] ** 2),
            2 * b * (t[1] - t[0] ** 2),
        ])
        return float(f), g, None

    return "rosenbrock", obj, np.array([-1.2, 1.0])


def _burgers_snapshot_case(seed: int):
    problem = BurgersProblem(mode="exact", config=MlpConfig(1, 2, 10, "tanh"),
                             interior_batch=400, smoothness_batch=400)
    theta0 = problem.init_theta(seed)
    batches = problem.sample_batches(seed, 0)
    weights = LossWeights()

    def obj(t):
        f, g, _ = objective(problem, t, batches, weights, chunk_rows=500)
        return f, g, None

    return "burgers-loss-snapshot", obj, theta0


def _suite_cases(suite: str, seed: int):
    if suite == "quadratics":
        return [_quadratic_case(n, seed + n) for n in (2, 5, 10)]
    if suite == "rosenbrock":
        return [_rosenbrock_case()]
    if suite == "burgers-loss-snapshot":
        return [_burgers_snapshot_case(seed)]
    raise ConfigError(f"unknown benchmark suite '{suite}' "
                      "(have: quadratics, rosenbrock, burgers-loss-snapshot)")


def run_case(rule: str, obj, theta0: np.ndarray, max_iters: int) -> dict:
    qn = make_quasi_newton(rule, theta0.size)
    theta = theta0.copy()
    f, g, _ = obj(theta)
    hits = {tol: -1 for tol in THRESHOLDS}
    for it in range(1, max_iters + 1):
        try:
            theta, f, g, _, _ = qn.step(obj, theta, f, g)
        except NumericalError:
            f = float("nan")
            break
        if not np.isfinite(f):
            break
        for tol in THRESHOLDS:
            if hits[tol] < 0 and f <= tol:
                hits[tol] = it
        if np.linalg.norm(g) <= 1e-14:
            break
    return {"iters": hits, "final_value": f}


def benchmark_optimizers(suite: str, seed: int = 0, max_iters: int = 500,
                         rules=QN_RULES, out_csv: str | Path | None = None):
    """Run every rule on every problem of the suite; returns the table rows."""
    cases = _suite_cases(suite, seed)
    rows = []
    for rule in rules:
        for name, obj, theta0 in cases:
            res = run_case(rule, obj, theta0, max_iters)
            rows.append({
                "rule": rule,
                "problem": name,
                "iters_to_1e-6": res["iters"][1e-6],
                "iters_to_1e-10": res["iters"][1e-10],
                "final_value": res["final_value"],
            })
    if out_csv is not None:
        with open(out_csv, "w") as fh:
            fh.write(TABLE_HEADER + "\n")
            for r in rows:
                fh.write(f"{r['rule']},{r['problem']},{r['iters_to_1e-6']},"
                         f"{r['iters_to_1e-10']},{r['final_value']:.17g}\n")
    return rows
