"""Parameter sweeps emitting a fixed-schema CSV corpus plus a config manifest.

Schema: ``experiment,grid_param,grid_value,round,metric,producer,value,stderr,
mode,seed``. Whole-run scalars use round 0; the producer column is empty when
a metric is not producer-specific. Re-running a sweep with the same seed
reproduces the CSV body byte for byte; only the leading timestamp comment
line changes. Each sweep also writes ``<name>_manifest.json`` recording the
resolved configuration and its hash for every grid point.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .bestresponse import EPSILON_NASH, DeviationSet, candidate_profile, verify_epsilon_nash
from .core import GameConfig, load_config, naive_effort_cap, serialize_config
from .policies import make_policy
from .simulator import EXACT
from .welfare import closed_form_2user, solve_G, solve_W, theta_star

CSV_FIELDS = ("experiment", "grid_param", "grid_value", "round", "metric",
              "producer", "value", "stderr", "mode", "seed")

__all__ = ["CSV_FIELDS", "SweepSpec", "builtin_sweeps", "config_hash", "load_sweep_spec",
           "run_sweep"]


@dataclass(frozen=True)
class SweepSpec:
    """One named sweep: a grid over one parameter plus fixed settings."""

    name: str
    kind: str  # punish_effort | hedge_bound | exp3_bound | theta | welfare_vs_P
    grid_param: str
    grid: tuple
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.grid) == 0:
            raise ValueError("sweep grid must be nonempty")


def config_hash(document: dict) -> str:
    return hashlib.sha256(json.dumps(document, sort_keys=True).encode()).hexdigest()


def builtin_sweeps() -> dict[str, tuple[SweepSpec, ...]]:
    """The five shipped sweeps (the theta sweep expands to one spec per c)."""
    theta_grid = tuple(np.linspace(0.01, math.pi / 2, 50))
    return {
        "punish_effort_vs_P": (SweepSpec(
            name="punish_effort_vs_P", kind="punish_effort", grid_param="producers",
            grid=tuple(range(2, 9)),
            params={"cost_exponent": 2.0, "discount": 0.9, "epsilon": 0.1,
                    "exploration": 0.1, "horizon": 30},
        ),),
        "hedge_bound_vs_t": (SweepSpec(
            name="hedge_bound_vs_t", kind="hedge_bound", grid_param="round",
            grid=tuple(range(1, 201)),
            params={"cost_exponent": 2.0, "discount": 0.9, "exploration": 0.1,
                    "horizon": 201, "rate_scale": 1.0},
        ),),
        "exp3_bound_vs_t": (SweepSpec(
            name="exp3_bound_vs_t", kind="exp3_bound", grid_param="round",
            grid=tuple(range(1, 201)),
            params={"cost_exponent": 2.0, "discount": 0.9, "exploration": 0.1,
                    "horizon": 201, "rate_scale": 1.0, "producers": 3},
        ),),
        "theta_sweep": tuple(
            SweepSpec(name=f"theta_sweep_c{c:g}", kind="theta", grid_param="theta",
                      grid=theta_grid,
                      params={"cost_exponent": float(c), "discount": 0.5, "producers": 2})
            for c in (1, 2, 4)
        ),
        "welfare_vs_P": (SweepSpec(
            name="welfare_vs_P", kind="welfare_vs_P", grid_param="producers",
            grid=tuple(range(1, 7)),
            params={"cost_exponent": 2.0, "discount": 0.9,
                    "users": [[[1.0, 0.0, 0.0], 0.3], [[0.0, 1.0, 0.0], 0.3],
                              [[0.0, 0.0, 1.0], 0.2], [[0.6, 0.8, 0.0], 0.2]]},
        ),),
    }


def load_sweep_spec(source) -> tuple[SweepSpec, ...]:
    """Resolve a built-in sweep name or a JSON spec file."""
    builtins = builtin_sweeps()
    if str(source) in builtins:
        return builtins[str(source)]
    doc = json.loads(Path(source).read_text())
    return (SweepSpec(name=doc["name"], kind=doc["kind"], grid_param=doc["grid_param"],
                      grid=tuple(doc["grid"]), params=dict(doc.get("params", {}))),)


def _punish_effort_point(spec, P, seed):
    p = spec.params
    T, c, beta = p["horizon"], p["cost_exponent"], p["discount"]
    q = (beta / P) ** (1.0 / c) * (1.0 - p["epsilon"])
    doc = {
        "producers": int(P), "dimension": 1, "horizon": T, "cost_exponent": c,
        "discount": beta, "exploration": p["exploration"],
        "learning_rates": {"fixed": 1.0 / math.sqrt(T)}, "users": [[[1.0], 1.0]],
    }
    config = load_config(doc)
    policy = make_policy("punishhedge", config, q=q)
    grid = np.linspace(0.0, 1.2 * naive_effort_cap(c, beta), 21)
    devs = [DeviationSet.defect_at_s(q), DeviationSet.norm_grid(grid, [np.ones(1)])]
    cert = verify_epsilon_nash(config, policy, candidate_profile(config, q), devs)
    certified = cert.verdict == EPSILON_NASH
    rows = [
        ("equilibrium_effort", q if certified else float("nan")),
        ("certified", 1.0 if certified else 0.0),
        ("max_gain", cert.max_gain),
    ]
    return doc, [(metric, value, 0.0, EXACT) for metric, value in rows]


def _bound_point(spec, t, bandit: bool):
    from .bounds import thm31_effort_bound, thm32_effort_bound

    p = spec.params
    T, c = p["horizon"], p["cost_exponent"]
    eta_next = p["rate_scale"] / math.sqrt(t + 1) if t + 1 <= T else 0.0
    doc = {"round": int(t), **{k: p[k] for k in sorted(p)}}
    if bandit:
        value = thm32_effort_bound(eta_next, p["exploration"], p["discount"], T, t, c,
                                   p["producers"])
        return doc, [("effort_bound_bandit", value, 0.0, EXACT)]
    value = thm31_effort_bound(eta_next, p["exploration"], p["discount"], T, t, c).value
    return doc, [("effort_bound_fullinfo", value, 0.0, EXACT)]


def _theta_point(spec, theta, seed):
    from .core import UserDistribution

    p = spec.params
    c, beta, P = p["cost_exponent"], p["discount"], p["producers"]
    atoms = np.array([[1.0, 0.0], [math.cos(theta), math.sin(theta)]])
    dist = UserDistribution(atoms, np.array([0.5, 0.5]))
    solution = solve_W(c, beta, dist, P, seed=seed)
    closed, regime, ts = closed_form_2user(c, beta, theta)
    doc = {"theta": float(theta), **{k: p[k] for k in sorted(p)}}
    return doc, [
        ("welfare_solver", solution.objective, 0.0, EXACT),
        ("welfare_closed_form", closed, 0.0, EXACT),
        ("abs_gap", abs(solution.objective - closed), 0.0, EXACT),
        ("regime", 0.0 if regime == "SHARED_DIRECTION" else 1.0, 0.0, EXACT),
        ("theta_star", ts, 0.0, EXACT),
        ("cost_exponent", c, 0.0, EXACT),
    ]


def _welfare_vs_p_point(spec, P, seed):
    from .core import UserDistribution

    p = spec.params
    atoms = np.array([entry[0] for entry in p["users"]])
    weights = np.array([entry[1] for entry in p["users"]])
    dist = UserDistribution(atoms, weights)
    w = solve_W(p["cost_exponent"], p["discount"], dist, int(P), seed=seed)
    g = solve_G(dist, int(P), seed=seed)
    doc = {"producers": int(P), **{k: p[k] for k in sorted(p)}}
    return doc, [
        ("welfare_W", w.objective, 0.0, EXACT),
        ("welfare_G", g.objective, 0.0, EXACT),
        ("support_size", float(dist.support_size), 0.0, EXACT),
    ]


def run_sweep(spec: SweepSpec, out_dir, seed: int = 0) -> tuple[Path, Path]:
    """Run one sweep, writing ``<name>.csv`` and ``<name>_manifest.json``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows, points = [], []
    for grid_value in spec.grid:
        if spec.kind == "punish_effort":
            doc, metrics = _punish_effort_point(spec, grid_value, seed)
        elif spec.kind == "hedge_bound":
            doc, metrics = _bound_point(spec, grid_value, bandit=False)
        elif spec.kind == "exp3_bound":
            doc, metrics = _bound_point(spec, grid_value, bandit=True)
        elif spec.kind == "theta":
            doc, metrics = _theta_point(spec, grid_value, seed)
        elif spec.kind == "welfare_vs_P":
            doc, metrics = _welfare_vs_p_point(spec, grid_value, seed)
        else:
            raise ValueError(f"unknown sweep kind {spec.kind!r}")
        points.append({"grid_value": grid_value, "config": doc, "config_hash": config_hash(doc)})
        for metric, value, stderr, mode in metrics:
            rows.append({
                "experiment": spec.name, "grid_param": spec.grid_param,
                "grid_value": grid_value, "round": 0, "metric": metric, "producer": "",
                "value": value, "stderr": stderr, "mode": mode, "seed": seed,
            })
    csv_path = out_dir / f"{spec.name}.csv"
    with csv_path.open("w", newline="") as fh:
        fh.write(f"# generated {datetime.now(timezone.utc).isoformat()}\n")
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        writer.writerows(rows)
    manifest_path = out_dir / f"{spec.name}_manifest.json"
    manifest_path.write_text(json.dumps(
        {"experiment": spec.name, "seed": seed, "grid_param": spec.grid_param,
         "points": points}, indent=2, sort_keys=True))
    return csv_path, manifest_path
