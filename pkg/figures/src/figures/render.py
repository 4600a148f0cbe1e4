"""Figure rendering: metric trend lines and the specialization regime map."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .data import SchemaError, SweepTable, load_table

LINE = "line"
REGIME_MAP = "regime_map"


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: input CSVs, figure kind, metric selection, output path."""

    inputs: tuple
    kind: str  # LINE or REGIME_MAP
    out: str
    metrics: tuple = ()
    title: str = ""
    logy: bool = False


@dataclass(frozen=True)
class RenderResult:
    path: Path
    extras: dict = field(default_factory=dict)


def load_figure_spec(path) -> FigureSpec:
    doc = json.loads(Path(path).read_text())
    return FigureSpec(inputs=tuple(doc["inputs"]), kind=doc["kind"], out=doc["out"],
                      metrics=tuple(doc.get("metrics", ())),
                      title=doc.get("title", ""), logy=bool(doc.get("logy", False)))


def _render_line(spec: FigureSpec, tables: list[SweepTable], ax) -> dict:
    for table in tables:
        metrics = spec.metrics or sorted(table.metrics())
        for metric in metrics:
            if metric not in table.metrics():
                raise SchemaError(f"{table.path}: metric {metric!r} not present")
            x, y, yerr = table.series(metric)
            label = metric if len(tables) == 1 else f"{table.experiment}:{metric}"
            finite = np.isfinite(y)
            ax.plot(x[finite], y[finite], marker=".", label=label)
            if np.any(yerr > 0):
                ax.fill_between(x[finite], (y - 3 * yerr)[finite], (y + 3 * yerr)[finite],
                                alpha=0.2)
        ax.set_xlabel(table.grid_param)
    if spec.logy:
        ax.set_yscale("log")
    ax.legend(fontsize=8)
    return {}


def _render_regime_map(spec: FigureSpec, tables: list[SweepTable], ax) -> dict:
    """Regime points per cost exponent with the threshold-angle curve overlaid.

    Each input table must carry ``regime`` (0 shared / 1 specialized),
    ``theta_star``, and ``cost_exponent`` metric rows over a theta grid.
    """
    needed = {"regime", "theta_star", "cost_exponent"}
    rows = []
    for table in tables:
        missing = needed - table.metrics()
        if missing:
            raise SchemaError(f"{table.path}: missing columns: {', '.join(sorted(missing))}")
        thetas, regimes, _ = table.series("regime")
        c = table.constant("cost_exponent")
        theta_star = table.constant("theta_star")
        cell = float(np.diff(thetas).max()) if thetas.size > 1 else float("inf")
        specialized = thetas[regimes > 0.5]
        boundary = float(specialized.min()) if specialized.size else None
        rows.append({"c": c, "theta_star": theta_star, "boundary": boundary,
                     "cell": cell, "thetas": thetas, "regimes": regimes})
    rows.sort(key=lambda r: r["c"])
    for r in rows:
        shared = r["regimes"] < 0.5
        ax.scatter(r["thetas"][shared], np.full(shared.sum(), r["c"]),
                   s=12, color="tab:blue", marker="s")
        ax.scatter(r["thetas"][~shared], np.full((~shared).sum(), r["c"]),
                   s=12, color="tab:orange", marker="s")
    stars = [r["theta_star"] for r in rows]
    cs = [r["c"] for r in rows]
    ax.plot(stars, cs, color="black", marker="o", label="threshold angle")
    ax.set_xlabel("user angle")
    ax.set_ylabel("cost exponent")
    ax.legend(fontsize=8)
    return {"regimes": [{k: r[k] for k in ("c", "theta_star", "boundary", "cell")}
                        for r in rows]}


def render(spec: FigureSpec, force: bool = False) -> RenderResult:
    """Render one figure to PNG; never mutates inputs.

    Fails before writing anything on schema violations, and refuses to
    overwrite an existing output unless ``force``.
    """
    out = Path(spec.out)
    if out.exists() and not force:
        raise FileExistsError(f"{out} exists; pass force to overwrite")
    tables = [load_table(p) for p in spec.inputs]
    fig, ax = plt.subplots(figsize=(6, 4))
    try:
        if spec.kind == LINE:
            extras = _render_line(spec, tables, ax)
        elif spec.kind == REGIME_MAP:
            extras = _render_regime_map(spec, tables, ax)
        else:
            raise SchemaError(f"unknown figure kind {spec.kind!r}")
        if spec.title:
            ax.set_title(spec.title)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out, dpi=150, bbox_inches="tight")
    finally:
        plt.close(fig)
    return RenderResult(path=out, extras=extras)


def default_figures(in_dir, out_dir) -> list[FigureSpec]:
    """Figure specs for the shipped sweeps present in ``in_dir``."""
    in_dir, out_dir = Path(in_dir), Path(out_dir)
    specs = []

    def add_line(csv_name, metrics, title, logy=False):
        path = in_dir / f"{csv_name}.csv"
        if path.exists():
            specs.append(FigureSpec(inputs=(str(path),), kind=LINE,
                                    out=str(out_dir / f"{csv_name}.png"),
                                    metrics=metrics, title=title, logy=logy))

    add_line("punish_effort_vs_P", ("equilibrium_effort",),
             "certified equilibrium effort")
    add_line("hedge_bound_vs_t", ("effort_bound_fullinfo",),
             "full-information effort cap", logy=True)
    add_line("exp3_bound_vs_t", ("effort_bound_bandit",),
             "bandit effort cap", logy=True)
    add_line("welfare_vs_P", ("welfare_W", "welfare_G"), "welfare programs")
    theta_csvs = sorted(in_dir.glob("theta_sweep_c*.csv"))
    if theta_csvs:
        specs.append(FigureSpec(inputs=tuple(str(p) for p in theta_csvs),
                                kind=REGIME_MAP,
                                out=str(out_dir / "theta_regime_map.png"),
                                title="specialization regimes"))
        specs.append(FigureSpec(inputs=(str(theta_csvs[0]),), kind=LINE,
                                out=str(out_dir / "theta_welfare.png"),
                                metrics=("welfare_solver", "welfare_closed_form"),
                                title="two-user welfare"))
    return specs
