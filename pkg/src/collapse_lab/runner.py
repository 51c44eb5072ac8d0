"""Scenario execution and report emission."""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .classical import (
    classical_cmo_check,
    random_system,
    total_probability_check,
    total_variance_check,
)
from .coherence import (
    QubitParams,
    coherence_report,
    qubit_oracle,
    qubit_state,
    qubit_x,
    qubit_y,
    variance_gap,
    variational_trace_distance,
    trace_distance_to_dephased,
)
from .config import ScenarioConfig, classical_system_from_config
from .errors import CollapseLabError
from .protocols import (
    DEFAULT_T_GRID,
    MeasurementStep,
    cmo_limit_probe,
    direct_distribution,
    overlap_matrix,
    post_measurement_distribution,
    sample_records,
)
from .quantum import born_distribution


@dataclass
class Table:
    columns: list
    rows: list = field(default_factory=list)

    def add(self, *values):
        self.rows.append([_plain(v) for v in values])


@dataclass
class RunReport:
    scenario: dict
    seed: int
    version: str = __version__
    tables: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    coherence: dict | None = None
    wall_time: float = 0.0

    def table(self, name, columns) -> Table:
        self.tables[name] = Table(list(columns))
        return self.tables[name]

    def to_dict(self, include_wall_time=True) -> dict:
        out = {
            "scenario": self.scenario,
            "version": self.version,
            "seed": self.seed,
            "summary": {k: _plain(v) for k, v in self.summary.items()},
            "coherence": self.coherence,
            "tables": {k: {"columns": t.columns, "rows": t.rows} for k, t in self.tables.items()},
        }
        if include_wall_time:
            out["wall_time"] = self.wall_time
        return _json_safe(out)

    @classmethod
    def from_dict(cls, data: dict) -> "RunReport":
        rep = cls(
            scenario=data["scenario"],
            seed=data["seed"],
            version=data["version"],
            summary=data["summary"],
            coherence=data.get("coherence"),
            wall_time=data.get("wall_time", 0.0),
        )
        for name, t in data["tables"].items():
            rep.tables[name] = Table(t["columns"], t["rows"])
        return rep


def _plain(v):
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _json_safe(obj):
    # JSON has no NaN/Infinity; they are written as null
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    obj = _plain(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


class ScenarioError(CollapseLabError):
    pass


def run(cfg: ScenarioConfig) -> RunReport:
    """Execute a validated scenario and collect its result tables."""
    report = RunReport(scenario=cfg.raw, seed=cfg.seed)
    start = time.perf_counter()
    try:
        _RUNNERS[cfg.kind](cfg, report)
    except CollapseLabError as exc:
        raise ScenarioError(f"{cfg.kind} scenario failed: {exc}") from exc
    report.wall_time = time.perf_counter() - start
    return report


def _run_cmo_probe(cfg, rep):
    X = cfg.observables["x"]
    probe = cmo_limit_probe(cfg.state, X, cfg.hamiltonian, cfg.t_grid)
    labels = X.labels
    tab = rep.table("conditionals", ["t", "first_label", "second_label", "probability"])
    for k, t in enumerate(probe.t_grid):
        for n in range(X.dim):
            for m in range(X.dim):
                tab.add(t, labels[n], labels[m], probe.matrices[k, n, m])
    ex = rep.table("exponents", ["first_label", "second_label", "exponent"])
    for n in range(X.dim):
        for m in range(X.dim):
            if n != m:
                ex.add(labels[n], labels[m], probe.exponents[n, m])
    finite = probe.exponents[np.isfinite(probe.exponents)]
    t_min = float(probe.t_grid[-1])
    rep.summary["t_min"] = t_min
    rep.summary["max_deviation_from_identity_at_t_min"] = float(
        np.max(np.abs(probe.matrices[-1] - np.eye(X.dim)))
    )
    rep.summary["min_exponent"] = float(finite.min()) if finite.size else None
    rep.summary["max_exponent"] = float(finite.max()) if finite.size else None

    steps = [MeasurementStep(X), MeasurementStep(X, t_min, cfg.hamiltonian)]
    rec = sample_records(cfg.state, steps, cfg.seed, cfg.shots)
    rep.summary["repeat_agreement_at_t_min"] = float(np.mean(rec.outcomes[:, 0] == rec.outcomes[:, 1]))


def _run_two_measurement(cfg, rep):
    rho, X, Y = cfg.state, cfg.observables["x"], cfg.observables["y"]
    direct = direct_distribution(rho, Y)
    post = post_measurement_distribution(rho, X, Y)
    residual = direct.probs - post.probs
    rec_post = sample_records(rho, [MeasurementStep(X), MeasurementStep(Y)], cfg.seed, cfg.shots)
    rec_direct = sample_records(rho, [MeasurementStep(Y)], (cfg.seed + 1) % 2**64, cfg.shots)
    emp_post, emp_direct = rec_post.marginal(1), rec_direct.marginal(0)
    tab = rep.table(
        "distributions",
        ["y_label", "P_direct", "P_post", "residual", "empirical_direct", "empirical_post"],
    )
    for m, y in enumerate(Y.labels):
        tab.add(y, direct.probs[m], post.probs[m], residual[m], emp_direct[m], emp_post[m])
    cond = overlap_matrix(X, Y)
    ct = rep.table("conditional", ["x_label", "y_label", "probability"])
    for n, x in enumerate(X.labels):
        for m, y in enumerate(Y.labels):
            ct.add(x, y, cond[n, m])
    px = born_distribution(rho, X)
    ft = rep.table("first_measurement", ["x_label", "probability", "empirical"])
    emp_x = rec_post.marginal(0)
    for n, x in enumerate(X.labels):
        ft.add(x, px.probs[n], emp_x[n])
    vg = variance_gap(rho, X, Y)
    rep.summary.update(
        total_probability_violation_l1=float(np.sum(np.abs(residual))),
        variance_collapsed=vg.lhs,
        variance_direct=vg.rhs,
        variance_gap=vg.gap,
        empirical_tv_error_post=0.5 * float(np.sum(np.abs(emp_post - post.probs))),
        empirical_tv_error_direct=0.5 * float(np.sum(np.abs(emp_direct - direct.probs))),
    )


def _random_flow(rng, n):
    # identity below t = 1, a cyclic shift from then on
    return ((1.0, np.roll(np.arange(n), int(rng.integers(1, n)) if n > 1 else 0)),)


def _run_classical_check(cfg, rep):
    c = cfg.classical
    t_grid = cfg.t_grid if cfg.t_grid is not None else DEFAULT_T_GRID
    if "system" in c:
        systems = [classical_system_from_config(c["system"])]
    else:
        rng = np.random.default_rng(int(c.get("seed", cfg.seed)))
        count, size = int(c.get("systems", 16)), int(c.get("size", 16))
        systems = []
        for _ in range(count):
            base = random_system(rng, size)
            systems.append(
                type(base)(base.distribution, base.partition_x, base.partition_y, _random_flow(rng, size))
            )
    st = rep.table(
        "systems",
        [
            "system", "size", "x_cells", "y_cells", "cmo_zero_max_deviation",
            "cmo_grid_max_deviation", "total_probability_max_residual",
            "variance_lhs", "variance_rhs", "variance_residual",
        ],
    )
    cmo = rep.table("cmo", ["system", "t", "first_label", "second_label", "probability"])
    worst_prob = worst_var = worst_zero = 0.0
    for i, sys in enumerate(systems):
        check = classical_cmo_check(sys, t_grid)
        d = len(sys.x_labels)
        zero_dev = float(np.max(np.abs(check.at_zero - np.eye(d))))
        grid_dev = float(np.max(np.abs(check.matrices - np.eye(d)))) if t_grid.size else 0.0
        tp = total_probability_check(sys)
        tv = total_variance_check(sys)
        st.add(i, sys.size, d, len(sys.y_labels), zero_dev, grid_dev,
               float(np.max(np.abs(tp))), tv.lhs, tv.rhs, tv.residual)
        for k, t in enumerate(check.t_grid):
            for n, xn in enumerate(sys.x_labels):
                for m, xm in enumerate(sys.x_labels):
                    cmo.add(i, t, xn, xm, check.matrices[k, n, m])
        worst_zero = max(worst_zero, zero_dev)
        worst_prob = max(worst_prob, float(np.max(np.abs(tp))))
        worst_var = max(worst_var, abs(tv.residual))
    rep.summary.update(
        systems=len(systems),
        max_cmo_deviation_at_zero=worst_zero,
        max_total_probability_residual=worst_prob,
        max_total_variance_residual=worst_var,
    )


def _run_coherence_audit(cfg, rep):
    rho, X = cfg.state, cfg.observables["x"]
    Y = cfg.observables.get("y")
    cr = coherence_report(rho, X, Y)
    rep.coherence = cr.as_dict()
    if Y is not None:
        direct = direct_distribution(rho, Y)
        post = post_measurement_distribution(rho, X, Y)
        tab = rep.table("distributions", ["y_label", "P_direct", "P_post", "residual"])
        for m, y in enumerate(Y.labels):
            tab.add(y, direct.probs[m], post.probs[m], direct.probs[m] - post.probs[m])
    rep.summary["trace_distance"] = cr.trace_distance
    if X.dim == 2:
        var = variational_trace_distance(rho, X)
        rep.summary.update(
            variational_trace_distance=var.value,
            variational_phi=var.phi,
            variational_theta=var.theta,
        )
    if cfg.qubit is not None:
        o = qubit_oracle(cfg.qubit)
        rep.summary["closed_form_trace_distance"] = o.trace_distance
        rep.summary["closed_form_variance_gap_at_optimum"] = o.variance_gap_at_optimum


def _run_qubit_sweep(cfg, rep):
    sw = cfg.sweep
    X = qubit_x()
    ys = {(th, ph): qubit_y(th, ph) for th in sw["theta"] for ph in sw["phi"]}
    tab = rep.table(
        "sweep",
        [
            "p", "gamma_abs", "gamma_arg", "theta", "phi",
            "P_direct_plus", "P_post_plus", "oracle_direct_plus", "oracle_post_plus",
            "trace_distance", "oracle_trace_distance", "max_abs_diff",
        ],
    )
    worst = 0.0
    for p in sw["p"]:
        for ga in sw["gamma_abs"]:
            for garg in sw["gamma_arg"]:
                gamma = ga * complex(math.cos(garg), math.sin(garg))
                rho = qubit_state(p, gamma)
                td = trace_distance_to_dephased(rho, X)
                for th in sw["theta"]:
                    for ph in sw["phi"]:
                        Y = ys[(th, ph)]
                        direct = direct_distribution(rho, Y).probs
                        post = post_measurement_distribution(rho, X, Y).probs
                        o = qubit_oracle(QubitParams(p, gamma, th, ph))
                        diff = max(
                            np.max(np.abs(direct - o.P_direct)),
                            np.max(np.abs(post - o.P_post)),
                            abs(td - o.trace_distance),
                        )
                        worst = max(worst, float(diff))
                        tab.add(p, ga, garg, th, ph, direct[1], post[1], o.P_direct[1],
                                o.P_post[1], td, o.trace_distance, diff)
    rep.summary["points"] = len(tab.rows)
    rep.summary["max_abs_diff"] = worst


_RUNNERS = {
    "cmo-probe": _run_cmo_probe,
    "two-measurement": _run_two_measurement,
    "classical-check": _run_classical_check,
    "coherence-audit": _run_coherence_audit,
    "qubit-sweep": _run_qubit_sweep,
}


def dumps(report: RunReport, include_wall_time=True) -> str:
    return json.dumps(report.to_dict(include_wall_time), indent=2)


def _csv_cell(v):
    if isinstance(v, float):
        return "" if not math.isfinite(v) else f"{v:.17g}"
    return v


def emit(report: RunReport, fmt: str, path) -> list[Path]:
    """Write a report; JSON goes to one file, CSV to one file per table inside ``path``."""
    path = Path(path)
    if fmt == "json":
        if path.parent:
            path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dumps(report) + "\n", encoding="utf-8")
        return [path]
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}")
    path.mkdir(parents=True, exist_ok=True)
    written = []
    tables = dict(report.tables)
    summary = Table(["key", "value"], [[k, _plain(v)] for k, v in report.summary.items()])
    summary.rows += [["seed", report.seed], ["version", report.version], ["wall_time", report.wall_time]]
    tables["summary"] = summary
    if report.coherence:
        tables["coherence"] = Table(["key", "value"], [[k, v] for k, v in report.coherence.items()])
    for name, table in tables.items():
        target = path / f"{name}.csv"
        with target.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(table.columns)
            for row in table.rows:
                writer.writerow([_csv_cell(v) for v in row])
        written.append(target)
    return written
