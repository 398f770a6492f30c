"""Config-driven experiment runner.

``poc run <cfg>`` executes a toy, HEV, or custom experiment and writes CSV
results, deterministic SVG charts, and a run manifest; ``poc audit`` replays
the monotonicity audit over results files; ``poc chart`` renders charts from
a results file and a chart-spec file.

Exit codes: 0 success (a nonempty violations file is a finding, not an
error), 2 invalid configuration or input (the message names the field),
3 runtime failure.  ``POC_OUT``, ``POC_SEED``, and ``POC_THREADS`` override
config values; explicit flags win over the environment.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
from pathlib import Path

from . import __version__
from .belief import epsilon_mix
from .charts import Panel, Series, render_figure
from .config import ExperimentConfig, load_config
from .environment import (
    EnvironmentModel,
    dataset_to_rows,
    generate_dataset,
    observable_truth,
    observation_support,
)
from .errors import CapacityError, ConfigError, DomainError, NumericError, SupportError
from .hev import DrivingCycle, default_cycle, default_predictor_matrix, hev_experiment
from .measures import (
    ControlProblem,
    MeasureKind,
    empirical_predictor_measure,
    exact_predictor_measure,
    monotonicity_audit,
)
from .model import ControlledSystem, CostStructure
from .predictors import (
    ar_surrogate_predictor,
    blind_predictor,
    constant_velocity_predictor,
    exponential_decay_predictor,
    linear_decay_predictor,
    stochastic_linear_decay_predictor,
    truth_predictor,
    zero_mean_gaussian_predictor,
)
from .solver import SolverCache, StateGrid, expected_cost_under_truth, solve_tree_policy
from .toy import toy_audit, toy_sweep

import numpy as np


def fmt_number(v):
    """Shortest round-trip decimal; inf/nan spelled literally."""
    if isinstance(v, str):
        return v
    f = float(v)
    if math.isnan(f):
        return "nan"
    if math.isinf(f):
        return "inf" if f > 0 else "-inf"
    if f == int(f) and abs(f) < 1e16:
        return repr(f)
    return repr(f)


def parse_number(text):
    t = text.strip()
    if t == "inf":
        return math.inf
    if t == "-inf":
        return -math.inf
    if t == "nan":
        return math.nan
    return float(t)


def write_csv(path, header, rows):
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt_number(v) if not isinstance(v, str) else v for v in row])


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if not rows:
        raise DomainError(f"{path}: empty CSV")
    return rows[0], rows[1:]


def write_manifest(out_dir: Path, config_digest, seed, wall_time, outputs):
    entries = []
    for name in outputs:
        data = (out_dir / name).read_bytes()
        entries.append(
            {"path": name, "sha256": hashlib.sha256(data).hexdigest(), "bytes": len(data)}
        )
    manifest = {
        "config_digest": config_digest,
        "seed": seed,
        "version": __version__,
        "numpy_version": np.__version__,
        "wall_time_s": round(wall_time, 3),
        "outputs": entries,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _audit_csv_rows(audits, entries_by_id_kind):
    rows = []
    for kind_name, report in audits:
        for pid, measure, cost_val in report.entries:
            rows.append([str(pid), kind_name, measure, cost_val])
    return rows


def _violations_rows(report):
    return [
        [str(v.id_i), str(v.id_j), v.measure_i, v.measure_j, v.cost_i, v.cost_j]
        for v in report.violations
    ]


# --- run: toy -----------------------------------------------------------


def run_toy(cfg: ExperimentConfig, out_dir: Path):
    rows, discrepancies = toy_sweep(cfg.toy)
    header = [
        "p_b", "cost", "mse", "regret", "loglik",
        "cost_analytic", "mse_analytic", "regret_analytic", "loglik_analytic",
        "p", "u0", "u0_analytic",
    ]
    table = [
        [r.p_b, r.cost, r.mse, r.regret, r.loglik,
         r.cost_analytic, r.mse_analytic, r.regret_analytic, r.loglik_analytic,
         r.p, r.u0, r.u0_analytic]
        for r in rows
    ]
    write_csv(out_dir / "toy_sweep.csv", header, table)
    outputs = ["toy_sweep.csv"]

    worst = max(v for v in discrepancies.values())
    print(
        "analytic-vs-pipeline max discrepancy: "
        + " ".join(f"{k}={v:.3g}" for k, v in discrepancies.items())
    )

    entries, audits = toy_audit(cfg.toy)
    kind_names = {MeasureKind.MSE: "mse", MeasureKind.REGRET: "regret",
                  MeasureKind.LOG_LIKELIHOOD: "loglik"}
    audit_rows = []
    for kind, report in audits.items():
        name = kind_names[kind]
        audit_rows.extend(
            [[fmt_number(pid), name, m, c] for pid, m, c in report.entries]
        )
        vname = f"toy_violations_{name}.csv"
        write_csv(out_dir / vname,
                  ["i", "j", "measure_i", "measure_j", "cost_i", "cost_j"],
                  _violations_rows(report))
        outputs.append(vname)
        print(
            f"audit[{name}]: violations={report.violation_count} "
            f"best-P-lowest-C={'yes' if report.best_coincide else 'no'} "
            f"kendall={report.kendall:.4f}"
        )
    write_csv(out_dir / "toy_audit.csv",
              ["predictor_id", "measure_kind", "measure_value", "expected_cost"],
              audit_rows)
    outputs.append("toy_audit.csv")

    if cfg.charts:
        audit_p = cfg.toy.audit_p
        sel = [r for r in rows if r.p == audit_p] or rows
        pbs = [r.p_b for r in sel]

        def scaled(vals):
            finite = [v for v in vals if math.isfinite(v)]
            lo, hi = min(finite), max(finite)
            span = hi - lo if hi > lo else 1.0
            return [(v - lo) / span if math.isfinite(v) else math.inf for v in vals]

        panels = [
            Panel(
                title=f"cost and scaled measures (p={audit_p:g})",
                xlabel="p_b", ylabel="value",
                series=(
                    Series("cost", tuple(pbs), tuple(r.cost for r in sel)),
                    Series("mse*", tuple(pbs), tuple(scaled([r.mse for r in sel]))),
                    Series("regret*", tuple(pbs), tuple(scaled([r.regret for r in sel]))),
                    Series("loglik*", tuple(pbs), tuple(scaled([r.loglik for r in sel]))),
                ),
            )
        ]
        for col, label in (("mse", "MSE"), ("regret", "regret"), ("loglik", "log-likelihood")):
            panels.append(
                Panel(
                    title=f"{label} vs cost",
                    xlabel=label, ylabel="cost",
                    series=(
                        Series("sweep", tuple(getattr(r, col) for r in sel),
                               tuple(r.cost for r in sel), kind="scatter"),
                    ),
                )
            )
        (out_dir / "toy_sweep.svg").write_text(render_figure(panels), encoding="utf-8")
        outputs.append("toy_sweep.svg")
    return outputs, worst


# --- run: hev -----------------------------------------------------------


def _build_hev_predictors(entries):
    if not entries:
        return default_predictor_matrix()
    out = []
    for i, entry in enumerate(entries):
        ptype = entry["type"]
        if ptype == "d1":
            out.append((f"d1#{i}", "d1", "", constant_velocity_predictor()))
        elif ptype == "d2":
            gamma = float(entry.get("gamma", 5.0))
            out.append((f"d2#{i}", "d2", f"gamma={gamma:g}", linear_decay_predictor(gamma)))
        elif ptype == "d3":
            lam = float(entry.get("lambda", math.exp(-1)))
            out.append((f"d3#{i}", "d3", f"lambda={lam:g}", exponential_decay_predictor(lam)))
        elif ptype == "s1":
            sigma = float(entry.get("sigma", 0.4))
            out.append((f"s1#{i}", "s1", f"sigma={sigma:g}", zero_mean_gaussian_predictor(sigma)))
        elif ptype == "s2":
            sigma = float(entry.get("sigma", 0.4))
            gamma = float(entry.get("gamma", 5.0))
            out.append((f"s2#{i}", "s2", f"sigma={sigma:g};gamma={gamma:g}",
                        stochastic_linear_decay_predictor(sigma, gamma)))
        elif ptype == "ar":
            coeffs = entry.get("coeffs")
            from .hev import DEFAULT_AR_COEFFS

            coeffs = DEFAULT_AR_COEFFS if coeffs is None else tuple(float(c) for c in coeffs)
            out.append((f"ar#{i}", "ar", "coeffs=custom", ar_surrogate_predictor(coeffs)))
        else:
            raise ConfigError(f"hev.predictors[{i}].type", f"unsupported type {ptype!r}")
    return out


def load_cycle(spec: str) -> DrivingCycle:
    if spec == "bundled":
        return default_cycle()
    header, rows = read_csv(spec)
    if header[:2] != ["t", "v"]:
        raise ConfigError("hev.cycle", f"{spec}: cycle CSV must have header t,v")
    velocities = [parse_number(r[1]) for r in rows]
    return DrivingCycle(velocities=tuple(velocities))


def run_hev(cfg: ExperimentConfig, out_dir: Path):
    cycle = load_cycle(cfg.hev.cycle)
    predictors = _build_hev_predictors(cfg.hev.predictors)
    result = hev_experiment(
        model=cfg.hev.model, cycle=cycle, predictors=predictors,
        horizon=cfg.hev.horizon, x0_soc=cfg.hev.x0_soc,
        soc_bounds=cfg.hev.soc_bounds, n_soc=cfg.hev.n_soc,
        n_controls=cfg.hev.n_controls, threads=cfg.threads,
    )
    header = ["predictor_id", "family", "params", "cost", "mse", "loglik", "regret",
              "loglik_finite_mean", "loglik_infinite", "soc_saturations"]
    rows = [
        [r.predictor_id, r.family, r.params, r.cost, r.mse, r.loglik, r.regret,
         r.loglik_finite_mean, r.loglik_infinite, r.soc_saturations]
        for r in result.rows
    ]
    write_csv(out_dir / "hev_results.csv", header, rows)
    outputs = ["hev_results.csv"]
    print(f"posterior-optimal cost: {result.posterior_cost!r}")

    audit_rows = []
    for name, report in result.audits.items():
        audit_rows.extend([[str(pid), name, m, c] for pid, m, c in report.entries])
        vname = f"hev_violations_{name.replace(':', '_')}.csv"
        write_csv(out_dir / vname,
                  ["i", "j", "measure_i", "measure_j", "cost_i", "cost_j"],
                  _violations_rows(report))
        outputs.append(vname)
        print(
            f"audit[{name}]: violations={report.violation_count} "
            f"best-P-lowest-C={'yes' if report.best_coincide else 'no'} "
            f"kendall={report.kendall:.4f}"
        )
    write_csv(out_dir / "hev_audit.csv",
              ["predictor_id", "measure_kind", "measure_value", "expected_cost"],
              audit_rows)
    outputs.append("hev_audit.csv")

    if cfg.charts:
        fams = {"d": [], "s": []}
        for r in result.rows:
            fams["d" if r.family in ("d1", "d2", "d3", "ar") else "s"].append(r)
        panels = []
        for key, label in (("d", "deterministic"), ("s", "stochastic")):
            rows_f = fams[key]
            if rows_f:
                panels.append(Panel(
                    title=f"MSE vs cost ({label})",
                    xlabel="mse", ylabel="cost",
                    series=(Series(label, tuple(r.mse for r in rows_f),
                                   tuple(r.cost for r in rows_f), kind="scatter"),),
                ))
        for fam in ("s1", "s2"):
            rows_f = [r for r in result.rows if r.family == fam]
            if rows_f:
                panels.append(Panel(
                    title=f"log-likelihood vs cost ({fam})",
                    xlabel="loglik (finite mean)", ylabel="cost",
                    series=(Series(fam, tuple(r.loglik_finite_mean for r in rows_f),
                                   tuple(r.cost for r in rows_f), kind="scatter"),),
                ))
        (out_dir / "hev_plot.svg").write_text(render_figure(panels), encoding="utf-8")
        outputs.append("hev_plot.svg")
    return outputs


# --- run: custom ---------------------------------------------------------


def build_custom_environment(env_raw: dict) -> EnvironmentModel:
    def need(key, kind):
        if key not in env_raw:
            raise ConfigError(f"custom.environment.{key}", "missing required field")
        value = env_raw[key]
        if not isinstance(value, kind):
            raise ConfigError(f"custom.environment.{key}", f"expected {kind.__name__}")
        return value

    z_values = tuple(tuple(z) if isinstance(z, list) else z for z in need("z_values", list))
    r_values = tuple(tuple(r) if isinstance(r, list) else r for r in need("r_values", list))
    z0_probs = tuple(float(p) for p in need("z0_probs", list))
    r_probs = tuple(float(p) for p in need("r_probs", list))
    f_e = need("f_e", list)
    h_o = need("h_o", list)
    h_w = need("h_w", list)
    horizon = env_raw.get("horizon")
    if not isinstance(horizon, int) or horizon < 1:
        raise ConfigError("custom.environment.horizon", "expected a positive integer")
    zi = {z: i for i, z in enumerate(z_values)}
    ri = {r: i for i, r in enumerate(r_values)}
    try:
        return EnvironmentModel(
            z_values=z_values, z0_probs=z0_probs, r_values=r_values, r_probs=r_probs,
            f_E=lambda z, r: z_values[f_e[zi[z]][ri[r]]],
            h_o=lambda z, r: h_o[zi[z]][ri[r]],
            h_w=lambda z, r: tuple(np.atleast_1d(h_w[zi[z]][ri[r]])),
            horizon=horizon,
        )
    except (DomainError, IndexError, KeyError, TypeError) as exc:
        raise ConfigError("custom.environment", f"invalid environment tables: {exc}") from exc


def build_custom_system(sys_raw: dict, horizon: int):
    def num(key, default):
        value = sys_raw.get(key, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"custom.system.{key}", f"expected a number, got {value!r}")
        return float(value)

    c_lo = num("control_min", -1.0)
    c_hi = num("control_max", 1.0)
    c_n = int(num("control_count", 21))
    s_lo = num("state_min", -5.0)
    s_hi = num("state_max", 5.0)
    s_n = int(num("state_count", 51))
    target = num("terminal_target", 0.0)
    w_index = int(num("w_index", 0))
    system = ControlledSystem(
        state_dim=1, disturbance_dim=1, control_dim=1,
        transition=lambda X, w, U: X + w[w_index] + U[:, :1],
        control_set=np.linspace(c_lo, c_hi, c_n).reshape(-1, 1),
        horizon=horizon,
    )
    cost = CostStructure.time_invariant(
        stage_cost=lambda X, w, U: np.zeros(X.shape[0]),
        terminal_cost=lambda X: (X[:, 0] - target) ** 2,
        horizon=horizon,
    )
    grid = StateGrid.uniform(s_lo, s_hi, s_n)
    return system, cost, grid


def run_custom(cfg: ExperimentConfig, out_dir: Path):
    env = build_custom_environment(dict(cfg.custom.environment))
    wdim = env.disturbance_dim
    sys_raw = dict(cfg.custom.system)
    system, cost, grid = build_custom_system(sys_raw, env.horizon)
    if wdim != 1:
        raise ConfigError("custom.environment.h_w", "custom runs support 1-d disturbances")
    predictors = []
    for i, entry in enumerate(cfg.custom.predictors):
        if entry["type"] == "truth":
            predictors.append((f"truth#{i}", truth_predictor(env)))
        else:
            from .environment import unconditional_law

            predictors.append((f"blind#{i}", blind_predictor(unconditional_law(env))))
    cache = SolverCache()
    problem = ControlProblem(system=system, cost=cost, x0=(0.0,), grid=grid,
                             epsilon=cfg.solver.epsilon_mix, cache=cache)
    support = observation_support(env)
    rows = []
    for pid, predictor in predictors:
        total_cost = 0.0
        e_m = e_r = 0.0
        e_p = 0.0
        for o, po in support.items():
            truth = observable_truth(env, o)
            belief = predictor.predict(o)
            mixed = epsilon_mix(belief, list(truth.scenarios), cfg.solver.epsilon_mix)
            policy = solve_tree_policy(system, cost, mixed, (0.0,), grid, cache=cache)
            total_cost += po * expected_cost_under_truth(system, cost, policy, truth, (0.0,))
            e_m += po * exact_predictor_measure(MeasureKind.MSE, belief, truth)
            e_r += po * exact_predictor_measure(MeasureKind.REGRET, belief, truth, problem=problem)
            lg = exact_predictor_measure(MeasureKind.LOG_LIKELIHOOD, belief, truth)
            e_p = math.inf if math.isinf(lg) or math.isinf(e_p) else e_p + po * lg
        rows.append([pid, total_cost, e_m, e_r, e_p])
    write_csv(out_dir / "custom_results.csv",
              ["predictor_id", "cost", "mse", "regret", "loglik"], rows)
    outputs = ["custom_results.csv"]
    if cfg.custom.dataset_count > 0:
        pairs = generate_dataset(env, cfg.custom.dataset_count, cfg.seed)
        header, data_rows = dataset_to_rows(pairs)
        write_csv(out_dir / "custom_dataset.csv", header, data_rows)
        outputs.append("custom_dataset.csv")
        emp_rows = []
        for pid, predictor in predictors:
            rep = empirical_predictor_measure(MeasureKind.MSE, predictor, pairs,
                                              predictor_id=pid)
            emp_rows.append([pid, "mse", rep.value, rep.sample_count])
        write_csv(out_dir / "custom_empirical.csv",
                  ["predictor_id", "measure_kind", "value", "samples"], emp_rows)
        outputs.append("custom_empirical.csv")
    if len(rows) >= 2:
        report = monotonicity_audit([(r[0], r[2], r[1]) for r in rows])
        write_csv(out_dir / "custom_violations_mse.csv",
                  ["i", "j", "measure_i", "measure_j", "cost_i", "cost_j"],
                  _violations_rows(report))
        outputs.append("custom_violations_mse.csv")
    return outputs


# --- audit / chart subcommands -------------------------------------------


def run_audit(paths, measure_filter, out_dir: Path):
    kinds = ("mse", "regret", "loglik") if measure_filter is None else (measure_filter,)
    written = []
    for path in paths:
        header, rows = read_csv(path)
        if len(rows) < 2:
            raise DomainError(f"{path}: need at least 2 result rows to audit")
        index = {h: i for i, h in enumerate(header)}
        id_col = "predictor_id" if "predictor_id" in index else "p_b"
        if id_col not in index or "cost" not in index:
            raise DomainError(f"{path}: results CSV needs '{id_col}' and 'cost' columns")
        stem = Path(path).stem
        for kind in kinds:
            if kind not in index:
                if measure_filter is not None:
                    raise DomainError(f"{path}: no column named {kind!r}")
                continue
            entries = [
                (row[index[id_col]], parse_number(row[index[kind]]),
                 parse_number(row[index["cost"]]))
                for row in rows
            ]
            report = monotonicity_audit(entries)
            vname = f"{stem}_audit_{kind}_violations.csv"
            write_csv(out_dir / vname,
                      ["i", "j", "measure_i", "measure_j", "cost_i", "cost_j"],
                      _violations_rows(report))
            written.append(vname)
            print(
                f"{path} [{kind}]: violations={report.violation_count} "
                f"best-P-lowest-C={'yes' if report.best_coincide else 'no'} "
                f"kendall={report.kendall:.4f} "
                f"measure_argmin={','.join(str(i) for i in report.measure_argmin_ids)} "
                f"cost_argmin={','.join(str(i) for i in report.cost_argmin_ids)}"
            )
    return written


def run_chart(path, spec_path, out_dir: Path):
    header, rows = read_csv(path)
    if not rows:
        raise DomainError(f"{path}: no data rows to chart")
    index = {h: i for i, h in enumerate(header)}
    spec_raw = load_chart_spec(spec_path)
    panels = []
    for i, praw in enumerate(spec_raw.get("panels", [])):
        x_col = praw.get("x")
        if x_col not in index:
            raise DomainError(f"chart spec panel {i}: no column named {x_col!r}")
        y_cols = praw.get("y", [])
        series = []
        for y_col in y_cols:
            if y_col not in index:
                raise DomainError(f"chart spec panel {i}: no column named {y_col!r}")
            series.append(Series(
                label=y_col,
                xs=tuple(parse_number(r[index[x_col]]) for r in rows),
                ys=tuple(parse_number(r[index[y_col]]) for r in rows),
                kind=praw.get("kind", "line"),
            ))
        panels.append(Panel(
            title=praw.get("title", f"panel {i}"),
            xlabel=praw.get("xlabel", x_col),
            ylabel=praw.get("ylabel", ",".join(y_cols)),
            series=tuple(series),
        ))
    if not panels:
        raise DomainError("chart spec defines no panels")
    out_name = spec_raw.get("out", Path(path).stem + ".svg")
    (out_dir / out_name).write_text(
        render_figure(panels, columns=int(spec_raw.get("columns", 2))), encoding="utf-8"
    )
    return [out_name]


def load_chart_spec(path):
    import sys as _sys

    if _sys.version_info >= (3, 11):
        import tomllib as _toml
    else:
        import tomli as _toml
    text = Path(path).read_text(encoding="utf-8")
    if str(path).endswith(".json") or text.lstrip().startswith("{"):
        return json.loads(text)
    return _toml.loads(text)


# --- entry point ----------------------------------------------------------


def _with_env_overrides(args):
    if args.out is None:
        args.out = os.environ.get("POC_OUT")
    if getattr(args, "seed", None) is None:
        env_seed = os.environ.get("POC_SEED")
        args.seed = int(env_seed) if env_seed is not None else None
    if getattr(args, "threads", None) is None:
        env_threads = os.environ.get("POC_THREADS")
        args.threads = int(env_threads) if env_threads is not None else None
    return args


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="poc",
        description="Predictive-optimal-control experiments: run, audit, chart.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment configuration")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output directory (overrides config)")
    p_run.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")
    p_run.add_argument("--threads", type=int, default=None)

    p_audit = sub.add_parser("audit", help="monotonicity audit of results CSVs")
    p_audit.add_argument("csv", nargs="+")
    p_audit.add_argument("--measure", choices=("mse", "regret", "loglik"), default=None)
    p_audit.add_argument("--out", default=None)

    p_chart = sub.add_parser("chart", help="render SVG charts from a results CSV")
    p_chart.add_argument("csv")
    p_chart.add_argument("--spec", required=True)
    p_chart.add_argument("--out", default=None)

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(_with_env_overrides(args))
        if args.command == "audit":
            args = _with_env_overrides_simple(args)
            out_dir = Path(args.out or Path(args.csv[0]).parent)
            out_dir.mkdir(parents=True, exist_ok=True)
            run_audit(args.csv, args.measure, out_dir)
            return 0
        if args.command == "chart":
            args = _with_env_overrides_simple(args)
            out_dir = Path(args.out or Path(args.csv).parent)
            out_dir.mkdir(parents=True, exist_ok=True)
            run_chart(args.csv, args.spec, out_dir)
            return 0
    except ConfigError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return 2
    except (DomainError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CapacityError, NumericError, SupportError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 3
    return 2


def _with_env_overrides_simple(args):
    if args.out is None:
        args.out = os.environ.get("POC_OUT")
    return args


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.out is not None:
        cfg = _replace_cfg(cfg, out_dir=args.out)
    if args.seed is not None:
        cfg = _replace_cfg(cfg, seed=args.seed)
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("threads", "must be at least 1")
        cfg = _replace_cfg(cfg, threads=args.threads)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    if cfg.kind == "toy":
        outputs, _ = run_toy(cfg, out_dir)
    elif cfg.kind == "hev":
        outputs = run_hev(cfg, out_dir)
    else:
        outputs = run_custom(cfg, out_dir)
    write_manifest(out_dir, cfg.digest(), cfg.seed, time.perf_counter() - started, outputs)
    print(f"wrote {len(outputs) + 1} files to {out_dir}")
    return 0


def _replace_cfg(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    import dataclasses

    return dataclasses.replace(cfg, **kw)


if __name__ == "__main__":
    raise SystemExit(main())
