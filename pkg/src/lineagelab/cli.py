"""Experiment runner: named experiments, declarative configs, CSV artifacts.

Subcommands: exact, recursion, simulate, ftable, minismc, crs.  Every
parameter can come from a ``key = value`` config file (``--config``) with
command-line flags taking precedence.  Each run writes its artifacts plus a
``manifest.json`` recording the resolved parameters, their hash, and the
package version; no timestamps, so identical configs reproduce identical
bytes.  Column layouts are documented in FORMATS.md.

Exit codes: 0 success, 2 invalid configuration, 3 run aborted by a
bottlenecked generation.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .crs import EnumeratedTarget, clt_experiment, iid_ingredient
from .diagrams import (
    WeightSchedule,
    active_count_trajectories,
    decorate,
    dominance_threshold,
    f_table,
    sample_diagram,
    trial_rng,
)
from .exact import (
    EXACT_SIZE_LIMIT,
    a_sequence,
    b_sequence,
    expected_ancestors_exact,
    expected_ancestors_float,
)
from .graphs import grid_graph, read_edge_list
from .partition import RunAbortedError, enumerate_balanced_partitions, run_mini_smc

_STREAM_SIMULATE = 5

EXPERIMENTS = ("exact", "recursion", "simulate", "ftable", "minismc", "crs")


class ConfigError(Exception):
    pass


def _read_config(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"cannot read config file: {err}") from err
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _resolve(args: argparse.Namespace, config: dict[str, str], defaults: dict) -> dict:
    """Flags win over config, config over defaults."""
    params = {}
    for key, default in defaults.items():
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            params[key] = flag_val
        elif key in config:
            params[key] = _coerce(config[key], default, key)
        else:
            params[key] = default
    unknown = set(config) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = [k for k, v in params.items() if v is None]
    if missing:
        raise ConfigError(f"missing required parameters: {missing}")
    return params


def _coerce(text: str, default, key: str):
    kind = type(default)
    try:
        if isinstance(default, bool):
            return text.lower() in ("1", "true", "yes")
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, (list, tuple)):
            return _parse_list(text, key)
        return text
    except ValueError as err:
        raise ConfigError(f"bad value for {key}: {text!r} ({err})") from err


_FLOAT_LISTS = {"phis"}


def _parse_list(text: str, key: str):
    items = [t for t in text.replace(",", " ").split() if t]
    if key in _FLOAT_LISTS:
        return [float(t) for t in items]
    return [int(t) for t in items]


def _weight_schedule(spec: str) -> WeightSchedule:
    if spec == "uniform":
        return WeightSchedule.uniform()
    if spec.startswith("spike:"):
        try:
            return WeightSchedule.spike(float(spec.split(":", 1)[1]))
        except ValueError as err:
            raise ConfigError(f"bad spike ratio in {spec!r}") from err
    raise ConfigError(f"unknown weight mode {spec!r}; use 'uniform' or 'spike:R'")


def _load_graph(spec: str, weights_path: str | None):
    if spec.startswith("grid:"):
        dims = spec.split(":", 1)[1]
        try:
            rows, cols = (int(x) for x in dims.lower().split("x"))
        except ValueError as err:
            raise ConfigError(f"bad grid spec {spec!r}; use grid:RxC") from err
        if weights_path is not None:
            from .graphs import read_node_weights

            g = grid_graph(rows, cols)
            return grid_graph(rows, cols, read_node_weights(weights_path, g.num_nodes))
        return grid_graph(rows, cols)
    return read_edge_list(spec, weights_path)


def _fmt(value) -> str:
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def _write_manifest(out: Path, experiment: str, params: dict) -> None:
    # workers is execution-only: it cannot change any artifact, so it is not
    # part of the experiment's identity
    recorded = {k: v for k, v in params.items() if k != "workers"}
    canonical = json.dumps(
        {"experiment": experiment, "parameters": recorded}, sort_keys=True, default=str
    )
    manifest = {
        "experiment": experiment,
        "parameters": {k: recorded[k] for k in sorted(recorded)},
        "config_hash": hashlib.sha256(canonical.encode()).hexdigest(),
        "tool_version": __version__,
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n",
        encoding="utf-8",
    )


# --------------------------------------------------------------------------
# experiments
# --------------------------------------------------------------------------

def _require(ok: bool, message: str) -> None:
    if not ok:
        raise ConfigError(message)


def _validate(name: str, p: dict) -> None:
    if name == "exact":
        _require(1 <= p["s_max"] <= EXACT_SIZE_LIMIT, f"s_max must lie in [1, {EXACT_SIZE_LIMIT}]")
        _require(2 <= p["k_max"] <= EXACT_SIZE_LIMIT, f"k_max must lie in [2, {EXACT_SIZE_LIMIT}]")
    elif name == "recursion":
        _require(all(S >= 2 for S in p["s_values"]), "every S must be >= 2")
        _require(p["i_max"] >= 0, "i_max must be >= 0")
    elif name == "simulate":
        _require(p["s"] >= 1 and p["k"] >= 3, "need s >= 1 and k >= 3")
        _require(p["trials"] >= 1, "trials must be >= 1")
        _require(all(0 < phi <= 1 for phi in p["phis"]), "shares must lie in (0, 1]")
        _require(all(1 <= j <= p["k"] - 1 for j in p["js"]), "j grid must lie in [1, k-1]")
    elif name == "ftable":
        _require(all(S >= 1 for S in p["s_values"]), "every S must be >= 1")
        _require(all(0 < phi <= 1 for phi in p["phis"]), "shares must lie in (0, 1]")
        _require(p["trials"] >= 1, "trials must be >= 1")
        _require(p["max_levels"] >= 0, "max_levels must be >= 0 (0 = automatic)")
    elif name == "minismc":
        _require(p["k"] >= 2 and p["s"] >= 1, "need k >= 2 and s >= 1")
        _require(p["runs"] >= 1, "runs must be >= 1")
        _require(p["pop_tol"] >= 0, "pop_tol must be >= 0")
    elif name == "crs":
        _require(p["k"] >= 2, "k must be >= 2")
        _require(all(S >= 2 for S in p["s_values"]), "every S must be >= 2")
        _require(p["replications"] >= 2, "replications must be >= 2")
        _require(0 < p["alpha"] < 0.5, "alpha must lie in (0, 1/2)")
        _require(p["exponent"] == 0 or 0 < p["exponent"] < 1,
                 "exponent must be 0 (off) or lie in (0, 1)")
    _require(p.get("workers", 1) >= 1, "workers must be >= 1")


def _run_exact(params: dict, out: Path) -> None:
    rows = []
    for S in range(1, params["s_max"] + 1):
        for k in range(2, params["k_max"] + 1):
            exact = expected_ancestors_exact(S, k)
            rows.append([S, k, exact, float(exact)])
    _write_csv(out / "exact_table.csv", ["S", "k", "A_exact", "A_float"], rows)


def _run_recursion(params: dict, out: Path) -> None:
    rows = []
    for S in params["s_values"]:
        seq = a_sequence(S, params["i_max"])
        for i, val in enumerate(seq.values):
            rows.append(["a", S, i, float(val)])
    for i, val in enumerate(b_sequence(params["i_max"]).values):
        rows.append(["b", "", i, float(val)])
    _write_csv(out / "recursion_table.csv", ["kind", "S", "i", "value"], rows)


def _run_simulate(params: dict, out: Path) -> None:
    S, k = params["s"], params["k"]
    schedule = _weight_schedule(params["weights"])
    phis = params["phis"]
    js = params["js"]
    trials, seed, workers = params["trials"], params["seed"], params["workers"]
    header = ["S", "k", "weight_mode", "trial", "A"]
    header += [f"F_{phi:g}" for phi in phis]
    header += [f"G_{j}" for j in js]
    label = schedule.label()
    rows = []
    a_values = np.empty(trials)
    if phis or js:
        for trial in range(trials):
            rng = trial_rng(seed, _STREAM_SIMULATE, trial)
            diagram = sample_diagram(S, k, schedule, rng)
            _, deco = decorate(diagram)
            top_active = int((deco.level(k - 1) > 0).sum())
            a_values[trial] = top_active
            row = [S, k, label, trial, top_active]
            for phi in phis:
                threshold = dominance_threshold(phi, S)
                level = next(
                    (i for i in range(1, k) if deco.level(i).max() >= threshold), ""
                )
                row.append(level)
            for j in js:
                row.append(int(deco.level(k - j).max()))
            rows.append(row)
    else:
        traj = active_count_trajectories(S, k, schedule, trials, seed, workers)
        a_values = traj[:, -1].astype(float)
        rows = [[S, k, label, t, int(a)] for t, a in enumerate(a_values)]
    _write_csv(out / "trials.csv", header, rows)

    mean = float(a_values.mean())
    stderr = float(a_values.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    exact = (
        float(expected_ancestors_exact(S, k))
        if max(S, k) <= EXACT_SIZE_LIMIT
        else expected_ancestors_float(S, k)
    )
    _write_csv(
        out / "summary.csv",
        ["S", "k", "weight_mode", "trials", "mean_A", "stderr_A", "exact_A"],
        [[S, k, label, trials, mean, stderr, exact]],
    )


def _run_ftable(params: dict, out: Path) -> None:
    schedule = _weight_schedule(params["weights"])
    rows = f_table(
        params["s_values"],
        params["phis"],
        schedule,
        params["trials"],
        params["seed"],
        max_levels=params["max_levels"] or None,
        workers=params["workers"],
    )
    label = schedule.label()
    _write_csv(
        out / "ftable.csv",
        ["S", "phi", "weight_mode", "trials", "mean_F", "occurrence_rate"],
        [
            [r.S, r.phi, label, r.trials, "" if r.mean_level is None else r.mean_level,
             r.occurrence_rate]
            for r in rows
        ],
    )


def _run_minismc(params: dict, out: Path) -> None:
    g = _load_graph(params["graph"], params["node_weights"] or None)
    k, S = params["k"], params["s"]
    runs = params["runs"]
    plan_rows, weight_rows, report_rows, gdj_rows = [], [], [], []
    prediction = S / expected_ancestors_float(S, k)
    for run in range(runs):
        result = run_mini_smc(
            g, k, S, params["rho"], params["pop_tol"], params["seed"] + run,
            workers=params["workers"],
        )
        for p, plan in enumerate(result.plans):
            for node, district in enumerate(plan.assignment):
                plan_rows.append([run, p, node, int(district)])
        for gen in range(2, k):
            for j in range(S):
                weight_rows.append(
                    [run, gen, j, float(result.log_weights[gen - 2, j]),
                     float(result.resampling_probs[gen - 2, j])]
                )
        rep = result.report
        report_rows.append(
            [run, rep.total_districts, rep.distinct_districts,
             rep.average_multiplicity, rep.max_multiplicity,
             rep.slot_average_multiplicity,
             rep.per_index[0].distinct, rep.initial_average_multiplicity,
             prediction, int(result.parent_redraws.sum())]
        )
        for j, gval in enumerate(rep.shared_counts, start=1):
            gdj_rows.append([run, j, gval])
    _write_csv(out / "plans.csv", ["run", "plan", "node", "district"], plan_rows)
    _write_csv(
        out / "weights.csv",
        ["run", "generation", "particle", "log_weight", "prob"],
        weight_rows,
    )
    _write_csv(
        out / "report.csv",
        ["run", "total_districts", "distinct_districts", "average_multiplicity",
         "max_multiplicity", "slot_average_multiplicity", "initial_distinct",
         "initial_average_multiplicity", "predicted_average_multiplicity",
         "parent_redraws"],
        report_rows,
    )
    _write_csv(out / "gdj.csv", ["run", "j", "G"], gdj_rows)


def _run_crs(params: dict, out: Path) -> None:
    g = _load_graph(params["graph"], None)
    plans = enumerate_balanced_partitions(g, params["k"], params["pop_tol"])
    target = EnumeratedTarget.uniform(len(plans))
    h = np.zeros(len(plans))
    h[params["h_plan"] % len(plans)] = 1.0
    result = clt_experiment(
        h,
        target,
        iid_ingredient(target),
        params["s_values"],
        params["replications"],
        params["seed"],
        alpha=params["alpha"],
        repeat_exponent=params["exponent"] if params["exponent"] > 0 else None,
        workers=params["workers"],
    )
    raw_rows = [
        [S, rep, float(y)]
        for S in result.raw
        for rep, y in enumerate(result.raw[S])
    ]
    _write_csv(out / "crs_raw.csv", ["S", "replication", "Y"], raw_rows)
    _write_csv(
        out / "crs_summary.csv",
        ["S", "replications", "repeats", "repeat_fraction", "mean_Y",
         "variance_Y", "ad_statistic"],
        [
            [r.S, r.replications, r.repeats, r.repeat_fraction, r.mean,
             r.variance, r.ad_statistic]
            for r in result.rows
        ],
    )


_DEFAULTS: dict[str, dict] = {
    "exact": {"s_max": 6, "k_max": 6, "seed": 0},
    "recursion": {"s_values": [10, 100, 1000, 5000], "i_max": 10, "seed": 0},
    "simulate": {
        "s": 20, "k": 10, "weights": "uniform", "trials": 1000,
        "phis": [], "js": [], "seed": 0, "workers": 1,
    },
    "ftable": {
        "s_values": [10, 100], "phis": [0.25, 0.5, 0.75, 1.0],
        "weights": "uniform", "trials": 1000, "max_levels": 0,
        "seed": 0, "workers": 1,
    },
    "minismc": {
        "graph": "grid:6x6", "node_weights": "", "k": 6, "s": 100,
        "rho": 1.0, "pop_tol": 0.0, "runs": 1, "seed": 0, "workers": 1,
    },
    "crs": {
        "graph": "grid:3x3", "k": 3, "pop_tol": 0.0, "h_plan": 0,
        "s_values": [100, 1000, 10000], "replications": 500,
        "alpha": 1.0 / 3.0, "exponent": 0.0, "seed": 0, "workers": 1,
    },
}

_RUNNERS = {
    "exact": _run_exact,
    "recursion": _run_recursion,
    "simulate": _run_simulate,
    "ftable": _run_ftable,
    "minismc": _run_minismc,
    "crs": _run_crs,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lineagelab",
        description="Ancestor-collapse and repetition experiments; see FORMATS.md "
        "for artifact layouts.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name, defaults in _DEFAULTS.items():
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", default=None, help="key = value config file")
        p.add_argument("--out", default=None, help="output directory (required)")
        for key, default in defaults.items():
            flag = "--" + key.replace("_", "-")
            if isinstance(default, bool):
                p.add_argument(flag, default=None, type=lambda s: s.lower() in ("1", "true", "yes"))
            elif isinstance(default, (list, tuple)):
                p.add_argument(flag, default=None, type=str)
            elif isinstance(default, int):
                p.add_argument(flag, default=None, type=int)
            elif isinstance(default, float):
                p.add_argument(flag, default=None, type=float)
            else:
                p.add_argument(flag, default=None, type=str)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    name = args.experiment
    try:
        config = _read_config(args.config) if args.config else {}
        config_out = config.pop("out", None)
        if args.out is None:
            args.out = config_out
        if args.out is None:
            raise ConfigError("an output directory is required (--out or 'out' in config)")
        defaults = _DEFAULTS[name]
        # list-valued flags arrive as raw strings
        for key, default in defaults.items():
            val = getattr(args, key, None)
            if val is not None and isinstance(default, (list, tuple)) and isinstance(val, str):
                setattr(args, key, _parse_list(val, key))
        params = _resolve(args, config, defaults)
        _validate(name, params)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2

    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        _RUNNERS[name](params, out)
        _write_manifest(out, name, params)
    except RunAbortedError as err:
        print(f"aborted: {err}", file=sys.stderr)
        return 3
    except (ConfigError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
