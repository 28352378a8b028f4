"""Experiment orchestration: presets, trial pools, CSV persistence, fits.

Every experiment is a pure function of (spec, seed): trials draw from
counter-based substreams, aggregation is order-independent, and CSVs are
written atomically, so reruns and worker counts can never change a byte of
output.
"""

from __future__ import annotations

import csv
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from scglab import analytics
from scglab.model import ModelParams, SimConfig, Window, validate
from scglab.nnc_dynamics import simulate_nnc_time
from scglab.point_process import PointSet, sample_ppp, with_forced_point
from scglab.protocol import NetworkRealization, degree_trial
from scglab.rng import TAG_EDS, TAG_LEGIT, RandomStream
from scglab.split_routing import two_secure_route
from scglab.temporal_routing import (CandidateEdges,
                                     delay_vs_distance_experiment,
                                     earliest_arrival)


class InvalidSpec(ValueError):
    pass


class DegenerateInput(ValueError):
    pass


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float


EXPERIMENT_KINDS = ("degree", "nnc", "delay", "split_compare", "percolation",
                    "formulas")

_SWEEPABLE = {"lambda_l", "lambda_e", "p", "eta", "beta_l", "beta_e",
              "trials", "slot_cap"}


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    params: ModelParams
    window: Window
    config: SimConfig
    output_dir: str
    sweep: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)
    workers: int = 1


def linear_fit(points: list[tuple[float, float]]) -> FitResult:
    """Ordinary least squares y = slope*x + intercept; exact on collinear
    input; R^2 clipped to [0, 1]."""
    if len(points) < 2:
        raise DegenerateInput("need at least two points")
    xs = np.array([p[0] for p in points], dtype=float)
    ys = np.array([p[1] for p in points], dtype=float)
    if np.allclose(xs, xs[0]):
        raise DegenerateInput("need at least two distinct x values")
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    ss_res = float((resid ** 2).sum())
    ss_tot = float(((ys - ys.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return FitResult(float(slope), float(intercept), min(max(r2, 0.0), 1.0))


def write_csv_atomic(path: str, header: list[str], rows: list[tuple]) -> None:
    """Write via a temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(x) for x in row])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return repr(x)
    if x is None:
        return ""
    return str(x)


def parallel_map(fn, items, workers: int) -> list:
    """Order-preserving map, optionally over a process pool."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (workers * 4))))


# ---------------------------------------------------------------------------
# Degree experiment


@dataclass(frozen=True)
class DegreeCell:
    params: ModelParams
    direction: str
    trials: int
    mc_mean: float
    mc_stderr: float
    analytic: float


def _degree_cell_job(cell, seed: int) -> tuple:
    (cell_idx, params, direction, trials) = cell
    root = RandomStream(seed, cell_idx)
    total = 0
    total_sq = 0
    for i in range(trials):
        k = degree_trial(params, direction, root.trial(i))
        total += k
        total_sq += k * k
    return cell_idx, total, total_sq


def degree_experiment(grid: list[ModelParams], directions: list[str],
                      trials: int, seed: int, workers: int = 1
                      ) -> list[DegreeCell]:
    """Palm Monte Carlo degree means over a parameter grid, with the matching
    closed-form value carried alongside for comparison."""
    cells = []
    idx = 0
    for params in grid:
        validate(params)
        for direction in directions:
            cells.append((idx, params, direction, trials))
            idx += 1
    results = parallel_map(partial(_degree_cell_job, seed=seed), cells, workers)
    out = []
    for (cell_idx, params, direction, n), (ridx, total, total_sq) in zip(cells, results):
        assert cell_idx == ridx
        mean = total / n
        var = total_sq / n - mean ** 2
        stderr = math.sqrt(max(var, 0.0) / n)
        analytic = (analytics.avg_out_degree(params) if direction == "out"
                    else analytics.avg_in_degree(params))
        out.append(DegreeCell(params, direction, n, mean, stderr, analytic))
    return out


def degree_rows(cells: list[DegreeCell]) -> tuple[list[str], list[tuple]]:
    header = ["lambda_l", "lambda_e", "p", "eta", "beta_l", "beta_e",
              "direction", "trials", "mc_mean", "mc_stderr", "analytic"]
    rows = [(c.params.lambda_l, c.params.lambda_e, c.params.p, c.params.eta,
             c.params.beta_l, c.params.beta_e, c.direction, c.trials,
             c.mc_mean, c.mc_stderr, c.analytic) for c in cells]
    return header, rows


# ---------------------------------------------------------------------------
# Nearest-neighbor connectivity experiment


def nnc_window(params: ModelParams) -> Window:
    """Window that contains the nearest neighbor and every disk the clock can
    query, up to negligible truncation (P ~ 1e-12 per trial)."""
    reach = math.sqrt(27.0 / (math.pi * max(params.lambda_l, 1e-12)))
    half = (1.0 + max(params.beta_l, params.beta_e)) * reach
    return Window.centered(half)


def nnc_trial(params: ModelParams, window: Window, config: SimConfig,
              trial_stream: RandomStream):
    """One draw of the nearest-neighbor connectivity clock. In per-slot mode
    the static eavesdropper set is never consulted, so it is not sampled."""
    legit = sample_ppp(params.lambda_l, window, trial_stream.child(TAG_LEGIT).rng())
    legit = with_forced_point(legit, 0.0, 0.0)
    if config.ed_mode == "static":
        eds = sample_ppp(params.lambda_e, window, trial_stream.child(TAG_EDS).rng())
    else:
        eds = PointSet(np.empty(0), np.empty(0), window)
    realization = NetworkRealization(params, window, legit, eds, forced_origin="tx")
    return simulate_nnc_time(realization, config, trial_stream)


@dataclass(frozen=True)
class NncCell:
    p: float
    ratio: float
    lambda_l: float
    lambda_e: float
    trials: int
    mean: float
    stderr: float
    censor_rate: float
    analytic_mean: float


def _nnc_cell_job(cell, seed: int) -> tuple:
    cell_idx, params, config = cell
    window = nnc_window(params)
    root = RandomStream(seed, cell_idx)
    values = np.empty(config.trials, dtype=np.int64)
    censored = np.zeros(config.trials, dtype=bool)
    for i in range(config.trials):
        res = nnc_trial(params, window, config, root.trial(i))
        values[i] = res.value
        censored[i] = res.censored
    return cell_idx, values, censored


def nnc_experiment(base: ModelParams, p_values: list[float], ratios: list[float],
                   config: SimConfig, seed: int, workers: int = 1,
                   per_trial_sink=None) -> list[NncCell]:
    """Sweep transmit probability and density ratio; lambda_l stays fixed and
    lambda_e = lambda_l / ratio. Censored trials are counted, never averaged."""
    cells = []
    idx = 0
    for p in p_values:
        for ratio in ratios:
            params = base.with_(p=p, lambda_e=base.lambda_l / ratio)
            validate(params)
            cells.append((idx, params, config))
            idx += 1
    results = parallel_map(partial(_nnc_cell_job, seed=seed), cells, workers)
    out = []
    for (cell_idx, params, cfg), (ridx, values, censored) in zip(cells, results):
        assert cell_idx == ridx
        ok = ~censored
        k = int(ok.sum())
        mean = float(values[ok].mean()) if k else math.nan
        stderr = (float(values[ok].std(ddof=1)) / math.sqrt(k)) if k > 1 else math.nan
        out.append(NncCell(
            p=params.p, ratio=base.lambda_l / params.lambda_e,
            lambda_l=params.lambda_l, lambda_e=params.lambda_e,
            trials=cfg.trials, mean=mean, stderr=stderr,
            censor_rate=float(censored.mean()),
            analytic_mean=analytics.mean_nnc_time(params)))
        if per_trial_sink is not None:
            for i in range(cfg.trials):
                per_trial_sink.append(
                    (i, cfg.ed_mode, int(values[i]), bool(censored[i]),
                     params.p, base.lambda_l / params.lambda_e))
    return out


def nnc_rows(cells: list[NncCell]) -> tuple[list[str], list[tuple]]:
    header = ["p", "ratio", "lambda_l", "lambda_e", "trials", "mean",
              "stderr", "censor_rate", "analytic_mean"]
    rows = [(c.p, c.ratio, c.lambda_l, c.lambda_e, c.trials, c.mean,
             c.stderr, c.censor_rate,
             "" if math.isinf(c.analytic_mean) else c.analytic_mean)
            for c in cells]
    return header, rows


# ---------------------------------------------------------------------------
# Delay-versus-distance experiment


def delay_experiment(base: ModelParams, window: Window, config: SimConfig,
                     pairs: list[tuple[float, float]], distances: list[float],
                     seed: int, workers: int = 1):
    """Mean routed delay against Euclidean distance for (p, eta) variants,
    with a straight-line fit per variant."""
    jobs = []
    for idx, (p, eta) in enumerate(pairs):
        params = validate(base.with_(p=p, eta=eta))
        jobs.append((idx, params, window, config, distances))
    results = parallel_map(partial(_delay_job, seed=seed), jobs, workers)
    summaries = []
    trial_rows: list[tuple] = []
    for (idx, params, _, _, _), (ridx, rows, per_trial) in zip(jobs, results):
        assert idx == ridx
        points = [(r.distance, r.mean_delay) for r in rows
                  if not math.isnan(r.mean_delay)]
        fit = linear_fit(points) if len(points) >= 2 else None
        summaries.append((params, rows, fit))
        trial_rows.extend(per_trial)
    return summaries, trial_rows


def _delay_job(job, seed: int):
    idx, params, window, config, distances = job
    stream = RandomStream(seed, idx)
    sink: list = []
    rows = delay_vs_distance_experiment(params, window, config, distances,
                                        stream, per_trial_rows=sink)
    per_trial = [(d, params.p, params.eta, trial,
                  res.delay, res.hops, res.censored)
                 for (d, trial, res) in sink]
    return idx, rows, per_trial


DELAY_TRIAL_HEADER = ["distance", "p", "eta", "trial", "delay", "hops", "censored"]


# ---------------------------------------------------------------------------
# Split-versus-direct comparison


@dataclass(frozen=True)
class SplitCompareRow:
    trial: int
    kind: str
    delay: int | None
    hops_a: int | None
    hops_b: int | None
    censored: bool
    direct_delay: int | None
    direct_censored: bool


def _split_trial_job(trial: int, base: ModelParams, window: Window,
                     config: SimConfig, seed: int, span: float):
    from scglab.protocol import sample_realization
    from scglab.temporal_routing import nearest_component_node
    from scglab.percolation import components, potential_graph

    stream = RandomStream(seed).trial(trial)
    realization = sample_realization(base, window, stream)
    if realization.n_legit < 2:
        return SplitCompareRow(trial, "direct", None, None, None, True, None, True)
    cx = (window.x_min + window.x_max) / 2.0
    cy = (window.y_min + window.y_max) / 2.0
    adjacency = potential_graph(realization)
    report = components(adjacency, realization.legit, window, base.eta)
    largest = np.flatnonzero(report.labels == report.largest_label)
    src = nearest_component_node(realization, (cx - span / 2.0, cy), largest)
    dst = nearest_component_node(realization, (cx + span / 2.0, cy), largest)
    if src == dst:
        return SplitCompareRow(trial, "direct", 0, 0, None, False, 0, False)
    edges = CandidateEdges(realization)
    direct = earliest_arrival(realization, src, dst, config, stream, edges)
    route = two_secure_route(realization, src, dst, config, stream, edges)
    return SplitCompareRow(
        trial, route.kind, route.delay,
        route.path_a.hops if route.path_a else None,
        route.path_b.hops if route.path_b else None,
        route.censored,
        direct.delay, direct.censored)


def split_compare_experiment(base: ModelParams, window: Window,
                             config: SimConfig, span: float, seed: int,
                             workers: int = 1) -> list[SplitCompareRow]:
    """Shared-seed comparison of the splitting router against the plain
    direct-path router between two anchors `span` apart."""
    validate(base)
    job = partial(_split_trial_job, base=base, window=window, config=config,
                  seed=seed, span=span)
    return parallel_map(job, range(config.trials), workers)


SPLIT_HEADER = ["trial", "kind", "delay", "hops_a", "hops_b", "censored",
                "direct_delay", "direct_censored"]


def split_rows(rows: list[SplitCompareRow]) -> list[tuple]:
    return [(r.trial, r.kind, r.delay, r.hops_a, r.hops_b, r.censored,
             r.direct_delay, r.direct_censored) for r in rows]


# ---------------------------------------------------------------------------
# Formula evaluation


def formulas_summary(params: ModelParams,
                     inputs: analytics.BoundInputs | None = None) -> dict:
    """Every closed-form value the calculator exposes, as one JSON-ready dict;
    bound-dependent entries appear only when bound inputs are supplied."""
    validate(params)
    mean_nnc = analytics.mean_nnc_time(params)
    out = {
        "gamma_fn": analytics.gamma_fn(params.beta_l),
        "avg_out_degree": analytics.avg_out_degree(params),
        "avg_in_degree": analytics.avg_in_degree(params),
        "mean_nnc_time": None if math.isinf(mean_nnc) else mean_nnc,
        "nnc_is_finite": not math.isinf(mean_nnc),
    }
    try:
        out["degree_limits"] = analytics.degree_limits(params)
    except analytics.DegenerateDenominator:
        out["degree_limits"] = None
    if inputs is not None:
        out["percolation_bound_nsp"] = analytics.percolation_bound_nsp(params, inputs)
        out["percolation_bound_sp"] = analytics.percolation_bound_sp(params, inputs)
        try:
            out["hop_bound"] = analytics.hop_bound(inputs, params.eta)
            out["delay_upper_bound"] = {
                "nsp": analytics.delay_upper_bound(params, inputs, "nsp"),
                "sp": analytics.delay_upper_bound(params, inputs, "sp"),
            }
        except analytics.SubcriticalDelta:
            out["hop_bound"] = None
            out["delay_upper_bound"] = None
        out["delay_lower_bound_opt"] = analytics.delay_lower_bound_opt(
            params, inputs.d)
    return out


# ---------------------------------------------------------------------------
# Experiment dispatch

# Per-command parameter defaults reproducing the reference experiments in one
# command; config files and flags override them.
PRESET_DEFAULTS = {
    "nnc": {"beta_l": 0.2, "beta_e": 0.6, "lambda_l": 1.0,
            "ed_mode": "per_slot_iid", "slot_cap": 2000, "trials": 20000},
    "delay": {"lambda_l": 1.0, "lambda_e": 0.1, "beta_l": 1.2, "beta_e": 0.8,
              "x_min": 0.0, "y_min": 0.0, "x_max": 20.0, "y_max": 20.0,
              "slot_cap": 3000, "trials": 200},
}


def _nan_none(x):
    if x is None:
        return None
    if isinstance(x, float) and (math.isnan(x) or math.isinf(x)):
        return None
    return x


def run(spec: ExperimentSpec) -> dict:
    """Execute one experiment spec: write its CSVs atomically under
    spec.output_dir and return the JSON-ready summary. Deterministic given
    (spec, seed) regardless of worker count."""
    if spec.kind not in EXPERIMENT_KINDS:
        raise InvalidSpec(f"unknown experiment kind {spec.kind!r}")
    for field_name in spec.sweep:
        if field_name not in _SWEEPABLE:
            raise InvalidSpec(f"sweep field {field_name!r} is not a model or "
                              f"simulation parameter")
    validate(spec.params)
    summary: dict = {"kind": spec.kind, "seed": spec.config.seed}
    runner = _RUNNERS[spec.kind]
    runner(spec, summary)
    return summary


def _out(spec: ExperimentSpec, name: str) -> str:
    return os.path.join(spec.output_dir, name)


def _run_degree(spec: ExperimentSpec, summary: dict) -> None:
    grid = [spec.params.with_(**{field_name: value})
            for field_name, values in sorted(spec.sweep.items())
            for value in values] or [spec.params]
    directions = spec.options.get("directions", ["out", "in"])
    cells = degree_experiment(grid, directions, spec.config.trials,
                              spec.config.seed, spec.workers)
    header, rows = degree_rows(cells)
    path = _out(spec, "degree.csv")
    write_csv_atomic(path, header, rows)
    summary["csv"] = path
    summary["cells"] = [
        {"lambda_l": c.params.lambda_l, "lambda_e": c.params.lambda_e,
         "p": c.params.p, "direction": c.direction, "mc_mean": c.mc_mean,
         "mc_stderr": c.mc_stderr, "analytic": c.analytic} for c in cells]


def _run_nnc(spec: ExperimentSpec, summary: dict) -> None:
    p_values = spec.options.get("p_values", [0.25, 0.5, 0.75])
    ratios = spec.options.get("ratios", [0.3, 0.5, 0.8, 1.2, 1.6, 2.2, 3.2, 4.5])
    sink = [] if spec.options.get("per_trial_csv") else None
    cells = nnc_experiment(spec.params, p_values, ratios, spec.config,
                           spec.config.seed, spec.workers, per_trial_sink=sink)
    header, rows = nnc_rows(cells)
    path = _out(spec, "nnc_phase.csv")
    write_csv_atomic(path, header, rows)
    summary["csv"] = path
    if sink is not None:
        trial_path = _out(spec, "nnc_trials.csv")
        write_csv_atomic(trial_path,
                         ["trial", "mode", "value", "censored", "p", "ratio"],
                         sink)
        summary["per_trial_csv"] = trial_path
    summary["cells"] = [
        {"p": c.p, "ratio": c.ratio, "mean": _nan_none(c.mean),
         "stderr": _nan_none(c.stderr), "censor_rate": c.censor_rate,
         "analytic_mean": _nan_none(c.analytic_mean)} for c in cells]


def _run_delay(spec: ExperimentSpec, summary: dict) -> None:
    pairs = spec.options.get("pairs", [(0.3, 1.0), (0.5, 1.0), (0.3, 2.0)])
    distances = spec.options.get("distances", [2.0, 4.0, 6.0, 8.0, 10.0])
    summaries, trial_rows = delay_experiment(
        spec.params, spec.window, spec.config, pairs, distances,
        spec.config.seed, spec.workers)
    path = _out(spec, "delay_trials.csv")
    write_csv_atomic(path, DELAY_TRIAL_HEADER, trial_rows)
    summary["csv"] = path
    summary["variants"] = [
        {"p": cell_params.p, "eta": cell_params.eta,
         "rows": [{"distance": r.distance, "mean": _nan_none(r.mean_delay),
                   "stderr": _nan_none(r.stderr),
                   "censor_rate": r.censor_rate} for r in rows],
         "fit": None if fit is None else
             {"slope": fit.slope, "intercept": fit.intercept,
              "r_squared": fit.r_squared}}
        for cell_params, rows, fit in summaries]


def _run_split_compare(spec: ExperimentSpec, summary: dict) -> None:
    span = spec.options.get("span", 6.0)
    rows = split_compare_experiment(spec.params, spec.window, spec.config,
                                    span, spec.config.seed, spec.workers)
    path = _out(spec, "split_compare.csv")
    write_csv_atomic(path, SPLIT_HEADER, split_rows(rows))
    ok = sum(not r.censored for r in rows)
    direct_ok = sum(not r.direct_censored for r in rows)
    summary["csv"] = path
    summary["non_censor_rate_split"] = ok / len(rows)
    summary["non_censor_rate_direct"] = direct_ok / len(rows)
    summary["split_kind_rate"] = sum(r.kind == "split" for r in rows) / len(rows)


def _run_percolation(spec: ExperimentSpec, summary: dict) -> None:
    from scglab.percolation import percolation_sweep

    ratios = spec.options.get("ratios", [0.5, 1.0, 2.0, 4.0, 8.0, 16.0])
    sink: list = []
    rows = percolation_sweep(spec.params, spec.window, spec.config, ratios,
                             RandomStream(spec.config.seed),
                             per_trial_rows=sink)
    path = _out(spec, "percolation.csv")
    write_csv_atomic(path, ["ratio", "lambda_l", "lambda_e", "trial",
                            "crossing", "largest_fraction"], sink)
    summary["csv"] = path
    summary["rows"] = [
        {"ratio": r.ratio, "crossing_rate": r.crossing_rate,
         "crossing_stderr": r.crossing_stderr,
         "mean_largest_fraction": r.mean_largest_fraction} for r in rows]


def _run_formulas(spec: ExperimentSpec, summary: dict) -> None:
    inputs = spec.options.get("bound_inputs")
    summary.update(formulas_summary(spec.params, inputs))


_RUNNERS = {
    "degree": _run_degree,
    "nnc": _run_nnc,
    "delay": _run_delay,
    "split_compare": _run_split_compare,
    "percolation": _run_percolation,
    "formulas": _run_formulas,
}
