"""Monte Carlo experiment runner, statistics, and file formats.

An experiment runs N independent trials of one process/observer pairing,
collects each trial's terminal fraction, and compares the sample against
the analytic target: a Kolmogorov-Smirnov distance to the limit CDF for
distributional laws (m=1 descendant trees), or an absolute gap to the limit
constant for the greedy-algorithm fractions (one-sided for PAM matching,
whose theory guarantees only an upper bound on the unmatched fraction).

Trial i runs on seed SplitMix64(master_seed XOR gamma*(i+1)); aggregation
is keyed by trial index, so worker count and completion order never change
the result.

File formats: snapshot CSV with header ``t,metric,value`` (UTF-8, LF);
reports and configs as JSON. Config keys: model, m, delta ("p/q" string or
decimal), t_max, seed, trials, observer, root, schedule, law, tolerance.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import analytics
from . import numba_kernels as nk
from .observers import SnapshotSeries, geometric_schedule
from .process import LoopsVariant, Model, ProcessConfig
from .rng import derive_trial_seed, seed_state

OBSERVERS = ("descendants", "matching", "independent")
LAWS = ("auto", "none")
METRIC_NAMES = ("p_x", "p_y", "p", "x", "matched_frac", "i", "z", "w")


class ConfigError(ValueError):
    """Invalid experiment configuration; carries the offending field path."""

    def __init__(self, field_path: str, message: str):
        super().__init__(f"{field_path}: {message}")
        self.field_path = field_path


@dataclass(frozen=True)
class ExperimentSpec:
    config: ProcessConfig
    observer: str
    root: int = 1
    trials: int = 1
    t_max: int = 1000
    schedule: tuple[int, ...] = ()
    master_seed: int = 0
    law: str = "auto"
    tolerance: float = 0.05
    workers: int = 1
    samples_path: str | None = None
    report_path: str | None = None

    def __post_init__(self):
        if self.observer not in OBSERVERS:
            raise ConfigError(
                "observer",
                f"unknown observer {self.observer!r}; valid: {OBSERVERS}")
        if self.law not in LAWS:
            raise ConfigError("law", f"unknown law {self.law!r}; valid: {LAWS}")
        if self.trials < 1:
            raise ConfigError("trials", f"must be >= 1, got {self.trials}")
        if self.t_max < self.root:
            raise ConfigError(
                "t_max", f"must be >= root, got t_max={self.t_max} root={self.root}")
        if self.t_max > self.config.t_max:
            raise ConfigError(
                "t_max", f"exceeds process capacity {self.config.t_max}")
        if self.tolerance <= 0:
            raise ConfigError("tolerance", f"must be > 0, got {self.tolerance}")
        if self.root < 1:
            raise ConfigError("root", f"must be >= 1, got {self.root}")
        if self.schedule and not all(
                1 <= s <= self.t_max for s in self.schedule):
            raise ConfigError(
                "schedule", f"times must lie in [1, t_max={self.t_max}]")
        if self.observer == "descendants" and self.config.model is Model.PAM \
                and self.config.m == 1 and self.config.delta == -1 \
                and self.root > 1:
            raise ConfigError(
                "root", "m=1, delta=-1 degenerates to a star; descendant "
                "trees of roots > 1 never grow")


def generate_stream(config: ProcessConfig, t_max: int, seed: int):
    """Compiled full run; returns (targets, is_loop, degrees) flat arrays."""
    rng_state = np.array(seed_state(seed), dtype=np.uint64)
    if config.model is Model.PAM:
        return nk.pam_stream(
            config.m, config.delta_num, config.delta_den,
            config.loops_variant is LoopsVariant.ONLY_AT_VERTEX_ONE,
            t_max, rng_state)
    targets, deg = nk.uam_stream(config.m, t_max, rng_state)
    return targets, np.zeros(targets.shape[0], dtype=np.uint8), deg


def scan_observer(spec: ExperimentSpec, targets, is_loop,
                  schedule: np.ndarray) -> dict[str, np.ndarray]:
    """Replay a stream through the configured observer; returns metric
    arrays aligned with ``schedule`` (times before the root are NaN)."""
    cfg = spec.config
    m, t_max = cfg.m, spec.t_max
    n = schedule.shape[0]
    out: dict[str, np.ndarray] = {}
    if spec.observer == "descendants":
        out_x = np.zeros(n, np.int64)
        out_y = np.zeros(n, np.int64)
        init_y = 2 * m if cfg.model is Model.PAM else 0
        nk.descendant_scan(targets, is_loop, m, t_max, spec.root, init_y,
                           schedule, out_x, out_y)
        with np.errstate(invalid="ignore"):
            px = out_x / schedule
            py = out_y / (2.0 * m * schedule)
        px[schedule < spec.root] = np.nan
        py[schedule < spec.root] = np.nan
        out["p_x"] = px
        out["p_y"] = py
        if cfg.model is Model.PAM:
            d = float(cfg.delta)
            out["p"] = (2 * m * py + d * px) / (2 * m + d)
    elif spec.observer == "matching":
        out_unmatched = np.zeros(n, np.int64)
        nk.matching_scan(targets, is_loop, m, t_max, False, schedule,
                         out_unmatched)
        out["x"] = out_unmatched / schedule
        out["matched_frac"] = (schedule - out_unmatched) / schedule
    else:
        out_i = np.zeros(n, np.int64)
        out_z = np.zeros(n, np.int64)
        nk.independent_scan(targets, is_loop, m, t_max, schedule, out_i, out_z)
        i_frac = out_i / schedule
        z_frac = out_z / (m * schedule)
        out["i"] = i_frac
        out["z"] = z_frac
        d = float(cfg.delta) if cfg.model is Model.PAM else 0.0
        out["w"] = (i_frac * (m + d) + z_frac * m) / (2 * m + d)
    return out


PRIMARY_METRIC = {"descendants": "p_x", "matching": "matched_frac",
                  "independent": "i"}


def run_single(spec: ExperimentSpec, seed: int) -> SnapshotSeries:
    """One full run recording every metric on the snapshot schedule."""
    schedule = np.asarray(
        spec.schedule or geometric_schedule(spec.t_max), dtype=np.int64)
    targets, is_loop, _ = generate_stream(spec.config, spec.t_max, seed)
    metrics = scan_observer(spec, targets, is_loop, schedule)
    series = SnapshotSeries(tuple(int(t) for t in schedule))
    for k, t in enumerate(schedule):
        for name in METRIC_NAMES:
            if name in metrics and not math.isnan(metrics[name][k]):
                series.rows.append((int(t), name, float(metrics[name][k])))
    return series


def run_trials(spec: ExperimentSpec) -> dict[str, np.ndarray]:
    """N independent trials; returns per-metric terminal-value arrays keyed
    by trial index (plus the per-trial seeds under "seed")."""
    terminal = np.array([spec.t_max], dtype=np.int64)
    seeds = [derive_trial_seed(spec.master_seed, i) for i in range(spec.trials)]
    results: dict[str, np.ndarray] = {}

    def one_trial(idx: int) -> dict[str, float]:
        try:
            targets, is_loop, _ = generate_stream(
                spec.config, spec.t_max, seeds[idx])
            metrics = scan_observer(spec, targets, is_loop, terminal)
            return {name: float(arr[0]) for name, arr in metrics.items()}
        except Exception as exc:  # attach trial identity before aborting
            raise RuntimeError(
                f"trial {idx} (seed {seeds[idx]}) failed: {exc}") from exc

    if spec.workers <= 1:
        rows = [one_trial(i) for i in range(spec.trials)]
    else:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            rows = list(pool.map(one_trial, range(spec.trials)))
    for name in rows[0]:
        results[name] = np.array([row[name] for row in rows])
    results["seed"] = np.array(seeds, dtype=np.uint64)
    return results


def ks_statistic(samples: Sequence[float], cdf: Callable[[float], float]) -> float:
    """One-sample Kolmogorov-Smirnov distance sup |F_N - F|."""
    xs = np.sort(np.asarray(samples, dtype=float))
    n = xs.shape[0]
    if n == 0:
        raise ValueError("need at least one sample")
    d = 0.0
    for i, x in enumerate(xs, start=1):
        fx = cdf(float(x))
        d = max(d, abs(i / n - fx), abs((i - 1) / n - fx))
    return d


def empirical_moments(samples: Sequence[float],
                      ells: Sequence[int]) -> dict[int, float]:
    xs = np.asarray(samples, dtype=float)
    return {ell: float(np.mean(xs**ell)) for ell in ells}


@dataclass
class ExperimentReport:
    """Everything needed to recompute the verdicts offline.

    ``rate_fit`` (constant-target observers only) is the least-squares slope
    of log|metric(t) - limit| against log t over one snapshot run. It is
    informational only: the theory bounds the exponent almost surely but
    gives no finite-t constant to test against.
    """

    spec: dict
    samples: list[float]
    seeds: list[int]
    secondary: dict[str, list[float]]
    law_kind: str
    ks: float | None
    ks_threshold: float | None
    empirical_moments: dict[int, float]
    theoretical_moments: dict[int, float]
    target_value: float | None
    max_gap: float | None
    verdicts: dict[str, bool]
    wall_clock_s: float
    rate_fit: dict | None = None

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def to_json(self) -> str:
        payload = dict(self.__dict__)
        payload["empirical_moments"] = {
            str(k): v for k, v in self.empirical_moments.items()}
        payload["theoretical_moments"] = {
            str(k): v for k, v in self.theoretical_moments.items()}
        payload["passed"] = self.passed
        return json.dumps(payload, indent=2)


def empirical_rate_fit(spec: ExperimentSpec, seed: int, metric: str,
                       target: float, t_min: int = 100) -> dict | None:
    """Slope of log|metric(t) - target| vs log t over one snapshot run.

    Snapshot times below t_min are dropped (early-time noise), as are
    points sitting exactly on the target. Needs >= 3 surviving points.
    """
    snap_spec = ExperimentSpec(
        config=spec.config, observer=spec.observer, root=spec.root,
        t_max=spec.t_max, schedule=(), master_seed=seed, law="none",
        tolerance=spec.tolerance)
    series = run_single(snap_spec, seed)
    pts = [(t, abs(v - target)) for t, name, v in series.rows
           if name == metric and t >= t_min and abs(v - target) > 1e-12]
    if len(pts) < 3:
        return None
    xs = np.log([t for t, _ in pts])
    ys = np.log([gap for _, gap in pts])
    slope, intercept = np.polyfit(xs, ys, 1)
    return {"metric": metric, "target": target, "slope": float(slope),
            "intercept": float(intercept), "n_points": len(pts),
            "t_min": t_min}


def _resolve_target(spec: ExperimentSpec):
    """(law_kind, cdf-or-None, moments dict, constant-or-None)."""
    cfg = spec.config
    if spec.law == "none":
        return "none", None, {}, None
    if spec.observer == "descendants":
        law = analytics.descendant_limit_law(
            cfg.model, cfg.m, spec.root, cfg.delta)
        moments = {ell: float(analytics.mixture_moment(law, ell))
                   for ell in (1, 2, 3)}
        if isinstance(law, analytics.PointMass):
            return "point_mass", None, moments, law.location
        return "beta_mixture", law.cdf, moments, None
    if spec.observer == "matching":
        if cfg.model is Model.PAM:
            # the guarantee is one-sided: x(t) <= rho + o(1)
            rho = analytics.rho_pam_matching(cfg.m, cfg.delta)
            return "pam_matching", None, {}, rho.value
        r = analytics.r_uam_matching(cfg.m)
        return "uam_matching", None, {}, r.value
    w = analytics.w_independent(cfg.m)
    return "independent", None, {}, w.value


def run_experiment(spec: ExperimentSpec) -> ExperimentReport:
    """run_trials + statistics + verdicts against the analytic target."""
    t0 = time.perf_counter()
    # resolve the target first: an unsupported (model, m, root, delta) law
    # combination is a config error, not a mid-run failure
    try:
        law_kind, cdf, th_moments, constant = _resolve_target(spec)
    except ValueError as exc:
        raise ConfigError("law", str(exc)) from exc
    results = run_trials(spec)
    primary = results[PRIMARY_METRIC[spec.observer]]

    ks = None
    ks_threshold = None
    max_gap = None
    verdicts: dict[str, bool] = {}
    emp = empirical_moments(primary, (1, 2, 3))

    if law_kind == "beta_mixture":
        ks = ks_statistic(primary, cdf)
        ks_threshold = spec.tolerance
        verdicts["ks_within_threshold"] = ks <= ks_threshold
        n = len(primary)
        var = th_moments[2] - th_moments[1] ** 2
        band = 3.0 * math.sqrt(max(var, 0.0) / n)
        verdicts["mean_within_3se"] = abs(emp[1] - th_moments[1]) <= band
    elif law_kind in ("uam_matching", "independent"):
        gaps = np.abs(primary - constant)
        max_gap = float(np.max(gaps))
        verdicts["constant_within_tolerance"] = max_gap <= spec.tolerance
    elif law_kind == "pam_matching":
        # the bound constrains the unmatched fraction from above only
        x_samples = results["x"]
        gaps = np.maximum(0.0, x_samples - constant)
        max_gap = float(np.max(gaps))
        verdicts["one_sided_within_tolerance"] = max_gap <= spec.tolerance

    rate_fit = None
    if constant is not None and law_kind != "point_mass":
        fit_metric = "x" if law_kind == "pam_matching" else \
            PRIMARY_METRIC[spec.observer]
        rate_fit = empirical_rate_fit(
            spec, derive_trial_seed(spec.master_seed, spec.trials),
            fit_metric, constant)

    secondary = {name: [float(v) for v in arr]
                 for name, arr in results.items()
                 if name not in ("seed", PRIMARY_METRIC[spec.observer])}
    cfg = spec.config
    spec_echo = {
        "model": cfg.model.value, "m": cfg.m, "delta": str(cfg.delta),
        "loops_variant": cfg.loops_variant.value, "t_max": spec.t_max,
        "observer": spec.observer, "root": spec.root, "trials": spec.trials,
        "seed": spec.master_seed, "law": spec.law,
        "tolerance": spec.tolerance,
    }
    return ExperimentReport(
        spec=spec_echo,
        samples=[float(v) for v in primary],
        seeds=[int(s) for s in results["seed"]],
        secondary=secondary,
        law_kind=law_kind,
        ks=ks,
        ks_threshold=ks_threshold,
        empirical_moments=emp,
        theoretical_moments=th_moments,
        target_value=constant,
        max_gap=max_gap,
        verdicts=verdicts,
        wall_clock_s=time.perf_counter() - t0,
        rate_fit=rate_fit,
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def emit_csv(series: SnapshotSeries, path: str | Path) -> None:
    """Snapshot rows as ``t,metric,value`` (UTF-8, LF line endings)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,metric,value\n")
        for t, metric, value in series.rows:
            fh.write(f"{t},{metric},{value!r}\n")


def emit_report(report: ExperimentReport, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report.to_json())
        fh.write("\n")


def parse_delta(raw, field_path: str = "delta") -> Fraction:
    """Accept "p/q" strings, decimal strings, ints, and floats."""
    try:
        if isinstance(raw, str):
            return Fraction(raw.strip())
        if isinstance(raw, int):
            return Fraction(raw)
        if isinstance(raw, float):
            return Fraction(str(raw))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(field_path, f"cannot parse rational: {raw!r}") from exc
    raise ConfigError(field_path, f"cannot parse rational: {raw!r}")


def spec_to_config_dict(spec: ExperimentSpec) -> dict:
    cfg = spec.config
    out = {
        "model": cfg.model.value,
        "m": cfg.m,
        "delta": str(cfg.delta),
        "loops_variant": cfg.loops_variant.value,
        "t_max": spec.t_max,
        "seed": spec.master_seed,
        "trials": spec.trials,
        "observer": spec.observer,
        "root": spec.root,
        "schedule": list(spec.schedule) if spec.schedule else "geometric",
        "law": spec.law,
        "tolerance": spec.tolerance,
        "workers": spec.workers,
    }
    if spec.samples_path:
        out["samples_path"] = spec.samples_path
    if spec.report_path:
        out["report_path"] = spec.report_path
    return out


def parse_config(source) -> ExperimentSpec:
    """Build an ExperimentSpec from a JSON file path or a dict.

    Raises ConfigError (with the offending field path) on malformed input.
    """
    if isinstance(source, (str, Path)):
        try:
            with open(source, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except FileNotFoundError as exc:
            raise ConfigError("<file>", f"config file not found: {source}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError("<file>", f"invalid JSON: {exc}") from exc
    else:
        data = dict(source)
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    known = {"model", "m", "delta", "loops_variant", "t_max", "seed",
             "trials", "observer", "root", "schedule", "law", "tolerance",
             "workers", "samples_path", "report_path"}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(unknown[0], f"unknown config key(s): {unknown}")

    def take(key, default=None, required=False):
        if key in data:
            return data[key]
        if required:
            raise ConfigError(key, "missing required field")
        return default

    model_raw = take("model", required=True)
    try:
        model = Model(str(model_raw).lower())
    except ValueError:
        raise ConfigError("model", f"unknown model {model_raw!r}; valid: pam, uam")
    m = take("m", required=True)
    if not isinstance(m, int) or m < 1:
        raise ConfigError("m", f"must be a positive integer, got {m!r}")
    delta = parse_delta(take("delta", 0))
    t_max = take("t_max", required=True)
    if not isinstance(t_max, int) or t_max < 1:
        raise ConfigError("t_max", f"must be a positive integer, got {t_max!r}")
    variant_raw = take("loops_variant", "allowed")
    try:
        variant = LoopsVariant(variant_raw)
    except ValueError:
        raise ConfigError(
            "loops_variant",
            f"unknown variant {variant_raw!r}; valid: "
            f"{[v.value for v in LoopsVariant]}")
    seed = take("seed", required=True)
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed", f"must be a nonnegative integer, got {seed!r}")
    observer = take("observer", "descendants")
    if observer not in OBSERVERS:
        raise ConfigError(
            "observer", f"unknown observer {observer!r}; valid: {OBSERVERS}")
    trials = take("trials", 1)
    if not isinstance(trials, int) or trials < 1:
        raise ConfigError("trials", f"must be a positive integer, got {trials!r}")
    root = take("root", 1)
    if not isinstance(root, int) or root < 1:
        raise ConfigError("root", f"must be a positive integer, got {root!r}")
    sched_raw = take("schedule", "geometric")
    if sched_raw in ("geometric", None):
        schedule: tuple[int, ...] = ()
    elif isinstance(sched_raw, list) and all(
            isinstance(v, int) and v >= 1 for v in sched_raw):
        schedule = tuple(sorted(set(sched_raw)))
    else:
        raise ConfigError(
            "schedule", f"must be \"geometric\" or a list of ints, got {sched_raw!r}")
    law = take("law", "auto")
    tolerance = take("tolerance", 0.05)
    if not isinstance(tolerance, (int, float)) or tolerance <= 0:
        raise ConfigError("tolerance", f"must be > 0, got {tolerance!r}")
    workers = take("workers", 1)
    if not isinstance(workers, int) or workers < 1:
        raise ConfigError("workers", f"must be a positive integer, got {workers!r}")

    try:
        config = ProcessConfig(model, m, delta, variant, t_max)
    except ValueError as exc:
        raise ConfigError("delta", str(exc)) from exc
    try:
        return ExperimentSpec(
            config=config, observer=observer, root=root, trials=trials,
            t_max=t_max, schedule=schedule, master_seed=seed, law=law,
            tolerance=float(tolerance), workers=workers,
            samples_path=take("samples_path"), report_path=take("report_path"))
    except ConfigError:
        raise
