"""Batch experiment runner: decompose, spectra, schedules, and reports.

Configs are JSON, outputs are CSV tables plus a markdown summary. Every
reported error carries the corresponding provable bound and a pass/fail
flag; a run exits nonzero iff any bound is violated. Timings go to the
markdown summary only, so CSV outputs are byte-reproducible.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import functions as fnreg
from .core import DEFAULT_ELEMENT_CAP, DenseTensor, frobenius_norm, unfold, UnfoldingSpec, mode_unfolding
from .grids import DomainSpec, GridSpec, sample
from .schedules import (
    REGIME_TT,
    REGIME_TT_WEIGHTED,
    REGIME_TUCKER,
    REGIME_TUCKER_WEIGHTED,
    RankSchedule,
    SchedulerParams,
    build_schedule,
)
from .svd import SingularSpectrum, TruncationRule, fit_decay_exponent, full_svd, tail_energy
from .train import tt_cost, tt_error, tt_storage, tt_svd, tt_svd_bidirectional
from .tucker import hosvd, tucker_cost, tucker_error, tucker_factor_storage

CSV_SCHEMA = "lrtensor-csv v1"

EXPERIMENTS = (
    "decompose",
    "spectrum",
    "schedule",
    "decay-rate",
    "rank-vs-eps",
    "dim-robustness",
    "compare-formats",
)

FORMATS = ("tucker", "tt", "tt-bidir")


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the field."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field {field_name!r}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    function: Optional[fnreg.FunctionSpec] = None
    grid: Optional[GridSpec] = None
    format: str = "tucker"
    ranks: Optional[tuple] = None
    tolerance: Optional[float] = None
    scheduler: Optional[SchedulerParams] = None
    regime: Optional[str] = None
    epsilons: tuple = ()
    m_values: tuple = ()
    mode: int = 0
    fit_window: Optional[tuple] = None
    expected_exponent: Optional[float] = None
    exponent_tol: Optional[float] = None
    seed: int = 0
    cap: int = DEFAULT_ELEMENT_CAP


@dataclass
class ExperimentReport:
    experiment: str
    out_dir: Path
    csv_paths: List[Path] = field(default_factory=list)
    summary_path: Optional[Path] = None
    violations: int = 0
    summary_lines: List[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return 0 if self.violations == 0 else 1


def parse_config(raw: dict, cap: Optional[int] = None, seed: Optional[int] = None) -> ExperimentConfig:
    """Validate a raw JSON dict; raise ConfigError naming the bad field."""
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    experiment = raw.get("experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigError("experiment", f"must be one of {EXPERIMENTS}, got {experiment!r}")

    function = None
    if "function" in raw:
        fn = raw["function"]
        if not isinstance(fn, dict) or "id" not in fn:
            raise ConfigError("function", "must be an object with an 'id'")
        try:
            function = fnreg.make_function(
                fn["id"],
                dims=fn.get("dims"),
                m=fn.get("m"),
                gamma=fn.get("gamma"),
                **fn.get("params", {}),
            )
        except (fnreg.UnknownFunctionError, ValueError) as exc:
            raise ConfigError("function", str(exc)) from exc

    grid = None
    if "grid" in raw:
        g = raw["grid"]
        try:
            grid = GridSpec(int(g.get("points_per_axis", 0)), g.get("rule", "uniform-trapezoid"))
        except (TypeError, ValueError, AttributeError) as exc:
            raise ConfigError("grid", str(exc)) from exc

    fmt = raw.get("format", "tucker")
    if fmt not in FORMATS:
        raise ConfigError("format", f"must be one of {FORMATS}, got {fmt!r}")

    scheduler = None
    regime = None
    if "scheduler" in raw:
        s = raw["scheduler"]
        try:
            scheduler = SchedulerParams(
                epsilon=float(s["epsilon"]),
                k=float(s["k"]),
                dims=tuple(s["dims"]),
                delta=s.get("delta"),
                delta_prime=s.get("delta_prime"),
                gamma=tuple(s["gamma"]) if s.get("gamma") is not None else None,
            )
        except KeyError as exc:
            raise ConfigError(f"scheduler.{exc.args[0]}", "missing") from exc
        except ValueError as exc:
            raise ConfigError("scheduler", str(exc)) from exc
        regime = s.get("regime")

    tolerance = raw.get("tolerance")
    if tolerance is not None:
        tolerance = float(tolerance)
        if tolerance <= 0:
            raise ConfigError("tolerance", "must be positive")

    ranks = tuple(int(r) for r in raw["ranks"]) if raw.get("ranks") else None
    fit_window = tuple(int(v) for v in raw["fit_window"]) if raw.get("fit_window") else None

    return ExperimentConfig(
        experiment=experiment,
        function=function,
        grid=grid,
        format=fmt,
        ranks=ranks,
        tolerance=tolerance,
        scheduler=scheduler,
        regime=regime,
        epsilons=tuple(float(e) for e in raw.get("epsilons", ())),
        m_values=tuple(int(m) for m in raw.get("m_values", ())),
        mode=int(raw.get("mode", 0)),
        fit_window=fit_window,
        expected_exponent=raw.get("expected_exponent"),
        exponent_tol=raw.get("exponent_tol"),
        seed=int(seed if seed is not None else raw.get("seed", 0)),
        cap=int(cap if cap is not None else raw.get("cap", DEFAULT_ELEMENT_CAP)),
    )


def load_config(path, cap=None, seed=None) -> ExperimentConfig:
    with open(path) as handle:
        try:
            raw = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ConfigError("<root>", f"invalid JSON: {exc}") from exc
    return parse_config(raw, cap=cap, seed=seed)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float):
        return f"{value:.12e}"
    return str(value)


def _write_csv(path: Path, experiment: str, header: Sequence[str], rows) -> None:
    lines = [f"# {CSV_SCHEMA} experiment={experiment}"]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _ranks_str(ranks) -> str:
    return "x".join(str(int(r)) for r in ranks)


def _sample_tensor(config: ExperimentConfig) -> DenseTensor:
    if config.function is None:
        raise ConfigError("function", "this experiment requires a function")
    if config.grid is None:
        raise ConfigError("grid", "this experiment requires a grid")
    domain = DomainSpec(config.function.dims)
    return sample(config.function, domain, config.grid, cap=config.cap).tensor


def _select_rank(spectrum: SingularSpectrum, rel_tol: float) -> int:
    """Minimal rank whose tail is <= rel_tol * total energy."""
    total = tail_energy(spectrum, 0)
    usable = spectrum.above_floor()
    for r in range(usable + 1):
        if tail_energy(spectrum, r) <= rel_tol * total:
            return max(r, 1)
    return max(usable, 1)


def _decompose(t: DenseTensor, fmt: str, ranks, tolerance):
    """Run one decomposition; returns (decomposition, ranks, error, bound)."""
    m = t.ndim
    if fmt == "tucker":
        if ranks is None:
            probe = hosvd(t, t.shape.extents)
            tol = tolerance if tolerance is not None else 1e-12
            ranks = tuple(_select_rank(sp, tol) for sp in probe.mode_spectra)
        ranks = tuple(min(int(r), n) for r, n in zip(ranks, t.shape.extents))
        d = hosvd(t, ranks)
        err = tucker_error(t, d)
        bound = d.tail_bound()
        cost = tucker_cost(ranks)
        storage = tucker_factor_storage(t.shape.extents, ranks)
    else:
        builder = tt_svd if fmt == "tt" else tt_svd_bidirectional
        if ranks is None:
            probe = builder(t)
            tol = tolerance if tolerance is not None else 1e-12
            ranks = tuple(_select_rank(sp, tol) for sp in probe.spectra)
        feasible = _tt_feasible(t.shape.extents)
        ranks = tuple(min(int(r), f) for r, f in zip(ranks, feasible))
        d = builder(t, ranks)
        err = tt_error(t, d)
        bound = d.tail_bound()
        cost = tt_cost(ranks)
        storage = tt_storage(t.shape.extents, ranks)
    return d, ranks, err, bound, cost, storage


def _tt_feasible(extents) -> list:
    out = []
    r_prev = 1
    for j in range(len(extents) - 1):
        r_prev = min(r_prev * extents[j], math.prod(extents[j + 1 :]))
        out.append(r_prev)
    return out


def _schedule_ranks_for(config: ExperimentConfig, epsilon: float) -> RankSchedule:
    base = config.scheduler
    if base is None:
        raise ConfigError("scheduler", "this experiment requires scheduler params")
    p = SchedulerParams(
        epsilon=epsilon,
        k=base.k,
        dims=base.dims,
        delta=base.delta,
        delta_prime=base.delta_prime,
        gamma=base.gamma,
    )
    regime = config.regime
    if regime is None:
        regime = REGIME_TUCKER if config.format == "tucker" else REGIME_TT
    return build_schedule(regime, p)


def run(config: ExperimentConfig, out_dir) -> ExperimentReport:
    """Dispatch one experiment; deterministic for fixed config and seed."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = ExperimentReport(config.experiment, out_dir)
    started = time.perf_counter()
    runner = {
        "decompose": _run_decompose,
        "spectrum": _run_spectrum,
        "schedule": _run_schedule,
        "decay-rate": _run_decay_rate,
        "rank-vs-eps": _run_rank_vs_eps,
        "dim-robustness": _run_dim_robustness,
        "compare-formats": compare_formats_into,
    }[config.experiment]
    runner(config, report)
    elapsed = time.perf_counter() - started
    report.summary_lines.append(f"- wall time: {elapsed:.3f} s")
    report.summary_lines.append(f"- bound violations: {report.violations}")
    summary = [f"# {config.experiment}", ""]
    summary.extend(report.summary_lines)
    report.summary_path = out_dir / "summary.md"
    report.summary_path.write_text("\n".join(summary) + "\n")
    return report


def _run_decompose(config: ExperimentConfig, report: ExperimentReport) -> None:
    t = _sample_tensor(config)
    _, ranks, err, bound, cost, storage = _decompose(
        t, config.format, config.ranks, config.tolerance
    )
    slack = bound + 1e-10 * frobenius_norm(t)
    ok = err <= slack
    if not ok:
        report.violations += 1
    rows = [[config.format, _ranks_str(ranks), err, slack, cost, storage, ok]]
    path = report.out_dir / "decompose.csv"
    _write_csv(path, "decompose", ["format", "ranks", "error", "bound", "cost", "storage", "within_bound"], rows)
    report.csv_paths.append(path)
    report.summary_lines += [
        f"- function: {config.function.id}",
        f"- format: {config.format}, ranks {_ranks_str(ranks)}",
        f"- error {err:.6e} vs bound {slack:.6e} -> {'PASS' if ok else 'FAIL'}",
    ]


def _spectrum_of(config: ExperimentConfig) -> SingularSpectrum:
    t = _sample_tensor(config)
    mat = mode_unfolding(t, config.mode)
    _, s, _ = full_svd(mat)
    return SingularSpectrum(s)


def _run_spectrum(config: ExperimentConfig, report: ExperimentReport) -> None:
    spectrum = _spectrum_of(config)
    rows = [
        [alpha + 1, sigma, sigma ** 2]
        for alpha, sigma in enumerate(spectrum.values)
    ]
    path = report.out_dir / "spectrum.csv"
    _write_csv(path, "spectrum", ["alpha", "sigma", "lambda"], rows)
    report.csv_paths.append(path)
    fit = fit_decay_exponent(spectrum, window=config.fit_window)
    report.summary_lines += [
        f"- function: {config.function.id}, mode {config.mode}",
        f"- fitted lambda exponent: {fit.exponent:.4f} (r2 {fit.r2:.4f}, "
        f"window alpha {fit.window[0]}..{fit.window[1]})",
    ]
    _check_exponent(config, report, fit.exponent)


def _check_exponent(config, report, exponent) -> None:
    if config.expected_exponent is None:
        return
    tol = config.exponent_tol if config.exponent_tol is not None else 0.3
    ok = abs(exponent - config.expected_exponent) <= tol
    if not ok:
        report.violations += 1
    report.summary_lines.append(
        f"- exponent target {config.expected_exponent} +- {tol}: "
        f"{'PASS' if ok else 'FAIL'}"
    )


def _run_schedule(config: ExperimentConfig, report: ExperimentReport) -> None:
    schedule = _schedule_ranks_for(config, config.scheduler.epsilon)
    path = report.out_dir / "schedule.json"
    path.write_text(schedule.to_json())
    report.csv_paths.append(path)
    report.summary_lines += [
        f"- regime: {schedule.regime}",
        f"- ranks: {_ranks_str(schedule.ranks)}",
        f"- predicted cost: {schedule.predicted_cost}",
    ]
    if schedule.M is not None:
        report.summary_lines.append(
            f"- dimension truncation M = {schedule.M} "
            f"(printed closed form {schedule.paper_M_value:.6e})"
        )


def _run_decay_rate(config: ExperimentConfig, report: ExperimentReport) -> None:
    spectrum = _spectrum_of(config)
    fit = fit_decay_exponent(spectrum, window=config.fit_window)
    k = config.function.smoothness_k
    theory = None
    if isinstance(k, (int, float)):
        theory = -(2.0 * k / min(config.function.dims)) - 1.0
    rows = [[fit.exponent, fit.r2, fit.window[0], fit.window[1],
             theory if theory is not None else ""]]
    path = report.out_dir / "decay_rate.csv"
    _write_csv(path, "decay-rate",
               ["fitted_exponent", "r2", "window_first", "window_last", "theory_exponent"],
               rows)
    report.csv_paths.append(path)
    report.summary_lines.append(
        f"- fitted lambda exponent {fit.exponent:.4f}, theory "
        f"{theory if theory is not None else 'n/a (analytic)'}"
    )
    _check_exponent(config, report, fit.exponent)


def _run_rank_vs_eps(config: ExperimentConfig, report: ExperimentReport) -> None:
    if not config.epsilons:
        raise ConfigError("epsilons", "rank-vs-eps needs a list of epsilons")
    t = _sample_tensor(config)
    norm = frobenius_norm(t)
    m = t.ndim
    rows = []
    for eps in config.epsilons:
        schedule = _schedule_ranks_for(config, eps)
        ranks = schedule.active_ranks()
        _, ranks, err, bound, cost, _ = _decompose(t, config.format, ranks, None)
        slack = bound + 1e-10 * norm
        ok = err <= slack
        if not ok:
            report.violations += 1
        rows.append([eps, _ranks_str(ranks), cost, err, slack,
                     math.sqrt(m) * eps, ok])
    path = report.out_dir / "rank_vs_eps.csv"
    _write_csv(path, "rank-vs-eps",
               ["epsilon", "ranks", "cost", "error", "bound", "sqrt_m_eps", "within_bound"],
               rows)
    report.csv_paths.append(path)
    report.summary_lines.append(f"- {len(rows)} epsilon values, format {config.format}")


def _run_dim_robustness(config: ExperimentConfig, report: ExperimentReport) -> None:
    if not config.m_values:
        raise ConfigError("m_values", "dim-robustness needs a list of mode counts")
    base = config.scheduler
    if base is None:
        raise ConfigError("scheduler", "dim-robustness needs scheduler params")
    n = base.dims[0]
    rows = []
    for m in config.m_values:
        p = SchedulerParams(
            epsilon=base.epsilon, k=base.k, dims=(n,) * m,
            delta=base.delta, delta_prime=base.delta_prime, gamma=None,
        )
        weighted = build_schedule(REGIME_TUCKER_WEIGHTED, p)
        unweighted = build_schedule(REGIME_TUCKER, p)
        rows.append([
            m,
            weighted.predicted_cost,
            math.log(weighted.predicted_cost),
            math.log(unweighted.predicted_cost),
        ])
    path = report.out_dir / "dim_robustness.csv"
    _write_csv(path, "dim-robustness",
               ["m", "weighted_cost", "log_cost_weighted", "log_cost_unweighted"],
               rows)
    report.csv_paths.append(path)
    ms = np.array([r[0] for r in rows], dtype=float)
    log_unweighted = np.array([r[3] for r in rows])
    slope = float(np.polyfit(ms, log_unweighted, 1)[0]) if len(rows) > 1 else float("nan")
    expected_slope = (n / base.k) * math.log(1.0 / base.epsilon)
    report.summary_lines += [
        f"- unweighted log-cost slope {slope:.6f} "
        f"(theory {expected_slope:.6f})",
        f"- weighted log-cost range {rows[0][2]:.6f} .. {rows[-1][2]:.6f}",
    ]


def compare_formats_into(config: ExperimentConfig, report: ExperimentReport) -> None:
    t = _sample_tensor(config)
    norm = frobenius_norm(t)
    rows = []
    timings = []
    for fmt in FORMATS:
        ranks = config.ranks
        if ranks is not None and fmt == "tucker" and len(ranks) == t.ndim - 1:
            ranks = None  # bond ranks do not apply to the Tucker format
        begin = time.perf_counter()
        _, used, err, bound, cost, storage = _decompose(t, fmt, ranks, config.tolerance)
        timings.append((fmt, time.perf_counter() - begin))
        slack = bound + 1e-10 * norm
        ok = err <= slack
        if not ok:
            report.violations += 1
        rows.append([fmt, _ranks_str(used), err, slack, cost, storage, ok])
    path = report.out_dir / "compare_formats.csv"
    _write_csv(path, "compare-formats",
               ["format", "ranks", "error", "bound", "cost", "storage", "within_bound"],
               rows)
    report.csv_paths.append(path)
    for fmt, dt in timings:
        report.summary_lines.append(f"- {fmt}: {dt:.3f} s")


def compare_formats(config: ExperimentConfig, out_dir) -> ExperimentReport:
    """Side-by-side Tucker / TT / bidirectional-TT comparison."""
    cfg = ExperimentConfig(**{**config.__dict__, "experiment": "compare-formats"})
    return run(cfg, out_dir)
