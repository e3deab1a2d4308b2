"""Batch command-line front end.

Each run reads an optional INI config (``[model]``, ``[kernel]``, ``[run]``
sections); environment variables ``PARISIAN_SEED`` and ``PARISIAN_WORKERS``
override it and command-line flags override both. Output files are written to
a temporary name and renamed on success.

Exit codes: 0 success, 2 parameter or coverage error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

from .asymptotics import Case, asymptotic_ruin, classify, constant_case_i_ii, constant_case_iii, pickands_table_for
from .errors import CoverageError, NumericError, ParameterError, ParisianError
from .kernels import Family, KernelSpec, RiskModel, kernel_from_section, model_from_config
from .montecarlo import (
    DEFAULT_GRID_STEP,
    DEFAULT_N_PATHS,
    DEFAULT_SEED,
    Budget,
    EstimateWithCI,
    build_pickands_table,
    ruin_prob_sweep,
    scaling_check,
)
from .sampler import Grid, map_paths, path_source

EXIT_OK, EXIT_PARAMETER, EXIT_NUMERIC = 0, 2, 3
MODEL_FLAGS = ("example", "alpha", "a", "kappa", "d", "gamma")
KERNEL_FLAGS = ("family", "alpha", "a", "kappa", "rho", "anchor")
RUN_KEYS = ("kappa", "seed", "workers", "n_paths", "grid_step", "u", "L", "T", "epsilon", "L_grid", "T_ladder", "graded",
            "horizon", "output", "format")


def fmt(x: float) -> str:
    """Shortest round-trip decimal."""
    return repr(float(x))


def parse_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in str(text).replace(";", ",").split(",") if v.strip()]
    except ValueError as exc:
        raise ParameterError(f"cannot parse number list {text!r}") from exc


def parse_graded(text: str) -> Grid:
    """``end:step,end:step,...`` into a piecewise-uniform grid from 0."""
    segments = []
    for part in str(text).split(","):
        try:
            end, step = part.split(":")
            segments.append((float(end), _fraction(step)))
        except ValueError as exc:
            raise ParameterError(f"bad graded segment {part!r}; expected end:step") from exc
    return Grid.graded(segments)


def _fraction(text: str) -> float:
    text = text.strip()
    if "/" in text:
        num, den = text.split("/")
        return float(num) / float(den)
    return float(text)


@dataclass
class RunConfig:
    """Resolved parameters of one command invocation."""

    model_section: dict = field(default_factory=dict)
    kernel_section: dict = field(default_factory=dict)
    y_kernel_section: dict = field(default_factory=dict)
    run: dict = field(default_factory=dict)

    def get(self, key: str, default=None):
        return self.run.get(key, default)

    def float_(self, key: str, default: float | None = None) -> float | None:
        value = self.run.get(key)
        return default if value is None else _fraction(str(value))

    def int_(self, key: str, default: int | None = None) -> int | None:
        value = self.run.get(key)
        if value is None:
            return default
        try:
            return int(str(value))
        except ValueError as exc:
            raise ParameterError(f"{key}={value!r} is not an integer") from exc

    def budget(self) -> Budget:
        ladder = self.get("T_ladder")
        n = self.int_("n_paths", DEFAULT_N_PATHS)
        step = self.float_("grid_step", DEFAULT_GRID_STEP)
        if n < 1 or not step > 0:
            raise ParameterError("budgets must be positive")
        return Budget(n_paths=n, grid_step=step, seed=self.int_("seed", DEFAULT_SEED),
                      T_ladder=tuple(parse_floats(ladder)) if ladder else None, workers=self.int_("workers"))

    def model(self) -> RiskModel:
        sec = dict(self.model_section)
        if not sec:
            raise ParameterError("no model given: use --example or a config with a [model] section")
        cfg = configparser.ConfigParser()
        cfg.optionxform = str
        cfg["model"] = sec
        if self.kernel_section:
            cfg["kernel"] = self.kernel_section
        if self.y_kernel_section:
            cfg["y_kernel"] = self.y_kernel_section
        return model_from_config(cfg)

    def kernel(self) -> KernelSpec:
        if not self.kernel_section.get("family"):
            raise ParameterError("no kernel given: use --family or a config with a [kernel] section")
        sec = dict(self.kernel_section)
        try:
            family = Family(sec["family"].strip().lower())
        except ValueError as exc:
            raise ParameterError(f"unknown kernel family {sec['family']!r}") from exc
        if family not in (Family.TIME_CHANGED, Family.ANCHORED, Family.REVERSED):
            allowed = set(KernelSpec(family).params)
            sec = {k: v for k, v in sec.items() if k == "family" or k in allowed or "." in k}
        return kernel_from_section(sec)


def build_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig()
    if getattr(args, "config", None):
        if not os.path.exists(args.config):
            raise ParameterError(f"config file {args.config!r} does not exist")
        cfg = configparser.ConfigParser()
        cfg.optionxform = str
        cfg.read(args.config)
        config.model_section = dict(cfg["model"]) if "model" in cfg else {}
        config.kernel_section = dict(cfg["kernel"]) if "kernel" in cfg else {}
        config.y_kernel_section = dict(cfg["y_kernel"]) if "y_kernel" in cfg else {}
        config.run = dict(cfg["run"]) if "run" in cfg else {}
    for env, key in (("PARISIAN_SEED", "seed"), ("PARISIAN_WORKERS", "workers")):
        if os.environ.get(env):
            config.run[key] = os.environ[env]
    flags = vars(args)
    if flags.get("example"):
        # A new example replaces an explicit model from the file.
        config.model_section = {"example": flags["example"]}
    for key in MODEL_FLAGS[1:]:
        if flags.get(key) is not None and "example" in config.model_section:
            config.model_section[key] = repr(flags[key])
    if flags.get("family"):
        config.kernel_section = {"family": flags["family"]}
    for key in KERNEL_FLAGS[1:]:
        if flags.get(key) is not None and config.kernel_section.get("family"):
            config.kernel_section[key] = repr(flags[key])
    for key in RUN_KEYS:
        if flags.get(key) is not None:
            config.run[key] = str(flags[key])
    return config


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def csv_text(rows: list[list[str]]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def emit(text: str, output: str | None) -> None:
    """Write to ``output`` atomically, or to stdout."""
    if not output:
        sys.stdout.write(text)
        return
    tmp = f"{output}.tmp{os.getpid()}"
    try:
        with open(tmp, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, output)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _epsilon(config: RunConfig) -> float | None:
    return config.float_("epsilon")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_classify(config: RunConfig) -> int:
    report = classify(config.model(), _epsilon(config))
    if config.get("format", "text") == "json" or config.get("output"):
        sys.stderr.write(report.describe() + "\n")
        emit(report.to_json() + "\n", config.get("output"))
    else:
        sys.stdout.write(report.describe() + "\n")
        sys.stdout.write(report.to_json() + "\n")
    return EXIT_OK


def cmd_pickands(config: RunConfig) -> int:
    kappa = config.float_("kappa")
    if kappa is None:
        kappa = float(config.kernel_section.get("kappa", 1.0)) if config.kernel_section else 1.0
    L_grid = parse_floats(config.get("L_grid", "0"))
    table = build_pickands_table(kappa, L_grid, config.budget())
    if table.extrapolation_note:
        sys.stderr.write(f"note: {table.extrapolation_note}\n")
    sys.stderr.write(f"isotonic correction: {fmt(table.isotonic_correction)}\n")
    emit(csv_text(table.to_csv_rows()), config.get("output"))
    return EXIT_OK


def _ruin_grid(config: RunConfig, T: float, L_max: float) -> Grid | None:
    graded = config.get("graded")
    if graded:
        grid = parse_graded(graded)
        if grid.end < T + L_max - 1e-12:
            raise CoverageError(f"graded grid ends at {grid.end!r}, below T + L = {T + L_max!r}")
        return grid
    return None


def _estimate_row(est: EstimateWithCI) -> list[str]:
    return [fmt(est.value), fmt(est.std_error), str(est.n_samples), str(est.seed), fmt(est.grid_step),
            fmt(est.effective_L)]


def cmd_ruin_mc(config: RunConfig) -> int:
    model = config.model()
    budget = config.budget()
    u_values = parse_floats(config.get("u", "3"))
    L = config.float_("L", 0.0)
    T = config.float_("T", model.horizon_T)
    grid = _ruin_grid(config, T, L)
    ests = ruin_prob_sweep(model, u_values, [L], T, budget.n_paths, budget.seed, grid, budget.grid_step,
                           budget.workers)
    rows = [["u", "L", "value", "std_error", "n_samples", "seed", "grid_step", "effective_L", "note"]]
    for u, est in zip(u_values, ests):
        rows.append([fmt(u), fmt(L)] + _estimate_row(est) + [est.notes.get("zero_hits", "")])
    emit(csv_text(rows), config.get("output"))
    return EXIT_OK


def _constant_for(model: RiskModel, config: RunConfig, L: float):
    report = classify(model, _epsilon(config))
    budget = config.budget()
    if report.case_label in (Case.I, Case.II):
        table = pickands_table_for(model, report, L, budget)
        return report, constant_case_i_ii(model, report, L, table)
    return report, constant_case_iii(model, L, budget, report)


def cmd_asymptotics(config: RunConfig) -> int:
    model = config.model()
    u_values = parse_floats(config.get("u", "3"))
    L = config.float_("L", 0.0)
    report, constant = _constant_for(model, config, L)
    rows = [["u", "L_u", "p", "c", "c_error", "survival", "asymptotic"]]
    for u in u_values:
        res = asymptotic_ruin(model, u, L, _epsilon(config), constant=constant)
        rows.append([fmt(u), fmt(res.L_u), fmt(res.p), fmt(constant.value), fmt(constant.error), fmt(res.survival),
                     fmt(res.value)])
    sys.stderr.write(report.describe() + "\n")
    emit(csv_text(rows), config.get("output"))
    return EXIT_OK


@dataclass
class ValidationRow:
    u: float
    L_u: float
    mc_estimate: EstimateWithCI
    asymptotic: float
    ratio: float
    z_score: float

    def csv(self) -> list[str]:
        return [fmt(self.u), fmt(self.L_u), fmt(self.mc_estimate.value), fmt(self.mc_estimate.std_error),
                str(self.mc_estimate.n_samples), fmt(self.asymptotic), fmt(self.ratio), fmt(self.z_score),
                self.mc_estimate.notes.get("zero_hits", "")]


VALIDATION_HEADER = ["u", "L_u", "mc", "mc_std_error", "n_samples", "asymptotic", "ratio", "z_score", "note"]


def validation_rows(config: RunConfig) -> list[ValidationRow]:
    model = config.model()
    budget = config.budget()
    u_values = parse_floats(config.get("u", "2.5,3,3.5"))
    if any(b <= a for a, b in zip(u_values, u_values[1:])):
        raise ParameterError("validation u grid must be increasing")
    L = config.float_("L", 0.0)
    T = config.float_("T", model.horizon_T)
    _, constant = _constant_for(model, config, L)
    results = [asymptotic_ruin(model, u, L, _epsilon(config), constant=constant) for u in u_values]
    L_values = [r.L_u for r in results]
    grid = _ruin_grid(config, T, max(L_values))
    ests = ruin_prob_sweep(model, u_values, L_values, T, budget.n_paths, budget.seed, grid, budget.grid_step,
                           budget.workers)
    rows = []
    for u, res, est in zip(u_values, results, ests):
        ratio = est.value / res.value if res.value > 0 else math.nan
        z = (est.value - res.value) / est.std_error if est.std_error > 0 else math.nan
        rows.append(ValidationRow(u, res.L_u, est, res.value, ratio, z))
    return rows


def cmd_validate(config: RunConfig) -> int:
    rows = validation_rows(config)
    deviations = [abs(r.ratio - 1.0) for r in rows]
    trend = all(b <= a for a, b in zip(deviations, deviations[1:]))
    sys.stderr.write(f"|ratio - 1| non-increasing in u: {'yes' if trend else 'no'}\n")
    emit(csv_text([VALIDATION_HEADER] + [r.csv() for r in rows]), config.get("output"))
    return EXIT_OK


def cmd_scaling_check(config: RunConfig) -> int:
    report = scaling_check(config.kernel(), config.float_("L", 0.0), config.budget())
    emit(_json(report.to_dict()), config.get("output"))
    sys.stderr.write(f"z = {report.z_score:.3f}\n")
    return EXIT_OK


def cmd_sample(config: RunConfig) -> int:
    kernel = config.kernel()
    budget = config.budget()
    grid = parse_graded(config.get("graded")) if config.get("graded") else Grid.uniform(
        config.float_("horizon", 1.0), budget.grid_step)
    method = "cholesky" if kernel.family is not Family.FBM else "auto"
    source = path_source(kernel, grid, budget.seed, method)
    values = map_paths(source, budget.n_paths, lambda block: block, budget.workers)
    rows = [[fmt(t) for t in grid.points]] + [[fmt(v) for v in row] for row in values]
    emit(csv_text(rows), config.get("output"))
    return EXIT_OK


COMMANDS = {
    "classify": cmd_classify,
    "pickands": cmd_pickands,
    "ruin-mc": cmd_ruin_mc,
    "asymptotics": cmd_asymptotics,
    "validate": cmd_validate,
    "scaling-check": cmd_scaling_check,
    "sample": cmd_sample,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="parisian-ruin", description="Parisian ruin simulation and asymptotics.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file with [model], [kernel], [run] sections")
    common.add_argument("--output", "-o", help="output file (default: stdout)")
    common.add_argument("--format", choices=["text", "json", "csv"], help="output format where applicable")
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int, help="worker threads (default: available CPUs)")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--example", help="ex31 ... ex37")
    model.add_argument("--alpha", type=float)
    model.add_argument("--a", type=float)
    model.add_argument("--kappa", type=float)
    model.add_argument("--d", type=float)
    model.add_argument("--gamma", type=float)
    model.add_argument("--epsilon", type=float, help="case II window parameter")

    kernel = argparse.ArgumentParser(add_help=False)
    kernel.add_argument("--family", help="kernel family, e.g. fbm, sub_fbm")
    kernel.add_argument("--rho", type=float)
    kernel.add_argument("--anchor", type=float)

    budget = argparse.ArgumentParser(add_help=False)
    budget.add_argument("--n-paths", dest="n_paths", type=int)
    budget.add_argument("--grid-step", dest="grid_step", type=str, help="e.g. 0.001953125 or 1/512")
    budget.add_argument("--T-ladder", dest="T_ladder", help="comma-separated horizons for Pickands limits")

    window = argparse.ArgumentParser(add_help=False)
    window.add_argument("--u", help="comma-separated thresholds")
    window.add_argument("--L", type=float, help="window constant L (L_u = L u^exponent)")
    window.add_argument("--T", type=float, help="ruin horizon (default: model horizon)")
    window.add_argument("--graded", help="graded grid 'end:step,...', e.g. '0.125:1/1024,0.5:1/256,1:1/64'")

    sub.add_parser("classify", parents=[common, model], help="regime classification")
    p = sub.add_parser("pickands", parents=[common, budget], help="table of Parisian Pickands constants")
    p.add_argument("--kappa", type=float)
    p.add_argument("--L-grid", dest="L_grid", help="comma-separated L values")
    sub.add_parser("ruin-mc", parents=[common, model, budget, window], help="Monte Carlo ruin probabilities")
    sub.add_parser("asymptotics", parents=[common, model, budget, window], help="asymptotic ruin probabilities")
    sub.add_parser("validate", parents=[common, model, budget, window], help="Monte Carlo versus asymptotics")
    s = sub.add_parser("scaling-check", parents=[common, kernel, budget], help="scaling identity check")
    for name in ("alpha", "a", "kappa"):
        s.add_argument(f"--{name}", type=float)
    s.add_argument("--L", type=float)
    smp = sub.add_parser("sample", parents=[common, kernel, budget], help="dump sample paths as CSV")
    for name in ("alpha", "a", "kappa"):
        smp.add_argument(f"--{name}", type=float)
    smp.add_argument("--horizon", type=float, help="grid end (default 1)")
    smp.add_argument("--graded", help="graded grid 'end:step,...'")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = build_config(args)
        return COMMANDS[args.command](config)
    except (ParameterError, CoverageError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARAMETER
    except (NumericError, ParisianError) as exc:
        sys.stderr.write(f"numeric error: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
