"""Command-line entry point.

Four subcommands: `analyze` (tail ratios and the Hardy-type constants of a
one-dimensional measure), `tau` (the certificate suites for the product
inequality and its ingredient bounds), `poincare` (variance bounds and the
closure back to tail membership), `concentrate` (product-measure Monte
Carlo).  Structured inputs come from a JSON config file; flags cover only
paths, seed, format, and verbosity.

Exit codes: 0 success, 2 config error, 3 invalid measure, 4 degenerate
experiment, 5 certificate violation.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .concentration import (
    deviation_function_from_dict,
    product_from_dict,
    set_from_dict,
    verify_cost_ball_enlargement,
    verify_lipschitz_deviation,
    verify_two_level_enlargement,
)
from .convexfn import PLConvex, random_plconvex
from .errors import (
    ConfigError,
    DegenerateInputError,
    MeasureInvalidError,
    TaucertError,
)
from .infconv import envelope_drop_certificate
from .measure1d import (
    bobkov_goetze_constant,
    lambda_star,
    measure_from_dict,
    muckenhoupt_constant,
    restrict_positive,
)
from .poincare import certify_poincare_to_tail, cp_lower_bound
from .reports import render_records, render_table
from .tauverify import (
    certify_exponential_increment,
    certify_halfline_increment,
    certify_tail_to_tau,
    certify_tau_to_poincare,
    default_exponential_suite,
    default_halfline_suite,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MEASURE = 3
EXIT_DEGENERATE = 4
EXIT_VIOLATION = 5

_TAU_SUITES = (
    "tail_to_tau",
    "halfline_increment",
    "exponential_increment",
    "envelope_drop",
    "tau_to_poincare",
)


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg

def _check_keys(cfg: dict, allowed: set, what: str) -> None:
    extra = set(cfg) - allowed
    if extra:
        raise ConfigError(f"unknown keys {sorted(extra)} in {what} config")


def _positive_int(cfg, key, default) -> int:
    val = cfg.get(key, default)
    if not isinstance(val, int) or isinstance(val, bool) or val < 0:
        raise ConfigError(f"{key} must be a nonnegative integer")
    return val


def _finite_number(cfg, key, default=None, required=False):
    if key not in cfg:
        if required:
            raise ConfigError(f"missing required key {key!r}")
        return default
    val = cfg[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
        raise ConfigError(f"{key} must be a finite number")
    return float(val)


def _need_seed(args, why: str) -> int:
    if args.seed is None:
        raise ConfigError(f"--seed is required: {why}")
    return args.seed


class _Output:
    """Collects (record_name, payload) pairs plus rendered tables."""

    def __init__(self, args):
        self.format = args.format
        self.quiet = args.quiet
        self.out = args.out
        self.records = []
        self.tables = []

    def add(self, name: str, payload: dict, table: str | None = None) -> None:
        self.records.append((name, payload))
        if table is not None:
            self.tables.append(table)

    def add_table(self, table: str) -> None:
        self.tables.append(table)

    def emit(self) -> None:
        if self.format == "records":
            text = render_records(self.records)
        else:
            text = "\n".join(self.tables)
        if self.out:
            with open(self.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        elif not self.quiet:
            sys.stdout.write(text)


# --------------------------------------------------------------------------
# analyze


def _derived_constants(lam: float, h: float) -> tuple[float, float]:
    if lam >= 1.0:
        return math.inf, math.inf
    c_tau = 17.0 * h / (1.0 - lam) ** 2
    return c_tau, c_tau * c_tau / 2.0


def cmd_analyze(args) -> int:
    cfg = _load_config(args.config)
    _check_keys(cfg, {"measure", "h", "lambda"}, "analyze")
    if "measure" not in cfg:
        raise ConfigError("missing required key 'measure'")
    mu = measure_from_dict(cfg["measure"])
    h_values = cfg.get("h", [1.0])
    if isinstance(h_values, (int, float)) and not isinstance(h_values, bool):
        h_values = [h_values]
    if not isinstance(h_values, list) or not h_values:
        raise ConfigError("h must be a number or a nonempty list of numbers")
    query = _finite_number(cfg, "lambda", None)

    out = _Output(args)
    rows = []
    for h in h_values:
        if isinstance(h, bool) or not isinstance(h, (int, float)) or not h > 0:
            raise ConfigError("each h must be a positive number")
        cert = lambda_star(mu, float(h), lambda_query=query)
        c_tau, c_p = _derived_constants(cert.lambda_star, float(h))
        payload = cert.to_dict()
        payload.update({"measure": mu.describe(), "c_tau": c_tau, "c_p": c_p})
        out.add("tail_ratio", payload)
        rows.append((h, cert.lambda_star, c_tau, c_p))
    out.add_table(
        render_table(
            f"tail ratios: {mu.describe()}",
            ["h", "lambda_star", "c_tau", "c_p"],
            rows,
        )
    )

    consts = {"measure": mu.describe()}
    try:
        consts["muckenhoupt"] = muckenhoupt_constant(mu)
    except TaucertError as exc:
        consts["muckenhoupt"] = None
        consts["muckenhoupt_note"] = str(exc)
    try:
        consts["bobkov_goetze"] = bobkov_goetze_constant(mu)
    except TaucertError as exc:
        consts["bobkov_goetze"] = None
        consts["bobkov_goetze_note"] = str(exc)
    out.add("hardy_constants", consts)
    out.add_table(
        render_table(
            "Hardy-type constants",
            ["constant", "value"],
            [
                ("muckenhoupt", consts["muckenhoupt"]),
                ("bobkov_goetze", consts["bobkov_goetze"]),
            ],
        )
    )
    out.emit()
    return EXIT_OK


# --------------------------------------------------------------------------
# tau


def _envelope_drop_suite(rng, c1: float, h: float, count: int):
    """Functions inside the slope budget 1/(c1*h), including boundary cases."""
    budget = 1.0 / (c1 * h)
    suite = [
        ("linear_at_budget", PLConvex((), (budget,), (0.0, 0.0))),
        ("vee_near_budget", PLConvex((0.0,), (-0.99 * budget, 0.99 * budget), (0.0, 0.0))),
    ]
    for i in range(count):
        f = random_plconvex(rng, bounded_below=True)
        peak = max(abs(f.slopes[0]), abs(f.slopes[-1]))
        if peak > 0.98 * budget:
            f = f.scaled(0.98 * budget / peak)
        suite.append((f"random(trial={i})", f))
    return suite


def cmd_tau(args) -> int:
    cfg = _load_config(args.config)
    _check_keys(
        cfg,
        {"measure", "h", "trials", "suites", "c_tau_scale", "adversarial_budget",
         "random_increments", "tolerance"},
        "tau",
    )
    if "measure" not in cfg:
        raise ConfigError("missing required key 'measure'")
    mu = measure_from_dict(cfg["measure"])
    h = _finite_number(cfg, "h", required=True)
    if h <= 0:
        raise ConfigError("h must be positive")
    trials = _positive_int(cfg, "trials", 50)
    scale = _finite_number(cfg, "c_tau_scale", 1.0)
    budget = _positive_int(cfg, "adversarial_budget", 100)
    randn = _positive_int(cfg, "random_increments", 8)
    tol = _finite_number(cfg, "tolerance", 1e-8)
    suites = cfg.get("suites", list(_TAU_SUITES))
    if not isinstance(suites, list) or not suites:
        raise ConfigError("suites must be a nonempty list")
    for name in suites:
        if name not in _TAU_SUITES:
            raise ConfigError(f"unknown suite {name!r}; choose from {list(_TAU_SUITES)}")
    seed = _need_seed(args, "tau suites draw random functions")

    cert = lambda_star(mu, h)
    lam = cert.lambda_star
    out = _Output(args)
    violations = 0

    if "tail_to_tau" in suites:
        summary = certify_tail_to_tau(
            mu, h, trials=trials, seed=seed, c_tau_scale=scale,
            adversarial_budget=budget,
        )
        violations += summary.violations
        payload = {
            "measure": summary.measure,
            "h": summary.h,
            "lambda_star": summary.lambda_value,
            "c_tau": summary.c_tau,
            "trials": summary.trials,
            "violations": summary.violations,
            "divergent": summary.divergent,
            "worst_margin": None if summary.worst is None else summary.worst.margin,
            "worst_function": summary.worst_function,
        }
        if summary.adversarial is not None:
            payload["adversarial_margin"] = summary.adversarial.margin
        out.add(
            "tail_to_tau",
            payload,
            render_table(
                "product inequality suite",
                ["measure", "c_tau", "trials", "violations", "worst_margin"],
                [(summary.measure, summary.c_tau, summary.trials, summary.violations,
                  None if summary.worst is None else summary.worst.margin)],
            ),
        )

    rng = np.random.default_rng(seed + 1)
    if "halfline_increment" in suites:
        mu_plus = restrict_positive(mu)
        rows = []
        for name, gx, gy in default_halfline_suite(mu_plus, h, rng, random_count=randn):
            rep = certify_halfline_increment(mu_plus, h, lam, gx, gy, name, tolerance=tol)
            violations += 0 if rep.passed else 1
            out.add("halfline_increment", rep.to_dict())
            rows.append((rep.name, rep.lhs, rep.rhs, rep.slack, rep.passed))
        out.add_table(
            render_table("half-line increment bound",
                         ["function", "lhs", "rhs", "slack", "pass"], rows)
        )

    if "exponential_increment" in suites:
        rows = []
        for name, f in default_exponential_suite(mu, h, rng, random_count=randn):
            rep = certify_exponential_increment(mu, h, lam, f, name, tolerance=tol)
            violations += 0 if rep.passed else 1
            out.add("exponential_increment", rep.to_dict())
            rows.append((rep.name, rep.lhs, rep.rhs, rep.slack, rep.passed))
        out.add_table(
            render_table("exponential increment bound",
                         ["function", "lhs", "rhs", "slack", "pass"], rows)
        )

    if "envelope_drop" in suites:
        if lam >= 1.0:
            raise DegenerateInputError("tail ratio 1 leaves no envelope slope budget")
        c1 = scale * 17.0 / (1.0 - lam) ** 2
        rows = []
        for name, f in _envelope_drop_suite(rng, c1, h, max(trials, 10)):
            rep = envelope_drop_certificate(f, c1, h)
            violations += 0 if rep.passed else 1
            out.add(
                "envelope_drop",
                {"name": name, "c1": rep.c1, "h": rep.h,
                 "max_violation": rep.max_violation, "worst_x": rep.worst_x,
                 "checked": rep.checked, "passed": rep.passed},
            )
            rows.append((name, rep.max_violation, rep.checked, rep.passed))
        out.add_table(
            render_table("envelope drop bound",
                         ["function", "max_violation", "checked", "pass"], rows)
        )

    if "tau_to_poincare" in suites:
        if lam >= 1.0:
            raise DegenerateInputError("tail ratio 1 gives an infinite variance bound")
        c_tau = scale * 17.0 * h / (1.0 - lam) ** 2
        summary = certify_tau_to_poincare(mu, c_tau, trials=trials, seed=seed + 2,
                                          tolerance=tol)
        violations += summary.violations
        out.add(
            "tau_to_poincare",
            {
                "measure": summary.measure,
                "c_tau": summary.c_tau,
                "bound_constant": summary.bound_constant,
                "trials": summary.trials,
                "violations": summary.violations,
                "worst_slack": summary.worst_slack,
                "worst_function": summary.worst_function,
            },
            render_table(
                "variance bound suite",
                ["measure", "bound_constant", "trials", "violations", "worst_slack"],
                [(summary.measure, summary.bound_constant, summary.trials,
                  summary.violations, summary.worst_slack)],
            ),
        )

    out.add(
        "tau_summary",
        {"measure": mu.describe(), "h": h, "violations": violations,
         "passed": violations == 0},
        render_table("overall", ["violations", "pass"],
                     [(violations, violations == 0)]),
    )
    out.emit()
    return EXIT_OK if violations == 0 else EXIT_VIOLATION


# --------------------------------------------------------------------------
# poincare


def cmd_poincare(args) -> int:
    cfg = _load_config(args.config)
    _check_keys(cfg, {"measure", "cp", "trials", "hinge_count", "diag_points"}, "poincare")
    if "measure" not in cfg:
        raise ConfigError("missing required key 'measure'")
    mu = measure_from_dict(cfg["measure"])
    diag = _positive_int(cfg, "diag_points", 64)
    out = _Output(args)

    if "cp" in cfg:
        cp = _finite_number(cfg, "cp", required=True)
        if cp <= 0:
            raise ConfigError("cp must be positive")
        witness = "given"
    else:
        trials = _positive_int(cfg, "trials", 64)
        hinges = _positive_int(cfg, "hinge_count", 256)
        seed = _need_seed(args, "the variance witness search draws random functions")
        est = cp_lower_bound(mu, u_count=hinges, trials=trials, seed=seed)
        cp = est.cp_lower
        witness = est.witness
        out.add(
            "cp_lower_bound",
            {"measure": mu.describe(), "cp_lower": est.cp_lower,
             "witness": est.witness, "probes": est.probes},
        )

    rep = certify_poincare_to_tail(mu, cp, diag_points=diag)
    payload = {
        "measure": mu.describe(),
        "cp": rep.cp,
        "cp_witness": witness,
        "h": rep.h,
        "lambda_star": rep.certificate.lambda_star,
        "lambda_query": rep.certificate.lambda_query,
        "member": rep.member,
        "diag_min_slack": rep.diag_min_slack,
        "diag_worst_u": rep.diag_worst_u,
    }
    out.add(
        "poincare_to_tail",
        payload,
        render_table(
            f"variance bound closure: {mu.describe()}",
            ["cp", "h", "lambda_star", "member"],
            [(rep.cp, rep.h, rep.certificate.lambda_star, rep.member)],
        ),
    )
    out.emit()
    return EXIT_OK if rep.member else EXIT_VIOLATION


# --------------------------------------------------------------------------
# concentrate


def _concentrate_common(cfg) -> tuple:
    pm = product_from_dict(cfg["measure"])
    t_grid = cfg.get("t_grid")
    if not isinstance(t_grid, list) or not t_grid:
        raise ConfigError("t_grid must be a nonempty list")
    samples = _positive_int(cfg, "samples", 100_000)
    confidence = _finite_number(cfg, "confidence", 0.999)
    if not 0.0 < confidence < 1.0:
        raise ConfigError("confidence must be in (0, 1)")
    return pm, t_grid, samples, confidence


def _enlargement_table(rep) -> str:
    rows = [
        (row.t, row.ell2_radius, row.ell1_radius, row.empirical,
         row.confidence_radius, row.bound, row.passed)
        for row in rep.rows
    ]
    title = (
        f"{rep.kind}: {rep.measure}, {rep.set_family}, "
        f"base mass {rep.base_probability:.5f}, "
        f"{'exact' if rep.exact_geometry else 'superset proxy'}"
    )
    return render_table(
        title, ["t", "s", "r", "empirical", "conf_radius", "bound", "pass"], rows
    )


def cmd_concentrate(args) -> int:
    cfg = _load_config(args.config)
    mode = cfg.get("mode")
    if mode not in ("two_level", "cost_ball", "deviation"):
        raise ConfigError("mode must be one of two_level, cost_ball, deviation")
    seed = _need_seed(args, "concentration checks are Monte Carlo")
    out = _Output(args)

    if mode == "two_level":
        _check_keys(cfg, {"mode", "measure", "set", "h", "lambda", "t_grid",
                          "samples", "confidence"}, "two_level")
        if "measure" not in cfg or "set" not in cfg:
            raise ConfigError("two_level needs 'measure' and 'set'")
        pm, t_grid, samples, confidence = _concentrate_common(cfg)
        set_ = set_from_dict(cfg["set"])
        h = _finite_number(cfg, "h", required=True)
        lam = _finite_number(cfg, "lambda", required=True)
        rep = verify_two_level_enlargement(
            pm, set_, h, lam, t_grid, samples=samples, seed=seed,
            confidence=confidence,
        )
        out.add("two_level_enlargement", rep.to_dict(), _enlargement_table(rep))
    elif mode == "cost_ball":
        _check_keys(cfg, {"mode", "measure", "set", "c_tau", "t_grid",
                          "samples", "confidence"}, "cost_ball")
        if "measure" not in cfg or "set" not in cfg:
            raise ConfigError("cost_ball needs 'measure' and 'set'")
        pm, t_grid, samples, confidence = _concentrate_common(cfg)
        set_ = set_from_dict(cfg["set"])
        c_tau = _finite_number(cfg, "c_tau", required=True)
        rep = verify_cost_ball_enlargement(
            pm, set_, c_tau, t_grid, samples=samples, seed=seed,
            confidence=confidence,
        )
        out.add("cost_ball_enlargement", rep.to_dict(), _enlargement_table(rep))
    else:
        _check_keys(cfg, {"mode", "measure", "function", "h", "lambda", "t_grid",
                          "samples", "confidence", "ell2_constant", "ell1_constant"},
                    "deviation")
        if "measure" not in cfg or "function" not in cfg:
            raise ConfigError("deviation needs 'measure' and 'function'")
        pm, t_grid, samples, confidence = _concentrate_common(cfg)
        func = deviation_function_from_dict(cfg["function"])
        h = _finite_number(cfg, "h", required=True)
        lam = _finite_number(cfg, "lambda", required=True)
        rep = verify_lipschitz_deviation(
            pm, func, h, lam, t_grid, samples=samples, seed=seed,
            confidence=confidence,
            ell2_constant=_finite_number(cfg, "ell2_constant", None),
            ell1_constant=_finite_number(cfg, "ell1_constant", None),
        )
        rows = [
            (row.t, row.threshold, row.upper_frequency, row.lower_frequency,
             row.bound, row.passed)
            for row in rep.rows
        ]
        out.add(
            "lipschitz_deviation",
            rep.to_dict(),
            render_table(
                f"deviation: {rep.function} on {rep.measure}, median {rep.median:.5f}",
                ["t", "threshold", "upper_freq", "lower_freq", "bound", "pass"],
                rows,
            ),
        )

    out.emit()
    return EXIT_OK if rep.passed else EXIT_VIOLATION


# --------------------------------------------------------------------------
# wiring


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="taucert",
        description="numerical certificates for tail-ratio classes, the convex "
        "product inequality, variance bounds, and product-measure concentration",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    handlers = {
        "analyze": (cmd_analyze, "tail ratios and Hardy-type constants"),
        "tau": (cmd_tau, "certificate suites for the product inequality"),
        "poincare": (cmd_poincare, "variance bound estimation and closure"),
        "concentrate": (cmd_concentrate, "product-measure Monte Carlo checks"),
    }
    for name, (func, help_text) in handlers.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to a JSON config")
        p.add_argument("--seed", type=int, default=None,
                       help="RNG seed; required for randomized commands")
        p.add_argument("--out", default=None, help="write the report to this path")
        p.add_argument("--format", choices=("table", "records"), default="table")
        p.add_argument("--quiet", action="store_true", help="suppress stdout")
        p.set_defaults(handler=func)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MeasureInvalidError as exc:
        print(f"invalid measure: {exc}", file=sys.stderr)
        return EXIT_MEASURE
    except DegenerateInputError as exc:
        print(f"degenerate input: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except TaucertError as exc:
        print(f"certificate failure: {exc}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
