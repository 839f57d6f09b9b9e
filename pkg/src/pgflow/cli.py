"""Command line experiment runner binding configs to runs, fits, and files.

Exit codes: 0 success, 2 config error, 3 divergence, 4 verdict failure
(expected claims under --strict, or any failed row in `check`).
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import config as config_mod
from .analysis import (
    EXP_MODEL,
    PASS,
    POWER_MODEL,
    QUANTITIES,
    ClaimVerdict,
    RateReport,
    _argmin_strictly_inside,
    fit_exponential,
    fit_power,
    theorem_verdict,
    write_report_csv,
)
from .config import ConfigError, ExperimentConfig
from .errors import DivergenceError, InvalidInputError, UnsupportedObjectiveError
from .flow import FlowProblem, Trajectory, discrete_run, integrate, reparam_check, write_trajectory_csv
from .geometry import variational_gap
from .objectives import Desingularizer, gheb_check, grad_check, lojasiewicz_check
from .schedules import Power, validate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_VERDICT = 4

SWEEP_PARAMS = {
    "alpha": "schedule.alpha",
    "theta": "objective.theta",
    "K": "schedule.K",
    "step": "numerics.step",
}


@dataclass(eq=False)
class ExperimentResult:
    config: ExperimentConfig
    trajectory: Trajectory
    fits: tuple
    claims: tuple
    condition_report: object
    reparam_gap: Optional[float]


def _compute_fits(traj: Trajectory, cfg: ExperimentConfig):
    hol = cfg.objective.holder
    if hol is None:
        return ()
    if hol.theta < 0.5 and isinstance(cfg.schedule, Power):
        return tuple(fit_power(traj, q, cfg.window_fraction) for q in QUANTITIES)
    if hol.theta == 0.5:
        return tuple(fit_exponential(traj, q, window_fraction=cfg.window_fraction)
                     for q in QUANTITIES)
    return ()


def execute(cfg: ExperimentConfig) -> ExperimentResult:
    """Integrate the configured problem and evaluate fits and claims."""
    if cfg.system == "discrete":
        traj = discrete_run(cfg.domain, cfg.objective, cfg.discrete_alphas, cfg.x0)
    else:
        problem = FlowProblem(cfg.domain, cfg.objective, cfg.schedule, cfg.x0,
                              system=cfg.system)
        traj = integrate(problem, horizon=cfg.horizon, step=cfg.step,
                         sample_every=cfg.sample_every)
    cond = None
    if cfg.schedule is not None:
        hol = cfg.objective.holder
        cond = validate(cfg.schedule, theta=hol.theta if hol is not None else None)
    reparam_gap = None
    if cfg.system == "scaled":
        reparam_gap = reparam_check(cfg.objective, cfg.schedule, cfg.x0,
                                    horizon=cfg.horizon, step=cfg.step)
    fits = _compute_fits(traj, cfg)
    claims = theorem_verdict(traj, cond, fits,
                             requested_theta=cfg.requested_theta,
                             reparam_gap=reparam_gap)
    return ExperimentResult(cfg, traj, fits, claims, cond, reparam_gap)


def _expected_claims_pass(res: ExperimentResult) -> bool:
    expected = set(res.config.expect)
    return all(c.status == PASS for c in res.claims if c.name in expected)


def _fit_line(rep: RateReport) -> str:
    label = "slope" if rep.model == POWER_MODEL else "mu"
    if rep.verdict == "inapplicable":
        body = rep.reason
    else:
        body = f"{label}={rep.fitted:+.4f}  r2={rep.r_squared:.5f}"
        if rep.theoretical is not None:
            body += f"  theoretical={rep.theoretical:+.4f}"
    return f"  fit   {rep.quantity:<10} {rep.model:<13} {rep.verdict:<12} {body}"


def _claim_line(claim: ClaimVerdict, expected: bool) -> str:
    mark = " (expected)" if expected else ""
    return f"  claim {claim.name:<40} {claim.status:<12} {claim.detail}{mark}"


def cmd_run(args) -> int:
    cfg = config_mod.load_config(args.config)
    res = execute(cfg)
    os.makedirs(args.out_dir, exist_ok=True)
    traj_path = os.path.join(args.out_dir, cfg.trajectory_path)
    report_path = os.path.join(args.out_dir, cfg.report_path)
    write_trajectory_csv(res.trajectory, traj_path)
    write_report_csv(report_path, res.fits, res.claims)

    traj = res.trajectory
    print(f"run {cfg.name}: system={cfg.system} samples={len(traj.t)} "
          f"horizon={traj.horizon:g} f_star={res.trajectory.f_star_source}")
    for rep in res.fits:
        print(_fit_line(rep))
    expected = set(cfg.expect)
    for claim in res.claims:
        if claim.status == "inapplicable" and claim.name not in expected:
            continue
        print(_claim_line(claim, claim.name in expected))
    print(f"wrote {traj_path}")
    print(f"wrote {report_path}")
    if args.strict and not _expected_claims_pass(res):
        print("strict mode: an expected claim did not pass", file=sys.stderr)
        return EXIT_VERDICT
    return EXIT_OK


def _with_suffix(path: str, suffix: str) -> str:
    stem, ext = os.path.splitext(path)
    return f"{stem}_{suffix}{ext}"


def cmd_sweep(args) -> int:
    key = SWEEP_PARAMS[args.param]
    tokens = [tok for tok in args.values.replace(",", " ").split() if tok]
    if not tokens:
        raise ConfigError("sweep needs at least one value")
    try:
        values = [float(tok) for tok in tokens]
    except ValueError:
        raise ConfigError(f"sweep values must be numbers, got {args.values!r}") from None

    pairs = config_mod.load_pairs(args.config)
    os.makedirs(args.out_dir, exist_ok=True)
    aggregate = []
    all_expected_pass = True
    report_path = None
    for value in values:
        override = dict(pairs)
        override[key] = repr(value)
        cfg = config_mod.build_config(override, name=f"sweep {args.param}={value:g}")
        suffix = f"{args.param}_{value:g}"
        cfg.trajectory_path = _with_suffix(cfg.trajectory_path, suffix)
        res = execute(cfg)
        write_trajectory_csv(res.trajectory, os.path.join(args.out_dir, cfg.trajectory_path))
        print(f"sweep {args.param}={value:g}: samples={len(res.trajectory.t)}")
        for rep in res.fits:
            print(_fit_line(rep))
            aggregate.append(dataclasses.replace(
                rep, quantity=f"{rep.quantity}@{args.param}={value:g}"))
        for claim in res.claims:
            if claim.name in set(cfg.expect) and claim.status != PASS:
                print(_claim_line(claim, True))
        all_expected_pass = all_expected_pass and _expected_claims_pass(res)
        report_path = os.path.join(args.out_dir, cfg.report_path)
    write_report_csv(report_path, aggregate)
    print(f"wrote {report_path}")
    if args.strict and not all_expected_pass:
        print("strict mode: an expected claim did not pass", file=sys.stderr)
        return EXIT_VERDICT
    return EXIT_OK


def _schedule_rows(cfg: ExperimentConfig):
    if cfg.schedule is None:
        yield ("schedule conditions", "not-applicable", "no schedule configured")
        return
    hol = cfg.objective.holder
    report = validate(cfg.schedule, theta=hol.theta if hol is not None else None)
    named = (
        ("clock unbounded", report.gamma_unbounded),
        ("variation finite", report.variation_finite),
        ("power tail integrable", report.power_tail_integrable),
        ("exp tail integrable", report.exp_tail_integrable),
    )
    for label, verdict in named:
        evidence = ", ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}"
                             for k, v in sorted(verdict.evidence.items()))
        yield (label, verdict.status, evidence)
    yield ("schedule monotone", "pass" if report.monotone else "fail", "")


def _projection_rows(cfg: ExperimentConfig, rng):
    domain = cfg.domain
    probes = domain.sample(rng, 32)
    xs = domain.sample(rng, 200) + rng.normal(size=(200, domain.dim)) * 2.0
    ys = domain.sample(rng, 200) + rng.normal(size=(200, domain.dim)) * 2.0
    worst_nonexp = 0.0
    worst_idem = 0.0
    worst_gap = 0.0
    for x, y in zip(xs, ys):
        px, py = domain.project(x), domain.project(y)
        worst_nonexp = max(worst_nonexp,
                           float(np.linalg.norm(px - py) - np.linalg.norm(x - y)))
        worst_idem = max(worst_idem, float(np.linalg.norm(domain.project(px) - px)))
        worst_gap = max(worst_gap, variational_gap(domain, x, probes))
    yield ("projection nonexpansive", "pass" if worst_nonexp <= 1e-12 else "fail",
           f"max excess {worst_nonexp:.3g}")
    yield ("projection idempotent", "pass" if worst_idem <= 1e-9 else "fail",
           f"max drift {worst_idem:.3g}")
    yield ("projection variational", "pass" if worst_gap <= 1e-9 else "fail",
           f"max gap {worst_gap:.3g}")


def cmd_check(args) -> int:
    cfg = config_mod.load_config(args.config)
    rng = np.random.default_rng(args.seed)
    rows = []

    feas = cfg.domain.residual(cfg.x0)
    rows.append(("start point feasible", "pass" if feas <= 1e-12 else "fail",
                 f"residual {feas:.3g}"))
    rows.extend(_schedule_rows(cfg))

    obj = cfg.objective
    worst_grad = max(grad_check(obj, pt) for pt in cfg.domain.sample(rng, 100))
    rows.append(("gradient check", "pass" if worst_grad <= 1e-4 else "fail",
                 f"max rel err {worst_grad:.3g} over 100 points"))

    if obj.holder is not None and obj.optimum is not None:
        samples = cfg.domain.sample(rng, 1000)
        ratio = gheb_check(obj, cfg.domain, samples)
        bar = obj.holder.kappa * (1.0 - 1e-6)
        rows.append(("error bound sampling", "pass" if ratio >= bar else "fail",
                     f"min ratio {ratio:.6g} vs kappa {obj.holder.kappa:g}"))
        phi = Desingularizer(obj.holder.kappa, obj.holder.theta)
        product = lojasiewicz_check(obj, phi, samples)
        rows.append(("lojasiewicz sampling", "pass" if product >= 1.0 - 1e-6 else "fail",
                     f"min product {product:.6g}"))
    else:
        rows.append(("error bound sampling", "not-applicable", "no certificate metadata"))
        rows.append(("lojasiewicz sampling", "not-applicable", "no certificate metadata"))

    rows.extend(_projection_rows(cfg, rng))

    if "strong_convergence_symmetric_even" in cfg.expect:
        ok = cfg.domain.is_symmetric() and obj.is_even
        rows.append(("symmetric-set assertion", "pass" if ok else "not-applicable",
                     "" if ok else "set is not origin-symmetric or objective is not even"))
    if "strong_convergence_interior_argmin" in cfg.expect:
        inside = (obj.optimum is not None
                  and _argmin_strictly_inside(cfg.domain, obj.optimum.argmin))
        rows.append(("interior-argmin assertion", "pass" if inside else "not-applicable",
                     "" if inside else "argmin is not strictly inside the set"))

    print(f"check {cfg.name}")
    width = max(len(label) for label, _, _ in rows)
    for label, status, detail in rows:
        print(f"  {label:<{width}}  {status:<15} {detail}")
    failed = [label for label, status, _ in rows if status == "fail"]
    if failed:
        print(f"result: {len(failed)} check(s) failed: {', '.join(failed)}")
        return EXIT_VERDICT
    print("result: all checks passed")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--strict", action="store_true",
                        help="exit 4 when an expected claim does not pass")
    common.add_argument("--out-dir", default=".",
                        help="directory for trajectory and report files")
    common.add_argument("--seed", type=int, default=0,
                        help="seed for probe sampling; integration is deterministic")

    parser = argparse.ArgumentParser(
        prog="pgflow",
        description="Run projected gradient flow experiments from flat configs.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", parents=[common],
                           help="integrate one config and write trajectory + report CSVs")
    run_p.add_argument("config", help="config file path or shipped preset name")
    run_p.set_defaults(func=cmd_run)

    sweep_p = sub.add_parser("sweep", parents=[common],
                             help="repeat a config over several parameter values")
    sweep_p.add_argument("config", help="config file path or shipped preset name")
    sweep_p.add_argument("--param", required=True, choices=sorted(SWEEP_PARAMS),
                         help="which knob to sweep")
    sweep_p.add_argument("--values", required=True,
                         help="comma-separated numbers, e.g. 0.25,0.5,0.75")
    sweep_p.set_defaults(func=cmd_sweep)

    check_p = sub.add_parser("check", parents=[common],
                             help="validate schedule, gradients, bound certificates, projections")
    check_p.add_argument("config", help="config file path or shipped preset name")
    check_p.set_defaults(func=cmd_check)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        return args.func(args)
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (InvalidInputError, UnsupportedObjectiveError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
