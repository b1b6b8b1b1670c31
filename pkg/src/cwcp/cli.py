"""Command-line entry points for reproducible, seeded experiment sweeps.

Subcommands: ``fit-ratio``, ``coverage-exp``, ``needle-demo``, ``srm-exp``,
``bounds``.  Every experiment takes a JSON config (or a built-in default,
scaled for desk runtimes; ``--paper-scale`` switches to the full-size
grids) and honors ``--seed/--trials/--out/--workers`` overrides.  Exit
status is 0 on success, 1 on a configuration error, and 2 when every trial
of a sweep failed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .bias import (
    bias_deviation_bound,
    moment_bias_bound,
    wcp_calibration_size,
    weighted_dkw_bound,
)
from .experiments import (
    run_coverage_experiment,
    run_fit_ratio,
    run_needle_demo,
    run_srm_experiment,
)
from .ingest import (
    ConfigError,
    MethodConfig,
    NeedleDemoConfig,
    RunConfig,
    ShiftConfig,
    SizeConfig,
    SrmConfig,
    load_config,
)
from .ratios import required_sample_sizes


def default_config(kind: str, paper_scale: bool = False) -> RunConfig:
    """Built-in configs: desk scale by default, full grids with paper_scale."""
    if kind == "coverage-exp":
        if paper_scale:
            d, grid = 100, tuple(round(0.1 * i, 1) for i in range(21))
        else:
            d, grid = 20, (0.0, 0.5, 1.0, 1.5, 2.0)
        methods = (
            MethodConfig(name="split"),
            MethodConfig(name="wcp"),
            *(MethodConfig(name="cwcp", b=b) for b in (2.5, 5.0, 10.0, 20.0)),
        )
        # Ratio-fitting samples are larger than the calibration set: at
        # d=20 the unclipped baseline needs ~1500 draws per side before its
        # fit stops wandering into spike minima on no-shift data.
        sizes = SizeConfig(m_train=1500, m_test=1500, m_est=600, m_cal=600, n_eval=2000)
        return RunConfig(
            kind=kind,
            trials=30,
            alpha=0.2,
            epsilon=0.002,
            shift=ShiftConfig(family="gaussian", d=d, grid=grid),
            sizes=sizes,
            methods=methods,
        )
    if kind == "needle-demo":
        return RunConfig(
            kind=kind,
            trials=10_000 if paper_scale else 2000,
            alpha=0.1,
            shift=ShiftConfig(family="needle", d=1, r=0.01, theta=0.2, grid=(0.2,)),
            needle=NeedleDemoConfig(c=0.02, m=50, n=50),
        )
    if kind == "srm-exp":
        if paper_scale:
            srm = SrmConfig(
                b_grid=(2.5, 5.0, 10.0, 20.0, 40.0),
                lambda_grid=(0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0),
                m_grid=tuple(range(50, 501, 50)),
            )
            d, trials = 200, 100
        else:
            srm = SrmConfig()
            d, trials = 50, 30
        return RunConfig(
            kind=kind,
            trials=trials,
            shift=ShiftConfig(family="gaussian", d=d, grid=(2.0,)),
            srm=srm,
        )
    if kind == "fit-ratio":
        return RunConfig(kind=kind, shift=ShiftConfig(family="gaussian", d=20, grid=(1.0,)))
    raise ConfigError(f"no default config for kind {kind!r}")


def _resolve_config(args, kind: str) -> RunConfig:
    if args.config is not None:
        cfg = load_config(args.config)
        if cfg.kind != kind:
            raise ConfigError(f"config kind {cfg.kind!r} does not match subcommand {kind!r}")
    else:
        cfg = default_config(kind, paper_scale=args.paper_scale)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.out is not None:
        overrides["out_dir"] = args.out
    if args.workers is not None:
        overrides["workers"] = args.workers
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def _emit(payload: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for key, value in payload.items():
            print(f"{key}: {value}")


def _add_run_parser(sub, name: str, help_text: str):
    p = sub.add_parser(name, help=help_text)
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--seed", type=int, help="master seed override")
    p.add_argument("--trials", type=int, help="trial count override")
    p.add_argument("--out", help="output directory override")
    p.add_argument("--workers", type=int, help="worker process count override")
    p.add_argument("--paper-scale", action="store_true", help="full-size default grids")
    p.add_argument("--json", action="store_true", help="machine-readable summary")
    p.add_argument("--print-config", action="store_true", help="echo the resolved config and exit")
    return p


def _cmd_coverage(args) -> int:
    cfg = _resolve_config(args, "coverage-exp")
    if args.print_config:
        print(cfg.to_json())
        return 0
    report = run_coverage_experiment(cfg)
    failed = sum(1 for r in report.rows if r.error is not None)
    _emit(
        {
            "rows": len(report.rows),
            "failed": failed,
            "out": cfg.out_dir,
            "csv": "coverage.csv",
        },
        args.json,
    )
    return 2 if report.rows and failed == len(report.rows) else 0


def _cmd_needle(args) -> int:
    cfg = _resolve_config(args, "needle-demo")
    if args.print_config:
        print(cfg.to_json())
        return 0
    result = run_needle_demo(cfg)
    summary = {}
    if "threshold_demo" in result:
        td = result["threshold_demo"]
        summary.update(
            {
                "threshold_hit_frequency": td["threshold_hit_frequency"],
                "threshold_hit_probability": td["threshold_hit_probability"],
                "max_coverage_on_event": td["max_coverage_on_event"],
                "coverage_bound_on_event": td["coverage_bound_on_event"],
            }
        )
    if "overestimation_demo" in result:
        od = result["overestimation_demo"]
        mean_l1 = sum(od["l1_values"]) / len(od["l1_values"]) if od["l1_values"] else None
        summary.update(
            {
                "event_frequency": od["event_frequency"],
                "top_beta_selected": f"{od['top_beta_selected']}/{od['events']}",
                "mean_l1_on_event": mean_l1,
                "l1_expected": od["l1_expected"],
            }
        )
    summary["out"] = cfg.out_dir
    _emit(summary, args.json)
    return 0


def _cmd_srm(args) -> int:
    cfg = _resolve_config(args, "srm-exp")
    if args.print_config:
        print(cfg.to_json())
        return 0
    rows = run_srm_experiment(cfg)
    _emit({"rows": len(rows), "out": cfg.out_dir, "csv": "srm.csv"}, args.json)
    return 0


def _cmd_fit(args) -> int:
    cfg = _resolve_config(args, "fit-ratio")
    if args.print_config:
        print(cfg.to_json())
        return 0
    summary = run_fit_ratio(cfg)
    _emit(summary, args.json)
    return 0


def _add_bounds_parser(sub):
    p = sub.add_parser("bounds", help="evaluate the finite-sample bound calculators")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    bsub = p.add_subparsers(dest="bound", required=True)

    wcp = bsub.add_parser("wcp-size", help="calibration size for conditional coverage")
    wcp.add_argument("--b", type=float, required=True)
    wcp.add_argument("--eps", type=float, required=True)
    wcp.add_argument("--delta", type=float, required=True)

    dev = bsub.add_parser("bias-dev", help="bias estimate deviation probability")
    dev.add_argument("--b", type=float, required=True)
    dev.add_argument("--eps", type=float, required=True)
    dev.add_argument("--gamma", type=float, required=True)
    dev.add_argument("--m", type=int, required=True)

    dkw = bsub.add_parser("dkw", help="weighted uniform CDF deviation probability")
    dkw.add_argument("--m", type=int, required=True)
    dkw.add_argument("--gamma", type=float, required=True)
    dkw.add_argument("--b-over-mu", type=float, required=True)

    samples = bsub.add_parser("samples", help="ratio-fitting sample sizes")
    samples.add_argument("--b", type=float, required=True)
    samples.add_argument("--cb", type=float, required=True)
    samples.add_argument("--ctb", type=float, required=True)
    samples.add_argument("--eps", type=float, required=True)
    samples.add_argument("--delta", type=float, required=True)

    moment = bsub.add_parser("moment", help="clipping-bias bound from a tail moment")
    moment.add_argument("--rho", type=float, required=True)
    moment.add_argument("--c", type=float, required=True)
    moment.add_argument("--p", type=float, required=True)
    moment.add_argument("--b0", type=float, required=True)
    moment.add_argument("--b", type=float, required=True)


def _cmd_bounds(args) -> int:
    if args.bound == "wcp-size":
        inputs = {"b": args.b, "eps": args.eps, "delta": args.delta}
        value = wcp_calibration_size(args.b, args.eps, args.delta)
        name = "calibration size for conditional coverage"
    elif args.bound == "bias-dev":
        inputs = {"b": args.b, "eps": args.eps, "gamma": args.gamma, "m": args.m}
        value = bias_deviation_bound(args.b, args.eps, args.gamma, args.m)
        name = "bias estimate deviation probability"
    elif args.bound == "dkw":
        inputs = {"m": args.m, "gamma": args.gamma, "b_over_mu": args.b_over_mu}
        value = weighted_dkw_bound(args.m, args.gamma, args.b_over_mu)
        name = "weighted uniform CDF deviation probability"
    elif args.bound == "samples":
        inputs = {
            "b": args.b,
            "cb": args.cb,
            "ctb": args.ctb,
            "eps": args.eps,
            "delta": args.delta,
        }
        plan = required_sample_sizes(args.b, args.eps, args.delta, args.cb, args.ctb)
        value = {"m_train": plan.m_train, "m_test": plan.m_test}
        name = "ratio-fitting sample sizes"
    else:
        inputs = {"rho": args.rho, "c": args.c, "p": args.p, "b0": args.b0, "b": args.b}
        value = moment_bias_bound(args.rho, args.c, args.p, args.b0, args.b)
        name = "clipping-bias bound from a tail moment"
    _emit({"bound": name, "inputs": inputs, "value": value}, args.json)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cwcp",
        description="Clipped weighted conformal prediction: fits, sweeps, and bound tables.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run_parser(sub, "fit-ratio", "fit one clipped density ratio and summarize it")
    _add_run_parser(sub, "coverage-exp", "coverage sweep over a shift grid")
    _add_run_parser(sub, "needle-demo", "failure-mode demos on the needle family")
    _add_run_parser(sub, "srm-exp", "clip-level selection sweep")
    _add_bounds_parser(sub)
    return parser


_COMMANDS = {
    "fit-ratio": _cmd_fit,
    "coverage-exp": _cmd_coverage,
    "needle-demo": _cmd_needle,
    "srm-exp": _cmd_srm,
    "bounds": _cmd_bounds,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
