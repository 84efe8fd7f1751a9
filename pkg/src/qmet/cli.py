"""Command-line surface: states, probabilities, sampling, estimation, sweeps,
tomography and Fisher-information reports.

Exit codes: 0 success, 2 configuration error, 3 numeric or domain error.
All randomness derives from --seed; the QMET_SEED environment variable is the
fallback when --seed is omitted, then the built-in default.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import estimation, harness, measurement, states, tomography
from .errors import ConfigError, DomainError
from .streams import RandomStream

DEFAULT_SEED = 42


def _seed_fallback(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("QMET_SEED")
    if env is not None:
        try:
            return int(env, 0)
        except ValueError as exc:
            raise ConfigError(f"QMET_SEED is not an integer: {env!r}") from exc
    return DEFAULT_SEED


def _matrix_lines(rho: np.ndarray) -> list[str]:
    out = []
    for row in rho:
        out.append("  " + "  ".join(f"{v.real:+.6f}{v.imag:+.6f}j" for v in row))
    return out


def _print(obj) -> None:
    sys.stdout.write(obj if isinstance(obj, str) else json.dumps(obj, indent=1))
    sys.stdout.write("\n")


def cmd_state(args) -> int:
    rho = states.family_state(args.p, args.q)
    values = states.measures(rho)
    fit = states.fit_family_params(rho)
    if args.json:
        _print({
            "p": args.p, "q": args.q,
            "matrix_real": np.round(rho.real, 12).tolist(),
            "matrix_imag": np.round(rho.imag, 12).tolist(),
            "measures": values,
            "fit": {"p": fit.p, "q": fit.q, "residual": fit.residual,
                    "degenerate": fit.degenerate,
                    "out_of_family": fit.out_of_family},
        })
        return 0
    lines = [f"family state at p={args.p:g}, q={args.q:g}"]
    lines += _matrix_lines(rho)
    lines.append("measures: " + "  ".join(
        f"{kind}={values[kind]:.9f}" for kind in states.MEASURE_KINDS))
    lines.append(f"fit: p={fit.p:.9f} q={fit.q:.9f} residual={fit.residual:.3e}"
                 f" degenerate={fit.degenerate} out_of_family={fit.out_of_family}")
    _print("\n".join(lines))
    return 0


def cmd_probe(args) -> int:
    rho = states.family_state(args.p, args.q)
    probs = measurement.outcome_probabilities(rho, measurement.DA_DA)
    lines = [f"DA,DA outcome probabilities at p={args.p:g}, q={args.q:g}"]
    for label, value in zip(measurement.OUTCOME_LABELS, probs.as_array()):
        lines.append(f"  {label}: {value:.9f}")
    _print("\n".join(lines))
    return 0


def cmd_sample(args) -> int:
    seed = _seed_fallback(args.seed)
    rho = states.family_state(args.p, args.q)
    counts = measurement.sample_counts(rho, measurement.DA_DA, args.n,
                                       RandomStream(seed))
    _print(measurement.counts_record(counts, measurement.DA_DA, seed))
    return 0


def cmd_estimate(args) -> int:
    if args.counts is not None:
        with open(args.counts, "r", encoding="ascii") as fh:
            record = json.load(fh)
        counts, _ = measurement.counts_from_record(record)
    else:
        missing = [name for name, value in
                   (("--p", args.p), ("--n", args.n)) if value is None]
        if missing:
            raise ConfigError(f"estimate needs --counts or {' and '.join(missing)}")
        seed = _seed_fallback(args.seed)
        rho = states.family_state(args.p, args.q)
        counts = measurement.sample_counts(rho, measurement.DA_DA, args.n,
                                           RandomStream(seed))
    result = estimation.estimate(args.kind, args.variant, counts)
    _print(result.to_record())
    return 0


def cmd_sweep(args) -> int:
    file_text = None
    if args.config is not None:
        with open(args.config, "r", encoding="utf-8") as fh:
            file_text = fh.read()
    grid = harness.parse_grid(args.p_grid) if args.p_grid is not None else None
    cfg = harness.build_config(
        file_text,
        q=args.q,
        p_grid=grid,
        n_shots=args.n_shots,
        repetitions=args.reps,
        master_seed=args.seed,
        mixing_mode=args.mixing_mode,
    )
    if args.print_config:
        sys.stdout.write(cfg.to_text())
        return 0
    rows = harness.run_sweep(cfg)
    written = harness.emit_all(rows, cfg, args.out_dir)
    _print("\n".join(written))
    return 0


def cmd_tomo(args) -> int:
    seed = _seed_fallback(args.seed)
    rho = states.family_state(args.p, args.q)
    dataset = tomography.simulate_tomography(rho, args.n_per_setting,
                                             RandomStream(seed))
    recon = tomography.reconstruct_mle(dataset)
    report = tomography.tomo_report(rho, recon)
    _print({
        "p": args.p, "q": args.q, "n_per_setting": args.n_per_setting,
        "seed": seed,
        "fidelity": report.fidelity,
        "fit": {"p": report.fit.p, "q": report.fit.q,
                "residual": report.fit.residual,
                "degenerate": report.fit.degenerate,
                "out_of_family": report.fit.out_of_family},
        "measures": report.measures,
        "converged": recon.converged,
        "iterations": recon.iterations,
        "log_likelihood": recon.log_likelihood,
    })
    return 0


def cmd_fisher(args) -> int:
    curve = estimation.measure_path(args.path, args.q)
    povm = measurement.setting_projectors(measurement.DA_DA)
    report = estimation.qfi_numeric(curve, args.theta, povm=povm)
    _print({
        "path": args.path, "theta": args.theta, "q": args.q,
        "qfi": report.qfi,
        "cfi": report.cfi,
        "qcrb_numeric": report.qcrb,
        "qcrb_closed": estimation.qcrb_curves(args.path, args.theta),
        "cfi_over_qfi": report.cfi / report.qfi if report.qfi > 0 else float("nan"),
    })
    return 0


def _add_pq(sub, q_default: float = 0.5) -> None:
    sub.add_argument("--p", type=float, required=True,
                     help="mixing parameter in [0, 1]")
    sub.add_argument("--q", type=float, default=q_default,
                     help="pure-component balance in [0, 1] (default %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmet",
        description="Estimation workbench for two-qubit entanglement and "
                    "discord measures.")
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("state", help="print a family state with measures and fit")
    _add_pq(sub)
    sub.add_argument("--json", action="store_true", help="machine-readable output")
    sub.set_defaults(func=cmd_state)

    sub = subs.add_parser("probe", help="print DA,DA outcome probabilities")
    _add_pq(sub)
    sub.set_defaults(func=cmd_probe)

    sub = subs.add_parser("sample", help="sample DA,DA counts from a family state")
    _add_pq(sub)
    sub.add_argument("--n", type=int, required=True, help="number of shots")
    sub.add_argument("--seed", type=int, default=None,
                     help="stream seed (default: QMET_SEED or 42)")
    sub.set_defaults(func=cmd_sample)

    sub = subs.add_parser("estimate", help="run one estimator on counts")
    sub.add_argument("--kind", required=True, choices=sorted(states.MEASURE_KINDS))
    sub.add_argument("--variant", required=True,
                     choices=list(estimation.VARIANTS))
    sub.add_argument("--counts", default=None,
                     help="JSON counts record file (from `qmet sample`)")
    sub.add_argument("--p", type=float, default=None)
    sub.add_argument("--q", type=float, default=0.5)
    sub.add_argument("--n", type=int, default=None)
    sub.add_argument("--seed", type=int, default=None)
    sub.set_defaults(func=cmd_estimate)

    sub = subs.add_parser("sweep", help="run a p sweep and emit CSV + SVG panels")
    sub.add_argument("--config", default=None,
                     help="flat key = value config file")
    sub.add_argument("--q", type=float, default=None)
    sub.add_argument("--p-grid", default=None,
                     help="comma-separated grid, overrides config")
    sub.add_argument("--n-shots", type=int, default=None)
    sub.add_argument("--reps", type=int, default=None)
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--mixing-mode", default=None,
                     choices=list(harness.MIXING_MODES))
    sub.add_argument("--out-dir", default="sweep_out")
    sub.add_argument("--print-config", action="store_true",
                     help="print the effective configuration and exit")
    sub.set_defaults(func=cmd_sweep)

    sub = subs.add_parser("tomo", help="simulate tomography and reconstruct")
    _add_pq(sub)
    sub.add_argument("--n-per-setting", type=int, default=10_000)
    sub.add_argument("--seed", type=int, default=None)
    sub.set_defaults(func=cmd_tomo)

    sub = subs.add_parser("fisher", help="Fisher information along a measure path")
    sub.add_argument("--path", default=states.NEGATIVITY,
                     choices=[states.NEGATIVITY, states.LOG_NEGATIVITY, states.QGD])
    sub.add_argument("--theta", type=float, required=True,
                     help="path parameter in the measure's own units")
    sub.add_argument("--q", type=float, default=0.5)
    sub.set_defaults(func=cmd_fisher)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
