"""Command-line surface.

Four subcommands: ``fit`` on user data, ``calibrate`` a threshold for a
design, ``simulate`` a support-recovery campaign, ``verify`` the theory
oracles. Structured artifacts are JSON, tabular results CSV; every run
writes a manifest carrying the full configuration and seed. Artifacts
contain nothing run-dependent, so identical flags reproduce them
byte-for-byte (the manifest's wall-time field is the one exception).

Exit codes: 0 success, 1 theory counterexample, 2 usage or input error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

import numpy as np

from .design import load_design_csv, load_response_csv, standardize
from .errors import EnumerationTooLarge, LassoZeroError
from .estimator import LassoZeroConfig, fit, refit_threshold
from .gev import gev_upper_quantile
from .oracles import prop2_campaign, theorem1_campaign, verify_prop3
from .qut import (
    calibration_to_json,
    design_hash,
    empirical_upper_quantile,
    known_sigma_calibration,
    known_sigma_threshold,
    simulate_pivotal,
    threshold_from_calibration,
)
from .rng import SeededRng
from .simulate import SimulationSetting, run_campaign

EXIT_OK = 0
EXIT_COUNTEREXAMPLE = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class _UsageError(Exception):
    pass


def _json_dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _write_manifest(out: Path, args: argparse.Namespace, started: float, extra=None) -> None:
    doc = {
        "subcommand": args.subcommand,
        "flags": {k: v for k, v in sorted(vars(args).items()) if k not in ("subcommand", "func")},
        "seed": args.seed,
        "wall_time_seconds": time.monotonic() - started,
    }
    if extra:
        doc.update(extra)
    _json_dump(out / "manifest.json", doc)


def _config_from_args(args) -> LassoZeroConfig:
    return LassoZeroConfig(
        n_noise_cols=args.q,
        n_dictionaries=args.M if args.M is not None else _DEFAULT_M,
        threshold_rule=args.threshold_rule,
        seed=args.seed,
    )


def _draws_from_args(args) -> int:
    return args.R if args.R is not None else _DEFAULT_R


def _load_design(args):
    if args.design is None:
        raise _UsageError("--design is required")
    path = Path(args.design)
    if not path.exists():
        raise _UsageError(f"design file not found: {path}")
    X = load_design_csv(str(path), skip_header=args.csv_header)
    return X if args.no_standardize else standardize(X)


def _use_gev(args) -> bool | None:
    if args.quantile == "empirical":
        return False
    if args.quantile == "gev":
        return True
    return None


def cmd_fit(args) -> int:
    started = time.monotonic()
    X = _load_design(args)
    if args.response is None:
        raise _UsageError("--response is required")
    rpath = Path(args.response)
    if not rpath.exists():
        raise _UsageError(f"response file not found: {rpath}")
    y = load_response_csv(str(rpath), skip_header=args.csv_header)
    if y.shape[0] != X.n:
        raise _UsageError(f"response has {y.shape[0]} rows, design has {X.n}")

    cfg = _config_from_args(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    if args.sigma is not None:
        tau = known_sigma_threshold(
            X, cfg, sigma=args.sigma, alpha=args.alpha, n_draws=_draws_from_args(args),
            threads=args.threads,
        )
        result = fit(X, y, cfg, tau=tau, threads=args.threads)
        s_of_y = None
        calibration_ref = None
    else:
        if cfg.width_for(X.n) < 1:
            raise _UsageError("q = 0 needs --sigma (the scale-free statistic needs a dictionary)")
        calibration = simulate_pivotal(
            X, cfg, n_draws=_draws_from_args(args), alpha=args.alpha, threads=args.threads
        )
        fit0 = fit(X, y, cfg, tau=0.0, threads=args.threads)
        from .bp import DEFAULT_TOL
        from .errors import DegenerateNoiseFit
        from .qut import noise_scale_s

        try:
            tau = threshold_from_calibration(calibration, fit0, use_gev=_use_gev(args))
            s_of_y = noise_scale_s(fit0.replicate_gammas)
        except DegenerateNoiseFit:
            # every dictionary coefficient was snapped to zero (e.g. a zero
            # response); the noise scale is then at most the solver's zero
            # tolerance, which bounds the threshold from above
            s_of_y = DEFAULT_TOL.zero_tol
            tau = s_of_y * calibration.quantile(_use_gev(args))
        result = refit_threshold(fit0, tau)
        (out / "calibration.json").write_text(
            calibration_to_json(calibration, X, cfg), encoding="utf-8"
        )
        calibration_ref = "calibration.json"

    _json_dump(
        out / "fit.json",
        {
            "design_hash": design_hash(X),
            "beta_l1": result.beta_l1.tolist(),
            "tau": result.tau,
            "beta_hat": result.beta_hat.tolist(),
            "support": sorted(result.support),
            "s_of_y": s_of_y,
            "calibration": calibration_ref,
            "alpha": args.alpha,
        },
    )
    _write_manifest(out, args, started, {"design_hash": design_hash(X)})
    return EXIT_OK


def cmd_calibrate(args) -> int:
    started = time.monotonic()
    X = _load_design(args)
    cfg = _config_from_args(args)
    if args.sigma is None and cfg.width_for(X.n) < 1:
        raise _UsageError("q = 0 needs --sigma (the scale-free statistic needs a dictionary)")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    alphas = tuple(args.alpha_grid) if args.alpha_grid else (args.alpha,)
    if args.sigma is not None:
        calibration = known_sigma_calibration(
            X, cfg, sigma=args.sigma, alpha=args.alpha, n_draws=_draws_from_args(args),
            threads=args.threads,
        )
    else:
        calibration = simulate_pivotal(
            X, cfg, n_draws=_draws_from_args(args), alpha=args.alpha, threads=args.threads
        )
    (out / "calibration.json").write_text(
        calibration_to_json(calibration, X, cfg, alphas=alphas), encoding="utf-8"
    )
    _write_manifest(out, args, started, {"design_hash": design_hash(X)})
    return EXIT_OK


def cmd_simulate(args) -> int:
    started = time.monotonic()
    if args.paper_scale:
        print(
            "warning: paper-scale settings run thousands of LP solves and "
            "may take hours; desk scale is the default for a reason",
            file=sys.stderr,
        )
    scale = _PAPER_SCALE if args.paper_scale else _DESK_SCALE
    n = args.n if args.n is not None else scale["n"]
    p = args.p if args.p is not None else scale["p"]
    m = args.M if args.M is not None else scale["M"]
    draws = args.R if args.R is not None else scale["R"]
    reps = args.replications if args.replications is not None else scale["replications"]
    amplitude = args.amplitude if args.amplitude is not None else scale["amplitude"]

    try:
        setting = SimulationSetting(
            kind=args.setting,
            n=n,
            p=p,
            s0=0,
            amplitude=amplitude,
            sigma=args.sigma if args.sigma is not None else 1.0,
            csv_path=args.design,
            csv_skip_header=args.csv_header,
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc

    cfg = LassoZeroConfig(
        n_noise_cols=args.q, n_dictionaries=m, threshold_rule=args.threshold_rule, seed=args.seed
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = run_campaign(
        setting,
        cfg,
        alpha=args.alpha,
        s0_grid=args.s0_grid,
        replications=reps,
        rng=SeededRng(args.seed),
        calibration_draws=draws,
        use_gev=_use_gev(args),
        threads=args.threads,
    )
    (out / "campaign.csv").write_text(result.to_csv(), encoding="utf-8")
    _write_manifest(out, args, started, {"campaign": result.manifest})
    return EXIT_OK


def cmd_verify(args) -> int:
    started = time.monotonic()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = SeededRng(args.seed)

    n_t1 = 10 if args.quick else 100
    n_p2 = 10 if args.quick else 50
    n_p3 = 100 if args.quick else 500

    t1_records = theorem1_campaign(n_t1, n=8, p=16, s0=2, rng=rng.child(0))
    t1_failures = [
        r for r in t1_records if r.premise_held and not (r.constructive_ok and r.sweep_ok)
    ]

    p2_records = prop2_campaign(n_p2, n=10, p=15, s0_choices=(1, 2, 3), rng=rng.child(1))
    p2_failures = [r for r in p2_records if not r.ok]

    gen = rng.child(2).generator()
    Xf = gen.standard_normal((50, 10))
    beta0 = np.zeros(10)
    beta0[:3] = 1.0
    alpha = args.alpha
    fwer = verify_prop3(
        Xf, beta0, sigma=1.0, alpha=alpha, n_runs=n_p3, rng=rng.child(3)
    )
    fwer_bound = alpha + 3.0 * float(np.sqrt(alpha * (1 - alpha) / n_p3))
    fwer_ok = fwer <= fwer_bound

    report = {
        "theorem1": {
            "instances": [dataclasses.asdict(r) for r in t1_records],
            "n_premise_held": sum(r.premise_held for r in t1_records),
            "n_constructive_failures": sum(
                r.premise_held and not r.constructive_ok for r in t1_records
            ),
            "n_counterexamples": len(t1_failures),
        },
        "prop2": {
            "instances": [dataclasses.asdict(r) for r in p2_records],
            "n_violations": len(p2_failures),
        },
        "prop3": {
            "empirical_fwer": fwer,
            "alpha": alpha,
            "bound": fwer_bound,
            "n_runs": n_p3,
            "ok": fwer_ok,
        },
    }
    _json_dump(out / "report.json", report)
    _write_manifest(out, args, started)

    if t1_failures or p2_failures or not fwer_ok:
        print(
            f"counterexamples found: theorem1={len(t1_failures)} "
            f"prop2={len(p2_failures)} prop3_ok={fwer_ok}",
            file=sys.stderr,
        )
        return EXIT_COUNTEREXAMPLE
    return EXIT_OK


_DEFAULT_M = 30
_DEFAULT_R = 500
_DESK_SCALE = {"n": 50, "p": 100, "M": 10, "R": 200, "replications": 200, "amplitude": 1.0}
_PAPER_SCALE = {"n": 100, "p": 200, "M": 30, "R": 10000, "replications": 500, "amplitude": 0.75}


def _alpha(value: str) -> float:
    a = float(value)
    if not 0.0 < a < 1.0:
        raise argparse.ArgumentTypeError("alpha must be in (0, 1)")
    return a


def _int_list(value: str) -> list[int]:
    try:
        return [int(tok) for tok in value.split(",") if tok.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {value!r}") from exc


def _float_list(value: str) -> list[float]:
    try:
        return [float(tok) for tok in value.split(",") if tok.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {value!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lassozero",
        description="Sparse support recovery with noise-dictionary basis pursuit",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--q", type=int, default=None, help="dictionary width (default: n)")
        p.add_argument("--M", type=int, default=None, help="number of dictionaries")
        p.add_argument("--alpha", type=_alpha, default=0.05)
        p.add_argument("--R", type=int, default=None, help="calibration replications")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--sigma", type=float, default=None, help="known noise level (skips the scale-free statistic)")
        p.add_argument("--threshold-rule", choices=("hard", "soft"), default="hard")
        p.add_argument("--quantile", choices=("auto", "empirical", "gev"), default="auto")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
        p.add_argument("--design", default=None, help="design matrix CSV")
        p.add_argument("--response", default=None, help="response CSV")
        p.add_argument("--csv-header", action="store_true", help="skip one header row in CSVs")
        p.add_argument("--no-standardize", action="store_true",
                       help="keep the design raw (dictionary scale is then quantile-matched)")

    p_fit = sub.add_parser("fit", help="fit on user data with the calibrated threshold")
    common(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_cal = sub.add_parser("calibrate", help="simulate the threshold calibration for a design")
    common(p_cal)
    p_cal.add_argument("--alpha-grid", type=_float_list, default=None,
                       help="comma-separated levels to tabulate, e.g. 0.01,0.05,0.1")
    p_cal.set_defaults(func=cmd_calibrate)

    p_sim = sub.add_parser("simulate", help="run a support-recovery campaign")
    common(p_sim)
    p_sim.add_argument("--setting", choices=("iid_gaussian", "segmentation", "csv_design"),
                       default="iid_gaussian")
    p_sim.add_argument("--s0-grid", type=_int_list, default=[0, 2, 5])
    p_sim.add_argument("--replications", type=int, default=None)
    p_sim.add_argument("--n", type=int, default=None)
    p_sim.add_argument("--p", type=int, default=None)
    p_sim.add_argument("--amplitude", type=float, default=None)
    p_sim.add_argument("--paper-scale", action="store_true",
                       help="use the original experiment sizes (slow)")
    p_sim.set_defaults(func=cmd_simulate)

    p_ver = sub.add_parser("verify", help="run the theory-oracle campaigns")
    common(p_ver)
    p_ver.add_argument("--quick", action="store_true", help="reduced instance counts")
    p_ver.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError, EnumerationTooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LassoZeroError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
