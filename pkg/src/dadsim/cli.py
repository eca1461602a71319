"""Command-line front end: ``dadsim run|certify|refine|check-assumptions|presets|dump``."""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .analysis import dads_certificate, deadzone_check, drift_metric, tail_stats
from .baseline import c1_certificate
from .clf import PASS_TOLERANCE, check_assumption_A, check_assumption_B
from .config import PRESETS, resolve_scenario, run_preset, write_scenario
from .errors import BlowupError, ConfigurationError, DadsError, IntegrationError
from .output import emit_csv
from .sim import integrate, refine_check

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_CERTIFICATE = 4

OUTPUT_ENV = "DADSIM_OUTPUT_DIR"
CERT_TOL = 1e-6

_PRESET_HELP = {
    "c1-noleak-0": "sigma-modification C1, sbar=0, d=0",
    "c1-leak-0": "sigma-modification C1, sbar=0.2, d=0",
    "dads-0": "DADS (simplified gains, kappa=0.1), d=0",
    "c1-noleak-sin": "sigma-modification C1, sbar=0, d=2 sin t",
    "c1-leak-sin": "sigma-modification C1, sbar=0.2, d=2 sin t",
    "dads-sin": "DADS (simplified gains, kappa=0.1), d=2 sin t",
}


def _scenario(target, args):
    sf = resolve_scenario(target)
    sc = sf.scenario
    overrides = {}
    if getattr(args, "dt", None) is not None:
        overrides["dt"] = args.dt
    if getattr(args, "horizon", None) is not None:
        overrides["T"] = args.horizon
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if overrides:
        try:
            sc = dataclasses.replace(sc, **overrides)
        except DadsError as exc:
            raise ConfigurationError(str(exc)) from None
    if not sc.name:
        sc = dataclasses.replace(sc, name=Path(target).stem)
    return sf, sc


def _certificates(traj):
    if traj.kind == "dads":
        return {"dads_certificate": dads_certificate(traj)}
    if traj.kind == "sigma_mod":
        try:
            return {"c1_certificate": c1_certificate(traj)}
        except ConfigurationError:
            return {}
    return {}


def _reports(traj):
    reports = {"tail_stats": tail_stats(traj, 0.25)}
    if traj.rho is not None:
        reports["drift_metric"] = drift_metric(traj, 0.5)
    if traj.kind == "dads":
        reports["deadzone_check"] = deadzone_check(traj)
    reports.update(_certificates(traj))
    return reports


def _out_dir(sf, sc, args, multiple):
    base = args.out or os.environ.get(OUTPUT_ENV)
    if base:
        return Path(base) / sc.name if multiple else Path(base)
    if sf.output_dir:
        return Path(sf.output_dir)
    return Path("out") / sc.name


def _run_one(target, args, multiple):
    sf, sc = _scenario(target, args)
    traj = integrate(sc, backend=args.backend)
    reports = _reports(traj)
    stride = args.stride if args.stride is not None else sf.stride
    out = _out_dir(sf, sc, args, multiple)
    csv_path, summary_path = emit_csv(traj, reports, out, stride)
    failed = [k for k, r in reports.items() if k.endswith("certificate") and not r.passed(CERT_TOL)]
    msg = f"{sc.name}: wrote {csv_path} and {summary_path}"
    if failed:
        return EXIT_CERTIFICATE, msg + f"; certificate above tolerance: {', '.join(failed)}"
    return EXIT_OK, msg


def _guarded(fn, *a):
    try:
        return fn(*a)
    except ConfigurationError as exc:
        return EXIT_CONFIG, f"configuration error: {exc}"
    except BlowupError as exc:
        return EXIT_BLOWUP, f"blowup: {exc}"
    except IntegrationError as exc:
        return EXIT_BLOWUP, f"integration failed: {exc}"
    except DadsError as exc:
        return EXIT_CONFIG, f"error: {exc}"
    except OSError as exc:
        return EXIT_ERROR, f"I/O error: {exc}"


def cmd_run(args):
    multiple = len(args.targets) > 1
    if args.jobs > 1 and multiple:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futs = [pool.submit(_guarded, _run_one, t, args, multiple) for t in args.targets]
            results = [f.result() for f in futs]
    else:
        results = [_guarded(_run_one, t, args, multiple) for t in args.targets]
    for code, msg in results:
        print(msg, file=sys.stderr if code else sys.stdout)
    return max(code for code, _ in results)


def _certify(args):
    _, sc = _scenario(args.target, args)
    traj = integrate(sc, backend=args.backend)
    reps = _certificates(traj)
    if not reps:
        raise ConfigurationError(f"no certificate applies to a {traj.kind} scenario")
    code = EXIT_OK
    lines = []
    for name, rep in reps.items():
        ok = rep.passed(args.tol)
        code = code if ok else EXIT_CERTIFICATE
        lines.append(
            f"{name}: max_violation={rep.max_violation!r} at t={rep.violation_time!r} "
            f"over {rep.samples_checked} samples -> {'PASS' if ok else 'FAIL'}"
        )
    return code, "\n".join(lines)


def _check(args):
    _, sc = _scenario(args.target, args)
    if sc.clf is None:
        raise ConfigurationError("scenario has no CLF bundle to check")
    lines, code = [], EXIT_OK
    for label, fn in (("assumption A", check_assumption_A), ("assumption B", check_assumption_B)):
        rep = fn(sc.plant, sc.clf, args.radius, args.grid, args.random, sc.seed)
        code = code if rep.passed else EXIT_CERTIFICATE
        lines.append(
            f"{label}: max_violation={rep.max_violation!r} at y={rep.worst_point.tolist()} "
            f"({rep.samples_checked} samples, radius {rep.box_radius}, seed {rep.seed}) -> "
            f"{'PASS' if rep.passed else 'FAIL'}"
        )
    return code, "\n".join(lines)


def _refine(args):
    _, sc = _scenario(args.target, args)
    rep = refine_check(sc, backend=args.backend)
    return EXIT_OK, (
        f"dt={rep.dt!r} discrepancy(dt, dt/2)={rep.discrepancy!r} "
        f"discrepancy(dt/2, dt/4)={rep.discrepancy_fine!r} observed_order={rep.observed_order!r}"
    )


def _dump(args):
    sc = run_preset(args.preset)
    text_path = Path(args.path or f"{args.preset}.ini")
    write_scenario(sc, text_path, output_dir=f"out/{args.preset}")
    return EXIT_OK, f"wrote {text_path}"


def _simple(fn):
    def handler(args):
        code, msg = _guarded(fn, args)
        print(msg, file=sys.stderr if code in (EXIT_CONFIG, EXIT_ERROR) else sys.stdout)
        return code
    return handler


def cmd_presets(args):
    for name in PRESETS:
        print(f"{name:15s} {_PRESET_HELP[name]}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="dadsim", description="DADS adaptive control simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def overrides(p):
        p.add_argument("--dt", type=float, help="override the integration step")
        p.add_argument("--horizon", type=float, help="override the horizon T")
        p.add_argument("--seed", type=int, help="override the RNG seed")
        p.add_argument("--backend", choices=("auto", "compiled", "generic"), default="auto")

    p = sub.add_parser("run", help="simulate and write trajectory.csv + summary.txt")
    p.add_argument("targets", nargs="+", metavar="FILE|PRESET")
    p.add_argument("--out", help=f"output directory (also ${OUTPUT_ENV})")
    p.add_argument("--stride", type=int, help="write every N-th sample")
    p.add_argument("--jobs", type=int, default=1, help="run several targets in parallel")
    overrides(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("certify", help="check the Lyapunov certificate along a run")
    p.add_argument("target", metavar="FILE|PRESET")
    p.add_argument("--tol", type=float, default=CERT_TOL)
    overrides(p)
    p.set_defaults(func=_simple(_certify))

    p = sub.add_parser("check-assumptions", help="sample the CLF design inequalities")
    p.add_argument("target", metavar="FILE|PRESET")
    p.add_argument("--radius", type=float, default=5.0)
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--random", type=int, default=10_000)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=_simple(_check))

    p = sub.add_parser("refine", help="step-halving self-convergence check")
    p.add_argument("target", metavar="FILE|PRESET")
    overrides(p)
    p.set_defaults(func=_simple(_refine))

    p = sub.add_parser("presets", help="list the benchmark presets")
    p.set_defaults(func=cmd_presets)

    p = sub.add_parser("dump", help="write a preset as a scenario file")
    p.add_argument("preset", choices=PRESETS)
    p.add_argument("path", nargs="?")
    p.set_defaults(func=_simple(_dump))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
