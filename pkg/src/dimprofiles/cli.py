"""Command-line harness.

Subcommands: construct, boxdim, spectrum, assouad, capacity, profile,
project, experiment {preservation,sharpness,profile-ladder}, bounds, report.
Exit codes: 0 success, 2 invalid input, 3 size/IO limit.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import covering, digitsets, projection, report
from .capacity import bound_formulas, capacity as capacity_of, profile_estimate
from .core import ScaleSchedule
from .errors import InvalidInputError, SizeLimitError

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_LIMIT = 3


def _load_config(path: str) -> dict:
    cfg = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InvalidInputError(f"bad config line {line!r}")
            key, val = line.split("=", 1)
            val = val.strip()
            for conv in (int, float):
                try:
                    val = conv(val)
                    break
                except ValueError:
                    continue
            cfg[key.strip().replace("-", "_")] = val
    return cfg


def _schedule_from(args, default: ScaleSchedule | None = None) -> ScaleSchedule:
    if getattr(args, "schedule", None):
        return ScaleSchedule.parse(args.schedule)
    return default or ScaleSchedule.default()


def _digitset_from(args) -> digitsets.DigitSet:
    if getattr(args, "set", None):
        return digitsets.digitset_from_text(args.set)
    if getattr(args, "set_file", None):
        with open(args.set_file) as fh:
            return digitsets.digitset_from_text(fh.read().strip())
    raise InvalidInputError("provide --set or --set-file")


def _write_out(args, text: str) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _build_set(args) -> digitsets.DigitSet:
    if args.type == "periodic":
        residues = [int(r) for r in args.residues.split(",")]
        return digitsets.periodic_set(args.q, residues, args.depth)
    if args.type == "blocks":
        kseq = tuple(int(k) for k in args.kseq.split(","))
        return digitsets.sharpness_set(
            args.s, args.t, args.n, kseq=kseq, depth=args.depth
        )
    members = [int(k) for k in args.members.split(",") if k != ""]
    return digitsets.explicit_set(members, args.depth)


def cmd_construct(args) -> int:
    S = _build_set(args)
    if args.set_only:
        _write_out(args, digitsets.digitset_to_text(S) + "\n")
        return EXIT_OK
    cloud = digitsets.enumerate_cloud(S, args.n)
    _write_out(args, digitsets.cloud_to_csv(cloud))
    return EXIT_OK


def cmd_boxdim(args) -> int:
    S = _digitset_from(args)
    schedule = _schedule_from(args)
    lower, upper = covering.box_dim_estimate(S, schedule, n=args.n)
    rows = [(k, digitsets.exact_count(S, args.n, k)) for k in schedule.exponents]
    if args.out:
        report.write_csv(args.out, ("k", "count"), rows)
    print(f"lower box estimate: {lower.slope:.6f}")
    print(f"upper box estimate: {upper.slope:.6f}")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    S = _digitset_from(args)
    schedule = _schedule_from(args)
    thetas = [float(t) for t in args.theta.split(",")]
    rows = []
    for th in thetas:
        est = covering.assouad_spectrum_estimate(S, th, schedule, n=args.n)
        rows.append((th, est.slope))
        print(f"theta={th:g}: spectrum estimate {est.slope:.6f}")
    if args.out:
        report.write_csv(args.out, ("theta", "estimate"), rows)
    return EXIT_OK


def cmd_assouad(args) -> int:
    S = _digitset_from(args)
    schedule = _schedule_from(args)
    est = covering.assouad_estimate(S, schedule, n=args.n)
    qa, grid = covering.quasi_assouad_estimate(S, schedule, n=args.n)
    print(f"assouad estimate: {est.slope:.6f}")
    print(f"quasi-assouad estimate: {qa:.6f}")
    if args.out:
        rows = sorted(grid.items()) + [("assouad", est.slope), ("quasi", qa)]
        report.write_csv(args.out, ("theta", "estimate"), rows)
    return EXIT_OK


def cmd_capacity(args) -> int:
    S = _digitset_from(args)
    cloud = digitsets.enumerate_cloud(S, args.n)
    res = capacity_of(cloud, args.r, args.s)
    print(f"capacity: {res.value:.9g}")
    print(f"certified lower bound: {res.lower_bound:.9g}")
    return EXIT_OK


def cmd_profile(args) -> int:
    S = _digitset_from(args)
    schedule = _schedule_from(args, ScaleSchedule(tuple(range(4, 17, 2))))
    cloud = digitsets.enumerate_cloud(S, args.n)
    est = profile_estimate(cloud, args.s, schedule)
    rows = []
    for k, c in zip(schedule.exponents, est.capacities):
        rows.append((args.s, k, math.log2(c), "limsup", est.upper.slope))
        rows.append((args.s, k, math.log2(c), "liminf", est.lower.slope))
    if args.out:
        report.write_csv(args.out, ("s", "k", "capacity_log2", "slope_mode", "slope"), rows)
    print(f"lower profile estimate: {est.lower.slope:.6f}")
    print(f"upper profile estimate: {est.upper.slope:.6f}")
    return EXIT_OK


def cmd_project(args) -> int:
    S = _digitset_from(args)
    schedule = _schedule_from(args, ScaleSchedule(tuple(range(8, 23, 2))))
    rep = projection.projection_experiment(
        S, args.n, args.m, args.trials, schedule, base_seed=args.seed
    )
    if args.out:
        report.write_csv(
            args.out,
            ("trial", "seed", "k", "count_lo", "count_hi", "slope_upper"),
            report.experiment_csv_rows(rep),
        )
    print(f"projected upper box estimates over {args.trials} trials:")
    print(
        f"  min {rep.slope_min:.4f}  median {rep.slope_median:.4f}  "
        f"max {rep.slope_max:.4f}"
    )
    return EXIT_OK


def _emit_experiment_files(args, rep, name: str) -> None:
    if not args.out:
        return
    os.makedirs(args.out, exist_ok=True)
    report.write_csv(
        os.path.join(args.out, f"{name}.csv"),
        ("trial", "seed", "k", "count_lo", "count_hi", "slope_upper"),
        report.experiment_csv_rows(rep),
    )
    series = []
    for idx, trial in enumerate(rep.trials[:6]):
        pairs = [(k, math.log2(max(1, lo))) for k, lo, _ in trial.counts]
        series.append((f"seed {trial.seed}", pairs, trial.slope_upper))
    report.plot_loglog(
        os.path.join(args.out, f"{name}.svg"), series, title=name
    )


def cmd_experiment(args) -> int:
    if args.which == "preservation":
        S = digitsets.periodic_set(5, (0, 1), depth=args.depth or 22)
        schedule = _schedule_from(args, ScaleSchedule(tuple(range(8, 23, 2))))
        rep = projection.projection_experiment(
            S, 2, 1, args.trials, schedule, base_seed=args.seed
        )
        expected = min(1.0, digitsets.analytic_dims(S, 2)["box"])
        ok = rep.slope_median >= expected - 0.1
        print(
            "claim: projections onto almost every line preserve the upper box "
            "dimension when the quasi-Assouad dimension is at most the line "
            "dimension (checked via the trial median)"
        )
        print(
            f"median projected estimate {rep.slope_median:.4f} vs "
            f"target {expected:.4f} - 0.1"
        )
        _emit_experiment_files(args, rep, "preservation")
        print("PASS" if ok else "FAIL")
        return EXIT_OK if ok else 1

    if args.which == "sharpness":
        S = digitsets.sharpness_set(
            args.s, args.t, args.n, kseq=(4, 64), depth=args.depth or 256
        )
        schedule = _schedule_from(args, ScaleSchedule(tuple(range(8, 27, 2))))
        rep = projection.projection_experiment(
            S, args.n, args.m, args.trials, schedule, base_seed=args.seed
        )
        d = rep.bounds.get("sharpness_value")
        ok = all(t.slope_upper <= d + 0.1 for t in rep.trials)
        print(
            "claim: for the block construction every projection drops the "
            "upper box dimension to at most m*s*t/(m(s-t)+st) (checked on "
            "every trial)"
        )
        print(f"max projected estimate {rep.slope_max:.4f} vs bound {d:.4f} + 0.1")
        _emit_experiment_files(args, rep, "sharpness")
        print("PASS" if ok else "FAIL")
        return EXIT_OK if ok else 1

    if args.which == "profile-ladder":
        fixtures = [
            digitsets.periodic_set(2, (0,), 14),
            digitsets.periodic_set(3, (0,), 14),
            digitsets.periodic_set(5, (0, 1), 15),
            digitsets.sharpness_set(1.0, 0.5, 1, kseq=(4,), depth=14),
        ]
        schedule = _schedule_from(args, ScaleSchedule(tuple(range(4, 15, 2))))
        failures = []
        print(
            "claim: the capacity dimension profile at exponent s drops below "
            "the upper box dimension by at most "
            "max{0, spectrum(theta)-s, (assouad-s)(1-theta)}"
        )
        for S in fixtures:
            cloud = digitsets.enumerate_cloud(S, 1)
            _, box_up = covering.box_dim_estimate(S, schedule, n=1)
            ad = covering.assouad_estimate(S, schedule, n=1).slope
            for s in (0.5, 1.0):
                prof = profile_estimate(cloud, s, schedule)
                for th in (0.5, 0.75, 0.9):
                    spec = covering.assouad_spectrum_estimate(S, th, schedule, n=1).slope
                    drop = max(0.0, spec - s, (ad - s) * (1 - th))
                    lhs = prof.upper.slope
                    rhs = box_up.slope - drop - 0.1
                    line = digitsets.digitset_to_text(S)
                    status = "ok" if lhs >= rhs else "VIOLATION"
                    print(
                        f"  {line} s={s} theta={th}: profile {lhs:.3f} >= "
                        f"{rhs:.3f} {status}"
                    )
                    if lhs < rhs:
                        failures.append((line, s, th))
        print("PASS" if not failures else "FAIL")
        return EXIT_OK if not failures else 1

    raise InvalidInputError(f"unknown experiment {args.which!r}")


def _frac(text: str) -> Fraction:
    return Fraction(text)


def cmd_bounds(args) -> int:
    out = bound_formulas(
        m=args.m,
        n=args.n,
        ubd=args.ubd,
        lbd=args.lbd,
        ad=args.ad,
        s=args.s,
        theta=args.theta,
        t=args.t,
    )
    for key in sorted(out):
        val = out[key]
        if isinstance(val, Fraction):
            print(f"{key}: {val} ({float(val):.6g})")
        else:
            print(f"{key}: {val}")
    return EXIT_OK


def cmd_report(args) -> int:
    outdir = args.out or "report_out"
    os.makedirs(outdir, exist_ok=True)
    schedule = _schedule_from(args, ScaleSchedule(tuple(range(8, 41, 2))))
    S = digitsets.periodic_set(2, (0,), schedule.exponents[-1])
    pairs = [
        (k, float(digitsets.log2_exact_count(S, 2, k))) for k in schedule.exponents
    ]
    _, upper = covering.box_dim_estimate(S, schedule, n=2)
    results = {
        "box_counts": {
            "header": ("k", "count"),
            "rows": [(k, digitsets.exact_count(S, 2, k)) for k in schedule.exponents],
            "series": [("even-digit square", pairs, upper.slope)],
        }
    }
    written = report.emit_report(results, outdir)
    region_path = os.path.join(outdir, "region_diagram.svg")
    report.plot_region_diagram(region_path)
    written.append(region_path)
    for path in written:
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dimprofiles",
        description="Dyadic digit-set fractals: dimension estimators, "
        "capacity profiles, and projection experiments",
    )
    parser.add_argument("--config", help="key=value file of flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, schedule=True):
        p.add_argument("--seed", type=int, default=0)
        if schedule:
            p.add_argument("--schedule", help="k1,k2,... or start:stop:step")
        p.add_argument("--out", help="output file (or directory for experiments)")

    p = sub.add_parser("construct", help="build a digit set and emit its cloud")
    p.add_argument("--type", choices=("periodic", "blocks", "explicit"), required=True)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--residues", default="0")
    p.add_argument("--s", type=float, default=2.0)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--kseq", default="4,64")
    p.add_argument("--members", default="")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--n", type=int, default=1, help="product power of X_S")
    p.add_argument("--set-only", action="store_true", help="emit the text form only")
    common(p, schedule=False)
    p.set_defaults(func=cmd_construct)

    for name, func, extra in (
        ("boxdim", cmd_boxdim, ()),
        ("spectrum", cmd_spectrum, ("theta",)),
        ("assouad", cmd_assouad, ()),
    ):
        p = sub.add_parser(name, help=f"{name} estimate for a digit set")
        p.add_argument("--set", help="digit-set text line")
        p.add_argument("--set-file")
        p.add_argument("--n", type=int, default=1)
        if "theta" in extra:
            p.add_argument("--theta", default="0.5,0.75,0.9")
        common(p)
        p.set_defaults(func=func)

    p = sub.add_parser("capacity", help="capacity of the enumerated cloud")
    p.add_argument("--set", help="digit-set text line")
    p.add_argument("--set-file")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--s", type=float, required=True)
    common(p, schedule=False)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("profile", help="capacity dimension profile")
    p.add_argument("--set", help="digit-set text line")
    p.add_argument("--set-file")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--s", type=float, required=True)
    common(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("project", help="projected covering counts over trials")
    p.add_argument("--set", help="digit-set text line")
    p.add_argument("--set-file")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--trials", type=int, default=5)
    common(p)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("experiment", help="end-to-end claim checks")
    p.add_argument("which", choices=("preservation", "sharpness", "profile-ladder"))
    p.add_argument("--s", type=float, default=2.0)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--depth", type=int)
    common(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("bounds", help="closed-form projection bound calculator")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--ubd", type=_frac, required=True)
    p.add_argument("--lbd", type=_frac)
    p.add_argument("--ad", type=_frac)
    p.add_argument("--s", type=_frac)
    p.add_argument("--t", type=_frac)
    p.add_argument("--theta", type=_frac)
    common(p, schedule=False)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("report", help="demo CSV + SVG report")
    common(p)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)

    # config file supplies defaults; explicit flags override
    if "--config" in argv:
        idx = argv.index("--config")
        try:
            cfg_path = argv[idx + 1]
        except IndexError:
            parser.error("--config needs a path")
        del argv[idx:idx + 2]  # works in any position, incl. after a subcommand
        try:
            cfg = _load_config(cfg_path)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_LIMIT
        except InvalidInputError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INVALID
        parser.set_defaults(**cfg)
        # propagate into every subparser (their defaults shadow the parent's)
        # and let config values satisfy required flags
        for action in parser._actions:
            if isinstance(action, argparse._SubParsersAction):
                for sp in action.choices.values():
                    sp.set_defaults(**cfg)
                    for sub_action in sp._actions:
                        if sub_action.dest in cfg:
                            sub_action.required = False

    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SizeLimitError as exc:
        msg = str(exc)
        if exc.admissible is not None:
            msg += f" (admissible: {exc.admissible})"
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_LIMIT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT


if __name__ == "__main__":
    sys.exit(main())
