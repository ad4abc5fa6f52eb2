"""Command-line driver: ``mess <command> [options]``.

Every command writes into ``--out`` using fixed file names (``report.json``,
``trace.csv``, ``sweep.csv``, ``rom_error.csv``, ...). Exit status is 0 on
success, 2 for invalid input or parameters, 3 for I/O and file-format
failures and 4 for numerical failures (including a violated error bound).
"""

import argparse
import csv
import logging
import os
import sys
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import datagen
from .basis import DEFAULT_RANK_TOL, orthonormalize, project, reconstruction_errors
from .errors import (
    DegenerateInputError,
    FormatError,
    NumericalError,
    ParameterError,
    StreamError,
    ValidationError,
)
from .matio import FORMATS, read_matrix, sample_record, write_matrix, write_report, write_trace_csv
from .metrics import DISTANCE_METHODS, pairwise_distances
from .pod import pod_basis, svd
from .sampler import EpsilonRule, StopConfig, mess_sample

log = logging.getLogger("mess")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4

DEFAULT_EPS_GRID = tuple(round(0.01 * k, 2) for k in range(1, 26))


class BoundViolation(NumericalError):
    pass


class _Timer:
    """Accumulates CPU seconds per named stage."""

    def __init__(self):
        self.seconds = {}

    @contextmanager
    def stage(self, name):
        t0 = time.process_time()
        try:
            yield
        finally:
            self.seconds[name] = self.seconds.get(name, 0.0) + time.process_time() - t0


# -- argument parsing -------------------------------------------------------


def _eps_list(text):
    items = [s for s in text.replace(" ", "").split(",") if s]
    try:
        return [float(s) for s in items]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid epsilon list {text!r}") from None


def _add_source(p):
    g = p.add_argument_group("input")
    g.add_argument("--input", type=Path, help="snapshot matrix file")
    g.add_argument("--input-format", choices=FORMATS, help="default: from the file extension")
    g.add_argument(
        "--generate",
        choices=("brusselator", "random-walk", "image", "plateau"),
        help="use a built-in generator instead of --input",
    )
    _add_generator_params(g)


def _add_generator_params(g):
    g.add_argument("--grid-points", type=int, default=100)
    g.add_argument("--alpha", type=float, default=0.02)
    g.add_argument("--t-end", type=float, default=10.0)
    g.add_argument("--n-snapshots", type=int, default=500)
    g.add_argument("--dt", type=float, default=1e-3)
    g.add_argument("-m", "--rows", type=int, default=50)
    g.add_argument("-n", "--cols", type=int, default=200)
    g.add_argument("--step-scale", type=float, default=1.0)
    g.add_argument("--height", type=int, default=96)
    g.add_argument("--width", type=int, default=128)


def _add_eps(p, multi=False, required=True):
    if multi:
        p.add_argument("--eps-list", type=_eps_list, default=list(DEFAULT_EPS_GRID),
                       help="comma-separated radii (default 0.01..0.25 step 0.01)")
    else:
        p.add_argument("--eps", type=float, required=required)
    p.add_argument("--eps-mode", choices=("absolute", "relative"), default="relative")
    p.add_argument("--distance", choices=DISTANCE_METHODS, default="direct")


def _add_stop(p):
    p.add_argument("--stop-tol", type=float, help="enable plateau stopping with this tolerance")
    p.add_argument("--stop-window", type=int, default=10)
    p.add_argument("--stop-criterion", choices=("potential", "entropy"), default="potential")


def _add_basis_opts(p):
    p.add_argument("--rank-tol", type=float, default=DEFAULT_RANK_TOL)
    p.add_argument("--qr", choices=("mgs", "householder"), default="mgs")


def build_parser():
    parser = argparse.ArgumentParser(prog="mess", description="Maximum entropy snapshot sampling")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, help="BLAS threads (default $MESS_THREADS or 1)")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="write a generated snapshot matrix")
    p.add_argument("--kind", choices=("brusselator", "random-walk", "image", "plateau"), required=True)
    p.add_argument("--output", type=Path, required=True)
    p.add_argument("--format", choices=FORMATS)
    _add_generator_params(p)

    p = sub.add_parser("sample", parents=[common], help="select snapshots")
    _add_source(p)
    _add_eps(p)
    _add_stop(p)

    p = sub.add_parser("basis", parents=[common], help="build a reduced basis")
    _add_source(p)
    p.add_argument("--method", choices=("mess", "pod"), default="mess")
    p.add_argument("--eps", type=float, help="MESS radius")
    p.add_argument("--eps-mode", choices=("absolute", "relative"), default="relative")
    p.add_argument("--distance", choices=DISTANCE_METHODS, default="direct")
    p.add_argument("--energy-eps", type=float, help="POD relative Frobenius budget")
    p.add_argument("--ell", type=int, help="POD basis size")
    _add_stop(p)
    _add_basis_opts(p)

    p = sub.add_parser("compress", parents=[common], help="reconstruct snapshots through a MESS basis")
    _add_source(p)
    _add_eps(p)
    _add_stop(p)
    _add_basis_opts(p)
    p.add_argument("--format", choices=FORMATS, help="format of the reconstruction (default: input's)")

    p = sub.add_parser("compare", parents=[common], help="MESS versus POD at equal basis size")
    _add_source(p)
    _add_eps(p, required=False)
    _add_basis_opts(p)
    p.add_argument("--sweep", action="store_true", help="run the comparison over --eps-list")
    p.add_argument("--eps-list", type=_eps_list, default=list(DEFAULT_EPS_GRID))

    p = sub.add_parser("sweep", parents=[common], help="basis size, error and time versus eps")
    _add_source(p)
    _add_eps(p, multi=True)
    _add_basis_opts(p)

    p = sub.add_parser("rom", parents=[common], help="Galerkin brusselator ROM with MESS and POD")
    p.add_argument("--grid-points", type=int, default=100)
    p.add_argument("--alpha", type=float, default=0.02)
    p.add_argument("--t-end", type=float, default=10.0)
    p.add_argument("--n-snapshots", type=int, default=500)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--eps", type=float, default=0.1, help="relative MESS radius")
    _add_basis_opts(p)
    return parser


# -- helpers ------------------------------------------------------------------


def _generate(kind, args):
    if kind == "brusselator":
        cfg = datagen.BrusselatorConfig(
            grid_points=args.grid_points, alpha=args.alpha, t_end=args.t_end,
            n_snapshots=args.n_snapshots, dt_internal=args.dt,
        )
        return datagen.gen_brusselator(cfg)
    if kind == "random-walk":
        return datagen.gen_random_walk(args.rows, args.cols, args.step_scale, args.seed)
    if kind == "image":
        return datagen.gen_test_image(args.height, args.width, args.seed)
    if kind == "plateau":
        X, _ = datagen.gen_plateau_stream(args.rows, max(1, args.cols // 10), args.cols, 1.0, seed=args.seed)
        return X
    raise ParameterError(f"unknown generator {kind!r}")


def _load(args):
    if (args.input is None) == (args.generate is None):
        raise ParameterError("give exactly one of --input and --generate")
    if args.input is not None:
        return read_matrix(args.input, args.input_format)
    return _generate(args.generate, args)


def _rule(args, value=None):
    value = args.eps if value is None else value
    if value is None:
        raise ParameterError("--eps is required")
    return EpsilonRule(args.eps_mode, float(value))


def _stop(args):
    if getattr(args, "stop_tol", None) is None:
        return None
    return StopConfig(potential_tol=args.stop_tol, window=args.stop_window, criterion=args.stop_criterion)


def _mess_basis(X, rule, args, timer, stop=None, D=None):
    with timer.stage("sampling"):
        result = mess_sample(X, rule, stop, method=args.distance, distances=D)
    with timer.stage("factorization"):
        B = orthonormalize(X[:, result.selected], args.rank_tol, method=args.qr, source_indices=result.selected)
    return result, B


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([f"{x:.17g}" if isinstance(x, float) else x for x in row])


# -- commands ---------------------------------------------------------------


def cmd_gen(args):
    X = _generate(args.kind, args)
    write_matrix(X, args.output, args.format)
    log.info("wrote %dx%d matrix to %s", *X.shape, args.output)
    return EXIT_OK


def cmd_sample(args):
    X = _load(args)
    timer = _Timer()
    with timer.stage("sampling"):
        result = mess_sample(X, _rule(args), _stop(args), method=args.distance)
    write_report(sample_record(result, cpu_seconds=timer.seconds), args.out / "report.json")
    write_trace_csv(result.trace, args.out / "trace.csv")
    return EXIT_OK


def cmd_basis(args):
    X = _load(args)
    timer = _Timer()
    if args.method == "pod":
        with timer.stage("factorization"):
            B = pod_basis(X, ell=args.ell, energy_eps=args.energy_eps)
        with timer.stage("projection"):
            rep = reconstruction_errors(X, B)
        record = {"method": "pod", "ell": B.ell, "max_abs_error": rep.max_abs, "max_rel_error": rep.max_rel,
                  "cpu_seconds": timer.seconds}
    else:
        result, B = _mess_basis(X, _rule(args), args, timer, _stop(args))
        with timer.stage("projection"):
            rep = reconstruction_errors(X, B, result.epsilon_abs)
        record = sample_record(result, rep, timer.seconds)
        record.update(method="mess", ell=B.ell, dropped_columns=B.dropped)
        write_trace_csv(result.trace, args.out / "trace.csv")
    write_matrix(B.q, args.out / "basis.mess", "messbin")
    write_report(record, args.out / "report.json")
    return EXIT_OK


def cmd_compress(args):
    X = _load(args)
    timer = _Timer()
    result, B = _mess_basis(X, _rule(args), args, timer, _stop(args))
    with timer.stage("projection"):
        Xhat = project(B, X)
        rep = reconstruction_errors(X, B, result.epsilon_abs)
    fmt = args.format or args.input_format or (args.input and _safe_guess(args.input)) or "messbin"
    name = {"csv": "reconstruction.csv", "messbin": "reconstruction.mess", "pgm": "reconstruction.pgm"}[fmt]
    write_matrix(Xhat, args.out / name, fmt)
    record = sample_record(result, rep, timer.seconds)
    record.update(ell=B.ell, reconstruction=name, dropped_columns=B.dropped)
    write_report(record, args.out / "report.json")
    write_trace_csv(result.trace, args.out / "trace.csv")
    if not rep.bound_holds:
        raise BoundViolation(f"max error {rep.max_abs:.6g} is not below eps {result.epsilon_abs:.6g}")
    return EXIT_OK


def _safe_guess(path):
    from .matio import guess_format

    try:
        return guess_format(path)
    except FormatError:
        return None


def _compare_one(X, rule, args, D=None, factors=None):
    timer = _Timer()
    result, B = _mess_basis(X, rule, args, timer, D=D)
    xnorm = float(np.linalg.norm(X))
    with timer.stage("projection"):
        rep = reconstruction_errors(X, B, result.epsilon_abs, scale=result.diameter)
    offline = timer.seconds["sampling"] + timer.seconds["factorization"]
    mess_branch = {
        "ell": B.ell,
        "n_selected": result.ell,
        "max_abs_error": rep.max_abs,
        "max_rel_error": rep.max_rel,
        "frobenius_rel_error": rep.frobenius / xnorm,
        "bound_holds": rep.bound_holds,
        "cpu_seconds": dict(timer.seconds),
        "offline_cpu_seconds": offline,
    }
    svd_timer = _Timer()
    with svd_timer.stage("factorization"):
        if factors is None:
            factors = svd(X)
    ell = min(B.ell, factors.rank())
    P = pod_basis(X, ell=ell, factors=factors)
    with svd_timer.stage("projection"):
        prep = reconstruction_errors(X, P, scale=result.diameter)
    svd_branch = {
        "ell": P.ell,
        "max_abs_error": prep.max_abs,
        "max_rel_error": prep.max_rel,
        "frobenius_rel_error": prep.frobenius / xnorm,
        "cpu_seconds": dict(svd_timer.seconds),
        "offline_cpu_seconds": svd_timer.seconds["factorization"],
        "ell_capped_at_rank": P.ell < B.ell,
    }
    return result, mess_branch, svd_branch


def cmd_compare(args):
    X = _load(args)
    if args.sweep:
        if not args.eps_list:
            raise ParameterError("empty epsilon list")
        D = pairwise_distances(X, method=args.distance)
        factors = svd(X)
        rows = []
        for eps in args.eps_list:
            _, mb, sb = _compare_one(X, _rule(args, eps), args, D=D, factors=factors)
            rows.append((eps, mb["ell"], mb["max_rel_error"], sb["max_rel_error"],
                         mb["frobenius_rel_error"], sb["frobenius_rel_error"], mb["offline_cpu_seconds"]))
        _write_csv(args.out / "sweep.csv",
                   ["eps", "ell", "mess_max_rel_error", "svd_max_rel_error",
                    "mess_fro_rel_error", "svd_fro_rel_error", "mess_cpu_seconds"], rows)
        return EXIT_OK
    result, mb, sb = _compare_one(X, _rule(args), args)
    record = {
        "epsilon_abs": result.epsilon_abs,
        "epsilon_rule": result.rule.describe(),
        "shape": list(X.shape),
        "ell": mb["ell"],
        "mess": mb,
        "svd": sb,
        "offline_cpu_ratio_mess_over_svd": (
            mb["offline_cpu_seconds"] / sb["offline_cpu_seconds"] if sb["offline_cpu_seconds"] > 0 else None
        ),
    }
    write_report(record, args.out / "report.json")
    return EXIT_OK


def cmd_sweep(args):
    if not args.eps_list:
        raise ParameterError("empty epsilon list")
    X = _load(args)
    rules = [_rule(args, e) for e in args.eps_list]
    D = pairwise_distances(X, method=args.distance)
    rows = []
    for eps, rule in zip(args.eps_list, rules):
        timer = _Timer()
        result, B = _mess_basis(X, rule, args, timer, D=D)
        rep = reconstruction_errors(X, B, result.epsilon_abs, scale=float(D.max()))
        rows.append((float(eps), result.epsilon_abs, B.ell, rep.max_abs, rep.max_rel,
                     timer.seconds["sampling"], timer.seconds["factorization"],
                     timer.seconds["sampling"] + timer.seconds["factorization"]))
    _write_csv(args.out / "sweep.csv",
               ["eps", "eps_abs", "ell", "max_abs_error", "max_rel_error",
                "sampling_seconds", "qr_seconds", "cpu_seconds"], rows)
    return EXIT_OK


def cmd_rom(args):
    cfg = datagen.BrusselatorConfig(
        grid_points=args.grid_points, alpha=args.alpha, t_end=args.t_end,
        n_snapshots=args.n_snapshots, dt_internal=args.dt,
    )
    X = datagen.gen_brusselator(cfg)
    timer = _Timer()
    args.distance = "direct"
    result, Bm = _mess_basis(X, EpsilonRule.relative(args.eps), args, timer)
    with timer.stage("svd"):
        factors = svd(X)
    if Bm.ell > factors.rank():
        raise ParameterError(
            f"MESS basis size {Bm.ell} exceeds the numerical rank {factors.rank()} of the snapshots; "
            "no POD basis of equal size exists, use a larger --eps"
        )
    Bp = pod_basis(X, ell=Bm.ell, factors=factors)
    series = {}
    for name, B in (("mess", Bm), ("pod", Bp)):
        full, lifted = datagen.galerkin_rom_demo(cfg, B, full=X)
        series[name] = np.linalg.norm(full - lifted, axis=0) / np.linalg.norm(full, axis=0)
    t = cfg.times()
    _write_csv(args.out / "rom_error.csv", ["t", "mess_rel_error", "pod_rel_error"],
               [(float(t[k]), float(series["mess"][k]), float(series["pod"][k])) for k in range(t.size)])
    train = reconstruction_errors(X, Bm, result.epsilon_abs)
    record = {
        "epsilon_abs": result.epsilon_abs,
        "epsilon_rule": result.rule.describe(),
        "ell": Bm.ell,
        "mess_max_rel_error": float(series["mess"].max()),
        "pod_max_rel_error": float(series["pod"].max()),
        "training_max_abs_error": train.max_abs,
        "cpu_seconds": timer.seconds,
    }
    write_report(record, args.out / "report.json")
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen,
    "sample": cmd_sample,
    "basis": cmd_basis,
    "compress": cmd_compress,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
    "rom": cmd_rom,
}


def _threads(args):
    if args.threads is not None:
        return args.threads
    env = os.environ.get("MESS_THREADS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ParameterError(f"MESS_THREADS must be an integer, got {env!r}") from None
    return 1


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        threads = _threads(args)
        if threads < 1:
            raise ParameterError("--threads must be positive")
        if args.command != "gen":
            args.out.mkdir(parents=True, exist_ok=True)
        with threadpool_limits(limits=threads):
            return COMMANDS[args.command](args)
    except (ValidationError, ParameterError, DegenerateInputError, StreamError) as exc:
        print(f"mess: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (FormatError, OSError) as exc:
        print(f"mess: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalError as exc:
        print(f"mess: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
