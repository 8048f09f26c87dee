"""Command-line front end: sweeps, verification suites, and report files.

Reports embed the fully resolved run configuration, use round-trip float
formatting, and are written atomically (temp file + rename).  Exit status is
0 when every assertion passed, 1 on a verification failure, 2 on usage
errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import acceptance
from .epi import (
    check_epi,
    check_rogozin,
    handcrafted_corpus,
    load_instances,
    random_instance,
)
from .errors import DomainError, PreconditionError, VerificationError
from .kernel import EvalPoint, KernelSpec, TruncatedGaussian, gaussian_values, kernel_values
from .levelsets import bump_profiles, detect_sign_change
from .quadrature import (
    QuadratureConfig,
    asymptotic_comparison,
    ball_integral,
    certify_bound,
    lp_norm,
)

THREADS_ENV = "LEBESGUE_LAB_THREADS"


@dataclass(frozen=True)
class RunConfig:
    command: str
    parameters: dict
    output_path: str
    format: str
    seed: int
    threads: int

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def parse_int_range(text: str) -> list[int]:
    """``a..b`` (inclusive) or a comma-separated list."""
    if ".." in text:
        a, b = text.split("..", 1)
        lo, hi = int(a), int(b)
        if hi < lo:
            raise ValueError(f"empty range {text!r}")
        return list(range(lo, hi + 1))
    return [int(tok) for tok in text.split(",") if tok]


def parse_float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok]


def _resolve_threads(value: str | None) -> int:
    if value is None:
        value = os.environ.get(THREADS_ENV, "auto")
    if value == "auto":
        return os.cpu_count() or 1
    n = int(value)
    if n < 1:
        raise ValueError(f"threads must be >= 1, got {n}")
    return n


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ";".join(_fmt(item) for item in v)  # keep CSV cells comma-free
    return str(v)


def _atomic_write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-report-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_report(config: RunConfig, fieldnames, rows, extra_comments=()) -> None:
    """Emit rows as JSON or CSV with the resolved config embedded."""
    if config.format == "json":
        payload = {"config": config.as_dict(), "records": rows}
        _atomic_write(config.output_path, json.dumps(payload, indent=2) + "\n")
        return
    lines = [f"# {k}={_fmt(v)}" for k, v in sorted(config.as_dict().items()) if k != "parameters"]
    lines += [f"# param:{k}={_fmt(v)}" for k, v in sorted(config.parameters.items())]
    lines += list(extra_comments)
    lines.append(",".join(fieldnames))
    for row in rows:
        lines.append(",".join(_fmt(row[k]) for k in fieldnames))
    _atomic_write(config.output_path, "\n".join(lines) + "\n")


def _pmap(fn, items, threads: int):
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _quad_config(args) -> QuadratureConfig:
    return QuadratureConfig(abs_tol=args.abs_tol, rel_tol=args.rel_tol)


def _cmd_lebesgue(config: RunConfig, args) -> int:
    cfg = _quad_config(args)
    tasks = [(l, p) for l in parse_int_range(args.l) for p in parse_float_list(args.p)]

    def work(task):
        l, p = task
        r = lp_norm(KernelSpec(l), p, cfg)
        return {
            "l": l,
            "p": p,
            "value": r.value,
            "bound": r.bound,
            "asymptotic": r.asymptotic,
            "error_estimate": r.abs_error_estimate,
            "converged": r.converged,
        }

    rows = _pmap(work, tasks, config.threads)
    write_report(
        config,
        ["l", "p", "value", "bound", "asymptotic", "error_estimate", "converged"],
        rows,
    )
    return 0


def _cmd_certify(config: RunConfig, args) -> int:
    cfg = _quad_config(args)
    tasks = [(l, p) for l in parse_int_range(args.l) for p in parse_float_list(args.p)]

    def work(task):
        l, p = task
        c = certify_bound(KernelSpec(l), p, cfg)
        return {
            "l": l,
            "p": p,
            "value": c.value,
            "bound": c.bound,
            "margin": c.margin,
            "error_estimate": c.abs_error_estimate,
        }

    rows = _pmap(work, tasks, config.threads)
    write_report(config, ["l", "p", "value", "bound", "margin", "error_estimate"], rows)
    return 0


def _cmd_ball(config: RunConfig, args) -> int:
    cfg = _quad_config(args)
    rows = []
    for p in parse_float_list(args.p):
        v = ball_integral(p, cfg)
        bound = (2.0 / p) ** 0.5
        rows.append({"p": p, "value": v, "bound": bound, "margin": bound - v})
    write_report(config, ["p", "value", "bound", "margin"], rows)
    return 0


def _cmd_asymptotic(config: RunConfig, args) -> int:
    cfg = _quad_config(args)
    tasks = [(l, p) for l in parse_int_range(args.l) for p in parse_float_list(args.p)]

    def work(task):
        l, p = task
        c = asymptotic_comparison(KernelSpec(l), p, cfg)
        return {"l": l, "p": p, "value": c.value, "reference": c.reference, "ratio": c.ratio}

    rows = _pmap(work, tasks, config.threads)
    write_report(config, ["l", "p", "value", "reference", "ratio"], rows)
    return 0


def _cmd_np_verify(config: RunConfig, args) -> int:
    rows = []
    for l in parse_int_range(args.l):
        r = detect_sign_change(KernelSpec(l))
        rows.append(
            {
                "l": r.l,
                "y0": r.y0,
                "crossings": r.crossings,
                "F0_lt_G0": r.F0_lt_G0,
                "G_lt_F_above_y1": r.G_lt_F_above_y1,
            }
        )
    write_report(config, ["l", "y0", "crossings", "F0_lt_G0", "G_lt_F_above_y1"], rows)
    return 0


def _epi_row(report) -> dict:
    return {
        "l_indices": list(report.l_indices),
        "l_min": report.l_min,
        "case": report.case,
        "lhs": report.lhs,
        "rhs_general": report.rhs_general,
        "rhs_exact_M": report.rhs_exact_M,
        "floor_general": report.floor_general,
        "floor_exact": report.floor_exact,
        "holds": report.holds,
    }


def _cmd_epi_check(config: RunConfig, args) -> int:
    cfg = _quad_config(args)

    def work(seed):
        inst = random_instance(seed, n_range=(args.n_min, args.n_max), l_range=(args.lmin, args.lmax))
        return _epi_row(check_epi(inst, cfg=cfg, with_chain=not args.no_chain))

    seeds = range(config.seed, config.seed + args.random)
    rows = _pmap(work, list(seeds), config.threads)
    extra = list(handcrafted_corpus()) if args.corpus else []
    if args.instances:
        extra += list(load_instances(args.instances))
    rows += [_epi_row(check_epi(inst, cfg=cfg, with_chain=not args.no_chain)) for inst in extra]
    write_report(
        config,
        ["l_indices", "l_min", "case", "lhs", "rhs_general", "rhs_exact_M",
         "floor_general", "floor_exact", "holds"],
        rows,
    )
    return 0 if all(r["holds"] for r in rows) else 1


def _cmd_rogozin(config: RunConfig, args) -> int:
    def work(seed):
        inst = random_instance(seed, n_range=(args.n_min, args.n_max), l_range=(args.lmin, args.lmax))
        c = check_rogozin(inst)
        return {
            "seed": seed,
            "max_prob": c.max_prob,
            "max_prob_uniform": c.max_prob_uniform,
            "gap": c.gap,
            "ok": c.ok,
        }

    seeds = range(config.seed, config.seed + args.random)
    rows = _pmap(work, list(seeds), config.threads)
    write_report(config, ["seed", "max_prob", "max_prob_uniform", "gap", "ok"], rows)
    return 0 if all(r["ok"] for r in rows) else 1


def _cmd_sweep(config: RunConfig, args) -> int:
    cfg = _quad_config(args)
    tasks = [(l, p) for l in parse_int_range(args.l) for p in parse_float_list(args.p)]

    def work(task):
        l, p = task
        r = lp_norm(KernelSpec(l), p, cfg)
        row = {
            "l": l,
            "p": p,
            "value": r.value,
            "bound": r.bound,
            "margin": None if r.bound is None else r.bound - r.value,
            "asymptotic": r.asymptotic,
            "ratio": r.value / r.asymptotic,
            "error_estimate": r.abs_error_estimate,
        }
        return row

    rows = _pmap(work, tasks, config.threads)
    write_report(
        config,
        ["l", "p", "value", "bound", "margin", "asymptotic", "ratio", "error_estimate"],
        rows,
    )
    return 0


def _cmd_suite(config: RunConfig, args) -> int:
    results = acceptance.run_all(printer=lambda line: print(line, flush=True))
    rows = [
        {"name": r.name, "ok": r.ok, "detail": r.detail, "seconds": r.seconds} for r in results
    ]
    if config.output_path != "-":
        write_report(config, ["name", "ok", "detail", "seconds"], rows)
    return 0 if all(r.ok for r in results) else 1


def emit_plot_data(spec: KernelSpec, resolution: int, out: str) -> None:
    """Write x, g(x), f(x) samples plus the level lines needed to redraw them.

    The metadata comments carry each arch peak level and the Gaussian floor,
    which is everything a plotting tool needs to reproduce the comparison
    picture for this length.
    """
    if resolution < 100:
        raise PreconditionError(f"resolution must be >= 100, got {resolution}")
    tg = TruncatedGaussian.from_length(spec.l)
    xs = np.linspace(0.0, 0.5, resolution)
    gs = kernel_values(spec.l, xs)
    fs = np.where(xs <= tg.x_c, gaussian_values(spec.l, xs), 0.0)
    comments = [
        f"# l={spec.l}",
        f"# x_c={tg.x_c!r}",
    ]
    for prof in bump_profiles(spec)[1:]:
        comments.append(f"# level:y_{prof.index}={prof.peak_y!r}")
    comments.append(f"# level:y_last={tg.y_last!r}")
    lines = comments + ["x,g,f"]
    for x, g, f in zip(xs, gs, fs):
        pt_g = EvalPoint(float(x), float(g))
        pt_f = EvalPoint(float(x), float(f))
        lines.append(f"{pt_g.x!r},{pt_g.value!r},{pt_f.value!r}")
    _atomic_write(out, "\n".join(lines) + "\n")


def _cmd_plot_data(config: RunConfig, args) -> int:
    emit_plot_data(KernelSpec(args.l), args.resolution, config.output_path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lebesgue-lab",
        description="Kernel norm bounds, level-set comparison checks, and the "
        "discrete max-entropy power inequality.",
    )
    parser.add_argument("--threads", default=None, help="worker count or 'auto' "
                        f"(default from ${THREADS_ENV})")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_default="-"):
        p.add_argument("--out", default=out_default, help="output path ('-' for stdout)")
        p.add_argument("--format", choices=("json", "csv"), default=None,
                       help="default: by file extension, else json")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--abs-tol", type=float, default=1e-12)
        p.add_argument("--rel-tol", type=float, default=1e-10)

    p = sub.add_parser("lebesgue", help="kernel norms over an (l, p) grid")
    p.add_argument("--l", required=True)
    p.add_argument("--p", required=True)
    common(p)

    p = sub.add_parser("certify", help="certify the norm bound over an (l, p) grid")
    p.add_argument("--l", required=True)
    p.add_argument("--p", required=True)
    common(p)

    p = sub.add_parser("ball", help="sinc-power integrals with their bound")
    p.add_argument("--p", required=True)
    common(p)

    p = sub.add_parser("asymptotic", help="ratios to first-order references")
    p.add_argument("--l", required=True)
    p.add_argument("--p", required=True)
    common(p)

    p = sub.add_parser("np-verify", help="sign-change reports per kernel length")
    p.add_argument("--l", required=True)
    common(p)

    p = sub.add_parser("epi-check", help="entropy power inequality on random instances")
    p.add_argument("--random", type=int, default=100)
    p.add_argument("--lmin", type=int, default=6)
    p.add_argument("--lmax", type=int, default=30)
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=5)
    p.add_argument("--corpus", action="store_true", help="include the handcrafted corpus")
    p.add_argument("--instances", default=None,
                   help="corpus file: JSON array of pmf-object arrays")
    p.add_argument("--no-chain", action="store_true", help="skip the bound chain")
    common(p)

    p = sub.add_parser("rogozin", help="uniformization comparison on random instances")
    p.add_argument("--random", type=int, default=100)
    p.add_argument("--lmin", type=int, default=6)
    p.add_argument("--lmax", type=int, default=30)
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=5)
    common(p)

    p = sub.add_parser("sweep", help="norms, bounds, and ratios in one table")
    p.add_argument("--l", required=True)
    p.add_argument("--p", required=True)
    common(p)

    p = sub.add_parser("suite", help="run the full acceptance battery")
    common(p)

    p = sub.add_parser("plot-data", help="sample g and f plus level lines to CSV")
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--resolution", type=int, default=2000)
    common(p, out_default="plot.csv")

    return parser


_HANDLERS = {
    "lebesgue": _cmd_lebesgue,
    "certify": _cmd_certify,
    "ball": _cmd_ball,
    "asymptotic": _cmd_asymptotic,
    "np-verify": _cmd_np_verify,
    "epi-check": _cmd_epi_check,
    "rogozin": _cmd_rogozin,
    "sweep": _cmd_sweep,
    "suite": _cmd_suite,
    "plot-data": _cmd_plot_data,
}


def _infer_format(out: str, explicit: str | None) -> str:
    if explicit:
        return explicit
    if out.endswith(".csv"):
        return "csv"
    return "json"


def run(args) -> int:
    params = {
        k: v
        for k, v in vars(args).items()
        if k not in ("command", "out", "format", "seed", "threads") and v is not None
    }
    config = RunConfig(
        command=args.command,
        parameters=params,
        output_path=args.out,
        format=_infer_format(args.out, args.format),
        seed=getattr(args, "seed", 0),
        threads=_resolve_threads(args.threads),
    )
    try:
        return _HANDLERS[args.command](config, args)
    except VerificationError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 1
    except (DomainError, PreconditionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    code = run(args)
    if argv is None:
        sys.exit(code)
    return code


if __name__ == "__main__":
    main()
