"""Command-line front end.

Subcommands: ``zeros``, ``dispersion``, ``scan``, ``branch`` and ``verify``.
Settings come from flags, then a JSON config file (``--config``), then
defaults. Exit codes: 0 success, 1 numerical failure or failed check,
2 usage error, 3 I/O error.
"""
import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_USAGE = 2
EXIT_IO = 3

__all__ = [
    "RunConfig", "main", "build_parser", "cmd_zeros", "cmd_dispersion", "cmd_scan",
    "cmd_branch", "cmd_verify", "parse_int_range", "parse_float_list",
]


class UsageError(Exception):
    """Invalid configuration detected after argument parsing."""


@dataclass
class RunConfig:
    """Validated settings of one CLI run."""

    subcommand: str
    alpha: list = field(default_factory=list)
    b: list = field(default_factory=list)
    m: list = field(default_factory=list)
    n_zeros: int = 4000
    cache_dir: str = None
    out: str = None
    fmt: str = "csv"
    threads: int = None
    extra: dict = field(default_factory=dict)

    def validate(self):
        for a in self.alpha:
            if not 0.0 < a < 1.0:
                raise UsageError(f"alpha must lie in (0, 1), got {a}")
        for b in self.b:
            if not 0.0 < b < 1.0:
                raise UsageError(f"b must lie in (0, 1), got {b}")
        for m in self.m:
            if m < 1:
                raise UsageError(f"m must be >= 1, got {m}")
        if self.n_zeros < 4:
            raise UsageError("n-zeros must be >= 4")
        if self.threads is not None and self.threads < 1:
            raise UsageError("threads must be >= 1")
        return self


# ------------------------------------------------------------- parsing ---

def parse_int_range(text):
    """``"3"``, ``"1..6"`` or ``"1,2,5"`` to a list of ints."""
    out = []
    try:
        for part in str(text).split(","):
            part = part.strip()
            if ".." in part:
                lo, hi = part.split("..")
                lo, hi = int(lo), int(hi)
                if hi < lo:
                    raise ValueError
                out.extend(range(lo, hi + 1))
            elif part:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer list {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def parse_float_list(text):
    """``"0.5"`` or ``"0.1,0.5,0.9"`` to a list of floats."""
    try:
        vals = [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number list {text!r}") from None
    if not vals or not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError(f"invalid number list {text!r}")
    return vals


def _nonneg_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _pos_int(text):
    v = _nonneg_int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"not finite: {text!r}")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of default settings (flags take precedence)")
    common.add_argument("--cache-dir", help="cache directory (else $ARTIFACT_CACHE_DIR)")
    common.add_argument("--threads", type=_pos_int, help="cap on worker threads (default: all cores)")
    common.add_argument("--out", help="output file (default: stdout)")

    parser = argparse.ArgumentParser(
        prog="artifact",
        description="Rotating vortex patches of the generalized SQG equation in the unit disc.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("zeros", parents=[common], help="compute and store a Bessel zero table")
    p.add_argument("--order", type=_nonneg_int, required=True, help="order n of J_n")
    p.add_argument("--count", type=_pos_int, required=True, help="number of zeros")

    p = sub.add_parser("dispersion", parents=[common],
                       help="Omega_{m,b} by the zero-sum and Sneddon routes (CSV)")
    p.add_argument("--alpha", type=parse_float_list, required=True, help="order(s), comma list")
    p.add_argument("--b", type=parse_float_list, required=True, help="base radius(es), comma list")
    p.add_argument("--m", type=parse_int_range, required=True, help="fold numbers, e.g. 1..6")
    p.add_argument("--n-zeros", type=_pos_int, default=4000, help="zeros per order (default 4000)")

    p = sub.add_parser("scan", parents=[common], help="monotonicity of m -> Omega_{m,b} (CSV)")
    p.add_argument("--alpha", type=parse_float_list, required=True)
    p.add_argument("--b", type=parse_float_list, required=True)
    p.add_argument("--m-max", type=_pos_int, required=True)

    for name, text in (("branch", "continue a V-state branch (JSON-lines)"),
                       ("verify", "pass/fail table of module invariants")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--alpha", type=_float, default=0.5, help="order (default 0.5)")
        p.add_argument("--b", type=_float, default=0.25, help="base radius (default 0.25)")
        p.add_argument("--m", type=_pos_int, default=2, help="fold number (default 2)")
        p.add_argument("--N", type=_pos_int, default=12, help="retained harmonics (default 12)")
        p.add_argument("--M", type=_pos_int, default=64, help="collocation nodes (default 64)")
        p.add_argument("--grid", type=parse_int_range, default=[64, 64, 128],
                       help="kernel grid resolution n1,n2,n3 (default 64,64,128)")
        p.add_argument("--r-max", type=_float, default=None,
                       help="kernel grid radius (default min(0.75, (1+b)/2))")
        if name == "branch":
            p.add_argument("--s-max", type=_float, default=0.01, help="largest amplitude")
            p.add_argument("--ds", type=_float, default=0.002, help="amplitude step")
            p.add_argument("--tol", type=_float, default=1e-9, help="Newton tolerance on max |F|")
            p.add_argument("--csv", help="also write a CSV summary (s, omega, residual, a_2..a_N)")
    return parser


def _load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def parse_args(argv):
    """Parse flags, merging a config file underneath them."""
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    sub_name = next((t for t in argv if not t.startswith("-")), None)
    subs = parser._subparsers._group_actions[0].choices
    if known.config and sub_name in subs:
        conf = _load_config(known.config)
        sub = subs[sub_name]
        actions = {a.dest: a for a in sub._actions}
        unknown = sorted(set(conf) - set(actions))
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        for key, val in conf.items():
            action = actions[key]
            if isinstance(val, list):
                val = ",".join(str(v) for v in val)
            if action.type is not None and val is not None:
                try:
                    val = action.type(str(val))
                except argparse.ArgumentTypeError as exc:
                    raise UsageError(f"config key {key}: {exc}") from exc
            sub.set_defaults(**{key: val})
            action.required = False
    return parser.parse_args(argv)


def _config(args):
    sc = args.subcommand
    listify = (lambda v: v if isinstance(v, list) else [v])
    cfg = RunConfig(
        subcommand=sc,
        alpha=listify(getattr(args, "alpha", [])),
        b=listify(getattr(args, "b", [])),
        m=listify(getattr(args, "m", [])),
        n_zeros=getattr(args, "n_zeros", 4000),
        cache_dir=args.cache_dir,
        out=args.out,
        fmt="jsonl" if sc == "branch" else "csv",
        threads=args.threads,
        extra={k: v for k, v in vars(args).items()
               if k not in ("alpha", "b", "m", "n_zeros", "cache_dir", "out", "threads",
                            "subcommand", "config")},
    )
    if sc == "scan" and args.m_max < 1:
        raise UsageError("m-max must be >= 1")
    return cfg.validate()


def _workers(cfg):
    return cfg.threads or os.cpu_count() or 1


def _num(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (int,)) and not isinstance(v, bool):
        return str(v)
    return f"{float(v):.17g}"


def _emit(cfg, text):
    if cfg.out:
        path = Path(cfg.out)
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


# ---------------------------------------------------------- subcommands ---

def cmd_zeros(order, count, out=None, cache_dir=None):
    """Compute J_order zeros and write the JSON table to ``out`` (or the cache)."""
    from .specfun import bessel_zeros, cache_dir as default_dir

    table = bessel_zeros(order, count, cache=out is None, path=cache_dir)
    if out is None:
        path = default_dir(cache_dir) / f"zeros_n{order}_k{count}.json"
        if not path.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(table.to_json(), encoding="utf-8")
    else:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(table.to_json(), encoding="utf-8")
    sys.stderr.write(f"wrote {table.count} zeros of J_{order} to {path}\n")
    return EXIT_OK


def cmd_dispersion(cfg):
    """CSV of both dispersion routes over the (alpha, b, m) grid."""
    from .dispersion import flag_string, omega_sneddon, omega_zero_sum
    from .greenkernel import SpectralParams

    jobs = [(a, b, m) for a in cfg.alpha for b in cfg.b for m in cfg.m]

    def row(job):
        a, b, m = job
        p = SpectralParams(a, b, n_zeros=cfg.n_zeros)
        s = omega_sneddon(p, m)
        z = omega_zero_sum(p, m, path=cfg.cache_dir)
        return [a, b, m, s.omega, z.omega, abs(s.omega - z.omega), s.minus_V1_0, s.alpha_mb,
                flag_string(a, b, m)]

    rows = _pmap(row, jobs, _workers(cfg))
    header = ["alpha", "b", "m", "omega_sneddon", "omega_zero_sum", "abs_diff",
              "minus_V1_0", "alpha_mb", "case_flags"]
    _emit(cfg, _csv_text(header, rows))
    return EXIT_OK


def _pmap(fn, jobs, workers):
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def cmd_scan(cfg):
    """CSV of the first monotonicity violation per (alpha, b)."""
    from .dispersion import monotonicity_scan

    m_max = cfg.extra["m_max"]
    rows = monotonicity_scan(cfg.alpha, cfg.b, m_max, workers=_workers(cfg))
    header = ["alpha", "b", "m_max", "first_violation", "n_violations", "monotone",
              "case_1_3", "mstar_bound"]
    out = [[r.alpha, r.b, r.m_max, r.first_violation, len(r.violations), r.monotone,
            r.case13, r.mstar] for r in rows]
    _emit(cfg, _csv_text(header, out))
    return EXIT_OK


def _kernel_setup(cfg):
    from .contour import CollocationGrid
    from .greenkernel import SpectralParams, build_smooth_grid

    e = cfg.extra
    alpha, b, m = cfg.alpha[0], cfg.b[0], cfg.m[0]
    p = SpectralParams(alpha, b)
    r_max = e.get("r_max") or min(0.75, 0.5 * (1.0 + b))
    res = tuple(e.get("grid") or (64, 64, 128))
    if len(res) != 3:
        raise UsageError("--grid needs three counts")
    try:
        grid = CollocationGrid(M=e["M"], N=e["N"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    kgrid = build_smooth_grid(p, r_max, res, cache=True, path=cfg.cache_dir)
    return p, m, grid, kgrid


def cmd_branch(cfg):
    """JSON-lines branch points from s = ds to s_max (and an optional CSV summary)."""
    from .branch import continue_branch
    from .errors import PartialBranchError

    p, m, grid, kgrid = _kernel_setup(cfg)
    e = cfg.extra
    status = EXIT_OK
    try:
        points = continue_branch(p, m, e["s_max"], e["ds"], grid, kgrid, tol=e["tol"],
                                 workers=_workers(cfg))
    except PartialBranchError as exc:
        sys.stderr.write(f"error: {exc}; last good amplitude {exc.last_good}\n")
        points, status = exc.points, EXIT_NUMERICAL
    _emit(cfg, "".join(pt.to_json() + "\n" for pt in points))
    if e.get("csv"):
        header = ["s", "omega", "residual"] + [f"a_{n}" for n in range(2, grid.N + 1)]
        rows = [[pt.s, pt.omega, pt.residual_inf] + list(pt.shape.coeffs[1:]) for pt in points]
        path = Path(e["csv"])
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(_csv_text(header, rows), encoding="utf-8")
    return status


def verify_checks(p, m, grid, kgrid):
    """Run the invariant checks; yields (name, value, bound, passed)."""
    import numpy as np

    from .branch import bifurcation_point
    from .contour import FourierShape, eval_F, gateaux, linearized_diag, sine_coefficients
    from .dispersion import omega_sneddon, omega_zero_sum
    from .greenkernel import kernel_series

    zero = FourierShape.zero(m, p.b, grid.N)
    for om in (0.0, 0.3):
        v = float(np.max(np.abs(eval_F(om, zero, grid, kgrid).F)))
        yield f"F(Omega={om:g}, 0) = 0", v, 1e-9, v < 1e-9
    th = grid.nodes(m)
    for n in (1, 2, 3):
        if n > grid.N:
            break
        g = gateaux(0.0, zero, np.eye(grid.N)[n - 1], 1e-6, grid, kgrid)
        c = linearized_diag(p, m, n, 0.0)
        err = float(np.max(np.abs(g - c * np.sin(n * m * th))) / abs(c))
        yield f"diagonal match n={n}", err, 1e-4, err < 1e-4
        sc = sine_coefficients(g, m, grid.N)
        leak = float(np.max(np.abs(np.delete(sc, n - 1))) / abs(c))
        yield f"harmonic leakage n={n}", leak, 1e-6, leak < 1e-6
    om_m = bifurcation_point(p, m)
    v = abs(linearized_diag(p, m, 1, om_m))
    yield "kernel direction at Omega_m", v, 1e-12, v < 1e-12
    s = omega_sneddon(p, m)
    z = omega_zero_sum(p, m)
    v = abs(s.omega - z.omega)
    yield "two-route dispersion", v, 1e-6, v < 1e-6
    rng = np.random.default_rng(12345)
    r = rng.uniform(0.0, kgrid.r_max, (3, 200))
    t = rng.uniform(0.0, math.pi, 200)
    a = kgrid.value(r[0], r[1], t)
    b = kgrid.value(r[1], r[0], t)
    v = float(np.max(np.abs(a - b)))
    yield "grid swap symmetry", v, 10 * p.tol, v < 10 * p.tol
    v1 = kernel_series(p, 0.3, 0.55, 0.9).value
    v2 = kernel_series(p, 0.55, 0.3, 0.9).value
    v3 = kernel_series(p, 0.3, 0.55, -0.9).value
    v = max(abs(v1 - v2), abs(v1 - v3))
    yield "series symmetry and reflection", v, 1e-12, v < 1e-12


def cmd_verify(cfg):
    """Print a PASS/FAIL table; exit 1 on any failure."""
    p, m, grid, kgrid = _kernel_setup(cfg)
    lines = [f"{'check':36s} {'value':>12s} {'bound':>10s}  result"]
    ok = True
    for name, val, bound, passed in verify_checks(p, m, grid, kgrid):
        ok &= bool(passed)
        lines.append(f"{name:36s} {val:12.3e} {bound:10.1e}  {'PASS' if passed else 'FAIL'}")
    _emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK if ok else EXIT_NUMERICAL


# ----------------------------------------------------------------- main ---

def main(argv=None):
    """Entry point; returns the process exit code."""
    from .errors import ArtifactError, DomainError, NumericalError

    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except UsageError as exc:
        sys.stderr.write(f"artifact: usage error: {exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        sys.stderr.write(f"artifact: cannot read config: {exc}\n")
        return EXIT_IO
    if args.cache_dir:
        os.environ["ARTIFACT_CACHE_DIR"] = args.cache_dir
    try:
        if args.subcommand == "zeros":
            return cmd_zeros(args.order, args.count, args.out, args.cache_dir)
        cfg = _config(args)
        return {"dispersion": cmd_dispersion, "scan": cmd_scan, "branch": cmd_branch,
                "verify": cmd_verify}[args.subcommand](cfg)
    except UsageError as exc:
        sys.stderr.write(f"artifact: usage error: {exc}\n")
        return EXIT_USAGE
    except NumericalError as exc:
        sys.stderr.write(f"artifact: numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    except DomainError as exc:
        sys.stderr.write(f"artifact: usage error: {exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        sys.stderr.write(f"artifact: I/O error: {exc}\n")
        return EXIT_IO
    except ArtifactError as exc:
        sys.stderr.write(f"artifact: error: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
