"""Command-line experiment runner.

Each subcommand drives one experiment and emits a CSV artifact (header row,
'.'-decimal, 17-significant-digit floats) to --out or stdout.  With --plot
a matplotlib rendering of the same data is written as a PNG next to the CSV.
Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 I/O error.
"""

import argparse
import sys

import numpy as np

from .errors import FormatError, PcgoptError
from .krylov import pcg, theorem_demo, TheoremDemoConfig
from .optimize import OptimizeSpec, optimize_parameter
from .precond import (identity_precond, jacobi_build, ric0_factorize,
                      ssor_build)
from .problems import CoeffKind, DiffusionSpec, LinearSystem, build_diag_demo, build_diffusion
from .sparsela import dense_sym_eig, read_matrix_market, spmv
from .stationary import random_contraction, verify_mean_rate
from .stochastic import TrialDistribution, eval_Fc, eval_Fs
from .errors import OptimizationFailedError

__all__ = ["main"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on usage errors; this CLI reserves 2 for
    # numerical failures, so remap to 1 via an exception.
    def error(self, message):
        raise UsageError(message)


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def _write_csv(out, header, rows, trailer=None):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(c) for c in row))
    if trailer is not None:
        lines.append(trailer)
    text = "\n".join(lines) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="ascii", newline="\n") as f:
            f.write(text)


def _parse_problem(token):
    """Return (LinearSystem, grid_side_or_None, label)."""
    kind, _, arg = token.partition(":")
    if kind in ("diffusion-const", "diffusion-disc"):
        if not arg:
            raise UsageError(f"{kind} requires a grid size, e.g. {kind}:50")
        n = int(arg)
        coeff = CoeffKind.CONSTANT if kind.endswith("const") else CoeffKind.DISCONTINUOUS
        return build_diffusion(DiffusionSpec(n_interior=n, coeff=coeff)), n, token
    if kind == "diag-demo":
        if not arg:
            raise UsageError("diag-demo requires a size, e.g. diag-demo:1000")
        return build_diag_demo(int(arg)), None, token
    if kind == "mm":
        if not arg:
            raise UsageError("mm requires a file path, e.g. mm:matrix.mtx")
        A = read_matrix_market(arg)
        ones = np.ones(A.nrows)
        return LinearSystem(A=A, b=spmv(A, ones), x_exact=ones), None, token
    raise UsageError(f"unknown problem '{token}'")


def _parse_precond(token, param_flag):
    """Return (family, param_or_None); family in {identity,jacobi,ric0,ssor}."""
    family, _, arg = token.partition(":")
    if family not in ("identity", "jacobi", "ric0", "ssor"):
        raise UsageError(f"unknown preconditioner '{token}'")
    param = None
    if arg:
        param = float(arg)
    if param_flag is not None:
        if param is not None:
            raise UsageError("give the parameter either as precond:value or --param, not both")
        param = param_flag
    if family in ("identity", "jacobi") and param is not None:
        raise UsageError(f"{family} takes no parameter")
    return family, param


def _build_precond(A, family, param):
    if family == "identity":
        return identity_precond(A.nrows)
    if family == "jacobi":
        return jacobi_build(A)
    if param is None:
        raise UsageError(f"{family} requires a parameter (precond:value or --param)")
    if family == "ric0":
        return ric0_factorize(A, param)
    return ssor_build(A, param)


def _parse_pair(token, name):
    parts = token.split(":")
    if len(parts) != 2:
        raise UsageError(f"--{name} expects lo:hi")
    return float(parts[0]), float(parts[1])


def _parse_grid(token):
    parts = token.split(":")
    if len(parts) != 3:
        raise UsageError("--grid expects lo:hi:steps")
    lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    if steps < 1:
        raise UsageError("--grid needs at least one step")
    return np.linspace(lo, hi, steps)


def _parse_dist(token, grid_side):
    if token == "normal":
        return None
    kind, _, arg = token.partition(":")
    if kind != "grf" or not arg:
        raise UsageError(f"unknown distribution '{token}' (use normal or grf:<sigma2>)")
    if grid_side is None:
        raise UsageError("grf trial vectors require a diffusion problem")
    return TrialDistribution(kind="grf", sigma2=float(arg), grid_side=grid_side)


def _print_config(args, extra=None):
    items = dict(vars(args))
    items.pop("func", None)
    items.pop("print_config", None)
    if extra:
        items.update(extra)
    for key in sorted(items):
        print(f"{key}={items[key]}")


def _maybe_plot(args, kind, table, meta=None):
    if not getattr(args, "plot", False):
        return
    if args.out is None:
        raise UsageError("--plot requires --out")
    from . import plotting
    png = args.out[:-4] + ".png" if args.out.endswith(".csv") else args.out + ".png"
    plotting.render(kind, table, png, meta=meta)


def _cmd_optimize(args):
    system, grid_side, _ = _parse_problem(args.problem)
    family, param = _parse_precond(args.precond, args.param)
    if family not in ("ric0", "ssor"):
        raise UsageError("optimize works on the parametric families ric0 and ssor")
    if param is not None:
        raise UsageError("optimize searches for the parameter; do not fix one")
    interval = _parse_pair(args.interval, "interval")
    dist = _parse_dist(args.dist, grid_side)
    spec = OptimizeSpec(family=family, interval=interval, K=args.K,
                        n=args.n_trials, seed=args.seed, xtol=args.xtol,
                        max_evals=args.max_evals, functional=args.functional,
                        dist=dist, norm="A_norm" if args.norm == "a" else "two_norm",
                        lanczos_iters=args.lanczos_iters, oracle=args.oracle)
    if args.print_config:
        _print_config(args)
    result, log = optimize_parameter(system.A, spec)
    table = [(p, v) for p, v in log]
    trailer = f"optimum,{_fmt(result.x_star)},{_fmt(result.f_star)},{result.n_evals}"
    _write_csv(args.out, ["param", "functional_value"], table, trailer=trailer)
    _maybe_plot(args, "optimize", table, meta=(result.x_star,))
    return 0


def _cmd_curve(args):
    system, grid_side, _ = _parse_problem(args.problem)
    family, param = _parse_precond(args.precond, args.param)
    if family not in ("ric0", "ssor"):
        raise UsageError("curve sweeps the parametric families ric0 and ssor")
    if param is not None:
        raise UsageError("curve sweeps --grid; do not fix a parameter")
    grid = _parse_grid(args.grid)
    dist = _parse_dist(args.dist, grid_side)
    norm = "A_norm" if args.norm == "a" else "two_norm"
    if args.print_config:
        _print_config(args)
    table = []
    for p in grid:
        p = float(p)
        try:
            P = _build_precond(system.A, family, p)
        except (PcgoptError, ValueError):
            table.append((p, float("inf"), 0.0))
            continue
        if args.functional == "fs":
            ev = eval_Fs(system.A, P, args.K, args.n_trials, dist, args.seed,
                         norm, param=p)
            table.append((p, ev.value, ev.std_err))
        else:
            ev = eval_Fc(system.A, P, args.K, args.lanczos_iters, args.seed,
                         oracle=args.oracle, param=p)
            table.append((p, ev.value, 0.0))
    _write_csv(args.out, ["param", "value", "std_err"], table)
    _maybe_plot(args, "curve", table)
    return 0


def _cmd_pcg(args):
    system, _, _ = _parse_problem(args.problem)
    family, param = _parse_precond(args.precond, args.param)
    P = _build_precond(system.A, family, param)
    if args.print_config:
        _print_config(args)
    trace = pcg(system.A, system.b, np.zeros(system.A.nrows), P,
                args.max_iters, rel_tol=args.tol, x_star=system.x_exact)
    table = []
    for k in range(trace.iters_done + 1):
        err2 = trace.err2[k] if trace.err2 is not None else None
        errA = trace.errA[k] if trace.errA is not None else None
        table.append((k, trace.relres[k], err2, errA))
    _write_csv(args.out, ["iter", "relres", "err2", "errA"], table)
    _maybe_plot(args, "pcg", table)
    return 0


def _cmd_spectrum(args):
    system, _, _ = _parse_problem(args.problem)
    family, param = _parse_precond(args.precond, args.param)
    P = _build_precond(system.A, family, param)
    A = system.A
    m = A.nrows
    if m > 3000:
        raise UsageError("spectrum uses the dense eigensolver path (m <= 3000)")
    if args.print_config:
        _print_config(args)
    B = np.empty((m, m))
    e = np.zeros(m)
    for j in range(m):
        e[j] = 1.0
        B[:, j] = P.split_solve(spmv(A, P.split_solve_t(e)))
        e[j] = 0.0
    w = dense_sym_eig(0.5 * (B + B.T))
    table = [(i + 1, float(w[i])) for i in range(m)]
    _write_csv(args.out, ["index", "eigenvalue"], table)
    _maybe_plot(args, "spectrum", table)
    return 0


def _cmd_theorem(args):
    cfg = TheoremDemoConfig(m=args.m, s=args.s, gamma_head=args.gamma_head,
                            seed=args.seed, iters=args.iters, delta=args.delta)
    if args.print_config:
        _print_config(args)
    res = theorem_demo(cfg)
    table = []
    for j in range(res.errA.shape[0]):
        table.append((j, res.errA[j], res.bound_C1[j], res.bound_Cs[j],
                      res.head_q[j], res.head_qbar[j], res.J))
    _write_csv(args.out, ["iter", "errA", "bound_C1", "bound_Cs",
                          "head_q", "head_qbar", "J_delta"], table)
    _maybe_plot(args, "theorem", table)
    return 0


def _cmd_meanrate(args):
    scheme = random_contraction(args.m, args.rho, seed=args.seed)
    if args.print_config:
        _print_config(args)
    records = verify_mean_rate(scheme, args.k_max, args.n_trials, seed=args.seed)
    table = [(r.k, r.empirical_ek, r.frob_norm, r.rho_pow) for r in records]
    _write_csv(args.out, ["k", "empirical_ek", "frob_norm", "rho_pow"], table)
    _maybe_plot(args, "meanrate", table)
    return 0


def _add_common(p, problem=True, precond=True):
    if problem:
        p.add_argument("--problem", required=True,
                       help="diffusion-const:n | diffusion-disc:n | diag-demo:m | mm:path")
    if precond:
        p.add_argument("--precond", required=True,
                       help="identity | jacobi | ric0[:alpha] | ssor[:omega]")
        p.add_argument("--param", type=float, default=None,
                       help="preconditioner parameter (alternative to precond:value)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="CSV output path (default stdout)")
    p.add_argument("--plot", action="store_true",
                   help="also render a PNG figure next to the CSV")
    p.add_argument("--print-config", action="store_true",
                   help="echo the resolved configuration before running")


def _add_functional(p):
    p.add_argument("--functional", choices=("fs", "fc"), default="fs")
    p.add_argument("--K", type=int, required=True, help="iteration count in the functional")
    p.add_argument("--n-trials", type=int, default=50)
    p.add_argument("--dist", default="normal", help="normal | grf:<sigma2>")
    p.add_argument("--norm", choices=("two", "a"), default="two")
    p.add_argument("--lanczos-iters", type=int, default=200)
    p.add_argument("--oracle", action="store_true",
                   help="force the dense eigensolver path for fc")


def build_parser():
    parser = _Parser(prog="pcgopt",
                     description="Preconditioner parameter optimization experiments for CG")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="Brent-optimize a preconditioner parameter")
    _add_common(p)
    _add_functional(p)
    p.add_argument("--interval", required=True, help="search interval lo:hi")
    p.add_argument("--xtol", type=float, default=1e-5)
    p.add_argument("--max-evals", type=int, default=100)
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("curve", help="evaluate a functional on a parameter grid")
    _add_common(p)
    _add_functional(p)
    p.add_argument("--grid", required=True, help="parameter grid lo:hi:steps")
    p.set_defaults(func=_cmd_curve)

    p = sub.add_parser("pcg", help="run preconditioned CG and record convergence")
    _add_common(p)
    p.add_argument("--tol", type=float, default=1e-7,
                   help="relative residual stopping tolerance (0 disables)")
    p.add_argument("--max-iters", type=int, default=1000)
    p.set_defaults(func=_cmd_pcg)

    p = sub.add_parser("spectrum", help="eigenvalues of the preconditioned matrix")
    _add_common(p)
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("theorem", help="two-process CG head-component demonstration")
    _add_common(p, problem=False, precond=False)
    p.add_argument("--m", type=int, default=1000)
    p.add_argument("--s", type=int, default=2)
    p.add_argument("--gamma-head", type=float, default=0.05)
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--delta", type=float, default=1e-3)
    p.set_defaults(func=_cmd_theorem)

    p = sub.add_parser("meanrate", help="verify the mean-rate identity of a stationary scheme")
    _add_common(p, problem=False, precond=False)
    p.add_argument("--m", type=int, default=50)
    p.add_argument("--rho", type=float, default=0.9)
    p.add_argument("--k-max", type=int, default=10)
    p.add_argument("--n-trials", type=int, default=10000)
    p.set_defaults(func=_cmd_meanrate)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except FormatError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3
    except (PcgoptError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1


def _entry():
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
