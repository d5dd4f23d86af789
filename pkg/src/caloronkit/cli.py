"""Command-line interface: file IO, subcommand dispatch, exit-code contract.

Exit codes: 0 success / checks pass, 1 check failure, 2 usage or schema
error.  All tolerances are flag-overridable; ``--json`` switches reports to
machine-readable JSON on stdout.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .errors import CaloronKitError, SchemaError
from .flow import FlowConfig, flow_circle
from .moduli import MonadData, genericity_check, monad_residuals, random_generic
from .nahmdata import A_coeffs, NahmData, validate
from .spectral import curves_of, extract_FG, split_divisor_j0, split_divisor_jpos
from .transform import (
    FieldGrid,
    asymptotics_check,
    connection_grid,
    curvature_grid,
    frames_on_grid,
    sd_residual,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def parse_grid(spec, period=None):
    """Parse "t=0:0.2:6.28,x1=-1:0.1:1,..." into four axis arrays."""
    axes = {}
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            name, rng = part.split("=")
            start, step, stop = (float(v) for v in rng.split(":"))
        except ValueError:
            raise SchemaError(f"malformed grid axis '{part}' "
                              f"(want name=start:step:stop)")
        if step <= 0:
            raise SchemaError(f"grid step must be positive on axis '{name}'")
        if start > stop:
            raise SchemaError(f"grid start > stop on axis '{name}'")
        axes[name.strip()] = np.arange(start, stop + 0.5 * step, step)
    missing = [n for n in ("t", "x1", "x2", "x3") if n not in axes]
    if missing:
        raise SchemaError(f"grid is missing axes {missing}")
    t = axes["t"]
    if period is not None and t[-1] - t[0] > period + 1e-9:
        raise SchemaError("t-range exceeds one period")
    return tuple(axes[n] for n in ("t", "x1", "x2", "x3"))


def _load_nahm(path):
    try:
        return NahmData.load(path)
    except FileNotFoundError:
        raise SchemaError(f"no such file: {path}")
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON in {path}: {exc}")


def _load_monad(path):
    try:
        return MonadData.load(path)
    except FileNotFoundError:
        raise SchemaError(f"no such file: {path}")
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON in {path}: {exc}")


def _emit(args, report_obj, lines):
    if getattr(args, "json", False):
        print(json.dumps(report_obj, indent=2, default=_json_default))
    else:
        for ln in lines:
            print(ln)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not JSON serializable: {type(o)}")


# -- subcommands ------------------------------------------------------------

def cmd_validate(args):
    data = _load_nahm(args.file)
    rep = validate(data, tol=args.tol)
    lines = [f"{c.name}: {'pass' if c.passed else 'FAIL'} "
             f"(value {c.value:.3e}, threshold {c.threshold:.3e})"
             for c in rep.checks]
    _emit(args, rep.to_json(), lines)
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_flow(args):
    data = _load_nahm(args.infile)
    cfg = FlowConfig(steps_per_interval=args.steps)
    out = flow_circle(data, cfg, tol=args.tol)
    out.save(args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_spectral(args):
    data = _load_nahm(args.infile)
    pair = curves_of(data, tol=max(args.tol, 1e-8))
    prof = data.profile
    small0 = A_coeffs(data.small.T1[0], data.small.T2[0], data.small.T3[0])
    if prof.j == 0:
        b = data.boundary_plus
        s0, s1, split = split_divisor_j0(small0, b.alpha0, b.alpha1,
                                         tol=args.tol)
    else:
        factors = extract_FG(data)
        large_end = A_coeffs(data.large.T1[-1], data.large.T2[-1],
                             data.large.T3[-1])
        s0, s1, split = split_divisor_jpos(small0, large_end, factors,
                                           tol=args.tol)
    out = {"s0": pair.s0.to_json(), "s1": pair.s1.to_json(),
           "D": split.D.to_json(), "Dprime": split.Dprime.to_json()}
    with open(args.out, "w") as fh:
        json.dump(out, fh, indent=2)
    print(f"wrote {args.out} ({split.D.total_multiplicity} + "
          f"{split.Dprime.total_multiplicity} intersection points)")
    return EXIT_OK


def cmd_transform(args):
    data = _load_nahm(args.infile)
    axes = parse_grid(args.grid, period=data.profile.period)
    frames, _ = frames_on_grid(data, axes, args.nodes, tol=args.tol)
    A = connection_grid(frames, axes)
    inner = tuple(ax[1:-1] for ax in axes)
    grid = FieldGrid(axes=inner, A=A, period=data.profile.period)
    with open(args.out, "w") as fh:
        json.dump(grid.to_json(), fh)
    print(f"wrote {args.out} "
          f"({'x'.join(str(len(ax)) for ax in inner)} connection nodes)")
    return EXIT_OK


def cmd_sdcheck(args):
    try:
        with open(args.file) as fh:
            grid = FieldGrid.from_json(json.load(fh))
    except FileNotFoundError:
        raise SchemaError(f"no such file: {args.file}")
    except (json.JSONDecodeError, KeyError) as exc:
        raise SchemaError(f"invalid field grid {args.file}: {exc}")
    if grid.F is None:
        grid = curvature_grid(grid)
    rep = sd_residual(grid)
    _emit(args, rep.to_json(),
          [f"sd residual {rep.residual:.4e} (orientation "
           f"{rep.orientation:+d}{', zero curvature' if rep.zero_curvature else ''})"])
    return EXIT_OK if rep.residual < args.tol else EXIT_FAIL


def cmd_asymptotics(args):
    data = _load_nahm(args.infile)
    rep = asymptotics_check(data, radii=tuple(args.radius), N=args.nodes)
    lines = [f"|x|={r}: eigenvalue pair {v}" for r, v in rep.lambdas.items()]
    ok = True
    if rep.degenerate:
        lines.append("degenerate data, nothing asserted")
    elif data.profile.j == 0:
        lines.append(f"correction exponent {rep.exponent:.3f} (want <= -1.5)")
        ok = rep.exponent is not None and rep.exponent <= -1.5
    else:
        j = data.profile.j
        lines.append(f"monopole slope estimate {rep.slope:.3f} (want {j} "
                     f"within 10%)")
        ok = rep.slope is not None and abs(rep.slope - j) <= 0.1 * j
    _emit(args, rep.to_json(), lines)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_moduli_gen(args):
    m = random_generic(args.k, args.j, args.seed)
    m.save(args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_moduli_check(args):
    m = _load_monad(args.file)
    res = monad_residuals(m)
    rep = genericity_check(m, tol=args.tol)
    ok = max(res) < max(args.tol, 1e-8) and rep.all_ok
    obj = {"residuals": list(res), "genericity": rep.to_json(), "ok": ok}
    lines = [f"residuals: {res[0]:.3e} {res[1]:.3e} {res[2]:.3e}",
             f"genericity: {rep.booleans()}",
             "pass" if ok else "FAIL"]
    _emit(args, obj, lines)
    return EXIT_OK if ok else EXIT_FAIL


# -- parser -----------------------------------------------------------------

def _build_parser():
    ap = argparse.ArgumentParser(
        prog="caloronkit",
        description="Nahm data toolkit: validation, flows, spectral curves, "
                    "the inverse transform, and moduli fixtures.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, tol=1e-8):
        p.add_argument("--tol", type=float, default=tol)
        p.add_argument("--json", action="store_true")

    p = sub.add_parser("validate", help="check a Nahm data file")
    p.add_argument("file")
    common(p)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("flow", help="re-integrate around the circle")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--steps", type=int, default=2000)
    common(p)
    p.set_defaults(fn=cmd_flow)

    p = sub.add_parser("spectral", help="curves and divisor splitting")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    common(p, tol=1e-9)
    p.set_defaults(fn=cmd_spectral)

    p = sub.add_parser("transform", help="connection on a spacetime grid")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--grid", required=True,
                   help='e.g. "t=0:0.2:6.28,x1=-1:0.1:1,x2=...,x3=..."')
    p.add_argument("--out", required=True)
    p.add_argument("-N", "--nodes", type=int, default=128)
    common(p)
    p.set_defaults(fn=cmd_transform)

    p = sub.add_parser("sdcheck", help="self-duality residual of a field grid")
    p.add_argument("file")
    common(p, tol=5e-3)
    p.set_defaults(fn=cmd_sdcheck)

    p = sub.add_parser("asymptotics", help="far-field eigenvalue check")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--radius", type=float, action="append",
                   help="sampling radius (repeatable; default 5 and 10)")
    p.add_argument("-N", "--nodes", type=int, default=128)
    common(p)
    p.set_defaults(fn=cmd_asymptotics)

    p = sub.add_parser("moduli", help="monad data generation and checks")
    msub = p.add_subparsers(dest="moduli_command", required=True)
    g = msub.add_parser("gen")
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--j", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(fn=cmd_moduli_gen)
    c = msub.add_parser("check")
    c.add_argument("file")
    common(c)
    c.set_defaults(fn=cmd_moduli_check)

    return ap


def dispatch(argv=None):
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    if getattr(args, "radius", "missing") is None:
        args.radius = [5.0, 10.0]
    try:
        return args.fn(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CaloronKitError as exc:
        print(f"check failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
