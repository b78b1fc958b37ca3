"""Command-line front end: flat limits, samples, densities and sweeps as CSV.

Exit codes: 0 ok, 1 I/O error, 2 domain error. Floats print with 17
significant digits so files round-trip losslessly. Every command is a
deterministic function of its inputs and the seed.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import diagnostics, ensembles, flatlimit, sampling
from .geometry import PointSet, grid_points, uniform_points
from .kernels import builtin_kernel, custom_kernel


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _write_rows(path, header, rows, fmt="csv"):
    if fmt == "json":
        payload = {"columns": list(header),
                   "rows": [[c if isinstance(c, str) else float(c) for c in row]
                            for row in rows]}
        text = json.dumps(payload) + "\n"
    else:
        lines = [",".join(header)]
        lines += [",".join(_fmt(c) if not isinstance(c, str) else c for c in row)
                  for row in rows]
        text = "\n".join(lines) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _load_points(args) -> PointSet:
    if args.points:
        return PointSet.from_csv(args.points)
    if args.gen == "uniform":
        return uniform_points(args.n, args.dim, args.seed)
    if args.gen == "grid":
        return grid_points(args.n, args.dim)
    raise ValueError("no points source: give --points FILE or --gen uniform|grid with --n")


def _load_kernel(args):
    if args.coeffs:
        return custom_kernel([float(c) for c in args.coeffs.split(",")])
    if args.kernel:
        return builtin_kernel(args.kernel)
    raise ValueError("no kernel: give --kernel NAME or --coeffs f0,f1,...")


def _parse_floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _limit_result(args):
    ps = _load_points(args)
    kernel = _load_kernel(args)
    if args.vary:
        return flatlimit.varying_size_limit(ps, kernel, args.p, args.alpha), ps, kernel
    if args.m is None:
        raise ValueError("fixed-size limit needs --m (or use --vary with --p)")
    return flatlimit.fixed_size_limit(ps, kernel, args.m), ps, kernel


def cmd_limit(args) -> int:
    res, _, _ = _limit_result(args)
    bracket = res.metadata.get("bracket")
    print(f"regime: {res.label}" + (f" bracket: {bracket}" if bracket else ""),
          file=sys.stderr)
    payload = json.dumps(res.to_dict())
    if args.out is None or args.out == "-":
        sys.stdout.write(payload + "\n")
    else:
        with open(args.out, "w") as fh:
            fh.write(payload + "\n")
    return 0


def _ensemble_from_args(args):
    """NNP plus optional fixed size, from --ensemble JSON or a limit construction."""
    if args.ensemble:
        with open(args.ensemble) as fh:
            obj = json.load(fh)
        tol = getattr(args, "psd_tol", None)
        if "nnp" in obj:
            return ensembles.nnp_from_dict(obj["nnp"], psd_tol=tol), obj.get("fixed_size")
        return ensembles.nnp_from_dict(obj, psd_tol=tol), None
    res, _, _ = _limit_result(args)
    return res.process, res.fixed_size


def cmd_sample(args) -> int:
    e, fixed = _ensemble_from_args(args)
    if args.m is not None and args.ensemble:
        fixed = args.m
    rng = sampling.rng_from_seed(args.seed)
    rows = []
    for t in range(args.samples):
        X = (sampling.sample_fixed(e, fixed, rng) if fixed is not None
             else sampling.sample(e, rng))
        rows.append((str(t), str(ensembles.mask_of(X)), str(len(X)),
                     ";".join(str(i) for i in X)))
    _write_rows(args.out, ["draw", "subset-bitmask", "size", "indices"], rows,
                args.format)
    return 0


def cmd_size_dist(args) -> int:
    if args.ensemble:
        e, _ = _ensemble_from_args(args)
        vec = ensembles.size_distribution(e)
    elif args.eps:
        ps = _load_points(args)
        kernel = _load_kernel(args)
        eps = _parse_floats(args.eps)[0]
        dist = diagnostics.eps_ensemble_distribution(
            ps, kernel, eps, p=args.p, alpha=args.alpha)
        vec = dist.size_marginal()
    else:
        ps = _load_points(args)
        kernel = _load_kernel(args)
        vec = flatlimit.limit_size_distribution(ps, kernel, args.p, args.alpha)
    _write_rows(args.out, ["m", "probability"],
                [(str(m), v) for m, v in enumerate(vec)], args.format)
    return 0


def cmd_cond_density(args) -> int:
    kernel = _load_kernel(args)
    Y = np.array(_parse_floats(args.Y))
    lo, hi = _parse_floats(args.grid_range)
    grid = np.linspace(lo, hi, args.grid)
    header = ["x"]
    cols = [grid]
    for eps in _parse_floats(args.eps) if args.eps else []:
        header.append(f"density_eps_{eps:g}")
        cols.append(diagnostics.conditional_density(kernel, Y, grid, eps=eps))
    if args.limit:
        header.append("density_limit")
        cols.append(diagnostics.conditional_density(kernel, Y, grid, eps=None))
    _write_rows(args.out, header, list(zip(*cols)), args.format)
    return 0


def cmd_inclusion(args) -> int:
    ps = _load_points(args)
    kernel = _load_kernel(args)
    header = ["point-index"]
    cols = [np.arange(ps.n)]
    for eps in _parse_floats(args.eps) if args.eps else []:
        dist = diagnostics.eps_ensemble_distribution(ps, kernel, eps, m=args.m)
        header.append(f"inclusion_eps_{eps:g}")
        cols.append(dist.inclusion_vector())
    if args.limit:
        res = flatlimit.fixed_size_limit(ps, kernel, args.m)
        header.append("inclusion_limit")
        cols.append(diagnostics.inclusion_probabilities(res.process, args.m))
    _write_rows(args.out, header, list(zip(*cols)), args.format)
    return 0


def cmd_converge(args) -> int:
    ps = _load_points(args)
    kernel = _load_kernel(args)
    kwargs = {}
    if args.mode in ("full-law", "inclusion"):
        kwargs["m"] = args.m
    elif args.mode == "size-law":
        kwargs["p"], kwargs["alpha"] = args.p, args.alpha
    else:
        if not args.Y:
            raise ValueError("conditional mode needs --Y")
        kwargs["Y"] = np.array(_parse_floats(args.Y))
        lo, hi = _parse_floats(args.grid_range)
        kwargs["x_grid"] = np.linspace(lo, hi, args.grid)
    curve = diagnostics.convergence_curve(
        ps, kernel, _parse_floats(args.eps), args.mode, **kwargs)
    print(f"target: {curve.target}", file=sys.stderr)
    _write_rows(args.out, ["epsilon", "tv"],
                list(zip(curve.epsilons, curve.values)), args.format)
    return 0


def cmd_oracle(args) -> int:
    rng = np.random.default_rng(args.seed)
    n = args.n
    A = rng.standard_normal((n, n))
    L = A @ A.T / n
    V = rng.standard_normal((n, 2))
    e = ensembles.make_nnp(L, V)
    exact = diagnostics.brute_force_distribution(e)
    tv, size_tv = diagnostics.empirical_check(
        lambda r: sampling.sample(e, r), exact, args.samples, args.seed + 1)
    print(f"varying-size sampler: tv={tv:.5f} size-tv={size_tv:.5f}")
    m = e.p + max(1, e.q // 2)
    exact_m = diagnostics.brute_force_distribution(e, m)
    tv_m, _ = diagnostics.empirical_check(
        lambda r: sampling.sample_fixed(e, m, r), exact_m, args.samples, args.seed + 2)
    print(f"fixed-size sampler (m={m}): tv={tv_m:.5f}")
    if args.out:
        rows = sorted((str(msk), pr) for msk, pr in exact.probs.items())
        _write_rows(args.out, ["subset-bitmask", "probability"], rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="flatdpp", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, points=True):
        if points:
            p.add_argument("--points", help="CSV of points, one per row, no header")
            p.add_argument("--gen", choices=["uniform", "grid"], default="uniform")
            p.add_argument("--n", type=int, default=8, help="generated ground-set size")
        p.add_argument("--dim", type=int, default=1)
        p.add_argument("--kernel", help="builtin kernel name")
        p.add_argument("--coeffs", help="comma-separated Taylor coefficients")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("limit", help="construct a flat-limit process (JSON)")
    common(p)
    p.add_argument("--m", type=int)
    p.add_argument("--vary", action="store_true")
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--alpha", type=float, default=1.0)
    p.set_defaults(func=cmd_limit)

    p = sub.add_parser("sample", help="draw subsets from an ensemble")
    common(p)
    p.add_argument("--m", type=int)
    p.add_argument("--vary", action="store_true")
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--ensemble", help="JSON produced by the limit command")
    p.add_argument("--psd-tol", type=float, dest="psd_tol",
                   help="override the stored PSD tolerance when loading")
    p.add_argument("--samples", type=int, default=100)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("size-dist", help="size distribution of a process")
    common(p)
    p.add_argument("--vary", action="store_true")
    p.add_argument("--m", type=int)
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--eps", help="evaluate the pre-limit ensemble at this eps")
    p.add_argument("--ensemble", help="JSON produced by the limit command")
    p.add_argument("--psd-tol", type=float, dest="psd_tol",
                   help="override the stored PSD tolerance when loading")
    p.set_defaults(func=cmd_size_dist)

    p = sub.add_parser("cond-density", help="conditional density over a grid")
    common(p, points=False)
    p.add_argument("--Y", required=True, help="conditioning points, comma-separated")
    p.add_argument("--grid", type=int, default=400)
    p.add_argument("--grid-range", default="0,1")
    p.add_argument("--eps", help="comma-separated eps values")
    p.add_argument("--limit", action="store_true", help="append the limit column")
    p.set_defaults(func=cmd_cond_density)

    p = sub.add_parser("inclusion", help="inclusion probabilities at fixed size")
    common(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--eps", help="comma-separated eps values")
    p.add_argument("--limit", action="store_true")
    p.set_defaults(func=cmd_inclusion)

    p = sub.add_parser("converge", help="distance to the flat limit per eps")
    common(p)
    p.add_argument("--mode", choices=["full-law", "size-law", "conditional", "inclusion"],
                   default="full-law")
    p.add_argument("--m", type=int)
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--eps", required=True)
    p.add_argument("--Y")
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--grid-range", default="0,1")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("oracle", help="sampler vs enumeration TV on a random ensemble")
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--samples", type=int, default=200000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", help="also dump the enumerated law as (bitmask, probability)")
    p.set_defaults(func=cmd_oracle)

    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, FileNotFoundError) as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, IndexError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
