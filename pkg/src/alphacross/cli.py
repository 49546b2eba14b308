"""Command line interface.

Exit codes: 0 success, 2 bad input or failed precondition, 3 numerical or
degenerate failure. Results go to stdout, diagnostics to stderr. Every
successful run writes a manifest JSON that ``alphacross replay`` can rerun.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from alphacross import __version__, analytic, blotter, correlations, simulate

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3


class CommandError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True)


def _emit(obj) -> None:
    print(_dumps(obj))


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _sibling(path: Path, suffix: str) -> Path:
    return path.with_name(path.stem + suffix)


# -- cross -------------------------------------------------------------------


def cmd_cross(args) -> dict:
    streams = blotter.load_blotters(args.blotters, args.investment_per_stream)
    if len(streams) == 2:
        result = blotter.cross_pair(*streams).to_json_dict()
    else:
        net = blotter.cross_many(streams)
        result = {
            "streams": [b.stream_id for b in streams],
            "investment": blotter.to_dollars(net.investment),
            "gross": blotter.to_dollars(net.gross),
            "turnover": net.turnover,
            "net": net.to_dollar_dict(),
        }
    _emit(result)
    return result


# -- analytic ----------------------------------------------------------------


def _analytic_pair(a):
    return analytic.pair_turnover(a.w1, a.t1, a.w2, a.t2, a.rho)


def _analytic_turnover(a):
    return analytic.turnover_closed(a.tau, a.rho, a.n)


def _analytic_limit(a):
    return analytic.turnover_limit(a.tau, a.rho)


def _analytic_bounds(a):
    lower, upper = a.rho_lower, a.rho_upper
    if a.from_json:
        with open(a.from_json, encoding="utf-8") as fh:
            b = json.load(fh)
        lower = b["rho_lower"] if lower is None else lower
        upper = b["rho_upper"] if upper is None else upper
    if lower is None or upper is None:
        raise CommandError("bounds needs --rho-lower and --rho-upper (or --from-json)")
    return list(analytic.limit_interval(a.tau, lower, upper))


def _analytic_rho_k(a):
    return analytic.rho_after_doublings(a.rho, a.k)


def _analytic_netting(a):
    m = analytic.NettingModel(a.psi, a.n)
    zeta = analytic.netting_factor(m)
    return {
        "zeta": zeta,
        "fully_netted": zeta == analytic.FULLY_NETTED,
        "turnover_enhancement": None if zeta == analytic.FULLY_NETTED else 1.0 / zeta,
    }


def _analytic_min_rho(a):
    return analytic.min_uniform_correlation(a.n)


def cmd_analytic(args):
    result = args.analytic_fn(args)
    _emit(result)
    return result


# -- simulate ----------------------------------------------------------------


def cmd_simulate(args) -> dict:
    if not simulate.is_power_of_two(args.n):
        raise CommandError(f"--n must be a power of two, got {args.n}")
    config = simulate.EnsembleConfig(
        n_streams=args.n,
        n_stocks=args.stocks,
        base_correlation=args.c0,
        tau=args.tau,
        total_investment=args.investment,
        paths=args.paths,
        seed=args.seed,
        normalization=args.normalization,
    )
    curve, netting = simulate.run_tournament(config, workers=args.workers)
    out = Path(args.out)
    _write_text(out, curve.to_csv())
    summary = {"curve": str(out)}
    if args.netting:
        path = _sibling(out, ".netting.csv")
        _write_text(path, netting.to_csv())
        summary["netting"] = str(path)
    if args.fit:
        fit = simulate.fit_inverse_n(curve)
        path = _sibling(out, ".fit.json")
        _write_text(path, _dumps(fit.to_json_dict()) + "\n")
        summary["fit"] = fit.to_json_dict()
    _emit(summary)
    return summary


# -- corr --------------------------------------------------------------------


def _bounds_for(panel, args):
    cm = correlations.estimate_correlations(panel, args.min_overlap)
    return correlations.offdiag_quantile_bounds(cm, args.qlow, args.qhigh, args.bins)


def cmd_corr(args) -> dict:
    panel = correlations.load_returns(args.returns)
    out = Path(args.out)
    variants = {}
    if args.factors:
        factors = correlations.load_returns(args.factors, min_funds=1)
        adjusted = correlations.factor_residuals(panel, factors, args.rf)
        variants["adjusted"] = _bounds_for(adjusted, args)
        if args.both:
            variants["raw"] = _bounds_for(panel, args)
    else:
        if args.rf:
            raise CommandError("--rf needs --factors")
        variants["raw"] = _bounds_for(panel, args)

    primary = "adjusted" if "adjusted" in variants else "raw"
    result = {}
    for name, bounds in variants.items():
        hist_path = out if name == primary else _sibling(out, f".{name}.csv")
        bounds_path = _sibling(hist_path, ".bounds.json")
        _write_text(hist_path, bounds.histogram_csv())
        _write_text(bounds_path, _dumps(bounds.to_json_dict()) + "\n")
        result[name] = bounds.to_json_dict()
    if len(result) == 1:
        result = result[primary]
    _emit(result)
    return result


# -- savings -----------------------------------------------------------------


def cmd_savings(args):
    result = blotter.estimate_savings(args.crossed, args.spread_bps, args.days, args.streams)
    _emit(result)
    return result


# -- replay ------------------------------------------------------------------


def cmd_replay(args):
    with open(args.manifest_file, encoding="utf-8") as fh:
        manifest = json.load(fh)
    argv = manifest.get("argv")
    if not isinstance(argv, list):
        raise CommandError("manifest has no argv list")
    return _run(argv, write_manifest=False)


# -- parser ------------------------------------------------------------------


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="alphacross", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--version", action="version", version=f"alphacross {__version__}")
    common.add_argument("--manifest", help="where to write the run manifest JSON")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cross", parents=[common], help="cross trade blotters from a CSV")
    p.add_argument("--blotters", required=True)
    p.add_argument("--investment-per-stream", required=True)
    p.set_defaults(func=cmd_cross)

    p = sub.add_parser("analytic", help="closed-form turnover results")
    p.add_argument("--version", action="version", version=f"alphacross {__version__}")
    asub = p.add_subparsers(dest="analytic_command", required=True)

    q = asub.add_parser("pair", parents=[common], help="turnover of two crossed streams")
    q.add_argument("--w1", type=float, default=0.5)
    q.add_argument("--t1", type=float, required=True)
    q.add_argument("--w2", type=float, default=0.5)
    q.add_argument("--t2", type=float, required=True)
    q.add_argument("--rho", type=float, required=True)
    q.set_defaults(analytic_fn=_analytic_pair)

    q = asub.add_parser("turnover", parents=[common], help="turnover of N uniform streams")
    q.add_argument("--tau", type=float, required=True)
    q.add_argument("--rho", type=float, required=True)
    q.add_argument("--n", type=int, required=True)
    q.set_defaults(analytic_fn=_analytic_turnover)

    q = asub.add_parser("limit", parents=[common], help="large-N turnover floor")
    q.add_argument("--tau", type=float, required=True)
    q.add_argument("--rho", type=float, required=True)
    q.set_defaults(analytic_fn=_analytic_limit)

    q = asub.add_parser("bounds", parents=[common], help="interval on the turnover floor")
    q.add_argument("--tau", type=float, required=True)
    q.add_argument("--rho-lower", type=float)
    q.add_argument("--rho-upper", type=float)
    q.add_argument("--from-json", help="bounds JSON written by `alphacross corr`")
    q.set_defaults(analytic_fn=_analytic_bounds)

    q = asub.add_parser("rho-k", parents=[common], help="correlation of two groups of 2^k streams")
    q.add_argument("--rho", type=float, required=True)
    q.add_argument("--k", type=_nonneg_int, required=True)
    q.set_defaults(analytic_fn=_analytic_rho_k)

    q = asub.add_parser("netting", parents=[common], help="surviving investment fraction in one unit")
    q.add_argument("--psi", type=float, required=True)
    q.add_argument("--n", type=int, required=True)
    q.set_defaults(analytic_fn=_analytic_netting)

    q = asub.add_parser("min-rho", parents=[common], help="equicorrelation floor -1/(N-1)")
    q.add_argument("--n", type=int, required=True)
    q.set_defaults(analytic_fn=_analytic_min_rho)
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo crossing tournament")
    p.add_argument("--n", type=int, required=True, help="number of streams (power of two)")
    p.add_argument("--stocks", type=int, default=64)
    p.add_argument("--c0", type=float, default=0.25)
    p.add_argument("--tau", type=float, default=0.1)
    p.add_argument("--investment", type=float, default=1e9)
    p.add_argument("--paths", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--normalization", choices=simulate.NORMALIZATIONS, default="exact")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--fit", action="store_true")
    p.add_argument("--netting", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("corr", parents=[common], help="correlation quantile bounds from returns")
    p.add_argument("--returns", required=True)
    p.add_argument("--factors")
    p.add_argument("--rf")
    p.add_argument("--both", action="store_true", help="also emit raw correlations when --factors is set")
    p.add_argument("--qlow", type=float, default=0.05)
    p.add_argument("--qhigh", type=float, default=0.95)
    p.add_argument("--min-overlap", type=int, default=correlations.DEFAULT_MIN_OVERLAP)
    p.add_argument("--bins", type=int, default=correlations.DEFAULT_BINS)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_corr)

    p = sub.add_parser("savings", parents=[common], help="spread cost saved by crossing")
    p.add_argument("--crossed", type=float, required=True)
    p.add_argument("--spread-bps", type=float, required=True)
    p.add_argument("--days", type=float, required=True)
    p.add_argument("--streams", type=float, required=True)
    p.set_defaults(func=cmd_savings)

    p = sub.add_parser("replay", help="rerun a command from its manifest")
    p.add_argument("manifest_file")
    p.set_defaults(func=cmd_replay)
    return parser


def _manifest_path(args) -> Path:
    if args.manifest:
        return Path(args.manifest)
    if getattr(args, "out", None):
        return _sibling(Path(args.out), ".manifest.json")
    name = args.command
    if args.command == "analytic":
        name += "-" + args.analytic_command
    return Path(f"alphacross-{name}.manifest.json")


def _write_manifest(args, argv: list[str]) -> None:
    params = {
        k: v
        for k, v in sorted(vars(args).items())
        if k not in ("func", "analytic_fn", "manifest") and not callable(v)
    }
    manifest = {
        "command": args.command if args.command != "analytic" else f"analytic {args.analytic_command}",
        "parameters": params,
        "argv": argv,
        "seed": getattr(args, "seed", None),
        "artifact_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    _write_text(_manifest_path(args), json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _run(argv: list[str], write_manifest: bool = True):
    args = build_parser().parse_args(argv)
    result = args.func(args)
    if write_manifest and args.command != "replay":
        _write_manifest(args, argv)
    return result


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        _run(argv)
    except SystemExit as exc:
        # argparse: 0 for --help/--version, 2 for usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    except CommandError as exc:
        print(f"alphacross: error: {exc}", file=sys.stderr)
        return exc.code
    except correlations.NoValidPairs as exc:
        print(f"alphacross: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"alphacross: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ArithmeticError, FloatingPointError) as exc:
        print(f"alphacross: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
