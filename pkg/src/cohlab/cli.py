"""Command-line front end.

Exit codes: 0 success, 2 usage or input-validation errors, 1 numerical
failures (rank-deficient tangents, factorization breakdowns). Stochastic
subcommands require an explicit --seed so every run is reproducible from
its argument vector alone. A config file of key=value lines may supply
defaults; explicit flags override it.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from ._version import __version__
from .experiment import (
    SweepConfig,
    coupon_reference,
    laman_brute_oracle,
    rudelson_probe,
    run_sweep,
    sweep_metadata,
    theoretical_rate,
    write_csv,
)
from .flats import coherence_of_flat, leverage_scores, max_incoherent_flat, write_flat
from .identify import DEFAULT_TOL, RankDeficientTangent, identifiable_mask
from .sampling import draw_mask, parse_mask, philox
from .varieties import (
    Linear,
    coherence_formula,
    estimate_coherence,
    parse_model,
    sample_generic_point,
    tangent_limit_probe,
)

log = logging.getLogger("cohlab")


def _add_common(sub):
    sub.add_argument("--config", metavar="FILE", help="key=value defaults; flags override")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cohlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("coherence", help="coherence of a model, closed form or sampled")
    p.add_argument("--model", required=True)
    p.add_argument("--formula", action="store_true", help="use the closed form or envelope")
    p.add_argument("--samples", type=int, help="Monte Carlo infimum over this many points")
    p.add_argument("--seed", type=int)
    p.add_argument("--leverage", action="store_true", help="include leverage scores (linear models)")
    _add_common(p)

    p = subs.add_parser(
        "identify",
        help="identifiability verdict at a generic point",
        description=(
            "Identifiability of a generic point from the observed coordinates. "
            "Mask indices address ambient coordinates: matrix entries are "
            "row-major (i,j) -> i*n + j; pair models use lexicographic i < j "
            "order; symmetric matrices use the upper triangle including the "
            "diagonal, i <= j, in the same lexicographic order."
        ),
    )
    p.add_argument("--model", required=True)
    p.add_argument("--mask", help="explicit index list like 0,3,7 (see index order above)")
    p.add_argument("--rho", type=float, help="draw a Bernoulli mask at this rate")
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    _add_common(p)

    p = subs.add_parser("sweep", help="success rate over a sampling-rate grid")
    p.add_argument("--model", required=True)
    p.add_argument("--rho-grid", required=True, help="a:b:step or comma list")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--rate-constant", type=float, default=1.0)
    p.add_argument("--log-base", choices=["e", "2", "10"], default="e")
    p.add_argument("--coupon-k", type=int, help="record the exact block-flat curve (linear models)")
    p.add_argument("--out", required=True, help="output CSV path")
    _add_common(p)

    p = subs.add_parser("frame", help="write a minimally coherent flat to a file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out", required=True)
    _add_common(p)

    p = subs.add_parser("tangent-limit", help="spherical-lift tangent convergence probe")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--h-grid", required=True, help="comma list of positive h values")
    p.add_argument("--seed", type=int)
    _add_common(p)

    p = subs.add_parser("rudelson", help="mean contraction norm against the bound shape")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--rho-grid", required=True, help="a:b:step or comma list")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int)
    _add_common(p)

    p = subs.add_parser("rigidity-oracle", help="plane generic rigidity of a small graph")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--edges", required=True, help="edge list like 0-1,1-2,2-0")
    _add_common(p)

    return parser


def parse_grid(text: str) -> tuple[float, ...]:
    """Parse 'a:b:step' (inclusive endpoints) or a comma list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must be a:b:step, got {text!r}")
        a, b, step = (float(x) for x in parts)
        if step <= 0 or b < a:
            raise ValueError("need step > 0 and b >= a")
        count = int(round((b - a) / step))
        grid = [a + i * step for i in range(count + 1)]
        # keep endpoints clean against accumulated rounding
        grid = [round(g, 12) for g in grid if g <= b + 1e-12]
        return tuple(grid)
    return tuple(float(x) for x in text.split(","))


def parse_edges(text: str) -> list[tuple[int, int]]:
    edges = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        left, sep, right = tok.partition("-")
        if not sep:
            raise ValueError(f"bad edge {tok!r}, expected i-j")
        edges.append((int(left), int(right)))
    return edges


def read_config_file(path) -> dict:
    pairs = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            pairs[key.strip()] = value.strip()
    return pairs


def _merge_config(argv: list[str]) -> list[str]:
    """Inject config-file pairs as flags ahead of explicit ones."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise ValueError("--config needs a file argument")
    pairs = read_config_file(argv[i + 1])
    injected: list[str] = []
    for key, value in pairs.items():
        flag = "--" + key.replace("_", "-")
        if value.lower() in ("true", "false"):
            if value.lower() == "true":
                injected.append(flag)
        else:
            injected.extend([flag, value])
    rest = argv[1:i] + argv[i + 2 :]
    return [argv[0], *injected, *rest]


def _require_seed(args, parser):
    if getattr(args, "seed", None) is None:
        parser.error(f"{args.command}: --seed is required, stochastic runs have no implicit seed")


def _json_out(payload: dict) -> None:
    print(json.dumps(payload))


def cmd_coherence(args, parser) -> int:
    model = parse_model(args.model)
    if args.leverage and not isinstance(model, Linear):
        parser.error("--leverage is only defined for linear models")
    if args.formula:
        fv = coherence_formula(model)
        out = {"value": fv.value, "exact": fv.exact}
    elif args.samples is not None:
        if args.samples < 1:
            parser.error("--samples must be >= 1")
        _require_seed(args, parser)
        est = estimate_coherence(model, args.samples, philox(args.seed))
        out = {"value": est.value, "exact": False, "samples": est.samples}
    elif isinstance(model, Linear):
        out = {"value": coherence_of_flat(model.flat), "exact": True}
    else:
        parser.error("nonlinear models need --formula or --samples")
    if args.leverage:
        out["leverage"] = [float(x) for x in leverage_scores(model.flat)]
    _json_out(out)
    return 0


def cmd_identify(args, parser) -> int:
    model = parse_model(args.model)
    if (args.mask is None) == (args.rho is None):
        parser.error("give exactly one of --mask or --rho")
    _require_seed(args, parser)
    point = sample_generic_point(model, philox(args.seed, 0))
    if args.mask is not None:
        mask = parse_mask(args.mask, model.ambient_dim)
    else:
        mask = draw_mask(model.ambient_dim, args.rho, philox(args.seed, 1))
    verdict = identifiable_mask(model, point, mask, args.tol)
    _json_out(verdict.to_dict())
    return 0


def cmd_sweep(args, parser) -> int:
    _require_seed(args, parser)
    config = SweepConfig(
        model=args.model,
        rho_grid=parse_grid(args.rho_grid),
        trials_per_rho=args.trials,
        base_seed=args.seed,
        tol=args.tol,
        lam=args.lam,
    )
    model = parse_model(config.model)
    extra = {"dim_over_ambient": repr(model.dimension() / model.ambient_dim)}
    try:
        fv = coherence_formula(model)
    except ValueError:
        fv = None
    if fv is not None:
        extra["coherence"] = repr(fv.value)
        extra["coherence_exact"] = str(fv.exact).lower()
        extra["theoretical_rate"] = repr(
            theoretical_rate(model, args.lam, args.rate_constant, args.log_base)
        )
    if args.coupon_k is not None:
        if not isinstance(model, Linear):
            parser.error("--coupon-k applies to linear models only")
        n = model.ambient_dim
        if n % args.coupon_k != 0:
            parser.error("--coupon-k must divide the ambient dimension")
        extra["coupon_rho"] = ",".join(repr(r) for r in config.rho_grid)
        extra["coupon_value"] = ",".join(
            repr(coupon_reference(n, args.coupon_k, r)) for r in config.rho_grid
        )
    records = run_sweep(
        config,
        progress=lambda rec: log.info(
            "rho=%.4f successes=%d/%d", rec.rho, rec.successes, rec.trials
        ),
    )
    write_csv(records, args.out, sweep_metadata(config, extra))
    log.info("wrote %s", args.out)
    return 0


def cmd_frame(args, parser) -> int:
    write_flat(max_incoherent_flat(args.n, args.k), args.out)
    log.info("wrote %s", args.out)
    return 0


def cmd_tangent_limit(args, parser) -> int:
    _require_seed(args, parser)
    h_values = [float(x) for x in args.h_grid.split(",")]
    config = philox(args.seed).standard_normal((args.n, args.d))
    distances = tangent_limit_probe(config, h_values)
    for h, dist in zip(h_values, distances):
        print(f"{h!r} {float(dist)!r}")
    return 0


def cmd_rudelson(args, parser) -> int:
    _require_seed(args, parser)
    flat = max_incoherent_flat(args.n, args.k)
    rows = rudelson_probe(flat, parse_grid(args.rho_grid), args.trials, philox(args.seed))
    print("rho mean_norm max_leverage bound_shape")
    for row in rows:
        print(f"{row.rho!r} {row.mean_norm!r} {row.max_leverage!r} {row.bound_shape!r}")
    return 0


def cmd_rigidity_oracle(args, parser) -> int:
    rigid = laman_brute_oracle(args.n, parse_edges(args.edges))
    print("true" if rigid else "false")
    return 0


_HANDLERS = {
    "coherence": cmd_coherence,
    "identify": cmd_identify,
    "sweep": cmd_sweep,
    "frame": cmd_frame,
    "tangent-limit": cmd_tangent_limit,
    "rudelson": cmd_rudelson,
    "rigidity-oracle": cmd_rigidity_oracle,
}


def dispatch(argv: list[str]) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(message)s")
    parser = build_parser()
    try:
        argv = _merge_config(list(argv))
    except (OSError, ValueError) as exc:
        print(f"cohlab: {exc}", file=sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    shown = {k: v for k, v in vars(args).items() if v is not None and k != "config"}
    log.info("resolved config: %s", shown)
    try:
        return _HANDLERS[args.command](args, parser)
    except SystemExit as exc:  # parser.error inside a handler
        return int(exc.code or 0)
    except (ValueError, OSError) as exc:
        print(f"cohlab: {exc}", file=sys.stderr)
        return 2
    except (RankDeficientTangent, np.linalg.LinAlgError) as exc:
        print(f"cohlab: numerical failure: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    raise SystemExit(dispatch(sys.argv[1:]))
