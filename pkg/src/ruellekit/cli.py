"""Batch front-end: parse configs, dispatch computations, emit reports.

Every subcommand writes a JSON report (schema "ruelle-kit/1") to --out or
stdout, with numbers rendered at 17 significant digits so identical
config + seed reproduces identical bytes (modulo the generated_at
field).  Exit status: 0 on success, 2 when a computed residual lands
beyond its tolerance, 1 on usage/config errors.

Config files are JSON objects; recognized keys:

    potential   {"kind": "constant"|"table"|"ising_lr"|"hofbauer",
                 "params": {...}}
    boundary    point literal such as "01|1" (prefix "01", cycle "1")
    boundaries  list of point literals
    cylinders   list of words such as "010"
    test_word   word whose indicator serves as the test function

Randomness enters only through test-point/boundary sampling, from a
single numpy Generator seeded by --seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from datetime import datetime, timezone

import numpy as np

from . import dlr, interactions, ising, potentials, transfer
from .shift import CylinderFunction, Point, TableSizeError, parse_word

SCHEMA = "ruelle-kit/1"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        raise UsageError(message)


# ---------------------------------------------------------------------------
# Report serialization
# ---------------------------------------------------------------------------

def _format_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def _tokenize(obj, floats: list):
    """Replace floats by placeholder strings so json.dumps leaves them alone."""
    if isinstance(obj, float):
        floats.append(obj)
        return f"__rk_float_{len(floats) - 1}__"
    if isinstance(obj, dict):
        return {k: _tokenize(v, floats) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_tokenize(v, floats) for v in obj]
    if isinstance(obj, (np.floating,)):
        return _tokenize(float(obj), floats)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def dump_report(report: dict) -> str:
    floats: list = []
    text = json.dumps(_tokenize(report, floats), sort_keys=True, indent=2)
    for i, x in enumerate(floats):
        text = text.replace(f'"__rk_float_{i}__"', _format_float(x))
    return text + "\n"


def _write_report(report: dict, out_path: str | None) -> None:
    text = dump_report(report)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_csv(rows, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "cylinder", "boundary_id", "K_n", "nu_ref", "deviation"])
        for row in rows:
            writer.writerow(
                [
                    row.n,
                    row.cylinder,
                    row.boundary_id,
                    _format_float(row.K_n),
                    _format_float(row.nu_ref),
                    _format_float(row.deviation),
                ]
            )


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------

def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"invalid config (not valid JSON): {exc}")
    if not isinstance(cfg, dict):
        raise UsageError("invalid config: top level must be a JSON object")
    return cfg


def _sequence_from(desc: dict):
    form = desc.get("form")
    base = float(desc.get("base", 0.0))
    coef = float(desc.get("coef", 1.0))
    if form == "power":
        exponent = float(desc["exponent"])
        return lambda k: base + coef * k ** (-exponent)
    if form == "geometric":
        ratio = float(desc["ratio"])
        return lambda k: base + coef * ratio**k
    raise UsageError(f"invalid config: unknown sequence form {form!r}")


def _potential_from(cfg: dict, args) -> potentials.Potential:
    desc = cfg.get("potential")
    if desc is None:
        d = args.d or 2
        return potentials.Potential.constant(d, 0.0)
    kind = desc.get("kind")
    params = desc.get("params", {})
    try:
        if kind == "constant":
            return potentials.Potential.constant(
                int(params.get("d", args.d or 2)), float(params.get("value", 0.0))
            )
        if kind == "table":
            return potentials.Potential.from_table(
                int(params["d"]),
                int(params["depth"]),
                [float(v) for v in params["values"]],
                label=params.get("label", "config-table"),
            )
        if kind == "ising_lr":
            ip = ising.IsingParams(
                alpha=float(params.get("alpha", args.alpha or 3.0)),
                beta=float(params.get("beta", args.beta or 1.0)),
                cutoff=int(params.get("cutoff", args.cutoff or 200)),
            )
            return ising.g_potential(ip)
        if kind == "hofbauer":
            decay = params.get("var_decay")
            return potentials.make_hofbauer_walters(
                _sequence_from(params["a_seq"]),
                _sequence_from(params["c_seq"]),
                float(params["a"]),
                float(params["b"]),
                float(params["c"]),
                var_decay=_sequence_from(decay) if decay else None,
            )
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"invalid config: bad potential descriptor ({exc})")
    raise UsageError(f"invalid config: unknown potential kind {kind!r}")


def _point_from_literal(text: str) -> Point:
    try:
        return Point.from_literal(text)
    except ValueError as exc:
        raise UsageError(f"invalid config: bad point literal {text!r} ({exc})")


# ---------------------------------------------------------------------------
# Sampling helpers (the only consumers of the RNG)
# ---------------------------------------------------------------------------

def _random_point(rng: np.random.Generator, d: int) -> Point:
    prefix = tuple(int(s) for s in rng.integers(0, d, size=int(rng.integers(0, 4))))
    cycle = tuple(int(s) for s in rng.integers(0, d, size=int(rng.integers(1, 4))))
    return Point(prefix, cycle)


def _random_table_potential(
    rng: np.random.Generator, d: int, depth: int, scale: float = 1.0
) -> potentials.Potential:
    values = rng.uniform(-scale, scale, size=d**depth)
    return potentials.Potential.from_table(d, depth, values, label="sampled")


def _random_word(rng: np.random.Generator, d: int, max_len: int) -> tuple[int, ...]:
    return tuple(int(s) for s in rng.integers(0, d, size=int(rng.integers(1, max_len + 1))))


# ---------------------------------------------------------------------------
# Subcommand handlers: each returns (results, ok, csv_rows)
# ---------------------------------------------------------------------------

def _rpf_data(cfg, args):
    f = _potential_from(cfg, args)
    depth = args.depth or max(f.depth() or 1, 1)
    tol = args.tol if args.tol is not None else transfer.DEFAULT_TOL
    max_iter = args.max_iter or transfer.DEFAULT_MAX_ITER
    rpf = transfer.power_iterate(f, depth, tol=tol, max_iter=max_iter)
    return f, rpf, tol


def _cmd_rpf(cfg, args):
    _, rpf, _ = _rpf_data(cfg, args)
    results = {
        "lambda": rpf.lam,
        "log_lambda": rpf.log_lam,
        "psi": list(rpf.psi.values),
        "nu": list(rpf.nu.weights),
        "residuals": {"function": rpf.residual_fn, "measure": rpf.residual_meas},
        "iterations": rpf.iterations,
        "depth": rpf.depth,
        "d": rpf.d,
    }
    return results, rpf.converged, None


def _cmd_pressure(cfg, args):
    _, rpf, _ = _rpf_data(cfg, args)
    results = {
        "pressure": rpf.log_lam,
        "lambda": rpf.lam,
        "residuals": {"function": rpf.residual_fn, "measure": rpf.residual_meas},
        "iterations": rpf.iterations,
    }
    return results, rpf.converged, None


def _cmd_normalize(cfg, args):
    f, rpf, tol = _rpf_data(cfg, args)
    fbar = transfer.normalize(f, rpf)
    check_depth = args.n or fbar.depth()
    check = transfer.check_normalized(fbar, check_depth)
    results = {
        "depth": fbar.depth(),
        "values": list(fbar.table.values),
        "check_depth": check_depth,
        "check_sup_norm": check,
        "log_lambda": rpf.log_lam,
    }
    return results, check < tol, None


def _cmd_kernel(cfg, args):
    f = _potential_from(cfg, args)
    beta = args.beta or 1.0
    n = args.n or 2
    y = _point_from_literal(cfg.get("boundary", "|0"))
    word = parse_word(cfg.get("test_word", "0"))
    g = CylinderFunction.indicator(f.d, word)
    z = dlr.partition(f, beta, n, y)
    value = dlr.kernel(f, beta, n, y, g)
    results = {
        "partition": z,
        "kernel_value": value,
        "test_word": cfg.get("test_word", "0"),
        "boundary": y.literal,
        "n": n,
        "beta": beta,
    }
    return results, True, None


def _default_cylinders(d: int, max_depth: int = 2):
    words = []
    for q in range(1, max_depth + 1):
        for i in range(d**q):
            word = tuple((i // d ** (q - 1 - k)) % d for k in range(q))
            words.append(word)
    return words


def _cmd_tl(cfg, args):
    f = _potential_from(cfg, args)
    beta = args.beta or 1.0
    n_max = args.n or 12
    rng = np.random.default_rng(args.seed)
    if "cylinders" in cfg:
        cylinders = [parse_word(w) for w in cfg["cylinders"]]
    else:
        cylinders = _default_cylinders(f.d)
    if "boundaries" in cfg:
        boundaries = [_point_from_literal(t) for t in cfg["boundaries"]]
    else:
        boundaries = [_random_point(rng, f.d) for _ in range(4)]
    rows, worst = dlr.tl_sequence(f, beta, cylinders, boundaries, n_max)
    results = {
        "worst": worst,
        "n_max": n_max,
        "rows": len(rows),
        "boundaries": [y.literal for y in boundaries],
    }
    return results, True, rows


def _cmd_dlr_check(cfg, args):
    d = args.d or 2
    depth = args.depth or 2
    n = args.n or 2
    r = args.r if args.r is not None else 2
    tol = args.tol if args.tol is not None else 1e-12
    beta = args.beta or 1.0
    rng = np.random.default_rng(args.seed)
    residuals = []
    for _ in range(10):
        f = _random_table_potential(rng, d, depth)
        q = int(rng.integers(1, n + r + 1))
        g = CylinderFunction(d, q, rng.uniform(-1.0, 1.0, size=d**q))
        z = _random_point(rng, d)
        residuals.append(dlr.finite_volume_dlr_check(f, beta, n, r, z, g))
    worst = max(residuals)
    results = {
        "residuals": residuals,
        "max_residual": worst,
        "tol": tol,
        "n": n,
        "r": r,
        "instances": len(residuals),
    }
    return results, worst < tol, None


def _cmd_interaction(cfg, args):
    if cfg.get("potential") is not None:
        f = _potential_from(cfg, args)
        depth = f.depth()
        if depth is None:
            raise UsageError("interaction subcommand needs a table potential or --alpha")
        y = _point_from_literal(cfg.get("boundary", "|0"))
        phi = interactions.from_potential(f, y, k_max=2 * depth, n_max=2 * depth)
        norm = interactions.interaction_norm(phi)
        results = {
            "kind": "from_potential",
            "terms": len(phi.terms),
            "norm": {"value": norm.value, "remainder": norm.remainder, "upper": norm.upper},
        }
        return results, True, None
    if args.alpha is not None:
        phi = interactions.ising_lr(args.alpha)
        norm = interactions.interaction_norm(phi)
        zv, ze = ising.zeta(args.alpha)
        results = {
            "kind": "ising_lr",
            "alpha": args.alpha,
            "norm": {"value": norm.value, "remainder": norm.remainder, "upper": norm.upper},
            "two_zeta": 2.0 * zv,
        }
        return results, norm.upper <= 2.0 * (zv + ze) + 1e-12, None
    phi = interactions.ising_nn()
    norm = interactions.interaction_norm(phi)
    results = {
        "kind": "ising_nn",
        "norm": {"value": norm.value, "remainder": norm.remainder, "upper": norm.upper},
    }
    return results, norm.value == 1.0, None


def _cmd_walters(cfg, args):
    f = _potential_from(cfg, args)
    n_sup = args.n or 16
    estimates = [
        {"p": p, "value": potentials.walters_estimate(f, p, n_sup)} for p in (1, 2, 4, 8)
    ]
    jop = potentials.jop_series(f, eps=0.5, n_terms=max(n_sup, 8))
    results = {
        "estimates": estimates,
        "jop": {
            "partial_sum": jop.partial_sum,
            "last_term": jop.last_term,
            "growth_exponent": jop.growth_exponent,
            "diverging": jop.diverging,
            "n_terms": jop.n_terms,
        },
    }
    return results, True, None


def _cmd_uniqueness(cfg, args):
    f = _potential_from(cfg, args)
    beta = args.beta or 1.0
    N = args.n or 8
    rng = np.random.default_rng(args.seed)
    value, bound = dlr.D_estimate(f, N)
    value2, _ = dlr.D_estimate(f, 2 * N)
    stabilized = abs(value - value2) < 1e-12
    margins = []
    holds_all = True
    for _ in range(20):
        n = int(rng.integers(1, 9))
        C = _random_word(rng, f.d, min(n, 4))
        tails = dlr.default_tails(f.d)
        y = tails[int(rng.integers(0, len(tails)))]
        z = tails[int(rng.integers(0, len(tails)))]
        holds, margin = dlr.sandwich_check(f, beta, n, C, y, z, value)
        margins.append(margin)
        holds_all = holds_all and holds
    results = {
        "D": value,
        "metadata_bound": bound,
        "stabilized": stabilized,
        "margins": margins,
        "min_margin": min(margins),
        "holds_all": holds_all,
    }
    return results, holds_all and stabilized, None


def _cmd_ising(cfg, args):
    alpha = args.alpha or 3.0
    params = ising.IsingParams(
        alpha=alpha, beta=args.beta or 1.0, cutoff=args.cutoff or 200
    )
    terms = args.n or 100
    rng = np.random.default_rng(args.seed)
    zv, ze = ising.zeta(alpha, params.cutoff)
    gv, ge = ising.g_one_sided(params, Point.constant(1))
    results = {
        "alpha": alpha,
        "cutoff": params.cutoff,
        "zeta": {"value": zv, "bound": ze},
        "g_all_plus": {"value": gv, "bound": ge},
    }
    west = ising.ising_walters_estimate(params, 8)
    results["walters"] = {
        "p": 8,
        "value": west.value,
        "bound": west.error_bound,
        "decaying": west.decaying,
    }
    _, _, ratio = ising.hoelder_witness(params, 0.5, 10.0)
    results["witness_ratio"] = ratio
    ok = True
    if alpha > 2:
        checks = []
        for _ in range(5):
            spots = rng.integers(1, 13, size=3)
            signs = rng.integers(0, 2, size=3)
            flips = {int(p) if s else -int(p) for p, s in zip(spots, signs)}
            right = tuple(0 if i in flips else 1 for i in range(13))
            left = tuple(0 if -i in flips else 1 for i in range(1, 13))
            x = ising.TwoSidedPoint(Point(left, (1,)), Point(right, (1,)))
            res, bnd = ising.coboundary_check(params, x, terms)
            checks.append({"point": x.literal, "residual": res, "bound": bnd})
            ok = ok and res <= bnd
        results["coboundary"] = checks
    return results, ok, None


def _cmd_change_of_measure(cfg, args):
    depth = args.depth or 3
    tol = args.tol if args.tol is not None else 1e-9
    if cfg.get("potential") is not None:
        f = _potential_from(cfg, args)
        deviations = [dlr.change_of_measure_check(f, depth)]
    else:
        d = args.d or 2
        rng = np.random.default_rng(args.seed)
        deviations = [
            dlr.change_of_measure_check(_random_table_potential(rng, d, 2), depth)
            for _ in range(10)
        ]
    worst = max(deviations)
    results = {"deviations": deviations, "max_deviation": worst, "tol": tol, "depth": depth}
    return results, worst < tol, None


_COMMANDS = {
    "rpf": _cmd_rpf,
    "pressure": _cmd_pressure,
    "normalize": _cmd_normalize,
    "kernel": _cmd_kernel,
    "tl": _cmd_tl,
    "dlr-check": _cmd_dlr_check,
    "interaction": _cmd_interaction,
    "walters": _cmd_walters,
    "uniqueness": _cmd_uniqueness,
    "ising": _cmd_ising,
    "change-of-measure": _cmd_change_of_measure,
}


def _build_parser() -> _Parser:
    parser = _Parser(prog="ruellekit", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(_COMMANDS), metavar="subcommand")
    parser.add_argument("--config", metavar="PATH")
    parser.add_argument("--out", metavar="PATH")
    parser.add_argument("--d", type=int)
    parser.add_argument("--depth", type=int)
    parser.add_argument("--n", type=int)
    parser.add_argument("--r", type=int)
    parser.add_argument("--beta", type=float)
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--cutoff", type=int)
    parser.add_argument("--tol", type=float)
    parser.add_argument("--max-iter", type=int, dest="max_iter")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--csv", metavar="PATH")
    return parser


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _load_config(args.config)
        results, ok, rows = _COMMANDS[args.command](cfg, args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except TableSizeError as exc:
        print(f"size guard: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 1
    report = {
        "schema": SCHEMA,
        "command": args.command,
        "params": {
            "d": args.d,
            "depth": args.depth,
            "n": args.n,
            "r": args.r,
            "beta": args.beta,
            "alpha": args.alpha,
            "cutoff": args.cutoff,
            "tol": args.tol,
            "max_iter": args.max_iter,
            "seed": args.seed,
            "config": args.config,
        },
        "results": results,
        "status": "ok" if ok else "check-failed",
        "generated_at": datetime.now(timezone.utc).isoformat(),
    }
    _write_report(report, args.out)
    if args.csv and rows is not None:
        _write_csv(rows, args.csv)
    return 0 if ok else 2


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
