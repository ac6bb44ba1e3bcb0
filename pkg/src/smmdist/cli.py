"""Command-line entry point: ``smmdist <command> [options]``.

Exit codes: 0 success, 1 invalid model or input data, 2 usage error,
3 fixed-point iteration did not converge.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

from . import _accel
from .bisim import bisimilarity
from .dta import Dta
from .estimator import delta_lower_bound_details, estimate_sat
from .fixpoint import theta, theta_exact_lp
from .hardness import (UndirectedGraph, build_MG, build_Mi, build_MV, max_clique_via_distance)
from .model import ResidenceDist, SmmModel, format_number, validate
from .mtl import parse as parse_mtl
from .oracle import SharedResidenceError, exact_delta
from .residence import tv, tv_matrix

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_NONCONVERGED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class InvalidInput(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    tolerance: float = 1e-9
    max_iter: int = 100_000
    samples: int = 100_000
    confidence: float = 0.99
    seed: int = 0
    depth_cap: int = 64

    def __post_init__(self):
        for name in ("tolerance", "max_iter", "samples", "depth_cap"):
            if not getattr(self, name) > 0:
                raise UsageError(f"{name} must be positive")
        if self.seed < 0:
            raise UsageError("seed must be non-negative")
        if not 0 < self.confidence < 1:
            raise UsageError("confidence must lie in (0, 1)")


def default_seed() -> int:
    env = os.environ.get("SMMDIST_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"SMMDIST_SEED must be an integer, got {env!r}") from None


# ---------------------------------------------------------------------------
# input helpers

def _load_model(path) -> SmmModel:
    try:
        model = SmmModel.load(path)
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise InvalidInput(f"cannot read model {path}: {exc}") from None
    problems = validate(model)
    if problems:
        raise InvalidInput("invalid model:\n" + "\n".join(f"  {p}" for p in problems))
    return model


def _load_graph(path) -> UndirectedGraph:
    try:
        return UndirectedGraph.load(path)
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise InvalidInput(f"cannot read graph {path}: {exc}") from None


def _load_spec(path):
    p = Path(path)
    try:
        text = p.read_text()
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}") from None
    try:
        if p.suffix == ".dta" or text.lstrip().startswith("{"):
            aut = Dta.from_json(json.loads(text))
            if not aut.is_deterministic():
                raise InvalidInput(f"automaton {path} is not deterministic")
            return aut
        return parse_mtl(text)
    except (ValueError, KeyError, TypeError) as exc:
        raise InvalidInput(f"cannot read specification {path}: {exc}") from None


def _require_state(model, s):
    if s not in model:
        raise InvalidInput(f"unknown state {s!r}")


# ---------------------------------------------------------------------------
# commands; each returns (json-able payload, text lines, exit code)

def cmd_validate(args, cfg):
    try:
        model = SmmModel.load(args.model)
    except FileNotFoundError:
        raise UsageError(f"no such file: {args.model}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise InvalidInput(f"cannot read model {args.model}: {exc}") from None
    problems = [str(p) for p in validate(model)]
    lines = problems or [f"ok: {len(model.states)} states"]
    return {"valid": not problems, "violations": problems}, lines, EXIT_INVALID if problems else EXIT_OK


def _tv_row(s, t, r):
    return {"s1": s, "s2": t, "value": format_number(r.value), "exact": r.exact,
            "method": r.method.value}


def _load_dist(text):
    p = Path(text)
    try:
        raw = p.read_text() if p.suffix == ".json" or p.is_file() else text
    except FileNotFoundError:
        raise UsageError(f"no such file: {text}") from None
    try:
        dist = ResidenceDist.from_json(json.loads(raw))
    except (ValueError, KeyError, TypeError) as exc:
        raise InvalidInput(f"cannot read residence distribution {text!r}: {exc}") from None
    problems = dist.problems()
    if problems:
        raise InvalidInput("; ".join(problems))
    return dist


def cmd_tv(args, cfg):
    if args.dist_a or args.dist_b:
        if not (args.dist_a and args.dist_b) or args.model:
            raise UsageError("give --dist-a and --dist-b together, or --model")
        rows = [_tv_row("a", "b", tv(_load_dist(args.dist_a), _load_dist(args.dist_b)))]
    elif args.model:
        model = _load_model(args.model)
        m = tv_matrix(model)
        live = [s for s in model.states if s not in model.absorbing]
        rows = [_tv_row(s, t, m[s, t]) for i, s in enumerate(live) for t in live[i + 1:]]
    else:
        raise UsageError("give --dist-a and --dist-b, or --model")
    lines = [f"{r['s1']} {r['s2']} {r['value']} method={r['method']} exact={r['exact']}"
             for r in rows]
    return {"pairs": rows}, lines, EXIT_OK


def cmd_bisim(args, cfg):
    model = _load_model(args.model)
    part = bisimilarity(model)
    blocks = [sorted(b) for b in part.blocks]
    return {"blocks": blocks}, [" ".join(b) for b in blocks], EXIT_OK


def cmd_theta(args, cfg):
    model = _load_model(args.model)
    report = theta(model, cfg.tolerance, cfg.max_iter, threads=args.threads)
    payload = report.to_json()
    dist = report.distance
    if args.exact_lp:
        try:
            lp = theta_exact_lp(model)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        payload["exact_lp"] = lp.to_json()
        payload["lp_max_abs_diff"] = format_number(float(abs(lp.values - dist.values).max(initial=0.0)))
    if args.emit_csv:
        Path(args.emit_csv).write_text(dist.to_csv())
    lines = [dist.to_csv().rstrip("\n"),
             f"iterations={report.iterations} residual={format_number(report.residual)} "
             f"converged={report.converged} backend={report.backend}"]
    if args.exact_lp:
        lines.append(f"exact LP max |diff| = {payload['lp_max_abs_diff']}")
    return payload, lines, EXIT_OK if report.converged else EXIT_NONCONVERGED


def cmd_estimate(args, cfg):
    model = _load_model(args.model)
    _require_state(model, args.start)
    spec = _load_spec(args.spec)
    try:
        est = estimate_sat(model, args.start, spec, cfg.samples, args.horizon, cfg.seed,
                           cfg.confidence, args.threads)
    except ValueError as exc:
        raise InvalidInput(str(exc)) from None
    payload = {"seed": cfg.seed, "estimate": est.to_json()}
    lines = [f"seed={cfg.seed}",
             f"point={format_number(est.point)} lower={format_number(est.lower)} "
             f"upper={format_number(est.upper)} unknown={format_number(est.unknown_fraction)} "
             f"n={est.samples} confidence={format_number(est.confidence)}"]
    return payload, lines, EXIT_OK


def cmd_delta_lb(args, cfg):
    model = _load_model(args.model)
    for s in (args.s1, args.s2):
        _require_state(model, s)
    d = Path(args.specs)
    if not d.is_dir():
        raise UsageError(f"not a directory: {args.specs}")
    files = sorted(p for p in d.iterdir() if p.suffix in (".mtl", ".dta"))
    if not files:
        raise UsageError(f"no .mtl or .dta files in {args.specs}")
    specs = [_load_spec(p) for p in files]
    try:
        value, rows = delta_lower_bound_details(model, args.s1, args.s2, specs, cfg.samples,
                                                args.horizon, cfg.seed, cfg.confidence,
                                                args.threads)
    except ValueError as exc:
        raise InvalidInput(str(exc)) from None
    payload = {"seed": cfg.seed, "lower_bound": format_number(value),
               "specs": [{"file": p.name, "s1": a.to_json(), "s2": b.to_json()}
                         for p, (a, b) in zip(files, rows)]}
    lines = [f"seed={cfg.seed}", f"delta >= {format_number(value)}"]
    lines += [f"  {p.name}: [{format_number(a.lower)}, {format_number(a.upper)}] vs "
              f"[{format_number(b.lower)}, {format_number(b.upper)}]"
              for p, (a, b) in zip(files, rows)]
    return payload, lines, EXIT_OK


def cmd_delta_oracle(args, cfg):
    model = _load_model(args.model)
    for s in (args.s1, args.s2):
        _require_state(model, s)
    depth = args.depth if args.depth is not None else cfg.depth_cap
    try:
        lo, hi = exact_delta(model, args.s1, args.s2, depth)
    except SharedResidenceError as exc:
        raise InvalidInput(str(exc)) from None
    payload = {"lower": format_number(lo), "upper": format_number(hi), "exact": lo == hi}
    return payload, [f"{format_number(lo)} <= delta <= {format_number(hi)}"], EXIT_OK


def cmd_clique(args, cfg):
    graph = _load_graph(args.graph)
    x, size, deltas = max_clique_via_distance(graph, threads=args.threads)
    payload = {"x": x, "clique_size": size, "deltas": [format_number(d) for d in deltas]}
    return payload, [f"x = {x}", f"clique_size = {size}"], EXIT_OK


def cmd_gadget(args, cfg):
    graph = _load_graph(args.graph)
    if args.kind == "mg":
        model = build_MG(graph)
        starts = ["alpha"]
    elif args.kind == "mv":
        model = build_MV(graph.n)
        starts = ["alpha"]
    else:
        if args.i is None:
            raise UsageError("--kind mi needs --i")
        try:
            model, s, s2 = build_Mi(graph, args.i)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        starts = [s, s2]
    if args.emit:
        model.dump(args.emit)
    payload = {"states": len(model.states), "start_states": starts,
               "model": model.to_json() if not args.emit else args.emit}
    lines = [f"{len(model.states)} states, start {' '.join(starts)}"]
    if args.emit:
        lines.append(f"written to {args.emit}")
    else:
        lines.append(json.dumps(model.to_json(), indent=2, sort_keys=True))
    return payload, lines, EXIT_OK


# ---------------------------------------------------------------------------
# parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="worker threads (default: available cores)")
    common.add_argument("--seed", type=int, default=None,
                        help="root seed (default: $SMMDIST_SEED or 0)")

    p = _Parser(prog="smmdist", description="Behavioral distances on stochastic Markov models.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    sp = add("validate", cmd_validate, "check a model file")
    sp.add_argument("--model", required=True)

    sp = add("tv", cmd_tv, "residence-time total variation")
    sp.add_argument("--dist-a", help="residence distribution as JSON text or file")
    sp.add_argument("--dist-b")
    sp.add_argument("--model", help="all pairs of live states of a model")

    sp = add("bisim", cmd_bisim, "bisimilarity classes")
    sp.add_argument("--model", required=True)

    sp = add("theta", cmd_theta, "bisimilarity distance by fixed-point iteration")
    sp.add_argument("--model", required=True)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--max-iter", type=int, default=100_000)
    sp.add_argument("--exact-lp", action="store_true", help="cross-check with the exact LP")
    sp.add_argument("--emit-csv", metavar="PATH")

    sp = add("estimate", cmd_estimate, "Monte-Carlo satisfaction probability")
    sp.add_argument("--model", required=True)
    sp.add_argument("--start", required=True)
    sp.add_argument("--spec", required=True, help=".mtl formula or .dta automaton file")
    sp.add_argument("-n", type=int, default=100_000)
    sp.add_argument("--horizon", type=int, default=1000)
    sp.add_argument("--confidence", type=float, default=0.99)

    sp = add("delta-lb", cmd_delta_lb, "statistical lower bound on the trace distance")
    sp.add_argument("--model", required=True)
    sp.add_argument("--s1", required=True)
    sp.add_argument("--s2", required=True)
    sp.add_argument("--specs", required=True, help="directory of .mtl / .dta files")
    sp.add_argument("-n", type=int, default=100_000)
    sp.add_argument("--horizon", type=int, default=1000)
    sp.add_argument("--confidence", type=float, default=0.99)

    sp = add("delta-oracle", cmd_delta_oracle, "exact trace distance (shared residence)")
    sp.add_argument("--model", required=True)
    sp.add_argument("--s1", required=True)
    sp.add_argument("--s2", required=True)
    sp.add_argument("--depth", type=int, default=None)

    sp = add("clique", cmd_clique, "max clique size through the distance reduction")
    sp.add_argument("--graph", required=True)

    sp = add("gadget", cmd_gadget, "export reduction models")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--kind", choices=("mg", "mv", "mi"), default="mg")
    sp.add_argument("--i", type=int)
    sp.add_argument("--emit", metavar="PATH")
    return p


def _config(args) -> RunConfig:
    seed = args.seed if args.seed is not None else default_seed()
    return RunConfig(
        tolerance=getattr(args, "tol", 1e-9),
        max_iter=getattr(args, "max_iter", 100_000),
        samples=getattr(args, "n", 100_000),
        confidence=getattr(args, "confidence", 0.99),
        seed=seed,
        depth_cap=getattr(args, "depth", None) or 64,
    )


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.threads < 1:
            raise UsageError("--threads must be at least 1")
        cfg = _config(args)
        payload, lines, code = args.func(args, cfg)
    except UsageError as exc:
        print(f"smmdist: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidInput as exc:
        print(f"smmdist: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.json:
        payload = {"command": args.command, "config": asdict(cfg), "backend": _accel.BACKEND,
                   **payload}
        print(json.dumps(payload, sort_keys=True, default=str))
    else:
        print("\n".join(lines))
    return code


if __name__ == "__main__":
    sys.exit(main())
