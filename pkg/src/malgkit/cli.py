"""Command-line front end.

Rationals are printed as ``num/den``, floats with 12 significant digits.
Exit status: 0 on success, 2 for bad input (the message names the flag),
3 when a module rejects the request.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from typing import Callable, Sequence

from . import backforth as bf
from . import bernoulli as bn
from . import homog, kesten, qftypes
from .freegroup import BALL_CAP
from .logic import DEPTH_CAP, eval_at_depth, eval_bounds, free_vars, parse, to_text
from .malg import format_iet, parse_mset, parse_tuple

SCHEMA_NAMES = ("eval", "type", "dist", "homog", "backforth", "kesten",
                "bernoulli-independence", "bernoulli-factorization", "bernoulli-generators", "net")

TOPICS = [
    ("malg", "measure algebra of [0,1): interval unions, symmetric-difference metric, interval exchanges"),
    ("types", "quantifier-free types as atom-measure vectors; orbit distance as Hamming transport; type-space nets"),
    ("homog", "automorphisms matching equal-type partitions; transport maps; alternating extension over a dense schedule"),
    ("backforth", "back-and-forth for the random graph and the rational order"),
    ("logic", "continuous-logic formulas, Lipschitz moduli, evaluation over dyadic subalgebras, quantifier-free evaluation on types"),
    ("freegroup", "reduced words of the free group of rank 2, balls, the regular representation on a ball"),
    ("kesten", "return probabilities, spectral radius of the simple random walk, displacement bound sqrt(2 - sqrt(3))"),
    ("bernoulli", "Bernoulli shift on cylinder sets, independence of columns, product types, generators as interval exchanges"),
]


class InputError(Exception):
    def __init__(self, flag: str, message: str):
        super().__init__(f"{flag}: {message}")
        self.flag = flag


@dataclass
class RunConfig:
    command: str
    seed: int
    json: bool
    depth_cap: int = DEPTH_CAP
    radius_cap: int = BALL_CAP
    tol: float = 1e-9


def _float(x: float) -> float:
    return float(f"{x:.12g}")


def _q(x: Fraction) -> str:
    return str(x)


def _read(flag: str, fn: Callable, value):
    try:
        return fn(value)
    except Exception as exc:  # noqa: BLE001 - any parse failure is an input error
        raise InputError(flag, str(exc)) from exc


def _weights(text: str) -> qftypes.TypeVector:
    data = json.loads(text)
    return qftypes.TypeVector.from_dict(data)


def _binding(text: str) -> tuple[str, object]:
    name, sep, lit = text.partition("=")
    if not sep or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name.strip()):
        raise ValueError(f"expected name=<set>, got {text!r}")
    return name.strip(), parse_mset(lit)


def _cylinder(text: str) -> bn.CylinderSet:
    """``0:e=1 & 0:a=0 | 1:b=1`` (conjunctions of literals joined by ``|``); ``full``/``empty``."""
    text = text.strip()
    if text in ("full", "1"):
        return bn.CylinderSet.full()
    if text in ("empty", "0", ""):
        return bn.CylinderSet.empty()
    out = bn.CylinderSet.empty()
    for clause in text.split("|"):
        acc = bn.CylinderSet.full()
        for lit in clause.split("&"):
            coord, sep, val = lit.partition("=")
            if not sep:
                raise ValueError(f"literal {lit.strip()!r} needs '=0' or '=1'")
            acc = acc & bn.CylinderSet.literal(bn.Coord.parse(coord), int(val))
        out = out | acc
    return out


def _cyl_tuple(text: str) -> list[bn.CylinderSet]:
    return [_cylinder(p) for p in text.split(";")] if text.strip() else []


# ---------------------------------------------------------------------------
# commands


def cmd_eval(args, cfg: RunConfig) -> dict:
    f = _read("--formula", parse, args.formula)
    env = dict(_read("--bind", _binding, b) for b in args.bind)
    out = {"formula": to_text(f), "depth": args.depth, "free_vars": sorted(free_vars(f))}
    if args.bounds:
        depths = _read("--bounds", lambda s: [int(x) for x in s.split(",")], args.bounds)
        rep = eval_bounds(f, env, depths, args.method, cfg.depth_cap)
        out["bounds"] = rep.to_json()
    out["value"] = _q(eval_at_depth(f, env, args.depth, args.method, cfg.depth_cap))
    return out


def cmd_type(args, cfg: RunConfig) -> dict:
    sets = _read("--tuple", parse_tuple, args.tuple)
    return qftypes.qf_type(sets).to_json()


def cmd_dist(args, cfg: RunConfig) -> dict:
    if args.left is not None and args.right is not None:
        p = qftypes.qf_type(_read("--left", parse_tuple, args.left))
        q = qftypes.qf_type(_read("--right", parse_tuple, args.right))
    elif args.p is not None and args.q is not None:
        p = _read("--p", _weights, args.p)
        q = _read("--q", _weights, args.q)
    else:
        raise InputError("--left/--right", "give two tuples (--left, --right) or two types (--p, --q)")
    value, coupling = qftypes.optimal_type_coupling(p, q)
    return {
        "distance": _q(value),
        "p": p.to_json(),
        "q": q.to_json(),
        "coupling": [{"from": qftypes.bitstring(i, p.n), "to": qftypes.bitstring(j, p.n), "mass": _q(m)}
                     for (i, j), m in sorted(coupling.items())],
    }


def cmd_homog(args, cfg: RunConfig) -> dict:
    A = _read("--left", parse_tuple, args.left)
    B = _read("--right", parse_tuple, args.right)
    if args.mode == "match":
        t = homog.match_partitions(A, B)
        return {"mode": "match", "iet": format_iet(t), "defect": _q(homog.tuple_defect(t, A, B))}
    if args.mode == "transport":
        t, achieved = homog.transport_map(A, B)
        return {"mode": "transport", "iet": format_iet(t), "defect": _q(achieved),
                "distance": _q(qftypes.orbit_distance(qftypes.qf_type(A), qftypes.qf_type(B)))}
    eps = _read("--eps", Fraction, args.eps)
    res = homog.back_and_forth_malg(A, B, args.steps, eps)
    return {"mode": "backforth", "iet": format_iet(res.iet), "defect": _q(res.defect),
            "schedule_defect": _q(res.schedule_defect()), "eps": _q(res.eps),
            "stages": [{"k": s.k, "budget": _q(s.budget), "perturbation": _q(s.defect)}
                       for s in res.stages]}


def cmd_backforth(args, cfg: RunConfig) -> dict:
    if args.structure == "rado":
        left, right = bf.RadoAdapter(), bf.RadoAdapter.permuted(cfg.seed)
    else:
        left, right = bf.DloAdapter(cfg.seed), bf.DloAdapter(cfg.seed + 1)
    engine = bf.BackAndForth(left, right)
    iso = engine.run(args.k)
    ok = bf.verify_partial_iso(left, right, iso)
    out = {"structure": args.structure, "k": args.k, "pairs": len(iso.pairs), "verified": ok,
           "stage_sizes": engine.stage_sizes,
           "covers_left": all(left.element(i) in iso.fwd for i in range(args.k)),
           "covers_right": all(right.element(i) in iso.bwd for i in range(args.k))}
    if not args.no_map:
        out["map"] = iso.to_json()
    return out


def cmd_kesten(args, cfg: RunConfig) -> dict:
    rep = kesten.kesten_certificate(args.radius, cfg.tol, args.max_iters)
    return {
        "R": rep.R,
        "lambda_max": _float(rep.lambda_max),
        "min_avg_disp_sq": _float(rep.min_avg_disp_sq),
        "min_max_displacement": _float(rep.min_max_displacement),
        "iterations": rep.iterations,
        "tol": cfg.tol,
        "target_lambda": _float(rep.target_lambda),
        "target_disp_sq": _float(rep.target_disp_sq),
        "target_disp": _float(rep.target_disp),
        "lambda_ok": rep.lambda_ok,
        "displacement_ok": rep.displacement_ok,
        "return_probs": [{"steps": 2 * (k + 1), "p": _q(p)} for k, p in enumerate(rep.return_probs)],
    }


def cmd_bernoulli(args, cfg: RunConfig) -> dict:
    if args.bcommand == "independence":
        a = _read("--a", _cylinder, args.a)
        b = _read("--b", _cylinder, args.b)
        res = bn.independence_check(a, b)
        return {"independent": res.independent, "lhs": _q(res.lhs), "rhs": _q(res.rhs)}
    if args.bcommand == "factorization":
        L = _read("--left", _cyl_tuple, args.left)
        R = _read("--right", _cyl_tuple, args.right)
        rep = bn.joint_type_factorization(L, R)
        return {"factorizes": rep.ok, "joint": rep.joint.to_json(),
                "left": rep.left.to_json(), "right": rep.right.to_json()}
    window = _read("--window", bn.parse_window, args.window)
    t1, t2, emb = bn.generator_iets(window)
    checks = [bn.check_intertwining(emb, g, seed=cfg.seed) for g in ("a", "b")]
    return {"T1": format_iet(t1), "T2": format_iet(t2), "embedding": emb.to_json(),
            "intertwining": [{"gen": c.gen, "checked": c.checked, "exhaustive": c.exhaustive, "ok": c.ok}
                             for c in checks],
            "note": "intertwining certified only for cylinder sets supported in the window"}


def cmd_net(args, cfg: RunConfig) -> dict:
    eps = _read("--eps", Fraction, args.eps)
    pts = qftypes.type_space_net(args.n, eps)
    out = {"n": args.n, "eps": _q(eps), "size": len(pts),
           "resolution": qftypes.net_resolution(args.n, eps) if eps < args.n else 1}
    if args.limit:
        out["points"] = [p.to_json()["weights"] for p in pts[:args.limit]]
    return out


COMMANDS = {"eval": cmd_eval, "type": cmd_type, "dist": cmd_dist, "homog": cmd_homog,
            "backforth": cmd_backforth, "kesten": cmd_kesten, "bernoulli": cmd_bernoulli,
            "net": cmd_net}


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="malgkit",
        description="Exact computations in the measure algebra of [0,1) and related structures.",
        epilog="Set literals: '[0,1/3)u[1/2,1)'; tuples separate sets with ';', e.g. '[0,1/3);[1/4,1)'.")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized parts (echoed in output)")
    p.add_argument("--json", action="store_true", help="print a JSON report")
    p.add_argument("--schema", action="store_true", help="print the JSON schemas and exit")
    p.add_argument("--paper-map", action="store_true", help="print the module/topic table and exit")
    p.add_argument("--tol", type=float, default=1e-9, help="numerical tolerance")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")

    def common(sp):
        sp.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
        sp.add_argument("--seed", type=int, default=argparse.SUPPRESS)

    e = sub.add_parser("eval", help="evaluate a formula over a dyadic subalgebra")
    e.add_argument("--formula", required=True)
    e.add_argument("--depth", type=int, default=2)
    e.add_argument("--bind", action="append", default=[], metavar="x=SET")
    e.add_argument("--method", choices=("auto", "exhaustive"), default="auto")
    e.add_argument("--bounds", metavar="D1,D2,...", help="also report values at these depths")
    common(e)

    t = sub.add_parser("type", help="quantifier-free type of a tuple")
    t.add_argument("--tuple", required=True)
    common(t)

    d = sub.add_parser("dist", help="orbit distance between two tuples or two types")
    d.add_argument("--left")
    d.add_argument("--right")
    d.add_argument("--p", help='type as JSON, e.g. \'{"01":"1/2","10":"1/2"}\'')
    d.add_argument("--q")
    common(d)

    h = sub.add_parser("homog", help="automorphism moving one tuple onto another")
    h.add_argument("--left", required=True)
    h.add_argument("--right", required=True)
    h.add_argument("--mode", choices=("match", "transport", "backforth"), default="match")
    h.add_argument("--steps", type=int, default=3)
    h.add_argument("--eps", default="1/16")
    common(h)

    b = sub.add_parser("backforth", help="back-and-forth between two copies of a structure")
    b.add_argument("--structure", choices=("rado", "dlo"), default="rado")
    b.add_argument("--stages", "--k", dest="k", type=int, default=50)
    b.add_argument("--no-map", action="store_true", help="omit the pairs from the report")
    common(b)

    k = sub.add_parser("kesten", help="spectral certificate on the R-ball of the free group")
    k.add_argument("--radius", type=int, required=True)
    k.add_argument("--tol", type=float, default=argparse.SUPPRESS)
    k.add_argument("--max-iters", type=int, default=100_000)
    common(k)

    bern = sub.add_parser("bernoulli", help="Bernoulli shift computations")
    bsub = bern.add_subparsers(dest="bcommand", metavar="SUBCOMMAND", required=True)
    bi = bsub.add_parser("independence", help="compare m(A & B) with m(A) m(B)")
    bi.add_argument("--a", required=True, help="cylinder set, e.g. '0:e=1 & 0:a=0 | 1:b=1'")
    bi.add_argument("--b", required=True)
    common(bi)
    bfac = bsub.add_parser("factorization", help="product structure of the joint type of two columns")
    bfac.add_argument("--left", required=True, help="';'-separated cylinder sets in one column")
    bfac.add_argument("--right", required=True)
    common(bfac)
    bg = bsub.add_parser("generators", help="shift by a and b as dyadic interval exchanges")
    bg.add_argument("--window", required=True, help="coordinates, e.g. '0:e;0:a'")
    common(bg)

    n = sub.add_parser("net", help="finite net of the type space")
    n.add_argument("--n", type=int, required=True)
    n.add_argument("--eps", required=True)
    n.add_argument("--limit", type=int, default=0, help="list at most this many points")
    common(n)
    return p


def load_schemas() -> dict[str, dict]:
    pkg = resources.files("malgkit") / "schemas"
    return {name: json.loads((pkg / f"{name}.json").read_text()) for name in SCHEMA_NAMES}


def schema_name(command: str, bcommand: str | None = None) -> str:
    return f"bernoulli-{bcommand}" if command == "bernoulli" else command


def _human(obj, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    for key, val in obj.items():
        if isinstance(val, dict):
            lines.append(f"{pad}{key}:")
            lines.extend(_human(val, indent + 1))
        elif isinstance(val, list) and val and isinstance(val[0], dict):
            lines.append(f"{pad}{key}:")
            for item in val:
                lines.append(f"{pad}  - " + ", ".join(f"{k}={v}" for k, v in item.items()))
        else:
            lines.append(f"{pad}{key}: {val}")
    return lines


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.schema:
        print(json.dumps(load_schemas(), indent=2, sort_keys=True))
        return 0
    if args.paper_map:
        width = max(len(m) for m, _ in TOPICS)
        for mod, topic in TOPICS:
            print(f"{mod.ljust(width)}  {topic}")
        return 0
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("malgkit: error: a command is required", file=sys.stderr)
        return 2
    if args.command == "kesten" and args.radius > BALL_CAP:
        print(f"malgkit: error: --radius: {args.radius} over cap {BALL_CAP}", file=sys.stderr)
        return 2
    cfg = RunConfig(args.command, args.seed, args.json, tol=args.tol)
    try:
        body = COMMANDS[args.command](args, cfg)
    except InputError as exc:
        print(f"malgkit: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, MemoryError, ArithmeticError) as exc:
        print(f"malgkit: {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    report = {"command": schema_name(args.command, getattr(args, "bcommand", None)),
              "seed": cfg.seed, **body}
    if cfg.json:
        print(json.dumps(report, sort_keys=True))
    else:
        print("\n".join(_human(report)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
