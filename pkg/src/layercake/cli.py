"""Command line front end.

Exit status: 0 completed, 1 condition violated (with --assert) or a
diverged integral, 2 malformed input.

Grid CSV files start with a header line

    # n=2 h=1.0 origin=-2,-2 shape=4,4

followed by prod(shape[:-1]) rows of shape[-1] comma-separated values in
row-major order.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import os
import sys

import numpy as np

from . import lorentz, schema, symmetrize, transform, tree
from .errors import Diverged, LayerCakeError
from .measure import MeasureSpace
from .rearrange import rearrange

SEED_ENV = "LAYERCAKE_SEED"
DEFAULT_DISCRETE = {"kind": "discrete", "masses": [1, 2, 1, 3, 1, 2, 1, 1]}
DEFAULT_GRID = {"kind": "grid", "shape": [4, 4], "h": 1.0}


class InputError(Exception):
    pass


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def read_grid_csv(path: str) -> symmetrize.GridFunction:
    try:
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    if not lines or not lines[0].startswith("#"):
        raise InputError(f"{path}: line 1: expected '# n=.. h=.. origin=.. shape=..' header")
    meta = {}
    for tok in lines[0].lstrip("#").split():
        key, _, val = tok.partition("=")
        meta[key] = val
    try:
        shape = tuple(int(s) for s in meta["shape"].split(","))
        h = float(meta.get("h", 1.0))
        origin = tuple(float(o) for o in meta["origin"].split(",")) if "origin" in meta else None
        if "n" in meta and int(meta["n"]) != len(shape):
            raise InputError(f"{path}: line 1: n={meta['n']} but shape has {len(shape)} axes")
    except (KeyError, ValueError) as exc:
        raise InputError(f"{path}: line 1: bad header field {exc}") from None
    rows = []
    for lineno, ln in enumerate(lines[1:], start=2):
        try:
            row = [float(x) for x in next(csv.reader([ln]))]
        except ValueError:
            raise InputError(f"{path}: line {lineno}: non-numeric value") from None
        if len(row) != shape[-1]:
            raise InputError(f"{path}: line {lineno}: expected {shape[-1]} values, got {len(row)}")
        rows.append(row)
    try:
        values = np.array(rows).reshape(shape)
    except ValueError:
        raise InputError(f"{path}: expected {int(np.prod(shape[:-1]))} rows, got {len(rows)}") from None
    return symmetrize.GridFunction(MeasureSpace.grid(shape, h, origin), values)


def write_grid_csv(g: symmetrize.GridFunction) -> str:
    sp = g.space
    head = f"# n={len(sp.shape)} h={sp.h!r} origin={','.join(repr(o) for o in sp.origin)} shape={','.join(map(str, sp.shape))}\n"
    body = "\n".join(",".join(repr(float(x)) for x in row) for row in g.values.reshape(-1, sp.shape[-1]))
    return head + body + "\n"


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, float) else x for x in r])
    return buf.getvalue()


def build_transform(kind: str, domain: MeasureSpace, k: int | None = None):
    if kind == "classical":
        return transform.classical(domain)
    if kind == "shifted":
        return transform.shifted(domain)
    if kind == "spherical":
        return transform.spherical(domain)
    if kind == "steiner":
        return transform.steiner(domain, k or 1)
    if kind == "multidim2d":
        return transform.multidim2d(domain)
    raise InputError(f"--transform: unknown kind {kind!r}")


def _emit(text: str, output: str | None):
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report(args, result: dict, seed: int | None = None) -> str:
    spec = {k.rstrip("_"): v for k, v in sorted(vars(args).items()) if k not in ("func", "output")}
    body = {"command": args.command, "spec": spec, "seed": seed, "result": result}
    body["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    return json.dumps(body, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(type(x).__name__)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_rearrange(args) -> int:
    f = schema.step_from_json(_load_json(args.input))
    R = build_transform(args.transform, f.space, args.k)
    F = rearrange(R, f)
    if args.format == "csv":
        _emit(F.to_csv(), args.output)
    else:
        _emit(_report(args, schema.rearranged_to_json(F)), args.output)
    return 0


def cmd_symmetrize(args) -> int:
    g = read_grid_csv(args.grid)
    if args.mode == "spherical":
        prof = symmetrize.spherical_profile(g)
        _emit(_rows_csv(["s", "value"], prof.breakpoints()), args.output)
    elif args.mode == "steiner":
        _emit(write_grid_csv(symmetrize.steiner(g, args.k or 1)), args.output)
    else:
        out = symmetrize.rearrange_2d(g, args.route)
        h = out.space.h
        rows = [((i + 0.5) * h, (j + 0.5) * h, float(out.values[i, j])) for i in range(out.values.shape[0]) for j in range(out.values.shape[1])]
        _emit(_rows_csv(["s", "t", "value"], rows), args.output)
    return 0


def cmd_norm(args) -> int:
    f = schema.step_from_json(_load_json(args.input))
    R = build_transform(args.transform, f.space, args.k)
    w = schema.weight_from_json(_load_json(args.weight), R.codomain) if args.weight else schema.weight_from_json({"kind": "unit"}, R.codomain)
    params = lorentz.LorentzParams(args.p, w, R)
    result = {"norm": lorentz.lorentz_norm(params, f), "p": args.p}
    if R.flags.measure_preserving:
        result["lp_norm"] = f.lp_norm(args.p)
    _emit(_report(args, result), args.output)
    return 0


def cmd_check(args) -> int:
    seed = args.seed
    if args.suite == "spherical":
        w = schema.weight_from_json(_load_json(args.weight)) if args.weight else schema.radial_weight("exp-radial", 2)
        rep = symmetrize.spherical_normability_suite(w, p=args.p, seed=seed)
        _emit(_report(args, rep.to_dict(), seed), args.output)
        return 1 if args.assert_ and "fails" in rep.verdicts.values() else 0
    space_obj = _load_json(args.space) if args.space else (DEFAULT_GRID if args.transform in ("spherical", "steiner", "multidim2d") else DEFAULT_DISCRETE)
    domain = schema.space_from_json(space_obj)
    R = build_transform(args.transform, domain, args.k)
    if args.property in transform.PROPERTIES:
        rep = transform.check_property(R, args.property, seed=seed, trials=args.trials).to_dict()
        violated = rep["verdict"] == "violated"
    else:
        w = schema.weight_from_json(_load_json(args.weight), R.codomain) if args.weight else schema.weight_from_json({"kind": "unit"}, R.codomain)
        params = lorentz.LorentzParams(args.p, w, R)
        search = {"quasi": lorentz.quasinorm_search, "concavity": lorentz.concavity_search, "triangle": lorentz.triangle_search}[args.property]
        res = search(params, seed=seed, trials=args.trials)
        rep, violated = res.to_dict(), res.violated
    _emit(_report(args, rep, seed), args.output)
    return 1 if (args.assert_ and violated) else 0


def cmd_experiment(args) -> int:
    vals = lorentz.p_growth_experiment(args.p, args.N)
    _emit(_rows_csv(["n", "value"], [(n, v) for n, v in enumerate(vals, start=1)]), args.output)
    return 0


def cmd_tree(args) -> int:
    T = tree.HomogeneousTree(args.q, args.d)
    if args.weights:
        obj = _load_json(args.weights)
        if int(obj.get("q", args.q)) != args.q or int(obj.get("d", args.d)) != args.d:
            T = tree.HomogeneousTree(int(obj["q"]), int(obj["d"]))
        v = tree.weights_from_paths(T, obj.get("values", {}))
    else:
        v = tree.linearly_decreasing_weight(T)
    rep = tree.cc_linear_suite(T, v)
    rep["order"] = [T.path_str(x) for x in T.canonical_order]
    _emit(_report(args, rep), args.output)
    violated = rep["cc"]["verdict"] != "holds" or rep["linear"]["verdict"] != "holds"
    return 1 if (args.assert_ and violated) else 0


def build_parser() -> argparse.ArgumentParser:
    env_seed = os.environ.get(SEED_ENV)
    default_seed = int(env_seed) if env_seed and env_seed.lstrip("-").isdigit() else 0
    p = argparse.ArgumentParser(prog="layercake", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--output", "-o", help="write here instead of stdout")

    sp = sub.add_parser("rearrange", help="rearrange a step function")
    sp.add_argument("--input", required=True, help="step function JSON")
    sp.add_argument("--transform", default="classical")
    sp.add_argument("--k", type=int)
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    common(sp)
    sp.set_defaults(func=cmd_rearrange)

    sp = sub.add_parser("symmetrize", help="symmetrize a grid function")
    sp.add_argument("--grid", required=True, help="grid CSV")
    sp.add_argument("--mode", choices=("spherical", "steiner", "2d"), default="spherical")
    sp.add_argument("--k", type=int)
    sp.add_argument("--route", choices=("iterated", "set-transform"), default="iterated")
    common(sp)
    sp.set_defaults(func=cmd_symmetrize)

    sp = sub.add_parser("norm", help="weighted Lorentz functional")
    sp.add_argument("--input", required=True)
    sp.add_argument("--transform", default="classical")
    sp.add_argument("--k", type=int)
    sp.add_argument("--weight", help="weight JSON (default: unit)")
    sp.add_argument("--p", type=float, default=1.0)
    common(sp)
    sp.set_defaults(func=cmd_norm)

    sp = sub.add_parser("check", help="check a structural condition on seeded witnesses")
    sp.add_argument("--transform", default="classical")
    sp.add_argument("--k", type=int)
    sp.add_argument("--space", help="domain space JSON")
    sp.add_argument("--property", choices=transform.PROPERTIES + ("quasi", "concavity", "triangle"), default="monotone")
    sp.add_argument("--suite", choices=("spherical",))
    sp.add_argument("--weight")
    sp.add_argument("--p", type=float, default=1.0)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", type=int, default=default_seed)
    sp.add_argument("--assert", dest="assert_", action="store_true", help="exit 1 when the condition is violated")
    common(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("experiment", help="numerical experiments")
    sp.add_argument("name", choices=("p-growth",))
    sp.add_argument("--p", type=float, default=0.5)
    sp.add_argument("--N", type=int, default=16)
    common(sp)
    sp.set_defaults(func=cmd_experiment)

    sp = sub.add_parser("tree", help="tree concavity / linear decrease suite")
    sp.add_argument("--q", type=int, default=2)
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--weights", help="JSON {q, d, values: {path: value}}")
    sp.add_argument("--assert", dest="assert_", action="store_true")
    common(sp)
    sp.set_defaults(func=cmd_tree)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Diverged as exc:
        print(f"error: diverged: {exc}", file=sys.stderr)
        return 1
    except (InputError, LayerCakeError, KeyError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
