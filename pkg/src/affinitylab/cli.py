"""Command-line front end: ``affinitylab <command> [options]``.

Exit codes: 0 success, 1 usage or I/O error, 2 a verification failed
(an inequality report or a threshold counterexample).
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys

import numpy as np

from . import __version__
from .affinity import (Permutation, affinity_profile, count_affinity,
                       threshold_check, transposition_formula)
from .constructions import (parse_recipe, perm_to_json, perm_to_text, read_permutation,
                            write_permutation)
from .errors import AffinityLabError, BudgetExceeded, CheckpointCorrupt
from .geometry import count_flats
from .groups import (coset_intersection_count, group_orders, is_affine, is_semi_affine,
                     minimal_coaffinity_count, transposition_distance_two,
                     transposition_distance_two_batch)
from .inequalities import sweep
from .search import (SearchConfig, all_permutations, exhaustive_affinities, exhaustive_spectrum,
                     random_spectrum, target_search)
from .walsh import (BoolFun, degree, fourth_moment, lemma_bound_check, parseval_check,
                    walsh_transform)

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _fmt_set(values) -> str:
    return "{" + ",".join(str(v) for v in values) + "}"


class Out:
    """Collects a report and prints it either as JSON or as text lines."""

    def __init__(self, as_json: bool):
        self.as_json = as_json
        self.data: dict = {}
        self.lines: list[str] = []

    def put(self, key, value, text: str | None = None):
        self.data[key] = value
        if text is not None:
            self.lines.append(text)

    def line(self, text: str):
        self.lines.append(text)

    def emit(self):
        if self.as_json:
            print(json.dumps(self.data, sort_keys=True))
        else:
            for ln in self.lines:
                print(ln)


def _seed(args, out: Out) -> int:
    if args.seed is None:
        args.seed = secrets.randbits(32)
        print(f"seed: {args.seed}", file=sys.stderr)
    out.data["seed"] = args.seed
    return args.seed


def _load_perm(args) -> Permutation:
    if getattr(args, "perm", None):
        return read_permutation(args.perm)
    if getattr(args, "construct", None):
        return parse_recipe(args.construct).build(args.n, args.q)
    raise UsageError("give --perm FILE or --construct RECIPE")


# -- commands ------------------------------------------------------------------------

def cmd_affinity(args, out: Out) -> int:
    perm = _load_perm(args)
    if args.k is None:
        raise UsageError("--k is required")
    aff = count_affinity(perm, args.k, args.method)
    co = count_flats(perm.n, args.k, perm.q) - aff
    out.put("n", perm.n)
    out.put("q", perm.q)
    out.put("k", args.k)
    out.put("affinity", aff, str(aff))
    out.put("coaffinity", co, f"coaffinity {co}")
    return EXIT_OK


def cmd_profile(args, out: Out) -> int:
    perm = _load_perm(args)
    try:
        prof = affinity_profile(perm, args.method)
    except BudgetExceeded as exc:
        prof = getattr(exc, "partial", [])
        out.put("error", str(exc), f"stopped: {exc}")
    out.put("profile", [{"k": k, "affinity": a, "coaffinity": c} for k, a, c in prof])
    for k, a, c in prof:
        out.line(f"k={k} affinity={a} coaffinity={c}")
    return EXIT_OK


def _search_config(args, out: Out) -> SearchConfig:
    return SearchConfig(moves=args.moves, budget=args.budget or 10 ** 6,
                        restart_every=args.restart_every, seed=_seed(args, out),
                        walkers=args.walkers, threads=args.threads,
                        checkpoint=args.checkpoint, checkpoint_every=args.checkpoint_every,
                        stall=args.stall)


def cmd_spectrum(args, out: Out) -> int:
    for name in ("n", "q", "k"):
        if getattr(args, name) is None:
            raise UsageError(f"--{name} is required")
    if args.mode == "exhaustive":
        res = exhaustive_spectrum(args.n, args.q, args.k)
    else:
        cfg = _search_config(args, out)
        starts = [parse_recipe(r).build(args.n, args.q) for r in args.start or []]
        ref = {int(v) for v in args.reference.split(",")} if args.reference else None
        res = random_spectrum(args.n, args.q, args.k, cfg, starts=starts, reference=ref)
    body = res.to_json()
    for key, val in body.items():
        out.put(key, val)
    out.line(_fmt_set(res.values))
    out.line(f"mode {res.mode}, evaluations {res.budget_used}")
    if res.coverage:
        c = res.coverage
        out.line(f"coverage {c['covered']}/{c['reference_size']} ({c['percent']:.1f}%)")
    return EXIT_OK


def _parse_target(text: str) -> dict[int, int]:
    target = {}
    for part in text.split(","):
        k, _, v = part.partition("=")
        if not v:
            raise UsageError(f"bad target item {part!r}; expected k=value")
        target[int(k)] = int(v)
    return target


def cmd_find(args, out: Out) -> int:
    if args.n is None or args.q is None or not args.target:
        raise UsageError("--n, --q and --target are required")
    target = _parse_target(args.target)
    res = target_search(args.n, args.q, target, _search_config(args, out))
    out.put("target", {str(k): v for k, v in target.items()})
    out.put("found", res.found, "found" if res.found else "not found within budget")
    out.put("evaluations", res.evaluations, f"evaluations {res.evaluations}")
    out.put("restarts", res.restarts)
    out.put("best_distance", res.best_distance, f"best distance {res.best_distance}")
    if res.found:
        out.put("witness", perm_to_json(res.witness), json.dumps(perm_to_json(res.witness)))
    return EXIT_OK


def cmd_construct(args, out: Out) -> int:
    perm = parse_recipe(args.recipe).build(args.n, args.q)
    if args.out:
        write_permutation(perm, args.out, args.format)
        out.put("written", args.out, f"wrote {args.out}")
    out.put("permutation", perm_to_json(perm))
    if not args.out:
        out.line(json.dumps(perm_to_json(perm)) if args.format == "json"
                 else perm_to_text(perm).rstrip())
    return EXIT_OK


def cmd_verify(args, out: Out) -> int:
    if args.suite != "section3":
        raise UsageError(f"unknown suite {args.suite!r}")
    reports = sweep(args.q_max, args.n_max, args.qk_max)
    failed = [r for r in reports if not r.holds]
    if args.json:
        # exact fractions here can run to thousands of digits
        sys.set_int_max_str_digits(0)
        out.put("reports", [r.to_json() for r in reports])
    out.put("failed", len(failed))
    width = max(len(r.name) for r in reports) if reports else 0
    for r in reports:
        params = " ".join(f"{k}={v}" for k, v in r.params.items())
        margin = float(r.margin)
        out.line(f"{r.name:<{width}}  {params:<16} {'ok  ' if r.holds else 'FAIL'} "
                 f"margin~{margin:.3e}")
    out.line(f"{len(reports)} reports, {len(failed)} failed")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_walsh(args, out: Out) -> int:
    g = BoolFun.from_hex(args.hex, args.n)
    spec = walsh_transform(g)
    vals = [int(v) for v in spec.values]
    lhs4, rhs4 = fourth_moment(g)
    deg = degree(g)
    out.put("n", g.n)
    out.put("spectrum", vals, json.dumps(vals))
    out.put("parseval", parseval_check(spec), f"parseval {parseval_check(spec)}")
    out.put("fourth_moment", [str(lhs4), str(rhs4)], f"fourth moment {lhs4} = {rhs4}")
    out.put("degree", deg, f"degree {deg}")
    if deg >= 2:
        lhs, rhs, tight = lemma_bound_check(g)
        out.put("autocorrelation_bound", {"lhs": lhs, "rhs": rhs, "tight": tight},
                f"autocorrelation bound {lhs} <= {rhs} tight={tight}")
    ok = parseval_check(spec) and lhs4 == rhs4
    return EXIT_OK if ok else EXIT_FAIL


def cmd_groups(args, out: Out) -> int:
    a = args.action
    if a == "orders":
        gl, agl, agaml = group_orders(args.n, args.q)
        out.put("GL", gl, f"|GL| {gl}")
        out.put("AGL", agl, f"|AGL| {agl}")
        out.put("AGammaL", agaml, f"|AGammaL| {agaml}")
    elif a == "member":
        perm = _load_perm(args)
        m = is_semi_affine(perm) if args.semi else is_affine(perm)
        out.put("member", m is not None, "yes" if m is not None else "no")
        if m is not None:
            out.put("map", {"matrix": [list(r) for r in m.matrix], "b": m.b, "sigma": m.sigma})
    elif a == "double-coset":
        perm = _load_perm(args)
        r = transposition_distance_two(perm, semi=args.semi)
        out.put("member", r is not None, "yes" if r is not None else "no")
        if r is not None:
            g, u, v = r
            out.put("u", u, f"u {u}")
            out.put("v", v, f"v {v}")
            out.put("map", {"matrix": [list(x) for x in g.matrix], "b": g.b, "sigma": g.sigma})
    elif a == "coset-count":
        c = coset_intersection_count(args.n, args.a, args.method)
        out.put("count", c, str(c))
    elif a == "minimal-count":
        c = minimal_coaffinity_count(args.n)
        out.put("count", c, str(c))
    else:
        raise UsageError(f"unknown groups action {a!r}")
    return EXIT_OK


def cmd_threshold(args, out: Out) -> int:
    if args.k is None:
        raise UsageError("--k is required")
    if args.exhaustive:
        if args.n is None or args.q is None:
            raise UsageError("--exhaustive needs --n and --q")
        n, q, k = args.n, args.q, args.k
        perms = all_permutations(q ** n)
        co = count_flats(n, k, q) - exhaustive_affinities(n, q, k, perms)
        thr = transposition_formula(n, k, q)[1]
        below = int(np.count_nonzero((co > 0) & (co < thr)))
        at = co == thr
        coset = transposition_distance_two_batch(perms[at], n, q)
        out.put("permutations", len(perms), f"permutations {len(perms)}")
        out.put("threshold", thr, f"threshold coaffinity {thr}")
        out.put("counterexamples", below, f"counterexamples {below}")
        out.put("at_threshold", int(at.sum()), f"at threshold {int(at.sum())}")
        out.put("at_threshold_in_double_coset", int(coset.sum()),
                f"at threshold and in the double coset {int(coset.sum())}")
        return EXIT_FAIL if below else EXIT_OK
    perm = _load_perm(args)
    v = threshold_check(perm, args.k)
    out.put("classification", v.classification.value, v.classification.value)
    out.put("coaffinity", v.coaffinity, f"coaffinity {v.coaffinity}")
    out.put("threshold", v.threshold, f"threshold {v.threshold}")
    return EXIT_FAIL if v.is_counterexample else EXIT_OK


# -- parser ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    def global_flags(parser, suppress):
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        parser.add_argument("--json", action="store_true", default=d(False),
                            help="emit one JSON object")
        parser.add_argument("--seed", type=int, default=d(None))
        parser.add_argument("--threads", type=int, default=d(1))
        parser.add_argument("--budget", type=int, default=d(None), help="evaluation cap")
        parser.add_argument("--checkpoint", default=d(None),
                            help="checkpoint file (created or resumed)")

    # sub-commands accept the global flags too, without clobbering ones given earlier
    common = _Parser(add_help=False)
    global_flags(common, suppress=True)

    space_args = _Parser(add_help=False)
    space_args.add_argument("--n", type=int)
    space_args.add_argument("--q", type=int)
    space_args.add_argument("--k", type=int)

    perm_args = _Parser(add_help=False)
    perm_args.add_argument("--perm", help="permutation file (JSON or text, '-' for stdin)")
    perm_args.add_argument("--construct", help="construction recipe, e.g. inverse, fixture:f32")
    perm_args.add_argument("--method", default="auto",
                           choices=["auto", "table", "kernel", "stream", "fast", "naive"])

    search_args = _Parser(add_help=False)
    search_args.add_argument("--moves", default="transposition",
                             choices=["transposition", "transposition+3cycle"])
    search_args.add_argument("--walkers", type=int, default=1)
    search_args.add_argument("--restart-every", type=int, default=1000)
    search_args.add_argument("--checkpoint-every", type=int, default=10 ** 6)
    search_args.add_argument("--stall", type=int, default=10 ** 4)

    p = _Parser(prog="affinitylab", description="k-affinity of permutations of F_q^n",
)
    global_flags(p, suppress=False)
    p.add_argument("--version", action="version", version=f"affinitylab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("affinity", parents=[common, space_args, perm_args],
                       help="k-affinity of one permutation")
    s.set_defaults(func=cmd_affinity)

    s = sub.add_parser("profile", parents=[common, space_args, perm_args],
                       help="affinities for k = 1..n-1")
    s.set_defaults(func=cmd_profile)

    s = sub.add_parser("spectrum", parents=[common, space_args, search_args],
                       help="exhaustive or randomized k-spectrum")
    s.add_argument("--mode", choices=["exhaustive", "random"], default="exhaustive")
    s.add_argument("--start", action="append", help="start recipe (repeatable)")
    s.add_argument("--reference", help="comma-separated values to report coverage against")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("find", parents=[common, space_args, search_args],
                       help="search for a permutation with given affinities")
    s.add_argument("--target", help="k=value[,k=value...]")
    s.set_defaults(func=cmd_find)

    s = sub.add_parser("construct", parents=[common, space_args],
                       help="build a named permutation")
    s.add_argument("recipe")
    s.add_argument("--out", help="write to this file instead of stdout")
    s.add_argument("--format", choices=["json", "text"], default="json")
    s.set_defaults(func=cmd_construct)

    s = sub.add_parser("verify", parents=[common], help="exact inequality checks")
    s.add_argument("--suite", default="section3")
    s.add_argument("--q-max", type=int, default=16)
    s.add_argument("--n-max", type=int, default=12)
    s.add_argument("--qk-max", type=int, default=4096)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("walsh", parents=[common], help="Walsh spectrum of a Boolean function")
    s.add_argument("--hex", required=True, help="truth table; bit x of the number is g(x)")
    s.add_argument("--n", type=int)
    s.set_defaults(func=cmd_walsh)

    s = sub.add_parser("groups", parents=[common, space_args, perm_args],
                       help="group orders, membership and double-coset counts")
    s.add_argument("action", choices=["orders", "member", "double-coset", "coset-count",
                                      "minimal-count"])
    s.add_argument("--semi", action="store_true", help="use semi-affine maps")
    s.add_argument("--a", type=int, default=1, help="second point of the transposition (0 a)")
    s.add_argument("--count-method", dest="method_count", default="criterion",
                   choices=["criterion", "brute"])
    s.set_defaults(func=cmd_groups)

    s = sub.add_parser("threshold", parents=[common, space_args, perm_args],
                       help="classify coaffinity against the transposition value")
    s.add_argument("--exhaustive", action="store_true", help="scan every permutation (q^n <= 9)")
    s.set_defaults(func=cmd_threshold)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "groups":
        args.method = args.method_count
    out = Out(args.json)
    try:
        code = args.func(args, out)
    except UsageError as exc:
        print(f"affinitylab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError, CheckpointCorrupt, AffinityLabError) as exc:
        print(f"affinitylab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out.emit()
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
