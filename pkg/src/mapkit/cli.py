"""Command-line front end.

    mapkit check FILE
    mapkit init FILE [--cwa] [--out text|json|dot] [--dot-dir DIR]
    mapkit exec FILE PLAN [--trace] [--compress] ...
    mapkit query FILE QUERY-OR-FILE [--explain]
    mapkit repl FILE
    mapkit crosscheck FILE [--cases N] [--seed S]

FILE may be `corpus:NAME` for a bundled corpus file.  Exit status: 0 ok,
1 usage/parse/I-O, 2 semantic error, 3 plan failed, 4 cross-check mismatch.
"""

from __future__ import annotations

import argparse
import logging
import os
import random
import sys
import time
from pathlib import Path

from . import statedoc
from .errors import (
    ArgumentError,
    MapkitError,
    ParseError,
    SignatureError,
    UnsupportedShapeError,
    ValidationError,
)
from .initial import generate_initial
from .kripke import describe, satisfies, to_dot
from .lang import (
    Theory,
    corpus_path,
    format_query,
    load_theory,
    parse_query,
    parse_queries,
    validate,
)
from .logic import And, B, C, E, Formula, Not, Or, format_formula
from .transition import BState, explain_inexecutable, run_plan, step, trace_plan

EXIT_OK, EXIT_USAGE, EXIT_SEMANTIC, EXIT_FAILED, EXIT_MISMATCH = 0, 1, 2, 3, 4

log = logging.getLogger("mapkit")


def resolve(path: str):
    if path.startswith("corpus:"):
        return corpus_path(path[len("corpus:"):])
    return path


def _theory(args) -> Theory:
    return load_theory(resolve(args.file))


def initial_bstate(theory: Theory, args) -> BState:
    """Generated initial b-state, or the one given with --state."""
    if getattr(args, "state", None):
        states = statedoc.load(args.state)
        for s in states:
            M = s.structure
            if M.agents != theory.agents or M.fluents != theory.fluents:
                raise SignatureError("state document does not match the theory's agents and fluents")
        bs = BState(states)
    else:
        bs = generate_initial(theory, cwa=args.cwa).bstate()
    point = getattr(args, "point", None)
    if point is not None:
        chosen = [s for s in bs if s.real == point]
        if not chosen:
            raise ArgumentError(f"no initial state is pointed at s{point}")
        bs = BState(chosen)
    return bs


def _parse_plan(text: str, theory: Theory) -> list[str]:
    text = text.strip()
    if text in ("", "[]"):
        return []
    return list(parse_query("true after " + text, theory.signature).plan)


def _emit_states(bs: BState, args, tag: str) -> None:
    out = args.out
    if out == "json":
        sys.stdout.write(statedoc.dumps(list(bs)))
    elif out == "dot":
        for k, s in enumerate(bs):
            sys.stdout.write(to_dot(s, f"{tag}_{k}"))
    else:
        for k, s in enumerate(bs):
            print(f"-- state {k}")
            print(describe(s))
    if getattr(args, "dot_dir", None):
        _write_dots(bs, args.dot_dir, tag)


def _write_dots(bs: BState, directory, tag: str) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for k, s in enumerate(bs):
        (d / f"{tag}_{k}.dot").write_text(to_dot(s, f"{tag}_{k}"), encoding="utf-8")


def _info(args, msg: str) -> None:
    # keep stdout machine-readable for json/dot output
    stream = sys.stderr if getattr(args, "out", "text") != "text" else sys.stdout
    print(msg, file=stream)


# --- subcommands -----------------------------------------------------------


def cmd_check(args) -> int:
    theory = load_theory(resolve(args.file), check=False)
    report = validate(theory)
    for issue in report.errors:
        print(f"error: {issue}")
    for issue in report.warnings:
        print(f"warning: {issue}")
    if not report.ok:
        return EXIT_SEMANTIC
    n, m = len(theory.actions), len(theory.agents)
    print(f"OK, {n} action{'s' * (n != 1)} (grounded), {m} agent{'s' * (m != 1)}")
    return EXIT_OK


def cmd_init(args) -> int:
    theory = _theory(args)
    bs = initial_bstate(theory, args)
    worlds = {len(s.structure.worlds) for s in bs}
    structures = {s.structure for s in bs}
    _info(args, f"{len(bs)} initial states over {len(structures)} structure(s) with {sorted(worlds)} worlds")
    _emit_states(bs, args, "init")
    return EXIT_OK


def cmd_exec(args) -> int:
    theory = _theory(args)
    plan = _parse_plan(args.plan, theory)
    bs = initial_bstate(theory, args)
    if args.trace:
        print("step 0 (initial): " + ", ".join(f"{len(s.structure.worlds)} worlds" for s in bs))
        if args.dot_dir:
            _write_dots(bs, args.dot_dir, "step0")
        for k, action, nxt, culprit in trace_plan(theory, plan, bs, args.compress):
            if nxt.failed:
                s = bs.states[culprit]
                reason = explain_inexecutable(theory, action, s) or "not executable"
                print(f"step {k + 1} {action}: Failed at state {culprit} ({reason})")
                return EXIT_FAILED
            print(f"step {k + 1} {action}: " + ", ".join(f"{len(s.structure.worlds)} worlds" for s in nxt))
            if args.dot_dir:
                _write_dots(nxt, args.dot_dir, f"step{k + 1}")
            bs = nxt
    else:
        final = run_plan(theory, plan, bs, args.compress)
        if final.failed:
            for k, action, nxt, culprit in trace_plan(theory, plan, bs, args.compress):
                if nxt.failed:
                    s = bs.states[culprit]
                    reason = explain_inexecutable(theory, action, s) or "not executable"
                    print(f"Failed: step {k + 1} {action} at state {culprit} ({reason})")
                bs = nxt
            return EXIT_FAILED
        bs = final
    _info(args, f"{len(bs)} final states")
    if args.out != "text" or args.show:
        _emit_states(bs, args, "final")
    elif args.dot_dir and not args.trace:
        _write_dots(bs, args.dot_dir, "final")
    return EXIT_OK


def why_false(M, w: int, phi: Formula, want: bool = True, depth: int = 0) -> list[str]:
    """A path of subformulas explaining why phi does not have value `want` at w."""
    pad = "  " * depth
    verdict = "fails" if want else "holds"
    here = f"{pad}s{w}: {format_formula(phi, M.agents)} {verdict}"
    if isinstance(phi, Not):
        return why_false(M, w, phi.arg, not want, depth)
    if isinstance(phi, (And, Or)):
        # And that should hold / Or that should not: one bad side suffices
        bad_side = want == isinstance(phi, And)
        if bad_side:
            for part in (phi.left, phi.right):
                if M.holds_at(w, part) != want:
                    return [here] + why_false(M, w, part, want, depth + 1)
        return [here]
    if want and isinstance(phi, B):
        for v in M.successors(phi.agent, w):
            if not M.holds_at(v, phi.arg):
                return [here, f"{pad}  via {phi.agent} to s{v}"] + why_false(M, v, phi.arg, True, depth + 1)
    if want and isinstance(phi, E):
        group = sorted(phi.group) if phi.group is not None else list(M.agents)
        for a in group:
            for v in M.successors(a, w):
                if not M.holds_at(v, phi.arg):
                    return [here, f"{pad}  via {a} to s{v}"] + why_false(M, v, phi.arg, True, depth + 1)
    if want and isinstance(phi, C):
        if not M.holds_at(w, phi.arg):
            return [here] + why_false(M, w, phi.arg, True, depth + 1)
        group = sorted(phi.group) if phi.group is not None else list(M.agents)
        parent = {w: None}
        frontier = [w]
        while frontier:
            nxt = []
            for u in frontier:
                for a in group:
                    for v in M.successors(a, u):
                        if v in parent:
                            continue
                        parent[v] = (u, a)
                        nxt.append(v)
                        if not M.holds_at(v, phi.arg):
                            hops, x = [], v
                            while parent[x] is not None:
                                u0, a0 = parent[x]
                                hops.append(f"{a0} to s{x}")
                                x = u0
                            path = ", ".join(reversed(hops))
                            return [here, f"{pad}  via {path}"] + why_false(M, v, phi.arg, True, depth + 1)
            frontier = nxt
    return [here]


def _load_queries(args, theory: Theory):
    text = args.query
    p = resolve(text)
    if not isinstance(p, str) or os.path.exists(p):
        with open(p, encoding="utf-8") as fh:
            return parse_queries(fh.read(), theory.signature)
    return [parse_query(text, theory.signature)]


def cmd_query(args) -> int:
    theory = _theory(args)
    queries = _load_queries(args, theory)
    bs = initial_bstate(theory, args)
    for q in queries:
        final = run_plan(theory, q.plan, bs, args.compress)
        if final.failed:
            print(f"false  {format_query(q, theory.agents)}  (plan fails)")
            continue
        bad = [s for s in final if not satisfies(s, q.goal)]
        print(f"{'false' if bad else 'true '}  {format_query(q, theory.agents)}")
        if bad and args.explain:
            witness = bad[0]
            k = final.states.index(witness)
            print(f"  witness: final state {k} (designated s{witness.real})")
            for line in why_false(witness.structure, witness.real, q.goal):
                print("    " + line)
    return EXIT_OK


def cmd_repl(args) -> int:
    from .repl import Repl, Session

    theory = _theory(args)
    Repl(Session(theory, initial_bstate(theory, args))).cmdloop()
    return EXIT_OK


def _corpus_states(theory: Theory, initial: BState, depth: int, cap: int):
    """States reachable from the initial b-state in at most `depth` steps."""
    seen, frontier = list(initial), list(initial)
    for _ in range(depth):
        nxt = []
        for s in frontier:
            for a in theory.actions:
                try:
                    nxt.extend(step(theory, a, s))
                except MapkitError:
                    continue
                if len(seen) + len(nxt) >= cap:
                    return seen + nxt[: cap - len(seen)]
        seen += nxt
        frontier = nxt
    return seen


def cmd_crosscheck(args) -> int:
    from .randomized import random_instance
    from .update import cross_check

    theory = _theory(args)
    started = time.perf_counter()
    tally = {"pass": 0, "fail": 0, "skipped": 0}
    failures = []
    try:
        initial = initial_bstate(theory, args)
        states = _corpus_states(theory, initial, args.depth, args.max_states)
    except MapkitError as exc:
        print(f"corpus: no initial state ({exc}); running random cases only")
        states = []
    for k, s in enumerate(states):
        for a in theory.actions:
            try:
                ok = cross_check(theory, a, s)
            except UnsupportedShapeError:
                tally["skipped"] += 1
                continue
            except MapkitError:
                tally["skipped"] += 1
                continue
            tally["pass" if ok else "fail"] += 1
            if not ok:
                failures.append(f"corpus state {k}, action {a}")
    print(f"corpus: {len(states)} states x {len(theory.actions)} actions: "
          f"{tally['pass']} pass, {tally['fail']} fail, {tally['skipped']} skipped")
    rng = random.Random(args.seed)
    rt = {"pass": 0, "fail": 0, "unsupported": 0, "invalid": 0}
    for k in range(args.cases):
        action = "wsn"[k % 3]
        sensed = 2 if (action == "s" and k % 10 == 4) else 1
        try:
            inst = random_instance(rng, action, sensed=sensed, n_fluents=3)
            ok = cross_check(inst.theory, action, inst.state)
        except UnsupportedShapeError:
            rt["unsupported"] += 1
            continue
        except MapkitError:
            rt["invalid"] += 1
            continue
        rt["pass" if ok else "fail"] += 1
        if not ok:
            failures.append(f"random case {k}")
    print(f"random: {args.cases} cases (seed {args.seed}): "
          f"{rt['pass']} pass, {rt['fail']} fail, skipped: {rt['unsupported']} unsupported-shape, "
          f"{rt['invalid']} invalid")
    print(f"time: {time.perf_counter() - started:.2f}s")
    if failures:
        for f in failures:
            print(f"MISMATCH {f}")
        print(f"reproduce with: --cases {args.cases} --seed {args.seed}")
        return EXIT_MISMATCH
    return EXIT_OK


# --- argument parsing ------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2, which is reserved for semantic errors here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mapkit", description="Multi-agent epistemic action theories.")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, outputs=True):
        sp.add_argument("file", help="theory file (.mad) or corpus:NAME")
        sp.add_argument("--cwa", action="store_true", help="apply the closed-world completion")
        sp.add_argument("--state", help="explicit initial b-state (JSON state document)")
        sp.add_argument("--point", type=int, help="keep only the initial state pointed at this world")
        if outputs:
            sp.add_argument("--out", choices=("text", "json", "dot"), default="text")
            sp.add_argument("--dot-dir", help="also write one DOT file per state here")

    sp = sub.add_parser("check", help="parse and validate a theory")
    sp.add_argument("file")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("init", help="generate the initial b-state")
    common(sp)
    sp.set_defaults(func=cmd_init)

    sp = sub.add_parser("exec", help="execute a plan")
    common(sp)
    sp.add_argument("plan", help='actions separated by ";" or "[]"')
    sp.add_argument("--trace", action="store_true", help="print world counts after each step")
    sp.add_argument("--compress", action="store_true", help="bisimulation-contract after each step")
    sp.add_argument("--show", action="store_true", help="print the final states")
    sp.set_defaults(func=cmd_exec)

    sp = sub.add_parser("query", help="decide 'phi after plan' queries")
    common(sp, outputs=False)
    sp.add_argument("query", help="inline query or a .maq file")
    sp.add_argument("--explain", action="store_true", help="show a witness when false")
    sp.add_argument("--compress", action="store_true")
    sp.set_defaults(func=cmd_query)

    sp = sub.add_parser("repl", help="interactive what-if session")
    common(sp, outputs=False)
    sp.set_defaults(func=cmd_repl)

    sp = sub.add_parser("crosscheck", help="compare direct steps with update models")
    common(sp, outputs=False)
    sp.add_argument("--cases", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--depth", type=int, default=2, help="corpus exploration depth")
    sp.add_argument("--max-states", type=int, default=60)
    sp.set_defaults(func=cmd_crosscheck)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ParseError, ArgumentError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        for issue in exc.report.errors:
            print(f"error: {issue}", file=sys.stderr)
        return EXIT_SEMANTIC
    except MapkitError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC


if __name__ == "__main__":
    sys.exit(main())
