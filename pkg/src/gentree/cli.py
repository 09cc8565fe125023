"""Command-line interface.

Exit status: 0 success, 1 usage error, 2 runner/backend failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import analysis
from .engine import EngineParams, run_engine
from .formula import FormulaError, equivalent, parse_formula, render_formula
from .runner import BackendError, RunnerError, RunnerSpec, parse_config_line, rerun_check
from .space import ConfigSpace, SpaceError, load_space, parse_space

log = logging.getLogger("gentree")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser, runner: bool = True) -> None:
    if runner:
        p.add_argument("--space", metavar="FILE", help="space file (optional for builtin runners)")
        p.add_argument("--runner", metavar="SPEC", required=True,
                       help="builtin:NAME, oracle:FILE, cmd:'TEMPLATE' or spec:FILE")
        p.add_argument("--timeout", type=float, default=60.0, help="seconds per execution (cmd runner)")
        p.add_argument("--jobs", type=int, default=1, help="parallel executions")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", metavar="PATH", help="write the result JSON here")
    p.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gentree", description="Learn configuration interactions from coverage.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="iterative interaction inference")
    _common(p)
    p.add_argument("--max-explore", type=int, default=EngineParams.max_explore_iters)
    p.add_argument("--min-new", type=int, default=EngineParams.min_new_configs)
    p.add_argument("--budget", type=int, help="maximum backend executions")
    p.add_argument("--initial-configs", metavar="FILE", help="one 'v1,...,vn' configuration per line")
    p.add_argument("--rerun", type=int, metavar="K", help="rerun every configuration K times, report unstable ones")
    p.add_argument("--truth", metavar="FILE", help="truth JSON for exact counts and convergence")

    p = sub.add_parser("truth", help="exhaustive ground truth")
    _common(p)
    p.add_argument("--cap", type=int, default=analysis.DEFAULT_CAP)

    p = sub.add_parser("compare", help="compare inferred interactions with ground truth")
    _common(p, runner=False)
    p.add_argument("--inferred", required=True, metavar="FILE")
    p.add_argument("--truth", required=True, metavar="FILE")

    p = sub.add_parser("baseline", help="interactions from random configurations only")
    _common(p)
    p.add_argument("--n", type=int, required=True, help="number of random configurations")
    p.add_argument("--truth", metavar="FILE")

    p = sub.add_parser("mincov", help="small configuration set satisfying all interactions")
    _common(p, runner=False)
    p.add_argument("--inferred", required=True, metavar="FILE")

    p = sub.add_parser("demo", help="run the builtin fig2 program end to end")
    _common(p, runner=False)
    p.add_argument("--max-explore", type=int, default=EngineParams.max_explore_iters)
    return parser


# ---------------------------------------------------------------------------

def _space_and_runner(args):
    spec = RunnerSpec.parse(args.runner, args.timeout)
    if spec.kind in ("oracle", "spec") and not Path(spec.target).is_file():
        raise RunnerError(f"runner file not found: {spec.target}")
    if args.space:
        space = load_space(args.space)
    else:
        space = spec.default_space()
        if space is None:
            raise UsageError(f"--space is required for {spec.kind} runners")
    return space, spec.build(space)


def _result(kind: str, space: ConfigSpace, runner: str | None, interactions, **extra) -> dict:
    doc = {
        "kind": kind,
        "space": space.render(),
        "space_fingerprint": space.fingerprint(),
        "runner": runner,
        "locations": {loc: {"formula": render_formula(f)} for loc, f in interactions.items()},
    }
    doc.update(extra)
    return doc


def _write(path: str | None, doc: dict) -> None:
    if path:
        Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _sidecar(path: str, suffix: str) -> Path:
    p = Path(path)
    return p.with_name(p.stem + suffix)


def load_result(path: str) -> tuple[ConfigSpace, dict, dict]:
    """Space, location -> formula, and the raw document of a result JSON."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        space = parse_space(doc["space"])
        if space.fingerprint() != doc["space_fingerprint"]:
            raise UsageError(f"{path}: space fingerprint does not match embedded space")
        inter = {loc: parse_formula(v["formula"], space) for loc, v in doc["locations"].items()}
    except (KeyError, TypeError) as e:
        raise UsageError(f"{path}: not a result file ({e})") from None
    return space, inter, doc


def _load_truth(path: str, space: ConfigSpace) -> analysis.GroundTruth:
    tspace, inter, _ = load_result(path)
    if tspace.fingerprint() != space.fingerprint():
        raise UsageError("truth file was computed for a different space")
    return analysis.GroundTruth(space, {}, inter)


def cmd_run(args) -> int:
    space, runner = _space_and_runner(args)
    initial = []
    if args.initial_configs:
        for line in Path(args.initial_configs).read_text(encoding="utf-8").splitlines():
            if line.strip() and not line.strip().startswith("#"):
                try:
                    initial.append(parse_config_line(line, space))
                except ValueError as e:
                    raise UsageError(f"{args.initial_configs}: {e}") from None
    try:
        params = EngineParams(max_explore_iters=args.max_explore, min_new_configs=args.min_new,
                              seed=args.seed, config_budget=args.budget, initial_configs=initial,
                              jobs=args.jobs)
    except ValueError as e:
        raise UsageError(str(e)) from None
    state = run_engine(space, runner, params)
    inter = state.interactions()
    truth = _load_truth(args.truth, space) if args.truth else None
    rep = analysis.report(state, truth)
    found = state.found_at()
    doc = _result("run", space, args.runner, inter,
                  params=params.as_dict(),
                  totals={"configs": state.configs, "iterations": state.iterations,
                          "budget_exhausted": state.budget_exhausted},
                  report=rep.as_dict())
    for loc, entry in doc["locations"].items():
        entry["tree"] = state.trees[loc].dump()
        entry["iteration_found"], entry["configs_found"] = found.get(loc, (None, None))
    if args.rerun:
        unstable = rerun_check(runner, state.cache.configs(), args.rerun)
        doc["unstable"] = [space.format_config(c) for c in unstable]
        if unstable:
            log.warning("%d configuration(s) produced varying coverage", len(unstable))
    _write(args.out, doc)
    if args.out:
        _sidecar(args.out, ".iterations.csv").write_text(analysis.iteration_csv(state), encoding="utf-8")
        if truth is not None:
            _sidecar(args.out, ".convergence.csv").write_text(rep.convergence_csv(), encoding="utf-8")
    _print_interactions(inter)
    print(rep.table())
    print(f"time: {state.wall_time:.2f}s")
    return 0


def _print_interactions(inter) -> None:
    width = max((len(l) for l in inter), default=0)
    for loc, f in inter.items():
        print(f"{loc.ljust(width)}  {render_formula(f)}")


def cmd_truth(args) -> int:
    space, runner = _space_and_runner(args)
    try:
        gt = analysis.ground_truth(space, runner, cap=args.cap, jobs=args.jobs)
    except analysis.CapExceeded as e:
        raise UsageError(str(e)) from None
    doc = _result("truth", space, args.runner, gt.interactions, totals={"configs": space.size})
    for loc, entry in doc["locations"].items():
        entry["covering"] = int(gt.covering[loc].sum())
    _write(args.out, doc)
    _print_interactions(gt.interactions)
    return 0


def cmd_compare(args) -> int:
    ispace, inferred, _ = load_result(args.inferred)
    tspace, truth, _ = load_result(args.truth)
    if ispace.fingerprint() != tspace.fingerprint():
        raise UsageError("refusing to compare results computed over different spaces")
    res = analysis.compare(inferred, truth, ispace)
    _write(args.out, {"kind": "compare", "space_fingerprint": ispace.fingerprint(), **res})
    print(f"exact {res['exact']}/{res['total']}  delta_cov {res['delta_cov']}")
    for loc in res["inexact"]:
        print(f"  inexact {loc}: {render_formula(inferred[loc])}  (truth {render_formula(truth[loc])})")
    return 0


def cmd_baseline(args) -> int:
    space, runner = _space_and_runner(args)
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    inter = analysis.random_baseline(space, runner, args.n, args.seed, jobs=args.jobs)
    doc = _result("baseline", space, args.runner, inter, totals={"configs": min(args.n, space.size)})
    if args.truth:
        doc["compare"] = analysis.compare(inter, _load_truth(args.truth, space), space)
    _write(args.out, doc)
    _print_interactions(inter)
    if args.truth:
        print(f"exact {doc['compare']['exact']}/{doc['compare']['total']}")
    return 0


def cmd_mincov(args) -> int:
    space, inter, _ = load_result(args.inferred)
    res = analysis.min_covering_configs(inter, space)
    doc = {"kind": "mincov", "space_fingerprint": space.fingerprint(),
           "configs": [",".join(c) for c in res.configs], "skipped": res.skipped}
    _write(args.out, doc)
    for c in res.configs:
        print(space.format_config(c))
    if res.skipped:
        print(f"skipped (unsatisfiable): {', '.join(res.skipped)}")
    return 0


def cmd_demo(args) -> int:
    from .programs import FIG2_SPACE
    from .runner import BuiltinRunner

    runner = BuiltinRunner("fig2")
    truth = analysis.ground_truth(FIG2_SPACE, runner)
    state = run_engine(FIG2_SPACE, runner, EngineParams(seed=args.seed, max_explore_iters=args.max_explore))
    inter = state.interactions()
    rep = analysis.report(state, truth)
    found = state.found_at()
    print(f"{'loc':<4} {'iter':>4} {'configs':>7}  interaction")
    for loc, f in inter.items():
        it, n = found.get(loc, ("-", "-"))
        ok = "" if equivalent(f, truth.interactions[loc], FIG2_SPACE) else "   <- differs from truth"
        print(f"{loc:<4} {it:>4} {n:>7}  {render_formula(f)}{ok}")
    print()
    print(rep.table())
    cover = analysis.min_covering_configs(inter, FIG2_SPACE)
    print(f"\n{len(cover.configs)} configurations cover every location:")
    for c in cover.configs:
        print("  " + FIG2_SPACE.format_config(c))
    doc = _result("run", FIG2_SPACE, "builtin:fig2", inter,
                  totals={"configs": state.configs, "iterations": state.iterations,
                          "budget_exhausted": state.budget_exhausted},
                  report=rep.as_dict())
    _write(args.out, doc)
    return 0


COMMANDS = {"run": cmd_run, "truth": cmd_truth, "compare": cmd_compare,
            "baseline": cmd_baseline, "mincov": cmd_mincov, "demo": cmd_demo}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=getattr(logging, args.log_level), format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (RunnerError, BackendError) as e:
        print(f"gentree: runner failure: {e}", file=sys.stderr)
        return 2
    except (UsageError, SpaceError, FormulaError, ValueError, KeyError, OSError, json.JSONDecodeError) as e:
        print(f"gentree: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
