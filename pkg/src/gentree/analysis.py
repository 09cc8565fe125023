"""Ground truth, accuracy comparison, random baseline, minimal covering
configurations and run statistics."""

from __future__ import annotations

import io
import statistics
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import _accel
from .dtree import build_tree
from .engine import RunState, location_key
from .formula import (FALSE, FORMS, Interaction, ProjectionTooLarge, classify_form, conj, equivalent,
                      evaluate, from_tree, length, minimize_table, render_formula, satisfying_assignment)
from .runner import CoverageCache, Runner, SpecRunner, run_configs
from .space import ConfigSpace, Configuration, as_rng

DEFAULT_CAP = 1 << 22


class CapExceeded(ValueError):
    pass


@dataclass
class GroundTruth:
    space: ConfigSpace
    covering: dict[str, np.ndarray]          # loc -> bool per configuration, lexicographic order
    interactions: dict[str, Interaction]


def _coverage_tables(space: ConfigSpace, runner: Runner, jobs: int) -> dict[str, np.ndarray]:
    size = space.size
    if isinstance(runner, SpecRunner):
        X = space.index_matrix()
        return {loc: col for loc, col in runner.execute_many(X).items() if col.any()}
    cache = CoverageCache()
    tables: dict[str, np.ndarray] = {}
    chunk = 1 << 14
    for start in range(0, size, chunk):
        configs = space.decode(space.index_matrix(start, min(size, start + chunk)))
        covs = run_configs(runner, cache, configs, jobs=jobs)
        for i, cfg in enumerate(configs):
            if cfg not in covs:
                raise CapExceeded(f"configuration failed during exhaustive run: {cache.errors.get(cfg)}")
            for loc in covs[cfg]:
                if loc not in tables:
                    tables[loc] = np.zeros(size, dtype=bool)
                tables[loc][start + i] = True
    return tables


def ground_truth(space: ConfigSpace, runner: Runner, cap: int = DEFAULT_CAP, jobs: int = 1) -> GroundTruth:
    """Run every configuration and characterise each location exactly."""
    if space.size > cap:
        raise CapExceeded(f"space has {space.size} configurations, cap is {cap}")
    tables = _coverage_tables(space, runner, jobs)
    shape = tuple(int(r) for r in space.radices)
    inter = {loc: minimize_table(tables[loc].reshape(shape), space, space.names)
             for loc in sorted(tables, key=location_key)}
    return GroundTruth(space, {loc: tables[loc] for loc in inter}, inter)


def compare(inferred: Mapping[str, Interaction], truth, space: ConfigSpace) -> dict:
    """Exact-match count against the ground truth and the coverage difference."""
    target = truth.interactions if isinstance(truth, GroundTruth) else dict(truth)
    exact = [loc for loc, f in target.items() if loc in inferred and equivalent(inferred[loc], f, space)]
    wrong = sorted((loc for loc in target if loc in inferred and loc not in exact), key=location_key)
    return {
        "exact": len(exact),
        "total": len(target),
        "delta_cov": len(inferred) - len(target),
        "inexact": wrong,
        "missing": sorted((loc for loc in target if loc not in inferred), key=location_key),
        "extra": sorted((loc for loc in inferred if loc not in target), key=location_key),
    }


def sample_configs(space: ConfigSpace, n: int, seed=None) -> list[Configuration]:
    """``n`` distinct uniformly drawn configurations (all of them if ``n >= |space|``)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = as_rng(seed)
    size = space.size
    n = min(n, size)
    if size < (1 << 62):
        if size <= (1 << 24):
            flat = rng.choice(size, size=n, replace=False)
        else:
            picked: dict[int, None] = {}
            while len(picked) < n:
                picked.setdefault(int(rng.integers(size)), None)
            flat = np.fromiter(picked, dtype=np.int64)
        return space.decode(_accel.decode(flat, space.radices))
    seen: dict[Configuration, None] = {}
    while len(seen) < n:
        row = [int(rng.integers(d)) for d in space.radices]
        seen.setdefault(space.decode(np.array([row]))[0], None)
    return list(seen)


def random_baseline(space: ConfigSpace, runner: Runner, n_configs: int, seed=None,
                    jobs: int = 1) -> dict[str, Interaction]:
    """Trees learned from ``n_configs`` random configurations, without refinement."""
    from .engine import post_process

    cache = CoverageCache()
    run_configs(runner, cache, sample_configs(space, n_configs, seed), jobs=jobs)
    trees = {}
    for loc in sorted(cache.locations(), key=location_key):
        hits, misses = cache.partition(loc)
        trees[loc] = build_tree(hits, misses, space)
    return post_process(trees, space)


@dataclass
class CoverResult:
    configs: list[Configuration]
    skipped: list[str]


def _satisfiable(f: Interaction, space: ConfigSpace) -> bool:
    try:
        return satisfying_assignment(f, space) is not None
    except ProjectionTooLarge:
        return False


def min_covering_configs(interactions: Mapping[str, Interaction], space: ConfigSpace) -> CoverResult:
    """Greedy small set of configurations that together satisfy every interaction."""
    groups: list[tuple[Interaction, list[str]]] = []
    for loc in sorted(interactions, key=location_key):
        f = interactions[loc]
        for g in groups:
            if equivalent(g[0], f, space):
                g[1].append(loc)
                break
        else:
            groups.append((f, [loc]))
    skipped = []
    todo = []
    for f, locs in groups:
        if f == FALSE or not _satisfiable(f, space):
            skipped.extend(locs)
        else:
            todo.append((f, locs))
    todo.sort(key=lambda g: -len(g[1]))      # stable: ties keep location order

    configs: list[Configuration] = []
    while todo:
        acc = todo[0][0]
        for f, _ in todo[1:]:
            cand = conj(acc, f)
            if _satisfiable(cand, space):
                acc = cand
        assignment = satisfying_assignment(acc, space)
        cfg = tuple(assignment.get(n, o.domain[0]) for n, o in zip(space.names, space.options))
        configs.append(cfg)
        X = space.encode([cfg])
        todo = [(f, locs) for f, locs in todo if not evaluate(f, space, X)[0]]
    return CoverResult(configs, sorted(skipped, key=location_key))


@dataclass
class RunReport:
    configs: int = 0
    locations: int = 0
    interactions: int = 0
    forms: dict[str, int] = field(default_factory=lambda: {k: 0 for k in FORMS})
    max_length: int = 0
    median_length: float = 0.0
    exact: int | None = None
    total: int | None = None
    delta_cov: int | None = None
    convergence: list[tuple[int, int, int]] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "configs": self.configs,
            "locations": self.locations,
            "interactions": self.interactions,
            "forms": dict(self.forms),
            "max_length": self.max_length,
            "median_length": self.median_length,
            "exact": self.exact,
            "total": self.total,
            "delta_cov": self.delta_cov,
        }

    def table(self) -> str:
        cols = ["configs", "cov", "single", "conj", "disj", "mix", "total", "max", "median"]
        vals = [self.configs, self.locations, self.forms["single"], self.forms["conj"],
                self.forms["disj"], self.forms["mixed"], self.interactions, self.max_length,
                f"{self.median_length:g}"]
        if self.exact is not None:
            cols += ["exact", "truth", "dcov"]
            vals += [self.exact, self.total, self.delta_cov]
        width = [max(len(c), len(str(v))) for c, v in zip(cols, vals)]
        head = "  ".join(c.rjust(w) for c, w in zip(cols, width))
        row = "  ".join(str(v).rjust(w) for v, w in zip(vals, width))
        return f"{head}\n{row}"

    def convergence_csv(self) -> str:
        buf = io.StringIO()
        buf.write("configs,exact,total\n")
        for c, e, t in self.convergence:
            buf.write(f"{c},{e},{t}\n")
        return buf.getvalue()


def interaction_stats(interactions: Mapping[str, Interaction]) -> tuple[dict[str, int], int, int, float]:
    """Form counts and lengths over the distinct interactions."""
    distinct = {render_formula(f): f for f in interactions.values()}
    forms = {k: 0 for k in FORMS}
    lengths = []
    for f in distinct.values():
        forms[classify_form(f)] += 1
        lengths.append(length(f))
    return forms, len(distinct), max(lengths, default=0), float(statistics.median(lengths)) if lengths else 0.0


def report(state: RunState | None, truth: GroundTruth | None = None) -> RunReport:
    rep = RunReport()
    if state is None:
        return rep
    inter = state.interactions()
    rep.configs = state.configs
    rep.locations = len(inter)
    rep.forms, rep.interactions, rep.max_length, rep.median_length = interaction_stats(inter)
    if truth is not None:
        cmp = compare(inter, truth, state.space)
        rep.exact, rep.total, rep.delta_cov = cmp["exact"], cmp["total"], cmp["delta_cov"]
        verdict: dict[int, bool] = {}
        for rec in state.log:
            exact = 0
            for loc, tree in rec.trees.items():
                if loc not in truth.interactions:
                    continue
                if id(tree) not in verdict:
                    verdict[id(tree)] = equivalent(from_tree(tree), truth.interactions[loc], state.space)
                exact += verdict[id(tree)]
            rep.convergence.append((rec.configs, exact, len(truth.interactions)))
    return rep


def iteration_csv(state: RunState) -> str:
    buf = io.StringIO()
    buf.write("iteration,configs,explore,rebuilt,locations\n")
    for rec in state.log:
        buf.write(f"{rec.iteration},{rec.configs},{int(rec.explore)},{len(rec.rebuilt)},{len(rec.trees)}\n")
    return buf.getvalue()
