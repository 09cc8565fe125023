"""Iterative refinement: build a tree per covered location, generate
configurations from its weakest paths, rerun, rebuild the trees that break.
"""

from __future__ import annotations

import logging
import re
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .dtree import DecisionTree, TreePath, build_tree, rank_paths, test_tree
from .formula import Interaction, canonicalize, equivalent, from_tree
from .runner import CoverageCache, Runner, run_configs
from .space import ConfigSpace, Configuration, as_rng, one_way_covering

log = logging.getLogger(__name__)

# extra covering-array draws for a path whose first draw was all cached
_PATH_RETRIES = 2


def location_key(loc: str):
    """Natural sort key, so L2 sorts before L10."""
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", loc)]


@dataclass
class EngineParams:
    max_explore_iters: int = 16
    min_new_configs: int = 2
    seed: int | None = 0
    config_budget: int | None = None
    initial_configs: Sequence[Configuration] = ()
    jobs: int = 1

    def __post_init__(self):
        if self.max_explore_iters < 1:
            raise ValueError("max_explore_iters must be >= 1")
        if self.min_new_configs < 1:
            raise ValueError("min_new_configs must be >= 1")
        if self.config_budget is not None and self.config_budget < 1:
            raise ValueError("config_budget must be >= 1")

    def as_dict(self) -> dict:
        return {
            "max_explore_iters": self.max_explore_iters,
            "min_new_configs": self.min_new_configs,
            "seed": self.seed,
            "config_budget": self.config_budget,
            "initial_configs": len(self.initial_configs),
        }


@dataclass
class IterationRecord:
    iteration: int
    configs: int
    explore: bool
    rebuilt: list[str]
    trees: dict[str, DecisionTree]


@dataclass
class RunState:
    space: ConfigSpace
    cache: CoverageCache
    trees: dict[str, DecisionTree] = field(default_factory=dict)
    explore_iters: int = 0
    log: list[IterationRecord] = field(default_factory=list)
    budget_exhausted: bool = False
    wall_time: float = 0.0
    _interactions: dict | None = None

    @property
    def configs(self) -> int:
        return self.cache.executions

    @property
    def iterations(self) -> int:
        return len(self.log)

    def interactions(self) -> dict[str, Interaction]:
        if self._interactions is None:
            self._interactions = post_process(self.trees, self.space)
        return self._interactions

    def found_at(self) -> dict[str, tuple[int, int]]:
        """Per location: (iteration, configs) from which its final formula never changed meaning."""
        finals = self.interactions()
        out = {}
        for loc, final in finals.items():
            verdict: dict[int, bool] = {}
            found = None
            for rec in reversed(self.log):
                tree = rec.trees.get(loc)
                if tree is None:
                    break
                key = id(tree)
                if key not in verdict:
                    verdict[key] = equivalent(from_tree(tree), final, self.space)
                if not verdict[key]:
                    break
                found = rec
            if found is not None:
                out[loc] = (found.iteration, found.configs)
        return out


def select_paths(tree: DecisionTree, explore: bool, seed=None) -> list[TreePath]:
    """Ranked paths; in explore mode one uniformly drawn path is moved to the end."""
    rng = as_rng(seed)
    ranked = rank_paths(tree, rng)
    if not explore:
        return ranked
    pick = ranked[int(rng.integers(len(ranked)))]
    return [p for p in ranked if p != pick] + [pick]


def gen_new_configs(paths: Iterable[TreePath], space: ConfigSpace, cache: CoverageCache,
                    min_new: int, seed=None) -> list[Configuration]:
    """Uncached configurations satisfying the given paths, weakest path first.

    For each path a 1-way covering array over the options the path leaves
    free is drawn with the path's settings fixed.  Stops once ``min_new``
    configurations are collected.
    """
    rng = as_rng(seed)
    new: list[Configuration] = []
    seen: set[Configuration] = set()
    for p in paths:
        fixed = dict(p.settings)
        for _ in range(1 + _PATH_RETRIES):
            added = 0
            for cfg in one_way_covering(space, rng, fixed):
                if cfg in seen or cache.known(cfg):
                    continue
                seen.add(cfg)
                new.append(cfg)
                added += 1
            if added or len(fixed) == len(space.options):
                break
        if len(new) >= min_new:
            break
    return new


def post_process(trees: dict[str, DecisionTree], space: ConfigSpace) -> dict[str, Interaction]:
    return {loc: canonicalize(from_tree(trees[loc]), space) for loc in sorted(trees, key=location_key)}


def run_engine(space: ConfigSpace, runner: Runner, params: EngineParams | None = None) -> RunState:
    params = params or EngineParams()
    rng = as_rng(params.seed)
    cache = CoverageCache()
    state = RunState(space, cache)
    started = time.perf_counter()

    def execute(configs: list[Configuration]) -> None:
        if params.config_budget is not None:
            left = params.config_budget - cache.executions
            if len(configs) > left:
                configs = configs[:max(left, 0)]
                state.budget_exhausted = True
        if configs:
            run_configs(runner, cache, configs, jobs=params.jobs)

    initial = []
    for cfg in params.initial_configs:
        space.check(cfg)
        initial.append(tuple(cfg))
    execute(initial + one_way_covering(space, rng))

    trees = state.trees
    iteration = 0
    while state.explore_iters < params.max_explore_iters and not state.budget_exhausted:
        iteration += 1
        state.explore_iters += 1
        explore = state.explore_iters > 1
        rebuilt: list[str] = []
        done: set[str] = set()
        while not state.budget_exhausted:
            pending = sorted(cache.locations() - done, key=location_key)
            if not pending:
                break
            for loc in pending:
                done.add(loc)
                hits, misses = cache.partition(loc)
                tree = trees.get(loc)
                need_rebuild = tree is None or not test_tree(tree, hits, misses)
                if not (need_rebuild or explore):
                    continue
                if need_rebuild:
                    state.explore_iters = 0
                    tree = trees[loc] = build_tree(hits, misses, space)
                    rebuilt.append(loc)
                paths = select_paths(tree, explore, rng)
                if explore:
                    # the random path goes first, or it would never be reached
                    paths = paths[-1:] + paths[:-1]
                new = gen_new_configs(paths, space, cache, params.min_new_configs, rng)
                execute(new)
                if state.budget_exhausted:
                    break
        state.log.append(IterationRecord(iteration, cache.executions, explore, rebuilt, dict(trees)))
        log.debug("iteration %d: %d configs, rebuilt %s", iteration, cache.executions, rebuilt)

    # a budget stop can leave trees behind the cache; bring them up to date
    for loc in sorted(cache.locations(), key=location_key):
        hits, misses = cache.partition(loc)
        if loc not in trees or not test_tree(trees[loc], hits, misses):
            trees[loc] = build_tree(hits, misses, space)
    last = state.log[-1].trees if state.log else {}
    changed = [loc for loc in trees if last.get(loc) is not trees[loc]]
    if changed:
        state.log.append(IterationRecord(iteration + 1, cache.executions, False, changed, dict(trees)))
    state.wall_time = time.perf_counter() - started
    return state
