"""Exact multi-way decision trees over configuration options.

Trees are grown without pruning until every subsample is pure, so the tree
classifies its whole training sample correctly.  Splits are chosen by gain
ratio; ties go to the option declared first in the space.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Union

import numpy as np

from . import _accel
from .space import ConfigSpace, Configuration, as_rng

log = logging.getLogger(__name__)

_EPS = 1e-12


@dataclass(frozen=True)
class Leaf:
    hit: bool
    support: int


@dataclass(frozen=True)
class Node:
    option: int
    children: tuple


TreeNode = Union[Leaf, Node]


@dataclass(frozen=True)
class TreePath:
    settings: tuple[tuple[str, str], ...]
    hit: bool
    support: int
    index: int = 0

    @property
    def length(self) -> int:
        return len(self.settings)

    @property
    def leaf_class(self) -> str:
        return "hit" if self.hit else "miss"


class DecisionTree:
    def __init__(self, root: TreeNode, space: ConfigSpace):
        self.root = root
        self.space = space

    def __eq__(self, other):
        return isinstance(other, DecisionTree) and self.root == other.root and self.space == other.space

    def __hash__(self):
        return hash(self.root)

    def __repr__(self):
        return f"DecisionTree({self.dump()!r})"

    def classify(self, cfg: Configuration) -> bool:
        """True when ``cfg`` lands on a hit leaf."""
        node = self.root
        while isinstance(node, Node):
            node = node.children[self.space.value_index(self.space.names[node.option], cfg[node.option])]
        return node.hit

    def classify_many(self, X: np.ndarray) -> np.ndarray:
        return _accel.match_cubes(X, self.hit_masks)

    @cached_property
    def _paths(self) -> tuple[TreePath, ...]:
        out: list[TreePath] = []
        names = self.space.names

        def walk(node, settings):
            if isinstance(node, Leaf):
                out.append(TreePath(tuple(settings), node.hit, node.support, len(out)))
                return
            dom = self.space.options[node.option].domain
            for v, child in zip(dom, node.children):
                walk(child, settings + [(names[node.option], v)])

        walk(self.root, [])
        return tuple(out)

    def paths(self) -> list[TreePath]:
        return list(self._paths)

    @cached_property
    def hit_masks(self) -> np.ndarray:
        full = [(1 << len(o.domain)) - 1 for o in self.space.options]
        rows = []
        for p in self._paths:
            if p.hit:
                row = list(full)
                for name, value in p.settings:
                    row[self.space.index_of(name)] = 1 << self.space.value_index(name, value)
                rows.append(row)
        return np.asarray(rows, dtype=np.int64).reshape(len(rows), len(full))

    def dump(self) -> str:
        """Indented text, one edge per line, leaves as ``HIT(n)``/``MISS(n)``."""
        lines: list[str] = []

        def leaf(n: Leaf) -> str:
            return f"{'HIT' if n.hit else 'MISS'}({n.support})"

        def walk(node, depth):
            opt = self.space.options[node.option]
            for v, child in zip(opt.domain, node.children):
                edge = "  " * depth + f"{opt.name}={v} ->"
                if isinstance(child, Leaf):
                    lines.append(f"{edge} {leaf(child)}")
                else:
                    lines.append(edge)
                    walk(child, depth + 1)

        if isinstance(self.root, Leaf):
            return leaf(self.root)
        walk(self.root, 0)
        return "\n".join(lines)


def _entropy(pos, total):
    pos = np.asarray(pos, dtype=float)
    total = np.asarray(total, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(total > 0, pos / np.where(total > 0, total, 1), 0.0)
        q = 1.0 - p
        h = -(np.where(p > 0, p * np.log2(np.where(p > 0, p, 1)), 0.0)
              + np.where(q > 0, q * np.log2(np.where(q > 0, q, 1)), 0.0))
    return h


def _gain_ratios(counts: np.ndarray, n: int, pos: int) -> tuple[np.ndarray, np.ndarray]:
    """Gain ratio per option from (option, value, label) counts.

    Returns ``(ratios, partitions)``; options that put the whole sample under
    one value do not partition it and get ratio 0.
    """
    tot = counts.sum(axis=2)
    hits = counts[:, :, 1]
    frac = tot / n
    base = float(_entropy(pos, n))
    cond = (frac * _entropy(hits, tot)).sum(axis=1)
    gain = np.maximum(base - cond, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        split = -np.where(frac > 0, frac * np.log2(np.where(frac > 0, frac, 1)), 0.0).sum(axis=1)
    partitions = (tot > 0).sum(axis=1) >= 2
    ratios = np.where(partitions & (split > _EPS), gain / np.where(split > _EPS, split, 1.0), 0.0)
    return ratios, partitions


def split_score(hits: Iterable[Configuration], misses: Iterable[Configuration],
                option: str, space: ConfigSpace) -> float:
    """Information gain of splitting on ``option`` divided by its split information."""
    hits, misses = list(hits), list(misses)
    n = len(hits) + len(misses)
    if n == 0:
        raise ValueError("empty sample")
    j = space.index_of(option)
    X = space.encode(hits + misses)[:, [j]]
    y = np.r_[np.ones(len(hits), dtype=np.int64), np.zeros(len(misses), dtype=np.int64)]
    counts = _accel.label_counts(X, y, len(space.options[j].domain))
    ratios, _ = _gain_ratios(counts, n, len(hits))
    return float(ratios[0])


def _split_contradictions(hits, misses):
    hits, misses = set(hits), set(misses)
    both = hits & misses
    if both:
        log.warning("%d configuration(s) both hit and miss; treating them as misses", len(both))
        hits -= both
    return hits, misses


def build_tree(hits: Iterable[Configuration], misses: Iterable[Configuration],
               space: ConfigSpace) -> DecisionTree:
    """Grow an unpruned tree that separates ``hits`` from ``misses``."""
    hits, misses = _split_contradictions(hits, misses)
    if not hits and not misses:
        raise ValueError("cannot build a tree from an empty sample")
    sample = sorted(hits) + sorted(misses)
    X = space.encode(sample)
    y = np.r_[np.ones(len(hits), dtype=np.int64), np.zeros(len(misses), dtype=np.int64)]
    radices = space.radices
    maxd = int(radices.max())

    def grow(idx: np.ndarray, avail: list[int], parent_hit: bool) -> TreeNode:
        n = len(idx)
        if n == 0:
            return Leaf(parent_hit, 0)
        pos = int(y[idx].sum())
        if pos == n:
            return Leaf(True, n)
        if pos == 0:
            return Leaf(False, n)
        majority = pos > n - pos
        if not avail:
            return Leaf(majority, n)
        sub = X[np.ix_(idx, avail)]
        counts = _accel.label_counts(sub, y[idx], maxd)
        ratios, parts = _gain_ratios(counts, n, pos)
        if not parts.any():
            return Leaf(majority, n)
        ratios = np.where(parts, ratios, -1.0)
        best = int(np.flatnonzero(ratios >= ratios.max() - _EPS)[0])
        j = avail[best]
        rest = avail[:best] + avail[best + 1:]
        col = X[idx, j]
        children = tuple(grow(idx[col == v], rest, majority) for v in range(int(radices[j])))
        return Node(j, children)

    root = grow(np.arange(len(sample)), list(range(len(space.options))), False)
    return DecisionTree(root, space)


def test_tree(tree: DecisionTree, hits: Iterable[Configuration], misses: Iterable[Configuration]) -> bool:
    """True when the tree classifies every hit as hit and every miss as miss."""
    space = tree.space
    hits, misses = list(hits), list(misses)
    if hits and not tree.classify_many(space.encode(hits)).all():
        return False
    if misses and tree.classify_many(space.encode(misses)).any():
        return False
    return True


test_tree.__test__ = False  # keep pytest from collecting it


def rank_paths(tree: DecisionTree, seed=None) -> list[TreePath]:
    """Fewest supporting configurations first, then longest; remaining ties seeded."""
    paths = tree.paths()
    if seed is None:
        tie = list(range(len(paths)))
    else:
        tie = as_rng(seed).permutation(len(paths)).tolist()
    order = sorted(range(len(paths)), key=lambda i: (paths[i].support, -paths[i].length, tie[i]))
    return [paths[i] for i in order]
