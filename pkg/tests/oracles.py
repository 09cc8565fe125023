"""Independent reference computations used by several test modules."""

import itertools

from gentree.formula import evaluate
from gentree.space import ConfigSpace


def min_cover_size(interactions: dict, space: ConfigSpace) -> int:
    """Smallest number of configurations that together satisfy every interaction.

    Exhaustive over the distinct satisfaction patterns of the whole space.
    """
    X = space.index_matrix()
    locs = list(interactions)
    cols = [evaluate(interactions[l], space, X) for l in locs]
    patterns = set()
    for row in zip(*cols):
        patterns.add(sum(1 << i for i, b in enumerate(row) if b))
    reachable = 0
    for p in patterns:
        reachable |= p
    patterns = sorted(patterns, reverse=True)
    for k in range(1, len(locs) + 1):
        for combo in itertools.combinations(patterns, k):
            acc = 0
            for p in combo:
                acc |= p
            if acc == reachable:
                return k
    return 0 if reachable == 0 else len(locs)
