"""Random spaces, formulas and synthetic programs for property checks and benchmarks."""

from __future__ import annotations

import numpy as np

from .formula import Atom, Interaction, conj, disj
from .space import ConfigSpace, OptionDef, as_rng


def random_space(seed=None, max_options: int = 8, max_size: int = 4096,
                 min_options: int = 1, max_domain: int = 4, min_size: int = 1) -> ConfigSpace:
    rng = as_rng(seed)
    for _ in range(1000):
        k = int(rng.integers(min_options, max_options + 1))
        doms = [int(rng.integers(2, max_domain + 1)) for _ in range(k)]
        size = int(np.prod(doms))
        if min_size <= size <= max_size:
            break
    else:
        raise ValueError("could not draw a space with the requested size bounds")
    return ConfigSpace(tuple(OptionDef(f"o{i}", tuple(str(v) for v in range(d))) for i, d in enumerate(doms)))


def random_atom(space: ConfigSpace, rng, option: str | None = None, p_set: float = 0.2) -> Atom:
    name = option or space.names[int(rng.integers(len(space)))]
    dom = space.domain(name)
    if len(dom) > 2 and rng.random() < p_set:
        k = int(rng.integers(2, len(dom)))
        vals = rng.choice(len(dom), size=k, replace=False)
    else:
        vals = [int(rng.integers(len(dom)))]
    return Atom(name, [dom[i] for i in vals])


def random_formula(space: ConfigSpace, seed=None, max_depth: int = 3, max_args: int = 3) -> Interaction:
    """Arbitrary nesting of AND/OR over random atoms (may be constant after simplification)."""
    rng = as_rng(seed)

    def gen(depth):
        if depth == 0 or rng.random() < 0.3:
            return random_atom(space, rng)
        args = [gen(depth - 1) for _ in range(int(rng.integers(2, max_args + 1)))]
        return conj(*args) if rng.random() < 0.5 else disj(*args)

    return gen(max_depth)


def random_interaction(space: ConfigSpace, seed=None, max_terms: int = 3, max_atoms: int = 3) -> Interaction:
    """An interaction shaped like real ones: a few short conjunctive terms."""
    rng = as_rng(seed)
    terms = []
    for _ in range(int(rng.integers(1, max_terms + 1))):
        k = int(rng.integers(1, min(max_atoms, len(space)) + 1))
        opts = rng.choice(len(space), size=k, replace=False)
        terms.append(conj(*(random_atom(space, rng, space.names[j]) for j in sorted(opts))))
    return disj(*terms)


def random_program(seed=None, max_options: int = 8, max_size: int = 4096, min_size: int = 256,
                   locations: tuple[int, int] = (3, 7)) -> tuple[ConfigSpace, dict[str, Interaction]]:
    rng = as_rng(seed)
    space = random_space(rng, max_options=max_options, max_size=max_size, min_options=3, min_size=min_size)
    n = int(rng.integers(locations[0], locations[1] + 1))
    spec = {f"L{i}": random_interaction(space, rng) for i in range(n)}
    return space, spec
