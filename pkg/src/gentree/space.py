"""Configuration spaces, configurations and 1-way covering arrays."""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import _accel

# A configuration is one value token per option, in option order.
Configuration = tuple[str, ...]

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")
_VALUE_RE = re.compile(r"^[^\s=&|(){},#]+$")
_RESERVED = {"true", "false", "in"}


class SpaceError(ValueError):
    """Malformed space file or inconsistent option definitions."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class OptionDef:
    name: str
    domain: tuple[str, ...]

    def __post_init__(self):
        if not _NAME_RE.match(self.name) or self.name in _RESERVED:
            raise SpaceError(f"invalid option name {self.name!r}")
        if len(self.domain) < 2:
            raise SpaceError(f"option {self.name!r} needs at least two values")
        if len(set(self.domain)) != len(self.domain):
            raise SpaceError(f"option {self.name!r} has duplicate values")
        for v in self.domain:
            if not _VALUE_RE.match(v):
                raise SpaceError(f"invalid value {v!r} for option {self.name!r}")


@dataclass(frozen=True)
class ConfigSpace:
    options: tuple[OptionDef, ...]

    def __post_init__(self):
        names = [o.name for o in self.options]
        if len(set(names)) != len(names):
            raise SpaceError("duplicate option name")
        if not names:
            raise SpaceError("a space needs at least one option")

    @classmethod
    def from_dict(cls, domains: Mapping[str, Sequence[str]]) -> "ConfigSpace":
        return cls(tuple(OptionDef(n, tuple(str(v) for v in vs)) for n, vs in domains.items()))

    @cached_property
    def names(self) -> tuple[str, ...]:
        return tuple(o.name for o in self.options)

    @cached_property
    def _index(self) -> dict[str, int]:
        return {n: i for i, n in enumerate(self.names)}

    @cached_property
    def _value_index(self) -> tuple[dict[str, int], ...]:
        return tuple({v: i for i, v in enumerate(o.domain)} for o in self.options)

    @cached_property
    def radices(self) -> np.ndarray:
        return np.array([len(o.domain) for o in self.options], dtype=np.int64)

    @property
    def size(self) -> int:
        n = 1
        for o in self.options:
            n *= len(o.domain)
        return n

    def __len__(self) -> int:
        return len(self.options)

    def index_of(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown option {name!r}") from None

    def domain(self, name: str) -> tuple[str, ...]:
        return self.options[self.index_of(name)].domain

    def value_index(self, name: str, value: str) -> int:
        try:
            return self._value_index[self.index_of(name)][value]
        except KeyError:
            raise KeyError(f"unknown value {value!r} for option {name!r}") from None

    def config(self, settings: Mapping[str, object] | None = None, **kw) -> Configuration:
        """Build a configuration from a complete name -> value mapping."""
        merged = {**(settings or {}), **kw}
        unknown = set(merged) - set(self.names)
        if unknown:
            raise KeyError(f"unknown options {sorted(unknown)}")
        missing = [n for n in self.names if n not in merged]
        if missing:
            raise KeyError(f"missing values for {missing}")
        cfg = tuple(str(merged[n]) for n in self.names)
        self.check(cfg)
        return cfg

    def check(self, cfg: Sequence[str]) -> None:
        if len(cfg) != len(self.options):
            raise ValueError(f"configuration has {len(cfg)} values, space has {len(self.options)} options")
        for vi, v, o in zip(self._value_index, cfg, self.options):
            if v not in vi:
                raise ValueError(f"value {v!r} not in domain of {o.name!r}")

    def as_dict(self, cfg: Configuration) -> dict[str, str]:
        return dict(zip(self.names, cfg))

    def format_config(self, cfg: Configuration) -> str:
        return " ".join(f"{n}={v}" for n, v in zip(self.names, cfg))

    def encode(self, configs: Iterable[Configuration]) -> np.ndarray:
        """Return an (n, k) int64 matrix of domain indices."""
        vidx = self._value_index
        rows = [[vi[v] for vi, v in zip(vidx, c)] for c in configs]
        if not rows:
            return np.zeros((0, len(self.options)), dtype=np.int64)
        return np.asarray(rows, dtype=np.int64)

    def decode(self, X: np.ndarray) -> list[Configuration]:
        doms = [o.domain for o in self.options]
        return [tuple(d[i] for d, i in zip(doms, row)) for row in np.asarray(X).tolist()]

    def index_matrix(self, start: int = 0, stop: int | None = None) -> np.ndarray:
        """Domain-index rows of configurations ``start..stop`` in lexicographic order."""
        stop = self.size if stop is None else stop
        return _accel.decode(np.arange(start, stop, dtype=np.int64), self.radices)

    def render(self) -> str:
        return "".join(f"{o.name}: {','.join(o.domain)}\n" for o in self.options)

    def fingerprint(self) -> str:
        return hashlib.sha256(self.render().encode("utf-8")).hexdigest()


def parse_space(text: str) -> ConfigSpace:
    """Parse ``name: v1,v2,...`` lines; ``#`` starts a comment line."""
    options: list[OptionDef] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        name, sep, rest = line.partition(":")
        if not sep:
            raise SpaceError("expected 'name: v1,v2,...'", lineno)
        name = name.strip()
        values = [v.strip() for v in rest.split(",")]
        if name in seen:
            raise SpaceError(f"duplicate option name {name!r}", lineno)
        if not rest.strip() or any(not v for v in values):
            raise SpaceError(f"empty domain or empty value for option {name!r}", lineno)
        if len(set(values)) != len(values):
            raise SpaceError(f"duplicate value in domain of {name!r}", lineno)
        try:
            options.append(OptionDef(name, tuple(values)))
        except SpaceError as e:
            raise SpaceError(str(e), lineno) from None
        seen.add(name)
    if not options:
        raise SpaceError("space file defines no options")
    return ConfigSpace(tuple(options))


def load_space(path) -> ConfigSpace:
    with open(path, encoding="utf-8") as fh:
        return parse_space(fh.read())


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def covering_columns(radices: Sequence[int], rng: np.random.Generator) -> np.ndarray:
    """Index matrix with ``max(radices)`` rows where every column takes every value."""
    rows = max(radices) if len(radices) else 1
    out = np.empty((rows, len(radices)), dtype=np.int64)
    for j, d in enumerate(radices):
        col = np.concatenate([rng.permutation(d), rng.integers(0, d, size=rows - d)])
        out[:, j] = rng.permutation(col)
    return out


def one_way_covering(space: ConfigSpace, seed=None,
                     fixed: Mapping[str, str] | None = None) -> list[Configuration]:
    """Random 1-way covering array, optionally with some settings held fixed.

    Every value of every free option shows up in at least one row; the number
    of rows is the largest free domain size (one row if nothing is free).
    """
    rng = as_rng(seed)
    fixed = dict(fixed or {})
    for name, value in fixed.items():
        space.value_index(name, value)
    free = [j for j, n in enumerate(space.names) if n not in fixed]
    radices = [len(space.options[j].domain) for j in free]
    block = covering_columns(radices, rng) if free else np.zeros((1, 0), dtype=np.int64)
    configs = []
    for row in block.tolist():
        vals = dict(fixed)
        for j, vi in zip(free, row):
            vals[space.names[j]] = space.options[j].domain[vi]
        configs.append(tuple(vals[n] for n in space.names))
    return configs


def enumerate_all(space: ConfigSpace, chunk: int = 1 << 16) -> Iterator[Configuration]:
    """Every configuration once, lexicographic over domain indices."""
    total = space.size
    for start in range(0, total, chunk):
        yield from space.decode(space.index_matrix(start, min(total, start + chunk)))
