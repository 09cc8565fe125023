"""Coverage backends and the per-run coverage cache."""

from __future__ import annotations

import logging
import re
import shlex
import subprocess
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .formula import FormulaError, Interaction, check_formula, evaluate, parse_formula
from .programs import builtin_space, eval_builtin
from .space import ConfigSpace, Configuration

log = logging.getLogger(__name__)

CoverageSet = frozenset


class RunnerError(RuntimeError):
    """A whole batch failed, or a backend could not be set up."""


class BackendError(RuntimeError):
    """Running one configuration failed."""


class CoverageCache:
    """Configuration -> coverage, first result wins; remembers insertion order."""

    def __init__(self):
        self._entries: dict[Configuration, frozenset] = {}
        self.errors: dict[Configuration, str] = {}
        self.executions = 0
        self._lock = threading.Lock()

    def __contains__(self, cfg) -> bool:
        return cfg in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __getitem__(self, cfg) -> frozenset:
        return self._entries[cfg]

    def get(self, cfg, default=None):
        return self._entries.get(cfg, default)

    def add(self, cfg: Configuration, cov: Iterable[str]) -> frozenset:
        with self._lock:
            return self._entries.setdefault(cfg, frozenset(cov))

    def add_error(self, cfg: Configuration, message: str) -> None:
        with self._lock:
            self.errors.setdefault(cfg, message)

    def configs(self) -> list[Configuration]:
        return list(self._entries)

    def items(self):
        return self._entries.items()

    def locations(self) -> set[str]:
        out: set[str] = set()
        for cov in self._entries.values():
            out |= cov
        return out

    def partition(self, loc: str) -> tuple[list[Configuration], list[Configuration]]:
        hits, misses = [], []
        for cfg, cov in self._entries.items():
            (hits if loc in cov else misses).append(cfg)
        return hits, misses

    def known(self, cfg) -> bool:
        """Cached or already failed: either way, not worth running again."""
        return cfg in self._entries or cfg in self.errors


class Runner:
    """Executes one configuration and returns its covered locations."""

    deterministic = True

    def __init__(self, space: ConfigSpace):
        self.space = space

    def execute(self, cfg: Configuration) -> frozenset:
        raise NotImplementedError

    def __call__(self, cfg: Configuration) -> frozenset:
        return self.execute(cfg)


class BuiltinRunner(Runner):
    def __init__(self, name: str, space: ConfigSpace | None = None):
        expected = builtin_space(name)
        if space is not None and space != expected:
            raise RunnerError(f"space does not match builtin program {name!r}")
        super().__init__(expected)
        self.name = name

    def execute(self, cfg):
        return eval_builtin(self.name, cfg)


def eval_spec(spec: Mapping[str, Interaction], cfg: Configuration, space: ConfigSpace) -> frozenset:
    """Locations whose formula ``cfg`` satisfies."""
    X = space.encode([cfg])
    return frozenset(loc for loc, f in spec.items() if evaluate(f, space, X)[0])


class SpecRunner(Runner):
    """A synthetic program: location ``l`` is covered iff its formula holds."""

    def __init__(self, spec: Mapping[str, Interaction], space: ConfigSpace):
        super().__init__(space)
        for loc, f in spec.items():
            try:
                check_formula(f, space)
            except FormulaError as e:
                raise RunnerError(f"location {loc}: {e}") from None
        self.spec = dict(spec)

    def execute(self, cfg):
        return eval_spec(self.spec, cfg, self.space)

    def execute_many(self, X):
        """Coverage matrix for encoded configurations (used for exhaustive runs)."""
        return {loc: evaluate(f, self.space, X) for loc, f in self.spec.items()}


def parse_spec_file(text: str, space: ConfigSpace) -> dict[str, Interaction]:
    """``location: formula`` lines; ``#`` comments."""
    spec = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        loc, sep, body = line.partition(":")
        if not sep or not loc.strip():
            raise RunnerError(f"line {lineno}: expected 'location: formula'")
        try:
            spec[loc.strip()] = parse_formula(body, space)
        except FormulaError as e:
            raise RunnerError(f"line {lineno}: {e}") from None
    return spec


def parse_config_line(line: str, space: ConfigSpace) -> Configuration:
    cfg = tuple(v.strip() for v in line.split(","))
    space.check(cfg)
    return cfg


def parse_oracle(text: str, space: ConfigSpace) -> dict[Configuration, frozenset]:
    db = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        left, sep, right = line.partition("->")
        if not sep:
            raise RunnerError(f"oracle line {lineno}: expected 'v1,...,vn -> loc1;loc2'")
        try:
            cfg = parse_config_line(left, space)
        except ValueError as e:
            raise RunnerError(f"oracle line {lineno}: {e}") from None
        locs = frozenset(x.strip() for x in right.split(";") if x.strip())
        db.setdefault(cfg, locs)
    return db


class OracleRunner(Runner):
    """Looks coverage up in a precomputed table; a missing entry is an error."""

    def __init__(self, path, space: ConfigSpace):
        super().__init__(space)
        self.path = Path(path)
        self.db = parse_oracle(self.path.read_text(encoding="utf-8"), space)

    def execute(self, cfg):
        try:
            return self.db[cfg]
        except KeyError:
            raise BackendError(f"configuration not in oracle {self.path}: {self.space.format_config(cfg)}") from None


_PLACEHOLDER = re.compile(r"\{([A-Za-z_][A-Za-z0-9_.\-]*)\}")
_COV_LINE = re.compile(r"^COV\s+(\S+)\s*$")


class CommandRunner(Runner):
    """Runs an external program once per configuration.

    ``{name}`` placeholders in the argv template are replaced by the value of
    option ``name``; stdout lines ``COV <location>`` give the coverage.
    """

    deterministic = False

    def __init__(self, template: str | Sequence[str], space: ConfigSpace, timeout: float | None = 60.0):
        super().__init__(space)
        self.argv = shlex.split(template) if isinstance(template, str) else list(template)
        if not self.argv:
            raise RunnerError("empty command template")
        for tok in self.argv:
            for name in _PLACEHOLDER.findall(tok):
                if name not in space.names:
                    raise RunnerError(f"command template refers to unknown option {name!r}")
        self.timeout = timeout

    def command(self, cfg: Configuration) -> list[str]:
        values = self.space.as_dict(cfg)
        return [_PLACEHOLDER.sub(lambda m: values[m.group(1)], tok) for tok in self.argv]

    def execute(self, cfg):
        argv = self.command(cfg)
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=self.timeout)
        except subprocess.TimeoutExpired:
            raise BackendError(f"timeout after {self.timeout}s: {argv}") from None
        except OSError as e:
            raise BackendError(f"cannot execute {argv[0]!r}: {e}") from None
        if proc.returncode != 0:
            raise BackendError(f"exit status {proc.returncode}: {proc.stderr.strip()[:200]}")
        cov = set()
        for line in proc.stdout.splitlines():
            m = _COV_LINE.match(line.strip())
            if m:
                cov.add(m.group(1))
        return frozenset(cov)


@dataclass(frozen=True)
class RunnerSpec:
    """``builtin:NAME``, ``oracle:FILE``, ``cmd:TEMPLATE`` or ``spec:FILE``."""

    kind: str
    target: str
    timeout: float | None = 60.0

    KINDS = ("builtin", "oracle", "cmd", "spec")

    @classmethod
    def parse(cls, text: str, timeout: float | None = 60.0) -> "RunnerSpec":
        kind, sep, target = text.partition(":")
        if not sep or kind not in cls.KINDS or not target:
            raise ValueError(f"runner must be one of {', '.join(k + ':...' for k in cls.KINDS)}; got {text!r}")
        return cls(kind, target, timeout)

    def default_space(self) -> ConfigSpace | None:
        return builtin_space(self.target) if self.kind == "builtin" else None

    def build(self, space: ConfigSpace | None = None) -> Runner:
        if self.kind == "builtin":
            return BuiltinRunner(self.target, space)
        if space is None:
            raise RunnerError(f"a space file is required for {self.kind} runners")
        if self.kind == "oracle":
            return OracleRunner(self.target, space)
        if self.kind == "spec":
            return SpecRunner(parse_spec_file(Path(self.target).read_text(encoding="utf-8"), space), space)
        return CommandRunner(self.target, space, self.timeout)


def run_configs(runner: Runner, cache: CoverageCache, configs: Iterable[Configuration],
                jobs: int = 1) -> dict[Configuration, frozenset]:
    """Coverage for ``configs``, executing only the ones not cached yet.

    Failures are recorded per configuration in ``cache.errors``; a
    :class:`RunnerError` is raised only when every executed configuration of
    the batch failed.
    """
    configs = list(dict.fromkeys(configs))
    todo = [c for c in configs if c not in cache and c not in cache.errors]

    def one(cfg):
        try:
            return cfg, runner.execute(cfg), None
        except BackendError as e:
            return cfg, None, str(e)

    if jobs > 1 and len(todo) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, todo))
    else:
        results = [one(c) for c in todo]

    failures = 0
    for cfg, cov, err in results:
        cache.executions += 1
        if err is None:
            cache.add(cfg, cov)
        else:
            failures += 1
            cache.add_error(cfg, err)
            log.warning("backend failure: %s", err)
    if todo and failures == len(todo):
        raise RunnerError(f"all {failures} configurations in the batch failed; last error: {results[-1][2]}")
    return {c: cache[c] for c in configs if c in cache}


def rerun_check(runner: Runner, configs: Iterable[Configuration], k: int) -> dict[Configuration, list[frozenset]]:
    """Run every configuration ``k`` times; report those whose coverage varies."""
    unstable = {}
    for cfg in configs:
        seen = []
        for _ in range(k):
            try:
                seen.append(runner.execute(cfg))
            except BackendError as e:
                seen.append(frozenset({f"<error: {e}>"}))
        if len(set(seen)) > 1:
            unstable[cfg] = seen
    return unstable
