"""Interaction formulas over ``option=value`` atoms.

Formulas are negation free: a negated setting is written as the complement
value set (``s=0`` for a boolean ``s``, ``e in {0,1}`` for ``e != 2``).
Semantic work (equivalence, minimisation) is done by enumerating the
assignments of the options a formula mentions, which is exact for finite
domains.
"""

from __future__ import annotations

import itertools
import logging
import re
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .space import ConfigSpace

log = logging.getLogger(__name__)

# projected spaces above this many assignments are not enumerated
ENUM_CAP = 1 << 20


class FormulaError(ValueError):
    pass


class ProjectionTooLarge(FormulaError):
    pass


@dataclass(frozen=True)
class Const:
    value: bool

    def __repr__(self):
        return "TRUE" if self.value else "FALSE"


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Atom:
    option: str
    values: frozenset

    def __init__(self, option: str, values):
        if isinstance(values, str):
            values = (values,)
        values = frozenset(values)
        if not values:
            raise FormulaError(f"empty value set for {option!r}")
        object.__setattr__(self, "option", option)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class And:
    args: tuple


@dataclass(frozen=True)
class Or:
    args: tuple


Interaction = Union[Const, Atom, And, Or]


def conj(*args: Interaction) -> Interaction:
    out: list = []
    for a in args:
        if a == TRUE:
            continue
        if a == FALSE:
            return FALSE
        out.extend(a.args if isinstance(a, And) else (a,))
    if not out:
        return TRUE
    return out[0] if len(out) == 1 else And(tuple(out))


def disj(*args: Interaction) -> Interaction:
    out: list = []
    for a in args:
        if a == FALSE:
            continue
        if a == TRUE:
            return TRUE
        out.extend(a.args if isinstance(a, Or) else (a,))
    if not out:
        return FALSE
    return out[0] if len(out) == 1 else Or(tuple(out))


def options_of(f: Interaction) -> set[str]:
    if isinstance(f, Atom):
        return {f.option}
    if isinstance(f, (And, Or)):
        return set().union(*(options_of(a) for a in f.args))
    return set()


def atoms_of(f: Interaction) -> list[Atom]:
    if isinstance(f, Atom):
        return [f]
    if isinstance(f, (And, Or)):
        return [x for a in f.args for x in atoms_of(a)]
    return []


# ---------------------------------------------------------------------------
# text form
# ---------------------------------------------------------------------------

def _value_key(v: str):
    try:
        return (0, float(v), v)
    except ValueError:
        return (1, 0.0, v)


def render_formula(f: Interaction) -> str:
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Atom):
        vals = sorted(f.values, key=_value_key)
        if len(vals) == 1:
            return f"{f.option}={vals[0]}"
        return f"{f.option} in {{{','.join(vals)}}}"
    if isinstance(f, And):
        return " & ".join(f"({render_formula(a)})" if isinstance(a, Or) else render_formula(a)
                          for a in f.args)
    if isinstance(f, Or):
        return " | ".join(f"({render_formula(a)})" if isinstance(a, And) else render_formula(a)
                          for a in f.args)
    raise TypeError(f"not a formula: {f!r}")


_TOKEN_RE = re.compile(r"\s*(?:(?P<punct>[&|(){},=])|(?P<word>[^\s=&|(){},]+))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise FormulaError(f"unexpected character at position {pos}")
        kind = "punct" if m.group("punct") else "word"
        toks.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.end = len(text)

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else ("eof", "", self.end)

    def take(self, expected: str | None = None):
        tok = self.peek()
        if tok[0] == "eof" or (expected is not None and tok[1] != expected):
            want = repr(expected) if expected else "a token"
            raise FormulaError(f"expected {want} at position {tok[2]}, got {tok[1] or 'end of input'!r}")
        self.i += 1
        return tok

    def formula(self):
        terms = [self.term()]
        while self.peek()[1] == "|":
            self.take("|")
            terms.append(self.term())
        return disj(*terms) if len(terms) > 1 else terms[0]

    def term(self):
        factors = [self.factor()]
        while self.peek()[1] == "&":
            self.take("&")
            factors.append(self.factor())
        return conj(*factors) if len(factors) > 1 else factors[0]

    def factor(self):
        kind, text, pos = self.peek()
        if text == "(":
            self.take("(")
            f = self.formula()
            self.take(")")
            return f
        if kind != "word":
            raise FormulaError(f"unexpected {text!r} at position {pos}")
        self.take()
        if text == "true":
            return TRUE
        if text == "false":
            return FALSE
        nxt = self.peek()
        if nxt[1] == "=":
            self.take("=")
            k, value, vpos = self.take()
            if k != "word":
                raise FormulaError(f"expected a value at position {vpos}")
            return Atom(text, (value,))
        if nxt[1] == "in":
            self.take("in")
            self.take("{")
            values = [self._value()]
            while self.peek()[1] == ",":
                self.take(",")
                values.append(self._value())
            self.take("}")
            return Atom(text, values)
        raise FormulaError(f"expected '=' or 'in' after {text!r} at position {nxt[2]}")

    def _value(self):
        k, value, pos = self.take()
        if k != "word":
            raise FormulaError(f"expected a value at position {pos}")
        return value


def parse_formula(text: str, space: ConfigSpace | None = None) -> Interaction:
    """Parse ``s=0 & (u=1 | v in {0,2})`` style text."""
    p = _Parser(text)
    if not p.toks:
        raise FormulaError("empty formula")
    f = p.formula()
    if p.i != len(p.toks):
        kind, tok, pos = p.peek()
        raise FormulaError(f"unexpected {tok!r} at position {pos}")
    if space is not None:
        check_formula(f, space)
    return f


def check_formula(f: Interaction, space: ConfigSpace) -> None:
    for a in atoms_of(f):
        if a.option not in space.names:
            raise FormulaError(f"unknown option {a.option!r}")
        dom = space.domain(a.option)
        bad = a.values - set(dom)
        if bad:
            raise FormulaError(f"unknown value(s) {sorted(bad)} for option {a.option!r}")


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _atom_mask(a: Atom, space: ConfigSpace) -> int:
    m = 0
    for v in a.values:
        try:
            m |= 1 << space.value_index(a.option, v)
        except KeyError as e:
            raise FormulaError(str(e.args[0])) from None
    return m


def evaluate(f: Interaction, space: ConfigSpace, X: np.ndarray,
             columns: dict[str, int] | None = None) -> np.ndarray:
    """Vectorised truth value of ``f`` on encoded configurations.

    ``X`` holds domain indices; ``columns`` maps option names to columns of
    ``X`` (defaults to the space's option order).
    """
    X = np.asarray(X)
    n = X.shape[0]
    if isinstance(f, Const):
        return np.full(n, f.value, dtype=bool)
    if isinstance(f, Atom):
        if f.option not in space.names:
            raise FormulaError(f"unknown option {f.option!r}")
        col = columns[f.option] if columns is not None else space.index_of(f.option)
        return ((_atom_mask(f, space) >> X[:, col]) & 1).astype(bool)
    if isinstance(f, And):
        out = np.ones(n, dtype=bool)
        for a in f.args:
            out &= evaluate(a, space, X, columns)
        return out
    if isinstance(f, Or):
        out = np.zeros(n, dtype=bool)
        for a in f.args:
            out |= evaluate(a, space, X, columns)
        return out
    raise TypeError(f"not a formula: {f!r}")


def satisfies(f: Interaction, space: ConfigSpace, cfg) -> bool:
    return bool(evaluate(f, space, space.encode([cfg]))[0])


def _ordered(space: ConfigSpace, names: Iterable[str]) -> list[str]:
    names = set(names)
    for n in names:
        if n not in space.names:
            raise FormulaError(f"unknown option {n!r}")
    return [n for n in space.names if n in names]


def projection_size(space: ConfigSpace, names: Iterable[str]) -> int:
    size = 1
    for n in names:
        size *= len(space.domain(n))
    return size


def truth_table(f: Interaction, space: ConfigSpace, names: Sequence[str]) -> np.ndarray:
    """Truth values of ``f`` over every assignment of ``names``, shaped by domain sizes."""
    shape = tuple(len(space.domain(n)) for n in names)
    size = int(np.prod(shape, dtype=np.int64)) if shape else 1
    if size > ENUM_CAP:
        raise ProjectionTooLarge(f"projected space of {size} assignments exceeds {ENUM_CAP}")
    grid = np.indices(shape).reshape(len(shape), -1).T if shape else np.zeros((1, 0), dtype=np.int64)
    cols = {n: i for i, n in enumerate(names)}
    return evaluate(f, space, grid, cols).reshape(shape)


def equivalent(f: Interaction, g: Interaction, space: ConfigSpace) -> bool:
    names = _ordered(space, options_of(f) | options_of(g))
    return bool(np.array_equal(truth_table(f, space, names), truth_table(g, space, names)))


def satisfying_assignment(f: Interaction, space: ConfigSpace) -> dict[str, str] | None:
    """First satisfying assignment of the options of ``f`` (lexicographic), or None."""
    names = _ordered(space, options_of(f))
    tt = truth_table(f, space, names).ravel()
    hits = np.flatnonzero(tt)
    if hits.size == 0:
        return None
    idx = np.unravel_index(int(hits[0]), tuple(len(space.domain(n)) for n in names)) if names else ()
    return {n: space.domain(n)[int(i)] for n, i in zip(names, idx)}


# ---------------------------------------------------------------------------
# minimisation
# ---------------------------------------------------------------------------

def _bits(mask: int) -> list[int]:
    return [i for i in range(mask.bit_length()) if (mask >> i) & 1]


def _inside(tt: np.ndarray, cube: Sequence[int]) -> bool:
    if tt.ndim == 0:
        return bool(tt)
    return bool(tt[np.ix_(*[_bits(m) for m in cube])].all())


def prime_cubes(tt: np.ndarray) -> list[tuple[int, ...]]:
    """All prime implicants of a multi-valued truth table.

    A cube is one value bitmask per dimension.  Primes are built one
    dimension at a time: for every value subset ``A`` of the first option,
    the primes of the conjunction of the cofactors in ``A`` are extended by
    ``A`` when ``A`` is exactly the set of cofactors that contain them.
    """
    memo: dict = {}
    return _primes(np.asarray(tt, dtype=bool), memo)


def _primes(tt: np.ndarray, memo: dict) -> list[tuple[int, ...]]:
    key = (tt.shape, tt.tobytes())
    hit = memo.get(key)
    if hit is not None:
        return hit
    full = tuple((1 << d) - 1 for d in tt.shape)
    if not tt.any():
        res: list = []
    elif tt.all():
        res = [full]
    else:
        d = tt.shape[0]
        cof = [tt[v] for v in range(d)]
        meet: dict[int, np.ndarray | None] = {0: None}
        res = []
        for A in range(1, 1 << d):
            top = A.bit_length() - 1
            rest = A & ~(1 << top)
            base = meet.get(rest)
            if rest and base is None:
                meet[A] = None
                continue
            g = cof[top] if not rest else base & cof[top]
            if not g.any():
                meet[A] = None
                continue
            meet[A] = g
            for c in _primes(g, memo):
                amax = 0
                for v in range(d):
                    if (A >> v) & 1 or _inside(cof[v], c):
                        amax |= 1 << v
                if amax == A:
                    res.append((A,) + c)
    memo[key] = res
    return res


def _cube_cost(cube, full) -> int:
    return sum(1 for m, f in zip(cube, full) if m != f)


def _cover(tt: np.ndarray, primes: list[tuple[int, ...]]) -> list[tuple[int, ...]]:
    """Pick an irredundant set of primes covering the on-set, low atom count first."""
    full = tuple((1 << d) - 1 for d in tt.shape)
    pts = np.argwhere(tt)
    cov = []
    for c in primes:
        inside = np.ones(len(pts), dtype=bool)
        for j, m in enumerate(c):
            if m != full[j]:
                inside &= ((m >> pts[:, j]) & 1).astype(bool)
        cov.append(int.from_bytes(np.packbits(inside, bitorder="little").tobytes(), "little"))
    allpts = (1 << len(pts)) - 1
    cost = [_cube_cost(c, full) for c in primes]

    chosen: set[int] = set()
    # essential primes
    for p in range(len(pts)):
        owners = [i for i, m in enumerate(cov) if (m >> p) & 1]
        if len(owners) == 1:
            chosen.add(owners[0])
    covered = 0
    for i in chosen:
        covered |= cov[i]
    rest = [i for i in range(len(primes)) if i not in chosen and cov[i] & ~covered]
    if covered != allpts:
        if len(rest) <= 14:
            best = None
            for r in range(1, len(rest) + 1):
                for combo in itertools.combinations(rest, r):
                    m = covered
                    for i in combo:
                        m |= cov[i]
                    if m == allpts:
                        key = (sum(cost[i] for i in combo) + r, combo)
                        if best is None or key < best:
                            best = key
                if best is not None:
                    break
            chosen.update(best[1])
        else:
            while covered != allpts:
                i = max(rest, key=lambda i: (bin(cov[i] & ~covered).count("1") / (cost[i] + 1), -i))
                chosen.add(i)
                covered |= cov[i]
            for i in sorted(chosen, key=lambda i: -cost[i]):
                others = 0
                for j in chosen:
                    if j != i:
                        others |= cov[j]
                if others == allpts:
                    chosen.discard(i)
    return [primes[i] for i in sorted(chosen)]


def _relevant_axes(tt: np.ndarray) -> list[int]:
    keep = []
    for ax in range(tt.ndim):
        first = np.take(tt, [0], axis=ax)
        if not (tt == first).all():
            keep.append(ax)
    return keep


def minimize_table(tt: np.ndarray, space: ConfigSpace, names: Sequence[str]) -> Interaction:
    """Smallest DNF (with value-set atoms) found for a truth table over ``names``."""
    tt = np.asarray(tt, dtype=bool)
    if tt.all():
        return TRUE
    if not tt.any():
        return FALSE
    keep = _relevant_axes(tt)
    tt = tt[tuple(slice(None) if ax in keep else 0 for ax in range(tt.ndim))]
    names = [names[ax] for ax in keep]
    cubes = _cover(tt, prime_cubes(tt))
    terms = []
    for cube in cubes:
        atoms = []
        for n, m in zip(names, cube):
            dom = space.domain(n)
            if m != (1 << len(dom)) - 1:
                atoms.append(Atom(n, [dom[i] for i in _bits(m)]))
        terms.append(atoms)
    return _factor(terms)


def _factor(terms: list[list[Atom]]) -> Interaction:
    if len(terms) == 1:
        return conj(*terms[0])
    common = [a for a in terms[0] if all(a in t for t in terms[1:])]
    rest = [[a for a in t if a not in common] for t in terms]
    if any(not t for t in rest):
        return conj(*common)
    ordered = sorted((conj(*t) for t in rest), key=lambda f: (len(atoms_of(f)), render_formula(f)))
    return conj(*common, Or(tuple(ordered)))


def canonicalize(f: Interaction, space: ConfigSpace, strict: bool = False) -> Interaction:
    """Equivalent minimised form of ``f``.

    When the projected space is too large the input is returned flattened but
    unminimised (or :class:`ProjectionTooLarge` is raised with ``strict``).
    """
    check_formula(f, space)
    names = _ordered(space, options_of(f))
    if projection_size(space, names) > ENUM_CAP:
        if strict:
            raise ProjectionTooLarge(f"cannot canonicalize over {len(names)} options")
        log.warning("formula over %d options left unminimised", len(names))
        return _flatten(f)
    return minimize_table(truth_table(f, space, names), space, names)


def _flatten(f: Interaction) -> Interaction:
    if isinstance(f, And):
        return conj(*(_flatten(a) for a in f.args))
    if isinstance(f, Or):
        return disj(*(_flatten(a) for a in f.args))
    return f


# ---------------------------------------------------------------------------
# trees, forms, lengths
# ---------------------------------------------------------------------------

def from_paths(paths) -> Interaction:
    """Disjunction of the conditions of hit paths."""
    terms = [conj(*(Atom(o, (v,)) for o, v in p.settings)) for p in paths if p.hit]
    return disj(*terms) if terms else FALSE


def from_tree(tree) -> Interaction:
    return from_paths(tree.paths())


FORMS = ("single", "conj", "disj", "mixed")


def classify_form(f: Interaction) -> str:
    if isinstance(f, (Const, Atom)) or len(options_of(f)) <= 1:
        return "single"
    if isinstance(f, And) and all(isinstance(a, Atom) and len(a.values) == 1 for a in f.args):
        return "conj"
    if isinstance(f, Or) and all(isinstance(a, Atom) for a in f.args):
        return "disj"
    return "mixed"


def length(f: Interaction) -> int:
    return len(options_of(f))
