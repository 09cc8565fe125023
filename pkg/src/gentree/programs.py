"""Builtin example programs with known interactions."""

from __future__ import annotations

from .formula import parse_formula
from .space import ConfigSpace, Configuration, parse_space

FIG2_SPACE = parse_space("""\
s: 0,1
t: 0,1
u: 0,1
v: 0,1
a: 0,1,2
b: 0,1,2
c: 0,1,2
d: 0,1,2
e: 0,1,2
""")

FIG2_INTERACTIONS = {
    "L0": "true",
    "L1": "a=1 | b=2",
    "L2": "a in {0,2} & b in {0,1} & c=0 & d=1",
    "L3": "u=1 & v=1",
    "L4": "u=0 | v=0",
    "L5": "s=1 & e=2 & (u=0 | v=0)",
    "L6": "(s=0 | e in {0,1}) & (u=0 | v=0)",
    "L7": "s=0 & e=2 & (u=0 | v=0)",
    "L8": "s=0 & e=2 & ((u=1 & v=0) | (u=0 & v=1))",
}

C50LIMIT_SPACE = parse_space("s: 0,1\nt: 0,1\nz: 0,1,2,3,4\n")
C50LIMIT_INTERACTIONS = {"HIT": "s=1 & t=1 & z in {1,2,3}"}


def fig2(cfg: dict) -> set[str]:
    s, t, u, v = (cfg[k] == "1" for k in "stuv")
    a, b, c, d, e = (int(cfg[k]) for k in "abcde")
    cov = {"L0"}
    if a == 1 or b == 2:
        cov.add("L1")
    elif c == 0 and d == 1:
        cov.add("L2")
    if u and v:
        cov.add("L3")
        return cov
    cov.add("L4")
    if s and e == 2:
        cov.add("L5")
        return cov
    cov.add("L6")
    if e == 2:
        cov.add("L7")
        if u or v:
            cov.add("L8")
    return cov


def c50limit(cfg: dict) -> set[str]:
    s, t, z = cfg["s"] == "1", cfg["t"] == "1", int(cfg["z"])
    return {"HIT"} if s and t and 1 <= z <= 3 else set()


BUILTINS = {
    "fig2": (FIG2_SPACE, fig2, FIG2_INTERACTIONS),
    "c50limit": (C50LIMIT_SPACE, c50limit, C50LIMIT_INTERACTIONS),
}


def builtin_space(name: str) -> ConfigSpace:
    try:
        return BUILTINS[name][0]
    except KeyError:
        raise KeyError(f"unknown builtin program {name!r}; known: {sorted(BUILTINS)}") from None


def builtin_interactions(name: str) -> dict:
    space = builtin_space(name)
    return {loc: parse_formula(text, space) for loc, text in BUILTINS[name][2].items()}


def eval_builtin(name: str, cfg: Configuration, space: ConfigSpace | None = None) -> frozenset[str]:
    """Coverage of a builtin program under ``cfg``."""
    expected = builtin_space(name)
    if space is not None and space != expected:
        raise ValueError(f"space does not match builtin program {name!r}")
    expected.check(cfg)
    return frozenset(BUILTINS[name][1](expected.as_dict(cfg)))
