import itertools

import pytest
from hypothesis import given, settings, strategies as st

from gentree.space import (ConfigSpace, OptionDef, SpaceError, enumerate_all, one_way_covering,
                           parse_space)
from gentree.synth import random_space


def test_parse_small_space():
    space = parse_space("s: 0,1\ne: 0,1,2")
    assert space.names == ("s", "e")
    assert space.domain("e") == ("0", "1", "2")
    assert space.size == 6


def test_fig2_space_size(fig2_space):
    assert len(fig2_space) == 9
    assert fig2_space.size == 3888


def test_parse_comments_and_whitespace():
    space = parse_space("# header\n\n  fmt :  %Y , %d-%m ,iso \n# trailing\nx:a,b\n")
    assert space.names == ("fmt", "x")
    assert space.domain("fmt") == ("%Y", "%d-%m", "iso")


@pytest.mark.parametrize("text, line, needle", [
    ("x: 0,0", 1, "duplicate value"),
    ("x: 0,1\nx: 2,3", 2, "duplicate option"),
    ("x: 0,1\ny:", 2, "empty"),
    ("x: 0,1\n\ny 0,1", 3, "expected"),
    ("x: 0", 1, "at least two"),
])
def test_parse_errors_carry_line_numbers(text, line, needle):
    with pytest.raises(SpaceError) as info:
        parse_space(text)
    assert info.value.line == line
    assert needle in str(info.value)


def test_config_validation(fig2_space):
    with pytest.raises(ValueError):
        fig2_space.check(("0",) * 8)
    with pytest.raises(ValueError):
        fig2_space.check(("2",) + ("0",) * 8)
    with pytest.raises(KeyError):
        fig2_space.config(s=0)


def _covers(space, configs):
    return all(any(c[j] == v for c in configs)
               for j, opt in enumerate(space.options) for v in opt.domain)


def test_one_way_covering_fig2(fig2_space):
    configs = one_way_covering(fig2_space, seed=3)
    assert len(configs) == 3
    assert _covers(fig2_space, configs)


def test_one_way_covering_single_boolean():
    space = parse_space("s: 0,1")
    assert sorted(one_way_covering(space, seed=0)) == [("0",), ("1",)]


def test_one_way_covering_mixed_by_scanning():
    space = parse_space("s: 0,1\nz: 0,1,2,3,4")
    configs = one_way_covering(space, seed=11)
    assert len(configs) == 5
    for j, opt in enumerate(space.options):
        for v in opt.domain:
            assert any(c[j] == v for c in configs), (opt.name, v)


def test_one_way_covering_is_deterministic(fig2_space):
    assert one_way_covering(fig2_space, 5) == one_way_covering(fig2_space, 5)


def test_one_way_covering_with_fixed_settings(fig2_space):
    configs = one_way_covering(fig2_space, 0, fixed={"e": "2", "u": "0", "v": "0"})
    assert len(configs) == 3
    assert all(fig2_space.as_dict(c)["e"] == "2" and c[2] == "0" and c[3] == "0" for c in configs)
    free = parse_space("".join(f"{o.name}: {','.join(o.domain)}\n" for o in fig2_space.options
                               if o.name not in "euv"))
    projected = [tuple(v for n, v in zip(fig2_space.names, c) if n not in "euv") for c in configs]
    assert _covers(free, projected)


def test_one_way_covering_all_fixed(fig2_space):
    cfg = fig2_space.config(s=0, t=0, u=0, v=0, a=0, b=0, c=0, d=0, e=0)
    assert one_way_covering(fig2_space, 0, fixed=fig2_space.as_dict(cfg)) == [cfg]


def test_enumerate_small():
    assert list(enumerate_all(parse_space("s: 0,1"))) == [("0",), ("1",)]
    assert list(enumerate_all(parse_space("s: 0,1\nt: 0,1"))) == [
        ("0", "0"), ("0", "1"), ("1", "0"), ("1", "1")]


def test_enumerate_fig2(fig2_space):
    configs = list(enumerate_all(fig2_space))
    assert len(configs) == len(set(configs)) == 3888
    assert configs == sorted(configs, key=lambda c: [fig2_space.value_index(n, v)
                                                      for n, v in zip(fig2_space.names, c)])


def test_enumerate_matches_itertools_product():
    space = parse_space("a: x,y,z\nb: 1,0\nc: p,q")
    assert list(enumerate_all(space, chunk=4)) == list(itertools.product(*(o.domain for o in space.options)))


spaces = st.integers(0, 2**32 - 1).map(lambda s: random_space(s, max_options=6, max_size=5000, max_domain=6))


@settings(max_examples=200, deadline=None)
@given(space=spaces, seed=st.integers(0, 2**16))
def test_covering_property(space, seed):
    configs = one_way_covering(space, seed)
    assert len(configs) == max(len(o.domain) for o in space.options)
    assert _covers(space, configs)


@settings(max_examples=100, deadline=None)
@given(space=spaces)
def test_render_round_trip(space):
    assert parse_space(space.render()) == space


@settings(max_examples=30, deadline=None)
@given(space=st.integers(0, 2**32 - 1).map(lambda s: random_space(s, max_options=5, max_size=400)))
def test_enumeration_count_property(space):
    configs = list(enumerate_all(space))
    assert len(configs) == len(set(configs)) == space.size


def test_option_def_rejects_bad_names():
    with pytest.raises(SpaceError):
        OptionDef("in", ("0", "1"))
    with pytest.raises(SpaceError):
        ConfigSpace((OptionDef("x", ("0", "1")), OptionDef("x", ("0", "1"))))
