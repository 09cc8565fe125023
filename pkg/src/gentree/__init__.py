"""Learn configuration interactions with iteratively refined decision trees."""

from .dtree import DecisionTree, TreePath, build_tree, rank_paths, split_score, test_tree
from .engine import EngineParams, RunState, gen_new_configs, post_process, run_engine, select_paths
from .formula import (FALSE, TRUE, Atom, And, Or, canonicalize, classify_form, equivalent, from_tree,
                      length, parse_formula, render_formula)
from .runner import (BuiltinRunner, CommandRunner, CoverageCache, OracleRunner, RunnerSpec, SpecRunner,
                     eval_spec, run_configs)
from .space import ConfigSpace, OptionDef, enumerate_all, one_way_covering, parse_space

__version__ = "0.1.0"
