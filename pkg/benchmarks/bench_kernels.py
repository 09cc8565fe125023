"""Time the numba kernels against their numpy fallbacks, then a whole engine run.

    python benchmarks/bench_kernels.py [--repeat N]

The engine comparison runs in two subprocesses, one with GENTREE_NO_NUMBA=1.
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from gentree import _accel

ENGINE_SNIPPET = """
import time
from gentree import _accel
from gentree.engine import EngineParams, run_engine
from gentree.runner import SpecRunner
from gentree.synth import random_program
progs = [random_program(1000 + i) for i in range(20)]
run_engine(progs[0][0], SpecRunner(progs[0][1], progs[0][0]), EngineParams(seed=0))  # warm-up / jit
t = time.perf_counter()
for i, (space, spec) in enumerate(progs):
    run_engine(space, SpecRunner(spec, space), EngineParams(seed=i))
print(_accel.backend(), time.perf_counter() - t)
"""


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        sys.exit("numba unavailable (or GENTREE_NO_NUMBA set); nothing to compare")

    rng = np.random.default_rng(0)
    radices = np.array([2, 3, 4, 2, 3, 5, 2, 3, 4, 2, 3, 2], dtype=np.int64)
    n = 200_000
    X = np.stack([rng.integers(r, size=n) for r in radices], axis=1).astype(np.int64)
    y = rng.integers(2, size=n).astype(np.int64)
    masks = np.stack([rng.integers(1, 1 << r, size=64) for r in radices], axis=1).astype(np.int64)
    flat = rng.integers(int(np.prod(radices)), size=n).astype(np.int64)

    cases = [
        ("label_counts", lambda: _accel.nb_label_counts(X, y, 5), lambda: _accel.np_label_counts(X, y, 5)),
        ("match_cubes", lambda: _accel.nb_match_cubes(X, masks), lambda: _accel.np_match_cubes(X, masks)),
        ("decode", lambda: _accel.nb_decode(flat, radices), lambda: _accel.np_decode(flat, radices)),
    ]
    print(f"{'kernel':<14}{'numba ms':>10}{'numpy ms':>10}{'speedup':>9}")
    for name, fast, slow in cases:
        fast()  # compile
        tf, ts = best_of(fast, args.repeat), best_of(slow, args.repeat)
        print(f"{name:<14}{tf * 1e3:>10.2f}{ts * 1e3:>10.2f}{ts / tf:>8.1f}x")

    print("\nengine, 20 random programs:")
    for flag in ("0", "1"):
        env = dict(os.environ, GENTREE_NO_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", ENGINE_SNIPPET], env=env, capture_output=True,
                             text=True, check=True).stdout.split()
        print(f"  {out[0]:<6} {float(out[1]):.2f}s")


if __name__ == "__main__":
    main()
