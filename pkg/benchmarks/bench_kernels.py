"""Time the compiled kernels against the pure-Python fallback.

Usage::

    python benchmarks/bench_kernels.py --n 100000 --repeat 5
"""
import argparse
import timeit

import numpy as np

from fraclap import _kernels_py

try:
    from fraclap import _kernels as compiled
except ImportError:  # extension not built
    compiled = None


def best_of(fn, repeat: int) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100_000, help="samples per call")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    tau = np.sort(rng.uniform(0.0, 60.0, args.n))
    wave = np.sin(np.linspace(0.0, 400.0, args.n)) + 0.01 * rng.standard_normal(args.n)
    cases = {
        "profile(s=0.3)": lambda m: m.profile(0.3, tau),
        "sign_changes": lambda m: m.sign_changes(wave, 1e-3),
    }
    print(f"{'kernel':<18}{'python [s]':>12}{'cython [s]':>12}{'speedup':>10}")
    for name, call in cases.items():
        t_py = best_of(lambda: call(_kernels_py), args.repeat)
        if compiled is None:
            print(f"{name:<18}{t_py:>12.4g}{'n/a':>12}{'n/a':>10}")
            continue
        t_c = best_of(lambda: call(compiled), args.repeat)
        print(f"{name:<18}{t_py:>12.4g}{t_c:>12.4g}{t_py / t_c:>10.1f}")


if __name__ == "__main__":
    main()
