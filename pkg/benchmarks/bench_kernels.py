"""Compare the compiled and pure-Python tridiagonal kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

Times a bare Thomas solve at several sizes and one full march of the
built-in example (eps=2^-14, M=256) under each backend.
"""

import argparse
import timeit

import numpy as np

from shishkin_robin import build_space_mesh, build_time_mesh, example_problem, kernels, march


def random_system(n, rng):
    lower = rng.uniform(-1, 1, n - 1)
    upper = rng.uniform(-1, 1, n - 1)
    diag = 2.5 + rng.uniform(0, 1, n)
    rhs = rng.uniform(-1, 1, n)
    return lower, diag, upper, rhs


def best(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = {"python": kernels.python_thomas_solve}
    if kernels.compiled_thomas_solve is not None:
        backends["cython"] = kernels.compiled_thomas_solve
    else:
        print("compiled extension not built; timing the pure-Python kernel only")

    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}" + "".join(f"{name:>14}" for name in backends) + f"{'speedup':>10}")
    for n in (65, 257, 1025, 4097):
        sys = random_system(n, rng)
        times = {name: best(lambda s=solve: s(*sys), args.repeat, 200) for name, solve in backends.items()}
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{'thomas n=' + str(n):<22}" + "".join(f"{t * 1e6:>12.1f}us" for t in times.values())
              + f"{speed:>9.1f}x")

    p = example_problem(2.0 ** -14)
    active = kernels.thomas_solve
    for N in (64, 512):
        sm, tm = build_space_mesh(p.epsilon, p.alpha, N), build_time_mesh(1.0, 256)
        times = {}
        for name, solve in backends.items():
            kernels.thomas_solve = solve
            times[name] = best(lambda: march(p, sm, tm), args.repeat, 1)
        kernels.thomas_solve = active
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{'march N=' + str(N) + ' M=256':<22}" + "".join(f"{t * 1e3:>12.1f}ms" for t in times.values())
              + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
