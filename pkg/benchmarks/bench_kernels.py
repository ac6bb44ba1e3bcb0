"""Compare the compiled and pure-Python kernels.

    python benchmarks/bench_kernels.py [--repeat 3] [--sizes 6 10 16]

Times one transport solve per random instance and a full ``theta`` run per
random model, for every available backend, and checks that both backends
return the same numbers.
"""
import argparse
import time

import numpy as np

from smmdist import available_backends
from smmdist.fixpoint import theta
from smmdist.generators import RESIDENCE_POOL, random_model
from smmdist.model import SmmModel


def best_of(repeat, fn):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def transport_instances(n, count, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        mu, nu = rng.random(n), rng.random(n)
        out.append((mu / mu.sum(), nu / nu.sum(), rng.random((n, n))))
    return out


def dense_model(n, seed):
    """Every live state reaches every state; one label, so all pairs are free."""
    rng = np.random.default_rng(seed)
    states = [f"s{i}" for i in range(n)]
    live = states[:-1]
    trans = {}
    for s in live:
        w = rng.integers(1, 9, n)
        trans[s] = {t: f"{int(x)}/{int(w.sum())}" for t, x in zip(states, w)}
    res = {s: RESIDENCE_POOL[int(rng.integers(2, 5))] for s in live}  # exponentials
    return SmmModel.build(states, [states[-1]], trans, res)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--sizes", type=int, nargs="+", default=[6, 10, 16])
    ap.add_argument("--models", type=int, default=5, help="models per size")
    args = ap.parse_args()

    backends = available_backends()
    if "cython" not in backends:
        print("compiled extension not built; timing the Python kernels only")
    names = sorted(backends)
    print(f"{'task':<28}" + "".join(f"{n:>12}" for n in names) + f"{'speedup':>10}")

    for n in args.sizes:
        insts = transport_instances(n, 200, n)
        row, vals = {}, {}
        for name in names:
            k = backends[name]
            row[name], vals[name] = best_of(
                args.repeat, lambda: [k.kantorovich_value(*x) for x in insts])
        _print_row(f"transport n={n} (x200)", row, names)
        _check(vals)

    for n in args.sizes:
        models = [random_model(1000 * n + i, max_states=n, copy_fraction=0.2)
                  for i in range(args.models)]
        row, vals = {}, {}
        for name in names:
            k = backends[name]
            row[name], vals[name] = best_of(
                args.repeat, lambda: [theta(m, kernels=k).distance.values for m in models])
        _print_row(f"theta <= {n} states (x{args.models})", row, names)
        _check(vals)

    for n in args.sizes:
        m = dense_model(n, n)
        row, vals = {}, {}
        for name in names:
            k = backends[name]
            row[name], vals[name] = best_of(args.repeat,
                                            lambda: [theta(m, kernels=k).distance.values])
        _print_row(f"theta dense {n} states", row, names)
        _check(vals)


def _print_row(task, row, names):
    speed = row["python"] / row["cython"] if "cython" in row else float("nan")
    print(f"{task:<28}" + "".join(f"{row[n] * 1e3:>10.1f}ms" for n in names) + f"{speed:>9.1f}x")


def _check(vals):
    ref = vals["python"]
    for name, v in vals.items():
        if not all(np.allclose(a, b, atol=1e-9) for a, b in zip(v, ref)):
            raise SystemExit(f"backend {name} disagrees with the Python kernels")


if __name__ == "__main__":
    main()
