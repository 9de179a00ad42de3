"""Compare the compiled and pure-Python graph kernels.

    python3 benchmarks/bench_kernels.py [--nodes N] [--degree D] [--repeat R]

Times box, reach and refine on a random labelled graph with each available
backend, checks that the backends agree, then times an end-to-end run of
the coin-box plan (execution plus bisimulation contraction).
"""

import argparse
import time

import numpy as np

from mapkit import kernels
from mapkit.initial import generate_initial
from mapkit.kripke import contract
from mapkit.lang import corpus_path, load_theory
from mapkit.transition import run_plan

PLAN = ["distract(A,C)", "signal(A,B)", "open(A)", "peek(A)", "peek(B)", "distract(B,A)", "peek(B)"]


def random_graph(rng, n, degree, n_labels=3):
    counts = rng.poisson(degree, n)
    indptr = np.zeros(n + 1, dtype=np.int32)
    np.cumsum(counts, out=indptr[1:])
    indices = rng.integers(0, n, indptr[-1]).astype(np.int32)
    for u in range(n):
        indices[indptr[u]:indptr[u + 1]].sort()
    labels = rng.integers(0, n_labels, indptr[-1]).astype(np.int32)
    return indptr, indices, labels


def best_of(repeat, fn):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def bench_kernels(n, degree, repeat):
    rng = np.random.default_rng(0)
    indptr, indices, labels = random_graph(rng, n, degree)
    truth = (rng.random(n) < 0.9).astype(np.uint8)
    seeds = (rng.random(n) < 0.001).astype(np.uint8)
    init = rng.integers(0, 4, n).astype(np.int32)
    cases = {
        "box": lambda: kernels.box(indptr, indices, truth),
        "reach": lambda: kernels.reach(indptr, indices, seeds),
        "refine": lambda: kernels.refine(init, indptr, indices, labels),
    }
    results = {}
    for backend in sorted(kernels.BACKENDS):
        kernels.use(backend)
        for name, fn in cases.items():
            results[backend, name] = best_of(repeat, fn)
    return results


def bench_end_to_end(repeat):
    D = load_theory(corpus_path("coin_box.mad"))
    initial = generate_initial(D).bstate()

    def go():
        final = run_plan(D, PLAN, initial)
        return [len(contract(s).structure.worlds) for s in final]

    out = {}
    for backend in sorted(kernels.BACKENDS):
        kernels.use(backend)
        out[backend] = best_of(repeat, go)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=200_000)
    ap.add_argument("--degree", type=float, default=4.0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    default = kernels.BACKEND
    print(f"backends: {', '.join(sorted(kernels.BACKENDS))} (default {default})")
    if "cython" not in kernels.BACKENDS:
        print("compiled kernels not built; only the fallback is timed")

    res = bench_kernels(args.nodes, args.degree, args.repeat)
    print(f"\nkernels on {args.nodes} nodes, mean out-degree {args.degree}")
    print(f"{'kernel':<8} " + " ".join(f"{b:>10}" for b in sorted(kernels.BACKENDS)) + "   speedup")
    for name in ("box", "reach", "refine"):
        row = {b: res[b, name] for b in kernels.BACKENDS}
        outs = [np.asarray(v[1]) for v in row.values()]
        assert all(np.array_equal(outs[0], o) for o in outs), f"{name}: backends disagree"
        line = f"{name:<8} " + " ".join(f"{row[b][0] * 1e3:>8.1f}ms" for b in sorted(row))
        if "cython" in row:
            line += f"   {row['python'][0] / row['cython'][0]:>6.1f}x"
        print(line)

    e2e = bench_end_to_end(args.repeat)
    print(f"\ncoin-box plan of {len(PLAN)} actions, then contraction")
    for b, (t, sizes) in sorted(e2e.items()):
        print(f"{b:<8} {t * 1e3:8.1f}ms   contracted sizes {sizes}")
    kernels.use(default)


if __name__ == "__main__":
    main()
