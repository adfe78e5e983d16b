"""Time the numba kernels against the pure-numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from bellkit._kernels import numpy_impl

try:
    from bellkit._kernels import _numba as numba_impl
except ImportError:
    numba_impl = None

CASES = [(2, 2), (3, 3), (2, 2, 2), (9, 9), (4, 4, 4)]


def problem(dims, seed=0):
    rng = np.random.default_rng(seed)
    size = int(np.prod(dims))
    g = rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    dmax = max(dims)
    obs = np.zeros((len(dims), 2, dmax, dmax), dtype=complex)
    for n, d in enumerate(dims):
        for x in range(2):
            q, _ = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
            top = q[:, : d // 2]
            obs[n, x, :d, :d] = 2 * top @ top.conj().T - np.eye(d)
    weights = rng.choice([-2.0, 2.0], size=2 ** len(dims))
    ranks = np.array([[d // 2] * 2 for d in dims], dtype=np.int64)
    return rho, np.array(dims, dtype=np.int64), obs, weights, ranks


def bench(impl, dims, repeat):
    rho, d, obs, g, ranks = problem(dims)
    calls = {
        "product_expectations": lambda: impl.product_expectations(rho, d, obs),
        "effective_operator": lambda: impl.effective_operator(rho, d, obs, g, 0),
        "ascend(50 sweeps)": lambda: impl.ascend(rho, d, obs.copy(), g, ranks, 50, 0.0),
    }
    out = {}
    for name, fn in calls.items():
        fn()  # warm up / compile
        out[name] = min(timeit.repeat(fn, number=1, repeat=repeat))
    return out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    print(f"{'dims':<12}{'kernel':<24}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for dims in CASES:
        ref = bench(numpy_impl, dims, args.repeat)
        fast = bench(numba_impl, dims, args.repeat) if numba_impl else {}
        for name, t in ref.items():
            tn = fast.get(name)
            extra = f"{tn * 1e3:12.3f}{t / tn:10.1f}" if tn else f"{'-':>12}{'-':>10}"
            print(f"{str(dims):<12}{name:<24}{t * 1e3:12.3f}{extra}")


if __name__ == "__main__":
    main()
