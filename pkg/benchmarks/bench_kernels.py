"""Time the numba kernels against their numpy fallbacks.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``. Both
implementations are imported side by side, so the environment flag that
selects the default backend does not matter here. Results are also checked
for agreement before timing.
"""
import argparse
import timeit

import numpy as np

from encaqc._kernels import IMPLEMENTATIONS


def cases(rng):
    n = 10
    x, z = int(rng.integers(1 << n)), int(rng.integers(1 << n))
    d = 64
    vals = np.sort(rng.normal(size=d))
    omega = np.subtract.outer(vals, vals)
    tau = np.linspace(0.0, 10.0, 401)
    g = np.exp(-tau) * (1.0 + 0.1j)
    xs = rng.integers(1 << 20, size=(4, 400)).astype(np.uint64)
    return {
        "pauli_dense": ((n, x, z, 1), "n=10"),
        "bohr_sum": ((omega, tau, g), "64x64 x 401 nodes"),
        "anticommutation": ((xs[0], xs[1], xs[2], xs[3]), "400x400, 20 qubits"),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if "numba" not in IMPLEMENTATIONS:
        print("numba is not importable; only the numpy backend is available")
        return 0
    rng = np.random.default_rng(0)
    print(f"{'kernel':16s} {'case':22s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s}")
    for name, (call_args, label) in cases(rng).items():
        f_np = IMPLEMENTATIONS["numpy"][name]
        f_nb = IMPLEMENTATIONS["numba"][name]
        ref, got = f_np(*call_args), f_nb(*call_args)  # also compiles
        if not np.allclose(ref, got, atol=1e-10):
            raise SystemExit(f"{name}: numba and numpy results differ")
        t_np = min(timeit.repeat(lambda: f_np(*call_args), number=3, repeat=args.repeat)) / 3
        t_nb = min(timeit.repeat(lambda: f_nb(*call_args), number=3, repeat=args.repeat)) / 3
        print(f"{name:16s} {label:22s} {1e3 * t_np:11.3f} {1e3 * t_nb:11.3f} {t_np / t_nb:8.2f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
