"""Time the numba and pure-numpy kernel paths side by side.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from irhm_polaron import _kernels, models


def cases():
    string_sites = np.array([3, 1, 1, 0, 0, 2], dtype=np.int64)
    string_creates = np.array([True, False, True, False, True, False])
    yield "hcb_string_matrix N=10", (10, string_sites, string_creates), "hcb_string_matrix"

    gain, lose = models.displacement_factors(1.0, 10)
    rng = np.random.default_rng(0)
    vecs = rng.normal(size=(12, 11**4)) + 1j * rng.normal(size=(12, 11**4))
    yield "apply_two_site N=4 M=10 x12", (vecs, gain, lose, 0, 2, 4, 11), "apply_two_site"

    k = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    k = 1e-3 * (k + k.conj().T)
    psi = rng.normal(size=16) + 1j * rng.normal(size=16)
    rho = np.outer(psi, psi.conj()) / np.vdot(psi, psi)
    yield "rk4_commutator 16x16 10^4 steps", (k, rho, 0.01, 10_000, 100), "rk4_commutator"


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    print(f"{'kernel':36s} {'numba [ms]':>12s} {'numpy [ms]':>12s} {'speedup':>9s}")
    for label, call_args, name in cases():
        fast = getattr(_kernels, f"{name}_numba")
        slow = getattr(_kernels, f"{name}_numpy")
        fast(*call_args)  # compile outside the timed region
        t_fast = min(timeit.repeat(lambda: fast(*call_args), number=1, repeat=args.repeat))
        t_slow = min(timeit.repeat(lambda: slow(*call_args), number=1, repeat=args.repeat))
        print(f"{label:36s} {1e3 * t_fast:12.3f} {1e3 * t_slow:12.3f} {t_slow / t_fast:9.1f}")


if __name__ == "__main__":
    main()
