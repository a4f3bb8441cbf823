"""Benchmark the compiled scan kernel against the numpy fallback.

Two workloads: one long detuning scan (few solves, large batch) and a
parameter sweep of many small scans (kernel-call overhead dominated).

    python benchmarks/bench_scan.py [--points N] [--sweeps N]
"""

import argparse
import time

import numpy as np

from nucav import _kernel_py
from nucav.cavity import CavityParams, CouplingParams
from nucav.ensemble import HyperfineConfig
from nucav.linear_response import build_effective_system, canonical_geometries

try:
    from nucav import _kernel
except ImportError:
    _kernel = None


def kernel_args(system, deltas, delta_c):
    return (system.energies, system.gamma, system.coupling, system.drive_unit,
            system.detection, deltas, delta_c, system.kappa, system.kappa_r,
            system.pol_overlap)


def time_call(fn, *args, repeats=5):
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=200_001)
    parser.add_argument("--sweeps", type=int, default=2000)
    args = parser.parse_args()

    xi = 18000.0
    cav = CavityParams(kappa=45 * xi, kappa_r=25 * xi, detuning_slope=-0.5 * xi, xi=xi)
    coupling = CouplingParams.from_ng2(1400 * xi)
    geom = canonical_geometries()["a"]
    hyperfine = HyperfineConfig.fe57_33t(axis=geom.b_axis)
    system = build_effective_system(geom, cav, coupling, hyperfine, 0.0)

    backends = [("numpy", _kernel_py.scan_reflectance)]
    if _kernel is not None:
        backends.insert(0, ("cython", _kernel.scan_reflectance))
    else:
        print("compiled kernel not available; timing the fallback only")

    deltas = np.linspace(-200.0, 200.0, args.points)
    delta_c = np.zeros_like(deltas)
    print(f"\nlong scan: {args.points} points, six-level system")
    reference = None
    for name, fn in backends:
        best = time_call(fn, *kernel_args(system, deltas, delta_c))
        rate = args.points / best / 1e6
        print(f"  {name:<7} {best * 1e3:9.2f} ms   {rate:6.2f} M points/s")
        r, _ = fn(*kernel_args(system, deltas, delta_c))
        if reference is None:
            reference = r
        else:
            dev = np.max(np.abs(r - reference) / np.abs(reference))
            print(f"          max relative deviation vs first backend: {dev:.2e}")

    small = np.linspace(-200.0, 200.0, 21)
    small_dc = np.zeros_like(small)
    print(f"\nsweep: {args.sweeps} scans x {small.size} points")
    for name, fn in backends:
        start = time.perf_counter()
        for _ in range(args.sweeps):
            fn(*kernel_args(system, small, small_dc))
        elapsed = time.perf_counter() - start
        print(f"  {name:<7} {elapsed * 1e3:9.2f} ms total   "
              f"{elapsed / args.sweeps * 1e6:8.1f} us/scan")


if __name__ == "__main__":
    main()
